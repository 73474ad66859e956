//! Integrate the stub's harmonic chain and report energy conservation, then
//! print the head of the trajectory table the simulation stub emits.

use coursegate::executor::chain::{ChainParams, HarmonicChain};
use coursegate::executor::stubs::trajectory_table;

fn main() {
    let params = ChainParams {
        velocity_scale: 0.5,
        ..ChainParams::default()
    };
    let mut chain = HarmonicChain::new(params, 42);
    let e0 = chain.sample().total_energy();
    let mut worst: f64 = 0.0;
    for _ in 0..params.steps {
        chain.advance();
        worst = worst.max((chain.sample().total_energy() - e0).abs() / e0);
    }
    println!("n={} dt={} steps={}: E0={e0:.6}, max relative drift {worst:.2e}", params.n_particles, params.dt, params.steps);

    let stretched = ChainParams {
        steps: 5,
        strain_rate: 0.01,
        ..ChainParams::default()
    };
    for line in trajectory_table(stretched, 7).lines().take(7) {
        println!("{line}");
    }
}
