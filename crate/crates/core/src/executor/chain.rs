//! One-dimensional harmonic chain integrated with velocity Verlet.
//!
//! Particle 0 is pinned at the origin. The last particle is driven:
//! `x(t) = L0 * (1 + strain_rate * t)` with `L0 = n - 1`. Masses, spring
//! stiffness and rest length are all 1, so the chain starts at rest length
//! with `x_i = i`. Interior particles get seeded velocities drawn uniformly
//! from `[-velocity_scale, velocity_scale]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n_particles: usize,
    pub steps: u64,
    pub dt: f64,
    pub strain_rate: f64,
    pub velocity_scale: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            n_particles: 32,
            steps: 1000,
            dt: 0.01,
            strain_rate: 0.0,
            velocity_scale: 0.0,
        }
    }
}

/// Observables of one integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSample {
    pub step: u64,
    /// Mean spring tension `x_{i+1} - x_i - 1` over all springs.
    pub mean_force: f64,
    pub kinetic_energy: f64,
    pub potential_energy: f64,
}

impl ChainSample {
    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy + self.potential_energy
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicChain {
    params: ChainParams,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    accel: Vec<f64>,
    step: u64,
}

impl HarmonicChain {
    /// Requires `n_particles >= 2`.
    pub fn new(params: ChainParams, seed: u64) -> Self {
        let n = params.n_particles;
        assert!(n >= 2, "a chain needs at least two particles");
        let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut velocities = vec![0.0; n];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if params.velocity_scale > 0.0 {
            for v in &mut velocities[1..n - 1] {
                *v = rng.gen_range(-params.velocity_scale..=params.velocity_scale);
            }
        }
        velocities[n - 1] = Self::rest_length(n) * params.strain_rate;
        let mut chain = Self {
            params,
            positions,
            velocities,
            accel: vec![0.0; n],
            step: 0,
        };
        chain.update_accel();
        chain
    }

    fn rest_length(n: usize) -> f64 {
        (n - 1) as f64
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    fn update_accel(&mut self) {
        let x = &self.positions;
        let n = x.len();
        self.accel[0] = 0.0;
        self.accel[n - 1] = 0.0;
        for i in 1..n - 1 {
            self.accel[i] = (x[i + 1] - x[i] - 1.0) - (x[i] - x[i - 1] - 1.0);
        }
    }

    /// Advance one step. Interior particles follow the half-kick, drift,
    /// half-kick scheme; the ends follow their prescribed motion.
    pub fn advance(&mut self) {
        let n = self.positions.len();
        let dt = self.params.dt;
        for i in 1..n - 1 {
            self.velocities[i] += 0.5 * dt * self.accel[i];
            self.positions[i] += dt * self.velocities[i];
        }
        self.step += 1;
        let t = self.step as f64 * dt;
        let l0 = Self::rest_length(n);
        self.positions[n - 1] = l0 * (1.0 + self.params.strain_rate * t);
        self.update_accel();
        for i in 1..n - 1 {
            self.velocities[i] += 0.5 * dt * self.accel[i];
        }
    }

    pub fn sample(&self) -> ChainSample {
        let x = &self.positions;
        let springs = x.len() - 1;
        let mut stretch_sum = 0.0;
        let mut potential = 0.0;
        for w in x.windows(2) {
            let s = w[1] - w[0] - 1.0;
            stretch_sum += s;
            potential += 0.5 * s * s;
        }
        let kinetic = self.velocities.iter().map(|v| 0.5 * v * v).sum();
        ChainSample {
            step: self.step,
            mean_force: stretch_sum / springs as f64,
            kinetic_energy: kinetic,
            potential_energy: potential,
        }
    }

    /// First 16 hex digits of SHA-256 over the little-endian position bits.
    pub fn digest(&self) -> String {
        positions_digest(&self.positions)
    }
}

pub fn positions_digest(positions: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for x in positions {
        hasher.update(x.to_le_bytes());
    }
    let full = hasher.finalize();
    full[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Scientific notation with 9 significant digits and a signed two-digit
/// exponent, `-1.23456789e-03`.
pub fn sci(value: f64) -> String {
    if value == 0.0 {
        return "0.00000000e+00".to_string();
    }
    let raw = format!("{value:.8e}");
    let (mantissa, exponent) = raw.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exponent.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}
