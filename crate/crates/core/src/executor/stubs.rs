//! Deterministic stand-ins for the MD tool chain.
//!
//! Payload formats:
//!
//! * `trajectory-table`: CSV with header `step,mean_force,total_energy,digest`,
//!   one row per step `0..=steps`, numbers in 9-significant-digit scientific
//!   notation. A final comment line `#positions,x0,x1,...` carries the last
//!   snapshot.
//! * `plot-data`: CSV of the columns selected by the script line
//!   `columns = a,b` (default `step,mean_force`).
//! * `frame-list`: CSV `frame,step,digest`, one row per `every`-th step.
//! * `video`: a `VIDEO v1 fps=<fps> frames=<n>` header followed by the frame
//!   rows.
//! * `histogram`: CSV `bin,lower,upper,count` over the final positions.

use std::fmt::Write as _;
use std::sync::Arc;

use super::adapter::{AdapterError, AdapterSpec, Outputs, RunContext, ToolAdapter};
use super::chain::{sci, ChainParams, HarmonicChain};

pub const TRAJECTORY_TABLE: &str = "trajectory-table";
pub const PLOT_DATA: &str = "plot-data";
pub const FRAME_LIST: &str = "frame-list";
pub const VIDEO: &str = "video";
pub const HISTOGRAM: &str = "histogram";

pub const TRAJECTORY_HEADER: &str = "step,mean_force,total_energy,digest";
const POSITIONS_PREFIX: &str = "#positions,";

pub(crate) fn builtin_adapters() -> Vec<Arc<dyn ToolAdapter>> {
    vec![
        Arc::new(LammpsStub::new()),
        Arc::new(RStub::new()),
        Arc::new(AtomEyeStub::new()),
        Arc::new(FfmpegStub::new()),
        Arc::new(DebyerStub::new()),
    ]
}

fn single(kind: &str, bytes: String) -> Outputs {
    [(kind.to_string(), bytes.into_bytes())].into()
}

/// Reads `ChainParams` from the node parameters, applying the defaults.
pub fn chain_params(ctx: &RunContext<'_>) -> Result<ChainParams, AdapterError> {
    let d = ChainParams::default();
    let n = ctx.positive_int("n_particles", d.n_particles as u64, 2)?;
    Ok(ChainParams {
        n_particles: usize::try_from(n)
            .map_err(|_| AdapterError::bad_parameter("n_particles is too large"))?,
        steps: ctx.positive_int("steps", d.steps, 1)?,
        dt: ctx.positive_float("dt", d.dt)?,
        strain_rate: ctx.finite_float("strain_rate", d.strain_rate)?,
        velocity_scale: ctx.non_negative_float("velocity_scale", d.velocity_scale)?,
    })
}

/// Full trajectory table for a chain run.
pub fn trajectory_table(params: ChainParams, seed: u64) -> String {
    let mut chain = HarmonicChain::new(params, seed);
    let mut out = String::with_capacity(64 * (params.steps as usize + 2));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    let row = |chain: &HarmonicChain, out: &mut String| {
        let s = chain.sample();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.step,
            sci(s.mean_force),
            sci(s.total_energy()),
            chain.digest()
        );
    };
    row(&chain, &mut out);
    for _ in 0..params.steps {
        chain.advance();
        row(&chain, &mut out);
    }
    out.push_str(POSITIONS_PREFIX.trim_end_matches(','));
    for x in &chain.positions {
        out.push(',');
        out.push_str(&sci(*x));
    }
    out.push('\n');
    out
}

/// Parsed trajectory-table: data rows plus the trailing snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable<'a> {
    pub columns: Vec<&'a str>,
    pub rows: Vec<Vec<&'a str>>,
    pub positions: Option<Vec<f64>>,
}

impl<'a> TrajectoryTable<'a> {
    pub fn parse(text: &'a str) -> Result<Self, AdapterError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| AdapterError::malformed("empty trajectory table"))?;
        let columns: Vec<&str> = header.split(',').collect();
        let mut rows = Vec::new();
        let mut positions = None;
        for (i, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix(POSITIONS_PREFIX) {
                let parsed: Result<Vec<f64>, _> = rest.split(',').map(str::parse).collect();
                positions = Some(parsed.map_err(|_| {
                    AdapterError::malformed("positions line holds a non-numeric value")
                })?);
                continue;
            }
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(AdapterError::malformed(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    cells.len(),
                    columns.len()
                )));
            }
            rows.push(cells);
        }
        Ok(Self {
            columns,
            rows,
            positions,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

pub struct LammpsStub {
    spec: AdapterSpec,
}

impl LammpsStub {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new("lammps-stub", &[], &[TRAJECTORY_TABLE]),
        }
    }
}

impl Default for LammpsStub {
    fn default() -> Self {
        Self::new()
    }
}

impl ToolAdapter for LammpsStub {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let params = chain_params(ctx)?;
        Ok(single(TRAJECTORY_TABLE, trajectory_table(params, ctx.seed)))
    }
}

pub struct RStub {
    spec: AdapterSpec,
}

impl RStub {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new("r-stub", &[TRAJECTORY_TABLE], &[PLOT_DATA]),
        }
    }
}

impl Default for RStub {
    fn default() -> Self {
        Self::new()
    }
}

/// Column list from a `columns = a,b` script line; the last one wins.
pub fn script_columns(script: &str) -> Option<Vec<String>> {
    script
        .lines()
        .rev()
        .find_map(|line| {
            let line = line.trim();
            let (key, value) = line.split_once('=')?;
            (key.trim() == "columns").then(|| {
                value
                    .split(',')
                    .map(|c| c.trim().to_string())
                    .filter(|c| !c.is_empty())
                    .collect()
            })
        })
}

impl ToolAdapter for RStub {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let table = TrajectoryTable::parse(ctx.text_input(TRAJECTORY_TABLE)?)?;
        let wanted = ctx
            .script
            .and_then(|s| script_columns(&s.content))
            .unwrap_or_else(|| vec!["step".into(), "mean_force".into()]);
        if wanted.is_empty() {
            return Err(AdapterError::bad_parameter("script selects no columns"));
        }
        let idx: Vec<usize> = wanted
            .iter()
            .map(|c| {
                table
                    .column(c)
                    .ok_or_else(|| AdapterError::bad_parameter(format!("unknown column {c}")))
            })
            .collect::<Result<_, _>>()?;
        let mut out = wanted.join(",");
        out.push('\n');
        for row in &table.rows {
            let cells: Vec<&str> = idx.iter().map(|&i| row[i]).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(single(PLOT_DATA, out))
    }
}

pub struct AtomEyeStub {
    spec: AdapterSpec,
}

impl AtomEyeStub {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new("atomeye-stub", &[TRAJECTORY_TABLE], &[FRAME_LIST]),
        }
    }
}

impl Default for AtomEyeStub {
    fn default() -> Self {
        Self::new()
    }
}

impl ToolAdapter for AtomEyeStub {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let every = ctx.positive_int("every", 100, 1)?;
        let table = TrajectoryTable::parse(ctx.text_input(TRAJECTORY_TABLE)?)?;
        let (step_col, digest_col) = match (table.column("step"), table.column("digest")) {
            (Some(s), Some(d)) => (s, d),
            _ => return Err(AdapterError::malformed("trajectory lacks step or digest column")),
        };
        let mut out = String::from("frame,step,digest\n");
        let mut frame = 0u64;
        for row in &table.rows {
            let step: u64 = row[step_col]
                .parse()
                .map_err(|_| AdapterError::malformed("step is not an integer"))?;
            if step.is_multiple_of(every) {
                let _ = writeln!(out, "{frame},{step},{}", row[digest_col]);
                frame += 1;
            }
        }
        Ok(single(FRAME_LIST, out))
    }
}

pub struct FfmpegStub {
    spec: AdapterSpec,
}

impl FfmpegStub {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new("ffmpeg-stub", &[FRAME_LIST], &[VIDEO]),
        }
    }
}

impl Default for FfmpegStub {
    fn default() -> Self {
        Self::new()
    }
}

impl ToolAdapter for FfmpegStub {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let fps = ctx.positive_int("fps", 25, 1)?;
        let frames = ctx.text_input(FRAME_LIST)?;
        let body: Vec<&str> = frames.lines().skip(1).filter(|l| !l.is_empty()).collect();
        let mut out = format!("VIDEO v1 fps={fps} frames={}\n", body.len());
        for line in body {
            out.push_str(line);
            out.push('\n');
        }
        Ok(single(VIDEO, out))
    }
}

pub struct DebyerStub {
    spec: AdapterSpec,
}

impl DebyerStub {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new("debyer-stub", &[TRAJECTORY_TABLE], &[HISTOGRAM]),
        }
    }
}

impl Default for DebyerStub {
    fn default() -> Self {
        Self::new()
    }
}

/// Equal-width histogram over `[min, max]` of `positions`. The top edge
/// falls in the last bin; a degenerate range puts everything in bin 0.
pub fn position_histogram(positions: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    assert!(bins > 0);
    let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if positions.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in positions {
        let i = if width > 0.0 {
            (((x - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + width * i as f64, lo + width * (i + 1) as f64, c))
        .collect()
}

pub fn histogram_csv(positions: &[f64], bins: usize) -> String {
    let mut out = String::from("bin,lower,upper,count\n");
    for (i, (lower, upper, count)) in position_histogram(positions, bins).into_iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{count}", sci(lower), sci(upper));
    }
    out
}

impl ToolAdapter for DebyerStub {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let bins = ctx.positive_int("bins", 64, 1)?;
        let bins = usize::try_from(bins)
            .ok()
            .filter(|b| *b <= 1 << 20)
            .ok_or_else(|| AdapterError::bad_parameter("bins is too large"))?;
        let table = TrajectoryTable::parse(ctx.text_input(TRAJECTORY_TABLE)?)?;
        let positions = table
            .positions
            .ok_or_else(|| AdapterError::malformed("trajectory has no #positions line"))?;
        Ok(single(HISTOGRAM, histogram_csv(&positions, bins)))
    }
}
