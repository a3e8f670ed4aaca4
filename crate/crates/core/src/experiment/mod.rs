//! Seeded Monte Carlo harnesses.
//!
//! Replication `r` of a run with master seed `s` draws from the stream keyed
//! `(s, r, EXPERIMENT)`, so tables do not depend on thread scheduling.

mod counterexample;
mod fit;
mod persist;
mod rate;
mod tail;

pub use counterexample::{run_counterexample, CounterexampleConfig, CounterexampleRow, CounterexampleRun};
pub use fit::{fit_loglog, FitResult};
pub use persist::{persist, read_rate_csv, write_csv, write_json, Format};
pub use rate::{run_rate, PerN, RateRow, RateRun, RateRunConfig};
pub use tail::{run_tail, PerGamma, TailRow, TailRun, TailRunConfig};

use crate::cell::{cells_along_intensity, CellPolytope, WindowPolicy};
use crate::error::{Error, Result};
use crate::geom::Body;
use crate::process::ProcessParams;
use crate::rng::{tag, RngKey};
use rayon::prelude::*;

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Outcome of one replication: coupled cells, or an overflow.
pub(crate) enum RepOutcome {
    Cells(Vec<CellPolytope>),
    Overflow { rounds: usize },
}

/// Runs `reps` replications of coupled cells along `grid` in parallel.
pub(crate) fn replicate(
    params: &ProcessParams,
    body: &Body,
    grid: &[f64],
    policy: &WindowPolicy,
    reps: usize,
    seed: u64,
) -> Result<Vec<RepOutcome>> {
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngKey::new(seed, rep as u64, tag::EXPERIMENT).rng();
            match cells_along_intensity(params, body, grid, policy, &mut rng) {
                Ok(cells) => Ok(RepOutcome::Cells(cells)),
                Err(Error::WindowOverflow { rounds, .. }) => Ok(RepOutcome::Overflow { rounds }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

pub(crate) fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    Ok(())
}
