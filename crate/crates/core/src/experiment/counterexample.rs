use super::{check_reps, replicate, RepOutcome};
use crate::cell::{CellPolytope, WindowPolicy};
use crate::direction::{log_budget, DirectionalDistribution};
use crate::error::{Error, Result};
use crate::geom::{Body, Shape, UnitVector};
use crate::linalg;
use crate::metrics::hausdorff_cell;
use crate::process::ProcessParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub body: Body,
    /// `eps_n = n^{-beta}`.
    pub beta: f64,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    /// Outer normal `N(x)` at the touching point; defaults to `e_1`.
    #[serde(default)]
    pub axis: Option<UnitVector>,
    #[serde(default)]
    pub policy: WindowPolicy,
    /// Also run the isotropic control on the same body.
    #[serde(default = "yes")]
    pub control: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub n: u64,
    pub eps_n: f64,
    /// Replications with `delta_n >= eps_n`.
    pub freq_delta_ge: f64,
    /// Replications where some hyperplane separates `y_n = x + eps_n N` from `K`.
    pub freq_separated: f64,
    pub valid_reps: usize,
    pub overflow_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRun {
    pub config: CounterexampleConfig,
    pub distribution: DirectionalDistribution,
    pub touching_point: Vec<f64>,
    pub radius: f64,
    pub per_n: Vec<CounterexampleRow>,
    /// Per replication: number of grid points with `delta_n < eps_n`.
    pub violations: Vec<usize>,
    pub control: Option<Vec<CounterexampleRow>>,
}

/// Touching point `x` on `bd K` with outer normal `axis` and the radius of a
/// ball inside `K` through `x`.
fn touching_ball(body: &Body, axis: &UnitVector) -> Result<(Vec<f64>, f64)> {
    match body.shape() {
        Shape::Ball { .. } | Shape::BallSum { .. } => Ok((body.support_point(axis), body.ball_radius())),
        Shape::Polytope(_) => Err(Error::InvalidConfig("the counterexample needs a body with a rolling ball (ball or ballsum)".into())),
    }
}

struct Tally {
    rows: Vec<CounterexampleRow>,
    violations: Vec<usize>,
}

fn tally(body: &Body, outcomes: &[RepOutcome], cfg: &CounterexampleConfig, x: &[f64], axis: &UnitVector) -> Result<Tally> {
    let mut ge = vec![0usize; cfg.n_grid.len()];
    let mut sep = vec![0usize; cfg.n_grid.len()];
    let mut valid = 0;
    let mut violations = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let RepOutcome::Cells(cells) = o else {
            violations.push(0);
            continue;
        };
        valid += 1;
        let mut v = 0;
        for (k, (cell, &n)) in cells.iter().zip(&cfg.n_grid).enumerate() {
            let eps = (n as f64).powf(-cfg.beta);
            let y = linalg::axpy(x, eps, axis);
            if hausdorff_cell(body, cell)? >= eps {
                ge[k] += 1;
            } else {
                v += 1;
            }
            if separated(cell, &y) {
                sep[k] += 1;
            }
        }
        violations.push(v);
    }
    let over = outcomes.len() - valid;
    let rows = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| CounterexampleRow {
            n,
            eps_n: (n as f64).powf(-cfg.beta),
            freq_delta_ge: ge[k] as f64 / valid.max(1) as f64,
            freq_separated: sep[k] as f64 / valid.max(1) as f64,
            valid_reps: valid,
            overflow_count: over,
        })
        .collect();
    Ok(Tally { rows, violations })
}

/// `y` is cut off by some halfspace of the cell (equivalently, some process
/// hyperplane separates `y` from `K`).
fn separated(cell: &CellPolytope, y: &[f64]) -> bool {
    cell.halfspaces.iter().any(|h| h.slack(y) < 0.0)
}

/// Cells under the cap-starved distribution for `eps_n = n^{-beta}`, with
/// the frequency of `delta_n >= eps_n` per `n`.
pub fn run_counterexample(cfg: &CounterexampleConfig) -> Result<CounterexampleRun> {
    check_reps(cfg.reps)?;
    cfg.policy.validate()?;
    if cfg.n_grid.is_empty() || cfg.n_grid[0] < 1 || cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n_grid must be strictly increasing positive integers".into()));
    }
    if !(cfg.beta > 0.0) {
        return Err(Error::InvalidConfig(format!("beta {} must be positive", cfg.beta)));
    }
    let d = cfg.body.dim();
    let axis = cfg.axis.clone().unwrap_or_else(|| UnitVector::axis(d, 0));
    let (x, r) = touching_ball(&cfg.body, &axis)?;
    let n_max = (*cfg.n_grid.last().unwrap() as usize).max(2);
    let beta = cfg.beta;
    let phi = DirectionalDistribution::cap_starved(axis.clone(), |n| (n as f64).powf(-beta), n_max, log_budget, r)?;
    let grid: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    let params = ProcessParams::new(1.0, phi.clone())?;
    let outcomes = replicate(&params, &cfg.body, &grid, &cfg.policy, cfg.reps, cfg.seed)?;
    let main = tally(&cfg.body, &outcomes, cfg, &x, &axis)?;
    let control = if cfg.control {
        let iso = ProcessParams::new(1.0, DirectionalDistribution::isotropic(d)?)?;
        let outcomes = replicate(&iso, &cfg.body, &grid, &cfg.policy, cfg.reps, cfg.seed ^ 0x5EED_C0DE)?;
        Some(tally(&cfg.body, &outcomes, cfg, &x, &axis)?.rows)
    } else {
        None
    };
    Ok(CounterexampleRun {
        config: cfg.clone(),
        distribution: phi,
        touching_point: x,
        radius: r,
        per_n: main.rows,
        violations: main.violations,
        control,
    })
}
