use super::{check_reps, fit_loglog, quantile, replicate, FitResult, RepOutcome};
use crate::cell::WindowPolicy;
use crate::direction::DirectionalDistribution;
use crate::error::{Error, Result};
use crate::geom::Body;
use crate::metrics::hausdorff_cell;
use crate::process::ProcessParams;
use log::{info, warn};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRunConfig {
    pub body: Body,
    pub distribution: DirectionalDistribution,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub expected_exponent: Option<f64>,
    #[serde(default)]
    pub policy: WindowPolicy,
}

impl RateRunConfig {
    pub fn validate(&self) -> Result<()> {
        check_reps(self.reps)?;
        if self.n_grid.is_empty() || self.n_grid[0] < 2 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("n_grid must be strictly increasing integers >= 2".into()));
        }
        if self.body.dim() != self.distribution.dim() {
            return Err(Error::InvalidConfig("body and distribution dimensions differ".into()));
        }
        self.policy.validate()
    }
}

/// One row of the per-replication table; `delta` is NaN for overflowed reps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub rep: usize,
    pub n: u64,
    pub delta: f64,
    pub hyperplanes: usize,
    pub rounds: usize,
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: u64,
    pub median_delta: f64,
    pub q10: f64,
    pub q90: f64,
    pub overflow_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRun {
    pub config: RateRunConfig,
    pub rows: Vec<RateRow>,
    pub per_n: Vec<PerN>,
    /// `ln median_delta` against `ln(ln n / n)`.
    pub fit: FitResult,
}

fn hypothesis_warnings(cfg: &RateRunConfig) {
    let atomic_only = cfg.distribution.is_purely_atomic();
    if atomic_only && !cfg.body.is_polytope() {
        warn!("purely atomic directions with a non-polytope body: no rate is guaranteed");
    }
    if !atomic_only && !cfg.body.is_polytope() && cfg.distribution.atom_mass() > 0.0 {
        info!("mixed directional distribution; rate exponents depend on the continuous part");
    }
}

/// Coupled cells per replication along `n_grid` (intensity `n`), median
/// `delta` per `n`, and the log-log fit against `ln n / n`.
pub fn run_rate(cfg: &RateRunConfig) -> Result<RateRun> {
    cfg.validate()?;
    if !cfg.distribution.supports_approximation(&cfg.body)? {
        return Err(Error::InvalidConfig(
            "the directional distribution does not cover the surface area measure of the body".into(),
        ));
    }
    hypothesis_warnings(cfg);
    let params = ProcessParams::new(1.0, cfg.distribution.clone())?;
    let grid: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    let outcomes = replicate(&params, &cfg.body, &grid, &cfg.policy, cfg.reps, cfg.seed)?;
    let mut rows = Vec::with_capacity(cfg.reps * grid.len());
    let mut violations = 0;
    for (rep, outcome) in outcomes.iter().enumerate() {
        match outcome {
            RepOutcome::Cells(cells) => {
                let mut last = f64::INFINITY;
                for (cell, &n) in cells.iter().zip(&cfg.n_grid) {
                    let delta = hausdorff_cell(&cfg.body, cell)?;
                    if delta > last {
                        violations += 1;
                    }
                    last = delta;
                    rows.push(RateRow {
                        rep,
                        n,
                        delta,
                        hyperplanes: cell.stats.sampled,
                        rounds: cell.stats.rounds,
                        overflow: false,
                    });
                }
            }
            RepOutcome::Overflow { rounds } => {
                for &n in &cfg.n_grid {
                    rows.push(RateRow { rep, n, delta: f64::NAN, hyperplanes: 0, rounds: *rounds, overflow: true });
                }
            }
        }
    }
    if violations > 0 {
        return Err(Error::CouplingViolated { violations });
    }
    let per_n = summarize(&rows, &cfg.n_grid);
    let points: Vec<(f64, f64)> = per_n
        .iter()
        .filter(|p| p.median_delta > 0.0)
        .map(|p| {
            let n = p.n as f64;
            ((n.ln() / n).ln(), p.median_delta.ln())
        })
        .collect();
    let fit = fit_loglog(&points)?;
    Ok(RateRun { config: cfg.clone(), rows, per_n, fit })
}

pub(crate) fn summarize(rows: &[RateRow], n_grid: &[u64]) -> Vec<PerN> {
    n_grid
        .iter()
        .map(|&n| {
            let mut d: Vec<f64> = rows.iter().filter(|r| r.n == n && !r.overflow).map(|r| r.delta).collect();
            d.sort_by(f64::total_cmp);
            PerN {
                n,
                median_delta: quantile(&d, 0.5),
                q10: quantile(&d, 0.1),
                q90: quantile(&d, 0.9),
                overflow_count: rows.iter().filter(|r| r.n == n && r.overflow).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(body: Body, phi: DirectionalDistribution) -> RateRunConfig {
        RateRunConfig {
            body,
            distribution: phi,
            n_grid: vec![16, 64, 256],
            reps: 8,
            seed: 3,
            expected_exponent: None,
            policy: WindowPolicy::default(),
        }
    }

    #[test]
    fn small_run_is_monotone_and_deterministic() {
        let cfg = small(Body::cube(2, 1.0).unwrap(), DirectionalDistribution::coordinate_atoms(2).unwrap());
        let a = run_rate(&cfg).unwrap();
        let b = run_rate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 24);
        assert!(a.per_n.windows(2).all(|w| w[1].median_delta <= w[0].median_delta));
        assert!(a.fit.slope > 0.0);
    }

    #[test]
    fn rejects_unsupported_pairs() {
        let cfg = small(Body::ball(vec![0.0, 0.0], 1.0).unwrap(), DirectionalDistribution::coordinate_atoms(2).unwrap());
        assert!(matches!(run_rate(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small(Body::cube(2, 1.0).unwrap(), DirectionalDistribution::isotropic(2).unwrap());
        cfg.n_grid = vec![8, 8];
        assert!(run_rate(&cfg).is_err());
    }

    #[test]
    fn overflow_is_counted() {
        let mut cfg = small(Body::cube(2, 1.0).unwrap(), DirectionalDistribution::isotropic(2).unwrap());
        cfg.reps = 30;
        cfg.policy.max_rounds = 1;
        cfg.policy.initial_radius = Some(1.0);
        let r = run_rate(&cfg).unwrap();
        let over = r.per_n[0].overflow_count;
        assert!(over > 0 && over < 30, "{over}");
        assert_eq!(r.rows.iter().filter(|x| x.overflow).count(), 3 * over);
    }
}
