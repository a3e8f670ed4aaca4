use super::{check_reps, fit_loglog, replicate, FitResult, RepOutcome};
use crate::cell::WindowPolicy;
use crate::direction::DirectionalDistribution;
use crate::error::{Error, Result};
use crate::geom::Body;
use crate::metrics::{hausdorff_cell, mu_estimate, MuConfig};
use crate::process::ProcessParams;
use log::warn;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRunConfig {
    pub body: Body,
    pub distribution: DirectionalDistribution,
    pub epsilon: f64,
    pub gamma_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub policy: WindowPolicy,
    #[serde(default)]
    pub mu: MuConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub rep: usize,
    pub gamma: f64,
    pub delta: f64,
    pub hyperplanes: usize,
    pub rounds: usize,
    pub overflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerGamma {
    pub gamma: f64,
    pub p_hat: f64,
    pub exceed_count: usize,
    pub valid_reps: usize,
    pub overflow_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRun {
    pub config: TailRunConfig,
    pub rows: Vec<TailRow>,
    pub per_gamma: Vec<PerGamma>,
    /// `ln p_hat` against `gamma` over the levels with `0 < p_hat < 1`.
    pub fit: FitResult,
    pub mu: f64,
    /// `|slope| / mu`, informational.
    pub slope_over_mu: f64,
}

/// Estimates `P{delta(K, Z_K) > eps}` along `gamma_grid` from coupled cells.
pub fn run_tail(cfg: &TailRunConfig) -> Result<TailRun> {
    check_reps(cfg.reps)?;
    cfg.policy.validate()?;
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(cfg.epsilon));
    }
    if cfg.epsilon > 1.0 {
        warn!("epsilon {} exceeds 1; the tail bound is stated for eps <= 1", cfg.epsilon);
    }
    if cfg.gamma_grid.iter().any(|&g| g < 1.0) {
        warn!("intensities below 1 in gamma_grid");
    }
    let params = ProcessParams::new(1.0, cfg.distribution.clone())?;
    let outcomes = replicate(&params, &cfg.body, &cfg.gamma_grid, &cfg.policy, cfg.reps, cfg.seed)?;
    let mut rows = Vec::with_capacity(cfg.reps * cfg.gamma_grid.len());
    for (rep, outcome) in outcomes.iter().enumerate() {
        match outcome {
            RepOutcome::Cells(cells) => {
                for (cell, &gamma) in cells.iter().zip(&cfg.gamma_grid) {
                    rows.push(TailRow {
                        rep,
                        gamma,
                        delta: hausdorff_cell(&cfg.body, cell)?,
                        hyperplanes: cell.stats.sampled,
                        rounds: cell.stats.rounds,
                        overflow: false,
                    });
                }
            }
            RepOutcome::Overflow { rounds } => {
                for &gamma in &cfg.gamma_grid {
                    rows.push(TailRow { rep, gamma, delta: f64::NAN, hyperplanes: 0, rounds: *rounds, overflow: true });
                }
            }
        }
    }
    let per_gamma: Vec<PerGamma> = cfg
        .gamma_grid
        .iter()
        .enumerate()
        .map(|(k, &gamma)| {
            let level = rows.iter().skip(k).step_by(cfg.gamma_grid.len());
            let valid: Vec<&TailRow> = level.clone().filter(|r| !r.overflow).collect();
            let exceed = valid.iter().filter(|r| r.delta > cfg.epsilon).count();
            PerGamma {
                gamma,
                p_hat: if valid.is_empty() { f64::NAN } else { exceed as f64 / valid.len() as f64 },
                exceed_count: exceed,
                valid_reps: valid.len(),
                overflow_count: level.filter(|r| r.overflow).count(),
            }
        })
        .collect();
    if per_gamma.iter().all(|p| p.exceed_count == 0) {
        return Err(Error::AllZeroTail);
    }
    let points: Vec<(f64, f64)> = per_gamma
        .iter()
        .filter(|p| p.p_hat > 0.0 && p.p_hat < 1.0)
        .map(|p| (p.gamma, p.p_hat.ln()))
        .collect();
    let fit = fit_loglog(&points)?;
    let mu = mu_estimate(&cfg.body, &cfg.distribution, cfg.epsilon, &cfg.mu)?.value;
    Ok(TailRun { config: cfg.clone(), rows, per_gamma, fit, mu, slope_over_mu: fit.slope.abs() / mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64, gamma_grid: Vec<f64>) -> TailRunConfig {
        TailRunConfig {
            body: Body::ball(vec![0.0, 0.0], 1.0).unwrap(),
            distribution: DirectionalDistribution::isotropic(2).unwrap(),
            epsilon: eps,
            gamma_grid,
            reps: 400,
            seed: 1,
            policy: WindowPolicy::default(),
            mu: MuConfig { coarse_samples: 32, ..Default::default() },
        }
    }

    #[test]
    fn tail_decreases() {
        let r = run_tail(&cfg(0.3, vec![20.0, 40.0, 60.0, 80.0])).unwrap();
        assert!(r.per_gamma.windows(2).all(|w| w[1].p_hat <= w[0].p_hat));
        assert!(r.fit.slope < 0.0);
        assert!(r.mu > 0.0);
    }

    #[test]
    fn all_zero_tail() {
        assert!(matches!(run_tail(&cfg(5.0, vec![50.0, 100.0])), Err(Error::AllZeroTail)));
    }
}
