use super::DirectionalDistribution;
use crate::geom::uniform_sphere;
use crate::linalg;
use crate::rng::{tag, RngKey};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    /// Simpson nodes per integration range (d = 2).
    pub nodes: usize,
    /// Antithetic pairs for Monte Carlo (d >= 3).
    pub samples: usize,
    pub seed: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { nodes: 4096, samples: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Zero for deterministic rules.
    pub std_error: f64,
}

/// Composite Simpson of `g` over `[lo, hi]`, split at the given interior
/// points; `nodes` is shared between pieces in proportion to their length.
pub(crate) fn simpson(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64], nodes: usize) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let span = hi - lo;
    let mut total = 0.0;
    let mut a = lo;
    for b in cuts.into_iter().chain([hi]) {
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let mut m = ((nodes as f64 * len / span).ceil() as usize).max(2);
        m += m % 2;
        let h = len / m as f64;
        // endpoints nudged inward so jumps at breaks are read from the right side
        let eta = 1e-9 * h;
        let mut s = g(a + eta) + g(b - eta);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + i as f64 * h);
        }
        total += s * h / 3.0;
        a = b;
    }
    total
}

impl DirectionalDistribution {
    /// `int f dphi`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64, cfg: &IntegrationConfig) -> Estimate {
        self.integrate_with_breaks(f, &[], cfg)
    }

    /// As [`integrate`](Self::integrate), with angles (d = 2) where `f` has
    /// kinks so the quadrature can split there.
    pub fn integrate_with_breaks(&self, f: impl Fn(&[f64]) -> f64, breaks: &[f64], cfg: &IntegrationConfig) -> Estimate {
        let atomic: f64 = self.atoms().iter().map(|(u, w)| w * f(u)).sum();
        if self.is_purely_atomic() {
            return Estimate { value: atomic, std_error: 0.0 };
        }
        let d = self.dim();
        if d == 2 {
            let mut all = breaks.to_vec();
            all.extend(self.breakpoints_2d());
            let g = |t: f64| {
                let u = [t.cos(), t.sin()];
                f(&u) * self.continuous_density(&u)
            };
            let value = simpson(&g, 0.0, TAU, &all, cfg.nodes) / TAU;
            return Estimate { value: atomic + value, std_error: 0.0 };
        }
        let mut rng = RngKey::new(cfg.seed, 0, tag::DIRECTION).rng();
        let n = cfg.samples.max(2);
        let (mut mean, mut m2) = (0.0, 0.0);
        for i in 0..n {
            let u = uniform_sphere(d, &mut rng);
            let v: Vec<f64> = u.iter().map(|x| -x).collect();
            let x = 0.5 * (f(&u) * self.continuous_density(&u) + f(&v) * self.continuous_density(&v));
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let sd = (m2 / (n - 1) as f64).sqrt();
        Estimate { value: atomic + mean, std_error: sd / (n as f64).sqrt() }
    }

    /// `int_{arc} f dphi` over the angles `[lo, hi]` (d = 2, `hi - lo <= 2 pi`).
    pub fn integrate_arc(&self, f: impl Fn(&[f64]) -> f64, lo: f64, hi: f64, breaks: &[f64], cfg: &IntegrationConfig) -> f64 {
        assert_eq!(self.dim(), 2, "integrate_arc is planar");
        let lift = |a: f64| lo + (a - lo).rem_euclid(TAU);
        let atomic: f64 = self
            .atoms()
            .iter()
            .filter(|(u, _)| lift(linalg::angle_of(u)) <= hi)
            .map(|(u, w)| w * f(u))
            .sum();
        atomic + self.integrate_arc_continuous(f, lo, hi, breaks, cfg)
    }

    /// Non-atomic part of [`integrate_arc`](Self::integrate_arc).
    pub fn integrate_arc_continuous(
        &self,
        f: impl Fn(&[f64]) -> f64,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        cfg: &IntegrationConfig,
    ) -> f64 {
        if self.is_purely_atomic() || hi <= lo {
            return 0.0;
        }
        let lift = |a: f64| lo + (a - lo).rem_euclid(TAU);
        let mut all: Vec<f64> = breaks.iter().map(|&b| lift(b)).collect();
        all.extend(self.breakpoints_2d().into_iter().map(lift));
        let g = |t: f64| {
            let u = [t.cos(), t.sin()];
            f(&u) * self.continuous_density(&u)
        };
        simpson(&g, lo, hi, &all, cfg.nodes) / TAU
    }
}
