//! Cap-starved measures: even, full-support densities that put very little
//! mass on a nested family of caps `S_n = {u : <u, a> >= r / (r + eps_n)}`.

use super::DirectionalDistribution;
use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::linalg;
use crate::tol;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Shell `n` (0-based here) is `{c_n <= |<u, axis>| < c_{n+1}}`, the last one
/// runs up to `|<u, axis>| = 1`. Masses are per side; both sides carry the
/// same mass, background fills `|<u, axis>| < c_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapStarved {
    pub axis: UnitVector,
    pub radius: f64,
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub shell_masses: Vec<f64>,
    pub background_mass: f64,
}

impl CapStarved {
    pub(super) fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDistribution(format!("cap-starved: {m}")));
        let n = self.thresholds.len();
        if n == 0 || self.shell_masses.len() != n || self.epsilons.len() != n {
            return bad("thresholds, epsilons and shell masses must have equal nonzero length");
        }
        if self.thresholds.windows(2).any(|w| !(w[0] < w[1])) || !(self.thresholds[0] > 0.0) || !(self.thresholds[n - 1] < 1.0) {
            return bad("thresholds must increase strictly inside (0, 1)");
        }
        if self.shell_masses.iter().any(|q| !(*q > 0.0)) {
            return bad("shell masses must be positive");
        }
        if !(self.background_mass > 0.0) {
            return bad("background mass must be positive");
        }
        let total = self.background_mass + 2.0 * self.shell_masses.iter().sum::<f64>();
        if (total - 1.0).abs() > tol::MASS {
            return Err(Error::InvalidDistribution(format!("cap-starved: total mass {total} != 1")));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.axis.dim()
    }

    /// Normalized spherical measure of the one-sided cap `{<u, axis> >= c}`.
    fn cap_sigma(&self, c: f64) -> f64 {
        linalg::cap_fraction(self.dim(), c)
    }

    fn shell_sigma(&self, k: usize) -> f64 {
        let lo = self.cap_sigma(self.thresholds[k]);
        match self.thresholds.get(k + 1) {
            Some(&c) => lo - self.cap_sigma(c),
            None => lo,
        }
    }

    /// `phi(S_n)` for 1-based `n`.
    pub fn cap_mass(&self, n: usize) -> f64 {
        self.shell_masses[n - 1..].iter().sum()
    }

    pub fn n_max(&self) -> usize {
        self.thresholds.len()
    }

    /// Density with respect to the normalized spherical measure.
    pub fn density(&self, u: &[f64]) -> f64 {
        let z = linalg::dot(u, &self.axis).abs();
        if z < self.thresholds[0] {
            return self.background_mass / (1.0 - 2.0 * self.cap_sigma(self.thresholds[0]));
        }
        let k = self.thresholds.partition_point(|&c| c <= z) - 1;
        self.shell_masses[k] / self.shell_sigma(k)
    }

    pub(super) fn breakpoints_2d(&self) -> Vec<f64> {
        let base = linalg::angle_of(&self.axis);
        let tau = std::f64::consts::TAU;
        let mut out = Vec::new();
        for &c in &self.thresholds {
            let a = c.acos();
            for s in [a, -a, std::f64::consts::PI + a, std::f64::consts::PI - a] {
                out.push((base + s).rem_euclid(tau));
            }
        }
        out
    }

    pub(super) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let d = self.dim();
        let mut pick = rng.random::<f64>();
        if pick < self.background_mass {
            loop {
                let u = crate::geom::uniform_sphere(d, rng);
                if linalg::dot(&u, &self.axis).abs() < self.thresholds[0] {
                    return UnitVector::from_raw(u);
                }
            }
        }
        pick -= self.background_mass;
        let mut k = self.n_max() - 1;
        for (i, q) in self.shell_masses.iter().enumerate() {
            if pick < 2.0 * q {
                k = i;
                break;
            }
            pick -= 2.0 * q;
        }
        // polar angle range of the shell, theta measured from the axis
        let theta_hi = self.thresholds[k].acos();
        let theta_lo = self.thresholds.get(k + 1).map_or(0.0, |c| c.acos());
        let theta = sample_polar(d, theta_lo, theta_hi, rng);
        let w = orthogonal_direction(&self.axis, rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let u: Vec<f64> = self
            .axis
            .iter()
            .zip(&w)
            .map(|(a, w)| sign * (theta.cos() * a + theta.sin() * w))
            .collect();
        UnitVector::normalize(&u).expect("shell sample is nonzero")
    }
}

/// Samples `theta` in `[lo, hi]` with density proportional to
/// `sin(theta)^(d-2)`, `hi <= pi / 2`: proposal `theta^(d-2)` by inversion,
/// accept with `(sin theta / theta)^(d-2) >= (2 / pi)^(d-2)`.
fn sample_polar<R: Rng + ?Sized>(d: usize, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let p = (d - 1) as i32;
    loop {
        let v: f64 = rng.random();
        let theta = (lo.powi(p) + v * (hi.powi(p) - lo.powi(p))).powf(1.0 / p as f64);
        let ratio = if theta > 0.0 { theta.sin() / theta } else { 1.0 };
        if d == 2 || rng.random::<f64>() < ratio.powi(p - 1) {
            return theta;
        }
    }
}

/// Uniform unit vector orthogonal to `a`.
fn orthogonal_direction<R: Rng + ?Sized>(a: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let g = crate::geom::uniform_sphere(a.len(), rng);
        let p = linalg::axpy(&g, -linalg::dot(&g, a), a);
        if let Some(w) = linalg::normalized(&p) {
            return w;
        }
    }
}

/// `|log(1 - n^-2)|`, infinite at `n = 1`.
pub fn log_budget(n: usize) -> f64 {
    let x = 1.0 / (n as f64 * n as f64);
    -(-x).ln_1p()
}

impl DirectionalDistribution {
    /// Cap-starved measure with `2 n eps_n phi(S_n) <= budget(n) / 2` for
    /// `n = 1..=n_max`, where `S_n` is the cap of angular radius
    /// `acos(r / (r + eps_n))` around `axis` (for `K` a body containing a
    /// ball of radius `r` touching its boundary at a point with normal `axis`).
    ///
    /// Cap masses are `m_n = w_n / 2 * min_{k <= n} e_k` with
    /// `e_k = min(budget(k) / (2 k eps_k), sigma(S_k))` and `w_n` strictly
    /// decreasing in `(1/2, 1)`, so shells get positive mass and the
    /// density stays below the uniform one on every cap.
    pub fn cap_starved(
        axis: UnitVector,
        eps: impl Fn(usize) -> f64,
        n_max: usize,
        budget: impl Fn(usize) -> f64,
        radius: f64,
    ) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidConfig(format!("cap_starved needs n_max >= 2, got {n_max}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("cap radius {radius} must be positive")));
        }
        let d = axis.dim();
        let epsilons: Vec<f64> = (1..=n_max).map(&eps).collect();
        if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig("eps schedule must be positive and strictly decreasing".into()));
        }
        let thresholds: Vec<f64> = epsilons.iter().map(|e| radius / (radius + e)).collect();
        let mut running = f64::INFINITY;
        let mut caps = Vec::with_capacity(n_max);
        for (i, (&e, &c)) in epsilons.iter().zip(&thresholds).enumerate() {
            let n = i + 1;
            let b = budget(n);
            if b.is_nan() || b <= 0.0 {
                return Err(Error::InfeasibleBudget(format!("budget({n}) = {b}")));
            }
            let sigma = linalg::cap_fraction(d, c);
            let allowed = if b.is_infinite() { sigma } else { (b / (2.0 * n as f64 * e)).min(sigma) };
            running = running.min(allowed);
            let w = 1.0 - n as f64 / (2.0 * (n_max + 2) as f64);
            caps.push(0.5 * w * running);
        }
        if !(2.0 * caps[0] < 1.0) || caps.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::InfeasibleBudget(format!("cap masses {:?} cannot be realized", &caps[..2])));
        }
        let mut shell_masses: Vec<f64> = caps.windows(2).map(|w| w[0] - w[1]).collect();
        shell_masses.push(caps[n_max - 1]);
        let background_mass = 1.0 - 2.0 * shell_masses.iter().sum::<f64>();
        let c = CapStarved { axis, radius, epsilons, thresholds, shell_masses, background_mass };
        c.check()?;
        Ok(Self::CapStarved(c))
    }
}
