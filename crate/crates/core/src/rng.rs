//! Keyed random streams and the Poisson variate generator.
//!
//! A stream is identified by `(master seed, replication, module tag)` plus an
//! optional derivation path. Each key maps to its own ChaCha8 instance
//! (block counter based, 2^64 independent streams per seed), so a replication
//! draws the same numbers regardless of how replications are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Module tags keep streams of different subsystems disjoint.
pub mod tag {
    pub const PROCESS: u64 = 1;
    pub const CELL: u64 = 2;
    pub const METRICS: u64 = 3;
    pub const DIRECTION: u64 = 4;
    pub const EXPERIMENT: u64 = 5;
    pub const SELFCHECK: u64 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngKey {
    pub seed: u64,
    pub rep: u64,
    pub tag: u64,
    path: u64,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngKey {
    pub fn new(seed: u64, rep: u64, tag: u64) -> Self {
        Self { seed, rep, tag, path: 0 }
    }

    /// Child key; distinct labels give independent streams.
    pub fn derive(&self, label: u64) -> Self {
        Self {
            path: splitmix(self.path ^ splitmix(label.wrapping_add(0xA076_1D64_78BD_642F))),
            ..*self
        }
    }

    pub fn with_tag(&self, tag: u64) -> Self {
        Self { tag, ..*self }
    }

    pub fn rng(&self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut s = splitmix(self.seed ^ splitmix(self.tag ^ splitmix(self.path)));
        for chunk in seed.chunks_mut(8) {
            s = splitmix(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.rep);
        rng
    }
}

/// Uniform on `(0, 1]`.
#[inline]
pub fn open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Poisson variate: sequential inversion for `mean < 30`, Hörmann's PTRS
/// transformed rejection otherwise.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite(), "poisson mean must be finite and >= 0");
    if mean == 0.0 {
        return 0;
    }
    if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p < f64::MIN_POSITIVE && k as f64 > mean {
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, lam: f64) -> u64 {
    let slam = lam.sqrt();
    let loglam = lam.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let invalpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lam + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + invalpha.ln() - (a / (us * us) + b).ln() <= -lam + k * loglam - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// `ln Gamma(x)` for `x >= 1` (Stirling series with upward shift below 7).
pub fn ln_gamma(x: f64) -> f64 {
    const A: [f64; 10] = [
        8.333333333333333e-02,
        -2.777777777777778e-03,
        7.936507936507937e-04,
        -5.952380952380952e-04,
        8.417508417508418e-04,
        -1.917526917526918e-03,
        6.410256410256410e-03,
        -2.955065359477124e-02,
        1.796443723688307e-01,
        -1.39243221690590e+00,
    ];
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut x0 = x;
    let mut shift = 0;
    if x < 7.0 {
        shift = (7.0 - x) as i64;
        x0 = x + shift as f64;
    }
    let x2 = 1.0 / (x0 * x0);
    let mut gl0 = A[9];
    for k in (0..9).rev() {
        gl0 = gl0 * x2 + A[k];
    }
    let mut gl = gl0 / x0 + 0.5 * std::f64::consts::TAU.ln() + (x0 - 0.5) * x0.ln() - x0;
    for _ in 0..shift {
        x0 -= 1.0;
        gl -= x0.ln();
    }
    gl
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_streams_are_reproducible_and_distinct() {
        let k = RngKey::new(42, 3, tag::PROCESS);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(k.rng(), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(k.rng(), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        let c: u64 = RngKey::new(42, 4, tag::PROCESS).rng().random();
        let d: u64 = k.derive(1).rng().random();
        assert_ne!(a[0], c);
        assert_ne!(a[0], d);
        assert_ne!(k.derive(1), k.derive(2));
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..40u32 {
            fact *= n as f64;
            let x = n as f64 + 1.0;
            assert!((ln_gamma(x) - fact.ln()).abs() < 1e-10 * fact.ln().max(1.0), "n={n}");
        }
    }

    fn moments(mean: f64, n: usize) -> (f64, f64) {
        let mut rng = RngKey::new(7, 0, 99).derive(mean.to_bits()).rng();
        let xs: Vec<f64> = (0..n).map(|_| poisson(&mut rng, mean) as f64).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
        (m, v)
    }

    #[test]
    fn poisson_mean_and_variance() {
        for &mean in &[0.3, 4.0, 29.5, 30.0, 250.0, 4096.0] {
            let n = 200_000;
            let (m, v) = moments(mean, n);
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: got {m}");
            assert!((v / mean - 1.0).abs() < 0.03, "mean {mean}: var {v}");
        }
    }

    #[test]
    fn poisson_pmf_at_ptrs_regime() {
        // frequency of the mode vs the exact pmf
        let mean: f64 = 40.0;
        let n = 400_000;
        let mut rng = RngKey::new(11, 0, 99).rng();
        let hits = (0..n).filter(|_| poisson(&mut rng, mean) == 40).count() as f64 / n as f64;
        let pmf = (-mean + 40.0 * mean.ln() - ln_gamma(41.0)).exp();
        let se = (pmf * (1.0 - pmf) / n as f64).sqrt();
        assert!((hits - pmf).abs() < 4.0 * se, "{hits} vs {pmf}");
    }
}
