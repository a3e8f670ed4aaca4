//! Stationary Poisson hyperplane processes restricted to hitting sets and
//! annuli.
//!
//! The intensity measure is `2 gamma int int 1{H(u, t) in .} dt phi(du)` over
//! `t > 0`. Restricted to `{a(u) < t <= b(u)}` its mass is
//! `2 gamma int (b - a) dphi`. Sampling uses thinning: propose
//! `Poisson(2 gamma E)` pairs `(u ~ phi, s ~ U(0, E])` with `E >= sup (b - a)`
//! and keep those with `s <= b(u) - a(u)`, setting `t = a(u) + s`. This is
//! exact without knowing the mass in closed form. Purely atomic `phi` is
//! sampled atom by atom instead.

use crate::direction::{DirectionalDistribution, IntegrationConfig};
use crate::error::{Error, Result};
use crate::geom::{Body, UnitVector};
use crate::linalg;
use crate::rng::{self, tag, RngKey};
use crate::tol;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io;

/// `H(u, t) = {x : <x, u> = t}` with `t > 0`; the closed halfspace containing
/// the origin is `{<x, u> <= t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub u: UnitVector,
    pub t: f64,
}

impl Hyperplane {
    pub fn new(u: UnitVector, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidConfig(format!("hyperplane offset {t} must be positive")));
        }
        Ok(Self { u, t })
    }

    /// `H cap L != {}`; tangent hyperplanes hit.
    pub fn hits(&self, body: &Body) -> bool {
        self.t <= body.support(&self.u)
    }

    /// Signed slack `t - <x, u>`, nonnegative inside the halfspace.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.t - linalg::dot(x, &self.u)
    }
}

/// A hyperplane of the space-time process on `[0, inf) x H^d`, carrying its
/// arrival intensity: it belongs to the process of intensity `gamma` iff
/// `arrival <= gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub plane: Hyperplane,
    pub arrival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub gamma: f64,
    pub phi: DirectionalDistribution,
    pub dim: usize,
}

impl ProcessParams {
    pub fn new(gamma: f64, phi: DirectionalDistribution) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("intensity {gamma} must be positive")));
        }
        phi.validate()?;
        let dim = phi.dim();
        Ok(Self { gamma, phi, dim })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(gamma, self.phi.clone())
    }

    /// `Phi(L) = 2 gamma int h(L, u) phi(du)`.
    pub fn phi_functional(&self, body: &Body, cfg: &IntegrationConfig) -> Result<f64> {
        check_origin(body)?;
        let e = self.phi.integrate_with_breaks(|u| body.support_at(u), &body.kink_angles(), cfg);
        Ok(2.0 * self.gamma * e.value)
    }

    /// Hyperplanes of the process hitting `w`.
    pub fn sample_hitting<R: Rng + ?Sized>(&self, w: &Body, rng: &mut R) -> Result<Vec<Hyperplane>> {
        check_origin(w)?;
        let out = self.sample_band(self.gamma, None, w, rng)?;
        Ok(out.into_iter().map(|a| a.plane).collect())
    }

    /// Hyperplanes hitting `w_out` but missing `int w_in`.
    pub fn sample_annulus<R: Rng + ?Sized>(&self, w_in: &Body, w_out: &Body, rng: &mut R) -> Result<Vec<Hyperplane>> {
        check_origin(w_in)?;
        check_nested(&self.phi, w_in, w_out)?;
        let out = self.sample_band(self.gamma, Some(w_in), w_out, rng)?;
        Ok(out.into_iter().map(|a| a.plane).collect())
    }

    /// Coupled annulus sample for all intensities up to `self.gamma * top`:
    /// each hyperplane carries an arrival time uniform on `(0, top]`, so
    /// `{arrival <= g}` is the annulus sample at intensity `self.gamma * g`.
    pub fn sample_annulus_arrivals<R: Rng + ?Sized>(
        &self,
        w_in: &Body,
        w_out: &Body,
        top: f64,
        rng: &mut R,
    ) -> Result<Vec<Arrival>> {
        check_origin(w_in)?;
        check_nested(&self.phi, w_in, w_out)?;
        let mut out = self.sample_band(self.gamma * top, Some(w_in), w_out, rng)?;
        for a in &mut out {
            a.arrival /= self.gamma;
        }
        Ok(out)
    }

    /// Cumulative hitting sets `A_1 ⊆ A_2 ⊆ ...` of `window` at intensities
    /// `self.gamma * grid[k]`, realized on one space-time sample.
    pub fn coupled_stream<R: Rng + ?Sized>(&self, grid: &[f64], window: &Body, rng: &mut R) -> Result<Vec<Vec<Hyperplane>>> {
        check_grid(grid)?;
        check_origin(window)?;
        let top = *grid.last().unwrap();
        let mut all = self.sample_band(self.gamma * top, None, window, rng)?;
        all.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        let scale = 1.0 / self.gamma;
        let mut out = Vec::with_capacity(grid.len());
        let mut current = Vec::new();
        let mut it = all.into_iter().peekable();
        for &g in grid {
            while let Some(a) = it.next_if(|a| a.arrival * scale <= g) {
                current.push(a.plane);
            }
            out.push(current.clone());
        }
        Ok(out)
    }

    /// Samples the restriction of the intensity-`gamma` process to
    /// `{h(inner, u) < t <= h(outer, u)}` (`inner = None` means `a = 0`).
    /// Arrival times are uniform on `(0, gamma]`.
    fn sample_band<R: Rng + ?Sized>(&self, gamma: f64, inner: Option<&Body>, outer: &Body, rng: &mut R) -> Result<Vec<Arrival>> {
        let lower = |u: &[f64]| inner.map_or(0.0, |b| b.support_at(u));
        let mut out = Vec::new();
        if let DirectionalDistribution::Atomic { atoms } = &self.phi {
            for (u, w) in atoms {
                let a = lower(u);
                let width = outer.support_at(u) - a;
                if width <= 0.0 {
                    continue;
                }
                let n = rng::poisson(rng, 2.0 * gamma * w * width);
                for _ in 0..n {
                    let t = a + width * rng::open_closed(rng);
                    let arrival = gamma * rng::open_closed(rng);
                    out.push(Arrival { plane: Hyperplane { u: u.clone(), t }, arrival });
                }
            }
            return Ok(out);
        }
        let envelope = match inner {
            Some(b) => outer.parallel_offset_from(b).unwrap_or(outer.circumradius() - b.inradius_about_origin()),
            None => outer.circumradius(),
        };
        if !(envelope > 0.0) {
            return Ok(out);
        }
        let proposals = rng::poisson(rng, 2.0 * gamma * envelope);
        for _ in 0..proposals {
            let u = self.phi.sample(rng)?;
            let s = envelope * rng::open_closed(rng);
            let a = lower(&u);
            let width = outer.support_at(&u) - a;
            if s <= width {
                let arrival = gamma * rng::open_closed(rng);
                out.push(Arrival { plane: Hyperplane { u, t: a + s }, arrival });
            }
        }
        if proposals >= crate::direction::MAX_PROPOSALS
            && (out.len() as f64) < crate::direction::MIN_ACCEPTANCE * proposals as f64
        {
            return Err(Error::RejectionStall { proposals, accepted: out.len() as u64 });
        }
        Ok(out)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("intensity grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

fn check_origin(body: &Body) -> Result<()> {
    let r = body.inradius_about_origin();
    if r <= 0.0 {
        return Err(Error::OriginOutside { min_support: r });
    }
    Ok(())
}

/// Probe directions for support-function comparisons: a dense angular grid
/// (d = 2) or a seeded spherical sample plus coordinate axes (d >= 3), plus
/// the atoms of `phi` and the facet normals of both bodies.
pub(crate) fn probe_directions(d: usize, phi: &DirectionalDistribution, bodies: &[&Body]) -> Vec<Vec<f64>> {
    let mut probes: Vec<Vec<f64>> = if d == 2 {
        (0..1440).map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 1440.0;
            vec![a.cos(), a.sin()]
        })
        .collect()
    } else {
        let mut rng = RngKey::new(0, 0, tag::PROCESS).derive(d as u64).rng();
        let mut v: Vec<Vec<f64>> = (0..4000).map(|_| crate::geom::uniform_sphere(d, &mut rng)).collect();
        for k in 0..d {
            let e = UnitVector::axis(d, k);
            v.push(e.neg().to_vec());
            v.push(e.to_vec());
        }
        v
    };
    probes.extend(phi.atoms().into_iter().map(|(u, _)| u.to_vec()));
    for b in bodies {
        if let Some(p) = b.polytope_part() {
            probes.extend(p.facets().iter().map(|f| f.normal.to_vec()));
        }
    }
    probes
}

fn check_nested(phi: &DirectionalDistribution, inner: &Body, outer: &Body) -> Result<()> {
    if outer.parallel_offset_from(inner).is_some() {
        return Ok(());
    }
    for u in probe_directions(inner.dim(), phi, &[inner, outer]) {
        let excess = inner.support_at(&u) - outer.support_at(&u);
        if excess > tol::FEASIBILITY {
            return Err(Error::NotNested { direction: u, excess });
        }
    }
    Ok(())
}

/// Writes hyperplanes as CSV rows `u0,..,u{d-1},t`.
pub fn write_hyperplanes_csv<W: io::Write>(planes: &[Hyperplane], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if let Some(first) = planes.first() {
        let mut header: Vec<String> = (0..first.u.dim()).map(|k| format!("u{k}")).collect();
        header.push("t".into());
        w.write_record(&header)?;
    }
    for p in planes {
        let mut row: Vec<String> = p.u.iter().map(|x| format!("{x:?}")).collect();
        row.push(format!("{:?}", p.t));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hyperplanes_csv<R: io::Read>(reader: R) -> Result<Vec<Hyperplane>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidConfig(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        let (t, u) = vals.split_last().ok_or_else(|| Error::InvalidConfig("empty row".into()))?;
        out.push(Hyperplane::new(UnitVector::new(u.to_vec())?, *t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(d: usize) -> DirectionalDistribution {
        DirectionalDistribution::isotropic(d).unwrap()
    }

    fn rng(seed: u64) -> crate::rng::StreamRng {
        RngKey::new(seed, 0, tag::PROCESS).rng()
    }

    #[test]
    fn phi_functional_examples() {
        let cfg = IntegrationConfig::default();
        let ball = Body::ball(vec![0.0, 0.0], 1.7).unwrap();
        let p = ProcessParams::new(2.5, iso(2)).unwrap();
        assert!((p.phi_functional(&ball, &cfg).unwrap() - 2.0 * 2.5 * 1.7).abs() < 1e-9);
        let sq = Body::cube(2, 1.0).unwrap();
        let p = ProcessParams::new(1.0, iso(2)).unwrap();
        assert!((p.phi_functional(&sq, &cfg).unwrap() - 8.0 / std::f64::consts::PI).abs() < 1e-6);
        let p = ProcessParams::new(1.0, DirectionalDistribution::coordinate_atoms(2).unwrap()).unwrap();
        assert_eq!(p.phi_functional(&sq, &cfg).unwrap(), 2.0);
        let off = sq.translated(&[1.5, 0.0]).unwrap();
        assert!(matches!(p.phi_functional(&off, &cfg), Err(Error::OriginOutside { .. })));
    }

    #[test]
    fn hits_examples() {
        let ball = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
        let e2 = UnitVector::axis(2, 1);
        assert!(Hyperplane::new(e2.clone(), 0.5).unwrap().hits(&ball));
        assert!(!Hyperplane::new(e2.clone(), 1.5).unwrap().hits(&ball));
        let u = UnitVector::from_angle(0.3);
        assert!(Hyperplane::new(u.clone(), ball.support(&u)).unwrap().hits(&ball));
        assert!(Hyperplane::new(e2, 0.0).is_err());
    }

    #[test]
    fn hitting_counts_and_offsets() {
        let ball = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ProcessParams::new(3.0, iso(2)).unwrap();
        let mut r = rng(1);
        let reps = 10_000;
        let mut total = 0usize;
        let mut ts = Vec::new();
        for _ in 0..reps {
            let hs = p.sample_hitting(&ball, &mut r).unwrap();
            total += hs.len();
            for h in hs {
                assert!(h.hits(&ball) && h.t > 0.0);
                ts.push(h.t);
            }
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 6.0).abs() < 3.0 * (6.0 / reps as f64).sqrt(), "{mean}");
        ts.sort_by(f64::total_cmp);
        let n = ts.len() as f64;
        let ks = ts
            .iter()
            .enumerate()
            .map(|(i, t)| (t - i as f64 / n).abs().max(((i + 1) as f64 / n - t).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "KS {ks}");
    }

    #[test]
    fn hitting_direction_law() {
        // directions are reweighted by h(W, u): for the square with isotropic
        // phi, the fraction within the cap |angle| < 0.4 is int_cap h / int h
        let sq = Body::cube(2, 1.0).unwrap();
        let p = ProcessParams::new(50.0, iso(2)).unwrap();
        let mut r = rng(2);
        let mut inside = 0usize;
        let mut n = 0usize;
        while n < 100_000 {
            for h in p.sample_hitting(&sq, &mut r).unwrap() {
                n += 1;
                if linalg::angle_of(&h.u).min(std::f64::consts::TAU - linalg::angle_of(&h.u)) < 0.4 {
                    inside += 1;
                }
            }
        }
        let cfg = IntegrationConfig::default();
        let f = |u: &[f64]| sq.support_at(u);
        let num = p.phi.integrate_arc(f, -0.4, 0.4, &sq.kink_angles(), &cfg);
        let den = p.phi.integrate_with_breaks(f, &sq.kink_angles(), &cfg).value;
        let q = num / den;
        let sd = (q * (1.0 - q) / n as f64).sqrt();
        assert!((inside as f64 / n as f64 - q).abs() < 3.0 * sd, "{} vs {q}", inside as f64 / n as f64);
    }

    #[test]
    fn annulus_mean_and_offsets() {
        let b1 = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b2 = b1.parallel(1.0);
        let p = ProcessParams::new(1.0, iso(2)).unwrap();
        let mut r = rng(3);
        let reps = 10_000;
        let mut total = 0;
        for _ in 0..reps {
            let hs = p.sample_annulus(&b1, &b2, &mut r).unwrap();
            for h in &hs {
                assert!(h.t > b1.support(&h.u) && h.hits(&b2));
            }
            total += hs.len();
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / reps as f64).sqrt(), "{mean}");
        assert!(matches!(p.sample_annulus(&b2, &b1, &mut r), Err(Error::NotNested { .. })));
    }

    /// Chi-square statistic of two count samples over pooled bins.
    fn chi_square_two_sample(a: &[usize], b: &[usize]) -> (f64, usize) {
        let max = a.iter().chain(b).copied().max().unwrap();
        let mut ha = vec![0f64; max + 1];
        let mut hb = vec![0f64; max + 1];
        a.iter().for_each(|&x| ha[x] += 1.0);
        b.iter().for_each(|&x| hb[x] += 1.0);
        // pool sparse tails
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut ca, mut cb) = (0.0, 0.0);
        for k in 0..=max {
            ca += ha[k];
            cb += hb[k];
            if ca + cb >= 20.0 {
                bins.push((ca, cb));
                ca = 0.0;
                cb = 0.0;
            }
        }
        if let Some(last) = bins.last_mut() {
            last.0 += ca;
            last.1 += cb;
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let stat = bins
            .iter()
            .map(|(x, y)| {
                let tot = x + y;
                let ea = tot * na / (na + nb);
                let eb = tot * nb / (na + nb);
                (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
            })
            .sum();
        (stat, bins.len() - 1)
    }

    /// Upper 0.001 quantile of chi-square via Wilson-Hilferty.
    fn chi2_crit(df: usize) -> f64 {
        let k = df as f64;
        let z = 3.09;
        k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
    }

    #[test]
    fn superposition_and_thinning() {
        let w_in = Body::cube(2, 1.0).unwrap();
        let w_out = w_in.parallel(0.5);
        let p = ProcessParams::new(2.0, iso(2)).unwrap();
        let mut r = rng(4);
        let reps = 10_000;
        let mut direct = Vec::new();
        let mut summed = Vec::new();
        let mut thinned = Vec::new();
        let mut annulus = Vec::new();
        for _ in 0..reps {
            let full = p.sample_hitting(&w_out, &mut r).unwrap();
            direct.push(full.len());
            thinned.push(full.iter().filter(|h| !h.hits(&w_in)).count());
            let a = p.sample_annulus(&w_in, &w_out, &mut r).unwrap().len();
            annulus.push(a);
            summed.push(p.sample_hitting(&w_in, &mut r).unwrap().len() + a);
        }
        let (s, df) = chi_square_two_sample(&direct, &summed);
        assert!(s < chi2_crit(df), "superposition chi2 {s} df {df}");
        let (s, df) = chi_square_two_sample(&thinned, &annulus);
        assert!(s < chi2_crit(df), "thinning chi2 {s} df {df}");
    }

    #[test]
    fn coupled_stream_properties() {
        let sq = Body::cube(2, 1.0).unwrap();
        let p = ProcessParams::new(1.0, iso(2)).unwrap();
        let grid = [1.0, 2.0, 4.0, 8.0];
        let mean_h = 4.0 / std::f64::consts::PI;
        let reps = 4000;
        let mut incr = [0usize; 3];
        let mut r = rng(5);
        for _ in 0..reps {
            let s = p.coupled_stream(&grid, &sq, &mut r).unwrap();
            for k in 1..4 {
                assert!(s[k].len() >= s[k - 1].len());
                assert_eq!(&s[k][..s[k - 1].len()], &s[k - 1][..]);
                incr[k - 1] += s[k].len() - s[k - 1].len();
            }
        }
        for k in 0..3 {
            let m = 2.0 * (grid[k + 1] - grid[k]) * mean_h;
            let got = incr[k] as f64 / reps as f64;
            assert!((got - m).abs() < 3.0 * (m / reps as f64).sqrt(), "level {k}: {got} vs {m}");
        }
        assert!(p.coupled_stream(&[2.0, 1.0], &sq, &mut r).is_err());
    }

    #[test]
    fn atomic_directions_preserved() {
        let sq = Body::cube(2, 1.0).unwrap();
        let p = ProcessParams::new(20.0, DirectionalDistribution::coordinate_atoms(2).unwrap()).unwrap();
        let mut r = rng(6);
        for h in p.sample_annulus(&sq, &sq.parallel(1.0), &mut r).unwrap() {
            assert!(h.u.iter().filter(|x| **x == 0.0).count() == 1);
            assert!(h.t > 1.0 && h.t <= 2.0);
        }
    }

    #[test]
    fn deterministic_and_csv_round_trip() {
        let ball = Body::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let p = ProcessParams::new(5.0, iso(3)).unwrap();
        let a = p.sample_hitting(&ball, &mut rng(9)).unwrap();
        let b = p.sample_hitting(&ball, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_hyperplanes_csv(&a, &mut buf).unwrap();
        let back = read_hyperplanes_csv(&buf[..]).unwrap();
        assert_eq!(back, a);
    }
}
