//! The separation functional
//! `mu(K, phi, eps) = min_{y in bd K(eps)} int [h(K^y, u) - h(K, u)] phi(du)`
//! and its integrand `g(y)`.

use crate::cell::CellPolytope;
use crate::direction::{DirectionalDistribution, IntegrationConfig};
use crate::error::{Error, Result};
use crate::experiment::{fit_loglog, FitResult};
use crate::geom::{parallel_boundary_sample, Body, Shape};
use crate::linalg::{self, dot};
use crate::rng::{tag, RngKey};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

/// `g(y) = int max(0, <y, u> - h(K, u)) phi(du)`.
///
/// In the plane the positive part lives on one arc around the outer normal at
/// the projection of `y`; its endpoints are found by bisection and the arc is
/// integrated by Simpson split at the kinks of `h` and the density jumps.
pub fn excess(body: &Body, phi: &DirectionalDistribution, y: &[f64], cfg: &IntegrationConfig) -> f64 {
    let (p, dist) = body.nearest_point(y);
    if dist == 0.0 {
        return 0.0;
    }
    let gap = |u: &[f64]| dot(y, u) - body.support_at(u);
    let atomic: f64 = phi.atoms().iter().map(|(u, w)| w * gap(u).max(0.0)).sum();
    if phi.is_purely_atomic() {
        return atomic;
    }
    if body.dim() != 2 {
        let e = phi.integrate(|u| gap(u).max(0.0), cfg);
        // integrate already counted the atoms
        return e.value;
    }
    let normal = linalg::sub(y, &p);
    let center = linalg::angle_of(&normal);
    let at = |t: f64| gap(&[t.cos(), t.sin()]);
    if at(center) <= 0.0 {
        return atomic;
    }
    let edge = |dir: f64| {
        let (mut inside, mut outside) = (0.0f64, PI);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if at(center + dir * mid) > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = center - edge(-1.0);
    let hi = center + edge(1.0);
    atomic + phi.integrate_arc_continuous(|u| gap(u).max(0.0), lo, hi, &body.kink_angles(), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MuConfig {
    pub coarse_samples: usize,
    /// Relative step size at which the pattern search stops.
    pub refine_tol: f64,
    pub max_refine: usize,
    pub seed: u64,
    pub integration: IntegrationConfig,
}

impl Default for MuConfig {
    fn default() -> Self {
        Self { coarse_samples: 4096, refine_tol: 1e-10, max_refine: 2000, seed: 0, integration: IntegrationConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub value: f64,
    pub argmin_point: Vec<f64>,
    pub evaluations: usize,
    /// Last improvement made by the local search.
    pub refinement_gap: f64,
}

/// Maps `z` outside `K` to `p(z) + eps (z - p(z)) / |z - p(z)|` on `bd K(eps)`.
fn project_to_level(body: &Body, eps: f64, z: &[f64]) -> Option<Vec<f64>> {
    let (p, d) = body.nearest_point(z);
    if d <= 1e-12 * (1.0 + linalg::norm(z)) {
        return None;
    }
    Some(linalg::axpy(&p, eps / d, &linalg::sub(z, &p)))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Upper estimate of `mu(K, phi, eps)`: best of `coarse_samples` random
/// boundary points, then a pattern search along tangent directions of
/// `bd K(eps)`.
pub fn mu_estimate(body: &Body, phi: &DirectionalDistribution, eps: f64, cfg: &MuConfig) -> Result<MuEstimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let mut rng = RngKey::new(cfg.seed, 0, tag::METRICS).rng();
    let starts: Vec<Vec<f64>> =
        (0..cfg.coarse_samples.max(1)).map(|_| parallel_boundary_sample(body, eps, &mut rng).point).collect();
    let g = |y: &[f64]| excess(body, phi, y, &cfg.integration);
    let (mut best_v, mut best_y) = starts
        .into_par_iter()
        .map(|y| (g(&y), y))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1)))
        .unwrap();
    let mut evaluations = cfg.coarse_samples.max(1);

    let scale = body.circumradius() + eps;
    let mut step = TAU * scale / (cfg.coarse_samples.max(1) as f64).powf(1.0 / (body.dim() - 1) as f64);
    let mut gap = 0.0;
    while step > cfg.refine_tol * scale && evaluations < cfg.coarse_samples + cfg.max_refine {
        let (p, _) = body.nearest_point(&best_y);
        let normal = linalg::normalized(&linalg::sub(&best_y, &p)).expect("boundary point is outside K");
        let mut improved = false;
        for t in linalg::orthonormal_complement(&normal) {
            for s in [step, -step] {
                let Some(y) = project_to_level(body, eps, &linalg::axpy(&best_y, s, &t)) else { continue };
                let v = g(&y);
                evaluations += 1;
                if v < best_v {
                    gap = best_v - v;
                    best_v = v;
                    best_y = y;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(MuEstimate { value: best_v.max(0.0), argmin_point: best_y, evaluations, refinement_gap: gap })
}

/// Exact minimum of `g` over a uniform arc-length grid of `bd K(eps)` (d = 2).
pub fn parallel_boundary_grid_2d(body: &Body, eps: f64, points: usize) -> Vec<Vec<f64>> {
    assert_eq!(body.dim(), 2);
    let (poly, r) = match body.shape() {
        Shape::Ball { center, radius } => {
            let rr = radius + eps;
            return (0..points)
                .map(|i| {
                    let a = TAU * i as f64 / points as f64;
                    vec![center[0] + rr * a.cos(), center[1] + rr * a.sin()]
                })
                .collect();
        }
        Shape::Polytope(p) => (p, eps),
        Shape::BallSum { polytope, radius } => (polytope, radius + eps),
    };
    // boundary = offset edges + vertex arcs; vertices of a 2D polytope are CCW
    let hull = crate::geom::convex_hull_2d(&poly.vertices().iter().map(|v| [v[0], v[1]]).collect::<Vec<_>>());
    let vs: Vec<&Vec<f64>> = hull.iter().map(|&i| &poly.vertices()[i]).collect();
    let m = vs.len();
    let perimeter: f64 = (0..m).map(|i| linalg::dist(vs[i], vs[(i + 1) % m])).sum::<f64>() + TAU * r;
    let mut out = Vec::with_capacity(points);
    for k in 0..points {
        let mut s = perimeter * k as f64 / points as f64;
        for i in 0..m {
            let (a, b) = (vs[i], vs[(i + 1) % m]);
            let e = linalg::sub(b, a);
            let len = linalg::norm(&e);
            let n = [e[1] / len, -e[0] / len];
            if s <= len {
                out.push(vec![a[0] + e[0] * s / len + r * n[0], a[1] + e[1] * s / len + r * n[1]]);
                break;
            }
            s -= len;
            let c = vs[(i + 1) % m];
            let e2 = linalg::sub(vs[(i + 2) % m], c);
            let n2 = [e2[1] / linalg::norm(&e2), -e2[0] / linalg::norm(&e2)];
            let a0 = n[1].atan2(n[0]);
            let sweep = (n2[1].atan2(n2[0]) - a0).rem_euclid(TAU);
            if s <= r * sweep {
                let a = a0 + s / r;
                out.push(vec![c[0] + r * a.cos(), c[1] + r * a.sin()]);
                break;
            }
            s -= r * sweep;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln eps, ln mu)`.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares exponent of `mu(K, phi, eps)` over `eps_grid`.
pub fn mu_scaling(body: &Body, phi: &DirectionalDistribution, eps_grid: &[f64], cfg: &MuConfig) -> Result<ScalingFit> {
    if eps_grid.len() < 4 {
        return Err(Error::InvalidConfig("mu scaling needs at least 4 epsilon values".into()));
    }
    let cap = body.diameter().min(1.0);
    if let Some(&e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= cap)) {
        return Err(Error::InvalidConfig(format!("epsilon {e} outside (0, min(1, D(K))]")));
    }
    let mut points = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let mu = mu_estimate(body, phi, e, cfg)?.value;
        points.push((e.ln(), mu.ln()));
    }
    let FitResult { slope, intercept, r_squared, .. } = fit_loglog(&points)?;
    Ok(ScalingFit { slope, intercept, r_squared, points })
}

/// `delta(K, Z)` for a cell built around `K`.
pub fn hausdorff_cell(body: &Body, cell: &CellPolytope) -> Result<f64> {
    body.hausdorff_containing(&cell.points(), cell.halfspaces.iter().map(|h| (h.u.as_slice(), h.t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{CellStats, CellVertex};
    use crate::geom::UnitVector;
    use crate::process::Hyperplane;

    fn iso() -> DirectionalDistribution {
        DirectionalDistribution::isotropic(2).unwrap()
    }

    fn ball() -> Body {
        Body::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn square() -> Body {
        Body::cube(2, 1.0).unwrap()
    }

    /// `(2 sqrt 3 - 2 pi / 3) / (2 pi)`: `int max(0, 2 cos - 1) / 2pi`.
    fn ball_far_value() -> f64 {
        (2.0 * 3f64.sqrt() - 2.0 * PI / 3.0) / TAU
    }

    #[test]
    fn excess_examples() {
        let cfg = IntegrationConfig::default();
        assert_eq!(excess(&ball(), &iso(), &[0.3, 0.2], &cfg), 0.0);
        let v = excess(&ball(), &iso(), &[2.0, 0.0], &cfg);
        assert!((v - ball_far_value()).abs() < 1e-10, "{v}");
        assert!((v - 0.2180).abs() < 1e-4);
        let atoms = DirectionalDistribution::coordinate_atoms(2).unwrap();
        let v = excess(&square(), &atoms, &[1.1, 0.0], &cfg);
        assert!((v - 0.025).abs() < 1e-15);
    }

    #[test]
    fn excess_matches_plain_quadrature() {
        // brute-force midpoint rule over the whole circle
        let cfg = IntegrationConfig::default();
        let k = Body::stadium(0.5).unwrap();
        let phi = DirectionalDistribution::from_surface_measure(&k, 0.3).unwrap();
        for y in [[1.9, 0.4], [0.0, 0.7], [-1.6, -0.9]] {
            let m = 400_000;
            let brute: f64 = (0..m)
                .map(|i| {
                    let t = TAU * (i as f64 + 0.5) / m as f64;
                    let u = [t.cos(), t.sin()];
                    (dot(&y, &u) - k.support_at(&u)).max(0.0) * phi.continuous_density(&u)
                })
                .sum::<f64>()
                / m as f64
                + phi.atoms().iter().map(|(u, w)| w * (dot(&y, u) - k.support_at(u)).max(0.0)).sum::<f64>();
            let v = excess(&k, &phi, &y, &cfg);
            assert!((v - brute).abs() < 1e-8, "{y:?}: {v} vs {brute}");
        }
    }

    #[test]
    fn excess_monotone_along_rays() {
        let cfg = IntegrationConfig::default();
        let k = Body::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.3], vec![0.5, 1.5]]).unwrap();
        let mut rng = RngKey::new(1, 0, tag::METRICS).rng();
        for _ in 0..50 {
            let s = parallel_boundary_sample(&k, 0.05, &mut rng);
            let mut last = 0.0;
            for j in 1..6 {
                let y = linalg::axpy(&s.base, 0.05 * j as f64, &s.normal);
                let v = excess(&k, &iso(), &y, &cfg);
                assert!(v >= last - 1e-12);
                last = v;
            }
        }
    }

    #[test]
    fn mu_ball_symmetric() {
        let cfg = MuConfig { coarse_samples: 64, ..Default::default() };
        let e = mu_estimate(&ball(), &iso(), 1.0, &cfg).unwrap();
        assert!((e.value - ball_far_value()).abs() < 1e-4);
        assert!((ball().distance(&e.argmin_point) - 1.0).abs() < 1e-9);
        assert!(matches!(mu_estimate(&ball(), &iso(), 0.0, &cfg), Err(Error::InvalidEpsilon(_))));
    }

    #[test]
    fn mu_square_atomic_dense_grid() {
        let atoms = DirectionalDistribution::coordinate_atoms(2).unwrap();
        let cfg = MuConfig::default();
        let e = mu_estimate(&square(), &atoms, 0.1, &cfg).unwrap();
        assert!((e.value - 0.025).abs() < 1e-6);
        let y = &e.argmin_point;
        assert!((y[0].abs() - 1.1).abs() < 1e-9 || (y[1].abs() - 1.1).abs() < 1e-9, "{y:?}");
        let grid = parallel_boundary_grid_2d(&square(), 0.1, 1_000_000);
        let exact = grid
            .iter()
            .map(|y| atoms.atoms().iter().map(|(u, w)| w * (dot(y, u) - square().support_at(u)).max(0.0)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!((exact - 0.025).abs() < 1e-12);
        assert!((e.value - exact).abs() <= 1e-4 * exact);
    }

    #[test]
    fn mu_positive_when_supported() {
        let cfg = MuConfig { coarse_samples: 256, ..Default::default() };
        let cases = [
            (square(), DirectionalDistribution::coordinate_atoms(2).unwrap()),
            (square(), iso()),
            (ball(), iso()),
            (Body::stadium(1.0).unwrap(), iso()),
        ];
        for (k, phi) in &cases {
            assert!(phi.supports_approximation(k).unwrap());
            for eps in [0.01, 0.1, 1.0] {
                assert!(mu_estimate(k, phi, eps, &cfg).unwrap().value > 0.0);
            }
        }
        // ball with facet atoms fails the support condition; mu is still >= 0
        let atoms = DirectionalDistribution::coordinate_atoms(2).unwrap();
        assert!(mu_estimate(&ball(), &atoms, 0.1, &cfg).unwrap().value >= 0.0);
    }

    #[test]
    fn mu_decreasing_in_eps() {
        let cfg = MuConfig { coarse_samples: 256, ..Default::default() };
        let mut last = f64::INFINITY;
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let v = mu_estimate(&square(), &iso(), eps, &cfg).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn dense_grid_oracle_gap() {
        // stadium with a mixed measure: search vs exhaustive grid
        let k = Body::stadium(0.5).unwrap();
        let phi = DirectionalDistribution::from_surface_measure(&k, 0.5).unwrap();
        let icfg = IntegrationConfig { nodes: 512, ..Default::default() };
        let cfg = MuConfig { integration: icfg, ..Default::default() };
        let e = mu_estimate(&k, &phi, 0.1, &cfg).unwrap();
        let grid_min = parallel_boundary_grid_2d(&k, 0.1, 20_000)
            .iter()
            .map(|y| excess(&k, &phi, y, &icfg))
            .fold(f64::INFINITY, f64::min);
        assert!(e.value <= grid_min * (1.0 + 1e-4), "{} vs {grid_min}", e.value);
    }

    #[test]
    fn mu_ratio_bounded_with_rolling_ball() {
        let cfg = IntegrationConfig::default();
        let ratios: Vec<f64> = (4..=10)
            .map(|j| {
                let eps = 0.5f64.powi(j);
                excess(&ball(), &iso(), &[1.0 + eps, 0.0], &cfg) / eps.powf(1.5)
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 1.2, "{ratios:?}");
    }

    #[test]
    fn hausdorff_cell_examples() {
        let sq = square();
        let box2: Vec<Vec<f64>> = vec![vec![2.0, 2.0], vec![-2.0, 2.0], vec![-2.0, -2.0], vec![2.0, -2.0]];
        let hs: Vec<Hyperplane> = (0..2)
            .flat_map(|k| {
                let e = UnitVector::axis(2, k);
                [Hyperplane::new(e.clone(), 2.0).unwrap(), Hyperplane::new(e.neg(), 2.0).unwrap()]
            })
            .collect();
        let cell = CellPolytope {
            halfspaces: hs,
            vertices: box2.iter().map(|p| CellVertex { point: p.clone(), basis: vec![0, 1] }).collect(),
            window_radius: 10.0,
            stats: CellStats { sampled: 4, active: 4, rounds: 1 },
        };
        assert!((hausdorff_cell(&sq, &cell).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // adding the halfspace x <= 1.5 cuts the corners at x = 2
        let mut cut = cell.clone();
        cut.halfspaces.push(Hyperplane::new(UnitVector::axis(2, 0), 1.5).unwrap());
        cut.vertices = vec![vec![1.5, 2.0], vec![-2.0, 2.0], vec![-2.0, -2.0], vec![1.5, -2.0]]
            .into_iter()
            .map(|p| CellVertex { point: p, basis: vec![0, 1] })
            .collect();
        assert!(hausdorff_cell(&sq, &cut).unwrap() <= hausdorff_cell(&sq, &cell).unwrap());
        let on_boundary = CellPolytope {
            vertices: vec![vec![1.0, 1.0], vec![-1.0, 1.0]].into_iter().map(|p| CellVertex { point: p, basis: vec![] }).collect(),
            halfspaces: vec![],
            ..cell
        };
        assert_eq!(hausdorff_cell(&sq, &on_boundary).unwrap(), 0.0);
    }
}
