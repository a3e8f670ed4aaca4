//! Invariant suite run by `hypercell validate`: geometry oracles, sampler
//! statistics and kernel cross-checks at desk scale.

use crate::cell::intersect::{intersect_with, same_vertex_sets, Halfspace, Kernel};
use crate::cell::{cells_along_intensity, WindowPolicy};
use crate::direction::{DirectionalDistribution, IntegrationConfig, MeasureSupport};
use crate::experiment::fit_loglog;
use crate::geom::{parallel_boundary_sample, uniform_sphere, Body, UnitVector};
use crate::linalg;
use crate::metrics::{excess, hausdorff_cell, mu_estimate, MuConfig};
use crate::process::ProcessParams;
use crate::rng::{tag, RngKey, StreamRng};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }
}

type CheckFn = fn(&mut StreamRng) -> Result<String, String>;

/// Runs every check with streams derived from `seed`.
pub fn run(seed: u64) -> Report {
    let checks: &[(&str, &str, CheckFn)] = &[
        ("geom", "support is sublinear", support_sublinear),
        ("geom", "boundary samples sit at distance eps", boundary_distance),
        ("geom", "surface measures are even with analytic mass", surface_masses),
        ("geom", "hausdorff of dense parallel-body vertices", hausdorff_dense),
        ("direction", "samplers are even (sign test)", sampler_sign_test),
        ("direction", "integration is exact on constants", integrate_constants),
        ("direction", "surface-measure supports match", support_kinds),
        ("process", "hitting count mean matches Phi", hitting_mean),
        ("process", "annulus offsets exceed the inner support", annulus_offsets),
        ("cell", "planar kernel equals pair enumeration", planar_oracle),
        ("cell", "clipping kernel equals enumeration in d = 3", clipping_oracle),
        ("cell", "coupled cells are nested and contain K", nested_cells),
        ("metrics", "excess closed form for the disk", excess_disk),
        ("metrics", "mu for square with facet atoms", mu_square),
        ("experiment", "fit is exact on a power law", fit_exact),
    ];
    let key = RngKey::new(seed, 0, tag::SELFCHECK);
    let checks = checks
        .iter()
        .enumerate()
        .map(|(i, (module, name, f))| {
            let mut rng = key.derive(i as u64).rng();
            let (passed, detail) = match f(&mut rng) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { module, name, passed, detail }
        })
        .collect();
    Report { checks }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bodies() -> Vec<Body> {
    vec![
        Body::cube(2, 1.0).unwrap(),
        Body::ball(vec![0.0, 0.0], 1.0).unwrap(),
        Body::stadium(1.0).unwrap(),
        Body::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.3], vec![0.5, 1.5]]).unwrap(),
        Body::cube(3, 1.0).unwrap(),
        Body::ballsum(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 0.3).unwrap(),
    ]
}

fn support_sublinear(rng: &mut StreamRng) -> Result<String, String> {
    let mut n = 0;
    for k in bodies() {
        for _ in 0..500 {
            let u = uniform_sphere(k.dim(), rng);
            let w = uniform_sphere(k.dim(), rng);
            let s = linalg::add(&u, &w);
            let ns = linalg::norm(&s);
            if ns < 1e-9 {
                continue;
            }
            let lhs = k.support_at(&linalg::scale(&s, 1.0 / ns)) * ns;
            ensure(lhs <= k.support_at(&u) + k.support_at(&w) + 1e-12, || format!("violated at {u:?}, {w:?}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} direction pairs"))
}

fn boundary_distance(rng: &mut StreamRng) -> Result<String, String> {
    let mut worst = 0.0f64;
    for k in bodies() {
        for eps in [0.01, 0.3, 2.0] {
            for _ in 0..300 {
                let y = parallel_boundary_sample(&k, eps, rng).point;
                worst = worst.max((k.distance(&y) - eps).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn surface_masses(_: &mut StreamRng) -> Result<String, String> {
    let cases = [
        (Body::cube(2, 1.0).unwrap(), 8.0),
        (Body::ball(vec![0.0, 0.0], 1.0).unwrap(), 2.0 * PI),
        (Body::stadium(1.0).unwrap(), 4.0 + 2.0 * PI),
        (Body::cube(3, 1.0).unwrap(), 24.0),
        (Body::ball(vec![0.0; 3], 2.0).unwrap(), 16.0 * PI),
    ];
    for (k, want) in &cases {
        let s = k.surface_measure().map_err(|e| e.to_string())?;
        ensure(s.is_even(), || "surface measure of a symmetric body is not even".into())?;
        ensure((s.total_mass - want).abs() < 1e-9, || format!("mass {} != {want}", s.total_mass))?;
    }
    Ok(format!("{} bodies", cases.len()))
}

fn hausdorff_dense(_: &mut StreamRng) -> Result<String, String> {
    let k = Body::cube(2, 1.0).unwrap();
    let eps = 0.2;
    let pts = crate::metrics::parallel_boundary_grid_2d(&k, eps, 4000);
    let d = k.hausdorff_unchecked(&pts);
    ensure((d - eps).abs() < 1e-9, || format!("{d} vs {eps}"))?;
    Ok(format!("delta = {d}"))
}

fn sampler_sign_test(rng: &mut StreamRng) -> Result<String, String> {
    let variants = [
        DirectionalDistribution::isotropic(3).unwrap(),
        DirectionalDistribution::coordinate_atoms(3).unwrap(),
        DirectionalDistribution::cap_starved(UnitVector::axis(2, 0), |n| 1.0 / n as f64, 16, crate::direction::log_budget, 1.0)
            .unwrap(),
    ];
    for phi in &variants {
        let w = uniform_sphere(phi.dim(), rng);
        let m = 20_000;
        let mut pos = 0;
        for _ in 0..m {
            if linalg::dot(&phi.sample(rng).map_err(|e| e.to_string())?, &w) > 0.0 {
                pos += 1;
            }
        }
        let z = (pos as f64 - 0.5 * m as f64) / (0.25 * m as f64).sqrt();
        ensure(z.abs() < 3.29, || format!("z = {z:.2}"))?;
    }
    Ok(format!("{} variants", variants.len()))
}

fn integrate_constants(_: &mut StreamRng) -> Result<String, String> {
    let cfg = IntegrationConfig { samples: 20_000, ..Default::default() };
    for phi in [
        DirectionalDistribution::isotropic(2).unwrap(),
        DirectionalDistribution::from_surface_measure(&Body::stadium(1.0).unwrap(), 0.2).unwrap(),
        DirectionalDistribution::coordinate_atoms(3).unwrap(),
    ] {
        let e = phi.integrate(|_| 1.0, &cfg);
        ensure((e.value - 1.0).abs() <= 1e-9 + 3.0 * e.std_error, || format!("{e:?}"))?;
    }
    Ok("mass 1".into())
}

fn support_kinds(_: &mut StreamRng) -> Result<String, String> {
    for k in [Body::cube(2, 1.0).unwrap(), Body::ball(vec![0.0, 0.0], 1.0).unwrap(), Body::stadium(1.0).unwrap()] {
        let s = k.surface_measure().map_err(|e| e.to_string())?;
        let phi = DirectionalDistribution::from_surface_measure(&k, 0.0).map_err(|e| e.to_string())?;
        let full = matches!(phi.support_of(), MeasureSupport::FullSphere);
        ensure(full == s.density.is_some(), || "support kind mismatch".into())?;
    }
    Ok("3 bodies".into())
}

fn hitting_mean(rng: &mut StreamRng) -> Result<String, String> {
    let ball = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
    let p = ProcessParams::new(3.0, DirectionalDistribution::isotropic(2).unwrap()).unwrap();
    let reps = 5000;
    let mut total = 0;
    for _ in 0..reps {
        total += p.sample_hitting(&ball, rng).map_err(|e| e.to_string())?.len();
    }
    let mean = total as f64 / reps as f64;
    ensure((mean - 6.0).abs() < 3.29 * (6.0 / reps as f64).sqrt(), || format!("mean {mean}"))?;
    Ok(format!("mean {mean:.4}"))
}

fn annulus_offsets(rng: &mut StreamRng) -> Result<String, String> {
    let k = Body::stadium(0.5).unwrap();
    let p = ProcessParams::new(20.0, DirectionalDistribution::isotropic(2).unwrap()).unwrap();
    let out = k.parallel(0.7);
    let hs = p.sample_annulus(&k, &out, rng).map_err(|e| e.to_string())?;
    ensure(hs.iter().all(|h| h.t > k.support(&h.u) && h.hits(&out)), || "offset outside the annulus".into())?;
    Ok(format!("{} hyperplanes", hs.len()))
}

fn random_halfspaces(rng: &mut StreamRng, d: usize, n: usize) -> Vec<Halfspace> {
    (0..n).map(|_| Halfspace::new(uniform_sphere(d, rng), 0.2 + rng.random::<f64>())).collect()
}

fn planar_oracle(rng: &mut StreamRng) -> Result<String, String> {
    for _ in 0..200 {
        let n = rng.random_range(3..30);
        let p = random_halfspaces(rng, 2, n);
        let a = intersect_with(Kernel::Planar, &p, 2, Some(10.0), 1e-9).map_err(|e| e.to_string())?;
        let b = intersect_with(Kernel::Enumerate, &p, 2, Some(10.0), 1e-9).map_err(|e| e.to_string())?;
        ensure(same_vertex_sets(&a, &b, 1e-7), || format!("mismatch on {n} halfplanes"))?;
    }
    Ok("200 instances".into())
}

fn clipping_oracle(rng: &mut StreamRng) -> Result<String, String> {
    for _ in 0..30 {
        let n = rng.random_range(4..25);
        let p = random_halfspaces(rng, 3, n);
        let a = intersect_with(Kernel::Clipping, &p, 3, Some(8.0), 1e-9).map_err(|e| e.to_string())?;
        let b = intersect_with(Kernel::Enumerate, &p, 3, Some(8.0), 1e-9).map_err(|e| e.to_string())?;
        ensure(same_vertex_sets(&a, &b, 1e-7), || format!("mismatch on {n} halfspaces"))?;
    }
    Ok("30 instances".into())
}

fn nested_cells(rng: &mut StreamRng) -> Result<String, String> {
    let k = Body::stadium(0.5).unwrap();
    let p = ProcessParams::new(1.0, DirectionalDistribution::isotropic(2).unwrap()).unwrap();
    let grid = [8.0, 32.0, 128.0];
    let policy = WindowPolicy { oracle_check: true, ..Default::default() };
    for _ in 0..20 {
        let cells = cells_along_intensity(&p, &k, &grid, &policy, rng).map_err(|e| e.to_string())?;
        let mut last = f64::INFINITY;
        for (i, c) in cells.iter().enumerate() {
            ensure(c.halfspaces.iter().all(|h| k.support(&h.u) <= h.t), || "cell does not contain K".into())?;
            if i > 0 {
                ensure(c.vertices.iter().all(|v| cells[i - 1].contains(&v.point)), || "cells not nested".into())?;
            }
            let d = hausdorff_cell(&k, c).map_err(|e| e.to_string())?;
            ensure(d <= last, || "delta increased along the grid".into())?;
            last = d;
        }
    }
    Ok("20 coupled runs".into())
}

fn excess_disk(_: &mut StreamRng) -> Result<String, String> {
    let k = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
    let v = excess(&k, &DirectionalDistribution::isotropic(2).unwrap(), &[2.0, 0.0], &IntegrationConfig::default());
    let want = (2.0 * 3f64.sqrt() - 2.0 * PI / 3.0) / (2.0 * PI);
    ensure((v - want).abs() < 1e-9, || format!("{v} vs {want}"))?;
    Ok(format!("{v:.6}"))
}

fn mu_square(_: &mut StreamRng) -> Result<String, String> {
    let k = Body::cube(2, 1.0).unwrap();
    let phi = DirectionalDistribution::coordinate_atoms(2).unwrap();
    let e = mu_estimate(&k, &phi, 0.1, &MuConfig::default()).map_err(|e| e.to_string())?;
    ensure((e.value - 0.025).abs() < 1e-6, || format!("{}", e.value))?;
    Ok(format!("{:.8}", e.value))
}

fn fit_exact(_: &mut StreamRng) -> Result<String, String> {
    let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, -1.5 * i as f64 + 0.25)).collect();
    let f = fit_loglog(&pts).map_err(|e| e.to_string())?;
    ensure((f.slope + 1.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12, || format!("{f:?}"))?;
    Ok("slope -1.5".into())
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        let r = super::run(2024);
        for c in &r.checks {
            assert!(c.passed, "{}::{} failed: {}", c.module, c.name, c.detail);
        }
    }
}
