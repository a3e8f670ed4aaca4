//! Halfspace intersection kernels for `{x : <a_i, x> <= b_i}` with all
//! `b_i > 0`.
//!
//! * `planar`: d = 2 via polar duality. The cell is `{x : <p_i, x> <= 1}`
//!   with `p_i = a_i / b_i`; its vertices are dual to the edges of
//!   `conv{p_i}` and it is bounded iff the origin is interior to that hull.
//! * `clipping`: any d. Starts from a box and cuts one halfspace at a time,
//!   tracking each vertex's `d` defining constraints. Vertices are adjacent
//!   iff they share `d - 1` constraints (simple polytope; continuous inputs
//!   make it simple almost surely).
//! * `enumerate`: all `d`-subsets, solved and feasibility-filtered. Used as
//!   the oracle.

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, subsets};
use crate::linalg;
use crate::tol;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        debug_assert!(b > 0.0);
        Self { a, b }
    }

    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - linalg::dot(&self.a, x)
    }
}

/// A vertex and the indices of the `d` constraints defining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Planar,
    Clipping,
    Enumerate,
}

/// Box `[-r, r]^d` as `2d` halfspaces: `x_k <= r` at `2k`, `-x_k <= r` at `2k + 1`.
pub fn box_halfspaces(d: usize, r: f64) -> Vec<Halfspace> {
    (0..d)
        .flat_map(|k| {
            let mut p = vec![0.0; d];
            p[k] = 1.0;
            let m = p.iter().map(|x| -x).collect();
            [Halfspace::new(p, r), Halfspace::new(m, r)]
        })
        .collect()
}

/// Intersection of `planes` (bounded by the box `[-r, r]^d` when `bbox` is
/// given; its constraints get indices after `planes`).
pub fn halfspace_intersection(planes: &[Halfspace], dim: usize, bbox: Option<f64>, tolerance: f64) -> Result<Vec<Vertex>> {
    let kernel = if dim == 2 { Kernel::Planar } else { Kernel::Clipping };
    intersect_with(kernel, planes, dim, bbox, tolerance)
}

pub fn intersect_with(kernel: Kernel, planes: &[Halfspace], dim: usize, bbox: Option<f64>, tolerance: f64) -> Result<Vec<Vertex>> {
    if planes.iter().any(|h| !(h.b > 0.0) || h.a.len() != dim) {
        return Err(Error::InvalidConfig("halfspaces need b > 0 and matching dimension".into()));
    }
    let n = planes.len();
    if kernel == Kernel::Planar {
        assert_eq!(dim, 2, "planar kernel needs d = 2");
        return match bbox {
            Some(r) => planar(&planes.iter().cloned().chain(box_halfspaces(2, r)).collect::<Vec<_>>()),
            None => planar(planes),
        };
    }
    // without a box, use a huge one: a vertex on it witnesses a recession direction
    let r = bbox.unwrap_or_else(|| 1e6 * planes.iter().map(|h| h.b / linalg::norm(&h.a)).fold(1.0, f64::max));
    let out = if kernel == Kernel::Enumerate {
        let all: Vec<Halfspace> = planes.iter().cloned().chain(box_halfspaces(dim, r)).collect();
        enumerate(&all, dim, tolerance)
    } else {
        clipping(planes, dim, r)
    };
    if bbox.is_none() && out.iter().any(|v| v.basis.iter().any(|&i| i >= n)) {
        return Err(Error::Unbounded);
    }
    Ok(out)
}

#[inline]
fn solve2(p: [f64; 2], q: [f64; 2]) -> Option<[f64; 2]> {
    let det = p[0] * q[1] - p[1] * q[0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([(q[1] - p[1]) / det, (p[0] - q[0]) / det])
}

/// d = 2 dual-hull kernel. Vertices come out counter-clockwise.
pub fn planar(planes: &[Halfspace]) -> Result<Vec<Vertex>> {
    let dual: Vec<[f64; 2]> = planes.iter().map(|h| [h.a[0] / h.b, h.a[1] / h.b]).collect();
    let hull = convex_hull_2d(&dual);
    if hull.len() < 3 {
        return Err(Error::Unbounded);
    }
    let mut out = Vec::with_capacity(hull.len());
    for k in 0..hull.len() {
        let (i, j) = (hull[k], hull[(k + 1) % hull.len()]);
        let (p, q) = (dual[i], dual[j]);
        // origin strictly left of the CCW edge p -> q
        let cross = (q[0] - p[0]) * (-p[1]) - (q[1] - p[1]) * (-p[0]);
        if !(cross > 0.0) {
            return Err(Error::Unbounded);
        }
        let x = solve2(p, q).ok_or(Error::Unbounded)?;
        let mut basis = vec![i, j];
        basis.sort_unstable();
        out.push(Vertex { point: x.to_vec(), basis });
    }
    Ok(out)
}

/// Brute-force oracle: every nonsingular `d`-subset whose solution is
/// feasible within `tolerance` (relative to `b`); coincident points merged.
pub fn enumerate(planes: &[Halfspace], dim: usize, tolerance: f64) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::new();
    subsets(planes.len(), dim, |s| {
        let rows: Vec<&[f64]> = s.iter().map(|&i| planes[i].a.as_slice()).collect();
        let rhs: Vec<f64> = s.iter().map(|&i| planes[i].b).collect();
        let Some(x) = linalg::solve(&rows, &rhs) else { return };
        let residual = s.iter().map(|&i| planes[i].slack(&x).abs() / planes[i].b).fold(0.0, f64::max);
        if residual > tol::DEGENERATE_RESIDUAL {
            return;
        }
        if planes.iter().all(|h| h.slack(&x) >= -tolerance * h.b.max(1.0)) {
            let scale = 1.0 + linalg::norm(&x);
            if !out.iter().any(|v| linalg::dist(&v.point, &x) <= 1e-9 * scale) {
                out.push(Vertex { point: x, basis: s.to_vec() });
            }
        }
    });
    out
}

/// Polytope under construction for the clipping kernel.
#[derive(Debug, Clone)]
pub struct Clipper {
    dim: usize,
    /// Constraint ids of the caller; box constraints get `usize::MAX - k`.
    ids: Vec<usize>,
    planes: Vec<Halfspace>,
    verts: Vec<Vertex>,
}

pub const BOX_ID_BASE: usize = usize::MAX - 1024;

impl Clipper {
    /// `[-r, r]^d`.
    pub fn new_box(dim: usize, r: f64) -> Self {
        let planes = box_halfspaces(dim, r);
        let ids = (0..2 * dim).map(|k| BOX_ID_BASE + k).collect();
        let verts = (0..1usize << dim)
            .map(|mask| {
                let point: Vec<f64> = (0..dim).map(|k| if mask >> k & 1 == 1 { -r } else { r }).collect();
                let basis = (0..dim).map(|k| 2 * k + (mask >> k & 1)).collect();
                Vertex { point, basis }
            })
            .collect();
        Self { dim, ids, planes, verts }
    }

    /// Cuts with `h`, recorded under the caller's `id`. Returns whether the
    /// polytope changed.
    pub fn clip(&mut self, h: &Halfspace, id: usize) -> bool {
        let s: Vec<f64> = self.verts.iter().map(|v| linalg::dot(&h.a, &v.point) - h.b).collect();
        if s.iter().all(|&x| x <= 0.0) {
            return false;
        }
        let local = self.planes.len();
        self.planes.push(h.clone());
        self.ids.push(id);
        let d = self.dim;
        let mut edges: HashMap<Vec<usize>, [usize; 2]> = HashMap::new();
        let mut fresh = Vec::new();
        for (i, v) in self.verts.iter().enumerate() {
            if s[i] > 0.0 {
                continue;
            }
            for skip in 0..d {
                let key: Vec<usize> = v.basis.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &b)| b).collect();
                edges.entry(key).or_insert([usize::MAX; 2])[0] = i;
            }
        }
        for (j, v) in self.verts.iter().enumerate() {
            if s[j] <= 0.0 {
                continue;
            }
            for skip in 0..d {
                let key: Vec<usize> = v.basis.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &b)| b).collect();
                if let Some(pair) = edges.get(&key) {
                    let i = pair[0];
                    if i == usize::MAX {
                        continue;
                    }
                    let lambda = s[i] / (s[i] - s[j]);
                    let (vi, vj) = (&self.verts[i].point, &v.point);
                    let point: Vec<f64> = vi.iter().zip(vj).map(|(a, b)| a + lambda * (b - a)).collect();
                    let mut basis = key.clone();
                    basis.push(local);
                    basis.sort_unstable();
                    fresh.push(Vertex { point, basis });
                }
            }
        }
        let mut kept: Vec<Vertex> = self
            .verts
            .drain(..)
            .zip(&s)
            .filter(|(_, &x)| x <= 0.0)
            .map(|(v, _)| v)
            .collect();
        kept.extend(fresh);
        self.verts = kept;
        true
    }

    /// Current vertices with caller ids as bases.
    pub fn vertices(&self) -> Vec<Vertex> {
        self.verts
            .iter()
            .map(|v| {
                let mut basis: Vec<usize> = v.basis.iter().map(|&b| self.ids[b]).collect();
                basis.sort_unstable();
                Vertex { point: v.point.clone(), basis }
            })
            .collect()
    }

    pub fn vertex_points(&self) -> impl Iterator<Item = &[f64]> {
        self.verts.iter().map(|v| v.point.as_slice())
    }

    /// Caller ids of constraints defining at least one vertex.
    pub fn active_ids(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.verts.iter().flat_map(|v| v.basis.iter().map(|&b| self.ids[b])).collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Drops constraints that define no vertex.
    pub fn compact(&mut self) {
        let mut used = vec![false; self.planes.len()];
        for v in &self.verts {
            for &b in &v.basis {
                used[b] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.planes.len()];
        let mut planes = Vec::new();
        let mut ids = Vec::new();
        for (k, u) in used.iter().enumerate() {
            if *u {
                remap[k] = planes.len();
                planes.push(self.planes[k].clone());
                ids.push(self.ids[k]);
            }
        }
        for v in &mut self.verts {
            for b in &mut v.basis {
                *b = remap[*b];
            }
        }
        self.planes = planes;
        self.ids = ids;
    }
}

/// Clipping kernel over `planes` using the box `[-r, r]^d`; returns bases
/// indexed into `planes` followed by the `2d` box constraints.
fn clipping(planes: &[Halfspace], dim: usize, r: f64) -> Vec<Vertex> {
    let mut c = Clipper::new_box(dim, r);
    let n = planes.len();
    for (i, h) in planes.iter().enumerate() {
        c.clip(h, i);
    }
    c.vertices()
        .into_iter()
        .map(|mut v| {
            for b in &mut v.basis {
                if *b >= BOX_ID_BASE {
                    *b = n + (*b - BOX_ID_BASE);
                }
            }
            v.basis.sort_unstable();
            v
        })
        .collect()
}

/// Whether two vertex sets agree up to `tolerance` (symmetric matching).
pub fn same_vertex_sets(a: &[Vertex], b: &[Vertex], tolerance: f64) -> bool {
    let near = |p: &[f64], set: &[Vertex]| set.iter().any(|v| linalg::dist(&v.point, p) <= tolerance);
    a.iter().all(|v| near(&v.point, b)) && b.iter().all(|v| near(&v.point, a))
}
