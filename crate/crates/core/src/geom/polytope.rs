//! Vertex/facet representation of convex polytopes.
//!
//! Facets come from a monotone chain in the plane and from brute-force
//! enumeration of affinely independent `d`-subsets otherwise. That is
//! quadratic-to-quartic in the vertex count, which is fine for the small
//! closed-form bodies used as `K` (cells never go through this path).

use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::linalg::{self, dot, norm};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: UnitVector,
    pub offset: f64,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
    /// `(d-1)`-volume.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    vertex_facets: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    diameter: f64,
    circumradius: f64,
}

/// Counter-clockwise convex hull (indices), collinear points dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

pub(crate) struct RawFacet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub members: Vec<usize>,
}

pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) use for_each_subset as subsets;

/// Facets of `conv(points)` in `R^k`, `k >= 2`, points affinely spanning.
pub(crate) fn hull_facets(points: &[Vec<f64>]) -> Vec<RawFacet> {
    let k = points[0].len();
    let scale = points.iter().map(|p| norm(p)).fold(1.0, f64::max);
    let eps = 1e-9 * scale;
    if k == 2 {
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        let hull = convex_hull_2d(&pts);
        let m = hull.len();
        return (0..m)
            .map(|i| {
                let a = &points[hull[i]];
                let b = &points[hull[(i + 1) % m]];
                let n = linalg::normalized(&[b[1] - a[1], a[0] - b[0]]).expect("distinct hull points");
                let offset = dot(&n, a);
                let members = (0..points.len())
                    .filter(|&j| (dot(&n, &points[j]) - offset).abs() <= eps)
                    .collect();
                RawFacet { normal: n, offset, members }
            })
            .collect();
    }
    let mut out: Vec<RawFacet> = Vec::new();
    subsets(points.len(), k, |s| {
        let refs: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
        let Some(mut n) = linalg::hyperplane_normal(&refs) else { return };
        let mut offset = dot(&n, refs[0]);
        let (mut above, mut below) = (false, false);
        for p in points {
            let s = dot(&n, p) - offset;
            above |= s > eps;
            below |= s < -eps;
            if above && below {
                return;
            }
        }
        if above {
            n.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        if out
            .iter()
            .any(|f| dot(&f.normal, &n) > 1.0 - 1e-9 && (f.offset - offset).abs() <= eps)
        {
            return;
        }
        let members = (0..points.len())
            .filter(|&j| (dot(&n, &points[j]) - offset).abs() <= eps)
            .collect();
        out.push(RawFacet { normal: n, offset, members });
    });
    out
}

/// `k`-dimensional volume of `conv(points)` for points in `R^k`.
/// Returns 0 for affinely degenerate input.
pub fn convex_volume(points: &[Vec<f64>]) -> f64 {
    let k = points[0].len();
    if k == 1 {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
        return hi - lo;
    }
    let diffs: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p, &points[0])).collect();
    if points.len() <= k || linalg::rank(&diffs, 1e-10) < k {
        return 0.0;
    }
    if k == 2 {
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        let hull = convex_hull_2d(&pts);
        let m = hull.len();
        let twice: f64 = (0..m)
            .map(|i| {
                let a = pts[hull[i]];
                let b = pts[hull[(i + 1) % m]];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        return 0.5 * twice.abs();
    }
    let c = linalg::centroid(points);
    hull_facets(points)
        .iter()
        .map(|f| {
            let sub: Vec<Vec<f64>> = f.members.iter().map(|&i| points[i].clone()).collect();
            let height = f.offset - dot(&f.normal, &c);
            height * facet_volume(&sub, &f.normal) / k as f64
        })
        .sum()
}

/// `(k-1)`-volume of points lying in the hyperplane with unit normal `normal`.
fn facet_volume(points: &[Vec<f64>], normal: &[f64]) -> f64 {
    let basis = linalg::orthonormal_complement(normal);
    let projected: Vec<Vec<f64>> = points
        .iter()
        .map(|p| basis.iter().map(|b| dot(b, p)).collect())
        .collect();
    convex_volume(&projected)
}

impl Polytope {
    /// Builds the convex hull of `points`; fails unless they affinely span `R^d`.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        if d < 2 {
            return Err(Error::InvalidBody(format!("dimension {d} < 2")));
        }
        if points.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidBody("vertices must be finite and of equal dimension".into()));
        }
        let diffs: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p, &points[0])).collect();
        let scale = diffs.iter().map(|v| norm(v)).fold(0.0, f64::max);
        if points.len() <= d || linalg::rank(&diffs, 1e-10 * scale.max(1.0)) < d {
            return Err(Error::InvalidBody("vertices do not affinely span R^d (empty interior)".into()));
        }
        let raw = hull_facets(&points);
        // keep extreme points only: normals of incident facets span R^d
        let extreme: Vec<usize> = (0..points.len())
            .filter(|&i| {
                let normals: Vec<Vec<f64>> =
                    raw.iter().filter(|f| f.members.contains(&i)).map(|f| f.normal.clone()).collect();
                linalg::rank(&normals, 1e-9) == d
            })
            .collect();
        let mut remap = vec![usize::MAX; points.len()];
        for (new, &old) in extreme.iter().enumerate() {
            remap[old] = new;
        }
        let vertices: Vec<Vec<f64>> = extreme.iter().map(|&i| points[i].clone()).collect();
        let facets: Vec<Facet> = raw
            .into_iter()
            .map(|f| {
                let members: Vec<usize> = f.members.iter().map(|&i| remap[i]).filter(|&i| i != usize::MAX).collect();
                let pts: Vec<Vec<f64>> = members.iter().map(|&i| vertices[i].clone()).collect();
                let area = facet_volume(&pts, &f.normal);
                Facet { normal: UnitVector::from_raw(f.normal), offset: f.offset, vertices: members, area }
            })
            .collect();
        Ok(Self::assemble(vertices, facets))
    }

    /// Planar segment through collinear `points`, as a degenerate polygon: the
    /// two sides carry the length as area, the endpoints get zero-area facets
    /// so their normal cones are half-circles.
    pub(crate) fn planar_segment(points: &[Vec<f64>]) -> Result<Self> {
        if points.len() < 2 || points.iter().any(|p| p.len() != 2 || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidBody("segment needs at least two finite planar points".into()));
        }
        let (mut a, mut b, mut best) = (0, 0, 0.0);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let l = linalg::dist(&points[i], &points[j]);
                if l > best {
                    (a, b, best) = (i, j, l);
                }
            }
        }
        if best == 0.0 {
            return Err(Error::InvalidBody("segment has zero length".into()));
        }
        let (p, q) = (points[a].clone(), points[b].clone());
        let e = [(q[0] - p[0]) / best, (q[1] - p[1]) / best];
        let diffs: Vec<Vec<f64>> = points.iter().map(|x| linalg::sub(x, &p)).collect();
        if linalg::rank(&diffs, 1e-10 * best.max(1.0)) != 1 {
            return Err(Error::InvalidBody("points are not collinear".into()));
        }
        let n = vec![-e[1], e[0]];
        let facet = |normal: Vec<f64>, members: Vec<usize>, area: f64, vertices: &[Vec<f64>]| Facet {
            offset: dot(&normal, &vertices[members[0]]),
            normal: UnitVector::from_raw(normal),
            vertices: members,
            area,
        };
        let vertices = vec![p, q];
        let facets = vec![
            facet(n.clone(), vec![0, 1], best, &vertices),
            facet(e.to_vec(), vec![1], 0.0, &vertices),
            facet(vec![-n[0], -n[1]], vec![0, 1], best, &vertices),
            facet(vec![-e[0], -e[1]], vec![0], 0.0, &vertices),
        ];
        Ok(Self::assemble(vertices, facets))
    }

    fn assemble(vertices: Vec<Vec<f64>>, facets: Vec<Facet>) -> Self {
        let d = vertices[0].len();
        let mut vertex_facets = vec![Vec::new(); vertices.len()];
        for (fi, f) in facets.iter().enumerate() {
            for &v in &f.vertices {
                vertex_facets[v].push(fi);
            }
        }
        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let normals: Vec<Vec<f64>> = vertex_facets[i]
                    .iter()
                    .filter(|f| vertex_facets[j].contains(f))
                    .map(|&f| facets[f].normal.to_vec())
                    .collect();
                if normals.len() >= d - 1 && linalg::rank(&normals, 1e-9) >= d - 1 {
                    edges.push((i, j));
                }
            }
        }
        let mut diameter: f64 = 0.0;
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                diameter = diameter.max(linalg::dist(&vertices[i], &vertices[j]));
            }
        }
        let circumradius = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        Self { vertices, facets, vertex_facets, edges, diameter, circumradius }
    }

    /// The same polytope moved by `-c`.
    pub fn translated(&self, c: &[f64]) -> Result<Self> {
        let vertices: Vec<Vec<f64>> = self.vertices.iter().map(|v| linalg::sub(v, c)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { offset: f.offset - dot(&f.normal, c), ..f.clone() })
            .collect();
        Ok(Self::assemble(vertices, facets))
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Facets incident to vertex `i`.
    pub fn vertex_facets(&self, i: usize) -> &[usize] {
        &self.vertex_facets[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn min_offset(&self) -> f64 {
        self.facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self, u: &[f64]) -> usize {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let s = dot(v, u);
            if s > val {
                val = s;
                best = i;
            }
        }
        best
    }

    /// Vertices of the support set `F(P, u)`.
    pub fn support_set(&self, u: &[f64]) -> Vec<usize> {
        let h = self.support(u);
        let eps = tol::FEASIBILITY * (1.0 + self.circumradius);
        (0..self.vertices.len())
            .filter(|&i| dot(&self.vertices[i], u) >= h - eps)
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let eps = tol::FEASIBILITY * (1.0 + self.circumradius);
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + eps)
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn volume(&self) -> f64 {
        convex_volume(&self.vertices)
    }
}
