//! Metric projection onto polytopes.
//!
//! `d <= 3` enumerates faces exactly (facet interiors by orthogonal projection,
//! edges by segment projection). Higher dimensions use Wolfe's active-set
//! min-norm-point iteration on the vertex set.

use super::Polytope;
use crate::linalg::{self, dot, norm};
use nalgebra::{DMatrix, DVector};

pub(super) fn inflate(p: Vec<f64>, d: f64, r: f64, x: &[f64]) -> (Vec<f64>, f64) {
    if d <= r {
        return (x.to_vec(), 0.0);
    }
    let dir = linalg::scale(&linalg::sub(x, &p), 1.0 / d);
    (linalg::axpy(&p, r, &dir), d - r)
}

fn segment_nearest(a: &[f64], b: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let ab = linalg::sub(b, a);
    let len2 = dot(&ab, &ab);
    let s = if len2 > 0.0 {
        (dot(&linalg::sub(x, a), &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = linalg::axpy(a, s, &ab);
    let d = linalg::dist(&q, x);
    (q, d)
}

pub(super) fn polytope_nearest(p: &Polytope, x: &[f64]) -> (Vec<f64>, f64) {
    if p.contains(x) {
        return (x.to_vec(), 0.0);
    }
    match p.dim() {
        2 | 3 => face_enumeration(p, x),
        _ => {
            let shifted: Vec<Vec<f64>> = p.vertices().iter().map(|v| linalg::sub(v, x)).collect();
            let z = min_norm_point(&shifted);
            let d = norm(&z);
            (linalg::add(&z, x), d)
        }
    }
}

fn face_enumeration(p: &Polytope, x: &[f64]) -> (Vec<f64>, f64) {
    let mut best: (Vec<f64>, f64) = (Vec::new(), f64::INFINITY);
    let verts = p.vertices();
    if p.dim() == 3 {
        for f in p.facets() {
            let excess = dot(&f.normal, x) - f.offset;
            if excess <= 0.0 || excess >= best.1 {
                continue;
            }
            let q = linalg::axpy(x, -excess, &f.normal);
            if p.contains(&q) {
                best = (q, excess);
            }
        }
    }
    for &(i, j) in p.edges() {
        let cand = segment_nearest(&verts[i], &verts[j], x);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// Point of minimum norm in `conv(points)` (Wolfe 1976).
pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-12 * scale;
    let combine = |set: &[usize], lam: &[f64]| {
        let mut x = vec![0.0; points[0].len()];
        for (&i, &l) in set.iter().zip(lam) {
            for (xk, pk) in x.iter_mut().zip(&points[i]) {
                *xk += l * pk;
            }
        }
        x
    };
    let first = (0..points.len())
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .expect("nonempty point set");
    let mut set = vec![first];
    let mut lam = vec![1.0];
    for _ in 0..10_000 {
        let x = combine(&set, &lam);
        let xx = dot(&x, &x);
        let (j, xj) = (0..points.len())
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xj >= xx - eps || set.contains(&j) {
            return x;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(points, &set) else {
                return combine(&set, &lam);
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0;
            let mut drop = 0;
            for (k, (&l, &a)) in lam.iter().zip(&alpha).enumerate() {
                if a <= 1e-14 {
                    let t = l / (l - a);
                    if t < theta {
                        theta = t;
                        drop = k;
                    }
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            lam[drop] = 0.0;
            let keep: Vec<usize> = (0..set.len()).filter(|&k| lam[k] > 1e-14).collect();
            set = keep.iter().map(|&k| set[k]).collect();
            lam = keep.iter().map(|&k| lam[k]).collect();
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
        }
    }
    combine(&set, &lam)
}

/// Minimizer of `|sum a_i p_i|` over the affine hull (`sum a_i = 1`).
fn affine_minimizer(points: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let m = set.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = dot(&points[set[i]], &points[set[j]]);
        }
        a[(i, m)] = 1.0;
        a[(m, i)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let sol = a.lu().solve(&b)?;
    let alpha: Vec<f64> = sol.iter().take(m).copied().collect();
    alpha.iter().all(|v| v.is_finite()).then_some(alpha)
}
