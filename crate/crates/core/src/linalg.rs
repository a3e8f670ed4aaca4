//! Small dense vector helpers on `&[f64]` plus the few solves the kernels need.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let mut c = vec![0.0; d];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    let k = points.len() as f64;
    c.iter_mut().for_each(|x| *x /= k);
    c
}

/// Solves the square system `rows * x = rhs`. Returns `None` when the matrix is
/// singular or the residual exceeds [`crate::tol::DEGENERATE_RESIDUAL`].
pub fn solve(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let d = rhs.len();
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = m.clone().lu().solve(&b)?;
    let resid = (&m * &x - &b).amax();
    let scale = 1.0 + b.amax();
    if !x.iter().all(|v| v.is_finite()) || resid > crate::tol::DEGENERATE_RESIDUAL * scale {
        return None;
    }
    Some(x.iter().copied().collect())
}

/// Numerical rank of a set of vectors (rows).
pub fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let d = vectors[0].len();
    let m = DMatrix::from_fn(vectors.len(), d, |i, j| vectors[i][j]);
    m.rank(tol)
}

/// Unit normal of the hyperplane through `points` (exactly `d` affinely
/// independent points in `R^d`), via cofactors of the difference matrix.
pub fn hyperplane_normal(points: &[&[f64]]) -> Option<Vec<f64>> {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d);
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let scale = diffs.iter().map(|v| norm(v)).fold(0.0, f64::max).max(1e-300);
    let mut n = vec![0.0; d];
    for (col, ni) in n.iter_mut().enumerate() {
        let minor = DMatrix::from_fn(d - 1, d - 1, |i, j| {
            let jj = if j < col { j } else { j + 1 };
            diffs[i][jj] / scale
        });
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        *ni = sign * minor.determinant();
    }
    let len = norm(&n);
    if len < 1e-12 {
        return None;
    }
    Some(scale_vec(n, 1.0 / len))
}

fn scale_vec(mut v: Vec<f64>, s: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Orthonormal basis of the orthogonal complement of the unit vector `n`.
pub fn orthonormal_complement(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut basis: Vec<Vec<f64>> = vec![n.to_vec()];
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            e = axpy(&e, -c, b);
        }
        if let Some(e) = normalized(&e) {
            if norm(&e) > 0.5 && basis.iter().all(|b| dot(b, &e).abs() < 1e-9) {
                basis.push(e);
            }
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Angle of a planar vector in `[0, 2pi)`.
pub fn angle_of(v: &[f64]) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    let (mut area, start) = if d.is_multiple_of(2) { (2.0 * PI, 2) } else { (4.0 * PI, 3) };
    let mut k = start;
    while k < d {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

/// Normalized spherical measure of the cap `{u : <u, a> >= c}` on `S^{d-1}`.
///
/// `d = 2, 3` are closed form; higher dimensions integrate
/// `sin^{d-2}` over the polar angle with composite Simpson.
pub fn cap_fraction(d: usize, c: f64) -> f64 {
    use std::f64::consts::PI;
    let c = c.clamp(-1.0, 1.0);
    match d {
        2 => c.acos() / PI,
        3 => (1.0 - c) / 2.0,
        _ => {
            let alpha = c.acos();
            polar_integral(d, alpha) / polar_integral(d, PI)
        }
    }
}

fn polar_integral(d: usize, upper: f64) -> f64 {
    let n = 4096;
    let h = upper / n as f64;
    let f = |t: f64| t.sin().powi(d as i32 - 2);
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}
