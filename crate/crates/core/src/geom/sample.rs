use super::{Body, Shape};
use crate::linalg::{self, dot};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Uniform point on `S^{d-1}` (normalized Gaussian).
pub fn uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = linalg::normalized(&g) {
            return u;
        }
    }
}

/// A point `point = base + eps * normal` of `bd K(eps)`, with `base` the
/// nearest point of `K` and `normal` the outer unit normal there.
#[derive(Debug, Clone)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub base: Vec<f64>,
    pub normal: Vec<f64>,
}

/// Random point of `bd K(eps)`.
///
/// The normal `v` is uniform on the sphere with probability 1/2. Otherwise
/// (polytope part only) a random vertex is chosen, a random nonempty subset of
/// its facets, and `v` is a random positive combination of their normals, so
/// flat and lower-dimensional pieces of `bd K(eps)` are hit with positive
/// probability. The base point is a Dirichlet(1, ..., 1) combination of the
/// vertices of the support set `F(K, v)`.
pub fn parallel_boundary_sample<R: Rng + ?Sized>(body: &Body, eps: f64, rng: &mut R) -> BoundarySample {
    assert!(eps > 0.0, "parallel_boundary_sample needs eps > 0");
    let d = body.dim();
    match body.shape() {
        Shape::Ball { center, radius } => {
            let v = uniform_sphere(d, rng);
            let base = linalg::axpy(center, *radius, &v);
            BoundarySample { point: linalg::axpy(&base, eps, &v), base, normal: v }
        }
        Shape::Polytope(p) | Shape::BallSum { polytope: p, .. } => {
            let r = body.ball_radius();
            let v = if rng.random::<bool>() {
                uniform_sphere(d, rng)
            } else {
                let vi = rng.random_range(0..p.vertices().len());
                let incident = p.vertex_facets(vi);
                let mut combo = vec![0.0; d];
                while linalg::norm(&combo) == 0.0 {
                    for &f in incident {
                        if rng.random::<bool>() {
                            let w: f64 = Exp1.sample(rng);
                            combo = linalg::axpy(&combo, w, &p.facets()[f].normal);
                        }
                    }
                }
                linalg::normalized(&combo).unwrap()
            };
            let face = p.support_set(&v);
            let weights: Vec<f64> = face.iter().map(|_| Exp1.sample(rng)).collect();
            let total: f64 = weights.iter().sum();
            let mut x = vec![0.0; d];
            for (&i, w) in face.iter().zip(&weights) {
                x = linalg::axpy(&x, w / total, &p.vertices()[i]);
            }
            let base = linalg::axpy(&x, r, &v);
            let point = linalg::axpy(&base, eps, &v);
            debug_assert!(dot(&v, &v) > 0.5);
            BoundarySample { point, base, normal: v }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;

    #[test]
    fn samples_lie_on_parallel_boundary() {
        let bodies = [
            Body::cube(2, 1.0).unwrap(),
            Body::ball(vec![0.0, 0.0], 1.0).unwrap(),
            Body::stadium(0.5).unwrap(),
            Body::cube(3, 1.0).unwrap(),
            Body::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.3], vec![0.4, 1.7]]).unwrap(),
        ];
        let mut rng = RngKey::new(1, 0, 0).rng();
        for b in &bodies {
            for &eps in &[0.01, 0.1, 1.0] {
                for _ in 0..500 {
                    let s = parallel_boundary_sample(b, eps, &mut rng);
                    assert!((b.distance(&s.point) - eps).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ball_sample_norm() {
        let b = Body::ball(vec![0.0, 0.0], 1.0).unwrap();
        let mut rng = RngKey::new(2, 0, 0).rng();
        let s = parallel_boundary_sample(&b, 0.5, &mut rng);
        assert!((linalg::norm(&s.point) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn square_facet_pieces_are_covered() {
        // facet offset segment {1.1} x [-1, 1] must receive samples spread over s
        let b = Body::cube(2, 1.0).unwrap();
        let mut rng = RngKey::new(3, 0, 0).rng();
        let on_right: Vec<f64> = (0..20_000)
            .map(|_| parallel_boundary_sample(&b, 0.1, &mut rng).point)
            .filter(|p| (p[0] - 1.1).abs() < 1e-12)
            .map(|p| p[1])
            .collect();
        assert!(on_right.len() > 1000);
        let lo = on_right.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = on_right.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < -0.99 && hi > 0.99);
        let mean = on_right.iter().sum::<f64>() / on_right.len() as f64;
        assert!(mean.abs() < 0.05);
    }
}
