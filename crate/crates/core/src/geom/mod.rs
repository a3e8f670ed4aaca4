//! Convex bodies with closed-form support functions.
//!
//! Three shapes cover the experiments: polytopes (vertex lists), balls, and
//! polytope-plus-ball Minkowski sums. Public constructors translate the body
//! so that the vertex centroid (or the ball center) sits at the origin; the
//! rest of the crate relies on `o in int K`.

mod distance;
mod polytope;
mod sample;
mod surface;

pub use polytope::{convex_hull_2d, convex_volume, Facet, Polytope};
pub(crate) use polytope::subsets;
pub use sample::{parallel_boundary_sample, uniform_sphere, BoundarySample};
pub use surface::SurfaceMeasure;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::tol;
use serde::{Deserialize, Serialize};

/// A point of `S^{d-1}`, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidUnitVector(format!("dimension {} < 2", coords.len())));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::InvalidUnitVector(format!("norm {n} is not 1")));
        }
        Ok(Self(coords))
    }

    /// Normalizes `coords`; fails on the zero vector.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        let v = linalg::normalized(coords)
            .ok_or_else(|| Error::InvalidUnitVector("cannot normalize zero vector".into()))?;
        if v.len() < 2 {
            return Err(Error::InvalidUnitVector(format!("dimension {} < 2", v.len())));
        }
        Ok(Self(v))
    }

    /// Normalizes a vector already known to be nonzero and `d >= 2`.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        Self(coords.into_iter().map(|x| x / n).collect())
    }

    pub fn axis(d: usize, k: usize) -> Self {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        Self(v)
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    /// Angle between two unit vectors, robust near 0.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        let s = linalg::dist(&self.0, &other.0);
        2.0 * (0.5 * s).min(1.0).asin()
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Vec<f64> {
        u.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polytope(Polytope),
    Ball { center: Vec<f64>, radius: f64 },
    BallSum { polytope: Polytope, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum BodyLiteral {
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
    Ballsum { vertices: Vec<Vec<f64>>, radius: f64 },
}

/// A convex body with interior points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyLiteral", into = "BodyLiteral")]
pub struct Body {
    shape: Shape,
    dim: usize,
    diameter: f64,
    circumradius: f64,
}

impl TryFrom<BodyLiteral> for Body {
    type Error = Error;
    fn try_from(lit: BodyLiteral) -> Result<Self> {
        match lit {
            BodyLiteral::Polytope { vertices } => Body::polytope(vertices),
            BodyLiteral::Ball { center, radius } => Body::ball(center, radius),
            BodyLiteral::Ballsum { vertices, radius } => Body::ballsum(vertices, radius),
        }
    }
}

impl From<Body> for BodyLiteral {
    fn from(b: Body) -> Self {
        match b.shape {
            Shape::Polytope(p) => BodyLiteral::Polytope { vertices: p.vertices().to_vec() },
            Shape::Ball { center, radius } => BodyLiteral::Ball { center, radius },
            Shape::BallSum { polytope, radius } => BodyLiteral::Ballsum {
                vertices: polytope.vertices().to_vec(),
                radius,
            },
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidBody(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

impl Body {
    /// Convex hull of `vertices`, translated so the centroid of its extreme
    /// points is the origin.
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let p = Polytope::new(vertices)?;
        let c = linalg::centroid(p.vertices());
        Ok(Self::from_shape(Shape::Polytope(p.translated(&c)?)))
    }

    /// Ball of the given radius; the center is moved to the origin.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if center.len() < 2 {
            return Err(Error::InvalidBody(format!("dimension {} < 2", center.len())));
        }
        let d = center.len();
        Ok(Self::from_shape(Shape::Ball { center: vec![0.0; d], radius }))
    }

    /// `conv(vertices) + radius * B^d`, centered like [`Body::polytope`].
    pub fn ballsum(vertices: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let p = match Polytope::new(vertices.clone()) {
            Err(_) if vertices.first().map(|v| v.len()) == Some(2) => Polytope::planar_segment(&vertices)?,
            other => other?,
        };
        let c = linalg::centroid(p.vertices());
        Ok(Self::from_shape(Shape::BallSum { polytope: p.translated(&c)?, radius }))
    }

    /// The cube `[-a, a]^d`.
    pub fn cube(d: usize, a: f64) -> Result<Self> {
        let verts = (0..1usize << d)
            .map(|m| (0..d).map(|k| if m >> k & 1 == 1 { a } else { -a }).collect())
            .collect();
        Self::polytope(verts)
    }

    /// `[-1,1] x {0} + r B^2`.
    pub fn stadium(r: f64) -> Result<Self> {
        Self::ballsum(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], r)
    }

    fn from_shape(shape: Shape) -> Self {
        let (dim, diameter, circumradius) = match &shape {
            Shape::Polytope(p) => (p.dim(), p.diameter(), p.circumradius()),
            Shape::Ball { center, radius } => (center.len(), 2.0 * radius, norm(center) + radius),
            Shape::BallSum { polytope, radius } => (
                polytope.dim(),
                polytope.diameter() + 2.0 * radius,
                polytope.circumradius() + radius,
            ),
        };
        Self { shape, dim, diameter, circumradius }
    }

    /// Rigid translation without re-centering; may move the origin outside.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        let neg: Vec<f64> = offset.iter().map(|x| -x).collect();
        let shape = match &self.shape {
            Shape::Polytope(p) => Shape::Polytope(p.translated(&neg)?),
            Shape::Ball { center, radius } => Shape::Ball { center: linalg::add(center, offset), radius: *radius },
            Shape::BallSum { polytope, radius } => Shape::BallSum {
                polytope: polytope.translated(&neg)?,
                radius: *radius,
            },
        };
        Ok(Self::from_shape(shape))
    }

    /// Outer parallel body `K + rho B^d` (no re-centering).
    pub fn parallel(&self, rho: f64) -> Body {
        assert!(rho >= 0.0);
        if rho == 0.0 {
            return self.clone();
        }
        let shape = match &self.shape {
            Shape::Polytope(p) => Shape::BallSum { polytope: p.clone(), radius: rho },
            Shape::Ball { center, radius } => Shape::Ball { center: center.clone(), radius: radius + rho },
            Shape::BallSum { polytope, radius } => Shape::BallSum { polytope: polytope.clone(), radius: radius + rho },
        };
        Self::from_shape(shape)
    }

    /// `Some(rho)` when `self == inner + rho B^d` structurally.
    pub fn parallel_offset_from(&self, inner: &Body) -> Option<f64> {
        match (&self.shape, &inner.shape) {
            (Shape::Ball { center: c1, radius: r1 }, Shape::Ball { center: c0, radius: r0 }) if c1 == c0 => {
                Some(r1 - r0)
            }
            (Shape::BallSum { polytope: p1, radius }, Shape::Polytope(p0)) if p1 == p0 => Some(*radius),
            (Shape::BallSum { polytope: p1, radius: r1 }, Shape::BallSum { polytope: p0, radius: r0 }) if p1 == p0 => {
                Some(r1 - r0)
            }
            _ => None,
        }
        .filter(|r| *r >= 0.0)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `max_u h(K, u)`.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// `min_u h(K, u)`: distance from the origin to the boundary when the
    /// origin is interior, negative or zero otherwise.
    pub fn inradius_about_origin(&self) -> f64 {
        match &self.shape {
            Shape::Polytope(p) => p.min_offset(),
            Shape::Ball { center, radius } => radius - norm(center),
            Shape::BallSum { polytope, radius } => polytope.min_offset() + radius,
        }
    }

    pub fn polytope_part(&self) -> Option<&Polytope> {
        match &self.shape {
            Shape::Polytope(p) | Shape::BallSum { polytope: p, .. } => Some(p),
            Shape::Ball { .. } => None,
        }
    }

    /// Radius of the ball summand (0 for polytopes).
    pub fn ball_radius(&self) -> f64 {
        match &self.shape {
            Shape::Polytope(_) => 0.0,
            Shape::Ball { radius, .. } | Shape::BallSum { radius, .. } => *radius,
        }
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self.shape, Shape::Polytope(_))
    }

    /// Support function `h(K, u)` on unit directions.
    pub fn support(&self, u: &UnitVector) -> f64 {
        self.support_at(u)
    }

    /// [`Body::support`] on a raw slice assumed to have unit norm.
    #[inline]
    pub fn support_at(&self, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Polytope(p) => p.support(u),
            Shape::Ball { center, radius } => dot(center, u) + radius,
            Shape::BallSum { polytope, radius } => polytope.support(u) + radius,
        }
    }

    /// `h(conv(K ∪ {y}), u) = max(h(K, u), <y, u>)`.
    pub fn extension_support(&self, y: &[f64], u: &UnitVector) -> f64 {
        self.support_at(u).max(dot(y, u))
    }

    /// One maximizer of `<x, u>` over `K`.
    pub fn support_point(&self, u: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Polytope(p) => p.vertices()[p.argmax(u)].clone(),
            Shape::Ball { center, radius } => linalg::axpy(center, *radius, u),
            Shape::BallSum { polytope, radius } => linalg::axpy(&polytope.vertices()[polytope.argmax(u)], *radius, u),
        }
    }

    /// Euclidean distance from `x` to `K`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest_point(x).1
    }

    /// Metric projection of `x` onto `K` and its distance.
    pub fn nearest_point(&self, x: &[f64]) -> (Vec<f64>, f64) {
        match &self.shape {
            Shape::Polytope(p) => distance::polytope_nearest(p, x),
            Shape::Ball { center, radius } => distance::inflate(center.clone(), linalg::dist(center, x), *radius, x),
            Shape::BallSum { polytope, radius } => {
                let (p, d) = distance::polytope_nearest(polytope, x);
                distance::inflate(p, d, *radius, x)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) <= tol::FEASIBILITY
    }

    /// Angles in `[0, 2pi)` where `h(K, .)` is not smooth (d = 2 only).
    pub fn kink_angles(&self) -> Vec<f64> {
        if self.dim != 2 {
            return Vec::new();
        }
        match self.polytope_part() {
            Some(p) => p.facets().iter().map(|f| linalg::angle_of(&f.normal)).collect(),
            None => Vec::new(),
        }
    }

    /// Surface area measure `S_{d-1}(K, .)`.
    pub fn surface_measure(&self) -> Result<SurfaceMeasure> {
        surface::surface_measure(self)
    }

    /// `delta(K, conv(vertices))` for a polytope known to contain `K`.
    ///
    /// `certificate` lists the polytope's halfspaces `<x, u> <= t`; each must
    /// satisfy `h(K, u) <= t` within the feasibility tolerance.
    pub fn hausdorff_containing<'a, I>(&self, vertices: &[Vec<f64>], certificate: I) -> Result<f64>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        for (index, (u, t)) in certificate.into_iter().enumerate() {
            let excess = self.support_at(u) - t;
            if excess > tol::FEASIBILITY * (1.0 + t.abs()) {
                return Err(Error::ContainmentViolated { index, excess });
            }
        }
        Ok(self.hausdorff_unchecked(vertices))
    }

    /// Max vertex distance, without the containment check.
    pub fn hausdorff_unchecked(&self, vertices: &[Vec<f64>]) -> f64 {
        vertices.iter().map(|v| self.distance(v)).fold(0.0, f64::max)
    }
}
