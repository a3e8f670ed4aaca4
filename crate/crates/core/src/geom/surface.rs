use super::{Body, Shape, UnitVector};
use crate::error::{Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Surface area measure `S_{d-1}(K, .)`: facet atoms plus an optional
/// constant density with respect to spherical Lebesgue measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeasure {
    pub dim: usize,
    pub atoms: Vec<(UnitVector, f64)>,
    pub density: Option<f64>,
    pub total_mass: f64,
}

impl SurfaceMeasure {
    /// Mass carried by the density part.
    pub fn density_mass(&self) -> f64 {
        self.density.map_or(0.0, |g| g * linalg::sphere_area(self.dim))
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Atoms pair up as `(u, w)`, `(-u, w)`.
    pub fn is_even(&self) -> bool {
        self.atoms.iter().all(|(u, w)| {
            let m = u.neg();
            self.atoms
                .iter()
                .any(|(v, w2)| v.angle_to(&m) < crate::tol::ANGULAR && (w - w2).abs() <= 1e-9 * w.abs().max(1.0))
        })
    }
}

pub(super) fn surface_measure(body: &Body) -> Result<SurfaceMeasure> {
    let d = body.dim();
    let atoms_of = |p: &super::Polytope| -> Vec<(UnitVector, f64)> {
        p.facets().iter().filter(|f| f.area > 0.0).map(|f| (f.normal.clone(), f.area)).collect()
    };
    let (atoms, density) = match body.shape() {
        Shape::Polytope(p) => (atoms_of(p), None),
        Shape::Ball { radius, .. } => (Vec::new(), Some(radius.powi(d as i32 - 1))),
        Shape::BallSum { polytope, radius } => {
            if d != 2 {
                return Err(Error::UnsupportedBody(format!(
                    "surface measure of a polytope + ball sum is only implemented for d = 2 (got d = {d})"
                )));
            }
            (atoms_of(polytope), Some(*radius))
        }
    };
    let mut m = SurfaceMeasure { dim: d, atoms, density, total_mass: 0.0 };
    m.total_mass = m.atom_mass() + m.density_mass();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_atoms() {
        let m = Body::cube(2, 1.0).unwrap().surface_measure().unwrap();
        assert_eq!(m.atoms.len(), 4);
        assert!(m.atoms.iter().all(|(_, w)| (w - 2.0).abs() < 1e-12));
        assert!((m.total_mass - 8.0).abs() < 1e-12);
        assert!(m.is_even());
        assert!(m.density.is_none());
    }

    #[test]
    fn disk_density() {
        let m = Body::ball(vec![0.0, 0.0], 1.0).unwrap().surface_measure().unwrap();
        assert_eq!(m.density, Some(1.0));
        assert!((m.total_mass - 2.0 * PI).abs() < 1e-12);
        let m3 = Body::ball(vec![0.0; 3], 2.0).unwrap().surface_measure().unwrap();
        assert!((m3.total_mass - 16.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn stadium_split() {
        // perimeter oracle: numeric arc length of the boundary curve
        let body = Body::stadium(1.0).unwrap();
        let m = body.surface_measure().unwrap();
        assert_eq!(m.atoms.len(), 2);
        assert!(m.atoms.iter().all(|(u, w)| u[0].abs() < 1e-12 && (w - 2.0).abs() < 1e-12));
        assert_eq!(m.density, Some(1.0));
        let n = 200_000;
        let pts: Vec<Vec<f64>> = (0..=n)
            .map(|i| {
                let u = UnitVector::from_angle(i as f64 * 2.0 * PI / n as f64);
                let mut x = body.support_point(&u);
                // the support point is not unique on the flat sides; take the midpoint there
                if u[1].abs() > 1.0 - 1e-15 {
                    x[0] = 0.0;
                }
                x
            })
            .collect();
        let arc: f64 = pts.windows(2).map(|w| linalg::dist(&w[0], &w[1])).sum();
        assert!((arc - m.total_mass).abs() < 1e-6, "{arc} vs {}", m.total_mass);
        assert!((m.total_mass - (4.0 + 2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn triangle_measure_is_not_even() {
        let t = Body::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = t.surface_measure().unwrap();
        assert!(!m.is_even());
        assert!((m.total_mass - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn ballsum_3d_unsupported() {
        let b = Body::ballsum(
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            0.5,
        )
        .unwrap();
        assert!(matches!(b.surface_measure(), Err(Error::UnsupportedBody(_))));
    }
}
