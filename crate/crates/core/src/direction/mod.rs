//! Even directional distributions on `S^{d-1}`.
//!
//! Every variant is even by construction or by validation: atomic measures
//! must come in antipodal pairs of equal weight, densities are functions of
//! `<u, a>^2`, cap-starved measures are symmetrized explicitly.

mod cap;
mod integrate;
mod sample;

pub use cap::CapStarved;
pub use cap::log_budget;
pub use integrate::{Estimate, IntegrationConfig};
pub(crate) use sample::{MAX_PROPOSALS, MIN_ACCEPTANCE};

use crate::error::{Error, Result};
use crate::geom::{Body, UnitVector};
use crate::linalg;
use crate::tol;
use serde::{Deserialize, Serialize};

/// Even zonal density `g(u) = sum_k c_k <u, axis>^{2k}` with respect to the
/// normalized spherical measure, rescaled so that it integrates to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalDensity {
    pub axis: UnitVector,
    pub coefficients: Vec<f64>,
}

impl ZonalDensity {
    /// Normalizes `coefficients`; fails if `g` is not strictly positive.
    pub fn new(axis: UnitVector, coefficients: Vec<f64>) -> Result<Self> {
        let d = axis.dim();
        let mean: f64 = coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * even_moment(d, k))
            .sum();
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidDistribution("zonal density has nonpositive mass".into()));
        }
        let z = Self { axis, coefficients: coefficients.iter().map(|c| c / mean).collect() };
        z.check()?;
        Ok(z)
    }

    fn check(&self) -> Result<()> {
        let min = (0..=1000).map(|i| self.eval_z(i as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "zonal density must be positive everywhere (min {min})"
            )));
        }
        let mean: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * even_moment(self.axis.dim(), k))
            .sum();
        if (mean - 1.0).abs() > tol::MASS {
            return Err(Error::InvalidDistribution(format!("zonal density mass {mean} != 1")));
        }
        Ok(())
    }

    fn eval_z(&self, z: f64) -> f64 {
        let z2 = z * z;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * z2 + c)
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.eval_z(linalg::dot(u, &self.axis))
    }

    /// Max over the sphere (dense scan in `z`, padded by 1e-9 relative).
    pub fn sup(&self) -> f64 {
        let m = (0..=10_000).map(|i| self.eval_z(i as f64 / 10_000.0)).fold(0.0, f64::max);
        m * (1.0 + 1e-9)
    }
}

/// `E[<u, a>^{2k}]` under the uniform distribution on `S^{d-1}`.
fn even_moment(d: usize, k: usize) -> f64 {
    (0..k).map(|j| (2 * j + 1) as f64 / (d + 2 * j) as f64).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Literal {
    Isotropic { dim: usize },
    Atomic { atoms: Vec<(UnitVector, f64)> },
    Density { density: ZonalDensity, sup_bound: f64 },
    Capstarved(CapStarved),
    Mixture { components: Vec<(f64, DirectionalDistribution)> },
}

/// An even probability measure on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Literal", into = "Literal")]
pub enum DirectionalDistribution {
    Isotropic { dim: usize },
    Atomic { atoms: Vec<(UnitVector, f64)> },
    Density { density: ZonalDensity, sup_bound: f64 },
    CapStarved(CapStarved),
    Mixture { components: Vec<(f64, DirectionalDistribution)> },
}

impl TryFrom<Literal> for DirectionalDistribution {
    type Error = Error;
    fn try_from(lit: Literal) -> Result<Self> {
        let phi = match lit {
            Literal::Isotropic { dim } => Self::Isotropic { dim },
            Literal::Atomic { atoms } => Self::Atomic { atoms },
            Literal::Density { density, sup_bound } => Self::Density { density, sup_bound },
            Literal::Capstarved(c) => Self::CapStarved(c),
            Literal::Mixture { components } => Self::Mixture { components },
        };
        phi.validate()?;
        Ok(phi)
    }
}

impl From<DirectionalDistribution> for Literal {
    fn from(d: DirectionalDistribution) -> Self {
        match d {
            DirectionalDistribution::Isotropic { dim } => Literal::Isotropic { dim },
            DirectionalDistribution::Atomic { atoms } => Literal::Atomic { atoms },
            DirectionalDistribution::Density { density, sup_bound } => Literal::Density { density, sup_bound },
            DirectionalDistribution::CapStarved(c) => Literal::Capstarved(c),
            DirectionalDistribution::Mixture { components } => Literal::Mixture { components },
        }
    }
}

/// Support of a directional distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSupport {
    FullSphere,
    AtomSet(Vec<UnitVector>),
}

impl MeasureSupport {
    pub fn contains(&self, u: &UnitVector) -> bool {
        match self {
            MeasureSupport::FullSphere => true,
            MeasureSupport::AtomSet(atoms) => atoms.iter().any(|a| a.angle_to(u) < tol::ANGULAR),
        }
    }
}

/// Adds `(u, w)` to an atom list, merging with an existing atom at the same
/// direction.
fn push_atom(atoms: &mut Vec<(UnitVector, f64)>, u: UnitVector, w: f64) {
    if let Some(slot) = atoms.iter_mut().find(|(v, _)| v.angle_to(&u) < tol::ANGULAR) {
        slot.1 += w;
    } else {
        atoms.push((u, w));
    }
}

impl DirectionalDistribution {
    pub fn isotropic(dim: usize) -> Result<Self> {
        let phi = Self::Isotropic { dim };
        phi.validate()?;
        Ok(phi)
    }

    /// Validated atomic measure. Atoms must already be antipodally paired.
    pub fn atomic(atoms: Vec<(UnitVector, f64)>) -> Result<Self> {
        let phi = Self::Atomic { atoms };
        phi.validate()?;
        Ok(phi)
    }

    /// Atomic measure putting `w / 2` on each of `u` and `-u` for every input
    /// `(u, w)`; weights are normalized to total mass 1.
    pub fn atomic_symmetric(dirs: Vec<(UnitVector, f64)>) -> Result<Self> {
        Self::atomic(symmetrized(dirs))
    }

    /// Equal mass on `+-e_1, ..., +-e_d`: the facet normals of a cube.
    pub fn coordinate_atoms(dim: usize) -> Result<Self> {
        Self::atomic_symmetric((0..dim).map(|k| (UnitVector::axis(dim, k), 1.0)).collect())
    }

    pub fn density(density: ZonalDensity) -> Result<Self> {
        let sup_bound = density.sup();
        let phi = Self::Density { density, sup_bound };
        phi.validate()?;
        Ok(phi)
    }

    /// Validated mixture; nested mixtures are flattened and zero weights dropped.
    pub fn mixture(components: Vec<(f64, DirectionalDistribution)>) -> Result<Self> {
        let mut flat = Vec::new();
        for (w, c) in components {
            if w == 0.0 {
                continue;
            }
            match c {
                Self::Mixture { components: inner } => {
                    flat.extend(inner.into_iter().map(|(wi, ci)| (w * wi, ci)));
                }
                other => flat.push((w, other)),
            }
        }
        let phi = if flat.len() == 1 && (flat[0].0 - 1.0).abs() <= tol::MASS {
            flat.pop().unwrap().1
        } else {
            Self::Mixture { components: flat }
        };
        phi.validate()?;
        Ok(phi)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Isotropic { dim } => *dim,
            Self::Atomic { atoms } => atoms.first().map(|(u, _)| u.dim()).unwrap_or(0),
            Self::Density { density, .. } => density.axis.dim(),
            Self::CapStarved(c) => c.axis.dim(),
            Self::Mixture { components } => components.first().map(|(_, c)| c.dim()).unwrap_or(0),
        }
    }

    /// Checks total mass, evenness, and that the measure is not concentrated
    /// on a great subsphere.
    pub fn validate(&self) -> Result<()> {
        self.validate_masses()?;
        let d = self.dim();
        if self.flattened_has_continuous() {
            return Ok(());
        }
        let dirs: Vec<Vec<f64>> = self.atoms().into_iter().map(|(u, _)| u.to_vec()).collect();
        if linalg::rank(&dirs, 1e-9) < d {
            return Err(Error::InvalidDistribution(
                "atoms are concentrated on a great subsphere (do not span R^d)".into(),
            ));
        }
        Ok(())
    }

    fn validate_masses(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        match self {
            Self::Isotropic { dim } => {
                if *dim < 2 {
                    return bad(format!("dimension {dim} < 2"));
                }
            }
            Self::Atomic { atoms } => {
                if atoms.is_empty() {
                    return bad("no atoms".into());
                }
                let d = atoms[0].0.dim();
                if atoms.iter().any(|(u, _)| u.dim() != d) {
                    return bad("atoms of mixed dimension".into());
                }
                if atoms.iter().any(|(_, w)| !(*w > 0.0 && w.is_finite())) {
                    return bad("atom weights must be positive".into());
                }
                let total: f64 = atoms.iter().map(|(_, w)| w).sum();
                if (total - 1.0).abs() > tol::MASS {
                    return bad(format!("total mass {total} != 1"));
                }
                for (u, w) in atoms {
                    let m = u.neg();
                    let paired = atoms
                        .iter()
                        .any(|(v, w2)| v.angle_to(&m) < tol::ANGULAR && (w - w2).abs() <= tol::MASS);
                    if !paired {
                        return bad(format!("atom {:?} has no antipodal partner of equal weight", u.as_slice()));
                    }
                }
            }
            Self::Density { density, sup_bound } => {
                density.check()?;
                let sup = (0..=2000).map(|i| density.eval_z(i as f64 / 2000.0)).fold(0.0, f64::max);
                if !(*sup_bound >= sup && sup_bound.is_finite()) {
                    return bad(format!("sup_bound {sup_bound} below the density maximum {sup}"));
                }
            }
            Self::CapStarved(c) => c.check()?,
            Self::Mixture { components } => {
                if components.is_empty() {
                    return bad("empty mixture".into());
                }
                let d = components[0].1.dim();
                let mut total = 0.0;
                for (w, c) in components {
                    if !(*w > 0.0 && w.is_finite()) {
                        return bad("mixture weights must be positive".into());
                    }
                    if c.dim() != d {
                        return bad("mixture components of mixed dimension".into());
                    }
                    c.validate_masses()?;
                    total += w;
                }
                if (total - 1.0).abs() > tol::MASS {
                    return bad(format!("mixture weights sum to {total}"));
                }
            }
        }
        Ok(())
    }

    fn flattened_has_continuous(&self) -> bool {
        match self {
            Self::Atomic { .. } => false,
            Self::Mixture { components } => components.iter().any(|(_, c)| c.flattened_has_continuous()),
            _ => true,
        }
    }

    /// All atoms with their absolute weights (mixture weights multiplied in).
    pub fn atoms(&self) -> Vec<(UnitVector, f64)> {
        let mut out = Vec::new();
        self.collect_atoms(1.0, &mut out);
        out
    }

    fn collect_atoms(&self, scale: f64, out: &mut Vec<(UnitVector, f64)>) {
        match self {
            Self::Atomic { atoms } => {
                for (u, w) in atoms {
                    push_atom(out, u.clone(), scale * w);
                }
            }
            Self::Mixture { components } => {
                for (w, c) in components {
                    c.collect_atoms(scale * w, out);
                }
            }
            _ => {}
        }
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms().iter().map(|(_, w)| w).sum()
    }

    pub fn is_purely_atomic(&self) -> bool {
        !self.flattened_has_continuous()
    }

    /// Density of the non-atomic part with respect to the normalized
    /// spherical measure (integrates to `1 - atom_mass`).
    pub fn continuous_density(&self, u: &[f64]) -> f64 {
        match self {
            Self::Isotropic { .. } => 1.0,
            Self::Atomic { .. } => 0.0,
            Self::Density { density, .. } => density.eval(u),
            Self::CapStarved(c) => c.density(u),
            Self::Mixture { components } => components.iter().map(|(w, c)| w * c.continuous_density(u)).sum(),
        }
    }

    /// Angles where the planar density jumps (d = 2).
    pub fn breakpoints_2d(&self) -> Vec<f64> {
        match self {
            Self::CapStarved(c) if c.axis.dim() == 2 => c.breakpoints_2d(),
            Self::Mixture { components } => components.iter().flat_map(|(_, c)| c.breakpoints_2d()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn support_of(&self) -> MeasureSupport {
        if self.flattened_has_continuous() {
            MeasureSupport::FullSphere
        } else {
            MeasureSupport::AtomSet(self.atoms().into_iter().map(|(u, _)| u).collect())
        }
    }

    /// Normalized surface area measure of `K` mixed with the isotropic law:
    /// `(1 - mix) S_{d-1}(K, .) / S_{d-1}(K, S^{d-1}) + mix * sigma_hat`.
    /// Facet atoms are symmetrized so the result is even.
    pub fn from_surface_measure(body: &Body, mix: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mix) {
            return Err(Error::InvalidConfig(format!("mix weight {mix} outside [0, 1]")));
        }
        let d = body.dim();
        let s = body.surface_measure()?;
        let atom_share = s.atom_mass() / s.total_mass;
        let dens_share = s.density_mass() / s.total_mass;
        let mut parts = Vec::new();
        if atom_share > 0.0 {
            // validated as part of the mixture: the atoms alone may span a subspace
            parts.push(((1.0 - mix) * atom_share, Self::Atomic { atoms: symmetrized(s.atoms.clone()) }));
        }
        if dens_share > 0.0 || mix > 0.0 {
            parts.push(((1.0 - mix) * dens_share + mix, Self::Isotropic { dim: d }));
        }
        Self::mixture(parts)
    }

    /// Whether `supp S_{d-1}(K, .)` is contained in `supp phi`.
    pub fn supports_approximation(&self, body: &Body) -> Result<bool> {
        let s = body.surface_measure()?;
        Ok(match self.support_of() {
            MeasureSupport::FullSphere => true,
            set @ MeasureSupport::AtomSet(_) => s.density.is_none() && s.atoms.iter().all(|(u, _)| set.contains(u)),
        })
    }
}

fn symmetrized(dirs: Vec<(UnitVector, f64)>) -> Vec<(UnitVector, f64)> {
    let total: f64 = dirs.iter().map(|(_, w)| w).sum();
    let mut atoms = Vec::new();
    for (u, w) in dirs {
        let m = u.neg();
        push_atom(&mut atoms, u, 0.5 * w / total);
        push_atom(&mut atoms, m, 0.5 * w / total);
    }
    atoms
}
