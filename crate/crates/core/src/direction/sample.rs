use super::DirectionalDistribution;
use crate::error::{Error, Result};
use crate::geom::{uniform_sphere, UnitVector};
use rand::Rng;

/// Proposal cap for rejection samplers.
pub(crate) const MAX_PROPOSALS: u64 = 10_000_000;
/// Minimum acceptance rate tolerated once `MAX_PROPOSALS` is reached.
pub(crate) const MIN_ACCEPTANCE: f64 = 1e-6;

fn categorical<'a, T, R: Rng + ?Sized>(items: &'a [(T, f64)], total: f64, rng: &mut R) -> &'a T {
    let mut x = rng.random::<f64>() * total;
    for (item, w) in items {
        if x < *w {
            return item;
        }
        x -= w;
    }
    &items[items.len() - 1].0
}

impl DirectionalDistribution {
    /// Draws `u ~ phi`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitVector> {
        match self {
            Self::Isotropic { dim } => Ok(UnitVector::from_raw(uniform_sphere(*dim, rng))),
            Self::Atomic { atoms } => {
                let total = atoms.iter().map(|(_, w)| w).sum();
                Ok(categorical(atoms, total, rng).clone())
            }
            Self::Density { density, sup_bound } => {
                let d = density.axis.dim();
                let mut proposals = 0u64;
                loop {
                    proposals += 1;
                    let u = uniform_sphere(d, rng);
                    if rng.random::<f64>() * sup_bound < density.eval(&u) {
                        return Ok(UnitVector::from_raw(u));
                    }
                    if proposals >= MAX_PROPOSALS {
                        return Err(Error::RejectionStall { proposals, accepted: 0 });
                    }
                }
            }
            Self::CapStarved(c) => Ok(c.sample(rng)),
            Self::Mixture { components } => {
                let pairs: Vec<(&DirectionalDistribution, f64)> = components.iter().map(|(w, c)| (c, *w)).collect();
                let total = pairs.iter().map(|(_, w)| w).sum();
                categorical(&pairs, total, rng).sample(rng)
            }
        }
    }
}
