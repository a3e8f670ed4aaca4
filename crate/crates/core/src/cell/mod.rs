//! The K-cell `Z_K`: intersection of the halfspaces bounded by process
//! hyperplanes that miss `K` and containing `K`.
//!
//! Only hyperplanes hitting the window `K(rho)` are sampled. If the
//! resulting cell lies strictly inside `int K(rho)`, no hyperplane missing
//! `K(rho)` can cut it, so the cell is exactly `Z_K`. Otherwise the window
//! grows and only the new annulus is sampled.

pub mod intersect;

pub use intersect::{halfspace_intersection, Halfspace, Kernel, Vertex};

use crate::error::{Error, Result};
use crate::geom::{Body, UnitVector};
use crate::process::{Arrival, Hyperplane, ProcessParams};
use crate::tol;
use intersect::{box_halfspaces, same_vertex_sets, Clipper, BOX_ID_BASE};
use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowPolicy {
    /// `None` means `diameter(K) / 2`.
    pub initial_radius: Option<f64>,
    pub growth_factor: f64,
    pub max_rounds: usize,
    /// Cross-check every cell against an independent kernel.
    pub oracle_check: bool,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self { initial_radius: None, growth_factor: 2.0, max_rounds: 40, oracle_check: false }
    }
}

impl WindowPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth_factor > 1.0 && self.growth_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!("growth factor {} must exceed 1", self.growth_factor)));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if let Some(r) = self.initial_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!("initial radius {r} must be positive")));
            }
        }
        Ok(())
    }

    fn start(&self, body: &Body) -> f64 {
        self.initial_radius.unwrap_or(0.5 * body.diameter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVertex {
    pub point: Vec<f64>,
    /// Indices into the cell's `halfspaces`.
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellStats {
    /// Hyperplanes of this intensity level hitting the window.
    pub sampled: usize,
    pub active: usize,
    /// Window growth rounds (1 = initial window sufficed).
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPolytope {
    pub halfspaces: Vec<Hyperplane>,
    pub vertices: Vec<CellVertex>,
    pub window_radius: f64,
    pub stats: CellStats,
}

impl CellPolytope {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }

    /// Whether every vertex lies strictly inside `int K(window_radius)`.
    pub fn inside_window(&self, body: &Body) -> bool {
        self.vertices.iter().all(|v| body.distance(&v.point) < self.window_radius - tol::FEASIBILITY)
    }

    /// `x` satisfies every halfspace within the feasibility tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol::FEASIBILITY * (1.0 + h.t))
    }
}

/// One coupled sample of the space-time process restricted to a growing
/// window around `K`, from which cells at every grid intensity are read off.
#[derive(Debug, Clone)]
pub struct CoupledCells<'a> {
    params: &'a ProcessParams,
    body: &'a Body,
    grid: Vec<f64>,
    /// Sorted by arrival.
    arrivals: Vec<Arrival>,
    /// `t - h(K, u)` per arrival.
    slack: Vec<f64>,
    rho: f64,
    rounds: usize,
    oracle_check: bool,
}

impl<'a> CoupledCells<'a> {
    /// Samples the initial window `K(rho)` for intensities
    /// `params.gamma * grid[k]`.
    pub fn new<R: Rng + ?Sized>(
        params: &'a ProcessParams,
        body: &'a Body,
        grid: &[f64],
        rho: f64,
        oracle_check: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|g| !(*g > 0.0)) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("intensity grid must be positive and strictly increasing".into()));
        }
        if body.dim() != params.dim {
            return Err(Error::InvalidConfig(format!("body dimension {} != process dimension {}", body.dim(), params.dim)));
        }
        let mut c = Self {
            params,
            body,
            grid: grid.to_vec(),
            arrivals: Vec::new(),
            slack: Vec::new(),
            rho: 0.0,
            rounds: 0,
            oracle_check,
        };
        c.extend_to(rho, rng)?;
        Ok(c)
    }

    fn extend_to<R: Rng + ?Sized>(&mut self, rho: f64, rng: &mut R) -> Result<()> {
        let inner = self.body.parallel(self.rho);
        let outer = self.body.parallel(rho);
        let top = *self.grid.last().unwrap();
        let fresh = self.params.sample_annulus_arrivals(&inner, &outer, top, rng)?;
        self.arrivals.extend(fresh);
        self.arrivals.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        self.slack = self.arrivals.iter().map(|a| a.plane.t - self.body.support(&a.plane.u)).collect();
        self.rho = rho;
        self.rounds += 1;
        Ok(())
    }

    /// Multiplies the window radius by `factor`, sampling the new annulus.
    pub fn grow<R: Rng + ?Sized>(&mut self, factor: f64, rng: &mut R) -> Result<()> {
        self.extend_to(self.rho * factor, rng)
    }

    pub fn radius(&self) -> f64 {
        self.rho
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    /// Number of arrivals at level `k`.
    fn level_end(&self, k: usize) -> usize {
        let g = self.grid[k];
        self.arrivals.partition_point(|a| a.arrival <= g)
    }

    fn box_radius(&self) -> f64 {
        self.body.circumradius() + self.rho
    }

    /// Cells at the first `levels` grid intensities (window not checked).
    pub fn cells_up_to(&self, levels: usize) -> Result<Vec<CellPolytope>> {
        let d = self.body.dim();
        let r = self.box_radius();
        let boxes = box_halfspaces(d, r);
        let mut out = Vec::with_capacity(levels);
        let mut start = 0;
        let mut clipper = (d != 2).then(|| Clipper::new_box(d, r));
        // planar kernel state: ids of active constraints (BOX_ID_BASE + k for box)
        let mut carried: Vec<usize> = (0..2 * d).map(|k| BOX_ID_BASE + k).collect();
        for k in 0..levels {
            let end = self.level_end(k);
            let mut order: Vec<usize> = (start..end).collect();
            order.sort_by(|&i, &j| self.slack[i].total_cmp(&self.slack[j]));
            let plane_of = |id: usize| -> Halfspace {
                if id >= BOX_ID_BASE {
                    boxes[id - BOX_ID_BASE].clone()
                } else {
                    let p = &self.arrivals[id].plane;
                    Halfspace::new(p.u.to_vec(), p.t)
                }
            };
            let verts: Vec<Vertex> = match clipper.as_mut() {
                Some(c) => {
                    for &i in &order {
                        c.clip(&plane_of(i), i);
                    }
                    c.compact();
                    c.vertices()
                }
                None => {
                    let ids: Vec<usize> = carried.iter().copied().chain(order.iter().copied()).collect();
                    let hs: Vec<Halfspace> = ids.iter().map(|&i| plane_of(i)).collect();
                    let local = intersect::planar(&hs)?;
                    let mapped: Vec<Vertex> = local
                        .into_iter()
                        .map(|v| {
                            let mut basis: Vec<usize> = v.basis.iter().map(|&b| ids[b]).collect();
                            basis.sort_unstable();
                            Vertex { point: v.point, basis }
                        })
                        .collect();
                    carried = mapped.iter().flat_map(|v| v.basis.iter().copied()).collect();
                    carried.sort_unstable();
                    carried.dedup();
                    mapped
                }
            };
            if self.oracle_check {
                self.cross_check(end, &boxes, &verts)?;
            }
            out.push(self.assemble(verts, end, &boxes));
            start = end;
        }
        Ok(out)
    }

    fn cross_check(&self, end: usize, boxes: &[Halfspace], verts: &[Vertex]) -> Result<()> {
        let d = self.body.dim();
        let mut all: Vec<Halfspace> = self.arrivals[..end].iter().map(|a| Halfspace::new(a.plane.u.to_vec(), a.plane.t)).collect();
        let n = all.len();
        let limit = if d == 2 { 300 } else { 60 };
        let reference = if n <= limit {
            all.extend(boxes.iter().cloned());
            intersect::enumerate(&all, d, tol::FEASIBILITY)
        } else if d == 2 {
            intersect::intersect_with(Kernel::Clipping, &all, d, Some(self.box_radius()), tol::FEASIBILITY)?
        } else {
            return Ok(());
        };
        if !same_vertex_sets(verts, &reference, 1e-7) {
            return Err(Error::OracleMismatch(format!(
                "{} vertices from the fast kernel vs {} from the reference over {n} constraints",
                verts.len(),
                reference.len()
            )));
        }
        Ok(())
    }

    fn assemble(&self, verts: Vec<Vertex>, sampled: usize, boxes: &[Halfspace]) -> CellPolytope {
        let mut ids: Vec<usize> = verts.iter().flat_map(|v| v.basis.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        let halfspaces: Vec<Hyperplane> = ids
            .iter()
            .map(|&id| {
                if id >= BOX_ID_BASE {
                    let b = &boxes[id - BOX_ID_BASE];
                    Hyperplane { u: UnitVector::new(b.a.clone()).expect("axis"), t: b.b }
                } else {
                    self.arrivals[id].plane.clone()
                }
            })
            .collect();
        let vertices = verts
            .into_iter()
            .map(|v| CellVertex {
                basis: v.basis.iter().map(|b| ids.binary_search(b).unwrap()).collect(),
                point: v.point,
            })
            .collect();
        CellPolytope {
            stats: CellStats { sampled, active: halfspaces.len(), rounds: self.rounds },
            halfspaces,
            vertices,
            window_radius: self.rho,
        }
    }

    /// Grows the window until the lowest-intensity cell (which contains all
    /// others) lies strictly inside it, then returns every level's cell.
    pub fn certify<R: Rng + ?Sized>(&mut self, policy: &WindowPolicy, rng: &mut R) -> Result<Vec<CellPolytope>> {
        loop {
            let first = self.cells_up_to(1)?.pop().unwrap();
            if first.inside_window(self.body) {
                return self.cells_up_to(self.grid.len());
            }
            if self.rounds >= policy.max_rounds {
                return Err(Error::WindowOverflow { rounds: self.rounds, radius: self.rho });
            }
            debug!("window {} too small after round {}, growing", self.rho, self.rounds);
            self.grow(policy.growth_factor, rng)?;
        }
    }
}

/// Nested cells `Z^{(g_1)} ⊇ Z^{(g_2)} ⊇ ...` at intensities
/// `params.gamma * grid[k]`, all certified by one window.
pub fn cells_along_intensity<R: Rng + ?Sized>(
    params: &ProcessParams,
    body: &Body,
    grid: &[f64],
    policy: &WindowPolicy,
    rng: &mut R,
) -> Result<Vec<CellPolytope>> {
    policy.validate()?;
    let mut c = CoupledCells::new(params, body, grid, policy.start(body), policy.oracle_check, rng)?;
    c.certify(policy, rng)
}

/// The K-cell at intensity `params.gamma`.
pub fn k_cell<R: Rng + ?Sized>(params: &ProcessParams, body: &Body, policy: &WindowPolicy, rng: &mut R) -> Result<CellPolytope> {
    Ok(cells_along_intensity(params, body, &[1.0], policy, rng)?.pop().unwrap())
}
