//! Square-lattice geometries, regions, chain partitions and the region
//! layouts used by entropy estimators.

mod construct;
mod region;
mod topology;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use construct::{
    annulus_partition, cylinder_bands, kitaev_preskill_regions, levin_wen_regions, CylinderBands,
    Rect,
};
pub use region::{ChainPartition, Region, RegionSpec, Tripartition};
pub use topology::RegionTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    /// Periodic in both directions.
    Torus,
    /// Periodic in x (circumference `Lx`), open in y (length `Ly`).
    Cylinder,
    /// Open in both directions.
    Patch,
    /// Periodic chain of `Lx` sites.
    Ring,
}

/// Sublattice of a site inside its cell. Edge placement uses `H` for the
/// bond to `(x+1, y)` and `V` for the bond to `(x, y+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sublattice {
    Site,
    H,
    V,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGeometry {
    kind: LatticeKind,
    lx: usize,
    ly: usize,
    qubits_per_cell: usize,
    index: Vec<Option<usize>>,
    coords: Vec<(usize, usize, Sublattice)>,
}

impl LatticeGeometry {
    pub fn new(kind: LatticeKind, lx: usize, ly: usize, qubits_per_cell: usize) -> Result<Self> {
        if !(qubits_per_cell == 1 || qubits_per_cell == 2) {
            return Err(Error::geometry("qubits_per_cell must be 1 or 2"));
        }
        match kind {
            LatticeKind::Ring => {
                if lx < 3 || ly != 1 {
                    return Err(Error::geometry("a ring needs Lx >= 3 and Ly = 1"));
                }
                if qubits_per_cell != 1 {
                    return Err(Error::geometry("a ring carries one site per cell"));
                }
            }
            _ => {
                if lx < 2 || ly < 2 {
                    return Err(Error::geometry("lattice extents must be at least 2"));
                }
            }
        }
        let mut geom = Self {
            kind,
            lx,
            ly,
            qubits_per_cell,
            index: vec![None; lx * ly * qubits_per_cell],
            coords: Vec::new(),
        };
        for y in 0..ly {
            for x in 0..lx {
                for sub in geom.sublattices() {
                    let exists = match sub {
                        Sublattice::Site => true,
                        Sublattice::H => geom.periodic_x() || x + 1 < lx,
                        Sublattice::V => geom.periodic_y() || y + 1 < ly,
                    };
                    if exists {
                        let slot = geom.slot(x, y, sub);
                        geom.index[slot] = Some(geom.coords.len());
                        geom.coords.push((x, y, sub));
                    }
                }
            }
        }
        Ok(geom)
    }

    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Self::new(LatticeKind::Torus, lx, ly, 1)
    }

    pub fn cylinder(lx: usize, ly: usize) -> Result<Self> {
        Self::new(LatticeKind::Cylinder, lx, ly, 1)
    }

    pub fn patch(lx: usize, ly: usize) -> Result<Self> {
        Self::new(LatticeKind::Patch, lx, ly, 1)
    }

    pub fn ring(n: usize) -> Result<Self> {
        Self::new(LatticeKind::Ring, n, 1, 1)
    }

    /// Qubits on the edges of an `Lx × Ly` torus of vertices.
    pub fn toric_torus(lx: usize, ly: usize) -> Result<Self> {
        Self::new(LatticeKind::Torus, lx, ly, 2)
    }

    /// Qubits on the edges of a cylinder with smooth boundaries.
    pub fn toric_cylinder(lx: usize, ly: usize) -> Result<Self> {
        Self::new(LatticeKind::Cylinder, lx, ly, 2)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.lx, self.ly)
    }

    pub fn qubits_per_cell(&self) -> usize {
        self.qubits_per_cell
    }

    pub fn is_edge_lattice(&self) -> bool {
        self.qubits_per_cell == 2
    }

    pub fn num_sites(&self) -> usize {
        self.coords.len()
    }

    pub fn periodic_x(&self) -> bool {
        self.kind != LatticeKind::Patch
    }

    pub fn periodic_y(&self) -> bool {
        self.kind == LatticeKind::Torus
    }

    fn sublattices(&self) -> Vec<Sublattice> {
        if self.qubits_per_cell == 1 {
            vec![Sublattice::Site]
        } else {
            vec![Sublattice::H, Sublattice::V]
        }
    }

    fn slot(&self, x: usize, y: usize, sub: Sublattice) -> usize {
        let s = match sub {
            Sublattice::Site | Sublattice::H => 0,
            Sublattice::V => 1,
        };
        (y * self.lx + x) * self.qubits_per_cell + s
    }

    /// Wraps `(x, y)` through periodic directions; `None` outside open ones.
    pub fn wrap(&self, x: i64, y: i64) -> Option<(usize, usize)> {
        let wrap1 = |v: i64, l: usize, periodic: bool| -> Option<usize> {
            if periodic {
                Some(v.rem_euclid(l as i64) as usize)
            } else if v >= 0 && (v as usize) < l {
                Some(v as usize)
            } else {
                None
            }
        };
        Some((
            wrap1(x, self.lx, self.periodic_x())?,
            wrap1(y, self.ly, self.periodic_y())?,
        ))
    }

    /// Flat index of the site in cell `(x, y)` on sublattice `sub`.
    pub fn site(&self, x: i64, y: i64, sub: Sublattice) -> Option<usize> {
        let (x, y) = self.wrap(x, y)?;
        let sub_ok = match sub {
            Sublattice::Site => self.qubits_per_cell == 1,
            _ => self.qubits_per_cell == 2,
        };
        if !sub_ok {
            return None;
        }
        self.index[self.slot(x, y, sub)]
    }

    pub fn coords(&self, site: usize) -> (usize, usize, Sublattice) {
        self.coords[site]
    }

    /// Geometric position of a site; edges sit at their midpoints.
    pub fn position(&self, site: usize) -> (f64, f64) {
        let (x, y, sub) = self.coords[site];
        let (x, y) = (x as f64, y as f64);
        match sub {
            Sublattice::Site => (x, y),
            Sublattice::H => (x + 0.5, y),
            Sublattice::V => (x, y + 0.5),
        }
    }

    /// Vertex endpoints of an edge site.
    pub fn endpoints(&self, site: usize) -> Option<[(usize, usize); 2]> {
        let (x, y, sub) = self.coords[site];
        let (x2, y2) = match sub {
            Sublattice::Site => return None,
            Sublattice::H => (x as i64 + 1, y as i64),
            Sublattice::V => (x as i64, y as i64 + 1),
        };
        let far = self.wrap(x2, y2)?;
        Some([(x, y), far])
    }

    /// Nearest-neighbour pairs of sites (site placement only).
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        if self.is_edge_lattice() {
            return Vec::new();
        }
        let mut out = std::collections::BTreeSet::new();
        for s in 0..self.num_sites() {
            let (x, y, _) = self.coords[s];
            let steps: &[(i64, i64)] = if self.kind == LatticeKind::Ring {
                &[(1, 0)]
            } else {
                &[(1, 0), (0, 1)]
            };
            for &(dx, dy) in steps {
                if let Some(t) = self.site(x as i64 + dx, y as i64 + dy, Sublattice::Site) {
                    if t != s {
                        out.insert((s.min(t), s.max(t)));
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Edges incident to each vertex (edge placement only).
    pub fn stars(&self) -> Vec<Vec<usize>> {
        if !self.is_edge_lattice() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for y in 0..self.ly as i64 {
            for x in 0..self.lx as i64 {
                let mut star: Vec<usize> = [
                    self.site(x, y, Sublattice::H),
                    self.site(x - 1, y, Sublattice::H),
                    self.site(x, y, Sublattice::V),
                    self.site(x, y - 1, Sublattice::V),
                ]
                .into_iter()
                .flatten()
                .collect();
                // Sites reached by stepping back through an open boundary do
                // not touch this vertex.
                star.retain(|&e| {
                    self.endpoints(e)
                        .map(|ep| ep.contains(&(x as usize, y as usize)))
                        .unwrap_or(false)
                });
                star.sort_unstable();
                star.dedup();
                out.push(star);
            }
        }
        out
    }

    /// Boundary edges of every complete face (edge placement only).
    pub fn plaquettes(&self) -> Vec<Vec<usize>> {
        if !self.is_edge_lattice() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for y in 0..self.ly as i64 {
            for x in 0..self.lx as i64 {
                let edges = [
                    self.site(x, y, Sublattice::H),
                    self.site(x, y + 1, Sublattice::H),
                    self.site(x, y, Sublattice::V),
                    self.site(x + 1, y, Sublattice::V),
                ];
                let face_ok = (self.periodic_x() || x + 1 < self.lx as i64)
                    && (self.periodic_y() || y + 1 < self.ly as i64);
                if face_ok && edges.iter().all(Option::is_some) {
                    let mut p: Vec<usize> = edges.into_iter().flatten().collect();
                    p.sort_unstable();
                    p.dedup();
                    out.push(p);
                }
            }
        }
        out
    }

    /// Sites of every unit square of sites (site placement, 2D only).
    pub fn squares(&self) -> Vec<[usize; 4]> {
        if self.is_edge_lattice() || self.kind == LatticeKind::Ring {
            return Vec::new();
        }
        let mut out = Vec::new();
        for y in 0..self.ly as i64 {
            for x in 0..self.lx as i64 {
                let c = [
                    self.site(x, y, Sublattice::Site),
                    self.site(x + 1, y, Sublattice::Site),
                    self.site(x, y + 1, Sublattice::Site),
                    self.site(x + 1, y + 1, Sublattice::Site),
                ];
                if let [Some(a), Some(b), Some(c2), Some(d)] = c {
                    out.push([a, b, c2, d]);
                }
            }
        }
        out
    }

    /// Local interaction cells used for perimeters: bonds for site
    /// placement, stars and plaquettes for edge placement.
    pub fn interaction_cells(&self) -> Vec<Vec<usize>> {
        if self.is_edge_lattice() {
            let mut cells = self.stars();
            cells.extend(self.plaquettes());
            cells
        } else {
            self.bonds().into_iter().map(|(a, b)| vec![a, b]).collect()
        }
    }

    /// Site adjacency lists: bonds for site placement, shared vertices for
    /// edge placement.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.num_sites();
        let mut adj = vec![Vec::new(); n];
        if self.is_edge_lattice() {
            for star in self.stars() {
                for &a in &star {
                    for &b in &star {
                        if a != b {
                            adj[a].push(b);
                        }
                    }
                }
            }
        } else {
            for (a, b) in self.bonds() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Mirror image under `y ↦ Ly - 1 - y` (open-y geometries).
    pub fn mirror_y(&self, site: usize) -> Option<usize> {
        if self.periodic_y() || self.kind == LatticeKind::Ring {
            return None;
        }
        let (x, y, sub) = self.coords[site];
        let top = self.ly as i64 - 1;
        let y2 = match sub {
            Sublattice::Site | Sublattice::H => top - y as i64,
            Sublattice::V => top - 1 - y as i64,
        };
        self.site(x as i64, y2, sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toric_torus_indexing() {
        let g = LatticeGeometry::toric_torus(3, 3).unwrap();
        assert_eq!(g.num_sites(), 18);
        assert_eq!(g.site(1, 2, Sublattice::H), Some(2 * (2 * 3 + 1)));
        assert_eq!(g.site(2, 0, Sublattice::V), Some(2 * 2 + 1));
        assert_eq!(g.stars().len(), 9);
        assert!(g.stars().iter().all(|s| s.len() == 4));
        assert_eq!(g.plaquettes().len(), 9);
    }

    #[test]
    fn smooth_cylinder_counts() {
        let g = LatticeGeometry::toric_cylinder(3, 3).unwrap();
        assert_eq!(g.num_sites(), 15);
        let stars = g.stars();
        assert_eq!(stars.iter().filter(|s| s.len() == 3).count(), 6);
        assert_eq!(g.plaquettes().len(), 6);
    }

    #[test]
    fn bonds_and_flat_indices() {
        let t = LatticeGeometry::torus(4, 4).unwrap();
        assert_eq!(t.bonds().len(), 32);
        let c = LatticeGeometry::cylinder(3, 4).unwrap();
        assert_eq!(c.bonds().len(), 3 * 4 + 3 * 3);
        let r = LatticeGeometry::ring(8).unwrap();
        assert_eq!(r.bonds().len(), 8);
        for g in [t, c, r] {
            for s in 0..g.num_sites() {
                let (x, y, sub) = g.coords(s);
                assert_eq!(g.site(x as i64, y as i64, sub), Some(s));
            }
        }
    }

    #[test]
    fn rejects_small_extents() {
        assert!(LatticeGeometry::torus(1, 3).is_err());
        assert!(LatticeGeometry::ring(2).is_err());
        assert!(LatticeGeometry::new(LatticeKind::Torus, 3, 3, 3).is_err());
    }

    #[test]
    fn mirror_maps_cylinder_rows() {
        let g = LatticeGeometry::toric_cylinder(3, 3).unwrap();
        let h0 = g.site(1, 0, Sublattice::H).unwrap();
        assert_eq!(g.mirror_y(h0), g.site(1, 2, Sublattice::H));
        let v0 = g.site(2, 0, Sublattice::V).unwrap();
        assert_eq!(g.mirror_y(v0), g.site(2, 1, Sublattice::V));
    }
}
