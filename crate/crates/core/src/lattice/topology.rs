use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{LatticeGeometry, LatticeKind, Region};

/// Cell-complex data of a region: sites or edges become a graph, complete
/// squares or plaquettes become faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub betti0: usize,
    pub betti1: usize,
    pub betti2: usize,
}

impl RegionTopology {
    /// Boundary components of a region embedded in a disk or an annulus.
    pub fn n_boundaries(&self) -> usize {
        self.betti0 + self.betti1 - 2 * self.betti2
    }

    pub fn is_simply_connected(&self) -> bool {
        self.betti0 == 1 && self.betti1 == 0
    }

    pub fn is_annulus(&self) -> bool {
        self.betti0 == 1 && self.betti1 == 1 && self.betti2 == 0
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

impl LatticeGeometry {
    pub fn topology(&self, region: &Region) -> RegionTopology {
        let (vertices, edge_list, faces, total_faces) = if self.is_edge_lattice() {
            let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            let mut edges = Vec::new();
            for &e in &region.sites {
                let [p, q] = self.endpoints(e).expect("edge site");
                let n = ids.len();
                let a = *ids.entry(p).or_insert(n);
                let n = ids.len();
                let b = *ids.entry(q).or_insert(n);
                edges.push((a, b));
            }
            let plaqs = self.plaquettes();
            let faces = plaqs
                .iter()
                .filter(|p| p.iter().all(|s| region.sites.contains(s)))
                .count();
            (ids.len(), edges, faces, plaqs.len())
        } else {
            let index: BTreeMap<usize, usize> =
                region.sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let edges: Vec<(usize, usize)> = self
                .bonds()
                .into_iter()
                .filter_map(|(a, b)| Some((*index.get(&a)?, *index.get(&b)?)))
                .collect();
            let squares = self.squares();
            let faces = squares
                .iter()
                .filter(|sq| sq.iter().all(|s| region.sites.contains(s)))
                .count();
            (index.len(), edges, faces, squares.len())
        };
        let mut uf = UnionFind::new(vertices);
        for &(a, b) in &edge_list {
            uf.join(a, b);
        }
        let betti0 = (0..vertices).map(|v| uf.find(v)).collect::<BTreeSet<_>>().len();
        let betti2 = usize::from(self.kind() == LatticeKind::Torus && faces == total_faces && faces > 0);
        let chi = vertices as i64 - edge_list.len() as i64 + faces as i64;
        let betti1 = (betti0 as i64 + betti2 as i64 - chi).max(0) as usize;
        RegionTopology {
            vertices,
            edges: edge_list.len(),
            faces,
            betti0,
            betti1,
            betti2,
        }
    }

    /// Number of interaction cells with sites both inside and outside.
    pub fn perimeter(&self, region: &Region) -> usize {
        self.interaction_cells()
            .iter()
            .filter(|cell| {
                let inside = cell.iter().filter(|s| region.sites.contains(s)).count();
                inside > 0 && inside < cell.len()
            })
            .count()
    }

    /// Boundary turning points counted on 2×2 site windows. Zero for edge
    /// placement and rings.
    pub fn corners(&self, region: &Region) -> usize {
        self.squares()
            .iter()
            .map(|sq| {
                let inside: Vec<bool> = sq.iter().map(|s| region.sites.contains(s)).collect();
                match inside.iter().filter(|&&b| b).count() {
                    1 | 3 => 1,
                    // Window order is (x,y), (x+1,y), (x,y+1), (x+1,y+1).
                    2 if inside[0] == inside[3] => 2,
                    _ => 0,
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sublattice;

    #[test]
    fn square_ring_is_annulus() {
        let g = LatticeGeometry::torus(6, 6).unwrap();
        let mut sites = Vec::new();
        for y in 0..3 {
            for x in 0..3 {
                if (x, y) != (1, 1) {
                    sites.push(g.site(x, y, Sublattice::Site).unwrap());
                }
            }
        }
        let ring = Region::new("ring", sites, &g).unwrap();
        let t = g.topology(&ring);
        assert!(t.is_annulus(), "{t:?}");
        assert_eq!(g.corners(&ring), 8);
        let block = Region::new("b", [0, 1, 6, 7], &g).unwrap();
        assert!(g.topology(&block).is_simply_connected());
        assert_eq!(g.perimeter(&block), 8);
        assert_eq!(g.corners(&block), 4);
    }

    #[test]
    fn toric_loop_and_whole_torus() {
        let g = LatticeGeometry::toric_torus(3, 3).unwrap();
        let e = |x, y, s| g.site(x, y, s).unwrap();
        use Sublattice::{H, V};
        let lp = Region::new(
            "X",
            [e(0, 0, H), e(1, 0, H), e(2, 0, V), e(2, 1, V), e(1, 2, H), e(0, 2, H), e(0, 1, V), e(0, 0, V)],
            &g,
        )
        .unwrap();
        let t = g.topology(&lp);
        assert!(t.is_annulus());
        assert_eq!(t.n_boundaries(), 2);
        assert_eq!(g.perimeter(&lp), 16);
        let all = Region::new("all", 0..18, &g).unwrap();
        let t = g.topology(&all);
        assert_eq!((t.betti0, t.betti1, t.betti2), (1, 2, 1));
        assert_eq!(g.perimeter(&all), 0);
    }

    #[test]
    fn ring_arcs() {
        let g = LatticeGeometry::ring(8).unwrap();
        let arc = Region::new("a", [2, 3, 4], &g).unwrap();
        assert!(g.topology(&arc).is_simply_connected());
        assert_eq!(g.perimeter(&arc), 2);
        let all = Region::new("all", 0..8, &g).unwrap();
        assert!(g.topology(&all).is_annulus());
    }
}
