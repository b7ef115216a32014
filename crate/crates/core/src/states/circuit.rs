//! Layered local circuits and the states they prepare from `|0…0⟩`.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::qla::random::random_unitary;
use crate::qla::{CMatrix, CVector, PureStateVector, SubsystemLayout, C64};

/// Unitary acting on `sites` (first listed site most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub sites: Vec<usize>,
    pub unitary: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub depth: usize,
    pub radius: usize,
    pub seed: u64,
    pub layers: Vec<Vec<Gate>>,
}

impl CircuitSpec {
    pub fn new(layers: Vec<Vec<Gate>>, radius: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            depth: layers.len(),
            radius,
            seed,
            layers,
        };
        spec.check_disjoint()?;
        Ok(spec)
    }

    fn check_disjoint(&self) -> Result<()> {
        for (k, layer) in self.layers.iter().enumerate() {
            let mut used = std::collections::BTreeSet::new();
            for g in layer {
                for &s in &g.sites {
                    if !used.insert(s) {
                        return Err(Error::domain(format!("layer {k} uses site {s} twice")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Haar-random two-site gates on lattice bonds, one colour class of a
    /// proper bond colouring per layer, cycling through the classes.
    pub fn brickwork(geom: &LatticeGeometry, depth: usize, seed: u64) -> Result<Self> {
        let classes = bond_colouring(geom);
        if classes.is_empty() && depth > 0 {
            return Err(Error::domain("lattice has no bonds"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..depth)
            .map(|k| {
                classes[k % classes.len()]
                    .iter()
                    .map(|&(a, b)| Gate {
                        sites: vec![a, b],
                        unitary: random_unitary(4, &mut rng),
                    })
                    .collect()
            })
            .collect();
        Self::new(layers, 1, seed)
    }

    /// Every gate support has graph diameter at most `radius`.
    pub fn check_locality(&self, geom: &LatticeGeometry) -> Result<()> {
        let adj = geom.adjacency();
        for layer in &self.layers {
            for g in layer {
                for &a in &g.sites {
                    let dist = bfs(&adj, a);
                    for &b in &g.sites {
                        if dist[b] > self.radius {
                            return Err(Error::domain(format!(
                                "gate on {:?} exceeds radius {}",
                                g.sites, self.radius
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Light-cone growth `depth · radius` of the circuit.
    pub fn light_cone(&self) -> usize {
        self.depth * self.radius
    }
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Greedy proper edge colouring of the nearest-neighbour bonds.
pub fn bond_colouring(geom: &LatticeGeometry) -> Vec<Vec<(usize, usize)>> {
    let n = geom.num_sites();
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    for (a, b) in geom.bonds() {
        let c = (0..)
            .find(|c| !used[a].contains(c) && !used[b].contains(c))
            .expect("colour");
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push((a, b));
        used[a].push(c);
        used[b].push(c);
    }
    classes
}

/// Applies a gate in place.
pub fn apply_gate(psi: &mut CVector, layout: &SubsystemLayout, gate: &Gate) -> Result<()> {
    layout.check_sites(&gate.sites)?;
    let dk = layout.dim_of(&gate.sites);
    if gate.unitary.shape() != (dk, dk) {
        return Err(Error::domain("gate matrix does not match its support"));
    }
    let rest = layout.complement(&gate.sites);
    let ok = layout.offsets(&gate.sites);
    let or = layout.offsets(&rest);
    let mut buf = CVector::zeros(dk);
    for &b in &or {
        for (a, &o) in ok.iter().enumerate() {
            buf[a] = psi[o + b];
        }
        let out = &gate.unitary * &buf;
        for (a, &o) in ok.iter().enumerate() {
            psi[o + b] = out[a];
        }
    }
    Ok(())
}

/// `V_d … V_1 |0…0⟩`.
pub fn random_low_depth_state(layout: SubsystemLayout, spec: &CircuitSpec) -> Result<PureStateVector> {
    spec.check_disjoint()?;
    let mut psi = CVector::zeros(layout.total_dim());
    psi[0] = C64::new(1.0, 0.0);
    for layer in &spec.layers {
        for g in layer {
            apply_gate(&mut psi, &layout, g)?;
        }
    }
    PureStateVector::normalized(psi, layout)
}
