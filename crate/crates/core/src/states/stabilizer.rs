//! Pauli stabilizer groups and the GF(2) rank formula for region entropies.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::qla::{CVector, PureStateVector, C64};

use super::toric::{Anyon, LoopDirection};

/// Signed Pauli string on at most 128 qubits. Qubit `q` is bit `q` of the
/// masks; `x = z = 1` denotes `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    pub x: u128,
    pub z: u128,
    pub negative: bool,
}

impl PauliString {
    pub fn x_on(qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x: mask(qubits),
            z: 0,
            negative: false,
        }
    }

    pub fn z_on(qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x: 0,
            z: mask(qubits),
            negative: false,
        }
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Applies the operator to an `n`-qubit state vector.
    pub fn apply(&self, n: usize, psi: &CVector) -> CVector {
        let to_index = |m: u128| -> usize {
            (0..n).filter(|&q| m >> q & 1 == 1).map(|q| 1usize << (n - 1 - q)).sum()
        };
        let (xi, zi) = (to_index(self.x), to_index(self.z));
        let y_count = (self.x & self.z).count_ones();
        // i^{#Y} from Y = iXZ.
        let mut phase = match y_count % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if self.negative {
            phase = -phase;
        }
        let mut out = CVector::zeros(psi.len());
        for i in 0..psi.len() {
            let sign = if (i & zi).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[i ^ xi] = psi[i] * phase * sign;
        }
        out
    }
}

fn mask(qubits: impl IntoIterator<Item = usize>) -> u128 {
    qubits.into_iter().fold(0u128, |m, q| m ^ (1u128 << q))
}

/// Independent commuting generators of a pure stabilizer state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliString>,
}

impl StabilizerGroup {
    pub fn new(n: usize, generators: Vec<PauliString>) -> Result<Self> {
        if n == 0 || n > 128 {
            return Err(Error::domain("stabilizer groups support 1..=128 qubits"));
        }
        for (i, g) in generators.iter().enumerate() {
            for h in &generators[i + 1..] {
                if !g.commutes_with(h) {
                    return Err(Error::domain("stabilizer generators do not commute"));
                }
            }
        }
        let group = Self { n, generators };
        let all: Vec<usize> = (0..n).collect();
        if group.restricted_rank(&all) != n {
            return Err(Error::domain("generators do not fix a unique state"));
        }
        Ok(group)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// GF(2) rank of the generator matrix restricted to the columns of `region`.
    pub fn restricted_rank(&self, region: &[usize]) -> usize {
        let cols: Vec<(bool, usize)> = region
            .iter()
            .flat_map(|&q| [(true, q), (false, q)])
            .collect();
        let mut rows: Vec<Vec<u64>> = self
            .generators
            .iter()
            .map(|g| {
                let mut r = vec![0u64; cols.len().div_ceil(64)];
                for (k, &(is_x, q)) in cols.iter().enumerate() {
                    let m = if is_x { g.x } else { g.z };
                    if m >> q & 1 == 1 {
                        r[k / 64] |= 1 << (k % 64);
                    }
                }
                r
            })
            .collect();
        gf2_rank(&mut rows, cols.len())
    }

    /// Entanglement entropy of `region` in nats.
    pub fn entropy(&self, region: &[usize]) -> f64 {
        if region.is_empty() {
            return 0.0;
        }
        (self.restricted_rank(region) as f64 - region.len() as f64) * LN_2
    }

    /// Largest `‖(g - 1)ψ‖` over the generators.
    pub fn max_residual(&self, psi: &PureStateVector) -> f64 {
        self.generators
            .iter()
            .map(|g| (g.apply(self.n, psi.amplitudes()) - psi.amplitudes()).norm())
            .fold(0.0, f64::max)
    }
}

fn gf2_rank(rows: &mut [Vec<u64>], ncols: usize) -> usize {
    let mut rank = 0;
    for c in 0..ncols {
        let (w, b) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] & b != 0 {
                row.iter_mut().zip(&pivot).for_each(|(a, p)| *a ^= p);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// `Z` on every qubit: the state `|0…0⟩`.
pub fn zero_state_stabilizers(n: usize) -> Result<StabilizerGroup> {
    StabilizerGroup::new(n, (0..n).map(|q| PauliString::z_on([q])).collect())
}

pub fn ghz_stabilizers(n: usize) -> Result<StabilizerGroup> {
    let mut g = vec![PauliString::x_on(0..n)];
    g.extend((0..n.saturating_sub(1)).map(|q| PauliString::z_on([q, q + 1])));
    StabilizerGroup::new(n, g)
}

/// `X_v ∏_{w ~ v} Z_w` for every site.
pub fn cluster_stabilizers(geom: &LatticeGeometry) -> Result<StabilizerGroup> {
    let adj = geom.adjacency();
    let g = (0..geom.num_sites())
        .map(|v| PauliString {
            x: 1u128 << v,
            z: mask(adj[v].iter().copied()),
            negative: false,
        })
        .collect();
    StabilizerGroup::new(geom.num_sites(), g)
}

/// Stars, plaquettes and the two loop operators fixing a flux sector.
pub fn toric_stabilizers(
    geom: &LatticeGeometry,
    anyon: Anyon,
    direction: LoopDirection,
) -> Result<StabilizerGroup> {
    let loops = super::toric::LoopOperators::new(geom, direction)?;
    let n = geom.num_sites();
    let mut gens: Vec<PauliString> = geom.stars().into_iter().map(PauliString::x_on).collect();
    gens.extend(geom.plaquettes().into_iter().map(PauliString::z_on));
    let mut wilson = PauliString::z_on(loops.wilson.iter().copied());
    if anyon.has_m() {
        wilson = wilson.negated();
    }
    gens.push(wilson);
    if let Some(dual) = &loops.dual {
        let mut t = PauliString::x_on(dual.iter().copied());
        if anyon.has_e() {
            t = t.negated();
        }
        gens.push(t);
    }
    // Stars (and plaquettes on a torus) are dependent; keep an independent set.
    let mut kept: Vec<PauliString> = Vec::new();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for g in gens {
        let mut row = vec![0u64; (2 * n).div_ceil(64)];
        for q in 0..n {
            if g.x >> q & 1 == 1 {
                row[q / 64] |= 1 << (q % 64);
            }
            if g.z >> q & 1 == 1 {
                row[(n + q) / 64] |= 1 << ((n + q) % 64);
            }
        }
        let mut trial = rows.clone();
        trial.push(row.clone());
        if gf2_rank(&mut trial, 2 * n) > rows.len() {
            rows.push(row);
            kept.push(g);
        }
    }
    StabilizerGroup::new(n, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_entropy() {
        let g = StabilizerGroup::new(
            2,
            vec![PauliString::x_on([0, 1]), PauliString::z_on([0, 1])],
        )
        .unwrap();
        assert!((g.entropy(&[0]) - LN_2).abs() < 1e-15);
        assert_eq!(g.entropy(&[0, 1]), 0.0);
    }

    #[test]
    fn rejects_anticommuting_or_incomplete() {
        assert!(StabilizerGroup::new(1, vec![PauliString::x_on([0]), PauliString::z_on([0])]).is_err());
        assert!(StabilizerGroup::new(2, vec![PauliString::z_on([0])]).is_err());
    }

    #[test]
    fn y_phase() {
        let y = PauliString { x: 1, z: 1, negative: false };
        let psi = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let out = y.apply(1, &psi);
        assert!((out[1] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
