#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoedge::edgeham::EdgeState;
use topoedge::lattice::{annulus_partition, LatticeGeometry, Rect};
use topoedge::qla::random::random_density;
use topoedge::qla::{DensityOperator, PureStateVector, SubsystemLayout};
use topoedge::states::{toric_code_state, Anyon, FluxSpec, LoopDirection};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn toric_torus_state() -> (LatticeGeometry, PureStateVector) {
    let g = LatticeGeometry::toric_torus(3, 3).unwrap();
    let psi = toric_code_state(&g, &FluxSpec::Definite(Anyon::One), LoopDirection::X).unwrap();
    (g, psi)
}

/// Annulus chain of `m` blocks around the centre plaquette of the 3×3 torus.
pub fn toric_edge(m: usize) -> EdgeState {
    let (g, psi) = toric_torus_state();
    let chain = annulus_partition(&g, Rect::centre(&g), 1, m).unwrap();
    EdgeState::from_state(&psi, &chain).unwrap()
}

/// Random full-rank state of `n` qubits.
pub fn full_rank(n: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    random_density(SubsystemLayout::qubits(n), 1 << n, r).unwrap()
}

/// Diagonal state of a binary Markov chain `X_1 → X_2 → … → X_n`.
pub fn classical_markov_chain(n: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    let p0: f64 = r.random_range(0.2..0.8);
    let trans: Vec<[f64; 2]> = (0..n).map(|_| [r.random_range(0.1..0.9), r.random_range(0.1..0.9)]).collect();
    let probs: Vec<f64> = (0..1usize << n)
        .map(|x| {
            let bit = |k: usize| (x >> (n - 1 - k)) & 1;
            let mut p = if bit(0) == 0 { p0 } else { 1.0 - p0 };
            for k in 1..n {
                let stay = trans[k][bit(k - 1)];
                p *= if bit(k) == 0 { stay } else { 1.0 - stay };
            }
            p
        })
        .collect();
    DensityOperator::diagonal(&probs, SubsystemLayout::qubits(n)).unwrap()
}

/// `ρ_{A B_L} ⊗ ρ_{B_R C}` on qubits ordered `A, B_L, B_R, C`: a quantum
/// Markov chain for `A - B_L B_R - C`.
pub fn quantum_markov_state(r: &mut ChaCha8Rng) -> DensityOperator {
    full_rank(2, r).tensor(&full_rank(2, r)).unwrap()
}
