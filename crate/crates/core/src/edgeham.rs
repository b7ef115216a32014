//! Edge entanglement Hamiltonian `H_X = -Σ (ln ρ_{X_i X_{i+1}} - ln ρ_{X_i})`
//! of a block chain and its relative-entropy distance to the edge state.

use std::ops::Range;

use serde::Serialize;

use crate::entropy::region_entropy;
use crate::error::{Error, Result};
use crate::lattice::ChainPartition;
use crate::qla::{
    embed_matrix, matrix_log, relative_entropy, CMatrix, DensityOperator, HermitianOperator,
    LogFloor, QuantumState, UnnormalizedPositiveOperator,
};

/// Tolerance for the two evaluations of the edge distance.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Density operator on a boundary region with its sites laid out block by
/// block.
#[derive(Debug, Clone)]
pub struct EdgeState {
    rho: DensityOperator,
    blocks: Vec<Range<usize>>,
    periodic: bool,
}

impl EdgeState {
    pub fn new(rho: DensityOperator, block_sizes: &[usize], periodic: bool) -> Result<Self> {
        if block_sizes.iter().sum::<usize>() != rho.layout().num_sites() {
            return Err(Error::domain("block sizes do not cover the edge state"));
        }
        if block_sizes.contains(&0) {
            return Err(Error::domain("empty block"));
        }
        if block_sizes.len() < if periodic { 3 } else { 2 } {
            return Err(Error::domain("chain is too short"));
        }
        let mut start = 0;
        let blocks = block_sizes
            .iter()
            .map(|&s| {
                start += s;
                start - s..start
            })
            .collect();
        Ok(Self {
            rho,
            blocks,
            periodic,
        })
    }

    /// Reduces `state` onto the chain, block by block.
    pub fn from_state<S: QuantumState + ?Sized>(state: &S, chain: &ChainPartition) -> Result<Self> {
        let rho = state.reduce_ordered(&chain.ordered_sites())?;
        let sizes: Vec<usize> = chain.blocks.iter().map(|b| b.len()).collect();
        Self::new(rho, &sizes, chain.periodic)
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_ranges(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|r| r.len()).collect()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    /// Same state with the periodicity flag replaced.
    pub fn with_periodic(&self, periodic: bool) -> Result<Self> {
        Self::new(self.rho.clone(), &self.block_sizes(), periodic)
    }

    /// Local site indices of the listed blocks, in the listed order.
    pub fn sites_of(&self, blocks: &[usize]) -> Vec<usize> {
        blocks.iter().flat_map(|&b| self.blocks[b].clone()).collect()
    }

    pub fn marginal(&self, blocks: &[usize]) -> Result<DensityOperator> {
        self.rho.reduce_ordered(&self.sites_of(blocks))
    }

    pub fn entropy_of(&self, blocks: &[usize]) -> Result<f64> {
        region_entropy(&self.rho, &self.sites_of(blocks))
    }

    /// Conditional mutual information between block groups.
    pub fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        crate::entropy::conditional_mutual_information(
            &self.rho,
            &self.sites_of(a),
            &self.sites_of(b),
            &self.sites_of(c),
        )
    }

    pub fn mi(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        crate::entropy::mutual_information(&self.rho, &self.sites_of(a), &self.sites_of(b))
    }

    /// Nearest-neighbour block pairs `(i, i+1)`, with the wrap pair when periodic.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let m = self.num_blocks();
        let last = if self.periodic { m } else { m - 1 };
        (0..last).map(|i| (i, (i + 1) % m)).collect()
    }
}

/// Hermitian term acting on a list of chain blocks.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub support: Vec<usize>,
    pub matrix: HermitianOperator,
}

/// Sum of block-local terms on an edge chain.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    pub terms: Vec<LocalTerm>,
    pub block_sizes: Vec<usize>,
    pub periodic: bool,
    pub normalization_included: bool,
    pub log_floor: f64,
}

impl LocalHamiltonian {
    /// Dense matrix on the full edge layout.
    pub fn to_dense(&self, edge: &EdgeState) -> Result<HermitianOperator> {
        let layout = edge.rho().layout();
        let d = layout.total_dim();
        let mut total = CMatrix::zeros(d, d);
        for t in &self.terms {
            total += embed_matrix(t.matrix.matrix(), &edge.sites_of(&t.support), layout)?;
        }
        Ok(HermitianOperator::from_parts(total, layout.clone()))
    }

    pub fn term_norms(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.matrix.operator_norm()).collect()
    }

    pub fn to_json(&self) -> HamiltonianJson {
        HamiltonianJson {
            periodic: self.periodic,
            normalization_included: self.normalization_included,
            log_floor: self.log_floor,
            block_sizes: self.block_sizes.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    support: t.support.clone(),
                    norm: t.matrix.operator_norm(),
                    dim: t.matrix.dim(),
                    matrix: matrix_rows(t.matrix.matrix()),
                })
                .collect(),
        }
    }
}

/// Row-major `[re, im]` pairs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TermJson {
    pub support: Vec<usize>,
    pub norm: f64,
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianJson {
    pub periodic: bool,
    pub normalization_included: bool,
    pub log_floor: f64,
    pub block_sizes: Vec<usize>,
    pub terms: Vec<TermJson>,
}

fn kron_identity(a: &CMatrix, d: usize) -> CMatrix {
    a.kronecker(&CMatrix::identity(d, d))
}

/// Periodic chains use `h_i = -ln ρ_{X_i X_{i+1}} + ln ρ_{X_i} ⊗ I` for every
/// `i` including the wrap. Open chains use the Markov form
/// `-ln ρ_{X_1X_2} - Σ_{i≥2} (ln ρ_{X_iX_{i+1}} - ln ρ_{X_i})`.
pub fn build_edge_hamiltonian(edge: &EdgeState, floor: LogFloor) -> Result<LocalHamiltonian> {
    let terms = edge
        .bonds()
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| {
            let pair = edge.marginal(&[i, j])?;
            let mut h = -matrix_log(&pair.as_hermitian(), floor)?.matrix().clone();
            if edge.periodic() || k > 0 {
                let single = edge.marginal(&[i])?;
                let log_single = matrix_log(&single.as_hermitian(), floor)?;
                let dj = edge.rho().layout().dim_of(&edge.sites_of(&[j]));
                h += kron_identity(log_single.matrix(), dj);
            }
            let layout = pair.layout().clone();
            Ok(LocalTerm {
                support: vec![i, j],
                matrix: HermitianOperator::from_parts(crate::qla::linalg::hermitize(&h), layout),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalHamiltonian {
        terms,
        block_sizes: edge.block_sizes(),
        periodic: edge.periodic(),
        normalization_included: false,
        log_floor: floor.value(),
    })
}

/// `S(ρ_X ‖ e^{-H_X})` evaluated through matrix logarithms and through
/// conditional entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeGibbsDistance {
    pub direct: f64,
    pub conditional_sum: f64,
    pub log_floor: f64,
}

impl EdgeGibbsDistance {
    pub fn value(&self) -> f64 {
        self.direct
    }
}

/// `Σ S(X_{i+1}|X_i) - S(X)` (periodic) or its open-chain analogue.
pub fn conditional_entropy_sum(edge: &EdgeState) -> Result<f64> {
    let mut total = -edge.entropy_of(&(0..edge.num_blocks()).collect::<Vec<_>>())?;
    for (k, (i, j)) in edge.bonds().into_iter().enumerate() {
        total += edge.entropy_of(&[i, j])?;
        if edge.periodic() || k > 0 {
            total -= edge.entropy_of(&[i])?;
        }
    }
    Ok(total)
}

pub fn edge_gibbs_distance(edge: &EdgeState, floor: LogFloor) -> Result<EdgeGibbsDistance> {
    let h = build_edge_hamiltonian(edge, floor)?;
    let sigma = UnnormalizedPositiveOperator::gibbs(&h.to_dense(edge)?);
    let direct = relative_entropy(edge.rho(), &sigma)?;
    let conditional_sum = conditional_entropy_sum(edge)?;
    if (direct - conditional_sum).abs() > IDENTITY_TOL {
        return Err(Error::Identity(format!(
            "edge distance {direct} differs from conditional-entropy sum {conditional_sum}"
        )));
    }
    Ok(EdgeGibbsDistance {
        direct,
        conditional_sum,
        log_floor: floor.value(),
    })
}

/// Exact split of the edge distance into Markov-chain defects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelescopedDecomposition {
    /// `I(X_1…X_{k-1} : X_{k+1} | X_k)` for `k = 2…m-2`, then `I(X_{m-1} : X_1 | X_m)`.
    pub chain_cmis: Vec<f64>,
    /// `I(X_{m-1} : X_1)`.
    pub far_pair_mi: f64,
    /// `I(X_2…X_{m-2} : X_m | X_1 X_{m-1})`.
    pub final_cmi: f64,
    /// `Σ chain_cmis - far_pair_mi + final_cmi`.
    pub total: f64,
}

pub fn telescoped_cmi_decomposition(edge: &EdgeState) -> Result<TelescopedDecomposition> {
    let m = edge.num_blocks();
    if m < 4 || !edge.periodic() {
        return Err(Error::domain("telescoping needs a periodic chain of at least 4 blocks"));
    }
    // Zero-based: X_k is block k-1.
    let mut chain_cmis = Vec::with_capacity(m - 2);
    for k in 1..m - 2 {
        let past: Vec<usize> = (0..k).collect();
        chain_cmis.push(edge.cmi(&past, &[k], &[k + 1])?);
    }
    chain_cmis.push(edge.cmi(&[m - 2], &[m - 1], &[0])?);
    let far_pair_mi = edge.mi(&[m - 2], &[0])?;
    let middle: Vec<usize> = (1..m - 2).collect();
    let final_cmi = edge.cmi(&middle, &[0, m - 2], &[m - 1])?;
    let total = chain_cmis.iter().sum::<f64>() - far_pair_mi + final_cmi;
    Ok(TelescopedDecomposition {
        chain_cmis,
        far_pair_mi,
        final_cmi,
        total,
    })
}
