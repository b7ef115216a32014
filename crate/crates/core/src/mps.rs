//! Translation-invariant matrix product states: transfer operators,
//! convergence of reduced states with chain length, and replica transfer
//! operators for Rényi entropies.

use nalgebra::linalg::Schur;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::linalg::{eigvalsh, hermitize, kron};
use crate::qla::random::ginibre;
use crate::qla::{
    trace_norm_distance, CMatrix, CVector, DensityOperator, PureStateVector, SubsystemLayout, C64,
    MAX_DENSITY_DIM, MAX_VECTOR_DIM,
};

/// `|λ_max| - |λ₂|` below this counts as a degenerate leading eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `|ψ_N⟩ = Σ Lᵀ A^{i_1} ⋯ A^{i_N} R |i_1 … i_N⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState {
    tensors: Vec<CMatrix>,
    left: CVector,
    right: CVector,
    length: usize,
}

impl MatrixProductState {
    /// Boundary vectors are rescaled to unit norm.
    pub fn new(tensors: Vec<CMatrix>, left: CVector, right: CVector, length: usize) -> Result<Self> {
        let d = tensors.first().ok_or_else(|| Error::domain("need at least one tensor"))?.nrows();
        if d == 0 || tensors.iter().any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(Error::domain("tensors must be square with a common bond dimension"));
        }
        if left.len() != d || right.len() != d {
            return Err(Error::domain("boundary vectors must match the bond dimension"));
        }
        if tensors.iter().flat_map(|a| a.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("tensor entries must be finite"));
        }
        let (nl, nr) = (left.norm(), right.norm());
        if nl == 0.0 || nr == 0.0 || length == 0 {
            return Err(Error::domain("boundary vectors must be nonzero and the chain nonempty"));
        }
        Ok(Self { tensors, left: left / C64::from(nl), right: right / C64::from(nr), length })
    }

    /// Bond dimension 1 product of `local`.
    pub fn product(local: &CVector, length: usize) -> Result<Self> {
        let tensors = local.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect();
        let one = CVector::from_element(1, C64::new(1.0, 0.0));
        Self::new(tensors, one.clone(), one, length)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` with `A^i = |i⟩⟨i|`.
    pub fn ghz(length: usize) -> Result<Self> {
        let e = |i: usize| {
            let mut m = CMatrix::zeros(2, 2);
            m[(i, i)] = C64::new(1.0, 0.0);
            m
        };
        let b = CVector::from_element(2, C64::new(1.0, 0.0));
        Self::new(vec![e(0), e(1)], b.clone(), b, length)
    }

    /// Gaussian tensors and boundary vectors.
    pub fn random<R: Rng + ?Sized>(bond: usize, phys: usize, length: usize, rng: &mut R) -> Result<Self> {
        let scale = C64::from(1.0 / ((bond * phys) as f64).sqrt());
        let tensors = (0..phys).map(|_| ginibre(bond, bond, rng) * scale).collect();
        let l = ginibre(bond, 1, rng).column(0).into_owned();
        let r = ginibre(bond, 1, rng).column(0).into_owned();
        Self::new(tensors, l, r, length)
    }

    pub fn bond_dim(&self) -> usize {
        self.left.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.tensors.len()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn tensors(&self) -> &[CMatrix] {
        &self.tensors
    }

    pub fn left(&self) -> &CVector {
        &self.left
    }

    pub fn right(&self) -> &CVector {
        &self.right
    }

    pub fn with_length(&self, length: usize) -> Result<Self> {
        Self::new(self.tensors.clone(), self.left.clone(), self.right.clone(), length)
    }

    /// `A^i ↦ X A^i X⁻¹`, `Lᵀ ↦ Lᵀ X⁻¹`, `R ↦ X R`.
    pub fn gauge(&self, x: &CMatrix) -> Result<Self> {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::domain("gauge matrix is not invertible"))?;
        let tensors = self.tensors.iter().map(|a| x * a * &inv).collect();
        let left = inv.transpose() * &self.left;
        Self::new(tensors, left, x * &self.right, self.length)
    }

    /// `T = Σ_i A^i ⊗ Ā^i`.
    pub fn transfer(&self) -> Result<TransferOperator> {
        TransferOperator::new(transfer_matrix(&self.tensors))
    }

    /// Copy with tensors rescaled so that the transfer operator has spectral
    /// radius 1.
    pub fn normalized(&self) -> Result<Self> {
        let r = self.transfer()?.spectral_radius();
        if r <= 0.0 {
            return Err(Error::Analysis("transfer operator is nilpotent".into()));
        }
        let s = C64::from(r.sqrt().recip());
        Self::new(self.tensors.iter().map(|a| a * s).collect(), self.left.clone(), self.right.clone(), self.length)
    }

    /// Two-leg tensors `B^{ij} = A^i ⊗ Ā^j` of the density operator.
    pub fn density_tensors(&self) -> Vec<Vec<CMatrix>> {
        self.tensors
            .iter()
            .map(|a| self.tensors.iter().map(|b| kron(a, &b.map(|z| z.conj()))).collect())
            .collect()
    }

    fn boundary(&self) -> (CVector, CVector) {
        let conj = |v: &CVector| v.map(|z| z.conj());
        (kron_vec(&self.left, &conj(&self.left)), kron_vec(&self.right, &conj(&self.right)))
    }

    /// `Lᵀ A^{i_1} ⋯ A^{i_k}` for every string, as rows.
    fn prefix_rows(&self, k: usize) -> CMatrix {
        let (d, p) = (self.bond_dim(), self.phys_dim());
        let mut rows = CMatrix::from_fn(1, self.bond_dim(), |_, j| self.left[j]);
        for _ in 0..k {
            let mut next = CMatrix::zeros(rows.nrows() * p, d);
            for r in 0..rows.nrows() {
                for (i, a) in self.tensors.iter().enumerate() {
                    let v = rows.row(r) * a;
                    next.row_mut(r * p + i).copy_from(&v);
                }
            }
            rows = next;
        }
        rows
    }

    /// Exact contraction, normalized.
    pub fn to_dense(&self) -> Result<PureStateVector> {
        let dim = (self.phys_dim() as f64).powi(self.length as i32);
        if dim > MAX_VECTOR_DIM as f64 {
            return Err(Error::Resource { what: "MPS contraction".into(), requested: dim as usize, limit: MAX_VECTOR_DIM });
        }
        let amps = self.prefix_rows(self.length) * &self.right;
        let layout = SubsystemLayout::new(vec![self.phys_dim(); self.length])?;
        PureStateVector::normalized(amps.column(0).into_owned(), layout)
    }

    fn check_dense(&self, sites: usize) -> Result<()> {
        let dim = (self.phys_dim() as f64).powi(sites as i32);
        if dim > MAX_DENSITY_DIM as f64 {
            return Err(Error::Resource { what: "reduced MPS state".into(), requested: dim as usize, limit: MAX_DENSITY_DIM });
        }
        Ok(())
    }

    /// Reduced state of the first `m` sites of the length-`n` chain,
    /// `Lᵀ⊗L̄ᵀ (Π A⊗Ā) T^{n-m} R⊗R̄`, normalized.
    pub fn reduced_first_m(&self, n: usize, m: usize) -> Result<DensityOperator> {
        if m == 0 || m > n {
            return Err(Error::domain(format!("need 1 ≤ m ≤ N, got m = {m}, N = {n}")));
        }
        self.check_dense(m)?;
        let t = transfer_matrix(&self.tensors);
        let scale = TransferOperator::new(t.clone())?.spectral_radius();
        if scale <= 0.0 {
            return Err(Error::Analysis("transfer operator is nilpotent".into()));
        }
        let (_, mut w) = self.boundary();
        let ts = &t / C64::from(scale);
        for _ in 0..n - m {
            w = &ts * w;
            let nrm = w.norm();
            if nrm > 0.0 {
                w /= C64::from(nrm);
            }
        }
        let d = self.bond_dim();
        let wm = CMatrix::from_fn(d, d, |a, b| w[a * d + b]);
        let u = self.prefix_rows(m);
        let rho = &u * wm * u.adjoint();
        let tr = rho.trace();
        if tr.norm() == 0.0 {
            return Err(Error::Analysis("state has zero norm".into()));
        }
        let layout = SubsystemLayout::new(vec![self.phys_dim(); m])?;
        DensityOperator::new(hermitize(&(rho / tr)), layout)
    }

    /// `tr ρ_S^α` for the segment of `l` sites starting at `start`,
    /// contracted with the replica transfer operator.
    pub fn segment_renyi_trace(&self, start: usize, l: usize, alpha: usize) -> Result<f64> {
        if l == 0 || start + l > self.length {
            return Err(Error::domain("segment outside the chain"));
        }
        let norm = self.normalized()?;
        let t = transfer_matrix(&norm.tensors);
        let (mut lv, mut rv) = norm.boundary();
        let tt = t.transpose();
        for _ in 0..start {
            lv = &tt * lv;
        }
        for _ in 0..self.length - start - l {
            rv = &t * rv;
        }
        let z = (lv.transpose() * power_apply(&t, &rv, l))[(0, 0)];
        let ta = replica_transfer(&norm.density_tensors(), alpha)?;
        let (mut la, mut ra) = (lv.clone(), rv.clone());
        for _ in 1..alpha {
            la = kron_vec(&la, &lv);
            ra = kron_vec(&ra, &rv);
        }
        let num = (la.transpose() * power_apply(ta.matrix(), &ra, l))[(0, 0)];
        Ok((num / z.powi(alpha as i32)).re)
    }

    pub fn segment_renyi_entropy(&self, start: usize, l: usize, alpha: usize) -> Result<f64> {
        if alpha < 2 {
            return Err(Error::domain("Rényi order must be at least 2"));
        }
        Ok(self.segment_renyi_trace(start, l, alpha)?.ln() / (1.0 - alpha as f64))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: MpsJson = serde_json::from_str(s).map_err(|e| Error::domain(format!("MPS JSON: {e}")))?;
        j.into_mps()
    }

    pub fn to_json(&self) -> MpsJson {
        MpsJson {
            tensors: self.tensors.iter().map(rows_of).collect(),
            left: self.left.iter().map(|z| [z.re, z.im]).collect(),
            right: self.right.iter().map(|z| [z.re, z.im]).collect(),
            length: self.length,
            corner: None,
        }
    }
}

fn rows_of(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn matrix_of(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != c) {
        return Err(Error::domain("ragged or empty matrix"));
    }
    Ok(CMatrix::from_fn(n, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// Nested row-major arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsJson {
    /// One `D × D` matrix per physical label.
    pub tensors: Vec<Vec<Vec<[f64; 2]>>>,
    pub left: Vec<[f64; 2]>,
    pub right: Vec<[f64; 2]>,
    pub length: usize,
    /// Corner tensors `C^{ij}`, flattened over the physical pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl MpsJson {
    pub fn into_mps(&self) -> Result<MatrixProductState> {
        let tensors = self.tensors.iter().map(|t| matrix_of(t)).collect::<Result<_>>()?;
        let vec = |v: &[[f64; 2]]| CVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1])));
        MatrixProductState::new(tensors, vec(&self.left), vec(&self.right), self.length)
    }

    pub fn corner_tensors(&self) -> Result<Option<Vec<CMatrix>>> {
        self.corner.as_ref().map(|c| c.iter().map(|t| matrix_of(t)).collect()).transpose()
    }
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    CVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}

fn power_apply(t: &CMatrix, v: &CVector, k: usize) -> CVector {
    let mut w = v.clone();
    for _ in 0..k {
        w = t * w;
    }
    w
}

fn transfer_matrix(tensors: &[CMatrix]) -> CMatrix {
    let d = tensors[0].nrows();
    let mut t = CMatrix::zeros(d * d, d * d);
    for a in tensors {
        t += kron(a, &a.map(|z| z.conj()));
    }
    t
}

/// A transfer matrix with its eigenvalues sorted by decreasing modulus.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    matrix: CMatrix,
    eigenvalues: Vec<C64>,
}

impl TransferOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::domain("transfer matrix must be square and nonempty"));
        }
        if matrix.nrows() > MAX_DENSITY_DIM {
            return Err(Error::Resource { what: "transfer matrix".into(), requested: matrix.nrows(), limit: MAX_DENSITY_DIM });
        }
        let schur = Schur::try_new(matrix.clone(), 1e-14, 10_000)
            .ok_or_else(|| Error::Analysis("Schur decomposition did not converge".into()))?;
        let (_, tri) = schur.unpack();
        let mut eigenvalues: Vec<C64> = tri.diagonal().iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        Ok(Self { matrix, eigenvalues })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues[0].norm()
    }

    pub fn lambda_max(&self) -> C64 {
        self.eigenvalues[0]
    }

    pub fn lambda2(&self) -> Option<C64> {
        self.eigenvalues.get(1).copied()
    }

    /// `|λ_max| - |λ₂|`, or `|λ_max|` for a 1 × 1 operator.
    pub fn gap(&self) -> f64 {
        self.spectral_radius() - self.lambda2().map_or(0.0, |z| z.norm())
    }

    pub fn is_degenerate(&self) -> bool {
        self.gap() < DEGENERACY_TOL * self.spectral_radius().max(1.0)
    }

    pub fn require_unique_max(&self) -> Result<()> {
        if self.is_degenerate() {
            return Err(Error::Analysis(format!(
                "leading eigenvalue is degenerate: |λ_max| = {:.12}, |λ₂| = {:.12}, gap {:.3e}",
                self.spectral_radius(),
                self.lambda2().map_or(0.0, |z| z.norm()),
                self.gap()
            )));
        }
        Ok(())
    }

    /// Smallest eigenvalue of the reshuffled matrix
    /// `R[(a,c),(b,d)] = T[(a,b),(c,d)]`, which is the Choi matrix of the
    /// map `X ↦ Σ A^i X A^{i†}`.
    pub fn reshuffled_min_eigenvalue(&self) -> Result<f64> {
        let n = self.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::domain("transfer dimension is not a square"));
        }
        let r = CMatrix::from_fn(n, n, |row, col| {
            let (a, c) = (row / d, row % d);
            let (b, dd) = (col / d, col % d);
            self.matrix[(a * d + b, c * d + dd)]
        });
        Ok(eigvalsh(&hermitize(&r))[0])
    }
}

/// `T_α = Σ B^{i_1 i_2} ⊗ B^{i_2 i_3} ⊗ ⋯ ⊗ B^{i_α i_1}` for two-leg tensors
/// `B^{ij}`; `α = 1` gives `Σ_i B^{ii}`.
pub fn replica_transfer(b: &[Vec<CMatrix>], alpha: usize) -> Result<TransferOperator> {
    if alpha == 0 {
        return Err(Error::domain("replica order must be positive"));
    }
    let p = b.len();
    if p == 0 || b.iter().any(|row| row.len() != p) {
        return Err(Error::domain("two-leg tensors must form a square table"));
    }
    let db = b[0][0].nrows();
    let dim = (db as f64).powi(alpha as i32);
    if dim > MAX_DENSITY_DIM as f64 {
        return Err(Error::Resource { what: "replica transfer".into(), requested: dim as usize, limit: MAX_DENSITY_DIM });
    }
    let dim = dim as usize;
    let mut t = CMatrix::zeros(dim, dim);
    let mut idx = vec![0usize; alpha];
    loop {
        let mut term = b[idx[0]][idx[1 % alpha]].clone();
        for k in 1..alpha {
            term = kron(&term, &b[idx[k]][idx[(k + 1) % alpha]]);
        }
        t += term;
        let mut k = 0;
        while k < alpha {
            idx[k] += 1;
            if idx[k] < p {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == alpha {
            break;
        }
    }
    TransferOperator::new(t)
}

/// Distances `‖ρ^{(N)}_{1…m} - ρ^{(N_ref)}_{1…m}‖₁` and their decay rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCurve {
    pub m: usize,
    pub lengths: Vec<usize>,
    pub distances: Vec<f64>,
    pub reference_length: usize,
    /// Least-squares slope of `ln distance` against `N`, over nonzero points.
    pub slope: Option<f64>,
    pub log_lambda2: f64,
    /// `|slope - ln|λ₂|| / |ln|λ₂||`.
    pub relative_error: Option<f64>,
}

/// Reference length used by [`convergence_curve`].
pub fn reference_length(lengths: &[usize]) -> usize {
    4 * lengths.iter().copied().max().unwrap_or(0) + 64
}

pub fn convergence_curve(mps: &MatrixProductState, m: usize, lengths: &[usize]) -> Result<ConvergenceCurve> {
    if lengths.is_empty() {
        return Err(Error::domain("need at least one chain length"));
    }
    let t = mps.normalized()?.transfer()?;
    t.require_unique_max()?;
    let reference_length = reference_length(lengths);
    let reference = mps.reduced_first_m(reference_length, m)?;
    let distances = lengths
        .iter()
        .map(|&n| trace_norm_distance(mps.reduced_first_m(n, m)?.matrix(), reference.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = lengths
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d > 1e-13)
        .map(|(&n, &d)| (n as f64, d.ln()))
        .collect();
    let slope = linear_fit(&pts).map(|(s, _)| s);
    let log_lambda2 = t.lambda2().map_or(f64::NEG_INFINITY, |z| z.norm().ln());
    let relative_error = slope.map(|s| ((s - log_lambda2) / log_lambda2).abs());
    Ok(ConvergenceCurve {
        m,
        lengths: lengths.to_vec(),
        distances,
        reference_length,
        slope,
        log_lambda2,
        relative_error,
    })
}

/// Entry-wise check `|Δρ_{ij}| ≤ (max_i ‖A^i‖)^{2m} ‖T^{N-m} - T^{Ñ-m}‖` for
/// the unnormalized reduced states of a transfer-normalized MPS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntrywiseBound {
    pub max_entry_difference: f64,
    pub bound: f64,
}

pub fn entrywise_bound(mps: &MatrixProductState, m: usize, n: usize, n_tilde: usize) -> Result<EntrywiseBound> {
    if m == 0 || m > n.min(n_tilde) {
        return Err(Error::domain("need 1 ≤ m ≤ min(N, Ñ)"));
    }
    let mps = mps.normalized()?;
    mps.check_dense(m)?;
    let t = transfer_matrix(&mps.tensors);
    let (_, r) = mps.boundary();
    let d = mps.bond_dim();
    let unnormalized = |k: usize| {
        let w = power_apply(&t, &r, k - m);
        let wm = CMatrix::from_fn(d, d, |a, b| w[a * d + b]);
        let u = mps.prefix_rows(m);
        &u * wm * u.adjoint()
    };
    let diff = unnormalized(n) - unnormalized(n_tilde);
    let max_entry_difference = diff.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let mut tn = CMatrix::identity(d * d, d * d);
    let mut tt = CMatrix::identity(d * d, d * d);
    for _ in 0..n - m {
        tn = &t * tn;
    }
    for _ in 0..n_tilde - m {
        tt = &t * tt;
    }
    let op = |a: &CMatrix| a.singular_values().iter().fold(0.0f64, |x, &y| x.max(y));
    let amax = mps.tensors.iter().map(op).fold(0.0f64, f64::max);
    Ok(EntrywiseBound {
        max_entry_difference,
        bound: amax.powi(2 * m as i32) * op(&(tn - tt)),
    })
}

/// `(slope, intercept)` of a least-squares line; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = sxy / sxx;
    Some((s, my - s * mx))
}

/// A ring of two-leg tensors: `l` edge positions with `corners` corner
/// positions spread evenly among them.
#[derive(Debug, Clone)]
pub struct RingOperator {
    pub edge: Vec<Vec<CMatrix>>,
    pub corner: Option<Vec<Vec<CMatrix>>>,
}

impl RingOperator {
    pub fn new(edge: Vec<Vec<CMatrix>>, corner: Option<Vec<Vec<CMatrix>>>) -> Result<Self> {
        let check = |b: &Vec<Vec<CMatrix>>| {
            let p = b.len();
            let d = b.first().and_then(|r| r.first()).map_or(0, CMatrix::nrows);
            p > 0 && d > 0 && b.iter().all(|r| r.len() == p && r.iter().all(|m| m.nrows() == d && m.ncols() == d))
        };
        if !check(&edge) || corner.as_ref().is_some_and(|c| !check(c)) {
            return Err(Error::domain("two-leg tensors must be square tables of equal-size square matrices"));
        }
        if let Some(c) = &corner {
            if c[0][0].nrows() != edge[0][0].nrows() {
                return Err(Error::domain("corner and edge bond dimensions differ"));
            }
        }
        Ok(Self { edge, corner })
    }

    /// Locally purified ring: tensors are indexed `i · env + k` and the
    /// environment label `k` is traced, `B^{ij} = Σ_k A^{(i,k)} ⊗ Ā^{(j,k)}`.
    /// `env = 1` gives a mixture of matrix product states over boundary
    /// conditions.
    pub fn from_purified(edge: &[CMatrix], env: usize, corner: Option<(&[CMatrix], usize)>) -> Result<Self> {
        let two_leg = |t: &[CMatrix], env: usize| -> Result<Vec<Vec<CMatrix>>> {
            if env == 0 || t.is_empty() || !t.len().is_multiple_of(env) {
                return Err(Error::domain("tensor count must be a positive multiple of the environment dimension"));
            }
            let p = t.len() / env;
            Ok((0..p)
                .map(|i| {
                    (0..p)
                        .map(|j| {
                            (0..env).fold(CMatrix::zeros(t[0].nrows().pow(2), t[0].nrows().pow(2)), |acc, k| {
                                acc + kron(&t[i * env + k], &t[j * env + k].map(|z| z.conj()))
                            })
                        })
                        .collect()
                })
                .collect())
        };
        let corner = match corner {
            Some((c, e)) => Some(two_leg(c, e)?),
            None => None,
        };
        Self::new(two_leg(edge, env)?, corner)
    }

    fn layout(&self, l: usize, corners: usize) -> Result<Vec<bool>> {
        if corners > 0 && self.corner.is_none() {
            return Err(Error::domain("corner positions requested without corner tensors"));
        }
        if l == 0 && corners == 0 {
            return Err(Error::domain("empty ring"));
        }
        let mut pos = Vec::with_capacity(l + corners);
        let mut placed = 0;
        for e in 0..l {
            while placed < corners && placed * l <= e * corners {
                pos.push(true);
                placed += 1;
            }
            pos.push(false);
        }
        pos.extend(std::iter::repeat_n(true, corners - placed));
        Ok(pos)
    }

    /// `tr Π_p T_α(p)` around the ring, rescaled by `s^{l}` where `s` is the
    /// spectral radius of the edge `T_1`.
    pub fn ring_trace(&self, l: usize, corners: usize, alpha: usize) -> Result<C64> {
        let pos = self.layout(l, corners)?;
        let te = replica_transfer(&self.edge, alpha)?;
        let s = replica_transfer(&self.edge, 1)?.spectral_radius().powi(alpha as i32);
        let tc = match &self.corner {
            Some(c) => Some(replica_transfer(c, alpha)?),
            None => None,
        };
        let n = te.dim();
        let mut acc = CMatrix::identity(n, n);
        for &is_corner in &pos {
            acc = if is_corner {
                acc * tc.as_ref().expect("checked").matrix()
            } else {
                acc * te.matrix() / C64::from(s)
            };
        }
        Ok(acc.trace())
    }

    /// `S_α = (ln tr ρ^α - α ln tr ρ) / (1 - α)` for the ring operator `ρ`.
    pub fn renyi(&self, l: usize, corners: usize, alpha: usize) -> Result<f64> {
        if alpha < 2 {
            return Err(Error::domain("Rényi order must be at least 2"));
        }
        let num = self.ring_trace(l, corners, alpha)?;
        let den = self.ring_trace(l, corners, 1)?;
        if num.re <= 0.0 || den.re <= 0.0 {
            return Err(Error::Analysis("ring trace is not positive".into()));
        }
        Ok((num.re.ln() - alpha as f64 * den.re.ln()) / (1.0 - alpha as f64))
    }

    /// Dense `ρ` on the `l + corners` ring sites, for small rings.
    pub fn dense(&self, l: usize, corners: usize) -> Result<CMatrix> {
        let pos = self.layout(l, corners)?;
        let dims: Vec<usize> = pos
            .iter()
            .map(|&c| if c { self.corner.as_ref().expect("checked").len() } else { self.edge.len() })
            .collect();
        let total: usize = dims.iter().product();
        if total > 256 {
            return Err(Error::Resource { what: "dense ring operator".into(), requested: total, limit: 256 });
        }
        let decode = |mut x: usize| {
            let mut out = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                out[k] = x % dims[k];
                x /= dims[k];
            }
            out
        };
        let db = self.edge[0][0].nrows();
        Ok(CMatrix::from_fn(total, total, |r, c| {
            let (i, j) = (decode(r), decode(c));
            let mut acc = CMatrix::identity(db, db);
            for (k, &is_corner) in pos.iter().enumerate() {
                let table = if is_corner { self.corner.as_ref().expect("checked") } else { &self.edge };
                acc *= &table[i[k]][j[k]];
            }
            acc.trace()
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenyiAreaFit {
    pub alpha: usize,
    pub corners: usize,
    pub lengths: Vec<usize>,
    pub entropies: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `|ln λ_max(α)| / (α - 1)` with the edge `T_1` normalized.
    pub predicted_slope: f64,
    pub relative_error: f64,
    pub residuals: Vec<f64>,
    /// Decay rate of `|residual|` with `l`, if at least two are nonzero.
    pub residual_decay_rate: Option<f64>,
}

/// Fits `S_α(l) = slope · l + C` over ring sizes.
pub fn renyi_area_fit(ring: &RingOperator, alpha: usize, corners: usize, lengths: &[usize]) -> Result<RenyiAreaFit> {
    let ta = replica_transfer(&ring.edge, alpha)?;
    ta.require_unique_max()?;
    let t1 = replica_transfer(&ring.edge, 1)?;
    t1.require_unique_max()?;
    let lambda = ta.spectral_radius() / t1.spectral_radius().powi(alpha as i32);
    let predicted_slope = lambda.ln().abs() / (alpha as f64 - 1.0);
    let entropies = lengths
        .iter()
        .map(|&l| ring.renyi(l, corners, alpha))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = lengths.iter().zip(&entropies).map(|(&l, &s)| (l as f64, s)).collect();
    let (slope, intercept) = linear_fit(&pts).ok_or_else(|| Error::Fit("need two distinct ring sizes".into()))?;
    let residuals: Vec<f64> = pts.iter().map(|(l, s)| s - (slope * l + intercept)).collect();
    let decay: Vec<(f64, f64)> = pts
        .iter()
        .zip(&residuals)
        .filter(|(_, r)| r.abs() > 1e-14)
        .map(|((l, _), r)| (*l, r.abs().ln()))
        .collect();
    let residual_decay_rate = linear_fit(&decay).map(|(s, _)| -s);
    let relative_error = if predicted_slope == 0.0 {
        slope.abs()
    } else {
        ((slope - predicted_slope) / predicted_slope).abs()
    };
    Ok(RenyiAreaFit {
        alpha,
        corners,
        lengths: lengths.to_vec(),
        entropies,
        slope,
        intercept,
        predicted_slope,
        relative_error,
        residuals,
        residual_decay_rate,
    })
}

/// Intercepts of the area-law fit for several corner counts, and the
/// per-corner increment fitted across them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerScaling {
    pub corner_counts: Vec<usize>,
    pub intercepts: Vec<f64>,
    pub per_corner: Option<f64>,
}

pub fn corner_scaling(ring: &RingOperator, alpha: usize, corner_counts: &[usize], lengths: &[usize]) -> Result<CornerScaling> {
    let intercepts = corner_counts
        .iter()
        .map(|&c| Ok(renyi_area_fit(ring, alpha, c, lengths)?.intercept))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = corner_counts.iter().zip(&intercepts).map(|(&c, &i)| (c as f64, i)).collect();
    Ok(CornerScaling {
        corner_counts: corner_counts.to_vec(),
        intercepts,
        per_corner: linear_fit(&pts).map(|(s, _)| s),
    })
}

fn write_rows<W: std::io::Write, T: Serialize>(rows: impl IntoIterator<Item = T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(|e| Error::domain(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::domain(format!("csv: {e}")))?;
    Ok(())
}

/// Columns `length,distance`.
pub fn write_convergence_csv<W: std::io::Write>(curve: &ConvergenceCurve, writer: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        length: usize,
        distance: f64,
    }
    write_rows(curve.lengths.iter().zip(&curve.distances).map(|(&length, &distance)| Row { length, distance }), writer)
}

/// Columns `l,entropy,residual`.
pub fn write_area_fit_csv<W: std::io::Write>(fit: &RenyiAreaFit, writer: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        l: usize,
        entropy: f64,
        residual: f64,
    }
    write_rows(
        fit.lengths.iter().zip(&fit.entropies).zip(&fit.residuals).map(|((&l, &entropy), &residual)| Row { l, entropy, residual }),
        writer,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{partial_trace, renyi_entropy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Random D = 2 qubit MPS with `|λ₂| ∈ [0.3, 0.85]` and `|λ₃| ≤ |λ₂|/2`.
    fn gapped_mps(seed: u64, length: usize) -> MatrixProductState {
        let mut r = rng(seed);
        loop {
            let m = MatrixProductState::random(2, 2, length, &mut r).unwrap().normalized().unwrap();
            let ev = m.transfer().unwrap().eigenvalues().to_vec();
            let (l2, l3) = (ev[1].norm(), ev[2].norm());
            if (0.3..=0.85).contains(&l2) && l3 <= 0.5 * l2 && ev[1].im.abs() < 1e-12 {
                return m;
            }
        }
    }

    #[test]
    fn ghz_dense_and_degenerate() {
        let g = MatrixProductState::ghz(5).unwrap();
        let v = g.to_dense().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.amplitudes()[0].re - s).abs() < 1e-14);
        assert!((v.amplitudes()[31].re - s).abs() < 1e-14);
        assert!(g.transfer().unwrap().is_degenerate());
        assert!(matches!(convergence_curve(&g, 2, &[4, 6]), Err(Error::Analysis(_))));
        let s2 = g.with_length(8).unwrap().segment_renyi_entropy(0, 4, 2).unwrap();
        assert!((s2 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_matches_dense() {
        let m = MatrixProductState::random(3, 2, 9, &mut rng(1)).unwrap();
        let dense = partial_trace(&m.to_dense().unwrap(), &[0, 1, 2]).unwrap();
        let red = m.reduced_first_m(9, 3).unwrap();
        assert!(trace_norm_distance(dense.matrix(), red.matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn transfer_spectrum_and_choi() {
        let m = MatrixProductState::random(3, 2, 4, &mut rng(2)).unwrap();
        let t = m.transfer().unwrap();
        let sum: C64 = t.eigenvalues().iter().sum();
        assert!((sum - t.matrix().trace()).norm() < 1e-10);
        for &z in t.eigenvalues() {
            let shifted = t.matrix() - CMatrix::identity(9, 9) * z;
            let smin = shifted.singular_values().min();
            assert!(smin < 1e-8, "eigenvalue {z} has residual {smin:e}");
        }
        assert!(t.reshuffled_min_eigenvalue().unwrap() > -1e-12);
        let n = m.normalized().unwrap().transfer().unwrap();
        assert!((n.spectral_radius() - 1.0).abs() < 1e-10);
        assert!(n.lambda_max().im.abs() < 1e-10 && n.lambda_max().re > 0.0);
    }

    #[test]
    fn gauge_invariance() {
        let mut r = rng(3);
        let m = MatrixProductState::random(2, 2, 7, &mut r).unwrap();
        let x = ginibre(2, 2, &mut r);
        let g = m.gauge(&x).unwrap();
        let (a, b) = (m.reduced_first_m(7, 3).unwrap(), g.reduced_first_m(7, 3).unwrap());
        assert!(trace_norm_distance(a.matrix(), b.matrix()).unwrap() < 1e-10);
        let (ta, tb) = (m.transfer().unwrap(), g.transfer().unwrap());
        for (p, q) in ta.eigenvalues().iter().zip(tb.eigenvalues()) {
            assert!((p.norm() - q.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn segment_renyi_matches_dense() {
        let m = MatrixProductState::random(2, 2, 8, &mut rng(4)).unwrap();
        let dense = m.to_dense().unwrap();
        let rho = partial_trace(&dense, &[2, 3, 4]).unwrap();
        for alpha in [2, 3] {
            let oracle = renyi_entropy(&rho, alpha as f64).unwrap();
            let got = m.segment_renyi_entropy(2, 3, alpha).unwrap();
            assert!((oracle - got).abs() < 1e-10, "alpha {alpha}: {oracle} vs {got}");
        }
    }

    #[test]
    fn convergence_rate_tracks_lambda2() {
        let m = gapped_mps(5, 4);
        let lengths: Vec<usize> = (6..=18).collect();
        let c = convergence_curve(&m, 2, &lengths).unwrap();
        let err = c.relative_error.unwrap();
        assert!(err < 0.05, "slope {:?} vs {} ({err})", c.slope, c.log_lambda2);
    }

    #[test]
    fn product_state_converges_immediately() {
        let v = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let p = MatrixProductState::product(&v, 3).unwrap();
        let c = convergence_curve(&p, 2, &[3, 5, 9]).unwrap();
        assert!(c.distances.iter().all(|&d| d < 1e-13));
        assert!(c.slope.is_none());
        let mut buf = Vec::new();
        write_convergence_csv(&c, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("length,distance\n3,"));
    }

    #[test]
    fn entrywise_bound_holds() {
        let m = gapped_mps(6, 4);
        for (n, nt) in [(4, 9), (6, 30), (10, 11)] {
            let b = entrywise_bound(&m, 3, n, nt).unwrap();
            assert!(b.max_entry_difference <= b.bound * (1.0 + 1e-10) + 1e-15, "{b:?}");
        }
    }

    #[test]
    fn ring_renyi_matches_dense() {
        let mut r = rng(7);
        let a = MatrixProductState::random(2, 4, 1, &mut r).unwrap();
        let c = MatrixProductState::random(2, 4, 1, &mut r).unwrap();
        let ring = RingOperator::from_purified(a.tensors(), 2, Some((c.tensors(), 2))).unwrap();
        for (l, corners) in [(3, 0), (4, 1), (4, 2)] {
            let rho = ring.dense(l, corners).unwrap();
            let rho = hermitize(&rho);
            let tr = rho.trace().re;
            let vals = eigvalsh(&rho);
            assert!(vals[0] > -1e-12 * tr);
            for alpha in [2usize, 3] {
                let oracle: f64 = vals.iter().map(|x| (x / tr).max(0.0).powi(alpha as i32)).sum::<f64>().ln()
                    / (1.0 - alpha as f64);
                let got = ring.renyi(l, corners, alpha).unwrap();
                assert!((oracle - got).abs() < 1e-10, "l {l} c {corners} α {alpha}: {oracle} vs {got}");
            }
        }
    }

    #[test]
    fn area_fit_slope_and_corners() {
        let mut r = rng(8);
        let a = MatrixProductState::random(2, 4, 1, &mut r).unwrap();
        let c = MatrixProductState::random(2, 4, 1, &mut r).unwrap();
        let ring = RingOperator::from_purified(a.tensors(), 2, Some((c.tensors(), 2))).unwrap();
        let lengths: Vec<usize> = (16..=40).step_by(4).collect();
        for alpha in [2, 3] {
            let fit = renyi_area_fit(&ring, alpha, 0, &lengths).unwrap();
            assert!(fit.relative_error < 0.01, "{fit:?}");
        }
        let wide: Vec<usize> = (60..=120).step_by(10).collect();
        let cs = corner_scaling(&ring, 2, &[0, 1, 2, 3], &wide).unwrap();
        let per = cs.per_corner.unwrap();
        let steps: Vec<f64> = cs.intercepts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| (s - per).abs() < 1e-4), "{cs:?}");
    }

    #[test]
    fn product_ring_has_zero_slope() {
        let v = [CMatrix::from_element(1, 1, C64::new(0.6, 0.0)), CMatrix::from_element(1, 1, C64::new(0.8, 0.0))];
        let ring = RingOperator::from_purified(&v, 1, None).unwrap();
        let fit = renyi_area_fit(&ring, 2, 0, &[4, 8, 12]).unwrap();
        assert!(fit.slope.abs() < 1e-12 && fit.predicted_slope.abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let m = MatrixProductState::random(2, 3, 5, &mut rng(9)).unwrap();
        let s = serde_json::to_string(&m.to_json()).unwrap();
        let back = MatrixProductState::from_json(&s).unwrap();
        assert_eq!(back.length(), 5);
        for (x, y) in m.tensors().iter().zip(back.tensors()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(MatrixProductState::from_json("{\"tensors\": [], \"left\": [], \"right\": [], \"length\": 2}").is_err());
    }
}
