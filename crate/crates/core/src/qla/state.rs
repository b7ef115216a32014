use serde::{Deserialize, Serialize};

use super::layout::SubsystemLayout;
use super::linalg::{eigh, eigvalsh, hermiticity_defect, trace, CMatrix, CVector, C64, ZERO};
use crate::error::{Error, Result};

/// Tolerance on `M - M†` entries.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on unit norm and unit trace.
pub const NORM_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this count as exact zeros.
pub const ZERO_EIGENVALUE: f64 = 1e-12;
/// Weight above which a direction belongs to a support.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Largest state-vector dimension handled densely.
pub const MAX_VECTOR_DIM: usize = 1 << 18;
/// Largest density-operator dimension handled densely.
pub const MAX_DENSITY_DIM: usize = 1 << 12;

pub(crate) fn check_density_dim(what: &str, dim: usize) -> Result<()> {
    if dim > MAX_DENSITY_DIM {
        return Err(Error::Resource {
            what: what.to_string(),
            requested: dim,
            limit: MAX_DENSITY_DIM,
        });
    }
    Ok(())
}

/// Replacement value for logarithms of vanishing eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFloor {
    pub threshold: f64,
}

impl Default for LogFloor {
    fn default() -> Self {
        Self {
            threshold: ZERO_EIGENVALUE,
        }
    }
}

impl LogFloor {
    /// The finite number standing in for `ln 0`.
    pub fn value(&self) -> f64 {
        self.threshold.ln()
    }

    pub fn ln(&self, x: f64) -> f64 {
        if x < self.threshold {
            self.value()
        } else {
            x.ln()
        }
    }
}

/// Real eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spectrum entries must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    amplitudes: CVector,
    layout: SubsystemLayout,
}

impl PureStateVector {
    pub fn new(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        check_len(amplitudes.len(), &layout)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        check_len(amplitudes.len(), &layout)?;
        let norm = amplitudes.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a vanishing vector"));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
            layout,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::domain("basis index out of range"));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: v,
            layout,
        })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::domain("inner product of states with different dimensions"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        check_density_dim("pure-state projector", self.dim())?;
        let m = &self.amplitudes * self.amplitudes.adjoint();
        Ok(DensityOperator::from_parts(m, self.layout.clone()))
    }

    /// Same state with sites relabelled: new site `k` is old site `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.layout.num_sites() {
            return Err(Error::domain("permutation must list every site"));
        }
        let layout = self.layout.restrict(order)?;
        let offsets = self.layout.offsets(order);
        let amplitudes = CVector::from_iterator(
            offsets.len(),
            offsets.iter().map(|&o| self.amplitudes[o]),
        );
        Ok(Self { amplitudes, layout })
    }

    /// Coefficient matrix `M[a, b] = ψ[keep = a, rest = b]`.
    pub(crate) fn split_matrix(&self, keep: &[usize]) -> CMatrix {
        let rest = self.layout.complement(keep);
        let ok = self.layout.offsets(keep);
        let or = self.layout.offsets(&rest);
        CMatrix::from_fn(ok.len(), or.len(), |a, b| self.amplitudes[ok[a] + or[b]])
    }
}

fn check_len(len: usize, layout: &SubsystemLayout) -> Result<()> {
    if len != layout.total_dim() {
        return Err(Error::domain(format!(
            "vector length {len} does not match layout dimension {}",
            layout.total_dim()
        )));
    }
    if len > MAX_VECTOR_DIM {
        return Err(Error::Resource {
            what: "state vector".into(),
            requested: len,
            limit: MAX_VECTOR_DIM,
        });
    }
    Ok(())
}

fn check_square(m: &CMatrix, layout: &SubsystemLayout) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() != layout.total_dim() {
        return Err(Error::domain(format!(
            "matrix {}x{} does not match layout dimension {}",
            m.nrows(),
            m.ncols(),
            layout.total_dim()
        )));
    }
    check_density_dim("operator", m.nrows())
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::domain(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

/// Positive semidefinite operator of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_square(&matrix, &layout)?;
        check_hermitian(&matrix)?;
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::domain(format!("trace {tr} is not 1")));
        }
        let min = eigvalsh(&matrix)[0];
        if min < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix, layout })
    }

    /// Wraps a matrix known to be a state by construction.
    pub(crate) fn from_parts(matrix: CMatrix, layout: SubsystemLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Result<Self> {
        let d = layout.total_dim();
        check_density_dim("maximally mixed state", d)?;
        let m = CMatrix::identity(d, d).unscale(d as f64);
        Ok(Self { matrix: m, layout })
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], layout: SubsystemLayout) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(m, layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            values: eigvalsh(&self.matrix),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_density_dim("tensor product", self.dim() * other.dim())?;
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            layout: self.layout.concat(&other.layout),
        })
    }

    /// Same state with sites relabelled: new site `k` is old site `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.layout.num_sites() {
            return Err(Error::domain("permutation must list every site"));
        }
        self.reduce_ordered(order)
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
            layout: self.layout.clone(),
        }
    }
}

/// Hermitian positive semidefinite operator without a trace condition. When
/// built from a Hamiltonian the exact logarithm `-H` is retained.
#[derive(Debug, Clone, PartialEq)]
pub struct UnnormalizedPositiveOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
    log: Option<CMatrix>,
}

impl UnnormalizedPositiveOperator {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_square(&matrix, &layout)?;
        check_hermitian(&matrix)?;
        let min = eigvalsh(&matrix)[0];
        if min < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix,
            layout,
            log: None,
        })
    }

    /// `e^{-H}` together with its logarithm `-H`.
    pub fn gibbs(h: &HermitianOperator) -> Self {
        let (vals, vecs) = eigh(&h.matrix);
        let w: Vec<C64> = vals.iter().map(|&x| C64::new((-x).exp(), 0.0)).collect();
        Self {
            matrix: super::linalg::reassemble(&w, &vecs),
            layout: h.layout.clone(),
            log: Some(-h.matrix.clone()),
        }
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        Self {
            matrix: rho.matrix.clone(),
            layout: rho.layout.clone(),
            log: None,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    /// Exact logarithm when the operator came from a Hamiltonian.
    pub fn known_log(&self) -> Option<&CMatrix> {
        self.log.as_ref()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }
}

/// Hermitian operator on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_square(&matrix, &layout)?;
        check_hermitian(&matrix)?;
        Ok(Self { matrix, layout })
    }

    pub(crate) fn from_parts(matrix: CMatrix, layout: SubsystemLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn zeros(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CMatrix::zeros(d, d),
            layout,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            values: eigvalsh(&self.matrix),
        }
    }

    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        eigh(&self.matrix)
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        let v = eigvalsh(&self.matrix);
        v[0].abs().max(v[v.len() - 1].abs())
    }

    /// Places this operator on `sites` of `layout`, identity elsewhere.
    /// Operator site `k` acts on layout site `sites[k]`.
    pub fn embed(&self, sites: &[usize], layout: &SubsystemLayout) -> Result<Self> {
        Ok(Self {
            matrix: embed_matrix(&self.matrix, sites, layout)?,
            layout: layout.clone(),
        })
    }
}

/// Embeds `op` acting on `sites` (in that order) into the full layout.
pub fn embed_matrix(op: &CMatrix, sites: &[usize], layout: &SubsystemLayout) -> Result<CMatrix> {
    layout.check_sites(sites)?;
    let dk = layout.dim_of(sites);
    if op.nrows() != dk || op.ncols() != dk {
        return Err(Error::domain("operator dimension does not match embedding sites"));
    }
    let d = layout.total_dim();
    check_density_dim("embedded operator", d)?;
    let rest = layout.complement(sites);
    let ok = layout.offsets(sites);
    let or = layout.offsets(&rest);
    let mut out = CMatrix::zeros(d, d);
    for &b in &or {
        for (a, &oa) in ok.iter().enumerate() {
            for (a2, &oa2) in ok.iter().enumerate() {
                let v = op[(a, a2)];
                if v != ZERO {
                    out[(oa + b, oa2 + b)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// States admitting reductions onto site subsets.
pub trait QuantumState: Sync {
    fn layout(&self) -> &SubsystemLayout;

    /// Reduced density operator on `keep`, sites in the listed order.
    fn reduce_ordered(&self, keep: &[usize]) -> Result<DensityOperator>;

    /// Eigenvalues of the reduction onto `keep`. Only the nonzero part is
    /// guaranteed; pure states may return the spectrum of the complement.
    fn region_spectrum(&self, keep: &[usize]) -> Result<Vec<f64>>;
}

fn check_keep(layout: &SubsystemLayout, keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::domain("partial trace needs a nonempty set of kept sites"));
    }
    layout.check_sites(keep)
}

impl QuantumState for PureStateVector {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn reduce_ordered(&self, keep: &[usize]) -> Result<DensityOperator> {
        check_keep(&self.layout, keep)?;
        check_density_dim("reduced state", self.layout.dim_of(keep))?;
        let m = self.split_matrix(keep);
        let rho = &m * m.adjoint();
        Ok(DensityOperator::from_parts(rho, self.layout.restrict(keep)?))
    }

    fn region_spectrum(&self, keep: &[usize]) -> Result<Vec<f64>> {
        check_keep(&self.layout, keep)?;
        let m = self.split_matrix(keep);
        let (rows, cols) = m.shape();
        if rows.min(cols) > MAX_DENSITY_DIM {
            return Err(Error::Resource {
                what: "region spectrum".into(),
                requested: rows.min(cols),
                limit: MAX_DENSITY_DIM,
            });
        }
        let gram = if rows <= cols {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        Ok(eigvalsh(&gram))
    }
}

impl QuantumState for DensityOperator {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn reduce_ordered(&self, keep: &[usize]) -> Result<DensityOperator> {
        check_keep(&self.layout, keep)?;
        let rest = self.layout.complement(keep);
        let ok = self.layout.offsets(keep);
        let or = self.layout.offsets(&rest);
        let dk = ok.len();
        let mut out = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for a2 in 0..dk {
                let mut acc = ZERO;
                for &b in &or {
                    acc += self.matrix[(ok[a] + b, ok[a2] + b)];
                }
                out[(a, a2)] = acc;
            }
        }
        Ok(DensityOperator::from_parts(out, self.layout.restrict(keep)?))
    }

    fn region_spectrum(&self, keep: &[usize]) -> Result<Vec<f64>> {
        Ok(self.reduce_ordered(keep)?.spectrum().into_vec())
    }
}

/// Reduced density operator on `keep`, original site order preserved.
pub fn partial_trace<S: QuantumState + ?Sized>(state: &S, keep: &[usize]) -> Result<DensityOperator> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("kept sites must be distinct"));
    }
    state.reduce_ordered(&sorted)
}
