use serde::Serialize;

use super::linalg::{apply_fn, eigh, hermitian_trace_norm, CMatrix, C64};
use super::state::{
    DensityOperator, HermitianOperator, LogFloor, PureStateVector, UnnormalizedPositiveOperator,
    PSD_TOL, SUPPORT_TOL, ZERO_EIGENVALUE,
};
use crate::error::{Error, Result};

/// Applies `f` to the eigenvalues of `a`.
pub fn matrix_fn(a: &HermitianOperator, f: impl Fn(f64) -> f64) -> HermitianOperator {
    HermitianOperator::from_parts(apply_fn(a.matrix(), f), a.layout().clone())
}

/// Matrix logarithm of a positive semidefinite operator, with vanishing
/// eigenvalues sent to the floor value.
pub fn matrix_log(a: &HermitianOperator, floor: LogFloor) -> Result<HermitianOperator> {
    let (vals, vecs) = eigh(a.matrix());
    if vals[0] < -PSD_TOL {
        return Err(Error::domain(format!("logarithm of negative eigenvalue {:e}", vals[0])));
    }
    let w: Vec<C64> = vals.iter().map(|&x| C64::new(floor.ln(x), 0.0)).collect();
    Ok(HermitianOperator::from_parts(
        super::linalg::reassemble(&w, &vecs),
        a.layout().clone(),
    ))
}

/// `-Σ p ln p` over a probability vector; entries below the zero threshold
/// contribute nothing.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &p in values {
        if p < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {p:e}")));
        }
        if p > ZERO_EIGENVALUE {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}

pub fn renyi_of_spectrum(values: &[f64], alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::domain(format!("Renyi index {alpha} must be positive and not 1")));
    }
    let mut tr = 0.0;
    for &p in values {
        if p < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {p:e}")));
        }
        if p > ZERO_EIGENVALUE {
            tr += p.powf(alpha);
        }
    }
    Ok((tr.ln() / (1.0 - alpha)).max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_spectrum(rho.spectrum().values())
}

pub fn renyi_entropy(rho: &DensityOperator, alpha: f64) -> Result<f64> {
    renyi_of_spectrum(rho.spectrum().values(), alpha)
}

/// `tr ρ ln ρ - tr ρ ln σ`. When `σ` carries its own logarithm it is used
/// exactly; otherwise `σ` is diagonalized and its support checked.
pub fn relative_entropy(rho: &DensityOperator, sigma: &UnnormalizedPositiveOperator) -> Result<f64> {
    if rho.dim() != sigma.matrix().nrows() {
        return Err(Error::domain("relative entropy of operators with different dimensions"));
    }
    let neg = -entropy_of_spectrum(rho.spectrum().values())?;
    if let Some(log_sigma) = sigma.known_log() {
        return Ok(neg - super::linalg::trace_product(rho.matrix(), log_sigma).re);
    }
    let (s, v) = eigh(sigma.matrix());
    let weights = (v.adjoint() * rho.matrix() * &v).diagonal();
    let mut cross = 0.0;
    let mut min_on_support = f64::INFINITY;
    let mut violated = false;
    for (k, &sk) in s.iter().enumerate() {
        let w = weights[k].re;
        if w > SUPPORT_TOL {
            min_on_support = min_on_support.min(sk);
            if sk <= ZERO_EIGENVALUE {
                violated = true;
            }
        }
        if sk > ZERO_EIGENVALUE {
            cross += w * sk.ln();
        }
    }
    if violated {
        return Err(Error::Support {
            min_eigenvalue: min_on_support,
        });
    }
    Ok(neg - cross)
}

fn same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::domain(format!(
            "dimension mismatch {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

/// `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho.matrix(), sigma.matrix())?;
    Ok(0.5 * hermitian_trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Un-halved trace norm of a Hermitian difference.
pub fn trace_norm_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    same_dim(a, b)?;
    Ok(hermitian_trace_norm(&(a - b)))
}

/// `‖√ρ √σ‖₁`. Eigenvalues below `1e-14` are treated as zero before the
/// square roots are taken.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho.matrix(), sigma.matrix())?;
    let sqrt = |m: &CMatrix| apply_fn(m, |x| if x > FIDELITY_CLIP { x.sqrt() } else { 0.0 });
    let product = sqrt(rho.matrix()) * sqrt(sigma.matrix());
    Ok(product.singular_values().iter().sum())
}

const FIDELITY_CLIP: f64 = 1e-14;

/// Unitary on the environment aligning two purifications.
#[derive(Debug, Clone, Serialize)]
pub struct UhlmannAlignment {
    #[serde(skip)]
    pub unitary: CMatrix,
    /// `|⟨ψ|(I ⊗ U)|φ⟩|` evaluated with the returned unitary.
    pub overlap: f64,
}

/// Both states share the leading `system_sites` sites; the remaining sites
/// are environments of equal dimension. Returns `U: E′ → E` maximizing
/// `|⟨ψ|(I ⊗ U)|φ⟩|`.
pub fn uhlmann_align(
    psi: &PureStateVector,
    phi: &PureStateVector,
    system_sites: usize,
) -> Result<UhlmannAlignment> {
    let (lp, lf) = (psi.layout(), phi.layout());
    if system_sites == 0 || system_sites > lp.num_sites() || system_sites > lf.num_sites() {
        return Err(Error::domain("system must be a proper leading block of both states"));
    }
    if lp.site_dims()[..system_sites] != lf.site_dims()[..system_sites] {
        return Err(Error::domain("system factors differ"));
    }
    let ds = lp.site_dims()[..system_sites].iter().product::<usize>();
    let de = psi.dim() / ds;
    let de2 = phi.dim() / ds;
    if de != de2 {
        return Err(Error::domain(format!(
            "environment dimensions differ ({de} vs {de2})"
        )));
    }
    let m_psi = CMatrix::from_fn(ds, de, |s, e| psi.amplitudes()[s * de + e]);
    let m_phi = CMatrix::from_fn(ds, de, |s, e| phi.amplitudes()[s * de + e]);
    // ⟨ψ|(I⊗U)|φ⟩ = tr(U Q) with Q = Φᵀ Ψ̄.
    let q = m_phi.transpose() * m_psi.map(|z| z.conj());
    let svd = q.clone().svd(true, true);
    let w = svd.u.expect("left singular vectors");
    let v = svd.v_t.expect("right singular vectors").adjoint();
    let unitary = v * w.adjoint();
    let overlap = super::linalg::trace(&(&unitary * &q)).norm();
    Ok(UhlmannAlignment { unitary, overlap })
}
