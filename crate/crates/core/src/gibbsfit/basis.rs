//! Generalized Gell-Mann basis, orthonormal under `⟨A, B⟩ = tr(A B)`.

use crate::qla::{CMatrix, C64};

/// Basis of `d × d` Hermitian matrices: `I/√d`, then `d - 1` traceless
/// diagonals, then symmetric and antisymmetric pairs for every `j < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianBasis {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Self {
        let pairs = (0..d).flat_map(|j| (j + 1..d).map(move |k| (j, k))).collect();
        Self { d, pairs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of basis elements, `d²`.
    pub fn len(&self) -> usize {
        self.d * self.d
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    fn diag_norm(l: usize) -> f64 {
        ((l * (l + 1)) as f64).sqrt()
    }

    /// `Re tr(M b_k)` for every basis element.
    pub fn coords(&self, m: &CMatrix) -> Vec<f64> {
        let d = self.d;
        let mut out = Vec::with_capacity(self.len());
        let diag: Vec<f64> = (0..d).map(|j| m[(j, j)].re).collect();
        out.push(diag.iter().sum::<f64>() / (d as f64).sqrt());
        let mut prefix = 0.0;
        for l in 1..d {
            prefix += diag[l - 1];
            out.push((prefix - l as f64 * diag[l]) / Self::diag_norm(l));
        }
        let r2 = std::f64::consts::SQRT_2;
        for &(j, k) in &self.pairs {
            let z = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
            out.push(r2 * z.re);
            out.push(-r2 * z.im);
        }
        out
    }

    /// `Σ c_k b_k`.
    pub fn assemble(&self, c: &[f64]) -> CMatrix {
        let d = self.d;
        let mut m = CMatrix::zeros(d, d);
        let id = c[0] / (d as f64).sqrt();
        // Suffix sums of c_l / √(l(l+1)) give the diagonal in O(d).
        let mut tail = vec![0.0; d + 1];
        for l in (1..d).rev() {
            tail[l] = tail[l + 1] + c[l] / Self::diag_norm(l);
        }
        for j in 0..d {
            let own = if j >= 1 { -(j as f64) * c[j] / Self::diag_norm(j) } else { 0.0 };
            m[(j, j)] = C64::new(id + tail[j + 1] + own, 0.0);
        }
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            let (s, a) = (c[d + 2 * p], c[d + 2 * p + 1]);
            m[(j, k)] = C64::new(s * r2, -a * r2);
            m[(k, j)] = C64::new(s * r2, a * r2);
        }
        m
    }

    /// Basis element `k` as a matrix.
    pub fn element(&self, k: usize) -> CMatrix {
        let mut c = vec![0.0; self.len()];
        c[k] = 1.0;
        self.assemble(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::linalg::trace_product;

    #[test]
    fn orthonormal_and_consistent() {
        for d in [1, 2, 3, 4] {
            let b = HermitianBasis::new(d);
            let elems: Vec<CMatrix> = (0..b.len()).map(|k| b.element(k)).collect();
            for (i, ei) in elems.iter().enumerate() {
                assert!((ei - ei.adjoint()).norm() < 1e-15);
                let coords = b.coords(ei);
                for (j, ej) in elems.iter().enumerate() {
                    let ip = trace_product(ei, ej);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - want).abs() < 1e-12 && ip.im.abs() < 1e-12);
                    assert!((coords[j] - want).abs() < 1e-12);
                }
            }
        }
    }
}
