//! Haar-like random states, unitaries and Hermitian matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::SubsystemLayout;
use super::linalg::{CMatrix, CVector, C64};
use super::state::{DensityOperator, PureStateVector};
use crate::error::Result;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_pure_state<R: Rng + ?Sized>(layout: SubsystemLayout, rng: &mut R) -> Result<PureStateVector> {
    let d = layout.total_dim();
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    PureStateVector::normalized(v, layout)
}

/// `G G† / tr` for a `d × rank` Ginibre matrix; full rank when `rank ≥ d`.
pub fn random_density<R: Rng + ?Sized>(
    layout: SubsystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let d = layout.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = super::linalg::hermitize(&m.unscale(tr));
    Ok(DensityOperator::from_parts(m, layout))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}
