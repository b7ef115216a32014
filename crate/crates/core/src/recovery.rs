//! Recovery channels: Petz and rotated Petz maps, the recovery-fidelity
//! bound on conditional mutual information, and two-step reconstructions of
//! tripartite states from their middle marginal.

use rayon::prelude::*;
use serde::Serialize;

use crate::edgeham::EdgeState;
use crate::entropy::conditional_mutual_information;
use crate::error::{Error, Result};
use crate::qla::linalg::{eigh, eigvalsh, hermitize, reassemble};
use crate::qla::{
    fidelity, trace_norm_distance, CMatrix, DensityOperator, QuantumState, SubsystemLayout, C64,
    MAX_DENSITY_DIM, SUPPORT_TOL,
};

/// Tolerance for Choi positivity, trace preservation and marginal checks.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Eigenvalues of `ρ_BC` below this are dropped from its complex powers.
const POWER_CLIP: f64 = 1e-14;

/// A CPTP map in Kraus form plus an optional replacement branch
/// `X ↦ tr(P X) τ`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    input: SubsystemLayout,
    output: SubsystemLayout,
    kraus: Vec<CMatrix>,
    replacement: Option<(CMatrix, CMatrix)>,
    label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub min_choi_eigenvalue: f64,
    pub trace_preservation_defect: f64,
}

impl QuantumChannel {
    pub fn new(
        input: SubsystemLayout,
        output: SubsystemLayout,
        kraus: Vec<CMatrix>,
        replacement: Option<(CMatrix, CMatrix)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let (di, dout) = (input.total_dim(), output.total_dim());
        if kraus.iter().any(|k| k.nrows() != dout || k.ncols() != di) {
            return Err(Error::domain("Kraus operator shape does not match layouts"));
        }
        if let Some((p, tau)) = &replacement {
            if p.nrows() != di || p.ncols() != di || tau.nrows() != dout || tau.ncols() != dout {
                return Err(Error::domain("replacement branch shape does not match layouts"));
            }
        }
        let ch = Self { input, output, kraus, replacement, label: label.into() };
        let defect = ch.trace_preservation_defect();
        if defect > CHANNEL_TOL {
            return Err(Error::domain(format!("map is not trace preserving (defect {defect:.3e})")));
        }
        Ok(ch)
    }

    pub fn input(&self) -> &SubsystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SubsystemLayout {
        &self.output
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `max |Σ K†K + P - I|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let di = self.input.total_dim();
        let mut s = -CMatrix::identity(di, di);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        if let Some((p, tau)) = &self.replacement {
            s += p * tau.trace();
        }
        s.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `J = Σ_ij |i⟩⟨j| ⊗ Δ(|i⟩⟨j|)`, rows indexed by (input, output).
    pub fn choi(&self) -> Result<CMatrix> {
        let (di, dout) = (self.input.total_dim(), self.output.total_dim());
        let n = di * dout;
        if n > MAX_DENSITY_DIM {
            return Err(Error::Resource { what: "Choi matrix".into(), requested: n, limit: MAX_DENSITY_DIM });
        }
        let mut j = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let v = CMatrix::from_fn(n, 1, |r, _| k[(r % dout, r / dout)]);
            j += &v * v.adjoint();
        }
        if let Some((p, tau)) = &self.replacement {
            j += p.transpose().kronecker(tau);
        }
        Ok(j)
    }

    /// Choi positivity and trace preservation, failing beyond
    /// [`CHANNEL_TOL`].
    pub fn validate(&self) -> Result<ChannelCheck> {
        let j = self.choi()?;
        let check = ChannelCheck {
            min_choi_eigenvalue: eigvalsh(&hermitize(&j))[0],
            trace_preservation_defect: choi_tp_defect(&j, self.input.total_dim(), self.output.total_dim()),
        };
        if check.min_choi_eigenvalue < -CHANNEL_TOL || check.trace_preservation_defect > CHANNEL_TOL {
            return Err(Error::domain(format!("invalid channel: {check:?}")));
        }
        Ok(check)
    }

    /// Applies the map to an operator on the input space.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.apply_with_spectator(x, 1)
    }

    fn apply_with_spectator(&self, x: &CMatrix, ds: usize) -> Result<CMatrix> {
        let (di, dout) = (self.input.total_dim(), self.output.total_dim());
        if x.nrows() != ds * di || x.ncols() != ds * di {
            return Err(Error::domain("operator does not match channel input"));
        }
        let id = CMatrix::identity(ds, ds);
        let mut out = CMatrix::zeros(ds * dout, ds * dout);
        for k in &self.kraus {
            let big = id.kronecker(k);
            out += &big * x * big.adjoint();
        }
        if let Some((p, tau)) = &self.replacement {
            let z = x * id.kronecker(p);
            let y = CMatrix::from_fn(ds, ds, |s, s2| (0..di).map(|i| z[(s * di + i, s2 * di + i)]).sum());
            out += y.kronecker(tau);
        }
        Ok(out)
    }

    /// Applies the map to `sites` of `rho`. The result lists the untouched
    /// sites first, in their original order, followed by the output sites.
    pub fn apply_to_subsystem(&self, rho: &DensityOperator, sites: &[usize]) -> Result<DensityOperator> {
        let layout = rho.layout();
        layout.check_sites(sites)?;
        let dims: Vec<usize> = sites.iter().map(|&s| layout.site_dims()[s]).collect();
        if dims != self.input.site_dims() {
            return Err(Error::domain("sites do not match the channel input"));
        }
        let spectators = layout.complement(sites);
        let mut order = spectators.clone();
        order.extend_from_slice(sites);
        let x = rho.reduce_ordered(&order)?;
        let ds = layout.dim_of(&spectators);
        let out_dim = ds * self.output.total_dim();
        if out_dim > MAX_DENSITY_DIM {
            return Err(Error::Resource { what: "channel output".into(), requested: out_dim, limit: MAX_DENSITY_DIM });
        }
        let out = self.apply_with_spectator(x.matrix(), ds)?;
        let out_layout = if spectators.is_empty() {
            self.output.clone()
        } else {
            layout.restrict(&spectators)?.concat(&self.output)
        };
        Ok(DensityOperator::from_parts(hermitize(&out), out_layout))
    }
}

fn choi_tp_defect(j: &CMatrix, di: usize, dout: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..di {
        for i2 in 0..di {
            let s: C64 = (0..dout).map(|o| j[(i * dout + o, i2 * dout + o)]).sum();
            let want = if i == i2 { 1.0 } else { 0.0 };
            worst = worst.max((s - want).norm());
        }
    }
    worst
}

/// Petz map `Δ(X) = ρ_BC^{1/2} (ρ_B^{-1/2} X ρ_B^{-1/2} ⊗ I_C) ρ_BC^{1/2}`
/// with pseudo-inverses. Inputs outside the support of `ρ_B` are replaced by
/// `ρ_BC`. The `B` sites of `ρ_BC` come first.
pub fn petz_map(rho_b: &DensityOperator, rho_bc: &DensityOperator) -> Result<QuantumChannel> {
    rotated_petz_map(rho_b, rho_bc, 0.0)
}

/// `Δ_t(X) = ρ_BC^{(1+it)/2} (ρ_B^{-(1+it)/2} X ρ_B^{-(1-it)/2} ⊗ I_C) ρ_BC^{(1-it)/2}`.
pub fn rotated_petz_map(rho_b: &DensityOperator, rho_bc: &DensityOperator, t: f64) -> Result<QuantumChannel> {
    if !t.is_finite() {
        return Err(Error::domain("rotation parameter must be finite"));
    }
    let nb = rho_b.layout().num_sites();
    let bc = rho_bc.layout();
    if bc.num_sites() <= nb || bc.site_dims()[..nb] != *rho_b.layout().site_dims() {
        return Err(Error::domain("ρ_BC must start with the sites of ρ_B and extend them"));
    }
    let marginal = rho_bc.reduce_ordered(&(0..nb).collect::<Vec<_>>())?;
    let mismatch = (marginal.matrix() - rho_b.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if mismatch > CHANNEL_TOL {
        return Err(Error::domain(format!("ρ_B is not the marginal of ρ_BC (deviation {mismatch:.3e})")));
    }
    let db = rho_b.dim();
    let dc = rho_bc.dim() / db;
    let (lb, vb) = eigh(rho_b.matrix());
    let inv: Vec<C64> = lb
        .iter()
        .map(|&l| if l > SUPPORT_TOL { C64::from_polar(l.powf(-0.5), -0.5 * t * l.ln()) } else { C64::new(0.0, 0.0) })
        .collect();
    let kernel: Vec<C64> = lb.iter().map(|&l| C64::new(if l > SUPPORT_TOL { 0.0 } else { 1.0 }, 0.0)).collect();
    let f = reassemble(&inv, &vb);
    let (lbc, vbc) = eigh(rho_bc.matrix());
    let pw: Vec<C64> = lbc
        .iter()
        .map(|&l| if l > POWER_CLIP { C64::from_polar(l.sqrt(), 0.5 * t * l.ln()) } else { C64::new(0.0, 0.0) })
        .collect();
    let g = reassemble(&pw, &vbc);
    let k = g * f.kronecker(&CMatrix::identity(dc, dc));
    let kraus = (0..dc)
        .map(|c| CMatrix::from_fn(db * dc, db, |o, i| k[(o, i * dc + c)]))
        .collect();
    let replacement = kernel
        .iter()
        .any(|z| z.re > 0.0)
        .then(|| (reassemble(&kernel, &vb), rho_bc.matrix().clone()));
    let label = if t == 0.0 { "petz".to_string() } else { format!("rotated-petz(t={t})") };
    QuantumChannel::new(rho_b.layout().clone(), bc.clone(), kraus, replacement, label)
}

/// Default rotation grid `{-5, -4.75, …, 5}`.
pub fn default_t_grid() -> Vec<f64> {
    (-20..=20).map(|k| 0.25 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FawziRennerRecord {
    pub cmi: f64,
    pub petz_fidelity: f64,
    pub best_fidelity: f64,
    pub best_t: f64,
    /// `-2 ln F` at the best grid point.
    pub recovery_bound: f64,
    pub bound_satisfied: bool,
    /// `"satisfied"` or `"unwitnessed"`.
    pub status: String,
}

/// Compares `I(A:C|B)` with `-2 ln F(ρ_ABC, Δ_t(ρ_AB))` over rotated Petz
/// maps on the grid.
pub fn fawzi_renner_check<S: QuantumState + ?Sized>(
    state: &S,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    t_grid: &[f64],
) -> Result<FawziRennerRecord> {
    if t_grid.is_empty() {
        return Err(Error::domain("empty rotation grid"));
    }
    let cmi = conditional_mutual_information(state, a, b, c)?;
    let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let target = state.reduce_ordered(&abc)?;
    let rho_ab = state.reduce_ordered(&ab)?;
    let rho_b = state.reduce_ordered(b)?;
    let rho_bc = state.reduce_ordered(&bc)?;
    let b_local: Vec<usize> = (a.len()..a.len() + b.len()).collect();
    let fids: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let ch = rotated_petz_map(&rho_b, &rho_bc, t)?;
            let out = ch.apply_to_subsystem(&rho_ab, &b_local)?;
            Ok((t, fidelity(&target, &out)?))
        })
        .collect::<Result<_>>()?;
    let petz_fidelity = match fids.iter().find(|(t, _)| *t == 0.0) {
        Some(&(_, f)) => f,
        None => {
            let out = petz_map(&rho_b, &rho_bc)?.apply_to_subsystem(&rho_ab, &b_local)?;
            fidelity(&target, &out)?
        }
    };
    let &(best_t, best_fidelity) = fids
        .iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty grid");
    let recovery_bound = -2.0 * best_fidelity.min(1.0).ln();
    let bound_satisfied = cmi >= recovery_bound - 1e-7;
    Ok(FawziRennerRecord {
        cmi,
        petz_fidelity,
        best_fidelity,
        best_t,
        recovery_bound,
        bound_satisfied,
        status: if bound_satisfied { "satisfied" } else { "unwitnessed" }.to_string(),
    })
}

/// Applies `Δ₂ ∘ Δ₁` to `ρ_B`, where `ρ_B` lists the `B₁` sites before the
/// `B₂` sites, `Δ₁: B₁ → B₁A` and `Δ₂: B₂ → B₂C`. The result is ordered
/// `A, B₁, B₂, C`.
pub fn chain_channels(rho_b: &DensityOperator, delta1: &QuantumChannel, delta2: &QuantumChannel) -> Result<DensityOperator> {
    let n1 = delta1.input().num_sites();
    let n2 = delta2.input().num_sites();
    if rho_b.layout().num_sites() != n1 + n2 {
        return Err(Error::domain("ρ_B must consist of exactly the B₁ and B₂ sites"));
    }
    if delta1.output().site_dims()[..n1] != *delta1.input().site_dims()
        || delta2.output().site_dims()[..n2] != *delta2.input().site_dims()
    {
        return Err(Error::domain("channels must keep their input factor first in the output"));
    }
    let b1: Vec<usize> = (0..n1).collect();
    // Layout after the first map: B₂, B₁, A.
    let step = delta1.apply_to_subsystem(rho_b, &b1)?;
    let na = delta1.output().num_sites() - n1;
    let order: Vec<usize> = (n2 + n1..n2 + n1 + na).chain(n2..n2 + n1).chain(0..n2).collect();
    let step = step.reduce_ordered(&order)?;
    let b2: Vec<usize> = (na + n1..na + n1 + n2).collect();
    delta2.apply_to_subsystem(&step, &b2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionDiagnostics {
    /// `‖ρ̃′_AB - ρ_AB‖₁`.
    pub d_ab: f64,
    /// `‖ρ̃′_BC - ρ_BC‖₁`.
    pub d_bc: f64,
    pub cmi_reconstructed: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Ordered as the concatenation `a, b1, b2, c` of the input site lists.
    pub state: DensityOperator,
    pub diagnostics: ReconstructionDiagnostics,
}

/// `Δ_{B₂→B₂C} ∘ Δ_{B₁→AB₁}(ρ_B)` with Petz maps built from `ρ`.
pub fn chained_reconstruction<S: QuantumState + ?Sized>(
    state: &S,
    a: &[usize],
    b1: &[usize],
    b2: &[usize],
    c: &[usize],
) -> Result<Reconstruction> {
    let all: Vec<usize> = a.iter().chain(b1).chain(b2).chain(c).copied().collect();
    let target = state.reduce_ordered(&all)?;
    let cat = |x: &[usize], y: &[usize]| x.iter().chain(y).copied().collect::<Vec<_>>();
    let b: Vec<usize> = cat(b1, b2);
    let delta1 = petz_map(&state.reduce_ordered(b1)?, &state.reduce_ordered(&cat(b1, a))?)?;
    let delta2 = petz_map(&state.reduce_ordered(b2)?, &state.reduce_ordered(&cat(b2, c))?)?;
    let recon = chain_channels(&state.reduce_ordered(&b)?, &delta1, &delta2)?;
    let (na, nb, nc) = (a.len(), b.len(), c.len());
    let ab: Vec<usize> = (0..na + nb).collect();
    let bc: Vec<usize> = (na..na + nb + nc).collect();
    let la: Vec<usize> = (0..na).collect();
    let lb: Vec<usize> = (na..na + nb).collect();
    let lc: Vec<usize> = (na + nb..na + nb + nc).collect();
    let diagnostics = ReconstructionDiagnostics {
        d_ab: trace_norm_distance(recon.reduce_ordered(&ab)?.matrix(), target.reduce_ordered(&ab)?.matrix())?,
        d_bc: trace_norm_distance(recon.reduce_ordered(&bc)?.matrix(), target.reduce_ordered(&bc)?.matrix())?,
        cmi_reconstructed: conditional_mutual_information(&recon, &la, &lb, &lc)?,
        fidelity: fidelity(&target, &recon)?,
    };
    Ok(Reconstruction { state: recon, diagnostics })
}

/// Blocks `(A, B₁, B₂, C)` of an `m`-block ring: `A = X_1`, `B₁` its two
/// neighbours, `B₂` the next two, `C` the rest. Rings of 4 or 5 blocks use
/// single-block `B₁ = X_2` and `B₂ = X_m`.
pub fn reconstruction_split(m: usize) -> Result<[Vec<usize>; 4]> {
    match m {
        0..=3 => Err(Error::domain("reconstruction needs at least 4 blocks")),
        4 | 5 => Ok([vec![0], vec![1], vec![m - 1], (2..m - 1).collect()]),
        _ => Ok([vec![0], vec![1, m - 1], vec![2, m - 2], (3..m - 2).collect()]),
    }
}

/// Reconstruction of an edge state from the block split of
/// [`reconstruction_split`], returned in the edge's own site order. The
/// result serves as a Gibbs-fit warm start.
pub fn edge_reconstruction(edge: &EdgeState) -> Result<Reconstruction> {
    let [a, b1, b2, c] = reconstruction_split(edge.num_blocks())?;
    let (sa, sb1, sb2, sc) = (edge.sites_of(&a), edge.sites_of(&b1), edge.sites_of(&b2), edge.sites_of(&c));
    let rec = chained_reconstruction(edge.rho(), &sa, &sb1, &sb2, &sc)?;
    let listed: Vec<usize> = sa.iter().chain(&sb1).chain(&sb2).chain(&sc).copied().collect();
    let mut order = vec![0; listed.len()];
    for (pos, &site) in listed.iter().enumerate() {
        order[site] = pos;
    }
    Ok(Reconstruction {
        state: rec.state.reduce_ordered(&order)?,
        diagnostics: rec.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::linalg::apply_fn;
    use crate::qla::random::random_density;
    use crate::qla::{relative_entropy, UnnormalizedPositiveOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Diagonal state of a binary Markov chain `p(x_1) Π p(x_{k+1} | x_k)`.
    fn markov_chain(n: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
        let p0: f64 = rng.random_range(0.2..0.8);
        let trans: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)]).collect();
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

    #[test]
    fn petz_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho_bc = random_density(SubsystemLayout::qubits(3), 8, &mut rng).unwrap();
        let rho_b = rho_bc.reduce_ordered(&[0]).unwrap();
        let ch = petz_map(&rho_b, &rho_bc).unwrap();
        ch.validate().unwrap();
        let x = random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap();
        let inv_sqrt = apply_fn(rho_b.matrix(), |l| l.powf(-0.5));
        let sqrt_bc = apply_fn(rho_bc.matrix(), f64::sqrt);
        let inner = (&inv_sqrt * x.matrix() * &inv_sqrt).kronecker(&CMatrix::identity(4, 4));
        let want = &sqrt_bc * inner * &sqrt_bc;
        assert!((ch.apply(x.matrix()).unwrap() - want).norm() < 1e-12);
        let t0 = rotated_petz_map(&rho_b, &rho_bc, 0.0).unwrap();
        assert!((t0.choi().unwrap() - ch.choi().unwrap()).norm() < 1e-10);
        for t in [-3.0, 0.7] {
            rotated_petz_map(&rho_b, &rho_bc, t).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn markov_state_is_recovered_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = markov_chain(3, &mut rng);
        for t in [0.0, 1.5] {
            let rec = fawzi_renner_check(&rho, &[0], &[1], &[2], &[t]).unwrap();
            assert!(rec.cmi.abs() < 1e-12);
            assert!((rec.best_fidelity - 1.0).abs() < 1e-9, "{rec:?}");
            assert!(rec.bound_satisfied);
        }
    }

    #[test]
    fn rank_deficient_marginal_uses_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pure_b = DensityOperator::diagonal(&[1.0, 0.0], SubsystemLayout::qubits(1)).unwrap();
        let c = random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap();
        let rho_bc = pure_b.tensor(&c).unwrap();
        let ch = petz_map(&pure_b, &rho_bc).unwrap();
        let check = ch.validate().unwrap();
        assert!(check.min_choi_eigenvalue > -1e-12);
        let flipped = DensityOperator::diagonal(&[0.0, 1.0], SubsystemLayout::qubits(1)).unwrap();
        let out = ch.apply(flipped.matrix()).unwrap();
        assert!((out - rho_bc.matrix()).norm() < 1e-12);
    }

    #[test]
    fn rotation_grid_improves_on_petz() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(SubsystemLayout::qubits(6), 64, &mut rng).unwrap();
        let rec = fawzi_renner_check(&rho, &[0, 1], &[2, 3], &[4, 5], &default_t_grid()).unwrap();
        assert!(rec.best_fidelity >= rec.petz_fidelity - 1e-12);
        assert!(rec.best_fidelity <= 1.0 + 1e-10);
        assert!(rec.bound_satisfied, "{rec:?}");
    }

    #[test]
    fn channels_contract_relative_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho_bc = random_density(SubsystemLayout::qubits(3), 4, &mut rng).unwrap();
        let ch = rotated_petz_map(&rho_bc.reduce_ordered(&[0]).unwrap(), &rho_bc, 0.5).unwrap();
        for _ in 0..5 {
            let r = random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap();
            let s = random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap();
            let before = relative_entropy(&r, &UnnormalizedPositiveOperator::from_density(&s)).unwrap();
            let wrap = |m: CMatrix| DensityOperator::new(m, SubsystemLayout::qubits(3)).unwrap();
            let (dr, ds) = (wrap(ch.apply(r.matrix()).unwrap()), wrap(ch.apply(s.matrix()).unwrap()));
            let after = relative_entropy(&dr, &UnnormalizedPositiveOperator::from_density(&ds)).unwrap();
            assert!(after <= before + 1e-8);
        }
    }

    #[test]
    fn reconstruction_of_product_and_markov_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let parts: Vec<_> = (0..4)
            .map(|_| random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap())
            .collect();
        let prod = parts[1..].iter().fold(parts[0].clone(), |acc, p| acc.tensor(p).unwrap());
        let rec = chained_reconstruction(&prod, &[0], &[1], &[2], &[3]).unwrap();
        assert!((rec.state.matrix() - prod.matrix()).norm() < 1e-12);

        let chain = markov_chain(4, &mut rng);
        let rec = chained_reconstruction(&chain, &[0], &[1], &[2], &[3]).unwrap();
        let d = rec.diagnostics;
        assert!(d.d_ab <= 1e-9 && d.d_bc <= 1e-9 && d.cmi_reconstructed.abs() <= 1e-9, "{d:?}");
        assert!((rec.state.matrix() - chain.matrix()).norm() < 1e-10);
        let edge = EdgeState::new(chain.clone(), &[1, 1, 1, 1], true).unwrap();
        let er = edge_reconstruction(&edge).unwrap();
        let direct = chained_reconstruction(&chain, &[0], &[1], &[3], &[2]).unwrap();
        let reordered = direct.state.reduce_ordered(&[0, 1, 3, 2]).unwrap();
        assert!((er.state.matrix() - reordered.matrix()).norm() < 1e-12);
    }

    #[test]
    fn marginal_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho_bc = random_density(SubsystemLayout::qubits(2), 4, &mut rng).unwrap();
        let other = random_density(SubsystemLayout::qubits(1), 2, &mut rng).unwrap();
        assert!(petz_map(&other, &rho_bc).is_err());
    }
}
