//! Relative-entropy fits of edge states to Gibbs states of local Hamiltonians.

mod basis;
mod lbfgs;

pub use basis::HermitianBasis;
pub use lbfgs::{inf_norm, minimize as lbfgs_minimize, LbfgsOptions, LbfgsOutcome};

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::edgeham::{build_edge_hamiltonian, EdgeState, LocalHamiltonian, LocalTerm};
use crate::error::{Error, Result};
use crate::qla::linalg::{eigh, eigvalsh, reassemble, trace_product};
use crate::qla::{
    embed_matrix, von_neumann_entropy, CMatrix, DensityOperator, HermitianOperator, LogFloor,
    QuantumState, SubsystemLayout, C64,
};

pub const DEFAULT_KAPPA: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SupportPattern {
    NearestNeighbor,
    TwoBlock { ab: Vec<usize>, bc: Vec<usize> },
}

#[derive(Debug, Clone)]
struct TermLayout {
    support: Vec<usize>,
    sites: Vec<usize>,
    layout: SubsystemLayout,
    basis: HermitianBasis,
    offset: usize,
    with_identity: bool,
}

impl TermLayout {
    fn len(&self) -> usize {
        self.basis.len() - usize::from(!self.with_identity)
    }

    fn coeffs(&self, theta: &[f64]) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.basis.len());
        if !self.with_identity {
            c.push(0.0);
        }
        c.extend_from_slice(&theta[self.offset..self.offset + self.len()]);
        c
    }

    fn param_coords<'b>(&self, full: &'b [f64]) -> &'b [f64] {
        &full[usize::from(!self.with_identity)..]
    }
}

/// A family of Gibbs states `e^{-H(θ)} / Z` with `H(θ) = Σ_s h_s(θ)`, each
/// term expanded in an orthonormal Hermitian basis of its support.
#[derive(Debug, Clone)]
pub struct GibbsFamily {
    pattern: SupportPattern,
    block_sizes: Vec<usize>,
    periodic: bool,
    terms: Vec<TermLayout>,
    num_params: usize,
    kappa: f64,
    k_bound: f64,
}

impl GibbsFamily {
    /// Terms on every consecutive block pair of the chain.
    pub fn nearest_neighbor(edge: &EdgeState, kappa: f64) -> Result<Self> {
        Self::build(edge, SupportPattern::NearestNeighbor, edge.bonds().into_iter().map(|(i, j)| vec![i, j]).collect(), kappa)
    }

    /// Two terms, one on `A ∪ B` and one on `B ∪ C`.
    pub fn two_block(edge: &EdgeState, a: &[usize], b: &[usize], c: &[usize], kappa: f64) -> Result<Self> {
        let m = edge.num_blocks();
        let mut seen = vec![false; m];
        for &k in a.iter().chain(b).chain(c) {
            if k >= m || seen[k] {
                return Err(Error::domain("tripartition blocks must be distinct chain blocks"));
            }
            seen[k] = true;
        }
        if a.is_empty() || b.is_empty() || c.is_empty() {
            return Err(Error::domain("tripartition parts must be nonempty"));
        }
        let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let mut bc: Vec<usize> = b.iter().chain(c).copied().collect();
        ab.sort_unstable();
        bc.sort_unstable();
        let pattern = SupportPattern::TwoBlock { ab: ab.clone(), bc: bc.clone() };
        Self::build(edge, pattern, vec![ab, bc], kappa)
    }

    fn build(edge: &EdgeState, pattern: SupportPattern, supports: Vec<Vec<usize>>, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::domain("kappa must be positive"));
        }
        let full = edge.rho().layout();
        let mut offset = 0;
        let mut terms = Vec::with_capacity(supports.len());
        for (k, support) in supports.into_iter().enumerate() {
            let sites = edge.sites_of(&support);
            let layout = full.restrict(&sites)?;
            let basis = HermitianBasis::new(layout.total_dim());
            let t = TermLayout { support, sites, layout, basis, offset, with_identity: k == 0 };
            offset += t.len();
            terms.push(t);
        }
        Ok(Self {
            pattern,
            block_sizes: edge.block_sizes(),
            periodic: edge.periodic(),
            terms,
            num_params: offset,
            kappa,
            k_bound: kappa * full.num_sites() as f64,
        })
    }

    pub fn pattern(&self) -> &SupportPattern {
        &self.pattern
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.terms.iter().map(|t| t.support.clone()).collect()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Norm bound `K = κ N`, with `N` the number of sites on the edge.
    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    fn check(&self, edge: &EdgeState, theta: &[f64]) -> Result<()> {
        if edge.block_sizes() != self.block_sizes || edge.periodic() != self.periodic {
            return Err(Error::domain("edge state does not match the family's chain"));
        }
        if theta.len() != self.num_params {
            return Err(Error::domain(format!(
                "expected {} coefficients, got {}",
                self.num_params,
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(())
    }

    /// Local term matrices `h_s(θ)`.
    pub fn term_matrices(&self, theta: &[f64]) -> Vec<CMatrix> {
        self.terms.iter().map(|t| t.basis.assemble(&t.coeffs(theta))).collect()
    }

    /// `H(θ)` as a local Hamiltonian, without normalization.
    pub fn hamiltonian(&self, theta: &[f64]) -> LocalHamiltonian {
        let terms = self
            .terms
            .iter()
            .zip(self.term_matrices(theta))
            .map(|(t, m)| LocalTerm {
                support: t.support.clone(),
                matrix: HermitianOperator::from_parts(m, t.layout.clone()),
            })
            .collect();
        LocalHamiltonian {
            terms,
            block_sizes: self.block_sizes.clone(),
            periodic: self.periodic,
            normalization_included: false,
            log_floor: 0.0,
        }
    }

    fn dense(&self, edge: &EdgeState, theta: &[f64]) -> Result<CMatrix> {
        let layout = edge.rho().layout();
        let d = layout.total_dim();
        let mut h = CMatrix::zeros(d, d);
        for (t, m) in self.terms.iter().zip(self.term_matrices(theta)) {
            h += embed_matrix(&m, &t.sites, layout)?;
        }
        Ok(h)
    }

    /// Coefficients of a local Hamiltonian whose terms each fit inside some
    /// support of the family. Identity components are dropped.
    pub fn project(&self, h: &LocalHamiltonian) -> Result<Vec<f64>> {
        if h.block_sizes != self.block_sizes {
            return Err(Error::domain("Hamiltonian lives on a different chain"));
        }
        let mut mats: Vec<CMatrix> = self
            .terms
            .iter()
            .map(|t| CMatrix::zeros(t.basis.dim(), t.basis.dim()))
            .collect();
        for term in &h.terms {
            let host = self
                .terms
                .iter()
                .position(|t| term.support.iter().all(|b| t.support.contains(b)))
                .ok_or_else(|| Error::domain(format!("term on blocks {:?} fits no family support", term.support)))?;
            let t = &self.terms[host];
            let mut local = Vec::new();
            for b in &term.support {
                let start: usize = t
                    .support
                    .iter()
                    .take_while(|&&x| x != *b)
                    .map(|&x| self.block_sizes[x])
                    .sum();
                local.extend(start..start + self.block_sizes[*b]);
            }
            mats[host] += embed_matrix(term.matrix.matrix(), &local, &t.layout)?;
        }
        let mut theta = vec![0.0; self.num_params];
        for (t, m) in self.terms.iter().zip(&mats) {
            let mut full = t.basis.coords(m);
            full[0] = 0.0;
            theta[t.offset..t.offset + t.len()].copy_from_slice(t.param_coords(&full));
        }
        Ok(theta)
    }

    /// Rescales every term whose operator norm exceeds `K`; reports whether
    /// any term was rescaled.
    pub fn enforce_bound(&self, theta: &mut [f64]) -> bool {
        let mut active = false;
        for (t, m) in self.terms.iter().zip(self.term_matrices(theta)) {
            let v = eigvalsh(&m);
            let norm = v[0].abs().max(v[v.len() - 1].abs());
            if norm > self.k_bound * (1.0 + 1e-12) {
                let s = self.k_bound / norm;
                theta[t.offset..t.offset + t.len()].iter_mut().for_each(|x| *x *= s);
                active = true;
            }
        }
        active
    }
}

/// Cached pieces of `f(θ) = -S(ρ) + tr(ρ H(θ)) + ln tr e^{-H(θ)}`.
pub struct Objective<'a> {
    edge: &'a EdgeState,
    family: &'a GibbsFamily,
    entropy: f64,
    rho_terms: Vec<CMatrix>,
    rho_coords: Vec<f64>,
}

/// Value, gradient and normalized Gibbs state at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub log_partition: f64,
    pub sigma: DensityOperator,
}

impl<'a> Objective<'a> {
    pub fn new(edge: &'a EdgeState, family: &'a GibbsFamily) -> Result<Self> {
        family.check(edge, &vec![0.0; family.num_params])?;
        let rho_terms: Vec<CMatrix> = family
            .terms
            .iter()
            .map(|t| Ok(edge.rho().reduce_ordered(&t.sites)?.matrix().clone()))
            .collect::<Result<_>>()?;
        let rho_coords = flatten(family, &rho_terms);
        Ok(Self {
            edge,
            family,
            entropy: von_neumann_entropy(edge.rho())?,
            rho_terms,
            rho_coords,
        })
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<Evaluation> {
        self.family.check(self.edge, theta)?;
        let h = self.family.dense(self.edge, theta)?;
        let (lambda, vecs) = eigh(&h);
        let shift = lambda[0];
        let boltz: Vec<f64> = lambda.iter().map(|l| (-(l - shift)).exp()).collect();
        let z: f64 = boltz.iter().sum();
        let log_partition = z.ln() - shift;
        let energy: f64 = self
            .family
            .term_matrices(theta)
            .iter()
            .zip(&self.rho_terms)
            .map(|(m, r)| trace_product(r, m).re)
            .sum();
        let weights: Vec<C64> = boltz.iter().map(|b| C64::new(b / z, 0.0)).collect();
        let sigma = DensityOperator::from_parts(reassemble(&weights, &vecs), self.edge.rho().layout().clone());
        let sigma_terms: Vec<CMatrix> = self
            .family
            .terms
            .iter()
            .map(|t| Ok(sigma.reduce_ordered(&t.sites)?.matrix().clone()))
            .collect::<Result<_>>()?;
        let sigma_coords = flatten(self.family, &sigma_terms);
        let gradient = self.rho_coords.iter().zip(&sigma_coords).map(|(a, b)| a - b).collect();
        Ok(Evaluation {
            value: -self.entropy + energy + log_partition,
            gradient,
            log_partition,
            sigma,
        })
    }
}

fn flatten(family: &GibbsFamily, mats: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::with_capacity(family.num_params);
    for (t, m) in family.terms.iter().zip(mats) {
        out.extend_from_slice(t.param_coords(&t.basis.coords(m)));
    }
    out
}

/// `S(ρ_X ‖ e^{-H(θ)} / Z)`.
pub fn objective(edge: &EdgeState, family: &GibbsFamily, theta: &[f64]) -> Result<f64> {
    Ok(Objective::new(edge, family)?.evaluate(theta)?.value)
}

/// `∂_k f = tr(ρ_X b_k) - tr(σ(θ) b_k)`.
pub fn gradient(edge: &EdgeState, family: &GibbsFamily, theta: &[f64]) -> Result<Vec<f64>> {
    Ok(Objective::new(edge, family)?.evaluate(theta)?.gradient)
}

/// Additional starting points for [`minimize`].
#[derive(Debug, Clone)]
pub enum WarmStart {
    Hamiltonian(String, LocalHamiltonian),
    /// The edge Hamiltonian of another state on the same chain, e.g. a
    /// recovered state.
    State(String, DensityOperator),
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub lbfgs: LbfgsOptions,
    pub log_floor: LogFloor,
    pub zero_restart: bool,
    pub extra_starts: Vec<WarmStart>,
    /// Stop the remaining starts once one reaches the gradient tolerance.
    /// The objective is convex, so such a start is already optimal.
    pub stop_when_certified: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lbfgs: LbfgsOptions::default(),
            log_floor: LogFloor::default(),
            zero_restart: true,
            extra_starts: Vec::new(),
            stop_when_certified: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StartReport {
    pub label: String,
    pub initial_value: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Coefficients including the normalization folded into the first term.
    pub theta: Vec<f64>,
    /// Normalized Hamiltonian: `tr e^{-H} = 1`.
    pub hamiltonian: LocalHamiltonian,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub k_active: bool,
    pub k_bound: f64,
    pub best_start: String,
    pub starts: Vec<StartReport>,
    /// Objective along the accepted steps of the winning start.
    pub trace: Vec<f64>,
    /// Markov certificate of the edge state; empty for chains shorter than 4.
    pub certificate: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResultJson {
    pub value: f64,
    pub tee_estimate: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(rename = "K_active")]
    pub k_active: bool,
    #[serde(rename = "K")]
    pub k_bound: f64,
    pub best_start: String,
    pub certificate: Vec<f64>,
}

impl FitResult {
    pub fn tee_estimate(&self) -> f64 {
        0.5 * self.value
    }

    pub fn to_json(&self) -> FitResultJson {
        FitResultJson {
            value: self.value,
            tee_estimate: self.tee_estimate(),
            grad_norm: self.grad_norm,
            iterations: self.iterations,
            converged: self.converged,
            k_active: self.k_active,
            k_bound: self.k_bound,
            best_start: self.best_start.clone(),
            certificate: self.certificate.clone(),
        }
    }
}

/// Minimizes the objective from the edge Hamiltonian, from `θ = 0` and from
/// any extra warm starts, keeping the lowest value.
pub fn minimize(edge: &EdgeState, family: &GibbsFamily, options: &FitOptions) -> Result<FitResult> {
    let obj = Objective::new(edge, family)?;
    let mut starts = vec![(
        "edge-hamiltonian".to_string(),
        family.project(&build_edge_hamiltonian(edge, options.log_floor)?)?,
    )];
    if options.zero_restart {
        starts.push(("zero".to_string(), vec![0.0; family.num_params]));
    }
    for w in &options.extra_starts {
        let (label, h) = match w {
            WarmStart::Hamiltonian(l, h) => (l.clone(), h.clone()),
            WarmStart::State(l, rho) => {
                let other = EdgeState::new(rho.clone(), &edge.block_sizes(), edge.periodic())?;
                (l.clone(), build_edge_hamiltonian(&other, options.log_floor)?)
            }
        };
        starts.push((label, family.project(&h)?));
    }
    let certified = AtomicBool::new(false);
    let runs: Vec<(String, f64, LbfgsOutcome)> = starts
        .into_par_iter()
        .map(|(label, x0)| {
            let mut failure = None;
            let mut initial = f64::NAN;
            let out = lbfgs::minimize(
                x0,
                |x| match obj.evaluate(x) {
                    Ok(e) => (e.value, e.gradient),
                    Err(err) => {
                        failure.get_or_insert(err);
                        (f64::INFINITY, vec![0.0; x.len()])
                    }
                },
                |x| family.enforce_bound(x),
                || options.stop_when_certified && certified.load(Ordering::Relaxed),
                options.lbfgs,
            );
            if out.converged {
                certified.store(true, Ordering::Relaxed);
            }
            if let Some(first) = out.trace.first() {
                initial = *first;
            }
            match failure {
                Some(e) if !out.value.is_finite() => Err(e),
                _ => Ok((label, initial, out)),
            }
        })
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .2.value.total_cmp(&b.1 .2.value))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Fit("no starting points".into()))?;
    let reports = runs
        .iter()
        .map(|(label, init, o)| StartReport {
            label: label.clone(),
            initial_value: *init,
            value: o.value,
            iterations: o.iterations,
            converged: o.converged,
        })
        .collect();
    let (label, _, out) = &runs[best];
    let eval = obj.evaluate(&out.x)?;
    let mut theta = out.x.clone();
    let d0 = family.terms[0].basis.dim() as f64;
    theta[0] += eval.log_partition * d0.sqrt();
    let mut hamiltonian = family.hamiltonian(&theta);
    hamiltonian.normalization_included = true;
    let certificate = if edge.periodic() && edge.num_blocks() >= 4 {
        markov_certificate(edge)?
    } else {
        Vec::new()
    };
    Ok(FitResult {
        theta,
        hamiltonian,
        value: eval.value,
        grad_norm: inf_norm(&eval.gradient),
        iterations: out.iterations,
        converged: out.converged,
        k_active: runs.iter().any(|r| r.2.projection_active),
        k_bound: family.k_bound,
        best_start: label.clone(),
        starts: reports,
        trace: out.trace.clone(),
        certificate,
    })
}

/// Tripartition of an `m`-block ring used by the two-block family:
/// `A = X_1`, `B = X_2 X_3 X_{m-1} X_m`, `C` the rest (0-based blocks).
/// For `m < 6` that pattern leaves `C` empty, and `B = X_2 X_m` is used.
pub fn mbody_tripartition(m: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    match m {
        0..=3 => Err(Error::domain("two-block family needs at least 4 blocks")),
        4 | 5 => Ok((vec![0], vec![1, m - 1], (2..m - 1).collect())),
        _ => Ok((vec![0], vec![1, 2, m - 2, m - 1], (3..m - 2).collect())),
    }
}

#[derive(Debug, Clone)]
pub struct FamilyComparison {
    pub nearest_neighbor: FitResult,
    pub two_block: FitResult,
}

impl FamilyComparison {
    pub fn difference(&self) -> f64 {
        self.nearest_neighbor.value - self.two_block.value
    }
}

/// Minima over the nearest-neighbour family and the two-block family of
/// the tripartition, computed in parallel.
pub fn mbody_family_compare(
    edge: &EdgeState,
    tripartition: (&[usize], &[usize], &[usize]),
    kappa: f64,
    options: &FitOptions,
) -> Result<FamilyComparison> {
    let (a, b, c) = tripartition;
    let nn = GibbsFamily::nearest_neighbor(edge, kappa)?;
    let tb = GibbsFamily::two_block(edge, a, b, c, kappa)?;
    let (x, y) = rayon::join(|| minimize(edge, &nn, options), || minimize(edge, &tb, options));
    Ok(FamilyComparison { nearest_neighbor: x?, two_block: y? })
}

/// `I(X_{i+1} : X_{i+3} … X_{i-1} | X_{i+2})` for every `i` of a periodic
/// chain of at least 4 blocks.
pub fn markov_certificate(edge: &EdgeState) -> Result<Vec<f64>> {
    let m = edge.num_blocks();
    if !edge.periodic() || m < 4 {
        return Err(Error::domain("Markov certificate needs a periodic chain of at least 4 blocks"));
    }
    (0..m)
        .map(|i| {
            let a = [(i + 1) % m];
            let b = [(i + 2) % m];
            let c: Vec<usize> = (3..m).map(|k| (i + k) % m).collect();
            edge.cmi(&a, &b, &c)
        })
        .collect()
}
