//! Entanglement spectra under cutoffs, doubled spectra and the comparison of
//! a boundary band's doubled spectrum with the spectrum of the edge.

use std::io::Write;

use serde::Serialize;

use crate::edgeham::{build_edge_hamiltonian, EdgeState};
use crate::entropy::mutual_information;
use crate::error::{Error, Result};
use crate::lattice::CylinderBands;
use crate::qla::linalg::eigvalsh;
use crate::qla::{
    trace_norm_distance, CMatrix, DensityOperator, HermitianOperator, LogFloor, QuantumState, Spectrum,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffSide {
    /// Keep eigenvalues `λ ≥ 1/Λ`.
    Density,
    /// Keep eigenvalues `λ ≤ ln Λ`.
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    lambda: f64,
    side: CutoffSide,
}

impl CutoffSpec {
    /// `Λ` may be `+∞`.
    pub fn new(lambda: f64, side: CutoffSide) -> Result<Self> {
        if lambda.is_nan() || lambda <= 1.0 {
            return Err(Error::domain(format!("cutoff must exceed 1, got {lambda}")));
        }
        Ok(Self { lambda, side })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn side(&self) -> CutoffSide {
        self.side
    }

    pub fn keeps(&self, v: f64) -> bool {
        match self.side {
            CutoffSide::Density => v >= 1.0 / self.lambda,
            CutoffSide::Hamiltonian => v <= self.lambda.ln(),
        }
    }

    /// Padding value matching the side: `0` for densities, `ln Λ` for
    /// Hamiltonians.
    pub fn padding(&self) -> Padding {
        match self.side {
            CutoffSide::Density => Padding::Density,
            CutoffSide::Hamiltonian => Padding::Hamiltonian(self.lambda),
        }
    }
}

/// Filters sorted values.
pub fn cutoff_values(values: &[f64], spec: CutoffSpec) -> Vec<f64> {
    values.iter().copied().filter(|&v| spec.keeps(v)).collect()
}

pub fn cutoff_spectrum(op: &HermitianOperator, spec: CutoffSpec) -> Result<Spectrum> {
    Spectrum::new(cutoff_values(op.spectrum().values(), spec))
}

/// All pairwise sums `λ_i + λ_j`.
pub fn double_values(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().flat_map(|a| values.iter().map(move |b| a + b)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Spectrum of `H ⊗ I + I ⊗ H`.
pub fn double_spectrum(h: &HermitianOperator) -> Result<Spectrum> {
    Spectrum::new(double_values(h.spectrum().values()))
}

/// How to align spectra of different lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Padding {
    /// Lengths must agree.
    None,
    /// Sort descending and pad with `0`.
    Density,
    /// Sort ascending and pad with `ln Λ`.
    Hamiltonian(f64),
}

/// `Σ |s1_i - s2_i|` after aligned sorting and padding.
pub fn spectrum_l1_distance(s1: &[f64], s2: &[f64], padding: Padding) -> Result<f64> {
    let (mut a, mut b) = (s1.to_vec(), s2.to_vec());
    let fill = match padding {
        Padding::None => {
            if a.len() != b.len() {
                return Err(Error::domain(format!(
                    "spectra of lengths {} and {} need a padding policy",
                    a.len(),
                    b.len()
                )));
            }
            0.0
        }
        Padding::Density => 0.0,
        Padding::Hamiltonian(lambda) => lambda.ln(),
    };
    if padding == Padding::Density {
        a.sort_by(|x, y| y.total_cmp(x));
        b.sort_by(|x, y| y.total_cmp(x));
    } else {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
    }
    let n = a.len().max(b.len());
    a.resize(n, fill);
    b.resize(n, fill);
    Ok(a.iter().zip(&b).fold(0.0, |acc, (x, y)| acc + (x - y).abs()))
}

/// Which operator stands in for the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeComparator {
    /// The chain edge Hamiltonian `H_X`, compared through `e^{-H_X}`.
    EdgeHamiltonian,
    /// The exact `-ln ρ_X`.
    ExactLog,
}

/// Every link of the bound, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundLinks {
    /// `‖ρ_YY′ - ρ_Y ⊗ ρ_Y′‖₁`, at most `√(2 I(Y:Y′))`.
    pub product_defect: f64,
    /// `‖λ(ρ_YY′) - λ(ρ_Y ⊗ ρ_Y′)‖₁`, at most `product_defect`.
    pub mirsky: f64,
    /// `‖λ(ρ_X) - λ(ρ_YY′)‖₁`, zero for pure states.
    pub purity: f64,
    /// `‖ρ_Y - ρ_Y′‖₁` with `Y′` in mirrored order.
    pub mirror: f64,
    /// `‖λ(σ_X) - λ(ρ_X)‖₁` for the comparator density `σ_X`.
    pub comparator: f64,
    /// `‖λ(ρ_Y ⊗ ρ_Y) - λ(σ_X)‖₁`.
    pub density_distance: f64,
    /// The same after the density-side cutoff.
    pub cut_density_distance: f64,
    /// Aligned pairs with exactly one member above `1/Λ`.
    pub straddling: usize,
    /// `Λ (√(2I) + mirror + purity + comparator) + straddling`.
    pub final_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatch {
    pub lambda: f64,
    pub comparator: EdgeComparator,
    /// `λ^Λ` of the doubled band Hamiltonian.
    pub lhs_spectrum: Vec<f64>,
    /// `λ^Λ` of the edge operator.
    pub rhs_spectrum: Vec<f64>,
    pub l1_distance: f64,
    pub i_yy: f64,
    pub links: BoundLinks,
}

const LINK_TOL: f64 = 1e-9;
const MIRROR_TOL: f64 = 1e-8;

fn check_link(name: &str, value: f64, bound: f64) -> Result<()> {
    if value > bound + LINK_TOL * bound.abs().max(1.0) {
        return Err(Error::Analysis(format!("{name}: {value:.6e} exceeds its bound {bound:.6e}")));
    }
    Ok(())
}

fn spectrum_of(m: &CMatrix) -> Vec<f64> {
    eigvalsh(m)
}

/// Compares `λ^Λ(H_{ρ_Y} ⊗ I + I ⊗ H_{ρ_Y})` with `λ^Λ` of the edge for a
/// pure state on `Y ∪ X ∪ Y′`, asserting each link of the bound chain.
pub fn cylinder_spectrum_match<S: QuantumState + ?Sized>(
    state: &S,
    bands: &CylinderBands,
    lambda: f64,
    comparator: EdgeComparator,
) -> Result<SpectrumMatch> {
    let density_cut = CutoffSpec::new(lambda, CutoffSide::Density)?;
    let ham_cut = CutoffSpec::new(lambda, CutoffSide::Hamiltonian)?;
    let y = bands.y.to_vec();
    let yp = bands.y_prime.to_vec();
    let x = bands.x.ordered_sites();
    if y.len() + yp.len() + x.len() != state.layout().num_sites() {
        return Err(Error::domain("Y, X and Y′ must cover the whole system"));
    }
    let rho_y = state.reduce_ordered(&y)?;
    let rho_yp_mirror = state.reduce_ordered(&bands.y_prime_mirrored)?;
    let mirror = trace_norm_distance(rho_y.matrix(), rho_yp_mirror.matrix())?;
    if mirror > MIRROR_TOL {
        return Err(Error::domain(format!("state is not mirror symmetric: ‖ρ_Y − ρ_Y′‖₁ = {mirror:.3e}")));
    }
    let yyp: Vec<usize> = y.iter().chain(&yp).copied().collect();
    let rho_yyp = state.reduce_ordered(&yyp)?;
    let rho_yp = state.reduce_ordered(&yp)?;
    let product = rho_y.tensor(&rho_yp)?;
    let i_yy = mutual_information(state, &y, &yp)?;
    let product_defect = trace_norm_distance(rho_yyp.matrix(), product.matrix())?;
    let spec_yyp = spectrum_of(rho_yyp.matrix());
    let mirsky = spectrum_l1_distance(&spec_yyp, &spectrum_of(product.matrix()), Padding::None)?;

    let edge = EdgeState::from_state(state, &bands.x)?;
    let spec_x = spectrum_of(edge.rho().matrix());
    let purity = spectrum_l1_distance(&spec_x, &spec_yyp, Padding::Density)?;
    let (sigma_spec, ham_spec) = match comparator {
        EdgeComparator::ExactLog => {
            let floor = LogFloor::default();
            (spec_x.clone(), spec_x.iter().map(|&p| -floor.ln(p)).collect::<Vec<_>>())
        }
        EdgeComparator::EdgeHamiltonian => {
            let h = build_edge_hamiltonian(&edge, LogFloor::default())?.to_dense(&edge)?;
            let hs = h.spectrum().into_vec();
            (hs.iter().map(|v| (-v).exp()).collect(), hs)
        }
    };
    let comparator_defect = spectrum_l1_distance(&sigma_spec, &spec_x, Padding::None)?;

    let py = spectrum_of(rho_y.matrix());
    let doubled_density: Vec<f64> = py.iter().flat_map(|a| py.iter().map(move |b| a.max(0.0) * b.max(0.0))).collect();
    let density_distance = spectrum_l1_distance(&doubled_density, &sigma_spec, Padding::Density)?;

    let keep_d = |v: &[f64]| {
        let mut s: Vec<f64> = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (dl, dr) = (keep_d(&doubled_density), keep_d(&sigma_spec));
    let n = dl.len().max(dr.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let straddling = (0..n)
        .filter(|&i| density_cut.keeps(at(&dl, i)) != density_cut.keeps(at(&dr, i)))
        .count();
    let cut_density_distance = spectrum_l1_distance(
        &cutoff_values(&dl, density_cut),
        &cutoff_values(&dr, density_cut),
        Padding::Density,
    )?;

    let floor = LogFloor::default();
    let h_y: Vec<f64> = py.iter().map(|&p| -floor.ln(p)).collect();
    let lhs_spectrum = cutoff_values(&double_values(&h_y), ham_cut);
    let mut rhs_spectrum = cutoff_values(&ham_spec, ham_cut);
    rhs_spectrum.sort_by(f64::total_cmp);
    let l1_distance = spectrum_l1_distance(&lhs_spectrum, &rhs_spectrum, ham_cut.padding())?;

    let root = (2.0 * i_yy.max(0.0)).sqrt();
    let final_bound = lambda * (root + mirror + purity + comparator_defect) + straddling as f64;
    check_link("Pinsker", 0.5 * product_defect * product_defect, i_yy.max(0.0))?;
    check_link("Mirsky", mirsky, product_defect)?;
    check_link(
        "triangle",
        density_distance,
        mirsky + purity + mirror + comparator_defect,
    )?;
    check_link("cutoff", cut_density_distance, density_distance + straddling as f64 / lambda)?;
    check_link("log-Lipschitz", l1_distance, lambda * cut_density_distance)?;
    check_link("final", l1_distance, final_bound)?;

    Ok(SpectrumMatch {
        lambda,
        comparator,
        lhs_spectrum,
        rhs_spectrum,
        l1_distance,
        i_yy,
        links: BoundLinks {
            product_defect,
            mirsky,
            purity,
            mirror,
            comparator: comparator_defect,
            density_distance,
            cut_density_distance,
            straddling,
            final_bound,
        },
    })
}

/// Spectrum of a flux superposition on `X` against the weighted union of
/// the sector spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockStructure {
    /// `‖λ(ρ_X) - ∪_a p_a λ(ρ_X^a)‖₁`.
    pub spectrum_defect: f64,
    /// Largest `tr(ρ_X^a ρ_X^b)` over distinct sectors.
    pub max_sector_overlap: f64,
}

pub fn sector_block_structure<S: QuantumState + ?Sized, T: QuantumState>(
    mixed: &S,
    sectors: &[(f64, &T)],
    x: &[usize],
) -> Result<BlockStructure> {
    let rho: DensityOperator = mixed.reduce_ordered(x)?;
    let parts: Vec<DensityOperator> = sectors
        .iter()
        .map(|(_, s)| s.reduce_ordered(x))
        .collect::<Result<_>>()?;
    let mut union: Vec<f64> = Vec::new();
    for ((w, _), p) in sectors.iter().zip(&parts) {
        union.extend(spectrum_of(p.matrix()).iter().map(|v| w * v));
    }
    let spectrum_defect = spectrum_l1_distance(&spectrum_of(rho.matrix()), &union, Padding::Density)?;
    let mut max_sector_overlap: f64 = 0.0;
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let ov = (parts[i].matrix() * parts[j].matrix()).trace().re.abs();
            max_sector_overlap = max_sector_overlap.max(ov);
        }
    }
    Ok(BlockStructure { spectrum_defect, max_sector_overlap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub distance: f64,
    pub i_yy: f64,
}

/// Writes `lambda,distance,i_yy` rows.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p).map_err(|e| Error::domain(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::domain(format!("csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{cylinder_bands, LatticeGeometry};
    use crate::qla::random::random_hermitian;
    use crate::qla::{kron, PureStateVector, SubsystemLayout};
    use crate::states::cluster_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn herm(m: CMatrix) -> HermitianOperator {
        let n = m.nrows().trailing_zeros() as usize;
        HermitianOperator::new(m, SubsystemLayout::qubits(n)).unwrap()
    }

    #[test]
    fn cutoffs_on_both_sides() {
        let rho = DensityOperator::diagonal(&[0.5, 0.25, 0.25, 0.0], SubsystemLayout::qubits(2)).unwrap();
        let d = cutoff_spectrum(&rho.as_hermitian(), CutoffSpec::new(3.0, CutoffSide::Density).unwrap()).unwrap();
        assert_eq!(d.values(), &[0.5]);
        let h = crate::qla::matrix_log(&rho.as_hermitian(), LogFloor::default()).unwrap();
        let h = herm(-h.matrix().clone());
        let hs = cutoff_spectrum(&h, CutoffSpec::new(3.0, CutoffSide::Hamiltonian).unwrap()).unwrap();
        assert_eq!(hs.len(), 1);
        assert!((hs.values()[0] - 2f64.ln()).abs() < 1e-12);
        let all = cutoff_spectrum(&rho.as_hermitian(), CutoffSpec::new(1e300, CutoffSide::Density).unwrap()).unwrap();
        assert_eq!(all.len(), 3);
        assert!(CutoffSpec::new(1.0, CutoffSide::Density).is_err());
    }

    #[test]
    fn doubled_spectrum_matches_kronecker() {
        let a = 0.7;
        let h = herm(CMatrix::from_diagonal(&crate::qla::CVector::from_vec(vec![0.0.into(), a.into()])));
        assert_eq!(double_spectrum(&h).unwrap().values(), &[0.0, a, a, 2.0 * a]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_hermitian(4, &mut rng);
        let id = CMatrix::identity(4, 4);
        let dense = eigvalsh(&(kron(&m, &id) + kron(&id, &m)));
        let comb = double_values(&eigvalsh(&m));
        assert_eq!(comb.len(), 16);
        assert!(spectrum_l1_distance(&dense, &comb, Padding::None).unwrap() < 1e-12);
    }

    #[test]
    fn sorted_alignment_and_padding() {
        assert_eq!(spectrum_l1_distance(&[0.0, 1.0], &[1.0, 0.0], Padding::None).unwrap(), 0.0);
        assert!(spectrum_l1_distance(&[0.5], &[0.5, 0.5], Padding::None).is_err());
        assert!((spectrum_l1_distance(&[0.5, 0.5], &[0.5], Padding::Density).unwrap() - 0.5).abs() < 1e-15);
        let l = 4.0;
        let d = spectrum_l1_distance(&[0.1], &[0.1, 1.0], Padding::Hamiltonian(l)).unwrap();
        assert!((d - (l.ln() - 1.0).abs()).abs() < 1e-15);
    }

    #[test]
    fn product_cylinder_matches_exactly() {
        let g = LatticeGeometry::cylinder(3, 4).unwrap();
        let psi = PureStateVector::basis(SubsystemLayout::qubits(12), 0).unwrap();
        let bands = cylinder_bands(&g, 0.5, 2.5, 3).unwrap();
        let r = cylinder_spectrum_match(&psi, &bands, 50.0, EdgeComparator::ExactLog).unwrap();
        assert!(r.l1_distance < 1e-9, "{r:?}");
        assert_eq!(r.lhs_spectrum.len(), 1);
        // Floored logs of pure marginals cancel between pair and site terms,
        // leaving e^{-H_X} with many unit eigenvalues.
        let r = cylinder_spectrum_match(&psi, &bands, 50.0, EdgeComparator::EdgeHamiltonian).unwrap();
        assert!(r.links.comparator > 1.0);
    }

    #[test]
    fn cluster_cylinder_matches() {
        let g = LatticeGeometry::cylinder(3, 4).unwrap();
        let psi = cluster_state(&g).unwrap();
        let bands = cylinder_bands(&g, 0.5, 2.5, 3).unwrap();
        let r = cylinder_spectrum_match(&psi, &bands, 50.0, EdgeComparator::EdgeHamiltonian).unwrap();
        assert!(r.i_yy <= 1e-8);
        assert!(r.l1_distance <= 1e-3, "{r:?}");
        let r = cylinder_spectrum_match(&psi, &bands, 100.0, EdgeComparator::EdgeHamiltonian).unwrap();
        assert_eq!(r.lhs_spectrum.len(), 64);
        assert_eq!(r.rhs_spectrum.len(), 64);
        assert!(r.l1_distance <= 1e-9, "{r:?}");
        let mut buf = Vec::new();
        write_curve_csv(&[CurvePoint { lambda: 50.0, distance: r.l1_distance, i_yy: r.i_yy }], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("lambda,distance,i_yy\n50.0,"));
    }
}
