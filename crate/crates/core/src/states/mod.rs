//! Reference states: product, GHZ, cluster, toric code and low-depth
//! circuit states, plus a stabilizer entropy oracle and binary export.

mod circuit;
mod export;
pub mod stabilizer;
mod toric;

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::qla::{CMatrix, CVector, PureStateVector, SubsystemLayout, C64, NORM_TOL};

pub use circuit::{apply_gate, bond_colouring, random_low_depth_state, CircuitSpec, Gate};
pub use export::{read_amplitudes, write_amplitudes};
pub use toric::{toric_code_state, Anyon, AnyonFluxLabel, FluxSpec, LoopDirection, LoopOperators};

/// Tensor product of normalized local vectors.
pub fn product_state(layout: SubsystemLayout, locals: &[CVector]) -> Result<PureStateVector> {
    if locals.len() != layout.num_sites() {
        return Err(Error::domain("one local vector per site is required"));
    }
    let mut psi = CVector::from_element(1, C64::new(1.0, 0.0));
    for (k, v) in locals.iter().enumerate() {
        if v.len() != layout.site_dims()[k] {
            return Err(Error::domain(format!("local vector {k} has the wrong dimension")));
        }
        if (v.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("local vector {k} is not normalized")));
        }
        psi = psi.kronecker(v);
    }
    PureStateVector::new(psi, layout)
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> Result<PureStateVector> {
    if n == 0 {
        return Err(Error::domain("GHZ state needs at least one qubit"));
    }
    let layout = SubsystemLayout::qubits(n);
    let mut psi = CVector::zeros(layout.total_dim());
    psi[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    psi[layout.total_dim() - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    PureStateVector::new(psi, layout)
}

fn check_qubit_count(n: usize, what: &str) -> Result<()> {
    if n > 18 {
        return Err(Error::Resource {
            what: what.into(),
            requested: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            limit: crate::qla::MAX_VECTOR_DIM,
        });
    }
    Ok(())
}

/// `∏_{bonds} CZ |+⟩^{⊗N}` on a site lattice.
pub fn cluster_state(geom: &LatticeGeometry) -> Result<PureStateVector> {
    if geom.is_edge_lattice() {
        return Err(Error::domain("cluster states live on site lattices"));
    }
    let n = geom.num_sites();
    check_qubit_count(n, "cluster state")?;
    let masks: Vec<usize> = geom
        .bonds()
        .iter()
        .map(|&(a, b)| (1usize << (n - 1 - a)) | (1usize << (n - 1 - b)))
        .collect();
    let amp = (0.5f64).powf(n as f64 / 2.0);
    let psi = CVector::from_fn(1 << n, |i, _| {
        let flips = masks.iter().filter(|&&m| i & m == m).count();
        C64::new(if flips % 2 == 1 { -amp } else { amp }, 0.0)
    });
    PureStateVector::new(psi, SubsystemLayout::qubits(n))
}

/// Hadamard layer followed by one `CZ` layer per bond colour.
pub fn cluster_circuit(geom: &LatticeGeometry) -> Result<CircuitSpec> {
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[1.0, 1.0, 1.0, -1.0].map(|x| C64::new(x * FRAC_1_SQRT_2, 0.0)),
    );
    let mut cz = CMatrix::identity(4, 4);
    cz[(3, 3)] = C64::new(-1.0, 0.0);
    let mut layers = vec![(0..geom.num_sites())
        .map(|s| Gate {
            sites: vec![s],
            unitary: h.clone(),
        })
        .collect::<Vec<_>>()];
    for class in bond_colouring(geom) {
        layers.push(
            class
                .into_iter()
                .map(|(a, b)| Gate {
                    sites: vec![a, b],
                    unitary: cz.clone(),
                })
                .collect(),
        );
    }
    CircuitSpec::new(layers, 1, 0)
}

#[cfg(test)]
mod tests {
    use super::stabilizer::*;
    use super::*;
    use crate::lattice::{cylinder_bands, levin_wen_regions};
    use crate::qla::{partial_trace, QuantumState};

    fn dense_entropy(psi: &PureStateVector, region: &[usize]) -> f64 {
        crate::qla::entropy_of_spectrum(&psi.region_spectrum(region).unwrap()).unwrap()
    }

    #[test]
    fn ghz_single_site() {
        let g = ghz_state(3).unwrap();
        assert!((dense_entropy(&g, &[1]) - 2f64.ln()).abs() < 1e-12);
        let stab = ghz_stabilizers(3).unwrap();
        assert!(stab.max_residual(&g) < 1e-12);
    }

    #[test]
    fn product_rejects_unnormalized() {
        let l = SubsystemLayout::qubits(2);
        let v = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(product_state(l, &[v.clone(), v]).is_err());
    }

    #[test]
    fn cluster_ring_blocks_and_circuit() {
        let g = LatticeGeometry::ring(8).unwrap();
        let psi = cluster_state(&g).unwrap();
        let stab = cluster_stabilizers(&g).unwrap();
        assert!(stab.max_residual(&psi) < 1e-12);
        for k in 2..=6 {
            let block: Vec<usize> = (0..k).collect();
            assert!((dense_entropy(&psi, &block) - 2.0 * 2f64.ln()).abs() < 1e-10);
            assert!((stab.entropy(&block) - 2.0 * 2f64.ln()).abs() < 1e-12);
        }
        let circ = cluster_circuit(&g).unwrap();
        assert_eq!(circ.depth - 1, 2);
        let via = random_low_depth_state(SubsystemLayout::qubits(8), &circ).unwrap();
        assert!((via.inner(&psi).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toric_mes_are_stabilizer_states() {
        let g = LatticeGeometry::toric_torus(3, 3).unwrap();
        for dir in [LoopDirection::X, LoopDirection::Y] {
            for a in Anyon::ALL {
                let psi = toric_code_state(&g, &FluxSpec::Definite(a), dir).unwrap();
                let stab = toric_stabilizers(&g, a, dir).unwrap();
                assert!(stab.max_residual(&psi) < 1e-10, "{a:?} {dir:?}");
            }
        }
        let psi = toric_code_state(&g, &FluxSpec::Definite(Anyon::One), LoopDirection::X).unwrap();
        let stab = toric_stabilizers(&g, Anyon::One, LoopDirection::X).unwrap();
        let t = levin_wen_regions(&g, 1).unwrap();
        let abc = t.union().to_vec();
        assert!((dense_entropy(&psi, &abc) - stab.entropy(&abc)).abs() < 1e-10);
        assert!((stab.entropy(&abc) - 6.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn toric_cylinder_sectors() {
        let g = LatticeGeometry::toric_cylinder(3, 3).unwrap();
        assert!(toric_code_state(&g, &FluxSpec::Definite(Anyon::E), LoopDirection::X).is_err());
        let one = toric_code_state(&g, &FluxSpec::Definite(Anyon::One), LoopDirection::X).unwrap();
        let m = toric_code_state(&g, &FluxSpec::Definite(Anyon::M), LoopDirection::X).unwrap();
        assert!(one.inner(&m).unwrap().norm() < 1e-12);
        let bands = cylinder_bands(&g, 0.5, 2.0, 3).unwrap();
        let x = bands.x.union().to_vec();
        for (psi, a) in [(&one, Anyon::One), (&m, Anyon::M)] {
            let stab = toric_stabilizers(&g, a, LoopDirection::X).unwrap();
            assert!(stab.max_residual(psi) < 1e-10);
            assert!((dense_entropy(psi, &x) - 4.0 * 2f64.ln()).abs() < 1e-10);
        }
        let yyp: Vec<usize> = bands.y.sites.iter().chain(&bands.y_prime.sites).copied().collect();
        let r1 = partial_trace(&one, &yyp).unwrap();
        let rm = partial_trace(&m, &yyp).unwrap();
        let overlap = (r1.matrix() * rm.matrix()).norm();
        assert!(overlap < 1e-10);
    }

    #[test]
    fn toric_overflow() {
        let g = LatticeGeometry::toric_torus(4, 3).unwrap();
        assert!(matches!(
            toric_code_state(&g, &FluxSpec::Definite(Anyon::One), LoopDirection::X),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn low_depth_determinism_and_depth_zero() {
        let g = LatticeGeometry::ring(6).unwrap();
        let a = CircuitSpec::brickwork(&g, 2, 7).unwrap();
        let b = CircuitSpec::brickwork(&g, 2, 7).unwrap();
        a.check_locality(&g).unwrap();
        let l = SubsystemLayout::qubits(6);
        let pa = random_low_depth_state(l.clone(), &a).unwrap();
        let pb = random_low_depth_state(l.clone(), &b).unwrap();
        assert_eq!(pa, pb);
        let zero = CircuitSpec::new(vec![], 1, 0).unwrap();
        let p0 = random_low_depth_state(l, &zero).unwrap();
        assert!((0..6).all(|s| dense_entropy(&p0, &[s]) < 1e-14));
        let overlap = vec![vec![
            Gate { sites: vec![0, 1], unitary: CMatrix::identity(4, 4) },
            Gate { sites: vec![1, 2], unitary: CMatrix::identity(4, 4) },
        ]];
        assert!(CircuitSpec::new(overlap, 1, 0).is_err());
    }
}
