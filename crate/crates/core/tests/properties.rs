mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use topoedge::edgeham::{edge_gibbs_distance, telescoped_cmi_decomposition, EdgeState};
use topoedge::entropy::{conditional_mutual_information, region_entropy};
use topoedge::gibbsfit::{GibbsFamily, Objective, DEFAULT_KAPPA};
use topoedge::lattice::{annulus_partition, LatticeGeometry, Rect, Region, Tripartition};
use topoedge::mps::MatrixProductState;
use topoedge::qla::random::{ginibre, random_density, random_hermitian, random_pure_state};
use topoedge::qla::{
    eigvalsh, fidelity, matrix_fn, matrix_log, relative_entropy, trace_norm_distance, CMatrix, DensityOperator,
    HermitianOperator, LogFloor, QuantumState, SubsystemLayout, UnnormalizedPositiveOperator,
};
use topoedge::recovery::{fawzi_renner_check, petz_map};
use topoedge::specmatch::{double_spectrum, spectrum_l1_distance, Padding};
use topoedge::states::stabilizer::{cluster_stabilizers, toric_stabilizers};
use topoedge::states::{cluster_state, toric_code_state, Anyon, FluxSpec, LoopDirection};

fn reference(rho: &DensityOperator) -> UnnormalizedPositiveOperator {
    UnnormalizedPositiveOperator::from_density(rho)
}

fn nonzero_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|&x| x > 1e-12);
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schmidt_spectra_agree(seed in any::<u64>(), n in 2usize..=7, cut in 1usize..7) {
        prop_assume!(cut < n);
        let psi = random_pure_state(SubsystemLayout::qubits(n), &mut rng(seed)).unwrap();
        let left: Vec<usize> = (0..cut).collect();
        let right: Vec<usize> = (cut..n).collect();
        let a = nonzero_sorted(eigvalsh(psi.reduce_ordered(&left).unwrap().matrix()));
        let b = nonzero_sorted(eigvalsh(psi.reduce_ordered(&right).unwrap().matrix()));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn pinsker_holds(seed in any::<u64>(), n in 1usize..=3, rank in 1usize..=8) {
        let mut r = rng(seed);
        let sigma = full_rank(n, &mut r);
        let rho = random_density(SubsystemLayout::qubits(n), rank, &mut r).unwrap();
        let d = relative_entropy(&rho, &reference(&sigma)).unwrap();
        let t = trace_norm_distance(rho.matrix(), sigma.matrix()).unwrap();
        prop_assert!(d >= 0.5 * t * t - 1e-12, "D = {d}, ‖ρ-σ‖₁ = {t}");
    }

    #[test]
    fn relative_entropy_vanishes_only_on_equal_states(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let rho = full_rank(n, &mut r);
        prop_assert!(relative_entropy(&rho, &reference(&rho)).unwrap().abs() <= 1e-8);
        let sigma = full_rank(n, &mut r);
        let d = relative_entropy(&rho, &reference(&sigma)).unwrap();
        if d <= 1e-8 {
            prop_assert!(trace_norm_distance(rho.matrix(), sigma.matrix()).unwrap() <= 1e-4);
        }
    }

    #[test]
    fn partial_trace_commutes_with_relabelling(seed in any::<u64>(), n in 3usize..=6) {
        let mut r = rng(seed);
        let psi = random_pure_state(SubsystemLayout::qubits(n), &mut r).unwrap();
        let mut keep: Vec<usize> = (0..n).collect();
        keep.shuffle(&mut r);
        keep.truncate(r.random_range(1..n));
        let mut order: Vec<usize> = (0..keep.len()).collect();
        order.shuffle(&mut r);
        let direct = psi.reduce_ordered(&order.iter().map(|&k| keep[k]).collect::<Vec<_>>()).unwrap();
        let relabelled = psi.reduce_ordered(&keep).unwrap().permuted(&order).unwrap();
        prop_assert!(trace_norm_distance(direct.matrix(), relabelled.matrix()).unwrap() <= 1e-12);
    }

    #[test]
    fn exp_inverts_log(seed in any::<u64>(), n in 1usize..=4) {
        let rho = full_rank(n, &mut rng(seed));
        let h = matrix_log(&rho.as_hermitian(), LogFloor::default()).unwrap();
        let back = matrix_fn(&h, f64::exp);
        prop_assert!((back.matrix() - rho.matrix()).norm() <= 1e-9);
    }

    #[test]
    fn mirsky_bound(seed in any::<u64>(), d in 2usize..=8) {
        let mut r = rng(seed);
        let (a, b) = (random_hermitian(d, &mut r), random_hermitian(d, &mut r));
        let lhs = spectrum_l1_distance(&eigvalsh(&a), &eigvalsh(&b), Padding::None).unwrap();
        prop_assert!(lhs <= trace_norm_distance(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn doubled_spectrum_shape(seed in any::<u64>(), d in 2usize..=8) {
        let h = random_hermitian(d, &mut rng(seed));
        let op = HermitianOperator::new(h.clone(), SubsystemLayout::new(vec![d]).unwrap()).unwrap();
        let s = double_spectrum(&op).unwrap();
        let vals = s.values();
        prop_assert_eq!(vals.len(), d * d);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((min - 2.0 * eigvalsh(&h)[0]).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strong_subadditivity(seed in any::<u64>(), n in 3usize..=6, mixed in any::<bool>()) {
        let mut r = rng(seed);
        let layout = SubsystemLayout::qubits(n);
        let rho = if mixed {
            random_density(layout, r.random_range(1..=(1 << n)), &mut r).unwrap()
        } else {
            random_pure_state(layout, &mut r).unwrap().to_density().unwrap()
        };
        let mut sites: Vec<usize> = (0..n).collect();
        sites.shuffle(&mut r);
        let ka = r.random_range(1..n - 1);
        let kc = r.random_range(1..n - ka);
        let (a, rest) = sites.split_at(ka);
        let (c, rest) = rest.split_at(kc);
        let b = &rest[..r.random_range(0..=rest.len())];
        let cmi = conditional_mutual_information(&rho, a, b, c).unwrap();
        prop_assert!(cmi >= -1e-10, "I(A:C|B) = {cmi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cmi_chaining_identity(seed in any::<u64>(), n in 3usize..=6, k in 1usize..5) {
        prop_assume!(k + 1 < n);
        let rho = full_rank(n, &mut rng(seed));
        let s = |sites: &[usize]| region_entropy(&rho, sites).unwrap();
        let upto = |j: usize| (0..j).collect::<Vec<_>>();
        // X_1 … X_k are sites 0..k; X_{k+1} is site k.
        let lhs = s(&upto(k)) + s(&[k - 1, k]) - s(&[k - 1]);
        let cmi = conditional_mutual_information(&rho, &upto(k - 1), &[k - 1], &[k]).unwrap();
        let rhs = cmi + s(&upto(k + 1));
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn edge_identity_and_telescoping(seed in any::<u64>(), m in 4usize..=5) {
        let mut r = rng(seed);
        let sizes: Vec<usize> = (0..m).map(|k| if k < 8 - m { 2 } else { 1 }).collect();
        let n = sizes.iter().sum();
        let edge = EdgeState::new(full_rank(n, &mut r), &sizes, true).unwrap();
        let d = edge_gibbs_distance(&edge, LogFloor::default()).unwrap();
        prop_assert!((d.direct - d.conditional_sum).abs() <= 1e-8);
        let t = telescoped_cmi_decomposition(&edge).unwrap();
        prop_assert!((t.total - d.direct).abs() <= 1e-8);
    }

    #[test]
    fn objective_is_midpoint_convex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let edge = EdgeState::new(full_rank(4, &mut r), &[1, 1, 1, 1], true).unwrap();
        let fam = GibbsFamily::nearest_neighbor(&edge, DEFAULT_KAPPA).unwrap();
        let obj = Objective::new(&edge, &fam).unwrap();
        let draw = |r: &mut rand_chacha::ChaCha8Rng| (0..fam.num_params()).map(|_| r.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        let (t1, t2) = (draw(&mut r), draw(&mut r));
        let mid: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = |t: &[f64]| obj.evaluate(t).unwrap().value;
        prop_assert!(f(&mid) <= 0.5 * (f(&t1) + f(&t2)) + 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let mut r = rng(seed);
        let edge = EdgeState::new(full_rank(4, &mut r), &[1, 1, 1, 1], true).unwrap();
        let fam = GibbsFamily::nearest_neighbor(&edge, DEFAULT_KAPPA).unwrap();
        let obj = Objective::new(&edge, &fam).unwrap();
        let theta: Vec<f64> = (0..fam.num_params()).map(|_| r.random_range(-1.0..1.0)).collect();
        let g = obj.evaluate(&theta).unwrap().gradient;
        let h = 1e-5;
        for _ in 0..5 {
            let k = r.random_range(1..fam.num_params());
            let (mut p, mut q) = (theta.clone(), theta.clone());
            p[k] += h;
            q[k] -= h;
            let fd = (obj.evaluate(&p).unwrap().value - obj.evaluate(&q).unwrap().value) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1e-3), "coord {k}: fd {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn constructed_channels_are_valid(seed in any::<u64>(), nb in 1usize..=2, nc in 1usize..=2, rank in 1usize..=16) {
        let mut r = rng(seed);
        let rho_bc = random_density(SubsystemLayout::qubits(nb + nc), rank, &mut r).unwrap();
        let rho_b = rho_bc.reduce_ordered(&(0..nb).collect::<Vec<_>>()).unwrap();
        let ch = petz_map(&rho_b, &rho_bc).unwrap();
        let check = ch.validate().unwrap();
        prop_assert!(check.min_choi_eigenvalue >= -1e-9);
        prop_assert!(check.trace_preservation_defect <= 1e-9);
        let x = random_density(SubsystemLayout::qubits(nb), 2, &mut r).unwrap();
        let y = random_density(SubsystemLayout::qubits(nb), 2, &mut r).unwrap();
        let layout = SubsystemLayout::qubits(nb + nc);
        let fx = DensityOperator::new(ch.apply(x.matrix()).unwrap(), layout.clone()).unwrap();
        let fy = DensityOperator::new(ch.apply(y.matrix()).unwrap(), layout).unwrap();
        if let (Ok(before), Ok(after)) = (relative_entropy(&x, &reference(&y)), relative_entropy(&fx, &reference(&fy))) {
            prop_assert!(after <= before + 1e-8, "{after} > {before}");
        }
    }

    #[test]
    fn petz_is_exact_on_markov_states(seed in any::<u64>(), classical in any::<bool>()) {
        let mut r = rng(seed);
        let (rho, a, b, c): (DensityOperator, Vec<usize>, Vec<usize>, Vec<usize>) = if classical {
            (classical_markov_chain(4, &mut r), vec![0], vec![1, 2], vec![3])
        } else {
            (quantum_markov_state(&mut r), vec![0], vec![1, 2], vec![3])
        };
        let rec = fawzi_renner_check(&rho, &a, &b, &c, &[0.0]).unwrap();
        prop_assert!(rec.cmi <= 1e-10);
        prop_assert!(1.0 - rec.petz_fidelity <= 1e-8, "{rec:?}");
        prop_assert!(rec.petz_fidelity <= 1.0 + 1e-10);
    }

    #[test]
    fn fidelity_never_exceeds_one(seed in any::<u64>(), n in 1usize..=3, r1 in 1usize..=8, r2 in 1usize..=8) {
        let mut r = rng(seed);
        let a = random_density(SubsystemLayout::qubits(n), r1, &mut r).unwrap();
        let b = random_density(SubsystemLayout::qubits(n), r2, &mut r).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&f));
    }

    #[test]
    fn separation_predicate_is_graph_adjacency(seed in any::<u64>()) {
        let g = LatticeGeometry::torus(4, 4).unwrap();
        let mut r = rng(seed);
        let mut sites: Vec<usize> = (0..16).collect();
        sites.shuffle(&mut r);
        let ka = r.random_range(1..6);
        let kc = r.random_range(1..6);
        let a: BTreeSet<usize> = sites[..ka].iter().copied().collect();
        let c: BTreeSet<usize> = sites[ka..ka + kc].iter().copied().collect();
        let joined = g.bonds().iter().any(|&(u, v)| (a.contains(&u) && c.contains(&v)) || (a.contains(&v) && c.contains(&u)));
        let trip = Tripartition::new(
            Region::new("A", a.iter().copied(), &g).unwrap(),
            Region::new("B", sites[ka + kc..].iter().copied(), &g).unwrap(),
            Region::new("C", c.iter().copied(), &g).unwrap(),
            &g,
        );
        prop_assert_eq!(trip.is_ok(), !joined);
    }

    #[test]
    fn annulus_blocks_tile_the_annulus(l in 4usize..=7, w in 1usize..=2, m in 4usize..=8) {
        let g = LatticeGeometry::torus(l, l).unwrap();
        let inner = Rect::centre(&g);
        let Ok(chain) = annulus_partition(&g, inner, w, m) else { return Ok(()) };
        let reference = annulus_partition(&g, inner, w, 4).unwrap().union();
        let mut seen = BTreeSet::new();
        for b in &chain.blocks {
            prop_assert!(!b.is_empty());
            for s in b.to_vec() {
                prop_assert!(seen.insert(s), "site {s} in two blocks");
            }
        }
        prop_assert_eq!(seen.into_iter().collect::<Vec<_>>(), reference.to_vec());
    }

    #[test]
    fn mps_gauge_invariance(seed in any::<u64>(), bond in 1usize..=3, n in 3usize..=8) {
        let mut r = rng(seed);
        let m = MatrixProductState::random(bond, 2, n, &mut r).unwrap();
        let x = ginibre(bond, bond, &mut r) + CMatrix::identity(bond, bond);
        let g = m.gauge(&x).unwrap();
        let (a, b) = (m.reduced_first_m(n, 2).unwrap(), g.reduced_first_m(n, 2).unwrap());
        prop_assert!(trace_norm_distance(a.matrix(), b.matrix()).unwrap() <= 1e-9);
    }

    #[test]
    fn stabilizer_entropies_match_dense(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = LatticeGeometry::torus(3, 3).unwrap();
        let psi = cluster_state(&g).unwrap();
        let stab = cluster_stabilizers(&g).unwrap();
        let mut sites: Vec<usize> = (0..9).collect();
        sites.shuffle(&mut r);
        let region = &sites[..r.random_range(1..9)];
        prop_assert!((region_entropy(&psi, region).unwrap() - stab.entropy(region)).abs() <= 1e-10);
    }
}

#[test]
fn toric_states_are_stabilized() {
    let g = LatticeGeometry::toric_torus(3, 3).unwrap();
    for a in Anyon::ALL {
        let psi = toric_code_state(&g, &FluxSpec::Definite(a), LoopDirection::X).unwrap();
        let stab = toric_stabilizers(&g, a, LoopDirection::X).unwrap();
        assert!(stab.max_residual(&psi) <= 1e-10, "{a:?}");
        for region in [vec![0, 1, 2], vec![0, 4, 8, 9, 13], (0..9).collect()] {
            let dense = region_entropy(&psi, &region).unwrap();
            assert!((dense - stab.entropy(&region)).abs() <= 1e-10);
        }
    }
}
