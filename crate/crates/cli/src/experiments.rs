use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use topoedge::edgeham::{build_edge_hamiltonian, edge_gibbs_distance, telescoped_cmi_decomposition, EdgeState};
use topoedge::entropy::{tee_kitaev_preskill, tee_levin_wen};
use topoedge::gibbsfit::{
    mbody_family_compare, mbody_tripartition, minimize, FitOptions, GibbsFamily, LbfgsOptions, DEFAULT_KAPPA,
};
use topoedge::lattice::{
    annulus_partition, cylinder_bands, kitaev_preskill_regions, levin_wen_regions, LatticeGeometry, LatticeKind, Rect,
};
use topoedge::mps::{
    convergence_curve, renyi_area_fit, write_area_fit_csv, write_convergence_csv, MatrixProductState, MpsJson,
    RingOperator,
};
use topoedge::qla::random::random_pure_state;
use topoedge::qla::{LogFloor, PureStateVector, SubsystemLayout};
use topoedge::recovery::{default_t_grid, edge_reconstruction, fawzi_renner_check};
use topoedge::specmatch::{cylinder_spectrum_match, write_curve_csv, CurvePoint, EdgeComparator};
use topoedge::states::{
    cluster_state, ghz_state, product_state, random_low_depth_state, toric_code_state, Anyon, CircuitSpec, FluxSpec,
    LoopDirection,
};

use crate::config::Resolved;
use crate::CliError;

/// Result of one experiment: a JSON payload and an optional CSV curve.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> topoedge::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

pub fn run(r: &Resolved) -> Result<Outcome, CliError> {
    match r.experiment.as_str() {
        "tee" => tee(r),
        "edge-hamiltonian" => edge_hamiltonian(r),
        "gibbs-fit" => gibbs_fit(r),
        "spectrum-match" => spectrum_match(r),
        "recovery-check" => recovery_check(r),
        "mps-converge" => mps_converge(r),
        "renyi-fit" => renyi_fit(r),
        other => Err(schema(format!("unknown experiment {other}"))),
    }
}

fn model(r: &Resolved, default: &str) -> String {
    r.params.model.clone().unwrap_or_else(|| default.to_string())
}

fn flux(r: &Resolved) -> Result<FluxSpec, CliError> {
    match r.params.flux.as_deref().unwrap_or("1") {
        "uniform" => Ok(FluxSpec::uniform(&Anyon::ALL)),
        s if s.contains('+') => {
            let labels = s.split('+').map(Anyon::parse).collect::<topoedge::Result<Vec<_>>>()?;
            Ok(FluxSpec::uniform(&labels))
        }
        s => Ok(FluxSpec::Definite(Anyon::parse(s)?)),
    }
}

/// Lattice and state for a 2D (or ring) model. `cylinder` selects open
/// boundaries along y.
fn build_state(r: &Resolved, cylinder: bool) -> Result<(LatticeGeometry, PureStateVector), CliError> {
    let p = &r.params;
    let name = model(r, "toric");
    let dims = |dx: usize, dy: usize| (p.lx.unwrap_or(dx), p.ly.unwrap_or(dy));
    let plain = |dx: usize, dy: usize| -> Result<LatticeGeometry, CliError> {
        let (lx, ly) = dims(dx, dy);
        Ok(if cylinder { LatticeGeometry::cylinder(lx, ly)? } else { LatticeGeometry::torus(lx, ly)? })
    };
    let (g, psi) = match name.as_str() {
        "toric" => {
            let (lx, ly) = dims(3, 3);
            let g = if cylinder { LatticeGeometry::toric_cylinder(lx, ly)? } else { LatticeGeometry::toric_torus(lx, ly)? };
            let psi = toric_code_state(&g, &flux(r)?, LoopDirection::X)?;
            (g, psi)
        }
        "product" => {
            let g = plain(4, 4)?;
            let psi = PureStateVector::basis(SubsystemLayout::qubits(g.num_sites()), 0)?;
            (g, psi)
        }
        "random-product" => {
            let g = plain(4, 4)?;
            let mut rng = ChaCha8Rng::seed_from_u64(r.require_seed("random-product")?);
            let locals = (0..g.num_sites())
                .map(|_| Ok(random_pure_state(SubsystemLayout::qubits(1), &mut rng)?.amplitudes().clone()))
                .collect::<topoedge::Result<Vec<_>>>()?;
            let psi = product_state(SubsystemLayout::qubits(g.num_sites()), &locals)?;
            (g, psi)
        }
        "ghz" => {
            let n = p.lx.unwrap_or(8);
            (LatticeGeometry::ring(n)?, ghz_state(n)?)
        }
        "cluster" | "cluster-cylinder" => {
            let g = if name == "cluster-cylinder" || cylinder {
                let (lx, ly) = dims(3, 4);
                LatticeGeometry::cylinder(lx, ly)?
            } else {
                plain(4, 4)?
            };
            let psi = cluster_state(&g)?;
            (g, psi)
        }
        "low-depth" => {
            let g = plain(4, 4)?;
            let spec = CircuitSpec::brickwork(&g, p.depth.unwrap_or(1), r.require_seed("low-depth")?)?;
            let psi = random_low_depth_state(SubsystemLayout::qubits(g.num_sites()), &spec)?;
            (g, psi)
        }
        other => return Err(schema(format!("unknown state model {other}"))),
    };
    Ok((g, psi))
}

fn edge_state(r: &Resolved) -> Result<(LatticeGeometry, PureStateVector, EdgeState), CliError> {
    let (g, psi) = build_state(r, false)?;
    let chain = annulus_partition(&g, Rect::centre(&g), r.params.width.unwrap_or(1), r.params.blocks.unwrap_or(4))?;
    let edge = EdgeState::from_state(&psi, &chain)?;
    Ok((g, psi, edge))
}

fn tee(r: &Resolved) -> Result<Outcome, CliError> {
    let (g, psi) = build_state(r, false)?;
    let scale = r.params.scale.unwrap_or(1);
    let method = r.params.method.clone().unwrap_or_else(|| "levin-wen".into());
    let gamma = match method.as_str() {
        "levin-wen" => tee_levin_wen(&psi, &g, &levin_wen_regions(&g, scale)?)?,
        "kitaev-preskill" => {
            let (a, b, c) = kitaev_preskill_regions(&g, scale)?;
            tee_kitaev_preskill(&psi, &g, &a, &b, &c)?
        }
        other => return Err(schema(format!("unknown TEE method {other}"))),
    };
    Ok(Outcome { result: json!({ "gamma": gamma, "method": method }), csv: None })
}

fn edge_hamiltonian(r: &Resolved) -> Result<Outcome, CliError> {
    let (_, _, edge) = edge_state(r)?;
    let floor = LogFloor::default();
    let d = edge_gibbs_distance(&edge, floor)?;
    let h = build_edge_hamiltonian(&edge, floor)?;
    let telescoped = if edge.periodic() && edge.num_blocks() >= 4 {
        to_value(&telescoped_cmi_decomposition(&edge)?)
    } else {
        Value::Null
    };
    Ok(Outcome {
        result: json!({
            "distance": d.direct,
            "conditional_sum": d.conditional_sum,
            "block_sizes": edge.block_sizes(),
            "term_norms": h.term_norms(),
            "telescoped": telescoped,
        }),
        csv: None,
    })
}

fn fit_options(r: &Resolved) -> FitOptions {
    let mut opts = FitOptions::default();
    if let Some(n) = r.params.max_iter {
        opts.lbfgs = LbfgsOptions { max_iter: n, ..opts.lbfgs };
    }
    if let Some(t) = r.params.grad_tol {
        opts.lbfgs = LbfgsOptions { grad_tol: t, ..opts.lbfgs };
    }
    opts
}

fn gibbs_fit(r: &Resolved) -> Result<Outcome, CliError> {
    let (_, _, edge) = edge_state(r)?;
    let kappa = r.params.kappa.unwrap_or(DEFAULT_KAPPA);
    let opts = fit_options(r);
    let result = match r.params.family.as_deref().unwrap_or("nearest-neighbor") {
        "nearest-neighbor" => {
            let fam = GibbsFamily::nearest_neighbor(&edge, kappa)?;
            to_value(&minimize(&edge, &fam, &opts)?.to_json())
        }
        "two-block" | "both" => {
            let (a, b, c) = mbody_tripartition(edge.num_blocks())?;
            let cmp = mbody_family_compare(&edge, (&a, &b, &c), kappa, &opts)?;
            if r.params.family.as_deref() == Some("two-block") {
                to_value(&cmp.two_block.to_json())
            } else {
                json!({
                    "nearest_neighbor": cmp.nearest_neighbor.to_json(),
                    "two_block": cmp.two_block.to_json(),
                    "difference": cmp.difference(),
                })
            }
        }
        other => return Err(schema(format!("unknown family {other}"))),
    };
    Ok(Outcome { result, csv: None })
}

fn spectrum_match(r: &Resolved) -> Result<Outcome, CliError> {
    let (g, psi) = build_state(r, true)?;
    let (lx, ly) = g.extents();
    let toric = g.is_edge_lattice();
    let y_low = r.params.y_low.unwrap_or(0.5);
    let y_high = r.params.y_high.unwrap_or(ly as f64 - if toric { 1.0 } else { 1.5 });
    let bands = cylinder_bands(&g, y_low, y_high, r.params.blocks.unwrap_or(lx))?;
    let comparator = match r.params.comparator.as_deref().unwrap_or("edge-hamiltonian") {
        "edge-hamiltonian" => EdgeComparator::EdgeHamiltonian,
        "exact-log" => EdgeComparator::ExactLog,
        other => return Err(schema(format!("unknown comparator {other}"))),
    };
    let lambdas = r.params.lambda.clone().unwrap_or_else(|| vec![50.0]);
    let matches = lambdas
        .par_iter()
        .map(|&l| cylinder_spectrum_match(&psi, &bands, l, comparator))
        .collect::<topoedge::Result<Vec<_>>>()?;
    let points: Vec<CurvePoint> = matches
        .iter()
        .map(|m| CurvePoint { lambda: m.lambda, distance: m.l1_distance, i_yy: m.i_yy })
        .collect();
    let records: Vec<Value> = matches
        .iter()
        .map(|m| json!({ "lambda": m.lambda, "distance": m.l1_distance, "i_yy": m.i_yy, "levels": m.lhs_spectrum.len(), "links": m.links }))
        .collect();
    let csv = csv_string(|w| write_curve_csv(&points, w))?;
    Ok(Outcome { result: json!({ "comparator": comparator, "points": records }), csv: Some(csv) })
}

fn recovery_check(r: &Resolved) -> Result<Outcome, CliError> {
    let (g, psi) = build_state(r, false)?;
    let trip = levin_wen_regions(&g, r.params.scale.unwrap_or(1))?;
    let record = fawzi_renner_check(&psi, &trip.a.to_vec(), &trip.b.to_vec(), &trip.c.to_vec(), &default_t_grid())?;
    let reconstruction = if g.kind() == LatticeKind::Ring {
        Value::Null
    } else {
        let chain =
            annulus_partition(&g, Rect::centre(&g), r.params.width.unwrap_or(1), r.params.blocks.unwrap_or(4))?;
        let edge = EdgeState::from_state(&psi, &chain)?;
        to_value(&edge_reconstruction(&edge)?.diagnostics)
    };
    Ok(Outcome { result: json!({ "fawzi_renner": record, "reconstruction": reconstruction }), csv: None })
}

fn read_mps_json(path: &str) -> Result<MpsJson, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("MPS file {path}: {e}")))
}

/// Random MPS redrawn until `|λ₂| ∈ [0.3, 0.85]` for the normalized
/// transfer operator.
fn random_gapped_mps(r: &Resolved) -> Result<MatrixProductState, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.require_seed("random-mps")?);
    let (bond, phys) = (r.params.bond.unwrap_or(2), r.params.phys.unwrap_or(2));
    for _ in 0..10_000 {
        let m = MatrixProductState::random(bond, phys, 1, &mut rng)?.normalized()?;
        let t = m.transfer()?;
        if t.lambda2().is_some_and(|z| (0.3..=0.85).contains(&z.norm())) {
            return Ok(m);
        }
    }
    Err(CliError::Core(topoedge::Error::Analysis("no random MPS with |λ₂| in [0.3, 0.85]".into())))
}

fn mps_converge(r: &Resolved) -> Result<Outcome, CliError> {
    let mps = match (&r.params.mps_file, model(r, "random-mps").as_str()) {
        (Some(path), _) => read_mps_json(path)?.into_mps()?,
        (None, "random-mps") => random_gapped_mps(r)?,
        (None, "ghz-mps") => MatrixProductState::ghz(2)?,
        (None, other) => return Err(schema(format!("unknown MPS model {other}"))),
    };
    let lengths = r.params.lengths.clone().unwrap_or_else(|| (6..=18).collect());
    let curve = convergence_curve(&mps, r.params.sites.unwrap_or(2), &lengths)?;
    let csv = csv_string(|w| write_convergence_csv(&curve, w))?;
    let t = mps.normalized()?.transfer()?;
    let spectrum: Vec<[f64; 2]> = t.eigenvalues().iter().map(|z| [z.re, z.im]).collect();
    Ok(Outcome { result: json!({ "curve": curve, "transfer_spectrum": spectrum }), csv: Some(csv) })
}

fn renyi_fit(r: &Resolved) -> Result<Outcome, CliError> {
    let p = &r.params;
    let env = p.env.unwrap_or(2);
    let corners = p.corners.unwrap_or(0);
    let ring = match (&p.mps_file, model(r, "random-ring").as_str()) {
        (Some(path), _) => {
            let j = read_mps_json(path)?;
            let edge = j.into_mps()?;
            let corner = j.corner_tensors()?;
            RingOperator::from_purified(edge.tensors(), env, corner.as_deref().map(|c| (c, env)))?
        }
        (None, "random-ring") => {
            let mut rng = ChaCha8Rng::seed_from_u64(r.require_seed("random-ring")?);
            let (bond, phys) = (p.bond.unwrap_or(2), p.phys.unwrap_or(2));
            let a = MatrixProductState::random(bond, phys * env, 1, &mut rng)?;
            let c = MatrixProductState::random(bond, phys * env, 1, &mut rng)?;
            RingOperator::from_purified(a.tensors(), env, Some((c.tensors(), env)))?
        }
        (None, other) => return Err(schema(format!("unknown ring model {other}"))),
    };
    let lengths = p.lengths.clone().unwrap_or_else(|| (16..=40).step_by(4).collect());
    let fit = renyi_area_fit(&ring, p.alpha.unwrap_or(2), corners, &lengths)?;
    let csv = csv_string(|w| write_area_fit_csv(&fit, w))?;
    Ok(Outcome { result: to_value(&fit), csv: Some(csv) })
}
