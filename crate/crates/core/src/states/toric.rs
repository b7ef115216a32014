//! Toric-code ground states with definite or superposed anyonic flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, LatticeKind, Sublattice};
use crate::qla::{CVector, PureStateVector, SubsystemLayout, C64};

/// Toric-code anyon types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anyon {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "em")]
    Em,
}

impl Anyon {
    pub const ALL: [Anyon; 4] = [Anyon::One, Anyon::E, Anyon::M, Anyon::Em];

    pub fn has_e(self) -> bool {
        matches!(self, Anyon::E | Anyon::Em)
    }

    pub fn has_m(self) -> bool {
        matches!(self, Anyon::M | Anyon::Em)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Anyon::One),
            "e" => Ok(Anyon::E),
            "m" => Ok(Anyon::M),
            "em" | "me" => Ok(Anyon::Em),
            other => Err(Error::domain(format!("unknown anyon label {other:?}"))),
        }
    }
}

/// Flux label with its quantum dimension and superposition weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnyonFluxLabel {
    pub label: Anyon,
    #[serde(default = "unit")]
    pub quantum_dimension: f64,
    #[serde(default = "unit")]
    pub weight: f64,
}

fn unit() -> f64 {
    1.0
}

impl AnyonFluxLabel {
    pub fn new(label: Anyon, weight: f64) -> Self {
        Self {
            label,
            quantum_dimension: 1.0,
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FluxSpec {
    Definite(Anyon),
    Superposition(Vec<AnyonFluxLabel>),
}

impl FluxSpec {
    /// Equal weights over `labels`.
    pub fn uniform(labels: &[Anyon]) -> Self {
        let w = 1.0 / labels.len() as f64;
        FluxSpec::Superposition(labels.iter().map(|&a| AnyonFluxLabel::new(a, w)).collect())
    }
}

/// Non-contractible cycle along which the flux is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopDirection {
    X,
    Y,
}

/// Loop operators measuring and changing the flux along one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopOperators {
    /// Support of the `Z` loop along the cycle; eigenvalue `-1` means `m` flux.
    pub wilson: Vec<usize>,
    /// Support of the `X` loop on the dual cycle parallel to it; eigenvalue
    /// `-1` means `e` flux. Absent on a cylinder.
    pub dual: Option<Vec<usize>>,
    /// Support of the `X` string that flips the `Z` loop.
    pub t_hooft: Vec<usize>,
}

impl LoopOperators {
    pub fn new(geom: &LatticeGeometry, direction: LoopDirection) -> Result<Self> {
        if !geom.is_edge_lattice() {
            return Err(Error::domain("toric code needs qubits on edges"));
        }
        let (lx, ly) = geom.extents();
        let h = |x: usize, y: usize| geom.site(x as i64, y as i64, Sublattice::H).expect("edge");
        let v = |x: usize, y: usize| geom.site(x as i64, y as i64, Sublattice::V).expect("edge");
        match (geom.kind(), direction) {
            (LatticeKind::Torus, LoopDirection::X) => Ok(Self {
                wilson: (0..lx).map(|x| h(x, 0)).collect(),
                dual: Some((0..lx).map(|x| v(x, 0)).collect()),
                t_hooft: (0..ly).map(|y| h(0, y)).collect(),
            }),
            (LatticeKind::Torus, LoopDirection::Y) => Ok(Self {
                wilson: (0..ly).map(|y| v(0, y)).collect(),
                dual: Some((0..ly).map(|y| h(0, y)).collect()),
                t_hooft: (0..lx).map(|x| v(x, 0)).collect(),
            }),
            (LatticeKind::Cylinder, LoopDirection::X) => Ok(Self {
                wilson: (0..lx).map(|x| h(x, 0)).collect(),
                dual: None,
                t_hooft: (0..ly).map(|y| h(0, y)).collect(),
            }),
            _ => Err(Error::domain(
                "flux sectors exist on a torus, or along the periodic direction of a cylinder",
            )),
        }
    }
}

fn index_mask(n: usize, qubits: &[usize]) -> usize {
    qubits.iter().map(|&q| 1usize << (n - 1 - q)).fold(0, |a, b| a ^ b)
}

/// Minimally entangled ground state with definite flux.
fn mes(geom: &LatticeGeometry, anyon: Anyon, loops: &LoopOperators) -> Result<CVector> {
    let n = geom.num_sites();
    if anyon.has_e() && loops.dual.is_none() {
        return Err(Error::domain("e flux is not a ground state of the smooth cylinder"));
    }
    let mut psi = CVector::zeros(1 << n);
    let start = if anyon.has_m() { index_mask(n, &loops.t_hooft) } else { 0 };
    psi[start] = C64::new(1.0, 0.0);
    for star in geom.stars() {
        let m = index_mask(n, &star);
        let prev = psi.clone();
        for i in 0..psi.len() {
            psi[i] += prev[i ^ m];
        }
    }
    if let Some(dual) = &loops.dual {
        let m = index_mask(n, dual);
        let s = if anyon.has_e() { -1.0 } else { 1.0 };
        let prev = psi.clone();
        for i in 0..psi.len() {
            psi[i] += prev[i ^ m] * s;
        }
    }
    let norm = psi.norm();
    Ok(psi.unscale(norm))
}

/// Toric-code ground state on a torus or smooth-boundary cylinder. Flux is
/// measured along `direction`.
pub fn toric_code_state(
    geom: &LatticeGeometry,
    flux: &FluxSpec,
    direction: LoopDirection,
) -> Result<PureStateVector> {
    let n = geom.num_sites();
    if n > 18 {
        return Err(Error::Resource {
            what: "toric-code state".into(),
            requested: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            limit: crate::qla::MAX_VECTOR_DIM,
        });
    }
    let loops = LoopOperators::new(geom, direction)?;
    let layout = SubsystemLayout::qubits(n);
    match flux {
        FluxSpec::Definite(a) => PureStateVector::new(mes(geom, *a, &loops)?, layout),
        FluxSpec::Superposition(parts) => {
            if parts.is_empty() {
                return Err(Error::domain("empty flux superposition"));
            }
            let total: f64 = parts.iter().map(|p| p.weight).sum();
            if (total - 1.0).abs() > 1e-10 || parts.iter().any(|p| p.weight < 0.0) {
                return Err(Error::domain(format!("flux weights must be a distribution (sum {total})")));
            }
            for (i, p) in parts.iter().enumerate() {
                if (p.quantum_dimension - 1.0).abs() > 1e-12 {
                    return Err(Error::domain("toric-code anyons have quantum dimension 1"));
                }
                if parts[..i].iter().any(|q| q.label == p.label) {
                    return Err(Error::domain("flux label repeated"));
                }
            }
            let mut psi = CVector::zeros(1 << n);
            for p in parts {
                psi += mes(geom, p.label, &loops)? * C64::new(p.weight.sqrt(), 0.0);
            }
            PureStateVector::new(psi, layout)
        }
    }
}
