//! Region entropies, mutual informations, topological entanglement entropy
//! estimators and area-law fits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, LatticeKind, Region, Tripartition};
use crate::qla::{entropy_of_spectrum, QuantumState};

fn disjoint(parts: &[&[usize]]) -> Result<Vec<usize>> {
    let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    let n = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != n {
        return Err(Error::domain("regions overlap"));
    }
    Ok(all)
}

/// Von Neumann entropy of the reduction onto `sites`; zero for the empty set.
pub fn region_entropy<S: QuantumState + ?Sized>(state: &S, sites: &[usize]) -> Result<f64> {
    if sites.is_empty() {
        return Ok(0.0);
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    entropy_of_spectrum(&state.region_spectrum(&sorted)?)
}

/// `S(A) + S(B) - S(AB)`.
pub fn mutual_information<S: QuantumState + ?Sized>(state: &S, a: &[usize], b: &[usize]) -> Result<f64> {
    let ab = disjoint(&[a, b])?;
    Ok(region_entropy(state, a)? + region_entropy(state, b)? - region_entropy(state, &ab)?)
}

/// `S(AB) + S(BC) - S(B) - S(ABC)`.
pub fn conditional_mutual_information<S: QuantumState + ?Sized>(
    state: &S,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    let abc = disjoint(&[a, b, c])?;
    let ab = disjoint(&[a, b])?;
    let bc = disjoint(&[b, c])?;
    Ok(region_entropy(state, &ab)? + region_entropy(state, &bc)?
        - region_entropy(state, b)?
        - region_entropy(state, &abc)?)
}

/// Topological class of the union of a tripartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TripleTopology {
    Annulus,
    Trivial,
    Other,
}

pub fn classify_union(geom: &LatticeGeometry, regions: &[&Region]) -> TripleTopology {
    let t = geom.topology(&Region::union("ABC", regions));
    if t.is_annulus() {
        TripleTopology::Annulus
    } else if t.is_simply_connected() {
        TripleTopology::Trivial
    } else {
        TripleTopology::Other
    }
}

/// `½ I(A:C|B)` on an annulus `ABC`.
pub fn tee_levin_wen<S: QuantumState + ?Sized>(
    state: &S,
    geom: &LatticeGeometry,
    trip: &Tripartition,
) -> Result<f64> {
    if classify_union(geom, &[&trip.a, &trip.b, &trip.c]) != TripleTopology::Annulus {
        return Err(Error::domain("Levin-Wen regions must form an annulus"));
    }
    if trip.a.touches(&trip.c, geom) {
        return Err(Error::domain("Levin-Wen regions: A touches C"));
    }
    Ok(0.5 * conditional_mutual_information(state, &trip.a.to_vec(), &trip.b.to_vec(), &trip.c.to_vec())?)
}

/// `S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC`.
pub fn kitaev_preskill_combination<S: QuantumState + ?Sized>(
    state: &S,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    let abc = disjoint(&[a, b, c])?;
    let ab = disjoint(&[a, b])?;
    let bc = disjoint(&[b, c])?;
    let ac = disjoint(&[a, c])?;
    let s = |r: &[usize]| region_entropy(state, r);
    Ok(s(a)? + s(b)? + s(c)? - s(&ab)? - s(&bc)? - s(&ac)? + s(&abc)?)
}

/// Kitaev–Preskill estimate of γ: the combination equals `-γ` for states
/// obeying the area law, so its negative is returned.
pub fn tee_kitaev_preskill<S: QuantumState + ?Sized>(
    state: &S,
    geom: &LatticeGeometry,
    a: &Region,
    b: &Region,
    c: &Region,
) -> Result<f64> {
    if classify_union(geom, &[a, b, c]) != TripleTopology::Trivial {
        return Err(Error::domain("Kitaev-Preskill regions must form a simply connected union"));
    }
    let adjacent = a.touches(b, geom) && b.touches(c, geom);
    let third = geom.kind() == LatticeKind::Ring || a.touches(c, geom);
    if !(adjacent && third) {
        return Err(Error::domain("Kitaev-Preskill regions must be mutually adjacent"));
    }
    Ok(-kitaev_preskill_combination(state, &a.to_vec(), &b.to_vec(), &c.to_vec())?)
}

/// One region of an area-law fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaLawSample {
    pub label: String,
    pub perimeter: usize,
    pub n_boundaries: usize,
    pub corners: usize,
    pub entropy: f64,
}

pub fn area_law_sample<S: QuantumState + ?Sized>(
    state: &S,
    geom: &LatticeGeometry,
    region: &Region,
) -> Result<AreaLawSample> {
    Ok(AreaLawSample {
        label: region.label.clone(),
        perimeter: geom.perimeter(region),
        n_boundaries: geom.topology(region).n_boundaries(),
        corners: geom.corners(region),
        entropy: region_entropy(state, &region.to_vec())?,
    })
}

/// Least-squares fit of `S = α P - n_R γ + c · corners`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaLawFit {
    pub alpha: f64,
    pub gamma: f64,
    pub corner_const: f64,
    pub residuals: Vec<f64>,
    pub samples: Vec<AreaLawSample>,
}

pub fn area_law_fit(samples: &[AreaLawSample]) -> Result<AreaLawFit> {
    if samples.len() < 3 {
        return Err(Error::Fit("at least three samples are required".into()));
    }
    let mut perims: Vec<usize> = samples.iter().map(|s| s.perimeter).collect();
    perims.sort_unstable();
    perims.dedup();
    if perims.len() < 2 {
        return Err(Error::Fit("samples need at least two distinct perimeters".into()));
    }
    let with_corners = samples.iter().any(|s| s.corners > 0);
    let cols = if with_corners { 3 } else { 2 };
    let design = DMatrix::from_fn(samples.len(), cols, |i, j| match j {
        0 => samples[i].perimeter as f64,
        1 => -(samples[i].n_boundaries as f64),
        _ => samples[i].corners as f64,
    });
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.entropy));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-10 {
        return Err(Error::Fit(format!(
            "design matrix is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let coef = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let fitted = &design * &coef;
    Ok(AreaLawFit {
        alpha: coef[0],
        gamma: coef[1],
        corner_const: if with_corners { coef[2] } else { 0.0 },
        residuals: (0..samples.len()).map(|i| rhs[i] - fitted[i]).collect(),
        samples: samples.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: usize, n: usize, c: usize, s: f64) -> AreaLawSample {
        AreaLawSample {
            label: String::new(),
            perimeter: p,
            n_boundaries: n,
            corners: c,
            entropy: s,
        }
    }

    #[test]
    fn synthetic_fit_is_exact() {
        let (a, g, c) = (0.3, 0.7, 0.05);
        let pts = [(4, 1, 4), (6, 1, 4), (8, 2, 8), (10, 1, 6), (12, 2, 8)];
        let samples: Vec<_> = pts
            .iter()
            .map(|&(p, n, k)| sample(p, n, k, a * p as f64 - g * n as f64 + c * k as f64))
            .collect();
        let fit = area_law_fit(&samples).unwrap();
        assert!((fit.alpha - a).abs() < 1e-12);
        assert!((fit.gamma - g).abs() < 1e-12);
        assert!((fit.corner_const - c).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn degenerate_designs_fail() {
        assert!(area_law_fit(&[sample(4, 1, 0, 1.0), sample(6, 1, 0, 2.0)]).is_err());
        let same_p = [sample(4, 1, 0, 1.0), sample(4, 2, 0, 2.0), sample(4, 1, 0, 1.0)];
        assert!(area_law_fit(&same_p).is_err());
        let collinear = [sample(4, 2, 0, 1.0), sample(6, 3, 0, 2.0), sample(8, 4, 0, 3.0)];
        assert!(matches!(area_law_fit(&collinear), Err(Error::Fit(_))));
    }
}
