use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{ChainPartition, LatticeGeometry, LatticeKind, Region, Sublattice, Tripartition};
use crate::error::{Error, Result};

/// Axis-aligned box of sites (site placement) or vertices (edge placement).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub wx: usize,
    pub wy: usize,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, wx: usize, wy: usize) -> Self {
        Self { x0, y0, wx, wy }
    }

    /// `1 × 1` box in the middle of the lattice.
    pub fn centre(geom: &LatticeGeometry) -> Self {
        let (lx, ly) = geom.extents();
        Self::new((lx / 2) as i64, (ly / 2) as i64, 1, 1)
    }
}

struct Axis {
    len: usize,
    periodic: bool,
}

impl Axis {
    /// Offset of `v` from the box start, unwrapped so that the box and a
    /// margin of `margin` on both sides are contiguous.
    fn offset(&self, v: i64, v0: i64, w: usize, margin: usize) -> i64 {
        let u = v - v0;
        if !self.periodic {
            return u;
        }
        let u = u.rem_euclid(self.len as i64);
        if u >= (w + margin) as i64 {
            u - self.len as i64
        } else {
            u
        }
    }

    fn check_fit(&self, v0: i64, w: usize, margin: usize, name: &str) -> Result<()> {
        let fits = if self.periodic {
            w + 2 * margin <= self.len
        } else {
            v0 - margin as i64 >= 0 && v0 + (w + margin) as i64 <= self.len as i64
        };
        if fits {
            Ok(())
        } else {
            Err(Error::geometry(format!(
                "box of width {w} with margin {margin} does not fit along {name} (length {})",
                self.len
            )))
        }
    }
}

fn axis_distance(u: i64, w: usize) -> i64 {
    if u < 0 {
        -u
    } else if u >= w as i64 {
        u - w as i64 + 1
    } else {
        0
    }
}

fn axes(geom: &LatticeGeometry) -> (Axis, Axis) {
    let (lx, ly) = geom.extents();
    (
        Axis {
            len: lx,
            periodic: geom.periodic_x(),
        },
        Axis {
            len: ly,
            periodic: geom.periodic_y(),
        },
    )
}

/// Sites whose footprint lies at Chebyshev distance `1..=width` from `rect`,
/// with their angle around the box centre.
fn annulus_sites(geom: &LatticeGeometry, rect: Rect, width: usize) -> Result<Vec<(usize, f64, f64)>> {
    if geom.kind() == LatticeKind::Ring {
        return Err(Error::geometry("annuli need a two-dimensional lattice"));
    }
    if width == 0 || rect.wx == 0 || rect.wy == 0 {
        return Err(Error::geometry("annulus width and box extents must be positive"));
    }
    let (ax, ay) = axes(geom);
    ax.check_fit(rect.x0, rect.wx, width, "x")?;
    ay.check_fit(rect.y0, rect.wy, width, "y")?;
    let cx = (rect.wx as f64 - 1.0) / 2.0;
    let cy = (rect.wy as f64 - 1.0) / 2.0;
    let lo = 1;
    let hi = width as i64;
    let mut out = Vec::new();
    for s in 0..geom.num_sites() {
        let (x, y, sub) = geom.coords(s);
        let ux = ax.offset(x as i64, rect.x0, rect.wx, width);
        let uy = ay.offset(y as i64, rect.y0, rect.wy, width);
        let ends: Vec<(i64, i64)> = match sub {
            Sublattice::Site => vec![(ux, uy)],
            Sublattice::H => vec![(ux, uy), (ux + 1, uy)],
            Sublattice::V => vec![(ux, uy), (ux, uy + 1)],
        };
        let inside = ends.iter().all(|&(u, v)| {
            let d = axis_distance(u, rect.wx).max(axis_distance(v, rect.wy));
            (lo..=hi).contains(&d)
        });
        if inside {
            let mx = ends.iter().map(|e| e.0 as f64).sum::<f64>() / ends.len() as f64 - cx;
            let my = ends.iter().map(|e| e.1 as f64).sum::<f64>() / ends.len() as f64 - cy;
            out.push((s, my.atan2(mx).rem_euclid(TAU), mx.hypot(my)));
        }
    }
    Ok(out)
}

fn split_even<T: Clone>(items: &[T], m: usize) -> Vec<Vec<T>> {
    let n = items.len();
    (0..m)
        .map(|k| items[k * n / m..(k + 1) * n / m].to_vec())
        .collect()
}

/// Periodic chain of `m` blocks tiling the width-`width` annulus around
/// `inner`, ordered counter-clockwise from the positive x direction.
pub fn annulus_partition(geom: &LatticeGeometry, inner: Rect, width: usize, m: usize) -> Result<ChainPartition> {
    if m < 4 {
        return Err(Error::geometry("annulus chains need at least 4 blocks"));
    }
    let mut sites = annulus_sites(geom, inner, width)?;
    if m > sites.len() {
        return Err(Error::geometry(format!(
            "{m} blocks requested but the annulus has {} sites",
            sites.len()
        )));
    }
    sites.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.total_cmp(&b.2)));
    let ids: Vec<usize> = sites.iter().map(|t| t.0).collect();
    let blocks = split_even(&ids, m)
        .into_iter()
        .enumerate()
        .map(|(k, b)| Region::new(format!("X{}", k + 1), b, geom))
        .collect::<Result<Vec<_>>>()?;
    ChainPartition::new(blocks, true, width)
}

/// Annular `A, B, C` with `A` and `C` on opposite sides of the annulus.
/// On a ring, `B` is two arcs of length `scale` and `A`, `C` share the rest.
pub fn levin_wen_regions(geom: &LatticeGeometry, scale: usize) -> Result<Tripartition> {
    if geom.kind() == LatticeKind::Ring {
        let n = geom.num_sites();
        if scale == 0 || n < 2 * scale + 2 {
            return Err(Error::geometry(format!("ring of {n} sites cannot hold B arcs of {scale}")));
        }
        let rest = n - 2 * scale;
        let a_len = rest.div_ceil(2);
        let c_start = a_len + scale;
        let c_end = c_start + (rest - a_len);
        let a = Region::new("A", 0..a_len, geom)?;
        let b = Region::new("B", (a_len..c_start).chain(c_end..n), geom)?;
        let c = Region::new("C", c_start..c_end, geom)?;
        return Tripartition::new(a, b, c, geom);
    }
    let chain = annulus_partition(geom, Rect::centre(geom), scale, 4)?;
    Tripartition::from_chain(&chain, &[1], &[0, 2], &[3], geom)
}

/// Three regions meeting at a point whose union is simply connected. On a
/// ring they are consecutive arcs of length `scale`.
pub fn kitaev_preskill_regions(geom: &LatticeGeometry, scale: usize) -> Result<(Region, Region, Region)> {
    if scale == 0 {
        return Err(Error::geometry("scale must be positive"));
    }
    if geom.kind() == LatticeKind::Ring {
        let n = geom.num_sites();
        if 3 * scale >= n {
            return Err(Error::geometry(format!("three arcs of {scale} do not fit a ring of {n}")));
        }
        return Ok((
            Region::new("A", 0..scale, geom)?,
            Region::new("B", scale..2 * scale, geom)?,
            Region::new("C", 2 * scale..3 * scale, geom)?,
        ));
    }
    let (ax, ay) = axes(geom);
    let (lx, ly) = geom.extents();
    let (x0, y0) = ((lx / 2) as i64, (ly / 2) as i64);
    let s = scale as i64;
    ax.check_fit(x0 - s, 2 * scale + 1, 0, "x")?;
    ay.check_fit(y0 - s, 2 * scale + 1, 0, "y")?;
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for site in 0..geom.num_sites() {
        let (x, y, sub) = geom.coords(site);
        let dx = ax.offset(x as i64, x0 - s, 2 * scale + 1, 0) - s;
        let dy = ay.offset(y as i64, y0 - s, 2 * scale + 1, 0) - s;
        match sub {
            Sublattice::Site => {
                if dx.abs() > s || dy.abs() > s {
                    continue;
                }
                if dx == 0 && dy == 0 {
                    a.push(site);
                    continue;
                }
                let theta = (dy as f64).atan2(dx as f64);
                if (-PI / 2.0..PI / 6.0).contains(&theta) {
                    a.push(site);
                } else if (PI / 6.0..5.0 * PI / 6.0).contains(&theta) {
                    b.push(site);
                } else {
                    c.push(site);
                }
            }
            Sublattice::H | Sublattice::V => {
                let (ex, ey) = if sub == Sublattice::H { (dx + 1, dy) } else { (dx, dy + 1) };
                let ends = [(dx, dy), (ex, ey)];
                if ends.iter().any(|&(u, v)| u.abs() > s || v.abs() > s) {
                    continue;
                }
                let on_loop = ends.iter().all(|&(u, v)| u.abs().max(v.abs()) == s);
                let left_side = on_loop && ends.iter().all(|&(u, _)| u == -s);
                let left_spoke = sub == Sublattice::H && dy == 0 && dx < 0;
                if left_side || left_spoke {
                    b.push(site);
                } else if on_loop {
                    a.push(site);
                } else {
                    c.push(site);
                }
            }
        }
    }
    Ok((
        Region::new("A", a, geom)?,
        Region::new("B", b, geom)?,
        Region::new("C", c, geom)?,
    ))
}

/// Horizontal bands of a cylinder: `Y` below, `X` in the middle cut into
/// vertical strips, `Y′` above.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderBands {
    pub y: Region,
    pub x: ChainPartition,
    pub y_prime: Region,
    /// Mirror images of the sorted sites of `Y`, i.e. `Y′` in matching order.
    pub y_prime_mirrored: Vec<usize>,
}

/// Bands split by site position: `pos_y < y_low` is `Y`, `pos_y >= y_high`
/// is `Y′`. `X` is cut into `m` strips by x position.
pub fn cylinder_bands(geom: &LatticeGeometry, y_low: f64, y_high: f64, m: usize) -> Result<CylinderBands> {
    if geom.kind() != LatticeKind::Cylinder {
        return Err(Error::geometry("bands need a cylinder"));
    }
    let (lx, _) = geom.extents();
    let (mut y, mut yp) = (Vec::new(), Vec::new());
    let mut strips = vec![Vec::new(); m];
    for s in 0..geom.num_sites() {
        let (px, py) = geom.position(s);
        if py < y_low {
            y.push(s);
        } else if py >= y_high {
            yp.push(s);
        } else {
            let k = ((px * m as f64 / lx as f64).floor() as usize).min(m - 1);
            strips[k].push(s);
        }
    }
    let blocks = strips
        .into_iter()
        .enumerate()
        .map(|(k, b)| Region::new(format!("X{}", k + 1), b, geom))
        .collect::<Result<Vec<_>>>()?;
    let x = ChainPartition::new(blocks, true, 1)?;
    let y = Region::new("Y", y, geom)?;
    let y_prime = Region::new("Y'", yp, geom)?;
    let mirrored: Vec<usize> = y
        .sites
        .iter()
        .map(|&s| geom.mirror_y(s))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::geometry("bands have no mirror image"))?;
    let image: std::collections::BTreeSet<usize> = mirrored.iter().copied().collect();
    if image != y_prime.sites {
        return Err(Error::geometry("Y′ is not the mirror image of Y"));
    }
    Ok(CylinderBands {
        y,
        x,
        y_prime,
        y_prime_mirrored: mirrored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_by_six_ring_blocks_are_l_shaped() {
        let g = LatticeGeometry::torus(6, 6).unwrap();
        let chain = annulus_partition(&g, Rect::new(2, 2, 2, 2), 1, 4).unwrap();
        assert_eq!(chain.len(), 4);
        let bonds = g.bonds();
        for b in &chain.blocks {
            assert_eq!(b.len(), 3);
            // An L of three sites: connected, not collinear.
            let v = b.to_vec();
            let linked = bonds.iter().filter(|(p, q)| b.contains(*p) && b.contains(*q)).count();
            assert_eq!(linked, 2);
            let xs: std::collections::BTreeSet<_> = v.iter().map(|&s| g.coords(s).0).collect();
            let ys: std::collections::BTreeSet<_> = v.iter().map(|&s| g.coords(s).1).collect();
            assert_eq!((xs.len(), ys.len()), (2, 2));
        }
        assert!(annulus_partition(&g, Rect::new(2, 2, 2, 2), 1, 13).is_err());
        assert!(annulus_partition(&g, Rect::new(0, 0, 4, 4), 2, 4).is_err());
    }

    #[test]
    fn toric_levin_wen_loop() {
        let g = LatticeGeometry::toric_torus(3, 3).unwrap();
        let t = levin_wen_regions(&g, 1).unwrap();
        assert_eq!(t.a.len() + t.b.len() + t.c.len(), 8);
        assert!(g.topology(&t.union()).is_annulus());
    }

    #[test]
    fn toric_kitaev_preskill_disk() {
        let g = LatticeGeometry::toric_torus(3, 3).unwrap();
        let (a, b, c) = kitaev_preskill_regions(&g, 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (6, 3, 3));
        let u = Region::union("ABC", &[&a, &b, &c]);
        assert!(g.topology(&u).is_simply_connected());
        assert!(a.touches(&b, &g) && b.touches(&c, &g) && a.touches(&c, &g));
    }

    #[test]
    fn cylinder_band_layout() {
        let g = LatticeGeometry::toric_cylinder(3, 3).unwrap();
        let bands = cylinder_bands(&g, 0.5, 2.0, 3).unwrap();
        assert_eq!((bands.y.len(), bands.x.union().len(), bands.y_prime.len()), (3, 9, 3));
        let c = LatticeGeometry::cylinder(3, 4).unwrap();
        let bands = cylinder_bands(&c, 1.0, 3.0, 3).unwrap();
        assert_eq!(bands.x.blocks.iter().map(Region::len).collect::<Vec<_>>(), vec![2, 2, 2]);
    }
}
