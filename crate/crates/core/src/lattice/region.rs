use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{LatticeGeometry, LatticeKind};
use crate::error::{Error, Result};

/// Labelled nonempty set of lattice sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub sites: BTreeSet<usize>,
}

impl Region {
    pub fn new(label: impl Into<String>, sites: impl IntoIterator<Item = usize>, geom: &LatticeGeometry) -> Result<Self> {
        let r = Self {
            label: label.into(),
            sites: sites.into_iter().collect(),
        };
        r.validate(geom)?;
        Ok(r)
    }

    pub fn validate(&self, geom: &LatticeGeometry) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::geometry(format!("region {} is empty", self.label)));
        }
        if let Some(&s) = self.sites.iter().find(|&&s| s >= geom.num_sites()) {
            return Err(Error::geometry(format!(
                "region {} contains site {s} outside the lattice",
                self.label
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.sites.iter().copied().collect()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.contains(&site)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.is_disjoint(&other.sites)
    }

    pub fn union(label: impl Into<String>, parts: &[&Region]) -> Region {
        Region {
            label: label.into(),
            sites: parts.iter().flat_map(|r| r.sites.iter().copied()).collect(),
        }
    }

    /// Whether some lattice edge joins the two regions.
    pub fn touches(&self, other: &Region, geom: &LatticeGeometry) -> bool {
        let adj = geom.adjacency();
        self.sites
            .iter()
            .any(|&a| adj[a].iter().any(|b| other.sites.contains(b)))
    }
}

/// Ordered blocks `X₁ … X_m` of a boundary region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPartition {
    pub blocks: Vec<Region>,
    pub periodic: bool,
    pub block_scale: usize,
}

impl ChainPartition {
    pub fn new(blocks: Vec<Region>, periodic: bool, block_scale: usize) -> Result<Self> {
        let min = if periodic { 3 } else { 2 };
        if blocks.len() < min {
            return Err(Error::geometry(format!(
                "a {} chain needs at least {min} blocks, got {}",
                if periodic { "periodic" } else { "open" },
                blocks.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for b in &blocks {
            if b.sites.is_empty() {
                return Err(Error::geometry(format!("block {} is empty", b.label)));
            }
            for &s in &b.sites {
                if !seen.insert(s) {
                    return Err(Error::geometry(format!("site {s} appears in two blocks")));
                }
            }
        }
        Ok(Self {
            blocks,
            periodic,
            block_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn union(&self) -> Region {
        Region::union("X", &self.blocks.iter().collect::<Vec<_>>())
    }

    /// Lattice sites listed block by block.
    pub fn ordered_sites(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| b.sites.iter().copied()).collect()
    }

    /// Ranges of each block inside `ordered_sites`.
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.len();
                start = r.end;
                r
            })
            .collect()
    }

    pub fn validate(&self, geom: &LatticeGeometry) -> Result<()> {
        self.blocks.iter().try_for_each(|b| b.validate(geom))
    }
}

/// Three disjoint regions with `B` separating `A` from `C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tripartition {
    pub a: Region,
    pub b: Region,
    pub c: Region,
}

impl Tripartition {
    pub fn new(a: Region, b: Region, c: Region, geom: &LatticeGeometry) -> Result<Self> {
        for r in [&a, &b, &c] {
            r.validate(geom)?;
        }
        if !a.is_disjoint(&b) || !b.is_disjoint(&c) || !a.is_disjoint(&c) {
            return Err(Error::geometry("tripartition regions overlap"));
        }
        if a.touches(&c, geom) {
            return Err(Error::geometry("B does not separate A from C"));
        }
        Ok(Self { a, b, c })
    }

    /// Groups chain blocks by index into `A`, `B`, `C`.
    pub fn from_chain(
        chain: &ChainPartition,
        a: &[usize],
        b: &[usize],
        c: &[usize],
        geom: &LatticeGeometry,
    ) -> Result<Self> {
        let pick = |label: &str, idx: &[usize]| -> Result<Region> {
            let parts: Vec<&Region> = idx
                .iter()
                .map(|&i| {
                    chain
                        .blocks
                        .get(i)
                        .ok_or_else(|| Error::geometry(format!("block {i} out of range")))
                })
                .collect::<Result<_>>()?;
            Ok(Region::union(label, &parts))
        };
        Self::new(pick("A", a)?, pick("B", b)?, pick("C", c)?, geom)
    }

    pub fn union(&self) -> Region {
        Region::union("ABC", &[&self.a, &self.b, &self.c])
    }
}

/// Serialized geometry plus labelled regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: LatticeKind,
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Ly", default = "one")]
    pub ly: usize,
    #[serde(default = "one")]
    pub qubits_per_cell: usize,
    #[serde(default)]
    pub regions: Vec<Region>,
}

fn one() -> usize {
    1
}

impl RegionSpec {
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(self.kind, self.lx, self.ly, self.qubits_per_cell)
    }

    /// Parses and validates every region against the geometry.
    pub fn from_json(text: &str) -> Result<(Self, LatticeGeometry)> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::geometry(format!("region spec: {e}")))?;
        let geom = spec.geometry()?;
        for r in &spec.regions {
            r.validate(&geom)?;
        }
        Ok((spec, geom))
    }

    pub fn region(&self, label: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.label == label)
    }
}
