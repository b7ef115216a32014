use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of local Hilbert-space dimensions. Site 0 is the most
/// significant digit of a flat basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemLayout {
    site_dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::domain("layout needs at least one site"));
        }
        if site_dims.contains(&0) {
            return Err(Error::domain("site dimensions must be positive"));
        }
        let mut total: usize = 1;
        for &d in &site_dims {
            total = total
                .checked_mul(d)
                .ok_or_else(|| Error::domain("total dimension overflows usize"))?;
        }
        Ok(Self { site_dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n.max(1)]).expect("qubit layout")
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn num_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Product of the dimensions of `sites`.
    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.site_dims[s]).product()
    }

    /// Validates that `sites` are in range and pairwise distinct.
    pub fn check_sites(&self, sites: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.num_sites()];
        for &s in sites {
            if s >= self.num_sites() {
                return Err(Error::domain(format!(
                    "site {s} out of range for {} sites",
                    self.num_sites()
                )));
            }
            if seen[s] {
                return Err(Error::domain(format!("site {s} listed twice")));
            }
            seen[s] = true;
        }
        Ok(())
    }

    /// Layout of the listed sites, in the listed order.
    pub fn restrict(&self, sites: &[usize]) -> Result<Self> {
        self.check_sites(sites)?;
        Self::new(sites.iter().map(|&s| self.site_dims[s]).collect())
    }

    /// Layout of `self` followed by `other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.site_dims.clone();
        dims.extend_from_slice(&other.site_dims);
        Self { site_dims: dims }
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let n = self.num_sites();
        let mut strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.site_dims[s + 1];
        }
        strides
    }

    /// Flat-index contributions of every configuration of `sites`, with the
    /// first listed site most significant.
    pub(crate) fn offsets(&self, sites: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &s in sites {
            let d = self.site_dims[s];
            let mut next = Vec::with_capacity(out.len() * d);
            for &base in &out {
                for digit in 0..d {
                    next.push(base + digit * strides[s]);
                }
            }
            out = next;
        }
        out
    }

    /// Sites not in `sites`, ascending.
    pub(crate) fn complement(&self, sites: &[usize]) -> Vec<usize> {
        let mut mask = vec![false; self.num_sites()];
        for &s in sites {
            mask[s] = true;
        }
        (0..self.num_sites()).filter(|&s| !mask[s]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_enumerate_subsystem() {
        let l = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.strides(), vec![6, 2, 1]);
        assert_eq!(l.offsets(&[2, 0]), vec![0, 6, 1, 7]);
        let all = l.offsets(&[0, 1, 2]);
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_sites() {
        let l = SubsystemLayout::qubits(3);
        assert!(l.check_sites(&[0, 3]).is_err());
        assert!(l.check_sites(&[1, 1]).is_err());
        assert!(SubsystemLayout::new(vec![2, 0]).is_err());
        assert_eq!(l.complement(&[1]), vec![0, 2]);
    }
}
