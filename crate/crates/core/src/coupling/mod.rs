//! Stochastic-order and mixing diagnostics on finite windows.

mod dbar;
mod dependence;
mod flow;
mod strassen;
mod vwb;

pub use dbar::{dbar_upper_bound, kernel_gap_bound, DbarBoundReport};
pub use dependence::{dependence_radius_scan, factorization_check, first_compliant_separation, ScanRow};
pub use strassen::{dpp_domination_suite, strassen_check, CertificateCheck, DominationCertificate, DominationReport, UpSet, Verdict};
pub use vwb::{vwb_coupling_cost, vwb_scan, VwbRow, MAX_VWB_SITES};

use crate::discrete::{hermitian_eigenvalues, DiscreteKernel, SiteIndex, SubsetDistribution};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest site count for a [`FieldDistribution`].
pub const MAX_FIELD_SITES: usize = 12;
const NORMALIZATION: f64 = 1e-9;

/// Outcome of a Loewner comparison `k1 ≤ k2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerReport {
    pub holds: bool,
    /// Smallest eigenvalue of `k2 - k1`.
    pub min_eigenvalue: f64,
}

/// `k1 ≤ k2` in the Loewner order, up to `tol`.
pub fn loewner_leq(k1: &DiscreteKernel, k2: &DiscreteKernel, tol: f64) -> Result<LoewnerReport> {
    if k1.sites() != k2.sites() {
        return Err(Error::SiteMismatch);
    }
    let diff = k2.matrix() - k1.matrix();
    let min_eigenvalue = hermitian_eigenvalues(&diff).first().copied().unwrap_or(0.0);
    Ok(LoewnerReport { holds: min_eigenvalue >= -tol, min_eigenvalue })
}

/// A law on `{0,1}^sites`, indexed by bitmask (bit `i` ↔ site `i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDistribution {
    sites: Vec<SiteIndex>,
    probs: Vec<f64>,
}

impl FieldDistribution {
    pub fn new(sites: Vec<SiteIndex>, probs: Vec<f64>) -> Result<Self> {
        let n = sites.len();
        if n > MAX_FIELD_SITES {
            return Err(Error::TooManySites { n, max: MAX_FIELD_SITES });
        }
        if probs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: probs.len() });
        }
        if let Some((mask, &p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
            return Err(Error::NegativeMass { pattern: mask as u64, mass: p });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { sites, probs })
    }

    fn default_sites(n: usize) -> Vec<SiteIndex> {
        (0..n as i64).map(|i| SiteIndex::lattice(&[i])).collect()
    }

    /// Point mass on one pattern over `n` anonymous sites.
    pub fn point_mass(n: usize, mask: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n];
        *probs
            .get_mut(mask)
            .ok_or_else(|| Error::InvalidParameter(format!("pattern {mask:#b} has more than {n} bits")))? = 1.0;
        Self::new(Self::default_sites(n), probs)
    }

    /// Independent Bernoulli sites with the given success probabilities.
    pub fn product(ps: &[f64]) -> Result<Self> {
        if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("Bernoulli parameter {p} outside [0, 1]")));
        }
        let n = ps.len();
        let probs = (0..1usize << n)
            .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { ps[i] } else { 1.0 - ps[i] }).product())
            .collect();
        Self::new(Self::default_sites(n), probs)
    }

    pub fn from_subsets(d: &SubsetDistribution) -> Result<Self> {
        Self::new(d.sites.clone(), d.probs.clone())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.sites
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    /// Law of the sub-field on `idx` (bit `k` of the result ↔ site `idx[k]`).
    pub fn marginal(&self, idx: &[usize]) -> Result<Self> {
        crate::discrete::check_indices(idx, self.len())?;
        let mut probs = vec![0.0; 1 << idx.len()];
        for (m, p) in self.probs.iter().enumerate() {
            probs[project(m, idx)] += p;
        }
        Self::new(idx.iter().map(|&i| self.sites[i].clone()).collect(), probs)
    }

    /// Probability that the sites `on` show `pattern` (bit `k` ↔ `on[k]`).
    pub fn event_prob(&self, on: &[usize], pattern: usize) -> Result<f64> {
        crate::discrete::check_indices(on, self.len())?;
        Ok(self.probs.iter().enumerate().filter(|(m, _)| project(*m, on) == pattern).map(|(_, p)| p).sum())
    }

    /// Law of the sub-field on `idx` given that the sites `on` show `pattern`.
    pub fn conditional(&self, idx: &[usize], on: &[usize], pattern: usize) -> Result<Self> {
        crate::discrete::check_indices(idx, self.len())?;
        crate::discrete::check_indices(on, self.len())?;
        let z = self.event_prob(on, pattern)?;
        if z <= 0.0 {
            return Err(Error::InvalidParameter("conditioning on a null event".into()));
        }
        let mut probs = vec![0.0; 1 << idx.len()];
        for (m, p) in self.probs.iter().enumerate() {
            if project(m, on) == pattern {
                probs[project(m, idx)] += p / z;
            }
        }
        Self::new(idx.iter().map(|&i| self.sites[i].clone()).collect(), probs)
    }
}

/// Bits of `mask` at positions `idx`, packed in order.
fn project(mask: usize, idx: &[usize]) -> usize {
    idx.iter().enumerate().fold(0, |acc, (k, &i)| acc | ((mask >> i & 1) << k))
}
