use super::{check_indices, determinant, DiscreteKernel, SiteIndex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest site count handled by the brute-force distribution.
pub const MAX_EXACT_SITES: usize = 16;

const CLAMP: f64 = 1e-12;
const NEGATIVE_MASS: f64 = 1e-9;
const NORMALIZATION: f64 = 1e-9;

/// `det K_P`: the probability that every site of `P` is occupied.
pub fn inclusion_prob(k: &DiscreteKernel, subset: &[usize]) -> Result<f64> {
    check_indices(subset, k.len())?;
    let p = determinant(&k.section(subset)?).re;
    if p < 0.0 {
        if p >= -CLAMP {
            return Ok(0.0);
        }
        let pattern = subset.iter().filter(|&&i| i < 64).fold(0u64, |m, &i| m | 1 << i);
        return Err(Error::NegativeMass { pattern, mass: p });
    }
    Ok(p)
}

/// [`inclusion_prob`] addressed by site labels.
pub fn inclusion_prob_sites(k: &DiscreteKernel, sites: &[SiteIndex]) -> Result<f64> {
    inclusion_prob(k, &k.indices_of(sites)?)
}

/// Law of the occupied set, indexed by bitmask (bit `i` ↔ site `i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetDistribution {
    pub sites: Vec<SiteIndex>,
    pub probs: Vec<f64>,
}

impl SubsetDistribution {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    /// `P(site i occupied)`.
    pub fn marginal(&self, i: usize) -> f64 {
        self.probs.iter().enumerate().filter(|(m, _)| m >> i & 1 == 1).map(|(_, p)| p).sum()
    }

    /// `P(all of mask occupied)`.
    pub fn joint_inclusion(&self, mask: usize) -> f64 {
        self.probs.iter().enumerate().filter(|(m, _)| m & mask == mask).map(|(_, p)| p).sum()
    }

    /// Law of the occupied count.
    pub fn count_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; self.len() + 1];
        for (m, p) in self.probs.iter().enumerate() {
            law[m.count_ones() as usize] += p;
        }
        law
    }

    /// Total variation distance to another law on the same sites.
    pub fn tv(&self, other: &[f64]) -> f64 {
        0.5 * self.probs.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// Exact law of the occupied set by inclusion–exclusion:
/// `P(S) = Σ_{T ⊇ S} (-1)^{|T∖S|} det K_T`.
pub fn exact_distribution(k: &DiscreteKernel) -> Result<SubsetDistribution> {
    let n = k.len();
    if n > MAX_EXACT_SITES {
        return Err(Error::TooManySites { n, max: MAX_EXACT_SITES });
    }
    let size = 1usize << n;
    let mut f = vec![0.0; size];
    let mut idx = Vec::with_capacity(n);
    for (mask, slot) in f.iter_mut().enumerate() {
        idx.clear();
        idx.extend((0..n).filter(|i| mask >> i & 1 == 1));
        *slot = determinant(&k.section(&idx)?).re;
    }
    // superset Möbius transform
    for bit in 0..n {
        let b = 1 << bit;
        for mask in 0..size {
            if mask & b == 0 {
                f[mask] -= f[mask | b];
            }
        }
    }
    for (mask, p) in f.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -NEGATIVE_MASS {
                return Err(Error::NegativeMass { pattern: mask as u64, mass: *p });
            }
            *p = 0.0;
        }
    }
    let total: f64 = f.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION {
        return Err(Error::NotNormalized(total));
    }
    Ok(SubsetDistribution { sites: k.sites().to_vec(), probs: f })
}
