use crate::discrete::{DiscreteKernel, SiteIndex};
use crate::error::{Error, Result};
use crate::special::gauss_legendre;
use crate::spectral::{KernelEvaluator, KernelSpec};
use serde::{Deserialize, Serialize};

const GAP_TOLERANCE: f64 = 1e-9;

/// The computable upper bound on the single-site disagreement probability of
/// the lower and upper tree processes, truncated at depth `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarBoundReport {
    pub n: u32,
    /// `upper(0,l;0,l) - lower(0,l;0,l)` for `l = 1..N-1`.
    pub gaps: Vec<f64>,
    /// `h_l1 - Σ_{l<N} lower(0,l;0,l)`: expected tail count of the upper
    /// process, a Markov bound on its tail occupancy.
    pub tail: f64,
    pub total: f64,
}

fn diagonal_at_origin(k: &DiscreteKernel, level: u32) -> Result<f64> {
    let dim = k.sites().first().map_or(1, |s| s.cell().len());
    let site = SiteIndex::tree(&vec![0; dim], level);
    let i = k.index_of(&site).ok_or_else(|| Error::MissingSite(site.to_string()))?;
    Ok(k.entry(i, i).re)
}

/// `Σ_{l<N} (upper_ll - lower_ll) + (h_l1 - Σ_{l<N} lower_ll)` on column `z = 0`.
pub fn dbar_upper_bound(lower: &DiscreteKernel, upper: &DiscreteKernel, n: u32, h_l1: f64) -> Result<DbarBoundReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("depth N must be positive".into()));
    }
    let mut gaps = Vec::with_capacity(n as usize - 1);
    let mut lower_sum = 0.0;
    for level in 1..n {
        let (lo, up) = (diagonal_at_origin(lower, level)?, diagonal_at_origin(upper, level)?);
        let gap = up - lo;
        if gap < -GAP_TOLERANCE {
            return Err(Error::NegativeGap { level, gap });
        }
        gaps.push(gap);
        lower_sum += lo;
    }
    let tail = h_l1 - lower_sum;
    let total = gaps.iter().sum::<f64>() + tail;
    Ok(DbarBoundReport { n, gaps, tail, total })
}

/// `(∫∫_{C_z × C_w} |K̄(x-y) - K̲(x-y)|² dx dy)^{1/2}` for unit cells `C_z`, `C_w`.
///
/// With `u = x - y` the double integral becomes `∫ |D(u)|² ∏ (1 - |u_j - Δ_j|)_+ du`
/// where `Δ = z - w`. By Cauchy–Schwarz this bounds `|K̄^Φ - K̲^Φ|` on every
/// entry of the `(z, w)` block.
pub fn kernel_gap_bound(lower: &KernelSpec, upper: &KernelSpec, z: &[i64], w: &[i64]) -> Result<f64> {
    let d = lower.dim();
    if upper.dim() != d || z.len() != d || w.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.len() });
    }
    let delta: Vec<f64> = z.iter().zip(w).map(|(a, b)| (a - b) as f64).collect();
    let reach = delta.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;
    let lo = KernelEvaluator::new(lower, reach)?;
    let up = KernelEvaluator::new(upper, reach)?;

    let (panels, order) = if d == 1 { (16, 10) } else { (4, 6) };
    let (gx, gw) = gauss_legendre(order);
    // 1-D rule on [-1, 1], split at the kink of the triangular weight
    let mut axis = Vec::new();
    for p in 0..2 * panels {
        let a = -1.0 + p as f64 / panels as f64;
        let h = 1.0 / panels as f64;
        for (x, wt) in gx.iter().zip(&gw) {
            let s = a + 0.5 * h * (x + 1.0);
            axis.push((s, 0.5 * h * wt * (1.0 - s.abs())));
        }
    }
    let total_nodes = axis.len().pow(d as u32);
    let mut acc = 0.0;
    let mut u = vec![0.0; d];
    for flat in 0..total_nodes {
        let mut rem = flat;
        let mut weight = 1.0;
        for j in 0..d {
            let (s, wt) = axis[rem % axis.len()];
            rem /= axis.len();
            u[j] = delta[j] + s;
            weight *= wt;
        }
        if weight == 0.0 {
            continue;
        }
        let diff = up.quadrature(&u)? - lo.quadrature(&u)?;
        acc += weight * diff.norm_sqr();
    }
    Ok(acc.sqrt())
}
