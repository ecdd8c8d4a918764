use super::flow::Network;
use super::FieldDistribution;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest rectangle handled by exact transport.
pub const MAX_VWB_SITES: usize = 4;

/// Minimal expected normalized Hamming distance `E[(1/#R) Σ 1{X_z ≠ Y_z}]`
/// over all couplings of `nu` and `nu_conditioned`.
pub fn vwb_coupling_cost(nu: &FieldDistribution, nu_conditioned: &FieldDistribution) -> Result<f64> {
    if nu.sites() != nu_conditioned.sites() {
        return Err(Error::SiteMismatch);
    }
    let n = nu.len();
    if n > MAX_VWB_SITES {
        return Err(Error::TooManySites { n, max: MAX_VWB_SITES });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let size = 1usize << n;
    let (src, sink) = (2 * size, 2 * size + 1);
    let mut g = Network::new(2 * size + 2);
    for x in 0..size {
        if nu.prob(x) > 0.0 {
            g.add_edge(src, x, nu.prob(x), 0.0);
        }
        if nu_conditioned.prob(x) > 0.0 {
            g.add_edge(size + x, sink, nu_conditioned.prob(x), 0.0);
        }
    }
    for x in 0..size {
        for y in 0..size {
            let cost = (x ^ y).count_ones() as f64 / n as f64;
            g.add_edge(x, size + y, 2.0, cost);
        }
    }
    let (_, cost) = g.min_cost_flow(src, sink, 1.0);
    Ok(cost.clamp(0.0, 1.0))
}

/// Transport cost between the rectangle law and its law under one
/// conditioning event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VwbRow {
    /// Indices (into the joint law) of the conditioning coordinates.
    pub on: Vec<usize>,
    pub pattern: usize,
    pub event_prob: f64,
    pub cost: f64,
}

/// Costs for every event `{X_q = pattern}` on one or two coordinates `q` of
/// `past` with positive probability, comparing the law on `rect` with its
/// conditional law.
pub fn vwb_scan(joint: &FieldDistribution, rect: &[usize], past: &[usize]) -> Result<Vec<VwbRow>> {
    let base = joint.marginal(rect)?;
    let mut events: Vec<Vec<usize>> = past.iter().map(|&q| vec![q]).collect();
    for (a, &p) in past.iter().enumerate() {
        for &q in &past[a + 1..] {
            events.push(vec![p, q]);
        }
    }
    let mut rows = Vec::new();
    for on in events {
        for pattern in 0..(1usize << on.len()) {
            let event_prob = joint.event_prob(&on, pattern)?;
            if event_prob <= 0.0 {
                continue;
            }
            let cond = joint.conditional(rect, &on, pattern)?;
            rows.push(VwbRow { on: on.clone(), pattern, event_prob, cost: vwb_coupling_cost(&base, &cond)? });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::SiteIndex;
    use proptest::prelude::*;

    // Brute-force oracle: the transport LP on 2 sites has 16 variables; for
    // product-form marginals on one site the cost is |p - q| exactly.
    #[test]
    fn examples() {
        let nu = FieldDistribution::product(&[0.3, 0.8]).unwrap();
        assert!(vwb_coupling_cost(&nu, &nu).unwrap().abs() < 1e-15);
        let a = FieldDistribution::point_mass(2, 0b00).unwrap();
        let b = FieldDistribution::point_mass(2, 0b11).unwrap();
        assert!((vwb_coupling_cost(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let one = FieldDistribution::product(&[0.2]).unwrap();
        let two = FieldDistribution::product(&[0.65]).unwrap();
        assert!((vwb_coupling_cost(&one, &two).unwrap() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn independent_conditioning_costs_nothing() {
        // sites 0,1 form the rectangle; site 2 is an independent distant coordinate
        let joint = FieldDistribution::product(&[0.5, 0.5, 0.5]).unwrap();
        let rows = vwb_scan(&joint, &[0, 1], &[2]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.cost.abs() < 1e-15));
    }

    #[test]
    fn dependent_conditioning_costs_something() {
        // site 2 copies site 0
        let sites: Vec<_> = (0..3i64).map(|i| SiteIndex::lattice(&[i])).collect();
        let mut probs = vec![0.0; 8];
        for m in 0..8usize {
            if (m & 1) == (m >> 2 & 1) {
                probs[m] = 0.25;
            }
        }
        let joint = FieldDistribution::new(sites, probs).unwrap();
        let rows = vwb_scan(&joint, &[0, 1], &[2]).unwrap();
        for r in rows {
            assert!((r.cost - 0.25).abs() < 1e-15, "{r:?}");
        }
    }

    fn dist() -> impl Strategy<Value = FieldDistribution> {
        proptest::collection::vec(0.01f64..1.0, 4).prop_map(|v| {
            let s: f64 = v.iter().sum();
            FieldDistribution::new((0..2i64).map(|i| SiteIndex::lattice(&[i])).collect(), v.iter().map(|x| x / s).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn transport_cost_is_a_metric(a in dist(), b in dist(), c in dist()) {
            let ab = vwb_coupling_cost(&a, &b).unwrap();
            let ba = vwb_coupling_cost(&b, &a).unwrap();
            let bc = vwb_coupling_cost(&b, &c).unwrap();
            let ac = vwb_coupling_cost(&a, &c).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-9);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
