use super::flow::{Network, EPS};
use super::{loewner_leq, FieldDistribution, LoewnerReport};
use crate::discrete::{exact_distribution, inclusion_prob, DiscreteKernel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Flow shortfall below which a coupling is accepted.
const FLOW_TOLERANCE: f64 = 1e-9;
/// Largest site count for the DPP domination suite.
const MAX_SUITE_SITES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dominated,
    NotDominated,
}

/// The up-set generated by a list of patterns: every `ω` above some generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpSet {
    pub generators: Vec<usize>,
}

impl UpSet {
    pub fn contains(&self, mask: usize) -> bool {
        self.generators.iter().any(|&g| g & mask == g)
    }

    pub fn mass(&self, f: &FieldDistribution) -> f64 {
        f.probs().iter().enumerate().filter(|(m, _)| self.contains(*m)).map(|(_, p)| p).sum()
    }
}

/// Either a monotone coupling of `μ` and `ν` or an up-set `U` with `μ(U) > ν(U)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub verdict: Verdict,
    /// Maximum flow through the admissible pairs.
    pub flow: f64,
    /// `(ζ, ω, mass)` with `ζ ≤ ω`, when dominated.
    pub coupling: Option<Vec<(usize, usize, f64)>>,
    /// Violated up-set with its masses `(μ(U), ν(U))`, when not dominated.
    pub witness: Option<(UpSet, f64, f64)>,
}

/// Result of re-checking a certificate against its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    /// Largest marginal discrepancy of the coupling (0 for witnesses).
    pub marginal_defect: f64,
    /// Coupling mass on pairs with `ζ ≰ ω`.
    pub off_order_mass: f64,
    /// `μ(U) - ν(U)` for witnesses (0 for couplings).
    pub violation: f64,
}

impl CertificateCheck {
    pub fn verifies(&self, tol: f64) -> bool {
        self.marginal_defect <= tol && self.off_order_mass == 0.0 && self.violation >= 0.0
    }
}

impl DominationCertificate {
    /// Recompute marginals and order support of the coupling, or the masses of
    /// the witness, from the inputs.
    pub fn verify(&self, mu: &FieldDistribution, nu: &FieldDistribution) -> CertificateCheck {
        match (&self.coupling, &self.witness) {
            (Some(pairs), _) => {
                let mut row = vec![0.0; mu.probs().len()];
                let mut col = vec![0.0; nu.probs().len()];
                let mut off = 0.0;
                for &(z, w, m) in pairs {
                    row[z] += m;
                    col[w] += m;
                    if z & w != z {
                        off += m;
                    }
                }
                let defect = row
                    .iter()
                    .zip(mu.probs())
                    .chain(col.iter().zip(nu.probs()))
                    .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                CertificateCheck { marginal_defect: defect, off_order_mass: off, violation: 0.0 }
            }
            (None, Some((u, _, _))) => {
                CertificateCheck { marginal_defect: 0.0, off_order_mass: 0.0, violation: u.mass(mu) - u.mass(nu) }
            }
            (None, None) => CertificateCheck { marginal_defect: f64::INFINITY, off_order_mass: 0.0, violation: -1.0 },
        }
    }
}

/// Decide `μ ≤ ν` in the stochastic order by max-flow over the pairs `ζ ≤ ω`.
pub fn strassen_check(mu: &FieldDistribution, nu: &FieldDistribution) -> Result<DominationCertificate> {
    if mu.sites() != nu.sites() {
        return Err(Error::SiteMismatch);
    }
    let size = mu.probs().len();
    let (src, sink) = (2 * size, 2 * size + 1);
    let mut g = Network::new(2 * size + 2);
    let support_mu: Vec<usize> = (0..size).filter(|&m| mu.prob(m) > 0.0).collect();
    let support_nu: Vec<usize> = (0..size).filter(|&m| nu.prob(m) > 0.0).collect();
    let mut source_edge = vec![usize::MAX; size];
    let mut sink_edge = vec![usize::MAX; size];
    for &z in &support_mu {
        source_edge[z] = g.add_edge(src, z, mu.prob(z), 0.0);
    }
    for &w in &support_nu {
        sink_edge[w] = g.add_edge(size + w, sink, nu.prob(w), 0.0);
    }
    let mut middle = Vec::new();
    let mut preloaded = 0.0;
    for &z in &support_mu {
        for &w in &support_nu {
            if z & w == z {
                // capacity 2 exceeds any possible flow: effectively infinite
                let e = g.add_edge(z, size + w, 2.0, 0.0);
                middle.push((z, w, e));
                if z == w {
                    // keep common mass in place; the search reroutes it only if needed
                    let m = mu.prob(z).min(nu.prob(z));
                    g.preload(&[source_edge[z], e, sink_edge[z]], m);
                    preloaded += m;
                }
            }
        }
    }
    let flow = preloaded + g.max_flow(src, sink);
    if 1.0 - flow <= FLOW_TOLERANCE {
        let coupling = middle
            .iter()
            .map(|&(z, w, e)| (z, w, g.flow(e)))
            .filter(|&(_, _, m)| m > EPS)
            .collect();
        return Ok(DominationCertificate { verdict: Verdict::Dominated, flow, coupling: Some(coupling), witness: None });
    }
    // min cut: source-side ζ nodes generate an up-set with μ(U) ≥ μ(A) > ν(U)
    let reach = g.reachable(src);
    let up = UpSet { generators: support_mu.iter().copied().filter(|&z| reach[z]).collect() };
    let (mu_u, nu_u) = (up.mass(mu), up.mass(nu));
    Ok(DominationCertificate { verdict: Verdict::NotDominated, flow, coupling: None, witness: Some((up, mu_u, nu_u)) })
}

/// Loewner check, exact laws, Strassen certificate and inclusion monotonicity
/// for two DPPs on the same sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub loewner: LoewnerReport,
    pub certificate: DominationCertificate,
    pub check: CertificateCheck,
    /// `max_P (det K1_P - det K2_P)`; at most 1e-9 when inclusion is monotone.
    pub worst_inclusion_excess: f64,
}

impl DominationReport {
    pub fn dominated(&self) -> bool {
        self.certificate.verdict == Verdict::Dominated
    }

    pub fn inclusion_monotone(&self) -> bool {
        self.worst_inclusion_excess <= 1e-9
    }
}

pub fn dpp_domination_suite(k1: &DiscreteKernel, k2: &DiscreteKernel) -> Result<DominationReport> {
    let n = k1.len();
    if n > MAX_SUITE_SITES {
        return Err(Error::TooManySites { n, max: MAX_SUITE_SITES });
    }
    let loewner = loewner_leq(k1, k2, 1e-8)?;
    let mu = FieldDistribution::from_subsets(&exact_distribution(k1)?)?;
    let nu = FieldDistribution::from_subsets(&exact_distribution(k2)?)?;
    let certificate = strassen_check(&mu, &nu)?;
    let check = certificate.verify(&mu, &nu);
    let mut worst = f64::NEG_INFINITY;
    for mask in 1..(1usize << n) {
        let p: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        worst = worst.max(inclusion_prob(k1, &p)? - inclusion_prob(k2, &p)?);
    }
    Ok(DominationReport { loewner, certificate, check, worst_inclusion_excess: worst.max(0.0) })
}
