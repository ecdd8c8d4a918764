//! Lower/upper kernels bracket the base kernel in the Loewner order, and the
//! lower tree process is stochastically dominated by the upper one.

use tidpp::coupling::{dpp_domination_suite, loewner_leq};
use tidpp::spectral::{KernelSpec, SpectralDensity, Variant};
use tidpp::tree::{CellBasis, TreeKernel, TreeWindow};

fn main() -> tidpp::error::Result<()> {
    let h = SpectralDensity::box_density(1, 0.5, 1.0)?;
    let window = TreeWindow::new(vec![0], vec![1], 4)?;
    let basis = CellBasis::new(1, 4);
    let section = |v| TreeKernel::new(&KernelSpec::new(h.clone(), v)?, &basis)?.section(&window.sites());
    let base = section(Variant::Base)?;
    for r in [1.0, 2.0] {
        let (lo, up) = (section(Variant::Lower(r))?, section(Variant::Upper(r))?);
        let a = loewner_leq(&lo, &base, 1e-8)?;
        let b = loewner_leq(&base, &up, 1e-8)?;
        let rep = dpp_domination_suite(&lo, &up)?;
        println!(
            "r={r}: λ_min(K - K̲)={:.2e}, λ_min(K̄ - K)={:.2e}, verdict {:?}, coupling pairs {}, marginal defect {:.1e}",
            a.min_eigenvalue,
            b.min_eigenvalue,
            rep.certificate.verdict,
            rep.certificate.coupling.as_ref().map_or(0, |c| c.len()),
            rep.check.marginal_defect
        );
    }
    Ok(())
}
