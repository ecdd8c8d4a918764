//! The computable dbar upper bound between lower and upper tree processes
//! shrinks as the smoothing radius grows.

use tidpp::coupling::{dbar_upper_bound, kernel_gap_bound};
use tidpp::spectral::{KernelSpec, SpectralDensity, Variant};
use tidpp::tree::{CellBasis, TreeKernel, TreeWindow};

fn main() -> tidpp::error::Result<()> {
    let h = SpectralDensity::box_density(1, 0.5, 1.0)?;
    let n = 4;
    let basis = CellBasis::new(1, n);
    let sites = TreeWindow::new(vec![0], vec![0], n)?.sites();
    for r in [1.0, 2.0, 4.0, 8.0] {
        let (ls, us) = (KernelSpec::new(h.clone(), Variant::Lower(r))?, KernelSpec::new(h.clone(), Variant::Upper(r))?);
        let (lo, up) = (TreeKernel::new(&ls, &basis)?, TreeKernel::new(&us, &basis)?);
        let rep = dbar_upper_bound(&lo.section(&sites)?, &up.section(&sites)?, n, up.l1_norm())?;
        println!("r={r}: gaps {:.4?}, tail {:.4}, bound {:.4}, entry gap bound (0,0) {:.4}", rep.gaps, rep.tail, rep.total, kernel_gap_bound(&ls, &us, &[0], &[0])?);
    }
    Ok(())
}
