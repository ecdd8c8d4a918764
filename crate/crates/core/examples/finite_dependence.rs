//! Smoothed tree kernels are finitely dependent; the unsmoothed one is not.

use tidpp::coupling::{dependence_radius_scan, first_compliant_separation};
use tidpp::spectral::{KernelSpec, SpectralDensity, Variant};
use tidpp::tree::{CellBasis, TreeKernel, TreeWindow};

fn main() -> tidpp::error::Result<()> {
    let h = SpectralDensity::box_density(1, 0.5, 1.0)?;
    let window = TreeWindow::new(vec![0], vec![5], 3)?;
    let basis = CellBasis::new(1, 3);
    for v in [Variant::Base, Variant::Smoothed(1.0), Variant::Smoothed(2.0)] {
        let k = TreeKernel::new(&KernelSpec::new(h.clone(), v)?, &basis)?.section(&window.sites())?;
        let rows = dependence_radius_scan(&k, 5)?;
        let defects: Vec<String> = rows.iter().map(|r| format!("{:.1e}", r.max_defect)).collect();
        println!("{:>8} {:?}: defects by separation [{}], independent from {:?}", v.name(), v.radius(), defects.join(", "), first_compliant_separation(&rows, 1e-10));
    }
    Ok(())
}
