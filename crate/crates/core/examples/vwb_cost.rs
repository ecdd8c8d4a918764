//! Transport cost between a rectangle's law and its law conditioned on past
//! events, for a finitely dependent tree process.

use tidpp::coupling::{vwb_scan, FieldDistribution};
use tidpp::discrete::exact_distribution;
use tidpp::spectral::{KernelSpec, SpectralDensity, Variant};
use tidpp::tree::{CellBasis, TreeKernel, TreeWindow};

fn main() -> tidpp::error::Result<()> {
    let h = SpectralDensity::box_density(1, 0.5, 1.0)?;
    let window = TreeWindow::new(vec![0], vec![2], 3)?;
    for v in [Variant::Base, Variant::Smoothed(1.0)] {
        let k = TreeKernel::new(&KernelSpec::new(h.clone(), v)?, &CellBasis::new(1, 3))?.section(&window.sites())?;
        let joint = FieldDistribution::from_subsets(&exact_distribution(&k)?)?;
        // rectangle: cell 2; past: single sites of cells 0 and 1
        let rows = vwb_scan(&joint, &[6, 7, 8], &[0, 1, 2, 3, 4, 5])?;
        let worst = |cell: i64| rows.iter().filter(|r| r.on.iter().all(|&i| k.sites()[i].cell()[0] == cell)).map(|r| r.cost).fold(0.0, f64::max);
        println!("{:>8}: worst cost conditioning on cell 0 {:.2e}, on cell 1 {:.2e}", v.name(), worst(0), worst(1));
    }
    Ok(())
}
