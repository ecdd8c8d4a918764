//! The tree-indexed kernel on one cell: diagonal per level, trace deficit,
//! and the projected occupation count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tidpp::discrete::Sampler;
use tidpp::spectral::{KernelSpec, SpectralDensity};
use tidpp::stats::MomentSummary;
use tidpp::tree::{CellBasis, TreeKernel, TreeWindow};

fn main() -> tidpp::error::Result<()> {
    let levels = 16;
    let spec = KernelSpec::base(SpectralDensity::box_density(1, 0.5, 1.0)?)?;
    let basis = CellBasis::new(1, levels);
    let tk = TreeKernel::new(&spec, &basis)?;
    let window = TreeWindow::new(vec![0], vec![0], levels)?;
    let k = tk.section(&window.sites())?;
    for l in 0..5 {
        println!("level {} (mode {:?}): K(0,l;0,l) = {:.6}", l + 1, basis.mode(l as u32 + 1), k.entry(l, l).re);
    }
    let deficit = tk.trace_deficit(levels)?;
    println!("‖ĥ‖₁ = {:.6}, trace deficit beyond level {levels} = {deficit:.6}", tk.l1_norm());

    let sampler = Sampler::new(&k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let counts: Vec<f64> = (0..20_000).map(|_| sampler.sample(&mut rng).map(|s| s.len() as f64)).collect::<Result<_, _>>()?;
    let m = MomentSummary::from_samples(&counts);
    println!("mean cell count {:.4} ± {:.4} (expected {:.4})", m.mean.value, m.mean.std_error, tk.l1_norm() - deficit);
    Ok(())
}
