//! Approximate continuum sine-process samples on [0, 8): count variance well
//! below the mean, and the two-point function at displacement 0.5.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tidpp::continuum::{sample_poisson, ContinuumSampler, WindowBox};
use tidpp::spectral::{KernelSpec, SpectralDensity};
use tidpp::stats::MomentSummary;

fn main() -> tidpp::error::Result<()> {
    let window = WindowBox::new(vec![0.0], vec![8.0])?;
    let spec = KernelSpec::base(SpectralDensity::box_density(1, 0.5, 1.0)?)?;
    let sampler = ContinuumSampler::new(&spec, &window, 0.125)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws: Vec<Vec<usize>> = (0..10_000).map(|_| sampler.sample_cells(&mut rng)).collect::<Result<_, _>>()?;
    let dpp: Vec<f64> = draws.iter().map(|d| d.len() as f64).collect();
    let poi: Vec<f64> = (0..10_000).map(|_| sample_poisson(&window, 1.0, &mut rng).map(|c| c.len() as f64)).collect::<Result<_, _>>()?;
    let (d, p) = (MomentSummary::from_samples(&dpp), MomentSummary::from_samples(&poi));
    println!("DPP:     mean {:.3}, variance {:.3}", d.mean.value, d.variance.value);
    println!("Poisson: mean {:.3}, variance {:.3}", p.mean.value, p.variance.value);
    let rho2 = sampler.two_point_estimate(&draws, &[4])?;
    let exact = 1.0 - (2.0 / std::f64::consts::PI).powi(2);
    println!("ρ₂(0, 0.5) ≈ {:.4} ± {:.4} (exact {exact:.4})", rho2.value, rho2.std_error);
    println!("one draw: {:?}", sampler.place(&draws[0], &mut rng).points);
    Ok(())
}
