//! Tent windows, their transforms, and the band limit of the smoothed kernel
//! `K_r = K · w_r`.

use tidpp::spectral::{smooth_density, smoothed_kernel_identity_check, KernelEvaluator, KernelSpec, SpectralDensity, TentWindow, Variant};

fn main() -> tidpp::error::Result<()> {
    let h = SpectralDensity::box_density(1, 0.5, 1.0)?;
    for r in [1.0, 2.0, 4.0] {
        let w = TentWindow::new(1, r)?;
        let hr = smooth_density(&h, r)?;
        let ev = KernelEvaluator::new(&KernelSpec::new(h.clone(), Variant::Smoothed(r))?, r + 1.0)?;
        let grid: Vec<Vec<f64>> = (0..=20).map(|i| vec![-r - 1.0 + (2.0 * r + 2.0) * i as f64 / 20.0]).collect();
        let identity = smoothed_kernel_identity_check(&h, r, &grid)?;
        println!(
            "r={r}: ŵ_r(0)={:.4}, ĥ_r(0)={:.6}, ‖ĥ_r‖₁={:.6}, K_r(r)={:.1e}, max|K_r - K·w_r|={identity:.1e}",
            w.fourier(&[0.0]),
            hr.eval(&[0.0]),
            hr.l1_norm(),
            ev.eval(&[r])?.norm(),
        );
    }
    Ok(())
}
