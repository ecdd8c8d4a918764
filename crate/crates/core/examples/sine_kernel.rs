//! Evaluate the sine kernel from its spectral density and compare with the
//! closed form; write the table as CSV to stdout.

use tidpp::spectral::{kernel_table, write_kernel_csv, KernelEvaluator, KernelSpec, SpectralDensity};

fn main() -> tidpp::error::Result<()> {
    let spec = KernelSpec::base(SpectralDensity::box_density(1, 0.5, 1.0)?)?;
    let ev = KernelEvaluator::new(&spec, 4.0)?;
    let mut worst: f64 = 0.0;
    for i in 0..=16 {
        let u = -4.0 + 0.5 * i as f64;
        let q = ev.quadrature(&[u])?;
        worst = worst.max((q - spec.closed_form(&[u]).unwrap()).norm());
    }
    eprintln!("quadrature vs sin(πu)/(πu): max deviation {worst:.2e}");

    let us: Vec<Vec<f64>> = (0..=8).map(|i| vec![i as f64 * 0.5]).collect();
    write_kernel_csv(std::io::stdout().lock(), 1, &kernel_table(&spec, &us)?)
}
