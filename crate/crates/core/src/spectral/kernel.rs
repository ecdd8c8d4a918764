use super::density::{bound_densities, smooth_density, BaseProfile, SpectralDensity};
use super::quadrature::{QuadratureRule, SpectralGrid};
use super::tent::TentWindow;
use crate::error::{Error, Result};
use crate::special::sinc;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Largest deviation tolerated between quadrature and a closed-form kernel.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
/// Largest imaginary part tolerated for kernels of even densities.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Which member of the smoothed family a kernel is built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "r", rename_all = "lowercase")]
pub enum Variant {
    Base,
    Smoothed(f64),
    Lower(f64),
    Upper(f64),
}

impl Variant {
    pub fn radius(&self) -> Option<f64> {
        match *self {
            Variant::Base => None,
            Variant::Smoothed(r) | Variant::Lower(r) | Variant::Upper(r) => Some(r),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Smoothed(_) => "smoothed",
            Variant::Lower(_) => "lower",
            Variant::Upper(_) => "upper",
        }
    }
}

/// A translation-invariant kernel: a piecewise-constant density plus the
/// smoothing variant applied to it.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub density: SpectralDensity,
    pub variant: Variant,
}

impl KernelSpec {
    pub fn new(density: SpectralDensity, variant: Variant) -> Result<Self> {
        if density.as_base().is_none() {
            return Err(Error::InvalidParameter("kernel specs take a piecewise-constant density".into()));
        }
        if let Some(r) = variant.radius() {
            TentWindow::new(density.dim(), r)?;
        }
        Ok(Self { density, variant })
    }

    pub fn base(density: SpectralDensity) -> Result<Self> {
        Self::new(density, Variant::Base)
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    /// The density actually integrated against `e^{2πiu·t}`.
    pub fn effective_density(&self) -> Result<SpectralDensity> {
        match self.variant {
            Variant::Base => Ok(self.density.clone()),
            Variant::Smoothed(r) => smooth_density(&self.density, r),
            Variant::Lower(r) => Ok(bound_densities(&self.density, r)?.0),
            Variant::Upper(r) => Ok(bound_densities(&self.density, r)?.1),
        }
    }

    /// Analytic kernel, when one is known: `c ∏ 2a·sinc(2a u_j)` for a box.
    pub fn closed_form(&self, u: &[f64]) -> Option<Complex64> {
        match (self.variant, self.density.as_base()?) {
            (Variant::Base, BaseProfile::Box { half_width, height }) => {
                let a = *half_width;
                let v: f64 = u.iter().map(|&x| 2.0 * a * sinc(2.0 * a * x)).product();
                Some(Complex64::new(height * v, 0.0))
            }
            _ => None,
        }
    }
}

/// Quadrature-backed evaluator of `K(u)` for displacements up to a fixed size.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    spec: KernelSpec,
    grid: SpectralGrid,
    max_displacement: f64,
    even: bool,
}

impl KernelEvaluator {
    pub fn new(spec: &KernelSpec, max_displacement: f64) -> Result<Self> {
        let density = spec.effective_density()?;
        let rule = QuadratureRule::for_kernel(spec.dim(), max_displacement);
        Ok(Self::with_rule(spec, &density, &rule, max_displacement))
    }

    fn with_rule(spec: &KernelSpec, density: &SpectralDensity, rule: &QuadratureRule, max_displacement: f64) -> Self {
        Self {
            spec: spec.clone(),
            grid: SpectralGrid::new(density, rule),
            max_displacement: max_displacement.abs(),
            even: density.is_even(),
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Raw quadrature value, without cross-checks.
    pub fn quadrature(&self, u: &[f64]) -> Result<Complex64> {
        if u.len() != self.spec.dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), got: u.len() });
        }
        let reach = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if reach > self.max_displacement * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "displacement {reach} exceeds the evaluator range {}",
                self.max_displacement
            )));
        }
        Ok(self.grid.kernel(u))
    }

    /// `K(u)`: the closed form where one exists (after a quadrature cross-check),
    /// otherwise the quadrature value.
    pub fn eval(&self, u: &[f64]) -> Result<Complex64> {
        let q = self.quadrature(u)?;
        if self.even && q.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::ImaginaryResidue(q.im));
        }
        match self.spec.closed_form(u) {
            Some(c) => {
                let deviation = (c - q).norm();
                if deviation > CLOSED_FORM_TOLERANCE {
                    return Err(Error::QuadratureTolerance { deviation, tolerance: CLOSED_FORM_TOLERANCE });
                }
                Ok(c)
            }
            None => Ok(q),
        }
    }

    /// `K(x, y) = K(x - y)`.
    pub fn eval_pair(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        let u: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.eval(&u)
    }
}

fn displacement(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

/// `K(x, y) = ∫ ĥ(t) e^{2πi(x-y)·t} dt` for a single pair of points.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<Complex64> {
    let u = displacement(x, y)?;
    let reach = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    KernelEvaluator::new(spec, reach)?.eval(&u)
}

/// `max |K_r(u) - K(u) w_r(u)|` over the given displacements, with both sides
/// computed by independent quadratures.
pub fn smoothed_kernel_identity_check(h: &SpectralDensity, r: f64, samples: &[Vec<f64>]) -> Result<f64> {
    let window = TentWindow::new(h.dim(), r)?;
    let reach = samples.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let smoothed = KernelEvaluator::new(&KernelSpec::new(h.clone(), Variant::Smoothed(r))?, reach)?;
    let base = KernelEvaluator::new(&KernelSpec::base(h.clone())?, reach)?;
    let mut worst = 0.0f64;
    for u in samples {
        let lhs = smoothed.quadrature(u)?;
        let rhs = base.quadrature(u)? * window.eval(u);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// One row of a kernel table.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelRow {
    pub displacement: Vec<f64>,
    pub value: Complex64,
}

/// Evaluate `K` at every displacement with a single shared quadrature grid.
pub fn kernel_table(spec: &KernelSpec, displacements: &[Vec<f64>]) -> Result<Vec<KernelRow>> {
    let reach = displacements.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let ev = KernelEvaluator::new(spec, reach)?;
    displacements
        .iter()
        .map(|u| Ok(KernelRow { displacement: u.clone(), value: ev.eval(u)? }))
        .collect()
}

/// CSV with columns `u1, …, ud, re, im`.
pub fn write_kernel_csv<W: Write>(out: W, dim: usize, rows: &[KernelRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dim).map(|j| format!("u{j}")).collect();
    header.push("re".into());
    header.push("im".into());
    w.write_record(&header)?;
    for row in rows {
        let mut rec: Vec<String> = row.displacement.iter().map(|x| format!("{x:.17e}")).collect();
        rec.push(format!("{:.17e}", row.value.re));
        rec.push(format!("{:.17e}", row.value.im));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine() -> SpectralDensity {
        SpectralDensity::box_density(1, 0.5, 1.0).unwrap()
    }

    #[test]
    fn sine_kernel_examples() {
        let spec = KernelSpec::base(sine()).unwrap();
        assert!((kernel_eval(&spec, &[0.0], &[0.0]).unwrap().re - 1.0).abs() < 1e-12);
        assert!(kernel_eval(&spec, &[1.0], &[0.0]).unwrap().norm() < 1e-12);
        assert!((kernel_eval(&spec, &[0.7], &[0.2]).unwrap().re - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_sinc_oracle_for_boxes() {
        for &(d, a, c) in &[(1usize, 0.5, 1.0), (1, 1.3, 0.4), (2, 0.5, 0.8)] {
            let spec = KernelSpec::base(SpectralDensity::box_density(d, a, c).unwrap()).unwrap();
            let ev = KernelEvaluator::new(&spec, 4.0).unwrap();
            for k in 0..20 {
                let u: Vec<f64> = (0..d).map(|j| -4.0 + 0.41 * k as f64 + 0.13 * j as f64).collect();
                let oracle: f64 = c * u.iter().map(|&x| if x == 0.0 { 2.0 * a } else { (2.0 * PI * a * x).sin() / (PI * x) }).product::<f64>();
                let q = ev.quadrature(&u).unwrap();
                assert!((q.re - oracle).abs() < 1e-9 && q.im.abs() < 1e-12, "d={d} u={u:?}");
            }
        }
    }

    #[test]
    fn smoothed_kernel_is_band_limited() {
        for &r in &[1.0, 2.0, 4.0] {
            let samples: Vec<Vec<f64>> = (0..25).map(|i| vec![-5.0 + 0.4 * i as f64 + 0.01]).collect();
            let dev = smoothed_kernel_identity_check(&sine(), r, &samples).unwrap();
            assert!(dev < 1e-6, "r={r}: {dev}");
        }
        let spec = KernelSpec::new(sine(), Variant::Smoothed(2.0)).unwrap();
        let ev = KernelEvaluator::new(&spec, 6.0).unwrap();
        for &u in &[2.0, 2.5, 3.3, 6.0] {
            assert!(ev.eval(&[u]).unwrap().norm() < 1e-6);
        }
        assert!((ev.eval(&[0.0]).unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hermitian_for_asymmetric_grid_density() {
        use super::super::density::GridProfile;
        let g = GridProfile { lo: vec![-0.2], spacing: vec![0.3], shape: vec![3], values: vec![1.0, 0.5, 0.25] };
        let spec = KernelSpec::base(SpectralDensity::grid(g).unwrap()).unwrap();
        let ev = KernelEvaluator::new(&spec, 3.0).unwrap();
        for &(x, y) in &[(0.3, 1.1), (-2.0, 0.5)] {
            let a = ev.eval_pair(&[x], &[y]).unwrap();
            let b = ev.eval_pair(&[y], &[x]).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
            assert!(a.im.abs() > 1e-3);
        }
    }

    #[test]
    fn variants_order_on_the_diagonal() {
        let r = 2.0;
        let k = |v| kernel_eval(&KernelSpec::new(sine(), v).unwrap(), &[0.0], &[0.0]).unwrap().re;
        let (lo, base, sm, up) = (k(Variant::Lower(r)), k(Variant::Base), k(Variant::Smoothed(r)), k(Variant::Upper(r)));
        assert!(lo < base && base < up);
        assert!((sm - base).abs() < 1e-9);
        assert!((up - lo - 2.0 * (base - lo)).abs() < 1e-9);
    }

    #[test]
    fn csv_table_layout() {
        let spec = KernelSpec::base(sine()).unwrap();
        let rows = kernel_table(&spec, &[vec![0.0], vec![0.5]]).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, 1, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u1,re,im\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn range_is_enforced() {
        let ev = KernelEvaluator::new(&KernelSpec::base(sine()).unwrap(), 1.0).unwrap();
        assert!(ev.eval(&[2.0]).is_err());
        assert!(ev.eval(&[0.5, 0.5]).is_err());
    }
}
