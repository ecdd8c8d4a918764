use super::quadrature::tensor_nodes;
use super::tent::TentWindow;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Mass of `ŵ_r` allowed outside the recorded truncation box of a smoothed density.
pub const WINDOW_TAIL_BUDGET: f64 = 1e-4;

/// Piecewise-constant profile on a uniform grid of cells. Cell `i` along axis
/// `j` covers `[lo_j + i h_j, lo_j + (i+1) h_j)`; the profile vanishes outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridProfile {
    pub lo: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
    /// Row-major cell values, last axis fastest.
    pub values: Vec<f64>,
}

impl GridProfile {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn hi(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.lo[j] + self.spacing[j] * self.shape[j] as f64).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    fn validate(&self) -> Result<()> {
        let d = self.lo.len();
        if d == 0 || self.spacing.len() != d || self.shape.len() != d {
            return Err(Error::InvalidParameter("grid lo/spacing/shape lengths disagree".into()));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        let cells: usize = self.shape.iter().product();
        if cells != self.values.len() {
            return Err(Error::DimensionMismatch { expected: cells, got: self.values.len() });
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("grid value {v} outside [0, 1]")));
        }
        Ok(())
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let mut idx = Vec::with_capacity(t.len());
        for j in 0..t.len() {
            let c = ((t[j] - self.lo[j]) / self.spacing[j]).floor();
            if c < 0.0 || c >= self.shape[j] as f64 {
                return 0.0;
            }
            idx.push(c as usize);
        }
        self.values[self.flat_index(&idx)]
    }

    fn edges(&self, axis: usize) -> Vec<f64> {
        (0..=self.shape[axis]).map(|i| self.lo[axis] + i as f64 * self.spacing[axis]).collect()
    }

    fn is_even(&self) -> bool {
        let hi = self.hi();
        for j in 0..self.dim() {
            if (self.lo[j] + hi[j]).abs() > 1e-12 * self.spacing[j] {
                return false;
            }
        }
        let n = self.values.len();
        let mut idx = vec![0usize; self.dim()];
        for flat in 0..n {
            let mut rem = flat;
            for j in (0..self.dim()).rev() {
                idx[j] = rem % self.shape[j];
                rem /= self.shape[j];
            }
            let mirrored: Vec<usize> = idx.iter().zip(&self.shape).map(|(&i, &s)| s - 1 - i).collect();
            if self.values[flat] != self.values[self.flat_index(&mirrored)] {
                return false;
            }
        }
        true
    }
}

/// A piecewise-constant spectral profile: the inputs the smoothing acts on.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseProfile {
    /// `height · 1_{[-a, a]^d}`.
    Box { half_width: f64, height: f64 },
    Grid(Arc<GridProfile>),
}

impl BaseProfile {
    pub fn eval(&self, t: &[f64]) -> f64 {
        match self {
            BaseProfile::Box { half_width, height } => {
                if t.iter().all(|x| x.abs() <= *half_width) {
                    *height
                } else {
                    0.0
                }
            }
            BaseProfile::Grid(g) => g.eval(t),
        }
    }

    pub fn bounding_box(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            BaseProfile::Box { half_width, .. } => (vec![-half_width; dim], vec![*half_width; dim]),
            BaseProfile::Grid(g) => (g.lo.clone(), g.hi()),
        }
    }

    /// Coordinates along `axis` where the profile may jump.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match self {
            BaseProfile::Box { half_width, .. } => vec![-half_width, *half_width],
            BaseProfile::Grid(g) => g.edges(axis),
        }
    }

    /// Largest `|s_j|` over the support, across all axes.
    pub fn support_radius(&self, dim: usize) -> f64 {
        let (lo, hi) = self.bounding_box(dim);
        lo.iter().chain(&hi).fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn l1(&self, dim: usize) -> f64 {
        match self {
            BaseProfile::Box { half_width, height } => height * (2.0 * half_width).powi(dim as i32),
            BaseProfile::Grid(g) => g.values.iter().sum::<f64>() * g.cell_volume(),
        }
    }

    fn is_even(&self) -> bool {
        match self {
            BaseProfile::Box { .. } => true,
            BaseProfile::Grid(g) => g.is_even(),
        }
    }

    /// Exact convolution `(ĥ ∗ ŵ_r)(t)`, integrating the window over each cell
    /// in closed form.
    pub fn smoothed_eval(&self, window: &TentWindow, t: &[f64]) -> f64 {
        match self {
            BaseProfile::Box { half_width, height } => {
                let a = *half_width;
                height * t.iter().map(|&tj| window.mass_1d(tj - a, tj + a)).product::<f64>()
            }
            BaseProfile::Grid(g) => {
                // factors[j][i] = ∫_{cell i on axis j} ŵ(t_j - s) ds
                let factors: Vec<Vec<f64>> = (0..g.dim())
                    .map(|j| {
                        let cum: Vec<f64> = g.edges(j).iter().map(|&e| window.cumulative_1d(t[j] - e)).collect();
                        cum.windows(2).map(|w| w[0] - w[1]).collect()
                    })
                    .collect();
                let d = g.dim();
                let mut idx = vec![0usize; d];
                let mut total = 0.0;
                for &v in &g.values {
                    if v != 0.0 {
                        let p: f64 = (0..d).map(|j| factors[j][idx[j]]).product();
                        total += v * p;
                    }
                    for j in (0..d).rev() {
                        idx[j] += 1;
                        if idx[j] < g.shape[j] {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
                total
            }
        }
    }
}

/// How a density is derived from its piecewise-constant base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivation {
    /// `ĥ ∗ ŵ_r`.
    Smoothed,
    /// `(ĥ ∗ ŵ_r) ∧ ĥ`.
    Lower,
    /// `(ĥ ∗ ŵ_r) ∨ ĥ`.
    Upper,
}

/// Bookkeeping for the heavy `sinc²` tails of a smoothed density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Half-width of the cube holding all but `window_tail_mass` of `ŵ_r`.
    pub window_half_width: f64,
    /// Mass of `ŵ_r` outside that cube (bounds the mass lost by truncation).
    pub window_tail_mass: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Base(BaseProfile),
    Derived { base: BaseProfile, window: TentWindow, derivation: Derivation },
}

/// A spectral density `ĥ : ℝ^d → [0, 1]` of finite mass.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    dim: usize,
    profile: Profile,
    l1_norm: f64,
    truncation: Option<Truncation>,
}

impl SpectralDensity {
    /// `height · 1_{[-a, a]^d}`; the sine kernel is `box_density(1, 0.5, 1.0)`.
    pub fn box_density(dim: usize, half_width: f64, height: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("box half-width must be positive, got {half_width}")));
        }
        if !(0.0..=1.0).contains(&height) {
            return Err(Error::InvalidParameter(format!("box height {height} outside [0, 1]")));
        }
        let base = BaseProfile::Box { half_width, height };
        Ok(Self { dim, l1_norm: base.l1(dim), profile: Profile::Base(base), truncation: None })
    }

    pub fn grid(grid: GridProfile) -> Result<Self> {
        grid.validate()?;
        let dim = grid.dim();
        let base = BaseProfile::Grid(Arc::new(grid));
        Ok(Self { dim, l1_norm: base.l1(dim), profile: Profile::Base(base), truncation: None })
    }

    /// The zero density on a unit box.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::box_density(dim, 0.5, 0.0)
    }

    pub(crate) fn derived(base: &BaseProfile, dim: usize, window: TentWindow, derivation: Derivation) -> Result<Self> {
        if window.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: window.dim() });
        }
        let base_l1 = base.l1(dim);
        let excess = if derivation == Derivation::Smoothed {
            0.0
        } else {
            positive_part_mass(base, dim, &window)
        };
        // ∫ ĥ_r = ∫ ĥ because ŵ_r has unit mass; min/max split the L¹ gap evenly.
        let l1_norm = match derivation {
            Derivation::Smoothed => base_l1,
            Derivation::Lower => base_l1 - excess,
            Derivation::Upper => base_l1 + excess,
        };
        let truncation = if derivation == Derivation::Lower {
            None
        } else {
            let half = window.truncation_half_width(WINDOW_TAIL_BUDGET);
            let (lo, hi) = base.bounding_box(dim);
            Some(Truncation {
                window_half_width: half,
                window_tail_mass: window.mass_outside_cube(half),
                lo: lo.iter().map(|x| x - half).collect(),
                hi: hi.iter().map(|x| x + half).collect(),
            })
        };
        Ok(Self {
            dim,
            profile: Profile::Derived { base: base.clone(), window, derivation },
            l1_norm,
            truncation,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `∫ ĥ`.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    /// The piecewise-constant profile, when this density is not derived.
    pub fn as_base(&self) -> Option<&BaseProfile> {
        match &self.profile {
            Profile::Base(b) => Some(b),
            Profile::Derived { .. } => None,
        }
    }

    /// The underlying base profile, whether or not this density is derived.
    pub fn base_profile(&self) -> &BaseProfile {
        match &self.profile {
            Profile::Base(b) | Profile::Derived { base: b, .. } => b,
        }
    }

    pub fn derivation(&self) -> Option<(Derivation, TentWindow)> {
        match &self.profile {
            Profile::Base(_) => None,
            Profile::Derived { window, derivation, .. } => Some((*derivation, *window)),
        }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.dim);
        match &self.profile {
            Profile::Base(b) => b.eval(t),
            Profile::Derived { base, window, derivation } => {
                let s = base.smoothed_eval(window, t);
                match derivation {
                    Derivation::Smoothed => s,
                    Derivation::Lower => s.min(base.eval(t)),
                    Derivation::Upper => s.max(base.eval(t)),
                }
            }
        }
    }

    /// True when the density is supported in a bounded box.
    pub fn is_compact(&self) -> bool {
        matches!(
            self.profile,
            Profile::Base(_) | Profile::Derived { derivation: Derivation::Lower, .. }
        )
    }

    /// The support box for compact densities, the truncation box otherwise.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.truncation {
            Some(t) => (t.lo.clone(), t.hi.clone()),
            None => self.base_profile().bounding_box(self.dim),
        }
    }

    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.base_profile().breakpoints(axis)
    }

    /// Whether `ĥ(-t) = ĥ(t)`, so the kernel is real.
    pub fn is_even(&self) -> bool {
        self.base_profile().is_even()
    }

    /// Sample the density at cell midpoints of a uniform grid over
    /// [`bounding_box`](Self::bounding_box).
    pub fn tabulate(&self, spacing: f64) -> Result<GridProfile> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        if let Some((_, w)) = self.derivation() {
            let r = w.radius();
            let limit = r.min(1.0 / r) / 8.0;
            if spacing > limit {
                return Err(Error::QuadratureResolution { spacing, limit });
            }
        }
        let (lo, hi) = self.bounding_box();
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / spacing).ceil() as usize).collect();
        let cells: usize = shape.iter().product();
        if cells > 50_000_000 {
            return Err(Error::InvalidParameter(format!("tabulation would need {cells} cells")));
        }
        let mut values = Vec::with_capacity(cells);
        let mut idx = vec![0usize; self.dim];
        let mut t = vec![0.0; self.dim];
        for _ in 0..cells {
            for j in 0..self.dim {
                t[j] = lo[j] + (idx[j] as f64 + 0.5) * spacing;
            }
            values.push(self.eval(&t));
            for j in (0..self.dim).rev() {
                idx[j] += 1;
                if idx[j] < shape[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(GridProfile { lo, spacing: vec![spacing; self.dim], shape, values })
    }
}

/// `∫ (ĥ - ĥ_r)_+`, which lives on the (compact) support of the base profile.
fn positive_part_mass(base: &BaseProfile, dim: usize, window: &TentWindow) -> f64 {
    let (lo, hi) = base.bounding_box(dim);
    let breaks: Vec<Vec<f64>> = (0..dim).map(|j| base.breakpoints(j)).collect();
    let panel: f64 = if dim == 1 { 1.0 / 64.0 } else { 1.0 / 16.0 };
    let panel = panel.min(0.25 / window.radius());
    let nodes = tensor_nodes(&lo, &hi, &breaks, panel, if dim == 1 { 12 } else { 6 });
    nodes
        .iter()
        .map(|(t, w)| w * (base.eval(t) - base.smoothed_eval(window, t)).max(0.0))
        .sum()
}

/// `ĥ_r = ĥ ∗ ŵ_r` for a piecewise-constant density `ĥ`.
pub fn smooth_density(h: &SpectralDensity, r: f64) -> Result<SpectralDensity> {
    let window = TentWindow::new(h.dim(), r)?;
    let base = h
        .as_base()
        .ok_or_else(|| Error::InvalidParameter("only piecewise-constant densities can be smoothed".into()))?;
    SpectralDensity::derived(base, h.dim(), window, Derivation::Smoothed)
}

/// The pointwise minimum and maximum of `ĥ_r` and `ĥ`.
pub fn bound_densities(h: &SpectralDensity, r: f64) -> Result<(SpectralDensity, SpectralDensity)> {
    let window = TentWindow::new(h.dim(), r)?;
    let base = h
        .as_base()
        .ok_or_else(|| Error::InvalidParameter("only piecewise-constant densities can be smoothed".into()))?;
    Ok((
        SpectralDensity::derived(base, h.dim(), window, Derivation::Lower)?,
        SpectralDensity::derived(base, h.dim(), window, Derivation::Upper)?,
    ))
}

/// JSON form of a density: `{"dim": d, "kind": "box" | "grid", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityConfig {
    Box {
        dim: usize,
        half_width: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Grid {
        dim: usize,
        lo: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl DensityConfig {
    pub fn build(&self) -> Result<SpectralDensity> {
        match self {
            DensityConfig::Box { dim, half_width, height } => SpectralDensity::box_density(*dim, *half_width, *height),
            DensityConfig::Grid { dim, lo, spacing, shape, values } => {
                if lo.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: lo.len() });
                }
                SpectralDensity::grid(GridProfile {
                    lo: lo.clone(),
                    spacing: spacing.clone(),
                    shape: shape.clone(),
                    values: values.clone(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_density() -> SpectralDensity {
        SpectralDensity::box_density(1, 0.5, 1.0).unwrap()
    }

    // Midpoint-rule oracle for ĥ_r(t) on a fine grid of the box.
    fn smoothed_oracle(r: f64, t: f64) -> f64 {
        let w = TentWindow::new(1, r).unwrap();
        let n = 40_000;
        let h = 1.0 / n as f64;
        (0..n).map(|i| w.fourier_1d(t - (-0.5 + (i as f64 + 0.5) * h)) * h).sum()
    }

    #[test]
    fn smoothed_box_matches_convolution_oracle() {
        let h = sine_density();
        for &r in &[1.0, 2.0, 4.0] {
            let s = smooth_density(&h, r).unwrap();
            for &t in &[0.0, 0.3, 0.5, 0.77, 2.0, -3.1] {
                let got = s.eval(&[t]);
                assert!((got - smoothed_oracle(r, t)).abs() < 1e-8, "r={r} t={t}");
                assert!((0.0..=1.0).contains(&got));
            }
        }
    }

    #[test]
    fn smoothing_unit_density_is_identity_in_interior() {
        let h = SpectralDensity::box_density(1, 1e4, 1.0).unwrap();
        let s = smooth_density(&h, 0.7).unwrap();
        for &t in &[0.0, 1.0, 100.0] {
            assert!((s.eval(&[t]) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn smoothed_value_at_origin_r4() {
        let s = smooth_density(&sine_density(), 4.0).unwrap();
        let v = s.eval(&[0.0]);
        assert!(v > 0.9 && v < 1.0, "{v}");
    }

    #[test]
    fn grid_smoothing_agrees_with_box() {
        let grid = GridProfile { lo: vec![-0.5], spacing: vec![0.25], shape: vec![4], values: vec![1.0; 4] };
        let g = SpectralDensity::grid(grid).unwrap();
        let b = sine_density();
        let sg = smooth_density(&g, 2.0).unwrap();
        let sb = smooth_density(&b, 2.0).unwrap();
        for &t in &[-1.3, 0.0, 0.2, 0.49, 5.0] {
            assert!((sg.eval(&[t]) - sb.eval(&[t])).abs() < 1e-13);
        }
        assert!(g.is_even());
    }

    #[test]
    fn bounds_bracket_both_densities() {
        let h = sine_density();
        let r = 2.0;
        let s = smooth_density(&h, r).unwrap();
        let (lo, up) = bound_densities(&h, r).unwrap();
        let mut strict_near_edge = false;
        for i in -400..=400 {
            let t = [i as f64 * 0.01];
            let (l, u, hv, sv) = (lo.eval(&t), up.eval(&t), h.eval(&t), s.eval(&t));
            assert!(l <= hv && hv <= u && l <= sv && sv <= u);
            if (t[0].abs() - 0.5).abs() < 0.02 && l < hv - 1e-3 {
                strict_near_edge = true;
            }
        }
        assert!(strict_near_edge);
        // |a ∨ b - a ∧ b| = |a - b|, so the L¹ norms differ by the L¹ gap
        let gap = 2.0 * (h.l1_norm() - lo.l1_norm());
        assert!((up.l1_norm() - lo.l1_norm() - gap).abs() < 1e-14);
    }

    #[test]
    fn zero_density_bounds_are_zero() {
        let z = SpectralDensity::zero(1).unwrap();
        let (lo, up) = bound_densities(&z, 3.0).unwrap();
        for &t in &[0.0, 0.4, 2.0] {
            assert_eq!(lo.eval(&[t]), 0.0);
            assert_eq!(up.eval(&[t]), 0.0);
        }
        assert_eq!(up.l1_norm(), 0.0);
    }

    #[test]
    fn l1_norms_match_midpoint_quadrature() {
        let h = sine_density();
        let (lo, _) = bound_densities(&h, 2.0).unwrap();
        let tab = lo.tabulate(1e-4).unwrap();
        let quad: f64 = tab.values.iter().sum::<f64>() * 1e-4;
        assert!((quad - lo.l1_norm()).abs() < 1e-7, "{quad} vs {}", lo.l1_norm());

        let grid = GridProfile { lo: vec![-1.0, 0.0], spacing: vec![0.5, 0.25], shape: vec![4, 2], values: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8] };
        let g = SpectralDensity::grid(grid).unwrap();
        let tab = g.tabulate(0.125).unwrap();
        let quad: f64 = tab.values.iter().sum::<f64>() * 0.125 * 0.125;
        assert!((quad - g.l1_norm()).abs() < 1e-12);
        assert!(g.eval(&[-1.1, 0.1]) == 0.0 && g.eval(&[0.99, 0.49]) == 0.8);
    }

    #[test]
    fn l1_gap_shrinks_with_radius() {
        let h = sine_density();
        let mut prev = f64::INFINITY;
        for &r in &[1.0, 2.0, 4.0, 8.0] {
            let (lo, _) = bound_densities(&h, r).unwrap();
            let gap = 2.0 * (h.l1_norm() - lo.l1_norm());
            // oracle: midpoint integration of |ĥ_r - ĥ| over a window wide enough
            // that the neglected tail (≈ 1/(π² r T)) is below the step between radii
            let s = smooth_density(&h, r).unwrap();
            let (tt, n) = (200.0, 400_000);
            let dt = 2.0 * tt / n as f64;
            let oracle: f64 = (0..n)
                .map(|i| {
                    let t = [-tt + (i as f64 + 0.5) * dt];
                    (s.eval(&t) - h.eval(&t)).abs() * dt
                })
                .sum();
            assert!((oracle - gap).abs() < 2e-3, "r={r}: {oracle} vs {gap}");
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn tabulation_on_a_common_grid_contracts_exactly() {
        let h = sine_density();
        let s = smooth_density(&h, 2.0).unwrap();
        let (lo, up) = bound_densities(&h, 2.0).unwrap();
        let (ts, tl, tu) = (s.tabulate(0.01).unwrap(), lo.tabulate(0.01).unwrap(), up.tabulate(0.01).unwrap());
        assert_eq!(ts.shape, tu.shape);
        let base_on_grid: Vec<f64> = (0..ts.values.len())
            .map(|i| h.eval(&[ts.lo[0] + (i as f64 + 0.5) * 0.01]))
            .collect();
        let lower_on_grid: Vec<f64> = ts.values.iter().zip(&base_on_grid).map(|(a, b)| a.min(*b)).collect();
        let upper_minus_lower: f64 = tu.values.iter().zip(&lower_on_grid).map(|(u, l)| (u - l).abs()).sum();
        let gap: f64 = ts.values.iter().zip(&base_on_grid).map(|(a, b)| (a - b).abs()).sum();
        assert_eq!(upper_minus_lower, gap);
        assert!(tl.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(s.truncation().unwrap().window_tail_mass < WINDOW_TAIL_BUDGET);
    }

    #[test]
    fn coarse_tabulation_is_rejected() {
        let s = smooth_density(&sine_density(), 2.0).unwrap();
        assert!(matches!(s.tabulate(0.2), Err(Error::QuadratureResolution { .. })));
    }

    #[test]
    fn invalid_inputs() {
        assert!(SpectralDensity::box_density(1, 0.5, 1.5).is_err());
        assert!(smooth_density(&sine_density(), 0.0).is_err());
        let s = smooth_density(&sine_density(), 1.0).unwrap();
        assert!(smooth_density(&s, 1.0).is_err());
        let bad = GridProfile { lo: vec![0.0], spacing: vec![1.0], shape: vec![2], values: vec![0.5] };
        assert!(SpectralDensity::grid(bad).is_err());
    }

    #[test]
    fn json_config_roundtrip() {
        let cfg: DensityConfig = serde_json::from_str(r#"{"dim":1,"kind":"box","half_width":0.5}"#).unwrap();
        let d = cfg.build().unwrap();
        assert_eq!(d.l1_norm(), 1.0);
        let cfg: DensityConfig =
            serde_json::from_str(r#"{"dim":1,"kind":"grid","lo":[-1],"spacing":[0.5],"shape":[4],"values":[0,1,1,0]}"#).unwrap();
        assert_eq!(cfg.build().unwrap().l1_norm(), 1.0);
    }
}
