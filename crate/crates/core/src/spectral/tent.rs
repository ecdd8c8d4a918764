use crate::error::{Error, Result};
use crate::special::{sinc, sine_integral};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Product of one-dimensional tent functions of half-width `radius`.
///
/// The spatial profile is `∏ (1 - |x_j|/r)` on `|x_j| < r`; its Fourier
/// transform `r^{-d} ∏ (sin(π r t_j)/(π t_j))²` is a Fejér-type kernel of unit mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentWindow {
    dim: usize,
    radius: f64,
}

impl TentWindow {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("tent radius must be positive, got {radius}")));
        }
        Ok(Self { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Spatial value `w_r(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        x.iter()
            .map(|&xj| {
                let a = xj.abs();
                if a < self.radius {
                    1.0 - a / self.radius
                } else {
                    0.0
                }
            })
            .product()
    }

    /// Fourier transform `ŵ_r(t)`, using the limit value `r` per zero coordinate.
    pub fn fourier(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.dim);
        t.iter().map(|&tj| self.fourier_1d(tj)).product()
    }

    /// One coordinate factor `r · sinc²(r t)`.
    pub fn fourier_1d(&self, t: f64) -> f64 {
        let s = sinc(self.radius * t);
        self.radius * s * s
    }

    /// `∫_0^x ŵ_r` for one coordinate, in closed form through the sine integral.
    pub fn cumulative_1d(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let r = self.radius;
        let s = (PI * r * x).sin();
        (sine_integral(2.0 * PI * r * x) - s * s / (PI * r * x)) / PI
    }

    /// `∫_a^b ŵ_r` for one coordinate.
    pub fn mass_1d(&self, a: f64, b: f64) -> f64 {
        self.cumulative_1d(b) - self.cumulative_1d(a)
    }

    /// Mass of `ŵ_r` outside the cube `[-h, h]^d`.
    pub fn mass_outside_cube(&self, half_width: f64) -> f64 {
        let inside = 2.0 * self.cumulative_1d(half_width);
        1.0 - inside.powi(self.dim as i32)
    }

    /// Smallest half-width `h` (to 1e-3 relative) such that the mass of `ŵ_r`
    /// outside `[-h, h]^d` drops below `tail`.
    pub fn truncation_half_width(&self, tail: f64) -> f64 {
        // Tail mass of one coordinate decays like 1/(π² r h).
        let mut hi = 1.0 / self.radius;
        while self.mass_outside_cube(hi) >= tail {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if self.mass_outside_cube(mid) >= tail {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `w_r(x)` for a tent window of radius `r`.
pub fn tent_eval(w: &TentWindow, x: &[f64]) -> f64 {
    w.eval(x)
}

/// `ŵ_r(t)` for a tent window of radius `r`.
pub fn tent_ft_eval(w: &TentWindow, t: &[f64]) -> f64 {
    w.fourier(t)
}
