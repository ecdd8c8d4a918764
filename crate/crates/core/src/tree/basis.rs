use num_complex::Complex64;
use std::f64::consts::PI;

use crate::special::sinc;

/// Complex exponentials on unit cubes: `φ_{z,l}(x) = e^{2πi n_l·(x-z)} 1_{[0,1)^d}(x - z)`.
///
/// Levels are 1-based. Modes `n_l ∈ ℤᵈ` are ordered by max-norm, ties broken
/// lexicographically, so `n_1 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBasis {
    dim: usize,
    modes: Vec<Vec<i64>>,
}

impl CellBasis {
    /// Basis with the first `levels` modes.
    pub fn new(dim: usize, levels: u32) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let levels = levels as usize;
        let mut modes = Vec::with_capacity(levels);
        let mut radius = 0i64;
        while modes.len() < levels {
            let mut shell = Vec::new();
            let side = 2 * radius + 1;
            let count = (side as usize).pow(dim as u32);
            for k in 0..count {
                let mut rem = k;
                let mut n = vec![0i64; dim];
                for j in (0..dim).rev() {
                    n[j] = (rem % side as usize) as i64 - radius;
                    rem /= side as usize;
                }
                if n.iter().map(|c| c.abs()).max().unwrap_or(0) == radius {
                    shell.push(n);
                }
            }
            // the odometer above already yields lexicographic order
            modes.extend(shell.into_iter().take(levels - modes.len()));
            radius += 1;
        }
        Self { dim, modes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> u32 {
        self.modes.len() as u32
    }

    /// Frequency vector `n_l` of level `l` (1-based).
    pub fn mode(&self, level: u32) -> &[i64] {
        &self.modes[level as usize - 1]
    }

    /// `φ_{z,l}(x)`.
    pub fn eval(&self, cell: &[i64], level: u32, x: &[f64]) -> Complex64 {
        let n = self.mode(level);
        let mut phase = 0.0;
        for j in 0..self.dim {
            let y = x[j] - cell[j] as f64;
            if !(0.0..1.0).contains(&y) {
                return Complex64::new(0.0, 0.0);
            }
            phase += n[j] as f64 * y;
        }
        Complex64::from_polar(1.0, 2.0 * PI * phase)
    }

    /// Cell-independent factor `∏ e^{iπ s_j} sinc(s_j)` with `s = n_l - t` of
    /// the transform of `φ_{0,l}`.
    pub fn profile(&self, level: u32, t: &[f64]) -> Complex64 {
        let n = self.mode(level);
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 0..self.dim {
            let s = n[j] as f64 - t[j];
            acc *= Complex64::from_polar(sinc(s), PI * s);
        }
        acc
    }

    /// `ψ_{z,l}(t) = ∫ φ_{z,l}(x) e^{-2πi x·t} dx = e^{-2πi z·t} ∏ e^{iπ s_j} sinc(s_j)`.
    pub fn fourier(&self, cell: &[i64], level: u32, t: &[f64]) -> Complex64 {
        let zt: f64 = cell.iter().zip(t).map(|(&z, &tj)| z as f64 * tj).sum();
        Complex64::from_polar(1.0, -2.0 * PI * zt) * self.profile(level, t)
    }
}
