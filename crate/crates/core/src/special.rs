//! Special functions used by the spectral quadrature: generalized exponential
//! integrals of complex argument, the sine integral, and Gauss–Legendre rules.

use num_complex::Complex64;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 20_000;
const EPS: f64 = 1e-16;

/// `sin(πx)/(πx)` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    let px = PI * x;
    if px.abs() < 1e-4 {
        let p2 = px * px;
        1.0 - p2 / 6.0 + p2 * p2 / 120.0
    } else {
        px.sin() / px
    }
}

/// Generalized exponential integral `E_n(z) = ∫_1^∞ e^{-zs} s^{-n} ds`.
///
/// Valid for `Re z >= 0` (and `z != 0` when `n <= 1`). Uses the power series
/// for `|z| <= 2` and the Lentz continued fraction otherwise.
pub fn expint(n: u32, z: Complex64) -> Complex64 {
    let norm = z.norm();
    if norm == 0.0 {
        assert!(n >= 2, "E_{n}(0) diverges");
        return Complex64::new(1.0 / f64::from(n - 1), 0.0);
    }
    if norm <= 2.0 {
        expint_series(n, z)
    } else {
        expint_continued_fraction(n, z)
    }
}

fn expint_series(n: u32, z: Complex64) -> Complex64 {
    let nm1 = i64::from(n) - 1;
    let mut ans = if nm1 != 0 {
        Complex64::new(1.0 / nm1 as f64, 0.0)
    } else {
        -z.ln() - EULER_GAMMA
    };
    let mut fact = Complex64::new(1.0, 0.0);
    for i in 1..MAX_ITER as i64 {
        fact *= -z / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-z.ln() + psi)
        };
        ans += del;
        if del.norm() < ans.norm() * EPS {
            break;
        }
    }
    ans
}

fn expint_continued_fraction(n: u32, z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let nm1 = f64::from(n) - 1.0;
    let mut b = z + f64::from(n);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (d * an + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < EPS {
            break;
        }
    }
    h * (-z).exp()
}

/// Sine integral `Si(x) = ∫_0^x sin(s)/s ds`.
pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let si = if ax < 1e-3 {
        let x2 = ax * ax;
        ax * (1.0 - x2 / 18.0 + x2 * x2 / 600.0)
    } else {
        // E1(ix) = -Ci(x) + i (Si(x) - π/2)
        PI / 2.0 + expint(1, Complex64::new(0.0, ax)).im
    };
    si.copysign(x)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
