use super::{check_indices, DiscreteKernel, SubsetDistribution};
use crate::error::{Error, Result};
use crate::stats::{proportion, Estimate};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::ops::{Div, Mul, SubAssign};

/// Spectral slack accepted by the sampler (tree-kernel sections carry
/// quadrature error at this level).
const SPECTRUM_SLACK: f64 = 1e-6;
/// Branches with conditional probability within this of 0 or 1 are forced.
const FORCED: f64 = 1e-12;

trait Entry: Copy + Mul<Output = Self> + Div<Output = Self> + SubAssign {
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn real(x: f64) -> Self;
}

impl Entry for f64 {
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn real(x: f64) -> Self {
        x
    }
}

impl Entry for Complex64 {
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Sequential conditional sampler: sites are visited in order, each included
/// with its current conditional probability `K_ii`, and the remaining kernel is
/// updated by the Schur complement of the chosen branch (pivot `K_ii` when
/// included, `K_ii - 1` when excluded).
#[derive(Clone, Debug)]
pub struct Sampler {
    n: usize,
    storage: Storage,
}

impl Sampler {
    pub fn new(k: &DiscreteKernel) -> Result<Self> {
        k.check_spectrum(SPECTRUM_SLACK)?;
        let n = k.len();
        let m = k.matrix();
        // nalgebra is column-major; store row-major for the update loop
        let storage = if k.max_imaginary() == 0.0 {
            Storage::Real((0..n * n).map(|i| m[(i / n, i % n)].re).collect())
        } else {
            Storage::Complex((0..n * n).map(|i| m[(i / n, i % n)]).collect())
        };
        Ok(Self { n, storage })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Draw one configuration as a sorted list of site indices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        match &self.storage {
            Storage::Real(a) => run(self.n, a, rng, |i| out.push(i))?,
            Storage::Complex(a) => run(self.n, a, rng, |i| out.push(i))?,
        }
        Ok(out)
    }

    /// Draw one configuration as a bitmask (requires at most 64 sites).
    pub fn sample_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        if self.n > 64 {
            return Err(Error::TooManySites { n: self.n, max: 64 });
        }
        let mut mask = 0u64;
        match &self.storage {
            Storage::Real(a) => run(self.n, a, rng, |i| mask |= 1 << i)?,
            Storage::Complex(a) => run(self.n, a, rng, |i| mask |= 1 << i)?,
        }
        Ok(mask)
    }

    /// Histogram of `count` draws over bitmasks (at most 20 sites).
    pub fn histogram(&self, seed: u64, count: usize) -> Result<Vec<u64>> {
        if self.n > 20 {
            return Err(Error::TooManySites { n: self.n, max: 20 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hist = vec![0u64; 1 << self.n];
        for _ in 0..count {
            hist[self.sample_mask(&mut rng)? as usize] += 1;
        }
        Ok(hist)
    }
}

fn run<T: Entry, R: Rng + ?Sized>(n: usize, kernel: &[T], rng: &mut R, mut occupied: impl FnMut(usize)) -> Result<()> {
    let mut a = kernel.to_vec();
    for i in 0..n {
        let p = a[i * n + i].re();
        if !(-SPECTRUM_SLACK..=1.0 + SPECTRUM_SLACK).contains(&p) {
            return Err(Error::SpectralLeakage { eigenvalue: p, lo: -SPECTRUM_SLACK, hi: 1.0 + SPECTRUM_SLACK });
        }
        let include = if p <= FORCED {
            false
        } else if p >= 1.0 - FORCED {
            true
        } else {
            rng.gen::<f64>() < p
        };
        // the chosen pivot is bounded away from zero in both forced cases
        let pivot = if include {
            occupied(i);
            T::real(p)
        } else {
            T::real(p - 1.0)
        };
        for j in (i + 1)..n {
            let aji = a[j * n + i];
            let f = aji / pivot;
            for k in (i + 1)..n {
                let aik = a[k * n + i].conj();
                a[j * n + k] -= f * aik;
            }
        }
    }
    Ok(())
}

/// One exact draw with a fresh generator seeded from `seed`.
pub fn sample_exact(k: &DiscreteKernel, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Sampler::new(k)?.sample(&mut rng)
}

/// `count` draws from a single stream seeded from `seed`.
pub fn sample_batch(k: &DiscreteKernel, seed: u64, count: usize) -> Result<Vec<Vec<usize>>> {
    let s = Sampler::new(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| s.sample(&mut rng)).collect()
}

/// Fraction of samples containing every site of `subset`, with its binomial
/// standard error.
pub fn empirical_correlation(samples: &[Vec<usize>], subset: &[usize]) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let hits = samples.iter().filter(|s| subset.iter().all(|i| s.binary_search(i).is_ok())).count();
    Ok(proportion(hits as u64, samples.len() as u64))
}

/// TV distance between a histogram of draws and an exact law.
pub fn tv_distance(hist: &[u64], exact: &SubsetDistribution) -> f64 {
    let total: u64 = hist.iter().sum();
    let emp: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64).collect();
    exact.tv(&emp)
}

/// One JSON array of occupied site labels per line.
pub fn write_samples_ndjson<W: Write>(mut out: W, k: &DiscreteKernel, samples: &[Vec<usize>]) -> Result<()> {
    for s in samples {
        check_indices(s, k.len())?;
        let sites: Vec<_> = s.iter().map(|&i| &k.sites()[i]).collect();
        serde_json::to_writer(&mut out, &sites)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
