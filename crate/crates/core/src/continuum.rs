//! Continuum windows: Poisson sampling, dyadic cell counts, and approximate
//! DPP sampling through a fine lattice discretization.

use crate::discrete::{DiscreteKernel, Sampler, SiteIndex};
use crate::error::{Error, Result};
use crate::spectral::{KernelEvaluator, KernelSpec};
use crate::stats::{Estimate, MomentSummary};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::Write;

/// Largest per-cell expected count accepted by the discretized sampler.
pub const MAX_CELL_INTENSITY: f64 = 0.2;
/// Largest number of mesh cells for the discretized sampler.
pub const MAX_MESH_CELLS: usize = 4096;

/// A half-open box `∏ [a_j, b_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxJson", into = "BoxJson")]
pub struct WindowBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxJson {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<BoxJson> for WindowBox {
    type Error = Error;
    fn try_from(b: BoxJson) -> Result<Self> {
        WindowBox::new(b.lo, b.hi)
    }
}

impl From<WindowBox> for BoxJson {
    fn from(w: WindowBox) -> Self {
        BoxJson { lo: w.lo, hi: w.hi }
    }
}

impl WindowBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter("window corners must have the same positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter("window needs finite a_j < b_j on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, 1)^d`.
    pub fn unit(dim: usize) -> Self {
        Self { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v < b)
    }

    fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                // guard the half-open upper face against rounding
                let x = a + (b - a) * rng.gen::<f64>();
                if x < *b {
                    x
                } else {
                    *a
                }
            })
            .collect()
    }
}

/// A finite point set inside a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub points: Vec<Vec<f64>>,
}

impl PointConfig {
    /// Validates that every point lies in the window and none repeats.
    pub fn new(window: &WindowBox, points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(Error::InvalidParameter(format!("point {p:?} lies outside the window")));
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("point configurations are simple: duplicate point".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in a sub-box.
    pub fn count_in(&self, b: &WindowBox) -> usize {
        self.points.iter().filter(|p| b.contains(p)).count()
    }

    /// CSV with one point per row, columns `x1, …, xd`.
    pub fn write_csv<W: Write>(&self, out: W, dim: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record((1..=dim).map(|j| format!("x{j}")))?;
        for p in &self.points {
            w.write_record(p.iter().map(|x| format!("{x:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Homogeneous Poisson process of the given intensity on the window.
pub fn sample_poisson<R: Rng + ?Sized>(window: &WindowBox, intensity: f64, rng: &mut R) -> Result<PointConfig> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::InvalidParameter(format!("intensity must be nonnegative, got {intensity}")));
    }
    let mean = intensity * window.volume();
    if mean == 0.0 {
        return Ok(PointConfig { points: Vec::new() });
    }
    let count = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng) as usize;
    Ok(PointConfig { points: (0..count).map(|_| window.uniform_point(rng)).collect() })
}

/// Dyadic cubes `P_{n,z} = ∏ [z_i / 2^{n-1}, (z_i + 1) / 2^{n-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPartition {
    level: u32,
}

impl DyadicPartition {
    pub fn new(level: u32) -> Result<Self> {
        if level == 0 || level > 60 {
            return Err(Error::InvalidParameter(format!("dyadic level {level} outside 1..=60")));
        }
        Ok(Self { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn edge(&self) -> f64 {
        1.0 / (1u64 << (self.level - 1)) as f64
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        let scale = (1u64 << (self.level - 1)) as f64;
        x.iter().map(|v| (v * scale).floor() as i64).collect()
    }
}

/// `Π_{P_n}(ξ) = Σ_z ξ(P_{n,z}) δ_z`.
pub fn dyadic_project(config: &PointConfig, level: u32) -> Result<BTreeMap<Vec<i64>, u32>> {
    let part = DyadicPartition::new(level)?;
    let mut out = BTreeMap::new();
    for p in &config.points {
        *out.entry(part.cell_of(p)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Merge a level-`n+1` count field into level `n` (each parent holds `2^d` children).
pub fn coarsen_counts(field: &BTreeMap<Vec<i64>, u32>) -> BTreeMap<Vec<i64>, u32> {
    let mut out = BTreeMap::new();
    for (z, c) in field {
        *out.entry(z.iter().map(|v| v.div_euclid(2)).collect()).or_insert(0) += c;
    }
    out
}

/// CSV with columns `z1, …, zd, count`.
pub fn write_counts_csv<W: Write>(out: W, dim: usize, field: &BTreeMap<Vec<i64>, u32>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dim).map(|j| format!("z{j}")).collect();
    header.push("count".into());
    w.write_record(&header)?;
    for (z, c) in field {
        let mut rec: Vec<String> = z.iter().map(|v| v.to_string()).collect();
        rec.push(c.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Approximate continuum DPP sampler on a window.
///
/// The window is cut into cubes of edge `m`; the discrete kernel is
/// `m^d K(c_i - c_j)` at cell centers `c_i`. Its cell marginals are `m^d K(0)`,
/// exactly the continuum expected count per cell, and for densities supported
/// in a box of width below `1/m` the matrix is a section of a Toeplitz operator
/// whose symbol is a periodization of `ĥ` without overlap, hence a contraction.
/// Each occupied cell receives one point placed uniformly inside it.
#[derive(Clone, Debug)]
pub struct ContinuumSampler {
    window: WindowBox,
    mesh: f64,
    shape: Vec<usize>,
    kernel: DiscreteKernel,
    sampler: Sampler,
}

impl ContinuumSampler {
    pub fn new(spec: &KernelSpec, window: &WindowBox, mesh: f64) -> Result<Self> {
        let d = window.dim();
        if spec.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: spec.dim() });
        }
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(Error::InvalidParameter(format!("mesh must be positive, got {mesh}")));
        }
        let mut shape = Vec::with_capacity(d);
        for j in 0..d {
            let cells = (window.hi[j] - window.lo[j]) / mesh;
            if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                return Err(Error::InvalidParameter(format!("mesh {mesh} does not tile axis {j} of the window")));
            }
            shape.push(cells.round() as usize);
        }
        let n: usize = shape.iter().product();
        if n > MAX_MESH_CELLS {
            return Err(Error::WindowTooLarge { size: n, limit: MAX_MESH_CELLS });
        }
        let cell_volume = mesh.powi(d as i32);
        let reach = window.lo.iter().zip(&window.hi).fold(0.0f64, |m, (a, b)| m.max(b - a));
        let ev = KernelEvaluator::new(spec, reach)?;
        let intensity = ev.eval(&vec![0.0; d])?.re * cell_volume;
        if intensity > MAX_CELL_INTENSITY {
            return Err(Error::MeshTooCoarse { intensity, limit: MAX_CELL_INTENSITY });
        }
        let index: Vec<Vec<i64>> = (0..n).map(|i| unflatten(i, &shape)).collect();
        let mut cache: HashMap<Vec<i64>, Complex64> = HashMap::new();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let off: Vec<i64> = index[i].iter().zip(&index[j]).map(|(a, b)| a - b).collect();
                let v = match cache.get(&off) {
                    Some(v) => *v,
                    None => {
                        let u: Vec<f64> = off.iter().map(|&o| o as f64 * mesh).collect();
                        let v = ev.eval(&u)? * cell_volume;
                        cache.insert(off, v);
                        v
                    }
                };
                m[(i, j)] = v;
            }
        }
        let sites = index.into_iter().map(SiteIndex::Lattice).collect();
        let kernel = DiscreteKernel::new(sites, m)?;
        let sampler = Sampler::new(&kernel)?;
        Ok(Self { window: window.clone(), mesh, shape, kernel, sampler })
    }

    pub fn kernel(&self) -> &DiscreteKernel {
        &self.kernel
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn cell_count(&self) -> usize {
        self.kernel.len()
    }

    /// Occupied cell indices of one draw.
    pub fn sample_cells<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        self.sampler.sample(rng)
    }

    /// Place one uniform point in each occupied cell.
    pub fn place<R: Rng + ?Sized>(&self, cells: &[usize], rng: &mut R) -> PointConfig {
        let points = cells
            .iter()
            .map(|&c| {
                let z = unflatten(c, &self.shape);
                let lo: Vec<f64> = z.iter().zip(&self.window.lo).map(|(&k, a)| a + k as f64 * self.mesh).collect();
                let hi: Vec<f64> = lo.iter().map(|a| a + self.mesh).collect();
                WindowBox { lo, hi }.uniform_point(rng)
            })
            .collect();
        PointConfig { points }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointConfig> {
        let cells = self.sample_cells(rng)?;
        Ok(self.place(&cells, rng))
    }

    /// Estimate of the two-point function `ρ₂(0, offset·m)` from cell draws:
    /// the mean over draws of the fraction of cell pairs at that offset that
    /// are both occupied, divided by `m^{2d}`.
    pub fn two_point_estimate(&self, draws: &[Vec<usize>], offset: &[i64]) -> Result<Estimate> {
        if offset.len() != self.shape.len() {
            return Err(Error::DimensionMismatch { expected: self.shape.len(), got: offset.len() });
        }
        let pairs: Vec<(usize, usize)> = (0..self.cell_count())
            .filter_map(|i| {
                let z = unflatten(i, &self.shape);
                let w: Vec<i64> = z.iter().zip(offset).map(|(a, b)| a + b).collect();
                flatten(&w, &self.shape).map(|j| (i, j))
            })
            .collect();
        if pairs.is_empty() || draws.len() < 2 {
            return Err(Error::InvalidParameter("need at least two draws and one cell pair".into()));
        }
        let norm = self.mesh.powi(2 * self.shape.len() as i32) * pairs.len() as f64;
        let mut occupied = vec![false; self.cell_count()];
        let per_draw: Vec<f64> = draws
            .iter()
            .map(|cells| {
                occupied.iter_mut().for_each(|o| *o = false);
                cells.iter().for_each(|&c| occupied[c] = true);
                pairs.iter().filter(|(i, j)| occupied[*i] && occupied[*j]).count() as f64 / norm
            })
            .collect();
        Ok(MomentSummary::from_samples(&per_draw).mean)
    }
}

fn unflatten(mut i: usize, shape: &[usize]) -> Vec<i64> {
    let mut z = vec![0i64; shape.len()];
    for j in (0..shape.len()).rev() {
        z[j] = (i % shape[j]) as i64;
        i /= shape[j];
    }
    z
}

fn flatten(z: &[i64], shape: &[usize]) -> Option<usize> {
    let mut i = 0usize;
    for (&c, &n) in z.iter().zip(shape) {
        if c < 0 || c as usize >= n {
            return None;
        }
        i = i * n + c as usize;
    }
    Some(i)
}

/// One draw from [`ContinuumSampler`], building the discretization each call.
pub fn approx_sample_continuum<R: Rng + ?Sized>(spec: &KernelSpec, window: &WindowBox, mesh: f64, rng: &mut R) -> Result<PointConfig> {
    ContinuumSampler::new(spec, window, mesh)?.sample(rng)
}
