use super::basis::CellBasis;
use super::window::TreeWindow;
use crate::discrete::{hermitian_defect, DiscreteKernel, SiteIndex, TreeSite};
use crate::error::{Error, Result};
use crate::spectral::{KernelSpec, QuadratureRule, SpectralGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Spectrum slack allowed for assembled sections.
pub const SECTION_SPECTRUM_TOLERANCE: f64 = 1e-6;
/// Hermiticity defect allowed before symmetrization.
pub const SECTION_HERMITIAN_TOLERANCE: f64 = 1e-8;

/// Evaluates `K^Φ(z,l; w,m) = ∫ ĥ(t) conj(ψ_{z,l}(t)) ψ_{w,m}(t) dt`.
///
/// The basis profiles are tabulated once at the quadrature nodes; entries
/// depend on the cells only through `w - z`, and blocks are cached per
/// displacement.
#[derive(Clone, Debug)]
pub struct TreeKernel {
    spec: KernelSpec,
    basis: CellBasis,
    nodes: Vec<Vec<f64>>,
    masses: Vec<f64>,
    /// `profiles[l-1][k] = ∏ e^{iπ s} sinc(s)` at node `k`.
    profiles: Vec<Vec<Complex64>>,
    l1_norm: f64,
}

impl TreeKernel {
    pub fn new(spec: &KernelSpec, basis: &CellBasis) -> Result<Self> {
        if spec.dim() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: basis.dim() });
        }
        let density = spec.effective_density()?;
        let grid = SpectralGrid::covering(&density, &QuadratureRule::for_projection(spec.dim()));
        let (nodes, masses): (Vec<Vec<f64>>, Vec<f64>) =
            grid.weighted_nodes().filter(|(_, m)| *m != 0.0).map(|(t, m)| (t.to_vec(), m)).unzip();
        let profiles = (1..=basis.levels())
            .map(|l| nodes.iter().map(|t| basis.profile(l, t)).collect())
            .collect();
        Ok(Self { spec: spec.clone(), basis: basis.clone(), nodes, masses, profiles, l1_norm: density.l1_norm() })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn basis(&self) -> &CellBasis {
        &self.basis
    }

    /// `‖ĥ‖_{L¹}` of the effective density.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    fn check_level(&self, level: u32) -> Result<()> {
        if level == 0 || level > self.basis.levels() {
            return Err(Error::InvalidParameter(format!("level {level} outside 1..={}", self.basis.levels())));
        }
        Ok(())
    }

    /// Block of entries `(l, m)` for all levels at displacement `w - z`.
    fn block(&self, delta: &[i64]) -> DMatrix<Complex64> {
        let levels = self.basis.levels() as usize;
        let mut out = DMatrix::zeros(levels, levels);
        for (k, t) in self.nodes.iter().enumerate() {
            let dt: f64 = delta.iter().zip(t).map(|(&d, &tj)| d as f64 * tj).sum();
            let phase = Complex64::from_polar(self.masses[k], -2.0 * PI * dt);
            for l in 0..levels {
                let a = self.profiles[l][k].conj() * phase;
                for m in 0..levels {
                    out[(l, m)] += a * self.profiles[m][k];
                }
            }
        }
        out
    }

    /// A single entry `K^Φ(z,l; w,m)`.
    pub fn entry(&self, a: &TreeSite, b: &TreeSite) -> Result<Complex64> {
        self.check_level(a.level)?;
        self.check_level(b.level)?;
        if a.cell.len() != self.basis.dim() || b.cell.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch { expected: self.basis.dim(), got: a.cell.len().max(b.cell.len()) });
        }
        let delta: Vec<i64> = b.cell.iter().zip(&a.cell).map(|(w, z)| w - z).collect();
        let (l, m) = (a.level as usize - 1, b.level as usize - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, t) in self.nodes.iter().enumerate() {
            let dt: f64 = delta.iter().zip(t).map(|(&d, &tj)| d as f64 * tj).sum();
            acc += self.profiles[l][k].conj() * self.profiles[m][k] * Complex64::from_polar(self.masses[k], -2.0 * PI * dt);
        }
        Ok(acc)
    }

    /// Section of `K^Φ` on an explicit list of tree sites.
    pub fn section(&self, sites: &[TreeSite]) -> Result<DiscreteKernel> {
        for s in sites {
            self.check_level(s.level)?;
            if s.cell.len() != self.basis.dim() {
                return Err(Error::DimensionMismatch { expected: self.basis.dim(), got: s.cell.len() });
            }
        }
        let mut blocks: HashMap<Vec<i64>, DMatrix<Complex64>> = HashMap::new();
        let n = sites.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let delta: Vec<i64> = sites[j].cell.iter().zip(&sites[i].cell).map(|(w, z)| w - z).collect();
                let block = blocks.entry(delta).or_insert_with_key(|d| self.block(d));
                m[(i, j)] = block[(sites[i].level as usize - 1, sites[j].level as usize - 1)];
            }
        }
        let defect = hermitian_defect(&m);
        if defect > SECTION_HERMITIAN_TOLERANCE {
            return Err(Error::QuadratureTolerance { deviation: defect, tolerance: SECTION_HERMITIAN_TOLERANCE });
        }
        let k = DiscreteKernel::new(sites.iter().cloned().map(SiteIndex::Tree).collect(), m)?;
        k.check_spectrum(SECTION_SPECTRUM_TOLERANCE)?;
        Ok(k)
    }

    /// `‖ĥ‖_{L¹} - Σ_{l ≤ L} K^Φ(0,l; 0,l)`: the expected count per cell
    /// carried by levels beyond `L`.
    pub fn trace_deficit(&self, levels: u32) -> Result<f64> {
        self.check_level(levels)?;
        let mut trace = 0.0;
        for l in 0..levels as usize {
            trace += self.profiles[l].iter().zip(&self.masses).map(|(p, w)| w * p.norm_sqr()).sum::<f64>();
        }
        Ok(self.l1_norm - trace)
    }
}

/// A single entry of `K^Φ`; builds the quadrature for this call only.
pub fn tree_kernel_entry(spec: &KernelSpec, basis: &CellBasis, a: &TreeSite, b: &TreeSite) -> Result<Complex64> {
    TreeKernel::new(spec, basis)?.entry(a, b)
}

/// The section of `K^Φ` on every site of the window.
pub fn tree_kernel_matrix(spec: &KernelSpec, basis: &CellBasis, window: &TreeWindow) -> Result<DiscreteKernel> {
    if window.levels() > basis.levels() {
        return Err(Error::InvalidParameter(format!(
            "window needs {} levels, basis has {}",
            window.levels(),
            basis.levels()
        )));
    }
    TreeKernel::new(spec, basis)?.section(&window.sites())
}
