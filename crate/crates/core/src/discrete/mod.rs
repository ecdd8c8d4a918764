//! Finite determinantal point processes over explicit site lists.

mod exact;
mod sampler;

pub use exact::{exact_distribution, inclusion_prob, inclusion_prob_sites, SubsetDistribution, MAX_EXACT_SITES};
pub use sampler::{empirical_correlation, sample_batch, sample_exact, tv_distance, write_samples_ndjson, Sampler};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

/// A site of the tree lattice `ℤᵈ × ℕ`: a cell and a 1-based level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TreeSite {
    pub cell: Vec<i64>,
    pub level: u32,
}

/// Index of a site, ordered lexicographically (lattice sites before tree sites).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteIndex {
    Lattice(Vec<i64>),
    Tree(TreeSite),
}

impl SiteIndex {
    pub fn lattice(z: &[i64]) -> Self {
        SiteIndex::Lattice(z.to_vec())
    }

    pub fn tree(cell: &[i64], level: u32) -> Self {
        SiteIndex::Tree(TreeSite { cell: cell.to_vec(), level })
    }

    /// Lattice coordinates (the cell, for tree sites).
    pub fn cell(&self) -> &[i64] {
        match self {
            SiteIndex::Lattice(z) => z,
            SiteIndex::Tree(t) => &t.cell,
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            SiteIndex::Lattice(_) => None,
            SiteIndex::Tree(t) => Some(t.level),
        }
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |z: &[i64]| z.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        match self {
            SiteIndex::Lattice(z) => write!(f, "({})", join(z)),
            SiteIndex::Tree(t) => write!(f, "({};{})", join(&t.cell), t.level),
        }
    }
}

/// Tolerance on `|K_ij - conj(K_ji)|` accepted at construction.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

/// A Hermitian kernel over an ordered list of distinct sites.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteKernel {
    sites: Vec<SiteIndex>,
    matrix: DMatrix<Complex64>,
}

impl DiscreteKernel {
    /// Validates shape, distinct sites and Hermiticity, then symmetrizes
    /// away the residual roundoff.
    pub fn new(sites: Vec<SiteIndex>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = sites.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        let mut seen = std::collections::HashSet::new();
        for (i, s) in sites.iter().enumerate() {
            if !seen.insert(s) {
                return Err(Error::RepeatedSite(i));
            }
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { sites, matrix })
    }

    /// Kernel on sites `(0), (1), …` from a real symmetric matrix.
    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("kernel rows must form a square matrix".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(default_sites(n), m)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let m = DMatrix::from_diagonal_element(n, n, Complex64::new(c, 0.0));
        Self { sites: default_sites(n), matrix: m }
    }

    /// `U diag(λ) U*` with a Haar-random unitary `U` and eigenvalues drawn
    /// uniformly from `[lo, hi]`.
    pub fn random<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        // fix column phases so that the distribution is Haar
        let phases = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        }));
        let u = q * phases;
        let lambda = DVector::from_fn(n, |_, _| Complex64::new(lo + (hi - lo) * rng.gen::<f64>(), 0.0));
        let m = &u * DMatrix::from_diagonal(&lambda) * u.adjoint();
        Self::new(default_sites(n), m).expect("random kernel is Hermitian by construction")
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn index_of(&self, site: &SiteIndex) -> Option<usize> {
        self.sites.iter().position(|s| s == site)
    }

    /// Largest imaginary part of any entry.
    pub fn max_imaginary(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.im.abs()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Verify `Spec(K) ⊂ [-tol, 1 + tol]`, returning the extreme eigenvalues.
    pub fn check_spectrum(&self, tol: f64) -> Result<(f64, f64)> {
        let ev = self.eigenvalues();
        let (lo, hi) = (ev.first().copied().unwrap_or(0.0), ev.last().copied().unwrap_or(0.0));
        for &e in [lo, hi].iter() {
            if e < -tol || e > 1.0 + tol {
                return Err(Error::SpectralLeakage { eigenvalue: e, lo: -tol, hi: 1.0 + tol });
            }
        }
        Ok((lo, hi))
    }

    /// The principal section on the given indices, in the given order.
    pub fn section(&self, idx: &[usize]) -> Result<DMatrix<Complex64>> {
        check_indices(idx, self.len())?;
        Ok(DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])]))
    }

    /// The kernel restricted to a subset of its sites.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let m = self.section(idx)?;
        Ok(Self { sites: idx.iter().map(|&i| self.sites[i].clone()).collect(), matrix: m })
    }

    /// Indices of the given sites.
    pub fn indices_of(&self, sites: &[SiteIndex]) -> Result<Vec<usize>> {
        sites
            .iter()
            .map(|s| self.index_of(s).ok_or_else(|| Error::MissingSite(s.to_string())))
            .collect()
    }

    /// CSV rows `row, col, re, im`, one per entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "re", "im"])?;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let z = self.matrix[(i, j)];
                w.write_record(&[i.to_string(), j.to_string(), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read the CSV form; sites become `(0), (1), …`. Missing entries are zero.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            row: usize,
            col: usize,
            re: f64,
            im: f64,
        }
        let mut entries = BTreeMap::new();
        let mut n = 0;
        for rec in csv::Reader::from_reader(input).deserialize() {
            let r: Row = rec?;
            n = n.max(r.row + 1).max(r.col + 1);
            entries.insert((r.row, r.col), Complex64::new(r.re, r.im));
        }
        let m = DMatrix::from_fn(n, n, |i, j| entries.get(&(i, j)).copied().unwrap_or_default());
        Self::new(default_sites(n), m)
    }
}

fn default_sites(n: usize) -> Vec<SiteIndex> {
    (0..n as i64).map(|i| SiteIndex::Lattice(vec![i])).collect()
}

pub(crate) fn check_indices(idx: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n {
            return Err(Error::SiteOutOfRange { index: i, len: n });
        }
        if seen[i] {
            return Err(Error::RepeatedSite(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `max |A_ij - conj(A_ji)|`.
pub fn hermitian_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Determinant by fully pivoted LU.
pub fn determinant(a: &DMatrix<Complex64>) -> Complex64 {
    if a.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    a.clone().full_piv_lu().determinant()
}
