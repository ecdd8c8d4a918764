use crate::discrete::TreeSite;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest number of sites `|B|·L` in a window.
pub const MAX_WINDOW_SITES: usize = 4096;

/// A finite section `B × [L]` of `ℤᵈ × ℕ`; `B` is the integer box `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WindowJson", into = "WindowJson")]
pub struct TreeWindow {
    lo: Vec<i64>,
    hi: Vec<i64>,
    levels: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowJson {
    #[serde(rename = "box")]
    bounds: [Vec<i64>; 2],
    levels: u32,
}

impl TryFrom<WindowJson> for TreeWindow {
    type Error = Error;
    fn try_from(w: WindowJson) -> Result<Self> {
        let [lo, hi] = w.bounds;
        TreeWindow::new(lo, hi, w.levels)
    }
}

impl From<TreeWindow> for WindowJson {
    fn from(w: TreeWindow) -> Self {
        WindowJson { bounds: [w.lo, w.hi], levels: w.levels }
    }
}

impl TreeWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, levels: u32) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter("window corners must have the same positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidParameter("window corner lo exceeds hi".into()));
        }
        if levels == 0 {
            return Err(Error::InvalidParameter("a window needs at least one level".into()));
        }
        let w = Self { lo, hi, levels };
        let size = w.cell_count().saturating_mul(levels as usize);
        if size > MAX_WINDOW_SITES {
            return Err(Error::WindowTooLarge { size, limit: MAX_WINDOW_SITES });
        }
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn cell_count(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as usize).fold(1usize, |acc, n| acc.saturating_mul(n))
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        cell.len() == self.dim() && cell.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| a <= c && c <= b)
    }

    /// Cells of `B` in lexicographic order.
    pub fn cells(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.cell_count());
        let mut z = self.lo.clone();
        loop {
            out.push(z.clone());
            let mut j = self.dim();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if z[j] < self.hi[j] {
                    z[j] += 1;
                    break;
                }
                z[j] = self.lo[j];
            }
        }
    }

    /// Sites `(z, l)` ordered by cell, then level.
    pub fn sites(&self) -> Vec<TreeSite> {
        self.cells()
            .into_iter()
            .flat_map(|cell| (1..=self.levels).map(move |level| TreeSite { cell: cell.clone(), level }))
            .collect()
    }
}

/// The partition `Q^N` of `ℤᵈ × ℕ`: singletons below level `N`, one tail cell
/// `{(z, m) : m ≥ N}` per lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelPartition {
    n: u32,
}

impl LevelPartition {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("partition depth must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    /// Index `l ∈ [N]` of the partition cell holding level `m`.
    pub fn cell_of(&self, level: u32) -> u32 {
        level.min(self.n)
    }

    /// Whether `(z, m)` lies in `Q^N_{z, l}`.
    pub fn contains(&self, l: u32, m: u32) -> bool {
        if l < self.n {
            m == l
        } else {
            l == self.n && m >= self.n
        }
    }
}

/// Occupation counts per lattice point: `π(η) = Σ_z η({z} × ℕ) δ_z`.
pub fn pi_project(config: &[TreeSite]) -> BTreeMap<Vec<i64>, u32> {
    let mut out = BTreeMap::new();
    for s in config {
        *out.entry(s.cell.clone()).or_insert(0) += 1;
    }
    out
}

/// A `{0,1}` field over `B × [N]`, bit `(z, l)` stored at `bits[z][l - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryField {
    pub levels: u32,
    pub bits: BTreeMap<Vec<i64>, Vec<bool>>,
}

impl BinaryField {
    pub fn zeros(cells: &[Vec<i64>], levels: u32) -> Self {
        Self { levels, bits: cells.iter().map(|c| (c.clone(), vec![false; levels as usize])).collect() }
    }

    pub fn get(&self, cell: &[i64], level: u32) -> Option<bool> {
        self.bits.get(cell).and_then(|b| b.get(level as usize - 1).copied())
    }

    /// The image under the coarser partition `Q^n` for `n ≤ N`: bits below `n`
    /// are kept and the tail bit is the OR of levels `n..=N`.
    pub fn coarsen(&self, n: u32) -> Result<Self> {
        if n == 0 || n > self.levels {
            return Err(Error::InvalidParameter(format!("cannot coarsen {} levels to {n}", self.levels)));
        }
        let bits = self
            .bits
            .iter()
            .map(|(z, b)| {
                let mut out = b[..n as usize - 1].to_vec();
                out.push(b[n as usize - 1..].iter().any(|&x| x));
                (z.clone(), out)
            })
            .collect();
        Ok(Self { levels: n, bits })
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.bits.values().flatten().filter(|&&b| b).count()
    }
}

/// `ϖ_N(η)`: bit `(z, l)` is set iff `η` meets `Q^N_{z,l}`, for every cell of `cells`.
pub fn varpi_truncate(config: &[TreeSite], n: u32, cells: &[Vec<i64>]) -> Result<BinaryField> {
    let part = LevelPartition::new(n)?;
    let mut field = BinaryField::zeros(cells, n);
    for s in config {
        if s.level == 0 {
            return Err(Error::InvalidParameter("tree levels are 1-based".into()));
        }
        let bits = field
            .bits
            .get_mut(&s.cell)
            .ok_or_else(|| Error::MissingSite(format!("{:?}", s.cell)))?;
        bits[part.cell_of(s.level) as usize - 1] = true;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn site(z: i64, l: u32) -> TreeSite {
        TreeSite { cell: vec![z], level: l }
    }

    #[test]
    fn window_json_and_limits() {
        let w: TreeWindow = serde_json::from_str(r#"{"box":[[0,0],[1,2]],"levels":4}"#).unwrap();
        assert_eq!(w.cell_count(), 6);
        assert_eq!(w.sites().len(), 24);
        assert_eq!(w.cells()[1], vec![0, 1]);
        assert_eq!(serde_json::to_string(&w).unwrap(), r#"{"box":[[0,0],[1,2]],"levels":4}"#);
        assert!(matches!(TreeWindow::new(vec![0], vec![1024], 4), Err(Error::WindowTooLarge { .. })));
        assert!(TreeWindow::new(vec![0], vec![1023], 4).is_ok());
        assert!(serde_json::from_str::<TreeWindow>(r#"{"box":[[2],[1]],"levels":1}"#).is_err());
    }

    #[test]
    fn partition_cells() {
        let q = LevelPartition::new(3).unwrap();
        assert!(q.contains(1, 1) && !q.contains(1, 2) && q.contains(3, 3) && q.contains(3, 10) && !q.contains(2, 3));
        assert_eq!(q.cell_of(12), 3);
    }

    #[test]
    fn pi_examples() {
        assert!(pi_project(&[]).is_empty());
        let p = pi_project(&[site(0, 1), site(0, 5), site(3, 2)]);
        assert_eq!(p.get(&vec![0]), Some(&2));
        assert_eq!(p.get(&vec![3]), Some(&1));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn varpi_examples() {
        let cells = vec![vec![0]];
        let f = varpi_truncate(&[site(0, 1), site(0, 5)], 3, &cells).unwrap();
        assert_eq!(f.bits[&vec![0]], vec![true, false, true]);
        assert_eq!(varpi_truncate(&[], 4, &cells).unwrap().count_ones(), 0);
        let f = varpi_truncate(&[site(0, 3 + 7)], 3, &cells).unwrap();
        assert_eq!(f.bits[&vec![0]], vec![false, false, true]);
        assert!(varpi_truncate(&[site(5, 1)], 3, &cells).is_err());
    }

    fn config_strategy() -> impl Strategy<Value = Vec<TreeSite>> {
        proptest::collection::btree_set((-3i64..3, 1u32..12), 0..20)
            .prop_map(|s| s.into_iter().map(|(z, l)| site(z, l)).collect())
    }

    proptest! {
        #[test]
        fn finer_truncation_determines_coarser(config in config_strategy(), n in 1u32..6, extra in 0u32..6) {
            let cells: Vec<Vec<i64>> = (-3..3).map(|z| vec![z]).collect();
            let fine = varpi_truncate(&config, n + extra, &cells).unwrap();
            let coarse = varpi_truncate(&config, n, &cells).unwrap();
            prop_assert_eq!(fine.coarsen(n).unwrap(), coarse);
        }

        #[test]
        fn pi_commutes_with_shifts(config in config_strategy(), a in -5i64..5) {
            let shifted: Vec<TreeSite> = config.iter().map(|s| site(s.cell[0] + a, s.level)).collect();
            let lhs = pi_project(&shifted);
            let rhs: BTreeMap<Vec<i64>, u32> = pi_project(&config).into_iter().map(|(z, c)| (vec![z[0] + a], c)).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pi_preserves_total_count(config in config_strategy()) {
            prop_assert_eq!(pi_project(&config).values().sum::<u32>() as usize, config.len());
        }
    }
}
