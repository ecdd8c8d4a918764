use crate::discrete::{check_indices, determinant, DiscreteKernel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// `|det K_{P∪Q} - det K_P · det K_Q|` for disjoint `P`, `Q`.
pub fn factorization_check(k: &DiscreteKernel, p: &[usize], q: &[usize]) -> Result<f64> {
    let union: Vec<usize> = p.iter().chain(q).copied().collect();
    // also rejects overlap between P and Q
    check_indices(&union, k.len())?;
    let joint = determinant(&k.section(&union)?);
    let split = determinant(&k.section(p)?) * determinant(&k.section(q)?);
    Ok((joint - split).norm())
}

/// One row of a dependence scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub separation: u64,
    /// Largest defect among tested pairs at lattice distance ≥ `separation`.
    pub max_defect: f64,
    pub pairs: usize,
}

fn l1(a: &[i64], b: &[i64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

/// Factorization defects as a function of lattice separation.
///
/// The tested family is deterministic: every pair of single sites, every pair
/// of whole cells (all levels of a lattice point), and every pair of
/// half-windows `{z_j ≤ c}`, `{z_j ≥ c + s}` along each axis. The separation
/// of a pair is the smallest `ℓ¹` distance between the cells of `P` and `Q`.
pub fn dependence_radius_scan(k: &DiscreteKernel, max_separation: u64) -> Result<Vec<ScanRow>> {
    let sites = k.sites();
    let cells: BTreeSet<Vec<i64>> = sites.iter().map(|s| s.cell().to_vec()).collect();
    let cells: Vec<Vec<i64>> = cells.into_iter().collect();
    let members = |pred: &dyn Fn(&[i64]) -> bool| -> Vec<usize> { (0..sites.len()).filter(|&i| pred(sites[i].cell())).collect() };

    let mut family: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for i in 0..sites.len() {
        for j in (i + 1)..sites.len() {
            if sites[i].cell() != sites[j].cell() {
                family.push((vec![i], vec![j]));
            }
        }
    }
    for a in 0..cells.len() {
        for b in (a + 1)..cells.len() {
            family.push((members(&|c| c == cells[a].as_slice()), members(&|c| c == cells[b].as_slice())));
        }
    }
    let dim = cells.first().map_or(0, |c| c.len());
    for j in 0..dim {
        let coords: BTreeSet<i64> = cells.iter().map(|c| c[j]).collect();
        for &lo in &coords {
            for &hi in coords.iter().filter(|&&h| h > lo) {
                family.push((members(&|c| c[j] <= lo), members(&|c| c[j] >= hi)));
            }
        }
    }

    let mut tested = Vec::with_capacity(family.len());
    for (p, q) in family {
        if p.is_empty() || q.is_empty() {
            continue;
        }
        let sep = p
            .iter()
            .flat_map(|&i| q.iter().map(move |&j| (i, j)))
            .map(|(i, j)| l1(sites[i].cell(), sites[j].cell()))
            .min()
            .ok_or_else(|| Error::InvalidParameter("empty pair".into()))?;
        tested.push((sep, factorization_check(k, &p, &q)?));
    }
    Ok((1..=max_separation)
        .map(|s| {
            let at: Vec<f64> = tested.iter().filter(|(sep, _)| *sep >= s).map(|(_, d)| *d).collect();
            ScanRow { separation: s, max_defect: at.iter().copied().fold(0.0, f64::max), pairs: at.len() }
        })
        .collect())
}

/// Smallest separation from which every row stays at or below `tol`.
pub fn first_compliant_separation(rows: &[ScanRow], tol: f64) -> Option<u64> {
    let mut first = None;
    for row in rows.iter().rev() {
        if row.max_defect <= tol {
            first = Some(row.separation);
        } else {
            break;
        }
    }
    first
}
