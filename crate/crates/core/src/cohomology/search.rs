use std::collections::HashMap;

use super::Ring;
use crate::clouds::{one_cell_factors, CloudDiagram};
use crate::complex::{critical_cells, reduced_complex_dim, Cell};
use crate::error::Result;
use crate::tree::VertexOrder;

/// Two critical cells of equal dimension whose 1-cell factors are pairwise
/// different classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPair {
    pub phi: Cell,
    pub psi: Cell,
    pub phi_factors: Vec<CloudDiagram>,
    pub psi_factors: Vec<CloudDiagram>,
}

/// First pair (in critical-cell order) of critical `k`-cells with disjoint
/// factor collections, or `None` after checking every pair.
pub fn search_disjoint_critical_pair(
    order: &VertexOrder,
    n: usize,
    k: usize,
    cap: usize,
) -> Result<Option<CriticalPair>> {
    if k == 0 {
        return Ok(None);
    }
    let cells = critical_cells(order, n, k, cap)?;
    let mut ids: HashMap<CloudDiagram, usize> = HashMap::new();
    let mut factors = Vec::with_capacity(cells.len());
    let mut sets = Vec::with_capacity(cells.len());
    for c in &cells {
        let f = one_cell_factors(order, &CloudDiagram::of_cell(order, c))?;
        let set: Vec<usize> = f
            .iter()
            .map(|d| {
                let next = ids.len();
                *ids.entry(d.clone()).or_insert(next)
            })
            .collect();
        factors.push(f);
        sets.push(set);
    }
    let words = ids.len().div_ceil(64).max(1);
    let bits: Vec<Vec<u64>> = sets
        .iter()
        .map(|set| {
            let mut b = vec![0u64; words];
            for &i in set {
                b[i / 64] |= 1 << (i % 64);
            }
            b
        })
        .collect();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if bits[i].iter().zip(&bits[j]).all(|(x, y)| x & y == 0) {
                return Ok(Some(CriticalPair {
                    phi: cells[i].clone(),
                    psi: cells[j].clone(),
                    phi_factors: factors[i].clone(),
                    psi_factors: factors[j].clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// Length of the longest product of zero-divisors verified nonzero here.
///
/// Pairs of critical cells with disjoint factors are tried from the top
/// dimension down; a pair in dimension `j` whose expanded product is
/// nonzero certifies `2j`. Any positive-degree class certifies at least 1.
pub fn zdcl_lower_bound(order: &VertexOrder, n: usize, cap: usize) -> Result<usize> {
    let top = reduced_complex_dim(order, n, cap)?;
    if top == 0 {
        return Ok(0);
    }
    let ring = Ring::with_top_degree(order, n, top);
    for j in (1..=top).rev() {
        let Some(pair) = search_disjoint_critical_pair(order, n, j, cap)? else {
            continue;
        };
        let mut all = pair.phi_factors.clone();
        all.extend(pair.psi_factors.iter().cloned());
        match ring.zero_divisor_product(&all) {
            Ok(p) if !p.is_zero() => return Ok(2 * j),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::DEFAULT_CELL_CAP;
    use crate::tree::fixtures::*;

    #[test]
    fn h_two_points_pair() {
        let o = h().order();
        let p = search_disjoint_critical_pair(&o, 2, 1, DEFAULT_CELL_CAP)
            .unwrap()
            .unwrap();
        assert_ne!(p.phi_factors, p.psi_factors);
        assert_eq!(zdcl_lower_bound(&o, 2, DEFAULT_CELL_CAP).unwrap(), 2);
    }

    #[test]
    fn y_two_points_no_pair() {
        let o = y().order();
        assert_eq!(search_disjoint_critical_pair(&o, 2, 1, DEFAULT_CELL_CAP).unwrap(), None);
        assert_eq!(zdcl_lower_bound(&o, 2, DEFAULT_CELL_CAP).unwrap(), 1);
    }

    #[test]
    fn y_four_points_pair() {
        let o = y().subdivide_for(4).order();
        assert!(search_disjoint_critical_pair(&o, 4, 1, DEFAULT_CELL_CAP)
            .unwrap()
            .is_some());
    }

    #[test]
    fn path_has_zero_length() {
        let o = path3().subdivide_for(3).order();
        assert_eq!(zdcl_lower_bound(&o, 3, DEFAULT_CELL_CAP).unwrap(), 0);
    }
}
