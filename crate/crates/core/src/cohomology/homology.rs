//! Betti numbers of the full cube complex, computed independently of the
//! discrete Morse machinery.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigInt;

use super::smith::rank_dense;
use crate::complex::{cell_boundary, enumerate_cells, Cell};
use crate::error::Result;
use crate::tree::VertexOrder;

/// Integer matrix stored by columns, each sorted by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, i64)>>,
}

/// Cellular boundary of `cells` (all of one dimension `k >= 1`) in the
/// basis `faces` of `(k-1)`-cells. Edges of a cell are taken in increasing
/// order; the `i`-th contributes `(-1)^i` times (top face minus bottom face).
pub fn boundary_matrix(order: &VertexOrder, cells: &[Cell], faces: &[Cell]) -> SparseMatrix {
    let index: HashMap<&Cell, usize> = faces.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut cols = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut col: Vec<(usize, i64)> = cell_boundary(order, cell)
            .into_iter()
            .map(|(face, s)| (index[&face], s))
            .collect();
        col.sort_unstable();
        cols.push(col);
    }
    SparseMatrix {
        rows: faces.len(),
        cols,
    }
}

/// `target - factor * src`, or `None` on overflow.
fn axpy(target: &[(usize, i64)], src: &[(usize, i64)], factor: i64) -> Option<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(target.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < src.len() {
        let take_t = j == src.len() || (i < target.len() && target[i].0 < src[j].0);
        let take_s = i == target.len() || (j < src.len() && src[j].0 < target[i].0);
        if take_t {
            out.push(target[i]);
            i += 1;
        } else if take_s {
            out.push((src[j].0, src[j].1.checked_mul(factor)?.checked_neg()?));
            j += 1;
        } else {
            let v = target[i].1.checked_sub(src[j].1.checked_mul(factor)?)?;
            if v != 0 {
                out.push((target[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

impl SparseMatrix {
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Rank over the rationals: sparse elimination on unit pivots, then a
    /// dense Smith normal form of whatever is left.
    pub fn rank(&self) -> usize {
        let mut cols = self.cols.clone();
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); self.rows];
        for (c, col) in cols.iter().enumerate() {
            for &(r, _) in col {
                row_cols[r].push(c);
            }
        }
        let mut alive = vec![true; cols.len()];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| Reverse((c.len(), i)))
            .collect();
        let mut rank = 0;
        'outer: while let Some(Reverse((nnz, c))) = heap.pop() {
            if !alive[c] || cols[c].len() != nnz {
                continue;
            }
            let pivot = cols[c]
                .iter()
                .filter(|&&(_, v)| v == 1 || v == -1)
                .min_by_key(|&&(r, _)| row_cols[r].len())
                .copied();
            let Some((r, pv)) = pivot else { continue };
            let others = std::mem::take(&mut row_cols[r]);
            let src = std::mem::take(&mut cols[c]);
            for c2 in others {
                if c2 == c || !alive[c2] {
                    continue;
                }
                let Ok(pos) = cols[c2].binary_search_by_key(&r, |&(row, _)| row) else {
                    continue;
                };
                let factor = cols[c2][pos].1 * pv;
                let Some(updated) = axpy(&cols[c2], &src, factor) else {
                    // Entries outgrew i64: hand everything left to the dense reduction.
                    cols[c] = src;
                    break 'outer;
                };
                for &(row, _) in &updated {
                    if cols[c2].binary_search_by_key(&row, |&(x, _)| x).is_err() {
                        row_cols[row].push(c2);
                    }
                }
                cols[c2] = updated;
                if !cols[c2].is_empty() {
                    heap.push(Reverse((cols[c2].len(), c2)));
                }
            }
            alive[c] = false;
            rank += 1;
        }
        let residual: Vec<&Vec<(usize, i64)>> = cols
            .iter()
            .enumerate()
            .filter(|(i, c)| alive[*i] && !c.is_empty())
            .map(|(_, c)| c)
            .collect();
        if residual.is_empty() {
            return rank;
        }
        let mut rows: Vec<usize> = residual.iter().flat_map(|c| c.iter().map(|&(r, _)| r)).collect();
        rows.sort_unstable();
        rows.dedup();
        let row_index: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut dense = vec![vec![BigInt::from(0); residual.len()]; rows.len()];
        for (j, col) in residual.iter().enumerate() {
            for &(r, v) in col.iter() {
                dense[row_index[&r]][j] = BigInt::from(v);
            }
        }
        rank + rank_dense(dense)
    }
}

/// Rational Betti numbers `b_0..=b_max_dim` of the cube complex.
pub fn homology_oracle(order: &VertexOrder, n: usize, max_dim: usize, cap: usize) -> Result<Vec<usize>> {
    let dims: Vec<usize> = (0..=max_dim + 1).collect();
    let all = enumerate_cells(order, n, &dims, cap)?;
    let mut by_dim: Vec<Vec<Cell>> = vec![Vec::new(); max_dim + 2];
    for c in all {
        let d = c.dim();
        by_dim[d].push(c);
    }
    let mut ranks = vec![0usize; max_dim + 3];
    for k in 1..=max_dim + 1 {
        ranks[k] = boundary_matrix(order, &by_dim[k], &by_dim[k - 1]).rank();
    }
    Ok((0..=max_dim)
        .map(|k| by_dim[k].len() - ranks[k] - ranks[k + 1])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{critical_cells, DEFAULT_CELL_CAP};
    use crate::tree::fixtures::*;

    fn compose_is_zero(a: &SparseMatrix, b: &SparseMatrix) -> bool {
        // a: C_{k-1} -> C_{k-2}, b: C_k -> C_{k-1}
        b.cols.iter().all(|col| {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(mid, v) in col {
                for &(r, w) in &a.cols[mid] {
                    *acc.entry(r).or_default() += v * w;
                }
            }
            acc.values().all(|&x| x == 0)
        })
    }

    #[test]
    fn boundary_squares_to_zero() {
        let o = h().subdivide_for(4).order();
        let cells = enumerate_cells(&o, 4, &[0, 1, 2], DEFAULT_CELL_CAP).unwrap();
        let by = |k| cells.iter().filter(|c| c.dim() == k).cloned().collect::<Vec<_>>();
        let (c0, c1, c2) = (by(0), by(1), by(2));
        let d1 = boundary_matrix(&o, &c1, &c0);
        let d2 = boundary_matrix(&o, &c2, &c1);
        assert!(compose_is_zero(&d1, &d2));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            homology_oracle(&path3().order(), 1, 1, DEFAULT_CELL_CAP).unwrap(),
            [1, 0]
        );
        assert_eq!(
            homology_oracle(&y().subdivide_for(2).order(), 2, 1, DEFAULT_CELL_CAP).unwrap(),
            [1, 1]
        );
        assert_eq!(homology_oracle(&h().order(), 2, 1, DEFAULT_CELL_CAP).unwrap(), [1, 2]);
    }

    #[test]
    fn betti_numbers_count_critical_cells() {
        let o = h().subdivide_for(4).order();
        let b = homology_oracle(&o, 4, 2, DEFAULT_CELL_CAP).unwrap();
        for (k, &bk) in b.iter().enumerate() {
            assert_eq!(bk, critical_cells(&o, 4, k, DEFAULT_CELL_CAP).unwrap().len());
        }
    }

    #[test]
    fn rank_matches_dense() {
        let m = SparseMatrix {
            rows: 3,
            cols: vec![vec![(0, 2), (1, 4)], vec![(0, 1), (2, 3)], vec![(0, 3), (1, 4), (2, 3)]],
        };
        let mut dense = vec![vec![BigInt::from(0); 3]; 3];
        for (j, c) in m.cols.iter().enumerate() {
            for &(r, v) in c {
                dense[r][j] = BigInt::from(v);
            }
        }
        assert_eq!(m.rank(), rank_dense(dense));
        assert_eq!(m.rank(), 2);
    }
}
