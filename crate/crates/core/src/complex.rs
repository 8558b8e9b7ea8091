//! Cells of the discretized unordered configuration space and their
//! discrete Morse classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{EdgeId, VertexOrder};

pub const DEFAULT_CELL_CAP: usize = 5_000_000;

/// A cell: vertices and edges of the tree with pairwise disjoint closures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    edges: Vec<EdgeId>,
    vertices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellClass {
    Critical,
    Collapsible,
    Redundant,
}

impl fmt::Display for CellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CellClass::Critical => "critical",
            CellClass::Collapsible => "collapsible",
            CellClass::Redundant => "redundant",
        };
        f.write_str(s)
    }
}

impl Cell {
    /// Builds a cell, checking disjointness of closures.
    pub fn new(order: &VertexOrder, mut vertices: Vec<usize>, mut edges: Vec<EdgeId>) -> Result<Cell> {
        vertices.sort_unstable();
        edges.sort_unstable();
        let mut used = vec![false; order.len()];
        let mut claim = |v: usize| -> Result<()> {
            if v >= order.len() {
                return Err(Error::InvalidCell(format!("vertex {v} out of range")));
            }
            if std::mem::replace(&mut used[v], true) {
                return Err(Error::InvalidCell(format!("closures meet at `{}`", order.id(v))));
            }
            Ok(())
        };
        for &e in &edges {
            if e.0 == 0 || e.0 >= order.len() {
                return Err(Error::InvalidCell(format!("edge {} out of range", e.0)));
            }
            claim(order.iota(e))?;
            claim(e.0)?;
        }
        for &v in &vertices {
            claim(v)?;
        }
        Ok(Cell { edges, vertices })
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<usize>, edges: Vec<EdgeId>) -> Cell {
        Cell { edges, vertices }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn size(&self) -> usize {
        self.edges.len() + self.vertices.len()
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Whether `v` is a member vertex or an endpoint of a member edge.
    pub fn occupies(&self, order: &VertexOrder, v: usize) -> bool {
        self.has_vertex(v) || self.edges.iter().any(|&e| e.0 == v || order.iota(e) == v)
    }

    /// Members as strings: `v:<id>` and `e:<smaller id>-<larger id>`, edges
    /// after vertices, each group in numbering order.
    pub fn to_strings(&self, order: &VertexOrder) -> Vec<String> {
        self.vertices
            .iter()
            .map(|&v| format!("v:{}", order.id(v)))
            .chain(
                self.edges
                    .iter()
                    .map(|&e| format!("e:{}-{}", order.id(order.iota(e)), order.id(e.0))),
            )
            .collect()
    }

    pub fn parse(order: &VertexOrder, items: &[String]) -> Result<Cell> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let find = |id: &str| order.lookup(id).ok_or_else(|| Error::UnknownVertex(id.to_string()));
        for item in items {
            if let Some(id) = item.strip_prefix("v:") {
                vertices.push(find(id)?);
            } else if let Some(rest) = item.strip_prefix("e:") {
                let (a, b) =
                    split_edge(order, rest).ok_or_else(|| Error::InvalidCell(format!("cannot read edge `{item}`")))?;
                let e = order
                    .edge_between(a, b)
                    .ok_or_else(|| Error::InvalidCell(format!("`{item}` is not an edge")))?;
                edges.push(e);
            } else {
                return Err(Error::InvalidCell(format!("cannot read member `{item}`")));
            }
        }
        Cell::new(order, vertices, edges)
    }
}

/// Splits `a-b` into two known vertex ids, trying every dash since ids may contain dashes.
pub(crate) fn split_edge(order: &VertexOrder, text: &str) -> Option<(usize, usize)> {
    text.match_indices('-').find_map(|(i, _)| {
        let a = order.lookup(&text[..i])?;
        let b = order.lookup(&text[i + 1..])?;
        Some((a, b))
    })
}

/// Every cell of the requested dimensions with `n` members, ordered by
/// dimension, then edges, then vertices.
pub fn enumerate_cells(order: &VertexOrder, n: usize, dims: &[usize], cap: usize) -> Result<Vec<Cell>> {
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut out = Vec::new();
    for k in dims {
        if k > n {
            continue;
        }
        let mut matchings = Vec::new();
        let mut used = vec![false; order.len()];
        collect_matchings(order, k, 1, &mut Vec::new(), &mut used, &mut |m, used| {
            matchings.push((m.to_vec(), used.to_vec()));
        });
        for (edges, used) in matchings {
            let free: Vec<usize> = (0..order.len()).filter(|&v| !used[v]).collect();
            let need = n - k;
            if free.len() < need {
                continue;
            }
            let mut idx: Vec<usize> = (0..need).collect();
            loop {
                if out.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                out.push(Cell::from_sorted_unchecked(
                    idx.iter().map(|&i| free[i]).collect(),
                    edges.clone(),
                ));
                if !next_combination(&mut idx, free.len()) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn collect_matchings(
    order: &VertexOrder,
    k: usize,
    from: usize,
    chosen: &mut Vec<EdgeId>,
    used: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[EdgeId], &[bool]),
) {
    if chosen.len() == k {
        emit(chosen, used);
        return;
    }
    for t in from..order.len() {
        if order.len() - t < k - chosen.len() {
            break;
        }
        let i = order.iota(EdgeId(t));
        if used[i] || used[t] {
            continue;
        }
        used[i] = true;
        used[t] = true;
        chosen.push(EdgeId(t));
        collect_matchings(order, k, t + 1, chosen, used, emit);
        chosen.pop();
        used[i] = false;
        used[t] = false;
    }
}

/// Advances a strictly increasing index tuple over `0..len`; false when exhausted.
pub(crate) fn next_combination(idx: &mut [usize], len: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < len - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn is_blocked(order: &VertexOrder, cell: &Cell, v: usize) -> Result<bool> {
    if !cell.has_vertex(v) {
        return Err(Error::NotAMember);
    }
    Ok(blocked(order, cell, v))
}

fn blocked(order: &VertexOrder, cell: &Cell, v: usize) -> bool {
    match order.parent(v) {
        None => true,
        Some(p) => cell.occupies(order, p),
    }
}

pub fn is_order_disrespecting(order: &VertexOrder, cell: &Cell, e: EdgeId) -> Result<bool> {
    if !cell.has_edge(e) {
        return Err(Error::NotAMember);
    }
    Ok(disrespecting(order, cell, e))
}

fn disrespecting(order: &VertexOrder, cell: &Cell, e: EdgeId) -> bool {
    let i = order.iota(e);
    cell.vertices.iter().any(|&v| order.parent(v) == Some(i) && v < e.0)
}

pub fn classify_cell(order: &VertexOrder, cell: &Cell) -> CellClass {
    let unblocked: Vec<usize> = cell
        .vertices
        .iter()
        .copied()
        .filter(|&v| !blocked(order, cell, v))
        .collect();
    let respecting: Vec<EdgeId> = cell
        .edges
        .iter()
        .copied()
        .filter(|&e| !disrespecting(order, cell, e))
        .collect();
    if unblocked.is_empty() && respecting.is_empty() {
        return CellClass::Critical;
    }
    let collapsible = respecting.iter().any(|e| unblocked.iter().all(|&v| v > e.0));
    if collapsible {
        CellClass::Collapsible
    } else {
        CellClass::Redundant
    }
}

/// Faces of a cell with incidence numbers. Edges are taken in increasing
/// order; the `i`-th contributes `(-1)^i` times (top face minus bottom face).
pub fn cell_boundary(order: &VertexOrder, cell: &Cell) -> Vec<(Cell, i64)> {
    let mut out = Vec::with_capacity(2 * cell.dim());
    for (i, &e) in cell.edges.iter().enumerate() {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let mut edges = cell.edges.clone();
        edges.remove(i);
        for (end, s) in [(e.0, sign), (order.iota(e), -sign)] {
            let mut verts = cell.vertices.clone();
            let pos = verts.partition_point(|&v| v < end);
            verts.insert(pos, end);
            out.push((Cell::from_sorted_unchecked(verts, edges.clone()), s));
        }
    }
    out
}

/// The collapsible partner of a redundant cell: its smallest unblocked
/// vertex traded for the edge towards the base. Also returns the incidence
/// number of the cell in the partner's boundary.
pub fn gradient_partner(order: &VertexOrder, cell: &Cell) -> Option<(Cell, i64)> {
    if classify_cell(order, cell) != CellClass::Redundant {
        return None;
    }
    let v = *cell.vertices.iter().find(|&&v| !blocked(order, cell, v))?;
    let e = EdgeId(v);
    let vertices: Vec<usize> = cell.vertices.iter().copied().filter(|&x| x != v).collect();
    let mut edges = cell.edges.clone();
    let pos = edges.partition_point(|&x| x < e);
    edges.insert(pos, e);
    let sign = if pos % 2 == 0 { 1 } else { -1 };
    Some((Cell::from_sorted_unchecked(vertices, edges), sign))
}

/// Critical `k`-cells with `n` members, in the same order as [`enumerate_cells`].
///
/// Built directly: each edge must start at a vertex with a smaller occupied
/// sibling direction, and vertices are added in increasing order only when
/// their parent is already occupied.
pub fn critical_cells(order: &VertexOrder, n: usize, k: usize, cap: usize) -> Result<Vec<Cell>> {
    if k > n {
        return Ok(Vec::new());
    }
    let mut matchings = Vec::new();
    let mut used = vec![false; order.len()];
    let candidates: Vec<EdgeId> = order
        .edges()
        .filter(|&e| order.iota(e) != 0 && order.direction_from_parent(e.0) >= 2)
        .collect();
    collect_candidate_matchings(order, &candidates, k, 0, &mut Vec::new(), &mut used, &mut matchings);
    let mut out = Vec::new();
    for (edges, used) in matchings {
        let mut occupied = used.clone();
        let mut chosen = Vec::new();
        let mut err = None;
        extend_blocked(order, n - k, 0, &mut occupied, &mut chosen, &mut |verts: &[usize]| {
            if err.is_some() {
                return;
            }
            let cell = Cell::from_sorted_unchecked(verts.to_vec(), edges.clone());
            if cell.edges.iter().all(|&e| disrespecting(order, &cell, e)) {
                if out.len() >= cap {
                    err = Some(Error::CapExceeded { cap });
                    return;
                }
                out.push(cell);
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(out)
}

fn collect_candidate_matchings(
    order: &VertexOrder,
    candidates: &[EdgeId],
    k: usize,
    from: usize,
    chosen: &mut Vec<EdgeId>,
    used: &mut Vec<bool>,
    out: &mut Vec<(Vec<EdgeId>, Vec<bool>)>,
) {
    if chosen.len() == k {
        out.push((chosen.clone(), used.clone()));
        return;
    }
    for idx in from..candidates.len() {
        let e = candidates[idx];
        let i = order.iota(e);
        if used[i] || used[e.0] {
            continue;
        }
        used[i] = true;
        used[e.0] = true;
        chosen.push(e);
        collect_candidate_matchings(order, candidates, k, idx + 1, chosen, used, out);
        chosen.pop();
        used[i] = false;
        used[e.0] = false;
    }
}

fn extend_blocked(
    order: &VertexOrder,
    remaining: usize,
    from: usize,
    occupied: &mut Vec<bool>,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(chosen);
        return;
    }
    for v in from..order.len() {
        if occupied[v] {
            continue;
        }
        let ok = match order.parent(v) {
            None => true,
            Some(p) => occupied[p],
        };
        if !ok {
            continue;
        }
        occupied[v] = true;
        chosen.push(v);
        extend_blocked(order, remaining - 1, v + 1, occupied, chosen, emit);
        chosen.pop();
        occupied[v] = false;
    }
}

/// Largest dimension of a critical cell; never above `min(n / 2, m)`.
pub fn reduced_complex_dim(order: &VertexOrder, n: usize, cap: usize) -> Result<usize> {
    let m = (0..order.len()).filter(|&v| order.degree(v) >= 3).count();
    let bound = (n / 2).min(m);
    for k in (0..=bound).rev() {
        if !critical_cells(order, n, k, cap)?.is_empty() {
            return Ok(k);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures::*;

    const CAP: usize = DEFAULT_CELL_CAP;

    /// Brute force over all subsets of elements of size `n`.
    fn brute_cells(order: &VertexOrder, n: usize, k: usize) -> Vec<Cell> {
        let verts: Vec<usize> = (0..order.len()).collect();
        let edges: Vec<EdgeId> = order.edges().collect();
        let mut out = Vec::new();
        for emask in 0u32..(1 << edges.len()) {
            if emask.count_ones() as usize != k {
                continue;
            }
            for vmask in 0u32..(1 << verts.len()) {
                if vmask.count_ones() as usize + k != n {
                    continue;
                }
                let es = (0..edges.len())
                    .filter(|i| emask >> i & 1 == 1)
                    .map(|i| edges[i])
                    .collect();
                let vs = (0..verts.len()).filter(|i| vmask >> i & 1 == 1).collect();
                if let Ok(c) = Cell::new(order, vs, es) {
                    out.push(c);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn path_two_points_dim_zero() {
        let o = path3().order();
        let cells = enumerate_cells(&o, 2, &[0], CAP).unwrap();
        assert_eq!(cells, brute_cells(&o, 2, 0));
        assert_eq!(cells.len(), 3);
    }

    #[test]
    fn one_point_cells_are_vertices() {
        let o = h().order();
        assert_eq!(enumerate_cells(&o, 1, &[0], CAP).unwrap().len(), o.len());
    }

    #[test]
    fn y_two_points_no_two_cells() {
        let o = y().order();
        assert!(enumerate_cells(&o, 2, &[2], CAP).unwrap().is_empty());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let o = h().subdivide_for(3).order();
        for k in 0..=2 {
            let mut got = enumerate_cells(&o, 3, &[k], CAP).unwrap();
            got.sort();
            assert_eq!(got, brute_cells(&o, 3, k));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let o = h().order();
        assert_eq!(enumerate_cells(&o, 2, &[0, 1], 3), Err(Error::CapExceeded { cap: 3 }));
    }

    #[test]
    fn blocked_examples() {
        let o = y().subdivide_for(3).order();
        let first = Cell::new(&o, vec![0, 1, 2], vec![]).unwrap();
        for v in 0..3 {
            assert!(is_blocked(&o, &first, v).unwrap());
        }
        let far = Cell::new(&o, vec![0, o.len() - 1], vec![]).unwrap();
        assert!(!is_blocked(&o, &far, o.len() - 1).unwrap());
        assert_eq!(is_blocked(&o, &far, 1), Err(Error::NotAMember));
        assert_eq!(classify_cell(&o, &first), CellClass::Critical);
    }

    #[test]
    fn y_critical_one_cell() {
        let o = y().order();
        let c = Cell::new(&o, vec![2], vec![EdgeId(3)]).unwrap();
        assert!(is_order_disrespecting(&o, &c, EdgeId(3)).unwrap());
        assert_eq!(classify_cell(&o, &c), CellClass::Critical);
        assert_eq!(critical_cells(&o, 2, 1, CAP).unwrap(), vec![c]);
    }

    #[test]
    fn lone_edge_respects_order() {
        let o = y().order();
        let c = Cell::new(&o, vec![], vec![EdgeId(3)]).unwrap();
        assert!(!is_order_disrespecting(&o, &c, EdgeId(3)).unwrap());
        let c = Cell::new(&o, vec![0], vec![EdgeId(3)]).unwrap();
        assert_eq!(classify_cell(&o, &c), CellClass::Collapsible);
    }

    #[test]
    fn h_critical_counts() {
        let o = h().order();
        assert_eq!(critical_cells(&o, 2, 1, CAP).unwrap().len(), 2);
        assert_eq!(reduced_complex_dim(&y().order(), 2, CAP).unwrap(), 1);
        assert_eq!(reduced_complex_dim(&h().subdivide_for(4).order(), 4, CAP).unwrap(), 2);
        assert_eq!(
            reduced_complex_dim(&path3().subdivide_for(4).order(), 4, CAP).unwrap(),
            0
        );
    }

    #[test]
    fn direct_critical_matches_classification() {
        for t in [y().subdivide_for(3), h().subdivide_for(4)] {
            let o = t.order();
            let n = if o.len() > 10 { 4 } else { 3 };
            for k in 0..=2 {
                let all = enumerate_cells(&o, n, &[k], CAP).unwrap();
                let crit: Vec<Cell> = all
                    .into_iter()
                    .filter(|c| classify_cell(&o, c) == CellClass::Critical)
                    .collect();
                assert_eq!(critical_cells(&o, n, k, CAP).unwrap(), crit);
            }
        }
    }

    #[test]
    fn string_round_trip() {
        let o = h().order();
        let c = Cell::new(&o, vec![2], vec![EdgeId(3)]).unwrap();
        let s = c.to_strings(&o);
        assert_eq!(s, ["v:a", "e:u-w"]);
        assert_eq!(Cell::parse(&o, &s).unwrap(), c);
    }
}
