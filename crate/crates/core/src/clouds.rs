//! Cloud diagrams: canonical representatives of cell equivalence classes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{split_edge, Cell};
use crate::error::{Error, Result};
use crate::tree::{EdgeId, VertexOrder};

/// Removed edges plus the number of cell vertices in each component of the
/// tree minus those closed edges. Components without vertices are omitted;
/// each cloud is named by its smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CloudDiagram {
    n: usize,
    tree_size: usize,
    edges: Vec<EdgeId>,
    clouds: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudJson {
    pub anchor_vertex: String,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub edges: Vec<String>,
    pub clouds: Vec<CloudJson>,
}

/// Components of the tree minus the closed edges `edges`.
pub(crate) struct Components {
    /// Cloud index per vertex, `None` for endpoints of removed edges.
    pub label: Vec<Option<usize>>,
    /// Smallest vertex of each cloud, ascending.
    pub anchors: Vec<usize>,
    pub sizes: Vec<usize>,
}

pub(crate) fn components(order: &VertexOrder, edges: &[EdgeId]) -> Components {
    let len = order.len();
    let mut removed = vec![false; len];
    for &e in edges {
        removed[e.0] = true;
        removed[order.iota(e)] = true;
    }
    let mut label = vec![None; len];
    let mut anchors = Vec::new();
    let mut sizes = Vec::new();
    // Numbering is a preorder, so a vertex joins its parent's cloud when both are free.
    for v in 0..len {
        if removed[v] {
            continue;
        }
        match order.parent(v) {
            Some(p) if !removed[p] => {
                let c = label[p].expect("parent labelled first");
                label[v] = Some(c);
                sizes[c] += 1;
            }
            _ => {
                label[v] = Some(anchors.len());
                anchors.push(v);
                sizes.push(1);
            }
        }
    }
    Components { label, anchors, sizes }
}

impl CloudDiagram {
    pub fn of_cell(order: &VertexOrder, cell: &Cell) -> CloudDiagram {
        let comps = components(order, cell.edges());
        let mut values = vec![0; comps.anchors.len()];
        for &v in cell.vertices() {
            values[comps.label[v].expect("cell vertices avoid its edges")] += 1;
        }
        CloudDiagram {
            n: cell.size(),
            tree_size: order.len(),
            edges: cell.edges().to_vec(),
            clouds: comps.anchors.into_iter().zip(values).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// `(anchor, value)` pairs sorted by anchor.
    pub fn clouds(&self) -> &[(usize, usize)] {
        &self.clouds
    }

    pub fn value_at(&self, anchor: usize) -> Option<usize> {
        self.clouds
            .binary_search_by_key(&anchor, |&(a, _)| a)
            .ok()
            .map(|i| self.clouds[i].1)
    }

    /// Diagram of the classes below this one obtained by keeping only
    /// `sub` and crediting everything else to the enlarged clouds.
    pub fn aggregate(&self, order: &VertexOrder, sub: &[EdgeId]) -> Result<CloudDiagram> {
        if order.len() != self.tree_size {
            return Err(Error::MismatchedDiagrams);
        }
        let mut sub = sub.to_vec();
        sub.sort_unstable();
        sub.dedup();
        if !sub.iter().all(|e| self.edges.binary_search(e).is_ok()) {
            return Err(Error::MismatchedDiagrams);
        }
        let comps = components(order, &sub);
        let mut values = vec![0; comps.anchors.len()];
        for &e in &self.edges {
            if sub.binary_search(&e).is_err() {
                values[comps.label[e.0].expect("disjoint edges")] += 1;
            }
        }
        for &(a, val) in &self.clouds {
            values[comps.label[a].expect("finer clouds avoid removed endpoints")] += val;
        }
        Ok(CloudDiagram {
            n: self.n,
            tree_size: self.tree_size,
            edges: sub,
            clouds: comps.anchors.into_iter().zip(values).collect(),
        })
    }

    /// A representative cell: the smallest-numbered vertices of each cloud.
    pub fn representative(&self, order: &VertexOrder) -> Cell {
        let comps = components(order, &self.edges);
        let mut want: Vec<usize> = self.clouds.iter().map(|&(_, v)| v).collect();
        let mut vertices = Vec::new();
        for v in 0..order.len() {
            if let Some(c) = comps.label[v] {
                if want[c] > 0 {
                    want[c] -= 1;
                    vertices.push(v);
                }
            }
        }
        Cell::from_sorted_unchecked(vertices, self.edges.clone())
    }

    /// The critical cell in this class, when there is one. Each edge needs
    /// an occupied cloud hanging off its smaller endpoint in a smaller
    /// nonzero direction; each cloud is then filled from its top.
    pub fn critical_representative(&self, order: &VertexOrder) -> Option<Cell> {
        let comps = components(order, &self.edges);
        for (c, &(_, val)) in self.clouds.iter().enumerate() {
            if val > comps.sizes[c] {
                return None;
            }
        }
        for &e in &self.edges {
            let i = order.iota(e);
            let witnessed = order
                .children(i)
                .iter()
                .any(|&w| w < e.0 && self.value_at(w).is_some_and(|val| val >= 1));
            if i == 0 || !witnessed {
                return None;
            }
        }
        Some(self.representative(order))
    }

    pub fn to_json(&self, order: &VertexOrder) -> DiagramJson {
        DiagramJson {
            edges: self
                .edges
                .iter()
                .map(|&e| format!("e:{}-{}", order.id(order.iota(e)), order.id(e.0)))
                .collect(),
            clouds: self
                .clouds
                .iter()
                .map(|&(a, value)| CloudJson {
                    anchor_vertex: format!("v:{}", order.id(a)),
                    value,
                })
                .collect(),
        }
    }

    /// Parses the output of [`CloudDiagram::to_json`]. Every cloud of the
    /// edge set must be listed and the total must come to `n` points.
    pub fn from_json(order: &VertexOrder, n: usize, json: &DiagramJson) -> Result<CloudDiagram> {
        let bad = |msg: String| Error::InvalidCell(msg);
        let vertex = |id: &str| order.lookup(id).ok_or_else(|| Error::UnknownVertex(id.to_string()));
        let mut edges = Vec::new();
        for item in &json.edges {
            let body = item
                .strip_prefix("e:")
                .ok_or_else(|| bad(format!("expected `e:` in `{item}`")))?;
            let (a, b) = split_edge(order, body).ok_or_else(|| bad(format!("cannot read edge `{item}`")))?;
            let e = order
                .edge_between(a, b)
                .ok_or_else(|| bad(format!("`{item}` is not an edge")))?;
            edges.push(e);
        }
        edges.sort_unstable();
        let mut clouds = Vec::new();
        for c in &json.clouds {
            let id = c
                .anchor_vertex
                .strip_prefix("v:")
                .ok_or_else(|| bad(format!("expected `v:` in `{}`", c.anchor_vertex)))?;
            clouds.push((vertex(id)?, c.value));
        }
        clouds.sort_unstable();
        let comps = components(order, &edges);
        let anchors: Vec<usize> = clouds.iter().map(|&(a, _)| a).collect();
        if anchors != comps.anchors {
            return Err(bad("cloud anchors do not match the edge set".into()));
        }
        let total: usize = edges.len() + clouds.iter().map(|&(_, v)| v).sum::<usize>();
        if total != n {
            return Err(bad(format!("diagram holds {total} points, expected {n}")));
        }
        Ok(CloudDiagram {
            n,
            tree_size: order.len(),
            edges,
            clouds,
        })
    }

    /// Compact single-line form, e.g. `[e:u-w | v:*=1 v:a=0]`.
    pub fn label(&self, order: &VertexOrder) -> String {
        let j = self.to_json(order);
        let clouds: Vec<String> = j
            .clouds
            .iter()
            .map(|c| format!("{}={}", c.anchor_vertex, c.value))
            .collect();
        format!("[{} | {}]", j.edges.join(" "), clouds.join(" "))
    }
}

pub fn cloud_diagram(order: &VertexOrder, cell: &Cell) -> CloudDiagram {
    CloudDiagram::of_cell(order, cell)
}

pub fn equivalent(order: &VertexOrder, a: &Cell, b: &Cell) -> bool {
    cloud_diagram(order, a) == cloud_diagram(order, b)
}

/// Whether `lower` is at most `upper` in the class order.
pub fn leq(order: &VertexOrder, lower: &CloudDiagram, upper: &CloudDiagram) -> Result<bool> {
    if lower.n != upper.n || lower.tree_size != upper.tree_size || upper.tree_size != order.len() {
        return Err(Error::MismatchedDiagrams);
    }
    if !lower.edges.iter().all(|e| upper.edges.binary_search(e).is_ok()) {
        return Ok(false);
    }
    Ok(&upper.aggregate(order, &lower.edges)? == lower)
}

/// The 1-cell classes below `c`, one per edge, sorted by smaller endpoint.
pub fn one_cell_factors(order: &VertexOrder, c: &CloudDiagram) -> Result<Vec<CloudDiagram>> {
    if c.edges.is_empty() {
        return Err(Error::ZeroDimensional);
    }
    let mut edges = c.edges.clone();
    edges.sort_by_key(|&e| (order.iota(e), e.0));
    edges.iter().map(|&e| c.aggregate(order, &[e])).collect()
}

/// Least upper bound of a collection of 1-cell classes, `None` when the
/// collection has no upper bound at all.
pub fn lub(order: &VertexOrder, factors: &[CloudDiagram]) -> Result<Option<CloudDiagram>> {
    let Some(first) = factors.first() else {
        return Ok(None);
    };
    let (n, tree_size) = (first.n, first.tree_size);
    if tree_size != order.len() {
        return Err(Error::MismatchedDiagrams);
    }
    for f in factors {
        if f.n != n || f.tree_size != tree_size || f.edges.len() != 1 {
            return Err(Error::MismatchedDiagrams);
        }
    }
    let mut factors = factors.to_vec();
    factors.sort();
    factors.dedup();
    let mut edges: Vec<EdgeId> = factors.iter().map(|f| f.edges[0]).collect();
    let mut used = vec![false; order.len()];
    for &e in &edges {
        for v in [order.iota(e), e.0] {
            if std::mem::replace(&mut used[v], true) {
                return Ok(None);
            }
        }
    }
    edges.sort_unstable();
    if edges.len() > n {
        return Ok(None);
    }

    let fine = components(order, &edges);
    let unknowns = fine.anchors.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for f in &factors {
        let e = f.edges[0];
        let coarse = components(order, &[e]);
        let mut lhs = vec![vec![0i64; unknowns + 1]; coarse.anchors.len()];
        for (c, &a) in fine.anchors.iter().enumerate() {
            lhs[coarse.label[a].expect("finer cloud")][c] += 1;
        }
        for &other in &edges {
            if other != e {
                lhs[coarse.label[other.0].expect("disjoint edges")][unknowns] -= 1;
            }
        }
        for (d, &(anchor, value)) in f.clouds.iter().enumerate() {
            debug_assert_eq!(coarse.anchors[d], anchor);
            let mut row: Vec<BigRational> = lhs[d]
                .iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect();
            row[unknowns] += BigRational::from_integer(BigInt::from(value));
            rows.push(row);
        }
    }
    let total: Vec<BigRational> = std::iter::repeat(BigRational::one())
        .take(unknowns)
        .chain(std::iter::once(BigRational::from_integer(BigInt::from(
            n - edges.len(),
        ))))
        .collect();
    rows.push(total);

    let Some(solution) = solve(rows, unknowns)? else {
        return Ok(None);
    };
    let mut clouds = Vec::with_capacity(unknowns);
    for (c, x) in solution.iter().enumerate() {
        if !x.is_integer() || x.is_negative() {
            return Ok(None);
        }
        let val = x.to_integer().to_usize().expect("bounded by n");
        if val > fine.sizes[c] {
            return Ok(None);
        }
        clouds.push((fine.anchors[c], val));
    }
    Ok(Some(CloudDiagram {
        n,
        tree_size,
        edges,
        clouds,
    }))
}

/// Gauss-Jordan elimination on augmented rows; `None` if inconsistent.
fn solve(mut rows: Vec<Vec<BigRational>>, unknowns: usize) -> Result<Option<Vec<BigRational>>> {
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..unknowns {
        let Some(r) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let p = rows[pivot_row][col].clone();
        for x in rows[pivot_row].iter_mut() {
            *x /= p.clone();
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..=unknowns {
                    let sub = &rows[pivot_row][c] * &f;
                    rows[r][c] -= sub;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|row| !row[unknowns].is_zero()) {
        return Ok(None);
    }
    if pivots.len() < unknowns {
        return Err(Error::AmbiguousUpperBound);
    }
    Ok(Some((0..unknowns).map(|i| rows[i][unknowns].clone()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{classify_cell, critical_cells, enumerate_cells, CellClass, DEFAULT_CELL_CAP};
    use crate::tree::fixtures::*;

    #[test]
    fn zero_cell_has_one_cloud() {
        let o = h().order();
        let c = Cell::new(&o, vec![0, 2, 5], vec![]).unwrap();
        let d = cloud_diagram(&o, &c);
        assert_eq!(d.clouds(), &[(0, 3)]);
    }

    #[test]
    fn y_critical_diagram() {
        let o = y().order();
        let c = critical_cells(&o, 2, 1, DEFAULT_CELL_CAP).unwrap().remove(0);
        let d = cloud_diagram(&o, &c);
        assert_eq!(d.dim(), 1);
        // The far endpoint is a leaf, so only two components survive.
        assert_eq!(d.clouds().len(), 2);
        assert_eq!(d.clouds().iter().map(|c| c.1).sum::<usize>(), 1);
        assert_eq!(d.critical_representative(&o), Some(c));
    }

    #[test]
    fn degree_three_class_has_three_clouds_once_subdivided() {
        let o = y().subdivide_for(3).order();
        let c = critical_cells(&o, 3, 1, DEFAULT_CELL_CAP).unwrap().remove(0);
        let d = cloud_diagram(&o, &c);
        assert_eq!(d.clouds().len(), 3);
        assert_eq!(d.clouds().iter().map(|c| c.1).sum::<usize>(), 2);
    }

    #[test]
    fn moving_across_an_edge_changes_class() {
        let o = y().subdivide_for(3).order();
        let center = o.lookup("c").unwrap();
        let e = EdgeId(o.children(center)[1]);
        let a = Cell::new(&o, vec![0], vec![e]).unwrap();
        let b = Cell::new(&o, vec![o.len() - 1], vec![e]).unwrap();
        assert!(!equivalent(&o, &a, &b));
        assert!(equivalent(&o, &a, &a));
    }

    #[test]
    fn removing_an_edge_gives_a_lower_class() {
        let o = h().subdivide_for(4).order();
        let cells = critical_cells(&o, 4, 2, DEFAULT_CELL_CAP).unwrap();
        let c = cloud_diagram(&o, &cells[0]);
        let factors = one_cell_factors(&o, &c).unwrap();
        assert_eq!(factors.len(), 2);
        assert_ne!(factors[0], factors[1]);
        for f in &factors {
            assert!(leq(&o, f, &c).unwrap());
            assert!(!leq(&o, &c, f).unwrap());
        }
        assert_eq!(lub(&o, &factors).unwrap(), Some(c));
    }

    #[test]
    fn same_edges_different_values_incomparable() {
        let o = y().subdivide_for(3).order();
        let center = o.lookup("c").unwrap();
        let e = EdgeId(o.children(center)[1]);
        let a = cloud_diagram(&o, &Cell::new(&o, vec![0, o.lookup("x").unwrap()], vec![e]).unwrap());
        let b = cloud_diagram(&o, &Cell::new(&o, vec![0, o.len() - 1], vec![e]).unwrap());
        assert_ne!(a, b);
        assert!(!leq(&o, &a, &b).unwrap());
        assert!(!leq(&o, &b, &a).unwrap());
    }

    #[test]
    fn lub_of_overlapping_edges_is_none() {
        let o = y().order();
        let a = cloud_diagram(&o, &Cell::new(&o, vec![0], vec![EdgeId(2)]).unwrap());
        let b = cloud_diagram(&o, &Cell::new(&o, vec![0], vec![EdgeId(3)]).unwrap());
        assert_eq!(lub(&o, &[a, b]).unwrap(), None);
    }

    #[test]
    fn every_class_is_the_lub_of_its_factors() {
        let o = h().subdivide_for(4).order();
        for c in enumerate_cells(&o, 4, &[1, 2], DEFAULT_CELL_CAP).unwrap() {
            let d = cloud_diagram(&o, &c);
            let f = one_cell_factors(&o, &d).unwrap();
            assert_eq!(lub(&o, &f).unwrap(), Some(d.clone()));
            if classify_cell(&o, &c) == CellClass::Critical {
                assert!(d.critical_representative(&o).is_some());
            }
        }
    }
}
