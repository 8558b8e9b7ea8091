//! Gradient flow of the discrete vector field on cellular chains, and the
//! coordinates of an arbitrary cocycle in the critical basis.
//!
//! The flow of a critical cell is a chain that the flow no longer moves.
//! Since the Morse differential of a tree vanishes, a cocycle's class is
//! fixed by its values on these chains.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::clouds::CloudDiagram;
use crate::complex::{cell_boundary, critical_cells, gradient_partner, Cell};
use crate::error::{Error, Result};
use crate::tree::VertexOrder;

pub type Chain = BTreeMap<Cell, i64>;

pub const FLOW_STEP_LIMIT: usize = 100_000;

fn add(chain: &mut Chain, cell: Cell, coef: i64) -> Result<()> {
    match chain.entry(cell) {
        std::collections::btree_map::Entry::Vacant(v) => {
            if coef != 0 {
                v.insert(coef);
            }
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().checked_add(coef).ok_or(Error::CoefficientOverflow)?;
            if sum == 0 {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
    Ok(())
}

/// One step `x + dV(x) + V(dx)` of the flow.
fn flow_step(order: &VertexOrder, chain: &Chain) -> Result<Chain> {
    let mut out = chain.clone();
    for (cell, &a) in chain {
        if let Some((up, s)) = gradient_partner(order, cell) {
            for (face, f) in cell_boundary(order, &up) {
                add(&mut out, face, -a * s * f)?;
            }
        }
        for (face, f) in cell_boundary(order, cell) {
            if let Some((up, s)) = gradient_partner(order, &face) {
                add(&mut out, up, -a * f * s)?;
            }
        }
    }
    Ok(out)
}

/// The flow applied until it stops changing the chain.
pub fn stable_flow(order: &VertexOrder, cell: &Cell) -> Result<Chain> {
    let mut chain: Chain = BTreeMap::from([(cell.clone(), 1)]);
    for _ in 0..FLOW_STEP_LIMIT {
        let next = flow_step(order, &chain)?;
        if next == chain {
            return Ok(chain);
        }
        chain = next;
    }
    Err(Error::FlowDidNotSettle { steps: FLOW_STEP_LIMIT })
}

/// Critical cells of one degree with their stable flows, and the inverse of
/// the matrix pairing critical cocycles with those flows.
#[derive(Debug, Clone)]
pub struct CriticalDual {
    classes: Vec<CloudDiagram>,
    flows: Vec<Chain>,
    inverse: Vec<Vec<BigRational>>,
}

impl CriticalDual {
    pub fn new(order: &VertexOrder, n: usize, k: usize, cap: usize) -> Result<CriticalDual> {
        let cells = critical_cells(order, n, k, cap)?;
        let classes: Vec<CloudDiagram> = cells.iter().map(|c| CloudDiagram::of_cell(order, c)).collect();
        let flows = cells
            .iter()
            .map(|c| stable_flow(order, c))
            .collect::<Result<Vec<_>>>()?;
        let index: BTreeMap<&CloudDiagram, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let size = cells.len();
        // pairing[j][i]: critical cocycle i evaluated on flow j.
        let mut pairing = vec![vec![BigRational::zero(); size]; size];
        for (j, flow) in flows.iter().enumerate() {
            for (cell, &a) in flow {
                if let Some(&i) = index.get(&CloudDiagram::of_cell(order, cell)) {
                    pairing[j][i] += BigRational::from_integer(BigInt::from(a));
                }
            }
        }
        let inverse = invert(pairing).ok_or(Error::SingularPairing(k))?;
        Ok(CriticalDual {
            classes,
            flows,
            inverse,
        })
    }

    pub fn classes(&self) -> &[CloudDiagram] {
        &self.classes
    }

    /// Coordinates in the critical basis of the class of the cocycle with
    /// the given values on `k`-cells. Zero coordinates are dropped.
    pub fn expand(&self, value: impl Fn(&Cell) -> i64) -> Vec<(CloudDiagram, BigRational)> {
        let on_flows: Vec<BigRational> = self
            .flows
            .iter()
            .map(|flow| {
                let total: i64 = flow.iter().map(|(cell, &a)| a * value(cell)).sum();
                BigRational::from_integer(BigInt::from(total))
            })
            .collect();
        let mut out = Vec::new();
        for (i, class) in self.classes.iter().enumerate() {
            let coef = (0..on_flows.len()).fold(BigRational::zero(), |acc, j| acc + &on_flows[j] * &self.inverse[j][i]);
            if !coef.is_zero() {
                out.push((class.clone(), coef));
            }
        }
        out
    }
}

/// Inverse of a square rational matrix by Gauss-Jordan elimination.
fn invert(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let size = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..size {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..size {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..size {
                    let (x, y) = (&a[col][j] * &f, &inv[col][j] * &f);
                    a[r][j] -= x;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Some(inv)
}

/// Cup product of the 1-cell cocycles of `factors`, in order, evaluated on
/// `cell`. Uses the cubical diagonal: factor `j` sees its own edge, earlier
/// factors' edges collapsed to their top ends and later ones to their
/// bottom ends.
pub fn cup_on_cell(order: &VertexOrder, factors: &[CloudDiagram], cell: &Cell) -> i64 {
    let edges = cell.edges();
    if edges.len() != factors.len() {
        return 0;
    }
    let mut slot = Vec::with_capacity(factors.len());
    for f in factors {
        match f.edges() {
            [e] => match edges.binary_search(e) {
                Ok(i) => slot.push(i),
                Err(_) => return 0,
            },
            _ => return 0,
        }
    }
    let mut inversions = 0;
    for i in 0..slot.len() {
        for j in i + 1..slot.len() {
            if slot[i] == slot[j] {
                return 0;
            }
            if slot[i] > slot[j] {
                inversions += 1;
            }
        }
    }
    for (j, f) in factors.iter().enumerate() {
        let mut verts = cell.vertices().to_vec();
        for (i, &s) in slot.iter().enumerate() {
            if i < j {
                verts.push(edges[s].0);
            } else if i > j {
                verts.push(order.iota(edges[s]));
            }
        }
        let face = Cell::new(order, verts, vec![edges[slot[j]]]).expect("faces of cells are cells");
        if &CloudDiagram::of_cell(order, &face) != f {
            return 0;
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign taking the edges of a class from increasing bottom end (ties by top
/// end) to increasing top end: the orientation change between the basis
/// of the ring and the cubes of the chain complex.
pub fn orientation_sign(order: &VertexOrder, class: &CloudDiagram) -> i64 {
    let edges = class.edges();
    let mut inversions = 0;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = (edges[i], edges[j]);
            if (order.iota(a), a.0) > (order.iota(b), b.0) {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::Ring;
    use crate::complex::{classify_cell, enumerate_cells, CellClass, DEFAULT_CELL_CAP};
    use crate::tree::fixtures::*;
    use std::collections::BTreeSet;

    fn instances() -> Vec<(VertexOrder, usize)> {
        vec![
            (y().subdivide_for(3).order(), 3),
            (h().subdivide_for(3).order(), 3),
            (h().subdivide_for(4).order(), 4),
        ]
    }

    #[test]
    fn matching_pairs_redundant_with_collapsible() {
        for (order, n) in instances() {
            let dims: Vec<usize> = (0..=n).collect();
            let cells = enumerate_cells(&order, n, &dims, DEFAULT_CELL_CAP).unwrap();
            let mut hit = BTreeSet::new();
            for c in &cells {
                match (classify_cell(&order, c), gradient_partner(&order, c)) {
                    (CellClass::Redundant, Some((up, s))) => {
                        assert_eq!(classify_cell(&order, &up), CellClass::Collapsible);
                        let incidence: i64 = cell_boundary(&order, &up)
                            .iter()
                            .filter(|(f, _)| f == c)
                            .map(|x| x.1)
                            .sum();
                        assert_eq!(incidence, s);
                        assert!(hit.insert(up));
                    }
                    (CellClass::Redundant, None) => panic!("redundant cell without partner"),
                    (_, p) => assert!(p.is_none()),
                }
            }
            let collapsible = cells
                .iter()
                .filter(|c| classify_cell(&order, c) == CellClass::Collapsible)
                .count();
            assert_eq!(hit.len(), collapsible);
        }
    }

    #[test]
    fn flows_settle_and_pair_to_identity() {
        for (order, n) in instances() {
            for k in 1..=n / 2 {
                let cells = critical_cells(&order, n, k, DEFAULT_CELL_CAP).unwrap();
                let dual = CriticalDual::new(&order, n, k, DEFAULT_CELL_CAP).unwrap();
                for (i, c) in cells.iter().enumerate() {
                    let flow = stable_flow(&order, c).unwrap();
                    assert_eq!(flow.get(c), Some(&1));
                    for (cell, _) in &flow {
                        assert_ne!(classify_cell(&order, cell), CellClass::Redundant);
                    }
                    let class = CloudDiagram::of_cell(&order, c);
                    let expanded = dual.expand(|x| (CloudDiagram::of_cell(&order, x) == class) as i64);
                    assert_eq!(expanded, vec![(dual.classes()[i].clone(), BigRational::one())]);
                }
            }
        }
    }

    fn coboundary_vanishes(order: &VertexOrder, n: usize, k: usize, value: impl Fn(&Cell) -> i64) {
        for c in enumerate_cells(order, n, &[k + 1], DEFAULT_CELL_CAP).unwrap() {
            let total: i64 = cell_boundary(order, &c).iter().map(|(f, s)| s * value(f)).sum();
            assert_eq!(total, 0, "coboundary nonzero on {:?}", c.to_strings(order));
        }
    }

    #[test]
    fn cups_of_one_cocycles_are_cocycles() {
        for (order, n) in instances() {
            let ones: Vec<CloudDiagram> = critical_cells(&order, n, 1, DEFAULT_CELL_CAP)
                .unwrap()
                .iter()
                .map(|c| CloudDiagram::of_cell(&order, c))
                .collect();
            for a in &ones {
                coboundary_vanishes(&order, n, 1, |c| (&CloudDiagram::of_cell(&order, c) == a) as i64);
                if n < 4 {
                    continue;
                }
                for b in &ones {
                    let pair = [a.clone(), b.clone()];
                    coboundary_vanishes(&order, n, 2, |c| cup_on_cell(&order, &pair, c));
                }
            }
        }
    }

    fn star4() -> crate::tree::Tree {
        tree(&[
            ("*", &["c"]),
            ("c", &["*", "a", "b", "d"]),
            ("a", &["c"]),
            ("b", &["c"]),
            ("d", &["c"]),
        ])
    }

    fn caterpillar3() -> crate::tree::Tree {
        tree(&[
            ("*", &["s1"]),
            ("s1", &["*", "l1", "s2"]),
            ("l1", &["s1"]),
            ("s2", &["s1", "l2", "s3"]),
            ("l2", &["s2"]),
            ("s3", &["s2", "l3", "t"]),
            ("l3", &["s3"]),
            ("t", &["s3"]),
        ])
    }

    #[test]
    fn flow_products_agree_with_critical_upper_bounds() {
        let mut checked = 0;
        let mut all = instances();
        all.push((star4().subdivide_for(4).order(), 4));
        all.push((caterpillar3().subdivide_for(4).order(), 4));
        all.push((caterpillar3().subdivide_for(5).order(), 5));
        for (order, n) in all {
            let ring = Ring::new(&order, n);
            let ones: Vec<CloudDiagram> = critical_cells(&order, n, 1, DEFAULT_CELL_CAP)
                .unwrap()
                .iter()
                .map(|c| CloudDiagram::of_cell(&order, c))
                .collect();
            for a in &ones {
                for b in &ones {
                    let pair = [a.clone(), b.clone()];
                    if n < 4 {
                        continue;
                    }
                    assert_eq!(
                        ring.product_through_flow(&pair).unwrap(),
                        ring.product_of_factors(&pair).unwrap(),
                        "{} * {}",
                        a.label(&order),
                        b.label(&order)
                    );
                    checked += !ring.product_of_factors(&pair).unwrap().is_zero() as usize;
                }
            }
        }
        assert!(checked > 0);
    }
}
