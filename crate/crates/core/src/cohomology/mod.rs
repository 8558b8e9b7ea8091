//! Rational cohomology ring through critical cocycles.
//!
//! Basis elements are named by the cloud diagram of their class. Products
//! split both sides into 1-cell factors and look up the least upper bound,
//! so nothing has to be enumerated to multiply.

mod flow;
mod homology;
mod search;
mod smith;
mod tensor;

use std::cell::{OnceCell, RefCell};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::clouds::{lub, one_cell_factors, CloudDiagram};
use crate::complex::{critical_cells, reduced_complex_dim, Cell, DEFAULT_CELL_CAP};
use crate::error::{Error, Result};
use crate::tree::VertexOrder;

pub use flow::{cup_on_cell, orientation_sign, stable_flow, Chain, CriticalDual, FLOW_STEP_LIMIT};
pub use homology::{boundary_matrix, homology_oracle, SparseMatrix};
pub use search::{search_disjoint_critical_pair, zdcl_lower_bound, CriticalPair};
pub use smith::{rank_dense, smith_diagonal};
pub use tensor::TensorElement;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisClass {
    pub diagram: CloudDiagram,
    pub cell: Cell,
}

impl BasisClass {
    pub fn degree(&self) -> usize {
        self.diagram.dim()
    }
}

/// Basis of the cohomology, one class per critical cell, by degree.
pub fn basis(order: &VertexOrder, n: usize, cap: usize) -> Result<Vec<BasisClass>> {
    let m = (0..order.len()).filter(|&v| order.degree(v) >= 3).count();
    let mut out = Vec::new();
    for k in 0..=(n / 2).min(m) {
        for cell in critical_cells(order, n, k, cap)? {
            out.push(BasisClass {
                diagram: CloudDiagram::of_cell(order, &cell),
                cell,
            });
        }
    }
    Ok(out)
}

/// Finite rational combination of basis classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cochain {
    terms: BTreeMap<CloudDiagram, BigRational>,
}

impl Cochain {
    pub fn zero() -> Cochain {
        Cochain::default()
    }

    pub fn basis(d: CloudDiagram) -> Cochain {
        Cochain::term(d, BigRational::one())
    }

    pub fn term(d: CloudDiagram, coef: BigRational) -> Cochain {
        let mut c = Cochain::zero();
        c.add(d, coef);
        c
    }

    pub fn add(&mut self, d: CloudDiagram, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(d) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_all(&mut self, other: &Cochain, scale: &BigRational) {
        for (d, c) in &other.terms {
            self.add(d.clone(), c * scale);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CloudDiagram, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, d: &CloudDiagram) -> BigRational {
        self.terms.get(d).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Signed sum of diagram labels.
    pub fn display<'a>(&'a self, order: &'a VertexOrder) -> impl fmt::Display + 'a {
        DisplayCochain { c: self, order }
    }
}

struct DisplayCochain<'a> {
    c: &'a Cochain,
    order: &'a VertexOrder,
}

impl fmt::Display for DisplayCochain<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_zero() {
            return f.write_str("0");
        }
        for (i, (d, coef)) in self.c.terms.iter().enumerate() {
            let sign = if coef.is_negative() {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            if i > 0 {
                f.write_str(" ")?;
            }
            let mag = coef.abs();
            if mag.is_one() {
                write!(f, "{sign}{}", d.label(self.order))?;
            } else {
                write!(f, "{sign}{mag}*{}", d.label(self.order))?;
            }
        }
        Ok(())
    }
}

/// Multiplication context for one tree and point count.
#[derive(Debug, Clone)]
pub struct Ring<'a> {
    order: &'a VertexOrder,
    n: usize,
    unit: CloudDiagram,
    top: OnceCell<usize>,
    duals: RefCell<BTreeMap<usize, Rc<CriticalDual>>>,
}

impl<'a> Ring<'a> {
    pub fn new(order: &'a VertexOrder, n: usize) -> Ring<'a> {
        let first: Vec<usize> = (0..n.min(order.len())).collect();
        let cell = Cell::new(order, first, Vec::new()).expect("distinct vertices form a cell");
        Ring {
            order,
            n,
            unit: CloudDiagram::of_cell(order, &cell),
            top: OnceCell::new(),
            duals: RefCell::new(BTreeMap::new()),
        }
    }

    /// Same ring, told the largest degree with nonzero cohomology.
    pub fn with_top_degree(order: &'a VertexOrder, n: usize, top: usize) -> Ring<'a> {
        let ring = Ring::new(order, n);
        ring.top.set(top).expect("fresh cell");
        ring
    }

    /// Largest degree with nonzero cohomology.
    pub fn top_degree(&self) -> Result<usize> {
        if let Some(&t) = self.top.get() {
            return Ok(t);
        }
        let t = reduced_complex_dim(self.order, self.n, DEFAULT_CELL_CAP)?;
        Ok(*self.top.get_or_init(|| t))
    }

    pub fn order(&self) -> &VertexOrder {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The degree-0 class.
    pub fn unit(&self) -> &CloudDiagram {
        &self.unit
    }

    /// Product of two basis classes.
    pub fn multiply_basis(&self, a: &CloudDiagram, b: &CloudDiagram) -> Result<Cochain> {
        if a.n() != self.n || b.n() != self.n {
            return Err(Error::MismatchedDiagrams);
        }
        if a.dim() == 0 {
            return Ok(Cochain::basis(b.clone()));
        }
        if b.dim() == 0 {
            return Ok(Cochain::basis(a.clone()));
        }
        let mut factors = one_cell_factors(self.order, a)?;
        factors.extend(one_cell_factors(self.order, b)?);
        self.product_of_factors(&factors)
    }

    /// Product of 1-cell classes taken in the given order.
    pub fn product_of_factors(&self, factors: &[CloudDiagram]) -> Result<Cochain> {
        if factors.is_empty() {
            return Ok(Cochain::basis(self.unit.clone()));
        }
        if factors.iter().any(|f| f.dim() != 1) {
            return Err(Error::MismatchedDiagrams);
        }
        let keys: Vec<(usize, usize)> = factors
            .iter()
            .map(|f| (self.order.iota(f.edges()[0]), f.edges()[0].0))
            .collect();
        let mut inversions = 0usize;
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                if keys[i] == keys[j] {
                    // A repeated factor squares to zero; two factors on one edge have no upper bound.
                    return Ok(Cochain::zero());
                }
                if keys[i] > keys[j] {
                    inversions += 1;
                }
            }
        }
        let Some(top) = lub(self.order, factors)? else {
            return Ok(Cochain::zero());
        };
        if top.critical_representative(self.order).is_none() {
            if top.dim() > self.top_degree()? {
                return Ok(Cochain::zero());
            }
            return self.product_through_flow(factors);
        }
        let sign = if inversions % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        Ok(Cochain::term(top, sign))
    }

    /// Product of 1-cell classes computed on cochains: the cubical cup of
    /// the factors, read off on the stable flows of the critical cells.
    pub fn product_through_flow(&self, factors: &[CloudDiagram]) -> Result<Cochain> {
        let dual = self.critical_dual(factors.len())?;
        let mut out = Cochain::zero();
        for (class, coef) in dual.expand(|cell| cup_on_cell(self.order, factors, cell)) {
            let sign = BigRational::from_integer(orientation_sign(self.order, &class).into());
            out.add(class, coef * sign);
        }
        Ok(out)
    }

    fn critical_dual(&self, k: usize) -> Result<Rc<CriticalDual>> {
        if let Some(d) = self.duals.borrow().get(&k) {
            return Ok(d.clone());
        }
        let dual = Rc::new(CriticalDual::new(self.order, self.n, k, DEFAULT_CELL_CAP)?);
        self.duals.borrow_mut().insert(k, dual.clone());
        Ok(dual)
    }

    /// Product of the zero-divisors of the given 1-cell classes, expanded
    /// term by term. Only splits whose two sides both stay within the top
    /// degree can survive, so the rest are skipped without multiplying.
    pub fn zero_divisor_product(&self, factors: &[CloudDiagram]) -> Result<TensorElement> {
        let count = factors.len();
        if factors.iter().any(|f| f.dim() != 1) {
            return Err(Error::MismatchedDiagrams);
        }
        if count >= usize::BITS as usize - 1 {
            return Err(Error::SearchBudgetExceeded {
                budget: usize::BITS as usize - 2,
            });
        }
        let top = self.top_degree()?;
        let mut out = TensorElement::zero();
        for mask in 0usize..(1 << count) {
            let left_count = mask.count_ones() as usize;
            if left_count > top || count - left_count > top {
                continue;
            }
            // Bit set: the factor goes to the left as f (x) 1; clear: -(1 (x) f) on the right.
            let mut negative = (count - left_count) % 2 == 1;
            let mut right_so_far = 0;
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if right_so_far % 2 == 1 {
                        negative = !negative;
                    }
                    left.push(f.clone());
                } else {
                    right_so_far += 1;
                    right.push(f.clone());
                }
            }
            let l = self.product_of_factors(&left)?;
            if l.is_zero() {
                continue;
            }
            let r = self.product_of_factors(&right)?;
            let sign = if negative {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            for (a, ca) in l.terms() {
                for (b, cb) in r.terms() {
                    out.add(a.clone(), b.clone(), &sign * ca * cb);
                }
            }
        }
        Ok(out)
    }

    pub fn multiply(&self, x: &Cochain, y: &Cochain) -> Result<Cochain> {
        let mut out = Cochain::zero();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                let p = self.multiply_basis(a, b)?;
                out.add_all(&p, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn tensor_multiply(&self, x: &TensorElement, y: &TensorElement) -> Result<TensorElement> {
        let mut out = TensorElement::zero();
        for ((a, b), c1) in x.terms() {
            for ((a2, b2), c2) in y.terms() {
                let left = self.multiply_basis(a, a2)?;
                if left.is_zero() {
                    continue;
                }
                let right = self.multiply_basis(b, b2)?;
                if right.is_zero() {
                    continue;
                }
                let mut coef = c1 * c2;
                if (a2.dim() * b.dim()) % 2 == 1 {
                    coef = -coef;
                }
                for (l, cl) in left.terms() {
                    for (r, cr) in right.terms() {
                        out.add(l.clone(), r.clone(), &coef * cl * cr);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn zero_divisor(&self, a: &CloudDiagram) -> Result<TensorElement> {
        if a.dim() == 0 {
            return Err(Error::ZeroDimensional);
        }
        let mut t = TensorElement::zero();
        t.add(a.clone(), self.unit.clone(), BigRational::one());
        t.add(self.unit.clone(), a.clone(), -BigRational::one());
        Ok(t)
    }

    /// Image under the cup product map.
    pub fn cup(&self, x: &TensorElement) -> Result<Cochain> {
        let mut out = Cochain::zero();
        for ((a, b), c) in x.terms() {
            out.add_all(&self.multiply_basis(a, b)?, c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::DEFAULT_CELL_CAP;
    use crate::tree::fixtures::*;

    fn degrees(b: &[BasisClass]) -> Vec<usize> {
        let mut counts = vec![0; 4];
        for c in b {
            counts[c.degree()] += 1;
        }
        counts
    }

    #[test]
    fn basis_examples() {
        assert_eq!(
            degrees(&basis(&path3().order(), 2, DEFAULT_CELL_CAP).unwrap()),
            [1, 0, 0, 0]
        );
        assert_eq!(
            degrees(&basis(&y().order(), 2, DEFAULT_CELL_CAP).unwrap()),
            [1, 1, 0, 0]
        );
        assert_eq!(
            degrees(&basis(&h().order(), 2, DEFAULT_CELL_CAP).unwrap()),
            [1, 2, 0, 0]
        );
    }

    #[test]
    fn critical_cells_have_distinct_classes() {
        let o = h().subdivide_for(4).order();
        let b = basis(&o, 4, DEFAULT_CELL_CAP).unwrap();
        let mut ds: Vec<_> = b.iter().map(|c| c.diagram.clone()).collect();
        ds.sort();
        ds.dedup();
        assert_eq!(ds.len(), b.len());
    }

    #[test]
    fn squares_vanish() {
        let o = h().subdivide_for(4).order();
        let ring = Ring::new(&o, 4);
        for c in basis(&o, 4, DEFAULT_CELL_CAP).unwrap() {
            if c.degree() % 2 == 1 {
                assert!(ring.multiply_basis(&c.diagram, &c.diagram).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn factors_multiply_to_top_class() {
        let o = h().subdivide_for(4).order();
        let ring = Ring::new(&o, 4);
        for c in basis(&o, 4, DEFAULT_CELL_CAP).unwrap() {
            if c.degree() == 2 {
                let f = one_cell_factors(&o, &c.diagram).unwrap();
                let p = ring.multiply_basis(&f[0], &f[1]).unwrap();
                assert_eq!(p, Cochain::basis(c.diagram.clone()));
                let q = ring.multiply_basis(&f[1], &f[0]).unwrap();
                assert_eq!(q, Cochain::term(c.diagram.clone(), -BigRational::one()));
            }
        }
    }

    #[test]
    fn same_vertex_classes_multiply_to_zero() {
        let o = tree(&[
            ("*", &["c"]),
            ("c", &["*", "x", "y", "z"]),
            ("x", &["c"]),
            ("y", &["c"]),
            ("z", &["c"]),
        ])
        .subdivide_for(4)
        .order();
        let ring = Ring::new(&o, 4);
        let ones: Vec<_> = basis(&o, 4, DEFAULT_CELL_CAP)
            .unwrap()
            .into_iter()
            .filter(|c| c.degree() == 1)
            .collect();
        assert!(ones.len() >= 2);
        for a in &ones {
            for b in &ones {
                assert!(ring.multiply_basis(&a.diagram, &b.diagram).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn unit_is_neutral() {
        let o = y().order();
        let ring = Ring::new(&o, 2);
        let b = basis(&o, 2, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(b[0].diagram, *ring.unit());
        let g = &b[1].diagram;
        assert_eq!(ring.multiply_basis(ring.unit(), g).unwrap(), Cochain::basis(g.clone()));
    }

    fn one(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn tensor_sign_rule() {
        let o = h().order();
        let ring = Ring::new(&o, 2);
        let b = basis(&o, 2, DEFAULT_CELL_CAP).unwrap();
        let (g, d) = (&b[1].diagram, &b[2].diagram);
        let u = ring.unit().clone();
        let gl = TensorElement::term(g.clone(), u.clone(), one(1));
        let gr = TensorElement::term(u.clone(), g.clone(), one(1));
        assert_eq!(
            ring.tensor_multiply(&gl, &gr).unwrap(),
            TensorElement::term(g.clone(), g.clone(), one(1))
        );
        assert_eq!(
            ring.tensor_multiply(&gr, &gl).unwrap(),
            TensorElement::term(g.clone(), g.clone(), one(-1))
        );
        let zg = ring.zero_divisor(g).unwrap();
        let zd = ring.zero_divisor(d).unwrap();
        assert!(ring.tensor_multiply(&zg, &zg).unwrap().is_zero());
        assert!(ring.cup(&zg).unwrap().is_zero());
        let prod = ring.tensor_multiply(&zg, &zd).unwrap();
        assert_eq!(prod.coefficient(g, d), one(-1));
        assert_eq!(prod.coefficient(d, g), one(1));
        assert_eq!(prod, ring.zero_divisor_product(&[g.clone(), d.clone()]).unwrap());
        assert_eq!(ring.zero_divisor(&u), Err(Error::ZeroDimensional));
    }

    #[test]
    fn expanded_product_matches_iterated_multiplication() {
        let o = h().subdivide_for(4).order();
        let ring = Ring::new(&o, 4);
        let b = basis(&o, 4, DEFAULT_CELL_CAP).unwrap();
        let ones: Vec<CloudDiagram> = b
            .iter()
            .filter(|c| c.degree() == 1)
            .map(|c| c.diagram.clone())
            .collect();
        for i in 0..ones.len().min(4) {
            for j in 0..ones.len().min(4) {
                let pick = [ones[i].clone(), ones[j].clone(), ones[(i + j) % ones.len()].clone()];
                let mut acc = TensorElement::term(ring.unit().clone(), ring.unit().clone(), one(1));
                for f in &pick {
                    acc = ring.tensor_multiply(&acc, &ring.zero_divisor(f).unwrap()).unwrap();
                }
                assert_eq!(acc, ring.zero_divisor_product(&pick).unwrap());
            }
        }
    }
}
