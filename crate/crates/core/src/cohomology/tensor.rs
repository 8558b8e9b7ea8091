use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::clouds::CloudDiagram;

/// Element of the tensor square of the cohomology ring. Scalar parts are
/// carried by the degree-0 class on either side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TensorElement {
    terms: BTreeMap<(CloudDiagram, CloudDiagram), BigRational>,
}

impl TensorElement {
    pub fn zero() -> TensorElement {
        TensorElement::default()
    }

    pub fn term(a: CloudDiagram, b: CloudDiagram, coef: BigRational) -> TensorElement {
        let mut t = TensorElement::zero();
        t.add(a, b, coef);
        t
    }

    pub fn add(&mut self, a: CloudDiagram, b: CloudDiagram, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
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

    pub fn add_all(&mut self, other: &TensorElement, scale: &BigRational) {
        for ((a, b), c) in &other.terms {
            self.add(a.clone(), b.clone(), c * scale);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(CloudDiagram, CloudDiagram), &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, a: &CloudDiagram, b: &CloudDiagram) -> BigRational {
        self.terms
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }
}
