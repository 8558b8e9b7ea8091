//! Planar trees with a designated degree-1 basepoint.
//!
//! A [`Tree`] keeps the caller's string ids and the clockwise rotation of
//! neighbours at every vertex. Everything downstream works with the
//! depth-first numbering produced by [`Tree::order`].

mod order;
mod subdivide;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use order::{EdgeId, Leg, Point, VertexOrder};

/// On-disk tree description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TreeFile {
    pub vertices: Vec<String>,
    pub base: String,
    pub rotation: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    rotation: Vec<Vec<usize>>,
    base: usize,
}

impl Tree {
    pub fn parse_json(text: &str) -> Result<Tree> {
        let file: TreeFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Tree::from_file(&file)
    }

    pub fn from_file(file: &TreeFile) -> Result<Tree> {
        let mut index = HashMap::new();
        for (i, id) in file.vertices.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Malformed(format!("duplicate vertex id `{id}`")));
            }
        }
        for key in file.rotation.keys() {
            if !index.contains_key(key) {
                return Err(Error::UnknownVertex(key.clone()));
            }
        }
        let base = *index
            .get(&file.base)
            .ok_or_else(|| Error::UnknownVertex(file.base.clone()))?;
        let mut rotation = vec![Vec::new(); file.vertices.len()];
        for (i, id) in file.vertices.iter().enumerate() {
            let Some(list) = file.rotation.get(id) else {
                continue;
            };
            for nb in list {
                let j = *index.get(nb).ok_or_else(|| Error::UnknownVertex(nb.clone()))?;
                rotation[i].push(j);
            }
        }
        Tree::from_parts(file.vertices.clone(), rotation, base)
    }

    /// Builds a tree from ids, clockwise neighbour lists (by index) and a base index.
    pub fn from_parts(ids: Vec<String>, rotation: Vec<Vec<usize>>, base: usize) -> Result<Tree> {
        let nv = ids.len();
        if nv == 0 {
            return Err(Error::Malformed("no vertices".into()));
        }
        if rotation.len() != nv || base >= nv {
            return Err(Error::Malformed("rotation table does not match vertices".into()));
        }
        let index: HashMap<String, usize> = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        if index.len() != nv {
            return Err(Error::Malformed("duplicate vertex ids".into()));
        }

        let mut edge_count = 0usize;
        for (v, list) in rotation.iter().enumerate() {
            let mut seen = HashSet::new();
            for &w in list {
                if w >= nv {
                    return Err(Error::Malformed(format!("neighbour index {w} out of range")));
                }
                if w == v {
                    return Err(Error::InconsistentRotation(format!("loop at `{}`", ids[v])));
                }
                if !seen.insert(w) {
                    return Err(Error::InconsistentRotation(format!(
                        "`{}` lists `{}` twice",
                        ids[v], ids[w]
                    )));
                }
                if !rotation[w].contains(&v) {
                    return Err(Error::InconsistentRotation(format!(
                        "`{}` lists `{}` but not conversely",
                        ids[v], ids[w]
                    )));
                }
            }
            edge_count += list.len();
        }
        edge_count /= 2;

        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([base]);
        seen[base] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &rotation[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != nv {
            return Err(Error::Disconnected);
        }
        if edge_count != nv - 1 {
            return Err(Error::Cycle);
        }
        if rotation[base].len() != 1 {
            return Err(Error::BadBase {
                id: ids[base].clone(),
                degree: rotation[base].len(),
            });
        }
        Ok(Tree {
            ids,
            index,
            rotation,
            base,
        })
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            vertices: self.ids.clone(),
            base: self.ids[self.base].clone(),
            rotation: self
                .rotation
                .iter()
                .enumerate()
                .map(|(v, list)| (self.ids[v].clone(), list.iter().map(|&w| self.ids[w].clone()).collect()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("tree serializes")
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.ids.len() - 1
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    /// Clockwise neighbour list of `v`.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn is_essential(&self, v: usize) -> bool {
        self.degree(v) >= 3
    }

    /// Unordered edges as index pairs, each listed once with the smaller index first.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (v, list) in self.rotation.iter().enumerate() {
            for &w in list {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// Maximal paths whose interior vertices all have degree 2, as vertex index
    /// sequences. Every edge lies on exactly one chain.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let mut visited: HashSet<(usize, usize)> = HashSet::new();
        let mut chains = Vec::new();
        for start in 0..self.vertex_count() {
            if self.degree(start) == 2 {
                continue;
            }
            for &first in &self.rotation[start] {
                if visited.contains(&(start, first)) {
                    continue;
                }
                let mut chain = vec![start];
                let (mut prev, mut cur) = (start, first);
                loop {
                    visited.insert((prev, cur));
                    visited.insert((cur, prev));
                    chain.push(cur);
                    if self.degree(cur) != 2 {
                        break;
                    }
                    let next = self.rotation[cur]
                        .iter()
                        .copied()
                        .find(|&w| w != prev)
                        .expect("degree-2 vertex has two neighbours");
                    prev = cur;
                    cur = next;
                }
                chains.push(chain);
            }
        }
        chains
    }

    /// Whether every path between distinct vertices of degree other than 2
    /// has at least `n - 1` edges and the tree has at least `n` vertices.
    pub fn is_sufficiently_subdivided(&self, n: usize) -> bool {
        self.vertex_count() >= n && self.chains().iter().all(|c| c.len() > n.saturating_sub(1))
    }

    pub fn order(&self) -> VertexOrder {
        VertexOrder::new(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Number of essential vertices.
    pub m: usize,
    /// Vertices of degree greater than 3.
    pub r: usize,
    /// Vertices of degree exactly 3.
    pub s: usize,
    /// Essential vertices by number, ascending.
    pub essential: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connectivity {
    pub unordered_connected: bool,
    pub ordered_connected: bool,
}

impl TreeStats {
    pub fn compute(order: &VertexOrder) -> TreeStats {
        let essential: Vec<usize> = (0..order.len()).filter(|&v| order.degree(v) >= 3).collect();
        let r = essential.iter().filter(|&&v| order.degree(v) > 3).count();
        TreeStats {
            m: essential.len(),
            r,
            s: essential.len() - r,
            essential,
        }
    }

    /// Path-connectivity of the unordered and ordered configuration spaces of
    /// `n` points. The unordered space of a tree is always connected; the
    /// ordered one is disconnected exactly when the tree is an interval and
    /// `n >= 2`.
    pub fn connectivity(&self, n: usize) -> Connectivity {
        Connectivity {
            unordered_connected: true,
            ordered_connected: n <= 1 || self.m >= 1,
        }
    }
}

/// Statistics plus connectivity of the configuration spaces for `n` points.
pub fn stats(tree: &Tree, n: usize) -> (TreeStats, Connectivity) {
    let st = TreeStats::compute(&tree.order());
    let conn = st.connectivity(n);
    (st, conn)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Builds a tree from `(vertex, clockwise neighbours)` pairs; the first
    /// listed vertex must be the base.
    pub fn tree(spec: &[(&str, &[&str])]) -> Tree {
        let file = TreeFile {
            vertices: spec.iter().map(|(v, _)| v.to_string()).collect(),
            base: spec[0].0.to_string(),
            rotation: spec
                .iter()
                .map(|(v, nb)| (v.to_string(), nb.iter().map(|s| s.to_string()).collect()))
                .collect(),
        };
        Tree::from_file(&file).unwrap()
    }

    pub fn path3() -> Tree {
        tree(&[("*", &["a"]), ("a", &["*", "b"]), ("b", &["a"])])
    }

    pub fn edge() -> Tree {
        tree(&[("*", &["a"]), ("a", &["*"])])
    }

    pub fn y() -> Tree {
        tree(&[("*", &["c"]), ("c", &["*", "x", "y"]), ("x", &["c"]), ("y", &["c"])])
    }

    pub fn h() -> Tree {
        tree(&[
            ("*", &["u"]),
            ("u", &["*", "a", "w"]),
            ("a", &["u"]),
            ("w", &["u", "b", "c"]),
            ("b", &["w"]),
            ("c", &["w"]),
        ])
    }
}
