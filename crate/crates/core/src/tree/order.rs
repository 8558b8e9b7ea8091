use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Tree;
use crate::error::{Error, Result};

/// An edge, named by its larger endpoint (every non-base vertex owns the
/// edge to its parent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn tau(self) -> usize {
        self.0
    }
}

/// Depth-first numbering of a tree from its base, children visited in
/// clockwise order starting just after the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    index_of: Vec<usize>,
    number_of: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    child_dir: Vec<usize>,
    depth: Vec<usize>,
    ids: Vec<String>,
}

impl VertexOrder {
    pub fn new(tree: &Tree) -> VertexOrder {
        let nv = tree.vertex_count();
        let mut index_of = Vec::with_capacity(nv);
        let mut number_of = vec![usize::MAX; nv];
        let mut parent = vec![None; nv];
        let mut child_dir = vec![0; nv];
        let mut depth = vec![0; nv];
        // (tree index, parent number, direction at parent)
        let mut stack = vec![(tree.base(), None::<usize>, 0usize)];
        let mut children_idx: Vec<Vec<usize>> = vec![Vec::new(); nv];
        while let Some((v, par, dir)) = stack.pop() {
            let num = index_of.len();
            index_of.push(v);
            number_of[v] = num;
            parent[num] = par;
            child_dir[num] = dir;
            depth[num] = par.map_or(0, |p| depth[p] + 1);
            let rot = tree.rotation(v);
            let d = rot.len();
            let (offset, parent_idx) = match par {
                Some(p) => {
                    let pi = index_of[p];
                    (rot.iter().position(|&w| w == pi).expect("symmetric rotation"), Some(pi))
                }
                None => (d.wrapping_sub(1) % d.max(1), None),
            };
            let mut kids = Vec::new();
            for j in 1..=d {
                let w = rot[(offset + j) % d];
                if Some(w) == parent_idx {
                    continue;
                }
                kids.push(w);
            }
            children_idx[num] = kids.clone();
            for (j, &w) in kids.iter().enumerate().rev() {
                stack.push((w, Some(num), j + 1));
            }
        }
        let children = children_idx
            .iter()
            .map(|list| list.iter().map(|&w| number_of[w]).collect())
            .collect();
        let ids = index_of.iter().map(|&v| tree.id(v).to_string()).collect();
        VertexOrder {
            index_of,
            number_of,
            parent,
            children,
            child_dir,
            depth,
            ids,
        }
    }

    pub fn len(&self) -> usize {
        self.index_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_of.is_empty()
    }

    pub fn number_of(&self, tree_index: usize) -> usize {
        self.number_of[tree_index]
    }

    pub fn tree_index(&self, v: usize) -> usize {
        self.index_of[v]
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Children of `v` in direction order: `children(v)[j - 1]` lies in direction `j`.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Direction of `v` as seen from its parent.
    pub fn direction_from_parent(&self, v: usize) -> usize {
        self.child_dir[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (1..self.len()).map(EdgeId)
    }

    pub fn iota(&self, e: EdgeId) -> usize {
        self.parent[e.0].expect("edge owner has a parent")
    }

    pub fn tau(&self, e: EdgeId) -> usize {
        e.0
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<EdgeId> {
        if self.parent[a] == Some(b) {
            Some(EdgeId(a))
        } else if self.parent[b] == Some(a) {
            Some(EdgeId(b))
        } else {
            None
        }
    }

    /// Direction of `e` at `v`; the edge towards the base has direction 0.
    pub fn direction(&self, v: usize, e: EdgeId) -> Result<usize> {
        if v == 0 {
            return Err(Error::DirectionAtBase);
        }
        if e.0 == 0 || e.0 >= self.len() {
            return Err(Error::NotIncident(v));
        }
        if e.0 == v {
            Ok(0)
        } else if self.parent[e.0] == Some(v) {
            Ok(self.child_dir[e.0])
        } else {
            Err(Error::NotIncident(v))
        }
    }

    /// Edge leaving `v` in direction `dir`, if any.
    pub fn edge_in_direction(&self, v: usize, dir: usize) -> Option<EdgeId> {
        if dir == 0 {
            self.parent[v].map(|_| EdgeId(v))
        } else {
            self.children[v].get(dir - 1).map(|&c| EdgeId(c))
        }
    }

    /// Vertex path from `a` to `b`, both included.
    pub fn vertex_path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while self.depth[x] > self.depth[y] {
            head.push(x);
            x = self.parent[x].unwrap();
        }
        while self.depth[y] > self.depth[x] {
            tail.push(y);
            y = self.parent[y].unwrap();
        }
        while x != y {
            head.push(x);
            tail.push(y);
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
        }
        head.push(x);
        head.extend(tail.into_iter().rev());
        head
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> usize {
        self.vertex_path(a, b).len() - 1
    }

    /// Whether `a` lies on the vertex path from the base to `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        while self.depth[x] > self.depth[a] {
            x = self.parent[x].unwrap();
        }
        x == a
    }

    /// Shortest path between two points, as motions within single closed edges.
    pub fn geodesic(&self, a: &Point, b: &Point) -> Vec<Leg> {
        let a = a.normalized(self);
        let b = b.normalized(self);
        if a == b {
            return Vec::new();
        }
        if let Some(e) = self.common_edge(&a, &b) {
            return vec![Leg {
                edge: e,
                from: a.param_on(self, e),
                to: b.param_on(self, e),
            }];
        }
        let ea = a.closure(self);
        let eb = b.closure(self);
        let mut best = (usize::MAX, 0, 0);
        for &x in &ea {
            for &y in &eb {
                let d = self.vertex_distance(x, y);
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
        let (_, x, y) = best;
        let mut legs = Vec::new();
        if let Point::Edge(e, _) = &a {
            legs.push(Leg {
                edge: *e,
                from: a.param_on(self, *e),
                to: Point::Vertex(x).param_on(self, *e),
            });
        }
        let path = self.vertex_path(x, y);
        for w in path.windows(2) {
            let e = self.edge_between(w[0], w[1]).unwrap();
            legs.push(Leg {
                edge: e,
                from: Point::Vertex(w[0]).param_on(self, e),
                to: Point::Vertex(w[1]).param_on(self, e),
            });
        }
        if let Point::Edge(e, _) = &b {
            legs.push(Leg {
                edge: *e,
                from: Point::Vertex(y).param_on(self, *e),
                to: b.param_on(self, *e),
            });
        }
        legs
    }

    /// Path-metric distance with unit edge lengths.
    pub fn distance(&self, a: &Point, b: &Point) -> BigRational {
        self.geodesic(a, b)
            .iter()
            .map(|l| (&l.to - &l.from).abs())
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    fn common_edge(&self, a: &Point, b: &Point) -> Option<EdgeId> {
        match (a, b) {
            (Point::Edge(e, _), other) | (other, Point::Edge(e, _)) => {
                if other.closure(self).iter().all(|&v| v == e.0 || v == self.iota(*e)) {
                    Some(*e)
                } else {
                    None
                }
            }
            (Point::Vertex(x), Point::Vertex(y)) => self.edge_between(*x, *y),
        }
    }
}

/// A point of the tree: a vertex, or an interior point of an edge at
/// parameter `t` in (0, 1) measured from the edge's smaller endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Vertex(usize),
    Edge(EdgeId, BigRational),
}

impl Point {
    pub fn normalized(&self, order: &VertexOrder) -> Point {
        match self {
            Point::Edge(e, t) if t.is_zero() => Point::Vertex(order.iota(*e)),
            Point::Edge(e, t) if t.is_one() => Point::Vertex(e.0),
            p => p.clone(),
        }
    }

    pub fn is_valid(&self, order: &VertexOrder) -> bool {
        match self {
            Point::Vertex(v) => *v < order.len(),
            Point::Edge(e, t) => e.0 >= 1 && e.0 < order.len() && t.is_positive() && t < &BigRational::one(),
        }
    }

    /// Vertices in the closure of the carrying cell.
    pub fn closure(&self, order: &VertexOrder) -> Vec<usize> {
        match self {
            Point::Vertex(v) => vec![*v],
            Point::Edge(e, _) => vec![order.iota(*e), e.0],
        }
    }

    /// Parameter of this point along `e`; the point must lie in the closure of `e`.
    pub fn param_on(&self, order: &VertexOrder, e: EdgeId) -> BigRational {
        match self {
            Point::Edge(f, t) => {
                debug_assert_eq!(*f, e);
                t.clone()
            }
            Point::Vertex(v) if *v == e.0 => BigRational::one(),
            Point::Vertex(v) => {
                debug_assert_eq!(*v, order.iota(e));
                BigRational::zero()
            }
        }
    }

    pub fn on_edge(order: &VertexOrder, e: EdgeId, t: BigRational) -> Point {
        Point::Edge(e, t).normalized(order)
    }
}

/// Straight motion inside one closed edge, parameters measured from its smaller endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub edge: EdgeId,
    pub from: BigRational,
    pub to: BigRational,
}

impl Leg {
    pub fn start(&self, order: &VertexOrder) -> Point {
        Point::on_edge(order, self.edge, self.from.clone())
    }

    pub fn end(&self, order: &VertexOrder) -> Point {
        Point::on_edge(order, self.edge, self.to.clone())
    }

    pub fn length(&self) -> BigRational {
        (&self.to - &self.from).abs()
    }
}
