//! Oriented arcs, orientation sums at vertices, allowability and the arc
//! searches behind the topological complexity certificates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::complex::next_combination;
use crate::error::{Error, Result};
use crate::tree::{TreeStats, VertexOrder};

/// Default number of candidate collections an arc search may examine.
pub const DEFAULT_ARC_BUDGET: usize = 20_000_000;

/// An oriented geodesic arc. Each endpoint either sits exactly on the first
/// (last) vertex of `path` or strictly inside the first (last) edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedArc {
    path: Vec<usize>,
    start_inside: bool,
    end_inside: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcJson {
    pub path: Vec<String>,
    pub start_inside: bool,
    pub end_inside: bool,
}

impl OrientedArc {
    pub fn new(order: &VertexOrder, path: Vec<usize>, start_inside: bool, end_inside: bool) -> Result<OrientedArc> {
        if path.len() < 2 {
            return Err(Error::InvalidArc("an arc needs at least one edge".into()));
        }
        if let Some(&v) = path.iter().find(|&&v| v >= order.len()) {
            return Err(Error::InvalidArc(format!("vertex {v} out of range")));
        }
        for w in path.windows(2) {
            if order.edge_between(w[0], w[1]).is_none() {
                return Err(Error::InvalidArc(format!(
                    "{} and {} are not adjacent",
                    order.id(w[0]),
                    order.id(w[1])
                )));
            }
        }
        let distinct: HashSet<usize> = path.iter().copied().collect();
        if distinct.len() != path.len() {
            return Err(Error::InvalidArc("path revisits a vertex".into()));
        }
        Ok(OrientedArc {
            path,
            start_inside,
            end_inside,
        })
    }

    /// Geodesic from vertex `a` to vertex `b`, both endpoints on vertices.
    pub fn between_vertices(order: &VertexOrder, a: usize, b: usize) -> Result<OrientedArc> {
        OrientedArc::new(order, order.vertex_path(a, b), false, false)
    }

    /// Geodesic from a point inside chain `from` to a point inside chain `to`
    /// (chains as returned by [`chains`]). Each endpoint lies in the chain
    /// edge next to the end vertex the arc leaves through.
    pub fn between_chains(order: &VertexOrder, from: &[usize], to: &[usize]) -> Result<OrientedArc> {
        let ends = |c: &[usize]| [(c[0], c[1]), (c[c.len() - 1], c[c.len() - 2])];
        let mut best: Option<(usize, (usize, usize), (usize, usize))> = None;
        for a in ends(from) {
            for b in ends(to) {
                let d = order.vertex_distance(a.0, b.0);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, (exit_a, inner_a), (exit_b, inner_b)) = best.expect("chains are non-empty");
        let mut path = vec![inner_a];
        path.extend(order.vertex_path(exit_a, exit_b));
        path.push(inner_b);
        OrientedArc::new(order, path, true, true)
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn start_inside(&self) -> bool {
        self.start_inside
    }

    pub fn end_inside(&self) -> bool {
        self.end_inside
    }

    /// Vertex at the initial point, if the arc starts on a vertex.
    pub fn initial_vertex(&self) -> Option<usize> {
        (!self.start_inside).then(|| self.path[0])
    }

    pub fn terminal_vertex(&self) -> Option<usize> {
        (!self.end_inside).then(|| self.path[self.path.len() - 1])
    }

    pub fn is_endpoint(&self, v: usize) -> bool {
        self.initial_vertex() == Some(v) || self.terminal_vertex() == Some(v)
    }

    /// Vertices strictly inside the arc, in traversal order.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.path[1..self.path.len() - 1]
    }

    /// Whether `v` is a point of the arc.
    pub fn contains(&self, v: usize) -> bool {
        self.position(v).is_some()
    }

    fn position(&self, v: usize) -> Option<usize> {
        let i = self.path.iter().position(|&x| x == v)?;
        let last = self.path.len() - 1;
        if (i == 0 && self.start_inside) || (i == last && self.end_inside) {
            None
        } else {
            Some(i)
        }
    }

    pub fn reversed(&self) -> OrientedArc {
        let mut path = self.path.clone();
        path.reverse();
        OrientedArc {
            path,
            start_inside: self.end_inside,
            end_inside: self.start_inside,
        }
    }

    pub fn to_json(&self, order: &VertexOrder) -> ArcJson {
        ArcJson {
            path: self.path.iter().map(|&v| order.id(v).to_string()).collect(),
            start_inside: self.start_inside,
            end_inside: self.end_inside,
        }
    }

    pub fn from_json(order: &VertexOrder, json: &ArcJson) -> Result<OrientedArc> {
        let path = json
            .path
            .iter()
            .map(|id| order.lookup(id).ok_or_else(|| Error::UnknownVertex(id.clone())))
            .collect::<Result<Vec<_>>>()?;
        OrientedArc::new(order, path, json.start_inside, json.end_inside)
    }
}

/// Orientation sums at `v`, indexed by direction: an arc through `v`
/// contributes +1 on the edge it arrives along and -1 on the edge it leaves
/// along.
pub fn eta(order: &VertexOrder, arcs: &[OrientedArc], v: usize) -> Result<Vec<i64>> {
    if v == 0 {
        return Err(Error::DirectionAtBase);
    }
    let mut out = vec![0i64; order.degree(v)];
    for arc in arcs {
        let Some(i) = arc.position(v) else { continue };
        if i > 0 {
            let e = order.edge_between(arc.path[i - 1], v).expect("arc is a path");
            out[order.direction(v, e)?] += 1;
        }
        if i + 1 < arc.path.len() {
            let e = order.edge_between(v, arc.path[i + 1]).expect("arc is a path");
            out[order.direction(v, e)?] -= 1;
        }
    }
    Ok(out)
}

/// True when no vertex of `targets` is an arc endpoint and each has some
/// nonzero orientation sum.
pub fn is_allowable(order: &VertexOrder, arcs: &[OrientedArc], targets: &[usize]) -> bool {
    targets.iter().all(|&v| {
        v != 0 && !arcs.iter().any(|a| a.is_endpoint(v)) && eta(order, arcs, v).is_ok_and(|e| e.iter().any(|&x| x != 0))
    })
}

/// Maximal paths whose inner vertices have degree 2, each listed from the
/// end nearer the base. Ordered by their second vertex.
pub fn chains(order: &VertexOrder) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for top in 0..order.len() {
        if top != 0 && order.degree(top) == 2 {
            continue;
        }
        for &c in order.children(top) {
            let mut chain = vec![top, c];
            let mut cur = c;
            while order.degree(cur) == 2 {
                cur = order.children(cur)[0];
                chain.push(cur);
            }
            out.push(chain);
        }
    }
    out.sort_by_key(|c| c[1]);
    out
}

/// The chain holding edge `(a, b)`.
pub(crate) fn chain_through(order: &VertexOrder, a: usize, b: usize) -> Vec<usize> {
    let lower = if order.parent(a) == Some(b) { a } else { b };
    let mut top = order.parent(lower).expect("edge has a parent end");
    let mut chain = vec![lower];
    while top != 0 && order.degree(top) == 2 {
        chain.push(top);
        top = order.parent(top).unwrap();
    }
    chain.push(top);
    chain.reverse();
    let mut cur = lower;
    while order.degree(cur) == 2 {
        cur = order.children(cur)[0];
        chain.push(cur);
    }
    chain
}

fn degree_three(order: &VertexOrder, stats: &TreeStats) -> Vec<usize> {
    stats
        .essential
        .iter()
        .copied()
        .filter(|&v| order.degree(v) == 3)
        .collect()
}

fn degree_above_three(order: &VertexOrder, stats: &TreeStats) -> Vec<usize> {
    stats
        .essential
        .iter()
        .copied()
        .filter(|&v| order.degree(v) > 3)
        .collect()
}

struct Budget {
    left: usize,
    total: usize,
}

impl Budget {
    fn new(total: usize) -> Budget {
        Budget { left: total, total }
    }

    fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::SearchBudgetExceeded { budget: self.total });
        }
        self.left -= 1;
        Ok(())
    }
}

/// Smallest number of oriented arcs allowable for every degree-3 vertex,
/// with the lexicographically first witness. Arcs run between points
/// inside distinct chains; arcs with equal orientation data at the
/// degree-3 vertices are tried once.
pub fn min_allowable_k(order: &VertexOrder, budget: usize) -> Result<(usize, Vec<OrientedArc>)> {
    let stats = TreeStats::compute(order);
    let targets = degree_three(order, &stats);
    if targets.is_empty() {
        return Ok((0, Vec::new()));
    }
    let all = chains(order);
    let mut seen = HashSet::new();
    let mut candidates: Vec<(OrientedArc, Vec<i64>)> = Vec::new();
    for a in &all {
        for b in &all {
            if a == b {
                continue;
            }
            let arc = OrientedArc::between_chains(order, a, b)?;
            let mut signature = Vec::with_capacity(3 * targets.len());
            for &v in &targets {
                signature.extend(eta(order, std::slice::from_ref(&arc), v)?);
            }
            if signature.iter().all(|&x| x == 0) || !seen.insert(signature.clone()) {
                continue;
            }
            candidates.push((arc, signature));
        }
    }
    let mut budget = Budget::new(budget);
    let width = 3 * targets.len();
    for k in 1..=targets.len().min(candidates.len()) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            budget.tick()?;
            let mut sum = vec![0i64; width];
            for &i in &idx {
                for (s, x) in sum.iter_mut().zip(&candidates[i].1) {
                    *s += x;
                }
            }
            if sum.chunks(3).all(|c| c.iter().any(|&x| x != 0)) {
                let arcs = idx.iter().map(|&i| candidates[i].0.clone()).collect();
                return Ok((k, arcs));
            }
            if !next_combination(&mut idx, candidates.len()) {
                break;
            }
        }
    }
    unreachable!("one short arc through each degree-3 vertex is always allowable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Many points: `n >= 2m + k`.
    Statement1,
    /// Fewer points, enough degree-3 vertices without arcs.
    Case2a,
    /// Fewer points, even count, arcs between essential vertices.
    Case2bEven,
    /// Fewer points, odd count, an extra arc for the spare point.
    Case2bOdd,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseTag::Statement1 => "statement1",
            CaseTag::Case2a => "case2a",
            CaseTag::Case2bEven => "case2b_even",
            CaseTag::Case2bOdd => "case2b_odd",
        })
    }
}

/// Arcs and vertex sets that certify the topological complexity value of
/// a fixed tree and point count.
///
/// `half` is the target dimension (`m` for [`CaseTag::Statement1`], else
/// `q` with `n = 2q + parity`). `vertex_set` holds the degree-3 vertices
/// the arcs are allowable for (or the degree-3 vertices used directly in
/// case 2a); `primed_set` holds the degree-3 vertices inside `arc0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcCertificate {
    pub case: CaseTag,
    pub half: usize,
    pub parity: usize,
    pub k: usize,
    pub arcs: Vec<OrientedArc>,
    pub arc0: Option<OrientedArc>,
    pub vertex_set: Vec<usize>,
    pub primed_set: Vec<usize>,
    pub r_prime: usize,
    pub s_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcCertificateJson {
    pub case: CaseTag,
    pub half: usize,
    pub parity: usize,
    pub k: usize,
    pub arcs: Vec<ArcJson>,
    pub arc0: Option<ArcJson>,
    pub vertex_set: Vec<String>,
    pub primed_set: Vec<String>,
    pub r_prime: usize,
    pub s_prime: usize,
}

impl ArcCertificate {
    pub fn to_json(&self, order: &VertexOrder) -> ArcCertificateJson {
        let ids = |vs: &[usize]| vs.iter().map(|&v| order.id(v).to_string()).collect();
        ArcCertificateJson {
            case: self.case,
            half: self.half,
            parity: self.parity,
            k: self.k,
            arcs: self.arcs.iter().map(|a| a.to_json(order)).collect(),
            arc0: self.arc0.as_ref().map(|a| a.to_json(order)),
            vertex_set: ids(&self.vertex_set),
            primed_set: ids(&self.primed_set),
            r_prime: self.r_prime,
            s_prime: self.s_prime,
        }
    }

    pub fn from_json(order: &VertexOrder, json: &ArcCertificateJson) -> Result<ArcCertificate> {
        let vs = |ids: &[String]| {
            ids.iter()
                .map(|id| order.lookup(id).ok_or_else(|| Error::UnknownVertex(id.clone())))
                .collect::<Result<Vec<_>>>()
        };
        Ok(ArcCertificate {
            case: json.case,
            half: json.half,
            parity: json.parity,
            k: json.k,
            arcs: json
                .arcs
                .iter()
                .map(|a| OrientedArc::from_json(order, a))
                .collect::<Result<_>>()?,
            arc0: json
                .arc0
                .as_ref()
                .map(|a| OrientedArc::from_json(order, a))
                .transpose()?,
            vertex_set: vs(&json.vertex_set)?,
            primed_set: vs(&json.primed_set)?,
            r_prime: json.r_prime,
            s_prime: json.s_prime,
        })
    }

    /// Re-checks the hypotheses of the certificate's case for `n` points.
    pub fn check(&self, order: &VertexOrder, n: usize) -> Result<()> {
        let stats = TreeStats::compute(order);
        let fail = |msg: String| Err(Error::InconsistentCertificate(msg));
        let deg3 = degree_three(order, &stats);
        let all_deg3 = |set: &[usize]| set.iter().all(|v| deg3.contains(v));
        let distinct = |set: &[usize]| set.iter().collect::<HashSet<_>>().len() == set.len();
        if !all_deg3(&self.vertex_set) || !distinct(&self.vertex_set) {
            return fail("vertex set must consist of distinct degree-3 vertices".into());
        }
        if self.arcs.len() != self.k {
            return fail(format!("{} arcs recorded for k = {}", self.arcs.len(), self.k));
        }
        match self.case {
            CaseTag::Statement1 => {
                if self.half != stats.m || n < 2 * stats.m {
                    return fail("statement 1 needs n >= 2m".into());
                }
                if self.vertex_set != deg3 {
                    return fail("statement 1 targets every degree-3 vertex".into());
                }
                if !is_allowable(order, &self.arcs, &deg3) {
                    return fail("arcs are not allowable for the degree-3 vertices".into());
                }
                let (min_k, _) = min_allowable_k(order, DEFAULT_ARC_BUDGET)?;
                if min_k != self.k {
                    return fail(format!("k = {} is not minimal ({min_k})", self.k));
                }
                if n < 2 * stats.m + self.k {
                    return fail(format!("n = {n} is below 2m + k = {}", 2 * stats.m + self.k));
                }
                Ok(())
            }
            CaseTag::Case2a => {
                let q = self.half;
                if 2 * q + self.parity != n || n >= 2 * stats.m {
                    return fail("case 2 needs n = 2q + parity < 2m".into());
                }
                let need = 2 * q.saturating_sub(stats.r);
                if stats.s < need || self.vertex_set.len() != need {
                    return fail(format!("case 2a needs {need} degree-3 vertices"));
                }
                Ok(())
            }
            CaseTag::Case2bEven | CaseTag::Case2bOdd => self.check_case2b(order, &stats, n),
        }
    }

    fn check_case2b(&self, order: &VertexOrder, stats: &TreeStats, n: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InconsistentCertificate(msg));
        let q = self.half;
        let odd = self.case == CaseTag::Case2bOdd;
        if 2 * q + self.parity != n || n >= 2 * stats.m || self.parity != usize::from(odd) {
            return fail("case 2 needs n = 2q + parity < 2m".into());
        }
        if stats.s >= 2 * q.saturating_sub(stats.r) {
            return fail("case 2b needs s < 2(q - r)".into());
        }
        let mut ends = HashSet::new();
        for a in &self.arcs {
            let (Some(x), Some(y)) = (a.initial_vertex(), a.terminal_vertex()) else {
                return fail("arc endpoints must be vertices".into());
            };
            if !stats.essential.contains(&x) || !stats.essential.contains(&y) {
                return fail("arc endpoints must be essential".into());
            }
            if !ends.insert(x) || !ends.insert(y) {
                return fail("arc endpoints must be pairwise distinct".into());
            }
        }
        let r_prime = degree_above_three(order, stats)
            .iter()
            .filter(|v| !ends.contains(v))
            .count();
        if r_prime != self.r_prime {
            return fail(format!("r' is {r_prime}, recorded {}", self.r_prime));
        }
        if !is_allowable(order, &self.arcs, &self.vertex_set) {
            return fail("arcs are not allowable for the vertex set".into());
        }
        let Some(base) = q.checked_sub(r_prime + self.k) else {
            return fail("more arcs and high-degree vertices than dimensions".into());
        };
        if !odd {
            if self.k == 0 || self.arc0.is_some() || !self.primed_set.is_empty() {
                return fail("even case uses at least one arc and no extra arc".into());
            }
            if self.vertex_set.len() < base {
                return fail(format!("vertex set has {} < {base} vertices", self.vertex_set.len()));
            }
            return Ok(());
        }
        let Some(arc0) = &self.arc0 else {
            return fail("odd case needs an extra arc".into());
        };
        let s_prime = self.primed_set.len();
        if s_prime != self.s_prime || s_prime > q {
            return fail("primed set size mismatch".into());
        }
        if self
            .primed_set
            .iter()
            .any(|v| !arc0.interior_vertices().contains(v) || order.degree(*v) != 3)
        {
            return fail("primed set must be degree-3 vertices inside the extra arc".into());
        }
        if self
            .primed_set
            .iter()
            .any(|v| self.vertex_set.contains(v) || ends.contains(v))
        {
            return fail("primed set must avoid the vertex set and arc endpoints".into());
        }
        if s_prime >= q - stats.r {
            if self.k != 0 {
                return fail("no arcs are needed once the extra arc holds q - r vertices".into());
            }
            return Ok(());
        }
        if self.k == 0 {
            return fail("arcs are required when the extra arc holds fewer than q - r vertices".into());
        }
        if self.vertex_set.len() + s_prime < base {
            return fail(format!(
                "vertex sets hold {} < {base} vertices",
                self.vertex_set.len() + s_prime
            ));
        }
        Ok(())
    }
}

/// Certificate for case 2a when `s >= 2(q - r)`. Records the first
/// `2(q - r)` degree-3 vertices (none when `r >= q`).
pub fn find_case2a(order: &VertexOrder, stats: &TreeStats, q: usize, parity: usize) -> Option<ArcCertificate> {
    let need = 2 * q.saturating_sub(stats.r);
    if stats.s < need {
        return None;
    }
    let vertex_set = degree_three(order, stats).into_iter().take(need).collect();
    Some(ArcCertificate {
        case: CaseTag::Case2a,
        half: q,
        parity,
        k: 0,
        arcs: Vec::new(),
        arc0: None,
        vertex_set,
        primed_set: Vec::new(),
        r_prime: stats.r,
        s_prime: 0,
    })
}

/// Calls `visit` on every oriented matching of `k` pairs drawn from `pool`
/// until it returns `Some`.
fn search_matchings<T>(
    pool: &[usize],
    k: usize,
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[(usize, usize)]) -> Option<T>,
) -> Result<Option<T>> {
    if 2 * k > pool.len() {
        return Ok(None);
    }
    let mut idx: Vec<usize> = (0..2 * k).collect();
    loop {
        let chosen: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
        for pairing in perfect_matchings(&chosen) {
            for mask in 0..1u64 << k {
                budget.tick()?;
                let oriented: Vec<(usize, usize)> = pairing
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| if mask >> i & 1 == 0 { (a, b) } else { (b, a) })
                    .collect();
                if let Some(t) = visit(&oriented) {
                    return Ok(Some(t));
                }
            }
        }
        if !next_combination(&mut idx, pool.len()) {
            return Ok(None);
        }
    }
}

fn perfect_matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for j in 1..items.len() {
        let rest: Vec<usize> = items[1..]
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != j)
            .map(|(_, &v)| v)
            .collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, items[j]));
            out.push(m);
        }
    }
    out
}

/// Degree-3 vertices, not arc endpoints and not in `exclude`, at which the
/// arcs have a nonzero orientation sum.
fn allowable_degree_three(order: &VertexOrder, deg3: &[usize], arcs: &[OrientedArc], exclude: &[usize]) -> Vec<usize> {
    deg3.iter()
        .copied()
        .filter(|v| !exclude.contains(v))
        .filter(|&v| is_allowable(order, arcs, &[v]))
        .collect()
}

/// Certificate for case 2b, or `None` when no arcs of the required shape
/// exist. Collections are tried by increasing number of arcs; the first
/// witness in lexicographic order is returned.
pub fn find_case2b(
    order: &VertexOrder,
    stats: &TreeStats,
    q: usize,
    parity: usize,
    budget: usize,
) -> Result<Option<ArcCertificate>> {
    let mut budget = Budget::new(budget);
    let deg3 = degree_three(order, stats);
    let high = degree_above_three(order, stats);
    let essential = &stats.essential;

    // Arcs between essential vertices given by an oriented matching.
    let arcs_for = |pairs: &[(usize, usize)]| -> Vec<OrientedArc> {
        pairs
            .iter()
            .map(|&(a, b)| OrientedArc::between_vertices(order, a, b).expect("tree path"))
            .collect()
    };
    let r_prime_for = |pairs: &[(usize, usize)]| {
        high.iter()
            .filter(|v| !pairs.iter().any(|&(a, b)| a == **v || b == **v))
            .count()
    };

    if parity == 0 {
        for k in 1..=stats.m / 2 {
            let found = search_matchings(essential, k, &mut budget, &mut |pairs| {
                let r_prime = r_prime_for(pairs);
                let base = q.checked_sub(r_prime + k)?;
                let arcs = arcs_for(pairs);
                let set = allowable_degree_three(order, &deg3, &arcs, &[]);
                (set.len() >= base).then(|| ArcCertificate {
                    case: CaseTag::Case2bEven,
                    half: q,
                    parity,
                    k,
                    arcs,
                    arc0: None,
                    vertex_set: set,
                    primed_set: Vec::new(),
                    r_prime,
                    s_prime: 0,
                })
            })?;
            if found.is_some() {
                return Ok(found);
            }
        }
        return Ok(None);
    }

    let mut extra = vec![OrientedArc::new(order, vec![0, 1], false, true)?];
    let all = chains(order);
    for a in &all {
        for b in &all {
            if a != b {
                extra.push(OrientedArc::between_chains(order, a, b)?);
            }
        }
    }
    let inside3 = |arc: &OrientedArc| -> Vec<usize> {
        let mut v: Vec<usize> = arc
            .interior_vertices()
            .iter()
            .copied()
            .filter(|&v| order.degree(v) == 3)
            .collect();
        v.sort_unstable();
        v
    };
    let need = q - stats.r;
    for arc0 in &extra {
        budget.tick()?;
        let inside = inside3(arc0);
        if inside.len() >= need {
            return Ok(Some(ArcCertificate {
                case: CaseTag::Case2bOdd,
                half: q,
                parity,
                k: 0,
                arcs: Vec::new(),
                arc0: Some(arc0.clone()),
                vertex_set: Vec::new(),
                primed_set: inside[..need].to_vec(),
                r_prime: stats.r,
                s_prime: need,
            }));
        }
    }
    for arc0 in &extra {
        let inside = inside3(arc0);
        // Subsets of the degree-3 vertices inside the extra arc, largest first.
        let mut subsets: Vec<Vec<usize>> = (0..1u64 << inside.len())
            .map(|mask| {
                (0..inside.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| inside[i])
                    .collect()
            })
            .collect();
        subsets.sort_by(|x: &Vec<usize>, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));
        for primed in &subsets {
            let pool: Vec<usize> = essential.iter().copied().filter(|v| !primed.contains(v)).collect();
            for k in 1..=stats.m / 2 {
                let found = search_matchings(&pool, k, &mut budget, &mut |pairs| {
                    let r_prime = r_prime_for(pairs);
                    let base = q.checked_sub(r_prime + k)?;
                    let arcs = arcs_for(pairs);
                    let set = allowable_degree_three(order, &deg3, &arcs, primed);
                    (set.len() + primed.len() >= base).then(|| ArcCertificate {
                        case: CaseTag::Case2bOdd,
                        half: q,
                        parity,
                        k,
                        arcs,
                        arc0: Some(arc0.clone()),
                        vertex_set: set,
                        primed_set: primed.clone(),
                        r_prime,
                        s_prime: primed.len(),
                    })
                })?;
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
    }
    Ok(None)
}
