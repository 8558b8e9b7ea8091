//! Motion planning for points on a tree: paths through the canonical
//! configuration of the first `n` vertices, and label permutations by
//! parking tokens on the branches of the first essential vertex.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::split_edge;
use crate::error::{Error, Result};
use crate::tree::{EdgeId, Point, VertexOrder};

/// Points of the tree whose carriers (the vertex, or the closed edge) are
/// pairwise disjoint. The index of a point is its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    points: Vec<Point>,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn carriers_meet(order: &VertexOrder, a: &Point, b: &Point) -> bool {
    let ca = a.closure(order);
    b.closure(order).iter().any(|v| ca.contains(v))
}

/// First pair of labels whose carriers meet.
fn first_clash(order: &VertexOrder, points: &[Point]) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if carriers_meet(order, &points[i], &points[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

impl Configuration {
    pub fn new(order: &VertexOrder, points: Vec<Point>) -> Result<Configuration> {
        let points: Vec<Point> = points.iter().map(|p| p.normalized(order)).collect();
        if let Some(p) = points.iter().find(|p| !p.is_valid(order)) {
            return Err(Error::InvalidConfiguration(format!("{p:?} is not a point of the tree")));
        }
        if let Some((i, j)) = first_clash(order, &points) {
            return Err(Error::InvalidConfiguration(format!(
                "points {} and {} are too close",
                format_point(order, &points[i]),
                format_point(order, &points[j])
            )));
        }
        Ok(Configuration { points })
    }

    /// The first `n` vertices, label `i` on vertex `i`.
    pub fn canonical(n: usize) -> Configuration {
        Configuration {
            points: (0..n).map(Point::Vertex).collect(),
        }
    }

    /// Reads `v:<id>` and `e:<id1>-<id2>@<num>/<den>` items separated by
    /// commas; the fraction is the distance from `id1`.
    pub fn parse(order: &VertexOrder, text: &str) -> Result<Configuration> {
        let bad = |item: &str| Error::InvalidConfiguration(format!("cannot read point `{item}`"));
        let mut points = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(id) = item.strip_prefix("v:") {
                let v = order.lookup(id).ok_or_else(|| Error::UnknownVertex(id.to_string()))?;
                points.push(Point::Vertex(v));
            } else if let Some(rest) = item.strip_prefix("e:") {
                let (edge, frac) = rest.rsplit_once('@').ok_or_else(|| bad(item))?;
                let (a, b) = split_edge(order, edge).ok_or_else(|| bad(item))?;
                let e = order.edge_between(a, b).ok_or_else(|| bad(item))?;
                let (num, den) = frac.split_once('/').unwrap_or((frac, "1"));
                let num: BigInt = num.trim().parse().map_err(|_| bad(item))?;
                let den: BigInt = den.trim().parse().map_err(|_| bad(item))?;
                if den.is_zero() {
                    return Err(bad(item));
                }
                let s = BigRational::new(num, den);
                if !s.is_positive() || s >= BigRational::one() {
                    return Err(Error::InvalidConfiguration(format!(
                        "`{item}` must lie strictly inside its edge"
                    )));
                }
                let t = if a == order.iota(e) { s } else { BigRational::one() - s };
                points.push(Point::Edge(e, t));
            } else {
                return Err(bad(item));
            }
        }
        Configuration::new(order, points)
    }

    pub fn format(&self, order: &VertexOrder) -> String {
        self.points
            .iter()
            .map(|p| format_point(order, p))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Equality after forgetting labels.
    pub fn same_unordered(&self, other: &Configuration) -> bool {
        let a: BTreeSet<&Point> = self.points.iter().collect();
        let b: BTreeSet<&Point> = other.points.iter().collect();
        a == b && self.len() == other.len()
    }
}

pub fn format_point(order: &VertexOrder, p: &Point) -> String {
    match p {
        Point::Vertex(v) => format!("v:{}", order.id(*v)),
        Point::Edge(e, t) => format!("e:{}-{}@{}", order.id(order.iota(*e)), order.id(e.0), t),
    }
}

/// Edges whose interiors carry a point, and their number.
pub fn stratum(config: &Configuration) -> (Vec<EdgeId>, usize) {
    let mut edges: Vec<EdgeId> = config
        .points
        .iter()
        .filter_map(|p| match p {
            Point::Edge(e, _) => Some(*e),
            Point::Vertex(_) => None,
        })
        .collect();
    edges.sort_unstable();
    let i = edges.len();
    (edges, i)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyframe {
    pub time: BigRational,
    pub points: Vec<Point>,
}

/// Piecewise motion: between consecutive keyframes at most one point moves,
/// at constant speed inside a single closed edge. Times run from 0 to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedPath {
    pub keyframes: Vec<Keyframe>,
    pub ordered: bool,
    /// Sum of the numbers of occupied edge interiors at the two ends.
    pub stratum: Option<usize>,
}

impl PlannedPath {
    fn constant(points: Vec<Point>, ordered: bool) -> PlannedPath {
        PlannedPath {
            keyframes: vec![
                Keyframe {
                    time: BigRational::zero(),
                    points: points.clone(),
                },
                Keyframe {
                    time: BigRational::one(),
                    points,
                },
            ],
            ordered,
            stratum: None,
        }
    }

    pub fn start(&self) -> &[Point] {
        &self.keyframes[0].points
    }

    pub fn end(&self) -> &[Point] {
        &self.keyframes[self.keyframes.len() - 1].points
    }

    /// The same motion run backwards.
    pub fn reversed(&self) -> PlannedPath {
        let keyframes = self
            .keyframes
            .iter()
            .rev()
            .map(|k| Keyframe {
                time: BigRational::one() - &k.time,
                points: k.points.clone(),
            })
            .collect();
        PlannedPath {
            keyframes,
            ordered: self.ordered,
            stratum: self.stratum,
        }
    }

    fn relabelled(&self, new_index: &[usize]) -> PlannedPath {
        let keyframes = self
            .keyframes
            .iter()
            .map(|k| {
                let mut points = k.points.clone();
                for (j, p) in k.points.iter().enumerate() {
                    points[new_index[j]] = p.clone();
                }
                Keyframe {
                    time: k.time.clone(),
                    points,
                }
            })
            .collect();
        PlannedPath {
            keyframes,
            ordered: self.ordered,
            stratum: self.stratum,
        }
    }

    /// Runs `parts` one after another, each squeezed into an equal share
    /// of the unit interval.
    fn concat(parts: &[PlannedPath], ordered: bool) -> PlannedPath {
        let share = ratio(1, parts.len() as i64);
        let mut keyframes: Vec<Keyframe> = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            let offset = &share * BigRational::from_integer(BigInt::from(i));
            for k in &part.keyframes {
                let time = &offset + &share * &k.time;
                if keyframes
                    .last()
                    .is_some_and(|last| last.time == time && last.points == k.points)
                {
                    continue;
                }
                keyframes.push(Keyframe {
                    time,
                    points: k.points.clone(),
                });
            }
        }
        PlannedPath {
            keyframes,
            ordered,
            stratum: None,
        }
    }

    /// Equal keyframe times and equal point sets at every keyframe,
    /// ignoring labels.
    pub fn same_trace(&self, other: &PlannedPath) -> bool {
        let sorted = |k: &Keyframe| {
            let mut pts = k.points.clone();
            pts.sort();
            pts
        };
        self.keyframes.len() == other.keyframes.len()
            && self
                .keyframes
                .iter()
                .zip(&other.keyframes)
                .all(|(a, b)| a.time == b.time && sorted(a) == sorted(b))
    }

    /// Positions of all points at time `t` in [0, 1].
    pub fn position_at(&self, order: &VertexOrder, t: &BigRational) -> Vec<Point> {
        let ks = &self.keyframes;
        let idx = ks.partition_point(|k| &k.time <= t);
        if idx == 0 {
            return ks[0].points.clone();
        }
        if idx == ks.len() {
            return ks[ks.len() - 1].points.clone();
        }
        let (a, b) = (&ks[idx - 1], &ks[idx]);
        let span = &b.time - &a.time;
        if span.is_zero() {
            return b.points.clone();
        }
        let s = (t - &a.time) / span;
        a.points
            .iter()
            .zip(&b.points)
            .map(|(p, q)| {
                if p == q {
                    return p.clone();
                }
                match common_edge(order, p, q) {
                    Some(e) => {
                        let (x, y) = (p.param_on(order, e), q.param_on(order, e));
                        Point::on_edge(order, e, &x + (&y - &x) * &s)
                    }
                    None => p.clone(),
                }
            })
            .collect()
    }
}

fn common_edge(order: &VertexOrder, p: &Point, q: &Point) -> Option<EdgeId> {
    match (p, q) {
        (Point::Edge(e, _), Point::Edge(f, _)) => (e == f).then_some(*e),
        (Point::Edge(e, _), Point::Vertex(v)) | (Point::Vertex(v), Point::Edge(e, _)) => {
            (*v == e.0 || *v == order.iota(*e)).then_some(*e)
        }
        (Point::Vertex(a), Point::Vertex(b)) => order.edge_between(*a, *b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathValidation {
    pub valid: bool,
    pub first_violation: Option<String>,
}

/// Checks every keyframe and every motion between keyframes for carrier
/// disjointness, and that times increase from 0 to 1.
pub fn validate_path(order: &VertexOrder, path: &PlannedPath) -> PathValidation {
    let fail = |msg: String| PathValidation {
        valid: false,
        first_violation: Some(msg),
    };
    let ks = &path.keyframes;
    if ks.is_empty() {
        return fail("path has no keyframes".into());
    }
    if !ks[0].time.is_zero() || !ks[ks.len() - 1].time.is_one() {
        return fail("path must run from time 0 to time 1".into());
    }
    let n = ks[0].points.len();
    for (i, k) in ks.iter().enumerate() {
        if k.points.len() != n {
            return fail(format!("keyframe {i} has {} points, expected {n}", k.points.len()));
        }
        if let Some(p) = k
            .points
            .iter()
            .find(|p| !p.is_valid(order) || p.normalized(order) != **p)
        {
            return fail(format!("keyframe {i} holds an invalid point {p:?}"));
        }
        if let Some((a, b)) = first_clash(order, &k.points) {
            return fail(format!("keyframe {i}: points {a} and {b} collide"));
        }
    }
    for (i, w) in ks.windows(2).enumerate() {
        if w[1].time <= w[0].time {
            return fail(format!("keyframe {} does not advance time", i + 1));
        }
        let moving: Vec<usize> = (0..n).filter(|&j| w[0].points[j] != w[1].points[j]).collect();
        match moving.as_slice() {
            [] => {}
            [j] => {
                let Some(e) = common_edge(order, &w[0].points[*j], &w[1].points[*j]) else {
                    return fail(format!("segment {i}: point {j} jumps between edges"));
                };
                let sweep = Point::Edge(e, ratio(1, 2));
                if let Some(other) = (0..n).find(|&o| o != *j && carriers_meet(order, &sweep, &w[0].points[o])) {
                    return fail(format!("segment {i}: point {j} sweeps across point {other}"));
                }
            }
            _ => return fail(format!("segment {i}: {} points move at once", moving.len())),
        }
    }
    PathValidation {
        valid: true,
        first_violation: None,
    }
}

/// Fails unless the first `n` vertices form a path from the base whose
/// inner vertices have degree 2.
fn check_hub(order: &VertexOrder, n: usize) -> Result<()> {
    let ok = n <= order.len()
        && (1..n).all(|v| order.parent(v) == Some(v - 1))
        && (1..n.saturating_sub(1)).all(|v| order.degree(v) <= 2);
    if ok {
        Ok(())
    } else {
        Err(Error::NotSufficientlySubdivided(n))
    }
}

/// Position key: the vertex number, or the smaller endpoint for an edge point.
fn rank_key(order: &VertexOrder, p: &Point) -> usize {
    match p {
        Point::Vertex(v) => *v,
        Point::Edge(e, _) => order.iota(*e),
    }
}

/// Labels sorted by rank key; the `i`-th is sent to vertex `i`.
fn ranking(order: &VertexOrder, x: &Configuration) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by_key(|&j| rank_key(order, &x.points[j]));
    idx
}

/// Moves the points of `x`, in increasing rank, one at a time along
/// geodesics onto the first `n` vertices. Stage `i` takes the time window
/// `[i/n, (i+1)/n]` at constant speed.
pub fn canonical_path(order: &VertexOrder, x: &Configuration) -> Result<PlannedPath> {
    let n = x.len();
    check_hub(order, n)?;
    if n == 0 {
        return Ok(PlannedPath::constant(Vec::new(), false));
    }
    let mut cur = x.points.clone();
    let mut keyframes = vec![Keyframe {
        time: BigRational::zero(),
        points: cur.clone(),
    }];
    let width = ratio(1, n as i64);
    for (i, &j) in ranking(order, x).iter().enumerate() {
        let start = &width * BigRational::from_integer(BigInt::from(i));
        let legs = order.geodesic(&cur[j], &Point::Vertex(i));
        let total = legs.iter().fold(BigRational::zero(), |acc, l| acc + l.length());
        let mut done = BigRational::zero();
        for leg in legs {
            done += leg.length();
            cur[j] = leg.end(order);
            keyframes.push(Keyframe {
                time: &start + &width * &done / &total,
                points: cur.clone(),
            });
        }
    }
    if !keyframes[keyframes.len() - 1].time.is_one() {
        keyframes.push(Keyframe {
            time: BigRational::one(),
            points: cur,
        });
    }
    let path = PlannedPath {
        keyframes,
        ordered: false,
        stratum: Some(stratum(x).1),
    };
    require_valid(order, &path)?;
    Ok(path)
}

fn require_valid(order: &VertexOrder, path: &PlannedPath) -> Result<()> {
    let v = validate_path(order, path);
    match v.first_violation {
        None => Ok(()),
        Some(msg) => Err(Error::InvalidPath(msg)),
    }
}

/// `x` to the canonical configuration, then back out to `y` along the
/// reverse of `y`'s canonical path. The ending labels are those of `x`'s
/// points, so the end equals `y` only as an unordered configuration.
pub fn plan_unordered(order: &VertexOrder, x: &Configuration, y: &Configuration) -> Result<PlannedPath> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfiguration("configurations differ in size".into()));
    }
    let to_hub = canonical_path(order, x)?;
    let from_hub = canonical_path(order, y)?;
    // Label of y's j-th point after the hub: the x label parked on the same vertex.
    let rx = ranking(order, x);
    let ry = ranking(order, y);
    let mut relabel = vec![0; y.len()];
    for (i, &j) in ry.iter().enumerate() {
        relabel[j] = rx[i];
    }
    let back = from_hub.relabelled(&relabel).reversed();
    let mut path = PlannedPath::concat(&[to_hub, back], false);
    path.stratum = Some(stratum(x).1 + stratum(y).1);
    require_valid(order, &path)?;
    Ok(path)
}

/// Vertices of the chain leaving `hub` in direction `dir`, nearest first.
fn branch(order: &VertexOrder, hub: usize, dir: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let Some(e) = order.edge_in_direction(hub, dir) else {
        return out;
    };
    let mut cur = e.tau();
    out.push(cur);
    while order.degree(cur) == 2 {
        cur = order.children(cur)[0];
        out.push(cur);
    }
    out
}

struct Shuffler<'a> {
    order: &'a VertexOrder,
    at: Vec<usize>,
    frames: Vec<Vec<Point>>,
}

impl Shuffler<'_> {
    fn occupied(&self, v: usize) -> bool {
        self.at.contains(&v)
    }

    fn walk(&mut self, label: usize, to: usize) {
        let path = self.order.vertex_path(self.at[label], to);
        for &v in &path[1..] {
            self.at[label] = v;
            self.frames.push(self.at.iter().map(|&v| Point::Vertex(v)).collect());
        }
    }

    /// Sends the token on `from` as deep into `arm` as it can go.
    fn park(&mut self, from: usize, arm: &[usize]) -> Result<()> {
        let label = self.at.iter().position(|&v| v == from).expect("token present");
        let free = arm.iter().position(|&v| self.occupied(v)).unwrap_or(arm.len());
        if free == 0 {
            return Err(Error::NotSufficientlySubdivided(self.at.len()));
        }
        self.walk(label, arm[free - 1]);
        Ok(())
    }

    /// Brings the shallowest token of `arm` back onto vertex `to`.
    fn unpark(&mut self, arm: &[usize], to: usize) {
        let v = *arm.iter().find(|&&v| self.occupied(v)).expect("arm holds a token");
        let label = self.at.iter().position(|&w| w == v).unwrap();
        self.walk(label, to);
    }
}

/// Ordered path between two arrangements of labels on the first `n`
/// vertices (`from[p]` is the label on vertex `p`), by adjacent swaps.
/// Each swap clears the tokens between the pair and the first essential
/// vertex onto its direction-2 branch, parks one token of the pair on the
/// direction-1 branch and brings everything back in the new order.
pub fn arrangement_path(order: &VertexOrder, from: &[usize], to: &[usize]) -> Result<PlannedPath> {
    let n = from.len();
    let mut sorted_from = from.to_vec();
    sorted_from.sort_unstable();
    let mut sorted_to = to.to_vec();
    sorted_to.sort_unstable();
    if sorted_from != (0..n).collect::<Vec<_>>() || sorted_to != sorted_from {
        return Err(Error::InvalidConfiguration("arrangements must permute 0..n".into()));
    }
    let start: Vec<Point> = {
        let mut pts = vec![Point::Vertex(0); n];
        for (p, &label) in from.iter().enumerate() {
            pts[label] = Point::Vertex(p);
        }
        pts
    };
    if from == to {
        return Ok(PlannedPath::constant(start, true));
    }
    let hub = (0..order.len())
        .find(|&v| order.degree(v) >= 3)
        .ok_or(Error::NoEssentialVertex)?;
    check_hub(order, n)?;
    if hub + 1 < n || (1..=hub).any(|v| order.parent(v) != Some(v - 1)) {
        return Err(Error::NotSufficientlySubdivided(n));
    }
    let (park1, park2) = (branch(order, hub, 1), branch(order, hub, 2));
    let mut target_pos = vec![0; n];
    for (p, &label) in to.iter().enumerate() {
        target_pos[label] = p;
    }
    let mut arr = from.to_vec();
    let mut sh = Shuffler {
        order,
        at: start
            .iter()
            .map(|p| if let Point::Vertex(v) = p { *v } else { unreachable!() })
            .collect(),
        frames: vec![start.clone()],
    };
    loop {
        let Some(p) = (0..n - 1).find(|&p| target_pos[arr[p]] > target_pos[arr[p + 1]]) else {
            break;
        };
        for q in (p + 2..n).rev() {
            sh.park(q, &park2)?;
        }
        sh.park(p + 1, &park1)?;
        sh.park(p, &park2)?;
        sh.unpark(&park1, p);
        for q in p + 1..n {
            sh.unpark(&park2, q);
        }
        arr.swap(p, p + 1);
    }
    let steps = sh.frames.len() - 1;
    let keyframes = sh
        .frames
        .into_iter()
        .enumerate()
        .map(|(i, points)| Keyframe {
            time: ratio(i as i64, steps as i64),
            points,
        })
        .collect();
    let path = PlannedPath {
        keyframes,
        ordered: true,
        stratum: None,
    };
    require_valid(order, &path)?;
    Ok(path)
}

/// Ordered path from label `j` on vertex `j` to label `j` on vertex
/// `perm[j]`, for all `j`.
pub fn permutation_path(order: &VertexOrder, n: usize, perm: &[usize]) -> Result<PlannedPath> {
    if perm.len() != n {
        return Err(Error::InvalidConfiguration(format!(
            "permutation of {} labels, expected {n}",
            perm.len()
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut target = vec![usize::MAX; n];
    for (j, &p) in perm.iter().enumerate() {
        if p >= n || target[p] != usize::MAX {
            return Err(Error::InvalidConfiguration("not a permutation".into()));
        }
        target[p] = j;
    }
    arrangement_path(order, &identity, &target)
}

/// Labelled path from `x` to `y`: `x`'s canonical path, a relabelling of
/// the canonical configuration, then `y`'s canonical path in reverse.
pub fn plan_ordered(order: &VertexOrder, x: &Configuration, y: &Configuration) -> Result<PlannedPath> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfiguration("configurations differ in size".into()));
    }
    if !(0..order.len()).any(|v| order.degree(v) >= 3) {
        return Err(Error::NoEssentialVertex);
    }
    let mut to_hub = canonical_path(order, x)?;
    let mut from_hub = canonical_path(order, y)?;
    to_hub.ordered = true;
    from_hub.ordered = true;
    let mut from = vec![0; x.len()];
    for (i, &j) in ranking(order, x).iter().enumerate() {
        from[i] = j;
    }
    let mut to = vec![0; y.len()];
    for (i, &j) in ranking(order, y).iter().enumerate() {
        to[i] = j;
    }
    let shuffle = arrangement_path(order, &from, &to)?;
    let mut path = PlannedPath::concat(&[to_hub, shuffle, from_hub.reversed()], true);
    path.stratum = Some(stratum(x).1 + stratum(y).1);
    require_valid(order, &path)?;
    Ok(path)
}

/// Random valid configuration of `n` points; edge points use small
/// denominators. Greedy placement restarts when it gets stuck.
pub fn random_configuration<R: Rng>(order: &VertexOrder, n: usize, rng: &mut R) -> Result<Configuration> {
    let edges: Vec<EdgeId> = order.edges().collect();
    for _ in 0..10_000 {
        let mut points: Vec<Point> = Vec::with_capacity(n);
        let mut misses = 0;
        while points.len() < n && misses < 64 {
            let p = if edges.is_empty() || rng.gen_bool(0.5) {
                Point::Vertex(rng.gen_range(0..order.len()))
            } else {
                let den = rng.gen_range(2..=7i64);
                Point::Edge(edges[rng.gen_range(0..edges.len())], ratio(rng.gen_range(1..den), den))
            };
            if points.iter().all(|q| !carriers_meet(order, q, &p)) {
                points.push(p);
            } else {
                misses += 1;
            }
        }
        if points.len() == n {
            return Configuration::new(order, points);
        }
    }
    Err(Error::InvalidConfiguration(format!("could not place {n} points")))
}

/// Largest distance between same-labelled points of two paths over the
/// sample times.
pub fn path_distance(order: &VertexOrder, a: &PlannedPath, b: &PlannedPath, times: &[BigRational]) -> BigRational {
    let mut worst = BigRational::zero();
    for t in times {
        for (p, q) in a.position_at(order, t).iter().zip(b.position_at(order, t).iter()) {
            let d = order.distance(p, q);
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Bound used by the sampled continuity check: moving each input point by
/// at most `delta` inside its cell moves every point of the planned path
/// by at most `LIPSCHITZ_BOUND * delta` at every time.
pub const LIPSCHITZ_BOUND: i64 = 2;

/// Moves every edge point of `x` by `delta` towards the middle of its edge;
/// the result lies in the same stratum as `x`.
pub fn nudge(order: &VertexOrder, x: &Configuration, delta: &BigRational) -> Configuration {
    let half = ratio(1, 2);
    let points = x
        .points
        .iter()
        .map(|p| match p {
            Point::Edge(e, t) => {
                let gap = (&half - t).abs();
                let step = if &gap < delta { gap } else { delta.clone() };
                let t2 = if t < &half { t + step } else { t - step };
                Point::Edge(*e, t2)
            }
            v => v.clone(),
        })
        .collect();
    Configuration::new(order, points).expect("nudging toward edge midpoints keeps carriers")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyframeJson {
    pub time: String,
    pub points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathJson {
    pub ordered: bool,
    pub stratum: Option<usize>,
    pub keyframes: Vec<KeyframeJson>,
}

impl PlannedPath {
    pub fn to_json(&self, order: &VertexOrder) -> PathJson {
        PathJson {
            ordered: self.ordered,
            stratum: self.stratum,
            keyframes: self
                .keyframes
                .iter()
                .map(|k| KeyframeJson {
                    time: k.time.to_string(),
                    points: k.points.iter().map(|p| format_point(order, p)).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_format() {
        let o = y().subdivide_for(2).order();
        let x = Configuration::parse(&o, "v:x, e:c-y@1/3").unwrap();
        assert_eq!(Configuration::parse(&o, &x.format(&o)).unwrap(), x);
        let flipped = Configuration::parse(&o, "v:x,e:y-c@2/3").unwrap();
        assert_eq!(flipped, x);
        assert!(Configuration::parse(&o, "v:c,e:c-y@1/2").is_err());
        assert!(Configuration::parse(&o, "e:c-y@1/1").is_err());
    }

    #[test]
    fn strata() {
        let o = y().order();
        assert_eq!(stratum(&Configuration::canonical(2)).1, 0);
        let x = Configuration::parse(&o, "v:*,e:c-y@1/2").unwrap();
        assert_eq!(stratum(&x).1, 1);
    }

    #[test]
    fn canonical_of_canonical_is_constant() {
        let o = y().subdivide_for(3).order();
        let a = Configuration::canonical(3);
        let p = canonical_path(&o, &a).unwrap();
        assert!(p.keyframes.iter().all(|k| k.points == a.points));
    }

    #[test]
    fn y_two_leaves_to_hub() {
        let o = y().subdivide_for(2).order();
        let x = Configuration::parse(&o, "v:x,v:y").unwrap();
        let p = canonical_path(&o, &x).unwrap();
        assert!(validate_path(&o, &p).valid);
        assert!(Configuration::new(&o, p.end().to_vec())
            .unwrap()
            .same_unordered(&Configuration::canonical(2)));
    }

    #[test]
    fn bad_segments_are_rejected() {
        let o = path3().order();
        let frames = |pts: [Vec<Point>; 2]| PlannedPath {
            keyframes: vec![
                Keyframe {
                    time: BigRational::zero(),
                    points: pts[0].clone(),
                },
                Keyframe {
                    time: BigRational::one(),
                    points: pts[1].clone(),
                },
            ],
            ordered: false,
            stratum: None,
        };
        let slide = frames([
            vec![Point::Vertex(0), Point::Vertex(2)],
            vec![Point::Vertex(1), Point::Vertex(2)],
        ]);
        assert!(validate_path(&o, &slide).valid);
        let jump = frames([
            vec![Point::Vertex(0), Point::Vertex(1)],
            vec![Point::Vertex(2), Point::Vertex(1)],
        ]);
        assert!(!validate_path(&o, &jump).valid);
        let both = frames([
            vec![Point::Vertex(0), Point::Vertex(1)],
            vec![Point::Vertex(1), Point::Vertex(2)],
        ]);
        assert!(!validate_path(&o, &both).valid);
        let clash = frames([
            vec![Point::Vertex(0), Point::Vertex(2)],
            vec![Point::Vertex(2), Point::Vertex(2)],
        ]);
        assert!(!validate_path(&o, &clash).valid);
    }

    #[test]
    fn swap_on_y() {
        let o = y().subdivide_for(2).order();
        let p = permutation_path(&o, 2, &[1, 0]).unwrap();
        assert!(validate_path(&o, &p).valid);
        assert_eq!(p.end(), &[Point::Vertex(1), Point::Vertex(0)]);
        let id = permutation_path(&o, 2, &[0, 1]).unwrap();
        assert_eq!(id.keyframes.len(), 2);
    }

    #[test]
    fn permutations_on_h() {
        let o = h().subdivide_for(4).order();
        let p = permutation_path(&o, 4, &[3, 1, 0, 2]).unwrap();
        assert_eq!(
            p.end(),
            &[Point::Vertex(3), Point::Vertex(1), Point::Vertex(0), Point::Vertex(2)]
        );
        assert!(permutation_path(&path3().order(), 2, &[1, 0]).is_err());
    }

    #[test]
    fn random_plans() {
        let o = h().subdivide_for(3).order();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = random_configuration(&o, 3, &mut rng).unwrap();
            let y = random_configuration(&o, 3, &mut rng).unwrap();
            let p = plan_unordered(&o, &x, &y).unwrap();
            assert_eq!(p.start(), x.points());
            assert!(Configuration::new(&o, p.end().to_vec()).unwrap().same_unordered(&y));
            assert!(plan_unordered(&o, &y, &x).unwrap().reversed().same_trace(&p));
            let q = plan_ordered(&o, &x, &y).unwrap();
            assert_eq!(q.start(), x.points());
            assert_eq!(q.end(), y.points());
        }
    }

    #[test]
    fn nudged_inputs_give_nearby_paths() {
        let o = y().subdivide_for(3).order();
        let x = Configuration::parse(&o, "e:c-c~x.1@1/3,v:*,v:y").unwrap();
        let y2 = Configuration::canonical(3);
        let delta = ratio(1, 100);
        let p = plan_unordered(&o, &x, &y2).unwrap();
        let q = plan_unordered(&o, &nudge(&o, &x, &delta), &y2).unwrap();
        let times: Vec<BigRational> = (0..=64).map(|i| ratio(i, 64)).collect();
        let d = path_distance(&o, &p, &q, &times);
        assert!(d <= delta * BigRational::from_integer(LIPSCHITZ_BOUND.into()));
    }
}
