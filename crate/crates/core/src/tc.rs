//! Topological complexity of configuration spaces of trees: the decision
//! procedure, the pair of critical cells behind each lower bound, and an
//! independent re-verification of finished certificates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arcs::{
    chain_through, find_case2a, find_case2b, min_allowable_k, ArcCertificate, ArcCertificateJson, CaseTag, OrientedArc,
    DEFAULT_ARC_BUDGET,
};
use crate::clouds::{components, lub, one_cell_factors, CloudDiagram, Components, DiagramJson};
use crate::cohomology::Ring;
use crate::complex::{classify_cell, critical_cells, Cell, CellClass, DEFAULT_CELL_CAP};
use crate::error::{Error, Result};
use crate::tree::{Tree, TreeFile, TreeStats, VertexOrder};

/// Subdivision used for every certificate: enough for `n` points and never
/// fewer than three edges between essential vertices, so each chain keeps a
/// free inner vertex once the certificate's edges are placed.
pub fn certificate_subdivision(n: usize) -> usize {
    n.max(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcOptions {
    pub cell_cap: usize,
    pub arc_budget: usize,
}

impl Default for TcOptions {
    fn default() -> TcOptions {
        TcOptions {
            cell_cap: DEFAULT_CELL_CAP,
            arc_budget: DEFAULT_ARC_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotApplicableReason {
    BelowStatement1Threshold,
    NoCase2Certificate,
    ConnectivityFailure,
}

impl std::fmt::Display for NotApplicableReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NotApplicableReason::BelowStatement1Threshold => "below_statement1_threshold",
            NotApplicableReason::NoCase2Certificate => "no_case2_certificate",
            NotApplicableReason::ConnectivityFailure => "connectivity_failure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliesTo {
    pub unordered: bool,
    pub ordered: bool,
}

/// A determined value together with the data that proves it.
///
/// `case` is `None` when the value is 1 for a trivial reason (one point, or
/// no essential vertex); then there are no cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Determination {
    pub value: usize,
    pub case: Option<CaseTag>,
    pub no_degree_three: bool,
    pub arcs: Option<ArcCertificate>,
    pub phi: Option<Cell>,
    pub psi: Option<Cell>,
    pub phi_factors: Vec<CloudDiagram>,
    pub psi_factors: Vec<CloudDiagram>,
    pub applies_to: AppliesTo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TcOutcome {
    Determined(Box<Determination>),
    NotApplicable {
        reason: NotApplicableReason,
        diagnostics: String,
    },
}

/// Outcome for `n` points on `tree`, which is the input tree subdivided by
/// [`certificate_subdivision`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcCertificate {
    pub n: usize,
    pub tree: Tree,
    pub stats: TreeStats,
    pub outcome: TcOutcome,
}

impl TcCertificate {
    pub fn value(&self) -> Option<usize> {
        match &self.outcome {
            TcOutcome::Determined(d) => Some(d.value),
            TcOutcome::NotApplicable { .. } => None,
        }
    }
}

/// Builds the two critical cells dictated by `cert` for `n` points.
pub fn build_phi_psi(order: &VertexOrder, n: usize, cert: &ArcCertificate) -> Result<(Cell, Cell)> {
    let stats = TreeStats::compute(order);
    let mut phi = Builder::default();
    let mut psi = Builder::default();
    let high: Vec<usize> = stats
        .essential
        .iter()
        .copied()
        .filter(|&v| order.degree(v) > 3)
        .collect();
    match cert.case {
        CaseTag::Statement1 => {
            for &v in &stats.essential {
                phi.edge_at(order, v, 2, 1)?;
                if order.degree(v) > 3 {
                    psi.edge_at(order, v, 3, 2)?;
                } else {
                    psi.edge_at(order, v, 2, 1)?;
                }
            }
            let extra = cert.k.min(n.saturating_sub(2 * stats.m));
            for arc in &cert.arcs[..extra] {
                phi.vertex_near_end(order, arc, true)?;
                psi.vertex_near_end(order, arc, false)?;
            }
        }
        CaseTag::Case2a => {
            let q = cert.half;
            for &v in high.iter().take(q.min(stats.r)) {
                phi.edge_at(order, v, 2, 1)?;
                psi.edge_at(order, v, 3, 2)?;
            }
            let spare = q.saturating_sub(stats.r);
            if cert.vertex_set.len() < 2 * spare {
                return Err(Error::InconsistentCertificate("too few degree-3 vertices".into()));
            }
            for &v in &cert.vertex_set[..spare] {
                phi.edge_at(order, v, 2, 1)?;
            }
            for &v in &cert.vertex_set[spare..2 * spare] {
                psi.edge_at(order, v, 2, 1)?;
            }
            if cert.parity == 1 {
                phi.vertex(order, 0)?;
                psi.vertex(order, 0)?;
            }
        }
        CaseTag::Case2bEven | CaseTag::Case2bOdd => {
            let mut ends = BTreeSet::new();
            for arc in &cert.arcs {
                let (Some(a), Some(b)) = (arc.initial_vertex(), arc.terminal_vertex()) else {
                    return Err(Error::InconsistentCertificate("arc endpoints must be vertices".into()));
                };
                phi.edge_at(order, a, 2, 1)?;
                psi.edge_at(order, b, 2, 1)?;
                ends.insert(a);
                ends.insert(b);
            }
            for &v in high.iter().filter(|v| !ends.contains(v)) {
                phi.edge_at(order, v, 2, 1)?;
                psi.edge_at(order, v, 3, 2)?;
            }
            let count = cert
                .half
                .checked_sub(cert.r_prime + cert.k)
                .ok_or_else(|| Error::InconsistentCertificate("q < r' + k".into()))?;
            let mut pool: Vec<usize> = cert.primed_set.iter().chain(&cert.vertex_set).copied().collect();
            pool.sort_unstable();
            pool.dedup();
            if pool.len() < count {
                return Err(Error::InconsistentCertificate("too few degree-3 vertices".into()));
            }
            for &v in &pool[..count] {
                phi.edge_at(order, v, 2, 1)?;
                psi.edge_at(order, v, 2, 1)?;
            }
            if cert.case == CaseTag::Case2bOdd {
                let arc0 = cert
                    .arc0
                    .as_ref()
                    .ok_or_else(|| Error::InconsistentCertificate("odd case needs an extra arc".into()))?;
                phi.vertex_near_end(order, arc0, true)?;
                psi.vertex_near_end(order, arc0, false)?;
            }
        }
    }
    phi.fill(order, n)?;
    psi.fill(order, n)?;
    Ok((phi.finish(order)?, psi.finish(order)?))
}

#[derive(Default)]
struct Builder {
    edges: Vec<crate::tree::EdgeId>,
    vertices: Vec<usize>,
}

impl Builder {
    fn edge_at(&mut self, order: &VertexOrder, v: usize, dir: usize, witness_dir: usize) -> Result<()> {
        let missing = || Error::InconsistentCertificate(format!("{} has no direction {dir}", order.id(v)));
        let e = order.edge_in_direction(v, dir).ok_or_else(missing)?;
        let w = order.edge_in_direction(v, witness_dir).ok_or_else(missing)?.tau();
        self.edges.push(e);
        self.vertices.push(w);
        Ok(())
    }

    fn vertex(&mut self, order: &VertexOrder, v: usize) -> Result<()> {
        if self.occupied(order, v) {
            return Err(Error::InconsistentCertificate(format!(
                "{} is already used",
                order.id(v)
            )));
        }
        self.vertices.push(v);
        Ok(())
    }

    fn occupied(&self, order: &VertexOrder, v: usize) -> bool {
        self.vertices.contains(&v) || self.edges.iter().any(|&e| e.0 == v || order.iota(e) == v)
    }

    /// Adds the smallest unused vertex of the cloud holding the initial
    /// (or terminal) point of `arc`. A point caught on a removed edge is
    /// pushed along its chain into the free part.
    fn vertex_near_end(&mut self, order: &VertexOrder, arc: &OrientedArc, initial: bool) -> Result<()> {
        let comps = components(order, &self.edges);
        let path = arc.path();
        let (at, next, inside) = if initial {
            (path[0], path[1], arc.start_inside())
        } else {
            (path[path.len() - 1], path[path.len() - 2], arc.end_inside())
        };
        let cloud = match (inside, comps.label[at]) {
            (false, Some(c)) => Some(c),
            _ => chain_through(order, at, next).iter().find_map(|&v| comps.label[v]),
        }
        .ok_or_else(|| Error::InconsistentCertificate("arc endpoint lies in no cloud".into()))?;
        let v = self
            .first_unused(&comps, Some(cloud))
            .ok_or_else(|| Error::InconsistentCertificate("cloud at arc endpoint is full".into()))?;
        self.vertices.push(v);
        Ok(())
    }

    fn first_unused(&self, comps: &Components, cloud: Option<usize>) -> Option<usize> {
        (0..comps.label.len()).find(|&v| {
            comps.label[v].is_some_and(|c| cloud.map_or(true, |want| want == c)) && !self.vertices.contains(&v)
        })
    }

    /// Tops the cell up to `n` members with the smallest free vertices.
    fn fill(&mut self, order: &VertexOrder, n: usize) -> Result<()> {
        let comps = components(order, &self.edges);
        while self.edges.len() + self.vertices.len() < n {
            let v = self
                .first_unused(&comps, None)
                .ok_or_else(|| Error::InconsistentCertificate("tree too small for n points".into()))?;
            self.vertices.push(v);
        }
        if self.edges.len() + self.vertices.len() > n {
            return Err(Error::InconsistentCertificate(
                "construction uses more than n points".into(),
            ));
        }
        Ok(())
    }

    fn finish(self, order: &VertexOrder) -> Result<Cell> {
        Cell::new(order, self.vertices, self.edges)
            .map_err(|e| Error::InconsistentCertificate(format!("constructed cell is invalid: {e}")))
    }
}

pub fn decide_tc(tree: &Tree, n: usize) -> Result<TcCertificate> {
    decide_tc_with(tree, n, &TcOptions::default())
}

pub fn decide_tc_with(tree: &Tree, n: usize, opts: &TcOptions) -> Result<TcCertificate> {
    if n == 0 {
        return Err(Error::InvalidConfiguration("need at least one point".into()));
    }
    let tree = tree.subdivide_for(certificate_subdivision(n));
    let order = tree.order();
    let stats = TreeStats::compute(&order);
    let conn = stats.connectivity(n);
    let applies_to = AppliesTo {
        unordered: conn.unordered_connected,
        ordered: conn.ordered_connected,
    };
    let done = |outcome| {
        Ok(TcCertificate {
            n,
            tree: tree.clone(),
            stats: stats.clone(),
            outcome,
        })
    };
    if !conn.unordered_connected {
        return done(TcOutcome::NotApplicable {
            reason: NotApplicableReason::ConnectivityFailure,
            diagnostics: "unordered configuration space is disconnected".into(),
        });
    }
    if n == 1 || stats.m == 0 {
        let det = Determination {
            value: 1,
            case: None,
            no_degree_three: stats.s == 0,
            arcs: None,
            phi: None,
            psi: None,
            phi_factors: Vec::new(),
            psi_factors: Vec::new(),
            applies_to,
        };
        let cert = TcCertificate {
            n,
            tree: tree.clone(),
            stats: stats.clone(),
            outcome: TcOutcome::Determined(Box::new(det)),
        };
        require_verified(&cert, opts)?;
        return Ok(cert);
    }
    let m = stats.m;
    let arc_cert = if n >= 2 * m {
        let (k, arcs) = min_allowable_k(&order, opts.arc_budget)?;
        if n < 2 * m + k {
            return done(TcOutcome::NotApplicable {
                reason: NotApplicableReason::BelowStatement1Threshold,
                diagnostics: format!("2m = {} <= n = {n} < 2m + k = {}", 2 * m, 2 * m + k),
            });
        }
        ArcCertificate {
            case: CaseTag::Statement1,
            half: m,
            parity: 0,
            k,
            arcs,
            arc0: None,
            vertex_set: stats
                .essential
                .iter()
                .copied()
                .filter(|&v| order.degree(v) == 3)
                .collect(),
            primed_set: Vec::new(),
            r_prime: stats.r,
            s_prime: 0,
        }
    } else {
        let (q, parity) = (n / 2, n % 2);
        match find_case2a(&order, &stats, q, parity) {
            Some(c) => c,
            None => match find_case2b(&order, &stats, q, parity, opts.arc_budget)? {
                Some(c) => c,
                None => {
                    return done(TcOutcome::NotApplicable {
                        reason: NotApplicableReason::NoCase2Certificate,
                        diagnostics: format!(
                            "n = {n} = 2*{q}+{parity} < 2m = {}, s = {} < 2(q - r) = {}, and no arcs qualify",
                            2 * m,
                            stats.s,
                            2 * (q - stats.r)
                        ),
                    })
                }
            },
        }
    };
    let (phi, psi) = build_phi_psi(&order, n, &arc_cert)?;
    let phi_factors = one_cell_factors(&order, &CloudDiagram::of_cell(&order, &phi))?;
    let psi_factors = one_cell_factors(&order, &CloudDiagram::of_cell(&order, &psi))?;
    let det = Determination {
        value: 2 * arc_cert.half + 1,
        case: Some(arc_cert.case),
        no_degree_three: stats.s == 0,
        arcs: Some(arc_cert),
        phi: Some(phi),
        psi: Some(psi),
        phi_factors,
        psi_factors,
        applies_to,
    };
    let cert = TcCertificate {
        n,
        tree,
        stats,
        outcome: TcOutcome::Determined(Box::new(det)),
    };
    require_verified(&cert, opts)?;
    Ok(cert)
}

fn require_verified(cert: &TcCertificate, opts: &TcOptions) -> Result<()> {
    let report = verify_certificate_with(cert, opts)?;
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Error::InconsistentCertificate(format!("{}: {}", c.name, c.detail))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Records a check; returns whether it passed.
    fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        passed
    }
}

pub fn verify_certificate(cert: &TcCertificate) -> Result<VerificationReport> {
    verify_certificate_with(cert, &TcOptions::default())
}

/// Re-checks a determined certificate from scratch. Checks stop at the
/// first failure, which the report names. A `NotApplicable` certificate
/// has nothing to verify and yields an empty report.
pub fn verify_certificate_with(cert: &TcCertificate, opts: &TcOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let TcOutcome::Determined(det) = &cert.outcome else {
        return Ok(report);
    };
    let order = cert.tree.order();
    let n = cert.n;
    let stats = TreeStats::compute(&order);
    if !report.record(
        "stats",
        stats == cert.stats,
        format!("m = {}, r = {}, s = {}", stats.m, stats.r, stats.s),
    ) {
        return Ok(report);
    }
    if !report.record(
        "subdivision",
        cert.tree.is_sufficiently_subdivided(n),
        "tree is sufficiently subdivided",
    ) {
        return Ok(report);
    }
    let top = if det.case.is_none() { 0 } else { stats.m.min(n / 2) };
    if !report.record(
        "value",
        det.value == 2 * top + 1,
        format!("value {} against top dimension {top}", det.value),
    ) {
        return Ok(report);
    }
    let above = critical_cells(&order, n, top + 1, opts.cell_cap)?;
    if !report.record(
        "upper_bound",
        above.is_empty(),
        format!("{} critical cells of dimension {}", above.len(), top + 1),
    ) {
        return Ok(report);
    }
    if det.case.is_none() {
        report.record("trivial", n == 1 || stats.m == 0, "one point or no essential vertex");
        return Ok(report);
    }
    if let Some(arcs) = &det.arcs {
        let ok = arcs.check(&order, n);
        let detail = match &ok {
            Ok(()) => format!("{} hypotheses hold", arcs.case),
            Err(e) => e.to_string(),
        };
        if !report.record("arcs", ok.is_ok() && Some(arcs.case) == det.case, detail) {
            return Ok(report);
        }
    }
    let (Some(phi), Some(psi)) = (&det.phi, &det.psi) else {
        report.record("cells", false, "missing cells");
        return Ok(report);
    };
    for (name, cell) in [("phi_critical", phi), ("psi_critical", psi)] {
        let class = classify_cell(&order, cell);
        let ok = class == CellClass::Critical && cell.dim() == top && cell.size() == n;
        if !report.record(name, ok, format!("{class} cell of dimension {}", cell.dim())) {
            return Ok(report);
        }
    }
    let mut all: Vec<CloudDiagram> = det.phi_factors.clone();
    all.extend(det.psi_factors.iter().cloned());
    let shape_ok =
        det.phi_factors.len() == top && det.psi_factors.len() == top && all.iter().all(|d| d.dim() == 1 && d.n() == n);
    if !report.record("factor_shape", shape_ok, format!("{} factors of degree 1", all.len())) {
        return Ok(report);
    }
    let distinct = all.iter().collect::<BTreeSet<_>>().len() == all.len();
    if !report.record(
        "factors_distinct",
        distinct,
        if distinct {
            "all factor classes differ"
        } else {
            "two factor classes coincide"
        },
    ) {
        return Ok(report);
    }
    for (name, cell, factors) in [
        ("phi_factors", phi, &det.phi_factors),
        ("psi_factors", psi, &det.psi_factors),
    ] {
        let ub = lub(&order, factors);
        let ok = matches!(&ub, Ok(Some(d)) if *d == CloudDiagram::of_cell(&order, cell));
        if !report.record(name, ok, "least upper bound of the factors is the cell's class") {
            return Ok(report);
        }
    }
    let ring = Ring::with_top_degree(&order, n, top);
    let product = ring.zero_divisor_product(&all)?;
    report.record(
        "zero_divisor_product",
        !product.is_zero(),
        format!("product of {} zero-divisors has {} terms", all.len(), product.len()),
    );
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OutcomeJson {
    Determined {
        value: usize,
        case: Option<CaseTag>,
        no_degree_three: bool,
        applies_to: AppliesTo,
        arcs: Option<ArcCertificateJson>,
        phi: Option<Vec<String>>,
        psi: Option<Vec<String>>,
        phi_factors: Vec<DiagramJson>,
        psi_factors: Vec<DiagramJson>,
    },
    NotApplicable {
        reason: NotApplicableReason,
        diagnostics: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcCertificateJson {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub s: usize,
    pub tree: TreeFile,
    #[serde(flatten)]
    pub outcome: OutcomeJson,
}

impl TcCertificate {
    pub fn to_json(&self) -> TcCertificateJson {
        let order = self.tree.order();
        let outcome = match &self.outcome {
            TcOutcome::Determined(d) => OutcomeJson::Determined {
                value: d.value,
                case: d.case,
                no_degree_three: d.no_degree_three,
                applies_to: d.applies_to,
                arcs: d.arcs.as_ref().map(|a| a.to_json(&order)),
                phi: d.phi.as_ref().map(|c| c.to_strings(&order)),
                psi: d.psi.as_ref().map(|c| c.to_strings(&order)),
                phi_factors: d.phi_factors.iter().map(|f| f.to_json(&order)).collect(),
                psi_factors: d.psi_factors.iter().map(|f| f.to_json(&order)).collect(),
            },
            TcOutcome::NotApplicable { reason, diagnostics } => OutcomeJson::NotApplicable {
                reason: *reason,
                diagnostics: diagnostics.clone(),
            },
        };
        TcCertificateJson {
            n: self.n,
            m: self.stats.m,
            r: self.stats.r,
            s: self.stats.s,
            tree: self.tree.to_file(),
            outcome,
        }
    }

    pub fn from_json(json: &TcCertificateJson) -> Result<TcCertificate> {
        let tree = Tree::from_file(&json.tree)?;
        let order = tree.order();
        let stats = TreeStats {
            m: json.m,
            r: json.r,
            s: json.s,
            essential: TreeStats::compute(&order).essential,
        };
        let n = json.n;
        let outcome = match &json.outcome {
            OutcomeJson::Determined {
                value,
                case,
                no_degree_three,
                applies_to,
                arcs,
                phi,
                psi,
                phi_factors,
                psi_factors,
            } => {
                let cell = |c: &Option<Vec<String>>| c.as_ref().map(|c| Cell::parse(&order, c)).transpose();
                let diagrams = |fs: &[DiagramJson]| {
                    fs.iter()
                        .map(|f| CloudDiagram::from_json(&order, n, f))
                        .collect::<Result<Vec<_>>>()
                };
                TcOutcome::Determined(Box::new(Determination {
                    value: *value,
                    case: *case,
                    no_degree_three: *no_degree_three,
                    arcs: arcs
                        .as_ref()
                        .map(|a| ArcCertificate::from_json(&order, a))
                        .transpose()?,
                    phi: cell(phi)?,
                    psi: cell(psi)?,
                    phi_factors: diagrams(phi_factors)?,
                    psi_factors: diagrams(psi_factors)?,
                    applies_to: *applies_to,
                }))
            }
            OutcomeJson::NotApplicable { reason, diagnostics } => TcOutcome::NotApplicable {
                reason: *reason,
                diagnostics: diagnostics.clone(),
            },
        };
        Ok(TcCertificate {
            n,
            tree,
            stats,
            outcome,
        })
    }
}
