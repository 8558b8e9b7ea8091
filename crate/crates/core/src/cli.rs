//! The `braidscape` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arcs::{min_allowable_k, DEFAULT_ARC_BUDGET};
use crate::clouds::CloudDiagram;
use crate::cohomology::homology_oracle;
use crate::complex::{critical_cells, enumerate_cells, reduced_complex_dim, DEFAULT_CELL_CAP};
use crate::error::{Error, Result};
use crate::planner::{plan_ordered, plan_unordered, random_configuration, validate_path, Configuration, PlannedPath};
use crate::tc::{decide_tc_with, verify_certificate_with, TcCertificate, TcCertificateJson, TcOptions};
use crate::tree::{stats, Tree};

pub const MAX_CELLS_ENV: &str = "BRAIDSCAPE_MAX_CELLS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_APPLICABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "braidscape", version, about = "Configuration spaces of points on trees")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Pretty-print JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Cell enumeration cap (overrides BRAIDSCAPE_MAX_CELLS).
    #[arg(long, global = true)]
    max_cells: Option<usize>,
    /// Budget for arc-collection searches.
    #[arg(long, global = true, default_value_t = DEFAULT_ARC_BUDGET)]
    arc_budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Essential-vertex counts and connectivity.
    Stats(TreeArgs),
    /// The tree subdivided so every chain has at least n-1 edges.
    Subdivide(TreeArgs),
    /// All cells of the cube complex, optionally of one dimension.
    Cells {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Critical cells of one dimension.
    Critical {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        dim: usize,
    },
    /// Rational Betti numbers next to critical cell counts.
    Homology {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Topological complexity certificate.
    Tc(TreeArgs),
    /// Smallest allowable arc collection covering the degree-3 vertices.
    Arcs {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Plan a path between two configurations, or check random queries.
    Plan {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, requires = "to")]
        from: Option<String>,
        #[arg(long, requires = "from")]
        to: Option<String>,
        #[arg(long)]
        ordered: bool,
        /// Keyframes as JSON for animation.
        #[arg(long)]
        frames_out: Option<PathBuf>,
        /// Number of random queries when no endpoints are given.
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a certificate written by `tc`.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct TreeArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputHash>,
    pub caps: Caps,
    pub outcome: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Caps {
    pub max_cells: usize,
    pub arc_budget: usize,
}

struct Ctx {
    inputs: Vec<InputHash>,
    opts: TcOptions,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
    }

    fn tree(&mut self, path: &Path) -> Result<Tree> {
        let text = self.read(path)?;
        Tree::parse_json(&text)
    }
}

fn cell_cap(flag: Option<usize>) -> Result<usize> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(MAX_CELLS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("{MAX_CELLS_ENV}={v} is not a count"))),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `--out` or `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let caps = match cell_cap(cli.max_cells) {
        Ok(max_cells) => Caps {
            max_cells,
            arc_budget: cli.arc_budget,
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let mut ctx = Ctx {
        inputs: Vec::new(),
        opts: TcOptions {
            cell_cap: caps.max_cells,
            arc_budget: caps.arc_budget,
        },
    };
    let started = Instant::now();
    let (code, outcome) = match dispatch(&cli.command, &mut ctx) {
        Ok(pair) => pair,
        Err(e) => (EXIT_ERROR, json!({ "error": e.to_string() })),
    };
    let report = RunReport {
        command: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        inputs: ctx.inputs,
        caps,
        outcome,
        elapsed_ms: cli.timing.then(|| started.elapsed().as_millis()),
    };
    let mut text = if cli.pretty {
        serde_json::to_string_pretty(&report)
    } else {
        serde_json::to_string(&report)
    }
    .expect("report serializes");
    text.push('\n');
    let written = match &cli.out {
        Some(path) => write_file(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Malformed(e.to_string())),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_ERROR;
    }
    if code == EXIT_ERROR {
        if let Some(msg) = report.outcome.get("error") {
            let _ = writeln!(stderr, "error: {}", msg.as_str().unwrap_or_default());
        }
    }
    code
}

fn dispatch(command: &Command, ctx: &mut Ctx) -> Result<(i32, Value)> {
    let cap = ctx.opts.cell_cap;
    match command {
        Command::Stats(a) => {
            let tree = ctx.tree(&a.tree)?;
            let (st, conn) = stats(&tree, a.n);
            let mut warnings = Vec::new();
            if !conn.ordered_connected {
                warnings.push(format!(
                    "the tree is an interval: the ordered configuration space of {} points is disconnected",
                    a.n
                ));
            }
            let order = tree.order();
            let essential: Vec<&str> = st.essential.iter().map(|&v| order.id(v)).collect();
            Ok((
                EXIT_OK,
                json!({
                    "n": a.n,
                    "vertices": tree.vertex_count(),
                    "edges": tree.edge_count(),
                    "m": st.m, "r": st.r, "s": st.s,
                    "essential": essential,
                    "sufficiently_subdivided": tree.is_sufficiently_subdivided(a.n),
                    "connectivity": conn,
                    "warnings": warnings,
                }),
            ))
        }
        Command::Subdivide(a) => {
            let tree = ctx.tree(&a.tree)?.subdivide_for(a.n);
            Ok((EXIT_OK, json!({ "n": a.n, "tree": tree.to_file() })))
        }
        Command::Cells { tree, dim } => {
            let order = ctx.tree(&tree.tree)?.subdivide_for(tree.n).order();
            let dims: Vec<usize> = match dim {
                Some(d) => vec![*d],
                None => (0..=tree.n).collect(),
            };
            let cells = enumerate_cells(&order, tree.n, &dims, cap)?;
            let listed: Vec<Vec<String>> = cells.iter().map(|c| c.to_strings(&order)).collect();
            Ok((EXIT_OK, json!({ "n": tree.n, "count": cells.len(), "cells": listed })))
        }
        Command::Critical { tree, dim } => {
            let order = ctx.tree(&tree.tree)?.subdivide_for(tree.n).order();
            let cells = critical_cells(&order, tree.n, *dim, cap)?;
            let listed: Vec<Value> = cells
                .iter()
                .map(|c| {
                    json!({
                        "cell": c.to_strings(&order),
                        "diagram": CloudDiagram::of_cell(&order, c).to_json(&order),
                    })
                })
                .collect();
            Ok((
                EXIT_OK,
                json!({ "n": tree.n, "dim": dim, "count": cells.len(), "cells": listed }),
            ))
        }
        Command::Homology { tree, max_dim } => {
            let order = ctx.tree(&tree.tree)?.subdivide_for(tree.n).order();
            let top = match max_dim {
                Some(d) => *d,
                None => reduced_complex_dim(&order, tree.n, cap)?,
            };
            let betti = homology_oracle(&order, tree.n, top, cap)?;
            let critical: Vec<usize> = (0..=top)
                .map(|k| critical_cells(&order, tree.n, k, cap).map(|c| c.len()))
                .collect::<Result<_>>()?;
            Ok((
                EXIT_OK,
                json!({ "n": tree.n, "betti": betti, "critical_counts": critical, "agree": betti == critical }),
            ))
        }
        Command::Tc(a) => {
            let tree = ctx.tree(&a.tree)?;
            let cert = decide_tc_with(&tree, a.n, &ctx.opts)?;
            let code = if cert.value().is_some() {
                EXIT_OK
            } else {
                EXIT_NOT_APPLICABLE
            };
            Ok((
                code,
                serde_json::to_value(cert.to_json()).expect("certificate serializes"),
            ))
        }
        Command::Arcs { tree } => {
            let order = ctx.tree(tree)?.order();
            let (k, arcs) = min_allowable_k(&order, ctx.opts.arc_budget)?;
            let listed: Vec<_> = arcs.iter().map(|a| a.to_json(&order)).collect();
            Ok((EXIT_OK, json!({ "k": k, "arcs": listed })))
        }
        Command::Plan {
            tree,
            from,
            to,
            ordered,
            frames_out,
            random,
            seed,
        } => {
            let order = ctx.tree(&tree.tree)?.subdivide_for(tree.n).order();
            let plan = |x: &Configuration, y: &Configuration| -> Result<PlannedPath> {
                if *ordered {
                    plan_ordered(&order, x, y)
                } else {
                    plan_unordered(&order, x, y)
                }
            };
            match (from, to) {
                (Some(from), Some(to)) => {
                    let x = Configuration::parse(&order, from)?;
                    let y = Configuration::parse(&order, to)?;
                    if x.len() != tree.n || y.len() != tree.n {
                        return Err(Error::InvalidConfiguration(format!("expected {} points", tree.n)));
                    }
                    let path = plan(&x, &y)?;
                    let frames = path.to_json(&order);
                    if let Some(p) = frames_out {
                        write_file(
                            p,
                            &serde_json::to_string_pretty(&frames.keyframes).expect("frames serialize"),
                        )?;
                    }
                    let validation = validate_path(&order, &path);
                    Ok((
                        EXIT_OK,
                        json!({
                            "ordered": ordered,
                            "stratum": path.stratum,
                            "keyframe_count": path.keyframes.len(),
                            "validation": validation,
                            "path": frames,
                        }),
                    ))
                }
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let mut failures = Vec::new();
                    for i in 0..*random {
                        let x = random_configuration(&order, tree.n, &mut rng)?;
                        let y = random_configuration(&order, tree.n, &mut rng)?;
                        let path = plan(&x, &y)?;
                        let v = validate_path(&order, &path);
                        let endpoints = if *ordered {
                            path.start() == x.points() && path.end() == y.points()
                        } else {
                            path.start() == x.points()
                                && Configuration::new(&order, path.end().to_vec())?.same_unordered(&y)
                        };
                        if !v.valid || !endpoints {
                            failures.push(json!({
                                "query": i,
                                "from": x.format(&order),
                                "to": y.format(&order),
                                "violation": v.first_violation,
                                "endpoints_match": endpoints,
                            }));
                        }
                    }
                    let code = if failures.is_empty() { EXIT_OK } else { EXIT_ERROR };
                    Ok((
                        code,
                        json!({ "ordered": ordered, "seed": seed, "queries": random, "failures": failures }),
                    ))
                }
            }
        }
        Command::Verify { certificate } => {
            let text = ctx.read(certificate)?;
            let value: Value = serde_json::from_str(&text).map_err(|e| Error::Malformed(e.to_string()))?;
            // Accept either a bare certificate or a report from `tc`.
            let body = value.get("outcome").filter(|o| o.is_object()).cloned().unwrap_or(value);
            let json: TcCertificateJson = serde_json::from_value(body).map_err(|e| Error::Malformed(e.to_string()))?;
            let cert = TcCertificate::from_json(&json)?;
            let report = verify_certificate_with(&cert, &ctx.opts)?;
            let code = if report.passed() { EXIT_OK } else { EXIT_ERROR };
            Ok((
                code,
                json!({ "value": cert.value(), "passed": report.passed(), "checks": report.checks }),
            ))
        }
    }
}
