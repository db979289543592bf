//! Command-line front end. Reports stream as JSON lines; exit codes are
//! 0 (all pass), 1 (violation), 2 (input error), 3 (solver not certified).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::clt::{clt_convergence_table, default_n_list, default_p_grid, csv_float, csv_row, p_sweep, TestFunction, CSV_HEADER};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::interpolation::{interpolate_pair, Time};
use crate::measure::Measure;
use crate::transport::{inf_convolution_q, w1, weak_t2, weak_t2_tensorized, TransportResult};
use crate::verify::dc::{DcFamily, DcForm};
use crate::verify::hwi::{HwiFamily, LsiFamily};
use crate::verify::pl::exhaustive_triples;
use crate::verify::suite::{self, default_geodesy_grid, SuiteConfig};
use crate::verify::{Status, Summary, VerificationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NON_CERTIFIED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dcg", version, about = "Displacement interpolation and entropy inequalities on finite graphs")]
pub struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true, env = "DCG_JOBS")]
    pub jobs: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph inspection.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Binomial interpolation between two vertices.
    Interpolate(InterpolateArgs),
    /// Transport costs and the inf-convolution.
    #[command(subcommand)]
    Transport(TransportCommand),
    /// Seeded verification suites.
    Verify(VerifyArgs),
    /// Gaussian limit of the hypercube modified log-Sobolev inequality.
    Clt(CltArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    Info {
        #[arg(long)]
        graph: String,
    },
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub graph: String,
    /// Vertex index or hypercube bitstring (character i is coordinate i).
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub graph: String,
    /// Inline JSON array or path to a JSON file.
    #[arg(long)]
    pub nu0: String,
    #[arg(long)]
    pub nu1: String,
    /// Per-coordinate cost on a product graph instead of the graph distance.
    #[arg(long)]
    pub tensorized: bool,
}

#[derive(Debug, Subcommand)]
pub enum TransportCommand {
    /// Weak quadratic cost T̃₂(ν₁|ν₀).
    T2(PairArgs),
    /// W₁ for the graph distance.
    W1(PairArgs),
    /// Inf-convolution Qk on a product of complete graphs.
    Q {
        #[arg(long)]
        graph: String,
        /// Inline JSON array or path to a JSON file.
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Dc,
    W1geo,
    Hwi,
    Lsi,
    Te,
    Pl,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Statement family; inferred from the graph when omitted.
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated displacement convexity forms, or `all`; the family's first form by default.
    #[arg(long, value_delimiter = ',')]
    pub form: Option<Vec<String>>,
    /// Comma-separated time grid.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Comma-separated values for exhaustive triples.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    /// Reference measure for exhaustive triples; uniform by default.
    #[arg(long)]
    pub mu: Option<String>,
    /// Re-judge every report against this tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include full witnesses, not only their digests.
    #[arg(long)]
    pub witness: bool,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long, default_value = "tanh")]
    pub g: String,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Comma-separated ascending dimensions; 2⁶ … 2¹² by default.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// One row per p ∈ {0.1, …, 0.9} at the largest n.
    #[arg(long)]
    pub p_sweep: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Output of a command together with its exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

pub fn error_json(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// Parses the process arguments, runs and writes the output; returns the exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_PASS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim() }));
            return EXIT_INPUT;
        }
    };
    match execute(&cli) {
        Ok(out) => match emit(&cli, &out.text) {
            Ok(()) => out.code,
            Err(e) => {
                eprintln!("{}", error_json(&e));
                EXIT_INPUT
            }
        },
        Err(e) => {
            eprintln!("{}", error_json(&e));
            EXIT_INPUT
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

/// Runs a parsed command on a pool of `--jobs` threads.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidParameter("--jobs must be positive".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Graph(GraphCommand::Info { graph }) => graph_info(graph),
        Command::Interpolate(a) => interpolate(a),
        Command::Transport(t) => transport(t),
        Command::Verify(v) => verify(v),
        Command::Clt(c) => clt(c),
    })
}

fn line(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn graph_info(spec: &str) -> Result<Outcome> {
    let g = MetricGraph::from_spec(spec)?;
    let graph = g.graph();
    let layout = graph.layout();
    let info = json!({
        "graph": g.label(),
        "vertices": g.vertex_count(),
        "edges": graph.edge_count(),
        "diameter": g.table().diameter(),
        "factors": layout.factors().iter().map(|f| f.label().to_string()).collect::<Vec<_>>(),
        "family": DcFamily::infer(graph).map(DcFamily::name),
    });
    Ok(Outcome { text: line(&info)?, code: EXIT_PASS })
}

/// A vertex index, or a bitstring of the coordinates on a product of two-point graphs.
pub fn parse_vertex(g: &MetricGraph, s: &str) -> Result<usize> {
    let s = s.trim();
    let layout = g.graph().layout();
    let binary = layout.factors().iter().all(|f| f.vertex_count() == 2);
    let v = if binary && s.len() == layout.len() && s.len() > 1 && s.chars().all(|c| c == '0' || c == '1') {
        let coords: Vec<usize> = s.chars().map(|c| (c == '1') as usize).collect();
        layout.index(&coords)
    } else {
        s.parse().map_err(|_| Error::InvalidParameter(format!("`{s}` is neither a vertex index nor a bitstring")))?
    };
    g.graph().check_vertex(v)?;
    Ok(v)
}

fn read_vector(arg: &str) -> Result<Vec<f64>> {
    let text = if arg.trim_start().starts_with('[') { arg.to_string() } else { fs::read_to_string(arg)? };
    Ok(serde_json::from_str(&text)?)
}

pub fn read_measure(arg: &str) -> Result<Measure> {
    Measure::new(read_vector(arg)?)
}

fn interpolate(a: &InterpolateArgs) -> Result<Outcome> {
    let g = MetricGraph::from_spec(&a.graph)?;
    let (x, y) = (parse_vertex(&g, &a.x)?, parse_vertex(&g, &a.y)?);
    let nu = interpolate_pair(&g, x, y, Time::new(a.t)?)?;
    let out = json!({ "graph": g.label(), "x": x, "y": y, "t": a.t, "measure": nu.weights() });
    Ok(Outcome { text: line(&out)?, code: EXIT_PASS })
}

fn transport_line(kind: &str, g: &MetricGraph, r: &TransportResult) -> Result<Outcome> {
    let out = json!({
        "problem": kind,
        "graph": g.label(),
        "value": r.value,
        "gap": r.gap,
        "iterations": r.iterations,
        "certified": r.certified,
        "coupling": r.witness.to_rows(),
    });
    let code = if r.certified { EXIT_PASS } else { EXIT_NON_CERTIFIED };
    Ok(Outcome { text: line(&out)?, code })
}

fn transport(t: &TransportCommand) -> Result<Outcome> {
    match t {
        TransportCommand::T2(a) | TransportCommand::W1(a) => {
            let g = MetricGraph::from_spec(&a.graph)?;
            let (nu0, nu1) = (read_measure(&a.nu0)?, read_measure(&a.nu1)?);
            if matches!(t, TransportCommand::W1(_)) {
                return transport_line("w1", &g, &w1(&g, &nu0, &nu1)?);
            }
            let r = if a.tensorized { weak_t2_tensorized(g.graph(), &nu0, &nu1)? } else { weak_t2(&g, &nu0, &nu1)? };
            transport_line("t2", &g, &r)
        }
        TransportCommand::Q { graph, k, c } => {
            let g = MetricGraph::from_spec(graph)?;
            let k = read_vector(k)?;
            let q = inf_convolution_q(g.graph(), &k, *c)?;
            let out = json!({
                "problem": "q",
                "graph": g.label(),
                "c": c,
                "values": q.values,
                "gaps": q.gaps,
                "certified": q.certified,
            });
            let code = if q.certified { EXIT_PASS } else { EXIT_NON_CERTIFIED };
            Ok(Outcome { text: line(&out)?, code })
        }
    }
}

fn default_graph(suite: Suite) -> &'static str {
    match suite {
        Suite::Dc | Suite::W1geo | Suite::Lsi | Suite::Te | Suite::All => "hypercube:3",
        Suite::Hwi | Suite::Pl => "hypercube:2",
    }
}

fn rejudge(mut r: VerificationReport, tol: f64) -> VerificationReport {
    if matches!(r.status, Status::Pass | Status::Fail | Status::NonCertified) {
        r.tol = tol;
        r.pass = r.slack >= -tol;
        r.status = if r.pass { Status::Pass } else { Status::Fail };
    }
    r
}

/// Exit code for a batch of reports.
pub fn exit_code(summary: &Summary) -> i32 {
    if summary.fail > 0 {
        EXIT_FAIL
    } else if summary.non_certified > 0 {
        EXIT_NON_CERTIFIED
    } else {
        EXIT_PASS
    }
}

pub const REPORT_CSV_HEADER: &str = "id,index,graph,family,lhs,rhs,slack,tol,pass,status,witness_digest,seed";

fn report_csv(r: &VerificationReport) -> String {
    let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.id,
        r.instance.index,
        r.instance.graph,
        r.instance.family,
        csv_float(r.lhs),
        csv_float(r.rhs),
        csv_float(r.slack),
        csv_float(r.tol),
        r.pass,
        status,
        r.witness_digest,
        r.seed.map(|s| s.to_string()).unwrap_or_default()
    )
}

fn run_suite(a: &VerifyArgs) -> Result<Vec<VerificationReport>> {
    let exhaustive = a.suite == Suite::Pl && a.family.as_deref() == Some("exhaustive");
    let seed = match (a.seed, exhaustive) {
        (Some(s), _) => s,
        (None, true) => 0,
        (None, false) => return Err(Error::InvalidParameter("--seed is required for randomized suites".into())),
    };
    if a.suite == Suite::All {
        return suite::all(a.trials, seed);
    }
    let g = MetricGraph::from_spec(a.graph.as_deref().unwrap_or(default_graph(a.suite)))?;
    let mut cfg = SuiteConfig::new(a.trials, seed);
    if let Some(t) = &a.t {
        cfg.t_grid = t.clone();
    }
    let family = a.family.as_deref();
    match a.suite {
        Suite::Dc => {
            let fam = match family {
                Some(f) => DcFamily::parse(f)?,
                None => DcFamily::infer(g.graph())
                    .ok_or_else(|| Error::InvalidParameter(format!("no displacement convexity family for `{}`", g.label())))?,
            };
            let forms: Vec<DcForm> = match a.form.as_deref() {
                None => fam.forms()[..1].to_vec(),
                Some([all]) if all == "all" => fam.forms().to_vec(),
                Some(fs) => fs.iter().map(|f| DcForm::parse(f)).collect::<Result<_>>()?,
            };
            suite::dc_suite(&g, fam, Some(&forms), &cfg)
        }
        Suite::W1geo => {
            let grid = a.t.clone().unwrap_or_else(default_geodesy_grid);
            suite::w1geo_suite(&g, &grid, &cfg)
        }
        Suite::Hwi => {
            let fam = match family {
                Some(f) => HwiFamily::parse(f)?,
                None if g.vertex_count() == 2 => HwiFamily::TwoPoint,
                None if g.graph().is_complete() => HwiFamily::Complete,
                None => HwiFamily::Product,
            };
            suite::hwi_suite(&g, fam, &cfg)
        }
        Suite::Lsi => {
            let fam = match family {
                Some(f) => LsiFamily::parse(f)?,
                None if g.graph().is_complete() => LsiFamily::Pinsker,
                None => LsiFamily::HypercubeModified,
            };
            suite::lsi_suite(&g, fam, &cfg)
        }
        Suite::Te => match family.unwrap_or("primal") {
            "primal" => suite::te_primal_suite(&g, &cfg),
            "dual" => suite::te_dual_suite(&g, &cfg),
            f => Err(Error::InvalidParameter(format!("unknown transport-entropy family `{f}`"))),
        },
        Suite::Pl => match family.unwrap_or("generator") {
            "generator" => {
                let ts = a.t.clone().unwrap_or_else(|| vec![0.5]);
                let mut out = Vec::new();
                for t in ts {
                    out.extend(suite::pl_generator_suite(&g, t, &cfg)?);
                }
                Ok(out)
            }
            "exhaustive" => {
                let mu = match &a.mu {
                    Some(m) => read_measure(m)?,
                    None => Measure::uniform(g.vertex_count()),
                };
                let values = a.values.clone().unwrap_or_else(|| vec![-1.0, 0.0, 1.0]);
                let times = a.t.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
                let reports = exhaustive_triples(&g, &mu, &values, &times, crate::verify::hwi::HYPERCUBE_C)?;
                Ok(reports.into_iter().enumerate().map(|(i, r)| r.with_index(i, None)).collect())
            }
            f => Err(Error::InvalidParameter(format!("unknown Prekopa-Leindler mode `{f}`"))),
        },
        Suite::All => unreachable!(),
    }
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    if let Some(tol) = a.tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidParameter(format!("--tol must be positive, got {tol}")));
        }
    }
    if a.t.as_ref().is_some_and(|ts| ts.iter().any(|t| !(0.0..=1.0).contains(t))) {
        return Err(Error::InvalidParameter("times must lie in [0, 1]".into()));
    }
    let mut reports = run_suite(a)?;
    if let Some(tol) = a.tol {
        reports = reports.into_iter().map(|r| rejudge(r, tol)).collect();
    }
    if !a.witness {
        reports.iter_mut().for_each(|r| r.witness = None);
    }
    let summary = Summary::of(&reports);
    let mut text = String::new();
    match a.format {
        Format::Json => {
            for r in &reports {
                text.push_str(&line(r)?);
            }
            text.push_str(&line(&json!({ "summary": summary }))?);
        }
        Format::Csv => {
            text.push_str(REPORT_CSV_HEADER);
            text.push('\n');
            reports.iter().for_each(|r| text.push_str(&report_csv(r)));
        }
    }
    Ok(Outcome { text, code: exit_code(&summary) })
}

fn clt(a: &CltArgs) -> Result<Outcome> {
    let g: TestFunction = a.g.parse()?;
    let ns = a.n.clone().unwrap_or_else(default_n_list);
    if a.p_sweep {
        let n = *ns.last().ok_or_else(|| Error::InvalidParameter("empty n list".into()))?;
        let rows = p_sweep(g, n, &default_p_grid())?;
        let holds = rows.iter().all(|r| r.lsi_holds());
        let text = match a.format {
            Format::Csv => {
                let mut s = format!("{CSV_HEADER}\n");
                rows.iter().for_each(|r| s.push_str(&csv_row(r)));
                s
            }
            Format::Json => rows.iter().map(line).collect::<Result<String>>()?,
        };
        return Ok(Outcome { text, code: if holds { EXIT_PASS } else { EXIT_FAIL } });
    }
    let table = clt_convergence_table(g, a.p, &ns)?;
    let text = match a.format {
        Format::Csv => table.to_csv(),
        Format::Json => line(&table)?,
    };
    Ok(Outcome { text, code: if table.lsi_holds { EXIT_PASS } else { EXIT_FAIL } })
}
