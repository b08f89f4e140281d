//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on domain errors (bad graph, non-lumpable
//! partition, non-convergence, ...), 2 on usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;

use crate::chain::analyze_detailed;
use crate::error::Error;
use crate::graph::{de_bruijn, parse_graph, LabeledGraph};
use crate::rd::{self, RateReport};
use crate::sim::{self, SimMode};
use crate::source::{decimal, rational_to_f64, SourceModel};
use crate::statespace::{StateSpace, DEFAULT_STATE_CAP};
use crate::symmetry::{induced_fibers, quotient, quotient_analyze, PermutationGroup};
use crate::viterbi;

/// The order-3 example graph exactly as shipped in `data/debruijn8.g`.
pub const EXAMPLE_DEBRUIJN8_FILE: &str = include_str!("../data/debruijn8.g");
/// The 8-element coordinate permutation group of the example graph.
pub const EXAMPLE_DEBRUIJN8_GROUP: &str = include_str!("../data/pi8.perm");

#[derive(Debug, Parser)]
#[command(name = "tcq", version, about = "Exact Hamming distortion of Viterbi-encoded trellis coded quantizers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute D(G) exactly.
    Analyze(AnalyzeArgs),
    /// List the reduced state space and its arc table.
    Enumerate(EnumerateArgs),
    /// Estimate D(G) by Monte Carlo.
    Simulate(SimulateArgs),
    /// Lump the chain by a vertex permutation group and recompute D(G).
    Quotient(QuotientArgs),
    /// Distortion-rate function D(R) of a memoryless source.
    Rd(RdArgs),
    /// Write a labelled binary de Bruijn graph.
    GenDebruijn(GenArgs),
    /// Viterbi-encode a symbol sequence.
    Encode(EncodeArgs),
}

#[derive(Debug, Args)]
pub struct GraphArg {
    /// Graph description file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Cap on the number of enumerated states.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub max_states: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    /// `uniform` or `sym:p,sym:p,...` with rational p.
    #[arg(long, default_value = "uniform")]
    pub source: String,
    /// Also compute D(R) at the graph's rate and report the gap.
    #[arg(long)]
    pub with_rd: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Emit `key=value` lines.
    #[arg(long)]
    pub porcelain: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub graph: GraphArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long, default_value = "uniform")]
    pub source: String,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restart each batch from the zero vector and spread batches over this many threads.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Also compute the exact D(G) and the z-score.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub porcelain: bool,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long, default_value = "uniform")]
    pub source: String,
    /// Permutation file: one permutation of 0..n-1 per line.
    #[arg(long)]
    pub group: PathBuf,
    #[arg(long)]
    pub porcelain: bool,
}

#[derive(Debug, Args)]
pub struct RdArgs {
    /// Alphabet size, or a comma-separated symbol list.
    #[arg(long)]
    pub alphabet: String,
    #[arg(long, default_value = "uniform")]
    pub source: String,
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub porcelain: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Builtin graph name (`paper-example`).
    #[arg(long, conflicts_with_all = ["order", "labels"])]
    pub builtin: Option<String>,
    #[arg(long, requires = "labels")]
    pub order: Option<u32>,
    /// Comma-separated edge labels in de Bruijn edge order.
    #[arg(long, requires = "order")]
    pub labels: Option<String>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma- or whitespace-separated source symbols.
    #[arg(long, conflicts_with = "input")]
    pub symbols: Option<String>,
    /// File of whitespace-separated source symbols.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Cross-check against exhaustive path enumeration.
    #[arg(long)]
    pub brute_force: bool,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

/// Parses `argv` (including the program name), runs the command, and
/// returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: output: {e}");
                1
            }
        },
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Quotient(a) => cmd_quotient(a),
        Command::Rd(a) => cmd_rd(a),
        Command::GenDebruijn(a) => cmd_gen(a),
        Command::Encode(a) => cmd_encode(a),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads a graph and rejects anything that is not strongly connected and aperiodic.
fn load_graph(path: &Path) -> std::result::Result<LabeledGraph, Failure> {
    let g = parse_graph(&read(path)?)?;
    let report = g.validate();
    if !report.strongly_connected {
        return Err(Error::InvalidGraph("not strongly connected".into()).into());
    }
    if !report.aperiodic {
        return Err(Error::InvalidGraph("periodic (gcd of cycle lengths > 1)".into()).into());
    }
    Ok(g)
}

/// Aligned `key value` or `key=value` lines.
struct Report {
    porcelain: bool,
    fields: Vec<(&'static str, String)>,
}

impl Report {
    fn new(porcelain: bool) -> Self {
        Self {
            porcelain,
            fields: Vec::new(),
        }
    }

    fn field(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.fields.push((key, value.to_string()));
        self
    }

    fn render(&self, human_tail: &str) -> String {
        let mut s = String::new();
        if self.porcelain {
            for (k, v) in &self.fields {
                let _ = writeln!(s, "{k}={v}");
            }
        } else {
            for (k, v) in &self.fields {
                let _ = writeln!(s, "{k:<18} {v}");
            }
            s.push_str(human_tail);
        }
        s
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.10}")
}

fn cmd_analyze(a: AnalyzeArgs) -> Outcome {
    let g = load_graph(&a.graph.graph)?;
    let src = SourceModel::parse(&a.source, g.alphabet())?;
    let analysis = analyze_detailed(&g, &src, a.graph.max_states)?;
    let r = &analysis.report;
    let mut rep = Report::new(a.porcelain);
    rep.field("vertices", g.vertex_count())
        .field("edges", g.edges().len())
        .field("states", r.state_count)
        .field("k", r.k)
        .field("classes", r.class_count)
        .field("unique", r.unique);
    match r.rate {
        Some(rate) => rep.field("rate", rate),
        None => rep.field("rate", "non-uniform"),
    };
    rep.field("distortion", &r.distortion)
        .field("distortion_decimal", r.distortion_decimal());
    let mut tail = format!("D(G) = {} = {}\n", r.distortion, r.distortion_decimal());
    if !r.unique {
        tail.push_str("warning: several closed classes; q is the Cesàro limit from the zero vector\n");
    }
    if a.with_rd {
        let rate = r
            .rate
            .ok_or(Error::InvalidGraph("D(R) needs a uniform out-degree".into()))?;
        let point = rd::distortion_rate(&src, rate.as_f64(), a.tol)?;
        let dg = rational_to_f64(&r.distortion);
        let gap = rd::gap_report(dg, &point, a.tol)?;
        rep.field("dr", fmt_f64(gap.dr)).field("gap", fmt_f64(gap.gap));
        let _ = writeln!(tail, "D(R) = {} at R = {rate}", fmt_f64(gap.dr));
        let _ = writeln!(tail, "gap  = {} (D(G) >= D(R) holds)", fmt_f64(gap.gap));
    }
    Ok(rep.render(&tail))
}

fn cmd_enumerate(a: EnumerateArgs) -> Outcome {
    let g = load_graph(&a.graph.graph)?;
    let ss = StateSpace::enumerate_with_cap(&g, a.graph.max_states)?;
    Ok(ss.to_text())
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let g = load_graph(&a.graph.graph)?;
    let src = SourceModel::parse(&a.source, g.alphabet())?;
    let mode = match a.parallel {
        Some(0) => return Err(Failure::Usage("--parallel needs at least one worker".into())),
        Some(workers) => SimMode::Parallel { workers },
        None => SimMode::Sequential,
    };
    let r = sim::simulate(&g, &src, a.n, a.seed, mode)?;
    let mut rep = Report::new(a.porcelain);
    rep.field("n", r.n)
        .field("seed", r.seed)
        .field("mode", match mode {
            SimMode::Sequential => "sequential".to_string(),
            SimMode::Parallel { .. } => "batch-restart".to_string(),
        })
        .field("increments", r.increments)
        .field("estimate", fmt_f64(r.estimate))
        .field("stderr", fmt_f64(r.stderr))
        .field("batches", r.batches);
    if a.exact {
        let exact = analyze_detailed(&g, &src, a.graph.max_states)?.report;
        let value = exact.distortion.to_f64().unwrap_or(f64::NAN);
        rep.field("exact", &exact.distortion)
            .field("z", format!("{:.4}", r.z_score(value)));
    }
    Ok(rep.render(""))
}

fn cmd_quotient(a: QuotientArgs) -> Outcome {
    let g = load_graph(&a.graph.graph)?;
    let src = SourceModel::parse(&a.source, g.alphabet())?;
    let group = PermutationGroup::parse(&read(&a.group)?, g.vertex_count())?;
    let ss = StateSpace::enumerate_with_cap(&g, a.graph.max_states)?;
    let fp = induced_fibers(&ss, &group)?;
    let qc = quotient(&ss, &src, &fp)?;
    let qa = quotient_analyze(&qc)?;
    let mut s = String::new();
    if a.porcelain {
        let _ = writeln!(s, "group_order={}", group.order());
        let _ = writeln!(s, "states={}", ss.len());
        let _ = writeln!(s, "fibers={}", fp.len());
        let _ = writeln!(s, "lumpable={}", qc.lumpable);
        for (f, members) in fp.fibers.iter().enumerate() {
            let rep: String = fp.representatives[f].0.iter().map(u32::to_string).collect();
            let _ = writeln!(
                s,
                "fiber.{f}=size:{} rep:{} q:{} absorb:{}",
                members.len(),
                rep,
                qa.q[f],
                qc.super_absorb()[f]
            );
        }
        let _ = writeln!(s, "distortion={}", qa.distortion);
        let _ = writeln!(s, "distortion_decimal={}", decimal(&qa.distortion, 10));
    } else {
        let _ = writeln!(s, "group order  {}", group.order());
        let _ = writeln!(s, "states       {}", ss.len());
        let _ = writeln!(s, "fibers       {}", fp.len());
        let _ = writeln!(s, "lumpable     {}", qc.lumpable);
        let _ = writeln!(s, "fiber size representative q absorb");
        for (f, members) in fp.fibers.iter().enumerate() {
            let rep: String = fp.representatives[f].0.iter().map(u32::to_string).collect();
            let _ = writeln!(
                s,
                "{f} {} {} {} {}",
                members.len(),
                rep,
                qa.q[f],
                qc.super_absorb()[f]
            );
        }
        let _ = writeln!(
            s,
            "D(G) = {} = {}",
            qa.distortion,
            decimal(&qa.distortion, 10)
        );
    }
    Ok(s)
}

fn cmd_rd(a: RdArgs) -> Outcome {
    let alphabet: Vec<String> = match a.alphabet.trim().parse::<usize>() {
        Ok(m) => (0..m).map(|i| i.to_string()).collect(),
        Err(_) => a
            .alphabet
            .split(',')
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty())
            .collect(),
    };
    if alphabet.len() < 2 {
        return Err(Failure::Usage("--alphabet needs at least 2 symbols".into()));
    }
    let src = SourceModel::parse(&a.source, &alphabet)?;
    let point = rd::blahut(&src, a.rate, a.tol)?;
    let mut rep = Report::new(a.porcelain);
    rep.field("alphabet", alphabet.len())
        .field("rate", fmt_f64(point.rate))
        .field("distortion", fmt_f64(point.distortion))
        .field("slope", fmt_f64(point.slope))
        .field("tolerance", point.tolerance);
    let mut tail = format!("D(R) = {} at R = {}\n", fmt_f64(point.distortion), a.rate);
    if src.is_equiprobable() {
        let closed = rd::hamming_rd_closed_form(alphabet.len(), a.rate)?;
        rep.field("closed_form", fmt_f64(closed));
        let _ = writeln!(tail, "closed form D(R) = {}", fmt_f64(closed));
    }
    Ok(rep.render(&tail))
}

fn cmd_gen(a: GenArgs) -> Outcome {
    let text = match (a.builtin.as_deref(), a.order, a.labels.as_deref()) {
        (Some("paper-example"), _, _) => EXAMPLE_DEBRUIJN8_FILE.to_string(),
        (Some(other), _, _) => {
            return Err(Failure::Usage(format!(
                "unknown builtin `{other}` (available: paper-example)"
            )))
        }
        (None, Some(order), Some(labels)) => {
            let labels: Vec<&str> = labels.split(',').map(str::trim).collect();
            de_bruijn(order, &labels)?.to_text()
        }
        _ => {
            return Err(Failure::Usage(
                "give either --builtin or both --order and --labels".into(),
            ))
        }
    };
    match a.output {
        Some(path) => {
            std::fs::write(&path, &text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_encode(a: EncodeArgs) -> Outcome {
    let g = parse_graph(&read(&a.graph)?)?;
    let raw = match (&a.symbols, &a.input) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read(path)?,
        (None, None) => return Err(Failure::Usage("give --symbols or --input".into())),
    };
    let names: Vec<&str> = raw
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    let xs = g.symbols(&names)?;
    let enc = viterbi::encode(&g, &xs)?;
    let mut s = String::new();
    let path: Vec<String> = enc.path.iter().map(usize::to_string).collect();
    let labels: Vec<&str> = enc.labels.iter().map(|&l| g.alphabet()[l].as_str()).collect();
    let start = g.vertices()[g.edges()[enc.path[0]].from].as_str();
    let _ = writeln!(s, "length       {}", xs.len());
    let _ = writeln!(s, "start        {start}");
    let _ = writeln!(s, "path         {}", path.join(" "));
    let _ = writeln!(s, "labels       {}", labels.join(" "));
    let _ = writeln!(s, "distortion   {}", enc.total_distortion);
    if a.brute_force {
        let best = viterbi::brute_force_min(&g, &xs)?;
        let _ = writeln!(s, "brute_force  {best}");
    }
    if let Ok(rate) = RateReport::for_graph(&g) {
        if let Some(bits) = rate.bits(xs.len() as u64) {
            let _ = writeln!(s, "bits         {bits} ({})", rate.formula());
        }
    }
    Ok(s)
}
