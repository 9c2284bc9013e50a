//! `geodesic`: distance distributions, IGL, Wiener index, vertex-deletion
//! optimisation on trees, and red/blue dominance polynomials.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, or YES when `--tau` is given |
//! | 1 | NO: the optimum exceeds `--tau` |
//! | 2 | unreadable or malformed input, bad arguments, `k > n` |
//! | 3 | method does not fit the input (tree method on a non-tree, `minh` on a non-tree), invalid decomposition |
//! | 4 | trim bound above `--l-cap` under `--strict` |
//! | 5 | no deletion set meets the trim bound |
//!
//! Data goes to stdout, diagnostics to stderr.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geodesic::minh::{parse_rational, plan, Algorithm};
use geodesic::redblue::to_pairs;
use geodesic::{
    distance_distribution_oracle, igl_from_distribution, minh_bruteforce, minh_trim_dp,
    parse_edge_list_str, redblue_bruteforce, redblue_solve, tree_distance_distribution,
    tw_distance_prefix, validate_decomposition, wiener_from_distribution, BalanceParams,
    DistanceDistribution, Graph, Measure, MinhError, RedBlueInstance, Solution, Tree,
    TreeDecomposition,
};
use num_rational::BigRational;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "geodesic", version, about)]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Run the per-level structural assertions (same as GEODESIC_DEBUG_ASSERT=1).
    #[arg(long, global = true)]
    debug_assert: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Tree,
    Treewidth,
    Oracle,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance distribution, with IGL and Wiener index.
    Distdist(GraphArgs),
    /// Inverse geodesic length.
    Igl(GraphArgs),
    /// Wiener index.
    Wiener(GraphArgs),
    /// Delete k vertices of a tree to minimise a measure.
    Minh(MinhArgs),
    /// Dominance polynomial of a red/blue point set given as JSON.
    Redblue(RedBlueArgs),
    /// Check a tree decomposition against a graph and print its width.
    ValidateTd(ValidateArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list: `n m` then `u v` (or `u v w` with --weighted) per edge. `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    weighted: bool,
    /// Defaults to `tree` for trees and `treewidth` otherwise.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Tree decomposition file for the treewidth method.
    #[arg(long)]
    td: Option<PathBuf>,
    /// Only distances 1..=P. Derived measures are then omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    prefix: Option<u64>,
}

#[derive(Args, Debug)]
struct MinhArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_measure, default_value = "igl")]
    measure: Measure,
    #[arg(short = 'k', long = "k")]
    k: usize,
    /// Threshold for the decision (`p/q` or decimal); exit 1 when the optimum exceeds it.
    #[arg(long)]
    tau: Option<String>,
    /// Trim bound L for the dynamic program, bypassing the balance parameters.
    #[arg(long, conflicts_with_all = ["brute", "c_h", "t_h"])]
    trim: Option<u64>,
    #[arg(long = "c-h", requires = "t_h")]
    c_h: Option<String>,
    #[arg(long = "t-h", requires = "c_h")]
    t_h: Option<String>,
    /// Exhaustive search only.
    #[arg(long)]
    brute: bool,
    /// Trim bounds above this draw a warning.
    #[arg(long, default_value_t = 12)]
    l_cap: u64,
    /// Turn the trim-bound warning into exit code 4.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct RedBlueArgs {
    #[arg(long)]
    input: PathBuf,
    /// Check every pair instead.
    #[arg(long)]
    brute: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    td: PathBuf,
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.debug_assert {
        std::env::set_var(geodesic::checks::ENV_VAR, "1");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build()
        .expect("thread pool");
    let result = pool.install(|| run(&cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let out = match &cli.command {
        Command::Distdist(a) => distdist(a, cli.format)?,
        Command::Igl(a) => measure(a, cli.format, Measure::Igl)?,
        Command::Wiener(a) => measure(a, cli.format, Measure::Wiener)?,
        Command::Minh(a) => return minh(a, cli.format),
        Command::Redblue(a) => redblue(a, cli.format)?,
        Command::ValidateTd(a) => return validate_td(a, cli.format),
    };
    print!("{out}");
    Ok(0)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| fail(2, format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path, weighted: bool) -> Result<Graph, Failure> {
    parse_edge_list_str(&read_input(path)?, weighted)
        .map_err(|e| fail(2, format!("{}: line {}: {}", path.display(), e.line, e.kind)))
}

fn read_td(path: &Path) -> Result<TreeDecomposition, Failure> {
    TreeDecomposition::parse(&read_input(path)?).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn is_tree(g: &Graph) -> bool {
    g.n() >= 1 && g.m() + 1 == g.n() && g.is_unit_weight() && g.is_connected()
}

fn distribution(a: &GraphArgs) -> Result<DistanceDistribution, Failure> {
    let g = read_graph(&a.input, a.weighted)?;
    let method = match (a.method, &a.td) {
        (Some(m), None) => m,
        (None | Some(Method::Treewidth), Some(_)) => Method::Treewidth,
        (Some(m), Some(_)) => {
            return Err(fail(3, format!("--td only applies to the treewidth method, not {m:?}")))
        }
        (None, None) if is_tree(&g) => Method::Tree,
        (None, None) => Method::Treewidth,
    };
    let dist = match method {
        Method::Tree => {
            let t = Tree::new(g).map_err(|e| fail(3, format!("tree method: {e}")))?;
            tree_distance_distribution(&t, a.prefix)
        }
        Method::Oracle => {
            let d = distance_distribution_oracle(&g);
            match a.prefix {
                Some(p) => d.truncated(p),
                None => d,
            }
        }
        Method::Treewidth => {
            let td = a.td.as_deref().map(read_td).transpose()?;
            tw_distance_prefix(&g, td.as_ref(), a.prefix.unwrap_or(u64::MAX))
                .map_err(|e| fail(3, format!("invalid decomposition: {e}")))?
        }
    };
    Ok(dist)
}

fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn approx(r: &BigRational) -> f64 {
    geodesic::distribution::rational_to_f64(r)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct DistOut<'a> {
    n: usize,
    counts: &'a std::collections::BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    igl: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    igl_approx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wiener: Option<String>,
}

fn distdist(a: &GraphArgs, format: Format) -> Result<String, Failure> {
    let d = distribution(a)?;
    let igl = a.prefix.is_none().then(|| igl_from_distribution(&d));
    let wiener = a.prefix.is_none().then(|| wiener_from_distribution(&d));
    Ok(match format {
        Format::Json => to_json(&DistOut {
            n: d.n,
            counts: &d.counts,
            igl: igl.as_ref().map(rational_string),
            igl_approx: igl.as_ref().map(approx),
            wiener: wiener.map(|w| w.to_string()),
        }),
        Format::Tsv => {
            let mut s = d.to_tsv();
            if let (Some(i), Some(w)) = (igl, wiener) {
                s.push_str(&format!("# igl\t{}\t{}\n# wiener\t{w}\n", rational_string(&i), approx(&i)));
            }
            s
        }
    })
}

fn measure(a: &GraphArgs, format: Format, m: Measure) -> Result<String, Failure> {
    if a.prefix.is_some() {
        return Err(fail(2, "--prefix does not apply to a whole-graph measure"));
    }
    let d = distribution(a)?;
    let value = m.from_distribution(&d);
    let name = m.name();
    Ok(match (format, m) {
        (Format::Json, Measure::Igl) => format!(
            "{{\"{name}\":\"{}\",\"{name}_approx\":{}}}\n",
            rational_string(&value),
            serde_json::to_string(&approx(&value)).unwrap()
        ),
        (Format::Json, Measure::Wiener) => format!("{{\"{name}\":\"{}\"}}\n", rational_string(&value)),
        (Format::Tsv, Measure::Igl) => {
            format!("{name}\t{}\t{}\n", rational_string(&value), approx(&value))
        }
        (Format::Tsv, Measure::Wiener) => format!("{name}\t{}\n", rational_string(&value)),
    })
}

#[derive(Serialize)]
struct MinhOut {
    algorithm: String,
    decision: Option<bool>,
    deleted: Vec<usize>,
    k: usize,
    measure: &'static str,
    trim: Option<u64>,
    value: String,
    value_approx: f64,
}

fn minh(a: &MinhArgs, format: Format) -> Outcome {
    let g = read_graph(&a.input, false)?;
    let t = Tree::new(g).map_err(|e| fail(3, format!("minh needs a tree: {e}")))?;
    let n = t.n();
    if a.k > n {
        return Err(fail(2, format!("k = {} exceeds the {n} vertices", a.k)));
    }
    let tau = a
        .tau
        .as_deref()
        .map(parse_rational)
        .transpose()
        .map_err(|e| fail(2, format!("--tau: {e}")))?;
    let params = match (&a.c_h, &a.t_h) {
        (Some(c), Some(t)) => {
            let c = parse_rational(c).map_err(|e| fail(2, format!("--c-h: {e}")))?;
            let t = parse_rational(t).map_err(|e| fail(2, format!("--t-h: {e}")))?;
            Some(BalanceParams::new(c, t).map_err(|e| fail(2, e.to_string()))?)
        }
        _ => a.measure.default_params(),
    };
    let algorithm = if a.brute {
        Algorithm::BruteForce
    } else if let Some(trim) = a.trim {
        if trim == 0 {
            return Err(fail(2, "--trim must be at least 1"));
        }
        Algorithm::TrimDp { trim }
    } else {
        plan(n, a.k, params.as_ref()).algorithm
    };
    if let Algorithm::TrimDp { trim } = algorithm {
        if trim > a.l_cap {
            let msg = format!("trim bound L = {trim} exceeds the cap {}; the run may not finish", a.l_cap);
            if a.strict {
                return Err(fail(4, msg));
            }
            eprintln!("warning: {msg}");
        }
    }
    let solution: Solution = match algorithm {
        Algorithm::BruteForce => minh_bruteforce(&t, a.measure, a.k),
        Algorithm::TrimDp { trim } => minh_trim_dp(&t, a.measure, a.k, trim),
    }
    .map_err(|e| match e {
        MinhError::Infeasible { .. } => fail(5, e.to_string()),
        other => fail(2, other.to_string()),
    })?;
    let decision = tau.as_ref().map(|tau| solution.value <= *tau);
    let trim = match solution.algorithm {
        Algorithm::TrimDp { trim } => Some(trim),
        Algorithm::BruteForce => None,
    };
    let out = MinhOut {
        algorithm: solution.algorithm.to_string(),
        decision,
        deleted: solution.deleted.clone(),
        k: a.k,
        measure: a.measure.name(),
        trim,
        value: rational_string(&solution.value),
        value_approx: approx(&solution.value),
    };
    match format {
        Format::Json => print!("{}", to_json(&out)),
        Format::Tsv => {
            let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
            let deleted: Vec<String> = out.deleted.iter().map(ToString::to_string).collect();
            print!(
                "algorithm\t{}\ndecision\t{}\ndeleted\t{}\nk\t{}\nmeasure\t{}\ntrim\t{}\nvalue\t{}\nvalue_approx\t{}\n",
                out.algorithm,
                opt(out.decision.map(|d| if d { "yes".into() } else { "no".into() })),
                deleted.join(","),
                out.k,
                out.measure,
                opt(out.trim.map(|t| t.to_string())),
                out.value,
                out.value_approx
            );
        }
    }
    Ok(if decision == Some(false) { 1 } else { 0 })
}

fn redblue(a: &RedBlueArgs, format: Format) -> Result<String, Failure> {
    let inst = RedBlueInstance::from_json(&read_input(&a.input)?)
        .map_err(|e| fail(2, format!("{}: {e}", a.input.display())))?;
    let poly = if a.brute {
        redblue_bruteforce(&inst)
    } else {
        redblue_solve(&inst).map_err(|e| fail(2, e.to_string()))?
    };
    let pairs = to_pairs(&poly);
    Ok(match format {
        Format::Json => to_json(&pairs),
        Format::Tsv => pairs.iter().map(|(e, c)| format!("{e}\t{c}\n")).collect(),
    })
}

fn validate_td(a: &ValidateArgs, format: Format) -> Outcome {
    let g = read_graph(&a.input, a.weighted)?;
    let td = read_td(&a.td)?;
    let width = validate_decomposition(&g, &td).map_err(|e| fail(3, e.to_string()))?;
    match format {
        Format::Json => println!("{{\"valid\":true,\"width\":{width}}}"),
        Format::Tsv => print!("valid\ttrue\nwidth\t{width}\n"),
    }
    Ok(0)
}
