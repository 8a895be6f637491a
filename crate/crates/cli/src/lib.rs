//! Command-line front end: argument parsing, file formats, report rendering
//! and the benchmark harness.
//!
//! Exit codes: 0 when the question was decided or the artifact produced,
//! 2 for GIVE-UP and UNSAT-AT-BOUND style answers, 1 for usage, parse and
//! ceiling errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use nilcsat::algebra::{enumerate_congruences, AlgebraSpec, DElem};
use nilcsat::canonical::canonicalize;
use nilcsat::ccircuit::extract_cc;
use nilcsat::cnf::CnfFormula;
use nilcsat::funcrep::{represent_with, CompileLimits};
use nilcsat::gf::{codim_bound, isolate_point, parse_vecs};
use nilcsat::random::{random_circuit, random_cnf, random_level_function};
use nilcsat::reduction::reduce_with;
use nilcsat::s4::{reduce_s4, solve_s4_witness};
use nilcsat::solver::{
    ceqv, density_report, sesh_bound, solve, solve_sparse, CeqvStatus, Method, Status, SupportBound,
};
use nilcsat::terms::{parse, Circuit, EXPANSION_CEILING};
use nilcsat::Instance;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nilcsat::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "nilcsat", version, about = "Circuit satisfiability and equivalence over D[p1,...,ph]")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct AlgebraArgs {
    /// Comma-separated primes, e.g. 2,3,2.
    #[arg(long)]
    pub primes: String,
}

#[derive(Args, Debug)]
pub struct TermArgs {
    /// A `.term` file.
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    pub term: Option<PathBuf>,
    /// Inline term text.
    #[arg(long)]
    pub expr: Option<String>,
    /// Arity; defaults to one more than the largest variable index.
    #[arg(long)]
    pub arity: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Brute,
    Sparse,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Sesh,
    Exhaustive,
    Fixed,
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Brute)]
    pub solver: SolverKind,
    /// Support bound preset of the sparse solver.
    #[arg(long, value_enum, default_value_t = BoundKind::Sesh)]
    pub bound: BoundKind,
    /// Constant of the sesh preset.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Support size of the fixed preset.
    #[arg(long)]
    pub support: Option<usize>,
    /// Continue past the bound up to the arity.
    #[arg(long)]
    pub escalate: bool,
    /// Samples of the random solver.
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Seed of the random solver; required with --solver random.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ceiling on candidates per exhaustive pass.
    #[arg(long, default_value_t = 100_000_000)]
    pub ceiling: u128,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a term at a point.
    Eval {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
        /// Comma-separated elements such as 1:2,0:1.
        #[arg(long, default_value = "")]
        at: String,
    },
    /// Per-level canonical representation.
    Canon {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
    },
    /// Solve t(x) = d.
    Csat {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
        /// Target value; 0 by default.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decide whether t is identically 0.
    Ceqv {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Reduce a 3-CNF to a single equation t(x) = e_1 1.
    ReduceSat {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        cnf: PathBuf,
        /// Split wider clauses into 3-clauses first.
        #[arg(long)]
        split: bool,
        /// Write the term text here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        max_arity: usize,
    },
    /// Extract a MOD-gate circuit for v_j e_{j+1} g(e_k x).
    CcExtract {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
    },
    /// Isolate a point of a vector set by affine hyperplanes.
    Hyperplane {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        vecs: PathBuf,
    },
    /// Reduce a 3-CNF to an equation over S4.
    S4Reduce {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        split: bool,
        /// Also decide the formula and build a group witness.
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact value counts and sampled estimates.
    Density {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        term: TermArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000_000)]
        ceiling: u128,
    },
    /// Enumerate all congruences of the algebra.
    Congruences {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, default_value_t = nilcsat::algebra::CONGRUENCE_CEILING)]
        ceiling: usize,
    },
    /// Measure construction sizes and times.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, default_value_t = 8)]
        max_m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        max_arity: usize,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Reduction,
    Funcrep,
    Solver,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let result = match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn spec_of(a: &AlgebraArgs) -> CliResult<AlgebraSpec> {
    Ok(AlgebraSpec::parse(&a.primes)?)
}

fn load_term(spec: &AlgebraSpec, t: &TermArgs) -> CliResult<Circuit> {
    let text = match (&t.term, &t.expr) {
        (Some(path), _) => read(path)?,
        (None, Some(e)) => e.clone(),
        (None, None) => return Err(CliError::Usage("one of --term or --expr is required".into())),
    };
    Ok(parse(spec, &text, t.arity)?)
}

fn load_cnf(path: &Path, split: bool) -> CliResult<CnfFormula> {
    let f = CnfFormula::parse_dimacs(&read(path)?)?;
    Ok(if split { f.to_3cnf() } else { f })
}

fn parse_point(spec: &AlgebraSpec, text: &str) -> CliResult<Vec<DElem>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| spec.parse_elem(s).map_err(CliError::from))
        .collect()
}

fn method_of(s: &SolverArgs) -> CliResult<Method> {
    Ok(match s.solver {
        SolverKind::Brute => Method::Brute { ceiling: s.ceiling },
        SolverKind::Sparse => {
            let bound = match s.bound {
                BoundKind::Sesh => SupportBound::sesh(s.c),
                BoundKind::Exhaustive => SupportBound::exhaustive(),
                BoundKind::Fixed => SupportBound::fixed(
                    s.support
                        .ok_or_else(|| CliError::Usage("--bound fixed needs --support".into()))?,
                ),
            };
            Method::Sparse {
                bound: bound.escalating(s.escalate),
                ceiling: s.ceiling,
            }
        }
        SolverKind::Random => Method::Random {
            budget: s.budget,
            seed: s
                .seed
                .ok_or_else(|| CliError::Usage("--solver random needs --seed".into()))?,
        },
    })
}

/// Evaluates through the expanded term when it is small, a code path
/// separate from the solvers' node-array evaluation.
fn independent_eval(c: &Circuit, x: &[DElem]) -> CliResult<DElem> {
    if c.term_size() <= 1_000_000 {
        let term = c.to_term(1_000_000)?;
        Ok(term.evaluate(c.spec(), x)?)
    } else {
        Ok(canonicalize(c).evaluate(c.spec(), x)?)
    }
}

fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn text_of(value: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = value {
        for (k, v) in map {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {shown}\n"));
        }
    } else {
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

fn emit(format: Format, value: Value) -> String {
    match format {
        Format::Json => render(&value),
        Format::Text => text_of(&value),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn dispatch(cli: &Cli) -> CliResult<(i32, String)> {
    let fmt = cli.format;
    match &cli.command {
        Command::Eval { algebra, term, at } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let x = parse_point(&spec, at)?;
            let v = c.evaluate(&x)?;
            Ok((0, emit(fmt, json!({ "value": v }))))
        }
        Command::Canon { algebra, term } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let form = canonicalize(&c);
            let rebuilt = form.to_circuit(&spec);
            let text = rebuilt.print(EXPANSION_CEILING).ok();
            Ok((
                0,
                emit(
                    fmt,
                    json!({
                        "circuit_nodes": c.size(),
                        "canonical_size": form.size().to_string(),
                        "levels": form.levels,
                        "term": text,
                    }),
                ),
            ))
        }
        Command::Csat {
            algebra,
            term,
            target,
            solver,
        } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let d = match target {
                Some(t) => spec.parse_elem(t)?,
                None => spec.zero(),
            };
            let method = method_of(solver)?;
            let inst = Instance::new(c, d)?;
            let start = Instant::now();
            let r = solve(&inst, method)?;
            let ms = elapsed_ms(start);
            if let Some(w) = &r.witness {
                if independent_eval(&inst.circuit, w)? != d {
                    return Err(CliError::Core(nilcsat::Error::NotASolution(
                        "solver witness failed re-validation".into(),
                    )));
                }
            }
            let code = match r.status {
                Status::Sat | Status::Unsat => 0,
                Status::UnsatAtBound | Status::GiveUp => 2,
            };
            let mut v = serde_json::to_value(&r).expect("report");
            v["solver"] = serde_json::to_value(method).expect("method");
            v["elapsed_ms"] = json!(ms);
            Ok((code, emit(fmt, v)))
        }
        Command::Ceqv {
            algebra,
            term,
            solver,
        } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let method = method_of(solver)?;
            let start = Instant::now();
            let r = ceqv(&c, method)?;
            let ms = elapsed_ms(start);
            if let Some(w) = &r.counterexample {
                if independent_eval(&c, w)?.is_zero() {
                    return Err(CliError::Core(nilcsat::Error::NotASolution(
                        "counterexample failed re-validation".into(),
                    )));
                }
            }
            let code = match r.status {
                CeqvStatus::Equiv | CeqvStatus::NotEquiv => 0,
                _ => 2,
            };
            let mut v = serde_json::to_value(&r).expect("report");
            v["solver"] = serde_json::to_value(method).expect("method");
            v["elapsed_ms"] = json!(ms);
            Ok((code, emit(fmt, v)))
        }
        Command::ReduceSat {
            algebra,
            cnf,
            split,
            out,
            max_arity,
        } => {
            let spec = spec_of(algebra)?;
            let phi = load_cnf(cnf, *split)?;
            let r = reduce_with(
                &phi,
                &spec,
                CompileLimits {
                    max_arity: *max_arity,
                },
            )?;
            let mut v = serde_json::to_value(r.meta(&phi)).expect("meta");
            if let Some(map) = v.as_object_mut() {
                let ms = map.remove("build_ms").unwrap_or(Value::Null);
                map.insert("elapsed_ms".into(), ms);
            }
            let text = r.circuit.print(EXPANSION_CEILING)?;
            match out {
                Some(path) => {
                    write(path, &format!("{text}\n"))?;
                    v["term_file"] = json!(path.display().to_string());
                }
                None => v["term"] = json!(text),
            }
            Ok((0, emit(fmt, v)))
        }
        Command::CcExtract { algebra, term, j, k } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let cc = extract_cc(&c, *j, *k)?;
            Ok((
                0,
                emit(
                    fmt,
                    json!({
                        "depth": cc.depth(),
                        "gate_count": cc.gate_count(),
                        "wire_count": cc.wire_count(),
                        "circuit": cc,
                    }),
                ),
            ))
        }
        Command::Hyperplane { q, vecs } => {
            let z = parse_vecs(&read(vecs)?, *q)?;
            let iso = isolate_point(*q, &z)?;
            let distinct: std::collections::BTreeSet<&Vec<u32>> = z.iter().collect();
            let equations: Vec<String> = iso
                .hyperplanes
                .equations
                .iter()
                .map(|e| {
                    let lhs: Vec<String> = e
                        .coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| a != 0)
                        .map(|(i, &a)| if a == 1 { format!("x{i}") } else { format!("{a}*x{i}") })
                        .collect();
                    format!("{} = {}", lhs.join(" + "), e.constant)
                })
                .collect();
            Ok((
                0,
                emit(
                    fmt,
                    json!({
                        "q": q,
                        "points": distinct.len(),
                        "codim": iso.codim(),
                        "codim_bound": codim_bound(*q, distinct.len()),
                        "equations": equations,
                        "point": iso.point,
                        "cuts": iso.cuts,
                    }),
                ),
            ))
        }
        Command::S4Reduce {
            cnf,
            split,
            witness,
            out,
        } => {
            let phi = load_cnf(cnf, *split)?;
            let r = reduce_s4(&phi);
            let mut v = serde_json::to_value(r.meta(phi.clause_count())).expect("meta");
            let text = r.render();
            match out {
                Some(path) => {
                    write(path, &format!("{text}\n"))?;
                    v["word_file"] = json!(path.display().to_string());
                }
                None => v["word"] = json!(text),
            }
            if *witness {
                if phi.vars() > 26 {
                    return Err(CliError::Usage("--witness decides formulas of at most 26 variables".into()));
                }
                match phi.brute_force() {
                    Some(beta) => {
                        let w = solve_s4_witness(&r, &phi, &beta)?;
                        if r.word.eval(&w) != r.target {
                            return Err(CliError::Core(nilcsat::Error::NotASolution(
                                "group witness failed re-validation".into(),
                            )));
                        }
                        v["satisfiable"] = json!(true);
                        let named: serde_json::Map<String, Value> = w
                            .iter()
                            .enumerate()
                            .map(|(i, g)| (r.variable_name(i), json!(g)))
                            .collect();
                        v["witness"] = Value::Object(named);
                    }
                    None => v["satisfiable"] = json!(false),
                }
            }
            Ok((0, emit(fmt, v)))
        }
        Command::Density {
            algebra,
            term,
            samples,
            seed,
            ceiling,
        } => {
            let spec = spec_of(algebra)?;
            let c = load_term(&spec, term)?;
            let start = Instant::now();
            let r = density_report(&c, *ceiling, *samples, *seed)?;
            let mut v = serde_json::to_value(&r).expect("report");
            v["elapsed_ms"] = json!(elapsed_ms(start));
            Ok((0, emit(fmt, v)))
        }
        Command::Congruences { algebra, ceiling } => {
            let spec = spec_of(algebra)?;
            let start = Instant::now();
            let found = enumerate_congruences(&spec, *ceiling)?;
            let chain: std::collections::BTreeSet<_> = spec.chain().partitions().into_iter().collect();
            let classes: Vec<usize> = found.iter().map(|p| p.class_count()).collect();
            let labels: Vec<&[usize]> = found.iter().map(|p| p.labels()).collect();
            Ok((
                0,
                emit(
                    fmt,
                    json!({
                        "algebra": spec.to_string(),
                        "count": found.len(),
                        "equals_chain": found == chain,
                        "class_counts": classes,
                        "labels": labels,
                        "elapsed_ms": elapsed_ms(start),
                    }),
                ),
            ))
        }
        Command::Bench {
            suite,
            algebra,
            max_m,
            seed,
            max_arity,
            out,
        } => {
            let spec = spec_of(algebra)?;
            let limits = CompileLimits {
                max_arity: *max_arity,
            };
            let (csv_text, slopes) = match suite {
                Suite::Reduction => bench_reduction(&spec, *max_m, *seed, limits)?,
                Suite::Funcrep => bench_funcrep(&spec, *max_m, *seed, limits)?,
                Suite::Solver => bench_solver(&spec, *max_m, *seed)?,
            };
            match out {
                Some(path) => {
                    write(path, &csv_text)?;
                    Ok((
                        0,
                        emit(
                            fmt,
                            json!({ "csv": path.display().to_string(), "slopes": slopes }),
                        ),
                    ))
                }
                None => {
                    let mut s = csv_text;
                    for (name, value) in slopes.as_object().into_iter().flatten() {
                        s.push_str(&format!("# {name} {value}\n"));
                    }
                    Ok((0, s))
                }
            }
        }
    }
}

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two
/// distinct abscissae.
pub fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[derive(Serialize)]
struct ReductionRow {
    m: usize,
    n: usize,
    s: usize,
    parts: usize,
    nodes: usize,
    term_size: String,
    build_ms: f64,
}

fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn bench_reduction(spec: &AlgebraSpec, max_m: usize, seed: u64, limits: CompileLimits) -> CliResult<(String, Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for m in 1..=max_m {
        let n = m.clamp(3, limits.max_arity);
        let phi = random_cnf(n, m, 3, &mut rng);
        let r = match reduce_with(&phi, spec, limits) {
            Ok(r) => r,
            Err(nilcsat::Error::GadgetTooWide { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        rows.push(ReductionRow {
            m,
            n,
            s: r.s,
            parts: r.parts.len(),
            nodes: r.circuit.size(),
            term_size: r.circuit.term_size().to_string(),
            build_ms: r.build_ms,
        });
    }
    let log_m: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
    let log_nodes: Vec<f64> = rows.iter().map(|r| (r.nodes as f64).ln()).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.s as f64).collect();
    let log2_nodes: Vec<f64> = rows.iter().map(|r| (r.nodes as f64).log2()).collect();
    Ok((
        to_csv(&rows)?,
        json!({
            "loglog_nodes_vs_m": slope(&log_m, &log_nodes),
            "log2_nodes_vs_s": slope(&s, &log2_nodes),
        }),
    ))
}

#[derive(Serialize)]
struct FuncrepRow {
    m: usize,
    source: usize,
    target: usize,
    domain: u64,
    nodes: usize,
    envelope: String,
    build_ms: f64,
}

fn bench_funcrep(spec: &AlgebraSpec, max_m: usize, seed: u64, limits: CompileLimits) -> CliResult<(String, Value)> {
    spec.require_alternating(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (source, target) = (spec.h(), spec.h() - 1);
    let q = spec.prime(source) as u64;
    let mut rows = Vec::new();
    for m in 1..=max_m.min(limits.max_arity) {
        let g = random_level_function(spec, source, target, m, &mut rng);
        let start = Instant::now();
        let c = represent_with(&g, spec, limits)?;
        rows.push(FuncrepRow {
            m,
            source,
            target,
            domain: q.pow(m as u32),
            nodes: c.size(),
            envelope: g.size_envelope(spec).to_string(),
            build_ms: elapsed_ms(start),
        });
    }
    let log_domain: Vec<f64> = rows.iter().map(|r| (r.domain as f64).ln()).collect();
    let log_nodes: Vec<f64> = rows.iter().map(|r| (r.nodes as f64).ln()).collect();
    Ok((
        to_csv(&rows)?,
        json!({ "loglog_nodes_vs_domain": slope(&log_domain, &log_nodes) }),
    ))
}

#[derive(Serialize)]
struct SolverRow {
    size: usize,
    n: usize,
    status: String,
    min_support: Option<usize>,
    sesh_bound: usize,
    evaluations: u64,
    solve_ms: f64,
}

fn bench_solver(spec: &AlgebraSpec, max_m: usize, seed: u64) -> CliResult<(String, Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for step in 1..=max_m {
        let size = 5 * step;
        let n = 1 + step.min(4);
        let c = random_circuit(spec, n, size, &mut rng);
        let inst = Instance::zero(c);
        let start = Instant::now();
        let r = solve_sparse(&inst, SupportBound::exhaustive(), 100_000_000)?;
        rows.push(SolverRow {
            size,
            n,
            status: serde_json::to_value(r.status)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            min_support: r.support,
            sesh_bound: sesh_bound(1.0, size, spec.h()).min(n),
            evaluations: r.evaluations,
            solve_ms: elapsed_ms(start),
        });
    }
    let exceed = rows
        .iter()
        .filter(|r| r.min_support.is_some_and(|s| s > r.sesh_bound))
        .count();
    Ok((to_csv(&rows)?, json!({ "support_above_sesh": exceed })))
}
