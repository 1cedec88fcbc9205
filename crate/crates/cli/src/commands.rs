use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rectcomm::bounds::{self, BoundReport, Formula};
use rectcomm::cdag::{self, Sub};
use rectcomm::executor::{self, ExecOptions, Matrix, Scalar};
use rectcomm::expansion::{self, ExpansionOptions, Limits};
use rectcomm::graph::Graph;
use rectcomm::memsim::{self, FitMode, Layout, MemConfig};
use rectcomm::{catalog, tensor, textfmt, BilinearAlgorithm, Error, Symmetry};
use serde::Serialize;

use crate::args::{Cli, Command, Format, Global, LayoutArg, SubArg};

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Io(PathBuf, std::io::Error),
    /// The command ran but what it checked does not hold; the report is
    /// still printed.
    Failed(Box<Output>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 2,
            CliError::Lib(Error::Malformed(_) | Error::NotLambdaExact(_)) => 2,
            CliError::Lib(Error::Capacity { .. }) => 4,
            _ => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Failed(_) => f.write_str("check failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Res<T> = Result<T, CliError>;

/// One report in the three output forms.
#[derive(Debug)]
pub struct Output {
    text: String,
    /// CSV table, or the algorithm file for `tensor`.
    data: String,
    json: serde_json::Value,
}

impl Output {
    fn new<T: Serialize>(text: String, rows: &[T]) -> Res<Self> {
        Ok(Self {
            text,
            data: to_csv(rows)?,
            json: to_json(rows)?,
        })
    }

    pub fn emit(&self, g: &Global) -> Res<()> {
        let json = || serde_json::to_string_pretty(&self.json).expect("values serialize") + "\n";
        match g.format {
            Format::Text => print!("{}", self.text),
            Format::Csv => print!("{}", self.data),
            Format::Json => print!("{}", json()),
        }
        if let Some(path) = &g.output {
            let body = if path.extension().is_some_and(|e| e == "json") { json() } else { self.data.clone() };
            std::fs::write(path, body).map_err(|e| CliError::Io(path.clone(), e))?;
        }
        Ok(())
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_json<T: Serialize>(rows: &[T]) -> Res<serde_json::Value> {
    serde_json::to_value(rows).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(cli: &Cli) -> Res<Output> {
    match &cli.command {
        Command::Validate { alg } => validate(alg.as_deref()),
        Command::Variants { alg } => variants(&load(alg)?),
        Command::Tensor { alg, power } => tensor_cmd(&load(alg)?, *power),
        Command::Multiply {
            alg,
            t,
            lambda,
            seed,
            cutoff,
            float,
        } => multiply(&load(alg)?, *t, lambda.as_deref(), *seed, *cutoff, *float),
        Command::ErrorScan {
            alg,
            t,
            lambdas,
            trials,
            seed,
        } => error_scan(&load(alg)?, *t, lambdas, *trials, *seed),
        Command::CdagStats {
            alg,
            t,
            relaxed,
            edges,
            sub,
        } => cdag_stats(&load(alg)?, *t, *relaxed, edges.as_deref(), sub.map(sub_of)),
        Command::Expansion {
            alg,
            graph,
            t,
            sub,
            relaxed,
            s_max,
            exhaustive,
            small_set,
            spectral,
        } => {
            let (g, label) = match (graph, alg) {
                (Some(path), _) => (Graph::parse_edge_list(&read(path)?)?, path.display().to_string()),
                (None, Some(a)) => {
                    let alg = load(a)?;
                    let dag = cdag::compose_recursive(&alg, *t, *relaxed);
                    (dag.subgraph(sub_of(*sub)).0, format!("{} t={t} {}", alg.name, sub_of(*sub)))
                }
                (None, None) => return Err(CliError::Usage("give an algorithm or --graph".into())),
            };
            let limits = Limits {
                exhaustive: *exhaustive,
                small_set: *small_set,
            };
            expansion_cmd(&g, &label, *s_max, limits, *spectral)
        }
        Command::Simulate {
            alg,
            t,
            mem,
            layout,
            cutoff,
            fit,
            tolerance,
        } => simulate(&load(alg)?, *t, &parse_sizes(mem)?, layout_of(*layout), *cutoff, *fit, *tolerance),
        Command::Recurrence { alg, t, mem } => recurrence(&load(alg)?, &parse_depths(t)?, &parse_sizes(mem)?),
        Command::Bounds { alg, t, mem } => bounds_cmd(&load(alg)?, *t, *mem),
        Command::Table1 => table1(),
        Command::Blackbox { alg, omega0, t, mem } => blackbox(&load(alg)?, parse_omega(omega0)?, *t, *mem),
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// A file path if one exists, otherwise a catalog expression.
fn load(arg: &str) -> Res<BilinearAlgorithm> {
    let path = Path::new(arg);
    if path.is_file() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        return Ok(textfmt::parse(&read(path)?, stem)?);
    }
    Ok(catalog::resolve(arg)?)
}

fn sub_of(s: SubArg) -> Sub {
    match s {
        SubArg::EncA => Sub::EncA,
        SubArg::EncB => Sub::EncB,
        SubArg::DecC => Sub::DecC,
    }
}

fn layout_of(l: LayoutArg) -> Layout {
    match l {
        LayoutArg::RecursiveBlocked => Layout::RecursiveBlocked,
        LayoutArg::RowMajor => Layout::RowMajor,
    }
}

fn shape(alg: &BilinearAlgorithm) -> String {
    format!("{}x{}x{}", alg.m, alg.n, alg.p)
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

/// `256..8192` doubles from the first to the last; `a,b,c` is a list.
pub fn parse_sizes(s: &str) -> Res<Vec<usize>> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("bad memory size `{x}`")));
    let out = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo == 0 || lo > hi {
            return Err(usage(format!("bad memory range `{s}`")));
        }
        std::iter::successors(Some(lo), |&m| m.checked_mul(2)).take_while(|&m| m <= hi).collect()
    } else {
        s.split(',').map(num).collect::<Res<Vec<_>>>()?
    };
    Ok(out)
}

/// `1..6` is inclusive; `a,b` is a list.
pub fn parse_depths(s: &str) -> Res<Vec<usize>> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("bad depth `{x}`")));
    match s.split_once("..") {
        Some((lo, hi)) => Ok((num(lo)?..=num(hi)?).collect()),
        None => s.split(',').map(num).collect(),
    }
}

/// `2^-4..2^-8` steps the exponent by one; otherwise a comma list.
fn parse_lambdas(s: &str) -> Res<Vec<String>> {
    let Some((lo, hi)) = s.split_once("..") else {
        return Ok(s.split(',').map(|x| x.trim().to_string()).collect());
    };
    let split = |x: &str| -> Res<(String, i32)> {
        let (b, e) = x.trim().split_once('^').ok_or_else(|| usage(format!("range ends must look like 2^-4, got `{x}`")))?;
        let e = e.trim().parse().map_err(|_| usage(format!("bad exponent in `{x}`")))?;
        Ok((b.trim().to_string(), e))
    };
    let ((b1, e1), (b2, e2)) = (split(lo)?, split(hi)?);
    if b1 != b2 {
        return Err(usage(format!("range `{s}` mixes bases")));
    }
    let exps: Vec<i32> = if e1 <= e2 { (e1..=e2).collect() } else { (e2..=e1).rev().collect() };
    Ok(exps.into_iter().map(|e| format!("{b1}^{e}")).collect())
}

/// A number, or `logB(X)`.
fn parse_omega(s: &str) -> Res<f64> {
    let bad = || usage(format!("bad omega0 `{s}`; use a number or e.g. `log2(7)`"));
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("log") {
        let (b, x) = rest.strip_suffix(')').and_then(|r| r.split_once('(')).ok_or_else(bad)?;
        let (b, x): (f64, f64) = (b.parse().map_err(|_| bad())?, x.parse().map_err(|_| bad())?);
        return Ok(x.ln() / b.ln());
    }
    s.parse().map_err(|_| bad())
}

#[derive(Serialize)]
struct ValidateRow {
    name: String,
    shape: String,
    q: usize,
    status: &'static str,
    failures: usize,
}

fn validate(arg: Option<&str>) -> Res<Output> {
    let algs = match arg {
        Some(a) => vec![load(a)?],
        None => catalog::all(),
    };
    let mut rows = Vec::new();
    let mut text = String::new();
    for alg in &algs {
        let rep = alg.validate()?;
        let row = ValidateRow {
            name: alg.name.clone(),
            shape: shape(alg),
            q: alg.q(),
            status: rep.status(),
            failures: rep.failures.len(),
        };
        let _ = writeln!(text, "{:<18} {:<8} q={:<4} {}", row.name, row.shape, row.q, row.status);
        if arg.is_some() {
            for f in rep.failures.iter().take(8) {
                let [a, b, c, d, e, g] = f.index;
                let _ = writeln!(text, "  residual at A[{a}][{b}] B[{c}][{d}] C[{e}][{g}]: {}", f.residual);
            }
            if rep.failures.len() > 8 {
                let _ = writeln!(text, "  ... {} more", rep.failures.len() - 8);
            }
        }
        rows.push(row);
    }
    let out = Output::new(text, &rows)?;
    if rows.iter().any(|r| r.status == "invalid") {
        return Err(CliError::Failed(Box::new(out)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct VariantRow {
    symmetry: String,
    shape: String,
    q: usize,
    status: &'static str,
    /// Catalog entry with the same coefficients, if any.
    catalog: String,
}

fn same_coefficients(x: &BilinearAlgorithm, y: &BilinearAlgorithm) -> bool {
    (x.m, x.n, x.p) == (y.m, y.n, y.p) && x.u == y.u && x.v == y.v && x.w == y.w
}

fn variants(alg: &BilinearAlgorithm) -> Res<Output> {
    let known = catalog::all();
    let mut rows = Vec::new();
    let mut text = String::new();
    for sym in Symmetry::all() {
        let img = sym.apply(alg);
        let hit = known.iter().find(|k| same_coefficients(k, &img)).map(|k| k.name.clone()).unwrap_or_default();
        let row = VariantRow {
            symmetry: sym.to_string(),
            shape: shape(&img),
            q: img.q(),
            status: img.validate()?.status(),
            catalog: hit,
        };
        let _ = writeln!(text, "{:<5} {:<8} {:<12} {}", row.symmetry, row.shape, row.status, row.catalog);
        rows.push(row);
    }
    Output::new(text, &rows)
}

fn tensor_cmd(alg: &BilinearAlgorithm, power: Option<usize>) -> Res<Output> {
    let alg = match power {
        Some(t) => tensor::tensor_power(alg, t)?,
        None => alg.clone(),
    };
    let file = textfmt::print(&alg);
    let row = ValidateRow {
        name: alg.name.clone(),
        shape: shape(&alg),
        q: alg.q(),
        status: alg.validate()?.status(),
        failures: 0,
    };
    Ok(Output {
        text: file.clone(),
        data: file,
        json: serde_json::to_value(&row).map_err(|e| usage(e.to_string()))?,
    })
}

#[derive(Serialize)]
struct MultiplyRow {
    name: String,
    t: usize,
    a: String,
    b: String,
    lambda: String,
    arithmetic: &'static str,
    scalar_mults: u64,
    scalar_adds: u64,
    scalings: u64,
    max_error: String,
    max_error_f64: f64,
    elapsed_ms: f64,
}

fn multiply(
    alg: &BilinearAlgorithm,
    t: usize,
    lambda: Option<&str>,
    seed: u64,
    cutoff: usize,
    float: bool,
) -> Res<Output> {
    let lam = lambda.map(executor::parse_rational).transpose()?;
    let exact_alg = alg.validate()?.exact;
    let pw = |x: usize| x.pow(t as u32);
    let (mt, nt, pt) = (pw(alg.m), pw(alg.n), pw(alg.p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = executor::random_int_matrix(mt, nt, -9, 9, &mut rng);
    let b = executor::random_int_matrix(nt, pt, -9, 9, &mut rng);
    let want = a.matmul(&b)?;
    let opts = ExecOptions { cutoff };
    let (err, err_f, stats) = if float {
        let f = |m: &Matrix<_>| Matrix::from_fn(m.rows, m.cols, |i, j| f64::from_rational(m.get(i, j)));
        let (c, stats) = executor::multiply_recursive_with(alg, &f(&a), &f(&b), t, lam.as_ref(), opts)?;
        let err = c.data.iter().zip(&f(&want).data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        (format!("{err:e}"), err, stats)
    } else {
        let (c, stats) = executor::multiply_recursive_with(alg, &a, &b, t, lam.as_ref(), opts)?;
        let err = executor::max_abs_diff(&c, &want);
        (err.to_string(), f64::from_rational(&err), stats)
    };
    let row = MultiplyRow {
        name: alg.name.clone(),
        t,
        a: format!("{mt}x{nt}"),
        b: format!("{nt}x{pt}"),
        lambda: lam.as_ref().map(|l| l.to_string()).unwrap_or_default(),
        arithmetic: if float { "f64" } else { "exact" },
        scalar_mults: stats.scalar_mults,
        scalar_adds: stats.scalar_adds,
        scalings: stats.scalings,
        max_error: err,
        max_error_f64: err_f,
        elapsed_ms: stats.elapsed.as_secs_f64() * 1e3,
    };
    let mut text = format!(
        "{} t={t}: ({}) x ({}) in {} arithmetic\n  mults {}  adds {}  scalings {}  time {:.3} ms\n  max |C - AB| = {}\n",
        row.name, row.a, row.b, row.arithmetic, row.scalar_mults, row.scalar_adds, row.scalings, row.elapsed_ms, row.max_error
    );
    // Float rounding is allowed; exact arithmetic with an exact algorithm is not.
    let mismatch = exact_alg && !float && err_f != 0.0;
    if exact_alg && !float {
        text.push_str(if mismatch { "  MISMATCH\n" } else { "  matches the classical product\n" });
    }
    let out = Output::new(text, &[row])?;
    if mismatch {
        return Err(CliError::Failed(Box::new(out)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ErrorRow {
    lambda: String,
    lambda_f64: f64,
    max_error: String,
    max_error_f64: f64,
    ratio_to_previous: Option<f64>,
}

fn error_scan(alg: &BilinearAlgorithm, t: usize, lambdas: &str, trials: usize, seed: u64) -> Res<Output> {
    let lams = parse_lambdas(lambdas)?
        .iter()
        .map(|s| executor::parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;
    let pts = executor::approximation_error(alg, t, &lams, trials, seed)?;
    let mut text = format!("{} t={t}, {trials} trials of random ±1 matrices\n", alg.name);
    let _ = writeln!(text, "{:>14} {:>14} {:>8}", "lambda", "max error", "ratio");
    let rows: Vec<ErrorRow> = pts
        .iter()
        .map(|p| ErrorRow {
            lambda: p.lambda.to_string(),
            lambda_f64: f64::from_rational(&p.lambda),
            max_error: p.max_error.to_string(),
            max_error_f64: f64::from_rational(&p.max_error),
            ratio_to_previous: p.ratio_to_previous,
        })
        .collect();
    for r in &rows {
        let ratio = r.ratio_to_previous.map_or("-".into(), |x| format!("{x:.4}"));
        let _ = writeln!(text, "{:>14} {:>14.6e} {:>8}", r.lambda, r.max_error_f64, ratio);
    }
    Output::new(text, &rows)
}

#[derive(Serialize)]
struct PartRow {
    sub: String,
    level_sizes: String,
    max_degree: usize,
    components: usize,
    equal_components: bool,
    multiply_copied: bool,
    entries: usize,
    vertices: usize,
}

fn cdag_stats(alg: &BilinearAlgorithm, t: usize, relaxed: bool, edges: Option<&Path>, sub: Option<Sub>) -> Res<Output> {
    let g = cdag::compose_recursive(alg, t, relaxed);
    let rep = cdag::structural_report(&g, alg);
    if let Some(path) = edges {
        std::fs::write(path, g.to_edge_list(sub)).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    }
    let mut text = format!(
        "{} t={t}{}: {} vertices, {} edges, {}, max in-degree {}\n",
        alg.name,
        if relaxed { " (relaxed)" } else { "" },
        g.n_vertices(),
        g.edges.len(),
        if rep.connected { "connected" } else { "disconnected" },
        g.max_in_degree()
    );
    let rows: Vec<PartRow> = rep
        .parts
        .iter()
        .map(|p| PartRow {
            sub: p.sub.to_string(),
            level_sizes: p.level_sizes.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
            max_degree: p.max_degree,
            components: p.components,
            equal_components: p.equal_components,
            multiply_copied: p.multiply_copied,
            entries: p.n_entries,
            vertices: p.n_vertices,
        })
        .collect();
    for r in &rows {
        let _ = writeln!(
            text,
            "  {:<5} levels [{}]  max degree {}  components {}{}{}",
            r.sub,
            r.level_sizes,
            r.max_degree,
            r.components,
            if r.components > 1 && !r.equal_components { " (unequal)" } else { "" },
            if r.multiply_copied { "  multiply-copied" } else { "" }
        );
    }
    Output::new(text, &rows)
}

#[derive(Serialize)]
struct ProfileRow {
    s: usize,
    h_s: f64,
    method: String,
}

#[derive(Serialize)]
struct ExpansionJson<'a> {
    graph: &'a str,
    vertices: usize,
    edges: usize,
    d: usize,
    h: Option<f64>,
    cheeger: expansion::CheegerBound,
    profile: &'a [ProfileRow],
}

fn expansion_cmd(g: &Graph, label: &str, s_max: Option<usize>, limits: Limits, spectral: bool) -> Res<Output> {
    let cheeger = expansion::cheeger_bound(g, None);
    let mut text = format!("{label}: {} vertices, {} edges, max degree {}\n", g.n(), g.n_edges(), g.max_degree());
    let _ = writeln!(
        text,
        "  Cheeger: {:.6} <= h <= {:.6} (lambda2 = {:.6}{})",
        cheeger.lower,
        cheeger.upper,
        cheeger.lambda2,
        if cheeger.converged { "" } else { ", not converged" }
    );
    let (rows, h, d) = if spectral {
        (Vec::new(), None, g.max_degree())
    } else {
        let opts = ExpansionOptions { limits, degree: None };
        // Without an explicit --s-max, large graphs get the small-set profile.
        let s_max = s_max.or((g.n() > limits.exhaustive).then_some(limits.small_set));
        let prof = expansion::edge_expansion_exact(g, s_max, &opts)?;
        let rows: Vec<ProfileRow> = prof
            .entries
            .iter()
            .map(|e| ProfileRow {
                s: e.s,
                h_s: e.h_s,
                method: e.method.to_string(),
            })
            .collect();
        match prof.h() {
            Some(h) => {
                let _ = writeln!(text, "  h = {h:.6} (d = {})", prof.d);
            }
            None => {
                let last = rows.last().map_or(0, |r| r.s);
                let _ = writeln!(text, "  h_s for s <= {last} only (d = {})", prof.d);
            }
        }
        for r in &rows {
            let _ = writeln!(text, "  s={:<4} h_s={:.6} {}", r.s, r.h_s, r.method);
        }
        (rows, prof.h(), prof.d)
    };
    let json = ExpansionJson {
        graph: label,
        vertices: g.n(),
        edges: g.n_edges(),
        d,
        h,
        cheeger,
        profile: &rows,
    };
    Ok(Output {
        text,
        data: to_csv(&rows)?,
        json: serde_json::to_value(&json).map_err(|e| usage(e.to_string()))?,
    })
}

/// The bound the simulation is checked against: the decoder theorem when
/// it applies, otherwise the largest applicable lower bound.
fn reference_bound(alg: &BilinearAlgorithm, t: usize, m: f64) -> Option<BoundReport> {
    let all = bounds::bounds_for(alg);
    let lower = || all.iter().filter(|b| b.applies && b.formula.is_lower() && b.formula != Formula::TrivialIo);
    lower()
        .find(|b| b.formula == Formula::ThmDecCon)
        .or_else(|| lower().max_by(|x, y| x.value(t, m).total_cmp(&y.value(t, m))))
        .cloned()
}

#[derive(Serialize)]
struct SimRow {
    #[serde(rename = "M")]
    m: usize,
    words: u64,
    fetches: u64,
    writebacks: u64,
    accesses: u64,
    flops: u64,
    footprint: u64,
    recurrence: String,
    /// `q^t / M^e` of the reference bound, without constants.
    lower_shape: f64,
}

#[derive(Serialize)]
struct SimJson<'a> {
    name: &'a str,
    t: usize,
    layout: Layout,
    formula: Option<&'static str>,
    target_slope: Option<f64>,
    slope: Option<f64>,
    slope_stderr: Option<f64>,
    within_tolerance: Option<bool>,
    rows: &'a [SimRow],
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    alg: &BilinearAlgorithm,
    t: usize,
    ms: &[usize],
    layout: Layout,
    cutoff: usize,
    fit: bool,
    tolerance: f64,
) -> Res<Output> {
    let stats = ms
        .par_iter()
        .map(|&m| memsim::simulate_lru(alg, t, &MemConfig { m, layout, cutoff }))
        .collect::<Result<Vec<_>, _>>()?;
    let reference = reference_bound(alg, t, ms.first().copied().unwrap_or(1) as f64);
    let rows: Vec<SimRow> = ms
        .iter()
        .zip(&stats)
        .map(|(&m, s)| SimRow {
            m,
            words: s.words,
            fetches: s.fetches,
            writebacks: s.writebacks,
            accesses: s.accesses,
            flops: s.flops,
            footprint: s.footprint,
            recurrence: memsim::recurrence_cost(alg, t, m as u64).to_string(),
            lower_shape: reference.as_ref().map_or(0.0, |b| b.value(t, m as f64)),
        })
        .collect();
    let mut text = format!(
        "{} t={t} layout={layout}{}: footprint {} words\n",
        alg.name,
        if cutoff > 0 { format!(" cutoff={cutoff}") } else { String::new() },
        rows.first().map_or(0, |r| r.footprint)
    );
    let _ = writeln!(text, "{:>8} {:>14} {:>14} {:>14}", "M", "words", "recurrence", "q^t/M^e");
    for r in &rows {
        let _ = writeln!(text, "{:>8} {:>14} {:>14} {:>14.1}", r.m, r.words, r.recurrence, r.lower_shape);
    }
    let mut json = SimJson {
        name: &alg.name,
        t,
        layout,
        formula: reference.as_ref().map(|b| b.formula.id()),
        target_slope: reference.as_ref().map(|b| -b.exponent),
        slope: None,
        slope_stderr: None,
        within_tolerance: None,
        rows: &rows,
    };
    if fit {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.words as f64)).collect();
        let f = memsim::fit_exponent(&pts, FitMode::SlopeLogX)?;
        let _ = write!(text, "slope of log W against log M: {:.4} ± {:.4}", f.slope, f.stderr);
        json.slope = Some(f.slope);
        json.slope_stderr = Some(f.stderr);
        if let (Some(b), Some(target)) = (&reference, json.target_slope) {
            let ok = (f.slope - target).abs() <= tolerance;
            json.within_tolerance = Some(ok);
            let _ = write!(
                text,
                "; {} predicts {target:.4}, tolerance {tolerance}: {}",
                b.formula,
                if ok { "within" } else { "outside" }
            );
        }
        text.push('\n');
    }
    Ok(Output {
        data: to_csv(&rows)?,
        json: serde_json::to_value(&json).map_err(|e| usage(e.to_string()))?,
        text,
    })
}

#[derive(Serialize)]
struct RecurrenceRow {
    t: usize,
    #[serde(rename = "M")]
    m: usize,
    words: String,
}

fn recurrence(alg: &BilinearAlgorithm, ts: &[usize], ms: &[usize]) -> Res<Output> {
    if ms.iter().any(|&m| m < 3) {
        return Err(Error::Config("the recurrence needs M >= 3".into()).into());
    }
    let mut rows = Vec::new();
    for &t in ts {
        for &m in ms {
            rows.push(RecurrenceRow {
                t,
                m,
                words: memsim::recurrence_cost(alg, t, m as u64).to_string(),
            });
        }
    }
    let mut text = format!(
        "{}: W(t) = 3N*^t when that fits in M, else {}·W(t-1) + {}·N*^(t-1), N* = {}\n",
        alg.name,
        alg.q(),
        memsim::recurrence_constant(alg),
        alg.dims().n_star()
    );
    for r in &rows {
        let _ = writeln!(text, "  t={:<3} M={:<8} W={}", r.t, r.m, r.words);
    }
    Output::new(text, &rows)
}

/// Human-readable form of the bound, e.g. `15^t / M^(log_9(15) - 1)`.
fn expression(b: &BoundReport) -> String {
    match b.formula {
        Formula::TrivialIo => format!("{}^t", b.numerator),
        _ => {
            let mem = format!("M^({} - 1)", b.log);
            match &b.polylog {
                Some(pl) => format!("{}^t / (t^{pl} · {mem})", b.numerator),
                None => format!("{}^t / {mem}", b.numerator),
            }
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    formula: &'static str,
    sub: String,
    expression: String,
    numerator: u64,
    base: u64,
    log: String,
    exponent: f64,
    polylog: String,
    tightness: String,
    applies: bool,
    t: usize,
    #[serde(rename = "M")]
    m: f64,
    valid: bool,
    value: f64,
    note: String,
}

fn bound_row(b: &BoundReport, t: usize, m: f64) -> BoundRow {
    BoundRow {
        formula: b.formula.id(),
        sub: b.sub.map(|s| s.to_string()).unwrap_or_default(),
        expression: expression(b),
        numerator: b.numerator,
        base: b.base,
        log: b.log.to_string(),
        exponent: b.exponent,
        polylog: b.polylog.map(|p| p.to_string()).unwrap_or_default(),
        tightness: b.tightness.to_string(),
        applies: b.applies,
        t,
        m,
        valid: b.applies && b.valid(t, m),
        value: if b.applies { b.value(t, m) } else { 0.0 },
        note: b.note.clone().unwrap_or_default(),
    }
}

fn bounds_cmd(alg: &BilinearAlgorithm, t: usize, m: f64) -> Res<Output> {
    let rows: Vec<BoundRow> = bounds::bounds_for(alg).iter().map(|b| bound_row(b, t, m)).collect();
    let mut text = format!("{} ({}, q={}), evaluated at t={t}, M={m}\n", alg.name, shape(alg), alg.q());
    for r in &rows {
        let sub = if r.sub.is_empty() { String::new() } else { format!(" [{}]", r.sub) };
        if r.applies {
            let regime = if r.valid { "" } else { "  (outside its memory regime here)" };
            let _ = writeln!(
                text,
                "  {:<15}{:<7} {:<40} {:<20} value {:.4e}{regime}",
                r.formula, sub, r.expression, r.tightness, r.value
            );
        } else {
            let _ = writeln!(text, "  {:<15}{:<7} does not apply: {}", r.formula, sub, r.note);
        }
    }
    Output::new(text, &rows)
}

#[derive(Serialize)]
struct TableJson {
    family: &'static str,
    expr: &'static str,
    shape: String,
    q: usize,
    disconnected: String,
    formula: &'static str,
    expression: String,
    exponent: f64,
    tightness: String,
}

fn table1() -> Res<Output> {
    let rows = bounds::table1_report()?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<8} {:<36} {:<9} {:<5} {:<10} {:<15} {:<10} tightness",
        "family", "algorithm", "shape", "q", "disconn.", "formula", "exponent"
    );
    let json: Vec<TableJson> = rows
        .iter()
        .map(|r| TableJson {
            family: r.family,
            expr: r.expr,
            shape: format!("{}x{}x{}", r.m, r.n, r.p),
            q: r.q,
            disconnected: bounds::disconnected_label(&r.disconnected),
            formula: r.bound.formula.id(),
            expression: expression(&r.bound),
            exponent: r.bound.exponent,
            tightness: r.bound.tightness.to_string(),
        })
        .collect();
    for r in &json {
        let _ = writeln!(
            text,
            "{:<8} {:<36} {:<9} {:<5} {:<10} {:<15} {:<10.5} {}",
            r.family, r.expr, r.shape, r.q, r.disconnected, r.formula, r.exponent, r.tightness
        );
    }
    Ok(Output {
        text,
        data: bounds::table_csv(&rows),
        json: to_json(&json)?,
    })
}

fn blackbox(alg: &BilinearAlgorithm, omega0: f64, t: usize, m: f64) -> Res<Output> {
    let r = bounds::blackbox_compare(alg.m, alg.n, alg.p, alg.q(), omega0, t, m)?;
    let mut text = format!("{} ({}, q={}) against square blocks at omega0 = {omega0:.4}\n", alg.name, shape(alg), alg.q());
    let _ = writeln!(
        text,
        "  flops per level: {} vs {:.4} ({})",
        r.rect_flop_base,
        r.blackbox_flop_base,
        if r.rect_wins_flops { "rectangular wins" } else { "blackbox wins" }
    );
    let _ = writeln!(
        text,
        "  communication exponent: {:.4} vs {:.4}",
        r.rect_comm_exponent, r.blackbox_comm_exponent
    );
    if r.crossover {
        let _ = writeln!(text, "  crossover: fewer flops, but the blackbox words fall faster in M");
    }
    let _ = writeln!(
        text,
        "  at t={t}, M={m}: words {:.4e} vs {:.4e} ({} moves fewer)",
        r.rect_words,
        r.blackbox_words,
        if r.rect_moves_fewer_words { "rectangular" } else { "blackbox" }
    );
    Output::new(text, &[r])
}
