//! Communication bounds from an algorithm's structure.
//!
//! Every bound has the shape `a^t / (t^π · M^e)` where `e = log_b(a') − 1`
//! for an effective base `b`. Exponents are kept as exact [`LogRatio`]s so
//! that tightness is decided symbolically.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::algorithm::{BilinearAlgorithm, Dims};
use crate::catalog;
use crate::cdag::{compose_recursive, structural_report, StructStats, Sub};
use crate::error::{Error, Result};

/// `log_base(num)` for positive integers.
#[derive(Clone, Copy, Debug)]
pub struct LogRatio {
    pub num: u64,
    pub base: u64,
}

fn factor(mut x: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut k = 0;
        while x.is_multiple_of(p) {
            x /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += 1;
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

// Prime exponent vectors of several integers over their joint primes.
fn exponents(xs: &[u64]) -> Vec<Vec<i64>> {
    let fs: Vec<_> = xs.iter().map(|&x| factor(x)).collect();
    let mut primes: Vec<u64> = fs.iter().flatten().map(|f| f.0).collect();
    primes.sort_unstable();
    primes.dedup();
    fs.iter()
        .map(|f| {
            primes
                .iter()
                .map(|p| f.iter().find(|e| e.0 == *p).map_or(0, |e| e.1))
                .collect()
        })
        .collect()
}

/// `Some(r)` with `x = r·y` when the vectors are proportional (`y ≠ 0`).
fn proportion(x: &[i64], y: &[i64]) -> Option<Ratio<i64>> {
    let i = y.iter().position(|&v| v != 0)?;
    let r = Ratio::new(x[i], y[i]);
    x.iter()
        .zip(y)
        .all(|(&a, &b)| Ratio::from_integer(a) == r * b)
        .then_some(r)
}

impl LogRatio {
    pub fn new(num: u64, base: u64) -> Self {
        assert!(num >= 1 && base >= 2, "log_{base}({num}) is undefined");
        Self { num, base }
    }

    pub fn value(&self) -> f64 {
        (self.num as f64).ln() / (self.base as f64).ln()
    }

    /// The exact value when it is rational.
    pub fn as_rational(&self) -> Option<Ratio<i64>> {
        let v = exponents(&[self.num, self.base]);
        proportion(&v[0], &v[1])
    }
}

// `log_b a = log_d c`. Rational values compare exactly (a log of integers is
// rational iff the prime exponent vectors are proportional). Irrational
// values are equal when `(a, b)` and `(c, d)` are rational powers of one pair,
// e.g. `log_4 10 = log_16 100`; other coincidences would contradict the
// algebraic independence of logarithms of primes.
impl PartialEq for LogRatio {
    fn eq(&self, other: &Self) -> bool {
        let v = exponents(&[self.num, self.base, other.num, other.base]);
        match (proportion(&v[0], &v[1]), proportion(&v[2], &v[3])) {
            (Some(x), Some(y)) => x == y,
            (None, None) => {
                let r = proportion(&v[0], &v[2]);
                r.is_some() && r == proportion(&v[1], &v[3])
            }
            _ => false,
        }
    }
}

impl Eq for LogRatio {}

impl PartialOrd for LogRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else {
            self.value().partial_cmp(&other.value())
        }
    }
}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log_{}({})", self.base, self.num)
    }
}

impl Serialize for LogRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    ThmDecCon,
    ThmEncCon,
    CorDecDiscon,
    CorEncDiscon,
    UpperRecursive,
    TrivialIo,
}

impl Formula {
    pub fn id(&self) -> &'static str {
        match self {
            Formula::ThmDecCon => "thm-dec-con",
            Formula::ThmEncCon => "thm-enc-con",
            Formula::CorDecDiscon => "cor-dec-discon",
            Formula::CorEncDiscon => "cor-enc-discon",
            Formula::UpperRecursive => "upper-recursive",
            Formula::TrivialIo => "trivial-io",
        }
    }

    pub fn is_lower(&self) -> bool {
        !matches!(self, Formula::UpperRecursive)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tightness {
    Tight,
    TightUpToPolylog,
    NotTight,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl fmt::Display for Tightness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tightness::Tight => "tight",
            Tightness::TightUpToPolylog => "tight-up-to-polylog",
            Tightness::NotTight => "not-tight",
            Tightness::NotApplicable => "n/a",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub formula: Formula,
    /// Subgraph the bound is derived from, if any.
    pub sub: Option<Sub>,
    /// `a` in `a^t`.
    pub numerator: u64,
    /// Effective base `b`.
    pub base: u64,
    /// `log_b` of `q`, `q/X`, or (trivial bound) `b` itself.
    pub log: LogRatio,
    pub exponent: f64,
    /// `t` is raised to this `log`, when present.
    pub polylog: Option<LogRatio>,
    pub tightness: Tightness,
    /// False when the hypotheses fail; the report then only records why.
    pub applies: bool,
    pub note: Option<String>,
    /// The corollaries hold as stated only for `M` below `limit^t`.
    pub memory_limit_base: Option<u64>,
}

impl BoundReport {
    pub fn polylog_exponent(&self) -> f64 {
        self.polylog.map_or(0.0, |l| l.value())
    }

    /// `a^t / (t^π · M^e)`.
    pub fn value(&self, t: usize, m: f64) -> f64 {
        let t_f = t as f64;
        let poly = if self.polylog.is_some() && t > 0 { t_f.powf(self.polylog_exponent()) } else { 1.0 };
        (self.numerator as f64).powf(t_f) / (poly * m.powf(self.exponent))
    }

    /// Whether `(t, M)` is in the regime where the formula was derived.
    pub fn valid(&self, t: usize, m: f64) -> bool {
        self.memory_limit_base
            .is_none_or(|b| m < (b as f64).powi(t as i32))
    }
}

fn report(formula: Formula, sub: Option<Sub>, numerator: u64, base: u64, log_of: u64, polylog: bool) -> BoundReport {
    let log = LogRatio::new(log_of, base);
    BoundReport {
        formula,
        sub,
        numerator,
        base,
        log,
        exponent: log.value() - 1.0,
        polylog: polylog.then_some(log),
        tightness: Tightness::NotApplicable,
        applies: true,
        note: None,
        memory_limit_base: None,
    }
}

fn not_applicable(formula: Formula, sub: Sub, why: &str) -> BoundReport {
    BoundReport {
        formula,
        sub: Some(sub),
        numerator: 0,
        base: 0,
        log: LogRatio::new(1, 2),
        exponent: f64::NAN,
        polylog: None,
        tightness: Tightness::NotApplicable,
        applies: false,
        note: Some(why.to_string()),
        memory_limit_base: None,
    }
}

/// Every bound whose hypotheses the structure satisfies, plus the
/// recursive upper bound and the trivial I/O bound.
///
/// `stats` is the report of the depth-one graph.
pub fn theorem_bounds(stats: &StructStats, dims: Dims) -> Vec<BoundReport> {
    let q = dims.q as u64;
    let n_star = dims.n_star() as u64;
    let upper = LogRatio::new(q, n_star);
    let mut out = Vec::new();

    let dec = stats.part(Sub::DecC);
    let mp = dims.mp() as u64;
    if n_star < 2 {
        return out;
    }
    if dec.components == 1 {
        out.push(report(Formula::ThmDecCon, Some(Sub::DecC), q, mp, q, false));
    } else if !dec.equal_components {
        out.push(not_applicable(Formula::CorDecDiscon, Sub::DecC, "components differ in size"));
    } else if mp / (dec.components as u64) < 2 {
        out.push(not_applicable(Formula::CorDecDiscon, Sub::DecC, "every component has a single output"));
    } else {
        let x = dec.components as u64;
        let mut r = report(Formula::CorDecDiscon, Some(Sub::DecC), q, mp / x, q / x, false);
        r.memory_limit_base = Some(mp / x);
        out.push(r);
    }

    for sub in [Sub::EncA, Sub::EncB] {
        let enc = stats.part(sub);
        let n = enc.n_entries as u64;
        let formula = if enc.components == 1 { Formula::ThmEncCon } else { Formula::CorEncDiscon };
        if enc.multiply_copied {
            // Rules out both encoder results; reported under the theorem.
            out.push(not_applicable(Formula::ThmEncCon, sub, "multiply-copied inputs"));
        } else if enc.components == 1 {
            out.push(report(formula, Some(sub), q, n, q, true));
        } else if !enc.equal_components {
            out.push(not_applicable(formula, sub, "components differ in size"));
        } else if n / (enc.components as u64) < 2 {
            out.push(not_applicable(formula, sub, "every component has a single input"));
        } else {
            let x = enc.components as u64;
            let mut r = report(formula, Some(sub), q, n / x, q / x, true);
            r.memory_limit_base = Some(n / x);
            out.push(r);
        }
    }

    for r in &mut out {
        if r.applies {
            r.tightness = match (r.log == upper, r.polylog.is_some()) {
                (true, false) => Tightness::Tight,
                (true, true) => Tightness::TightUpToPolylog,
                (false, _) => Tightness::NotTight,
            };
        }
    }
    out.push(report(Formula::UpperRecursive, None, q, n_star, q, false));
    out.push(report(Formula::TrivialIo, None, n_star, n_star, n_star, false));
    out
}

/// [`theorem_bounds`] for the depth-one graph of `alg`.
pub fn bounds_for(alg: &BilinearAlgorithm) -> Vec<BoundReport> {
    let stats = structural_report(&compose_recursive(alg, 1, false), alg);
    theorem_bounds(&stats, alg.dims())
}

/// Lower bounds worth listing: the decoder bound, and when it is not tight
/// the strongest encoder bound (smallest exponent; a theorem beats a
/// corollary on ties). Theorems come before corollaries, the decoder first.
pub fn select_lower(reports: &[BoundReport]) -> Vec<BoundReport> {
    let lower: Vec<&BoundReport> = reports.iter().filter(|r| r.applies && r.formula.is_lower() && r.sub.is_some()).collect();
    let mut chosen: Vec<BoundReport> = lower.iter().filter(|r| r.sub == Some(Sub::DecC)).map(|r| (*r).clone()).collect();
    if chosen.iter().all(|r| r.tightness != Tightness::Tight) {
        let best = lower
            .iter()
            .filter(|r| r.sub != Some(Sub::DecC))
            .min_by(|a, b| {
                a.log
                    .partial_cmp(&b.log)
                    .unwrap_or(Ordering::Equal)
                    .then(a.formula.cmp(&b.formula))
                    .then(a.sub.cmp(&b.sub))
            });
        chosen.extend(best.map(|r| (*r).clone()));
    }
    chosen.sort_by_key(|r| (r.formula != Formula::ThmDecCon && r.formula != Formula::ThmEncCon, r.sub != Some(Sub::DecC)));
    chosen
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub family: &'static str,
    /// Catalog expression the algorithm is built from.
    pub expr: &'static str,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub disconnected: Vec<Sub>,
    pub bound: BoundReport,
}

/// Table rows in display order: family, catalog expression.
pub const TABLE_ALGORITHMS: [(&str, &str); 15] = [
    ("bini", "bini-322-encA"),
    ("bini", "bini-322-decC"),
    ("bini", "bini-232-encA"),
    ("bini", "bini-232-encB"),
    ("bini", "bini-223-encB"),
    ("bini", "bini-223-decC"),
    ("bini", "bini-322-encA*bini-232-encB"),
    ("bini", "bini-322-encA*bini-232-encB*bini-223-encB"),
    ("hopcroft-kerr", "hk-323"),
    ("hopcroft-kerr", "hk-332"),
    ("hopcroft-kerr", "hk-233"),
    ("hopcroft-kerr", "hk-323*hk-332"),
    ("hopcroft-kerr", "hk-233*hk-323"),
    ("hopcroft-kerr", "hk-332*hk-233"),
    ("hopcroft-kerr", "hk-323*hk-233*hk-332"),
];

/// One row per listed bound of each algorithm in [`TABLE_ALGORITHMS`].
pub fn table1_report() -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (family, expr) in TABLE_ALGORITHMS {
        let alg = catalog::resolve(expr)?;
        let stats = structural_report(&compose_recursive(&alg, 1, false), &alg);
        let disconnected: Vec<Sub> = stats.parts.iter().filter(|p| p.components > 1).map(|p| p.sub).collect();
        for bound in select_lower(&theorem_bounds(&stats, alg.dims())) {
            rows.push(TableRow {
                family,
                expr,
                m: alg.m,
                n: alg.n,
                p: alg.p,
                q: alg.q(),
                disconnected: disconnected.clone(),
                bound,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `family,shape,q,disconnected,formula,base,log,exponent,polylog,tightness`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("family,shape,q,disconnected,formula,base,log,exponent,polylog,tightness\n");
    for r in rows {
        out.push_str(&format!(
            "{},{}x{}x{},{},{},{},{},{},{:.12},{},{}\n",
            r.family,
            r.m,
            r.n,
            r.p,
            r.q,
            disconnected_label(&r.disconnected),
            r.bound.formula,
            r.bound.base,
            r.bound.log,
            r.bound.exponent,
            r.bound.polylog.map_or(String::new(), |l| l.to_string()),
            r.bound.tightness,
        ));
    }
    out
}

pub fn disconnected_label(subs: &[Sub]) -> String {
    if subs.is_empty() {
        "none".into()
    } else {
        subs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlackboxReport {
    /// Per-level flop growth: `q` and `mp·n^(ω0−2)`.
    pub rect_flop_base: f64,
    pub blackbox_flop_base: f64,
    pub rect_wins_flops: bool,
    /// `W ~ flops / M^(x−1)` with `x = log_mp q` and `x = ω0/2`.
    pub rect_comm_exponent: f64,
    pub blackbox_comm_exponent: f64,
    /// Fewer flops, but the blackbox words fall faster with `M`, so for
    /// large enough `M` at a given `t` it moves fewer words.
    pub crossover: bool,
    pub rect_flops: f64,
    pub blackbox_flops: f64,
    pub rect_words: f64,
    pub blackbox_words: f64,
    /// At the requested `(t, M)`.
    pub rect_moves_fewer_words: bool,
}

/// Compare the rectangular algorithm with splitting into square
/// `n^t × n^t` products done by an `ω0` algorithm.
pub fn blackbox_compare(m: usize, n: usize, p: usize, q: usize, omega0: f64, t: usize, mem: f64) -> Result<BlackboxReport> {
    if n > m || n > p {
        return Err(Error::Precondition(format!(
            "blackbox splitting into square blocks assumes n is the smallest dimension (n ≤ m, n ≤ p); got ⟨{m},{n},{p}⟩"
        )));
    }
    if !(omega0 > 2.0 && omega0 <= 3.0) {
        return Err(Error::Precondition(format!("omega0 = {omega0} is outside (2, 3]")));
    }
    let rect_flop_base = q as f64;
    let blackbox_flop_base = (m * p) as f64 * (n as f64).powf(omega0 - 2.0);
    let rect_comm_exponent = (q as f64).ln() / ((m * p) as f64).ln();
    let blackbox_comm_exponent = omega0 / 2.0;
    let rect_wins_flops = rect_flop_base < blackbox_flop_base;
    let tt = t as i32;
    let rect_flops = rect_flop_base.powi(tt);
    let blackbox_flops = blackbox_flop_base.powi(tt);
    let rect_words = rect_flops / mem.powf(rect_comm_exponent - 1.0);
    let blackbox_words = blackbox_flops / mem.powf(blackbox_comm_exponent - 1.0);
    Ok(BlackboxReport {
        rect_flop_base,
        blackbox_flop_base,
        rect_wins_flops,
        rect_comm_exponent,
        blackbox_comm_exponent,
        crossover: rect_wins_flops && blackbox_comm_exponent > rect_comm_exponent,
        rect_flops,
        blackbox_flops,
        rect_words,
        blackbox_words,
        rect_moves_fewer_words: rect_words < blackbox_words,
    })
}
