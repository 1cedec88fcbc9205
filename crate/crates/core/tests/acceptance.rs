//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the lines always show up in the
//! `cargo test` output. Exits non-zero if any criterion outside `KNOWN_RED`
//! fails.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectcomm::bounds::{blackbox_compare, disconnected_label, table1_report, LogRatio};
use rectcomm::catalog;
use rectcomm::cdag::{compose_recursive, structural_report, Sub};
use rectcomm::executor::{approximation_error, multiply_recursive, Matrix};
use rectcomm::expansion::{cheeger_bound, edge_expansion_exact, ExpansionOptions, Limits};
use rectcomm::graph::Graph;
use rectcomm::memsim::{fit_exponent, recurrence_cost, sweep, FitMode, Layout};
use rectcomm::{BilinearAlgorithm, Symmetry};

mod common;

/// The fitted slope at desk-scale depth stays steeper than the asymptotic
/// exponent; see the slope line for the measured value.
const KNOWN_RED: &[&str] = &["6a"];

const NINE: [&str; 9] = [
    "bini-322-encA",
    "bini-322-decC",
    "bini-232-encA",
    "bini-232-encB",
    "bini-223-encB",
    "bini-223-decC",
    "hk-323",
    "hk-233",
    "hk-332",
];

struct Check {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    budget: Duration,
    elapsed: Duration,
}

fn run(id: &'static str, title: &'static str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (pass, detail) = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let check = Check {
        id,
        title,
        pass: pass && elapsed <= budget,
        detail,
        budget,
        elapsed,
    };
    println!(
        "[{}] {:<3} {:<34} {:>7.1}s / {:>4}s  {}",
        if check.pass { "PASS" } else { "FAIL" },
        check.id,
        check.title,
        check.elapsed.as_secs_f64(),
        check.budget.as_secs(),
        check.detail
    );
    check
}

fn catalog_validation() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in NINE.iter().copied().chain(["strassen", "classical(2,2,2)", "classical(3,2,2)"]) {
        let alg = catalog::resolve(name).unwrap();
        let rep = alg.validate().unwrap();
        let want = if name.starts_with("bini") { "lambda-exact" } else { "exact" };
        // Residuals may only carry positive powers of λ.
        let positive_only = rep.failures.iter().all(|f| f.residual.min_degree().is_some_and(|k| k >= 1));
        if rep.status() != want || !positive_only {
            ok = false;
            notes.push(format!("{name}: {}", rep.status()));
        }
        // Every transpose/rotation image keeps the status.
        for sym in Symmetry::all() {
            if sym.apply(&alg).validate().unwrap().status() != want {
                ok = false;
                notes.push(format!("{name}@{sym}"));
            }
        }
    }
    let detail = if ok {
        "9 catalog variants plus strassen and classical, all 6 images each".to_string()
    } else {
        notes.join(", ")
    };
    (ok, detail)
}

fn omega_values() -> (bool, String) {
    let bini = catalog::resolve("bini-322-encA*bini-232-encB*bini-223-encB").unwrap();
    let hk = catalog::resolve("hk-323*hk-233*hk-332").unwrap();
    let omega = |a: &BilinearAlgorithm| (a.q() as f64).ln() / (a.m as f64).ln();
    let square = |a: &BilinearAlgorithm| a.m == a.n && a.n == a.p;
    let (wb, wh) = (omega(&bini), omega(&hk));
    let ok = square(&bini)
        && square(&hk)
        && (bini.m, bini.q()) == (12, 1000)
        && (hk.m, hk.q()) == (18, 3375)
        && (wb - 2.7799).abs() <= 1e-3
        && (wh - 2.8108).abs() <= 1e-3
        && (LogRatio::new(1000, 12).value() - wb).abs() < 1e-12;
    (ok, format!("Bini <12,12,12>=1000: {wb:.4}; HK <18,18,18>=3375: {wh:.4} (tol 1e-3)"))
}

fn table_golden() -> (bool, String) {
    let rows = table1_report().unwrap();
    if rows.len() != common::TABLE.len() {
        return (false, format!("{} rows, want {}", rows.len(), common::TABLE.len()));
    }
    let mut bad = Vec::new();
    for (row, &(shape, disc, formula, base, arg, poly, tight)) in rows.iter().zip(common::TABLE) {
        let want = (arg as f64).ln() / (base as f64).ln() - 1.0;
        let same = (row.m, row.n, row.p, row.q) == shape
            && disconnected_label(&row.disconnected) == disc
            && row.bound.formula.id() == formula
            && (row.bound.base, row.bound.log.num) == (base, arg)
            && row.bound.polylog.is_some() == poly
            && row.bound.tightness == tight
            && ((row.bound.exponent - want) / want).abs() < 1e-12;
        if !same {
            bad.push(format!("{} {}", row.expr, row.bound.formula));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} rows match (exponent rel. tol 1e-12)", rows.len())
    } else {
        bad.join(", ")
    };
    (bad.is_empty(), detail)
}

fn cdag_laws() -> (bool, String) {
    let mut bad = Vec::new();
    let mut checked = 0;
    for alg in catalog::all() {
        let base = structural_report(&compose_recursive(&alg, 1, false), &alg);
        let d = alg.dims();
        let q = alg.q() as u64;
        let size = |sub| match sub {
            Sub::EncA => d.mn(),
            Sub::EncB => d.np(),
            Sub::DecC => d.mp(),
        } as u64;
        let classical = alg.name.starts_with("classical");
        let copied = |s: &rectcomm::cdag::StructStats| s.part(Sub::EncA).multiply_copied || s.part(Sub::EncB).multiply_copied;
        if copied(&base) != classical {
            bad.push(format!("{} multiply-copied at t=1", alg.name));
        }
        for t in 1..=4u32 {
            let s = structural_report(&compose_recursive(&alg, t as usize, false), &alg);
            // The plain graph merges multiply-copied inputs, so count levels
            // on the relaxed one.
            let relaxed = structural_report(&compose_recursive(&alg, t as usize, true), &alg);
            for sub in Sub::ALL {
                let x = size(sub);
                let want: Vec<u64> = (1..=t + 1).map(|i| x.pow(t + 1 - i) * q.pow(i - 1)).collect();
                let part = s.part(sub);
                if relaxed.part(sub).level_sizes != want || (!classical && part.level_sizes != want) {
                    bad.push(format!("{} t={t} {sub} levels", alg.name));
                }
                if part.components != base.part(sub).components.pow(t) {
                    bad.push(format!("{} t={t} {sub} components", alg.name));
                }
            }
            if s.part(Sub::DecC).max_degree > d.mp() + 2 {
                bad.push(format!("{} t={t} decoder degree", alg.name));
            }
            if classical && t >= 2 && !copied(&s) {
                bad.push(format!("{} t={t} not multiply-copied", alg.name));
            }
            checked += 1;
        }
    }
    let bini = catalog::load("bini-322-encA").unwrap();
    let bini_comp: Vec<usize> = (1..=4)
        .map(|t| structural_report(&compose_recursive(&bini, t, false), &bini).part(Sub::EncA).components)
        .collect();
    if bini_comp != [2, 4, 8, 16] {
        bad.push(format!("Bini EncA components {bini_comp:?}"));
    }
    let detail = if bad.is_empty() {
        format!("{checked} (algorithm, t) pairs; Bini Enc_tA components {bini_comp:?}")
    } else {
        bad.join(", ")
    };
    (bad.is_empty(), detail)
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(2..=16usize);
    let m = rng.gen_range(1..=3 * n);
    Graph::from_edges(n, (0..m).map(|_| (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32))))
}

fn expansion() -> (bool, String) {
    let opts = ExpansionOptions {
        limits: Limits { exhaustive: 64, small_set: 8 },
        degree: None,
    };
    let h = |g: &Graph| edge_expansion_exact(g, None, &opts).unwrap().h().unwrap();
    let mut bad = Vec::new();

    let bini = catalog::load("bini-322-encA").unwrap();
    let enc = compose_recursive(&bini, 1, true).subgraph(Sub::EncA).0;
    if h(&enc) != 0.0 {
        bad.push("Bini Enc_1A h != 0".to_string());
    }
    let mut connected = 0;
    for alg in catalog::all() {
        let g = compose_recursive(&alg, 1, true);
        for sub in Sub::ALL {
            let sg = g.subgraph(sub).0;
            if sg.is_connected() {
                connected += 1;
                if h(&sg) <= 0.0 {
                    bad.push(format!("{} {sub} h = 0", alg.name));
                }
            }
        }
    }
    let hk = catalog::load("hk-323").unwrap();
    let dec = compose_recursive(&hk, 1, true).subgraph(Sub::DecC).0;
    let h_dec = h(&dec);
    let c = cheeger_bound(&dec, None);
    if !(c.lower <= h_dec && h_dec <= c.upper) {
        bad.push(format!("HK Dec_1C h = {h_dec} outside [{}, {}]", c.lower, c.upper));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let g = random_graph(&mut rng);
        let p = edge_expansion_exact(&g, None, &ExpansionOptions::default()).unwrap();
        if p.entries.windows(2).any(|w| w[1].h_s > w[0].h_s) {
            bad.push(format!("random graph {i} not monotone"));
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "{connected} connected base parts; HK Dec_1C h = {h_dec:.6} in [{:.6}, {:.6}]; 100 random graphs monotone",
            c.lower, c.upper
        )
    } else {
        bad.join(", ")
    };
    (bad.is_empty(), detail)
}

struct SlopeRun {
    t: usize,
    slope: f64,
    stderr: f64,
    bracket_ok: bool,
    bracketed: usize,
}

fn hk_sweep(t: usize) -> SlopeRun {
    let alg = catalog::load("hk-323").unwrap();
    let (q, e) = (15f64, 15f64.ln() / 9f64.ln() - 1.0);
    let ms: Vec<usize> = (8..=13).map(|k| 1 << k).collect();
    let res = sweep(&alg, t, &ms, Layout::RecursiveBlocked).unwrap();
    let pts: Vec<(f64, f64)> = res.iter().map(|(m, s)| (*m as f64, s.words as f64)).collect();
    let fit = fit_exponent(&pts, FitMode::SlopeLogX).unwrap();
    let (mut ok, mut n) = (true, 0);
    for (m, s) in &res {
        if 4 * *m as u64 >= s.footprint {
            continue;
        }
        n += 1;
        let lower = q.powi(t as i32) / (*m as f64).powf(e) / 16.0;
        ok &= s.words as f64 >= lower && BigUint::from(s.words) <= recurrence_cost(&alg, t, *m as u64);
    }
    SlopeRun {
        t,
        slope: fit.slope,
        stderr: fit.stderr,
        bracket_ok: ok && n > 0,
        bracketed: n,
    }
}

fn rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-50i64..=50)), BigInt::from(rng.gen_range(1i64..=12)))
}

fn triple_loop(a: &Matrix<BigRational>, b: &Matrix<BigRational>) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); a.rows * b.cols];
    for i in 0..a.rows {
        for k in 0..a.cols {
            for j in 0..b.cols {
                c[i * b.cols + j] += &a.data[i * a.cols + k] * &b.data[k * b.cols + j];
            }
        }
    }
    c
}

fn executor_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = Vec::new();
    let mut pairs = 0;
    for name in ["hk-323", "hk-233", "hk-332", "classical(2,2,2)", "classical(3,2,3)"] {
        let alg = catalog::resolve(name).unwrap();
        for t in 1..=3u32 {
            let (mt, nt, pt) = (alg.m.pow(t), alg.n.pow(t), alg.p.pow(t));
            for _ in 0..20 {
                let a = Matrix::from_fn(mt, nt, |_, _| rational(&mut rng));
                let b = Matrix::from_fn(nt, pt, |_, _| rational(&mut rng));
                let (c, _) = multiply_recursive(&alg, &a, &b, t as usize, None).unwrap();
                if c.data != triple_loop(&a, &b) {
                    bad.push(format!("{name} t={t}"));
                }
                pairs += 1;
            }
        }
    }
    let lambdas: Vec<BigRational> = (4..=8).map(|k| BigRational::new(1.into(), BigInt::from(1u64 << k))).collect();
    let mut all_ratios = Vec::new();
    for name in NINE.iter().filter(|n| n.starts_with("bini")) {
        let alg = catalog::load(name).unwrap();
        let pts = approximation_error(&alg, 1, &lambdas, 8, 1).unwrap();
        for p in &pts[1..] {
            let r = p.ratio_to_previous.unwrap_or(f64::NAN);
            if !(0.4..=0.6).contains(&r) {
                bad.push(format!("{name} ratio {r}"));
            }
            all_ratios.push(r);
        }
    }
    let (lo, hi) = all_ratios.iter().fold((f64::MAX, f64::MIN), |(l, h), &r| (l.min(r), h.max(r)));
    let detail = if bad.is_empty() {
        format!("{pairs} exact pairs; Bini error ratios in [{lo:.3}, {hi:.3}]")
    } else {
        bad.join(", ")
    };
    (bad.is_empty(), detail)
}

fn blackbox() -> (bool, String) {
    let r = blackbox_compare(3, 2, 3, 15, 7f64.log2(), 4, 1024.0).unwrap();
    let (fr, fb) = (r.rect_flop_base, r.blackbox_flop_base);
    let (er, eb) = (format!("{:.4}", r.rect_comm_exponent), format!("{:.4}", r.blackbox_comm_exponent));
    // 9 · 2^(log2 7 − 2) is exactly 63/4.
    let ok = r.rect_wins_flops
        && fr == 15.0
        && (fb - 15.75).abs() < 1e-12
        && er == "1.2325"
        && eb == "1.4037"
        && r.rect_comm_exponent < r.blackbox_comm_exponent;
    (
        ok,
        format!(
            "flops/level {fr} < {fb:.4}; comm exponent {er} < {eb}; blackbox words fall faster in M: {}",
            r.crossover
        ),
    )
}

fn main() {
    println!("acceptance: one line per criterion, [result] id title elapsed/budget detail");
    let mut checks = vec![
        run("1", "catalog validation", 10, catalog_validation),
        run("2", "square exponents", 1, omega_values),
        run("3", "lower-bound table", 10, table_golden),
        run("4", "CDAG structure, t <= 4", 60, cdag_laws),
        run("5", "edge expansion", 300, expansion),
    ];

    let target = -(15f64.ln() / 9f64.ln() - 1.0);
    let mut runs: Vec<SlopeRun> = Vec::new();
    checks.push(run("6a", "HK slope of log W vs log M", 900, || {
        // t = 6 only shows the trend; the criterion is judged at t = 5.
        runs = [4, 5, 6].into_iter().map(hk_sweep).collect();
        let judged = &runs[1];
        let trend: Vec<String> = runs.iter().map(|r| format!("t={}: {:.4} ± {:.4}", r.t, r.slope, r.stderr)).collect();
        (
            (judged.slope - target).abs() <= 0.08,
            format!("{} (target {target:.5} ± 0.08 at t=5)", trend.join(", ")),
        )
    }));
    checks.push(run("6b", "HK words bracketed", 900, || {
        let ok = runs.iter().all(|r| r.bracket_ok);
        let n: Vec<String> = runs.iter().map(|r| format!("t={}: {} points", r.t, r.bracketed)).collect();
        (ok, format!("2^-4 q^t/M^e <= W <= recurrence, M < footprint/4 ({})", n.join(", ")))
    }));

    checks.push(run("7", "executor oracle", 300, executor_oracle));
    checks.push(run("8", "blackbox comparison", 1, blackbox));

    let unexpected: Vec<&str> = checks.iter().filter(|c| !c.pass && !KNOWN_RED.contains(&c.id)).map(|c| c.id).collect();
    let red: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    println!(
        "acceptance: {} of {} green; red: {}; known red: {}",
        checks.len() - red.len(),
        checks.len(),
        if red.is_empty() { "none".into() } else { red.join(", ") },
        KNOWN_RED.join(", ")
    );
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
