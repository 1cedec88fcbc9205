use std::collections::VecDeque;

use num_bigint::BigUint;
use proptest::prelude::*;
use rectcomm::catalog;
use rectcomm::memsim::{
    footprint, fit_exponent, recurrence_cost, replay, simulate_lru, sweep, FitMode, Layout, Lru, MemConfig, Sink, TraceStats,
};
use rectcomm::BilinearAlgorithm;

const LAYOUTS: [Layout; 2] = [Layout::RecursiveBlocked, Layout::RowMajor];

fn cfg(m: usize, layout: Layout) -> MemConfig {
    MemConfig { m, layout, cutoff: 0 }
}

fn compulsory(alg: &BilinearAlgorithm, t: usize) -> u64 {
    let d = alg.dims();
    [d.mn(), d.np(), d.mp()].iter().map(|&x| (x as u64).pow(t as u32)).sum()
}

/// Straightforward LRU over a deque, used as the reference model.
struct NaiveLru {
    cap: usize,
    lines: VecDeque<(u32, bool)>,
    words: u64,
}

impl NaiveLru {
    fn access(&mut self, a: u32, write: bool) {
        let dirty = match self.lines.iter().position(|l| l.0 == a) {
            Some(i) => self.lines.remove(i).unwrap().1,
            None => {
                if !write {
                    self.words += 1;
                }
                if self.lines.len() == self.cap && self.lines.pop_back().unwrap().1 {
                    self.words += 1;
                }
                false
            }
        };
        self.lines.push_front((a, dirty || write));
    }

    fn finish(self) -> u64 {
        self.words + self.lines.iter().filter(|l| l.1).count() as u64
    }
}

impl Sink for NaiveLru {
    fn read(&mut self, a: u32) {
        self.access(a, false);
    }
    fn write(&mut self, a: u32) {
        self.access(a, true);
    }
    fn discard(&mut self, a: u32) {
        self.lines.retain(|l| l.0 != a);
    }
}

/// Counts touches and checks that no address is read before it is written,
/// except for the two input operands.
#[derive(Default)]
struct Checker {
    written: Vec<bool>,
    inputs: u32,
    stats: TraceStats,
}

impl Sink for Checker {
    fn read(&mut self, a: u32) {
        assert!(a < self.inputs || self.written[a as usize], "read of undefined word {a}");
        self.stats.reads += 1;
    }
    fn write(&mut self, a: u32) {
        self.written[a as usize] = true;
        self.stats.writes += 1;
    }
    fn discard(&mut self, a: u32) {
        self.written[a as usize] = false;
    }
    fn flop(&mut self) {
        self.stats.flops += 1;
    }
}

/// Touch count derived from the schedule description, level by level.
fn expected_touches(alg: &BilinearAlgorithm, t: usize) -> u64 {
    let d = alg.dims();
    let q = alg.q() as u64;
    let (nu, nv) = (alg.u.nnz() as u64, alg.v.nnz() as u64);
    // Decode: one read of P per entry, plus a write per C block, plus a read
    // for every update after the first of each block.
    let w_rows = alg.w.rows();
    let dec_rw: u64 = w_rows.iter().map(|r| 2 * r.len() as u64 - 1).sum::<u64>() + q;
    let mut total = 0;
    for tau in 1..=t as u32 {
        let nodes = q.pow(t as u32 - tau);
        let (a, b, c) = ((d.mn() as u64).pow(tau - 1), (d.np() as u64).pow(tau - 1), (d.mp() as u64).pow(tau - 1));
        total += nodes * ((nu + q) * a + (nv + q) * b + dec_rw * c);
    }
    total + 3 * q.pow(t as u32)
}

#[test]
fn schedule_is_well_formed_and_counted() {
    for alg in catalog::all() {
        for t in 1..=3 {
            for layout in LAYOUTS {
                let fp = footprint(&alg, t);
                let d = alg.dims();
                let mut ck = Checker {
                    written: vec![false; fp as usize],
                    inputs: ((d.mn() as u64).pow(t as u32) + (d.np() as u64).pow(t as u32)) as u32,
                    ..Default::default()
                };
                replay(&alg, t, layout, 0, &mut ck).unwrap();
                assert_eq!(ck.stats.flops, (alg.q() as u64).pow(t as u32));
                assert_eq!(ck.stats.reads + ck.stats.writes, expected_touches(&alg, t), "{} t={t}", alg.name);
                // Every output word ends up written.
                let c0 = ck.inputs as usize;
                assert!(ck.written[c0..c0 + (d.mp() as u64).pow(t as u32) as usize].iter().all(|&w| w));
            }
        }
    }
}

#[test]
fn cutoff_switches_to_classical_leaves() {
    let alg = catalog::load("strassen").unwrap();
    let cfg = MemConfig { m: 64, layout: Layout::RecursiveBlocked, cutoff: 2 };
    let s = simulate_lru(&alg, 4, &cfg).unwrap();
    assert_eq!(s.flops, 7u64.pow(2) * 64);
}

#[test]
fn large_memory_moves_only_compulsory_words() {
    for alg in catalog::all() {
        for t in 1..=3 {
            for layout in LAYOUTS {
                let fp = footprint(&alg, t) as usize;
                let s = simulate_lru(&alg, t, &cfg(fp, layout)).unwrap();
                assert_eq!(s.words, compulsory(&alg, t), "{} t={t}", alg.name);
            }
        }
    }
}

#[test]
fn words_never_increase_with_memory() {
    for (name, t) in [("hk-323", 3), ("strassen", 4), ("bini-322-encA", 3)] {
        let alg = catalog::load(name).unwrap();
        for layout in LAYOUTS {
            let ms: Vec<usize> = (2..=12).map(|k| 1 << k).collect();
            let res = sweep(&alg, t, &ms, layout).unwrap();
            for w in res.windows(2) {
                assert!(w[1].1.words <= w[0].1.words, "{name} {layout}: {:?}", w);
            }
            assert!(res.iter().all(|(_, s)| s.words >= compulsory(&alg, t)));
        }
    }
}

#[test]
fn simulation_is_bracketed() {
    // Lower: 2^-4 of q^t / M^(log_mp q - 1). Upper: the recurrence.
    for (name, t) in [("hk-323", 4), ("strassen", 5)] {
        let alg = catalog::load(name).unwrap();
        let d = alg.dims();
        let e = (alg.q() as f64).ln() / (d.mp() as f64).ln() - 1.0;
        let ms: Vec<usize> = (8..=13).map(|k| 1 << k).collect();
        for (m, s) in sweep(&alg, t, &ms, Layout::RecursiveBlocked).unwrap() {
            if 4 * m as u64 >= s.footprint {
                continue;
            }
            let lower = (alg.q() as f64).powi(t as i32) / (m as f64).powf(e) / 16.0;
            assert!(s.words as f64 >= lower, "{name} M={m}");
            assert!(BigUint::from(s.words) <= recurrence_cost(&alg, t, m as u64), "{name} M={m}");
        }
    }
}

#[test]
fn recurrence_tracks_the_cost_formula() {
    let alg = catalog::load("hk-323").unwrap();
    let e = 15f64.ln() / 9f64.ln() - 1.0;
    for m in [27u64, 300, 5000] {
        let t_min = (0..).find(|&t| 3 * 9u64.pow(t) > m).unwrap() as usize;
        let ratios: Vec<f64> = (t_min..=t_min + 4)
            .map(|t| {
                let w: f64 = recurrence_cost(&alg, t, m).to_string().parse().unwrap();
                w / (15f64.powi(t as i32) / (m as f64).powf(e))
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi / lo < 4.0, "M={m}: {ratios:?}");
    }
    for t in 0..4 {
        let n = 9u64.pow(t as u32);
        assert_eq!(recurrence_cost(&alg, t, 3 * n), BigUint::from(3 * n));
    }
}

#[test]
fn measured_slope_is_steeper_at_shallow_depth() {
    // With M spanning under two recursion levels, LRU reuse in levels that
    // nearly fit makes W fall faster than the asymptotic rate; deeper runs
    // move the fitted slope toward it.
    let alg = catalog::load("hk-323").unwrap();
    let target = -(15f64.ln() / 9f64.ln() - 1.0);
    let ms: Vec<usize> = (8..=13).map(|k| 1 << k).collect();
    let slope = |t| {
        let pts: Vec<_> = sweep(&alg, t, &ms, Layout::RecursiveBlocked)
            .unwrap()
            .into_iter()
            .map(|(m, s)| (m as f64, s.words as f64))
            .collect();
        fit_exponent(&pts, FitMode::SlopeLogX).unwrap().slope
    };
    let (s4, s5) = (slope(4), slope(5));
    assert!(s4 < target && s5 < target);
    assert!((s5 - target).abs() < (s4 - target).abs(), "{s4} {s5}");
}

#[test]
fn layouts_agree_when_everything_fits_and_differ_otherwise() {
    let alg = catalog::load("hk-323").unwrap();
    let fp = footprint(&alg, 3) as usize;
    let a = simulate_lru(&alg, 3, &cfg(fp, Layout::RecursiveBlocked)).unwrap();
    let b = simulate_lru(&alg, 3, &cfg(fp, Layout::RowMajor)).unwrap();
    assert_eq!(a.words, b.words);
    let a = simulate_lru(&alg, 4, &cfg(256, Layout::RecursiveBlocked)).unwrap();
    let b = simulate_lru(&alg, 4, &cfg(256, Layout::RowMajor)).unwrap();
    assert_eq!(a.accesses, b.accesses);
    assert_ne!(a.words, b.words);
}

#[derive(Clone, Debug)]
enum Op {
    Read(u32),
    Write(u32),
    Discard(u32),
}

fn arb_trace() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        (0u8..5, 0u32..24).prop_map(|(k, a)| match k {
            0 | 1 => Op::Read(a),
            2 | 3 => Op::Write(a),
            _ => Op::Discard(a),
        }),
        0..300,
    )
}

fn run<S: Sink>(sink: &mut S, trace: &[Op]) {
    for op in trace {
        match *op {
            Op::Read(a) => sink.read(a),
            Op::Write(a) => sink.write(a),
            Op::Discard(a) => sink.discard(a),
        }
    }
}

proptest! {
    #[test]
    fn lru_matches_reference(trace in arb_trace(), cap in 1usize..12) {
        let mut fast = Lru::new(cap, 24);
        let mut slow = NaiveLru { cap, lines: VecDeque::new(), words: 0 };
        run(&mut fast, &trace);
        run(&mut slow, &trace);
        prop_assert_eq!(fast.finish().words, slow.finish());
    }

    #[test]
    fn lru_inclusion(trace in arb_trace(), cap in 1usize..12) {
        let words = |c| {
            let mut l = Lru::new(c, 24);
            run(&mut l, &trace);
            l.finish().words
        };
        prop_assert!(words(2 * cap) <= words(cap));
    }

    #[test]
    fn deterministic(t in 1usize..3, m in 3usize..200) {
        let alg = catalog::load("bini-322-encA").unwrap();
        let c = cfg(m, Layout::RecursiveBlocked);
        prop_assert_eq!(simulate_lru(&alg, t, &c).unwrap(), simulate_lru(&alg, t, &c).unwrap());
    }
}
