//! Words moved by the recursive algorithm in a two-level memory.
//!
//! Two views of the same schedule:
//!
//! * [`recurrence_cost`] evaluates the classic recurrence exactly;
//! * [`simulate_lru`] replays the executor's schedule word by word against
//!   a fully associative LRU fast memory of `M` words.
//!
//! Schedule of a node at remaining depth `τ ≥ 1` (operands `A'`, `B'`, output `C'`):
//! temporaries `S`, `T`, `P` (one sub-block each) are placed at the top of a
//! stack and reused for every `k`; for each `k` the node reads the nonzero
//! blocks of `U[:,k]` entry by entry and writes `S`, likewise `T`, recurses
//! into `P`, then reads `P` once per entry and updates every `C'` block in
//! `W[:,k]` (the first update of a block writes without reading). After each
//! `k` the temporaries are dead and are dropped from fast memory without
//! being written back. At `τ = 0` the node reads two words and writes one.
//!
//! Memory model: a read miss fetches one word; a write miss allocates the
//! word without fetching; evicting a dirty word writes it back; dirty words
//! left at the end are flushed. `W` counts fetches, write-backs and flushes.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithm::BilinearAlgorithm;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Every sub-block contiguous, recursively (generalized Morton order).
    RecursiveBlocked,
    RowMajor,
}

impl std::str::FromStr for Layout {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "recursive-blocked" | "blocked" => Ok(Layout::RecursiveBlocked),
            "row-major" => Ok(Layout::RowMajor),
            _ => Err(format!("unknown layout `{s}` (expected recursive-blocked or row-major)")),
        }
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Layout::RecursiveBlocked => "recursive-blocked",
            Layout::RowMajor => "row-major",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemConfig {
    /// Fast memory size in words.
    pub m: usize,
    pub layout: Layout,
    /// Depth at or below which the node multiplies classically (0 = never).
    pub cutoff: usize,
}

impl MemConfig {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            layout: Layout::RecursiveBlocked,
            cutoff: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    /// Words moved: fetches + write-backs + final flush.
    pub words: u64,
    pub fetches: u64,
    pub writebacks: u64,
    pub reads: u64,
    pub writes: u64,
    pub accesses: u64,
    pub flops: u64,
    /// Distinct addresses the schedule uses.
    pub footprint: u64,
}

/// Consumer of the address stream.
pub trait Sink {
    fn read(&mut self, addr: u32);
    fn write(&mut self, addr: u32);
    /// Word `addr` is dead; drop it without writing back.
    fn discard(&mut self, addr: u32);
    fn flop(&mut self) {}
}

const NIL: u32 = u32::MAX;
const ABSENT: u8 = 0;
const CLEAN: u8 = 1;
const DIRTY: u8 = 2;

/// Fully associative LRU memory with write-back and write-allocate-without-fetch.
pub struct Lru {
    capacity: usize,
    len: usize,
    head: u32,
    tail: u32,
    prev: Vec<u32>,
    next: Vec<u32>,
    state: Vec<u8>,
    pub stats: TraceStats,
}

impl Lru {
    pub fn new(capacity: usize, address_space: usize) -> Self {
        Self {
            capacity,
            len: 0,
            head: NIL,
            tail: NIL,
            prev: vec![NIL; address_space],
            next: vec![NIL; address_space],
            state: vec![ABSENT; address_space],
            stats: TraceStats::default(),
        }
    }

    fn unlink(&mut self, a: u32) {
        let (p, n) = (self.prev[a as usize], self.next[a as usize]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n as usize] = p;
        }
    }

    fn push_front(&mut self, a: u32) {
        self.prev[a as usize] = NIL;
        self.next[a as usize] = self.head;
        if self.head != NIL {
            self.prev[self.head as usize] = a;
        }
        self.head = a;
        if self.tail == NIL {
            self.tail = a;
        }
    }

    fn touch(&mut self, a: u32, write: bool) {
        let st = self.state[a as usize];
        if st == ABSENT {
            if !write {
                self.stats.fetches += 1;
            }
            if self.len == self.capacity {
                let victim = self.tail;
                self.unlink(victim);
                if self.state[victim as usize] == DIRTY {
                    self.stats.writebacks += 1;
                }
                self.state[victim as usize] = ABSENT;
                self.len -= 1;
            }
            self.push_front(a);
            self.len += 1;
            self.state[a as usize] = if write { DIRTY } else { CLEAN };
        } else {
            if self.head != a {
                self.unlink(a);
                self.push_front(a);
            }
            if write {
                self.state[a as usize] = DIRTY;
            }
        }
    }

    /// Flushes dirty words and returns the final statistics.
    pub fn finish(mut self) -> TraceStats {
        let dirty = self.state.iter().filter(|&&s| s == DIRTY).count() as u64;
        self.stats.writebacks += dirty;
        self.stats.words = self.stats.fetches + self.stats.writebacks;
        self.stats.accesses = self.stats.reads + self.stats.writes;
        self.stats
    }
}

impl Sink for Lru {
    fn read(&mut self, addr: u32) {
        self.stats.reads += 1;
        self.touch(addr, false);
    }

    fn write(&mut self, addr: u32) {
        self.stats.writes += 1;
        self.touch(addr, true);
    }

    fn discard(&mut self, addr: u32) {
        if self.state[addr as usize] != ABSENT {
            self.unlink(addr);
            self.state[addr as usize] = ABSENT;
            self.len -= 1;
        }
    }

    fn flop(&mut self) {
        self.stats.flops += 1;
    }
}

// An operand in memory: `rows × cols` entries, row stride `ld` (row-major) or
// contiguous recursive order (blocked, `ld == 0`).
#[derive(Clone, Copy, Debug)]
struct View {
    base: u32,
    ld: u32,
    rows: u32,
    cols: u32,
}

impl View {
    fn len(&self) -> u32 {
        self.rows * self.cols
    }

    /// Address of entry `e` in the view's canonical order.
    fn addr(&self, e: u32) -> u32 {
        if self.ld == 0 {
            self.base + e
        } else {
            self.base + (e / self.cols) * self.ld + e % self.cols
        }
    }

    /// Block `(a, b)` of a `gr × gc` grid of equal blocks.
    fn block(&self, a: u32, b: u32, gr: u32, gc: u32) -> View {
        let (br, bc) = (self.rows / gr, self.cols / gc);
        let base = if self.ld == 0 {
            self.base + (a * gc + b) * br * bc
        } else {
            self.base + a * br * self.ld + b * bc
        };
        View {
            base,
            ld: self.ld,
            rows: br,
            cols: bc,
        }
    }

    fn fresh(base: u32, rows: u32, cols: u32, layout: Layout) -> View {
        View {
            base,
            ld: if layout == Layout::RowMajor { cols } else { 0 },
            rows,
            cols,
        }
    }

    /// Address of entry `(i, j)`, for the classical base case.
    fn at(&self, i: u32, j: u32, gr: u32, gc: u32) -> u32 {
        if self.ld != 0 {
            return self.base + i * self.ld + j;
        }
        // Recursive order: peel one grid level at a time.
        let (mut v, mut i, mut j) = (*self, i, j);
        while v.len() > 1 {
            let (br, bc) = (v.rows / gr, v.cols / gc);
            v = v.block(i / br, j / bc, gr, gc);
            i %= br;
            j %= bc;
        }
        v.base
    }
}

struct Schedule {
    m: u32,
    n: u32,
    p: u32,
    u: Vec<Vec<u32>>,
    v: Vec<Vec<u32>>,
    w: Vec<Vec<u32>>,
    layout: Layout,
    cutoff: usize,
}

impl Schedule {
    fn node<S: Sink>(&self, a: View, b: View, c: View, depth: usize, sp: u32, sink: &mut S) {
        if depth == 0 {
            sink.read(a.base);
            sink.read(b.base);
            sink.flop();
            sink.write(c.base);
            return;
        }
        if depth <= self.cutoff {
            self.classical(a, b, c, sink);
            return;
        }
        let (m, n, p) = (self.m, self.n, self.p);
        let s = View::fresh(sp, a.rows / m, a.cols / n, self.layout);
        let t = View::fresh(sp + s.len(), b.rows / n, b.cols / p, self.layout);
        let pp = View::fresh(sp + s.len() + t.len(), a.rows / m, b.cols / p, self.layout);
        let child_sp = pp.base + pp.len();
        let mut initialized = vec![false; (m * p) as usize];

        for k in 0..self.u.len() {
            let srcs: Vec<View> = self.u[k].iter().map(|&x| a.block(x / n, x % n, m, n)).collect();
            for e in 0..s.len() {
                for src in &srcs {
                    sink.read(src.addr(e));
                }
                sink.write(s.addr(e));
            }
            let srcs: Vec<View> = self.v[k].iter().map(|&x| b.block(x / p, x % p, n, p)).collect();
            for e in 0..t.len() {
                for src in &srcs {
                    sink.read(src.addr(e));
                }
                sink.write(t.addr(e));
            }
            self.node(s, t, pp, depth - 1, child_sp, sink);
            let dsts: Vec<(View, bool)> = self.w[k]
                .iter()
                .map(|&r| (c.block(r / p, r % p, m, p), initialized[r as usize]))
                .collect();
            for e in 0..pp.len() {
                sink.read(pp.addr(e));
                for (dst, init) in &dsts {
                    if *init {
                        sink.read(dst.addr(e));
                    }
                    sink.write(dst.addr(e));
                }
            }
            for &r in &self.w[k] {
                initialized[r as usize] = true;
            }
            for view in [s, t, pp] {
                for e in 0..view.len() {
                    sink.discard(view.addr(e));
                }
            }
        }
    }

    fn classical<S: Sink>(&self, a: View, b: View, c: View, sink: &mut S) {
        let (m, n, p) = (self.m, self.n, self.p);
        for i in 0..c.rows {
            for j in 0..c.cols {
                for l in 0..a.cols {
                    sink.read(a.at(i, l, m, n));
                    sink.read(b.at(l, j, n, p));
                    sink.flop();
                }
                sink.write(c.at(i, j, m, p));
            }
        }
    }
}

/// Distinct addresses used by the schedule at depth `t`: the three operands
/// plus one set of temporaries per recursion level.
pub fn footprint(alg: &BilinearAlgorithm, t: usize) -> u64 {
    let d = alg.dims();
    (0..=t as u32)
        .map(|j| (d.mn() as u64).pow(j) + (d.np() as u64).pow(j) + (d.mp() as u64).pow(j))
        .sum()
}

/// Streams the schedule into `sink`. Returns the footprint.
pub fn replay<S: Sink>(alg: &BilinearAlgorithm, t: usize, layout: Layout, cutoff: usize, sink: &mut S) -> Result<u64> {
    let fp = footprint(alg, t);
    if fp >= u32::MAX as u64 {
        return Err(Error::Config(format!("address space of {fp} words does not fit 32-bit addresses")));
    }
    let d = alg.dims();
    let pow = |x: usize| (x as u32).pow(t as u32);
    let (mt, nt, pt) = (pow(d.m), pow(d.n), pow(d.p));
    let a = View::fresh(0, mt, nt, layout);
    let b = View::fresh(a.len(), nt, pt, layout);
    let c = View::fresh(a.len() + b.len(), mt, pt, layout);
    let pat = |p: Vec<Vec<usize>>| p.into_iter().map(|c| c.into_iter().map(|x| x as u32).collect()).collect();
    let sched = Schedule {
        m: d.m as u32,
        n: d.n as u32,
        p: d.p as u32,
        u: pat(alg.u.pattern()),
        v: pat(alg.v.pattern()),
        w: pat(alg.w.pattern()),
        layout,
        cutoff,
    };
    sched.node(a, b, c, t, c.base + c.len(), sink);
    Ok(fp)
}

pub fn simulate_lru(alg: &BilinearAlgorithm, t: usize, cfg: &MemConfig) -> Result<TraceStats> {
    if cfg.m < 3 {
        return Err(Error::Config(format!("fast memory of {} words cannot hold two operands and a result", cfg.m)));
    }
    let fp = footprint(alg, t);
    let mut lru = Lru::new(cfg.m, fp as usize);
    replay(alg, t, cfg.layout, cfg.cutoff, &mut lru)?;
    let mut stats = lru.finish();
    stats.footprint = fp;
    Ok(stats)
}

/// Simulates every `M` (in parallel); results are in the order given.
pub fn sweep(alg: &BilinearAlgorithm, t: usize, ms: &[usize], layout: Layout) -> Result<Vec<(usize, TraceStats)>> {
    ms.par_iter()
        .map(|&m| {
            let cfg = MemConfig {
                m,
                layout,
                cutoff: 0,
            };
            simulate_lru(alg, t, &cfg).map(|s| (m, s))
        })
        .collect()
}

/// Constant of the per-level term `c·(N*)^(τ−1)`: twice the words the
/// schedule touches per level, `2·(nnz U + nnz V + 2·nnz W + 3q)`.
pub fn recurrence_constant(alg: &BilinearAlgorithm) -> u64 {
    2 * (alg.u.nnz() + alg.v.nnz() + 2 * alg.w.nnz() + 3 * alg.q()) as u64
}

/// `W(τ) = 3(N*)^τ` if `3(N*)^τ ≤ M`, else `q·W(τ−1) + c·(N*)^(τ−1)`.
pub fn recurrence_cost(alg: &BilinearAlgorithm, t: usize, m: u64) -> BigUint {
    let n_star = BigUint::from(alg.dims().n_star() as u64);
    let q = BigUint::from(alg.q() as u64);
    let c = BigUint::from(recurrence_constant(alg));
    let m = BigUint::from(m);
    let three = BigUint::from(3u32);
    // Find the deepest level that fits, then unroll upward.
    let mut pow = BigUint::one();
    let mut tau = 0;
    while tau < t && &three * &pow * &n_star <= m {
        pow *= &n_star;
        tau += 1;
    }
    let mut w = &three * &pow;
    while tau < t {
        w = &q * w + &c * &pow;
        pow *= &n_star;
        tau += 1;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    /// `ln y` against `ln x`.
    SlopeLogX,
    /// `ln y` against `x`.
    SlopeX,
}

/// Least squares slope of `ln y`, with its standard error.
pub fn fit_exponent(points: &[(f64, f64)], mode: FitMode) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if y <= 0.0 || (mode == FitMode::SlopeLogX && x <= 0.0) {
            return Err(Error::Fit(format!("non-positive value in ({x}, {y})")));
        }
        xs.push(if mode == FitMode::SlopeLogX { x.ln() } else { x });
        ys.push(y.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(Error::Fit("x values are degenerate".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if points.len() > 2 { (sse / (k - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(Fit { slope, intercept, stderr })
}

/// `recurrence_cost` as a float, for plotting and fits.
pub fn recurrence_cost_f64(alg: &BilinearAlgorithm, t: usize, m: u64) -> f64 {
    recurrence_cost(alg, t, m).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn recurrence_hand_unrolled() {
        let bini = catalog::load("bini-322-encA").unwrap();
        let c = BigUint::from(recurrence_constant(&bini));
        let w1 = BigUint::from(10u32) * BigUint::from(3u32) + &c;
        let w2 = BigUint::from(10u32) * &w1 + &c * BigUint::from(6u32);
        assert_eq!(recurrence_cost(&bini, 2, 3), w2);
        assert_eq!(recurrence_cost(&bini, 2, 108), BigUint::from(108u32));
    }

    #[test]
    fn lru_basics() {
        let mut lru = Lru::new(2, 4);
        lru.read(0);
        lru.write(1);
        lru.read(0);
        lru.read(2); // evicts dirty 1
        lru.discard(2);
        lru.write(3);
        let s = lru.finish();
        assert_eq!((s.fetches, s.writebacks, s.words), (2, 2, 4));
    }

    #[test]
    fn small_memory_is_rejected() {
        let alg = catalog::classical(1, 1, 1);
        assert!(matches!(simulate_lru(&alg, 1, &MemConfig::new(2)), Err(Error::Config(_))));
    }

    #[test]
    fn fits() {
        let pts: Vec<_> = (1..10).map(|i| (i as f64, 3.0 * (i as f64).powf(-0.5))).collect();
        let f = fit_exponent(&pts, FitMode::SlopeLogX).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-9);
        let pts: Vec<_> = (1..6).map(|t| (t as f64, 2.0 * 15f64.powi(t))).collect();
        assert!((fit_exponent(&pts, FitMode::SlopeX).unwrap().slope - 15f64.ln()).abs() < 1e-9);
        assert!(fit_exponent(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], FitMode::SlopeX).is_err());
        assert!(fit_exponent(&[(1.0, 1.0)], FitMode::SlopeX).is_err());
    }
}
