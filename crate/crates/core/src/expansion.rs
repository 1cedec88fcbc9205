//! Edge expansion: exact small-graph values, spectral bounds, and the
//! partition-argument bound on words moved.
//!
//! For a graph of maximum degree `d`, pad every vertex with loops up to
//! degree `d`. Loops never cross a cut, so
//! `h_s = min_{|U| ≤ s} |E(U, V∖U)| / (d |U|)` is computed on the original edges.
//!
//! Exact minimization only needs connected sets: if `U = U1 ∪ U2` with no
//! edge between the parts then `cut(U) = cut(U1) + cut(U2)` and
//! `|U| = |U1| + |U2|`, so the ratio of `U` is at least the smaller ratio of
//! its parts, each of which is admissible for the same `s`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    SpectralLower,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::SpectralLower => "spectral-lower",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub s: usize,
    pub h_s: f64,
    pub method: Method,
    /// Cut size and set size of a minimizer (exact entries only).
    pub witness: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionProfile {
    /// Regularized degree.
    pub d: usize,
    pub graph_size: usize,
    pub entries: Vec<ProfileEntry>,
}

impl ExpansionProfile {
    /// A profile from a formula, e.g. a conjectured `h_s` law.
    pub fn from_fn(d: usize, graph_size: usize, s_values: impl IntoIterator<Item = usize>, h: impl Fn(usize) -> f64) -> Self {
        let entries = s_values
            .into_iter()
            .map(|s| ProfileEntry {
                s,
                h_s: h(s),
                method: Method::SpectralLower,
                witness: None,
            })
            .collect();
        Self { d, graph_size, entries }
    }

    /// `h = h_{⌊|V|/2⌋}` when the profile reaches that far.
    pub fn h(&self) -> Option<f64> {
        self.entries.iter().find(|e| e.s == self.graph_size / 2).map(|e| e.h_s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,h_s,method\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.s, e.h_s, e.method));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest graph for which the full `h` is computed.
    pub exhaustive: usize,
    /// Largest `s` for `h_s` on graphs beyond `exhaustive`.
    pub small_set: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            exhaustive: 22,
            small_set: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExpansionOptions {
    pub limits: Limits,
    /// Regularized degree; defaults to the maximum degree of the graph.
    pub degree: Option<usize>,
}

/// Graph padded with loops to a common degree.
#[derive(Clone, Debug)]
pub struct Regularized<'g> {
    pub graph: &'g Graph,
    pub d: usize,
    pub loops: Vec<usize>,
}

impl<'g> Regularized<'g> {
    pub fn new(graph: &'g Graph, d: Option<usize>) -> Self {
        let d = d.unwrap_or_else(|| graph.max_degree()).max(graph.max_degree());
        let loops = (0..graph.n()).map(|v| d - graph.degree(v)).collect();
        Self { graph, d, loops }
    }

    /// Degree counting each loop once.
    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v) + self.loops[v]
    }

    /// Cut size over all edges of the padded graph, loops included.
    pub fn cut_size(&self, in_set: &[bool]) -> usize {
        let loops = self
            .loops
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| std::iter::repeat_n((v, v), c));
        self.graph
            .edges()
            .map(|(a, b)| (a as usize, b as usize))
            .chain(loops)
            .filter(|&(a, b)| in_set[a] != in_set[b])
            .count()
    }
}

/// Exact `h_s` for `s = 1..=s_max` (`None` means `⌊|V|/2⌋`, i.e. the full `h`).
pub fn edge_expansion_exact(g: &Graph, s_max: Option<usize>, opts: &ExpansionOptions) -> Result<ExpansionProfile> {
    let n = g.n();
    let half = n / 2;
    let s_max = s_max.unwrap_or(half).min(half);
    if n > opts.limits.exhaustive && s_max > opts.limits.small_set {
        return Err(Error::Capacity { vertices: n, s: s_max });
    }
    let d = Regularized::new(g, opts.degree).d;

    let best = if n <= 24 && s_max == half {
        gray_code_cuts(g, s_max)
    } else {
        connected_cuts(g, s_max)
    };

    let mut entries = Vec::with_capacity(s_max);
    let mut running: Option<(usize, usize)> = None;
    for s in 1..=s_max {
        if let Some(c) = best[s] {
            let better = match running {
                None => true,
                Some((rc, rk)) => c * rk < rc * s,
            };
            if better {
                running = Some((c, s));
            }
        }
        let h_s = match running {
            Some(_) if d == 0 => 0.0,
            Some((c, k)) => c as f64 / (d * k) as f64,
            None => 0.0,
        };
        entries.push(ProfileEntry {
            s,
            h_s,
            method: Method::Exact,
            witness: running,
        });
    }
    Ok(ExpansionProfile {
        d,
        graph_size: n,
        entries,
    })
}

// best[k] = min cut over all subsets of size k (k ≤ s_max), by Gray-code walk.
fn gray_code_cuts(g: &Graph, s_max: usize) -> Vec<Option<usize>> {
    let n = g.n();
    let mut best = vec![None::<usize>; s_max + 1];
    let mut in_set = vec![false; n];
    let (mut cut, mut size) = (0isize, 0usize);
    for i in 1u64..(1u64 << n) {
        let b = i.trailing_zeros() as usize;
        let inside = g.neighbors(b).iter().filter(|&&w| in_set[w as usize]).count() as isize;
        let deg = g.degree(b) as isize;
        if in_set[b] {
            cut -= deg - 2 * inside;
            size -= 1;
        } else {
            cut += deg - 2 * inside;
            size += 1;
        }
        in_set[b] = !in_set[b];
        if size <= s_max {
            let c = cut as usize;
            let slot = &mut best[size];
            if slot.is_none_or(|x| c < x) {
                *slot = Some(c);
            }
        }
    }
    best
}

// best[k] = min cut over connected vertex sets of size k, by ESU enumeration
// rooted at each vertex in parallel.
fn connected_cuts(g: &Graph, s_max: usize) -> Vec<Option<usize>> {
    let n = g.n();
    let per_root: Vec<Vec<Option<usize>>> = (0..n)
        .into_par_iter()
        .map(|root| {
            let mut st = Esu {
                g,
                root: root as u32,
                s_max,
                in_sub: vec![false; n],
                near: vec![0u32; n],
                mark: vec![0u32; n],
                stamp: 0,
                best: vec![None; s_max + 1],
            };
            st.add(root as u32);
            let ext: Vec<u32> = dedup_neighbors(g, root as u32).into_iter().filter(|&u| u > root as u32).collect();
            st.extend(ext, g.degree(root), 1);
            st.best
        })
        .collect();
    let mut best = vec![None::<usize>; s_max + 1];
    for b in per_root {
        for (k, c) in b.into_iter().enumerate() {
            if let Some(c) = c {
                if best[k].is_none_or(|x| c < x) {
                    best[k] = Some(c);
                }
            }
        }
    }
    best
}

fn dedup_neighbors(g: &Graph, v: u32) -> Vec<u32> {
    let mut nb = g.neighbors(v as usize).to_vec();
    nb.dedup();
    nb
}

struct Esu<'g> {
    g: &'g Graph,
    root: u32,
    s_max: usize,
    in_sub: Vec<bool>,
    // Number of subset members in the closed neighbourhood of each vertex.
    near: Vec<u32>,
    mark: Vec<u32>,
    stamp: u32,
    best: Vec<Option<usize>>,
}

impl Esu<'_> {
    fn add(&mut self, v: u32) {
        self.in_sub[v as usize] = true;
        self.near[v as usize] += 1;
        for &w in self.g.neighbors(v as usize) {
            self.near[w as usize] += 1;
        }
    }

    fn remove(&mut self, v: u32) {
        self.in_sub[v as usize] = false;
        self.near[v as usize] -= 1;
        for &w in self.g.neighbors(v as usize) {
            self.near[w as usize] -= 1;
        }
    }

    fn extend(&mut self, mut ext: Vec<u32>, cut: usize, size: usize) {
        let slot = &mut self.best[size];
        if slot.is_none_or(|x| cut < x) {
            *slot = Some(cut);
        }
        if size == self.s_max {
            return;
        }
        while let Some(w) = ext.pop() {
            self.stamp += 1;
            let mut next = ext.clone();
            for &u in &next {
                self.mark[u as usize] = self.stamp;
            }
            let mut to_sub = 0;
            for &u in self.g.neighbors(w as usize) {
                let ui = u as usize;
                if self.in_sub[ui] {
                    to_sub += 1;
                } else if u > self.root && self.near[ui] == 0 && self.mark[ui] != self.stamp {
                    self.mark[ui] = self.stamp;
                    next.push(u);
                }
            }
            let new_cut = cut + self.g.degree(w as usize) - 2 * to_sub;
            self.add(w);
            self.extend(next, new_cut, size + 1);
            self.remove(w);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheegerBound {
    pub lower: f64,
    pub upper: f64,
    /// Second smallest eigenvalue of `(D − A)/d`.
    pub lambda2: f64,
    pub disconnected: bool,
    /// False when the iterative solver stopped before reaching its tolerance.
    pub converged: bool,
}

const DENSE_LIMIT: usize = 512;
const LANCZOS_TOL: f64 = 1e-8;
const LANCZOS_STEPS: usize = 600;

/// `λ2/2 ≤ h ≤ sqrt(2 λ2)` for the loop-regularized graph.
pub fn cheeger_bound(g: &Graph, degree: Option<usize>) -> CheegerBound {
    let n = g.n();
    if n < 2 || !g.is_connected() {
        return CheegerBound {
            lower: 0.0,
            upper: 0.0,
            lambda2: 0.0,
            disconnected: n >= 2,
            converged: true,
        };
    }
    let d = Regularized::new(g, degree).d as f64;
    let (lambda2, converged) = if n <= DENSE_LIMIT {
        (dense_lambda2(g, d), true)
    } else {
        lanczos_lambda2(g, d)
    };
    let lambda2 = lambda2.max(0.0);
    CheegerBound {
        lower: lambda2 / 2.0,
        upper: (2.0 * lambda2).sqrt(),
        lambda2,
        disconnected: false,
        converged,
    }
}

fn dense_lambda2(g: &Graph, d: f64) -> f64 {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        l[(v, v)] = g.degree(v) as f64 / d;
        for &w in g.neighbors(v) {
            l[(v, w as usize)] -= 1.0 / d;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

// Largest eigenvalue of 2I − L on the complement of the constant vector,
// by Lanczos with full reorthogonalization.
fn lanczos_lambda2(g: &Graph, d: f64) -> (f64, bool) {
    let n = g.n();
    let ones = 1.0 / (n as f64).sqrt();
    let apply = |x: &[f64], y: &mut [f64]| {
        for v in 0..n {
            let mut lx = g.degree(v) as f64 * x[v];
            for &w in g.neighbors(v) {
                lx -= x[w as usize];
            }
            y[v] = 2.0 * x[v] - lx / d;
        }
    };
    let orth = |x: &mut [f64], basis: &[Vec<f64>]| {
        for _ in 0..2 {
            let mean: f64 = x.iter().sum::<f64>() * ones;
            x.iter_mut().for_each(|a| *a -= mean * ones);
            for b in basis {
                let dot: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum();
                x.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
            }
        }
    };
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orth(&mut q, &[]);
    let nq = norm(&q);
    q.iter_mut().for_each(|a| *a /= nq);

    let max_steps = LANCZOS_STEPS.min(n - 1);
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut y = vec![0.0; n];
    let mut theta = 0.0;
    for step in 1..=max_steps {
        apply(&q, &mut y);
        let alpha: f64 = y.iter().zip(&q).map(|(a, b)| a * b).sum();
        basis.push(q.clone());
        orth(&mut y, &basis);
        let beta = norm(&y);
        alphas.push(alpha);

        let (ritz, resid) = tridiagonal_max(&alphas, &betas, beta);
        theta = ritz;
        if resid <= LANCZOS_TOL * ritz.abs().max(1e-300) || beta < 1e-14 {
            return (2.0 - theta, true);
        }
        if step == max_steps {
            break;
        }
        betas.push(beta);
        q = y.iter().map(|a| a / beta).collect();
    }
    (2.0 - theta, false)
}

// Largest Ritz value of the tridiagonal matrix and its residual estimate.
fn tridiagonal_max(alphas: &[f64], betas: &[f64], next_beta: f64) -> (f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let last = eig.eigenvectors[(k - 1, idx)];
    (val, (next_beta * last).abs())
}

/// Partition-argument bound: the smallest listed `s` with `h_s·s/2 ≥ 3M`
/// gives `W ≥ (|V|/s)·M`; no such `s` gives 0.
pub fn bound_from_expansion(profile: &ExpansionProfile, v_count: f64, m: f64) -> f64 {
    let mut entries: Vec<&ProfileEntry> = profile.entries.iter().collect();
    entries.sort_by_key(|e| e.s);
    entries
        .into_iter()
        .find(|e| e.h_s * e.s as f64 / 2.0 >= 3.0 * m)
        .map_or(0.0, |e| v_count / e.s as f64 * m)
}
