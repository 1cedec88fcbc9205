//! Computational DAGs of recursive bilinear algorithms.
//!
//! `H_t` for `<m^t,n^t,p^t> = q^t` consists of three layered parts:
//!
//! * `Enc_tA`: level `j` holds the partially encoded entries of `A`, indexed
//!   by `(k_1..k_j, x_{j+1}..x_t)` where `x_i` ranges over the `mn` block
//!   positions and `k_i` over the `q` multiplications. Step `j → j+1`
//!   replaces `x_{j+1}` by `k_{j+1}` with one column of `U`.
//! * `Enc_tB`: the same with `V`.
//! * `Dec_tC`: level `j` is indexed by `(k_1..k_{t-j}, r_{t-j+1}..r_t)`;
//!   level 0 holds the `q^t` products, level `t` the entries of `C`. Step
//!   `j → j+1` replaces `k_{t-j}` by a row index `r` of `W`.
//!
//! Positions are mixed-radix numbers with the first index most significant.
//! A level vertex with fan-in `f ≥ 2` is built as a left-leaning chain of
//! `f − 1` binary additions; the chain's last vertex is the level vertex and
//! the others are tagged with `local = 1, 2, ...`. A level vertex with
//! fan-in 1 copies its source: the relaxed graph keeps an explicit copy
//! vertex, the plain graph reuses the source vertex itself.

use serde::Serialize;
use std::fmt::{self, Write as _};

use crate::algorithm::BilinearAlgorithm;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sub {
    EncA,
    EncB,
    DecC,
}

impl Sub {
    pub const ALL: [Sub; 3] = [Sub::EncA, Sub::EncB, Sub::DecC];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sub::EncA => "EncA",
            Sub::EncB => "EncB",
            Sub::DecC => "DecC",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Input,
    Add,
    Mult,
    Copy,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Input => "input",
            Kind::Add => "add",
            Kind::Mult => "mult",
            Kind::Copy => "copy",
        })
    }
}

/// A vertex is identified by `(sub, level, pos, local)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub kind: Kind,
    pub sub: Sub,
    pub level: u32,
    pub pos: u64,
    /// 0 for the level vertex, `1..` for interior vertices of its addition chain.
    pub local: u32,
    /// Entry of the result `C`.
    pub output: bool,
}

impl Vertex {
    pub fn key(&self) -> (Sub, u32, u64, u32) {
        (self.sub, self.level, self.pos, self.local)
    }
}

#[derive(Clone, Debug)]
pub struct Cdag {
    pub vertices: Vec<Vertex>,
    /// Directed `(src, dst)` pairs.
    pub edges: Vec<(u32, u32)>,
    pub relaxed: bool,
    pub t: usize,
    // levels[sub][j][pos] = vertex id (several positions may share one id in the plain graph).
    levels: [Vec<Vec<u32>>; 3],
    // Largest number of copies taken from one vertex in a single step, per sub.
    copy_fanout: [usize; 3],
}

struct Builder {
    g: Cdag,
}

impl Builder {
    fn vertex(&mut self, kind: Kind, sub: Sub, level: u32, pos: u64, local: u32) -> u32 {
        let id = self.g.vertices.len() as u32;
        self.g.vertices.push(Vertex {
            kind,
            sub,
            level,
            pos,
            local,
            output: false,
        });
        id
    }

    fn edge(&mut self, a: u32, b: u32) {
        self.g.edges.push((a, b));
    }

    /// Builds level `level` of `sub` from `sources(pos)` for each position `0..size`.
    fn step(&mut self, sub: Sub, level: u32, size: u64, mut sources: impl FnMut(u64, &mut Vec<u32>)) -> Vec<u32> {
        let relaxed = self.g.relaxed;
        let mut out = Vec::with_capacity(size as usize);
        let mut srcs = Vec::new();
        let mut copies: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
        for pos in 0..size {
            srcs.clear();
            sources(pos, &mut srcs);
            let id = match srcs.len() {
                0 => self.vertex(Kind::Copy, sub, level, pos, 0),
                1 => {
                    let c = copies.entry(srcs[0]).or_default();
                    *c += 1;
                    let fan = *c;
                    let slot = &mut self.g.copy_fanout[sub.index()];
                    *slot = (*slot).max(fan);
                    if relaxed {
                        let v = self.vertex(Kind::Copy, sub, level, pos, 0);
                        self.edge(srcs[0], v);
                        v
                    } else {
                        srcs[0]
                    }
                }
                f => {
                    let mut acc = srcs[0];
                    for (i, &s) in srcs[1..].iter().enumerate() {
                        let local = if i + 2 == f { 0 } else { i as u32 + 1 };
                        let v = self.vertex(Kind::Add, sub, level, pos, local);
                        self.edge(acc, v);
                        self.edge(s, v);
                        acc = v;
                    }
                    acc
                }
            };
            out.push(id);
        }
        out
    }

    fn encoder(&mut self, sub: Sub, rows: usize, pattern: &[Vec<usize>], t: usize) {
        let q = pattern.len() as u64;
        let big_n = rows as u64;
        let inputs: Vec<u32> = (0..big_n.pow(t as u32))
            .map(|pos| self.vertex(Kind::Input, sub, 0, pos, 0))
            .collect();
        let mut levels = vec![inputs];
        for j in 0..t {
            let tail = big_n.pow((t - j - 1) as u32);
            let prev = levels.last().unwrap().clone();
            let size = q.pow(j as u32 + 1) * tail;
            let next = self.step(sub, j as u32 + 1, size, |pos, srcs| {
                let (head, x_rest) = (pos / tail, pos % tail);
                let (big_k, k) = (head / q, head % q);
                for &x in &pattern[k as usize] {
                    srcs.push(prev[((big_k * big_n + x as u64) * tail + x_rest) as usize]);
                }
            });
            levels.push(next);
        }
        self.g.levels[sub.index()] = levels;
    }

    fn decoder(&mut self, w_rows: &[Vec<usize>], q: u64, t: usize, products: Vec<u32>) {
        let mp = w_rows.len() as u64;
        let mut levels = vec![products];
        for j in 0..t {
            let inner = mp.pow(j as u32);
            let prev = levels.last().unwrap().clone();
            let size = q.pow((t - j - 1) as u32) * mp * inner;
            let next = self.step(Sub::DecC, j as u32 + 1, size, |pos, srcs| {
                let (big_k, r, rest) = (pos / (mp * inner), (pos / inner) % mp, pos % inner);
                for &k in &w_rows[r as usize] {
                    srcs.push(prev[((big_k * q + k as u64) * inner + rest) as usize]);
                }
            });
            levels.push(next);
        }
        for &v in levels.last().unwrap() {
            self.g.vertices[v as usize].output = true;
        }
        self.g.levels[Sub::DecC.index()] = levels;
    }
}

fn patterns(alg: &BilinearAlgorithm) -> (Vec<Vec<usize>>, Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let w_rows = alg
        .w
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(|e| e.0).collect())
        .collect();
    (alg.u.pattern(), alg.v.pattern(), w_rows)
}

/// `H_t`: both encoders, the `q^t` multiplications and the decoder.
pub fn compose_recursive(alg: &BilinearAlgorithm, t: usize, relaxed: bool) -> Cdag {
    let (u, v, w_rows) = patterns(alg);
    let q = alg.q() as u64;
    let mut b = Builder {
        g: Cdag {
            vertices: Vec::new(),
            edges: Vec::new(),
            relaxed,
            t,
            levels: Default::default(),
            copy_fanout: [0; 3],
        },
    };
    b.encoder(Sub::EncA, alg.m * alg.n, &u, t);
    b.encoder(Sub::EncB, alg.n * alg.p, &v, t);
    let total = q.pow(t as u32);
    let mut products = Vec::with_capacity(total as usize);
    for pos in 0..total {
        let x = b.vertex(Kind::Mult, Sub::DecC, 0, pos, 0);
        let ea = b.g.levels[0][t][pos as usize];
        let eb = b.g.levels[1][t][pos as usize];
        b.edge(ea, x);
        b.edge(eb, x);
        products.push(x);
    }
    b.decoder(&w_rows, q, t, products);
    b.g
}

impl Cdag {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex ids at `level` of `sub`, by position.
    pub fn level(&self, sub: Sub, level: usize) -> &[u32] {
        &self.levels[sub.index()][level]
    }

    /// The whole graph, undirected.
    pub fn undirected(&self) -> Graph {
        Graph::from_edges(self.vertices.len(), self.edges.iter().copied())
    }

    /// Vertex ids belonging to `sub`, ascending.
    pub fn members(&self, sub: Sub) -> Vec<u32> {
        (0..self.vertices.len() as u32)
            .filter(|&v| self.vertices[v as usize].sub == sub)
            .collect()
    }

    /// Undirected subgraph induced by `sub`, with the member list mapping back to ids.
    pub fn subgraph(&self, sub: Sub) -> (Graph, Vec<u32>) {
        let keep = self.members(sub);
        let mut index = vec![u32::MAX; self.vertices.len()];
        for (i, &v) in keep.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| index[*a as usize] != u32::MAX && index[*b as usize] != u32::MAX)
            .map(|(a, b)| (index[*a as usize], index[*b as usize]));
        (Graph::from_edges(keep.len(), edges.collect::<Vec<_>>()), keep)
    }

    /// True if no vertex has a cycle through it (checked by Kahn's algorithm).
    pub fn is_acyclic(&self) -> bool {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            indeg[b as usize] += 1;
            out[a as usize].push(b);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in &out[v] {
                indeg[w as usize] -= 1;
                if indeg[w as usize] == 0 {
                    stack.push(w as usize);
                }
            }
        }
        seen == n
    }

    pub fn max_in_degree(&self) -> usize {
        let mut indeg = vec![0usize; self.vertices.len()];
        for &(_, b) in &self.edges {
            indeg[b as usize] += 1;
        }
        indeg.into_iter().max().unwrap_or(0)
    }

    /// Edge-list export:
    ///
    /// ```text
    /// vertices <n>
    /// <id> <kind> <sub> <level> <pos> <local> <output 0|1>
    /// edges <e>
    /// <src> <dst>
    /// ```
    pub fn to_edge_list(&self, sub: Option<Sub>) -> String {
        let keep: Vec<u32> = match sub {
            Some(s) => self.members(s),
            None => (0..self.vertices.len() as u32).collect(),
        };
        let mut index = vec![u32::MAX; self.vertices.len()];
        for (i, &v) in keep.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let mut s = String::new();
        writeln!(s, "vertices {}", keep.len()).unwrap();
        for (i, &v) in keep.iter().enumerate() {
            let x = &self.vertices[v as usize];
            writeln!(s, "{i} {} {} {} {} {} {}", x.kind, x.sub, x.level, x.pos, x.local, x.output as u8).unwrap();
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|(a, b)| index[*a as usize] != u32::MAX && index[*b as usize] != u32::MAX)
            .collect();
        writeln!(s, "edges {}", edges.len()).unwrap();
        for (a, b) in edges {
            writeln!(s, "{} {}", index[*a as usize], index[*b as usize]).unwrap();
        }
        s
    }
}

/// The three base-case graphs `Enc_1A`, `Enc_1B`, `Dec_1C`, each standalone
/// and with explicit copy vertices. The decoder's inputs are the `q`
/// multiplication vertices.
pub fn build_base_graphs(alg: &BilinearAlgorithm) -> [Cdag; 3] {
    let (u, v, w_rows) = patterns(alg);
    let q = alg.q();
    let enc = |sub: Sub, rows: usize, cols: &[Vec<usize>]| {
        let mut b = Builder {
            g: empty(1),
        };
        let inputs: Vec<u32> = (0..rows).map(|x| b.vertex(Kind::Input, sub, 0, x as u64, 0)).collect();
        let mut outs = Vec::with_capacity(q);
        let mut fanout = vec![0usize; rows];
        for (k, col) in cols.iter().enumerate() {
            outs.push(fan_in(&mut b, sub, k as u64, col.iter().map(|&x| inputs[x]).collect()));
            if col.len() == 1 {
                fanout[col[0]] += 1;
            }
        }
        b.g.copy_fanout[sub.index()] = fanout.into_iter().max().unwrap_or(0);
        b.g.levels[sub.index()] = vec![inputs, outs];
        b.g
    };
    let enc_a = enc(Sub::EncA, alg.m * alg.n, &u);
    let enc_b = enc(Sub::EncB, alg.n * alg.p, &v);

    let mut b = Builder { g: empty(1) };
    let mults: Vec<u32> = (0..q).map(|k| b.vertex(Kind::Mult, Sub::DecC, 0, k as u64, 0)).collect();
    let mut outs = Vec::with_capacity(w_rows.len());
    for (r, row) in w_rows.iter().enumerate() {
        let v = fan_in(&mut b, Sub::DecC, r as u64, row.iter().map(|&k| mults[k]).collect());
        b.g.vertices[v as usize].output = true;
        outs.push(v);
    }
    b.g.levels[Sub::DecC.index()] = vec![mults, outs];
    [enc_a, enc_b, b.g]
}

fn empty(t: usize) -> Cdag {
    Cdag {
        vertices: Vec::new(),
        edges: Vec::new(),
        relaxed: true,
        t,
        levels: Default::default(),
        copy_fanout: [0; 3],
    }
}

// Level-1 vertex at `pos` summing `srcs`: a copy for one source, a chain otherwise.
fn fan_in(b: &mut Builder, sub: Sub, pos: u64, srcs: Vec<u32>) -> u32 {
    match srcs.len() {
        0 => b.vertex(Kind::Copy, sub, 1, pos, 0),
        1 => {
            let v = b.vertex(Kind::Copy, sub, 1, pos, 0);
            b.edge(srcs[0], v);
            v
        }
        f => {
            let mut acc = srcs[0];
            for i in 1..f {
                let local = if i + 1 == f { 0 } else { i as u32 };
                let v = b.vertex(Kind::Add, sub, 1, pos, local);
                b.edge(acc, v);
                b.edge(srcs[i], v);
                acc = v;
            }
            acc
        }
    }
}

/// Structural facts about one part of `H_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubStats {
    pub sub: Sub,
    /// Level sizes from the matrix side to the product side: for `DecC`
    /// `|l_1| = (mp)^t` (outputs) up to `|l_{t+1}| = q^t` (products); for an
    /// encoder `N^t` (inputs) up to `q^t`.
    pub level_sizes: Vec<u64>,
    /// Undirected degree within the part.
    pub max_degree: usize,
    pub components: usize,
    /// Every component has the same number of level-0 and top-level vertices.
    pub equal_components: bool,
    /// Some vertex is copied to two or more positions in a single step.
    pub multiply_copied: bool,
    /// Number of matrix entries: `mn`, `np` or `mp`.
    pub n_entries: usize,
    pub n_vertices: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructStats {
    pub t: usize,
    pub relaxed: bool,
    pub parts: Vec<SubStats>,
    /// The whole graph is connected.
    pub connected: bool,
}

impl StructStats {
    pub fn part(&self, sub: Sub) -> &SubStats {
        &self.parts[sub.index()]
    }
}

pub fn structural_report(g: &Cdag, alg: &BilinearAlgorithm) -> StructStats {
    let n_entries = [alg.m * alg.n, alg.n * alg.p, alg.m * alg.p];
    let parts = Sub::ALL
        .iter()
        .map(|&sub| {
            let levels = &g.levels[sub.index()];
            let mut level_sizes: Vec<u64> = levels
                .iter()
                .map(|ids| {
                    let mut v = ids.clone();
                    v.sort_unstable();
                    v.dedup();
                    v.len() as u64
                })
                .collect();
            if sub == Sub::DecC {
                level_sizes.reverse();
            }
            let (graph, members) = g.subgraph(sub);
            let (components, label) = graph.components();
            let mut index = vec![u32::MAX; g.vertices.len()];
            for (i, &v) in members.iter().enumerate() {
                index[v as usize] = i as u32;
            }
            let mut profile = vec![(0usize, 0usize); components];
            let top = levels.len() - 1;
            for &v in &dedup(&levels[0]) {
                profile[label[index[v as usize] as usize] as usize].0 += 1;
            }
            for &v in &dedup(&levels[top]) {
                profile[label[index[v as usize] as usize] as usize].1 += 1;
            }
            SubStats {
                sub,
                level_sizes,
                max_degree: graph.max_degree(),
                components,
                equal_components: profile.windows(2).all(|w| w[0] == w[1]),
                multiply_copied: g.copy_fanout[sub.index()] >= 2,
                n_entries: n_entries[sub.index()],
                n_vertices: members.len(),
            }
        })
        .collect();
    StructStats {
        t: g.t,
        relaxed: g.relaxed,
        parts,
        connected: g.undirected().is_connected(),
    }
}

fn dedup(ids: &[u32]) -> Vec<u32> {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Report for the base graphs built by [`build_base_graphs`].
pub fn base_report(alg: &BilinearAlgorithm) -> StructStats {
    let base = build_base_graphs(alg);
    let mut merged = empty(1);
    for (i, g) in base.into_iter().enumerate() {
        let offset = merged.vertices.len() as u32;
        merged.vertices.extend(g.vertices);
        merged.edges.extend(g.edges.iter().map(|(a, b)| (a + offset, b + offset)));
        merged.levels[i] = g.levels[i]
            .iter()
            .map(|l| l.iter().map(|v| v + offset).collect())
            .collect();
        merged.copy_fanout[i] = g.copy_fanout[i];
    }
    let mut stats = structural_report(&merged, alg);
    // The parts were built apart; the full graph of the base case is H_1.
    stats.connected = compose_recursive(alg, 1, true).undirected().is_connected();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn bini_enc_a_has_two_components() {
        let s = base_report(&catalog::load("bini-322-encA").unwrap());
        assert_eq!(s.part(Sub::EncA).components, 2);
        assert!(s.part(Sub::EncA).equal_components);
        assert_eq!(s.part(Sub::EncB).components, 1);
        assert_eq!(s.part(Sub::DecC).components, 1);
        assert!(!s.part(Sub::EncA).multiply_copied);
    }

    #[test]
    fn classical_decoder_components() {
        let s = base_report(&catalog::classical(2, 2, 2));
        assert_eq!(s.part(Sub::DecC).components, 4);
        assert!(s.part(Sub::EncA).multiply_copied);
    }

    #[test]
    fn bini_decoder_level_sizes() {
        let alg = catalog::load("bini-322-encA").unwrap();
        let g = compose_recursive(&alg, 2, false);
        let s = structural_report(&g, &alg);
        assert_eq!(s.part(Sub::DecC).level_sizes, vec![36, 60, 100]);
        assert!(g.is_acyclic());
        assert_eq!(g.max_in_degree(), 2);
    }

    #[test]
    fn trivial_depth() {
        let alg = catalog::load("strassen").unwrap();
        let g = compose_recursive(&alg, 0, false);
        assert_eq!(g.n_vertices(), 3);
        assert!(g.vertices[2].output);
    }
}
