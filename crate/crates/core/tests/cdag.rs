use std::collections::{BTreeSet, HashMap};

use rectcomm::catalog;
use rectcomm::cdag::{build_base_graphs, compose_recursive, structural_report, Cdag, Kind, Sub};
use rectcomm::graph::Graph;
use rectcomm::BilinearAlgorithm;

type Node = (u32, u64);
type EdgeSet = BTreeSet<(Node, Node)>;

/// Edges between level vertices, with addition chains contracted.
fn contracted(g: &Cdag, sub: Sub) -> EdgeSet {
    let head: HashMap<_, u32> = g
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.local == 0)
        .map(|(i, v)| ((v.sub, v.level, v.pos), i as u32))
        .collect();
    let mut out = EdgeSet::new();
    for &(a, b) in &g.edges {
        let (va, vb) = (&g.vertices[a as usize], &g.vertices[b as usize]);
        if va.sub != sub || vb.sub != sub || va.local != 0 {
            continue;
        }
        let h = &g.vertices[head[&(vb.sub, vb.level, vb.pos)] as usize];
        out.insert(((va.level, va.pos), (h.level, h.pos)));
    }
    out
}

/// Decoder built by gluing: `q^i` copies of the base decoder feed `mp`
/// copies of the depth-`i` decoder, output `r` of base copy `j` becoming
/// input `j` of deep copy `r`.
fn glued_decoder(w_rows: &[Vec<usize>], q: u64, t: usize) -> EdgeSet {
    let mp = w_rows.len() as u64;
    let mut edges: EdgeSet = w_rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |&k| ((0, k as u64), (1, r as u64))))
        .collect();
    for i in 1..t {
        let mut next = EdgeSet::new();
        for j in 0..q.pow(i as u32) {
            for (r, row) in w_rows.iter().enumerate() {
                for &k in row {
                    next.insert(((0, j * q + k as u64), (1, j * mp + r as u64)));
                }
            }
        }
        for r in 0..mp {
            for &((la, pa), (lb, pb)) in &edges {
                next.insert(((la + 1, pa * mp + r), (lb + 1, pb * mp + r)));
            }
        }
        edges = next;
    }
    edges
}

/// Encoder built by gluing: `N^i` copies of the base encoder feed `q`
/// copies of the depth-`i` encoder.
fn glued_encoder(cols: &[Vec<usize>], big_n: u64, t: usize) -> EdgeSet {
    let q = cols.len() as u64;
    let mut edges: EdgeSet = cols
        .iter()
        .enumerate()
        .flat_map(|(k, col)| col.iter().map(move |&x| ((0, x as u64), (1, k as u64))))
        .collect();
    for i in 1..t {
        let width = |level: u32| q.pow(level) * big_n.pow(i as u32 - level);
        let mut next = EdgeSet::new();
        let copies = big_n.pow(i as u32);
        for c in 0..copies {
            for (k, col) in cols.iter().enumerate() {
                for &x in col {
                    next.insert(((0, x as u64 * copies + c), (1, k as u64 * copies + c)));
                }
            }
        }
        for k in 0..q {
            for &((la, pa), (lb, pb)) in &edges {
                next.insert(((la + 1, k * width(la) + pa), (lb + 1, k * width(lb) + pb)));
            }
        }
        edges = next;
    }
    edges
}

fn fast_algorithms() -> Vec<BilinearAlgorithm> {
    catalog::all().into_iter().filter(|a| !a.name.starts_with("classical")).collect()
}

#[test]
fn matches_gluing_construction() {
    for alg in fast_algorithms() {
        let w_rows: Vec<Vec<usize>> = alg.w.rows().into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect();
        for t in 1..=3 {
            let g = compose_recursive(&alg, t, true);
            assert_eq!(contracted(&g, Sub::DecC), glued_decoder(&w_rows, alg.q() as u64, t), "{} t={t}", alg.name);
            assert_eq!(contracted(&g, Sub::EncA), glued_encoder(&alg.u.pattern(), (alg.m * alg.n) as u64, t), "{} t={t}", alg.name);
            assert_eq!(contracted(&g, Sub::EncB), glued_encoder(&alg.v.pattern(), (alg.n * alg.p) as u64, t), "{} t={t}", alg.name);
        }
    }
}

#[test]
fn depth_one_is_the_base_graphs_plus_products() {
    for alg in catalog::all() {
        let g = compose_recursive(&alg, 1, true);
        let keys = |c: &Cdag| -> BTreeSet<_> {
            c.edges
                .iter()
                .map(|&(a, b)| (c.vertices[a as usize].key(), c.vertices[b as usize].key()))
                .collect()
        };
        let mut want = BTreeSet::new();
        for base in build_base_graphs(&alg) {
            want.extend(keys(&base));
        }
        for k in 0..alg.q() as u64 {
            want.insert(((Sub::EncA, 1, k, 0), (Sub::DecC, 0, k, 0)));
            want.insert(((Sub::EncB, 1, k, 0), (Sub::DecC, 0, k, 0)));
        }
        assert_eq!(keys(&g), want, "{}", alg.name);
    }
}

#[test]
fn well_formed_and_layered() {
    for alg in catalog::all() {
        for relaxed in [false, true] {
            let g = compose_recursive(&alg, 2, relaxed);
            assert!(g.is_acyclic());
            assert!(g.max_in_degree() <= 2);
            for &(a, b) in &g.edges {
                let (va, vb) = (g.vertices[a as usize], g.vertices[b as usize]);
                let bridge = vb.kind == Kind::Mult && va.sub != Sub::DecC;
                let same_level_chain = va.sub == vb.sub && va.level == vb.level && vb.kind == Kind::Add && va.local != 0;
                // A reused vertex in the plain graph may feed any later level.
                let next_level = va.sub == vb.sub && (vb.level == va.level + 1 || (!relaxed && vb.level > va.level));
                assert!(bridge || same_level_chain || next_level, "{} edge {va:?} -> {vb:?}", alg.name);
            }
        }
    }
}

#[test]
fn structural_laws_up_to_depth_three() {
    for alg in catalog::all() {
        let base = structural_report(&compose_recursive(&alg, 1, false), &alg);
        let (q, mp) = (alg.q() as u64, (alg.m * alg.p) as u64);
        for t in 1..=3usize {
            let g = compose_recursive(&alg, t, false);
            let s = structural_report(&g, &alg);
            assert!(s.connected, "{} t={t}", alg.name);
            let dec = s.part(Sub::DecC);
            let want: Vec<u64> = (1..=t as u32 + 1).map(|i| mp.pow(t as u32 + 1 - i) * q.pow(i - 1)).collect();
            assert_eq!(dec.level_sizes, want, "{}", alg.name);
            if alg.n > 1 {
                assert!(dec.max_degree <= alg.m * alg.p + 2, "{}", alg.name);
            }
            for sub in Sub::ALL {
                assert_eq!(s.part(sub).components, base.part(sub).components.pow(t as u32), "{} {sub}", alg.name);
            }
        }
    }
}

#[test]
fn relaxed_encoder_degree_stabilizes() {
    for alg in catalog::all() {
        let d: Vec<usize> = (1..=4)
            .map(|t| structural_report(&compose_recursive(&alg, t, true), &alg).part(Sub::EncA).max_degree)
            .collect();
        assert!(d[0] <= d[1], "{}: {d:?}", alg.name);
        assert!(d[1..].iter().all(|&x| x == d[1]), "{}: {d:?}", alg.name);
    }
}

#[test]
fn plain_graph_reuses_copied_vertices() {
    // Bini's second multiplication reads a single A-entry, so the plain graph
    // keeps reusing that vertex and its degree grows with depth.
    let alg = catalog::load("bini-322-encA").unwrap();
    let deg = |t| structural_report(&compose_recursive(&alg, t, false), &alg).part(Sub::EncA).max_degree;
    assert!(deg(3) > deg(2));
    let relaxed = compose_recursive(&alg, 3, true);
    let plain = compose_recursive(&alg, 3, false);
    assert!(relaxed.n_vertices() > plain.n_vertices());
}

#[test]
fn multiply_copied_only_for_classical() {
    for alg in catalog::all() {
        let s = structural_report(&compose_recursive(&alg, 2, false), &alg);
        let flagged = s.part(Sub::EncA).multiply_copied || s.part(Sub::EncB).multiply_copied;
        assert_eq!(flagged, alg.name.starts_with("classical"), "{}", alg.name);
    }
}

#[test]
fn edge_list_export_parses_back() {
    let alg = catalog::load("hk-323").unwrap();
    let g = compose_recursive(&alg, 2, true);
    for sub in [None, Some(Sub::DecC)] {
        let text = g.to_edge_list(sub);
        let parsed = Graph::parse_edge_list(&text).unwrap();
        let direct = match sub {
            None => g.undirected(),
            Some(s) => g.subgraph(s).0,
        };
        assert_eq!(parsed, direct);
    }
}
