//! Undirected multigraphs in compressed adjacency form.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    n_edges: usize,
}

impl Graph {
    /// Builds from undirected edges. Loops are dropped; parallel edges are kept.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let edges: Vec<(u32, u32)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let mut deg = vec![0usize; n];
        for &(a, b) in &edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut nbrs = vec![0u32; offsets[n]];
        for &(a, b) in &edges {
            nbrs[fill[a as usize]] = b;
            fill[a as usize] += 1;
            nbrs[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for v in 0..n {
            nbrs[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Self {
            offsets,
            nbrs,
            n_edges: edges.len(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.nbrs[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Each edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .filter(move |&&b| (a as u32) < b)
                .map(move |&b| (a as u32, b))
        })
    }

    /// Component label per vertex (labels `0..count`, in order of first vertex).
    pub fn components(&self) -> (usize, Vec<u32>) {
        let n = self.n();
        let mut label = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    if label[w as usize] == u32::MAX {
                        label[w as usize] = count;
                        stack.push(w as usize);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 <= 1
    }

    /// Induced subgraph on `keep` (vertex `keep[i]` becomes `i`).
    pub fn induced(&self, keep: &[u32]) -> Graph {
        let mut index = vec![u32::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let edges = self
            .edges()
            .filter(|(a, b)| index[*a as usize] != u32::MAX && index[*b as usize] != u32::MAX)
            .map(|(a, b)| (index[a as usize], index[b as usize]));
        Graph::from_edges(keep.len(), edges.collect::<Vec<_>>())
    }

    /// `|E(S, V∖S)|` for a membership mask.
    pub fn cut_size(&self, in_set: &[bool]) -> usize {
        self.edges()
            .filter(|(a, b)| in_set[*a as usize] != in_set[*b as usize])
            .count()
    }

    /// Reads the edge-list text format:
    ///
    /// ```text
    /// vertices <n>
    /// <n attribute lines, ignored here>
    /// edges <e>
    /// <src> <dst>      (e lines)
    /// ```
    ///
    /// Lines starting with `#` are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let count = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<usize> {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, &format!("missing `{key}` header")))?;
            l.strip_prefix(key)
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| bad(ln, &format!("expected `{key} <count>`")))
        };
        let n = count(&mut lines, "vertices")?;
        for _ in 0..n {
            lines.next().ok_or_else(|| bad(0, "truncated vertex table"))?;
        }
        let e = count(&mut lines, "edges")?;
        let mut edges = Vec::with_capacity(e);
        for _ in 0..e {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "truncated edge table"))?;
            let mut it = l.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) if (a as usize) < n && (b as usize) < n => edges.push((a, b)),
                _ => return Err(bad(ln, "expected `<src> <dst>` with ids below the vertex count")),
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(bad(ln, "trailing content after edge table"));
        }
        Ok(Graph::from_edges(n, edges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_basics() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (2, 2)]);
        assert_eq!(g.n_edges(), 4);
        assert_eq!(g.max_degree(), 2);
        assert!(g.is_connected());
        assert_eq!(g.cut_size(&[true, true, false, false]), 2);
        let h = g.induced(&[0, 1, 3]);
        assert_eq!(h.n_edges(), 2);
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "vertices 3\n0 x\n1 x\n2 x\nedges 2\n0 1\n2 1\n";
        let g = Graph::parse_edge_list(text).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(Graph::parse_edge_list("vertices 1\n0\nedges 1\n0 4\n").is_err());
    }
}
