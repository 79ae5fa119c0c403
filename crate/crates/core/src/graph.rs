//! Weighted graph storage, edge-list ingestion and the directed to undirected
//! accumulation used as the solver's working graph.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{validation, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

/// One entry of a node's incidence list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incident {
    pub node: usize,
    pub edge: usize,
}

/// Immutable weighted graph with per-node volumes.
///
/// Undirected graphs keep every edge exactly once with `u < v`; directed
/// graphs keep parallel edges as given. In both cases the incidence index
/// lists every edge at both of its endpoints, so neighbor iteration costs
/// `O(deg)`.
#[derive(Clone, Debug)]
pub struct Graph<T = f64> {
    n: usize,
    edges: Vec<Edge<T>>,
    volumes: Vec<T>,
    directed: bool,
    labels: Vec<u64>,
    offsets: Vec<usize>,
    incidence: Vec<Incident>,
    self_loops_dropped: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    pub weighted: bool,
    pub directed: bool,
}

impl<T: Scalar> Graph<T> {
    /// Builds a graph with unit volumes and labels `0..n`.
    ///
    /// Self-loops are dropped and counted. For undirected graphs repeated
    /// `(i, j)` / `(j, i)` pairs are merged by summing their weights.
    pub fn new<I>(n: usize, edges: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut kept = Vec::new();
        let mut loops = 0;
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(validation(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            check_weight(w)?;
            if u == v {
                loops += 1;
                continue;
            }
            kept.push(Edge { u, v, w });
        }
        if !directed {
            kept = merge_undirected(kept);
        }
        let (offsets, incidence) = build_incidence(n, &kept);
        Ok(Graph {
            n,
            edges: kept,
            volumes: vec![T::one(); n],
            directed,
            labels: (0..n as u64).collect(),
            offsets,
            incidence,
            self_loops_dropped: loops,
        })
    }

    pub fn with_volumes(mut self, volumes: Vec<T>) -> Result<Self> {
        if volumes.len() != self.n {
            return Err(validation(format!(
                "{} volumes given for {} nodes",
                volumes.len(),
                self.n
            )));
        }
        if let Some(i) = volumes.iter().position(|v| !(v.is_finite() && *v > T::zero())) {
            return Err(validation(format!("volume of node {i} must be positive")));
        }
        self.volumes = volumes;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(validation("label count does not match node count"));
        }
        self.labels = labels;
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn volumes(&self) -> &[T] {
        &self.volumes
    }

    #[inline]
    pub fn volume(&self, i: usize) -> T {
        self.volumes[i]
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Original node ids, indexed by dense node id.
    #[inline]
    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    #[inline]
    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    #[inline]
    pub fn incident(&self, i: usize) -> &[Incident] {
        &self.incidence[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// `(neighbor, weight)` for every edge incident to `i`.
    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.incident(i)
            .iter()
            .map(move |inc| (inc.node, self.edges[inc.edge].w))
    }

    pub fn weighted_degree(&self, i: usize) -> T {
        self.neighbors(i).map(|(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn total_volume(&self) -> T {
        self.volumes.iter().copied().sum()
    }

    /// The undirected working graph: `w(i,j)` is the sum of every directed
    /// edge between `i` and `j` in either direction. Undirected input is
    /// returned unchanged.
    pub fn un(&self) -> Graph<T> {
        if !self.directed {
            return self.clone();
        }
        let edges = merge_undirected(self.edges.clone());
        let (offsets, incidence) = build_incidence(self.n, &edges);
        Graph {
            n: self.n,
            edges,
            volumes: self.volumes.clone(),
            directed: false,
            labels: self.labels.clone(),
            offsets,
            incidence,
            self_loops_dropped: self.self_loops_dropped,
        }
    }

    /// Removes edges of weight zero. They never contribute to the cost.
    pub fn without_zero_weights(&self) -> Graph<T> {
        if self.edges.iter().all(|e| e.w > T::zero()) {
            return self.clone();
        }
        let edges: Vec<_> = self.edges.iter().copied().filter(|e| e.w > T::zero()).collect();
        let (offsets, incidence) = build_incidence(self.n, &edges);
        Graph {
            edges,
            offsets,
            incidence,
            ..self.clone()
        }
    }

    /// Subgraph induced by `nodes`; node `nodes[k]` becomes node `k`.
    pub fn induced(&self, nodes: &[usize]) -> Result<Graph<T>> {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in nodes.iter().enumerate() {
            map[i] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.u] != usize::MAX && map[e.v] != usize::MAX)
            .map(|e| (map[e.u], map[e.v], e.w));
        Graph::new(nodes.len(), edges, self.directed)?
            .with_volumes(nodes.iter().map(|&i| self.volumes[i]).collect())?
            .with_labels(nodes.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn laplacian(&self) -> Result<LaplacianView<'_, T>> {
        if self.directed {
            return Err(crate::error::contract("Laplacian requires an undirected graph"));
        }
        let degrees = (0..self.n).map(|i| self.weighted_degree(i)).collect();
        Ok(LaplacianView { graph: self, degrees })
    }

    /// Writes the graph in edge-list form: `label label weight` per line,
    /// sorted by dense endpoint ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by_key(|&k| (self.edges[k].u, self.edges[k].v));
        for k in order {
            let e = &self.edges[k];
            writeln!(out, "{} {} {}", self.labels[e.u], self.labels[e.v], e.w)?;
        }
        Ok(())
    }

    /// Parses whitespace separated `src dst [weight]` lines. `#` starts a
    /// comment line. Node ids are remapped densely in first-seen order.
    /// Without `weighted`, columns after the second are ignored.
    pub fn parse_edge_list<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Self> {
        let mut ids: HashMap<u64, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut edges = Vec::new();
        let mut intern = |label: u64| {
            *ids.entry(label).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            })
        };
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let mut fields = body.split_whitespace();
            let mut node = |what: &str| -> Result<u64> {
                let tok = fields.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("missing {what} node id"),
                })?;
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("invalid node id {tok:?}"),
                })
            };
            let src = node("source")?;
            let dst = node("target")?;
            let w = match (opts.weighted, fields.next()) {
                (true, Some(tok)) => {
                    let w: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("invalid weight {tok:?}"),
                    })?;
                    if w.is_nan() || w.is_infinite() {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("non-finite weight {tok:?}"),
                        });
                    }
                    if w < 0.0 {
                        return Err(validation(format!("line {lineno}: negative weight {w}")));
                    }
                    T::lit(w)
                }
                _ => T::one(),
            };
            let (u, v) = (intern(src), intern(dst));
            edges.push((u, v, w));
        }
        let n = labels.len();
        if n == 0 {
            return Err(validation("empty graph"));
        }
        let g = Graph::new(n, edges, opts.directed)?.with_labels(labels)?;
        if g.self_loops_dropped > 0 {
            log::warn!("dropped {} self-loop(s)", g.self_loops_dropped);
        }
        Ok(g)
    }

    /// Reads `label volume` lines; nodes not listed keep volume 1.
    pub fn read_volumes<R: BufRead>(&self, reader: R) -> Result<Vec<T>> {
        let index: HashMap<u64, usize> =
            self.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut vols = vec![T::one(); self.n];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: lineno + 1, msg };
            let mut fields = body.split_whitespace();
            let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
                return Err(bad("expected `node volume`".into()));
            };
            let label: u64 = a.parse().map_err(|_| bad(format!("invalid node id {a:?}")))?;
            let vol: f64 = b.parse().map_err(|_| bad(format!("invalid volume {b:?}")))?;
            let &i = index
                .get(&label)
                .ok_or_else(|| validation(format!("volume given for unknown node {label}")))?;
            if !(vol.is_finite() && vol > 0.0) {
                return Err(validation(format!("volume of node {label} must be positive")));
            }
            vols[i] = T::lit(vol);
        }
        Ok(vols)
    }
}

fn check_weight<T: Scalar>(w: T) -> Result<()> {
    if w.is_nan() || w.is_infinite() {
        return Err(validation("edge weight must be finite"));
    }
    if w < T::zero() {
        return Err(validation(format!("negative edge weight {w}")));
    }
    Ok(())
}

fn merge_undirected<T: Scalar>(edges: Vec<Edge<T>>) -> Vec<Edge<T>> {
    let mut edges: Vec<Edge<T>> = edges
        .into_iter()
        .map(|e| Edge {
            u: e.u.min(e.v),
            v: e.u.max(e.v),
            w: e.w,
        })
        .collect();
    edges.sort_by_key(|e| (e.u, e.v));
    let mut merged: Vec<Edge<T>> = Vec::with_capacity(edges.len());
    for e in edges {
        match merged.last_mut() {
            Some(last) if last.u == e.u && last.v == e.v => last.w += e.w,
            _ => merged.push(e),
        }
    }
    merged
}

fn build_incidence<T>(n: usize, edges: &[Edge<T>]) -> (Vec<usize>, Vec<Incident>) {
    let mut offsets = vec![0usize; n + 1];
    for e in edges {
        offsets[e.u + 1] += 1;
        offsets[e.v + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut incidence = vec![Incident { node: 0, edge: 0 }; offsets[n]];
    for (k, e) in edges.iter().enumerate() {
        incidence[fill[e.u]] = Incident { node: e.v, edge: k };
        fill[e.u] += 1;
        incidence[fill[e.v]] = Incident { node: e.u, edge: k };
        fill[e.v] += 1;
    }
    (offsets, incidence)
}

/// Read-only view of `L = D - W` for an undirected graph.
#[derive(Clone, Debug)]
pub struct LaplacianView<'g, T> {
    graph: &'g Graph<T>,
    degrees: Vec<T>,
}

impl<'g, T: Scalar> LaplacianView<'g, T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    #[inline]
    pub fn graph(&self) -> &'g Graph<T> {
        self.graph
    }

    /// `d_ii`, the weighted degree of `i`.
    #[inline]
    pub fn diag(&self, i: usize) -> T {
        self.degrees[i]
    }

    /// Nonzero entries of row `i`: the diagonal first, then `-w_ij` per
    /// incident edge.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        std::iter::once((i, self.degrees[i]))
            .chain(self.graph.neighbors(i).map(|(j, w)| (j, -w)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, weighted: bool, directed: bool) -> Result<Graph> {
        Graph::parse_edge_list(text.as_bytes(), ParseOptions { weighted, directed })
    }

    fn triples(g: &Graph) -> Vec<(usize, usize, f64)> {
        g.edges().iter().map(|e| (e.u, e.v, e.w)).collect()
    }

    #[test]
    fn parse_unweighted_directed() {
        let g = parse("0 1\n1 2\n", false, true).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(triples(&g), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn parse_weighted_with_comment() {
        let g = parse("0 1 2.5\n# comment\n1 0 0.5\n", true, true).unwrap();
        assert_eq!(triples(&g), vec![(0, 1, 2.5), (1, 0, 0.5)]);
    }

    #[test]
    fn parse_drops_self_loops() {
        let g = parse("0 0\n0 1\n", false, true).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.self_loops_dropped(), 1);
    }

    #[test]
    fn parse_remaps_in_first_seen_order() {
        let g = parse("40 7\n7 3\n", false, false).unwrap();
        assert_eq!(g.labels(), &[40, 7, 3]);
        assert_eq!(triples(&g), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn undirected_duplicates_accumulate() {
        let g = parse("0 1 1\n1 0 2\n0 1 0.5\n", true, false).unwrap();
        assert_eq!(triples(&g), vec![(0, 1, 3.5)]);
    }

    #[test]
    fn parse_errors() {
        match parse("0 1\nx 2\n", false, true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0 1 -1\n", true, true), Err(Error::Validation(_))));
        assert!(matches!(parse("# nothing\n", false, true), Err(Error::Validation(_))));
        assert!(matches!(parse("5\n", false, true), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn extra_columns_ignored_when_unweighted() {
        let g = parse("1 2 -1\n", false, true).unwrap();
        assert_eq!(triples(&g), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn un_accumulates_both_directions() {
        let g = Graph::new(2, [(0, 1, 2.0), (1, 0, 3.0)], true).unwrap();
        assert_eq!(triples(&g.un()), vec![(0, 1, 5.0)]);
        let g = Graph::new(2, [(0, 1, 1.0)], true).unwrap();
        assert_eq!(triples(&g.un()), vec![(0, 1, 1.0)]);
        let g = Graph::new(2, [(0, 1, 1.0), (0, 1, 1.0), (1, 0, 1.0)], true).unwrap();
        assert_eq!(g.edge_count(), 3);
        let u = g.un();
        assert!(!u.is_directed());
        assert_eq!(triples(&u), vec![(0, 1, 3.0)]);
    }

    #[test]
    fn laplacian_diagonals() {
        let single = Graph::new(2, [(0, 1, 1.0)], false).unwrap();
        let l = single.laplacian().unwrap();
        assert_eq!((l.diag(0), l.diag(1)), (1.0, 1.0));
        assert_eq!(l.row(0).collect::<Vec<_>>(), vec![(0, 1.0), (1, -1.0)]);

        let tri = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false).unwrap();
        let l = tri.laplacian().unwrap();
        assert_eq!((0..3).map(|i| l.diag(i)).collect::<Vec<_>>(), vec![2.0; 3]);

        let star = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap();
        let l = star.laplacian().unwrap();
        assert_eq!(
            (0..4).map(|i| l.diag(i)).collect::<Vec<_>>(),
            vec![3.0, 1.0, 1.0, 1.0]
        );
        for i in 0..4 {
            assert_eq!(l.row(i).map(|(_, x)| x).sum::<f64>(), 0.0);
        }

        let directed = Graph::new(2, [(0, 1, 1.0)], true).unwrap();
        assert!(matches!(directed.laplacian(), Err(Error::Contract(_))));
    }

    #[test]
    fn volumes_file() {
        let g = parse("10 20\n20 30\n", false, false).unwrap();
        let v = g.read_volumes("20 2.5\n# c\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.0, 2.5, 1.0]);
        assert!(g.read_volumes("99 1\n".as_bytes()).is_err());
        assert!(g.read_volumes("10 0\n".as_bytes()).is_err());
        let g = g.with_volumes(v).unwrap();
        assert_eq!(g.total_volume(), 4.5);
    }

    #[test]
    fn incidence_matches_edge_list() {
        let g = Graph::new(4, [(0, 1, 1.0), (2, 1, 2.0), (3, 0, 1.0)], true).unwrap();
        let mut seen = vec![0; g.edge_count()];
        for i in 0..g.n() {
            for inc in g.incident(i) {
                let e = g.edges()[inc.edge];
                assert!(e.u == i || e.v == i);
                assert_eq!(inc.node, if e.u == i { e.v } else { e.u });
                seen[inc.edge] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 2));
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 3, 2.0), (2, 3, 1.0)], false).unwrap();
        let s = g.induced(&[1, 3]).unwrap();
        assert_eq!(triples(&s), vec![(0, 1, 2.0)]);
        assert_eq!(s.labels(), &[1, 3]);
    }

    #[test]
    fn serialize_is_sorted_and_reparses() {
        let g = parse("5 3 1.5\n1 5 2\n3 1 0.25\n", true, true).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "5 3 1.5\n3 1 0.25\n1 5 2\n");
        let h = parse(&text, true, true).unwrap();
        assert_eq!(h.n(), g.n());
        assert_eq!(h.edge_count(), g.edge_count());
    }
}
