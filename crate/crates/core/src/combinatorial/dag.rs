//! s–t paths in a directed acyclic graph whose edges are the arms.

use super::action::Action;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub arm: usize,
}

#[derive(Debug, Clone)]
pub struct DagGraph {
    num_nodes: usize,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    /// Incoming edge indices per node, sorted by arm index.
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    topo_order: Vec<usize>,
}

impl DagGraph {
    /// Arms must be exactly `0..edges.len()`, one per edge. Fails on cycles.
    pub fn new(num_nodes: usize, edges: Vec<Edge>, source: usize, sink: usize) -> Result<Self> {
        if source >= num_nodes || sink >= num_nodes {
            return Err(Error::InvalidGraph(format!(
                "source {source} / sink {sink} outside {num_nodes} nodes"
            )));
        }
        if source == sink {
            return Err(Error::InvalidGraph("source equals sink".into()));
        }
        let mut seen = vec![false; edges.len()];
        for e in &edges {
            if e.from >= num_nodes || e.to >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge {e:?} references unknown node"
                )));
            }
            if e.arm >= edges.len() || seen[e.arm] {
                return Err(Error::InvalidGraph(format!(
                    "arm indices must be a permutation of 0..{}",
                    edges.len()
                )));
            }
            seen[e.arm] = true;
        }
        let mut incoming = vec![Vec::new(); num_nodes];
        let mut outgoing = vec![Vec::new(); num_nodes];
        for (i, e) in edges.iter().enumerate() {
            incoming[e.to].push(i);
            outgoing[e.from].push(i);
        }
        for list in incoming.iter_mut().chain(outgoing.iter_mut()) {
            list.sort_by_key(|&i| edges[i].arm);
        }

        // Kahn's algorithm; leftover nodes sit on a cycle.
        let mut indeg: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..num_nodes).rev().filter(|&v| indeg[v] == 0).collect();
        let mut topo_order = Vec::with_capacity(num_nodes);
        while let Some(v) = stack.pop() {
            topo_order.push(v);
            for &ei in outgoing[v].iter().rev() {
                let w = edges[ei].to;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if topo_order.len() != num_nodes {
            return Err(Error::InvalidGraph("graph contains a cycle".into()));
        }
        Ok(Self {
            num_nodes,
            edges,
            source,
            sink,
            incoming,
            outgoing,
            topo_order,
        })
    }

    /// Binomial bridge with `n_s` stages: an `(n_s/2 + 1)`-square lattice
    /// walked right or down from the top-left to the bottom-right corner.
    pub fn grid(n_s: usize) -> Result<Self> {
        if n_s < 2 || n_s % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid stages must be even and >= 2, got {n_s}"
            )));
        }
        let side = n_s / 2 + 1;
        let node = |r: usize, c: usize| r * side + c;
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    edges.push((node(r, c), node(r, c + 1)));
                }
                if r + 1 < side {
                    edges.push((node(r, c), node(r + 1, c)));
                }
            }
        }
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(arm, (from, to))| Edge { from, to, arm })
            .collect();
        Self::new(side * side, edges, node(0, 0), node(side - 1, side - 1))
    }

    /// `n_l` layers of `n_n` nodes, fully connected between consecutive
    /// layers, plus a source feeding the first layer and a sink fed by the
    /// last one.
    pub fn line(n_n: usize, n_l: usize) -> Result<Self> {
        if n_n < 2 || n_l < 2 {
            return Err(Error::InvalidParameter(format!(
                "line network needs n_n >= 2 and n_l >= 2, got ({n_n}, {n_l})"
            )));
        }
        let source = 0;
        let sink = 1 + n_n * n_l;
        let node = |layer: usize, i: usize| 1 + layer * n_n + i;
        let mut pairs = Vec::new();
        for i in 0..n_n {
            pairs.push((source, node(0, i)));
        }
        for layer in 0..n_l - 1 {
            for i in 0..n_n {
                for j in 0..n_n {
                    pairs.push((node(layer, i), node(layer + 1, j)));
                }
            }
        }
        for i in 0..n_n {
            pairs.push((node(n_l - 1, i), sink));
        }
        let edges = pairs
            .into_iter()
            .enumerate()
            .map(|(arm, (from, to))| Edge { from, to, arm })
            .collect();
        Self::new(sink + 1, edges, source, sink)
    }

    /// Parses `u v arm` lines; blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str, source: usize, sink: usize) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_node = source.max(sink);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidGraph(format!("line {}: bad integer {s:?}", lineno + 1))
                })
            };
            if fields.len() != 3 {
                return Err(Error::InvalidGraph(format!(
                    "line {}: expected `u v arm`, got {line:?}",
                    lineno + 1
                )));
            }
            let (from, to, arm) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            max_node = max_node.max(from).max(to);
            edges.push(Edge { from, to, arm });
        }
        Self::new(max_node + 1, edges, source, sink)
    }

    pub fn num_arms(&self) -> usize {
        self.edges.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Every s–t path, in lexicographic order of the sorted arm sets.
    pub fn enumerate_paths(&self) -> Vec<Action> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.dfs(self.source, &mut current, &mut out);
        out.sort();
        out
    }

    fn dfs(&self, v: usize, current: &mut Vec<usize>, out: &mut Vec<Action>) {
        if v == self.sink {
            let mut arms = current.clone();
            arms.sort_unstable();
            out.push(Action::from_sorted(arms));
            return;
        }
        for &ei in &self.outgoing[v] {
            let e = self.edges[ei];
            current.push(e.arm);
            self.dfs(e.to, current, out);
            current.pop();
        }
    }

    /// Longest edge count of an s–t path.
    pub fn max_path_len(&self) -> Option<usize> {
        let unit = vec![1.0; self.num_arms()];
        linmax_dag_path(self, &unit).ok().map(|a| a.len())
    }
}

/// Maximum-cost s–t path by dynamic programming in topological order.
///
/// Costs may be negative. Among equal-value predecessors the edge with the
/// lowest arm index wins.
pub fn linmax_dag_path(graph: &DagGraph, cost: &[f64]) -> Result<Action> {
    assert_eq!(cost.len(), graph.num_arms(), "one cost per arm");
    let n = graph.num_nodes;
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut via: Vec<Option<usize>> = vec![None; n];
    best[graph.source] = 0.0;
    for &v in &graph.topo_order {
        if v == graph.source {
            continue;
        }
        for &ei in &graph.incoming[v] {
            let e = graph.edges[ei];
            let base = best[e.from];
            if base == f64::NEG_INFINITY {
                continue;
            }
            let candidate = base + cost[e.arm];
            if via[v].is_none() || candidate > best[v] {
                best[v] = candidate;
                via[v] = Some(ei);
            }
        }
    }
    if via[graph.sink].is_none() {
        return Err(Error::NoPath);
    }
    let mut arms = Vec::new();
    let mut v = graph.sink;
    while v != graph.source {
        let ei = via[v].ok_or(Error::NoPath)?;
        arms.push(graph.edges[ei].arm);
        v = graph.edges[ei].from;
    }
    arms.sort_unstable();
    Ok(Action::from_sorted(arms))
}
