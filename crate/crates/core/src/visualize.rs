//! Visualization of the trailing principal submatrices `A(V_s)`.
//!
//! One backward sweep over the groups adds nodes to a growing set `N'`
//! (groups `r` down to `1`, descending node index inside a group). Each
//! new node `i` gets a single-sink Dijkstra run; the resulting potentials
//! rescale the arcs so that every weight in `b(N')` stays non-positive.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::matrix::{DiagonalScaling, Matrix};
use crate::partition::NodePartition;
use crate::rational::Rational;

/// Maximum-weight paths into one sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkTree {
    pub sink: usize,
    /// Nodes with a path to the sink, in settling order (sink first).
    pub reachable: Vec<usize>,
    /// `labels[j]`: maximum weight of a `j`-sink path, `None` if unreachable.
    pub labels: Vec<Option<Rational>>,
}

/// Label-setting sweep on the reversed graph.
///
/// `in_adj[v]` lists the tails of arcs entering `v`, `weight(u, v)` returns
/// the arc weight. Arcs not incident to the sink must be non-positive and no
/// circuit through the sink may be positive.
fn sink_labels<'w>(
    n: usize,
    sink: usize,
    in_adj: &[Vec<usize>],
    weight: impl Fn(usize, usize) -> &'w Rational,
) -> Result<SinkTree> {
    let mut labels: Vec<Option<Rational>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut reachable = Vec::new();
    let mut heap = BinaryHeap::new();
    labels[sink] = Some(Rational::zero());
    heap.push((Rational::zero(), Reverse(sink)));
    while let Some((label, Reverse(j))) = heap.pop() {
        if settled[j] || labels[j].as_ref() != Some(&label) {
            continue;
        }
        settled[j] = true;
        reachable.push(j);
        for &k in &in_adj[j] {
            let w = weight(k, j);
            let cand = w + &label;
            if k == sink {
                if cand.is_positive() {
                    return Err(Error::PositiveCircuit);
                }
                continue;
            }
            if j != sink && w.is_positive() {
                return Err(Error::Invariant(format!(
                    "arc ({k},{j}) has positive weight {w} away from the sink"
                )));
            }
            if settled[k] {
                if cand > *labels[k].as_ref().expect("settled") {
                    return Err(Error::Invariant("label improved after settling".into()));
                }
                continue;
            }
            if labels[k].as_ref().is_none_or(|l| cand > *l) {
                labels[k] = Some(cand.clone());
                heap.push((cand, Reverse(k)));
            }
        }
    }
    Ok(SinkTree {
        sink,
        reachable,
        labels,
    })
}

/// Maximum weight of every path into `sink`, by Dijkstra on the reversed
/// graph. Only arcs incident to `sink` may be positive.
pub fn dijkstra_single_sink(g: &WeightedDigraph, sink: usize) -> Result<SinkTree> {
    let n = g.node_count();
    if sink >= n {
        return Err(Error::Invariant(format!("sink {sink} out of range")));
    }
    let mut in_adj = vec![Vec::new(); n];
    let mut best: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); n];
    for arc in g.arcs() {
        in_adj[arc.head].push(arc.tail);
        best[arc.head].push((arc.tail, &arc.weight));
    }
    for (v, tails) in in_adj.iter_mut().enumerate() {
        tails.sort_unstable();
        tails.dedup();
        best[v].sort_unstable_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(x.1)));
        best[v].dedup_by_key(|x| x.0);
    }
    let lookup = |u: usize, v: usize| -> &Rational {
        let row = &best[v];
        let pos = row.binary_search_by_key(&u, |x| x.0).expect("arc exists");
        row[pos].1
    };
    sink_labels(n, sink, &in_adj, lookup)
}

/// `A'_s` over `V_s` together with the scaling that produces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisualizedBlock {
    /// `V_s`, ascending.
    pub nodes: Vec<usize>,
    /// `diag(−d_s) ⊗ ((−λ_{k(s)}) ⊗ A(V_s)) ⊗ diag(d_s)`, labelled by `V_s`.
    pub matrix: Matrix,
    /// `d_s`, aligned with `nodes`.
    pub scaling: DiagonalScaling,
    pub rate: Rational,
}

impl VisualizedBlock {
    /// `d_j` for an original node `j ∈ V_s`.
    pub fn d(&self, node: usize) -> Option<&Rational> {
        let pos = self.nodes.binary_search(&node).ok()?;
        Some(&self.scaling.values()[pos])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisualizationResult {
    /// `blocks[s − 1]` belongs to group `s`.
    pub blocks: Vec<VisualizedBlock>,
    /// Nodes in the order they entered `N'`.
    pub insertion_order: Vec<usize>,
}

/// Current weights `b` on `N'`, stored densely with adjacency lists.
struct Arcs {
    b: Vec<Vec<Option<Rational>>>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    active: Vec<usize>,
}

impl Arcs {
    fn new(n: usize) -> Self {
        Arcs {
            b: vec![vec![None; n]; n],
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            active: Vec::new(),
        }
    }

    fn insert(&mut self, u: usize, v: usize, w: Rational) {
        self.b[u][v] = Some(w);
        self.out_adj[u].push(v);
        self.in_adj[v].push(u);
    }

    fn update_all(&mut self, mut f: impl FnMut(usize, usize, &Rational) -> Rational) {
        for &u in &self.active {
            for &v in &self.out_adj[u] {
                let w = self.b[u][v].as_mut().expect("listed arc");
                *w = f(u, v, w);
            }
        }
    }

    fn block(&self, nodes: &[usize]) -> Result<Matrix> {
        let mut local = vec![usize::MAX; self.b.len()];
        for (pos, &v) in nodes.iter().enumerate() {
            local[v] = pos;
        }
        let entries: Vec<(usize, usize, Rational)> = nodes
            .iter()
            .flat_map(|&u| {
                let local = &local;
                self.out_adj[u]
                    .iter()
                    .map(move |&v| (local[u], local[v], self.b[u][v].clone().expect("listed arc")))
            })
            .collect();
        Matrix::from_entries(nodes.len(), nodes.len(), entries)?
            .with_labels(Some(nodes.to_vec()), Some(nodes.to_vec()))
    }
}

pub fn visualize_all(a: &Matrix, part: &NodePartition) -> Result<VisualizationResult> {
    let n = a.ensure_square()?;
    if part.n != n {
        return Err(Error::DimensionMismatch {
            op: "visualize",
            left: (n, n),
            right: (part.n, part.n),
        });
    }
    let r = part.len();
    let mut arcs = Arcs::new(n);
    let mut in_set = vec![false; n];
    let mut d = vec![Rational::zero(); n];
    let mut blocks = Vec::with_capacity(r);
    let mut insertion_order = Vec::with_capacity(n);

    for s in (0..r).rev() {
        let lambda = &part.growth_rates[s];
        if s + 1 < r {
            let shift = &part.growth_rates[s + 1] - lambda;
            arcs.update_all(|_, _, w| w + &shift);
        }
        let mut order = part.groups[s].clone();
        order.sort_unstable_by(|x, y| y.cmp(x));
        for i in order {
            // splice the arcs of i, expressed in the current scaling
            for (j, w) in a.row(i) {
                if *j != i && in_set[*j] {
                    arcs.insert(i, *j, &(w - lambda) + &d[*j]);
                }
            }
            for k in 0..arcs.active.len() {
                let j = arcs.active[k];
                if let Some(w) = a.entry(j, i) {
                    arcs.insert(j, i, &(w - lambda) - &d[j]);
                }
            }
            if let Some(w) = a.entry(i, i) {
                arcs.insert(i, i, w - lambda);
            }
            arcs.active.push(i);
            in_set[i] = true;
            insertion_order.push(i);

            let tree = sink_labels(n, i, &arcs.in_adj, |u, v| {
                arcs.b[u][v].as_ref().expect("listed arc")
            })?;
            // w* keeps the arcs from R into N' ∖ R non-positive
            let mut w_star = Rational::zero();
            for &u in &tree.reachable {
                let wu = tree.labels[u].as_ref().expect("reachable");
                for &v in &arcs.out_adj[u] {
                    if tree.labels[v].is_none() {
                        let c = arcs.b[u][v].as_ref().expect("listed arc") - wu;
                        if c > w_star {
                            w_star = c;
                        }
                    }
                }
            }
            let w_star = -w_star;
            let w: Vec<Rational> = (0..n)
                .map(|j| tree.labels[j].clone().unwrap_or_else(|| w_star.clone()))
                .collect();
            let mut worst: Option<(usize, usize)> = None;
            arcs.update_all(|u, v, b| {
                let nb = &(b - &w[u]) + &w[v];
                if nb.is_positive() {
                    worst = Some((u, v));
                }
                nb
            });
            if let Some((u, v)) = worst {
                return Err(Error::Invariant(format!(
                    "arc ({u},{v}) stayed positive after rescaling at node {i}"
                )));
            }
            for &j in &arcs.active {
                d[j] += &w[j];
            }
        }
        let nodes = part.suffix(s + 1);
        let matrix = arcs.block(&nodes)?;
        let scaling = DiagonalScaling::new(nodes.iter().map(|&j| d[j].clone()).collect());
        blocks.push(VisualizedBlock {
            nodes,
            matrix,
            scaling,
            rate: lambda.clone(),
        });
    }
    blocks.reverse();
    Ok(VisualizationResult {
        blocks,
        insertion_order,
    })
}
