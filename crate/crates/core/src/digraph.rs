//! The weighted digraph 𝒢(A) of a square matrix and the classical spectral
//! machinery on it: strongly connected components, Karp's maximum cycle
//! mean, the critical graph, cyclicity classes and principal eigenvectors.

use std::collections::VecDeque;

use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::scalar::Tropical;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub weight: Rational,
}

/// `𝒢(A) = (N, E, w)` with `(i, j) ∈ E ⇔ a_ij ≠ ε`.
#[derive(Clone, Debug)]
pub struct WeightedDigraph {
    n: usize,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl WeightedDigraph {
    pub fn from_matrix(a: &Matrix) -> Result<Self> {
        let n = a.ensure_square()?;
        let arcs = a
            .entries()
            .map(|(tail, head, w)| Arc {
                tail,
                head,
                weight: w.clone(),
            })
            .collect();
        Ok(Self::from_arcs(n, arcs))
    }

    pub fn from_arcs(n: usize, arcs: Vec<Arc>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (id, arc) in arcs.iter().enumerate() {
            out[arc.tail].push(id);
            inc[arc.head].push(id);
        }
        WeightedDigraph { n, arcs, out, inc }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &Arc {
        &self.arcs[id]
    }

    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = &Arc> + '_ {
        self.out[v].iter().map(move |&id| &self.arcs[id])
    }

    pub fn in_arcs(&self, v: usize) -> impl Iterator<Item = &Arc> + '_ {
        self.inc[v].iter().map(move |&id| &self.arcs[id])
    }

    pub fn weight(&self, tail: usize, head: usize) -> Option<&Rational> {
        self.out_arcs(tail).find(|a| a.head == head).map(|a| &a.weight)
    }

    /// Strongly connected components, each sorted ascending.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        strongly_connected(self.n, self.arcs.iter().map(|a| (a.tail, a.head)))
    }
}

/// Strongly connected components of an unweighted arc list.
pub(crate) fn strongly_connected(
    n: usize,
    arcs: impl Iterator<Item = (usize, usize)>,
) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    for _ in 0..n {
        g.add_node(());
    }
    for (u, v) in arcs {
        g.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort_unstable();
    comps
}

/// An elementary circuit, stored without repeating its first node and
/// rotated so that the smallest node comes first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    nodes: Vec<usize>,
    weight: Rational,
}

impl Circuit {
    /// Builds the circuit `nodes[0] → nodes[1] → … → nodes[0]` in `a`.
    pub fn from_nodes(a: &Matrix, nodes: &[usize]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invariant("empty circuit".into()));
        }
        let mut seen = nodes.to_vec();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant(format!("circuit {nodes:?} is not elementary")));
        }
        let mut weight = Rational::zero();
        for k in 0..nodes.len() {
            let (u, v) = (nodes[k], nodes[(k + 1) % nodes.len()]);
            let w = a
                .entry(u, v)
                .ok_or_else(|| Error::Invariant(format!("({u},{v}) is not an arc")))?;
            weight += w;
        }
        Ok(Self::from_parts(nodes.to_vec(), weight))
    }

    /// Trusts the caller for elementarity and `weight`; rotates so the
    /// smallest node comes first.
    pub fn from_parts(mut nodes: Vec<usize>, weight: Rational) -> Self {
        let start = nodes
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| v)
            .map(|(k, _)| k)
            .unwrap_or(0);
        nodes.rotate_left(start);
        Circuit { nodes, weight }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn mean(&self) -> Rational {
        &self.weight / &Rational::from_integer(self.nodes.len() as i64)
    }

    pub fn min_node(&self) -> usize {
        self.nodes[0]
    }

    /// Arcs in traversal order, closing back to the first node.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let l = self.nodes.len();
        (0..l).map(move |k| (self.nodes[k], self.nodes[(k + 1) % l]))
    }

    /// 1-based cyclic listing such as `(1,2,3,1)`.
    pub fn display_one_based(&self) -> String {
        let mut parts: Vec<String> = self.nodes.iter().map(|v| (v + 1).to_string()).collect();
        parts.push((self.nodes[0] + 1).to_string());
        format!("({})", parts.join(","))
    }
}

/// Maximum mean weight over all elementary circuits, ε when acyclic.
///
/// Karp's algorithm on every strongly connected component.
pub fn karp_max_cycle_mean(g: &WeightedDigraph) -> Tropical {
    let mut best = Tropical::Eps;
    let mut local = vec![usize::MAX; g.n];
    for comp in g.sccs() {
        for (pos, &v) in comp.iter().enumerate() {
            local[v] = pos;
        }
        let k = comp.len();
        let internal: Vec<(usize, usize, &Rational)> = comp
            .iter()
            .flat_map(|&u| g.out_arcs(u))
            .filter(|a| local[a.head] != usize::MAX)
            .map(|a| (local[a.tail], local[a.head], &a.weight))
            .collect();
        if !internal.is_empty() {
            let mean = karp_component(k, &internal);
            best = best.oplus(&Tropical::Fin(mean));
        }
        for &v in &comp {
            local[v] = usize::MAX;
        }
    }
    best
}

fn karp_component(k: usize, arcs: &[(usize, usize, &Rational)]) -> Rational {
    // walks[j][v]: maximum weight of a length-j walk from node 0 to v
    let mut walks: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; k + 1];
    walks[0][0] = Some(Rational::zero());
    for j in 0..k {
        let (done, rest) = walks.split_at_mut(j + 1);
        let (prev, next) = (&done[j], &mut rest[0]);
        for &(u, v, w) in arcs {
            if let Some(pu) = &prev[u] {
                let cand = pu + w;
                if next[v].as_ref().is_none_or(|cur| cand > *cur) {
                    next[v] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Rational> = None;
    for (v, full) in walks[k].iter().enumerate() {
        let Some(full) = full else { continue };
        let worst = (0..k)
            .filter_map(|j| {
                walks[j][v]
                    .as_ref()
                    .map(|dj| &(full - dj) / &Rational::from_integer((k - j) as i64))
            })
            .min();
        if let Some(worst) = worst {
            if best.as_ref().is_none_or(|b| worst > *b) {
                best = Some(worst);
            }
        }
    }
    best.expect("strongly connected component with an arc has a circuit")
}

/// Potentials `p` with `−p_i + w_ij − λ + p_j ≤ 0` on every arc: `p_i` is the
/// maximum weight of a path leaving `i` in `(−λ) ⊗ A` (empty path included).
pub fn potentials(g: &WeightedDigraph, lambda: &Rational) -> Result<Vec<Rational>> {
    let n = g.n;
    let mut p = vec![Rational::zero(); n];
    let mut queued = vec![true; n];
    let mut updates = vec![0usize; n];
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(j) = queue.pop_front() {
        queued[j] = false;
        for arc in g.in_arcs(j) {
            let cand = &(&arc.weight - lambda) + &p[j];
            if cand > p[arc.tail] {
                p[arc.tail] = cand;
                updates[arc.tail] += 1;
                if updates[arc.tail] > n {
                    return Err(Error::BelowMaxCycleMean {
                        lambda: lambda.clone(),
                    });
                }
                if !queued[arc.tail] {
                    queued[arc.tail] = true;
                    queue.push_back(arc.tail);
                }
            }
        }
    }
    Ok(p)
}

/// `𝒢^c(A)`: nodes and arcs on circuits of mean exactly `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalGraph {
    pub node_count: usize,
    pub lambda: Rational,
    pub nodes: Vec<usize>,
    pub arcs: Vec<(usize, usize)>,
}

impl CriticalGraph {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

pub fn critical_graph(g: &WeightedDigraph, lambda: &Rational) -> Result<CriticalGraph> {
    let p = potentials(g, lambda)?;
    let zero_arcs: Vec<(usize, usize)> = g
        .arcs()
        .iter()
        .filter(|a| (&(&a.weight - lambda) + &p[a.head]) == p[a.tail])
        .map(|a| (a.tail, a.head))
        .collect();
    let comps = strongly_connected(g.n, zero_arcs.iter().copied());
    let mut comp_of = vec![0usize; g.n];
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            comp_of[v] = c;
        }
    }
    let mut arcs: Vec<(usize, usize)> = zero_arcs
        .into_iter()
        .filter(|&(u, v)| comp_of[u] == comp_of[v])
        .collect();
    arcs.sort_unstable();
    let mut nodes: Vec<usize> = arcs.iter().flat_map(|&(u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    Ok(CriticalGraph {
        node_count: g.n,
        lambda: lambda.clone(),
        nodes,
        arcs,
    })
}

/// One strongly connected component of a critical graph together with its
/// cyclicity and the classes of its nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalComponent {
    pub nodes: Vec<usize>,
    pub period: usize,
    /// `classes[r]` holds the nodes at breadth-first level `≡ r (mod period)`
    /// from the smallest node of the component.
    pub classes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicityClasses {
    /// lcm of the component periods.
    pub sigma: usize,
    pub components: Vec<CriticalComponent>,
    /// Flattened class id per node; `None` for non-critical nodes.
    pub class_of: Vec<Option<usize>>,
}

impl CyclicityClasses {
    pub fn classes(&self) -> impl Iterator<Item = &Vec<usize>> + '_ {
        self.components.iter().flat_map(|c| c.classes.iter())
    }

    pub fn class_count(&self) -> usize {
        self.components.iter().map(|c| c.period).sum()
    }

    pub fn component_containing(&self, v: usize) -> Option<&CriticalComponent> {
        self.components.iter().find(|c| c.nodes.binary_search(&v).is_ok())
    }
}

pub fn cyclicity_classes(cg: &CriticalGraph) -> Result<CyclicityClasses> {
    if cg.is_empty() {
        return Err(Error::EmptyCriticalGraph);
    }
    let n = cg.node_count;
    let comps = strongly_connected(n, cg.arcs.iter().copied());
    let mut out_adj = vec![Vec::new(); n];
    for &(u, v) in &cg.arcs {
        out_adj[u].push(v);
    }
    let mut components = Vec::new();
    let mut class_of = vec![None; n];
    let mut sigma = 1usize;
    let mut next_class = 0;
    for comp in comps {
        if out_adj[comp[0]].is_empty() {
            continue;
        }
        let root = comp[0];
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut queue = VecDeque::from([root]);
        let mut period = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in &out_adj[u] {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for &u in &comp {
            for &v in &out_adj[u] {
                let gap = (level[u] + 1).abs_diff(level[v]);
                period = period.gcd(&gap);
            }
        }
        let mut classes = vec![Vec::new(); period];
        for &v in &comp {
            classes[level[v] % period].push(v);
        }
        for (r, class) in classes.iter().enumerate() {
            for &v in class {
                class_of[v] = Some(next_class + r);
            }
        }
        next_class += period;
        sigma = sigma.lcm(&period);
        components.push(CriticalComponent {
            nodes: comp,
            period,
            classes,
        });
    }
    Ok(CyclicityClasses {
        sigma,
        components,
        class_of,
    })
}

/// `λ(A)`, its critical graph, and the critical columns of
/// `((−λ(A)) ⊗ A)*`, each an eigenvector for `λ(A)`.
#[derive(Clone, Debug)]
pub struct PrincipalEigen {
    pub lambda: Rational,
    pub critical: CriticalGraph,
    pub vectors: Vec<(usize, Vec<Tropical>)>,
}

pub fn principal_eigenvectors(a: &Matrix) -> Result<PrincipalEigen> {
    let g = WeightedDigraph::from_matrix(a)?;
    let lambda = karp_max_cycle_mean(&g)
        .into_finite()
        .ok_or(Error::NoFiniteEigenvalue)?;
    let critical = critical_graph(&g, &lambda)?;
    let star = a.scale(&-&lambda).kleene_star()?;
    let vectors = critical
        .nodes
        .iter()
        .map(|&k| (k, star.column(k)))
        .collect();
    Ok(PrincipalEigen {
        lambda,
        critical,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::worked_example;

    fn m(s: &str) -> Matrix {
        Matrix::parse_rows(s).unwrap()
    }

    fn graph(s: &str) -> WeightedDigraph {
        WeightedDigraph::from_matrix(&m(s)).unwrap()
    }

    #[test]
    fn build_graph_examples() {
        let g = WeightedDigraph::from_matrix(&worked_example()).unwrap();
        assert_eq!((g.node_count(), g.arc_count()), (10, 18));
        let e = WeightedDigraph::from_matrix(&Matrix::eps(3, 3)).unwrap();
        assert_eq!((e.node_count(), e.arc_count()), (3, 0));
        let i = WeightedDigraph::from_matrix(&Matrix::identity(2)).unwrap();
        assert!(i.arcs().iter().all(|a| a.tail == a.head && a.weight.is_zero()));
        assert_eq!(i.arc_count(), 2);
        assert!(WeightedDigraph::from_matrix(&Matrix::eps(2, 3)).is_err());
    }

    #[test]
    fn karp_examples() {
        let g = WeightedDigraph::from_matrix(&worked_example()).unwrap();
        assert_eq!(karp_max_cycle_mean(&g), Tropical::from(8));
        assert_eq!(karp_max_cycle_mean(&graph(". 1 .; . . 2; . . .")), Tropical::Eps);
        assert_eq!(karp_max_cycle_mean(&graph(". 1; 3 .")), Tropical::from(2));
        assert_eq!(
            karp_max_cycle_mean(&graph(". 1 .; . . 1; 0 . .")),
            Tropical::Fin(Rational::new(2, 3))
        );
    }

    #[test]
    fn critical_graph_examples() {
        let g = WeightedDigraph::from_matrix(&worked_example()).unwrap();
        let cg = critical_graph(&g, &Rational::from_integer(8)).unwrap();
        assert_eq!(cg.nodes, vec![0, 1]);
        assert_eq!(cg.arcs, vec![(0, 1), (1, 0)]);

        let cg = critical_graph(&graph("-3/2"), &Rational::new(-3, 2)).unwrap();
        assert_eq!((cg.nodes, cg.arcs), (vec![0], vec![(0, 0)]));

        let cg = critical_graph(&graph("0 0; 0 0"), &Rational::zero()).unwrap();
        assert_eq!(cg.nodes, vec![0, 1]);
        assert_eq!(cg.arcs.len(), 4);

        assert!(matches!(
            critical_graph(&g, &Rational::from_integer(7)),
            Err(Error::BelowMaxCycleMean { .. })
        ));
    }

    #[test]
    fn cyclicity_examples() {
        let cg = critical_graph(&graph(". 0; 0 ."), &Rational::zero()).unwrap();
        let cc = cyclicity_classes(&cg).unwrap();
        assert_eq!(cc.sigma, 2);
        assert_eq!(cc.classes().cloned().collect::<Vec<_>>(), vec![vec![0], vec![1]]);

        let cg = critical_graph(&graph("4"), &Rational::from_integer(4)).unwrap();
        let cc = cyclicity_classes(&cg).unwrap();
        assert_eq!((cc.sigma, cc.class_count()), (1, 1));

        let cg = critical_graph(&graph("0 0; 0 ."), &Rational::zero()).unwrap();
        let cc = cyclicity_classes(&cg).unwrap();
        assert_eq!(cc.sigma, 1);
        assert_eq!(cc.classes().cloned().collect::<Vec<_>>(), vec![vec![0, 1]]);

        let empty = CriticalGraph {
            node_count: 2,
            lambda: Rational::zero(),
            nodes: vec![],
            arcs: vec![],
        };
        assert_eq!(cyclicity_classes(&empty), Err(Error::EmptyCriticalGraph));
    }

    #[test]
    fn cyclicity_lcm_over_components() {
        // a 2-cycle and a disjoint 3-cycle, all arcs weight 0
        let a = m(". 0 . . .; 0 . . . .; . . . 0 .; . . . . 0; . . 0 . .");
        let cg = critical_graph(&WeightedDigraph::from_matrix(&a).unwrap(), &Rational::zero()).unwrap();
        let cc = cyclicity_classes(&cg).unwrap();
        assert_eq!(cc.sigma, 6);
        assert_eq!(cc.class_count(), 5);
        assert_eq!(cc.class_of[4], Some(4));
    }

    #[test]
    fn eigenvector_examples() {
        let a = m(". 1; 3 .");
        let eig = principal_eigenvectors(&a).unwrap();
        assert_eq!(eig.lambda, Rational::from_integer(2));
        let (_, x) = &eig.vectors[0];
        assert_eq!(x, &vec![Tropical::from(0), Tropical::from(1)]);
        assert_eq!(a.mul_vec(x).unwrap(), vec![Tropical::from(2), Tropical::from(3)]);

        let eig = principal_eigenvectors(&m("5")).unwrap();
        assert_eq!(eig.vectors, vec![(0, vec![Tropical::from(0)])]);

        let a = worked_example();
        let eig = principal_eigenvectors(&a).unwrap();
        assert_eq!(eig.vectors.iter().map(|v| v.0).collect::<Vec<_>>(), vec![0, 1]);
        for (_, x) in &eig.vectors {
            let lx: Vec<Tropical> = x.iter().map(|v| v.otimes(&Tropical::from(8))).collect();
            assert_eq!(a.mul_vec(x).unwrap(), lx);
        }

        assert!(matches!(
            principal_eigenvectors(&m(". 1; . .")),
            Err(Error::NoFiniteEigenvalue)
        ));
    }

    #[test]
    fn circuit_canonical_rotation() {
        let a = worked_example();
        let c = Circuit::from_nodes(&a, &[7, 8, 5]).unwrap();
        assert_eq!(c.nodes(), &[5, 7, 8]);
        assert_eq!(c.weight(), &Rational::from_integer(9));
        assert_eq!(c.mean(), Rational::from_integer(3));
        assert_eq!(c.display_one_based(), "(6,8,9,6)");
        assert!(Circuit::from_nodes(&a, &[0, 2]).is_err());
        assert!(Circuit::from_nodes(&a, &[0, 1, 0]).is_err());
    }
}
