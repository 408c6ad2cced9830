//! CSR expansion `A^{⊗t} = ⊕_s λ_s^{⊗t} ⊗ C_s ⊗ S_s^{⊗t} ⊗ R_s` for
//! `t ≥ 2n²`.
//!
//! For every group the visualized block `A'_s` has weights `≤ 0` and a zero
//! quasi-critical circuit of length `ℓ`. Best paths to and from the circuit
//! with length `≡ 0 (mod ℓ)` come from one Dijkstra run on an `ℓ`-layer
//! copy of `𝒢(A'_s)` and one on its reverse.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::charpoly::characteristic_roots;
use crate::digraph::{critical_graph, cyclicity_classes, Circuit, WeightedDigraph};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::partition::{partition_nodes, NodePartition};
use crate::rational::Rational;
use crate::visualize::{visualize_all, VisualizationResult, VisualizedBlock};

/// One summand `λ^{⊗t} ⊗ C ⊗ S^{⊗t} ⊗ R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrTerm {
    /// Group index `s` (1-based).
    pub group: usize,
    pub rate: Rational,
    /// The quasi-critical circuit of the group.
    pub circuit: Circuit,
    /// Node sets behind the columns of `C` (rows of `R`): single circuit
    /// nodes in circuit order, or cyclicity classes after reduction.
    pub support: Vec<Vec<usize>>,
    /// `n × ℓ`
    pub c: Matrix,
    /// `ℓ × ℓ` cyclic shift
    pub s: Matrix,
    /// `ℓ × n`
    pub r: Matrix,
}

impl CsrTerm {
    /// `ℓ`, the order of `S`.
    pub fn period(&self) -> usize {
        self.s.rows()
    }

    pub fn is_reduced(&self) -> bool {
        self.support.iter().any(|class| class.len() != 1)
            || self.support.len() != self.circuit.len()
    }

    /// `C ⊗ S^{⊗t} ⊗ R`, with `S^{⊗t}` applied as a column rotation of `C`.
    fn unshifted(&self, t: &BigUint) -> Result<Matrix> {
        let l = self.period();
        let q = (t % BigUint::from(l)).to_usize().expect("below the period");
        let rotated = self.c.entries().map(|(i, k, w)| (i, (k + q) % l, w.clone()));
        let c = Matrix::from_entries(self.c.rows(), l, rotated.collect::<Vec<_>>())?;
        c.mul(&self.r)
    }

    /// `λ^{⊗t} ⊗ C ⊗ S^{⊗t} ⊗ R`.
    pub fn evaluate(&self, t: &BigUint) -> Result<Matrix> {
        let shift = self.rate.mul_bigint(&BigInt::from(t.clone()));
        Ok(self.unshifted(t)?.scale(&shift))
    }

    fn spread(&self) -> Rational {
        let max_abs = |m: &Matrix| m.entries().map(|(_, _, w)| w.abs()).max().unwrap_or_default();
        max_abs(&self.c) + max_abs(&self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrExpansion {
    pub n: usize,
    pub terms: Vec<CsrTerm>,
    /// `T = 2n²`; the expansion equals `A^{⊗t}` for every `t ≥ T`.
    pub threshold: u64,
    /// Kept only for acyclic inputs, whose powers below `n` are computed
    /// directly.
    pub acyclic_source: Option<Matrix>,
}

impl CsrExpansion {
    /// `⊕_s λ_s^{⊗t} ⊗ C_s ⊗ S_s^{⊗t} ⊗ R_s`.
    pub fn evaluate(&self, t: &BigUint) -> Result<Matrix> {
        if let Some(a) = &self.acyclic_source {
            if *t < BigUint::from(self.n) {
                return a.power(t);
            }
        }
        // pick the winning term per entry on the small unshifted values, then
        // add the (possibly huge) shift t·λ once
        let big_t = BigInt::from(t.clone());
        let shifts: Vec<Rational> = self.terms.iter().map(|x| x.rate.mul_bigint(&big_t)).collect();
        let spread: Rational = self.terms.iter().map(CsrTerm::spread).sum::<Rational>().mul_bigint(&BigInt::from(2));
        let r = self.terms.len();
        // gap[s][u] = t·λ_s − t·λ_u, or None when it exceeds any unshifted difference
        let gap: Vec<Vec<Option<Rational>>> = (0..r)
            .map(|s| {
                (0..r)
                    .map(|u| Some(&shifts[s] - &shifts[u]).filter(|g| g.abs() <= spread))
                    .collect()
            })
            .collect();
        let products = self
            .terms
            .iter()
            .map(|x| x.unshifted(t))
            .collect::<Result<Vec<_>>>()?;
        let mut best: Vec<Vec<Option<(usize, &Rational)>>> = vec![vec![None; self.n]; self.n];
        for (u, m) in products.iter().enumerate() {
            for (i, j, w) in m.entries() {
                let cell = &mut best[i][j];
                let wins = match *cell {
                    None => true,
                    Some((s, ws)) => match &gap[s][u] {
                        Some(g) => w - ws > *g,
                        None => shifts[u] > shifts[s],
                    },
                };
                if wins {
                    *cell = Some((u, w));
                }
            }
        }
        let entries: Vec<(usize, usize, Rational)> = best
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let shifts = &shifts;
                row.iter()
                    .enumerate()
                    .filter_map(move |(j, c)| c.map(|(u, w)| (i, j, w + &shifts[u])))
            })
            .collect();
        Matrix::from_entries(self.n, self.n, entries)
    }

    pub fn evaluate_u64(&self, t: u64) -> Result<Matrix> {
        self.evaluate(&BigUint::from(t))
    }
}

pub fn evaluate_expansion(x: &CsrExpansion, t: &BigUint) -> Result<Matrix> {
    x.evaluate(t)
}

/// The `ℓ × ℓ` matrix with `0` at `(k, k+1 mod ℓ)`.
pub fn cyclic_shift(l: usize) -> Matrix {
    let entries = (0..l).map(|k| (k, (k + 1) % l, Rational::zero()));
    Matrix::from_entries(l, l, entries.collect::<Vec<_>>()).expect("indices in range")
}

/// `S` for a circuit: the shift along its arcs, positions in circuit order.
pub fn build_s(circuit: &Circuit) -> Matrix {
    cyclic_shift(circuit.len())
}

/// Max-weight labels on the `p`-layer graph with arcs
/// `(u, k) → (v, k+1 mod p)`, from `(source, 0)`. All weights must be `≤ 0`.
/// `labels[v * p + k]`.
fn layered_dijkstra(adj: &[Vec<(usize, Rational)>], p: usize, source: usize) -> Vec<Option<Rational>> {
    let mut labels: Vec<Option<Rational>> = vec![None; adj.len() * p];
    let mut done = vec![false; adj.len() * p];
    let mut heap = BinaryHeap::new();
    labels[source * p] = Some(Rational::zero());
    heap.push((Rational::zero(), Reverse(source * p)));
    while let Some((label, Reverse(x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        let (u, k) = (x / p, x % p);
        for (v, w) in &adj[u] {
            let y = v * p + (k + 1) % p;
            let cand = &label + w;
            if !done[y] && labels[y].as_ref().is_none_or(|l| cand > *l) {
                labels[y] = Some(cand.clone());
                heap.push((cand, Reverse(y)));
            }
        }
    }
    labels
}

/// `C` and `R` over the support classes, read off the layered graphs of
/// the visualized block and lifted back to original coordinates.
///
/// `anchor` is a node (local index) in class 0; class `k` must be reachable
/// from the anchor by zero-weight paths of length `≡ k (mod p)` and back.
fn layered_factors(block: &VisualizedBlock, n: usize, p: usize, anchor: usize) -> Result<(Matrix, Matrix)> {
    let a = &block.matrix;
    let m = a.rows();
    if let Some((i, j, w)) = a.entries().find(|(_, _, w)| w.is_positive()) {
        return Err(Error::Invariant(format!(
            "visualized entry ({i},{j}) = {w} is positive"
        )));
    }
    let mut fwd = vec![Vec::new(); m];
    let mut rev = vec![Vec::new(); m];
    for (i, j, w) in a.entries() {
        fwd[i].push((j, w.clone()));
        rev[j].push((i, w.clone()));
    }
    let from = layered_dijkstra(&fwd, p, anchor);
    let to = layered_dijkstra(&rev, p, anchor);
    let d = block.scaling.values();
    let mut r_entries = Vec::new();
    let mut c_entries = Vec::new();
    for v in 0..m {
        let node = block.nodes[v];
        for k in 0..p {
            if let Some(w) = &from[v * p + k] {
                r_entries.push((k, node, w - &d[v]));
            }
            if let Some(w) = &to[v * p + (p - k) % p] {
                c_entries.push((node, k, w + &d[v]));
            }
        }
    }
    Ok((
        Matrix::from_entries(n, p, c_entries)?,
        Matrix::from_entries(p, n, r_entries)?,
    ))
}

fn local_index(block: &VisualizedBlock, node: usize) -> Result<usize> {
    block
        .nodes
        .binary_search(&node)
        .map_err(|_| Error::Invariant(format!("node {node} is outside the visualized block")))
}

/// `(C_s, R_s)` for the quasi-critical `circuit` of a visualized block,
/// embedded into `n`-dimensional coordinates.
pub fn compute_cr_pair(block: &VisualizedBlock, circuit: &Circuit, n: usize) -> Result<(Matrix, Matrix)> {
    for (u, v) in circuit.arcs() {
        let (lu, lv) = (local_index(block, u)?, local_index(block, v)?);
        if block.matrix.entry(lu, lv) != Some(&Rational::zero()) {
            return Err(Error::Invariant(format!(
                "circuit arc ({u},{v}) is not zero in the visualized block"
            )));
        }
    }
    layered_factors(block, n, circuit.len(), local_index(block, circuit.min_node())?)
}

fn term_for(group: usize, block: &VisualizedBlock, circuit: &Circuit, n: usize) -> Result<CsrTerm> {
    let (c, r) = compute_cr_pair(block, circuit, n)?;
    Ok(CsrTerm {
        group,
        rate: block.rate.clone(),
        circuit: circuit.clone(),
        support: circuit.nodes().iter().map(|&v| vec![v]).collect(),
        c,
        s: build_s(circuit),
        r,
    })
}

/// Rebuilds a term over the cyclicity classes of the critical component
/// that contains its circuit. Evaluations agree with the original term for
/// every `t ≥ 2n²`.
pub fn reduce_term(term: &CsrTerm, block: &VisualizedBlock) -> Result<CsrTerm> {
    let n = term.c.rows();
    let g = WeightedDigraph::from_matrix(&block.matrix)?;
    let cg = critical_graph(&g, &Rational::zero())?;
    let classes = cyclicity_classes(&cg)?;
    let start = local_index(block, term.circuit.min_node())?;
    let comp = classes
        .component_containing(start)
        .ok_or_else(|| Error::Invariant("circuit is not critical in its block".into()))?;
    let p = comp.period;
    let anchor = comp.classes[0][0];
    let (c, r) = layered_factors(block, n, p, anchor)?;
    Ok(CsrTerm {
        group: term.group,
        rate: term.rate.clone(),
        circuit: term.circuit.clone(),
        support: comp
            .classes
            .iter()
            .map(|class| class.iter().map(|&v| block.nodes[v]).collect())
            .collect(),
        c,
        s: cyclic_shift(p),
        r,
    })
}

/// Expansion from precomputed partition and visualization.
pub fn expand_from(a: &Matrix, part: &NodePartition, vis: &VisualizationResult) -> Result<CsrExpansion> {
    let n = a.ensure_square()?;
    let terms = (0..part.len())
        .map(|s| term_for(s + 1, &vis.blocks[s], &part.quasi_critical[s], n))
        .collect::<Result<Vec<_>>>()?;
    let acyclic_source = terms.is_empty().then(|| a.clone());
    Ok(CsrExpansion {
        n,
        terms,
        threshold: 2 * (n as u64) * (n as u64),
        acyclic_source,
    })
}

/// Roots, partition, visualization and factors in one call.
pub fn expand(a: &Matrix) -> Result<CsrExpansion> {
    let n = a.ensure_square()?;
    let mmcs = characteristic_roots(a)?;
    let part = partition_nodes(&mmcs, n)?;
    let vis = visualize_all(a, &part)?;
    expand_from(a, &part, &vis)
}

/// Every term replaced by its cyclicity-class form.
pub fn reduce_expansion(x: &CsrExpansion, vis: &VisualizationResult) -> Result<CsrExpansion> {
    let terms = x
        .terms
        .iter()
        .map(|t| reduce_term(t, &vis.blocks[t.group - 1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CsrExpansion {
        terms,
        ..x.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::worked_example;
    use crate::oracle::{brute_d_matrix, brute_power_check, random_matrix};

    fn r(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    fn m(s: &str) -> Matrix {
        Matrix::parse_rows(s).unwrap()
    }

    fn stages(a: &Matrix) -> (NodePartition, VisualizationResult, CsrExpansion) {
        let part = partition_nodes(&characteristic_roots(a).unwrap(), a.rows()).unwrap();
        let vis = visualize_all(a, &part).unwrap();
        let x = expand_from(a, &part, &vis).unwrap();
        (part, vis, x)
    }

    #[test]
    fn worked_example_factors() {
        let x = expand(&worked_example()).unwrap();
        assert_eq!(x.terms.len(), 3);
        assert_eq!(x.threshold, 200);
        let rates: Vec<Rational> = x.terms.iter().map(|t| t.rate.clone()).collect();
        assert_eq!(rates, [8, 6, 3].map(r));

        let t3 = &x.terms[2];
        assert_eq!(
            t3.r,
            m(". . . . . 0 3 -1 -6 0; . . . . . -8 -2 3 -2 -8; . . . . . -4 -1 -5 2 -4")
        );
        assert_eq!(
            t3.c,
            m(". . . . . 0 . -11 -6 -12; . . . . . -4 . -3 -10 -4; . . . . . -8 . -7 -2 -8").transpose()
        );
        assert_eq!(t3.s, m(". 0 .; . . 0; 0 . ."));

        let t2 = &x.terms[1];
        assert_eq!(t2.r, m(". . . 0 -4 -1 -6 -1 -5 -10"));
        assert_eq!(t2.c, m(". . . 0 . . . . . .").transpose());
        assert_eq!(t2.s, m("0"));

        let t1 = &x.terms[0];
        assert_eq!(t1.s, m(". 0; 0 ."));
    }

    #[test]
    fn worked_example_group_one_factors() {
        let x = expand(&worked_example()).unwrap();
        let t1 = &x.terms[0];
        assert_eq!(
            t1.r,
            m("0 -2 -1 -6 -2 -10 -16 -11 -18 -24; -1 -1 -2 -7 -3 -9 -17 -12 -17 -25")
        );
        assert_eq!(
            t1.c,
            m("0 0 -1 -10 -3 -16 -10 -20 -13 -21; -1 1 0 -9 -4 -17 -9 -19 -14 -20").transpose()
        );
    }

    #[test]
    fn shift_matrices() {
        assert_eq!(cyclic_shift(1), m("0"));
        assert_eq!(cyclic_shift(2), m(". 0; 0 ."));
        for l in 1..6 {
            let s = cyclic_shift(l);
            assert_eq!(s.power_u64(l as u64).unwrap(), Matrix::identity(l));
            for t in 0..3 * l as u64 {
                assert_eq!(s.power_u64(t).unwrap(), s.power_u64(t % l as u64).unwrap());
            }
        }
    }

    #[test]
    fn worked_example_powers_at_threshold() {
        let a = worked_example();
        let x = expand(&a).unwrap();
        assert_eq!(x.evaluate_u64(200).unwrap().entry(0, 0), Some(&r(1600)));
        assert_eq!(x.evaluate_u64(201).unwrap().entry(0, 0), Some(&r(1607)));
        let report = brute_power_check(&a, &x, 200..=220, "worked example", None).unwrap();
        assert!(report.matched, "{report}");
    }

    #[test]
    fn one_by_one_and_acyclic() {
        let x = expand(&m("4")).unwrap();
        assert_eq!(x.terms.len(), 1);
        assert_eq!((&x.terms[0].c, &x.terms[0].s, &x.terms[0].r), (&m("0"), &m("0"), &m("0")));
        assert_eq!(x.evaluate_u64(0).unwrap(), m("0"));
        assert_eq!(x.evaluate_u64(5).unwrap(), m("20"));

        let a = m(". 1 2; . . 3; . . .");
        let y = expand(&a).unwrap();
        assert!(y.terms.is_empty());
        assert_eq!(y.evaluate_u64(2).unwrap(), m(". . 4; . . .; . . ."));
        assert_eq!(y.evaluate_u64(3).unwrap(), Matrix::eps(3, 3));
        assert_eq!(y.evaluate(&BigUint::from(10u32).pow(30)).unwrap(), Matrix::eps(3, 3));
    }

    #[test]
    fn rows_agree_with_star_of_power() {
        // R rows and C columns hold best weights of length ≡ 0 (mod ℓ) paths
        // out of and into the circuit, offset by the circuit node's scaling
        let a = worked_example();
        let (part, vis, x) = stages(&a);
        for (s, term) in x.terms.iter().enumerate() {
            let nodes = part.suffix(s + 1);
            let sub = a.principal_submatrix(&nodes).unwrap();
            let shifted = sub.scale(&-&term.rate);
            let dm = brute_d_matrix(&shifted, term.period() as u64).unwrap();
            for (k, &c) in term.circuit.nodes().iter().enumerate() {
                let lc = nodes.binary_search(&c).unwrap();
                let dc = vis.blocks[s].d(c).unwrap();
                for (lj, &j) in nodes.iter().enumerate() {
                    let row = term.r.entry(k, j).map(|w| w + dc);
                    let col = term.c.entry(j, k).map(|w| w - dc);
                    assert_eq!(row.as_ref(), dm.entry(lc, lj), "R row {k} col {j}");
                    assert_eq!(col.as_ref(), dm.entry(lj, lc), "C col {k} row {j}");
                }
            }
        }
    }

    #[test]
    fn path_splitting_bound() {
        // in visualized coordinates every term entry splits at the circuit
        let a = worked_example();
        let (_, vis, x) = stages(&a);
        for t in 200u64..=205 {
            for (s, term) in x.terms.iter().enumerate() {
                let block = &vis.blocks[s];
                let nodes = &block.nodes;
                let plain = block.matrix.clone().with_labels(None, None).unwrap();
                let dm = brute_d_matrix(&plain, term.period() as u64).unwrap();
                let w = term.evaluate(&BigUint::from(t)).unwrap();
                let l = term.period();
                let shift = term.rate.mul_bigint(&BigInt::from(t));
                let pos = |v: usize| nodes.binary_search(&v).unwrap();
                for (li, &i) in nodes.iter().enumerate() {
                    for (lj, &j) in nodes.iter().enumerate() {
                        let Some(v) = w.entry(i, j) else { continue };
                        let local = &(&(v - &shift) - block.d(i).unwrap()) + block.d(j).unwrap();
                        let bound = (0..l)
                            .filter_map(|k| {
                                let c = pos(term.circuit.nodes()[k]);
                                let c2 = pos(term.circuit.nodes()[(k + t as usize) % l]);
                                Some(dm.entry(li, c)? + dm.entry(c2, lj)?)
                            })
                            .max()
                            .unwrap();
                        assert!(local <= bound);
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_terms_agree() {
        let a = worked_example();
        let (_, vis, x) = stages(&a);
        let y = reduce_expansion(&x, &vis).unwrap();
        assert_eq!(y.terms[0].period(), 2);
        assert_eq!(y.terms[0].support, vec![vec![0], vec![1]]);
        assert_eq!(y.terms[1].period(), 1);
        for t in 200u64..=210 {
            assert_eq!(x.evaluate_u64(t).unwrap(), y.evaluate_u64(t).unwrap());
        }

        let two = m(". 0; 0 .");
        let (_, vis, x) = stages(&two);
        let y = reduce_expansion(&x, &vis).unwrap();
        assert_eq!(y.terms[0].s, m(". 0; 0 ."));
        assert_eq!(y.terms[0].support, vec![vec![0], vec![1]]);

        let single = m("3");
        let (_, vis, x) = stages(&single);
        assert_eq!(reduce_expansion(&x, &vis).unwrap(), x);
    }

    #[test]
    fn reduction_merges_classes() {
        // two critical circuits of lengths 2 and 3 through node 0: period 1
        let a = m(". 0 0; 0 . .; . 0 .");
        let (_, vis, x) = stages(&a);
        let y = reduce_expansion(&x, &vis).unwrap();
        assert_eq!(y.terms[0].period(), 1);
        assert!(y.terms[0].is_reduced());
        for t in 18u64..30 {
            assert_eq!(x.evaluate_u64(t).unwrap(), y.evaluate_u64(t).unwrap());
        }
    }

    #[test]
    fn random_expansions_match_powers() {
        for seed in 0..60u64 {
            let n = 2 + (seed % 5) as usize;
            let density = [0.3, 0.6, 1.0][(seed % 3) as usize];
            let a = random_matrix(seed, n, density, -5, 5);
            let (_, vis, x) = stages(&a);
            let t0 = x.threshold;
            let report = brute_power_check(&a, &x, t0..=t0 + 12, "random", Some(seed)).unwrap();
            assert!(report.matched, "{report}");
            if !x.terms.is_empty() {
                let y = reduce_expansion(&x, &vis).unwrap();
                let report = brute_power_check(&a, &y, t0..=t0 + 12, "reduced", Some(seed)).unwrap();
                assert!(report.matched, "{report}");
            }
        }
    }
}
