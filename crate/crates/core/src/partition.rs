//! Node partition driven by the MMCS.
//!
//! Circuits of `𝔐_1, …, 𝔐_p` are scanned in order (within one `𝔐_k` by
//! ascending smallest node). A circuit disjoint from everything seen so far
//! opens a new group; otherwise its unseen nodes join the newest group.
//! Leftover nodes join the last group.

use crate::charpoly::Mmcs;
use crate::digraph::Circuit;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePartition {
    pub n: usize,
    /// `N_1, …, N_r`, each sorted ascending.
    pub groups: Vec<Vec<usize>>,
    /// The circuit that opened each group.
    pub quasi_critical: Vec<Circuit>,
    /// `k(s)`: index into the MMCS (1-based, as in `𝔐_k`).
    pub k_of: Vec<usize>,
    /// `λ_{k(s)}`.
    pub growth_rates: Vec<Rational>,
}

impl NodePartition {
    /// Number of groups `r`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `U_s = N_1 ∪ … ∪ N_s` (sorted), for `s` in `0..=r`.
    pub fn prefix(&self, s: usize) -> Vec<usize> {
        let mut u: Vec<usize> = self.groups[..s].iter().flatten().copied().collect();
        u.sort_unstable();
        u
    }

    /// `V_s = N ∖ U_{s−1}` (sorted), for `s` in `1..=r`.
    pub fn suffix(&self, s: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.groups[s - 1..].iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// Group index (0-based) of every node.
    pub fn group_of(&self) -> Vec<usize> {
        let mut of = vec![usize::MAX; self.n];
        for (s, g) in self.groups.iter().enumerate() {
            for &v in g {
                of[v] = s;
            }
        }
        of
    }
}

pub fn partition_nodes(mmcs: &Mmcs, n: usize) -> Result<NodePartition> {
    if mmcs.multicircuits.len() != mmcs.roots.len() + 1 {
        return Err(Error::Invariant("MMCS and root list lengths differ".into()));
    }
    let mut seen = vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut quasi_critical = Vec::new();
    let mut k_of = Vec::new();
    let mut growth_rates = Vec::new();
    for (k, m) in mmcs.multicircuits.iter().enumerate().skip(1) {
        for c in m.circuits() {
            if c.nodes().iter().any(|&v| v >= n) {
                return Err(Error::DimensionMismatch {
                    op: "partition",
                    left: (n, n),
                    right: (c.nodes().iter().max().copied().unwrap_or(0) + 1, 0),
                });
            }
            let fresh: Vec<usize> = c.nodes().iter().copied().filter(|&v| !seen[v]).collect();
            if fresh.len() == c.len() {
                groups.push(fresh.clone());
                quasi_critical.push(c.clone());
                k_of.push(k);
                growth_rates.push(mmcs.roots[k - 1].clone());
            } else {
                groups.last_mut().expect("a group exists").extend(&fresh);
            }
            for v in fresh {
                seen[v] = true;
            }
        }
    }
    if let Some(last) = groups.last_mut() {
        last.extend((0..n).filter(|&v| !seen[v]));
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    Ok(NodePartition {
        n,
        groups,
        quasi_critical,
        k_of,
        growth_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::characteristic_roots;
    use crate::digraph::{karp_max_cycle_mean, WeightedDigraph};
    use crate::fixtures::worked_example;
    use crate::matrix::tests::small_matrix;
    use crate::matrix::Matrix;
    use crate::scalar::Tropical;
    use proptest::prelude::*;

    fn part(a: &Matrix) -> NodePartition {
        partition_nodes(&characteristic_roots(a).unwrap(), a.rows()).unwrap()
    }

    #[test]
    fn worked_example_partition() {
        let p = part(&worked_example());
        assert_eq!(p.groups, vec![vec![0, 1, 2], vec![3, 4], vec![5, 6, 7, 8, 9]]);
        assert_eq!(p.growth_rates, [8, 6, 3].map(Rational::from_integer));
        assert_eq!(p.k_of, vec![1, 3, 5]);
        let qc: Vec<String> = p.quasi_critical.iter().map(Circuit::display_one_based).collect();
        assert_eq!(qc, vec!["(1,2,1)", "(4,4)", "(6,8,9,6)"]);
        assert_eq!(p.suffix(2), vec![3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(p.prefix(1), vec![0, 1, 2]);
    }

    #[test]
    fn single_self_loop() {
        let p = part(&Matrix::parse_rows("5").unwrap());
        assert_eq!(p.groups, vec![vec![0]]);
        assert_eq!(p.growth_rates, vec![Rational::from_integer(5)]);
    }

    #[test]
    fn acyclic_has_no_groups() {
        let p = part(&Matrix::parse_rows(". 1; . .").unwrap());
        assert!(p.is_empty());
    }

    proptest! {
        #[test]
        fn partition_invariants(a in small_matrix(6)) {
            let mmcs = characteristic_roots(&a).unwrap();
            let p = partition_nodes(&mmcs, a.rows()).unwrap();
            prop_assert_eq!(&p, &partition_nodes(&mmcs, a.rows()).unwrap());
            if p.is_empty() {
                prop_assert!(mmcs.roots.is_empty());
                return Ok(());
            }
            let mut all: Vec<usize> = p.groups.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..a.rows()).collect::<Vec<_>>());
            prop_assert!(p.growth_rates.windows(2).all(|w| w[0] >= w[1]));
            for s in 0..p.len() {
                let c = &p.quasi_critical[s];
                prop_assert_eq!(&c.mean(), &p.growth_rates[s]);
                prop_assert!(c.nodes().iter().all(|v| p.groups[s].contains(v)));
                let sub = a.principal_submatrix(&p.suffix(s + 1)).unwrap();
                let karp = karp_max_cycle_mean(&WeightedDigraph::from_matrix(&sub).unwrap());
                prop_assert_eq!(karp, Tropical::from(p.growth_rates[s].clone()));
            }
        }
    }
}
