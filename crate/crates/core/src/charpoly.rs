//! The characteristic maxpolynomial `χ_A(λ) = det(A ⊕ λ ⊗ I)`, its roots,
//! and the maximal multi-circuit sequence (MMCS).
//!
//! `χ_A` is convex and piecewise linear in `λ`; each linear piece is
//! `w(𝔐) + λ·(n − ℓ(𝔐))` for a multi-circuit `𝔐`. Roots are the breakpoints
//! and are found by intersecting supporting lines, one assignment problem
//! per probe.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::assignment::{max_weight_assignment, Cost, Lex};
use crate::digraph::Circuit;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{common_denominator, Rational};

/// A union of node-disjoint elementary circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiCircuit {
    circuits: Vec<Circuit>,
    length: usize,
    weight: Rational,
}

impl MultiCircuit {
    pub fn empty() -> Self {
        MultiCircuit {
            circuits: Vec::new(),
            length: 0,
            weight: Rational::zero(),
        }
    }

    /// Circuits are kept sorted by their smallest node.
    pub fn from_circuits(mut circuits: Vec<Circuit>) -> Result<Self> {
        circuits.sort_by_key(Circuit::min_node);
        let mut nodes: Vec<usize> = circuits.iter().flat_map(|c| c.nodes().iter().copied()).collect();
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant("multi-circuit members share a node".into()));
        }
        let weight = circuits.iter().map(Circuit::weight).sum();
        Ok(MultiCircuit {
            length: nodes.len(),
            circuits,
            weight,
        })
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    /// `w(𝔐) + λ·(n − ℓ(𝔐))`, the line this multi-circuit contributes to `χ_A`.
    pub fn value_at(&self, lambda: &Rational, n: usize) -> Rational {
        &self.weight + &lambda.mul_bigint(&BigInt::from(n - self.length))
    }
}

/// `∅` or `{(1,2,1),(4,4)}` with 1-based nodes.
impl fmt::Display for MultiCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.circuits.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.circuits.iter().map(Circuit::display_one_based).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `χ_A(λ)` together with the shortest and longest `λ`-maximal
/// multi-circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiEvaluation {
    pub lambda: Rational,
    pub value: Rational,
    pub min_length: usize,
    pub max_length: usize,
    pub min_witness: MultiCircuit,
    pub max_witness: MultiCircuit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mmcs {
    pub n: usize,
    /// Finite roots `λ_1 > … > λ_p`.
    pub roots: Vec<Rational>,
    pub multiplicities: Vec<usize>,
    pub eps_multiplicity: usize,
    /// `𝔐_0 = ∅, 𝔐_1, …, 𝔐_p`.
    pub multicircuits: Vec<MultiCircuit>,
}

impl Mmcs {
    pub fn lengths(&self) -> Vec<usize> {
        self.multicircuits.iter().map(MultiCircuit::len).collect()
    }

    pub fn max_root(&self) -> Option<&Rational> {
        self.roots.first()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Longest,
    Shortest,
}

impl Mode {
    /// Secondary reward for realizing a diagonal cell by an arc of `A`.
    fn arc_bonus(self) -> i64 {
        match self {
            Mode::Longest => 1,
            Mode::Shortest => -1,
        }
    }
}

/// Builds the assignment matrix on `B(λ)` and reports for every row whether
/// the chosen cell is an arc of `A` (as opposed to the `λ` diagonal).
fn solve<C: Cost>(
    n: usize,
    a: &[Vec<Option<C>>],
    lambda: &C,
    mode: Mode,
    encode: impl Fn(&C, i64) -> C,
) -> Result<(Vec<usize>, Vec<bool>)> {
    let bonus = mode.arc_bonus();
    let mut diag_is_arc = vec![false; n];
    let cells: Vec<Vec<Option<C>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let arc = a[i][j].as_ref().map(|v| encode(v, bonus));
                    if i != j {
                        return arc;
                    }
                    let diag = encode(lambda, 0);
                    match arc {
                        Some(arc) if arc > diag => {
                            diag_is_arc[i] = true;
                            Some(arc)
                        }
                        _ => Some(diag),
                    }
                })
                .collect()
        })
        .collect();
    let perm = max_weight_assignment(&cells)
        .ok_or_else(|| Error::Invariant("λ-diagonal assignment must exist".into()))?;
    let arc_pick = (0..n).map(|i| perm[i] != i || diag_is_arc[i]).collect();
    Ok((perm, arc_pick))
}

/// Exact inputs scaled to a common integer grid, when they fit in `i128`
/// with room for the secondary objective and the dual potentials.
type IntegerGrid = (Vec<Vec<Option<i128>>>, i128, i128);

fn scaled_integers(a: &Matrix, lambda: &Rational, n: usize) -> Option<IntegerGrid> {
    let l = common_denominator(a.entries().map(|(_, _, w)| w).chain(std::iter::once(lambda)));
    let k = 2 * n as i128 + 2;
    let scale = |v: &Rational| -> BigInt { v.mul_bigint(&l).numer() };
    let lam = scale(lambda);
    let mut max_abs = lam.abs();
    let mut dense = vec![vec![None; n]; n];
    for (i, j, w) in a.entries() {
        let v = scale(w);
        if v.abs() > max_abs {
            max_abs = v.abs();
        }
        dense[i][j] = Some(v);
    }
    let limit = BigInt::one() << 126;
    if max_abs * BigInt::from(k) * BigInt::from(4 * n as i128 + 4) >= limit {
        return None;
    }
    let dense = dense
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.map(|v| v.to_i128().expect("bounded") * k)).collect())
        .collect();
    Some((dense, lam.to_i128().expect("bounded") * k, k))
}

fn assignments(a: &Matrix, lambda: &Rational, n: usize) -> Result<[(Vec<usize>, Vec<bool>); 2]> {
    let modes = [Mode::Longest, Mode::Shortest];
    if let Some((dense, lam, _)) = scaled_integers(a, lambda, n) {
        let run = |mode| solve(n, &dense, &lam, mode, |v: &i128, s| v + s as i128);
        return Ok([run(modes[0])?, run(modes[1])?]);
    }
    let dense: Vec<Vec<Option<Lex>>> = (0..n)
        .map(|i| (0..n).map(|j| a.entry(i, j).map(|w| Lex::new(w.clone(), 0))).collect())
        .collect();
    let lam = Lex::new(lambda.clone(), 0);
    let run = |mode| solve(n, &dense, &lam, mode, |v: &Lex, s| Lex::new(v.primary.clone(), s));
    Ok([run(modes[0])?, run(modes[1])?])
}

fn witness(a: &Matrix, perm: &[usize], arc_pick: &[bool]) -> Result<MultiCircuit> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut circuits = Vec::new();
    for start in 0..n {
        if seen[start] || !arc_pick[start] {
            continue;
        }
        let mut nodes = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            nodes.push(v);
            v = perm[v];
        }
        circuits.push(Circuit::from_nodes(a, &nodes)?);
    }
    MultiCircuit::from_circuits(circuits)
}

/// Evaluates `χ_A(λ)` by a maximum-weight assignment on `B(λ)`, where
/// `B_ii = max(a_ii, λ)` and `B_ij = a_ij` otherwise.
///
/// A diagonal tie `a_ii = λ` is read as a self-loop for the longest witness
/// and as a `λ` pick for the shortest one.
pub fn chi_eval(a: &Matrix, lambda: &Rational) -> Result<ChiEvaluation> {
    let n = a.ensure_square()?;
    let [(long_perm, long_arcs), (short_perm, short_arcs)] = assignments(a, lambda, n)?;
    let max_witness = witness(a, &long_perm, &long_arcs)?;
    let min_witness = witness(a, &short_perm, &short_arcs)?;
    let value = max_witness.value_at(lambda, n);
    if min_witness.value_at(lambda, n) != value {
        return Err(Error::Invariant(format!(
            "χ witnesses disagree at λ = {lambda}"
        )));
    }
    Ok(ChiEvaluation {
        lambda: lambda.clone(),
        value,
        min_length: min_witness.len(),
        max_length: max_witness.len(),
        min_witness,
        max_witness,
    })
}

/// `χ_A` evaluations memoized by `λ`.
struct Evaluator<'a> {
    a: &'a Matrix,
    cache: BTreeMap<Rational, ChiEvaluation>,
}

impl<'a> Evaluator<'a> {
    fn new(a: &'a Matrix) -> Self {
        Evaluator {
            a,
            cache: BTreeMap::new(),
        }
    }

    fn at(&mut self, lambda: &Rational) -> Result<&ChiEvaluation> {
        if !self.cache.contains_key(lambda) {
            let e = chi_eval(self.a, lambda)?;
            self.cache.insert(lambda.clone(), e);
        }
        Ok(&self.cache[lambda])
    }
}

/// `|λ| ≤ 2·n·max|a_ij|` for every finite root; one beyond that on each side.
fn search_bound(a: &Matrix, n: usize) -> Rational {
    let m = a.entries().map(|(_, _, w)| w.abs()).max().unwrap_or_default();
    m.mul_bigint(&BigInt::from(2 * n)) + Rational::one()
}

/// All finite roots of `χ_A` with multiplicities, the ε-multiplicity, and
/// the MMCS.
pub fn characteristic_roots(a: &Matrix) -> Result<Mmcs> {
    let n = a.ensure_square()?;
    if a.finite_count() == 0 {
        return Ok(Mmcs {
            n,
            roots: Vec::new(),
            multiplicities: Vec::new(),
            eps_multiplicity: n,
            multicircuits: vec![MultiCircuit::empty()],
        });
    }
    let bound = search_bound(a, n);
    let mut eval = Evaluator::new(a);
    let right = eval.at(&bound)?.min_witness.clone();
    let left = eval.at(&-&bound)?.max_witness.clone();

    let mut roots = Vec::new();
    let mut pending = vec![(right, left)];
    while let Some((r, l)) = pending.pop() {
        if r.len() >= l.len() {
            continue;
        }
        let x = &(l.weight() - r.weight()) / &Rational::from_integer((l.len() - r.len()) as i64);
        let e = eval.at(&x)?;
        if e.value == r.value_at(&x, n) {
            roots.push(x);
            continue;
        }
        if e.max_length > e.min_length {
            roots.push(x.clone());
        }
        pending.push((r, e.min_witness.clone()));
        pending.push((e.max_witness.clone(), l));
    }
    roots.sort_unstable_by(|x, y| y.cmp(x));
    roots.dedup();
    let multicircuits = extract_with(&mut eval, n, &roots, &bound)?;
    Ok(assemble(n, roots, multicircuits))
}

fn assemble(n: usize, roots: Vec<Rational>, multicircuits: Vec<MultiCircuit>) -> Mmcs {
    let multiplicities = multicircuits.windows(2).map(|w| w[1].len() - w[0].len()).collect();
    let eps_multiplicity = n - multicircuits.last().map_or(0, MultiCircuit::len);
    Mmcs {
        n,
        roots,
        multiplicities,
        eps_multiplicity,
        multicircuits,
    }
}

/// `𝔐_0 … 𝔐_p` for the given roots, where `𝔐_k` is the longest
/// `λ_k`-maximal multi-circuit.
///
/// Fails with [`Error::InconsistentRoots`] unless every `𝔐_k` attains
/// `χ_A` at both ends of its interval.
pub fn extract_mmcs(a: &Matrix, roots: &[Rational]) -> Result<Vec<MultiCircuit>> {
    let n = a.ensure_square()?;
    if roots.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InconsistentRoots("roots must be strictly descending".into()));
    }
    let bound = search_bound(a, n);
    extract_with(&mut Evaluator::new(a), n, roots, &bound)
}

fn extract_with(
    eval: &mut Evaluator<'_>,
    n: usize,
    roots: &[Rational],
    bound: &Rational,
) -> Result<Vec<MultiCircuit>> {
    let mut seq = vec![MultiCircuit::empty()];
    for root in roots {
        seq.push(eval.at(root)?.max_witness.clone());
    }
    // 𝔐_k must attain χ_A on [λ_{k+1}, λ_k], with λ_0 = +bound, λ_{p+1} = −bound
    let mut ends = vec![bound.clone()];
    ends.extend(roots.iter().cloned());
    ends.push(-bound);
    for (k, m) in seq.iter().enumerate() {
        for x in [&ends[k], &ends[k + 1]] {
            let chi = eval.at(x)?.value.clone();
            if m.value_at(x, n) != chi {
                return Err(Error::InconsistentRoots(format!(
                    "𝔐_{k} = {m} does not attain χ_A({x}) = {chi}"
                )));
            }
        }
        if k > 0 && seq[k - 1].len() >= m.len() {
            return Err(Error::InconsistentRoots(format!(
                "λ = {} is not a breakpoint of χ_A",
                ends[k]
            )));
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{karp_max_cycle_mean, WeightedDigraph};
    use crate::fixtures::worked_example;
    use crate::matrix::tests::small_matrix;
    use crate::oracle::{brute_chi, brute_mmc};
    use crate::scalar::Tropical;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn m(s: &str) -> Matrix {
        Matrix::parse_rows(s).unwrap()
    }

    #[test]
    fn chi_at_seven_has_two_witnesses() {
        let e = chi_eval(&worked_example(), &r(7)).unwrap();
        assert_eq!(e.value, r(72));
        assert_eq!((e.min_length, e.max_length), (2, 3));
        assert_eq!(e.min_witness.to_string(), "{(1,2,1)}");
        assert_eq!(e.max_witness.to_string(), "{(1,2,3,1)}");
    }

    #[test]
    fn chi_above_all_means_is_empty() {
        let e = chi_eval(&worked_example(), &r(9)).unwrap();
        assert_eq!(e.value, r(90));
        assert!(e.max_witness.is_empty());
    }

    #[test]
    fn chi_one_by_one() {
        let a = m("4");
        for l in [-1i64, 4, 9] {
            assert_eq!(chi_eval(&a, &r(l)).unwrap().value, r(4).max(r(l)));
        }
        let tie = chi_eval(&a, &r(4)).unwrap();
        assert_eq!((tie.min_length, tie.max_length), (0, 1));
    }

    #[test]
    fn worked_example_roots_and_mmcs() {
        let x = characteristic_roots(&worked_example()).unwrap();
        assert_eq!(x.roots, [8, 7, 6, 4, 3, 0].map(r));
        assert_eq!(x.multiplicities, vec![2, 1, 1, 1, 3, 1]);
        assert_eq!(x.eps_multiplicity, 1);
        assert_eq!(x.lengths(), vec![0, 2, 3, 4, 5, 8, 9]);
        let listed: Vec<String> = x.multicircuits.iter().map(ToString::to_string).collect();
        assert_eq!(listed[1], "{(1,2,1)}");
        assert_eq!(listed[2], "{(1,2,3,1)}");
        assert_eq!(listed[3], "{(1,2,3,1),(4,4)}");
        assert_eq!(listed[4], "{(1,2,5,3,1),(4,4)}");
        let weights: Vec<Rational> = x.multicircuits.iter().map(|m| m.weight().clone()).collect();
        assert_eq!(weights, [0, 16, 23, 29, 33, 42, 42].map(r));
    }

    #[test]
    fn two_cycle_double_root() {
        let x = characteristic_roots(&m(". 1; 3 .")).unwrap();
        assert_eq!(x.roots, vec![r(2)]);
        assert_eq!(x.multiplicities, vec![2]);
        assert_eq!(x.eps_multiplicity, 0);
    }

    #[test]
    fn root_far_below_the_entries() {
        let x = characteristic_roots(&m("10 0; 0 .")).unwrap();
        assert_eq!(x.roots, vec![r(10), r(-10)]);
        assert_eq!(x.multiplicities, vec![1, 1]);
    }

    #[test]
    fn empty_and_acyclic_matrices() {
        let x = characteristic_roots(&Matrix::eps(3, 3)).unwrap();
        assert!(x.roots.is_empty());
        assert_eq!(x.eps_multiplicity, 3);
        assert_eq!(x.multicircuits, vec![MultiCircuit::empty()]);
        let y = characteristic_roots(&m(". 1 2; . . 3; . . .")).unwrap();
        assert!(y.roots.is_empty());
        assert_eq!(y.eps_multiplicity, 3);
    }

    #[test]
    fn rational_entries() {
        let a = m("1/2 .; 1/3 -7/5");
        let x = characteristic_roots(&a).unwrap();
        assert_eq!(x.roots, vec![Rational::new(1, 2), Rational::new(-7, 5)]);
    }

    #[test]
    fn inconsistent_roots_are_rejected() {
        let a = worked_example();
        assert!(matches!(
            extract_mmcs(&a, &[r(8), r(7), r(5), r(4), r(3), r(0)]),
            Err(Error::InconsistentRoots(_))
        ));
        assert!(matches!(
            extract_mmcs(&a, &[r(8), r(7)]),
            Err(Error::InconsistentRoots(_))
        ));
        let good = extract_mmcs(&a, &[8, 7, 6, 4, 3, 0].map(r)).unwrap();
        assert_eq!(good.len(), 7);
    }

    fn lambda_strategy() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..5).prop_map(|(p, q)| Rational::new(p, q))
    }

    proptest! {
        #[test]
        fn chi_matches_permutation_sweep(a in small_matrix(6), l in lambda_strategy()) {
            let e = chi_eval(&a, &l).unwrap();
            prop_assert_eq!(&e.value, &brute_chi(&a, &l).unwrap());
            prop_assert!(e.min_length <= e.max_length);
        }

        #[test]
        fn chi_is_convex(a in small_matrix(5), x in lambda_strategy(), dx in 1i64..20, dy in 1i64..20) {
            let y = &x + &r(dx);
            let z = &y + &r(dy);
            let (fx, fy, fz) = (
                chi_eval(&a, &x).unwrap().value,
                chi_eval(&a, &y).unwrap().value,
                chi_eval(&a, &z).unwrap().value,
            );
            // (dx + dy)·f(y) ≤ dy·f(x) + dx·f(z)
            let lhs = fy.mul_bigint(&BigInt::from(dx + dy));
            let rhs = fx.mul_bigint(&BigInt::from(dy)) + fz.mul_bigint(&BigInt::from(dx));
            prop_assert!(lhs <= rhs);
        }

        #[test]
        fn roots_match_exhaustive_enumeration(a in small_matrix(6)) {
            let x = characteristic_roots(&a).unwrap();
            let (roots, eps) = brute_mmc(&a).unwrap().roots();
            let found: Vec<(Rational, usize)> = x.roots.iter().cloned().zip(x.multiplicities.iter().copied()).collect();
            prop_assert_eq!(found, roots);
            prop_assert_eq!(x.eps_multiplicity, eps);
            prop_assert_eq!(x.multiplicities.iter().sum::<usize>() + x.eps_multiplicity, x.n);
        }

        #[test]
        fn max_root_is_max_cycle_mean(a in small_matrix(6)) {
            let x = characteristic_roots(&a).unwrap();
            let karp = karp_max_cycle_mean(&WeightedDigraph::from_matrix(&a).unwrap());
            prop_assert_eq!(Tropical::from(x.max_root().cloned()), karp);
        }

        #[test]
        fn mmcs_attains_chi_on_each_interval(a in small_matrix(6)) {
            let x = characteristic_roots(&a).unwrap();
            for k in 1..x.multicircuits.len() {
                let hi = &x.roots[k - 1];
                let lo = x.roots.get(k).cloned().unwrap_or_else(|| hi - &r(3));
                let mk = &x.multicircuits[k];
                for l in [hi.clone(), hi.midpoint(&lo), lo] {
                    prop_assert_eq!(mk.value_at(&l, x.n), chi_eval(&a, &l).unwrap().value);
                }
                for c in mk.circuits() {
                    prop_assert!(c.mean() >= *hi);
                }
            }
        }
    }
}
