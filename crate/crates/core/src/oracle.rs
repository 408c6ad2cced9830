//! Brute-force references for every stage of the pipeline.
//!
//! Nothing here shares code paths with the fast implementations beyond the
//! matrix type itself: determinants are full permutation sweeps, multi-
//! circuits are enumerated exhaustively, and powers are repeated products.
//! Every entry point refuses inputs above its size guard.

use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csr::CsrExpansion;
use crate::digraph::Circuit;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::scalar::Tropical;

/// Largest order accepted by the factorial/exponential oracles.
pub const ORACLE_MAX_N: usize = 10;

fn guard(a: &Matrix) -> Result<usize> {
    let n = a.ensure_square()?;
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    Ok(n)
}

/// `χ_A(λ) = det(A ⊕ λ ⊗ I)` as the maximum over all `n!` permutations.
pub fn brute_chi(a: &Matrix, lambda: &Rational) -> Result<Rational> {
    let n = guard(a)?;
    let cell = |i: usize, j: usize| -> Option<Rational> {
        let off = a.entry(i, j).cloned();
        if i == j {
            Some(off.map_or_else(|| lambda.clone(), |w| w.max(lambda.clone())))
        } else {
            off
        }
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Rational> = None;
    loop {
        let total: Option<Rational> = perm
            .iter()
            .enumerate()
            .try_fold(Rational::zero(), |acc, (i, &j)| cell(i, j).map(|w| acc + w));
        if let Some(total) = total {
            if best.as_ref().is_none_or(|b| total > *b) {
                best = Some(total);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("the λ-diagonal is always a permutation"))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every elementary circuit of `𝒢(a)`, each listed once starting from its
/// smallest node.
pub fn elementary_circuits(a: &Matrix) -> Result<Vec<Circuit>> {
    let n = guard(a)?;
    let mut out = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        extend_circuits(a, start, &mut path, &mut on_path, &mut out)?;
    }
    Ok(out)
}

fn extend_circuits(
    a: &Matrix,
    start: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Circuit>,
) -> Result<()> {
    let last = *path.last().expect("non-empty path");
    for (next, _) in a.row(last) {
        let next = *next;
        if next == start {
            out.push(Circuit::from_nodes(a, path)?);
        } else if next > start && !on_path[next] {
            on_path[next] = true;
            path.push(next);
            extend_circuits(a, start, path, on_path, out)?;
            path.pop();
            on_path[next] = false;
        }
    }
    Ok(())
}

/// Best multi-circuit of every total length, found by exhaustive
/// enumeration of node-disjoint circuit families.
#[derive(Clone, Debug)]
pub struct BruteMmc {
    pub n: usize,
    /// `best[k]`: maximum weight of a multi-circuit of length `k`, with one
    /// witness (circuits sorted by smallest node).
    pub best: Vec<Option<(Rational, Vec<Circuit>)>>,
}

impl BruteMmc {
    /// Upper concave envelope of the points `(k, best_k)`: the vertices of
    /// the envelope are the lengths of the MMCS.
    pub fn hull_lengths(&self) -> Vec<usize> {
        let pts: Vec<(usize, &Rational)> = self
            .best
            .iter()
            .enumerate()
            .filter_map(|(k, b)| b.as_ref().map(|(w, _)| (k, w)))
            .collect();
        let mut hull: Vec<(usize, &Rational)> = Vec::new();
        for p in pts {
            while hull.len() >= 2 {
                let (k1, w1) = hull[hull.len() - 2];
                let (k2, w2) = hull[hull.len() - 1];
                // drop the middle point unless it lies strictly above the chord
                let lhs = (w2 - w1).mul_bigint(&((p.0 - k1) as i64).into());
                let rhs = (p.1 - w1).mul_bigint(&((k2 - k1) as i64).into());
                if lhs <= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.into_iter().map(|(k, _)| k).collect()
    }

    /// Finite roots of `χ_A` (descending) with multiplicities, and the
    /// ε-multiplicity.
    pub fn roots(&self) -> (Vec<(Rational, usize)>, usize) {
        let lengths = self.hull_lengths();
        let roots = lengths
            .windows(2)
            .map(|w| {
                let (k1, k2) = (w[0], w[1]);
                let w1 = &self.best[k1].as_ref().expect("hull point").0;
                let w2 = &self.best[k2].as_ref().expect("hull point").0;
                let slope = &(w2 - w1) / &Rational::from_integer((k2 - k1) as i64);
                (slope, k2 - k1)
            })
            .collect();
        let longest = *lengths.last().expect("k = 0 is always present");
        (roots, self.n - longest)
    }

    /// `χ_A(λ)` from the coefficient list.
    pub fn chi(&self, lambda: &Rational) -> Rational {
        self.best
            .iter()
            .enumerate()
            .filter_map(|(k, b)| {
                b.as_ref()
                    .map(|(w, _)| w + &lambda.mul_bigint(&((self.n - k) as i64).into()))
            })
            .max()
            .expect("k = 0 is always present")
    }
}

pub fn brute_mmc(a: &Matrix) -> Result<BruteMmc> {
    let n = guard(a)?;
    let circuits = elementary_circuits(a)?;
    let masks: Vec<u32> = circuits
        .iter()
        .map(|c| c.nodes().iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    // cover[mask]: heaviest family of disjoint circuits covering exactly mask
    let size = 1usize << n;
    let mut cover: Vec<Option<(Rational, Vec<usize>)>> = vec![None; size];
    cover[0] = Some((Rational::zero(), Vec::new()));
    for mask in 1..size {
        let low = mask.trailing_zeros();
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for (id, &cm) in masks.iter().enumerate() {
            let cm = cm as usize;
            if cm & (1 << low) == 0 || cm & !mask != 0 {
                continue;
            }
            if let Some((w, fam)) = &cover[mask & !cm] {
                let total = w + circuits[id].weight();
                if best.as_ref().is_none_or(|b| total > b.0) {
                    let mut fam = fam.clone();
                    fam.push(id);
                    best = Some((total, fam));
                }
            }
        }
        cover[mask] = best;
    }
    let mut best: Vec<Option<(Rational, Vec<usize>)>> = vec![None; n + 1];
    for (mask, c) in cover.into_iter().enumerate() {
        let Some((w, fam)) = c else { continue };
        let k = mask.count_ones() as usize;
        if best[k].as_ref().is_none_or(|b| w > b.0) {
            best[k] = Some((w, fam));
        }
    }
    let best = best
        .into_iter()
        .map(|b| {
            b.map(|(w, fam)| {
                let mut cs: Vec<Circuit> = fam.into_iter().map(|id| circuits[id].clone()).collect();
                cs.sort_by_key(Circuit::min_node);
                (w, cs)
            })
        })
        .collect();
    Ok(BruteMmc { n, best })
}

/// `d_ij`: maximum weight of an `i`-`j` path whose length is a multiple of
/// `ell`, i.e. the Kleene star of `A^{⊗ℓ}`.
pub fn brute_d_matrix(a: &Matrix, ell: u64) -> Result<Matrix> {
    a.power_u64(ell)?.kleene_star()
}

/// First entry where an expansion disagrees with the naive power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub t: BigUint,
    pub row: usize,
    pub col: usize,
    pub expected: Tropical,
    pub got: Tropical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub stage: String,
    pub instance: String,
    pub seed: Option<u64>,
    pub matched: bool,
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.matched { "match" } else { "MISMATCH" };
        write!(f, "{} [{}]: {status} ({} checks)", self.stage, self.instance, self.checked)?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        if let Some(c) = &self.counterexample {
            write!(
                f,
                "; t={} entry ({},{}) expected {} got {}",
                c.t,
                c.row + 1,
                c.col + 1,
                c.expected,
                c.got
            )?;
        }
        Ok(())
    }
}

/// Compares `evaluate(x, t)` against `A^{⊗t}` entrywise for every `t` in
/// `range` (inclusive), stopping at the first mismatch.
pub fn brute_power_check(
    a: &Matrix,
    x: &CsrExpansion,
    range: std::ops::RangeInclusive<u64>,
    instance: &str,
    seed: Option<u64>,
) -> Result<OracleReport> {
    let (lo, hi) = (*range.start(), *range.end());
    let mut checked = 0;
    let mut counterexample = None;
    if lo <= hi {
        let mut power = a.power_u64(lo)?;
        for t in lo..=hi {
            if t > lo {
                power = power.mul(a)?;
            }
            let got = x.evaluate(&BigUint::from(t))?;
            checked += 1;
            if let Some(c) = first_difference(&power, &got, BigUint::from(t)) {
                counterexample = Some(c);
                break;
            }
        }
    }
    Ok(OracleReport {
        stage: "brute_power_check".into(),
        instance: instance.into(),
        seed,
        matched: counterexample.is_none(),
        checked,
        counterexample,
    })
}

/// Same comparison at arbitrary (possibly huge) exponents.
pub fn brute_power_check_at(
    a: &Matrix,
    x: &CsrExpansion,
    ts: &[BigUint],
    instance: &str,
    seed: Option<u64>,
) -> Result<OracleReport> {
    let mut checked = 0;
    let mut counterexample = None;
    for t in ts {
        let expected = a.power(t)?;
        let got = x.evaluate(t)?;
        checked += 1;
        if let Some(c) = first_difference(&expected, &got, t.clone()) {
            counterexample = Some(c);
            break;
        }
    }
    Ok(OracleReport {
        stage: "brute_power_check".into(),
        instance: instance.into(),
        seed,
        matched: counterexample.is_none(),
        checked,
        counterexample,
    })
}

fn first_difference(expected: &Matrix, got: &Matrix, t: BigUint) -> Option<Counterexample> {
    for i in 0..expected.rows() {
        for j in 0..expected.cols() {
            let (e, g) = (expected.get(i, j), got.get(i, j));
            if e != g {
                return Some(Counterexample {
                    t,
                    row: i,
                    col: j,
                    expected: e,
                    got: g,
                });
            }
        }
    }
    None
}

/// A reproducible random integer matrix: each entry is finite with
/// probability `density`, drawn uniformly from `lo..=hi`.
pub fn random_matrix(seed: u64, n: usize, density: f64, lo: i64, hi: i64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                entries.push((i, j, Rational::from_integer(rng.gen_range(lo..=hi))));
            }
        }
    }
    Matrix::from_entries(n, n, entries).expect("indices in range")
}

/// A random rational in `[lo, hi]` with denominator at most `max_den`.
pub fn random_rational(rng: &mut impl Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(lo * den..=hi * den);
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::worked_example;

    fn m(s: &str) -> Matrix {
        Matrix::parse_rows(s).unwrap()
    }

    #[test]
    fn brute_chi_examples() {
        let a = worked_example();
        assert_eq!(brute_chi(&a, &Rational::from_integer(7)).unwrap(), Rational::from_integer(72));
        assert_eq!(brute_chi(&a, &Rational::from_integer(9)).unwrap(), Rational::from_integer(90));
        assert!(matches!(
            brute_chi(&Matrix::eps(11, 11), &Rational::zero()),
            Err(Error::OracleTooLarge { n: 11, .. })
        ));
        for c in [-3i64, 0, 2, 5] {
            let c = Rational::from_integer(c);
            let one = Matrix::from_entries(1, 1, [(0, 0, c.clone())]).unwrap();
            for l in [-4i64, 1, 5, 9] {
                let l = Rational::from_integer(l);
                assert_eq!(brute_chi(&one, &l).unwrap(), c.clone().max(l));
            }
        }
        let l = Rational::new(7, 3);
        assert_eq!(brute_chi(&Matrix::eps(2, 2), &l).unwrap(), &l + &l);
    }

    #[test]
    fn circuits_of_small_graph() {
        let a = m("0 1 .; 2 . 3; 4 . .");
        let cs = elementary_circuits(&a).unwrap();
        let listed: Vec<String> = cs.iter().map(Circuit::display_one_based).collect();
        assert_eq!(listed, vec!["(1,1)", "(1,2,1)", "(1,2,3,1)"]);
    }

    #[test]
    fn brute_mmc_trivial_cases() {
        let one = brute_mmc(&m("5")).unwrap();
        assert_eq!(one.best[1].as_ref().unwrap().0, Rational::from_integer(5));
        let acyclic = brute_mmc(&m(". 1 2; . . 3; . . .")).unwrap();
        assert!(acyclic.best[0].is_some());
        assert!(acyclic.best[1..].iter().all(Option::is_none));
        assert_eq!(acyclic.roots(), (vec![], 3));

        let two = brute_mmc(&m(". 1; 3 .")).unwrap();
        assert_eq!(two.roots(), (vec![(Rational::from_integer(2), 2)], 0));
    }

    #[test]
    fn worked_example_lengths_and_weights() {
        let b = brute_mmc(&worked_example()).unwrap();
        let hull = b.hull_lengths();
        assert_eq!(hull, vec![0, 2, 3, 4, 5, 8, 9]);
        let weights: Vec<Rational> = hull.iter().map(|&k| b.best[k].as_ref().unwrap().0.clone()).collect();
        assert_eq!(weights, [0, 16, 23, 29, 33, 42, 42].map(Rational::from_integer));
        assert!(b.best[10].is_none());
        let (roots, eps) = b.roots();
        let mult: Vec<usize> = roots.iter().map(|r| r.1).collect();
        assert_eq!(mult, vec![2, 1, 1, 1, 3, 1]);
        assert_eq!(eps, 1);
    }

    #[test]
    fn power_check_controls() {
        let one = m("3");
        let x = crate::csr::expand(&one).unwrap();
        let ok = brute_power_check(&one, &x, 2..=10, "one", None).unwrap();
        assert!(ok.matched);
        assert_eq!(ok.checked, 9);

        let a = worked_example();
        let mut x = crate::csr::expand(&a).unwrap();
        x.terms[0].rate = &x.terms[0].rate + &Rational::one();
        let bad = brute_power_check(&a, &x, 200..=220, "corrupted", Some(7)).unwrap();
        assert!(!bad.matched);
        let c = bad.counterexample.as_ref().unwrap();
        assert_eq!(c.t, BigUint::from(200u32));
        assert_eq!(bad.seed, Some(7));
        assert!(bad.to_string().contains("MISMATCH"));
    }

    #[test]
    fn random_matrix_is_reproducible() {
        let a = random_matrix(7, 5, 0.6, -5, 5);
        assert_eq!(a, random_matrix(7, 5, 0.6, -5, 5));
        assert!(a.entries().all(|(_, _, w)| w.abs() <= Rational::from_integer(5)));
    }
}
