//! Maximum-weight perfect assignment over an ordered group of costs.
//!
//! Shortest augmenting paths with dual potentials (the O(n³) Hungarian
//! method). Costs are generic so the same solver runs on machine integers
//! and on exact lexicographic pairs.

use std::ops::{Add, Sub};

use crate::rational::Rational;

/// An ordered abelian group element usable as an assignment cost.
pub trait Cost: Clone + Ord + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
}

impl Cost for i128 {
    fn zero() -> Self {
        0
    }
}

/// `(primary, secondary)` ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lex {
    pub primary: Rational,
    pub secondary: i64,
}

impl Lex {
    pub fn new(primary: Rational, secondary: i64) -> Self {
        Lex { primary, secondary }
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, rhs: Lex) -> Lex {
        Lex::new(self.primary + rhs.primary, self.secondary + rhs.secondary)
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, rhs: Lex) -> Lex {
        Lex::new(self.primary - rhs.primary, self.secondary - rhs.secondary)
    }
}

impl Cost for Lex {
    fn zero() -> Self {
        Lex::new(Rational::zero(), 0)
    }
}

/// Solves `max_π Σ_i w[i][π(i)]` over permutations avoiding `None` cells.
///
/// Returns `perm` with `perm[i]` the column matched to row `i`, or `None`
/// when no perfect assignment exists.
pub fn max_weight_assignment<C: Cost>(w: &[Vec<Option<C>>]) -> Option<Vec<usize>> {
    let n = w.len();
    if n == 0 {
        return Some(Vec::new());
    }
    // minimise the negated weights; index 0 is the virtual row/column
    let cost = |i: usize, j: usize| w[i - 1][j - 1].clone().map(|c| C::zero() - c);
    let mut u = vec![C::zero(); n + 1];
    let mut v = vec![C::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<C>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<C> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0, j) {
                    let cur = c - u[i0].clone() - v[j].clone();
                    if minv[j].as_ref().is_none_or(|m| cur < *m) {
                        minv[j] = Some(cur);
                        way[j] = j0;
                    }
                }
                if let Some(m) = &minv[j] {
                    if delta.as_ref().is_none_or(|d| m < d) {
                        delta = Some(m.clone());
                        j1 = j;
                    }
                }
            }
            let delta = delta?;
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = minv[j].take() {
                    minv[j] = Some(m - delta.clone());
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    Some(perm)
}
