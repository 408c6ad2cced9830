//! Sparse max-plus matrices.
//!
//! Only finite entries are stored (row-major, sorted by column); an absent
//! entry is ε. Matrices optionally carry row/column labels naming the node
//! indices of a parent matrix, so principal submatrices remember where they
//! came from.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::digraph::{karp_max_cycle_mean, WeightedDigraph};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scalar::Tropical;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
    row_labels: Option<Vec<usize>>,
    col_labels: Option<Vec<usize>>,
}

/// A finite diagonal scaling `diag(d)`; its inverse is `diag(−d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalScaling(Vec<Rational>);

impl DiagonalScaling {
    pub fn new(d: Vec<Rational>) -> Self {
        DiagonalScaling(d)
    }

    pub fn zeros(n: usize) -> Self {
        DiagonalScaling(vec![Rational::zero(); n])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        DiagonalScaling(self.0.iter().map(|x| -x).collect())
    }
}

impl Matrix {
    /// The all-ε matrix 𝓔.
    pub fn eps(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
            row_labels: None,
            col_labels: None,
        }
    }

    /// The unit matrix `I_n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::eps(n, n);
        for (i, row) in m.data.iter_mut().enumerate() {
            row.push((i, Rational::zero()));
        }
        m
    }

    /// Builds a matrix from `(row, col, weight)` triplets. Repeated
    /// coordinates are combined with `⊕`.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut data: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); rows];
        for (i, j, w) in entries {
            if i >= rows || j >= cols {
                return Err(Error::DimensionMismatch {
                    op: "from_entries",
                    left: (rows, cols),
                    right: (i, j),
                });
            }
            data[i].push((j, w));
        }
        for row in &mut data {
            row.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
            row.dedup_by_key(|e| e.0);
        }
        Ok(Matrix {
            rows,
            cols,
            data,
            row_labels: None,
            col_labels: None,
        })
    }

    pub fn from_dense(rows: Vec<Vec<Tropical>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    op: "from_dense",
                    left: (r, c),
                    right: (i, row.len()),
                });
            }
            for (j, x) in row.into_iter().enumerate() {
                if let Tropical::Fin(w) = x {
                    entries.push((i, j, w));
                }
            }
        }
        Matrix::from_entries(r, c, entries)
    }

    /// Parses a dense body: rows separated by `;` or newlines, entries by
    /// whitespace, ε spelled `.`, `-inf` or `ε`.
    pub fn parse_rows(text: &str) -> std::result::Result<Self, String> {
        let mut rows = Vec::new();
        for line in text.split([';', '\n']) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<Tropical>().map_err(|e| e.to_string()))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Matrix::from_dense(rows).map_err(|e| e.to_string())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of finite entries.
    pub fn finite_count(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&Rational> {
        let row = &self.data[i];
        row.binary_search_by_key(&j, |e| e.0)
            .ok()
            .map(|pos| &row[pos].1)
    }

    pub fn get(&self, i: usize, j: usize) -> Tropical {
        self.entry(i, j).cloned().into()
    }

    /// Finite entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.data[i]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, w)| (i, *j, w)))
    }

    pub fn row_labels(&self) -> Option<&[usize]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[usize]> {
        self.col_labels.as_deref()
    }

    /// Original index of local row `i` (identity when unlabelled).
    pub fn row_label(&self, i: usize) -> usize {
        self.row_labels.as_ref().map_or(i, |l| l[i])
    }

    pub fn col_label(&self, j: usize) -> usize {
        self.col_labels.as_ref().map_or(j, |l| l[j])
    }

    /// Attaches labels; each must be strictly increasing and match the
    /// dimension it names.
    pub fn with_labels(mut self, rows: Option<Vec<usize>>, cols: Option<Vec<usize>>) -> Result<Self> {
        for (labels, len) in [(&rows, self.rows), (&cols, self.cols)] {
            if let Some(l) = labels {
                if l.len() != len || l.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invariant(format!(
                        "labels {l:?} are not strictly increasing of length {len}"
                    )));
                }
            }
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn to_dense(&self) -> Vec<Vec<Tropical>> {
        let mut out = vec![vec![Tropical::Eps; self.cols]; self.rows];
        for (i, j, w) in self.entries() {
            out[i][j] = Tropical::Fin(w.clone());
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut data: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.cols];
        for (i, j, w) in self.entries() {
            data[j].push((i, w.clone()));
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Principal submatrix on `nodes` (strictly increasing local indices).
    /// The result is labelled with the corresponding original indices.
    pub fn principal_submatrix(&self, nodes: &[usize]) -> Result<Matrix> {
        self.ensure_square()?;
        let mut local = vec![usize::MAX; self.rows];
        for (pos, &v) in nodes.iter().enumerate() {
            local[v] = pos;
        }
        let entries = nodes.iter().enumerate().flat_map(|(pi, &i)| {
            let local = &local;
            self.data[i]
                .iter()
                .filter(move |(j, _)| local[*j] != usize::MAX)
                .map(move |(j, w)| (pi, local[*j], w.clone()))
        });
        let m = Matrix::from_entries(nodes.len(), nodes.len(), entries.collect::<Vec<_>>())?;
        let labels: Vec<usize> = nodes.iter().map(|&v| self.row_label(v)).collect();
        m.with_labels(Some(labels.clone()), Some(labels))
    }

    fn same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// `A ⊕ B`
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other, "matrix_add")?;
        let entries = self
            .entries()
            .chain(other.entries())
            .map(|(i, j, w)| (i, j, w.clone()))
            .collect::<Vec<_>>();
        let mut m = Matrix::from_entries(self.rows, self.cols, entries)?;
        m.row_labels = self.row_labels.clone();
        m.col_labels = self.col_labels.clone();
        Ok(m)
    }

    /// `A ⊗ B`
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matrix_mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut acc: Vec<Option<Rational>> = vec![None; other.cols];
        let mut touched = Vec::new();
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let cand = a + b;
                    match &mut acc[*j] {
                        Some(cur) => {
                            if cand > *cur {
                                *cur = cand;
                            }
                        }
                        slot @ None => {
                            *slot = Some(cand);
                            touched.push(*j);
                        }
                    }
                }
            }
            touched.sort_unstable();
            let out_row = touched
                .drain(..)
                .map(|j| (j, acc[j].take().expect("touched entry")))
                .collect();
            data.push(out_row);
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            data,
            row_labels: self.row_labels.clone(),
            col_labels: other.col_labels.clone(),
        })
    }

    /// `c ⊗ A`
    pub fn scale(&self, c: &Rational) -> Matrix {
        let mut m = self.clone();
        for row in &mut m.data {
            for (_, w) in row.iter_mut() {
                *w = &*w + c;
            }
        }
        m
    }

    /// `A^{⊗t}` by binary exponentiation; `A^{⊗0} = I_n`.
    pub fn power(&self, t: &BigUint) -> Result<Matrix> {
        let n = self.ensure_square()?;
        let mut result = Matrix::identity(n);
        result.row_labels = self.row_labels.clone();
        result.col_labels = self.col_labels.clone();
        if t.is_zero() {
            return Ok(result);
        }
        let mut base = self.clone();
        let bits = t.bits();
        for b in 0..bits {
            if t.bit(b) {
                result = result.mul(&base)?;
            }
            if b + 1 < bits {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn power_u64(&self, t: u64) -> Result<Matrix> {
        self.power(&BigUint::from(t))
    }

    /// `A* = I ⊕ A ⊕ A^{⊗2} ⊕ …`, finite when no circuit has positive
    /// weight. Entry `(i, j)` is the maximum weight of an `i`-`j` path.
    pub fn kleene_star(&self) -> Result<Matrix> {
        let n = self.ensure_square()?;
        let g = WeightedDigraph::from_matrix(self)?;
        if let Some(mean) = karp_max_cycle_mean(&g).finite() {
            if mean.is_positive() {
                return Err(Error::PositiveCircuit);
            }
        }
        let mut s: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
        for (i, row) in s.iter_mut().enumerate() {
            row[i] = Some(Rational::zero());
        }
        for (i, j, w) in self.entries() {
            let better = s[i][j].as_ref().is_none_or(|cur| w > cur);
            if better {
                s[i][j] = Some(w.clone());
            }
        }
        for k in 0..n {
            let row_k = s[k].clone();
            for row in s.iter_mut() {
                let Some(ik) = row[k].clone() else { continue };
                for (j, kj) in row_k.iter().enumerate() {
                    if let Some(kj) = kj {
                        let cand = &ik + kj;
                        if row[j].as_ref().is_none_or(|cur| cand > *cur) {
                            row[j] = Some(cand);
                        }
                    }
                }
            }
        }
        let entries = s.into_iter().enumerate().flat_map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .filter_map(move |(j, w)| w.map(|w| (i, j, w)))
        });
        let mut m = Matrix::from_entries(n, n, entries.collect::<Vec<_>>())?;
        m.row_labels = self.row_labels.clone();
        m.col_labels = self.col_labels.clone();
        Ok(m)
    }

    /// `diag(−d) ⊗ (shift ⊗ A) ⊗ diag(d)`: entry `(i, j)` becomes
    /// `−d_i + a_ij + shift + d_j`.
    pub fn conjugate(&self, d: &DiagonalScaling, shift: &Rational) -> Result<Matrix> {
        let n = self.ensure_square()?;
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                op: "diag_conjugate",
                left: self.shape(),
                right: (d.len(), d.len()),
            });
        }
        let dv = d.values();
        let mut m = self.clone();
        for (i, row) in m.data.iter_mut().enumerate() {
            for (j, w) in row.iter_mut() {
                *w = &(&(&*w + shift) + &dv[*j]) - &dv[i];
            }
        }
        Ok(m)
    }

    /// Column `j` as a dense vector.
    pub fn column(&self, j: usize) -> Vec<Tropical> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `A ⊗ x` for a dense vector.
    pub fn mul_vec(&self, x: &[Tropical]) -> Result<Vec<Tropical>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok(self
            .data
            .iter()
            .map(|row| {
                row.iter().fold(Tropical::Eps, |acc, (j, w)| {
                    acc.oplus(&Tropical::Fin(w.clone()).otimes(&x[*j]))
                })
            })
            .collect())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dense = self.to_dense();
        let cells: Vec<Vec<String>> = dense
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{}", self.rows, self.cols)?;
        if let Some(l) = &self.row_labels {
            write!(f, " rows {l:?}")?;
        }
        if let Some(l) = &self.col_labels {
            write!(f, " cols {l:?}")?;
        }
        writeln!(f)?;
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fixtures::worked_example;
    use proptest::prelude::*;

    fn m(s: &str) -> Matrix {
        Matrix::parse_rows(s).unwrap()
    }

    #[test]
    fn add_examples() {
        let a = m("1 .; . 2");
        let b = m("0 3; . .");
        assert_eq!(a.add(&b).unwrap(), m("1 3; . 2"));
        assert_eq!(a.add(&Matrix::eps(2, 2)).unwrap(), a);
        assert_eq!(a.add(&a).unwrap(), a);
        assert!(a.add(&Matrix::eps(2, 3)).is_err());
    }

    #[test]
    fn mul_examples() {
        let a = m(". 7; 9 .");
        assert_eq!(a.mul(&a).unwrap(), m("16 .; . 16"));
        assert_eq!(Matrix::identity(2).mul(&a).unwrap(), a);
        assert_eq!(Matrix::eps(2, 2).mul(&a).unwrap(), Matrix::eps(2, 2));
        assert!(a.mul(&Matrix::eps(3, 3)).is_err());
    }

    #[test]
    fn power_examples() {
        let a = m(". 7; 9 .");
        assert_eq!(a.power_u64(3).unwrap(), m(". 23; 25 ."));
        assert_eq!(a.power_u64(1).unwrap(), a);
        assert_eq!(a.power_u64(0).unwrap(), Matrix::identity(2));
        assert!(Matrix::eps(2, 3).power_u64(2).is_err());
    }

    #[test]
    fn kleene_star_examples() {
        assert_eq!(Matrix::eps(3, 3).kleene_star().unwrap(), Matrix::identity(3));
        assert_eq!(m(". -1; -2 .").kleene_star().unwrap(), m("0 -1; -2 0"));
        assert_eq!(m("1").kleene_star(), Err(Error::PositiveCircuit));
    }

    #[test]
    fn conjugate_reproduces_worked_visualization() {
        let a = worked_example();
        let sub = a.principal_submatrix(&[5, 6, 7, 8, 9]).unwrap();
        let d = DiagonalScaling::new([0, -3, -3, -2, -4].map(Rational::from_integer).to_vec());
        let vis = sub.conjugate(&d, &Rational::from_integer(-3)).unwrap();
        let expected = m(". -5 0 . .; . . . . .; . . . 0 .; 0 0 . . -4; . . . 0 .");
        assert_eq!(vis.to_dense(), expected.to_dense());
        assert_eq!(vis.row_labels(), Some(&[5, 6, 7, 8, 9][..]));
        assert_eq!(
            vis.conjugate(&d.inverse(), &Rational::from_integer(3)).unwrap(),
            sub
        );
    }

    #[test]
    fn conjugate_identity_and_diagonal() {
        let a = worked_example();
        let zero = DiagonalScaling::zeros(10);
        assert_eq!(a.conjugate(&zero, &Rational::zero()).unwrap(), a);
        let d = DiagonalScaling::new((0..10).map(|i| Rational::new(i * 3 - 7, 2)).collect());
        let c = a.conjugate(&d, &Rational::from_integer(-5)).unwrap();
        for i in 0..10 {
            let expect = a.entry(i, i).map(|w| w - &Rational::from_integer(5));
            assert_eq!(c.entry(i, i).cloned(), expect);
        }
        assert!(a.conjugate(&DiagonalScaling::zeros(3), &Rational::zero()).is_err());
    }

    #[test]
    fn submatrix_labels_compose() {
        let a = worked_example();
        let sub = a.principal_submatrix(&[3, 4, 5, 6, 7, 8, 9]).unwrap();
        let sub2 = sub.principal_submatrix(&[2, 4, 5]).unwrap();
        assert_eq!(sub2.row_labels(), Some(&[5, 7, 8][..]));
        assert_eq!(sub2.get(0, 1), Tropical::from(6));
        assert!(Matrix::eps(2, 2).with_labels(Some(vec![1, 1]), None).is_err());
    }

    pub(crate) fn small_matrix(max_n: usize) -> impl Strategy<Value = Matrix> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(proptest::option::weighted(0.6, -5i64..=5), n * n).prop_map(
                move |cells| {
                    let entries = cells.into_iter().enumerate().filter_map(|(k, c)| {
                        c.map(|w| (k / n, k % n, Rational::from_integer(w)))
                    });
                    Matrix::from_entries(n, n, entries.collect::<Vec<_>>()).unwrap()
                },
            )
        })
    }

    fn same_size_triple() -> impl Strategy<Value = (Matrix, Matrix, Matrix)> {
        (1usize..=5).prop_flat_map(|n| {
            let one = proptest::collection::vec(proptest::option::weighted(0.6, -5i64..=5), n * n)
                .prop_map(move |cells| {
                    let entries = cells.into_iter().enumerate().filter_map(|(k, c)| {
                        c.map(|w| (k / n, k % n, Rational::from_integer(w)))
                    });
                    Matrix::from_entries(n, n, entries.collect::<Vec<_>>()).unwrap()
                });
            (one.clone(), one.clone(), one)
        })
    }

    proptest! {
        #[test]
        fn mul_is_associative((a, b, c) in same_size_triple()) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn power_adds_exponents(a in small_matrix(6), s in 0u64..=8, t in 0u64..=8) {
            let lhs = a.power_u64(s + t).unwrap();
            let rhs = a.power_u64(s).unwrap().mul(&a.power_u64(t).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn conjugation_commutes_with_powers(
            a in small_matrix(5),
            t in 0u64..=6,
            shift in -4i64..=4,
            seed in proptest::collection::vec(-6i64..=6, 5),
        ) {
            let d = DiagonalScaling::new(seed[..a.rows()].iter().map(|&x| Rational::new(x, 2)).collect());
            let shift = Rational::from_integer(shift);
            let lhs = a.power_u64(t).unwrap()
                .conjugate(&d, &shift.mul_bigint(&t.into())).unwrap();
            let rhs = a.conjugate(&d, &shift).unwrap().power_u64(t).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn kleene_star_matches_power_sum(a in small_matrix(6)) {
            let n = a.rows();
            let g = WeightedDigraph::from_matrix(&a).unwrap();
            let lambda = karp_max_cycle_mean(&g);
            // shift so that no circuit is positive
            let a = match lambda.finite() {
                Some(l) if l.is_positive() => a.scale(&-l),
                _ => a,
            };
            let star = a.kleene_star().unwrap();
            let mut sum = Matrix::identity(n);
            let mut p = Matrix::identity(n);
            for _ in 1..n {
                p = p.mul(&a).unwrap();
                sum = sum.add(&p).unwrap();
            }
            prop_assert_eq!(star, sum);
        }
    }
}
