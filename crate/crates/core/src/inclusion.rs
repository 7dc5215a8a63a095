//! The inclusion matrix `A(r, h)` of `h`-subsets against 2-subsets of `[r]`,
//! its exact rank, and the least-squares solve of the log-linear pair system.
//!
//! Both index sets are in colex order, which for subsets of `[r]` encoded as
//! bitmasks is plain increasing-integer order.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{choose2, pair_at};
use crate::pattern::PatternGraph;

pub const MAX_R: usize = 12;
pub const MAX_H: usize = 6;

/// `k`-subsets of `[r]` as bitmasks, in colex order (Gosper's hack).
pub fn colex_subsets(r: usize, k: usize) -> Vec<u64> {
    assert!(r < 64, "colex_subsets needs r < 64");
    if k > r {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let limit = 1u64 << r;
    let mut out = Vec::new();
    let mut s = (1u64 << k) - 1;
    while s < limit {
        out.push(s);
        let c = s & s.wrapping_neg();
        let t = s + c;
        s = (((t ^ s) >> 2) / c) | t;
    }
    out
}

/// `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Position of a subset (bitmask) among the subsets of its size in colex order.
pub fn colex_rank(mask: u64) -> usize {
    mask_members(mask)
        .iter()
        .enumerate()
        .map(|(i, &c)| binomial(c, i + 1))
        .sum()
}

pub(crate) fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionMatrix {
    r: usize,
    h: usize,
    rows: Vec<u64>,
}

impl InclusionMatrix {
    pub fn new(r: usize, h: usize) -> Result<Self> {
        if h <= 2 {
            return Err(Error::Parameter(format!("inclusion matrix needs h > 2, got {h}")));
        }
        if r < h {
            return Err(Error::Parameter(format!("inclusion matrix needs r >= h, got r = {r}, h = {h}")));
        }
        if r > MAX_R || h > MAX_H {
            return Err(Error::CapExceeded {
                what: format!("inclusion matrix A({r}, {h})"),
                limit: format!("r <= {MAX_R}, h <= {MAX_H}"),
            });
        }
        Ok(InclusionMatrix {
            r,
            h,
            rows: colex_subsets(r, h),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        choose2(self.r)
    }

    /// Row `i`'s `h`-subset as a bitmask.
    pub fn row_set(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn row_sets(&self) -> &[u64] {
        &self.rows
    }

    /// Column `j`'s pair `(a, b)`, `a < b`.
    pub fn col_pair(&self, j: usize) -> (usize, usize) {
        pair_at(j)
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        let (a, b) = pair_at(j);
        let pair = 1u64 << a | 1u64 << b;
        self.rows[i] & pair == pair
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        let members = mask_members(self.rows[i]);
        let mut out = Vec::with_capacity(choose2(self.h));
        for (bi, &b) in members.iter().enumerate() {
            for &a in &members[..bi] {
                out.push(crate::graph::pair_index(a, b));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n_rows()).map(|i| self.row_support(i).len()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n_cols()];
        for i in 0..self.n_rows() {
            for j in self.row_support(i) {
                sums[j] += 1;
            }
        }
        sums
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_rows(), self.n_cols(), |i, j| if self.entry(i, j) { 1.0 } else { 0.0 })
    }

    /// Dense text dump: a `rows cols` header, then one line of space-separated 0/1 per row.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.n_rows(), self.n_cols());
        for i in 0..self.n_rows() {
            let line: Vec<&str> = (0..self.n_cols()).map(|j| if self.entry(i, j) { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Rank over the rationals by fraction-free (Bareiss) elimination on big integers.
pub fn bareiss_rank(matrix: &[Vec<i64>]) -> usize {
    let n_rows = matrix.len();
    let n_cols = matrix.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let (top, below) = a.split_at_mut(rank + 1);
        let prow = &top[rank];
        for row in below.iter_mut() {
            if row[col].is_zero() {
                // the update reduces to scaling by pivot / prev, which is exact
                for j in col + 1..n_cols {
                    if !row[j].is_zero() {
                        row[j] = &prow[col] * &row[j] / &prev;
                    }
                }
                continue;
            }
            for j in col + 1..n_cols {
                let num = &prow[col] * &row[j] - &row[col] * &prow[j];
                row[j] = num / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = prow[col].clone();
        rank += 1;
    }
    rank
}

/// Exact rank of `A(r, h)`.
pub fn exact_rank(a: &InclusionMatrix) -> usize {
    let dense: Vec<Vec<i64>> = (0..a.n_rows())
        .map(|i| (0..a.n_cols()).map(|j| a.entry(i, j) as i64).collect())
        .collect();
    bareiss_rank(&dense)
}

/// Least-squares solution of `A(r, h) y = rhs`, one unknown per pair of `[r]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSystem {
    pub matrix: InclusionMatrix,
    pub rhs: Vec<f64>,
    /// `y` in colex pair order.
    pub solution: Vec<f64>,
    /// `||A y - rhs||_2`.
    pub residual_norm: f64,
}

/// Solve `A(r, h) y = rhs` in the least-squares sense by Householder QR.
///
/// Requires `r >= h + 2`, where `A(r, h)` has full column rank.
pub fn solve_log_system(pattern: &PatternGraph, r: usize, rhs: &[f64]) -> Result<LinearSystem> {
    solve_inclusion_system(pattern.h(), r, rhs)
}

pub fn solve_inclusion_system(h: usize, r: usize, rhs: &[f64]) -> Result<LinearSystem> {
    if r < h + 2 {
        return Err(Error::Parameter(format!(
            "log system needs r >= h + 2 for a unique solution, got r = {r}, h = {h}"
        )));
    }
    let matrix = InclusionMatrix::new(r, h)?;
    if rhs.len() != matrix.n_rows() {
        return Err(Error::Arity {
            expected: matrix.n_rows(),
            got: rhs.len(),
        });
    }
    if let Some(bad) = rhs.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("right-hand side entry {bad} is not finite")));
    }
    let a = matrix.to_f64();
    let b = DVector::from_column_slice(rhs);
    let qr = a.clone().qr();
    let qtb = qr.q().transpose() * &b;
    let y = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Precondition("inclusion matrix is rank deficient".into()))?;
    let residual_norm = (&a * &y - &b).norm();
    Ok(LinearSystem {
        matrix,
        rhs: rhs.to_vec(),
        solution: y.iter().copied().collect(),
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn colex_rank_inverts_enumeration() {
        for (r, k) in [(5, 3), (8, 4), (10, 2)] {
            for (i, &m) in colex_subsets(r, k).iter().enumerate() {
                assert_eq!(colex_rank(m), i);
            }
        }
    }

    #[test]
    fn colex_order_and_counts() {
        let s = colex_subsets(5, 3);
        assert_eq!(s.len(), 10);
        assert_eq!(&s[..4], &[0b00111, 0b01011, 0b01101, 0b01110]);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn shapes_and_sums() {
        for (r, h) in [(5, 3), (6, 3), (6, 4), (9, 5), (12, 6)] {
            let a = InclusionMatrix::new(r, h).unwrap();
            assert_eq!((a.n_rows(), a.n_cols()), (binom(r, h), binom(r, 2)));
            assert!(a.row_sums().iter().all(|&s| s == binom(h, 2)));
            assert!(a.col_sums().iter().all(|&s| s == binom(r - 2, h - 2)));
        }
        let sq = InclusionMatrix::new(7, 5).unwrap();
        assert_eq!(sq.n_rows(), sq.n_cols());
        assert!(InclusionMatrix::new(5, 2).is_err());
        assert!(InclusionMatrix::new(3, 4).is_err());
        assert!(InclusionMatrix::new(13, 3).is_err());
    }

    #[test]
    fn entry_matches_containment() {
        let a = InclusionMatrix::new(6, 4).unwrap();
        for i in 0..a.n_rows() {
            for j in 0..a.n_cols() {
                let (x, y) = a.col_pair(j);
                let m = mask_members(a.row_set(i));
                assert_eq!(a.entry(i, j), m.contains(&x) && m.contains(&y));
            }
        }
        let dump = a.dump();
        assert!(dump.starts_with("15 15\n"));
        assert_eq!(dump.lines().count(), 16);
    }

    #[test]
    fn ranks_at_small_sizes() {
        assert_eq!(exact_rank(&InclusionMatrix::new(5, 3).unwrap()), 10);
        assert_eq!(exact_rank(&InclusionMatrix::new(6, 4).unwrap()), 15);
        assert!(exact_rank(&InclusionMatrix::new(4, 3).unwrap()) <= 4);
    }

    /// Rank by rational elimination with `i128` numerator/denominator pairs.
    fn rational_rank(m: &[Vec<i64>]) -> usize {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let mut a: Vec<Vec<(i128, i128)>> = m.iter().map(|r| r.iter().map(|&x| (x as i128, 1)).collect()).collect();
        let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&i| a[i][c].0 != 0) else { continue };
            a.swap(rank, p);
            for i in 0..rows {
                if i == rank || a[i][c].0 == 0 {
                    continue;
                }
                let (fn_, fd) = (a[i][c].0 * a[rank][c].1, a[i][c].1 * a[rank][c].0);
                for j in 0..cols {
                    let (pn, pd) = a[rank][j];
                    let (xn, xd) = a[i][j];
                    let num = xn * fd * pd - fn_ * pn * xd;
                    let den = xd * fd * pd;
                    let g = gcd(num, den).max(1) * den.signum();
                    a[i][j] = (num / g, den / g);
                }
            }
            rank += 1;
        }
        rank
    }

    proptest! {
        #[test]
        fn bareiss_agrees_with_rational_elimination(
            rows in 1usize..6, cols in 1usize..6, inner in 1usize..5,
            seed in proptest::collection::vec(-3i64..4, 60)
        ) {
            // product of rows x inner and inner x cols factors has rank <= inner
            let m: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| {
                (0..inner).map(|k| seed[(i * 5 + k) % 60] * seed[30 + (k * 5 + j) % 30]).sum()
            }).collect()).collect();
            prop_assert_eq!(bareiss_rank(&m), rational_rank(&m));
        }

        #[test]
        fn solve_is_row_permutation_invariant(seed in proptest::collection::vec(-2.0f64..2.0, 15), rot in 1usize..20) {
            let (r, h) = (6, 3);
            let a = InclusionMatrix::new(r, h).unwrap();
            let rhs: Vec<f64> = (0..a.n_rows()).map(|i| a.row_support(i).iter().map(|&j| seed[j]).sum()).collect();
            let base = solve_inclusion_system(h, r, &rhs).unwrap();
            // permuting rows of the system: rotate both A's rows and rhs by the same amount
            let perm: Vec<usize> = (0..a.n_rows()).map(|i| (i + rot) % a.n_rows()).collect();
            let am = a.to_f64().select_rows(&perm);
            let b = DVector::from_iterator(perm.len(), perm.iter().map(|&i| rhs[i]));
            let qr = am.qr();
            let y = qr.r().solve_upper_triangular(&(qr.q().transpose() * b)).unwrap();
            for (x, z) in base.solution.iter().zip(y.iter()) {
                prop_assert!((x - z).abs() < 1e-10);
            }
            for (x, z) in base.solution.iter().zip(&seed) {
                prop_assert!((x - z).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn constant_and_zero_rhs() {
        let p3 = PatternGraph::builtin("path3").unwrap();
        let l = (0.125f64).ln();
        let sys = solve_log_system(&p3, 5, &[3.0 * l; 10]).unwrap();
        assert!(sys.residual_norm < 1e-10);
        assert!(sys.solution.iter().all(|y| (y - l).abs() < 1e-12));
        let zero = solve_log_system(&p3, 6, &[0.0; 20]).unwrap();
        assert!(zero.solution.iter().all(|y| y.abs() < 1e-14));
        assert!(solve_log_system(&p3, 4, &[0.0; 4]).is_err());
        assert!(solve_log_system(&p3, 5, &[0.0; 9]).is_err());
    }

    #[test]
    fn perturbation_moves_solution_proportionally() {
        let c4 = PatternGraph::builtin("cycle4").unwrap();
        let base = vec![-1.0; binom(7, 4)];
        let y0 = solve_log_system(&c4, 7, &base).unwrap().solution;
        let mut moved = base.clone();
        moved[3] += 1e-3;
        let y1 = solve_log_system(&c4, 7, &moved).unwrap().solution;
        let shift = y0.iter().zip(&y1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(shift > 0.0 && shift < 1e-3, "{shift}");
    }
}
