//! Exact linear algebra over the integers.
//!
//! Determinants use fraction-free (Bareiss) elimination with row pivoting:
//! every division along the way is by a previous pivot and is exact, so the
//! arithmetic never leaves the integers. Adjugates come in two routes —
//! cofactor expansion for small or singular matrices, and, for larger
//! nonsingular ones, exact column solves of `M·x = det·e_k` against the
//! Bareiss-triangularized system. In both cases `adj(M)·M = det(M)·I` holds
//! as an identity of integer matrices, not up to rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// A square integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

/// Divides exactly, panicking on a nonzero remainder. Callers only reach this
/// where exactness is a theorem (Bareiss pivots, integral solution vectors),
/// so a remainder means corrupted logic, not bad input.
pub(crate) fn exact_div(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    assert!(r.is_zero(), "inexact integer division: {num} / {den}");
    q
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        IntMatrix { n, entries }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::new(n, vec![BigInt::zero(); n * n]);
        for i in 0..n {
            *m.get_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntMatrix::new(n, vec![BigInt::zero(); n * n]);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = aik * other.get(k, j);
                    *out.get_mut(i, j) += prod;
                }
            }
        }
        out
    }

    pub fn scaled_identity(n: usize, s: &BigInt) -> IntMatrix {
        let mut m = IntMatrix::new(n, vec![BigInt::zero(); n * n]);
        for i in 0..n {
            *m.get_mut(i, i) = s.clone();
        }
        m
    }

    /// Strict diagonal dominance: in every row the absolute diagonal entry
    /// strictly exceeds the sum of the other absolute entries.
    pub fn is_sdd(&self) -> bool {
        (0..self.n).all(|i| {
            let mut off = BigInt::zero();
            for j in 0..self.n {
                if j != i {
                    off += self.get(i, j).abs();
                }
            }
            self.get(i, i).abs() > off
        })
    }

    /// Determinant by fraction-free elimination. Exact for any size.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.entries.clone();
        let at = |a: &Vec<BigInt>, i: usize, j: usize| a[i * n + j].clone();
        let mut sign = 1i8;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&a, k, k).is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !at(&a, r, k).is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    a.swap(k * n + j, r * n + j);
                }
                sign = -sign;
            }
            let pivot = at(&a, k, k);
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &pivot * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = exact_div(&num, &prev);
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = pivot;
        }
        let last = a[(n - 1) * n + (n - 1)].clone();
        if sign < 0 {
            -last
        } else {
            last
        }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == skip_row {
                continue;
            }
            for j in 0..n {
                if j == skip_col {
                    continue;
                }
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix::new(n - 1, entries)
    }

    fn adjugate_by_cofactors(&self) -> IntMatrix {
        let n = self.n;
        if n == 0 {
            return IntMatrix::new(0, Vec::new());
        }
        if n == 1 {
            return IntMatrix::identity(1);
        }
        let mut adj = IntMatrix::new(n, vec![BigInt::zero(); n * n]);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(i, j).det();
                *adj.get_mut(j, i) = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        adj
    }

    /// Adjugate via exact column solves: run fraction-free elimination on
    /// `[M | det·I]` and back-substitute. Each back-substitution divides the
    /// row remainder by the corresponding pivot; the quotients are the
    /// entries of `adj(M)`, which are integers, so the divisions are exact.
    fn adjugate_by_solving(&self, det: &BigInt) -> IntMatrix {
        let n = self.n;
        let width = 2 * n;
        let mut a: Vec<BigInt> = Vec::with_capacity(n * width);
        for i in 0..n {
            for j in 0..n {
                a.push(self.get(i, j).clone());
            }
            for j in 0..n {
                a.push(if i == j { det.clone() } else { BigInt::zero() });
            }
        }
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * width + k].is_zero() {
                let r = (k + 1..n)
                    .find(|&r| !a[r * width + k].is_zero())
                    .expect("nonsingular matrix must have a pivot");
                for j in 0..width {
                    a.swap(k * width + j, r * width + j);
                }
                // The swap flips the sign of every subsequent pivot relative
                // to the determinant, but the solve is unaffected: the system
                // [M|det·I] is permuted as a whole.
            }
            let pivot = a[k * width + k].clone();
            for i in k + 1..n {
                for j in k + 1..width {
                    let num = &pivot * &a[i * width + j] - &a[i * width + k] * &a[k * width + j];
                    a[i * width + j] = exact_div(&num, &prev);
                }
                a[i * width + k] = BigInt::zero();
            }
            prev = pivot;
        }
        let mut adj = IntMatrix::new(n, vec![BigInt::zero(); n * n]);
        for col in 0..n {
            let rhs_col = n + col;
            let mut x = vec![BigInt::zero(); n];
            for i in (0..n).rev() {
                let mut acc = a[i * width + rhs_col].clone();
                for j in i + 1..n {
                    acc -= &a[i * width + j] * &x[j];
                }
                x[i] = exact_div(&acc, &a[i * width + i]);
            }
            for (i, xi) in x.iter().enumerate() {
                *adj.get_mut(i, col) = xi.clone();
            }
        }
        adj
    }

    /// The adjugate (transposed cofactor matrix), satisfying
    /// `adj(M)·M = M·adj(M) = det(M)·I` exactly. Small and singular matrices
    /// go through cofactors; larger nonsingular ones through column solves.
    pub fn adjugate(&self) -> IntMatrix {
        let det = self.det();
        if self.n <= 6 || det.is_zero() {
            self.adjugate_by_cofactors()
        } else {
            self.adjugate_by_solving(&det)
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if i == 0 { "[" } else { " " })?;
            for j in 0..self.n {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str(if i + 1 == self.n { "]" } else { "\n" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn determinants_of_small_matrices() {
        assert_eq!(IntMatrix::from_rows(&[vec![-7]]).det(), BigInt::from(-7));
        assert_eq!(
            IntMatrix::from_rows(&[vec![2, 1], vec![5, 2]]).det(),
            BigInt::from(-1)
        );
        assert_eq!(
            IntMatrix::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]).det(),
            BigInt::from(-3)
        );
        // Zero leading pivot forces a row swap.
        assert_eq!(
            IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).det(),
            BigInt::from(-1)
        );
        assert_eq!(
            IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).det(),
            BigInt::zero()
        );
    }

    #[test]
    fn determinant_matches_cofactor_expansion_on_random_matrices() {
        fn cofactor_det(m: &IntMatrix) -> BigInt {
            let n = m.n();
            if n == 1 {
                return m.get(0, 0).clone();
            }
            let mut acc = BigInt::zero();
            for j in 0..n {
                if m.get(0, j).is_zero() {
                    continue;
                }
                let term = m.get(0, j) * cofactor_det(&m.minor(0, j));
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..60 {
            let n = rng.random_range(1..=5);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-9..=9)).collect())
                .collect();
            let m = IntMatrix::from_rows(&rows);
            assert_eq!(m.det(), cofactor_det(&m));
        }
    }

    #[test]
    fn sdd_examples() {
        assert!(IntMatrix::from_rows(&[vec![3, 1], vec![-1, 2]]).is_sdd());
        assert!(!IntMatrix::from_rows(&[vec![0]]).is_sdd());
        assert!(!IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).is_sdd());
        assert!(IntMatrix::from_rows(&[vec![-2]]).is_sdd());
    }

    #[test]
    fn adjugate_identity_on_singular_and_regular_examples() {
        let samples = [
            IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]), // singular
            IntMatrix::from_rows(&[vec![2, 1], vec![5, 2]]),
            IntMatrix::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]),
            IntMatrix::identity(4),
        ];
        for m in samples {
            let adj = m.adjugate();
            let det = m.det();
            let expect = IntMatrix::scaled_identity(m.n(), &det);
            assert_eq!(adj.mul(&m), expect);
            assert_eq!(m.mul(&adj), expect);
        }
        // The classic singular witness keeps its adjugate even though det = 0.
        let s = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(
            s.adjugate(),
            IntMatrix::from_rows(&[vec![4, -2], vec![-2, 1]])
        );
    }

    #[test]
    fn solve_route_agrees_with_cofactors_beyond_six() {
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..10 {
            let n = 7;
            // Diagonally dominant, hence nonsingular: exercises the solve route.
            let mut rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-5..=5)).collect())
                .collect();
            for (i, row) in rows.iter_mut().enumerate() {
                let off: i64 = row
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, x)| x.abs())
                    .sum();
                row[i] = off + rng.random_range(1..=4);
            }
            let m = IntMatrix::from_rows(&rows);
            let via_solve = m.adjugate();
            let via_cofactor = m.adjugate_by_cofactors();
            assert_eq!(via_solve, via_cofactor);
        }
    }

    #[test]
    fn solve_route_survives_interior_zero_pivots() {
        // Nonsingular but needs a swap during elimination.
        let m = IntMatrix::from_rows(&[
            vec![1, 1, 0, 0, 0, 0, 0],
            vec![1, 1, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 0, 0],
            vec![0, 0, 0, 0, 1, 1, 0],
            vec![0, 0, 0, 0, 0, 1, 1],
            vec![1, 0, 0, 0, 0, 0, 1],
        ]);
        let det = m.det();
        assert!(!det.is_zero());
        let adj = m.adjugate();
        assert_eq!(adj.mul(&m), IntMatrix::scaled_identity(7, &det));
    }
}
