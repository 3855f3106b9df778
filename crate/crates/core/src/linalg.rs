//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers: rational rank via
//! fraction-free (Bareiss) elimination, integer-scaled rational kernel bases,
//! Smith normal form, and Gaussian elimination over prime fields. Matrices in
//! this crate are tiny (rows and columns bounded by small group orders), so
//! the implementations favour determinism and exactness over speed.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Dense integer matrix in row-major order with unbounded entries.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    /// Builds a matrix from row-major entries. Panics if the dimensions are
    /// not positive or do not match the entry count.
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        IntMatrix { rows, cols, entries }
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix::new(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    /// Matrix-vector product, exact.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.entry(r, c) * &v[c]).sum())
            .collect()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entry(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix({}x{})\n{}", self.rows, self.cols, self)
    }
}

/// Diagonal of a Smith normal form together with the rank it implies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// d_1, ..., d_k with d_i >= 0 and d_i dividing d_{i+1}; k = min(rows, cols).
    pub diagonal: Vec<BigInt>,
    /// Number of nonzero diagonal entries; equals the rational rank.
    pub rank: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0} is not prime")]
pub struct NotPrime(pub u64);

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Rank over the rationals by fraction-free elimination with row pivoting.
pub fn rational_rank(m: &IntMatrix) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.entries.clone();
    let idx = |r: usize, c: usize| r * cols + c;
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[idx(r, col)].is_zero()) else {
            continue;
        };
        if piv != rank {
            for c in 0..cols {
                a.swap(idx(piv, c), idx(rank, c));
            }
        }
        let pivot = a[idx(rank, col)].clone();
        for r in rank + 1..rows {
            let lead = a[idx(r, col)].clone();
            for c in col + 1..cols {
                let v = (&a[idx(r, c)] * &pivot - &lead * &a[idx(rank, c)]) / &prev;
                a[idx(r, c)] = v;
            }
            a[idx(r, col)] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Basis of the right kernel over the rationals, integer-scaled.
///
/// Each basis vector is normalized to content 1 with positive leading entry,
/// and vectors appear in echelon order (ascending free column).
pub fn rational_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<BigRational> = m.entries.iter().map(|e| BigRational::from(e.clone())).collect();
    let idx = |r: usize, c: usize| r * cols + c;

    // Reduced row echelon form over Q.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[idx(r, col)].is_zero()) else {
            continue;
        };
        if piv != rank {
            for c in 0..cols {
                a.swap(idx(piv, c), idx(rank, c));
            }
        }
        let inv = a[idx(rank, col)].clone();
        for c in col..cols {
            let v = &a[idx(rank, c)] / &inv;
            a[idx(rank, c)] = v;
        }
        for r in 0..rows {
            if r != rank && !a[idx(r, col)].is_zero() {
                let f = a[idx(r, col)].clone();
                for c in col..cols {
                    let v = &a[idx(r, c)] - &f * &a[idx(rank, c)];
                    a[idx(r, c)] = v;
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for &(r, pc) in &pivots {
            v[pc] = -a[idx(r, free)].clone();
        }
        basis.push(normalize_rational_vector(&v));
    }
    basis
}

/// Scales a rational vector to integers with content 1 and positive leading entry.
fn normalize_rational_vector(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut content = BigInt::zero();
    for x in &ints {
        content = content.gcd(x);
    }
    if !content.is_zero() && !content.is_one() {
        for x in ints.iter_mut() {
            *x = &*x / &content;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -&*x;
            }
        }
    }
    ints
}

/// Smith normal form diagonal. Transformation matrices are not retained.
///
/// Pivot choice is the smallest nonzero absolute value, ties broken in
/// row-major order, which keeps the result deterministic and entry growth
/// moderate.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.entries.clone();
    let idx = |r: usize, c: usize| r * cols + c;
    let n = rows.min(cols);
    let mut t = 0usize;

    'diag: while t < n {
        // Smallest nonzero |entry| in the trailing submatrix, row-major ties.
        let mut pivot_pos: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if a[idx(r, c)].is_zero() {
                    continue;
                }
                match pivot_pos {
                    Some((pr, pc)) if a[idx(pr, pc)].abs() <= a[idx(r, c)].abs() => {}
                    _ => pivot_pos = Some((r, c)),
                }
            }
        }
        let Some((pr, pc)) = pivot_pos else {
            break;
        };
        if pr != t {
            for c in 0..cols {
                a.swap(idx(pr, c), idx(t, c));
            }
        }
        if pc != t {
            for r in 0..rows {
                a.swap(idx(r, pc), idx(r, t));
            }
        }

        loop {
            // Clear column t. A nonzero remainder becomes the new, smaller pivot.
            let mut dirty = false;
            for r in t + 1..rows {
                if a[idx(r, t)].is_zero() {
                    continue;
                }
                let (q, rem) = a[idx(r, t)].div_rem(&a[idx(t, t)]);
                for c in t..cols {
                    let v = &a[idx(r, c)] - &q * &a[idx(t, c)];
                    a[idx(r, c)] = v;
                }
                if !rem.is_zero() {
                    for c in 0..cols {
                        a.swap(idx(r, c), idx(t, c));
                    }
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            // Clear row t the same way.
            for c in t + 1..cols {
                if a[idx(t, c)].is_zero() {
                    continue;
                }
                let (q, rem) = a[idx(t, c)].div_rem(&a[idx(t, t)]);
                for r in t..rows {
                    let v = &a[idx(r, c)] - &q * &a[idx(r, t)];
                    a[idx(r, c)] = v;
                }
                if !rem.is_zero() {
                    for r in 0..rows {
                        a.swap(idx(r, c), idx(r, t));
                    }
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            // Divisibility: the pivot must divide the whole trailing block.
            for r in t + 1..rows {
                for c in t + 1..cols {
                    if !a[idx(r, c)].mod_floor(&a[idx(t, t)]).is_zero() {
                        for cc in 0..cols {
                            let v = &a[idx(t, cc)] + &a[idx(r, cc)];
                            a[idx(t, cc)] = v;
                        }
                        continue 'diag;
                    }
                }
            }
            break;
        }
        t += 1;
    }

    let mut diagonal = Vec::with_capacity(n);
    for i in 0..n {
        diagonal.push(a[idx(i, i)].abs());
    }
    let rank = diagonal.iter().filter(|d| !d.is_zero()).count();
    SnfResult { diagonal, rank }
}

fn reduce_mod_p(m: &IntMatrix, p: u64) -> Vec<u64> {
    let bp = BigInt::from(p);
    m.entries
        .iter()
        .map(|e| e.mod_floor(&bp).to_u64().expect("residue fits in u64"))
        .collect()
}

fn inv_mod_p(x: u64, p: u64) -> u64 {
    // Fermat: p is prime and x != 0 mod p.
    let mut base = x as u128;
    let mut exp = p - 2;
    let modulus = p as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc as u64
}

/// Row echelon form over F_p; returns (matrix, pivot list).
fn rref_mod_p(m: &IntMatrix, p: u64) -> (Vec<u64>, Vec<(usize, usize)>) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = reduce_mod_p(m, p);
    let idx = |r: usize, c: usize| r * cols + c;
    let pm = p as u128;
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| a[idx(r, col)] != 0) else {
            continue;
        };
        if piv != rank {
            for c in 0..cols {
                a.swap(idx(piv, c), idx(rank, c));
            }
        }
        let inv = inv_mod_p(a[idx(rank, col)], p) as u128;
        for c in col..cols {
            a[idx(rank, c)] = (a[idx(rank, c)] as u128 * inv % pm) as u64;
        }
        for r in 0..rows {
            if r != rank && a[idx(r, col)] != 0 {
                let f = a[idx(r, col)] as u128;
                for c in col..cols {
                    let v = (a[idx(r, c)] as u128 + pm * pm - f * a[idx(rank, c)] as u128) % pm;
                    a[idx(r, c)] = v as u64;
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    (a, pivots)
}

/// Rank over the field with p elements.
pub fn rank_mod_p(m: &IntMatrix, p: u64) -> Result<usize, NotPrime> {
    if !is_prime(p) {
        return Err(NotPrime(p));
    }
    Ok(rref_mod_p(m, p).1.len())
}

/// Kernel basis over F_p, entries in [0, p), echelon order, each vector
/// scaled so its first nonzero entry is 1.
pub fn kernel_mod_p(m: &IntMatrix, p: u64) -> Result<Vec<Vec<u64>>, NotPrime> {
    if !is_prime(p) {
        return Err(NotPrime(p));
    }
    let cols = m.cols;
    let (a, pivots) = rref_mod_p(m, p);
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for &(r, pc) in &pivots {
            v[pc] = (p - a[r * cols + free]) % p;
        }
        if let Some(&lead) = v.iter().find(|&&x| x != 0) {
            if lead != 1 {
                let inv = inv_mod_p(lead, p) as u128;
                for x in v.iter_mut() {
                    *x = (*x as u128 * inv % p as u128) as u64;
                }
            }
        }
        basis.push(v);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Coset-projection matrix of the Klein four-group H = {e,b,c,d} against
    // its three order-2 subgroups; columns ordered (e,b,c,d).
    fn klein_three_subgroups() -> IntMatrix {
        IntMatrix::from_rows_i64(&[
            vec![1, 1, 0, 0], // {e,b}
            vec![0, 0, 1, 1], // {c,d}
            vec![1, 0, 1, 0], // {e,c}
            vec![0, 1, 0, 1], // {b,d}
            vec![1, 0, 0, 1], // {e,d}
            vec![0, 1, 1, 0], // {b,c}
        ])
    }

    // Same group against only {e,c} and {e,d}.
    fn klein_two_subgroups() -> IntMatrix {
        IntMatrix::from_rows_i64(&[
            vec![1, 0, 1, 0], // {e,c}
            vec![0, 1, 0, 1], // {b,d}
            vec![1, 0, 0, 1], // {e,d}
            vec![0, 1, 1, 0], // {b,c}
        ])
    }

    #[test]
    fn rank_of_identity() {
        let id = IntMatrix::from_rows_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(rational_rank(&id), 3);
        assert_eq!(smith_normal_form(&id).diagonal, vec![BigInt::from(1); 3]);
        assert_eq!(rank_mod_p(&id, 5).unwrap(), 3);
        assert!(rational_kernel(&id).is_empty());
        assert!(kernel_mod_p(&id, 7).unwrap().is_empty());
    }

    #[test]
    fn klein_full_matrix_rank_and_snf() {
        let m = klein_three_subgroups();
        assert_eq!(rational_rank(&m), 4);
        let snf = smith_normal_form(&m);
        let want: Vec<BigInt> = [1, 1, 1, 2].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(snf.diagonal, want);
        assert_eq!(snf.rank, 4);
        assert_eq!(rank_mod_p(&m, 2).unwrap(), 3);
        assert_eq!(rank_mod_p(&m, 3).unwrap(), 4);
        assert_eq!(kernel_mod_p(&m, 2).unwrap(), vec![vec![1, 1, 1, 1]]);
        assert!(rational_kernel(&m).is_empty());
    }

    #[test]
    fn klein_two_subgroup_matrix_kernel() {
        // Independent row reduction gives rank 3 and a one-dimensional kernel
        // spanned by (1, 1, -1, -1).
        let m = klein_two_subgroups();
        assert_eq!(rational_rank(&m), 3);
        let kernel = rational_kernel(&m);
        let want: Vec<BigInt> = [1, 1, -1, -1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(kernel, vec![want.clone()]);
        assert!(m.mul_vec(&want).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn snf_of_diagonal_pair() {
        let m = IntMatrix::from_rows_i64(&[vec![2, 0], vec![0, 3]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn forced_kernels() {
        let m = IntMatrix::from_rows_i64(&[vec![1, 1]]);
        let kq = rational_kernel(&m);
        assert_eq!(kq, vec![vec![BigInt::from(1), BigInt::from(-1)]]);
        assert_eq!(kernel_mod_p(&m, 3).unwrap(), vec![vec![1, 2]]);
    }

    #[test]
    fn rejects_composite_modulus() {
        let m = IntMatrix::from_rows_i64(&[vec![1]]);
        assert_eq!(rank_mod_p(&m, 6), Err(NotPrime(6)));
        assert_eq!(kernel_mod_p(&m, 1), Err(NotPrime(1)));
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = IntMatrix::from_rows_i64(&[vec![2, 4, -2], vec![1, 2, -1]]);
        assert_eq!(rational_rank(&m), 1);
        for v in rational_kernel(&m) {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }
}
