//! Exact integer linear algebra: Hermite normal form, integer kernels and the
//! Gale-dual exact sequence that puts coordinates on the divisor class group.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("rays span a sublattice of rank {rank} < {dim}")]
    NonSpanning { rank: usize, dim: usize },
    #[error("ray {index} is not primitive")]
    NonPrimitive { index: usize },
    #[error("ray {index} has length {len}, expected {dim}")]
    RaggedRays { index: usize, len: usize, dim: usize },
    #[error("integer overflow converting a matrix entry to i64")]
    Overflow,
}

/// Dense integer matrix with arbitrary-precision entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from `rows`; every row must have length `cols`.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(cols, rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[BigInt]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        IntMatrix { rows: idx.len(), cols: self.cols, data }
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> IntMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + jj] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>, LatticeError> {
        self.rows_iter()
            .map(|r| r.iter().map(|x| x.to_i64().ok_or(LatticeError::Overflow)).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hnf(self);
        h.rows_iter().filter(|r| r.iter().any(|x| !x.is_zero())).count()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self.rows_iter().map(|r| r.to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Inverse over Q, or `None` when singular.
    pub fn rational_inverse(&self) -> Option<Vec<Vec<BigRational>>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
            a.swap(piv, col);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x /= &p;
            }
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..2 * n {
                        let t = &f * &a[col][j];
                        a[i][j] -= t;
                    }
                }
            }
        }
        Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Integer inverse of a unimodular matrix, `None` if the matrix is not unimodular.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        let inv = self.rational_inverse()?;
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for (i, r) in inv.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                if !x.is_integer() {
                    return None;
                }
                out.set(i, j, x.to_integer());
            }
        }
        Some(out)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn row_sub_mul(m: &mut IntMatrix, target: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let c = m.cols;
    for j in 0..c {
        let t = q * &m.data[src * c + j];
        m.data[target * c + j] -= t;
    }
}

fn row_swap(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let c = m.cols;
    for j in 0..c {
        m.data.swap(a * c + j, b * c + j);
    }
}

fn row_negate(m: &mut IntMatrix, a: usize) {
    let c = m.cols;
    for j in 0..c {
        let v = std::mem::take(&mut m.data[a * c + j]);
        m.data[a * c + j] = -v;
    }
}

/// Row Hermite normal form: returns `(h, u)` with `u` unimodular and `u * m = h`.
///
/// Pivots are positive and entries above each pivot lie in `[0, pivot)`.
/// Zero rows are collected at the bottom.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivot_row = 0;
    for col in 0..m.cols {
        if pivot_row == m.rows {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below the pivot row
            let best = (pivot_row..m.rows)
                .filter(|&i| !h.get(i, col).is_zero())
                .min_by(|&a, &b| h.get(a, col).abs().cmp(&h.get(b, col).abs()));
            let Some(best) = best else { break };
            row_swap(&mut h, pivot_row, best);
            row_swap(&mut u, pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..m.rows {
                if h.get(i, col).is_zero() {
                    continue;
                }
                let q = h.get(i, col).div_floor(h.get(pivot_row, col));
                row_sub_mul(&mut h, i, pivot_row, &q);
                row_sub_mul(&mut u, i, pivot_row, &q);
                if !h.get(i, col).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(pivot_row, col).is_zero() {
            continue;
        }
        if h.get(pivot_row, col).is_negative() {
            row_negate(&mut h, pivot_row);
            row_negate(&mut u, pivot_row);
        }
        for i in 0..pivot_row {
            let q = h.get(i, col).div_floor(h.get(pivot_row, col));
            row_sub_mul(&mut h, i, pivot_row, &q);
            row_sub_mul(&mut u, i, pivot_row, &q);
        }
        pivot_row += 1;
    }
    (h, u)
}

/// Rows form a basis of the saturated lattice `{v : v * m = 0}`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(m);
    let zero_rows: Vec<usize> = (0..h.rows).filter(|&i| h.row(i).iter().all(Zero::is_zero)).collect();
    u.select_rows(&zero_rows)
}

/// The Gale-dual data of a set of rays: the divisor classes `D_i` in fixed
/// coordinates on the class group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleDual {
    pub ray_count: usize,
    pub ambient_dim: usize,
    pub pic_rank: usize,
    /// `pic_rank x ray_count`; column `i` is the class `D_i`.
    pub class_matrix: IntMatrix,
    /// `ray_count x pic_rank` integer right inverse of `class_matrix`:
    /// column `j` is a torus-invariant divisor whose class is the `j`-th basis vector.
    pub basis_certificate: IntMatrix,
}

impl GaleDual {
    /// Divisor classes `D_i` as i64 vectors.
    pub fn divisor_classes(&self) -> Vec<Vec<i64>> {
        (0..self.ray_count)
            .map(|i| self.class_matrix.column(i).iter().map(|x| x.to_i64().expect("class overflow")).collect())
            .collect()
    }

    /// Class of the torus-invariant divisor `sum a_i D_i`.
    pub fn class_of(&self, a: &[i64]) -> Vec<i64> {
        (0..self.pic_rank)
            .map(|j| {
                let s: BigInt = self.class_matrix.row(j).iter().zip(a).map(|(x, &y)| x * y).sum();
                s.to_i64().expect("class overflow")
            })
            .collect()
    }

    /// A torus-invariant representative `a` with `class_of(a) == class`.
    pub fn representative(&self, class: &[i64]) -> Vec<i64> {
        (0..self.ray_count)
            .map(|i| {
                let s: BigInt = self.basis_certificate.row(i).iter().zip(class).map(|(x, &y)| x * y).sum();
                s.to_i64().expect("representative overflow")
            })
            .collect()
    }
}

pub(crate) fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn gale_dual(rays: &[Vec<i64>]) -> Result<GaleDual, LatticeError> {
    let n = rays.len();
    let d = rays.first().map_or(0, Vec::len);
    for (i, r) in rays.iter().enumerate() {
        if r.len() != d {
            return Err(LatticeError::RaggedRays { index: i, len: r.len(), dim: d });
        }
        if gcd_slice(r) != 1 {
            return Err(LatticeError::NonPrimitive { index: i });
        }
    }
    let rho = IntMatrix::from_i64_rows(rays);
    let rho = if n == 0 { IntMatrix::zeros(0, d) } else { rho };
    let rank = rho.rank();
    if rank < d {
        return Err(LatticeError::NonSpanning { rank, dim: d });
    }
    let k0 = kernel_basis(&rho);
    let (classes, _) = hnf(&k0);
    let r = classes.nrows();
    // section: U * classes^T = [I; 0] because the kernel lattice is saturated
    let (h, u) = hnf(&classes.transpose());
    debug_assert!((0..r).all(|i| (0..r).all(|j| {
        let e = if i == j { BigInt::one() } else { BigInt::zero() };
        *h.get(i, j) == e
    })));
    let top: Vec<usize> = (0..r).collect();
    let certificate = u.select_rows(&top).transpose();
    Ok(GaleDual { ray_count: n, ambient_dim: d, pic_rank: r, class_matrix: classes, basis_certificate: certificate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn is_hnf(h: &IntMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.nrows() {
            let piv = (0..h.ncols()).find(|&j| !h.get(i, j).is_zero());
            match piv {
                None => seen_zero = true,
                Some(p) => {
                    if seen_zero || last_pivot.is_some_and(|lp| p <= lp) || !h.get(i, p).is_positive() {
                        return false;
                    }
                    for k in 0..i {
                        let e = h.get(k, p);
                        if e.is_negative() || e >= h.get(i, p) {
                            return false;
                        }
                    }
                    last_pivot = Some(p);
                }
            }
        }
        true
    }

    #[test]
    fn hnf_identity_and_zero() {
        let id = IntMatrix::identity(2);
        assert_eq!(hnf(&id), (id.clone(), id.clone()));
        let z = IntMatrix::zeros(2, 3);
        let (h, u) = hnf(&z);
        assert!(h.is_zero());
        assert_eq!(u, IntMatrix::identity(2));
    }

    #[test]
    fn hnf_small_example() {
        let a = m(&[&[2, 4], &[1, 3]]);
        let (h, u) = hnf(&a);
        // [[1,3],[0,2]] spans the same row lattice; reducing 3 mod 2 gives the normal form
        assert_eq!(h, m(&[&[1, 1], &[0, 2]]));
        assert_eq!(u.mul(&a), h);
        assert_eq!(u.determinant().abs(), BigInt::one());
    }

    #[test]
    fn hnf_is_idempotent() {
        let a = m(&[&[3, 6, 9, 1], &[4, -2, 0, 7], &[1, 1, 1, 1]]);
        let (h, u) = hnf(&a);
        assert!(is_hnf(&h));
        assert_eq!(u.mul(&a), h);
        let (h2, _) = hnf(&h);
        assert_eq!(h2, h);
    }

    #[test]
    fn kernel_of_column_of_ones() {
        let a = m(&[&[1], &[1], &[1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.nrows(), 2);
        assert!(k.mul(&a).is_zero());
        assert_eq!(k.rank(), 2);
        assert!(kernel_basis(&IntMatrix::identity(3)).nrows() == 0);
        assert_eq!(kernel_basis(&IntMatrix::zeros(3, 2)).nrows(), 3);
    }

    #[test]
    fn kernel_is_saturated() {
        // v * [[2],[4]] = 0 has kernel spanned by (2,-1), not (4,-2)
        let k = kernel_basis(&m(&[&[2], &[4]]));
        assert_eq!(k.nrows(), 1);
        let g = k.row(0).iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        assert_eq!(g, BigInt::one());
    }

    #[test]
    fn gale_dual_projective_plane() {
        let g = gale_dual(&[vec![1, 0], vec![0, 1], vec![-1, -1]]).unwrap();
        assert_eq!(g.pic_rank, 1);
        assert_eq!(g.divisor_classes(), vec![vec![1], vec![1], vec![1]]);
    }

    #[test]
    fn gale_dual_p1xp1() {
        let g = gale_dual(&[vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]).unwrap();
        assert_eq!(g.divisor_classes(), vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]]);
        let a = g.representative(&[2, 3]);
        assert_eq!(g.class_of(&a), vec![2, 3]);
    }

    #[test]
    fn gale_dual_errors() {
        assert_eq!(gale_dual(&[vec![2, 0], vec![0, 1], vec![-1, -1]]), Err(LatticeError::NonPrimitive { index: 0 }));
        assert!(matches!(gale_dual(&[vec![1, 0], vec![-1, 0]]), Err(LatticeError::NonSpanning { rank: 1, dim: 2 })));
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant(), BigInt::one());
        let inv = a.unimodular_inverse().unwrap();
        assert_eq!(inv.mul(&a), IntMatrix::identity(2));
        assert!(m(&[&[2, 0], &[0, 1]]).unimodular_inverse().is_none());
    }
}
