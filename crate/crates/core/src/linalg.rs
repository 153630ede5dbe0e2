//! Dense complex matrices over any [`Real`], with tensor-leg placement and exact-capable elimination.
//!
//! Tensor legs are numbered from 0, leg 0 being the most significant bit of the basis index.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::{CxExt, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Complex::one())
    }

    /// `c` times the identity.
    pub fn scalar(n: usize, c: Complex<R>) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex<R>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Complex<R>>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn map<R2: Real>(&self, f: impl Fn(&Complex<R>) -> Complex<R2>) -> Mat<R2> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Conversion to another real field through double precision.
    pub fn cast<R2: Real>(&self) -> Mat<R2> {
        self.map(|z| Complex::<R2>::from_c64(z.to_c64()))
    }

    pub fn to_c64(&self) -> Mat<f64> {
        self.cast()
    }

    pub fn scale(&self, c: &Complex<R>) -> Self {
        self.map(|z| z.clone() * c.clone())
    }

    /// `self + c·I`.
    pub fn add_identity(&self, c: &Complex<R>) -> Self {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m.data[i * self.cols + i] = m.data[i * self.cols + i].clone() + c.clone();
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn matvec(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(v.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).fold(Complex::zero(), |acc, (a, b)| acc + a.clone() * b.clone())).collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| self[(i / r2, j / c2)].clone() * other[(i % r2, j % c2)].clone())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(CxExt::abs64).fold(0.0, f64::max)
    }

    /// Places an operator on `legs` (in the operator's own tensor order) of an `nlegs`-fold
    /// product of copies of C².
    pub fn embed(&self, legs: &[usize], nlegs: usize) -> Self {
        let k = legs.len();
        let sub = 1usize << k;
        assert!(self.rows == sub && self.cols == sub, "operator does not act on {k} legs");
        assert!(legs.iter().all(|&l| l < nlegs), "leg out of range");
        let dim = 1usize << nlegs;
        let shift = |leg: usize| nlegs - 1 - leg;
        let mask: usize = legs.iter().map(|&l| 1usize << shift(l)).sum();
        let mut out = Self::zeros(dim, dim);
        for col in 0..dim {
            let sub_c = legs.iter().fold(0, |acc, &l| (acc << 1) | ((col >> shift(l)) & 1));
            let rest = col & !mask;
            for sub_r in 0..sub {
                let v = &self.data[sub_r * sub + sub_c];
                if v.is_zero() {
                    continue;
                }
                let mut row = rest;
                for (idx, &l) in legs.iter().enumerate() {
                    if (sub_r >> (k - 1 - idx)) & 1 == 1 {
                        row |= 1 << shift(l);
                    }
                }
                let slot = &mut out.data[row * dim + col];
                *slot = slot.clone() + v.clone();
            }
        }
        out
    }

    /// Partial trace over leg 0.
    pub fn partial_trace_first(&self) -> Self {
        assert!(self.is_square() && self.rows.is_multiple_of(2));
        let d = self.rows / 2;
        Self::from_fn(d, d, |i, j| self[(i, j)].clone() + self[(d + i, d + j)].clone())
    }

    /// Transpose in the tensor factor `leg` only.
    pub fn partial_transpose(&self, leg: usize, nlegs: usize) -> Self {
        assert!(self.is_square() && self.rows == 1 << nlegs);
        let bit = 1usize << (nlegs - 1 - leg);
        let mut out = Self::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let r2 = (r & !bit) | (c & bit);
                let c2 = (c & !bit) | (r & bit);
                out.data[r2 * self.cols + c2] = self.data[r * self.cols + c].clone();
            }
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex<R> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex::<R>::one();
        for k in 0..n {
            let p = pivot_row(&a, k, k);
            if a[(p, k)].is_zero() {
                return Complex::zero();
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let piv = a[(k, k)].clone();
            det = det * piv.clone();
            for i in k + 1..n {
                let f = a[(i, k)].clone() / piv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Solves `self · X = b`.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        if !self.is_square() || b.rows != self.rows {
            return Err(Error::Defect("solve: dimension mismatch".into()));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let p = pivot_row(&a, k, k);
            if negligible(&a[(p, k)], scale, f64::EPSILON * n as f64) {
                return Err(Error::NonGeneric("singular matrix in linear solve".into()));
            }
            a.swap_rows(p, k);
            x.swap_rows(p, k);
            let inv = a[(k, k)].recip();
            for j in 0..n {
                a[(k, j)] = a[(k, j)].clone() * inv.clone();
            }
            for j in 0..x.cols {
                x[(k, j)] = x[(k, j)].clone() * inv.clone();
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
                for j in 0..x.cols {
                    let v = x[(i, j)].clone() - f.clone() * x[(k, j)].clone();
                    x[(i, j)] = v;
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// Right null space by Gauss-Jordan elimination with complete pivoting.
    ///
    /// Pivots of modulus at most `rel_tol` times the largest entry are treated as zero
    /// (exactly zero in exact arithmetic).
    pub fn nullspace(&self, rel_tol: f64) -> Kernel<R> {
        self.nullspace_scaled(rel_tol, self.max_abs())
    }

    /// [`Mat::nullspace`] with pivots judged against an external `scale`, for matrices
    /// that are differences of larger quantities.
    pub fn nullspace_scaled(&self, rel_tol: f64, scale: f64) -> Kernel<R> {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rank = 0;
        let mut smallest_pivot = f64::INFINITY;
        let mut largest_rejected = 0.0;
        while rank < m.min(n) {
            let (mut pi, mut pj, mut best) = (rank, rank, -1.0);
            for i in rank..m {
                for j in rank..n {
                    let v = a[(i, j)].abs64();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if negligible(&a[(pi, pj)], scale, rel_tol) {
                largest_rejected = best / scale.max(f64::MIN_POSITIVE);
                break;
            }
            smallest_pivot = smallest_pivot.min(best / scale);
            a.swap_rows(pi, rank);
            a.swap_cols(pj, rank);
            perm.swap(pj, rank);
            let inv = a[(rank, rank)].recip();
            for j in 0..n {
                a[(rank, j)] = a[(rank, j)].clone() * inv.clone();
            }
            for i in 0..m {
                if i == rank {
                    continue;
                }
                let f = a[(i, rank)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(rank, j)].clone();
                    a[(i, j)] = v;
                }
            }
            rank += 1;
        }
        let basis = (rank..n)
            .map(|k| {
                let mut v = vec![Complex::<R>::zero(); n];
                v[perm[k]] = Complex::one();
                for p in 0..rank {
                    v[perm[p]] = -a[(p, k)].clone();
                }
                v
            })
            .collect();
        Kernel { basis, rank, smallest_pivot, largest_rejected }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

/// Output of [`Mat::nullspace`].
#[derive(Clone, Debug)]
pub struct Kernel<R: Real> {
    pub basis: Vec<Vec<Complex<R>>>,
    pub rank: usize,
    /// Smallest accepted pivot relative to the largest entry.
    pub smallest_pivot: f64,
    /// Largest rejected pivot relative to the largest entry.
    pub largest_rejected: f64,
}

fn pivot_row<R: Real>(a: &Mat<R>, from: usize, col: usize) -> usize {
    let mut best = from;
    let mut best_v = -1.0;
    for i in from..a.rows {
        let v = a[(i, col)].abs64();
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

fn negligible<R: Real>(z: &Complex<R>, scale: f64, rel: f64) -> bool {
    if R::EXACT {
        z.is_zero()
    } else {
        z.abs64() <= rel * scale
    }
}

impl<R: Real> Index<(usize, usize)> for Mat<R> {
    type Output = Complex<R>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for Mat<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Real> Mul for &Mat<R> {
    type Output = Mat<R>;

    fn mul(self, rhs: &Mat<R>) -> Mat<R> {
        assert_eq!(self.cols, rhs.rows, "matmul dimension");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + j];
                    if b.is_zero() {
                        continue;
                    }
                    let slot = &mut out.data[i * rhs.cols + j];
                    *slot = slot.clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }
}

impl<R: Real> Add for &Mat<R> {
    type Output = Mat<R>;

    fn add(self, rhs: &Mat<R>) -> Mat<R> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add dimension");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect() }
    }
}

impl<R: Real> Sub for &Mat<R> {
    type Output = Mat<R>;

    fn sub(self, rhs: &Mat<R>) -> Mat<R> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub dimension");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect() }
    }
}

/// Product of a sequence of square matrices, left to right.
pub fn product<'a, R: Real>(dim: usize, factors: impl IntoIterator<Item = &'a Mat<R>>) -> Mat<R> {
    factors.into_iter().fold(Mat::identity(dim), |acc, f| &acc * f)
}

/// Max-abs entry difference normalized by the max-abs of the compared matrices.
pub fn residual<R: Real>(a: &Mat<R>, b: &Mat<R>) -> f64 {
    normalized(&(a - b).max_abs(), a.max_abs().max(b.max_abs()))
}

/// Residual of `AB = C`, normalized by `max(‖A‖‖B‖, ‖C‖)` so that rounding in the product is
/// measured against the size of its factors.
pub fn product_residual<R: Real>(a: &Mat<R>, b: &Mat<R>, c: &Mat<R>) -> f64 {
    normalized(&(&(a * b) - c).max_abs(), (a.max_abs() * b.max_abs()).max(c.max_abs()))
}

/// [`residual`] for vectors.
pub fn vec_residual<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).abs64()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(CxExt::abs64).fold(0.0, f64::max);
    normalized(&diff, scale)
}

/// Residual of `AB = BA`.
pub fn commutator_residual<R: Real>(a: &Mat<R>, b: &Mat<R>) -> f64 {
    residual(&(a * b), &(b * a))
}

fn normalized(diff: &f64, scale: f64) -> f64 {
    if *diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Eigenvalues of a double-precision matrix via the complex Schur form.
pub fn eigenvalues(m: &Mat<f64>) -> Result<Vec<Complex64>> {
    let n = m.rows();
    let dm = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    let schur = nalgebra::Schur::try_new(dm, f64::EPSILON, 10_000).ok_or_else(|| Error::Defect("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Singular values of a double-precision matrix, largest first.
pub fn singular_values(m: &Mat<f64>) -> Vec<f64> {
    let dm = nalgebra::DMatrix::<Complex64>::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    let mut s: Vec<f64> = dm.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Ratio of the largest to the smallest singular value; infinite for a singular matrix.
pub fn condition_number(m: &Mat<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Largest distance between two eigenvalue lists after greedy nearest matching,
/// normalized by the largest modulus.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (best, d) = b.iter().enumerate().filter(|(k, _)| !used[*k]).map(|(k, y)| (k, (x - y).norm())).fold((usize::MAX, f64::INFINITY), |acc, c| {
            if c.1 < acc.1 {
                c
            } else {
                acc
            }
        });
        used[best] = true;
        worst = worst.max(d);
    }
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    normalized(&worst, scale)
}

/// Sorts eigenvalues by real part, then imaginary part.
pub fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cx;
    use num_rational::BigRational;

    fn m2(a: [[f64; 2]; 2]) -> Mat<f64> {
        Mat::from_fn(2, 2, |i, j| cx(a[i][j], 0.0))
    }

    #[test]
    fn embed_single_leg_matches_kron() {
        let x = m2([[1.0, 2.0], [3.0, 4.0]]);
        let i2 = Mat::<f64>::identity(2);
        assert_eq!(x.embed(&[0], 2), x.kron(&i2));
        assert_eq!(x.embed(&[1], 2), i2.kron(&x));
    }

    #[test]
    fn embed_reversed_legs_conjugates_by_flip() {
        let y = Mat::<f64>::from_fn(4, 4, |i, j| cx((i * 4 + j) as f64, 0.0));
        let flip = Mat::<f64>::from_fn(4, 4, |i, j| {
            let swapped = ((i & 1) << 1) | (i >> 1);
            if swapped == j {
                cx(1.0, 0.0)
            } else {
                cx(0.0, 0.0)
            }
        });
        assert_eq!(y.embed(&[1, 0], 2), &(&flip * &y) * &flip);
    }

    #[test]
    fn partial_trace_of_kron() {
        let a = m2([[1.0, 2.0], [3.0, 5.0]]);
        let b = m2([[7.0, 0.5], [1.0, -2.0]]);
        assert_eq!(a.kron(&b).partial_trace_first(), b.scale(&cx(6.0, 0.0)));
    }

    #[test]
    fn inverse_and_det() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| cx(1.0 / (1.0 + i as f64 + j as f64), (i * j) as f64));
        let inv = a.inverse().unwrap();
        assert!(residual(&(&a * &inv), &Mat::identity(3)) < 1e-13);
        let d = a.det() * inv.det();
        assert!((d - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_nullspace() {
        let a = Mat::<BigRational>::from_fn(2, 3, |i, j| cx((i + 1) as f64 * (j + 1) as f64, 0.0));
        let k = a.nullspace(0.0);
        assert_eq!(k.rank, 1);
        assert_eq!(k.basis.len(), 2);
        for v in &k.basis {
            assert!(a.matvec(v).iter().all(|z| z.is_zero()));
        }
    }

    #[test]
    fn singular_solve_is_refused() {
        let a = m2([[1.0, 2.0], [2.0, 4.0]]);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i <= j { cx((i + j + 1) as f64, 0.5) } else { cx(0.0, 0.0) });
        let mut ev = eigenvalues(&a).unwrap();
        sort_spectrum(&mut ev);
        let mut expected = vec![cx(1.0, 0.5), cx(3.0, 0.5), cx(5.0, 0.5)];
        sort_spectrum(&mut expected);
        assert!(spectrum_distance(&ev, &expected) < 1e-12);
    }
}
