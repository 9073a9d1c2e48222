//! Dense complex matrices and the handful of factorizations the workbench
//! needs: LU with partial pivoting, Householder QR, one-sided Jacobi SVD.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut, Range};

use num_traits::Zero;

use crate::{Error, Result, C64};

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from real row slices (handy in tests).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn column_vector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
    }

    pub fn row_vector(v: &[C64]) -> Self {
        Self::from_fn(1, v.len(), |_, j| v[j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Matrix {
        let (r0, c0) = (rows.start, cols.start);
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)])
    }

    /// Submatrix on arbitrary row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Matrix) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Matrix {
        assert!(self.is_square());
        let mut m = self.scale(C64::new(-1.0, 0.0));
        for i in 0..self.rows {
            m[(i, i)] += C64::new(1.0, 0.0);
        }
        m
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn det(&self) -> C64 {
        self.log_det().value()
    }

    pub fn log_det(&self) -> LogDet {
        assert!(self.is_square(), "determinant of a non-square matrix");
        Lu::new(self).log_det()
    }

    /// Solves `self * X = rhs`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        Lu::new(self).solve(rhs)
    }

    /// Inverse via solves against the identity columns.
    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.rows))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(self)
    }

    /// 2-norm condition number; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let sv = singular_values(self);
        match (sv.first(), sv.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }
}

/// Determinant stored as `exp(log_abs) * phase` so large truncations never
/// overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    /// Unit-modulus phase factor (`1` for the zero determinant).
    pub phase: C64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        log_abs: 0.0,
        phase: C64 { re: 1.0, im: 0.0 },
    };

    pub fn from_value(z: C64) -> LogDet {
        let r = z.norm();
        if r == 0.0 {
            LogDet {
                log_abs: f64::NEG_INFINITY,
                phase: C64::new(1.0, 0.0),
            }
        } else {
            LogDet {
                log_abs: r.ln(),
                phase: z / r,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> C64 {
        if self.is_zero() {
            C64::zero()
        } else {
            self.phase * self.log_abs.exp()
        }
    }

    pub fn mul(self, other: LogDet) -> LogDet {
        let phase = self.phase * other.phase;
        LogDet {
            log_abs: self.log_abs + other.log_abs,
            phase: phase / phase.norm(),
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn new(a: &Matrix) -> Lu {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                let (top, bottom) = lu.data.split_at_mut(i * n);
                let krow = &top[k * n + k + 1..k * n + n];
                let irow = &mut bottom[k + 1..n];
                for (x, y) in irow.iter_mut().zip(krow) {
                    *x -= f * y;
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn log_det(&self) -> LogDet {
        if self.singular {
            return LogDet::from_value(C64::zero());
        }
        let mut acc = LogDet::ONE;
        if self.swaps % 2 == 1 {
            acc.phase = -acc.phase;
        }
        for i in 0..self.n {
            acc = acc.mul(LogDet::from_value(self.lu[(i, i)]));
        }
        acc
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.singular {
            return Err(Error::Singular("LU solve"));
        }
        assert_eq!(rhs.rows, self.n);
        let n = self.n;
        let mut x = Matrix::zeros(n, rhs.cols);
        for c in 0..rhs.cols {
            let mut y: Vec<C64> = (0..n).map(|i| rhs[(self.perm[i], c)]).collect();
            for i in 0..n {
                let mut s = y[i];
                for (k, yk) in y.iter().enumerate().take(i) {
                    s -= self.lu[(i, k)] * yk;
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * y[k];
                }
                y[i] = s / self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, c)] = y[i];
            }
        }
        Ok(x)
    }
}

/// Householder reflector data for one column.
struct Reflector {
    v: Vec<C64>,
    tau: f64,
}

/// Builds `H = I - tau v v*` mapping `x` onto a multiple of `e_0`.
fn householder(x: &[C64]) -> Reflector {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut v = x.to_vec();
    if norm == 0.0 {
        return Reflector { v, tau: 0.0 };
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    v[0] = x0 + phase * norm;
    let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Reflector {
        v,
        tau: 2.0 / vnorm2,
    }
}

/// Applies a reflector acting on rows `offset..` of `a`, from the left.
fn apply_left(a: &mut Matrix, refl: &Reflector, offset: usize, cols: Range<usize>) {
    if refl.tau == 0.0 {
        return;
    }
    for j in cols {
        let mut s = C64::zero();
        for (k, vk) in refl.v.iter().enumerate() {
            s += vk.conj() * a[(offset + k, j)];
        }
        s *= refl.tau;
        for (k, vk) in refl.v.iter().enumerate() {
            let d = vk * s;
            a[(offset + k, j)] -= d;
        }
    }
}

/// Householder QR of a tall matrix, returning the full unitary `Q`
/// (`rows x rows`) and the triangular factor.
pub fn qr_full(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut reflectors = Vec::new();
    for k in 0..n.min(m) {
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let refl = householder(&x);
        apply_left(&mut r, &refl, k, k..n);
        reflectors.push(refl);
    }
    let mut q = Matrix::identity(m);
    for (k, refl) in reflectors.iter().enumerate().rev() {
        apply_left(&mut q, refl, k, 0..m);
    }
    (q, r)
}

/// Orthonormal basis (as columns) of the kernel of a full-row-rank `N x M`
/// matrix, `N < M`.
pub fn null_space_basis(r: &Matrix) -> Matrix {
    let (n, m) = (r.rows, r.cols);
    let (q, _) = qr_full(&r.adjoint());
    q.block(0..m, n..m)
}

/// Singular values in decreasing order (one-sided Jacobi on the taller
/// orientation).
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let work = if a.rows >= a.cols { a.clone() } else { a.adjoint() };
    let mut cols: Vec<Vec<C64>> = (0..work.cols).map(|j| work.column(j)).collect();
    jacobi_orthogonalize(&mut cols);
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

fn jacobi_orthogonalize(cols: &mut [Vec<C64>]) {
    let n = cols.len();
    const EPS: f64 = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (a, b) = (&cols[p], &cols[q]);
                    let alpha: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = b.iter().map(|z| z.norm_sqr()).sum();
                    let gamma: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (a, b) = (&mut lo[p], &mut hi[0]);
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let xp = *x * c - *y * e.conj() * s;
                    let yq = *x * e * s + *y * c;
                    *x = xp;
                    *y = yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Count of singular values strictly above `threshold`.
///
/// Large matrices of small numerical rank go through a column-pivoted
/// Householder QR first; the pivoting stops once the unreduced block is far
/// below the threshold, and only the leading rows enter the Jacobi SVD.
pub fn numerical_rank(a: &Matrix, threshold: f64) -> usize {
    let (m, n) = (a.rows, a.cols);
    if m == 0 || n == 0 {
        return 0;
    }
    let mut r = a.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let stop = 1e-3 * threshold;
    let mut k = 0;
    while k < m.min(n) {
        let norms: Vec<f64> = (k..n)
            .map(|j| (k..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>())
            .collect();
        let rest: f64 = norms.iter().sum::<f64>().sqrt();
        if rest <= stop {
            break;
        }
        let (best, _) = norms
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let piv = k + best;
        if piv != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, piv)];
                r[(i, piv)] = tmp;
            }
            order.swap(k, piv);
        }
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let refl = householder(&x);
        apply_left(&mut r, &refl, k, k..n);
        k += 1;
    }
    if k == 0 {
        return 0;
    }
    let lead = r.block(0..k, 0..n);
    singular_values(&lead)
        .into_iter()
        .filter(|&s| s > threshold)
        .count()
}

/// Largest singular value estimated by power iteration on `A* A`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    let n = a.cols;
    if n == 0 || a.rows == 0 {
        return 0.0;
    }
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64) * 1e-3, 0.5 / (1.0 + i as f64)))
        .collect();
    let adj = a.adjoint();
    let mut est = 0.0;
    for _ in 0..200 {
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        let av = a.matvec(&v);
        let new_est = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = adj.matvec(&av);
        if (new_est - est).abs() <= 1e-14 * new_est {
            return new_est;
        }
        est = new_est;
    }
    est
}
