//! Truncated Toeplitz and Hankel operators, the Borodin-Okounkov kernel and
//! finite Fredholm determinants.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::domain;
use crate::linalg::{null_space_basis, LogDet, Matrix};
use crate::series::{LaurentSeries, SymbolFactorization};
use crate::{Error, Result, C64};

/// An operator compressed to `span(e_0, ..., e_{M-1})`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub entries: Matrix,
    pub label: String,
}

impl TruncatedOperator {
    pub fn new(entries: Matrix, label: &str) -> Self {
        TruncatedOperator {
            entries,
            label: String::from(label),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.rows()
    }
}

/// `det(I - op)` on a tail block, with a doubling-based convergence proxy.
#[derive(Clone, Copy, Debug)]
pub struct FredholmResult {
    pub value: C64,
    pub log_det: LogDet,
    pub truncation_size: usize,
    /// `|det on the full block - det on its first half|`.
    pub doubling_delta: f64,
}

/// `rows x cols` Toeplitz block `f_{i-j}`.
pub fn toeplitz_rect(f: &LaurentSeries, rows: usize, cols: usize) -> Result<Matrix> {
    f.require(1 - cols as i64, rows as i64 - 1)?;
    Ok(Matrix::from_fn(rows, cols, |i, j| f.coeff(i as i64 - j as i64)))
}

/// `rows x cols` Hankel block `f_{i+j+1}`.
pub fn hankel_rect(f: &LaurentSeries, rows: usize, cols: usize) -> Result<Matrix> {
    f.require(1, (rows + cols) as i64 - 1)?;
    Ok(Matrix::from_fn(rows, cols, |i, j| f.coeff((i + j + 1) as i64)))
}

pub fn toeplitz_matrix(f: &LaurentSeries, m: usize) -> Result<TruncatedOperator> {
    Ok(TruncatedOperator::new(toeplitz_rect(f, m, m)?, "T"))
}

pub fn hankel_matrix(f: &LaurentSeries, m: usize) -> Result<TruncatedOperator> {
    Ok(TruncatedOperator::new(hankel_rect(f, m, m)?, "H"))
}

/// `K = H(b) H(c~)` on `M x M`, with the inner sum also cut at `M`.
pub fn bogc_kernel(fact: &SymbolFactorization, m: usize) -> Result<TruncatedOperator> {
    let k = kernel_block(fact, m, m)?;
    Ok(TruncatedOperator::new(k, "K"))
}

/// `K` on `size x size` with the inner Hankel sum cut at `inner`.
pub fn kernel_block(fact: &SymbolFactorization, size: usize, inner: usize) -> Result<Matrix> {
    let hb = hankel_rect(&fact.b, size, inner)?;
    let hc = hankel_rect(&fact.c_tilde, inner, size)?;
    Ok(hb.matmul(&hc))
}

pub fn fredholm_det(op: &TruncatedOperator, row_col_start: usize) -> FredholmResult {
    let m = op.size();
    assert!(row_col_start < m, "tail start beyond the truncation");
    let tail = op.entries.block(row_col_start..m, row_col_start..m);
    let log_det = tail.identity_minus().log_det();
    let half = (m - row_col_start) / 2;
    let half_det = tail.block(0..half, 0..half).identity_minus().det();
    let value = log_det.value();
    FredholmResult {
        value,
        log_det,
        truncation_size: m - row_col_start,
        doubling_delta: (value - half_det).norm(),
    }
}

/// Plain `N x N` Toeplitz determinant `det[phi_{i-j}]`.
pub fn toeplitz_det(phi: &LaurentSeries, n: usize) -> Result<C64> {
    Ok(toeplitz_rect(phi, n, n)?.det())
}

/// Cached truncation of one symbol: `T(phi_+)`, `T(phi_-)` and `K`.
#[derive(Clone, Debug)]
pub struct KernelContext {
    pub fact: SymbolFactorization,
    pub m: usize,
    pub t_plus: Matrix,
    pub t_minus: Matrix,
    pub k: Matrix,
}

impl KernelContext {
    pub fn new(fact: &SymbolFactorization, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain("truncation size must be positive"));
        }
        Ok(KernelContext {
            fact: fact.clone(),
            m,
            t_plus: toeplitz_rect(&fact.phi_plus, m, m)?,
            t_minus: toeplitz_rect(&fact.phi_minus, m, m)?,
            k: kernel_block(fact, m, m)?,
        })
    }

    /// `A = I - K`.
    pub fn a(&self) -> Matrix {
        self.k.identity_minus()
    }
}

/// Max-norm of `P[T(phi) - G T(phi_+) (I-K)^{-1} T(phi_-)]P` on the leading
/// `M/2` block.
pub fn verify_wh_identity(fact: &SymbolFactorization, m: usize) -> Result<f64> {
    if 2 * m > fact.truncation_order + 1 {
        return Err(domain("verify_wh_identity needs M <= half_width / 2"));
    }
    let ctx = KernelContext::new(fact, m)?;
    let t = toeplitz_rect(&fact.phi, m, m)?;
    let x = ctx
        .a()
        .solve(&ctx.t_minus)
        .map_err(|_| Error::Singular("I - K in the Wiener-Hopf identity"))?;
    let rhs = ctx.t_plus.matmul(&x).scale(fact.geometric_mean);
    let h = m / 2;
    Ok(t.block(0..h, 0..h).max_abs_diff(&rhs.block(0..h, 0..h)))
}

pub fn szego_z(fact: &SymbolFactorization) -> C64 {
    fact.szego_z
}

fn is_partition_of(u: &[usize], v: &[usize], n: usize) -> bool {
    let mut seen = alloc::vec![false; n];
    for &i in u.iter().chain(v) {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    seen.into_iter().all(|s| s)
}

/// `|det(A^{-1}[U,U]) - det(A[V,V]) / det(A)|` for complementary index sets.
pub fn jacobi_minor_check(a: &Matrix, u: &[usize], v: &[usize]) -> Result<f64> {
    let n = a.rows();
    if !a.is_square() || !is_partition_of(u, v, n) {
        return Err(domain("U and V must partition the index set of a square matrix"));
    }
    let inv = a.inverse()?;
    let lhs = inv.select(u, u).det();
    let rhs = a.select(v, v).det() / a.det();
    Ok((lhs - rhs).norm())
}

/// Oblique form: `det(R A^{-1} C)` against
/// `det(A)^{-1} det(RC) det(I - Pi_V K)|_{Ker R}` with `K = I - A`.
pub fn jacobi_oblique_check(a: &Matrix, r: &Matrix, c: &Matrix) -> Result<f64> {
    let (lhs, rhs) = jacobi_oblique_sides(a, r, c)?;
    Ok((lhs - rhs).norm())
}

/// Both sides of the oblique Jacobi identity.
pub fn jacobi_oblique_sides(a: &Matrix, r: &Matrix, c: &Matrix) -> Result<(C64, C64)> {
    let n = a.rows();
    if !a.is_square() || r.cols() != n || c.rows() != n || r.rows() != c.cols() {
        return Err(domain("shape mismatch in the oblique Jacobi check"));
    }
    let gamma = r.matmul(c);
    let lu_a = crate::linalg::Lu::new(a);
    if lu_a.is_singular() {
        return Err(Error::Singular("A in the oblique Jacobi check"));
    }
    let lhs = r.matmul(&lu_a.solve(c)?).det();
    let k = a.identity_minus();
    let pi_k = oblique_apply(&gamma, r, c, &k)?;
    let v = null_space_basis(r);
    let restricted = v.adjoint().matmul(&pi_k).matmul(&v);
    let tail = restricted.identity_minus().det();
    let rhs = gamma.det() * tail / lu_a.log_det().value();
    Ok((lhs, rhs))
}

/// `Pi_V X = X - C Gamma^{-1} R X`.
pub fn oblique_apply(gamma: &Matrix, r: &Matrix, c: &Matrix, x: &Matrix) -> Result<Matrix> {
    let rx = r.matmul(x);
    let g_rx = gamma.solve(&rx).map_err(|_| Error::Singular("chart Gram matrix"))?;
    Ok(x.sub(&c.matmul(&g_rx)))
}

/// Collects `(coeff(k))_{k in range}` of a series as a vector.
pub fn coefficient_vector(f: &LaurentSeries, range: core::ops::Range<i64>) -> Vec<C64> {
    range.map(|k| f.coeff(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_rational_factor, series_log_split, Side, Symbol};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(n, m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn bessel_i(k: i64, x: f64) -> f64 {
        let k = k.unsigned_abs() as i32;
        let h = x / 2.0;
        let mut term = h.powi(k);
        for j in 1..=k {
            term /= j as f64;
        }
        let mut s = 0.0;
        for m in 0..60 {
            s += term;
            term *= h * h / ((m + 1) as f64 * (m + 1 + k) as f64);
        }
        s
    }

    #[test]
    fn toeplitz_of_simple_symbols() {
        let t1 = toeplitz_matrix(&LaurentSeries::one(), 5).unwrap();
        assert_eq!(t1.entries, Matrix::identity(5));
        let s = toeplitz_matrix(&LaurentSeries::monomial(1), 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(s.entries[(i, j)], c(want));
            }
        }
        let fact = series_log_split(&Symbol::exponential(&[0.3]), 32).unwrap();
        let t = toeplitz_matrix(&fact.phi, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = bessel_i(i as i64 - j as i64, 0.6);
                assert!((t.entries[(i, j)].re - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn toeplitz_refuses_short_clipped_window() {
        let fact = series_log_split(&Symbol::exponential(&[0.3]), 8).unwrap();
        assert!(toeplitz_matrix(&fact.phi, 10).is_err());
        assert!(hankel_matrix(&fact.b, 5).is_err());
    }

    #[test]
    fn hankel_of_simple_symbols() {
        assert!(hankel_matrix(&LaurentSeries::one(), 4).unwrap().entries.max_abs() == 0.0);
        let h = hankel_matrix(&LaurentSeries::monomial(1), 3).unwrap();
        assert_eq!(h.entries[(0, 0)], c(1.0));
        assert_eq!(h.entries.frobenius(), 1.0);
    }

    #[test]
    fn hankel_of_b_matches_convolution_oracle() {
        // b = exp(t (1/z - z)) = sum_n J_n(2t)(-z)^n; oracle by products of
        // the two exponential series.
        let t = 0.3;
        let fact = series_log_split(&Symbol::exponential(&[t]), 64).unwrap();
        let h = hankel_matrix(&fact.b, 8).unwrap();
        let fac = |n: u32| (1..=n).map(|x| x as f64).product::<f64>();
        let coef = |n: i64| -> f64 {
            // sum_{p - q = n} t^p/p! * (-t)^q/q!, p, q >= 0 (z^p from exp(-tz) has sign)
            let mut s = 0.0;
            for q in 0..40u32 {
                let p = n + q as i64;
                if p < 0 {
                    continue;
                }
                let p = p as u32;
                s += (-t).powi(p as i32) / fac(p) * t.powi(q as i32) / fac(q);
            }
            s
        };
        for i in 0..8 {
            for j in 0..8 {
                let want = coef((i + j + 1) as i64);
                assert!((h.entries[(i, j)].re - want).abs() < 1e-15, "{i},{j}");
                let sign = if (i + j + 1) % 2 == 0 { 1.0 } else { -1.0 };
                assert!(sign * want >= -1e-300);
            }
        }
    }

    #[test]
    fn kernel_trivial_and_symmetric() {
        let one = series_log_split(&Symbol::exponential(&[]), 16).unwrap();
        assert_eq!(bogc_kernel(&one, 8).unwrap().entries.max_abs(), 0.0);
        let f = series_log_split(&Symbol::exponential(&[0.2, 0.05]), 64).unwrap();
        let k = bogc_kernel(&f, 32).unwrap().entries;
        assert!(k.max_abs_diff(&k.transpose()) < 1e-14);
    }

    #[test]
    fn fredholm_of_simple_operators() {
        let z = TruncatedOperator::new(Matrix::zeros(6, 6), "0");
        assert_eq!(fredholm_det(&z, 0).value, c(1.0));
        let mut d = Matrix::zeros(5, 5);
        d[(0, 0)] = c(0.4);
        let r = fredholm_det(&TruncatedOperator::new(d, "diag"), 0);
        assert!((r.value - c(0.6)).norm() < 1e-15);
    }

    #[test]
    fn strong_szego_for_bessel() {
        let f = series_log_split(&Symbol::exponential(&[0.3]), 128).unwrap();
        let k = bogc_kernel(&f, 64).unwrap();
        let det = fredholm_det(&k, 0).value;
        assert!((det - c((-0.09f64).exp())).norm() < 1e-9);
        assert!(((det * szego_z(&f)) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn doubling_delta_shrinks() {
        let f = series_log_split(&Symbol::exponential(&[0.3, 0.1]), 128).unwrap();
        let d8 = fredholm_det(&bogc_kernel(&f, 8).unwrap(), 0).doubling_delta;
        let d16 = fredholm_det(&bogc_kernel(&f, 16).unwrap(), 0).doubling_delta;
        assert!(d16 * 10.0 <= d8, "{d8} {d16}");
    }

    #[test]
    fn triangular_factors() {
        for sym in [
            Symbol::exponential(&[0.3]),
            Symbol::rational_real(&[0.2], &[0.3, 0.5]),
        ] {
            let f = series_log_split(&sym, 64).unwrap();
            let ctx = KernelContext::new(&f, 16).unwrap();
            for i in 0..16 {
                assert_eq!(ctx.t_plus[(i, i)], c(1.0));
                assert_eq!(ctx.t_minus[(i, i)], c(1.0));
                for j in i + 1..16 {
                    assert!(ctx.t_plus[(i, j)].is_zero());
                    assert!(ctx.t_minus[(j, i)].is_zero());
                }
            }
        }
    }

    #[test]
    fn bogc_identity_small() {
        for sym in [
            Symbol::exponential(&[0.3]),
            Symbol::exponential(&[0.2, 0.05]),
            Symbol::rational_real(&[0.2, -0.3], &[0.3, 0.5]),
        ] {
            let f = series_log_split(&sym, 256).unwrap();
            let k = bogc_kernel(&f, 96).unwrap();
            for n in 1..=6 {
                let d = toeplitz_det(&f.phi, n).unwrap();
                let rhs = f.geometric_mean.powi(n as i32) * f.szego_z * fredholm_det(&k, n).value;
                assert!((d - rhs).norm() <= 1e-10 * d.norm(), "{sym:?} N={n}");
            }
        }
    }

    #[test]
    fn wiener_hopf_residuals() {
        let one = series_log_split(&Symbol::exponential(&[]), 32).unwrap();
        assert_eq!(verify_wh_identity(&one, 16).unwrap(), 0.0);
        let f = series_log_split(&Symbol::exponential(&[0.3]), 128).unwrap();
        assert!(verify_wh_identity(&f, 64).unwrap() <= 1e-9);
        let r = series_log_split(&Symbol::rational_real(&[], &[0.3, 0.5]), 128).unwrap();
        assert!(verify_wh_identity(&r, 64).unwrap() <= 1e-9);
    }

    #[test]
    fn rational_minus_gives_zero_kernel() {
        let r = series_log_split(&Symbol::rational_real(&[], &[0.3, 0.5]), 32).unwrap();
        assert_eq!(bogc_kernel(&r, 8).unwrap().entries.max_abs(), 0.0);
        let m = make_rational_factor(&[c(0.3), c(0.5)], Side::Minus, 32).unwrap();
        assert_eq!(r.phi_minus, m);
    }

    #[test]
    fn jacobi_minor_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id = Matrix::identity(4);
        assert!(jacobi_minor_check(&id, &[0, 1], &[2, 3]).unwrap() < 1e-15);
        let a = random(6, 6, &mut rng).add(&Matrix::identity(6).scale(c(2.0)));
        assert!(jacobi_minor_check(&a, &[1, 4], &[0, 2, 3, 5]).unwrap() <= 1e-10);
        assert!(jacobi_minor_check(&a, &[1, 4], &[0, 2, 3]).is_err());
        let r = random(2, 6, &mut rng);
        let cm = random(6, 2, &mut rng);
        let (lhs, rhs) = jacobi_oblique_sides(&a, &r, &cm).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm(), "{lhs} {rhs}");
    }
}
