//! Tilted charts, tilted Toeplitz minors and their Fredholm representation.
//!
//! For column tilts `xi_j` (analytic in the disk) and row tilts `theta_i`
//! (analytic outside it) the chart maps are `R = Theta T(phi_+)` and
//! `C = T(phi_-) Xi P_N`. The tilted minor then factors as
//! `G^N Z det(Gamma) det(I - Pi_V K)|_{Ker R}`, which this module evaluates
//! two ways: on `Ker R` through an orthonormal basis, and on the fixed tail
//! `Q_N H` through the conjugation `J_N = Q - P B^{-1} R Q`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::domain;
use crate::linalg::{null_space_basis, numerical_rank, spectral_norm, LogDet, Matrix};
use crate::operators::{fredholm_det, oblique_apply, KernelContext, TruncatedOperator};
use crate::series::{LaurentSeries, SymbolFactorization};
use crate::{Error, Result, C64};

/// Condition numbers above this reject a chart.
pub const DEGENERATE_COND: f64 = 1e12;
/// Relative disagreement between the two determinant paths that counts as a bug.
pub const CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct TiltFamily {
    pub xi: Vec<LaurentSeries>,
    pub theta: Vec<LaurentSeries>,
    pub d_xi: usize,
    pub d_theta: usize,
}

impl TiltFamily {
    pub fn new(xi: Vec<LaurentSeries>, theta: Vec<LaurentSeries>) -> Result<Self> {
        if xi.len() != theta.len() {
            return Err(domain("tilt family needs as many row tilts as column tilts"));
        }
        for x in &xi {
            let negative = x.support().is_some_and(|(lo, _)| lo < 0);
            if negative || x.is_clipped_below() {
                return Err(domain("column tilts must not carry negative exponents"));
            }
        }
        for t in &theta {
            let positive = t.support().is_some_and(|(_, hi)| hi > 0);
            if positive || t.is_clipped_above() {
                return Err(domain("row tilts must not carry positive exponents"));
            }
        }
        let d_xi = xi.iter().map(|x| x.hi().max(0) as usize).max().unwrap_or(0);
        let d_theta = theta.iter().map(|t| (-t.lo()).max(0) as usize).max().unwrap_or(0);
        Ok(TiltFamily {
            xi,
            theta,
            d_xi,
            d_theta,
        })
    }

    /// All tilts equal to one.
    pub fn ones(n: usize) -> Self {
        TiltFamily {
            xi: vec![LaurentSeries::one(); n],
            theta: vec![LaurentSeries::one(); n],
            d_xi: 0,
            d_theta: 0,
        }
    }

    /// `xi_j = z^{a_j}`, `theta_i = z^{-b_i}`.
    pub fn monomials(a: &[usize], b: &[usize]) -> Result<Self> {
        let xi = a.iter().map(|&k| LaurentSeries::monomial(k as i64)).collect();
        let theta = b.iter().map(|&k| LaurentSeries::monomial(-(k as i64))).collect();
        Self::new(xi, theta)
    }

    /// Column tilts only; rows are one.
    pub fn columns(xi: Vec<LaurentSeries>) -> Result<Self> {
        let n = xi.len();
        Self::new(xi, vec![LaurentSeries::one(); n])
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// Degree bound that polynomial tilts impose on the truncation size.
    /// Clipped (power-series) tilts are cut at the truncation instead.
    fn polynomial_reach(&self) -> usize {
        let dx = self
            .xi
            .iter()
            .filter(|x| !x.is_clipped_above())
            .map(|x| x.hi().max(0) as usize)
            .max()
            .unwrap_or(0);
        let dt = self
            .theta
            .iter()
            .filter(|t| !t.is_clipped_below())
            .map(|t| (-t.lo()).max(0) as usize)
            .max()
            .unwrap_or(0);
        dx.max(dt)
    }
}

/// The finite chart `(R, C)` with its Gram matrix.
#[derive(Clone, Debug)]
pub struct Chart {
    pub r: Matrix,
    pub c: Matrix,
    pub gamma: Matrix,
    /// `R` restricted to the first `N` coordinates.
    pub b: Matrix,
    pub cond_gamma: f64,
    pub cond_b: f64,
}

impl Chart {
    pub fn from_maps(r: Matrix, c: Matrix) -> Result<Chart> {
        let n = r.rows();
        if c.cols() != n || c.rows() != r.cols() || n > r.cols() {
            return Err(domain("chart maps have incompatible shapes"));
        }
        let gamma = r.matmul(&c);
        let b = r.block(0..n, 0..n);
        let cond_gamma = gamma.condition_number();
        let cond_b = b.condition_number();
        if !(cond_gamma <= DEGENERATE_COND) {
            return Err(Error::Degenerate {
                what: "Gamma",
                cond: cond_gamma,
            });
        }
        Ok(Chart {
            r,
            c,
            gamma,
            b,
            cond_gamma,
            cond_b,
        })
    }

    /// `R = C = P_N`, the coordinate chart of the untilted identity.
    pub fn coordinate(n: usize, m: usize) -> Chart {
        let r = Matrix::from_fn(n, m, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::zero() });
        Chart::from_maps(r.clone(), r.transpose()).expect("coordinate chart is well conditioned")
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }

    pub fn m(&self) -> usize {
        self.r.cols()
    }

    /// `Pi_V = I - C Gamma^{-1} R` as an `M x M` matrix.
    pub fn pi_v(&self) -> Result<Matrix> {
        oblique_apply(&self.gamma, &self.r, &self.c, &Matrix::identity(self.m()))
    }
}

/// `Theta` as an `N x M` matrix: row `i` carries `theta_i(-k)` at column `i + k`.
pub fn theta_matrix(tilts: &TiltFamily, m: usize) -> Matrix {
    let n = tilts.n();
    let mut t = Matrix::zeros(n, m);
    for (i, th) in tilts.theta.iter().enumerate() {
        for e in th.lo()..=th.hi().min(0) {
            let col = i as i64 - e;
            if col >= 0 && (col as usize) < m {
                t[(i, col as usize)] = th.coeff(e);
            }
        }
    }
    t
}

/// First `N` columns of `Xi`: column `j` carries `xi_j(k)` at row `j + k`.
pub fn xi_matrix(tilts: &TiltFamily, m: usize) -> Matrix {
    let n = tilts.n();
    let mut x = Matrix::zeros(m, n);
    for (j, xi) in tilts.xi.iter().enumerate() {
        for e in xi.lo().max(0)..=xi.hi() {
            let row = j as i64 + e;
            if (row as usize) < m {
                x[(row as usize, j)] = xi.coeff(e);
            }
        }
    }
    x
}

pub fn build_chart(fact: &SymbolFactorization, tilts: &TiltFamily, n: usize, m: usize) -> Result<Chart> {
    let ctx = KernelContext::new(fact, m)?;
    build_chart_in(&ctx, tilts, n)
}

pub fn build_chart_in(ctx: &KernelContext, tilts: &TiltFamily, n: usize) -> Result<Chart> {
    let m = ctx.m;
    if tilts.n() != n {
        return Err(domain(alloc::format!(
            "tilt family has {} members but N = {n}",
            tilts.n()
        )));
    }
    if n + tilts.polynomial_reach() > m {
        return Err(domain(alloc::format!(
            "N = {n} plus tilt degree {} exceeds the truncation M = {m}",
            tilts.polynomial_reach()
        )));
    }
    let r = theta_matrix(tilts, m).matmul(&ctx.t_plus);
    let c = ctx.t_minus.matmul(&xi_matrix(tilts, m));
    Chart::from_maps(r, c)
}

/// `det[(theta_i xi_j phi)_{i-j}]` by direct convolution.
pub fn tilted_minor_direct(phi: &LaurentSeries, tilts: &TiltFamily, n: usize) -> Result<C64> {
    tilted_minor_matrix(phi, tilts, n).map(|m| m.det())
}

pub fn tilted_minor_matrix(phi: &LaurentSeries, tilts: &TiltFamily, n: usize) -> Result<Matrix> {
    if tilts.n() != n {
        return Err(domain("tilt family size differs from N"));
    }
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let th = &tilts.theta[i];
        for j in 0..n {
            let xi = &tilts.xi[j];
            let target = i as i64 - j as i64;
            let mut s = C64::zero();
            for a in th.lo()..=th.hi() {
                let ta = th.coeff(a);
                if ta.is_zero() {
                    continue;
                }
                for b in xi.lo()..=xi.hi() {
                    let xb = xi.coeff(b);
                    if xb.is_zero() {
                        continue;
                    }
                    s += ta * xb * phi.checked_coeff(target - a - b)?;
                }
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// `K_N = Q Pi_V K J_N` on the tail `[N, M)` and its split `QKQ + F_N`.
#[derive(Clone, Debug)]
pub struct FixedTailKernel {
    pub kernel: TruncatedOperator,
    pub qkq: Matrix,
    pub correction: Matrix,
    pub correction_rank: usize,
    /// Spectral norm of the full truncated `K`.
    pub k_norm: f64,
    /// `J_N` as an `M x (M - N)` matrix.
    pub j: Matrix,
}

pub fn fixed_tail_kernel(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    n: usize,
    m: usize,
) -> Result<FixedTailKernel> {
    let ctx = KernelContext::new(fact, m)?;
    let chart = build_chart_in(&ctx, tilts, n)?;
    fixed_tail_in(&ctx.k, &chart)
}

/// Fixed-tail kernel for an arbitrary chart and kernel matrix.
pub fn fixed_tail_in(k: &Matrix, chart: &Chart) -> Result<FixedTailKernel> {
    let (n, m) = (chart.n(), chart.m());
    if !(chart.cond_b <= DEGENERATE_COND) {
        return Err(Error::Degenerate {
            what: "B",
            cond: chart.cond_b,
        });
    }
    let pik = oblique_apply(&chart.gamma, &chart.r, &chart.c, k)?;
    let rq = chart.r.block(0..n, n..m);
    let binv_rq = chart.b.solve(&rq).map_err(|_| Error::Singular("B"))?;
    let kernel = pik
        .block(n..m, n..m)
        .sub(&pik.block(n..m, 0..n).matmul(&binv_rq));
    let qkq = k.block(n..m, n..m);
    let correction = kernel.sub(&qkq);
    let k_norm = spectral_norm(k);
    let correction_rank = numerical_rank(&correction, 1e-9 * k_norm);
    let mut j = Matrix::zeros(m, m - n);
    j.set_block(0, 0, &binv_rq.scale(C64::new(-1.0, 0.0)));
    j.set_block(n, 0, &Matrix::identity(m - n));
    Ok(FixedTailKernel {
        kernel: TruncatedOperator::new(kernel, "K_N"),
        qkq,
        correction,
        correction_rank,
        k_norm,
        j,
    })
}

/// `det(I - Pi_V K)` on `Ker R` through an orthonormal basis of the kernel.
pub fn null_space_det(k: &Matrix, chart: &Chart) -> Result<LogDet> {
    let pik = oblique_apply(&chart.gamma, &chart.r, &chart.c, k)?;
    let v = null_space_basis(&chart.r);
    Ok(v.adjoint().matmul(&pik).matmul(&v).identity_minus().log_det())
}

/// Right-hand side of the tilted identity with its diagnostics.
#[derive(Clone, Debug)]
pub struct TiltedRhs {
    pub value: LogDet,
    pub det_gamma: C64,
    pub tail_det: LogDet,
    /// False when `B` was too ill-conditioned and the null-space path was used.
    pub used_fixed_tail: bool,
    /// Relative gap between the two determinant paths, when both ran.
    pub path_delta: Option<f64>,
    pub correction_rank: Option<usize>,
    pub cond_gamma: f64,
    pub cond_b: f64,
}

pub fn tilted_fredholm_rhs(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    n: usize,
    m: usize,
) -> Result<TiltedRhs> {
    let ctx = KernelContext::new(fact, m)?;
    tilted_fredholm_rhs_in(&ctx, tilts, n)
}

pub fn tilted_fredholm_rhs_in(ctx: &KernelContext, tilts: &TiltFamily, n: usize) -> Result<TiltedRhs> {
    let chart = build_chart_in(ctx, tilts, n)?;
    chart_fredholm_rhs(ctx, &chart)
}

/// `G^N Z det(Gamma) det(I - Pi_V K)|_{Ker R}` for any chart on the context.
pub fn chart_fredholm_rhs(ctx: &KernelContext, chart: &Chart) -> Result<TiltedRhs> {
    let n = chart.n();
    let det_gamma = chart.gamma.log_det();
    let null_det = null_space_det(&ctx.k, chart)?;
    let (tail_det, path_delta, correction_rank, used_fixed_tail) = if chart.cond_b <= DEGENERATE_COND {
        let ft = fixed_tail_in(&ctx.k, chart)?;
        let fixed = fredholm_det(&ft.kernel, 0).log_det;
        let (a, b) = (fixed.value(), null_det.value());
        let delta = (a - b).norm() / a.norm().max(b.norm());
        if delta > CROSS_CHECK_TOL {
            return Err(Error::InternalConsistency {
                what: "fixed-tail vs null-space determinant",
                delta,
            });
        }
        (fixed, Some(delta), Some(ft.correction_rank), true)
    } else {
        (null_det, None, None, false)
    };
    let g = LogDet::from_value(ctx.fact.geometric_mean);
    let mut value = LogDet::from_value(ctx.fact.szego_z).mul(det_gamma).mul(tail_det);
    for _ in 0..n {
        value = value.mul(g);
    }
    Ok(TiltedRhs {
        value,
        det_gamma: det_gamma.value(),
        tail_det,
        used_fixed_tail,
        path_delta,
        correction_rank,
        cond_gamma: chart.cond_gamma,
        cond_b: chart.cond_b,
    })
}

/// Rank-one pairs `(C f_a, f_a^T Gamma^{-1} R K)` with
/// `Pi_V K = K - sum_a c_a psi_a^T`.
pub fn oblique_correction(chart: &Chart, k: &TruncatedOperator) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    let rk = chart.r.matmul(&k.entries);
    let psi = chart.gamma.solve(&rk).map_err(|_| Error::Singular("chart Gram matrix"))?;
    let pairs: Vec<(Vec<C64>, Vec<C64>)> = (0..chart.n())
        .map(|a| (chart.c.column(a), psi.row(a).to_vec()))
        .collect();
    let mut rebuilt = k.entries.clone();
    for (c, p) in &pairs {
        rebuilt = rebuilt.sub(&Matrix::column_vector(c).matmul(&Matrix::row_vector(p)));
    }
    let direct = chart.pi_v()?.matmul(&k.entries);
    let delta = rebuilt.max_abs_diff(&direct);
    if delta > 1e-10 * (1.0 + k.entries.max_abs()) {
        return Err(Error::InternalConsistency {
            what: "oblique rank-one reconstruction",
            delta,
        });
    }
    Ok(pairs)
}

/// `(beta* A^{-1} alpha, Z (beta* alpha) det(I - K_1))` for the rank-one chart
/// `R = beta*`, `C = alpha`.
pub fn rank_one_chart_eval(
    alpha: &[C64],
    beta: &[C64],
    fact: &SymbolFactorization,
    m: usize,
) -> Result<(C64, C64)> {
    let ctx = KernelContext::new(fact, m)?;
    rank_one_chart_eval_in(&ctx, alpha, beta)
}

pub fn rank_one_chart_eval_in(ctx: &KernelContext, alpha: &[C64], beta: &[C64]) -> Result<(C64, C64)> {
    let m = ctx.m;
    if alpha.len() != m || beta.len() != m {
        return Err(domain("alpha and beta must have length M"));
    }
    let k = &ctx.k;
    let x = ctx.a().solve(&Matrix::column_vector(alpha))?;
    let lhs: C64 = beta.iter().zip(x.column(0)).map(|(b, v)| b.conj() * v).sum();
    let ba: C64 = beta.iter().zip(alpha).map(|(b, a)| b.conj() * a).sum();
    if ba.is_zero() {
        return Err(domain("rank-one chart needs beta* alpha != 0"));
    }
    let b0 = beta[0].conj();
    let tail = if b0.is_zero() {
        let r = Matrix::from_fn(1, m, |_, j| beta[j].conj());
        let chart = Chart::from_maps(r, Matrix::column_vector(alpha))?;
        null_space_det(k, &chart)?
    } else {
        // beta* K as a row, then beta* K J_1 on the tail.
        let bk: Vec<C64> = (0..m)
            .map(|j| (0..m).map(|i| beta[i].conj() * k[(i, j)]).sum())
            .collect();
        let k1 = Matrix::from_fn(m - 1, m - 1, |ii, jj| {
            let (i, j) = (ii + 1, jj + 1);
            let bj = beta[j].conj();
            let bkj = bk[j] - bk[0] * bj / b0;
            k[(i, j)] - k[(i, 0)] * bj / b0 - alpha[i] * bkj / ba
        });
        k1.identity_minus().log_det()
    };
    Ok((lhs, ctx.fact.szego_z * ba * tail.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{bogc_kernel, toeplitz_det};
    use crate::series::{series_log_split, Symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bessel() -> SymbolFactorization {
        series_log_split(&Symbol::exponential(&[0.3]), 256).unwrap()
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize, sign: i64) -> LaurentSeries {
        let coeffs: Vec<C64> = (0..=deg)
            .map(|_| C64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let s = LaurentSeries::polynomial(0, coeffs).unwrap();
        if sign < 0 {
            s.reflect()
        } else {
            s
        }
    }

    fn random_tilts(rng: &mut ChaCha8Rng, n: usize, deg: usize) -> TiltFamily {
        let xi = (0..n).map(|_| random_poly(rng, deg, 1)).collect();
        let theta = (0..n).map(|_| random_poly(rng, deg, -1)).collect();
        TiltFamily::new(xi, theta).unwrap()
    }

    #[test]
    fn family_validation() {
        assert!(TiltFamily::new(vec![LaurentSeries::monomial(-1)], vec![LaurentSeries::one()]).is_err());
        assert!(TiltFamily::new(vec![LaurentSeries::one()], vec![LaurentSeries::monomial(1)]).is_err());
        assert!(TiltFamily::new(vec![LaurentSeries::one()], vec![]).is_err());
        let t = TiltFamily::monomials(&[0, 2], &[1, 0]).unwrap();
        assert_eq!((t.d_xi, t.d_theta), (2, 1));
    }

    #[test]
    fn untilted_chart_has_unit_gram_determinant() {
        let f = bessel();
        let chart = build_chart(&f, &TiltFamily::ones(5), 5, 32).unwrap();
        assert!((chart.gamma.det() - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn monomial_tilts_give_shifted_minors() {
        let f = bessel();
        let (a, b) = ([0usize, 2, 1], [1usize, 0, 3]);
        let t = TiltFamily::monomials(&a, &b).unwrap();
        let mm = tilted_minor_matrix(&f.phi, &t, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let p = (i + b[i]) as i64;
                let q = (j + a[j]) as i64;
                assert_eq!(mm[(i, j)], f.phi.coeff(p - q));
            }
        }
    }

    #[test]
    fn column_only_chart_annihilates_tail() {
        let f = bessel();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = (0..4).map(|_| random_poly(&mut rng, 2, 1)).collect();
        let chart = build_chart(&f, &TiltFamily::columns(xi).unwrap(), 4, 24).unwrap();
        assert_eq!(chart.r.block(0..4, 4..24).max_abs(), 0.0);
    }

    #[test]
    fn direct_minor_small_cases() {
        let one = series_log_split(&Symbol::exponential(&[]), 8).unwrap();
        assert_eq!(tilted_minor_direct(&one.phi, &TiltFamily::ones(1), 1).unwrap(), c(1.0));
        let f = bessel();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tilts(&mut rng, 1, 2);
        let prod = crate::series::series_multiply(&t.theta[0], &t.xi[0], -10..=10);
        let prod = crate::series::series_multiply_truncated(&prod, &f.phi, 0..=0);
        assert!((tilted_minor_direct(&f.phi, &t, 1).unwrap() - prod.coeff(0)).norm() < 1e-15);
        let d3 = tilted_minor_direct(&f.phi, &TiltFamily::ones(3), 3).unwrap();
        assert!((d3 - toeplitz_det(&f.phi, 3).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn untilted_fixed_tail_is_plain_tail() {
        let f = bessel();
        let ft = fixed_tail_kernel(&f, &TiltFamily::ones(4), 4, 40).unwrap();
        assert_eq!(ft.correction.max_abs(), 0.0);
        assert_eq!(ft.correction_rank, 0);
        assert_eq!(ft.kernel.entries, ft.qkq);
    }

    #[test]
    fn untilted_rhs_shares_the_bogc_tail_determinant() {
        let f = bessel();
        let ctx = KernelContext::new(&f, 64).unwrap();
        let rhs = tilted_fredholm_rhs_in(&ctx, &TiltFamily::ones(3), 3).unwrap();
        let k = TruncatedOperator::new(ctx.k.clone(), "K");
        assert_eq!(rhs.tail_det, fredholm_det(&k, 3).log_det);
        assert!((rhs.det_gamma - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn trivial_symbol_gives_gram_determinant() {
        let one = series_log_split(&Symbol::exponential(&[]), 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tilts(&mut rng, 3, 2);
        let rhs = tilted_fredholm_rhs(&one, &t, 3, 24).unwrap();
        assert!((rhs.value.value() - rhs.det_gamma).norm() < 1e-13 * rhs.det_gamma.norm());
    }

    #[test]
    fn main_identity_with_random_tilts() {
        let f = bessel();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ctx = KernelContext::new(&f, 128).unwrap();
        for _ in 0..3 {
            let t = random_tilts(&mut rng, 4, 2);
            let d = tilted_minor_direct(&f.phi, &t, 4).unwrap();
            let rhs = tilted_fredholm_rhs_in(&ctx, &t, 4).unwrap();
            assert!((d - rhs.value.value()).norm() <= 1e-8 * d.norm());
            assert!(rhs.correction_rank.unwrap() <= t.d_xi + t.d_theta);
        }
    }

    #[test]
    fn rank_bounds() {
        let f = series_log_split(&Symbol::exponential(&[0.2, 0.05]), 256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for deg in 1..=3 {
            let t = random_tilts(&mut rng, 5, deg);
            let ft = fixed_tail_kernel(&f, &t, 5, 64).unwrap();
            assert!(ft.correction_rank <= 2 * deg, "deg {deg}: {}", ft.correction_rank);
        }
        let mut xi = vec![LaurentSeries::one(); 4];
        xi[3] = random_poly(&mut rng, 3, 1);
        let ft = fixed_tail_kernel(&f, &TiltFamily::columns(xi).unwrap(), 4, 64).unwrap();
        assert!(ft.correction_rank <= 1);
    }

    #[test]
    fn projection_and_conjugation_structure() {
        let f = bessel();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_tilts(&mut rng, 3, 2);
        let ctx = KernelContext::new(&f, 32).unwrap();
        let chart = build_chart_in(&ctx, &t, 3).unwrap();
        let pi = chart.pi_v().unwrap();
        assert!(pi.matmul(&pi).max_abs_diff(&pi) <= 1e-10);
        let ft = fixed_tail_in(&ctx.k, &chart).unwrap();
        assert!(chart.r.matmul(&ft.j).max_abs() <= 1e-12);
        assert_eq!(ft.j.block(3..32, 0..29), Matrix::identity(29));
        let pairs = oblique_correction(&chart, &TruncatedOperator::new(ctx.k.clone(), "K")).unwrap();
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn coordinate_chart_projects_onto_tail() {
        let f = bessel();
        let k = bogc_kernel(&f, 24).unwrap();
        let chart = Chart::coordinate(4, 24);
        let pik = chart.pi_v().unwrap().matmul(&k.entries);
        let mut qk = k.entries.clone();
        for i in 0..4 {
            for j in 0..24 {
                qk[(i, j)] = C64::zero();
            }
        }
        assert!(pik.max_abs_diff(&qk) < 1e-15);
    }

    #[test]
    fn rank_one_chart_projection_form() {
        let m = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alpha: Vec<C64> = (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.3)).collect();
        let beta: Vec<C64> = (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), -0.2)).collect();
        let r = Matrix::from_fn(1, m, |_, j| beta[j].conj());
        let chart = Chart::from_maps(r, Matrix::column_vector(&alpha)).unwrap();
        let ba: C64 = beta.iter().zip(&alpha).map(|(b, a)| b.conj() * a).sum();
        let want = Matrix::identity(m).sub(
            &Matrix::column_vector(&alpha)
                .matmul(&Matrix::from_fn(1, m, |_, j| beta[j].conj()))
                .scale(ba.inv()),
        );
        assert!(chart.pi_v().unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn rank_one_chart_identities() {
        let m = 48;
        let e0: Vec<C64> = (0..m).map(|i| if i == 0 { c(1.0) } else { c(0.0) }).collect();
        let one = series_log_split(&Symbol::exponential(&[]), 128).unwrap();
        let (l, r) = rank_one_chart_eval(&e0, &e0, &one, m).unwrap();
        assert!((l - c(1.0)).norm() < 1e-15 && (r - c(1.0)).norm() < 1e-15);
        let f = bessel();
        let (l, r) = rank_one_chart_eval(&e0, &e0, &f, m).unwrap();
        assert!((l - r).norm() <= 1e-8 * l.norm());
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..4 {
            let mut alpha = vec![c(0.0); m];
            let mut beta = vec![c(0.0); m];
            for i in 0..8 {
                alpha[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                beta[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            if trial == 3 {
                beta[0] = c(0.0);
            }
            let (l, r) = rank_one_chart_eval(&alpha, &beta, &f, m).unwrap();
            assert!((l - r).norm() <= 1e-8 * l.norm(), "{trial}: {l} {r}");
        }
    }

    #[test]
    fn degenerate_gram_is_rejected() {
        let f = bessel();
        let mut xi = vec![LaurentSeries::one(); 2];
        xi[1] = LaurentSeries::constant(c(0.0));
        let t = TiltFamily::columns(xi).unwrap();
        assert!(matches!(build_chart(&f, &t, 2, 16), Err(Error::Degenerate { .. })));
    }
}
