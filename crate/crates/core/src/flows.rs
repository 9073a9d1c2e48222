//! Time flows of the kernel, the universal resolvent block and the tau
//! function for `phi(z; t) = exp(sum_r t_r (z^r + z^{-r}))`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diff::{default_step, richardson_matrix, richardson_scalar};
use crate::error::domain;
use crate::linalg::{singular_values, Lu, Matrix};
use crate::operators::{hankel_rect, kernel_block, toeplitz_rect};
use crate::series::{series_log_split, LaurentSeries, Symbol, SymbolFactorization};
use crate::tilt::{theta_matrix, tilted_minor_direct, xi_matrix, TiltFamily};
use crate::{Error, Result, C64};

/// Extra Hankel columns kept in `H(b) H(b)^T` beyond the truncation.
const INNER_PAD: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeVector {
    times: Vec<f64>,
}

impl TimeVector {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(domain("at least one time is required"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(domain("times must be finite"));
        }
        Ok(TimeVector { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time `t_r`, 1-based.
    pub fn get(&self, r: usize) -> f64 {
        self.times[r - 1]
    }

    pub fn with(&self, r: usize, value: f64) -> TimeVector {
        let mut times = self.times.clone();
        times[r - 1] = value;
        TimeVector { times }
    }

    fn check_index(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.times.len() {
            return Err(domain(format!("time index r = {r} outside 1..={}", self.times.len())));
        }
        Ok(())
    }
}

/// Finite-difference comparison of one flow identity.
#[derive(Clone, Debug)]
pub struct FlowReport {
    pub r: usize,
    pub analytic: Matrix,
    pub numeric: Matrix,
    pub max_abs_error: f64,
    pub fd_step: f64,
    pub m: usize,
    pub times: Vec<f64>,
}

impl FlowReport {
    fn new(t: &TimeVector, r: usize, m: usize, analytic: Matrix, numeric: Matrix, fd_step: f64) -> Self {
        let max_abs_error = analytic.max_abs_diff(&numeric);
        FlowReport {
            r,
            analytic,
            numeric,
            max_abs_error,
            fd_step,
            m,
            times: t.times.clone(),
        }
    }
}

fn half_width_for(size: usize, t: &TimeVector) -> usize {
    2 * (size + t.len() + INNER_PAD) + 16
}

/// Factorization of the time symbol with a window wide enough for
/// truncation `size`.
pub fn time_factorization(t: &TimeVector, size: usize) -> Result<SymbolFactorization> {
    series_log_split(&Symbol::exponential(&t.times), half_width_for(size, t))
}

fn b_coeff(f: &SymbolFactorization, k: i64) -> Result<C64> {
    f.b.checked_coeff(k)
}

/// `rho_a^{(r)}[l] = b_{l + a + 1 - r}` for `l < len`.
fn rho(f: &SymbolFactorization, a: usize, r: usize, len: usize) -> Result<Vec<C64>> {
    (0..len)
        .map(|l| b_coeff(f, l as i64 + a as i64 + 1 - r as i64))
        .collect()
}

/// `Y^{m,n} = R_m (I - K)^{-1} C_n` on the truncation `size`.
pub fn universal_resolvent(fact: &SymbolFactorization, m: usize, n: usize, size: usize) -> Result<Matrix> {
    if 2 * m > size || 2 * n > size {
        return Err(domain("universal block needs m, n <= M / 2"));
    }
    let st = ResolventState::new(fact, size)?;
    Ok(st.y(m, n))
}

/// `(A_theta, A_xi)` with `R = A_theta R_m`, `C = C_n A_xi`.
pub fn banded_tilt_matrices(tilts: &TiltFamily, n_big: usize, m: usize, n: usize) -> Result<(Matrix, Matrix)> {
    if tilts.n() != n_big {
        return Err(domain("tilt family size differs from N"));
    }
    let clipped = tilts.xi.iter().any(|x| x.is_clipped_above()) || tilts.theta.iter().any(|t| t.is_clipped_below());
    if clipped {
        return Err(domain("banded factorization needs polynomial tilts"));
    }
    if tilts.d_xi + n_big > n || tilts.d_theta + n_big > m {
        return Err(domain(format!(
            "degree bounds violated: d_xi = {} needs n >= {}, d_theta = {} needs m >= {}",
            tilts.d_xi,
            tilts.d_xi + n_big,
            tilts.d_theta,
            tilts.d_theta + n_big
        )));
    }
    Ok((theta_matrix(tilts, m), xi_matrix(tilts, n)))
}

/// `(G^N det(A_theta Y A_xi), D_N^{xi,theta})`.
pub fn banded_identity_check(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    n_big: usize,
    m: usize,
    n: usize,
    size: usize,
) -> Result<(C64, C64)> {
    let (at, ax) = banded_tilt_matrices(tilts, n_big, m, n)?;
    let y = universal_resolvent(fact, m, n, size)?;
    let lhs = at.matmul(&y).matmul(&ax).det() * fact.geometric_mean.powi(n_big as i32);
    Ok((lhs, tilted_minor_direct(&fact.phi, tilts, n_big)?))
}

/// Truncated resolvent data at one time.
struct ResolventState {
    fact: SymbolFactorization,
    size: usize,
    inner: usize,
    lu: Lu,
    lu_t: Lu,
    k: Matrix,
    t_plus: Matrix,
    t_minus: Matrix,
}

impl ResolventState {
    fn new(fact: &SymbolFactorization, size: usize) -> Result<Self> {
        let inner = size + INNER_PAD;
        let k = kernel_block(fact, size, inner)?;
        let a = k.identity_minus();
        let lu = Lu::new(&a);
        if lu.is_singular() {
            return Err(Error::Singular("I - K at the truncation"));
        }
        Ok(ResolventState {
            fact: fact.clone(),
            size,
            inner,
            lu_t: Lu::new(&a.transpose()),
            lu,
            k,
            t_plus: toeplitz_rect(&fact.phi_plus, size, size)?,
            t_minus: toeplitz_rect(&fact.phi_minus, size, size)?,
        })
    }

    fn r_m(&self, m: usize) -> Matrix {
        self.t_plus.block(0..m, 0..self.size)
    }

    fn c_n(&self, n: usize) -> Matrix {
        self.t_minus.block(0..self.size, 0..n)
    }

    /// `Q X`.
    fn q_right(&self, x: &Matrix) -> Matrix {
        self.lu.solve(x).expect("factor checked nonsingular")
    }

    /// `X Q`.
    fn q_left(&self, x: &Matrix) -> Matrix {
        self.lu_t.solve(&x.transpose()).expect("factor checked nonsingular").transpose()
    }

    fn y(&self, m: usize, n: usize) -> Matrix {
        self.r_m(m).matmul(&self.q_right(&self.c_n(n)))
    }

    /// `h_a^{(r)} = H(b) rho_a^{(r)}` on the truncation.
    fn h(&self, a: usize, r: usize) -> Result<Vec<C64>> {
        let hb = hankel_rect(&self.fact.b, self.size, self.inner)?;
        Ok(hb.matvec(&rho(&self.fact, a, r, self.inner)?))
    }

    /// The three pieces of the rectangular flow: `R (S*)^r Q C`,
    /// `R Q S^r C` and the boundary sum.
    fn y_flow_parts(&self, r: usize, m: usize, n: usize) -> Result<[Matrix; 3]> {
        let size = self.size;
        let rm = self.r_m(m);
        let cn = self.c_n(n);
        let qc = self.q_right(&cn);
        let rq = self.q_left(&rm);
        let r_sstar = Matrix::from_fn(m, size, |p, l| if l >= r { rm[(p, l - r)] } else { C64::zero() });
        let s_c = Matrix::from_fn(size, n, |k, q| if k >= r { cn[(k - r, q)] } else { C64::zero() });
        let first = r_sstar.matmul(&qc);
        let second = rq.matmul(&s_c);
        let mut boundary = Matrix::zeros(m, n);
        for a in 0..r {
            let h = Matrix::column_vector(&self.h(a, r)?);
            let rq_e = Matrix::from_fn(m, 1, |p, _| rq[(p, a)]);
            let e_qc = Matrix::from_fn(1, n, |_, q| qc[(a, q)]);
            let h_qc = h.transpose().matmul(&qc);
            let rq_h = rq.matmul(&h);
            boundary = boundary.add(&rq_e.matmul(&h_qc)).add(&rq_h.matmul(&e_qc));
        }
        Ok([first, second, boundary])
    }

    fn y_flow(&self, r: usize, m: usize, n: usize) -> Result<Matrix> {
        let [a, b, c] = self.y_flow_parts(r, m, n)?;
        Ok(a.add(&b).sub(&c))
    }
}

/// `(S*)^r H(b) - S^r H(b) - sum_a e_a rho_a^T` on `size x size`.
pub fn hankel_flow_rhs(t: &TimeVector, r: usize, size: usize) -> Result<Matrix> {
    t.check_index(r)?;
    let f = time_factorization(t, size)?;
    hankel_flow_rhs_rect(&f, r, size, size)
}

fn hankel_flow_rhs_rect(f: &SymbolFactorization, r: usize, rows: usize, cols: usize) -> Result<Matrix> {
    let big = hankel_rect(&f.b, rows + r, cols)?;
    let mut out = Matrix::from_fn(rows, cols, |i, l| {
        let down = if i >= r { big[(i - r, l)] } else { C64::zero() };
        big[(i + r, l)] - down
    });
    for a in 0..r.min(rows) {
        let rho_a = rho(f, a, r, cols)?;
        for (l, v) in rho_a.into_iter().enumerate() {
            out[(a, l)] -= v;
        }
    }
    Ok(out)
}

pub fn hankel_flow_check(t: &TimeVector, r: usize, size: usize) -> Result<FlowReport> {
    let analytic = hankel_flow_rhs(t, r, size)?;
    let h = default_step(t.get(r));
    let numeric = richardson_matrix(
        |s| {
            let f = time_factorization(&t.with(r, s), size)?;
            hankel_rect(&f.b, size, size)
        },
        t.get(r),
        h,
    )?;
    Ok(FlowReport::new(t, r, size, analytic, numeric, h))
}

/// Right side of the kernel flow on `size x size`; shifts read the kernel on
/// `(size + r) x (size + r)`.
#[allow(non_snake_case)]
pub fn flow_rhs_K(t: &TimeVector, r: usize, size: usize) -> Result<Matrix> {
    t.check_index(r)?;
    let f = time_factorization(t, size)?;
    flow_rhs_k_in(&f, r, size)
}

fn flow_rhs_k_in(f: &SymbolFactorization, r: usize, size: usize) -> Result<Matrix> {
    let inner = size + INNER_PAD;
    let hb = hankel_rect(&f.b, size + r, inner)?;
    let kb = hb.matmul(&hb.transpose());
    let mut out = Matrix::from_fn(size, size, |i, j| {
        let mut v = kb[(i + r, j)] + kb[(i, j + r)];
        if i >= r {
            v -= kb[(i - r, j)];
        }
        if j >= r {
            v -= kb[(i, j - r)];
        }
        v
    });
    let h_top = hb.block(0..size, 0..inner);
    for a in 0..r.min(size) {
        let h = h_top.matvec(&rho(f, a, r, inner)?);
        for l in 0..size {
            out[(a, l)] -= h[l];
            out[(l, a)] -= h[l];
        }
    }
    Ok(out)
}

pub fn flow_check_k(t: &TimeVector, r: usize, size: usize) -> Result<FlowReport> {
    let analytic = flow_rhs_K(t, r, size)?;
    let h = default_step(t.get(r));
    let numeric = richardson_matrix(
        |s| {
            let f = time_factorization(&t.with(r, s), size)?;
            kernel_block(&f, size, size + INNER_PAD)
        },
        t.get(r),
        h,
    )?;
    Ok(FlowReport::new(t, r, size, analytic, numeric, h))
}

/// Max-norm gap between the kernel flow and `(dH) H^T + H (dH)^T` built from
/// the Hankel flow.
pub fn leibniz_check(t: &TimeVector, r: usize, size: usize) -> Result<f64> {
    t.check_index(r)?;
    let f = time_factorization(t, size)?;
    let inner = size + INNER_PAD;
    let hb = hankel_rect(&f.b, size, inner)?;
    let dh = hankel_flow_rhs_rect(&f, r, size, inner)?;
    let assembled = dh.matmul(&hb.transpose()).add(&hb.matmul(&dh.transpose()));
    Ok(assembled.max_abs_diff(&flow_rhs_k_in(&f, r, size)?))
}

/// Which block a resolvent flow is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowBlock {
    /// The `N x N` tilted block `A_theta Y A_xi` with the smallest admissible
    /// `m = N + d_theta`, `n = N + d_xi`.
    Tilted,
    /// The raw `m x n` universal block.
    Rectangular(usize, usize),
}

fn block_value(st: &ResolventState, tilts: &TiltFamily, n_big: usize, block: FlowBlock) -> Result<Matrix> {
    Ok(match block {
        FlowBlock::Rectangular(m, n) => st.y(m, n),
        FlowBlock::Tilted => {
            let (m, n) = (n_big + tilts.d_theta, n_big + tilts.d_xi);
            let (at, ax) = banded_tilt_matrices(tilts, n_big, m, n)?;
            at.matmul(&st.y(m, n)).matmul(&ax)
        }
    })
}

fn block_flow(st: &ResolventState, tilts: &TiltFamily, n_big: usize, r: usize, block: FlowBlock) -> Result<Matrix> {
    match block {
        FlowBlock::Rectangular(m, n) => st.y_flow(r, m, n),
        FlowBlock::Tilted => {
            let (m, n) = (n_big + tilts.d_theta, n_big + tilts.d_xi);
            let (at, ax) = banded_tilt_matrices(tilts, n_big, m, n)?;
            Ok(at.matmul(&st.y_flow(r, m, n)?).matmul(&ax))
        }
    }
}

fn check_block(size: usize, tilts: &TiltFamily, n_big: usize, block: FlowBlock) -> Result<()> {
    let (m, n) = match block {
        FlowBlock::Rectangular(m, n) => (m, n),
        FlowBlock::Tilted => (n_big + tilts.d_theta, n_big + tilts.d_xi),
    };
    if 2 * m > size || 2 * n > size {
        return Err(domain("resolvent block needs m, n <= M / 2"));
    }
    Ok(())
}

/// Analytic resolvent flow against finite differences of `Y(t)`.
#[allow(non_snake_case)]
pub fn flow_rhs_Y(
    t: &TimeVector,
    tilts: &TiltFamily,
    n_big: usize,
    r: usize,
    size: usize,
    block: FlowBlock,
) -> Result<FlowReport> {
    t.check_index(r)?;
    check_block(size, tilts, n_big, block)?;
    let st = ResolventState::new(&time_factorization(t, size)?, size)?;
    let analytic = block_flow(&st, tilts, n_big, r, block)?;
    let h = default_step(t.get(r));
    let numeric = richardson_matrix(
        |s| {
            let st = ResolventState::new(&time_factorization(&t.with(r, s), size)?, size)?;
            block_value(&st, tilts, n_big, block)
        },
        t.get(r),
        h,
    )?;
    Ok(FlowReport::new(t, r, size, analytic, numeric, h))
}

/// Gap between `R S^r Q C + R Q (S*)^r C + R Q (dK) Q C` and the telescoped
/// resolvent flow, everything truncated to `size` (pure algebra).
pub fn telescoping_check(t: &TimeVector, r: usize, m: usize, n: usize, size: usize) -> Result<f64> {
    t.check_index(r)?;
    let f = time_factorization(t, size)?;
    let st = ResolventState::new(&f, size)?;
    let shift = Matrix::from_fn(size, size, |i, j| if i == j + r { C64::new(1.0, 0.0) } else { C64::zero() });
    let shift_adj = shift.transpose();
    let k = &st.k;
    let mut dk = shift_adj.matmul(k).sub(&shift.matmul(k)).add(&k.matmul(&shift)).sub(&k.matmul(&shift_adj));
    for a in 0..r {
        let h = st.h(a, r)?;
        for l in 0..size {
            dk[(a, l)] -= h[l];
            dk[(l, a)] -= h[l];
        }
    }
    let rm = st.r_m(m);
    let cn = st.c_n(n);
    let qc = st.q_right(&cn);
    let rq = st.q_left(&rm);
    let expanded = rm
        .matmul(&shift)
        .matmul(&qc)
        .add(&rq.matmul(&shift_adj).matmul(&cn))
        .add(&rq.matmul(&dk).matmul(&qc));
    let telescoped = {
        let [a, b, c] = parts_with_truncated_shifts(&st, &shift, &shift_adj, r, m, n)?;
        a.add(&b).sub(&c)
    };
    Ok(expanded.max_abs_diff(&telescoped))
}

fn parts_with_truncated_shifts(
    st: &ResolventState,
    shift: &Matrix,
    shift_adj: &Matrix,
    r: usize,
    m: usize,
    n: usize,
) -> Result<[Matrix; 3]> {
    let rm = st.r_m(m);
    let cn = st.c_n(n);
    let qc = st.q_right(&cn);
    let rq = st.q_left(&rm);
    let first = rm.matmul(shift_adj).matmul(&qc);
    let second = rq.matmul(shift).matmul(&cn);
    let [_, _, boundary] = st.y_flow_parts(r, m, n)?;
    Ok([first, second, boundary])
}

/// `(det(I - K_t), exp(-sum r t_r^2))` at truncation `size`.
pub fn szego_exactness(t: &TimeVector, size: usize) -> Result<(f64, f64)> {
    let f = time_factorization(t, size)?;
    let k = kernel_block(&f, size, size)?;
    let det = k.identity_minus().det();
    let exact = (-t
        .times
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 * x * x)
        .sum::<f64>())
    .exp();
    Ok((det.re, exact))
}

/// `log T(t) = log det(I - K_t) + log det Y(t)` relative to the value at a
/// reference point, to keep the branch continuous.
fn log_tau(st: &ResolventState, tilts: &TiltFamily, n_big: usize) -> Result<C64> {
    let log_fred = st.k.identity_minus().log_det();
    if n_big == 0 {
        return Ok(C64::new(log_fred.log_abs, log_fred.phase.arg()));
    }
    let y = block_value(st, tilts, n_big, FlowBlock::Tilted)?;
    let ld = log_fred.mul(y.log_det());
    Ok(C64::new(ld.log_abs, ld.phase.arg()))
}

/// `(analytic, numeric)` for `d/dt_r log T`.
pub fn tau_log_derivative(
    t: &TimeVector,
    tilts: &TiltFamily,
    n_big: usize,
    r: usize,
    size: usize,
) -> Result<(C64, C64)> {
    t.check_index(r)?;
    if tilts.n() != n_big {
        return Err(domain("tilt family size differs from N"));
    }
    check_block(size, tilts, n_big, FlowBlock::Tilted)?;
    let st = ResolventState::new(&time_factorization(t, size)?, size)?;
    let base = -2.0 * r as f64 * t.get(r);
    let analytic = if n_big == 0 {
        C64::new(base, 0.0)
    } else {
        let y = block_value(&st, tilts, n_big, FlowBlock::Tilted)?;
        let lu = Lu::new(&y);
        if lu.is_singular() {
            return Err(Error::Singular("Y(t)"));
        }
        let dy = block_flow(&st, tilts, n_big, r, FlowBlock::Tilted)?;
        C64::new(base, 0.0) + lu.solve(&dy)?.trace()
    };
    let reference = log_tau(&st, tilts, n_big)?;
    let h = default_step(t.get(r));
    let numeric = richardson_scalar(
        |s| {
            let st = ResolventState::new(&time_factorization(&t.with(r, s), size)?, size)?;
            let d = log_tau(&st, tilts, n_big)? - reference;
            // Fold the phase back next to zero.
            let tau = core::f64::consts::TAU;
            Ok(C64::new(d.re, d.im - tau * (d.im / tau).round()))
        },
        t.get(r),
        h,
    )?;
    Ok((analytic, numeric))
}

/// Sampling region for the closure experiment: one interval per time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl TimeBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(domain("time box needs matching nonempty bounds with lo <= hi"));
        }
        Ok(TimeBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Clone, Debug)]
pub struct ClosureSetup {
    pub n: usize,
    pub d: usize,
    pub tilts: TiltFamily,
    pub time_box: TimeBox,
    pub size: usize,
    pub seed: u64,
    pub sample_count: usize,
}

/// Result of the closure experiment: a rank pair per quantity family.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub rank_without_shifts: usize,
    pub rank_with_shifts: usize,
    pub resolvent_rank_without_shifts: usize,
    pub resolvent_rank_with_shifts: usize,
    pub threshold: f64,
    pub sample_count: usize,
    /// Normalized singular values, largest first, one list per sample matrix.
    pub spectra: Vec<(String, Vec<f64>)>,
    pub quantity_list: Vec<String>,
}

/// Relative numerical-rank threshold of the closure experiment.
pub const CLOSURE_THRESHOLD: f64 = 1e-7;

/// Degree-`d` tilts with coefficients from the stream `0` of the seed.
pub fn closure_tilts(seed: u64, n: usize, d: usize) -> Result<TiltFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let poly = |rng: &mut ChaCha8Rng| -> Vec<C64> { (0..=d).map(|_| C64::new(rng.gen_range(0.0..1.0), 0.0)).collect() };
    let xi = (0..n)
        .map(|_| LaurentSeries::polynomial(0, poly(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let theta = (0..n)
        .map(|_| LaurentSeries::polynomial(0, poly(&mut rng)).map(|p| p.reflect()))
        .collect::<Result<Vec<_>>>()?;
    TiltFamily::new(xi, theta)
}

/// Sample point `index`: stream `index + 1` of the seed, so points can be
/// drawn in any order.
pub fn closure_sample_time(seed: u64, index: usize, time_box: &TimeBox) -> TimeVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    let times = time_box
        .lo
        .iter()
        .zip(&time_box.hi)
        .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..b) })
        .collect();
    TimeVector { times }
}

/// Every minor (all sizes, rows and columns in increasing order) of `w`,
/// with the constant minor of size zero first.
fn all_minors(w: &Matrix) -> Vec<C64> {
    let (rows, cols) = (w.rows(), w.cols());
    let mut out = vec![C64::new(1.0, 0.0)];
    for k in 1..=rows.min(cols) {
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                out.push(w.select(&rs, &cs).det());
            }
        }
    }
    out
}

/// Minors of `w` that use at least one row `>= base_rows` or column
/// `>= base_cols`.
fn new_minors(w: &Matrix, base_rows: usize, base_cols: usize) -> Vec<C64> {
    let (rows, cols) = (w.rows(), w.cols());
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                if rs.last().is_some_and(|&x| x >= base_rows) || cs.last().is_some_and(|&x| x >= base_cols) {
                    out.push(w.select(&rs, &cs).det());
                }
            }
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Derivative of every minor of `w` along `dw` (Jacobi's formula applied to
/// each submatrix, via the adjugate expansion `d det = sum det(w with one
/// column replaced)`).
fn minor_derivatives(w: &Matrix, dw: &Matrix) -> Vec<C64> {
    let (rows, cols) = (w.rows(), w.cols());
    let mut out = vec![C64::zero()];
    for k in 1..=rows.min(cols) {
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let base = w.select(&rs, &cs);
                let tangent = dw.select(&rs, &cs);
                let mut d = C64::zero();
                for c in 0..k {
                    let mut m = base.clone();
                    for rr in 0..k {
                        m[(rr, c)] = tangent[(rr, c)];
                    }
                    d += m.det();
                }
                out.push(d);
            }
        }
    }
    out
}

/// Quantity vectors at one time sample: `(minors, minors + shifted,
/// resolvent, resolvent + shifted)`.
pub fn closure_quantities(setup: &ClosureSetup, t: &TimeVector) -> Result<[Vec<C64>; 4]> {
    let n_big = setup.n;
    let tilts = &setup.tilts;
    let (m, n) = (n_big + tilts.d_theta, n_big + tilts.d_xi);
    let st = ResolventState::new(&time_factorization(t, setup.size)?, setup.size)?;
    let (at, ax) = banded_tilt_matrices(tilts, n_big, m, n)?;
    let y = st.y(m, n);
    let w = at.matmul(&y).matmul(&ax);
    let times = t.len();

    let mut minors = all_minors(&w);
    let mut resolvent: Vec<C64> = y.as_slice().to_vec();
    let mut enlarged = w.clone();
    let mut shifted_res = Vec::new();
    for r in 1..=times {
        let [sstar_part, s_part, boundary] = st.y_flow_parts(r, m, n)?;
        let dy = sstar_part.add(&s_part).sub(&boundary);
        minors.extend(minor_derivatives(&w, &at.matmul(&dy).matmul(&ax)).into_iter().skip(1));
        resolvent.extend_from_slice(dy.as_slice());

        // One extra row from the left-shifted block, one extra column from
        // the right-shifted block, both at the last tilt index.
        let row_block = at.matmul(&sstar_part).matmul(&ax);
        let col_block = at.matmul(&s_part).matmul(&ax);
        let (rows, cols) = (enlarged.rows(), enlarged.cols());
        let mut next = Matrix::zeros(rows + 1, cols + 1);
        next.set_block(0, 0, &enlarged);
        for j in 0..n_big {
            next[(rows, j)] = row_block[(n_big - 1, j)];
        }
        for i in 0..n_big {
            next[(i, cols)] = col_block[(i, n_big - 1)];
        }
        next[(rows, cols)] = row_block[(n_big - 1, n_big - 1)] + col_block[(n_big - 1, n_big - 1)];
        enlarged = next;
        shifted_res.extend_from_slice(sstar_part.as_slice());
        shifted_res.extend_from_slice(s_part.as_slice());
    }
    let mut with_shifts = minors.clone();
    with_shifts.extend(new_minors(&enlarged, n_big, n_big));
    let mut res_with = resolvent.clone();
    res_with.extend(shifted_res);
    Ok([minors, with_shifts, resolvent, res_with])
}

/// Normalized singular values and rank of a quantities-by-samples matrix.
pub fn sampled_rank(samples: &[Vec<C64>], threshold: f64) -> (usize, Vec<f64>) {
    if samples.is_empty() || samples[0].is_empty() {
        return (0, Vec::new());
    }
    let q = samples[0].len();
    // Quantities are scaled to unit max-norm across samples so the rank sees
    // shapes, not magnitudes.
    let scale: Vec<f64> = (0..q)
        .map(|i| samples.iter().fold(0.0f64, |m, s| m.max(s[i].norm())))
        .collect();
    let rows: Vec<usize> = (0..q).filter(|&i| scale[i] > 0.0).collect();
    let a = Matrix::from_fn(samples.len(), rows.len(), |s, j| samples[s][rows[j]] / scale[rows[j]]);
    let mut sv = singular_values(&a);
    sv.sort_by(|x, y| y.total_cmp(x));
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return (0, sv);
    }
    let normalized: Vec<f64> = sv.iter().map(|s| s / top).collect();
    let rank = normalized.iter().filter(|&&s| s > threshold).count();
    (rank, normalized)
}

/// Ranks from per-sample quantity vectors, in sample order.
pub fn closure_ranks(setup: &ClosureSetup, samples: &[[Vec<C64>; 4]]) -> ClosureReport {
    let names = ["minors", "minors_with_shifts", "resolvent", "resolvent_with_shifts"];
    let mut ranks = [0usize; 4];
    let mut spectra = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let family: Vec<Vec<C64>> = samples.iter().map(|s| s[k].clone()).collect();
        let (rank, sv) = sampled_rank(&family, CLOSURE_THRESHOLD);
        ranks[k] = rank;
        spectra.push((String::from(*name), sv));
    }
    let quantity_list = vec![
        format!(
            "minors: every minor (sizes 0..={n}) of W = A_theta Y^{{m,n}} A_xi and its t_r-derivatives, r = 1..={}",
            setup.time_box.dim(),
            n = setup.n
        ),
        String::from(
            "minors_with_shifts: adds minors of W enlarged per time by the last row of A_theta R_m (S*)^r Q C_n A_xi and the last column of A_theta R_m Q S^r C_n A_xi",
        ),
        String::from("resolvent: entries of Y^{m,n} and of its t_r-derivatives"),
        String::from("resolvent_with_shifts: adds entries of R_m (S*)^r Q C_n and R_m Q S^r C_n"),
    ];
    ClosureReport {
        rank_without_shifts: ranks[0],
        rank_with_shifts: ranks[1],
        resolvent_rank_without_shifts: ranks[2],
        resolvent_rank_with_shifts: ranks[3],
        threshold: CLOSURE_THRESHOLD,
        sample_count: samples.len(),
        spectra,
        quantity_list,
    }
}

pub fn closure_setup(seed: u64, n: usize, d: usize, sample_count: usize, time_box: TimeBox) -> Result<ClosureSetup> {
    if sample_count < 40 {
        return Err(domain("closure experiment needs at least 40 samples"));
    }
    let tilts = closure_tilts(seed, n, d)?;
    let size = 64.max(4 * (n + d));
    Ok(ClosureSetup {
        n,
        d,
        tilts,
        time_box,
        size,
        seed,
        sample_count,
    })
}

/// Sequential driver; callers wanting parallel sampling can map
/// [`closure_quantities`] over [`closure_sample_time`] themselves.
pub fn closure_experiment(
    seed: u64,
    n: usize,
    d: usize,
    sample_count: usize,
    time_box: TimeBox,
) -> Result<ClosureReport> {
    let setup = closure_setup(seed, n, d, sample_count, time_box)?;
    if setup.time_box.is_point() {
        // A single point: every quantity is a constant function.
        let t = closure_sample_time(seed, 0, &setup.time_box);
        let q = closure_quantities(&setup, &t)?;
        let samples = vec![q; sample_count];
        return Ok(closure_ranks(&setup, &samples));
    }
    let samples = (0..sample_count)
        .map(|i| closure_quantities(&setup, &closure_sample_time(seed, i, &setup.time_box)))
        .collect::<Result<Vec<_>>>()?;
    Ok(closure_ranks(&setup, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(t: &[f64]) -> TimeVector {
        TimeVector::new(t.to_vec()).unwrap()
    }

    fn random_tilts(seed: u64, n: usize) -> TiltFamily {
        closure_tilts(seed, n, 2).unwrap()
    }

    #[test]
    fn resolvent_at_trivial_symbol_is_identity() {
        let f = time_factorization(&tv(&[0.0]), 32).unwrap();
        let y = universal_resolvent(&f, 4, 3, 32).unwrap();
        assert!(y.max_abs_diff(&Matrix::identity(4).block(0..4, 0..3)) < 1e-15);
        assert!(universal_resolvent(&f, 17, 3, 32).is_err());
    }

    #[test]
    fn resolvent_determinant_is_toeplitz_minor() {
        let f = time_factorization(&tv(&[0.3]), 64).unwrap();
        for n in 1..=5 {
            let y = universal_resolvent(&f, n, n, 64).unwrap();
            let direct = crate::operators::toeplitz_det(&f.phi, n).unwrap();
            assert!((y.det() - direct).norm() <= 1e-12 * direct.norm());
        }
        let y = universal_resolvent(&f, 6, 6, 64).unwrap();
        assert!(y.max_abs_diff(&y.transpose()) < 1e-14);
    }

    #[test]
    fn banded_matrices() {
        let (at, ax) = banded_tilt_matrices(&TiltFamily::ones(3), 3, 3, 3).unwrap();
        assert_eq!(at, Matrix::identity(3));
        assert_eq!(ax, Matrix::identity(3));
        let shifted = TiltFamily::monomials(&[0, 1], &[0, 0]).unwrap();
        let (_, ax) = banded_tilt_matrices(&shifted, 2, 2, 3).unwrap();
        assert_eq!(ax[(2, 1)], C64::new(1.0, 0.0));
        assert_eq!(ax[(1, 1)], C64::zero());
        assert!(banded_tilt_matrices(&shifted, 2, 2, 2).is_err());

        let f = time_factorization(&tv(&[0.3]), 64).unwrap();
        let tilts = random_tilts(4, 3);
        let (l, r) = banded_identity_check(&f, &tilts, 3, 6, 6, 64).unwrap();
        assert!((l - r).norm() <= 1e-9 * r.norm(), "{l} {r}");
    }

    #[test]
    fn hankel_and_kernel_flows() {
        let t = tv(&[0.2, 0.05]);
        for r in 1..=2 {
            assert!(hankel_flow_check(&t, r, 64).unwrap().max_abs_error <= 1e-6);
            assert!(flow_check_k(&t, r, 64).unwrap().max_abs_error <= 1e-6);
            assert!(leibniz_check(&t, r, 64).unwrap() <= 1e-10);
        }
        let zero = flow_rhs_K(&tv(&[0.0]), 1, 16).unwrap();
        assert!(zero.max_abs() < 1e-15);
        assert!(flow_rhs_K(&t, 3, 16).is_err());
    }

    #[test]
    fn resolvent_flows() {
        let rep = flow_rhs_Y(&tv(&[0.3]), &TiltFamily::ones(3), 3, 1, 64, FlowBlock::Tilted).unwrap();
        assert!(rep.max_abs_error <= 1e-6, "{}", rep.max_abs_error);
        let rep = flow_rhs_Y(&tv(&[0.2, 0.05]), &TiltFamily::ones(1), 1, 2, 64, FlowBlock::Rectangular(5, 4)).unwrap();
        assert!(rep.max_abs_error <= 1e-6);
        let rep = flow_rhs_Y(&tv(&[0.0]), &TiltFamily::ones(2), 2, 1, 32, FlowBlock::Rectangular(3, 3)).unwrap();
        let s = Matrix::from_fn(3, 3, |i, j| C64::new(((i + 1 == j) || (j + 1 == i)) as u8 as f64, 0.0));
        assert!(rep.analytic.max_abs_diff(&s) <= 1e-10);
        assert!(rep.max_abs_error <= 1e-6);
        let tilts = random_tilts(8, 3);
        let rep = flow_rhs_Y(&tv(&[0.2, 0.05]), &tilts, 3, 1, 64, FlowBlock::Tilted).unwrap();
        assert!(rep.max_abs_error <= 1e-6);
    }

    #[test]
    fn telescoping_is_exact_algebra() {
        for r in 1..=2 {
            assert!(telescoping_check(&tv(&[0.2, 0.05]), r, 5, 4, 48).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn tau_derivatives() {
        let (a, n) = tau_log_derivative(&tv(&[0.3]), &TiltFamily::ones(3), 3, 1, 64).unwrap();
        assert!((a - n).norm() <= 1e-6);
        let (a, n) = tau_log_derivative(&tv(&[0.3]), &TiltFamily::ones(0), 0, 1, 64).unwrap();
        assert!((a - C64::new(-0.6, 0.0)).norm() < 1e-15);
        assert!((n - a).norm() <= 1e-6);
        let tilts = random_tilts(3, 3);
        for r in 1..=2 {
            let (a, n) = tau_log_derivative(&tv(&[0.2, 0.05]), &tilts, 3, r, 64).unwrap();
            assert!((a - n).norm() <= 1e-6, "{a} {n}");
        }
    }

    #[test]
    fn szego_constant_of_time_symbols() {
        for t in [vec![0.3], vec![0.2, 0.05], vec![0.25, 0.02], vec![0.4, -0.4, 0.1]] {
            let (det, exact) = szego_exactness(&tv(&t), 128).unwrap();
            assert!((det - exact).abs() <= 1e-8 * exact);
        }
    }

    #[test]
    fn closure_on_a_point_has_rank_one() {
        let b = TimeBox::new(vec![0.3], vec![0.3]).unwrap();
        let rep = closure_experiment(1, 3, 2, 40, b).unwrap();
        assert_eq!(rep.rank_without_shifts, 1);
        assert_eq!(rep.rank_with_shifts, 1);
        assert_eq!(rep.resolvent_rank_without_shifts, 1);
        assert_eq!(rep.resolvent_rank_with_shifts, 1);
        assert!(closure_experiment(1, 3, 2, 10, TimeBox::new(vec![0.1], vec![0.2]).unwrap()).is_err());
    }

    #[test]
    fn sample_times_are_order_independent() {
        let b = TimeBox::new(vec![0.1, 0.0], vec![0.3, 0.1]).unwrap();
        let a = closure_sample_time(5, 7, &b);
        let _ = closure_sample_time(5, 3, &b);
        assert_eq!(a, closure_sample_time(5, 7, &b));
        assert_ne!(a, closure_sample_time(5, 8, &b));
    }
}
