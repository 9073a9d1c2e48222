//! Airy function, Airy and one-spike kernels on `(s, inf)`, and the soft
//! edge checks for the spiked two-time symbol.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Zero;

use crate::error::domain;
use crate::linalg::Matrix;
use crate::quad::{gauss_legendre, integrate_adaptive};
use crate::series::{series_eval, series_log_split, LaurentSeries, Symbol, SymbolFactorization};
use crate::tilt::{fixed_tail_kernel, theta_matrix, tilted_fredholm_rhs, tilted_minor_direct, xi_matrix, TiltFamily};
use crate::{Result, C64};

/// `Ai(0)` and `-Ai'(0)`.
const AI0: f64 = 0.355_028_053_887_817_24;
const AIP0: f64 = 0.258_819_403_792_806_8;
/// Largest `|x|` accepted by [`airy_ai`].
pub const AIRY_RANGE: f64 = 30.0;
/// Power series below this magnitude, other methods outside.
const SERIES_EDGE: f64 = 2.5;
const TAYLOR_STEP: f64 = 0.2;

/// `(Ai(x), Ai'(x))` for `|x| <= 30`.
pub fn airy_ai(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= AIRY_RANGE) {
        return Err(domain("airy_ai supports |x| <= 30"));
    }
    Ok(if x.abs() <= SERIES_EDGE {
        maclaurin(x)
    } else if x > 0.0 {
        bessel_form(x)
    } else {
        taylor_march(x)
    })
}

/// `airy_ai` with the far right tail (below `1e-48`) flushed to zero, for
/// kernels sampled on unbounded grids.
fn ai_or_zero(x: f64) -> (f64, f64) {
    if x > AIRY_RANGE {
        (0.0, 0.0)
    } else {
        airy_ai(x).expect("kernel arguments stay above -30")
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut fp) = (1.0, 0.0);
    let (mut g, mut gp) = (x, 1.0);
    let (mut a, mut b) = (1.0, x);
    for k in 1..200 {
        let kf = k as f64;
        a *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        b *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += a;
        g += b;
        if x != 0.0 {
            fp += 3.0 * kf * a / x;
            gp += (3.0 * kf + 1.0) * b / x;
        }
        if a.abs() + b.abs() < 1e-18 * (f.abs() + g.abs()) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// `Ai = sqrt(x/3) K_{1/3}(z) / pi`, `Ai' = -x K_{2/3}(z) / (pi sqrt 3)`,
/// `z = 2 x^{3/2} / 3`.
fn bessel_form(x: f64) -> (f64, f64) {
    let z = 2.0 / 3.0 * x * x.sqrt();
    let (k13, k43) = bessel_k_pair(1.0 / 3.0, z);
    let k23 = k43 - 2.0 / (3.0 * z) * k13;
    ((x / 3.0).sqrt() * k13 / PI, -x * k23 / (PI * 3f64.sqrt()))
}

/// `(K_nu(x), K_{nu+1}(x))` for `|nu| <= 1/2`, `x >= 1.5`, by Steed's
/// continued fraction with Temme's normalization.
fn bessel_k_pair(nu: f64, x: f64) -> (f64, f64) {
    let mu2 = nu * nu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k * (nu + x + 0.5 - h) / x;
    (k, k1)
}

/// Integrates `y'' = x y` leftwards from the series edge with local Taylor
/// steps; both solutions oscillate there, so the march is stable.
fn taylor_march(x: f64) -> (f64, f64) {
    let (mut y, mut yp) = maclaurin(-SERIES_EDGE);
    let mut x0 = -SERIES_EDGE;
    while x0 > x {
        let h = -(x0 - x).min(TAYLOR_STEP);
        let (mut am1, mut a0, mut a1) = (0.0, y, yp);
        let (mut val, mut der) = (y + yp * h, yp);
        let mut hp = h;
        let scale = y.abs() + yp.abs();
        for k in 0..200 {
            let kf = k as f64;
            let a2 = (x0 * a0 + am1) / ((kf + 1.0) * (kf + 2.0));
            der += (kf + 2.0) * a2 * hp;
            hp *= h;
            let term = a2 * hp;
            val += term;
            am1 = a0;
            a0 = a1;
            a1 = a2;
            if term.abs() < 1e-19 * scale && k > 4 {
                break;
            }
        }
        y = val;
        yp = der;
        x0 += h;
    }
    (y, yp)
}

/// `K_Ai(x, y) = int_0^inf Ai(x+t) Ai(y+t) dt`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    if (x - y).abs() < 1e-6 {
        let m = 0.5 * (x + y);
        let (a, ap) = ai_or_zero(m);
        return ap * ap - m * a * a;
    }
    let (ax, apx) = ai_or_zero(x);
    let (ay, apy) = ai_or_zero(y);
    (ax * apy - apx * ay) / (x - y)
}

/// `Phi_w(x) = int_0^inf e^{-w t} Ai(x + t) dt`.
pub fn phi_w(x: f64, w: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(domain("phi_w needs w > 0"));
    }
    if x >= AIRY_RANGE {
        return Ok(0.0);
    }
    if x < -AIRY_RANGE {
        return Err(domain("phi_w supports x >= -30"));
    }
    let top = AIRY_RANGE - x;
    let f = |t: f64| (-w * t).exp() * ai_or_zero(x + t).0;
    // Break points keep a sharp e^{-wt} layer from hiding between nodes.
    let mut cuts = vec![0.0];
    for c in [1.0 / w, 10.0 / w, 40.0 / w] {
        if c < top && c > *cuts.last().unwrap() {
            cuts.push(c);
        }
    }
    cuts.push(top);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += integrate_adaptive(f, pair[0], pair[1], 1e-17, 1e-13, 400).0;
    }
    Ok(total)
}

/// Change of variables taking `u in (0, 1)` onto `(s, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NystromMap {
    /// `t = s - 2 log(1 - u)`.
    Logarithmic,
    /// `t = s + 2u / (1 - u)`.
    Rational,
}

/// Gauss-Legendre nodes pushed through a [`NystromMap`].
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureGrid {
    pub fn new(s: f64, order: usize, map: NystromMap) -> Self {
        let (u, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (&ui, &wi) in u.iter().zip(&w) {
            let v = 0.5 * (ui + 1.0);
            let wv = 0.5 * wi;
            let (t, dt) = match map {
                NystromMap::Logarithmic => (s - 2.0 * (1.0 - v).ln(), 2.0 / (1.0 - v)),
                NystromMap::Rational => (s + 2.0 * v / (1.0 - v), 2.0 / ((1.0 - v) * (1.0 - v))),
            };
            nodes.push(t);
            weights.push(wv * dt);
        }
        QuadratureGrid { nodes, weights, order }
    }

    /// `det(I - W^{1/2} K W^{1/2})` for kernel samples `k[i][j] = K(x_i, x_j)`.
    pub fn fredholm_det(&self, k: &Matrix) -> f64 {
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let n = self.order;
        let a = Matrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            C64::new(delta - sw[i] * k[(i, j)].re * sw[j], 0.0)
        });
        a.det().re
    }

    pub fn sample(&self, kernel: impl Fn(f64, f64) -> f64) -> Matrix {
        let x = &self.nodes;
        Matrix::from_fn(self.order, self.order, |i, j| C64::new(kernel(x[i], x[j]), 0.0))
    }
}

/// Nystrom approximation of `det(I - K)` on `L^2(s, inf)`.
pub fn nystrom_fredholm(kernel: impl Fn(f64, f64) -> f64, s: f64, order: usize, map: NystromMap) -> f64 {
    let g = QuadratureGrid::new(s, order, map);
    g.fredholm_det(&g.sample(kernel))
}

/// `(value at order, |value at 2 order - value at order|)`.
pub fn nystrom_certified(kernel: impl Fn(f64, f64) -> f64, s: f64, order: usize, map: NystromMap) -> (f64, f64) {
    let v = nystrom_fredholm(&kernel, s, order, map);
    let v2 = nystrom_fredholm(&kernel, s, 2 * order, map);
    (v, (v2 - v).abs())
}

/// Plain Airy determinant `det(I - K_Ai)` on `(s, inf)`.
pub fn airy_det(s: f64, order: usize, map: NystromMap) -> f64 {
    nystrom_fredholm(airy_kernel, s, order, map)
}

fn check_spike(w: f64, s: f64) -> Result<()> {
    if !(w > 0.0) {
        return Err(domain("spike strength w must be positive"));
    }
    if !(s >= -AIRY_RANGE / 2.0 && s <= AIRY_RANGE) {
        return Err(domain("edge s outside the supported range"));
    }
    Ok(())
}

/// Boundary-form and one-spike determinants on `(s, inf)`:
/// kernels `K_Ai(x,y) - E_w(x) K_Ai(s,y)` and `K_Ai(x,y) - Phi_w(x) Ai(y)`.
pub fn bbp_pushthrough_check(w: f64, s: f64, order: usize) -> Result<(f64, f64)> {
    bbp_pushthrough_check_with(w, s, order, NystromMap::Logarithmic)
}

pub fn bbp_pushthrough_check_with(w: f64, s: f64, order: usize, map: NystromMap) -> Result<(f64, f64)> {
    check_spike(w, s)?;
    let g = QuadratureGrid::new(s, order, map);
    let x = &g.nodes;
    let k = g.sample(airy_kernel);
    let e: Vec<f64> = x.iter().map(|&xi| (-w * (xi - s)).exp()).collect();
    let ks: Vec<f64> = x.iter().map(|&yj| airy_kernel(s, yj)).collect();
    let phi: Vec<f64> = x.iter().map(|&xi| phi_w(xi, w)).collect::<Result<_>>()?;
    let ai: Vec<f64> = x.iter().map(|&yj| ai_or_zero(yj).0).collect();
    let n = g.order;
    let boundary = Matrix::from_fn(n, n, |i, j| C64::new(k[(i, j)].re - e[i] * ks[j], 0.0));
    let bbp = Matrix::from_fn(n, n, |i, j| C64::new(k[(i, j)].re - phi[i] * ai[j], 0.0));
    Ok((g.fredholm_det(&boundary), g.fredholm_det(&bbp)))
}

/// Parameters of `phi_L = exp L(a(z + 1/z) + b(z^2 + 1/z^2))` with one
/// spike of strength `w` at edge position `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikedSymbolParams {
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub w: f64,
    pub s: f64,
}

impl SpikedSymbolParams {
    pub fn new(a: f64, b: f64, l: f64, w: f64, s: f64) -> Result<Self> {
        let p = SpikedSymbolParams { a, b, l, w, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.b < self.a / 8.0) {
            return Err(domain("spiked symbol needs a > 0 and 0 < b < a/8"));
        }
        if !(self.l > 0.0 && self.w > 0.0 && self.s.is_finite()) {
            return Err(domain("spiked symbol needs L > 0, w > 0 and finite s"));
        }
        Ok(())
    }

    pub fn chi(&self) -> f64 {
        2.0 * self.a - 4.0 * self.b
    }

    pub fn c(&self) -> f64 {
        (self.a - 8.0 * self.b).cbrt()
    }

    /// `c L^{1/3}`, the soft edge unit.
    pub fn scale(&self) -> f64 {
        self.c() * self.l.cbrt()
    }

    /// `N_L(s) = floor(chi L + c L^{1/3} s)`.
    pub fn n_l(&self) -> usize {
        (self.chi() * self.l + self.scale() * self.s).floor().max(1.0) as usize
    }

    pub fn alpha(&self) -> f64 {
        -(-self.w / self.scale()).exp()
    }

    pub fn times(&self) -> [f64; 2] {
        [self.l * self.a, self.l * self.b]
    }

    /// Degree of the truncated geometric tilt, `64 ceil(L^{1/3})`.
    pub fn tilt_degree(&self) -> usize {
        64 * self.l.cbrt().ceil() as usize
    }

    /// Edge coordinate of lattice index `n`.
    pub fn x_of(&self, n: i64) -> f64 {
        (n as f64 - self.chi() * self.l) / self.scale()
    }
}

/// Column tilts `1, ..., 1, (1 - alpha z)^{-1}` (the last cut at
/// [`SpikedSymbolParams::tilt_degree`]) and unit row tilts.
pub fn spiked_tilts(p: &SpikedSymbolParams) -> Result<TiltFamily> {
    let n = p.n_l();
    let deg = p.tilt_degree();
    let alpha = p.alpha();
    let geo: Vec<C64> = (0..=deg).map(|k| C64::new(alpha.powi(k as i32), 0.0)).collect();
    let mut xi = vec![LaurentSeries::one(); n];
    xi[n - 1] = LaurentSeries::truncated(0, geo, false, true)?;
    TiltFamily::columns(xi)
}

fn spiked_factorization(p: &SpikedSymbolParams, m: usize) -> Result<SymbolFactorization> {
    let hw = (2 * m + 32).max(p.tilt_degree() + p.n_l() + 16);
    series_log_split(&Symbol::exponential(&p.times()), hw)
}

/// Both sides of the exact rank-one form of the spiked fixed-tail kernel.
#[derive(Clone, Debug)]
pub struct SpikedColumnCheck {
    pub n: usize,
    pub m: usize,
    /// Fixed-tail kernel on `[N, M)` from the chart pipeline.
    pub lhs: Matrix,
    /// `K(i,j) - alpha^{i-N+1} K(N-1,j)`.
    pub rhs: Matrix,
    pub max_entry_diff: f64,
    /// Max gap of `(C e_{N-1})_i` against `sum_{i+m >= N-1} h_m alpha^{i+m-N+1}`.
    pub column_structure_err: f64,
    /// Max gap of `Q C (P C)^{-1}` against `v e_{N-1}^T`, `v_i = alpha^{i-N+1}`.
    pub factor_err: f64,
    /// `(C e_{N-1})_{N-1}` and `sum_m h_m alpha^m` from the reflected `phi_-`.
    pub boundary_value: (f64, f64),
    /// `|alpha|^{deg}`, the size of the dropped geometric tail.
    pub tilt_tail_bound: f64,
}

pub fn spiked_column_kernel_exact(p: &SpikedSymbolParams, m: usize) -> Result<SpikedColumnCheck> {
    p.validate()?;
    let n = p.n_l();
    if n + 8 > m {
        return Err(domain("spiked check needs N <= M - 8"));
    }
    let fact = spiked_factorization(p, m)?;
    let tilts = spiked_tilts(p)?;
    let ft = fixed_tail_kernel(&fact, &tilts, n, m)?;
    let lhs = ft.kernel.entries.clone();
    let k = crate::operators::kernel_block(&fact, m, m)?;
    let alpha = p.alpha();
    let rhs = Matrix::from_fn(m - n, m - n, |i, j| {
        k[(n + i, n + j)] - k[(n - 1, n + j)] * alpha.powi(i as i32 + 1)
    });
    let max_entry_diff = lhs.max_abs_diff(&rhs);

    let t_minus = crate::operators::toeplitz_rect(&fact.phi_minus, m, m)?;
    let c = t_minus.matmul(&xi_matrix(&tilts, m));
    let h = |k: i64| fact.phi_minus.coeff(-k);
    let mut column_structure_err = 0.0f64;
    for i in 0..m {
        let mut s = C64::zero();
        for mm in 0..m as i64 {
            let e = i as i64 + mm - (n as i64 - 1);
            if e >= 0 && (i as i64 + mm) < m as i64 {
                s += h(mm) * alpha.powi(e as i32);
            }
        }
        column_structure_err = column_structure_err.max((c[(i, n - 1)] - s).norm());
    }
    let pc = c.block(0..n, 0..n);
    let qc = c.block(n..m, 0..n);
    let factor = pc.transpose().solve(&qc.transpose())?.transpose();
    let mut factor_err = 0.0f64;
    for i in 0..m - n {
        for j in 0..n {
            let expect = if j == n - 1 { alpha.powi(i as i32 + 1) } else { 0.0 };
            factor_err = factor_err.max((factor[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    let boundary = c[(n - 1, n - 1)].re;
    let oracle = series_eval(&fact.phi_minus.reflect(), C64::new(alpha, 0.0))?.re;
    // Unit row tilts: R = P_N T(phi_+), so the chart's theta block is P_N.
    debug_assert_eq!(theta_matrix(&tilts, m).block(0..n, 0..n), Matrix::identity(n));
    Ok(SpikedColumnCheck {
        n,
        m,
        lhs,
        rhs,
        max_entry_diff,
        column_structure_err,
        factor_err,
        boundary_value: (boundary, oracle),
        tilt_tail_bound: alpha.abs().powi(p.tilt_degree() as i32),
    })
}

/// `(G^N Z det(Gamma) det(I - K_N), direct tilted minor)` for the spiked
/// symbol at truncation `m`.
pub fn spiked_discrete_chain(p: &SpikedSymbolParams, m: usize) -> Result<(C64, C64)> {
    let n = p.n_l();
    let fact = spiked_factorization(p, m)?;
    let tilts = spiked_tilts(p)?;
    let rhs = tilted_fredholm_rhs(&fact, &tilts, n, m)?;
    Ok((rhs.value.value(), tilted_minor_direct(&fact.phi, &tilts, n)?))
}

/// Soft edge errors at one `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub l: f64,
    pub n_l: usize,
    pub m: usize,
    pub err_coeff: f64,
    pub err_kernel: f64,
    pub err_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub coeff_decreasing: bool,
    pub kernel_decreasing: bool,
    pub factor_decreasing: bool,
}

/// Edge grid for coefficient errors.
pub const COEFF_GRID: (f64, f64, f64) = (-4.0, 4.0, 0.5);
/// Edge grid for kernel errors.
pub const KERNEL_GRID: (f64, f64, f64) = (-3.0, 3.0, 1.0);

fn grid(g: (f64, f64, f64)) -> Vec<f64> {
    let count = ((g.1 - g.0) / g.2).round() as usize;
    (0..=count).map(|k| g.0 + g.2 * k as f64).collect()
}

/// One `L` of the soft edge sweep. Errors are measured at lattice points:
/// `n = round(chi L + c L^{1/3} x)` compared with `Ai(x_n)`.
pub fn spiked_scaling_row(p: &SpikedSymbolParams) -> Result<ScalingRow> {
    p.validate()?;
    let n_l = p.n_l();
    let m = n_l + p.tilt_degree();
    let fact = series_log_split(&Symbol::exponential(&p.times()), 2 * m + 16)?;
    let scale = p.scale();
    let center = p.chi() * p.l;
    let lattice = |x: f64| (center + scale * x).round() as i64;
    let bn = |n: i64| fact.b.checked_coeff(n).map(|z| z.re);
    let sign = |n: i64| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };

    let mut err_coeff = 0.0f64;
    for x in grid(COEFF_GRID) {
        let n = lattice(x);
        let lhs = sign(n) * scale * bn(n)?;
        err_coeff = err_coeff.max((lhs - airy_ai(p.x_of(n))?.0).abs());
    }

    let mut err_kernel = 0.0f64;
    let pts: Vec<i64> = grid(KERNEL_GRID).into_iter().map(lattice).collect();
    for &i in &pts {
        for &j in &pts {
            let mut k = 0.0;
            for l in 0..m as i64 {
                k += bn(i + l + 1)? * bn(j + l + 1)?;
            }
            let lhs = scale * sign(i + j) * k;
            err_kernel = err_kernel.max((lhs - airy_kernel(p.x_of(i), p.x_of(j))).abs());
        }
    }

    let alpha = p.alpha();
    let mut err_factor = 0.0f64;
    let mut r = 0usize;
    loop {
        let x = p.x_of((n_l + r) as i64);
        if x - p.s > 4.0 {
            break;
        }
        let lhs = sign(r as i64 + 1) * alpha.powi(r as i32 + 1);
        err_factor = err_factor.max((lhs - (-p.w * (x - p.s)).exp()).abs());
        r += 1;
    }
    Ok(ScalingRow {
        l: p.l,
        n_l,
        m,
        err_coeff,
        err_kernel,
        err_factor,
    })
}

pub fn spiked_scaling_check(base: &SpikedSymbolParams, l_list: &[f64]) -> Result<ScalingReport> {
    let rows = l_list
        .iter()
        .map(|&l| spiked_scaling_row(&SpikedSymbolParams { l, ..*base }))
        .collect::<Result<Vec<_>>>()?;
    Ok(scaling_report(rows))
}

/// Strict decrease flags over rows in the given order.
pub fn scaling_report(rows: Vec<ScalingRow>) -> ScalingReport {
    let dec = |f: fn(&ScalingRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    ScalingReport {
        coeff_decreasing: dec(|r| r.err_coeff),
        kernel_decreasing: dec(|r| r.err_kernel),
        factor_decreasing: dec(|r| r.err_factor),
        rows,
    }
}
