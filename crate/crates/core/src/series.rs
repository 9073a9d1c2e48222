//! Truncated Laurent series and Wiener-Hopf factorization of symbols.
//!
//! A [`LaurentSeries`] stores a contiguous window of coefficients. Each side
//! of the window is either *exact* (every coefficient beyond it is zero) or
//! *clipped* (the true series continues and is unknown here). Operators that
//! need a coefficient outside the window fail only on clipped sides, so
//! Laurent polynomials such as `z` behave like the infinite objects they are.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;

use num_traits::Zero;

use crate::error::domain;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    lo: i64,
    coeffs: Vec<C64>,
    clipped_below: bool,
    clipped_above: bool,
}

impl LaurentSeries {
    /// A Laurent polynomial: coefficients outside the window are exactly zero.
    pub fn polynomial(lo: i64, coeffs: Vec<C64>) -> Result<Self> {
        Self::truncated(lo, coeffs, false, false)
    }

    /// Real Laurent polynomial, mostly for tests and configs.
    pub fn from_real(lo: i64, coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(lo, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// A window of a longer series; the flags say which sides continue.
    pub fn truncated(
        lo: i64,
        coeffs: Vec<C64>,
        clipped_below: bool,
        clipped_above: bool,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(domain("Laurent series needs at least one coefficient"));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("Laurent series coefficients must be finite"));
        }
        Ok(LaurentSeries {
            lo,
            coeffs,
            clipped_below,
            clipped_above,
        })
    }

    pub fn constant(c: C64) -> Self {
        LaurentSeries {
            lo: 0,
            coeffs: vec![c],
            clipped_below: false,
            clipped_above: false,
        }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// `z^k`.
    pub fn monomial(k: i64) -> Self {
        LaurentSeries {
            lo: k,
            coeffs: vec![C64::new(1.0, 0.0)],
            clipped_below: false,
            clipped_above: false,
        }
    }

    #[inline]
    pub fn lo(&self) -> i64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_clipped_below(&self) -> bool {
        self.clipped_below
    }

    pub fn is_clipped_above(&self) -> bool {
        self.clipped_above
    }

    /// True when both sides are exact.
    pub fn is_laurent_polynomial(&self) -> bool {
        !self.clipped_below && !self.clipped_above
    }

    /// Coefficient of `z^k`; zero outside the stored window.
    #[inline]
    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.lo || k > self.hi() {
            C64::zero()
        } else {
            self.coeffs[(k - self.lo) as usize]
        }
    }

    /// Coefficient of `z^k`, failing if `k` lies beyond a clipped side.
    pub fn checked_coeff(&self, k: i64) -> Result<C64> {
        self.require(k, k)?;
        Ok(self.coeff(k))
    }

    /// Fails unless every coefficient in `lo..=hi` is known.
    pub fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if lo > hi {
            return Ok(());
        }
        let below_ok = !self.clipped_below || lo >= self.lo;
        let above_ok = !self.clipped_above || hi <= self.hi();
        if below_ok && above_ok {
            Ok(())
        } else {
            Err(Error::Window {
                needed_lo: lo,
                needed_hi: hi,
                have_lo: self.lo,
                have_hi: self.hi(),
            })
        }
    }

    /// Lowest and highest exponents carrying a nonzero coefficient.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.coeffs.iter().position(|z| !z.is_zero())?;
        let last = self.coeffs.iter().rposition(|z| !z.is_zero())?;
        Some((self.lo + first as i64, self.lo + last as i64))
    }

    /// `f(1/z)`.
    pub fn reflect(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        LaurentSeries {
            lo: -self.hi(),
            coeffs,
            clipped_below: self.clipped_above,
            clipped_above: self.clipped_below,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        LaurentSeries {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|&z| z * c).collect(),
            clipped_below: self.clipped_below,
            clipped_above: self.clipped_above,
        }
    }

    /// Narrows the window; dropping nonzero coefficients marks that side clipped.
    pub fn restrict(&self, window: RangeInclusive<i64>) -> Self {
        let lo = (*window.start()).max(self.lo);
        let hi = (*window.end()).min(self.hi());
        if lo > hi {
            return LaurentSeries {
                lo: *window.start(),
                coeffs: vec![C64::zero()],
                clipped_below: true,
                clipped_above: true,
            };
        }
        let coeffs: Vec<C64> = (lo..=hi).map(|k| self.coeff(k)).collect();
        let dropped_below = (self.lo..lo).any(|k| !self.coeff(k).is_zero());
        let dropped_above = (hi + 1..=self.hi()).any(|k| !self.coeff(k).is_zero());
        LaurentSeries {
            lo,
            coeffs,
            clipped_below: self.clipped_below || dropped_below,
            clipped_above: self.clipped_above || dropped_above,
        }
    }
}

/// Which half of the circle a rational factor is analytic on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `prod (1 - x z)^{-1}`, analytic in the unit disk.
    Plus,
    /// `prod (1 - y / z)^{-1}`, analytic outside the unit disk.
    Minus,
}

fn check_points(points: &[C64]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(domain("rational factor points must be finite"));
        }
        if p.norm() >= 1.0 {
            return Err(domain(alloc::format!(
                "rational factor point {p} has modulus >= 1; the factor must be analytic on the closed unit disk side"
            )));
        }
        if points[..i].contains(p) {
            return Err(domain(alloc::format!("duplicate rational factor point {p}")));
        }
    }
    Ok(())
}

/// `prod (1 - x_k z)^{-1}` on `[0, half_width]` (plus side) or
/// `prod (1 - y_l / z)^{-1}` on `[-half_width, 0]` (minus side).
pub fn make_rational_factor(points: &[C64], side: Side, half_width: usize) -> Result<LaurentSeries> {
    if half_width < 1 {
        return Err(domain("rational factor needs half_width >= 1"));
    }
    check_points(points)?;
    let mut g = vec![C64::zero(); half_width + 1];
    g[0] = C64::new(1.0, 0.0);
    for &x in points {
        for n in 1..=half_width {
            let prev = g[n - 1];
            g[n] += x * prev;
        }
    }
    let plus = LaurentSeries::truncated(0, g, false, !points.is_empty())?;
    Ok(match side {
        Side::Plus => plus,
        Side::Minus => plus.reflect(),
    })
}

/// `prod (1 - x_k z)` as an exact polynomial.
fn linear_product(points: &[C64]) -> LaurentSeries {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &x in points {
        p.push(C64::zero());
        for n in (1..p.len()).rev() {
            let prev = p[n - 1];
            p[n] -= x * prev;
        }
    }
    LaurentSeries {
        lo: 0,
        coeffs: p,
        clipped_below: false,
        clipped_above: false,
    }
}

/// Exact convolution of `f` and `g` restricted to `window` and to the range
/// where every contributing coefficient is known.
pub fn series_multiply(f: &LaurentSeries, g: &LaurentSeries, window: RangeInclusive<i64>) -> LaurentSeries {
    let (fl, fh, gl, gh) = (f.lo, f.hi(), g.lo, g.hi());
    let mut lo_valid = i64::MIN;
    let mut hi_valid = i64::MAX;
    if f.clipped_above {
        hi_valid = hi_valid.min(if g.clipped_below { i64::MIN } else { fh + gl });
    }
    if g.clipped_above {
        hi_valid = hi_valid.min(if f.clipped_below { i64::MIN } else { gh + fl });
    }
    if f.clipped_below {
        lo_valid = lo_valid.max(if g.clipped_above { i64::MAX } else { fl + gh });
    }
    if g.clipped_below {
        lo_valid = lo_valid.max(if f.clipped_above { i64::MAX } else { gl + fh });
    }
    let rl = (*window.start()).max(fl + gl).max(lo_valid);
    let rh = (*window.end()).min(fh + gh).min(hi_valid);
    if rl > rh {
        return LaurentSeries {
            lo: *window.start(),
            coeffs: vec![C64::zero()],
            clipped_below: true,
            clipped_above: true,
        };
    }
    let coeffs = (rl..=rh)
        .map(|k| {
            let i0 = fl.max(k - gh);
            let i1 = fh.min(k - gl);
            (i0..=i1).map(|i| f.coeff(i) * g.coeff(k - i)).sum()
        })
        .collect();
    LaurentSeries {
        lo: rl,
        coeffs,
        clipped_below: f.clipped_below || g.clipped_below || rl > fl + gl,
        clipped_above: f.clipped_above || g.clipped_above || rh < fh + gh,
    }
}

/// Convolution of the stored windows, treating everything outside them as
/// zero. Only meaningful when the clipped tails are negligible; the result is
/// flagged clipped on every side where an input was.
pub fn series_multiply_truncated(
    f: &LaurentSeries,
    g: &LaurentSeries,
    window: RangeInclusive<i64>,
) -> LaurentSeries {
    let as_exact = |s: &LaurentSeries| LaurentSeries {
        lo: s.lo,
        coeffs: s.coeffs.clone(),
        clipped_below: false,
        clipped_above: false,
    };
    let mut out = series_multiply(&as_exact(f), &as_exact(g), window);
    out.clipped_below |= f.clipped_below || g.clipped_below;
    out.clipped_above |= f.clipped_above || g.clipped_above;
    out
}

/// `exp(f)` for `f` supported strictly on positive (or strictly on negative)
/// exponents, to `order` terms.
pub fn series_exp(f: &LaurentSeries, order: usize) -> Result<LaurentSeries> {
    let Some((slo, shi)) = f.support() else {
        if f.clipped_below || f.clipped_above {
            return Err(domain("series_exp: support of a clipped zero window is unknown"));
        }
        return Ok(LaurentSeries::one());
    };
    if slo > 0 && !f.clipped_below {
        exp_positive(f, order)
    } else if shi < 0 && !f.clipped_above {
        Ok(exp_positive(&f.reflect(), order)?.reflect())
    } else {
        Err(domain(
            "series_exp needs support strictly on positive or strictly on negative exponents",
        ))
    }
}

fn exp_positive(f: &LaurentSeries, order: usize) -> Result<LaurentSeries> {
    let order = if f.clipped_above {
        order.min(f.hi().max(0) as usize)
    } else {
        order
    };
    let mut g = vec![C64::zero(); order + 1];
    g[0] = C64::new(1.0, 0.0);
    let kf: Vec<C64> = (0..=order as i64).map(|k| f.coeff(k) * k as f64).collect();
    let top = f.hi().max(0) as usize;
    for n in 1..=order {
        let mut s = C64::zero();
        for k in 1..=n.min(top) {
            s += kf[k] * g[n - k];
        }
        g[n] = s / n as f64;
    }
    LaurentSeries::truncated(0, g, false, true)
}

/// Value of the stored window at `z`.
pub fn series_eval(f: &LaurentSeries, z: C64) -> Result<C64> {
    let has_negative = (f.lo..0).any(|k| !f.coeff(k).is_zero());
    if z.is_zero() && has_negative {
        return Err(domain("series_eval at z = 0 with negative exponents"));
    }
    let mut pos = C64::zero();
    for k in (f.lo.max(0)..=f.hi()).rev() {
        pos = pos * z + f.coeff(k);
    }
    if f.lo > 0 {
        pos *= z.powi(f.lo as i32);
    }
    let mut neg = C64::zero();
    if has_negative {
        let w = z.inv();
        let top = f.hi().min(-1);
        for k in f.lo..=top {
            neg = neg * w + f.coeff(k);
        }
        neg *= w.powi((-top) as i32);
    }
    Ok(pos + neg)
}

/// Coefficients of `exp(sum t_r (z^r + z^{-r}))` on `[-half_width, half_width]`.
pub fn make_exponential_symbol(times: &[f64], half_width: usize) -> Result<LaurentSeries> {
    check_times(times, half_width)?;
    let hw = half_width as i64;
    if times.iter().all(|&t| t == 0.0) {
        return Ok(LaurentSeries::one().widen(-hw..=hw));
    }
    let p = time_polynomial(times);
    let g = series_exp(&p, 2 * half_width + 32)?;
    let gc = g.coeffs();
    let mut coeffs = vec![C64::zero(); 2 * half_width + 1];
    for k in 0..=half_width {
        let v: C64 = (0..gc.len() - k).map(|j| gc[j + k] * gc[j]).sum();
        coeffs[half_width + k] = v;
        coeffs[half_width - k] = v;
    }
    LaurentSeries::truncated(-hw, coeffs, true, true)
}

impl LaurentSeries {
    /// Pads an exact window with explicit zeros so it spans `window`.
    fn widen(&self, window: RangeInclusive<i64>) -> Self {
        let lo = (*window.start()).min(self.lo);
        let hi = (*window.end()).max(self.hi());
        LaurentSeries {
            lo,
            coeffs: (lo..=hi).map(|k| self.coeff(k)).collect(),
            clipped_below: self.clipped_below,
            clipped_above: self.clipped_above,
        }
    }
}

fn check_times(times: &[f64], half_width: usize) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(domain("symbol times must be finite"));
    }
    if half_width < 2 * times.len() {
        return Err(domain(alloc::format!(
            "half_width {half_width} < 2 * {} would clip the exponent polynomial",
            times.len()
        )));
    }
    Ok(())
}

/// `sum_r t_r z^r`.
fn time_polynomial(times: &[f64]) -> LaurentSeries {
    let mut c = vec![C64::zero(); times.len() + 1];
    for (r, &t) in times.iter().enumerate() {
        c[r + 1] = C64::new(t, 0.0);
    }
    LaurentSeries {
        lo: 0,
        coeffs: c,
        clipped_below: false,
        clipped_above: false,
    }
}

/// The two symbolic families a factorization can start from.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    /// `exp(sum_r t_r (z^r + z^{-r}))`.
    Exponential { times: Vec<f64> },
    /// `prod (1 - x_k z)^{-1} prod (1 - y_l / z)^{-1}`.
    Rational { plus: Vec<C64>, minus: Vec<C64> },
}

impl Symbol {
    pub fn exponential(times: &[f64]) -> Self {
        Symbol::Exponential {
            times: times.to_vec(),
        }
    }

    pub fn rational(plus: &[C64], minus: &[C64]) -> Self {
        Symbol::Rational {
            plus: plus.to_vec(),
            minus: minus.to_vec(),
        }
    }

    pub fn rational_real(plus: &[f64], minus: &[f64]) -> Self {
        let c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect();
        Symbol::Rational {
            plus: c(plus),
            minus: c(minus),
        }
    }

    pub fn validate(&self, half_width: usize) -> Result<()> {
        match self {
            Symbol::Exponential { times } => check_times(times, half_width),
            Symbol::Rational { plus, minus } => {
                check_points(plus)?;
                check_points(minus)
            }
        }
    }

    /// Coefficient `k` of `log phi`.
    pub fn log_coeff(&self, k: i64) -> C64 {
        match self {
            Symbol::Exponential { times } => {
                let r = k.unsigned_abs() as usize;
                if r == 0 || r > times.len() {
                    C64::zero()
                } else {
                    C64::new(times[r - 1], 0.0)
                }
            }
            Symbol::Rational { plus, minus } => {
                let pts = match k {
                    0 => return C64::zero(),
                    k if k > 0 => plus,
                    _ => minus,
                };
                let n = k.unsigned_abs() as i32;
                pts.iter().map(|p| p.powi(n)).sum::<C64>() / n as f64
            }
        }
    }
}

/// Wiener-Hopf data of one symbol, `phi = G phi_- phi_+`.
#[derive(Clone, Debug)]
pub struct SymbolFactorization {
    pub symbol: Symbol,
    pub phi: LaurentSeries,
    pub log_phi: LaurentSeries,
    pub phi_plus: LaurentSeries,
    pub phi_minus: LaurentSeries,
    pub geometric_mean: C64,
    pub b: LaurentSeries,
    pub c_tilde: LaurentSeries,
    pub szego_z: C64,
    /// Bound on the part of the Szego sum beyond the retained exponents.
    pub szego_tail_bound: f64,
    pub truncation_order: usize,
}

/// Splits `log phi` into its halves and exponentiates them.
///
/// Takes the symbolic description rather than a coefficient window, so only
/// symbols whose logarithm is known in closed form can enter.
pub fn series_log_split(symbol: &Symbol, half_width: usize) -> Result<SymbolFactorization> {
    symbol.validate(half_width)?;
    if half_width < 1 {
        return Err(domain("half_width must be positive"));
    }
    let hw = half_width as i64;
    let (log_phi, log_exact) = match symbol {
        Symbol::Exponential { .. } => (
            (-hw..=hw).map(|k| symbol.log_coeff(k)).collect::<Vec<_>>(),
            true,
        ),
        Symbol::Rational { plus, minus } => (
            (-hw..=hw).map(|k| symbol.log_coeff(k)).collect(),
            plus.is_empty() && minus.is_empty(),
        ),
    };
    let log_phi = LaurentSeries::truncated(-hw, log_phi, !log_exact, !log_exact)?;
    let geometric_mean = log_phi.coeff(0).exp();

    let extended = 2 * half_width + 32;
    let (phi, phi_plus, phi_minus, b, c_tilde, szego_z, szego_tail_bound) = match symbol {
        Symbol::Exponential { times } => {
            let p = time_polynomial(times);
            let phi_plus = series_exp(&p, half_width)?;
            let phi_minus = series_exp(&p.reflect(), half_width)?;
            let phi = make_exponential_symbol(times, half_width)?;
            let b = unimodular_exponential_coeffs(times, half_width);
            let z: f64 = times
                .iter()
                .enumerate()
                .map(|(i, t)| (i + 1) as f64 * t * t)
                .sum();
            (phi, phi_plus, phi_minus, b.clone(), b, C64::new(z.exp(), 0.0), 0.0)
        }
        Symbol::Rational { plus, minus } => {
            let phi_plus = make_rational_factor(plus, Side::Plus, half_width)?;
            let phi_minus = make_rational_factor(minus, Side::Minus, half_width)?;
            let wide_plus = make_rational_factor(plus, Side::Plus, extended)?;
            let wide_minus = make_rational_factor(minus, Side::Minus, extended)?;
            let phi = two_sided_product(&wide_plus, &wide_minus, half_width);
            // b = prod(1 - x z) / prod(1 - y/z), c~ = prod(1 - y z) / prod(1 - x/z).
            let b = series_multiply(&linear_product(plus), &wide_minus, -hw..=hw);
            let c_minus = make_rational_factor(plus, Side::Minus, extended)?;
            let c_tilde = series_multiply(&linear_product(minus), &c_minus, -hw..=hw);
            let (z, tail) = rational_szego(plus, minus, half_width);
            (phi, phi_plus, phi_minus, b, c_tilde, z, tail)
        }
    };
    Ok(SymbolFactorization {
        symbol: symbol.clone(),
        phi,
        log_phi,
        phi_plus,
        phi_minus,
        geometric_mean,
        b,
        c_tilde,
        szego_z,
        szego_tail_bound,
        truncation_order: half_width,
    })
}

/// `phi_+ phi_-` on `[-hw, hw]` from long one-sided windows.
fn two_sided_product(plus: &LaurentSeries, minus: &LaurentSeries, hw: usize) -> LaurentSeries {
    let p = plus.coeffs();
    let len = p.len().min(minus.coeffs().len());
    let m = |j: usize| minus.coeff(-(j as i64));
    let mut coeffs = vec![C64::zero(); 2 * hw + 1];
    for (idx, k) in (-(hw as i64)..=hw as i64).enumerate() {
        // sum_j plus_{k+j} minus_{-j} over j >= max(0, -k)
        let j0 = (-k).max(0) as usize;
        let mut s = C64::zero();
        for j in j0..len {
            let pi = (k + j as i64) as usize;
            if pi >= p.len() {
                break;
            }
            s += p[pi] * m(j);
        }
        coeffs[idx] = s;
    }
    let clipped = plus.is_clipped_above() || minus.is_clipped_below();
    LaurentSeries {
        lo: -(hw as i64),
        coeffs,
        clipped_below: clipped,
        clipped_above: clipped,
    }
}

fn rational_szego(plus: &[C64], minus: &[C64], hw: usize) -> (C64, f64) {
    let mut s = C64::zero();
    for k in 1..=hw as i32 {
        let px: C64 = plus.iter().map(|x| x.powi(k)).sum();
        let py: C64 = minus.iter().map(|y| y.powi(k)).sum();
        s += px * py / k as f64;
    }
    let rx = plus.iter().fold(0.0, |m: f64, x| m.max(x.norm()));
    let ry = minus.iter().fold(0.0, |m: f64, y| m.max(y.norm()));
    let rho = rx * ry;
    let n = (plus.len() * minus.len()) as f64;
    let tail = if rho == 0.0 {
        0.0
    } else {
        n * rho.powi(hw as i32 + 1) / ((hw as f64 + 1.0) * (1.0 - rho))
    };
    (s.exp(), tail)
}

/// Fourier coefficients of `exp(sum_r t_r (z^{-r} - z^r))` on `[-hw, hw]`.
///
/// The function has modulus one on the circle, so the trapezoidal rule is
/// accurate to roughly machine epsilon in absolute terms for every
/// coefficient, while the one-sided product `phi_- / phi_+` loses all
/// accuracy to cancellation once the times are large.
fn unimodular_exponential_coeffs(times: &[f64], hw: usize) -> LaurentSeries {
    let hwi = hw as i64;
    if times.iter().all(|&t| t == 0.0) {
        let mut c = vec![C64::zero(); 2 * hw + 1];
        c[hw] = C64::new(1.0, 0.0);
        return LaurentSeries {
            lo: -hwi,
            coeffs: c,
            clipped_below: false,
            clipped_above: false,
        };
    }
    let p = (4 * hw + 64).next_power_of_two();
    let step = 2.0 * PI / p as f64;
    let samples: Vec<C64> = (0..p)
        .map(|j| {
            let th = step * j as f64;
            let phase: f64 = times
                .iter()
                .enumerate()
                .map(|(r, &t)| -2.0 * t * ((r + 1) as f64 * th).sin())
                .sum();
            C64::new(phase.cos(), phase.sin())
        })
        .collect();
    let roots: Vec<C64> = (0..p)
        .map(|k| {
            let a = -step * k as f64;
            C64::new(a.cos(), a.sin())
        })
        .collect();
    let pi = p as i64;
    let coeffs = (-hwi..=hwi)
        .map(|n| {
            let nn = n.rem_euclid(pi) as usize;
            let mut s = C64::zero();
            let mut idx = 0usize;
            for v in &samples {
                s += v * roots[idx];
                idx += nn;
                if idx >= p {
                    idx -= p;
                }
            }
            s / p as f64
        })
        .collect();
    LaurentSeries {
        lo: -hwi,
        coeffs,
        clipped_below: true,
        clipped_above: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bessel_i(k: u32, x: f64) -> f64 {
        // Direct power series sum_m (x/2)^{k+2m} / (m! (m+k)!).
        let h = x / 2.0;
        let mut term = h.powi(k as i32);
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
    fn exponential_symbol_is_bessel() {
        let f = make_exponential_symbol(&[0.3], 40).unwrap();
        for k in 0..=5i64 {
            let want = bessel_i(k as u32, 0.6);
            assert!((f.coeff(k).re - want).abs() < 1e-15, "k={k}");
            assert_eq!(f.coeff(k), f.coeff(-k));
        }
        assert_eq!(make_exponential_symbol(&[], 4).unwrap().coeff(0), c(1.0));
        assert_eq!(make_exponential_symbol(&[], 4).unwrap().coeff(1), c(0.0));
    }

    #[test]
    fn two_time_symbol_is_convolution_of_single_times() {
        let f = make_exponential_symbol(&[0.2, 0.01], 30).unwrap();
        let a = make_exponential_symbol(&[0.2], 60).unwrap();
        let b2 = make_exponential_symbol(&[0.0, 0.01], 60).unwrap();
        let brute = series_multiply_truncated(&a, &b2, -30..=30);
        for k in -30..=30 {
            assert!((f.coeff(k) - brute.coeff(k)).norm() < 1e-15);
            assert_eq!(f.coeff(k).im, 0.0);
            assert_eq!(f.coeff(k), f.coeff(-k));
        }
        assert!(f.coeff(0).re > 0.0);
    }

    #[test]
    fn exponential_symbol_rejects_short_window() {
        assert!(make_exponential_symbol(&[0.1, 0.2], 3).is_err());
    }

    #[test]
    fn rational_factor_expansions() {
        let f = make_rational_factor(&[c(0.3)], Side::Minus, 10).unwrap();
        for m in 0..=10 {
            assert!((f.coeff(-m) - c(0.3f64.powi(m as i32))).norm() < 1e-16);
        }
        let g = make_rational_factor(&[c(0.3), c(0.5)], Side::Minus, 10).unwrap();
        assert!((g.coeff(-2) - c(0.49)).norm() < 1e-15);
        let e = make_rational_factor(&[], Side::Plus, 5).unwrap();
        assert_eq!(e.coeff(0), c(1.0));
        assert!(e.is_laurent_polynomial());
        assert!(make_rational_factor(&[c(1.0)], Side::Plus, 5).is_err());
        assert!(make_rational_factor(&[c(0.2), c(0.2)], Side::Plus, 5).is_err());
    }

    #[test]
    fn multiply_basics() {
        let z = LaurentSeries::monomial(1);
        let zi = LaurentSeries::monomial(-1);
        assert_eq!(series_multiply(&z, &zi, -5..=5).coeff(0), c(1.0));
        let p = LaurentSeries::from_real(0, &[1.0, 1.0]).unwrap();
        let sq = series_multiply(&p, &p, -10..=10);
        assert_eq!((sq.coeff(0), sq.coeff(1), sq.coeff(2)), (c(1.0), c(2.0), c(1.0)));
        assert!(sq.is_laurent_polynomial());
        let g = make_rational_factor(&[c(0.4)], Side::Plus, 8).unwrap();
        let h = series_multiply(&LaurentSeries::one(), &g, 0..=5);
        assert_eq!(h.hi(), 5);
        assert!((h.coeff(5) - g.coeff(5)).norm() == 0.0);
    }

    #[test]
    fn multiply_tracks_validity_of_clipped_inputs() {
        let g = make_rational_factor(&[c(0.4)], Side::Plus, 8).unwrap();
        let z3 = LaurentSeries::monomial(3);
        let prod = series_multiply(&z3, &g, -100..=100);
        assert_eq!((prod.lo(), prod.hi()), (3, 11));
        assert!(prod.require(0, 11).is_ok());
        assert!(prod.require(0, 12).is_err());
    }

    #[test]
    fn exp_of_simple_series() {
        let zero = LaurentSeries::constant(c(0.0));
        assert_eq!(series_exp(&zero, 5).unwrap(), LaurentSeries::one());
        let t = 0.7;
        let f = LaurentSeries::from_real(1, &[t]).unwrap();
        let g = series_exp(&f, 12).unwrap();
        let mut fact = 1.0;
        for n in 0..=12 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((g.coeff(n) - c(t.powi(n as i32) / fact)).norm() < 1e-15);
        }
        let f2 = LaurentSeries::from_real(1, &[0.3, 0.2]).unwrap();
        let g2 = series_exp(&f2, 4).unwrap();
        assert!((g2.coeff(2) - c(0.045 + 0.2)).norm() < 1e-15);
        let neg = series_exp(&f.reflect(), 6).unwrap();
        assert!((neg.coeff(-3) - c(t.powi(3) / 6.0)).norm() < 1e-15);
        assert!(series_exp(&LaurentSeries::from_real(0, &[1.0, 1.0]).unwrap(), 3).is_err());
        assert!(series_exp(&LaurentSeries::from_real(-1, &[1.0, 0.0, 1.0]).unwrap(), 3).is_err());
    }

    #[test]
    fn eval_matches_closed_forms() {
        assert_eq!(series_eval(&LaurentSeries::one(), c(0.3)).unwrap(), c(1.0));
        let g = make_rational_factor(&[c(0.5)], Side::Plus, 40).unwrap();
        let v = series_eval(&g, c(0.4)).unwrap();
        assert!((v - c(1.25)).norm() < 1e-12);
        let s = LaurentSeries::from_real(-1, &[1.0, 0.0, 1.0]).unwrap();
        assert!(series_eval(&s, C64::i()).unwrap().norm() < 1e-16);
        assert!(series_eval(&s, c(0.0)).is_err());
        let m = make_rational_factor(&[c(0.3)], Side::Minus, 60).unwrap();
        assert!((series_eval(&m, c(2.0)).unwrap() - c(1.0 / (1.0 - 0.15))).norm() < 1e-14);
        let shifted = LaurentSeries::from_real(2, &[1.0, -1.0]).unwrap();
        assert!((series_eval(&shifted, c(2.0)).unwrap() - c(-4.0)).norm() < 1e-15);
        let low = LaurentSeries::from_real(-3, &[2.0, 1.0]).unwrap();
        assert!((series_eval(&low, c(0.5)).unwrap() - c(16.0 + 4.0)).norm() < 1e-13);
    }

    #[test]
    fn trivial_factorization() {
        let f = series_log_split(&Symbol::exponential(&[]), 8).unwrap();
        assert_eq!(f.geometric_mean, c(1.0));
        assert_eq!(f.szego_z, c(1.0));
        for k in -8..=8 {
            let d = if k == 0 { 1.0 } else { 0.0 };
            assert_eq!(f.b.coeff(k), c(d));
            assert_eq!(f.phi_plus.coeff(k), c(d));
            assert_eq!(f.phi_minus.coeff(k), c(d));
        }
        let r = series_log_split(&Symbol::rational(&[], &[]), 8).unwrap();
        assert_eq!(r.szego_z, c(1.0));
        assert_eq!(r.b.coeff(0), c(1.0));
    }

    #[test]
    fn szego_constants() {
        let f = series_log_split(&Symbol::exponential(&[0.3]), 64).unwrap();
        assert!((f.szego_z - c(0.09f64.exp())).norm() < 1e-15);
        let g = series_log_split(&Symbol::exponential(&[0.2, 0.01]), 64).unwrap();
        assert!((g.szego_z - c((0.04f64 + 2.0 * 1e-4).exp())).norm() < 1e-15);
        let x = [c(0.2), c(-0.1)];
        let y = [c(0.3), c(0.5)];
        let r = series_log_split(&Symbol::rational(&x, &y), 64).unwrap();
        let mut want = c(1.0);
        for a in &x {
            for b in &y {
                want /= c(1.0) - a * b;
            }
        }
        assert!((r.szego_z - want).norm() <= 1e-14 + r.szego_tail_bound);
    }

    fn round_trip_error(f: &SymbolFactorization) -> f64 {
        let hw = f.truncation_order as i64;
        let prod = series_multiply_truncated(&f.phi_minus, &f.phi_plus, -hw..=hw);
        (-hw / 2..=hw / 2)
            .map(|k| (prod.coeff(k) * f.geometric_mean - f.phi.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn factorization_round_trip_and_b_c_identity() {
        for sym in [
            Symbol::exponential(&[0.3]),
            Symbol::exponential(&[0.2, 0.05]),
            Symbol::rational_real(&[0.2], &[0.3, 0.5]),
        ] {
            let f = series_log_split(&sym, 96).unwrap();
            assert!(round_trip_error(&f) < 1e-10, "{sym:?} {}", round_trip_error(&f));
            // (b c)_0 = 1 where c(z) = c~(1/z).
            let c_ = f.c_tilde.reflect();
            let bc = series_multiply_truncated(&f.b, &c_, 0..=0);
            assert!((bc.coeff(0) - c(1.0)).norm() < 1e-10, "{sym:?}");
            assert_eq!(f.phi_plus.coeff(0), c(1.0));
            assert_eq!(f.phi_minus.coeff(0), c(1.0));
        }
    }

    #[test]
    fn quadrature_b_matches_one_sided_product_at_small_times() {
        let times = [0.2, 0.05];
        let f = series_log_split(&Symbol::exponential(&times), 40).unwrap();
        let p = time_polynomial(&times);
        let inv_plus = series_exp(&p.scale(c(-1.0)), 120).unwrap();
        let minus = series_exp(&p.reflect(), 120).unwrap();
        let direct = series_multiply_truncated(&minus, &inv_plus, -40..=40);
        for k in -40..=40 {
            assert!((direct.coeff(k) - f.b.coeff(k)).norm() < 1e-15, "k={k} {} {}", direct.coeff(k), f.b.coeff(k));
        }
    }

    #[test]
    fn log_of_rational_factor_exponentiates_back() {
        let pts = [c(0.3), C64::new(-0.2, 0.4), c(0.6)];
        let sym = Symbol::rational(&pts, &[]);
        let logs: Vec<C64> = (0..=80).map(|k| sym.log_coeff(k)).collect();
        let log_plus = LaurentSeries::truncated(0, logs, false, true).unwrap();
        let g = series_exp(&log_plus, 80).unwrap();
        let direct = make_rational_factor(&pts, Side::Plus, 80).unwrap();
        for k in 0..=80 {
            assert!((g.coeff(k) - direct.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn b_decays_superexponentially() {
        let times = [0.3, 0.1];
        let f = series_log_split(&Symbol::exponential(&times), 64).unwrap();
        let ct: f64 = times.iter().map(|t| t.abs()).sum();
        for r in [2.0f64, 3.0] {
            let bound0 = (ct * (r.powi(2) + r.powi(-2))).exp();
            for n in 0..=40 {
                let bound = bound0 * r.powi(-n) + 1e-15;
                assert!(f.b.coeff(n as i64).norm() <= bound, "R={r} n={n}");
                assert!(f.b.coeff(-n as i64).norm() <= bound);
            }
        }
    }

    fn small_series() -> impl Strategy<Value = LaurentSeries> {
        (-3i64..3, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)).prop_map(
            |(lo, v)| {
                LaurentSeries::polynomial(lo, v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                    .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn convolution_is_associative(a in small_series(), b in small_series(), d in small_series()) {
            let w = -30..=30;
            let left = series_multiply(&series_multiply(&a, &b, w.clone()), &d, w.clone());
            let right = series_multiply(&a, &series_multiply(&b, &d, w.clone()), w);
            for k in -20..=20 {
                prop_assert!((left.coeff(k) - right.coeff(k)).norm() < 1e-12);
            }
        }

        #[test]
        fn convolution_is_commutative(a in small_series(), b in small_series()) {
            let (ab, ba) = (series_multiply(&a, &b, -30..=30), series_multiply(&b, &a, -30..=30));
            prop_assert_eq!((ab.lo(), ab.hi()), (ba.lo(), ba.hi()));
            for k in ab.lo()..=ab.hi() {
                prop_assert!((ab.coeff(k) - ba.coeff(k)).norm() < 1e-15);
            }
        }

        #[test]
        fn eval_is_multiplicative(a in small_series(), b in small_series(), re in 0.3f64..1.5, im in -1.0f64..1.0) {
            let z = C64::new(re, im);
            let ab = series_multiply(&a, &b, -30..=30);
            let lhs = series_eval(&ab, z).unwrap();
            let rhs = series_eval(&a, z).unwrap() * series_eval(&b, z).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }
}
