//! Partitions, bialternants, Jacobi-Trudi determinants and the
//! Cauchy-Binet expansion of tilted minors.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::domain;
use crate::linalg::Matrix;
use crate::series::{
    make_rational_factor, series_eval, series_multiply_truncated, LaurentSeries, Side, Symbol,
    SymbolFactorization,
};
use crate::tilt::{tilted_minor_direct, TiltFamily};
use crate::{Result, C64};

/// Weakly decreasing nonnegative parts with a length bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
    max_length: usize,
}

impl Partition {
    /// Trailing zeros are dropped.
    pub fn new(mut parts: Vec<usize>, max_length: usize) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(domain("partition parts must be weakly decreasing"));
        }
        if parts.len() > max_length {
            return Err(domain(alloc::format!(
                "partition has {} parts, more than the bound {max_length}",
                parts.len()
            )));
        }
        Ok(Partition { parts, max_length })
    }

    pub fn empty(max_length: usize) -> Self {
        Partition {
            parts: Vec::new(),
            max_length,
        }
    }

    /// Nonzero parts.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Part `i` (0-based), zero past the length.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    /// Young diagram containment `other ⊆ self`.
    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.len()).all(|i| other.part(i) <= self.part(i))
    }
}

/// All partitions with `|mu| <= max_weight` and at most `max_length` parts,
/// by weight and then in decreasing lexicographic order.
pub fn enumerate_partitions(max_weight: usize, max_length: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for w in 0..=max_weight {
        let mut cur = Vec::new();
        push_partitions(w, w, max_length, &mut cur, &mut |p| {
            out.push(Partition {
                parts: p.to_vec(),
                max_length,
            })
        });
    }
    out
}

fn push_partitions(
    remaining: usize,
    cap: usize,
    slots: usize,
    cur: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(cur);
        return;
    }
    if slots == 0 {
        return;
    }
    for p in (1..=cap.min(remaining)).rev() {
        cur.push(p);
        push_partitions(remaining - p, p, slots - 1, cur, emit);
        cur.pop();
    }
}

/// Which tilt family a Jacobi-Trudi sequence family came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceSource {
    /// Coefficients of `xi_j phi_+` in powers of `z`.
    Column,
    /// Coefficients of `theta_i phi_-` in powers of `1/z`.
    Row,
    /// Anything else, e.g. complete homogeneous sequences.
    Plain,
}

/// One-sided sequences `c^{(i)}_r`, `r >= 0`; zero for negative `r` and past
/// the stored length.
#[derive(Clone, Debug, PartialEq)]
pub struct JTSequences {
    pub seqs: Vec<Vec<C64>>,
    pub source: SequenceSource,
}

impl JTSequences {
    #[inline]
    pub fn get(&self, i: usize, r: i64) -> C64 {
        if r < 0 {
            return C64::zero();
        }
        self.seqs[i].get(r as usize).copied().unwrap_or_else(C64::zero)
    }

    /// The family listed in reverse order.
    pub fn reversed(&self) -> JTSequences {
        let mut seqs = self.seqs.clone();
        seqs.reverse();
        JTSequences {
            seqs,
            source: self.source,
        }
    }
}

/// `det[c^{(i)}_{mu_j - j + i}]` of size `N = seqs.len()`.
pub fn jacobi_trudi(mu: &Partition, seqs: &JTSequences) -> Result<C64> {
    let n = seqs.seqs.len();
    if mu.len() > n {
        return Err(domain("partition longer than the sequence family"));
    }
    let m = Matrix::from_fn(n, n, |i, j| seqs.get(i, mu.part(j) as i64 - j as i64 + i as i64));
    Ok(m.det())
}

fn check_alphabet(ys: &[C64]) -> Result<()> {
    for (i, y) in ys.iter().enumerate() {
        if !(y.norm() < 1.0) {
            return Err(domain(alloc::format!("alphabet point {y} is not inside the unit disk")));
        }
        for z in &ys[..i] {
            if (y - z).norm() <= 1e-6 {
                return Err(domain("alphabet points closer than 1e-6; Vandermonde is ill conditioned"));
            }
        }
    }
    Ok(())
}

fn vandermonde(ys: &[C64]) -> C64 {
    let mut d = C64::new(1.0, 0.0);
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            d *= ys[i] - ys[j];
        }
    }
    d
}

/// `det[y_i^{N-j} xi_{N-j+1}(y_i)] / Delta(Y)`.
pub fn bialternant(xi: &[LaurentSeries], ys: &[C64]) -> Result<C64> {
    let n = ys.len();
    if xi.len() != n {
        return Err(domain("bialternant needs one column tilt per alphabet point"));
    }
    check_alphabet(ys)?;
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let power = (n - 1 - j) as i32;
            m[(i, j)] = ys[i].powi(power) * series_eval(&xi[n - 1 - j], ys[i])?;
        }
    }
    Ok(m.det() / vandermonde(ys))
}

/// Column tilts `xi_j = z^{lambda_{N+1-j}}`.
pub fn schur_tilts(lambda: &Partition, n: usize) -> Vec<LaurentSeries> {
    (0..n)
        .map(|j| LaurentSeries::monomial(lambda.part(n - 1 - j) as i64))
        .collect()
}

/// Both sides of `D_N^{xi,1}(phi) = S_xi(Y) prod phi_+(y_l)` for
/// `phi = phi_+ prod (1 - y_l / z)^{-1}`.
pub fn bialternant_factorization_check(
    xi: &[LaurentSeries],
    ys: &[C64],
    phi_plus: &LaurentSeries,
    n: usize,
) -> Result<(C64, C64)> {
    if ys.len() != n || xi.len() != n {
        return Err(domain("bialternant check needs |Y| = N column tilts"));
    }
    if phi_plus.coeff(0) != C64::new(1.0, 0.0) || phi_plus.support().is_some_and(|(lo, _)| lo < 0) {
        return Err(domain("phi_+ must be a power series with constant term 1"));
    }
    let order = 256;
    let minus = make_rational_factor(ys, Side::Minus, order)?;
    let reach = (n + xi.iter().map(|x| x.hi().max(0) as usize).max().unwrap_or(0)) as i64;
    let phi = series_multiply_truncated(phi_plus, &minus, -reach - 1..=reach + 1);
    let tilts = TiltFamily::columns(xi.to_vec())?;
    let lhs = tilted_minor_direct(&phi, &tilts, n)?;
    let mut prod = C64::new(1.0, 0.0);
    for &y in ys {
        prod *= series_eval(phi_plus, y)?;
    }
    Ok((lhs, bialternant(xi, ys)? * prod))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrothendieckVariant {
    /// `xi_j = z^{lambda_hat_j} (1 + beta z)^{N - j}`.
    G,
    /// `xi_j = (1 + beta z)^{lambda_hat_j}`.
    GTilde,
}

fn binomial_power(beta: C64, k: usize) -> LaurentSeries {
    let mut c = vec![C64::zero(); k + 1];
    c[0] = C64::new(1.0, 0.0);
    for _ in 0..k {
        for i in (1..=k).rev() {
            let prev = c[i - 1];
            c[i] += beta * prev;
        }
    }
    LaurentSeries::polynomial(0, c).expect("finite binomial coefficients")
}

pub fn grothendieck_tilts(lambda: &Partition, beta: C64, n: usize, variant: GrothendieckVariant) -> Vec<LaurentSeries> {
    (0..n)
        .map(|j| {
            let lam_hat = lambda.part(n - 1 - j);
            match variant {
                GrothendieckVariant::G => {
                    let p = binomial_power(beta, n - 1 - j);
                    crate::series::series_multiply(
                        &LaurentSeries::monomial(lam_hat as i64),
                        &p,
                        0..=(lam_hat + n) as i64,
                    )
                }
                GrothendieckVariant::GTilde => binomial_power(beta, lam_hat),
            }
        })
        .collect()
}

pub fn grothendieck_eval(
    lambda: &Partition,
    beta: C64,
    ys: &[C64],
    variant: GrothendieckVariant,
) -> Result<C64> {
    let n = ys.len();
    if lambda.len() > n {
        return Err(domain("partition longer than the alphabet"));
    }
    bialternant(&grothendieck_tilts(lambda, beta, n, variant), ys)
}

/// `h_0, ..., h_kmax` of a finite alphabet.
pub fn complete_homogeneous(alphabet: &[C64], kmax: usize) -> Vec<C64> {
    let mut h = vec![C64::zero(); kmax + 1];
    h[0] = C64::new(1.0, 0.0);
    for &x in alphabet {
        for k in 1..=kmax {
            let prev = h[k - 1];
            h[k] += x * prev;
        }
    }
    h
}

/// `s_{eta/lambda}` of a finite alphabet via `det[h_{eta_i - lambda_j - i + j}]`.
pub fn skew_schur(eta: &Partition, lam: &Partition, alphabet: &[C64]) -> C64 {
    let n = eta.len().max(lam.len());
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let h = complete_homogeneous(alphabet, eta.weight() + n);
    let hk = |k: i64| if k < 0 { C64::zero() } else { h.get(k as usize).copied().unwrap_or_else(C64::zero) };
    Matrix::from_fn(n, n, |i, j| {
        hk(eta.part(i) as i64 - lam.part(j) as i64 - i as i64 + j as i64)
    })
    .det()
}

/// Column sequences `a^{(j)}` of `xi_j phi_+` and row sequences `b^{(i)}` of
/// `theta_i phi_-`, each of length `len`.
pub fn cauchy_binet_sequences(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    len: usize,
) -> Result<(JTSequences, JTSequences)> {
    let top = len as i64 - 1;
    fact.phi_plus.require(0, top)?;
    fact.phi_minus.require(-top, 0)?;
    let a = tilts
        .xi
        .iter()
        .map(|x| {
            let p = series_multiply_truncated(x, &fact.phi_plus, 0..=top);
            (0..len as i64).map(|r| p.coeff(r)).collect()
        })
        .collect();
    let b = tilts
        .theta
        .iter()
        .map(|t| {
            let p = series_multiply_truncated(t, &fact.phi_minus, -top..=0);
            (0..len as i64).map(|r| p.coeff(-r)).collect()
        })
        .collect();
    Ok((
        JTSequences {
            seqs: a,
            source: SequenceSource::Column,
        },
        JTSequences {
            seqs: b,
            source: SequenceSource::Row,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct CauchyBinetSum {
    pub partial_sum: C64,
    pub tail_estimate: f64,
    pub weight_cutoff: usize,
    pub terms: usize,
    /// Constant `C` of the bound `|a_r| + |b_r| <= C rho^{-r}`.
    pub cauchy_constant: f64,
}

/// Partial sum of `G^N sum_mu JT_mu(a_rev) JT_mu(b_rev)` over `|mu| <= cutoff`.
pub fn cauchy_binet_sum(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    n: usize,
    weight_cutoff: usize,
    rho: f64,
) -> Result<CauchyBinetSum> {
    if tilts.n() != n {
        return Err(domain("tilt family size differs from N"));
    }
    if !(rho > 1.0) {
        return Err(domain("decay ratio rho must exceed 1"));
    }
    let len = weight_cutoff + n + 1;
    let (a, b) = cauchy_binet_sequences(fact, tilts, len)?;
    let (ar, br) = (a.reversed(), b.reversed());
    let partitions = enumerate_partitions(weight_cutoff, n);
    // Per-weight strata summed in order keep the result reproducible.
    let mut strata = vec![C64::zero(); weight_cutoff + 1];
    for mu in &partitions {
        strata[mu.weight()] += jacobi_trudi(mu, &ar)? * jacobi_trudi(mu, &br)?;
    }
    let gn = fact.geometric_mean.powi(n as i32);
    let partial_sum = strata.iter().sum::<C64>() * gn;
    let cauchy_constant = cauchy_constant(fact, tilts, rho)?;
    let tail_estimate = partition_tail(n, weight_cutoff, cauchy_constant, rho) * gn.norm();
    Ok(CauchyBinetSum {
        partial_sum,
        tail_estimate,
        weight_cutoff,
        terms: partitions.len(),
        cauchy_constant,
    })
}

/// Default cutoff schedule: start at 24, grow by 4 while the tail estimate
/// exceeds `tol`, never past `cap`.
pub fn cauchy_binet_adaptive(
    fact: &SymbolFactorization,
    tilts: &TiltFamily,
    n: usize,
    rho: f64,
    tol: f64,
    cap: usize,
) -> Result<CauchyBinetSum> {
    let mut cutoff = 24.min(cap);
    loop {
        let s = cauchy_binet_sum(fact, tilts, n, cutoff, rho)?;
        if s.tail_estimate < tol || cutoff >= cap {
            return Ok(s);
        }
        cutoff = (cutoff + 4).min(cap);
    }
}

/// A decay ratio inside the common annulus of analyticity.
pub fn default_decay_ratio(symbol: &Symbol) -> f64 {
    match symbol {
        Symbol::Exponential { .. } => 4.0,
        Symbol::Rational { plus, minus } => {
            let r = plus
                .iter()
                .chain(minus)
                .fold(0.0f64, |m, p| m.max(p.norm()));
            if r == 0.0 {
                4.0
            } else {
                (1.0 / r).sqrt().min(4.0)
            }
        }
    }
}

fn circle_max(f: &LaurentSeries, radius: f64) -> Result<f64> {
    let samples = 256;
    let mut best = 0.0f64;
    for k in 0..samples {
        let th = 2.0 * core::f64::consts::PI * k as f64 / samples as f64;
        let z = C64::from_polar(radius, th);
        best = best.max(series_eval(f, z)?.norm());
    }
    Ok(best)
}

fn cauchy_constant(fact: &SymbolFactorization, tilts: &TiltFamily, rho: f64) -> Result<f64> {
    let mut ca = 0.0f64;
    for x in &tilts.xi {
        let p = series_multiply_truncated(x, &fact.phi_plus, 0..=fact.phi_plus.hi() + x.hi());
        ca = ca.max(circle_max(&p, rho)?);
    }
    let mut cb = 0.0f64;
    for t in &tilts.theta {
        let p = series_multiply_truncated(t, &fact.phi_minus, fact.phi_minus.lo() + t.lo()..=0);
        cb = cb.max(circle_max(&p, 1.0 / rho)?);
    }
    Ok(ca + cb)
}

/// `(N!)^2 C^{2N} sum_{w > W} binom(w+N-1, N-1) rho^{-2w}`.
fn partition_tail(n: usize, cutoff: usize, c: f64, rho: f64) -> f64 {
    let mut nf = 1.0f64;
    for k in 2..=n {
        nf *= k as f64;
    }
    let pre = nf * nf * c.powi(2 * n as i32);
    let q = rho.powi(-2);
    let mut sum = 0.0;
    let mut w = cutoff + 1;
    loop {
        let mut binom = 1.0f64;
        for k in 1..n {
            binom = binom * (w + k) as f64 / k as f64;
        }
        let term = binom * q.powi(w as i32);
        sum += term;
        if term < 1e-20 * sum || w > cutoff + 100_000 {
            break;
        }
        w += 1;
    }
    pre * sum
}

/// Skew-Schur expansion of the pure-shift tilted minor.
#[derive(Clone, Debug)]
pub struct SkewExpansion {
    pub partial_sum: C64,
    pub direct: C64,
    /// Smallest real part among the summands.
    pub min_summand: f64,
    pub terms: usize,
}

/// `sum_eta s_{eta/lambda}(X) s_{eta/nu}(Y)` against the direct minor with
/// `xi_j = z^{lambda_{N+1-j}}`, `theta_i = z^{-nu_{N+1-i}}`.
pub fn skew_schur_expansion_check(
    fact: &SymbolFactorization,
    lam: &Partition,
    nu: &Partition,
    n: usize,
    cutoff: usize,
) -> Result<SkewExpansion> {
    let Symbol::Rational { plus, minus } = &fact.symbol else {
        return Err(domain("skew Schur expansion needs a rational symbol (finite alphabets)"));
    };
    if lam.len() > n || nu.len() > n {
        return Err(domain("lambda and nu need at most N parts"));
    }
    let a: Vec<usize> = (0..n).map(|j| lam.part(n - 1 - j)).collect();
    let b: Vec<usize> = (0..n).map(|i| nu.part(n - 1 - i)).collect();
    let tilts = TiltFamily::monomials(&a, &b)?;
    let direct = tilted_minor_direct(&fact.phi, &tilts, n)?;
    let mut strata = vec![C64::zero(); cutoff + 1];
    let mut min_summand = f64::INFINITY;
    let mut terms = 0;
    for eta in enumerate_partitions(cutoff, n) {
        if !eta.contains(lam) || !eta.contains(nu) {
            continue;
        }
        let t = skew_schur(&eta, lam, plus) * skew_schur(&eta, nu, minus);
        min_summand = min_summand.min(t.re);
        strata[eta.weight()] += t;
        terms += 1;
    }
    let partial_sum = strata.iter().sum::<C64>() * fact.geometric_mean.powi(n as i32);
    Ok(SkewExpansion {
        partial_sum,
        direct,
        min_summand,
        terms,
    })
}

/// `prod_{k,l} (1 - x_k y_l)^{-1}`.
pub fn cauchy_product(xs: &[C64], ys: &[C64]) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for x in xs {
        for y in ys {
            p /= C64::new(1.0, 0.0) - x * y;
        }
    }
    p
}

/// Brute-force `s_{eta/lam}` over semistandard tableaux with entries in
/// `1..=|alphabet|`. Exponential in the shape; meant as a ground truth.
pub fn ssyt_skew_schur(eta: &Partition, lam: &Partition, xs: &[C64]) -> C64 {
    let rows = eta.len();
    let mut cells = Vec::new();
    for r in 0..rows {
        for col in lam.part(r)..eta.part(r) {
            cells.push((r, col));
        }
    }
    let width = eta.part(0);
    let mut grid = vec![vec![0usize; width]; rows];
    fn go(
        idx: usize,
        cells: &[(usize, usize)],
        grid: &mut Vec<Vec<usize>>,
        lam: &Partition,
        xs: &[C64],
        acc: C64,
        total: &mut C64,
    ) {
        if idx == cells.len() {
            *total += acc;
            return;
        }
        let (r, col) = cells[idx];
        let left = if col > lam.part(r) { grid[r][col - 1] } else { 1 };
        let above = if r > 0 && col >= lam.part(r - 1) { grid[r - 1][col] + 1 } else { 1 };
        for v in left.max(above)..=xs.len() {
            grid[r][col] = v;
            go(idx + 1, cells, grid, lam, xs, acc * xs[v - 1], total);
        }
        grid[r][col] = 0;
    }
    let mut total = C64::zero();
    go(0, &cells, &mut grid, lam, xs, C64::new(1.0, 0.0), &mut total);
    total
}
