//! Independent quadrature oracles for small blocks.
//!
//! Nothing here feeds production output. All routines map the triangle
//! `0 < τ < t < T` to the unit square by `t = T x`, `τ = T x y` and use
//! Gauss–Jacobi rules whose weights absorb the power-law factors
//! (`x^(2H+1)`, `y^(2H)`, `(1-y)^(β-1)`, ...). Polynomial integrands are then
//! integrated exactly, and the only truncation error left is in the smooth
//! hypergeometric factor of `k_H`.
//!
//! Gamma values come from MPFR, not from [`crate::numeric::gamma`].

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::kernel::{k_matrix_direct, HurstSpec};
use crate::legendre::basis_eval_all;
use crate::matrix::Matrix;
use crate::numeric::{ExactDecimal, PrecisionContext, Real};

const ORACLE_GUARD_BITS: u32 = 32;

/// Gauss rule for `∫₋₁¹ (1-x)^a (1+x)^b f(x) dx`, nodes ascending.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub a: Real,
    pub b: Real,
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights for `∫_lo^hi (hi-y)^a (y-lo)^b f(y) dy`.
    pub fn mapped(&self, lo: &Real, hi: &Real) -> (Vec<Real>, Vec<Real>) {
        let bits = self.nodes.first().map_or(64, Float::prec);
        let half = Float::with_val(bits, hi - lo) / 2u32;
        let exponent = Float::with_val(bits, &self.a + &self.b) + 1u32;
        let scale = half.clone().pow(&exponent);
        let nodes = self
            .nodes
            .iter()
            .map(|x| Float::with_val(bits, x + 1u32) * &half + lo)
            .collect();
        let weights = self.weights.iter().map(|w| Float::with_val(bits, w * &scale)).collect();
        (nodes, weights)
    }

    /// Rule on `[0, 1]` for the weight `(1-y)^a y^b`.
    pub fn unit(&self) -> (Vec<Real>, Vec<Real>) {
        let bits = self.nodes.first().map_or(64, Float::prec);
        self.mapped(&Float::new(bits), &Float::with_val(bits, 1))
    }
}

fn jacobi_f64(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let next = ((s - 1.0) * (s * (s - 2.0) * x + a * a - b * b) * cur
            - 2.0 * (k + a - 1.0) * (k + b - 1.0) * s * prev)
            / (2.0 * k * (k + a + b) * (s - 2.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// `(P_n, P_{n-1})` of the Jacobi family at `x`.
fn jacobi_pair(n: usize, a: &Real, b: &Real, x: &Real) -> (Real, Real) {
    let bits = x.prec();
    let one = Float::with_val(bits, 1);
    if n == 0 {
        return (one, Float::new(bits));
    }
    let ab = Float::with_val(bits, a + b);
    let mut prev = one;
    let mut cur =
        Float::with_val(bits, a + 1u32) + Float::with_val(bits, &ab + 2u32) * Float::with_val(bits, x - 1u32) / 2u32;
    let a2b2 = Float::with_val(bits, a.square_ref()) - Float::with_val(bits, b.square_ref());
    for k in 2..=n {
        let s = Float::with_val(bits, &ab + (2 * k) as u64);
        let s1 = Float::with_val(bits, &s - 1u32);
        let s2 = Float::with_val(bits, &s - 2u32);
        let lead = s1 * (Float::with_val(bits, &s * &s2) * x + &a2b2) * &cur;
        let lag =
            Float::with_val(bits, a + (k - 1) as u64) * Float::with_val(bits, b + (k - 1) as u64) * 2u32 * &s * &prev;
        let den = Float::with_val(bits, &ab + k as u64) * (2 * k) as u64 * s2;
        let next = (lead - lag) / den;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `P_n` and `P_n'` via `(2n+a+b)(1-x²)P_n' = n[(a-b) - (2n+a+b)x]P_n + 2(n+a)(n+b)P_{n-1}`.
fn jacobi_with_derivative(n: usize, a: &Real, b: &Real, x: &Real) -> (Real, Real) {
    let bits = x.prec();
    let (p, q) = jacobi_pair(n, a, b, x);
    let s = Float::with_val(bits, a + b) + (2 * n) as u64;
    let first = (Float::with_val(bits, a - b) - Float::with_val(bits, &s * x)) * n as u64 * &p;
    let second = Float::with_val(bits, a + n as u64) * Float::with_val(bits, b + n as u64) * 2u32 * q;
    let den = s * (1u32 - Float::with_val(bits, x.square_ref()));
    (p, (first + second) / den)
}

/// Gauss–Jacobi rule with `n` nodes for exponents `a, b > -1`.
///
/// Nodes are bracketed in double precision on a fine grid in `θ = acos x`,
/// then refined by Newton's method at the working precision.
pub fn gauss_jacobi_rule(ctx: &PrecisionContext, n: usize, a: &Real, b: &Real) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Config("quadrature rule needs n >= 1".into()));
    }
    if *a <= -1i32 || *b <= -1i32 {
        return Err(Error::Domain(format!(
            "Jacobi exponents must exceed -1, got {} and {}",
            a.to_f64(),
            b.to_f64()
        )));
    }
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let bits = work.bits();
    let (a, b) = (work.round(a), work.round(b));
    let (af, bf) = (a.to_f64(), b.to_f64());

    let samples = 64 * n + 64;
    let theta = |m: usize| std::f64::consts::PI * m as f64 / samples as f64;
    let f = |th: f64| jacobi_f64(n, af, bf, th.cos());
    let mut guesses = Vec::with_capacity(n);
    let mut prev = f(0.0);
    for m in 1..=samples {
        let cur = f(theta(m));
        if cur == 0.0 || prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (theta(m - 1), theta(m));
            let flo = f(lo);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            guesses.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    if guesses.len() != n {
        return Err(Error::Oracle(format!("found {} of {n} Jacobi nodes", guesses.len())));
    }

    let tol = Float::with_val(bits, 1) >> (bits as i32 - 8);
    let mut nodes = Vec::with_capacity(n);
    for th in guesses.iter().rev() {
        let mut x = Float::with_val(bits, th.cos());
        let mut converged = false;
        for _ in 0..60 {
            let (p, dp) = jacobi_with_derivative(n, &a, &b, &x);
            let step = p / dp;
            x -= &step;
            if Float::with_val(bits, step.abs_ref()) <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Oracle(
                "Newton iteration for a Jacobi node did not converge".into(),
            ));
        }
        nodes.push(x);
    }

    let gamma = |x: Real| x.gamma();
    let nf = |v: &Real| Float::with_val(bits, v + n as u64);
    let ab = Float::with_val(bits, &a + &b);
    let two_pow = Float::with_val(bits, 2).pow(&Float::with_val(bits, &ab + 1u32));
    let constant = gamma(Float::with_val(bits, nf(&a) + 1u32)) * gamma(Float::with_val(bits, nf(&b) + 1u32))
        / gamma(Float::with_val(bits, nf(&ab) + 1u32))
        / gamma(Float::with_val(bits, n as u64 + 1))
        * &two_pow;
    let weights: Vec<Real> = nodes
        .iter()
        .map(|x| {
            let (_, dp) = jacobi_with_derivative(n, &a, &b, x);
            let den = (1u32 - Float::with_val(bits, x.square_ref())) * dp.square();
            Float::with_val(bits, &constant / den)
        })
        .collect();

    let mut total = Float::new(bits);
    for w in &weights {
        total += w;
    }
    let mass = two_pow * gamma(Float::with_val(bits, &a + 1u32)) * gamma(Float::with_val(bits, &b + 1u32))
        / gamma(Float::with_val(bits, &ab + 2u32));
    let rel = (Float::with_val(bits, &total - &mass) / &mass).abs();
    if rel > Float::with_val(bits, 1) >> (bits as i32 / 2) {
        return Err(Error::Oracle(format!("Jacobi weights sum off by {:e}", rel.to_f64())));
    }

    Ok(QuadratureRule {
        a: ctx.round(&a),
        b: ctx.round(&b),
        nodes: nodes.iter().map(|x| ctx.round(x)).collect(),
        weights: weights.iter().map(|w| ctx.round(w)).collect(),
    })
}

/// Gauss–Legendre rule with `n` nodes, symmetric about zero by construction.
pub fn gauss_legendre_rule(ctx: &PrecisionContext, n: usize) -> Result<QuadratureRule> {
    let zero = ctx.zero();
    let mut rule = gauss_jacobi_rule(ctx, n, &zero, &zero)?;
    for k in 0..n / 2 {
        let m = n - 1 - k;
        let x = Float::with_val(ctx.bits(), &rule.nodes[m] - &rule.nodes[k]) / 2u32;
        let w = Float::with_val(ctx.bits(), &rule.weights[m] + &rule.weights[k]) / 2u32;
        rule.nodes[k] = -x.clone();
        rule.nodes[m] = x;
        rule.weights[k] = w.clone();
        rule.weights[m] = w;
    }
    if n % 2 == 1 {
        rule.nodes[n / 2] = ctx.zero();
    }
    Ok(rule)
}

fn unit_rule(work: &PrecisionContext, n: usize, a: Real, b: Real) -> Result<(Vec<Real>, Vec<Real>)> {
    Ok(gauss_jacobi_rule(work, n, &a, &b)?.unit())
}

/// Basis values `P̂(0..m, T·x·y)` for every `y` node, one vector per node.
fn basis_at(work: &PrecisionContext, m: usize, horizon: &Real, scale: &Real, ys: &[Real]) -> Result<Vec<Vec<Real>>> {
    ys.iter()
        .map(|y| basis_eval_all(work, m, &Float::with_val(work.bits(), scale * y), horizon))
        .collect()
}

/// `Σ_k w_k v_k[j]` for every `j`.
fn weighted_columns(work: &PrecisionContext, weights: &[Real], values: &[Vec<Real>], m: usize) -> Vec<Real> {
    let mut out = vec![work.zero(); m];
    for (w, v) in weights.iter().zip(values) {
        for (acc, x) in out.iter_mut().zip(v) {
            *acc += Float::with_val(work.bits(), w * x);
        }
    }
    out
}

/// `C ∫₀¹ (weight in x) P̂(i, T x) J_j(x) dx` for the `x` rule, given `J`.
fn outer(
    work: &PrecisionContext,
    m: usize,
    horizon: &Real,
    xs: &[Real],
    wx: &[Real],
    inner: impl Fn(&Real) -> Result<Vec<Real>> + Sync,
) -> Result<Matrix> {
    let rows: Vec<(Vec<Real>, Vec<Real>)> = xs
        .par_iter()
        .map(|x| {
            let t = Float::with_val(work.bits(), horizon * x);
            Ok((basis_eval_all(work, m, &t, horizon)?, inner(x)?))
        })
        .collect::<Result<_>>()?;
    let mut out = Matrix::zeros(work, m);
    for ((p, j), w) in rows.iter().zip(wx) {
        for i in 0..m {
            let wp = Float::with_val(work.bits(), w * &p[i]);
            for (jj, v) in j.iter().enumerate() {
                out[(i, jj)] += Float::with_val(work.bits(), &wp * v);
            }
        }
    }
    Ok(out)
}

/// Top-left `m × m` block of the Gram matrix
/// `G[i][j] = ∫∫ P̂(i,t) P̂(j,τ) R_H(t,τ) dt dτ`.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub hurst: ExactDecimal,
    pub horizon: ExactDecimal,
    pub entries: Matrix,
    /// Largest change between the `n`- and `2n`-point evaluations.
    pub error_estimate: f64,
    pub points: usize,
}

fn gram_once(work: &PrecisionContext, hurst: &Real, horizon: &Real, m: usize, n: usize) -> Result<Matrix> {
    let bits = work.bits();
    let two_h = Float::with_val(bits, hurst * 2u32);
    let (xs, wx) = unit_rule(work, n, work.zero(), Float::with_val(bits, &two_h + 1u32))?;
    let (y0, w0) = unit_rule(work, n, work.zero(), work.zero())?;
    let (y1, w1) = unit_rule(work, n, work.zero(), two_h.clone())?;
    let (y2, w2) = unit_rule(work, n, two_h.clone(), work.zero())?;
    // lower triangle: (T^(2H+2)/2) ∫ x^(2H+1) P̂_i(Tx) ∫ [1 + y^2H - (1-y)^2H] P̂_j(Txy)
    let lower = outer(work, m, horizon, &xs, &wx, |x| {
        let scale = Float::with_val(bits, horizon * x);
        let a = weighted_columns(work, &w0, &basis_at(work, m, horizon, &scale, &y0)?, m);
        let b = weighted_columns(work, &w1, &basis_at(work, m, horizon, &scale, &y1)?, m);
        let c = weighted_columns(work, &w2, &basis_at(work, m, horizon, &scale, &y2)?, m);
        Ok(a.into_iter().zip(b).zip(c).map(|((a, b), c)| a + b - c).collect())
    })?;
    let prefactor = horizon.clone().pow(Float::with_val(bits, &two_h + 2u32)) / 2u32;
    let lower = lower.scale(&prefactor);
    let upper = lower.transpose();
    let mut g = Matrix::zeros(work, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = Float::with_val(bits, &lower[(i, j)] + &upper[(i, j)]);
        }
    }
    Ok(g)
}

/// Gram block of size `m` with `n ≥ 32` points per direction, doubled until
/// the estimated error is below `1e-10` (failure past 512 points).
pub fn gram_block(
    ctx: &PrecisionContext,
    hurst: &ExactDecimal,
    horizon: &ExactDecimal,
    m: usize,
    n: usize,
) -> Result<GramBlock> {
    if m == 0 {
        return Err(Error::Config("Gram block size must be >= 1".into()));
    }
    if !hurst.in_open_unit_interval() || !horizon.is_positive() {
        return Err(Error::Domain("Gram block needs 0 < H < 1 and T > 0".into()));
    }
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let h = hurst.to_real(&work);
    let t = horizon.to_real(&work);
    let mut n = n.max(32);
    let mut current = gram_once(&work, &h, &t, m, n)?;
    loop {
        let refined = gram_once(&work, &h, &t, m, 2 * n)?;
        let err = refined.max_abs_diff(&current).to_f64();
        if err <= 1e-10 {
            return Ok(GramBlock {
                hurst: hurst.clone(),
                horizon: horizon.clone(),
                entries: refined.with_precision(ctx),
                error_estimate: err,
                points: 2 * n,
            });
        }
        if 2 * n >= 512 {
            return Err(Error::Oracle(format!("Gram quadrature stalled at error {err:e}")));
        }
        n *= 2;
        current = refined;
    }
}

/// Single Gram entry `G[i][j]`.
pub fn gram_rh(
    ctx: &PrecisionContext,
    i: usize,
    j: usize,
    hurst: &ExactDecimal,
    horizon: &ExactDecimal,
    n: usize,
) -> Result<(Real, f64)> {
    let block = gram_block(ctx, hurst, horizon, i.max(j) + 1, n)?;
    Ok((block.entries[(i, j)].clone(), block.error_estimate))
}

/// `₂F₁(p, 1; c; z)` by its power series, `0 ≤ z ≤ 1/2`.
fn hyp_one(work: &PrecisionContext, p: &Real, c: &Real, z: &Real) -> Result<Real> {
    let bits = work.bits();
    let tol = Float::with_val(bits, 1) >> (bits as i32 - 16);
    let mut term = work.one();
    let mut sum = work.one();
    for k in 0..(64 * bits as u64) {
        term *= Float::with_val(bits, p + k);
        term /= Float::with_val(bits, c + k);
        term *= z;
        sum += &term;
        if Float::with_val(bits, term.abs_ref()) <= Float::with_val(bits, sum.abs_ref()) * &tol {
            return Ok(sum);
        }
    }
    Err(Error::Oracle("hypergeometric series did not converge".into()))
}

/// Constants of the `1 - w` continuation of `₂F₁(1/2-H, 1; H+1/2; w)`:
/// `F(w) = C₁ F(1/2-H, 1; 2-2H; 1-w) + C₂ (1-w)^(2H-1) w^(1/2-H)`.
fn connection_constants(work: &PrecisionContext, h: &Real) -> (Real, Real) {
    let bits = work.bits();
    let g = |x: Real| x.gamma();
    let c = g(Float::with_val(bits, h + 0.5f64));
    let c1 = Float::with_val(bits, &c * g(Float::with_val(bits, h * 2u32) - 1u32))
        / g(Float::with_val(bits, h * 2u32))
        / g(Float::with_val(bits, h - 0.5f64));
    let c2 = c * g(1u32 - Float::with_val(bits, h * 2u32)) / g(0.5f64 - Float::with_val(bits, h));
    (c1, c2)
}

/// `a_H / Γ(H+1/2)`, the constant in front of the hypergeometric form. The
/// division by `Γ(H+1/2)` is what makes the closed form agree with the
/// operator factorization; it is invisible at `H = 1/2`.
fn kernel_constant(work: &PrecisionContext, h: &Real) -> Real {
    let bits = work.bits();
    let g = |x: Real| x.gamma();
    let gh = g(Float::with_val(bits, h + 0.5f64));
    let num = Float::with_val(bits, h * 2u32) * &gh * g(1.5f64 - Float::with_val(bits, h));
    (num / g(2u32 - Float::with_val(bits, h * 2u32))).sqrt() / gh
}

/// `₂F₁(1/2-H, 1; H+1/2; w)` for `0 ≤ w < 1`.
fn kernel_hyp(work: &PrecisionContext, h: &Real, w: &Real) -> Result<Real> {
    let bits = work.bits();
    let p = Float::with_val(bits, 0.5f64 - h);
    if *w <= 0.5f64 {
        return hyp_one(work, &p, &Float::with_val(bits, h + 0.5f64), w);
    }
    let z = Float::with_val(bits, 1u32 - w);
    let (c1, c2) = connection_constants(work, h);
    let f = hyp_one(
        work,
        &p,
        &Float::with_val(bits, 2u32 - Float::with_val(bits, h * 2u32)),
        &z,
    )?;
    let tail = z.pow(Float::with_val(bits, h * 2u32) - 1u32) * w.clone().pow(&p);
    Ok(c1 * f + c2 * tail)
}

/// `k_H(t, τ)` for `0 < τ < t`, through the Pfaff-transformed series
/// `a_H/Γ(H+1/2) (t-τ)^(H-1/2) (t/τ)^(H-1/2) ₂F₁(1/2-H, 1; H+1/2; (t-τ)/t)`.
pub fn kernel_point(ctx: &PrecisionContext, hurst: &ExactDecimal, t: &Real, tau: &Real) -> Result<Real> {
    if !hurst.in_open_unit_interval() {
        return Err(Error::Domain(format!("kernel needs 0 < H < 1, got {hurst}")));
    }
    if *tau <= 0u32 || *tau >= *t {
        return Err(Error::Domain(format!(
            "kernel needs 0 < tau < t, got tau = {}, t = {}",
            tau.to_f64(),
            t.to_f64()
        )));
    }
    if hurst.is_half() {
        return Ok(ctx.one());
    }
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let bits = work.bits();
    let h = hurst.to_real(&work);
    let e = Float::with_val(bits, &h - 0.5f64);
    let gap = Float::with_val(bits, t - tau);
    let w = Float::with_val(bits, &gap / t);
    let ratio = Float::with_val(bits, t / tau);
    let value = kernel_constant(&work, &h) * gap.pow(&e) * ratio.pow(&e) * kernel_hyp(&work, &h, &w)?;
    Ok(ctx.round(&value))
}

fn kernel_block_once(work: &PrecisionContext, h: &Real, horizon: &Real, m: usize, n: usize) -> Result<Matrix> {
    let bits = work.bits();
    let zero = work.zero();
    let half = Float::with_val(bits, 0.5f64);
    let one = work.one();
    let e = Float::with_val(bits, h - 0.5f64);
    let ne = Float::with_val(bits, 0.5f64 - h);
    let (xs, wx) = unit_rule(work, n, zero.clone(), Float::with_val(bits, h + 0.5f64))?;
    // y in [1/2, 1]: weight (1-y)^(H-1/2); rest y^(1/2-H) F(1-y)
    let (yu, wu) = gauss_jacobi_rule(work, n, &e, &zero)?.mapped(&half, &one);
    let fu: Vec<Real> = yu
        .iter()
        .map(|y| {
            let w = Float::with_val(bits, 1u32 - y);
            Ok(y.clone().pow(&ne) * kernel_hyp(work, h, &w)?)
        })
        .collect::<Result<_>>()?;
    // y in [0, 1/2]: C1 y^(1/2-H) (1-y)^(H-1/2) F(1/2-H,1;2-2H;y) + C2 y^(H-1/2)
    let (yl1, wl1) = gauss_jacobi_rule(work, n, &zero, &ne)?.mapped(&zero, &half);
    let (yl2, wl2) = gauss_jacobi_rule(work, n, &zero, &e)?.mapped(&zero, &half);
    let (c1, c2) = connection_constants(work, h);
    let c_low = Float::with_val(bits, 2u32 - Float::with_val(bits, h * 2u32));
    let fl: Vec<Real> = yl1
        .iter()
        .map(|y| {
            let f = hyp_one(work, &ne, &c_low, y)?;
            Ok(Float::with_val(bits, 1u32 - y).pow(&e) * f * &c1)
        })
        .collect::<Result<_>>()?;
    let scale_weights =
        |w: &[Real], f: &[Real]| -> Vec<Real> { w.iter().zip(f).map(|(a, b)| Float::with_val(bits, a * b)).collect() };
    let wu_f = scale_weights(&wu, &fu);
    let wl1_f = scale_weights(&wl1, &fl);
    let wl2_f: Vec<Real> = wl2.iter().map(|w| Float::with_val(bits, w * &c2)).collect();

    let raw = outer(work, m, horizon, &xs, &wx, |x| {
        let scale = Float::with_val(bits, horizon * x);
        let a = weighted_columns(work, &wu_f, &basis_at(work, m, horizon, &scale, &yu)?, m);
        let b = weighted_columns(work, &wl1_f, &basis_at(work, m, horizon, &scale, &yl1)?, m);
        let c = weighted_columns(work, &wl2_f, &basis_at(work, m, horizon, &scale, &yl2)?, m);
        Ok(a.into_iter().zip(b).zip(c).map(|((a, b), c)| a + b + c).collect())
    })?;
    let prefactor = kernel_constant(work, h) * horizon.clone().pow(Float::with_val(bits, h + 1.5f64));
    Ok(raw.scale(&prefactor))
}

fn brownian_block_once(work: &PrecisionContext, horizon: &Real, m: usize, n: usize) -> Result<Matrix> {
    let bits = work.bits();
    let (xs, wx) = unit_rule(work, n, work.zero(), work.one())?;
    let (ys, wy) = unit_rule(work, n, work.zero(), work.zero())?;
    let raw = outer(work, m, horizon, &xs, &wx, |x| {
        let scale = Float::with_val(bits, horizon * x);
        Ok(weighted_columns(
            work,
            &wy,
            &basis_at(work, m, horizon, &scale, &ys)?,
            m,
        ))
    })?;
    Ok(raw.scale(&horizon.clone().pow(2u32)))
}

/// `K[i][j] = ∫₀ᵀ P̂(i,t) ∫₀ᵗ k_H(t,τ) P̂(j,τ) dτ dt` for `i, j < m` by
/// quadrature, with the error estimated from `n` against `2n` points.
pub fn kernel_block(
    ctx: &PrecisionContext,
    hurst: &ExactDecimal,
    horizon: &ExactDecimal,
    m: usize,
    n: usize,
) -> Result<(Matrix, f64)> {
    if !hurst.in_open_unit_interval() || !horizon.is_positive() || m == 0 {
        return Err(Error::Domain("kernel block needs 0 < H < 1, T > 0 and m >= 1".into()));
    }
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let h = hurst.to_real(&work);
    let t = horizon.to_real(&work);
    let once = |n| {
        if hurst.is_half() {
            brownian_block_once(&work, &t, m, n)
        } else {
            kernel_block_once(&work, &h, &t, m, n)
        }
    };
    let coarse = once(n)?;
    let fine = once(2 * n)?;
    let err = fine.max_abs_diff(&coarse).to_f64();
    Ok((fine.with_precision(ctx), err))
}

/// Riemann–Liouville integration matrix block `⟨P̂ᵢ, 𝒥^β P̂ⱼ⟩`, `β > 0`.
pub fn frac_int_block(ctx: &PrecisionContext, beta: &Real, m: usize, horizon: &Real) -> Result<Matrix> {
    if *beta <= 0u32 {
        return Err(Error::Domain("quadrature oracle covers beta > 0 only".into()));
    }
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let bits = work.bits();
    let beta = work.round(beta);
    let horizon = work.round(horizon);
    let n = m + 2;
    let (xs, wx) = unit_rule(&work, n, work.zero(), beta.clone())?;
    let (ys, wy) = unit_rule(&work, n, Float::with_val(bits, &beta - 1u32), work.zero())?;
    let raw = outer(&work, m, &horizon, &xs, &wx, |x| {
        let scale = Float::with_val(bits, &horizon * x);
        Ok(weighted_columns(
            &work,
            &wy,
            &basis_at(&work, m, &horizon, &scale, &ys)?,
            m,
        ))
    })?;
    let prefactor = horizon.clone().pow(Float::with_val(bits, &beta + 1u32)) / Float::with_val(bits, beta.gamma_ref());
    Ok(raw.scale(&prefactor).with_precision(ctx))
}

/// Multiplication matrix block `⟨P̂ᵢ, t^α P̂ⱼ⟩`, `α > -1`.
pub fn mult_block(ctx: &PrecisionContext, alpha: &Real, m: usize, horizon: &Real) -> Result<Matrix> {
    let work = ctx.with_guard(ORACLE_GUARD_BITS);
    let bits = work.bits();
    let alpha = work.round(alpha);
    let horizon = work.round(horizon);
    let (xs, wx) = unit_rule(&work, m + 1, work.zero(), alpha.clone())?;
    let mut out = Matrix::zeros(&work, m);
    for (x, w) in xs.iter().zip(&wx) {
        let p = basis_eval_all(&work, m, &Float::with_val(bits, &horizon * x), &horizon)?;
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += Float::with_val(bits, w * &p[i]) * &p[j];
            }
        }
    }
    let prefactor = horizon.clone().pow(Float::with_val(bits, &alpha + 1u32));
    Ok(out.scale(&prefactor).with_precision(ctx))
}

/// `K Kᵀ` at order `L` against the Gram oracle on the leading `m × m` block.
#[derive(Clone, Debug)]
pub struct GramComparison {
    /// `max |G[i][j] - (K Kᵀ)[i][j]|` over `i, j < m`.
    pub max_deviation: f64,
    /// `ε = ‖k_H‖² - ‖K‖²`, which bounds every row tail `Σ_{k≥L} K[i][k]²`.
    pub tail_bound: f64,
    /// Row tails `G[i][i] - Σ_{k<L} K[i][k]²` from the oracle diagonal.
    pub row_tails: Vec<f64>,
    /// Largest `|G - K Kᵀ|[i][j] / sqrt(tail_i tail_j)`; at most one up to
    /// quadrature error.
    pub worst_tail_ratio: f64,
    pub quadrature_error: f64,
}

pub fn gram_comparison(ctx: &PrecisionContext, spec: &HurstSpec, m: usize) -> Result<GramComparison> {
    let m = m.min(spec.order());
    let work = ctx.with_guard(64);
    let k = k_matrix_direct(&work, spec)?;
    let gram = gram_block(&work, spec.hurst(), spec.horizon(), m, 32)?;
    let n = spec.order();
    let kk = |i: usize, j: usize| {
        let mut acc = work.zero();
        for c in 0..n {
            acc += Float::with_val(work.bits(), &k.matrix[(i, c)] * &k.matrix[(j, c)]);
        }
        acc
    };
    let tails: Vec<Real> = (0..m)
        .map(|i| Float::with_val(work.bits(), &gram.entries[(i, i)] - kk(i, i)))
        .collect();
    let mut max_dev = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let dev = Float::with_val(work.bits(), &gram.entries[(i, j)] - kk(i, j)).abs();
            max_dev = max_dev.max(dev.to_f64());
            let bound = Float::with_val(work.bits(), &tails[i] * &tails[j]).abs().sqrt();
            if !bound.is_zero() {
                worst_ratio = worst_ratio.max((dev / bound).to_f64());
            }
        }
    }
    let epsilon = Float::with_val(work.bits(), spec.kernel_norm_sq(&work) - k.norm_sq());
    Ok(GramComparison {
        max_deviation: max_dev,
        tail_bound: epsilon.to_f64(),
        row_tails: tails.iter().map(Float::to_f64).collect(),
        worst_tail_ratio: worst_ratio,
        quadrature_error: gram.error_estimate,
    })
}
