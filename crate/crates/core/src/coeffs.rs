//! Legendre coefficients of power functions.
//!
//! `F[i] = ∫_0^T t^α P̂(i, t) dt = T^(α+1/2) · sqrt(2i+1) · α^(i falling) / (α+1)^(i+1 rising)`.
//!
//! The closed form is a ratio of factorials, so it is evaluated as a running
//! product over `i` with no alternating sums. Two recurrences (one step in the
//! index, `k` steps in the exponent) are provided for cross-checks and for
//! shifting exponents during column assembly.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{near_integer, rising_factorial, PrecisionContext, Real};

/// Coefficients `F[0..L]` of `t^α` on `[0, T]`.
#[derive(Clone, Debug)]
pub struct PowerCoeffVector {
    alpha: Real,
    horizon: Real,
    values: Vec<Real>,
}

impl PowerCoeffVector {
    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn horizon(&self) -> &Real {
        &self.horizon
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<Real> {
        self.values
    }
}

impl std::ops::Index<usize> for PowerCoeffVector {
    type Output = Real;

    fn index(&self, i: usize) -> &Real {
        &self.values[i]
    }
}

pub(crate) fn check_alpha(alpha: &Real) -> Result<()> {
    if !alpha.is_finite() || *alpha <= -0.5f64 {
        return Err(Error::Domain(format!(
            "exponent {} is not square integrable (needs alpha > -1/2)",
            alpha.to_f64()
        )));
    }
    Ok(())
}

fn check_horizon(horizon: &Real) -> Result<()> {
    if !horizon.is_finite() || *horizon <= 0 {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {}",
            horizon.to_f64()
        )));
    }
    Ok(())
}

/// Closed-form coefficients by the factorial-ratio running product.
///
/// For integer `α` every `F[i]` with `i > α` is set to an exact zero.
pub fn power_coeffs_explicit(
    ctx: &PrecisionContext,
    alpha: &Real,
    order: usize,
    horizon: &Real,
) -> Result<PowerCoeffVector> {
    check_alpha(alpha)?;
    check_horizon(horizon)?;
    let alpha = ctx.round(alpha);
    let horizon = ctx.round(horizon);
    let exact_integer = alpha.is_integer().then(|| alpha.to_f64() as usize);
    let scale = Float::with_val(ctx.bits(), &alpha + 0.5f64);
    let scale = horizon.clone().pow(&scale);

    let mut values = Vec::with_capacity(order);
    // ratio = α^(i falling) / (α+1)^(i+1 rising)
    let mut ratio = ctx.one() / Float::with_val(ctx.bits(), &alpha + 1u32);
    for i in 0..order {
        if exact_integer.is_some_and(|n| i > n) {
            values.push(ctx.zero());
            continue;
        }
        let root = ctx.real(2 * i + 1).sqrt();
        values.push(Float::with_val(ctx.bits(), &scale * &ratio) * root);
        ratio *= Float::with_val(ctx.bits(), &alpha - i as u64);
        ratio /= Float::with_val(ctx.bits(), &alpha + (i + 2) as u64);
    }
    Ok(PowerCoeffVector { alpha, horizon, values })
}

/// `F[i+1]` from `F[i]`: multiplies by `sqrt((2i+3)/(2i+1)) (α-i)/(α+i+2)`.
pub fn power_coeffs_step_index(f_i: &Real, alpha: &Real, i: usize) -> Result<Real> {
    check_alpha(alpha)?;
    let prec = f_i.prec().max(alpha.prec());
    let root = (Float::with_val(prec, 2 * i + 3) / (2 * i + 1) as u64).sqrt();
    let num = Float::with_val(prec, alpha - i as u64);
    let den = Float::with_val(prec, alpha + (i + 2) as u64);
    Ok(Float::with_val(prec, f_i * root) * num / den)
}

/// `F[i]` of `t^(α+k)` from `F[i]` of `t^α`:
/// multiplies by `T^k [(α+1)^(k rising)]² / ((α-i+1)^(k rising) (α+i+2)^(k rising))`.
///
/// Fails with [`Error::Degenerate`] when `(α-i+1)^(k rising)` vanishes, which
/// happens only for integer `α` with `α-i+1 ≤ 0 ≤ α-i+k`; the explicit form
/// must be used there.
pub fn power_coeffs_step_degree(f_i_alpha: &Real, alpha: &Real, i: usize, k: u32, horizon: &Real) -> Result<Real> {
    check_alpha(alpha)?;
    check_horizon(horizon)?;
    let prec = f_i_alpha.prec().max(alpha.prec());
    let low = rising_factorial(&(Float::with_val(prec, alpha - i as u64) + 1u32), k);
    if low.is_zero() {
        return Err(Error::Degenerate(format!(
            "(alpha - {i} + 1) rising {k} vanishes for alpha = {}",
            alpha.to_f64()
        )));
    }
    let high = rising_factorial(&Float::with_val(prec, alpha + (i + 2) as u64), k);
    let lead = rising_factorial(&Float::with_val(prec, alpha + 1u32), k).square();
    let t_k = Float::with_val(prec, horizon).pow(k);
    Ok(Float::with_val(prec, f_i_alpha * t_k) * lead / low / high)
}

/// Coefficients of `t^α` built from the fractional part of `α` by the degree
/// recurrence. Falls back to the explicit form on degenerate entries.
pub fn power_coeffs_by_degree(
    ctx: &PrecisionContext,
    alpha: &Real,
    order: usize,
    horizon: &Real,
) -> Result<PowerCoeffVector> {
    check_alpha(alpha)?;
    let whole = Float::with_val(ctx.bits(), alpha.floor_ref());
    let k = whole.to_f64().max(0.0) as u32;
    let base_alpha = Float::with_val(ctx.bits(), alpha - k);
    if k == 0 {
        return power_coeffs_explicit(ctx, alpha, order, horizon);
    }
    let base = power_coeffs_explicit(ctx, &base_alpha, order, horizon)?;
    let explicit = std::cell::OnceCell::new();
    let values = (0..order)
        .map(
            |i| match power_coeffs_step_degree(&base[i], &base_alpha, i, k, horizon) {
                Err(Error::Degenerate(_)) => {
                    let full = explicit.get_or_init(|| power_coeffs_explicit(ctx, alpha, order, horizon));
                    full.as_ref()
                        .map(|f| f[i].clone())
                        .map_err(|e| Error::Degenerate(e.to_string()))
                }
                other => other,
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCoeffVector {
        alpha: ctx.round(alpha),
        horizon: ctx.round(horizon),
        values,
    })
}

/// Coefficients of `t^α` by repeated index steps from `F[0]`.
pub fn power_coeffs_by_index(
    ctx: &PrecisionContext,
    alpha: &Real,
    order: usize,
    horizon: &Real,
) -> Result<PowerCoeffVector> {
    let first = power_coeffs_explicit(ctx, alpha, 1, horizon)?;
    let mut values = Vec::with_capacity(order);
    if order > 0 {
        values.push(first[0].clone());
    }
    for i in 1..order {
        let next = power_coeffs_step_index(&values[i - 1], &first.alpha, i - 1)?;
        values.push(next);
    }
    Ok(PowerCoeffVector { values, ..first })
}

/// Raabe–Duhamel ratio `i ((F[i]/F[i+1])² - 1)`, which tends to `4α+3` for
/// non-integer `α`.
pub fn raabe_duhamel_ratio(coeffs: &PowerCoeffVector, i: usize) -> Result<f64> {
    if i + 1 >= coeffs.len() {
        return Err(Error::Index(format!("need at least {} coefficients", i + 2)));
    }
    if near_integer(coeffs.alpha(), 0.0).is_some() {
        return Err(Error::Domain("Raabe-Duhamel ratio needs non-integer alpha".into()));
    }
    let ratio = Float::with_val(coeffs[i].prec(), &coeffs[i] / &coeffs[i + 1]).square() - 1u32;
    Ok((ratio * i as u64).to_f64())
}
