//! Truncated Legendre-basis matrices of two elementary operators on `[0, T]`:
//! multiplication by `t^α` and Riemann–Liouville integration of order `β`.
//!
//! Both are assembled from running products over the lower triangle
//! (`i ≥ j`) and completed by a structural identity: the multiplication
//! matrix is symmetric, and the fractional integration matrix satisfies
//! `P[i][j] = (-1)^(i+j) P[j][i]`. The raw column sums are never used here;
//! they cancel catastrophically in floating point.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::coeffs::{check_alpha, power_coeffs_explicit};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{gamma, near_integer, PrecisionContext, Real};

/// Distance below which `β` (or `α`) is treated as the nearby integer.
pub const INTEGER_DISPATCH_TOLERANCE: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// Multiplication by `t^alpha`.
    Multiplication { alpha: f64 },
    /// Riemann–Liouville integration of order `beta`.
    FractionalIntegration { beta: f64 },
}

/// An `L × L` operator matrix with its provenance.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub horizon: Real,
    pub matrix: Matrix,
    /// Worst `log2(max |term| / |sum|)` over the assembled entries.
    pub cancellation_bits: f64,
}

impl OperatorMatrix {
    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Guard bits added while assembling an operator of order `L`.
pub fn operator_guard_bits(order: usize) -> u32 {
    64 + (order as u32) / 2
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::Config("matrix order must be >= 1".into()));
    }
    Ok(())
}

/// Evaluates `f(i, j)` for every `i ≥ j` in parallel and mirrors the upper
/// triangle with `mirror(i, j, lower_value)`.
fn assemble_lower<F, M>(ctx: &PrecisionContext, order: usize, f: F, mirror: M) -> (Matrix, f64)
where
    F: Fn(usize, usize) -> (Real, f64) + Sync,
    M: Fn(usize, usize, &Real) -> Real,
{
    let pairs: Vec<(usize, usize)> = (0..order).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let values: Vec<(Real, f64)> = pairs.par_iter().map(|&(i, j)| f(i, j)).collect();
    let mut matrix = Matrix::zeros(ctx, order);
    let mut worst = 0.0f64;
    for (&(i, j), (value, loss)) in pairs.iter().zip(values) {
        worst = worst.max(loss);
        if i != j {
            matrix[(j, i)] = ctx.round(&mirror(i, j, &value));
        }
        matrix[(i, j)] = ctx.round(&value);
    }
    (matrix, worst)
}

/// `Σ_{k=0..j} (-1)^(j-k) Π_k` with `Π_0 = 1` and `Π_k = step(k) Π_{k-1}`.
/// Also returns the cancellation estimate in bits.
fn alternating_running_sum<S>(bits: u32, j: usize, step: S) -> (Real, f64)
where
    S: Fn(usize, &mut Real),
{
    let mut product = Float::with_val(bits, 1);
    let mut sum = Float::with_val(bits, if j.is_multiple_of(2) { 1 } else { -1 });
    let mut largest = Float::with_val(bits, 1);
    for k in 1..=j {
        step(k, &mut product);
        let abs = Float::with_val(bits, product.abs_ref());
        if abs > largest {
            largest = abs;
        }
        if (j - k).is_multiple_of(2) {
            sum += &product;
        } else {
            sum -= &product;
        }
    }
    (sum.clone(), cancellation(&largest, &sum))
}

fn cancellation(largest: &Real, sum: &Real) -> f64 {
    if sum.is_zero() {
        return f64::from(largest.prec());
    }
    let ratio = Float::with_val(largest.prec(), largest / sum).abs();
    ratio.log2().to_f64().max(0.0)
}

/// Exact first-order integration matrix: `T/2` at `(0,0)`,
/// `±T/(2 sqrt(4i²-1))` on the sub- and super-diagonal.
pub fn int_matrix(ctx: &PrecisionContext, order: usize, horizon: &Real) -> Result<OperatorMatrix> {
    check_order(order)?;
    let horizon = ctx.round(horizon);
    let mut m = Matrix::zeros(ctx, order);
    m[(0, 0)] = ctx.real(&horizon / 2u32);
    for i in 1..order {
        let root = ctx.real(4 * (i * i) as u64 - 1).sqrt();
        let v = ctx.real(&horizon / 2u32) / root;
        m[(i - 1, i)] = -v.clone();
        m[(i, i - 1)] = v;
    }
    Ok(OperatorMatrix {
        kind: OperatorKind::FractionalIntegration { beta: 1.0 },
        horizon,
        matrix: m,
        cancellation_bits: 0.0,
    })
}

/// Power of the truncated integration matrix, `(P̄⁻¹)^β` for integer `β ≥ 2`.
pub fn int_matrix_power(ctx: &PrecisionContext, order: usize, horizon: &Real, beta: u32) -> Result<OperatorMatrix> {
    if beta < 2 {
        return Err(Error::Config(format!("integer power must be >= 2, got {beta}")));
    }
    let base = int_matrix(ctx, order, horizon)?;
    let mut acc = base.matrix.clone();
    for _ in 1..beta {
        acc = acc.mul(&base.matrix)?;
    }
    Ok(OperatorMatrix {
        kind: OperatorKind::FractionalIntegration { beta: f64::from(beta) },
        horizon: base.horizon,
        matrix: acc,
        cancellation_bits: 0.0,
    })
}

/// Multiplication by `t^n` for integer `n ≥ 1`: the leading `L × L` block of
/// `J^n`, where `J` is the tridiagonal matrix of multiplication by `t`. `J` is
/// banded, so an `(L+n) × (L+n)` section reproduces the block exactly.
fn mult_matrix_integer(ctx: &PrecisionContext, n: u32, order: usize, horizon: &Real) -> Result<Matrix> {
    let size = order + n as usize;
    let mut jacobi = Matrix::zeros(ctx, size);
    let half = ctx.real(horizon / 2u32);
    for i in 0..size {
        jacobi[(i, i)] = half.clone();
        if i + 1 < size {
            let m = (i + 1) as u64;
            let off = Float::with_val(ctx.bits(), &half * m) / ctx.real(4 * m * m - 1).sqrt();
            jacobi[(i, i + 1)] = off.clone();
            jacobi[(i + 1, i)] = off;
        }
    }
    let mut acc = jacobi.clone();
    for _ in 1..n {
        acc = acc.mul(&jacobi)?;
    }
    Ok(acc.leading_block(order))
}

/// Matrix of multiplication by `t^α`, `α > -1/2`.
pub fn mult_matrix(ctx: &PrecisionContext, alpha: &Real, order: usize, horizon: &Real) -> Result<OperatorMatrix> {
    check_alpha(alpha)?;
    check_order(order)?;
    let kind = OperatorKind::Multiplication { alpha: alpha.to_f64() };
    let horizon_r = ctx.round(horizon);
    if let Some(n) = near_integer(alpha, INTEGER_DISPATCH_TOLERANCE) {
        let matrix = if n == 0 {
            Matrix::identity(ctx, order)
        } else {
            mult_matrix_integer(ctx, n as u32, order, &horizon_r)?
        };
        return Ok(OperatorMatrix {
            kind,
            horizon: horizon_r,
            matrix,
            cancellation_bits: 0.0,
        });
    }

    let work = ctx.with_guard(operator_guard_bits(order));
    let bits = work.bits();
    let alpha = work.round(alpha);
    let horizon_w = work.round(horizon);
    let f = power_coeffs_explicit(&work, &alpha, order, &horizon_w)?;
    let entry = |i: usize, j: usize| {
        let (sum, loss) = alternating_running_sum(bits, j, |k, product| {
            // ((α+k)/k)² (j-k+1)/(α-i+k) · (j+k)/(α+i+k+1)
            let lead = Float::with_val(bits, &alpha + k as u64) / k as u64;
            *product *= lead.square();
            *product *= (j - k + 1) as u64;
            *product /= Float::with_val(bits, &alpha - i as u64) + k as u64;
            *product *= (j + k) as u64;
            *product /= Float::with_val(bits, &alpha + (i + k + 1) as u64);
        });
        let norm = (Float::with_val(bits, 2 * j + 1) / &horizon_w).sqrt();
        (Float::with_val(bits, &f[i] * &sum) * norm, loss)
    };
    let (matrix, loss) = assemble_lower(ctx, order, entry, |_, _, v| v.clone());
    Ok(OperatorMatrix {
        kind,
        horizon: horizon_r,
        matrix,
        cancellation_bits: loss,
    })
}

/// Matrix of Riemann–Liouville integration of order `β ∈ (-1/2, 2]`.
///
/// `β = 0` is the identity, `β = 1` the exact bidiagonal matrix and `β = 2`
/// its truncated square; values within [`INTEGER_DISPATCH_TOLERANCE`] of those
/// integers take the same paths. Negative `β` (fractional differentiation)
/// uses the same running-product form.
pub fn frac_int_matrix(ctx: &PrecisionContext, beta: &Real, order: usize, horizon: &Real) -> Result<OperatorMatrix> {
    check_order(order)?;
    if !beta.is_finite() || *beta <= -0.5f64 || *beta > 2u32 {
        return Err(Error::Domain(format!(
            "fractional order {} outside (-1/2, 2]",
            beta.to_f64()
        )));
    }
    match near_integer(beta, INTEGER_DISPATCH_TOLERANCE) {
        Some(0) => {
            return Ok(OperatorMatrix {
                kind: OperatorKind::FractionalIntegration { beta: 0.0 },
                horizon: ctx.round(horizon),
                matrix: Matrix::identity(ctx, order),
                cancellation_bits: 0.0,
            })
        }
        Some(1) => return int_matrix(ctx, order, horizon),
        Some(2) => return int_matrix_power(ctx, order, horizon, 2),
        _ => {}
    }

    let work = ctx.with_guard(operator_guard_bits(order));
    let bits = work.bits();
    let beta = work.round(beta);
    let horizon_w = work.round(horizon);
    let f = power_coeffs_explicit(&work, &beta, order, &horizon_w)?;
    let inv_gamma = work.one() / gamma(&work, &Float::with_val(bits, &beta + 1u32))?;
    let entry = |i: usize, j: usize| {
        let (sum, loss) = alternating_running_sum(bits, j, |k, product| {
            // (β+k)/k · (j-k+1)/(β-i+k) · (j+k)/(β+i+k+1)
            *product *= Float::with_val(bits, &beta + k as u64);
            *product /= k as u64;
            *product *= (j - k + 1) as u64;
            *product /= Float::with_val(bits, &beta - i as u64) + k as u64;
            *product *= (j + k) as u64;
            *product /= Float::with_val(bits, &beta + (i + k + 1) as u64);
        });
        let norm = (Float::with_val(bits, 2 * j + 1) / &horizon_w).sqrt();
        let value = Float::with_val(bits, &f[i] * &sum) * norm * &inv_gamma;
        (value, loss)
    };
    let (matrix, loss) = assemble_lower(
        ctx,
        order,
        entry,
        |i, j, v| {
            if (i + j) % 2 == 0 {
                v.clone()
            } else {
                -v.clone()
            }
        },
    );
    Ok(OperatorMatrix {
        kind: OperatorKind::FractionalIntegration { beta: beta.to_f64() },
        horizon: ctx.round(horizon),
        matrix,
        cancellation_bits: loss,
    })
}
