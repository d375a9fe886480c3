//! Orthonormal shifted Legendre polynomials on `[0, T]`.
//!
//! `P̂(i, t) = sqrt((2i+1)/T) · Σ_k l[i][k] (t/T)^k`, with exact integer
//! coefficients `l[i][k] = (-1)^(i-k) C(i+k, i) C(i, i-k)`.
//!
//! Pointwise evaluation never sums the monomial form: the coefficients
//! alternate in sign and grow like `C(2i, i)`, so the sum loses about `i`
//! digits. The three-term recurrence on `x = 2t/T - 1` is used instead. The
//! exact table is kept for identities and tests.

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::numeric::{PrecisionContext, Real};

/// Exact coefficient `l[i][k]` via the running product
/// `Π_{m=1..k} (i-m+1)(i+m)/m²`.
pub fn legendre_coeff(i: usize, k: usize) -> Result<Integer> {
    if k > i {
        return Err(Error::Index(format!("legendre coefficient ({i}, {k}) needs k <= i")));
    }
    let mut value = Integer::from(1);
    for m in 1..=k {
        value *= (i - m + 1) as u64;
        value *= (i + m) as u64;
        // exact: the partial product is |l[i][m]|
        value /= (m * m) as u64;
    }
    if (i - k) % 2 == 1 {
        value = -value;
    }
    Ok(value)
}

/// Exact integer coefficients for orders `0..L`.
#[derive(Clone, Debug)]
pub struct LegendreTable {
    horizon: Real,
    rows: Vec<Vec<Integer>>,
}

impl LegendreTable {
    pub fn new(order: usize, horizon: &Real) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("Legendre table needs order >= 1".into()));
        }
        let rows = (0..order)
            .map(|i| (0..=i).map(|k| legendre_coeff(i, k)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            horizon: horizon.clone(),
            rows,
        })
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn horizon(&self) -> &Real {
        &self.horizon
    }

    pub fn coeff(&self, i: usize, k: usize) -> Result<&Integer> {
        self.rows
            .get(i)
            .and_then(|row| row.get(k))
            .ok_or_else(|| Error::Index(format!("({i}, {k}) outside table of order {}", self.order())))
    }

    pub fn row(&self, i: usize) -> &[Integer] {
        &self.rows[i]
    }

    /// Evaluates `P̂(i, t)` by summing the monomial form. Only meant for
    /// cross-checks; it loses precision for large `i`.
    pub fn eval_monomial(&self, ctx: &PrecisionContext, i: usize, t: &Real) -> Result<Real> {
        check_domain(t, &self.horizon)?;
        let x = ctx.real(t / &self.horizon);
        let mut acc = ctx.zero();
        for coeff in self.row(i).iter().rev() {
            acc *= &x;
            acc += coeff;
        }
        Ok(acc * normalization(ctx, i, &self.horizon))
    }
}

fn check_domain(t: &Real, horizon: &Real) -> Result<()> {
    if horizon.is_sign_negative() || horizon.is_zero() {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    if t.is_nan() || t.is_sign_negative() && !t.is_zero() || *t > *horizon {
        return Err(Error::Domain(format!(
            "t = {} outside [0, {}]",
            t.to_f64(),
            horizon.to_f64()
        )));
    }
    Ok(())
}

fn normalization(ctx: &PrecisionContext, i: usize, horizon: &Real) -> Real {
    (ctx.real(2 * i + 1) / horizon).sqrt()
}

/// `P̂(i, t)` on `[0, T]` by the three-term recurrence.
pub fn basis_eval(ctx: &PrecisionContext, i: usize, t: &Real, horizon: &Real) -> Result<Real> {
    let values = basis_eval_all(ctx, i + 1, t, horizon)?;
    Ok(values.into_iter().next_back().expect("order >= 1"))
}

/// `[P̂(0, t), ..., P̂(L-1, t)]` from one pass of the recurrence.
pub fn basis_eval_all(ctx: &PrecisionContext, order: usize, t: &Real, horizon: &Real) -> Result<Vec<Real>> {
    check_domain(t, horizon)?;
    if order == 0 {
        return Err(Error::Config("basis order must be >= 1".into()));
    }
    let x = ctx.real(t * 2u32) / horizon - 1u32;
    let mut plain = Vec::with_capacity(order);
    plain.push(ctx.one());
    if order > 1 {
        plain.push(x.clone());
    }
    for n in 1..order.saturating_sub(1) {
        // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        let lead = Float::with_val(ctx.bits(), &x * &plain[n]) * (2 * n + 1) as u64;
        let lag = Float::with_val(ctx.bits(), &plain[n - 1] * n as u64);
        plain.push((lead - lag) / (n + 1) as u64);
    }
    Ok(plain
        .into_iter()
        .enumerate()
        .map(|(i, p)| p * normalization(ctx, i, horizon))
        .collect())
}

/// Double-precision variant for path synthesis.
pub fn basis_eval_all_f64(order: usize, t: f64, horizon: f64) -> Vec<f64> {
    let x = 2.0 * t / horizon - 1.0;
    let mut out = Vec::with_capacity(order);
    let (mut prev, mut cur) = (1.0, x);
    for i in 0..order {
        let p = match i {
            0 => 1.0,
            1 => x,
            _ => {
                let n = (i - 1) as f64;
                let next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
                prev = cur;
                cur = next;
                next
            }
        };
        out.push(p * ((2 * i + 1) as f64 / horizon).sqrt());
    }
    out
}
