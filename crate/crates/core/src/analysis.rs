//! Mean-square truncation errors and the error tables.
//!
//! With `‖k_H‖² = T^(2H+1)/(2H+1)` and Frobenius norms,
//!
//! ```text
//! ε  = ‖k_H‖² - ‖K̄‖²
//! ε* = ε + ‖K̄ - K̃‖²
//! ```
//!
//! Norms are accumulated with 64 guard bits and rounded once at the end.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{k_matrix_direct, k_matrix_product, HurstSpec, Method, ProductVariant};
use crate::numeric::{ExactDecimal, PrecisionContext, Real};

const NORM_GUARD_BITS: u32 = 64;

/// Error terms of one truncated expansion.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub spec: HurstSpec,
    pub method: Method,
    pub epsilon: Real,
    /// `None` for the direct method.
    pub epsilon_star: Option<Real>,
    pub kernel_norm_sq: Real,
    pub truncated_norm_sq: Real,
    /// `‖K̄ - K̃‖²`; `None` for the direct method.
    pub defect_norm_sq: Option<Real>,
}

impl ErrorReport {
    /// `ε*` for product methods, `ε` otherwise.
    pub fn value(&self) -> &Real {
        self.epsilon_star.as_ref().unwrap_or(&self.epsilon)
    }
}

/// `ε` from the expanded-form matrix.
pub fn mse_direct(ctx: &PrecisionContext, spec: &HurstSpec) -> Result<ErrorReport> {
    let work = ctx.with_guard(NORM_GUARD_BITS);
    let k = k_matrix_direct(&work, spec)?;
    let kernel_norm_sq = spec.kernel_norm_sq(&work);
    let truncated = k.norm_sq();
    let epsilon = Float::with_val(work.bits(), &kernel_norm_sq - &truncated);
    Ok(ErrorReport {
        spec: spec.clone(),
        method: Method::Direct,
        epsilon: ctx.round(&epsilon),
        epsilon_star: None,
        kernel_norm_sq: ctx.round(&kernel_norm_sq),
        truncated_norm_sq: ctx.round(&truncated),
        defect_norm_sq: None,
    })
}

/// `ε` and `ε*` for one product variant.
pub fn mse_product(ctx: &PrecisionContext, spec: &HurstSpec, variant: ProductVariant) -> Result<ErrorReport> {
    let work = ctx.with_guard(NORM_GUARD_BITS);
    let exact = k_matrix_direct(&work, spec)?;
    let approx = k_matrix_product(&work, spec, variant)?;
    let kernel_norm_sq = spec.kernel_norm_sq(&work);
    let truncated = exact.norm_sq();
    let defect = exact.matrix.sub(&approx.matrix)?.frobenius_sq();
    let epsilon = Float::with_val(work.bits(), &kernel_norm_sq - &truncated);
    let epsilon_star = Float::with_val(work.bits(), &epsilon + &defect);
    Ok(ErrorReport {
        spec: spec.clone(),
        method: Method::Product(variant),
        epsilon: ctx.round(&epsilon),
        epsilon_star: Some(ctx.round(&epsilon_star)),
        kernel_norm_sq: ctx.round(&kernel_norm_sq),
        truncated_norm_sq: ctx.round(&truncated),
        defect_norm_sq: Some(ctx.round(&defect)),
    })
}

pub fn mse(ctx: &PrecisionContext, spec: &HurstSpec, method: Method) -> Result<ErrorReport> {
    match method {
        Method::Direct => mse_direct(ctx, spec),
        Method::Product(v) => mse_product(ctx, spec, v),
    }
}

/// Moves a report to another horizon: every term scales by
/// `(T_new/T_old)^(2H+1)`.
pub fn t_scaling_check(ctx: &PrecisionContext, report: &ErrorReport, horizon: &ExactDecimal) -> Result<ErrorReport> {
    let work = ctx.with_guard(16);
    let ratio = work.real(&horizon.ratio(report.spec.horizon())?);
    let exponent = Float::with_val(work.bits(), report.spec.hurst_real(&work) * 2u32) + 1u32;
    let factor = ratio.pow(&exponent);
    let scale = |x: &Real| ctx.round(&Float::with_val(work.bits(), x * &factor));
    Ok(ErrorReport {
        spec: report.spec.with_horizon(horizon.clone())?,
        method: report.method,
        epsilon: scale(&report.epsilon),
        epsilon_star: report.epsilon_star.as_ref().map(scale),
        kernel_norm_sq: scale(&report.kernel_norm_sq),
        truncated_norm_sq: scale(&report.truncated_norm_sq),
        defect_norm_sq: report.defect_norm_sq.as_ref().map(scale),
    })
}

/// `T² / (4(2L-1))`, the closed form of `ε` at `H = 1/2`.
pub fn brownian_epsilon(ctx: &PrecisionContext, order: usize, horizon: &ExactDecimal) -> Real {
    let value = horizon.rational().clone().square() / Integer::from(4 * (2 * order as u64 - 1));
    ctx.real(&value)
}

/// Rounds to six decimals, ties to even, and formats with exactly six digits.
pub fn round6(x: &Real) -> String {
    round_decimal(x, 6)
}

/// Rounds to `digits` decimals, ties to even.
pub fn round_decimal(x: &Real, digits: u32) -> String {
    let exact = x.to_rational().unwrap_or_default();
    let scaled = exact * Integer::from(Integer::u_pow_u(10, digits));
    let (frac, mut whole) = scaled.fract_floor(Integer::new());
    let half = Rational::from((1, 2));
    if frac > half || (frac == half && whole.is_odd()) {
        whole += 1;
    }
    let negative = whole < 0;
    let digits_str = whole.abs().to_string();
    let width = digits as usize + 1;
    let padded = format!("{digits_str:0>width$}");
    let (int_part, frac_part) = padded.split_at(padded.len() - digits as usize);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(rename = "H")]
    hurst: &'a str,
    #[serde(rename = "L")]
    order: usize,
    epsilon: String,
    epsilon_star: Option<String>,
    method: &'static str,
    variant: Option<&'static str>,
}

/// Grid of reports, rows ordered by `H` then `L` as given.
#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub hursts: Vec<ExactDecimal>,
    pub orders: Vec<usize>,
    pub cells: Vec<ErrorReport>,
}

impl ErrorTable {
    pub fn cell(&self, h_index: usize, l_index: usize) -> &ErrorReport {
        &self.cells[h_index * self.orders.len() + l_index]
    }

    /// CSV with header `H,L,value`. `round` gives the decimal places; `None`
    /// writes full-precision decimals.
    pub fn to_csv(&self, round: Option<u32>) -> String {
        let mut out = String::from("H,L,value\n");
        for cell in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{}",
                cell.spec.hurst(),
                cell.spec.order(),
                format_value(cell.value(), round)
            );
        }
        out
    }

    pub fn to_json(&self, round: Option<u32>) -> Result<String> {
        let rows: Vec<JsonRow> = self
            .cells
            .iter()
            .map(|cell| JsonRow {
                hurst: cell.spec.hurst().as_str(),
                order: cell.spec.order(),
                epsilon: format_value(&cell.epsilon, round),
                epsilon_star: cell.epsilon_star.as_ref().map(|v| format_value(v, round)),
                method: method_family(cell.method),
                variant: cell.method.variant().map(variant_name),
            })
            .collect();
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Config(format!("json encoding failed: {e}")))
    }

    /// Fixed-width grid like the printed tables: one row per `H`.
    pub fn to_grid(&self) -> String {
        let mut out = String::from("H   ");
        for l in &self.orders {
            let _ = write!(out, " {l:>9}");
        }
        out.push('\n');
        for (hi, h) in self.hursts.iter().enumerate() {
            let _ = write!(out, "{:<4}", h.as_str());
            for li in 0..self.orders.len() {
                let _ = write!(out, " {:>9}", round6(self.cell(hi, li).value()));
            }
            out.push('\n');
        }
        out
    }
}

fn format_value(x: &Real, round: Option<u32>) -> String {
    match round {
        Some(d) => round_decimal(x, d),
        None => crate::persist::shortest_decimal(x),
    }
}

fn method_family(method: Method) -> &'static str {
    match method {
        Method::Direct => "direct",
        Method::Product(_) => "product",
    }
}

fn variant_name(v: ProductVariant) -> &'static str {
    match v {
        ProductVariant::Paper => "paper",
        ProductVariant::A => "a",
        ProductVariant::B => "b",
        ProductVariant::Crossed => "crossed",
    }
}

/// Errors over the grid `hursts × orders` at horizon `T`, cells in parallel.
pub fn error_table(
    ctx: &PrecisionContext,
    hursts: &[ExactDecimal],
    orders: &[usize],
    horizon: &ExactDecimal,
    method: Method,
) -> Result<ErrorTable> {
    if hursts.is_empty() || orders.is_empty() {
        return Err(Error::Config("error table needs at least one H and one L".into()));
    }
    let specs = hursts
        .iter()
        .flat_map(|h| {
            orders
                .iter()
                .map(move |&l| HurstSpec::new(h.clone(), horizon.clone(), l))
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = specs
        .par_iter()
        .map(|spec| mse(ctx, spec, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable {
        hursts: hursts.to_vec(),
        orders: orders.to_vec(),
        cells,
    })
}

/// `0.1, 0.2, ..., 0.9`.
pub fn standard_hursts() -> Vec<ExactDecimal> {
    (1..=9)
        .map(|k| format!("0.{k}").parse().expect("valid decimal"))
        .collect()
}

/// `4, 8, ..., 1024`.
pub fn standard_orders() -> Vec<usize> {
    (2..=10).map(|p| 1usize << p).collect()
}
