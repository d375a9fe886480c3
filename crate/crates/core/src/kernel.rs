//! The matrix `K` of Legendre coefficients of the fBm kernel `k_H(t, τ)`.
//!
//! Two constructions are provided:
//!
//! * [`k_matrix_direct`] evaluates every entry in closed form as a prefactor
//!   times an alternating sum of running products. The sum cancels heavily
//!   (about 2.55 bits per unit of `L`), so it runs with guard bits
//!   proportional to the order and the entries are rounded back afterwards.
//! * [`k_matrix_product`] multiplies four truncated operator matrices, giving
//!   the approximation `K̃`, which differs from `K̄` unless `H = 1/2`.
//!
//! At `H = 1/2` the kernel is the indicator `1(t - τ)` and both
//! constructions return the exact first-order integration matrix.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::coeffs::power_coeffs_explicit;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{gamma, ExactDecimal, PrecisionContext, Real};
use crate::operators::{frac_int_matrix, int_matrix, mult_matrix};

pub use crate::persist::{load_matrix, save_matrix};

/// Hurst index, horizon and truncation order of one expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstSpec {
    #[serde(rename = "H")]
    hurst: ExactDecimal,
    #[serde(rename = "T")]
    horizon: ExactDecimal,
    #[serde(rename = "L")]
    order: usize,
}

impl HurstSpec {
    pub fn new(hurst: ExactDecimal, horizon: ExactDecimal, order: usize) -> Result<Self> {
        if !hurst.in_open_unit_interval() {
            return Err(Error::Domain(format!(
                "Hurst index {hurst} must lie strictly inside (0, 1)"
            )));
        }
        if !horizon.is_positive() {
            return Err(Error::Domain(format!("horizon {horizon} must be positive")));
        }
        if order == 0 {
            return Err(Error::Config("truncation order must be >= 1".into()));
        }
        Ok(Self { hurst, horizon, order })
    }

    /// Parses `H` and `T` from decimal strings.
    pub fn parse(hurst: &str, horizon: &str, order: usize) -> Result<Self> {
        Self::new(hurst.parse()?, horizon.parse()?, order)
    }

    pub fn hurst(&self) -> &ExactDecimal {
        &self.hurst
    }

    pub fn horizon(&self) -> &ExactDecimal {
        &self.horizon
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `H = 1/2`, decided by exact comparison.
    pub fn is_brownian(&self) -> bool {
        self.hurst.is_half()
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(self.hurst.clone(), self.horizon.clone(), order)
    }

    pub fn with_horizon(&self, horizon: ExactDecimal) -> Result<Self> {
        Self::new(self.hurst.clone(), horizon, self.order)
    }

    pub fn hurst_real(&self, ctx: &PrecisionContext) -> Real {
        self.hurst.to_real(ctx)
    }

    pub fn horizon_real(&self, ctx: &PrecisionContext) -> Real {
        self.horizon.to_real(ctx)
    }

    /// `‖k_H‖² = T^(2H+1) / (2H+1)`.
    pub fn kernel_norm_sq(&self, ctx: &PrecisionContext) -> Real {
        let exponent = Float::with_val(ctx.bits(), self.hurst_real(ctx) * 2u32) + 1u32;
        self.horizon_real(ctx).pow(&exponent) / exponent
    }
}

/// Which four-matrix product approximates `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductVariant {
    /// The `H < 1/2` form below one half and the `H > 1/2` form above.
    Paper,
    /// `a_H P^(-2H) A^(1/2-H) P^(-(1/2-H)) A^(H-1/2)` for every `H`.
    A,
    /// `a_H P^(-1) A^(H-1/2) P^(-(H-1/2)) A^(1/2-H)` for every `H`.
    B,
    /// Form A above one half and form B below: the opposite of `Paper`.
    Crossed,
}

impl ProductVariant {
    /// The single formula (A or B) used at this Hurst index.
    pub fn resolve(self, spec: &HurstSpec) -> ProductVariant {
        let below_half = *spec.hurst().rational() < Rational::from((1, 2));
        match self {
            ProductVariant::Paper if below_half => ProductVariant::A,
            ProductVariant::Paper => ProductVariant::B,
            ProductVariant::Crossed if below_half => ProductVariant::B,
            ProductVariant::Crossed => ProductVariant::A,
            other => other,
        }
    }
}

/// How a kernel matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Product(ProductVariant),
}

impl Method {
    pub fn variant(&self) -> Option<ProductVariant> {
        match self {
            Method::Direct => None,
            Method::Product(v) => Some(*v),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Direct => "direct",
            Method::Product(ProductVariant::Paper) => "product-paper",
            Method::Product(ProductVariant::A) => "product-a",
            Method::Product(ProductVariant::B) => "product-b",
            Method::Product(ProductVariant::Crossed) => "product-crossed",
        };
        f.write_str(name)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").to_ascii_lowercase().as_str() {
            "direct" => Ok(Method::Direct),
            "product-paper" => Ok(Method::Product(ProductVariant::Paper)),
            "product-a" => Ok(Method::Product(ProductVariant::A)),
            "product-b" => Ok(Method::Product(ProductVariant::B)),
            "product-crossed" => Ok(Method::Product(ProductVariant::Crossed)),
            _ => Err(Error::Parse {
                input: s.to_string(),
                reason: "expected direct, product-paper, product-a, product-b or product-crossed".into(),
            }),
        }
    }
}

/// Numerical bookkeeping attached to a kernel matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    /// Precision used while assembling the entries.
    pub working_bits: u32,
    /// Worst observed `log2(max |term| / |sum|)`; bits lost to cancellation.
    pub cancellation_bits: f64,
    /// Set when a loaded matrix was re-rounded to a different precision.
    pub reprecised: bool,
}

/// `L × L` kernel matrix with its provenance.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub spec: HurstSpec,
    pub method: Method,
    pub matrix: Matrix,
    pub diagnostics: KernelDiagnostics,
}

impl KernelMatrix {
    pub fn precision_bits(&self) -> u32 {
        self.matrix.bits()
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Real {
        &self.matrix[(i, j)]
    }

    pub fn norm_sq(&self) -> Real {
        self.matrix.frobenius_sq()
    }
}

/// `a_H = sqrt(2H Γ(H+1/2) Γ(3/2-H) / Γ(2-2H))`; exactly one at `H = 1/2`.
pub fn a_const(ctx: &PrecisionContext, hurst: &ExactDecimal) -> Result<Real> {
    if !hurst.in_open_unit_interval() {
        return Err(Error::Domain(format!("a_H needs 0 < H < 1, got {hurst}")));
    }
    if hurst.is_half() {
        return Ok(ctx.one());
    }
    let work = ctx.with_guard(16);
    let h = hurst.to_real(&work);
    let g1 = gamma(&work, &(h.clone() + 0.5f64))?;
    let g2 = gamma(&work, &(1.5f64 - h.clone()))?;
    let g3 = gamma(&work, &(2u32 - Float::with_val(work.bits(), &h * 2u32)))?;
    let value = (h * 2u32 * g1 * g2 / g3).sqrt();
    Ok(ctx.round(&value))
}

/// Cosine form `sqrt(π H (1-2H) / (Γ(2-2H) cos πH))`, valid for `H ≠ 1/2`.
pub fn a_const_cosine_form(ctx: &PrecisionContext, hurst: &ExactDecimal) -> Result<Real> {
    if !hurst.in_open_unit_interval() || hurst.is_half() {
        return Err(Error::Domain(format!(
            "cosine form of a_H needs H in (0,1) minus 1/2, got {hurst}"
        )));
    }
    let work = ctx.with_guard(16);
    let h = hurst.to_real(&work);
    let pi = work.pi();
    let cos = Float::with_val(work.bits(), &pi * &h).cos();
    let g = gamma(&work, &(2u32 - Float::with_val(work.bits(), &h * 2u32)))?;
    let num = pi * &h * (1u32 - Float::with_val(work.bits(), &h * 2u32));
    Ok(ctx.round(&(num / (g * cos)).sqrt()))
}

/// Guard bits for the expanded form at order `L`: the alternating sums lose
/// about `log2(3 + 2√2) ≈ 2.55` bits per unit of `L`.
pub fn direct_guard_bits(order: usize) -> u32 {
    (2.6 * order as f64).ceil() as u32 + 64
}

/// `K̄` from the expanded closed form. Exact integration matrix at `H = 1/2`.
pub fn k_matrix_direct(ctx: &PrecisionContext, spec: &HurstSpec) -> Result<KernelMatrix> {
    let order = spec.order();
    if spec.is_brownian() {
        let p = int_matrix(ctx, order, &spec.horizon_real(ctx))?;
        return Ok(KernelMatrix {
            spec: spec.clone(),
            method: Method::Direct,
            matrix: p.matrix,
            diagnostics: KernelDiagnostics {
                working_bits: ctx.bits(),
                ..Default::default()
            },
        });
    }

    let work = ctx.with_guard(direct_guard_bits(order));
    let bits = work.bits();
    let h = spec.hurst_real(&work);
    let horizon = spec.horizon_real(&work);
    // exponent of the power function: H + 1/2
    let a = Float::with_val(bits, &h + 0.5f64);
    let half_minus_h = Float::with_val(bits, 0.5f64 - &h);
    let prefactor = a_const(&work, spec.hurst())? * gamma(&work, &half_minus_h)?;
    let f = power_coeffs_explicit(&work, &a, order, &horizon)?;

    // k-dependent factors shared by all entries:
    //   growth[k] = (a+k)² (k-1/2-H) / k³,   weight[k] = (1/2-H+k) / (a+k)
    let growth: Vec<Real> = (0..order)
        .map(|k| {
            if k == 0 {
                return work.one();
            }
            let ak = Float::with_val(bits, &a + k as u64);
            let kk = k as u64;
            // k - 1/2 - H = (k - 1) + (1/2 - H)
            ak.square() * Float::with_val(bits, &half_minus_h + (kk - 1)) / (kk * kk * kk)
        })
        .collect();
    let weight: Vec<Real> = (0..order)
        .map(|k| Float::with_val(bits, &half_minus_h + k as u64) / Float::with_val(bits, &a + k as u64))
        .collect();
    // shifted[m + order] = a + m for m in -order..=2*order
    let shifted: Vec<Real> = (0..=3 * order + 1)
        .map(|idx| Float::with_val(bits, &a + (idx as i64 - order as i64)))
        .collect();
    let shift = |m: i64| &shifted[(m + order as i64) as usize];

    let norms: Vec<Real> = (0..order)
        .map(|j| (Float::with_val(bits, 2 * j + 1) / &horizon).sqrt())
        .collect();

    let losses = std::sync::Mutex::new(Vec::new());
    let matrix = Matrix::from_fn_par(ctx, order, |i, j| {
        let mut product = work.one();
        let mut sum = Float::with_val(bits, &weight[0] * if j % 2 == 0 { 1 } else { -1 });
        let mut largest = Float::with_val(bits, weight[0].abs_ref());
        for k in 1..=j {
            product *= &growth[k];
            product *= ((j - k + 1) * (j + k)) as u64;
            product /= shift(k as i64 - i as i64);
            product /= shift((i + k + 1) as i64);
            let term = Float::with_val(bits, &product * &weight[k]);
            let abs = Float::with_val(bits, term.abs_ref());
            if abs > largest {
                largest = abs;
            }
            if (j - k) % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let loss = if sum.is_zero() {
            f64::from(bits)
        } else {
            (largest / Float::with_val(bits, sum.abs_ref()))
                .log2()
                .to_f64()
                .max(0.0)
        };
        losses.lock().expect("poisoned").push(loss);
        Float::with_val(bits, &prefactor * &norms[j]) * &f[i] * sum
    });
    let cancellation_bits = losses.into_inner().expect("poisoned").into_iter().fold(0.0, f64::max);
    if cancellation_bits + 32.0 > f64::from(direct_guard_bits(order)) {
        log::warn!(
            "expanded form lost {cancellation_bits:.0} bits with only {} guard bits",
            direct_guard_bits(order)
        );
    }
    Ok(KernelMatrix {
        spec: spec.clone(),
        method: Method::Direct,
        matrix,
        diagnostics: KernelDiagnostics {
            working_bits: bits,
            cancellation_bits,
            reprecised: false,
        },
    })
}

/// `K̃`: `a_H` times a product of four truncated operator matrices.
pub fn k_matrix_product(ctx: &PrecisionContext, spec: &HurstSpec, variant: ProductVariant) -> Result<KernelMatrix> {
    let order = spec.order();
    let method = Method::Product(variant);
    if spec.is_brownian() {
        let p = int_matrix(ctx, order, &spec.horizon_real(ctx))?;
        return Ok(KernelMatrix {
            spec: spec.clone(),
            method,
            matrix: p.matrix,
            diagnostics: KernelDiagnostics {
                working_bits: ctx.bits(),
                ..Default::default()
            },
        });
    }
    let work = ctx.with_guard(32);
    let bits = work.bits();
    let h = spec.hurst_real(&work);
    let t = spec.horizon_real(&work);
    let h_minus_half = Float::with_val(bits, &h - 0.5f64);
    let half_minus_h = Float::with_val(bits, 0.5f64 - &h);
    let factors = match variant.resolve(spec) {
        ProductVariant::A => [
            frac_int_matrix(&work, &Float::with_val(bits, &h * 2u32), order, &t)?,
            mult_matrix(&work, &half_minus_h, order, &t)?,
            frac_int_matrix(&work, &half_minus_h, order, &t)?,
            mult_matrix(&work, &h_minus_half, order, &t)?,
        ],
        _ => [
            int_matrix(&work, order, &t)?,
            mult_matrix(&work, &h_minus_half, order, &t)?,
            frac_int_matrix(&work, &h_minus_half, order, &t)?,
            mult_matrix(&work, &half_minus_h, order, &t)?,
        ],
    };
    let cancellation_bits = factors.iter().map(|m| m.cancellation_bits).fold(0.0, f64::max);
    let [first, second, third, fourth] = factors;
    let product = first
        .matrix
        .mul(&second.matrix)?
        .mul(&third.matrix)?
        .mul(&fourth.matrix)?;
    let scaled = product.scale(&a_const(&work, spec.hurst())?);
    Ok(KernelMatrix {
        spec: spec.clone(),
        method,
        matrix: scaled.with_precision(ctx),
        diagnostics: KernelDiagnostics {
            working_bits: bits,
            cancellation_bits,
            reprecised: false,
        },
    })
}

/// Builds `K` by the requested method.
pub fn k_matrix(ctx: &PrecisionContext, spec: &HurstSpec, method: Method) -> Result<KernelMatrix> {
    match method {
        Method::Direct => k_matrix_direct(ctx, spec),
        Method::Product(variant) => k_matrix_product(ctx, spec, variant),
    }
}

/// Moves `K` to a new horizon: entries scale by `(T_new/T_old)^(H+1/2)`.
pub fn rescale(kernel: &KernelMatrix, horizon: &ExactDecimal) -> Result<KernelMatrix> {
    let ctx = kernel.matrix.context();
    let ratio = horizon.ratio(kernel.spec.horizon())?;
    let work = ctx.with_guard(16);
    let exponent = Float::with_val(work.bits(), kernel.spec.hurst_real(&work) + 0.5f64);
    let factor = work.real(&ratio).pow(&exponent);
    let spec = kernel.spec.with_horizon(horizon.clone())?;
    Ok(KernelMatrix {
        spec,
        method: kernel.method,
        matrix: kernel.matrix.scale(&ctx.round(&factor)),
        diagnostics: kernel.diagnostics.clone(),
    })
}
