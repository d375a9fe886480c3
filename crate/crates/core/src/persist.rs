//! Text format for kernel matrices.
//!
//! Line 1 is a JSON header
//! `{"format_version":1,"kind":"kernel_matrix","H":"0.7","T":"1","L":8,"precision_bits":320,"method":"direct"}`;
//! each of the following `L` lines holds one row of comma-separated entries.
//! Entries are the shortest decimal strings that parse back to the same value
//! at the recorded precision, so a save/load cycle is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{HurstSpec, KernelDiagnostics, KernelMatrix, Method};
use crate::matrix::Matrix;
use crate::numeric::{ExactDecimal, PrecisionContext, Real};

pub const FORMAT_VERSION: u32 = 1;
const KIND: &str = "kernel_matrix";

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    kind: String,
    #[serde(rename = "H")]
    hurst: ExactDecimal,
    #[serde(rename = "T")]
    horizon: ExactDecimal,
    #[serde(rename = "L")]
    order: usize,
    precision_bits: u32,
    method: String,
}

/// Shortest decimal string that re-parses to `x` at `x.prec()` bits.
pub fn shortest_decimal(x: &Real) -> String {
    if x.is_zero() {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let prec = x.prec();
    let round_trips = |d: usize| {
        let s = x.to_string_radix(10, Some(d));
        Float::parse(&s)
            .map(|p| Float::with_val(prec, p) == *x)
            .unwrap_or(false)
    };
    // ceil(prec·log10 2) + 1 digits always suffice
    let mut hi = (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 1;
    let mut lo = 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if round_trips(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut digits = lo;
    while !round_trips(digits) {
        digits += 1;
    }
    trim_mantissa(&x.to_string_radix(10, Some(digits)))
}

/// `5.0000e-1` → `5e-1`; `1.2500` → `1.25`.
fn trim_mantissa(s: &str) -> String {
    let (mantissa, exponent) = match s.find('e') {
        Some(pos) => s.split_at(pos),
        None => (s, ""),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}{exponent}")
}

/// Writes `kernel` to `path`.
pub fn save_matrix(kernel: &KernelMatrix, path: &Path) -> Result<()> {
    let header = Header {
        format_version: FORMAT_VERSION,
        kind: KIND.into(),
        hurst: kernel.spec.hurst().clone(),
        horizon: kernel.spec.horizon().clone(),
        order: kernel.order(),
        precision_bits: kernel.precision_bits(),
        method: kernel.method.to_string(),
    };
    let mut out = serde_json::to_string(&header).map_err(|e| Error::Config(format!("header encoding failed: {e}")))?;
    out.push('\n');
    for i in 0..kernel.order() {
        let row: Vec<String> = kernel.matrix.row(i).iter().map(shortest_decimal).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a matrix file. Entries are parsed at the recorded precision; when
/// `ctx` asks for a different precision they are re-rounded, a warning is
/// logged and `diagnostics.reprecised` is set.
pub fn load_matrix(path: &Path, ctx: Option<&PrecisionContext>) -> Result<KernelMatrix> {
    let text = fs::read_to_string(path)?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let header_line = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let header: Header = serde_json::from_str(header_line).map_err(|e| bad(format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(bad(format!(
            "format version {} is not supported (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    if header.kind != KIND {
        return Err(bad(format!("unexpected kind {:?}", header.kind)));
    }
    let spec = HurstSpec::new(header.hurst, header.horizon, header.order).map_err(|e| bad(e.to_string()))?;
    let method: Method = header.method.parse().map_err(|e: Error| bad(e.to_string()))?;
    let stored = PrecisionContext::new(header.precision_bits).map_err(|e| bad(e.to_string()))?;

    let n = header.order;
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    if rows.len() != n {
        return Err(bad(format!(
            "header declares L = {n} but the file has {} rows",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != n {
            return Err(bad(format!("row {i} has {} entries, expected {n}", fields.len())));
        }
        for field in fields {
            let parsed = Float::parse(field.trim()).map_err(|e| bad(format!("row {i}: {field:?}: {e}")))?;
            let value = Float::with_val(stored.bits(), parsed);
            if !value.is_finite() {
                return Err(bad(format!("row {i}: non-finite entry {field:?}")));
            }
            data.push(value);
        }
    }
    let mut matrix = Matrix::from_row_major(&stored, n, data)?;
    let mut reprecised = false;
    if let Some(target) = ctx.filter(|c| c.bits() != stored.bits()) {
        log::warn!(
            "{}: stored at {} bits, re-rounding to {} bits",
            path.display(),
            stored.bits(),
            target.bits()
        );
        matrix = matrix.with_precision(target);
        reprecised = true;
    }
    Ok(KernelMatrix {
        spec,
        method,
        diagnostics: KernelDiagnostics {
            working_bits: matrix.bits(),
            cancellation_bits: 0.0,
            reprecised,
        },
        matrix,
    })
}
