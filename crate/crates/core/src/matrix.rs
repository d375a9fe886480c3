//! Dense square matrices of extended-precision entries.

use std::ops::{Index, IndexMut};

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{PrecisionContext, Real};

/// Row-major `n × n` matrix of [`Real`] entries at one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    bits: u32,
    data: Vec<Real>,
}

impl Matrix {
    pub fn zeros(ctx: &PrecisionContext, n: usize) -> Self {
        Self {
            n,
            bits: ctx.bits(),
            data: vec![ctx.zero(); n * n],
        }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    /// Builds a matrix from a row-major entry vector, rounding every entry to
    /// the context precision.
    pub fn from_row_major(ctx: &PrecisionContext, n: usize, data: Vec<Real>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Config(format!(
                "{} entries do not form a {n}x{n} matrix",
                data.len()
            )));
        }
        let data = data
            .into_iter()
            .map(|mut x| {
                x.set_prec(ctx.bits());
                x
            })
            .collect();
        Ok(Self {
            n,
            bits: ctx.bits(),
            data,
        })
    }

    /// Fills entry `(i, j)` from `f`, evaluating rows in parallel. Every entry
    /// is computed independently, so the result does not depend on scheduling.
    pub fn from_fn_par<F>(ctx: &PrecisionContext, n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Real + Sync,
    {
        let data: Vec<Real> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let mut x = f(idx / n, idx % n);
                x.set_prec(ctx.bits());
                x
            })
            .collect();
        Self {
            n,
            bits: ctx.bits(),
            data,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.bits).expect("matrix precision was validated on creation")
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[Real] {
        &self.data
    }

    /// Plain triple-loop product with a fixed summation order per entry.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.n != rhs.n {
            return Err(Error::Config(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.n, rhs.n
            )));
        }
        let ctx = PrecisionContext::new(self.bits.max(rhs.bits))?;
        let n = self.n;
        let rhs_t = rhs.transpose();
        Ok(Matrix::from_fn_par(&ctx, n, |i, j| {
            let mut acc = ctx.zero();
            for (a, b) in self.row(i).iter().zip(rhs_t.row(j)) {
                acc += Float::with_val(ctx.bits(), a * b);
            }
            acc
        }))
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix {
            n,
            bits: self.bits,
            data,
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.n != rhs.n {
            return Err(Error::Config("matrix orders differ".into()));
        }
        let bits = self.bits.max(rhs.bits);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| Float::with_val(bits, a - b))
            .collect();
        Ok(Matrix { n: self.n, bits, data })
    }

    pub fn scale(&self, factor: &Real) -> Matrix {
        let data = self
            .data
            .iter()
            .map(|a| Float::with_val(self.bits, a * factor))
            .collect();
        Matrix {
            n: self.n,
            bits: self.bits,
            data,
        }
    }

    /// Squared Frobenius norm, summed row by row in index order.
    pub fn frobenius_sq(&self) -> Real {
        let mut acc = Float::new(self.bits);
        for x in &self.data {
            acc += Float::with_val(self.bits, x.square_ref());
        }
        acc
    }

    /// Top-left `m × m` block.
    pub fn leading_block(&self, m: usize) -> Matrix {
        let m = m.min(self.n);
        let mut data = Vec::with_capacity(m * m);
        for i in 0..m {
            data.extend_from_slice(&self.row(i)[..m]);
        }
        Matrix {
            n: m,
            bits: self.bits,
            data,
        }
    }

    /// Re-rounds every entry to a new precision.
    pub fn with_precision(&self, ctx: &PrecisionContext) -> Matrix {
        Matrix {
            n: self.n,
            bits: ctx.bits(),
            data: self.data.iter().map(|x| ctx.round(x)).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Float::to_f64).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> Real {
        let bits = self.bits.max(rhs.bits);
        let mut worst = Float::new(bits);
        for (a, b) in self.data.iter().zip(&rhs.data) {
            let d = Float::with_val(bits, a - b).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Real;

    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.n + j]
    }
}
