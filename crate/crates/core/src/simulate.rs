//! Polynomial fBm sample paths `B̃(t) = Σ b̃ᵢ P̂(i, t)` with `b̃ = K v`.
//!
//! The kernel matrix is converted to `f64` once; coefficient draws and path
//! evaluation run in double precision. Paths are generated in parallel, each
//! from its own substream, and statistics are reduced by pairwise summation
//! over the path index, so results do not depend on the thread count.
//!
//! The truncated expansion does not interpolate `B(0) = 0`: `B̃(0)` is a
//! nonzero Gaussian in general.

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{k_matrix, HurstSpec, KernelMatrix, Method};
use crate::legendre::{basis_eval_all, basis_eval_all_f64};
use crate::numeric::{PrecisionContext, Real};
use crate::rng::GaussianStream;

/// Below this many paths the Monte-Carlo checks are refused.
pub const MIN_PATHS: usize = 1000;

/// Row-major `f64` copy of a kernel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelF64 {
    pub order: usize,
    pub horizon: f64,
    pub entries: Vec<f64>,
}

impl KernelF64 {
    pub fn new(order: usize, horizon: f64, entries: Vec<f64>) -> Result<Self> {
        if order == 0 || entries.len() != order * order {
            return Err(Error::Config(format!(
                "{} entries do not form an {order}x{order} matrix",
                entries.len()
            )));
        }
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            order,
            horizon,
            entries,
        })
    }

    pub fn from_kernel(kernel: &KernelMatrix) -> Self {
        let ctx = PrecisionContext::default();
        Self {
            order: kernel.order(),
            horizon: kernel.spec.horizon_real(&ctx).to_f64(),
            entries: kernel.matrix.to_f64(),
        }
    }
}

/// `b̃ = K v` for one draw of `v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomCoeffVector {
    pub values: Vec<f64>,
    /// Seed of the substream that produced `v`.
    pub seed: u64,
}

/// Draws `L` normals and returns `K v`; the stream advances by exactly `L`.
pub fn sample_coeffs(kernel: &KernelF64, stream: &mut GaussianStream) -> RandomCoeffVector {
    let n = kernel.order;
    let seed = stream.seed();
    let mut v = vec![0.0; n];
    stream.fill(&mut v);
    let values = kernel
        .entries
        .chunks_exact(n)
        .map(|row| row.iter().zip(&v).map(|(k, x)| k * x).sum())
        .collect();
    RandomCoeffVector { values, seed }
}

/// One evaluated path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub path: u64,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub coeffs: RandomCoeffVector,
}

/// `n` equally spaced points from `0` to `T` inclusive (`[0]` when `n = 1`).
pub fn uniform_grid(horizon: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("grid needs at least one point".into()));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let step = horizon / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    grid[n - 1] = horizon;
    Ok(grid)
}

fn check_grid(grid: &[f64], horizon: f64) -> Result<()> {
    for (k, &t) in grid.iter().enumerate() {
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::Domain(format!("grid point {t} outside [0, {horizon}]")));
        }
        if k > 0 && t <= grid[k - 1] {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// Evaluates `Σ b̃ᵢ P̂(i, t)` on `grid`.
pub fn path_eval(coeffs: &RandomCoeffVector, grid: &[f64], horizon: f64) -> Result<Vec<f64>> {
    check_grid(grid, horizon)?;
    let n = coeffs.values.len();
    Ok(grid
        .iter()
        .map(|&t| {
            basis_eval_all_f64(n, t, horizon)
                .iter()
                .zip(&coeffs.values)
                .map(|(p, b)| p * b)
                .sum()
        })
        .collect())
}

/// `n_paths` paths on `grid`; path `p` uses substream `p` of `seed`.
pub fn simulate_paths(kernel: &KernelF64, seed: u64, n_paths: usize, grid: &[f64]) -> Result<Vec<PathSample>> {
    check_grid(grid, kernel.horizon)?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut stream = GaussianStream::for_path(seed, p);
            let coeffs = sample_coeffs(kernel, &mut stream);
            let values = path_eval(&coeffs, grid, kernel.horizon)?;
            Ok(PathSample {
                path: p,
                seed: coeffs.seed,
                grid: grid.to_vec(),
                values,
                coeffs,
            })
        })
        .collect()
}

/// CSV with header `path,t,value`.
pub fn paths_to_csv(paths: &[PathSample]) -> String {
    let mut out = String::from("path,t,value\n");
    for p in paths {
        for (t, v) in p.grid.iter().zip(&p.values) {
            out.push_str(&format!("{},{t},{v}\n", p.path));
        }
    }
    out
}

/// Run metadata written next to simulated paths.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationMeta {
    pub spec: HurstSpec,
    pub method: String,
    pub seed: u64,
    pub precision_bits: u32,
    pub generator: &'static str,
}

#[derive(Serialize)]
struct JsonPaths<'a> {
    meta: &'a SimulationMeta,
    paths: &'a [PathSample],
}

pub fn paths_to_json(meta: &SimulationMeta, paths: &[PathSample]) -> Result<String> {
    serde_json::to_string(&JsonPaths { meta, paths }).map_err(|e| Error::Config(format!("json encoding failed: {e}")))
}

/// Sum with a fixed binary split, independent of how the inputs were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte-Carlo covariance estimate with its references.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceEstimate {
    pub s: f64,
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    /// `Σ (K Kᵀ)ᵢⱼ P̂(i,s) P̂(j,t)`, the covariance of the truncated process.
    pub reference: f64,
    /// `R_H(s, t)` of the untruncated process.
    pub target: f64,
    pub mean_t: f64,
    pub mean_t_std_error: f64,
}

/// Exact covariance of the truncated process at `(s, t)`.
pub fn reference_covariance(ctx: &PrecisionContext, kernel: &KernelMatrix, s: &Real, t: &Real) -> Result<Real> {
    let n = kernel.order();
    let horizon = kernel.spec.horizon_real(ctx);
    let ps = basis_eval_all(ctx, n, s, &horizon)?;
    let pt = basis_eval_all(ctx, n, t, &horizon)?;
    // Cov = (Kᵀ p(s)) · (Kᵀ p(t))
    let project = |p: &[Real]| -> Vec<Real> {
        (0..n)
            .map(|j| {
                let mut acc = ctx.zero();
                for (i, pi) in p.iter().enumerate() {
                    acc += Float::with_val(ctx.bits(), &kernel.matrix[(i, j)] * pi);
                }
                acc
            })
            .collect()
    };
    let (a, b) = (project(&ps), project(&pt));
    let mut acc = ctx.zero();
    for (x, y) in a.iter().zip(&b) {
        acc += Float::with_val(ctx.bits(), x * y);
    }
    Ok(acc)
}

/// `R_H(s, t) = (s^2H + t^2H - |t-s|^2H) / 2`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    (s.powf(e) + t.powf(e) - (t - s).abs().powf(e)) / 2.0
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths < MIN_PATHS {
        return Err(Error::Config(format!(
            "Monte-Carlo checks need at least {MIN_PATHS} paths, got {n_paths}"
        )));
    }
    Ok(())
}

/// Estimates `Cov(B̃(s), B̃(t))` from `n_paths` paths.
pub fn estimate_covariance(
    ctx: &PrecisionContext,
    spec: &HurstSpec,
    method: Method,
    n_paths: usize,
    s: f64,
    t: f64,
    seed: u64,
) -> Result<CovarianceEstimate> {
    check_paths(n_paths)?;
    let kernel = k_matrix(ctx, spec, method)?;
    let fast = KernelF64::from_kernel(&kernel);
    check_grid(&[s], fast.horizon)?;
    check_grid(&[t], fast.horizon)?;
    let ps = basis_eval_all_f64(fast.order, s, fast.horizon);
    let pt = basis_eval_all_f64(fast.order, t, fast.horizon);
    let dot = |p: &[f64], b: &[f64]| -> f64 { p.iter().zip(b).map(|(x, y)| x * y).sum() };
    let pairs: Vec<(f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut stream = GaussianStream::for_path(seed, p);
            let b = sample_coeffs(&fast, &mut stream);
            (dot(&ps, &b.values), dot(&pt, &b.values))
        })
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let n = n_paths as f64;
    let mean_x = pairwise_sum(&xs) / n;
    let (mean_y, mean_y_se) = mean_and_stderr(&ys);
    let products: Vec<f64> = pairs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).collect();
    let (mean_prod, se) = mean_and_stderr(&products);
    let reference = reference_covariance(ctx, &kernel, &ctx.real(s), &ctx.real(t))?;
    Ok(CovarianceEstimate {
        s,
        t,
        estimate: mean_prod * n / (n - 1.0),
        std_error: se,
        reference: reference.to_f64(),
        target: fbm_covariance(spec.hurst_real(ctx).to_f64(), s, t),
        mean_t: mean_y,
        mean_t_std_error: mean_y_se,
    })
}

/// Monte-Carlo estimate of `E ∫ B̃² dt` against the exact `‖K‖²`.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub exact: f64,
}

/// Each path's energy is `Σ b̃ᵢ²` (orthonormal basis), so no grid is needed.
pub fn mean_energy_check(
    ctx: &PrecisionContext,
    spec: &HurstSpec,
    method: Method,
    n_paths: usize,
    seed: u64,
) -> Result<EnergyEstimate> {
    check_paths(n_paths)?;
    let kernel = k_matrix(ctx, spec, method)?;
    let fast = KernelF64::from_kernel(&kernel);
    let energies: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut stream = GaussianStream::for_path(seed, p);
            sample_coeffs(&fast, &mut stream).values.iter().map(|b| b * b).sum()
        })
        .collect();
    let (estimate, std_error) = mean_and_stderr(&energies);
    Ok(EnergyEstimate {
        estimate,
        std_error,
        exact: kernel.norm_sq().to_f64(),
    })
}
