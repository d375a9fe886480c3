//! `fbm`: build kernel matrices, error tables and sample paths.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 validation failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbm_legendre::analysis::{self, ErrorReport};
use fbm_legendre::kernel::{self, HurstSpec, KernelMatrix, Method, ProductVariant};
use fbm_legendre::numeric::{ExactDecimal, PrecisionContext};
use fbm_legendre::persist::shortest_decimal;
use fbm_legendre::simulate::{self, KernelF64, SimulationMeta};
use fbm_legendre::{oracle, Error};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fbm",
    version,
    about = "Legendre spectral representation of fractional Brownian motion"
)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Significand width in bits.
    #[arg(long, global = true, env = "FBM_PRECISION_BITS", default_value_t = 320)]
    precision: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build K, print its norm and errors, optionally save it.
    Kmatrix(KmatrixArgs),
    /// Error grid over H and L.
    ErrorTable(TableArgs),
    /// Sample paths on a uniform grid.
    Simulate(SimulateArgs),
    /// Oracle and Monte-Carlo checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Hurst index as a decimal string.
    #[arg(long)]
    hurst: String,
    /// Horizon T as a decimal string.
    #[arg(long, default_value = "1")]
    horizon: String,
    /// Truncation order L.
    #[arg(long)]
    order: usize,
    /// direct, product-paper, product-a, product-b or product-crossed.
    #[arg(long, default_value = "direct")]
    method: String,
}

#[derive(Args)]
struct KmatrixArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Where to write the matrix file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Round printed values to this many decimals (files keep full precision).
    #[arg(long, default_value_t = 6)]
    round: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
    Table2,
    Table3,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated Hurst indices.
    #[arg(long, value_delimiter = ',')]
    hursts: Vec<String>,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    #[arg(long, default_value = "1")]
    horizon: String,
    #[arg(long, default_value = "direct")]
    method: String,
    /// Preset grid and method of one of the standard tables.
    #[arg(long, value_enum)]
    reproduce: Option<Preset>,
    /// Largest order kept from a preset grid.
    #[arg(long, default_value_t = 64)]
    max_order: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Decimal places; omitted means full precision.
    #[arg(long)]
    round: Option<u32>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    hurst: Option<String>,
    #[arg(long, default_value = "1")]
    horizon: String,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value = "direct")]
    method: String,
    /// Use a saved matrix instead of building one.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Grid points N, spanning [0, T].
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Number of paths M.
    #[arg(long, default_value_t = 1)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: PathFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "0.7")]
    hurst: String,
    #[arg(long, default_value = "1")]
    horizon: String,
    #[arg(long, default_value_t = 16)]
    order: usize,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also check a saved matrix against a fresh build.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

enum Failure {
    Io(String),
    Usage(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format { .. } => Failure::Io(e.to_string()),
            Error::Oracle(_) => Failure::Validation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(cli);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let ctx = PrecisionContext::new(cli.precision)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Kmatrix(a) => cmd_kmatrix(&ctx, a),
        Command::ErrorTable(a) => cmd_error_table(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Validate(a) => cmd_validate(&ctx, a),
    })
}

fn parse_spec(hurst: &str, horizon: &str, order: usize) -> CliResult<HurstSpec> {
    Ok(HurstSpec::parse(hurst, horizon, order)?)
}

fn parse_method(s: &str) -> CliResult<Method> {
    Ok(s.parse::<Method>()?)
}

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_value(name: &str, value: &fbm_legendre::numeric::Real, round: u32) {
    println!(
        "{name} = {} ({})",
        analysis::round_decimal(value, round),
        shortest_decimal(value)
    );
}

fn cmd_kmatrix(ctx: &PrecisionContext, a: KmatrixArgs) -> CliResult {
    let spec = parse_spec(&a.spec.hurst, &a.spec.horizon, a.spec.order)?;
    let method = parse_method(&a.spec.method)?;
    let k = kernel::k_matrix(ctx, &spec, method)?;
    let report: ErrorReport = analysis::mse(ctx, &spec, method)?;
    if let Some(path) = &a.output {
        kernel::save_matrix(&k, path)?;
    }
    println!(
        "H = {}, T = {}, L = {}, method = {method}, precision = {} bits",
        spec.hurst(),
        spec.horizon(),
        spec.order(),
        ctx.bits()
    );
    print_value("norm_sq", &k.norm_sq(), a.round);
    print_value("epsilon", &report.epsilon, a.round);
    if let (Some(star), Some(defect)) = (&report.epsilon_star, &report.defect_norm_sq) {
        print_value("epsilon_star", star, a.round);
        print_value("defect", defect, a.round);
    }
    if k.diagnostics.cancellation_bits > 0.0 {
        println!("cancellation_bits = {:.1}", k.diagnostics.cancellation_bits);
    }
    Ok(())
}

fn cmd_error_table(ctx: &PrecisionContext, a: TableArgs) -> CliResult {
    let horizon: ExactDecimal = a.horizon.parse().map_err(Failure::from)?;
    let (hursts, orders, method, round) = match a.reproduce {
        Some(preset) => {
            let orders: Vec<usize> = analysis::standard_orders()
                .into_iter()
                .filter(|&l| l <= a.max_order)
                .collect();
            let method = match preset {
                Preset::Table1 => Method::Direct,
                Preset::Table2 => Method::Product(ProductVariant::Paper),
                Preset::Table3 => Method::Product(ProductVariant::Crossed),
            };
            (analysis::standard_hursts(), orders, method, Some(a.round.unwrap_or(6)))
        }
        None => {
            let hursts = a
                .hursts
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<ExactDecimal>())
                .collect::<Result<Vec<_>, _>>()?;
            (hursts, a.orders.clone(), parse_method(&a.method)?, a.round)
        }
    };
    if hursts.is_empty() || orders.is_empty() {
        return Err(Failure::Usage("error table needs at least one H and one L".into()));
    }
    let table = analysis::error_table(ctx, &hursts, &orders, &horizon, method)?;
    let text = match a.format {
        Format::Csv => table.to_csv(round),
        Format::Json => table.to_json(round)? + "\n",
        Format::Grid => table.to_grid(),
    };
    emit(a.output.as_deref(), &text)
}

fn cmd_simulate(ctx: &PrecisionContext, a: SimulateArgs) -> CliResult {
    if a.paths == 0 {
        return Err(Failure::Usage("--paths must be >= 1".into()));
    }
    let k: KernelMatrix = match &a.matrix {
        Some(path) => kernel::load_matrix(path, Some(ctx))?,
        None => {
            let hurst = a
                .hurst
                .as_deref()
                .ok_or_else(|| Failure::Usage("--hurst is required without --matrix".into()))?;
            let order = a
                .order
                .ok_or_else(|| Failure::Usage("--order is required without --matrix".into()))?;
            let spec = parse_spec(hurst, &a.horizon, order)?;
            kernel::k_matrix(ctx, &spec, parse_method(&a.method)?)?
        }
    };
    let fast = KernelF64::from_kernel(&k);
    let grid = simulate::uniform_grid(fast.horizon, a.grid)?;
    let paths = simulate::simulate_paths(&fast, a.seed, a.paths, &grid)?;
    let text = match a.format {
        PathFormat::Csv => simulate::paths_to_csv(&paths),
        PathFormat::Json => {
            let meta = SimulationMeta {
                spec: k.spec.clone(),
                method: k.method.to_string(),
                seed: a.seed,
                precision_bits: k.precision_bits(),
                generator: fbm_legendre::rng::GaussianStream::GENERATOR,
            };
            simulate::paths_to_json(&meta, &paths)? + "\n"
        }
    };
    emit(a.output.as_deref(), &text)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: serde_json::Value,
}

fn cmd_validate(ctx: &PrecisionContext, a: ValidateArgs) -> CliResult {
    let spec = parse_spec(&a.hurst, &a.horizon, a.order)?;
    let mut checks = Vec::new();

    let gram = oracle::gram_comparison(ctx, &spec, 6)?;
    checks.push(Check {
        name: "gram_oracle",
        passed: gram.max_deviation <= gram.tail_bound
            && gram.worst_tail_ratio <= 1.0 + 1e-12
            && (spec.order() < 128 || gram.max_deviation <= 1e-3),
        detail: serde_json::json!({
            "max_deviation": gram.max_deviation,
            "tail_bound": gram.tail_bound,
            "worst_tail_ratio": gram.worst_tail_ratio,
            "quadrature_error": gram.quadrature_error,
        }),
    });

    let m = spec.order().min(4);
    let (quad, quad_err) = oracle::kernel_block(ctx, spec.hurst(), spec.horizon(), m, 40)?;
    let direct = kernel::k_matrix_direct(ctx, &spec)?;
    let kernel_dev = quad.max_abs_diff(&direct.matrix.leading_block(m)).to_f64();
    checks.push(Check {
        name: "kernel_quadrature",
        passed: kernel_dev <= 1e-6,
        detail: serde_json::json!({ "max_deviation": kernel_dev, "quadrature_error": quad_err }),
    });

    let report = analysis::mse_product(ctx, &spec, ProductVariant::Paper)?;
    let defect = report.defect_norm_sq.clone().unwrap_or_else(|| ctx.zero());
    checks.push(Check {
        name: "product_defect",
        passed: !spec.is_brownian() || defect.is_zero(),
        detail: serde_json::json!({
            "epsilon": shortest_decimal(&report.epsilon),
            "epsilon_star": report.epsilon_star.as_ref().map(shortest_decimal),
            "defect": shortest_decimal(&defect),
        }),
    });

    let horizon = spec.horizon_real(ctx).to_f64();
    let cov = simulate::estimate_covariance(ctx, &spec, Method::Direct, a.paths, horizon / 2.0, horizon, a.seed)
        .map_err(Failure::from)?;
    checks.push(Check {
        name: "mc_covariance",
        passed: (cov.estimate - cov.reference).abs() <= 4.0 * cov.std_error
            && cov.mean_t.abs() <= 4.0 * cov.mean_t_std_error,
        detail: serde_json::to_value(&cov).unwrap_or_default(),
    });

    let energy = simulate::mean_energy_check(ctx, &spec, Method::Direct, a.paths, a.seed)?;
    checks.push(Check {
        name: "mc_energy",
        passed: (energy.estimate - energy.exact).abs() <= 4.0 * energy.std_error,
        detail: serde_json::to_value(&energy).unwrap_or_default(),
    });

    if let Some(path) = &a.matrix {
        checks.push(match kernel::load_matrix(path, None) {
            Ok(stored) => {
                let fresh_ctx = stored.matrix.context();
                let fresh = kernel::k_matrix(&fresh_ctx, &stored.spec, stored.method)?;
                let dev = fresh.matrix.max_abs_diff(&stored.matrix);
                Check {
                    name: "matrix_file",
                    passed: dev.is_zero(),
                    detail: serde_json::json!({ "path": path, "max_deviation": dev.to_f64() }),
                }
            }
            Err(e) => Check {
                name: "matrix_file",
                passed: false,
                detail: serde_json::json!({ "path": path, "error": e.to_string() }),
            },
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    let out = serde_json::json!({
        "spec": spec,
        "precision_bits": ctx.bits(),
        "passed": passed,
        "checks": checks,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap_or_default());
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(Failure::Validation(format!("failed checks: {}", failed.join(", "))))
    }
}
