use fbm_legendre::kernel::{k_matrix_direct, HurstSpec, Method};
use fbm_legendre::legendre::basis_eval_all;
use fbm_legendre::numeric::{ulps_between, PrecisionContext};
use fbm_legendre::oracle::gauss_legendre_rule;
use fbm_legendre::rng::GaussianStream;
use fbm_legendre::simulate::{
    estimate_covariance, mean_energy_check, path_eval, reference_covariance, sample_coeffs, simulate_paths,
    uniform_grid, KernelF64, RandomCoeffVector,
};
use rug::ops::Pow;
use rug::Float;

fn spec(h: &str, t: &str, l: usize) -> HurstSpec {
    HurstSpec::parse(h, t, l).unwrap()
}

#[test]
fn gaussian_stream_moments() {
    let n = 1_000_000;
    let draws: Vec<f64> = GaussianStream::new(2024).take(n).collect();
    let again: Vec<f64> = GaussianStream::new(2024).take(n).collect();
    assert_eq!(draws, again);
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    assert!(mean.abs() <= 4e-3, "{mean}");
    assert!((var - 1.0).abs() <= 6e-3, "{var}");
}

#[test]
fn coefficient_covariance_matches_kkt() {
    let ctx = PrecisionContext::default();
    let k = k_matrix_direct(&ctx, &spec("0.7", "1", 4)).unwrap();
    let kkt = k.matrix.mul(&k.matrix.transpose()).unwrap();
    let fast = KernelF64::from_kernel(&k);
    let n = 100_000;
    let samples: Vec<Vec<f64>> = (0..n as u64)
        .map(|p| {
            let mut stream = GaussianStream::for_path(5, p);
            let b = sample_coeffs(&fast, &mut stream);
            assert_eq!(stream.position(), 4);
            b.values
        })
        .collect();
    for i in 0..4 {
        for j in 0..4 {
            let prods: Vec<f64> = samples.iter().map(|b| b[i] * b[j]).collect();
            let mean = prods.iter().sum::<f64>() / n as f64;
            let var = prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            let exact = kkt[(i, j)].to_f64();
            assert!((mean - exact).abs() <= 4.0 * se, "({i}, {j}): {mean} vs {exact} ± {se}");
        }
    }
}

#[test]
fn path_evaluation_basics() {
    let grid = uniform_grid(4.0, 5).unwrap();
    assert_eq!(grid, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    let zero = RandomCoeffVector {
        values: vec![0.0; 6],
        seed: 0,
    };
    assert!(path_eval(&zero, &grid, 4.0).unwrap().iter().all(|v| *v == 0.0));
    let single = RandomCoeffVector {
        values: vec![3.0],
        seed: 0,
    };
    assert!(path_eval(&single, &grid, 4.0).unwrap().iter().all(|v| *v == 1.5));
    assert!(path_eval(&single, &[4.5], 4.0).is_err());
    assert!(path_eval(&single, &[-0.1], 4.0).is_err());
}

#[test]
fn order_one_brownian_path() {
    let ctx = PrecisionContext::default();
    let k = KernelF64::from_kernel(&k_matrix_direct(&ctx, &spec("0.5", "1", 1)).unwrap());
    let paths = simulate_paths(&k, 7, 1, &[0.0, 1.0]).unwrap();
    let v0 = GaussianStream::for_path(7, 0).next_normal();
    assert_eq!(paths[0].values, vec![v0 / 2.0, v0 / 2.0]);
}

#[test]
fn per_path_energy_identity() {
    let ctx = PrecisionContext::default();
    let horizon = ctx.real(2);
    let k = KernelF64::from_kernel(&k_matrix_direct(&ctx, &spec("0.3", "2", 24)).unwrap());
    let rule = gauss_legendre_rule(&ctx, 64).unwrap();
    let (nodes, weights) = rule.mapped(&ctx.zero(), &horizon);
    let bases: Vec<_> = nodes
        .iter()
        .map(|t| basis_eval_all(&ctx, 24, t, &horizon).unwrap())
        .collect();
    for p in 0..5 {
        let b = sample_coeffs(&k, &mut GaussianStream::for_path(9, p));
        let coeffs: Vec<Float> = b.values.iter().map(|&v| ctx.real(v)).collect();
        let mut integral = ctx.zero();
        for (w, basis) in weights.iter().zip(&bases) {
            let mut value = ctx.zero();
            for (c, e) in coeffs.iter().zip(basis) {
                value += Float::with_val(ctx.bits(), c * e);
            }
            integral += value.square() * w;
        }
        let mut energy = ctx.zero();
        for c in &coeffs {
            energy += Float::with_val(ctx.bits(), c.square_ref());
        }
        let diff = Float::with_val(ctx.bits(), &integral - &energy).abs();
        assert!(diff <= 1e-25, "path {p}: {}", diff.to_f64());
    }
}

#[test]
fn self_similar_reference_covariance() {
    let ctx = PrecisionContext::default();
    for h in ["0.25", "0.7"] {
        let unit = k_matrix_direct(&ctx, &spec(h, "1", 10)).unwrap();
        let wide = k_matrix_direct(&ctx, &spec(h, "3", 10)).unwrap();
        let t = ctx.real(3);
        let factor = t
            .clone()
            .pow(Float::with_val(ctx.bits(), unit.spec.hurst_real(&ctx) * 2u32));
        for (s, u) in [(0.25, 0.5), (0.5, 1.0), (0.75, 0.75)] {
            let c1 = reference_covariance(&ctx, &unit, &ctx.real(s), &ctx.real(u)).unwrap();
            let ts = ctx.real(3.0 * s);
            let tu = ctx.real(3.0 * u);
            let ct = reference_covariance(&ctx, &wide, &ts, &tu).unwrap();
            let expected = Float::with_val(ctx.bits(), &c1 * &factor);
            let ulps = ulps_between(&ct, &expected, ctx.bits());
            assert!(ulps <= 8.0, "H {h} ({s}, {u}): {ulps} ulps");
        }
    }
}

#[test]
fn brownian_variance_approaches_t() {
    let ctx = PrecisionContext::default();
    let t = ctx.real(0.6);
    let mut previous = f64::INFINITY;
    for l in [4, 16, 64] {
        let k = k_matrix_direct(&ctx, &spec("0.5", "1", l)).unwrap();
        let gap = (reference_covariance(&ctx, &k, &t, &t).unwrap().to_f64() - 0.6).abs();
        assert!(gap < previous);
        previous = gap;
    }
    assert!(previous < 1e-2);
}

#[test]
fn monte_carlo_small() {
    let ctx = PrecisionContext::default();
    let s = spec("0.3", "2", 8);
    let cov = estimate_covariance(&ctx, &s, Method::Direct, 20_000, 0.5, 1.5, 3).unwrap();
    assert!((cov.estimate - cov.reference).abs() <= 4.0 * cov.std_error);
    assert!(cov.mean_t.abs() <= 4.0 * cov.mean_t_std_error);
    let energy = mean_energy_check(&ctx, &spec("0.5", "1", 4), Method::Direct, 20_000, 3).unwrap();
    assert!((energy.exact - (0.5 - 1.0 / 28.0)).abs() < 1e-15);
    assert!((energy.estimate - energy.exact).abs() <= 4.0 * energy.std_error);
    assert!(estimate_covariance(&ctx, &s, Method::Direct, 999, 0.5, 1.5, 3).is_err());
}

#[test]
fn thread_count_does_not_change_paths() {
    let ctx = PrecisionContext::default();
    let k = KernelF64::from_kernel(&k_matrix_direct(&ctx, &spec("0.8", "1", 12)).unwrap());
    let grid = uniform_grid(1.0, 17).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate_paths(&k, 77, 64, &grid).unwrap())
    };
    let one = run(1);
    let many = run(8);
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(
            a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
