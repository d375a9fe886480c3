use fbm_legendre::coeffs::power_coeffs_by_degree;
use fbm_legendre::kernel::{
    a_const, a_const_cosine_form, k_matrix, k_matrix_direct, k_matrix_product, rescale, HurstSpec, Method,
    ProductVariant,
};
use fbm_legendre::legendre::legendre_coeff;
use fbm_legendre::numeric::{rising_factorial, ulps_between, ExactDecimal, PrecisionContext, Real};
use fbm_legendre::operators::int_matrix;
use fbm_legendre::oracle::kernel_block;
use rug::ops::Pow;
use rug::Float;

fn spec(h: &str, t: &str, l: usize) -> HurstSpec {
    HurstSpec::parse(h, t, l).unwrap()
}

fn dec(s: &str) -> ExactDecimal {
    s.parse().unwrap()
}

/// Column form: a_H Γ(3/2-H) sqrt((2j+1)/T) Σ_k l_jk (3/2-H)^(k rising) / (T^k (H+1/2+k) k!) F^(H+1/2+k),
/// with MPFR's gamma and the degree recurrence for the shifted coefficients.
fn column_form(spec: &HurstSpec, bits: u32) -> Vec<Vec<Real>> {
    let work = PrecisionContext::new(bits).unwrap();
    let n = spec.order();
    let h = spec.hurst_real(&work);
    let t = spec.horizon_real(&work);
    let a = Float::with_val(bits, &h + 0.5f64);
    let c = Float::with_val(bits, 1.5f64 - &h);
    let lead = a_const(&work, spec.hurst()).unwrap() * Float::with_val(bits, c.gamma_ref());
    let shifted: Vec<_> = (0..n)
        .map(|k| power_coeffs_by_degree(&work, &Float::with_val(bits, &a + k as u64), n, &t).unwrap())
        .collect();
    let mut out = vec![vec![work.zero(); n]; n];
    for j in 0..n {
        let norm = (work.real(2 * j + 1) / &t).sqrt();
        for k in 0..=j {
            let weight = Float::with_val(bits, legendre_coeff(j, k).unwrap()) * rising_factorial(&c, k as u32)
                / t.clone().pow(k as u32)
                / Float::with_val(bits, &a + k as u64)
                / Float::with_val(bits, Float::factorial(k as u32));
            for (i, row) in out.iter_mut().enumerate() {
                row[j] += Float::with_val(bits, &weight * &shifted[k][i]);
            }
        }
        for row in out.iter_mut() {
            row[j] = Float::with_val(bits, &lead * &row[j]) * &norm;
        }
    }
    out
}

#[test]
fn direct_matches_column_form() {
    let ctx = PrecisionContext::default();
    for h in ["0.1", "0.3", "0.7", "0.9"] {
        for l in [1, 5, 12] {
            let s = spec(h, "1.5", l);
            let k = k_matrix_direct(&ctx, &s).unwrap();
            let reference = column_form(&s, 1024);
            for i in 0..l {
                for j in 0..l {
                    let d = Float::with_val(1024, &k.matrix[(i, j)] - &reference[i][j]).abs();
                    assert!(d <= 1e-35, "H {h} L {l} ({i}, {j}): {}", d.to_f64());
                }
            }
        }
    }
}

#[test]
fn brownian_kernel_is_integration() {
    let ctx = PrecisionContext::default();
    for t in ["1", "2", "1/3"] {
        let s = spec("0.5", t, 9);
        let p = int_matrix(&ctx, 9, &s.horizon_real(&ctx)).unwrap().matrix;
        for method in ["direct", "product-paper", "product-a", "product-b", "product-crossed"] {
            let k = k_matrix(&ctx, &s, method.parse().unwrap()).unwrap();
            assert_eq!(k.matrix, p, "{method} T {t}");
        }
    }
}

#[test]
fn leading_entry() {
    let ctx = PrecisionContext::default();
    for (h, t) in [("0.2", "1"), ("0.65", "3"), ("0.5", "4")] {
        let s = spec(h, t, 3);
        let k = k_matrix_direct(&ctx, &s).unwrap();
        let hr = s.hurst_real(&ctx);
        let a = Float::with_val(ctx.bits(), &hr + 0.5f64);
        let expected = a_const(&ctx, s.hurst()).unwrap()
            * Float::with_val(ctx.bits(), (1.5f64 - hr.clone()).gamma())
            * s.horizon_real(&ctx).pow(&a)
            / &a
            / Float::with_val(ctx.bits(), &hr + 1.5f64);
        assert!(ulps_between(&k.matrix[(0, 0)], &expected, ctx.bits()) <= 64.0, "H {h}");
    }
}

#[test]
fn a_const_forms_agree() {
    let ctx = PrecisionContext::default();
    for h in ["0.25", "0.75", "0.1", "0.9"] {
        let a = a_const(&ctx, &dec(h)).unwrap();
        let b = a_const_cosine_form(&ctx, &dec(h)).unwrap();
        assert!(ulps_between(&a, &b, ctx.bits()) <= 8.0, "H {h}");
    }
    let expected = (ctx.real(0.5)
        * Float::with_val(ctx.bits(), (ctx.real(0.75)).gamma())
        * Float::with_val(ctx.bits(), (ctx.real(1.25)).gamma())
        / Float::with_val(ctx.bits(), (ctx.real(1.5)).gamma()))
    .sqrt();
    assert!(ulps_between(&a_const(&ctx, &dec("0.25")).unwrap(), &expected, ctx.bits()) <= 8.0);
}

#[test]
fn norm_against_published_value() {
    let ctx = PrecisionContext::default();
    let k = k_matrix_direct(&ctx, &spec("0.3", "1", 16)).unwrap();
    let expected = 1.0 / 1.6 - 0.042250;
    assert!((k.norm_sq().to_f64() - expected).abs() <= 5e-7);
}

#[test]
fn quadrature_kernel_matches_direct() {
    let ctx = PrecisionContext::default();
    for h in ["0.1", "0.2", "0.35", "0.7", "0.9"] {
        let s = spec(h, "1.5", 6);
        let k = k_matrix_direct(&ctx, &s).unwrap();
        let (q, _) = kernel_block(&ctx, s.hurst(), s.horizon(), 4, 40).unwrap();
        let d = q.max_abs_diff(&k.matrix.leading_block(4)).to_f64();
        assert!(d <= 1e-6, "H {h}: {d:e}");
    }
}

#[test]
fn product_variants_converge_to_each_other() {
    let ctx = PrecisionContext::default();
    for h in ["0.3", "0.7"] {
        let mut previous = f64::INFINITY;
        for l in [16, 128] {
            let s = spec(h, "1", l);
            let a = k_matrix_product(&ctx, &s, ProductVariant::A).unwrap();
            let b = k_matrix_product(&ctx, &s, ProductVariant::B).unwrap();
            let gap = a
                .matrix
                .leading_block(4)
                .max_abs_diff(&b.matrix.leading_block(4))
                .to_f64();
            assert!(gap < previous, "H {h} L {l}: {gap:e}");
            previous = gap;
        }
        assert!(previous <= 1e-6, "H {h}: {previous:e}");
    }
}

#[test]
fn product_variant_resolution() {
    assert_eq!(ProductVariant::Paper.resolve(&spec("0.3", "1", 4)), ProductVariant::A);
    assert_eq!(ProductVariant::Paper.resolve(&spec("0.7", "1", 4)), ProductVariant::B);
    assert_eq!(ProductVariant::Crossed.resolve(&spec("0.3", "1", 4)), ProductVariant::B);
    assert_eq!(ProductVariant::Crossed.resolve(&spec("0.7", "1", 4)), ProductVariant::A);
    assert_eq!(
        "product-paper".parse::<Method>().unwrap(),
        Method::Product(ProductVariant::Paper)
    );
}

#[test]
fn rescale_matches_direct() {
    let ctx = PrecisionContext::default();
    let unit = k_matrix_direct(&ctx, &spec("0.7", "1", 8)).unwrap();
    for t in ["2.5", "1/3"] {
        let moved = rescale(&unit, &dec(t)).unwrap();
        let direct = k_matrix_direct(&ctx, &spec("0.7", t, 8)).unwrap();
        let d = moved.matrix.max_abs_diff(&direct.matrix).to_f64();
        assert!(d < 1e-85, "T {t}: {d:e}");
    }
    let brownian = k_matrix_direct(&ctx, &spec("0.5", "1", 4)).unwrap();
    let moved = rescale(&brownian, &dec("4")).unwrap();
    assert_eq!(moved.matrix[(0, 0)], 2);
    assert_eq!(rescale(&unit, &dec("1")).unwrap().matrix, unit.matrix);
}
