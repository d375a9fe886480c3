use fbm_legendre::numeric::{gamma, make_context, ulps_between, ExactDecimal, PrecisionContext};
use proptest::prelude::*;
use rug::Float;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_recurrence(x in 0.05f64..10.0) {
        let c = ctx();
        let x = c.real(x);
        let lhs = gamma(&c, &Float::with_val(c.bits(), &x + 1u32)).unwrap();
        let rhs = c.round(&Float::with_val(c.bits() + 64, &x * gamma(&c, &x).unwrap()));
        prop_assert!(ulps_between(&lhs, &rhs, c.bits()) <= 8.0);
    }

    #[test]
    fn gamma_reflection(x in 0.001f64..0.999) {
        let c = ctx();
        let x = c.real(x);
        let one_minus = Float::with_val(c.bits(), 1u32 - &x);
        // extra bits: πx near π loses relative accuracy in the sine
        let wide = c.with_guard(64);
        let sine = c.round(&Float::with_val(wide.bits(), wide.pi() * &x).sin());
        let value = gamma(&c, &x).unwrap() * gamma(&c, &one_minus).unwrap() * sine / c.pi();
        prop_assert!(ulps_between(&value, &c.one(), c.bits()) <= 16.0);
    }

    #[test]
    fn gamma_agrees_with_mpfr(x in 0.05f64..30.0) {
        let c = ctx();
        let x = c.real(x);
        let reference = Float::with_val(c.bits(), x.gamma_ref());
        prop_assert!(ulps_between(&gamma(&c, &x).unwrap(), &reference, c.bits()) <= 8.0);
    }

    #[test]
    fn decimal_strings_are_exact(int in 0u32..1000, frac in 0u32..1_000_000) {
        let text = format!("{int}.{frac:06}");
        let d: ExactDecimal = text.parse().unwrap();
        let expected = rug::Rational::from((int * 1_000_000 + frac, 1_000_000u32));
        prop_assert_eq!(d.rational(), &expected);
    }
}

#[test]
fn gamma_at_half_integers() {
    let c = ctx();
    let root_pi = c.pi().sqrt();
    assert!(ulps_between(&gamma(&c, &c.real(0.5)).unwrap(), &root_pi, c.bits()) <= 4.0);
    let expected = Float::with_val(c.bits(), &root_pi * 3u32) / 4u32;
    assert!(ulps_between(&gamma(&c, &c.real(2.5)).unwrap(), &expected, c.bits()) <= 4.0);
    assert_eq!(gamma(&c, &c.real(1)).unwrap(), 1);
    assert_eq!(gamma(&c, &c.real(6)).unwrap(), 120);
}

#[test]
fn gamma_at_other_precisions() {
    for bits in [64, 128, 512, 1024] {
        let c = make_context(bits).unwrap();
        let x = c.real(0.3);
        let reference = Float::with_val(bits, x.gamma_ref());
        assert!(
            ulps_between(&gamma(&c, &x).unwrap(), &reference, bits) <= 8.0,
            "{bits} bits"
        );
    }
}

#[test]
fn scientific_notation_rejected() {
    assert!("7e-1".parse::<ExactDecimal>().is_err());
    assert!("0.7E0".parse::<ExactDecimal>().is_err());
    assert!("1/3".parse::<ExactDecimal>().is_ok());
}
