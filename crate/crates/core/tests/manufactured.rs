mod common;

use common::hyperdual::{residual, residual_with, HyperDual};
use poro_hdg::verification::Example1;
use proptest::prelude::*;

#[test]
fn hyperdual_mixed_derivative_of_product() {
    let x = HyperDual { a: 0.7, b: 1.0, c: 0.0, d: 0.0 };
    let y = HyperDual { a: -0.3, b: 0.0, c: 1.0, d: 0.0 };
    let r = x.sin() * y * y;
    assert!((r.a - 0.7f64.sin() * 0.09).abs() < 1e-15);
    assert!((r.b - 0.7f64.cos() * 0.09).abs() < 1e-15);
    assert!((r.c - 0.7f64.sin() * -0.6).abs() < 1e-15);
    assert!((r.d - 0.7f64.cos() * -0.6).abs() < 1e-15);
}

#[test]
fn hyperdual_second_derivative_of_cos() {
    let x = HyperDual { a: 1.1, b: 1.0, c: 1.0, d: 0.0 };
    let r = x.cos();
    assert!((r.d + 1.1f64.cos()).abs() < 1e-15);
}

#[test]
fn residual_detects_coefficient_mismatch() {
    let ex = Example1::new(3.0, 0.3).unwrap();
    let mut m = ex.material.clone();
    m.rho12 = 0.9;
    assert!(residual(&ex, [0.3, 0.6], 0.4) < 1e-10);
    assert!(residual_with(&m, &ex, [0.3, 0.6], 0.4) > 1e-3);
    m = ex.material.clone();
    m.s0 = 1.1;
    assert!(residual_with(&m, &ex, [0.3, 0.6], 0.4) > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn compressible_residuals_vanish(x in 0.0..1.0f64, y in 0.0..1.0f64, t in 0.0..2.0f64) {
        let ex = Example1::new(3.0, 0.3).unwrap();
        prop_assert!(residual(&ex, [x, y], t) <= 1e-10);
    }

    #[test]
    fn nearly_incompressible_residuals_vanish(x in 0.0..1.0f64, y in 0.0..1.0f64, t in 0.0..2.0f64) {
        let ex = Example1::new(3.0, 0.499).unwrap();
        prop_assert!(residual(&ex, [x, y], t) <= 1e-10);
    }
}
