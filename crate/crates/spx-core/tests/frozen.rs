//! Cross-module workflows pinned to frozen values: once computed and
//! inspected, the numbers act as regression anchors for the pipeline
//! (system -> sequences -> widths; profile -> class -> order; damped
//! scans against their closed limits).

use std::f64::consts::PI;

use spx_core::classes::{
    classify, default_classification_grid, order_formula, ratio_validation, ConvexDecayFunction,
    DecayClass, OrderKind, OrderSetting,
};
use spx_core::extremal::{kolmogorov_plateaus, nterm};
use spx_core::jackson::{in_integral, JacksonMeasure};
use spx_core::psi::{char_sequences, PsiSystem};
use spx_core::rules::DecayRule;

#[test]
fn damped_scan_meets_closed_limit() {
    // the scan infimum over frequencies equals the closed value
    // 2^{lambda+1} / (lambda + 1) independently of the degree
    for (lambda, n) in [(1.0, 3u64), (2.0, 7), (3.0, 11)] {
        let rep = in_integral(n, lambda, PI, &JacksonMeasure::Sin).unwrap();
        let closed = 2f64.powf(lambda + 1.0) / (lambda + 1.0);
        assert!(
            (rep.value - closed).abs() <= 1e-9 * closed,
            "lambda={lambda} n={n}: {} vs {closed}",
            rep.value
        );
    }
}

#[test]
fn width_plateaus_follow_level_counts() {
    // widths of the ellipsoid are constant exactly on the rank ranges
    // the characteristic sequences predict
    let psi =
        PsiSystem::radial(DecayRule::Power { r: 1.0 }, spx_core::index::NormExponent::Finite(1.0), 2)
            .unwrap();
    let cs = char_sequences(&psi, 4).unwrap();
    let rows = kolmogorov_plateaus(&psi, 2.0, 4).unwrap();
    assert_eq!(rows.len(), 4);
    for (level, row) in rows.iter().enumerate() {
        assert_eq!(row.m_lo, cs.delta_n(level));
        assert_eq!(row.m_hi, cs.delta_n(level + 1) - 1);
        assert!((row.value - cs.epsilon[level]).abs() <= 1e-15 * cs.epsilon[level]);
    }
    // d = 2 l1 shells with the origin grouped into the unit level:
    // cumulative counts 5, 13, 25, 41 at levels 1, 1/2, 1/3, 1/4
    assert_eq!(cs.delta, vec![5, 13, 25, 41]);
}

#[test]
fn order_expression_tracks_exact_nterm() {
    // power profile, q <= p: exact n-term values against the order
    // expression stay within a fixed two-sided band
    let psi = PsiSystem::scalar_rule(DecayRule::Power { r: 2.0 }).unwrap();
    let profile = ConvexDecayFunction::from_rule(DecayRule::Power { r: 2.0 }).unwrap();
    let label = classify(&profile.pow(2.0).unwrap(), &default_classification_grid()).unwrap();
    assert_eq!(label.class, DecayClass::MC);

    let mut exact = Vec::new();
    let mut order = Vec::new();
    for n in [4u64, 8, 16, 32, 64, 128] {
        exact.push(nterm(&psi, n, 2.0, 1.0).unwrap().value);
        order.push(
            order_formula(OrderKind::NTerm, &OrderSetting::Scalar, 2.0, 1.0, &profile, n)
                .unwrap()
                .value,
        );
    }
    let (lo, hi) = ratio_validation(&exact, &order).unwrap();
    assert!(lo >= 0.1 && hi <= 10.0, "ratio band ({lo}, {hi})");
}

#[test]
fn frozen_pipeline_values() {
    // rank-1 width of the t^{-1} ellipsoid in its own norm: the second
    // rearranged value
    let psi = PsiSystem::scalar_rule(DecayRule::Power { r: 1.0 }).unwrap();
    let w = spx_core::extremal::best_subspace_width(&psi, 1, 2.0, 2.0).unwrap();
    assert_eq!(w.value, 0.5);

    // n-term error of the same ellipsoid, p < q: frozen after a run
    // cross-checked against the search oracle (0.5939 on 400 modes)
    let t = nterm(&psi, 2, 1.0, 2.0).unwrap();
    assert!((t.value - 0.596_029_803_924_004_3).abs() < 1e-12, "{}", t.value);

    // scan report at a pinned instance
    let rep = in_integral(2, 1.0, PI, &JacksonMeasure::Sin).unwrap();
    assert!((rep.value - 2.0).abs() < 1e-9, "{}", rep.value);
}
