//! Randomized invariants spanning the element, system, extremal and
//! method layers.

use num_complex::Complex64;
use proptest::prelude::*;

use spx_core::element::{Domain, SpElement};
use spx_core::index::{Index, IndexSet};
use spx_core::linmethods::{tap_weight, tap_weight_taylor};
use spx_core::psi::{char_sequences, rearrangement, PsiSystem};
use spx_core::rules::DecayRule;
use spx_core::extremal::{best_subspace_width, gamma_excluded_error, Regime};
use spx_core::identities::smoothness_modulus;

fn coeff_strategy() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0)
        .prop_filter("coefficient too small", |(re, im)| re.hypot(*im) > 1e-6)
        .prop_map(|(re, im)| Complex64::new(re, im))
}

/// Scalar-domain element with support inside 1..=40.
fn scalar_element() -> impl Strategy<Value = SpElement> {
    prop::collection::btree_map(1u64..=40, coeff_strategy(), 1..12).prop_map(|m| {
        SpElement::from_pairs(Domain::Scalar, m.into_iter().map(|(k, c)| (Index::Scalar(k), c)))
            .unwrap()
    })
}

/// Two-dimensional lattice element with small support.
fn lattice_element() -> impl Strategy<Value = SpElement> {
    prop::collection::btree_map(
        (-6i64..=6, -6i64..=6),
        coeff_strategy(),
        1..10,
    )
    .prop_map(|m| {
        SpElement::from_pairs(
            Domain::Lattice(2),
            m.into_iter().map(|((a, b), c)| (Index::Lattice(vec![a, b]), c)),
        )
        .unwrap()
    })
}

fn positive_levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 3..20)
}

proptest! {
    #[test]
    fn norm_nesting(f in scalar_element(), p in 1.0f64..4.0, dq in 0.0f64..3.0) {
        // smaller exponent never shrinks the norm
        let q = (p - dq).max(1.0);
        let np = f.norm(p).unwrap();
        let nq = f.norm(q).unwrap();
        prop_assert!(np <= nq * (1.0 + 1e-12), "p={p} q={q}: {np} vs {nq}");
    }

    #[test]
    fn rearrangement_ignores_input_order(vals in positive_levels().prop_shuffle()) {
        let psi = PsiSystem::scalar_table(&vals).unwrap();
        let got = rearrangement(&psi, vals.len()).unwrap();
        let mut want = vals.clone();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            // level grouping may snap near-equal moduli together
            prop_assert!((g - w).abs() <= 1e-9 * w, "{g} vs {w}");
        }
    }

    #[test]
    fn tail_error_shrinks_with_larger_kept_set(f in lattice_element(), n in 0u64..6, p in 1.0f64..3.0) {
        let wide = f.tail_error(|ix| ix.l1() <= n + 1, p).unwrap();
        let narrow = f.tail_error(|ix| ix.l1() <= n, p).unwrap();
        prop_assert!(wide <= narrow * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn transform_round_trip(f in scalar_element(), r in 0.25f64..3.0) {
        let psi = PsiSystem::scalar_rule(DecayRule::Power { r }).unwrap();
        let back = f.psi_differentiate(&psi).unwrap().psi_integrate(&psi).unwrap().0;
        prop_assert_eq!(back.len(), f.len());
        for (ix, c) in f.iter() {
            let b = back.coeff(ix);
            prop_assert!((c - b).norm() <= 1e-12 * c.norm(), "{ix}: {c} vs {b}");
        }
    }

    #[test]
    fn tap_weight_forms_cross_check(nu in 1u64..=400, r in 1u32..=8, rho in 0.01f64..0.99) {
        prop_assume!(nu >= r as u64);
        let a = tap_weight(nu, r, rho);
        let b = tap_weight_taylor(nu, r, rho);
        let scale = a.abs().max(1e-300);
        prop_assert!((a - b).abs() <= 1e-12 * scale, "nu={nu} r={r} rho={rho}: {a} vs {b}");
    }

    #[test]
    fn modulus_matches_single_mode_form(k in 1u64..=40, re in 0.1f64..2.0, alpha in 0.5f64..2.0, t in 0.01f64..1.5) {
        // one harmonic has a closed supremum: the damping factor is
        // monotone in h until the phase reaches pi/2, then saturates
        let f = SpElement::from_pairs(
            Domain::Scalar,
            [(Index::Scalar(k), Complex64::new(re, 0.0))],
        ).unwrap();
        let p = 1.5;
        let grid = 64.max((8.0 * k as f64 * t).ceil() as usize);
        let w = smoothness_modulus(&f, alpha, t, p, grid).unwrap();
        let phase = (k as f64 * t / 2.0).min(std::f64::consts::FRAC_PI_2);
        let expect = re * (2.0 * phase.sin()).powf(alpha);
        // the searched supremum is an achieved value: never above the
        // closed form, and below it only by basin-discrimination error
        prop_assert!(w <= expect * (1.0 + 1e-12), "{w} vs {expect}");
        prop_assert!(w >= expect * (1.0 - 2e-3), "{w} vs {expect}");
    }

    #[test]
    fn modulus_doubling_bound(f in scalar_element(), alpha in 0.5f64..2.0, t in 0.01f64..0.75) {
        let p = 1.5;
        let w2 = smoothness_modulus(&f, alpha, 2.0 * t, p, 256).unwrap();
        let w1 = smoothness_modulus(&f, alpha, t, p, 256).unwrap();
        prop_assert_eq!(smoothness_modulus(&f, alpha, 0.0, p, 256).unwrap(), 0.0);
        // alpha-order doubling; slack covers grid-search error on the
        // right-hand sup
        let bound = 2f64.powf(alpha) * w1;
        prop_assert!(w2 <= bound * (1.0 + 1e-2) + 1e-12, "{w2} vs {bound}");
    }

    #[test]
    fn excluded_error_witness_re_evaluates(vals in positive_levels(), keep in 0usize..8, p in 1.0f64..3.0, dq in 0.0f64..2.0) {
        // q <= p: the reported witness index must reproduce the value
        let q = (p - dq).max(0.5);
        let psi = PsiSystem::scalar_table(&vals).unwrap();
        let gamma = IndexSet::explicit((1..=keep.min(vals.len()) as u64).map(Index::Scalar));
        let rep = gamma_excluded_error(&psi, &gamma, p, q).unwrap();
        prop_assert_eq!(rep.regime, Regime::QLeP);
        match rep.witness {
            Some(ix) => {
                let at_witness = psi.modulus(&ix).unwrap();
                prop_assert!((rep.value - at_witness).abs() <= 1e-12 * at_witness);
            }
            None => prop_assert_eq!(rep.value, 0.0),
        }
    }

    #[test]
    fn subspace_width_witness_is_top_ranked(vals in positive_levels(), n in 1u64..6, p in 1.5f64..3.0) {
        // q <= p: dropping everything but the witness set leaves the
        // (n+1)-th rearranged value
        let psi = PsiSystem::scalar_table(&vals).unwrap();
        let rep = best_subspace_width(&psi, n, p, 1.0).unwrap();
        let rear = rearrangement(&psi, n as usize + 1).unwrap();
        if rear.len() > n as usize {
            prop_assert!((rep.value - rear[n as usize]).abs() <= 1e-12 * rear[n as usize]);
        } else {
            prop_assert_eq!(rep.value, 0.0);
        }
        prop_assert_eq!(rep.witness.len().min(vals.len()), rep.witness.len());
    }

    #[test]
    fn characteristic_sequences_are_coherent(vals in positive_levels()) {
        let psi = PsiSystem::scalar_table(&vals).unwrap();
        let cs = char_sequences(&psi, vals.len()).unwrap();
        for w in cs.epsilon.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        for w in cs.delta.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        prop_assert_eq!(cs.delta_n(0), 0);
        let n = cs.groups.len();
        prop_assert_eq!(cs.delta_n(n), vals.len() as u64);
        let set = cs.g(n);
        for k in 1..=vals.len() as u64 {
            prop_assert!(set.contains(&Index::Scalar(k)));
        }
    }
}
