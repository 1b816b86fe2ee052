use proptest::prelude::*;
use qmfd_core::expectation::position_norm;
use qmfd_core::hermite::{apply_momentum, apply_position, inner, nuclear_seminorm};
use qmfd_core::tangent::{classify, geometric_grid, TangentVerdict};
use qmfd_core::{Complex64, ModelSpace, SchwartzFn};

/// Coefficients under a geometric envelope `0.7^|k|`, so that the
/// generated functions look like smooth Schwartz functions and not noise.
fn schwartz(dim: usize, max_degree: usize) -> impl Strategy<Value = SchwartzFn> {
    (0..=max_degree).prop_flat_map(move |degree| {
        let len = (degree + 1).pow(dim as u32);
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |raw| {
            let coeffs = raw
                .iter()
                .enumerate()
                .map(|(flat, &(re, im))| {
                    let mut rest = flat;
                    let mut order = 0;
                    for _ in 0..dim {
                        order += rest % (degree + 1);
                        rest /= degree + 1;
                    }
                    Complex64::new(re, im) * 0.7f64.powi(order as i32)
                })
                .collect();
            SchwartzFn::new(dim, degree, coeffs).unwrap()
        })
    })
}

fn any_fn() -> impl Strategy<Value = SchwartzFn> {
    prop_oneof![schwartz(1, 24), schwartz(2, 8)]
}

fn nonzero_fn() -> impl Strategy<Value = SchwartzFn> {
    any_fn().prop_filter("nonzero", |f| f.norm() > 1e-3)
}

fn pair() -> impl Strategy<Value = (SchwartzFn, SchwartzFn)> {
    prop_oneof![
        (schwartz(1, 24), schwartz(1, 24)),
        (schwartz(2, 8), schwartz(2, 8))
    ]
    .prop_filter("nonzero", |(f, g)| f.norm() > 1e-3 && g.norm() > 1e-3)
}

fn scalar() -> impl Strategy<Value = Complex64> {
    (0.1f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_commutator(f in any_fn()) {
        for a in 0..f.dim() {
            for b in 0..f.dim() {
                let qp = apply_position(&apply_momentum(&f, b).unwrap(), a).unwrap();
                let pq = apply_momentum(&apply_position(&f, a).unwrap(), b).unwrap();
                let delta = if a == b { 1.0 } else { 0.0 };
                let expected = f.scale(Complex64::new(0.0, delta)).pad_to(qp.degree());
                let err = qp.sub(&pq).unwrap().sub(&expected).unwrap().norm();
                prop_assert!(err <= 1e-12 * f.norm().max(1.0), "err {err:e}");
            }
        }
    }

    #[test]
    fn position_and_l2_bounded_by_first_seminorm(f in any_fn()) {
        let n1 = nuclear_seminorm(&f, 1);
        prop_assert!(f.norm() <= n1 * (1.0 + 1e-14));
        prop_assert!(position_norm(&f).unwrap() <= n1 * (1.0 + 1e-14));
    }

    #[test]
    fn nuclear_seminorms_are_seminorms((f, g) in pair(), lambda in scalar(), p in 0u32..4) {
        let (nf, ng) = (nuclear_seminorm(&f, p), nuclear_seminorm(&g, p));
        let scaled = nuclear_seminorm(&f.scale(lambda), p);
        prop_assert!((scaled - lambda.norm() * nf).abs() <= 1e-12 * lambda.norm() * nf);
        prop_assert!(nuclear_seminorm(&f.add(&g).unwrap(), p) <= (nf + ng) * (1.0 + 1e-14));
    }

    #[test]
    fn seminorms_increase_with_order(f in any_fn(), p in 0u32..4) {
        prop_assert!(nuclear_seminorm(&f, p) <= nuclear_seminorm(&f, p + 1) * (1.0 + 1e-14));
    }

    #[test]
    fn expectation_is_scale_invariant(f in nonzero_fn(), lambda in scalar()) {
        let s = ModelSpace::default();
        let a = s.position_expectation(&f).unwrap().into_vec();
        let b = s.position_expectation(&f.scale(lambda)).unwrap().into_vec();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    #[test]
    fn d_expectation_is_real_linear(
        (f0, f) in pair(),
        g in any_fn(),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        prop_assume!(g.dim() == f.dim());
        let s = ModelSpace::default();
        let lhs = s.d_expectation(&f0, &f.scale_real(a).add(&g.scale_real(b)).unwrap()).unwrap();
        let df = s.d_expectation(&f0, &f).unwrap();
        let dg = s.d_expectation(&f0, &g).unwrap();
        let scale = nuclear_seminorm(&f, 1).max(nuclear_seminorm(&g, 1)).max(1.0) / f0.norm();
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - a * df[i] - b * dg[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn d_expectation_vanishes_along_the_ray(f0 in nonzero_fn(), c in -3.0f64..3.0) {
        let s = ModelSpace::default();
        let d = s.d_expectation(&f0, &f0.scale_real(c)).unwrap();
        let scale = nuclear_seminorm(&f0, 1) / f0.norm();
        prop_assert!(d.iter().all(|v| v.abs() <= 1e-12 * scale.max(1.0)));
    }

    #[test]
    fn indistinguishability_is_reflexive_and_symmetric((f, g) in pair(), tol in 1e-12f64..1.0) {
        let s = ModelSpace::default();
        prop_assert!(s.indistinguishable(&f, &f, 0.0).unwrap());
        prop_assert_eq!(s.indistinguishable(&f, &g, tol).unwrap(), s.indistinguishable(&g, &f, tol).unwrap());
    }

    #[test]
    fn inner_product_is_hermitian((f, g) in pair()) {
        let a = inner(&f, &g).unwrap();
        let b = inner(&g, &f).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-13 * f.norm() * g.norm());
    }

    #[test]
    fn serialization_round_trips(f in any_fn()) {
        prop_assert_eq!(SchwartzFn::from_json(&f.to_json()).unwrap(), f.clone());
        prop_assert_eq!(SchwartzFn::from_bytes(&f.to_bytes()).unwrap(), f);
    }

    #[test]
    fn tangent_fit_recovers_power(c in 1e-3f64..1e3, p in 1.0f64..3.0) {
        let t = geometric_grid(1e-1, 1e-3, 5);
        let r: Vec<f64> = t.iter().map(|t| c * t.powf(p)).collect();
        let rep = classify(t, r, 1.9);
        prop_assert!((rep.fitted_slope - p).abs() < 1e-9);
        prop_assert_eq!(rep.verdict == TangentVerdict::Tangent, p >= 1.9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translation_shifts_expectation_and_preserves_norm(
        f in schwartz(1, 12).prop_filter("nonzero", |f| f.norm() > 1e-3),
        x in -1.0f64..1.0,
    ) {
        let s = ModelSpace::for_degree(24);
        let before = s.position_expectation(&f).unwrap().as_slice()[0];
        let (moved, defect) = s.translate_measured(&f, &[x]).unwrap();
        let after = s.position_expectation(&moved).unwrap().as_slice()[0];
        prop_assert!((after - before - x).abs() < 1e-9);
        prop_assert!(defect < 1e-9);
    }

    #[test]
    fn projection_lands_in_the_fiber(f in schwartz(1, 12).prop_filter("nonzero", |f| f.norm() > 1e-3)) {
        let s = ModelSpace::for_degree(24);
        let g = s.project_to_fiber(&f).unwrap();
        prop_assert!(s.position_expectation(&g).unwrap().as_slice()[0].abs() <= s.tol.fiber);
    }
}
