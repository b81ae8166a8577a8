use muskat_core::gamma::{gamma_closed_form, gamma_closed_form_int, GammaKernel};
use muskat_core::harness::{analytic_terms, family_hash};
use muskat_core::quad::neumaier_sum;
use muskat_core::sequences::{
    enumerate_multisets, enumerate_tuples, for_each_multiset, generate_family, validate_family, SequenceFamily, TupleMode,
};
use muskat_core::spline::{bspline_bounds_check, convolve_indicators, duhamel_e, duhamel_exponential, semigroup_apply, symmetric_bumps};
use num_bigint::BigInt;
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    (0.1f64..50.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn tuple(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(entry(), 2 * k + 1)
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

fn term_scale(k: usize, a: &[f64]) -> f64 {
    let s: f64 = a.iter().map(|x| x.abs()).sum();
    s.powi(2 * k as i32) * 1e3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_reverse_and_rotate(k in 1usize..=2, seed in any::<u64>(), a in tuple(2)) {
        let a = &a[..2 * k + 1];
        let kern = GammaKernel::new(k).unwrap();
        let g = gamma_closed_form(&kern, a).unwrap();
        let mut b = a.to_vec();
        b.reverse();
        let r = (seed % b.len() as u64) as usize;
        b.rotate_left(r);
        let h = gamma_closed_form(&kern, &b).unwrap();
        prop_assert!(rel(g, h, term_scale(k, a)) < 1e-12);
    }

    #[test]
    fn gamma_odd_under_negation(a in tuple(1)) {
        let kern = GammaKernel::new(1).unwrap();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let g = gamma_closed_form(&kern, &a).unwrap();
        let h = gamma_closed_form(&kern, &neg).unwrap();
        prop_assert!(rel(g, -h, term_scale(1, &a)) < 1e-12);
    }

    #[test]
    fn gamma_same_sign_is_zero(k in 1usize..=2, a in proptest::collection::vec(0.1f64..50.0, 5)) {
        let a = &a[..2 * k + 1];
        let kern = GammaKernel::new(k).unwrap();
        prop_assert_eq!(gamma_closed_form(&kern, a).unwrap(), 0.0);
    }

    #[test]
    fn gamma_integer_form_agrees(k in 1usize..=2, a in proptest::collection::vec(-1000i64..1000, 5)) {
        let a = &a[..2 * k + 1];
        let kern = GammaKernel::new(k).unwrap();
        let f: Vec<f64> = a.iter().map(|x| *x as f64).collect();
        let b: Vec<BigInt> = a.iter().map(|x| BigInt::from(*x)).collect();
        let x = gamma_closed_form(&kern, &f).unwrap();
        let y = gamma_closed_form_int(k, &b).unwrap();
        prop_assert!(rel(x, y, term_scale(k, &f)) < 1e-12);
    }

    #[test]
    fn bspline_shape(c in proptest::collection::vec(-20.0f64..20.0, 1..7), y in -8.0f64..8.0) {
        let b = convolve_indicators(&c).unwrap();
        let n = c.len() as f64;
        prop_assert_eq!(b.integral(), 2f64.powi(c.len() as i32));
        prop_assert!(b.eval_local(y) >= 0.0);
        // even about the centre, zero outside the support
        prop_assert!((b.eval_local(y) - b.eval_local(-y)).abs() < 1e-12);
        if y.abs() > n {
            prop_assert_eq!(b.eval_local(y), 0.0);
        }
        prop_assert!(bspline_bounds_check(&b).pass);
    }

    #[test]
    fn bspline_translation(c in proptest::collection::vec(-20.0f64..20.0, 1..6), s in -5.0f64..5.0, y in -6.0f64..6.0) {
        let a = convolve_indicators(&c).unwrap();
        let shifted: Vec<f64> = c.iter().map(|x| x + s).collect();
        let b = convolve_indicators(&shifted).unwrap();
        let xi = a.sum + y;
        let shift = s * c.len() as f64;
        prop_assert!((a.eval(xi) - b.eval(xi + shift)).abs() < 1e-9);
    }

    #[test]
    fn semigroup_composes(c in 2i64..200, w in 0.01f64..3.0, t1 in 0.0f64..0.05, t2 in 0.0f64..0.05, x in -0.99f64..0.99) {
        let p = symmetric_bumps(&[(BigInt::from(c), w)]);
        let a = semigroup_apply(&semigroup_apply(&p, t1).unwrap(), t2).unwrap();
        let b = semigroup_apply(&p, t1 + t2).unwrap();
        let xi = c as f64 + x;
        let (va, vb) = (a.eval(xi), b.eval(xi));
        prop_assert!((va - vb).abs() <= 1e-12 * vb.abs().max(1e-300));
        prop_assert!(a.eval(xi).abs() <= p.eval(xi).abs());
        prop_assert!((a.eval(-xi) - va).abs() <= 1e-15 * va.abs());
    }

    #[test]
    fn duhamel_matches_exponential(a in -3.0f64..3.0, b in 0.0f64..20.0, xi in -10.0f64..10.0, t in 0.0f64..0.3) {
        let e = duhamel_e(|_, tau| a * (-2.0 * std::f64::consts::PI * tau * b).exp(), t, 64).unwrap();
        let want = duhamel_exponential(a, b, xi, t);
        prop_assert!((e(xi) - want).abs() <= 1e-10 * want.abs().max(1e-12));
    }

    #[test]
    fn neumaier_is_order_independent(mut xs in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
        let a = neumaier_sum(xs.iter().copied());
        xs.reverse();
        let b = neumaier_sum(xs.iter().copied());
        let scale: f64 = xs.iter().map(|x| x.abs()).sum();
        prop_assert!((a - b).abs() <= 1e-15 * scale);
    }
}

fn fam(n: usize, delta: f64) -> SequenceFamily {
    generate_family(1, 1.0, 4.0, 0.1, delta, 5, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_families_validate(n in 1usize..40, delta in 0.0f64..1.5) {
        let f = fam(n, delta);
        let v = validate_family(&f);
        prop_assert!(v.parameters && v.a && v.c && v.d);
        prop_assert!(f.k_seq.windows(2).all(|w| w[1] > w[0]));
        let back: SequenceFamily = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(family_hash(&back), family_hash(&f));
    }

    #[test]
    fn analytic_terms_positive(n in 1usize..40) {
        let a = analytic_terms(&fam(n, 1.0));
        prop_assert!(a.i1 > 0.0 && a.i6 > 0.0 && a.i2 < a.i1);
        prop_assert_eq!(a.i4, 0.0);
    }

    #[test]
    fn multiplicities_count_orderings(len in 1usize..7, n in 1usize..6) {
        let mut total = 0u64;
        let mut count = 0u64;
        for_each_multiset(len, n, |idx, m| {
            assert!(idx.windows(2).all(|w| w[0] <= w[1]));
            total += m;
            count += 1;
        });
        prop_assert_eq!(total, (len as u64).pow(n as u32));
        // C(len + n - 1, n)
        let mut c = 1u64;
        for i in 0..n as u64 {
            c = c * (len as u64 + i) / (i + 1);
        }
        prop_assert_eq!(count, c);
    }
}

#[test]
fn multisets_cover_ordered_tuples_three_indices() {
    let f = fam(4, 0.5);
    for mode in [TupleMode::Diagonal, TupleMode::OffDiagonal, TupleMode::All] {
        let t = enumerate_tuples(&f, 1, mode).unwrap().count() as u64;
        let m: u64 = enumerate_multisets(&f, 1, mode).unwrap().iter().map(|x| x.1).sum();
        assert_eq!(t, m);
    }
}
