use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::domain::{intersect_with_ball, Neighborhood};
use crate::point::C64;

fn s(x: f64) -> ComplexPoint {
    ComplexPoint::scalar(x, 0.0)
}

/// κ of the unit ball from its slice disc, which is totally geodesic.
fn ball_kappa_by_slice(z: &ComplexPoint, v: &ComplexPoint) -> f64 {
    let u = v.normalized().unwrap();
    let a = z.inner(&u).norm_sqr();
    let rho2 = 1.0 - z.norm_sqr() + a;
    v.norm() * rho2.sqrt() / (rho2 - a)
}

fn poincare(a: C64, b: C64) -> f64 {
    ((a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm()).atanh()
}

#[test]
fn oracle_examples() {
    let disc = DomainSpec::unit_disc();
    assert_eq!(royden_oracle(&disc, &s(0.0), &s(1.0)).unwrap(), 1.0);
    assert_relative_eq!(royden_oracle(&disc, &s(0.5), &s(1.0)).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
    let bidisc = DomainSpec::polydisc(vec![1.0, 1.0]).unwrap();
    let k = royden_oracle(&bidisc, &ComplexPoint::zeros(2), &ComplexPoint::real(&[1.0, 1.0])).unwrap();
    assert_eq!(k, 1.0);
    let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
    assert!(matches!(royden_oracle(&ann, &s(0.7), &s(1.0)), Err(KobError::Unsupported(_))));
    assert!(matches!(royden_oracle(&disc, &s(1.5), &s(1.0)), Err(KobError::Domain(_))));
}

#[test]
fn upper_examples() {
    let disc = DomainSpec::unit_disc();
    let cfg = SearchConfig::default();
    let k = royden_upper(&disc, &s(0.0), &s(1.0), &cfg).unwrap();
    assert!((1.0..=1.05).contains(&k), "{k}");
    let k = royden_upper(&disc, &s(0.5), &s(1.0), &cfg).unwrap();
    assert!((4.0 / 3.0 - 1e-9..=2.001).contains(&k), "{k}");
    assert!(k <= 1.05 * 4.0 / 3.0, "{k}");
    let d = DomainSpec::punctured_example();
    let k = royden_upper(&d, &ComplexPoint::real(&[0.1, 0.0]), &ComplexPoint::real(&[0.0, 1.0]), &cfg).unwrap();
    assert!(k <= 0.2 + 1e-9, "{k}");
    assert!(matches!(royden_upper(&disc, &s(0.1), &s(0.0), &cfg), Err(KobError::Input(_))));
}

#[test]
fn lower_examples() {
    let disc = DomainSpec::unit_disc();
    assert_eq!(royden_lower(&disc, &s(0.0), &s(1.0)).unwrap(), 1.0);
    let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
    assert_relative_eq!(royden_lower(&ann, &s(0.7), &s(1.0)).unwrap(), 1.0 / 0.51, epsilon = 1e-12);
    let d = DomainSpec::punctured_example();
    let k = royden_lower(&d, &ComplexPoint::real(&[0.1, 0.0]), &ComplexPoint::real(&[0.0, 1.0])).unwrap();
    assert_eq!(k, 0.0);
}

#[test]
fn estimate_examples() {
    let cfg = SearchConfig::default();
    let e = royden_estimate(&DomainSpec::unit_disc(), &s(0.5), &s(1.0), &cfg).unwrap();
    assert_eq!(e.lower, e.upper);
    assert_eq!(e.upper_method, Method::Oracle);
    assert_relative_eq!(e.lower, 4.0 / 3.0, epsilon = 1e-15);

    let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
    let e = royden_estimate(&ann, &s(0.7), &s(1.0), &cfg).unwrap();
    assert_relative_eq!(e.lower, 1.0 / 0.51, epsilon = 1e-12);
    assert!(e.upper >= e.lower);

    let lens = intersect_with_ball(&DomainSpec::unit_disc(), &Neighborhood::new(s(1.0), 0.5).unwrap()).unwrap();
    let e = royden_estimate(&lens, &s(0.75), &s(1.0), &cfg).unwrap();
    assert!(e.lower >= 1.0 / (1.0 - 0.5625) - 1e-12, "{e:?}");
    assert!(e.upper >= e.lower);
}

#[test]
fn lempert_examples() {
    let cfg = SearchConfig::default();
    let disc = DomainSpec::unit_disc();
    let l = lempert_upper(&disc, &s(0.0), &s(0.5), &cfg).unwrap();
    assert!(l >= 0.5f64.atanh() - 1e-12 && l <= 0.5f64.atanh() + 1e-6, "{l}");
    assert_eq!(lempert_upper(&disc, &s(0.3), &s(0.3), &cfg).unwrap(), 0.0);
    let d = DomainSpec::punctured_example();
    let l = lempert_upper(&d, &ComplexPoint::real(&[0.01, 0.0]), &ComplexPoint::real(&[0.01, 10.0]), &cfg).unwrap();
    assert!(l <= 0.2f64.atanh() + 1e-9, "{l}");
}

#[test]
fn lempert_is_symmetric() {
    let cfg = SearchConfig::fast();
    let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
    let (z, w) = (ComplexPoint::scalar(0.7, 0.1), ComplexPoint::scalar(0.6, -0.5));
    assert_eq!(lempert_upper(&ann, &z, &w, &cfg).unwrap(), lempert_upper(&ann, &w, &z, &cfg).unwrap());
}

#[test]
fn kob_length_examples() {
    let disc = DomainSpec::unit_disc();
    let cfg = SearchConfig::default();
    let e = kob_length(&disc, &[s(0.0), s(0.1)], 1, &cfg).unwrap();
    assert_relative_eq!(e.upper, 0.1 / (1.0 - 0.0025), epsilon = 1e-15);
    let e = kob_length(&disc, &[s(0.0), s(0.5)], 4096, &cfg).unwrap();
    assert!((e.upper - 0.5f64.atanh()).abs() < 1e-7, "{}", e.upper);
    assert_eq!(kob_length(&disc, &[s(0.2)], 4, &cfg).unwrap().upper, 0.0);
    assert!(matches!(kob_length(&disc, &[s(0.2), s(1.2)], 4, &cfg), Err(KobError::Domain(_))));
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    let disc = DomainSpec::unit_disc();
    let cfg = SearchConfig::default();
    let exact = 0.5f64.atanh();
    let err = |m| kob_length(&disc, &[s(0.0), s(0.5)], m, &cfg).unwrap().upper - exact;
    for m in [4, 8, 16] {
        let ratio = err(m) / err(2 * m);
        assert!((3.5..4.5).contains(&ratio), "m={m}: ratio {ratio}");
    }
}

#[test]
fn bracket_on_the_disc() {
    // 500 seeded samples: oracle inside [lower, upper], search within 5% for |z| ≤ 0.8
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let disc = DomainSpec::unit_disc();
    let cfg = SearchConfig { polynomial: false, ..SearchConfig::default() };
    for _ in 0..500 {
        let r = rng.gen_range(0.0f64..0.95).sqrt();
        let z = ComplexPoint::new([C64::from_polar(r, rng.gen_range(0.0..6.3))]).unwrap();
        let v = ComplexPoint::new([C64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..6.3))]).unwrap();
        let exact = v.norm() / (1.0 - r * r);
        let lo = royden_lower(&disc, &z, &v).unwrap();
        let up = royden_upper(&disc, &z, &v, &cfg).unwrap();
        assert!(lo <= exact * (1.0 + 1e-12) && exact <= up * (1.0 + 1e-12), "{z:?}: {lo} {exact} {up}");
        if r <= 0.8 {
            assert!(up <= 1.05 * exact);
        }
    }
}

#[test]
fn annulus_search_improves_on_the_affine_disc() {
    let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
    let z = s(0.7);
    let v = ComplexPoint::scalar(0.0, 1.0);
    let affine = royden_upper(&ann, &z, &v, &SearchConfig::affine_only()).unwrap();
    let full = royden_upper(&ann, &z, &v, &SearchConfig::default()).unwrap();
    let lower = royden_lower(&ann, &z, &v).unwrap();
    assert!(full <= affine);
    assert!(full >= lower);
}

fn unit_ball_point() -> impl Strategy<Value = ComplexPoint> {
    (0.0f64..0.97, proptest::array::uniform4(-1.0f64..1.0)).prop_filter_map("nonzero", |(r, xs)| {
        let p = ComplexPoint::from_reals(&xs).normalized()?;
        Some(p.scale(r))
    })
}

fn direction(n: usize) -> impl Strategy<Value = ComplexPoint> {
    proptest::collection::vec(-2.0f64..2.0, 2 * n).prop_filter_map("nonzero", |xs| {
        let p = ComplexPoint::from_reals(&xs);
        (p.norm() > 1e-3).then_some(p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ball_oracle_matches_slice_disc(z in unit_ball_point(), v in direction(2)) {
        let ball = DomainSpec::unit_ball(2);
        let k = royden_oracle(&ball, &z, &v).unwrap();
        let slice = ball_kappa_by_slice(&z, &v);
        prop_assert!((k - slice).abs() <= 1e-9 * slice);
        let e = royden_estimate(&ball, &z, &v, &SearchConfig::fast()).unwrap();
        prop_assert_eq!(e.lower, e.upper);
        let up = royden_upper(&ball, &z, &v, &SearchConfig::fast()).unwrap();
        prop_assert!(up >= k * (1.0 - 1e-9));
    }

    #[test]
    fn bidisc_bracket(z in unit_ball_point(), v in direction(2)) {
        let bidisc = DomainSpec::polydisc(vec![1.0, 1.0]).unwrap();
        let exact = (0..2)
            .map(|j| v.coord(j).norm() / (1.0 - z.coord(j).norm_sqr()))
            .fold(0.0, f64::max);
        let lo = royden_lower(&bidisc, &z, &v).unwrap();
        let up = royden_upper(&bidisc, &z, &v, &SearchConfig::fast()).unwrap();
        prop_assert!(lo <= exact * (1.0 + 1e-12));
        prop_assert!(up >= exact * (1.0 - 1e-9));
    }

    #[test]
    fn oracle_is_homogeneous(z in unit_ball_point(), v in direction(2), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let ball = DomainSpec::unit_ball(2);
        let c = C64::new(re, im);
        let k = royden_oracle(&ball, &z, &v).unwrap();
        let kc = royden_oracle(&ball, &z, &v.scale_c(c)).unwrap();
        prop_assert!((kc - c.norm() * k).abs() <= 1e-12 * (1.0 + kc));
    }

    #[test]
    fn disc_inclusion_monotone(r in 0.0f64..0.99, th in 0.0f64..6.3, v in direction(1)) {
        let z = ComplexPoint::new([C64::from_polar(r, th)]).unwrap();
        let small = royden_oracle(&DomainSpec::unit_disc(), &z, &v).unwrap();
        let big = royden_oracle(&DomainSpec::disc(2.0).unwrap(), &z, &v).unwrap();
        prop_assert!(small >= big);
    }

    #[test]
    fn disc_distance_oracle_matches_pseudo_hyperbolic(a in 0.0f64..0.99, b in 0.0f64..0.99, t in 0.0f64..6.3) {
        let z = C64::from_polar(a, 0.0);
        let w = C64::from_polar(b, t);
        let k = distance_oracle(&DomainSpec::unit_disc(), &ComplexPoint::new([z]).unwrap(), &ComplexPoint::new([w]).unwrap()).unwrap();
        prop_assert!((k - poincare(z, w)).abs() <= 1e-9 * (1.0 + k));
    }

    #[test]
    fn lempert_dominates_distance_on_the_disc(a in 0.0f64..0.9, b in 0.0f64..0.9, t in 0.0f64..6.3) {
        let disc = DomainSpec::unit_disc();
        let z = ComplexPoint::new([C64::from_polar(a, 0.0)]).unwrap();
        let w = ComplexPoint::new([C64::from_polar(b, t)]).unwrap();
        let l = lempert_upper(&disc, &z, &w, &SearchConfig::fast()).unwrap();
        let k = distance_oracle(&disc, &z, &w).unwrap();
        prop_assert!(l >= k - 1e-9);
        prop_assert!(l <= k + 1e-4 * (1.0 + k));
    }
}
