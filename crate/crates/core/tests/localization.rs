use std::sync::OnceLock;

use koblab_core::{
    additive_gap_survey, build_graph, build_local_graph, check_royden_lemma, check_sarkar_estimate, diverges,
    gromov_product, gromov_property_probe, hyperbolicity_probe, length_localization_survey,
    multiplicative_ratio_survey, royden_lemma_sample, sarkar_constant, sarkar_factor, shortest_curve, vanishes,
    weak_gromov_probe, ComplexPoint, Curve, DomainSpec, GraphParams, KobError, MetricGraph, Neighborhood, SearchConfig,
    SequencePair, Verdict, RATIO_FLOOR,
};
use proptest::prelude::*;

fn pt(xs: &[f64]) -> ComplexPoint {
    ComplexPoint::real(xs)
}

fn nb(c: &[f64], r: f64) -> Neighborhood {
    Neighborhood::new(pt(c), r).unwrap()
}

fn atanh(x: f64) -> f64 {
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

fn disc_graph() -> &'static MetricGraph {
    static G: OnceLock<MetricGraph> = OnceLock::new();
    G.get_or_init(|| build_graph(&DomainSpec::unit_disc(), &GraphParams::new(0.02, 1.0, 0.25, 4)).unwrap())
}

fn lens_graphs() -> &'static (MetricGraph, MetricGraph) {
    static G: OnceLock<(MetricGraph, MetricGraph)> = OnceLock::new();
    G.get_or_init(|| {
        let disc = DomainSpec::unit_disc();
        let gp = GraphParams::new(0.04, 1.0, 0.25, 4);
        let full = build_graph(&disc, &gp).unwrap();
        let local = build_local_graph(&disc, &nb(&[1.0], 0.6), &gp).unwrap();
        (full, local)
    })
}

#[test]
fn sarkar_constants() {
    // coth(1) = (e² + 1)/(e² − 1)
    let e2 = 1f64.exp().powi(2);
    let c = sarkar_constant(1.0).unwrap();
    assert!((c - (e2 + 1.0) / (e2 - 1.0)).abs() < 1e-12);
    assert!((c - 1.3130).abs() < 1e-4);
    assert!((sarkar_factor(1.3130, 2.0) - 1.1777).abs() < 1e-4);
    assert!(sarkar_constant(0.0).is_none());
    assert_eq!(sarkar_factor(c, f64::INFINITY), 1.0);
}

#[test]
fn trend_helpers() {
    let sqrt_delta = [1e-1f64, 1e-2];
    assert!(vanishes(&sqrt_delta.map(|s| atanh(2.0 * s))));
    assert!(diverges(&[0.458, 0.805, 1.151, 1.498]));
    assert!(!diverges(&[0.55, 0.549, 0.549, 0.549]));
}

#[test]
fn hyperbolicity_on_the_disc_and_errors() {
    let disc = DomainSpec::unit_disc();
    let cfg = SearchConfig::fast();
    let rep =
        hyperbolicity_probe(&disc, &pt(&[1.0]), &nb(&[1.0], 0.5), &nb(&[1.0], 0.25), Some(disc_graph()), None, &cfg)
            .unwrap();
    assert_eq!(rep.verdict, Verdict::Holds);
    let (lo, hi) = (rep.statistic("set_distance_lower").unwrap(), rep.statistic("set_distance_upper").unwrap());
    assert!(lo > 0.0 && lo <= hi);
    let err = hyperbolicity_probe(&disc, &pt(&[1.0]), &nb(&[1.0], 0.25), &nb(&[1.0], 0.5), None, None, &cfg);
    assert!(matches!(err, Err(KobError::Domain(_))));
    let err = hyperbolicity_probe(&disc, &pt(&[0.5]), &nb(&[0.5], 0.5), &nb(&[0.5], 0.25), None, None, &cfg);
    assert!(matches!(err, Err(KobError::Domain(_))));
}

#[test]
fn punctured_domain_is_not_hyperbolic_at_the_puncture() {
    let spec = DomainSpec::punctured_example();
    let deltas = [1e-2, 1e-4];
    let seq = SequencePair::new(
        &spec,
        deltas.iter().map(|&d| pt(&[d, 0.0])).collect(),
        deltas.iter().map(|&d| pt(&[d, 1.0 / d.sqrt()])).collect(),
        pt(&[0.0, 0.0]),
        None,
    )
    .unwrap();
    let rep = hyperbolicity_probe(
        &spec,
        &pt(&[0.0, 0.0]),
        &nb(&[0.0, 0.0], 0.5),
        &nb(&[0.0, 0.0], 0.25),
        None,
        Some(&seq),
        &SearchConfig::fast(),
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);
    let uppers = rep.records.column("lempert_upper");
    for (l, d) in uppers.iter().zip(deltas) {
        // the affine disc ζ ↦ (δ, ζ/(2δ)) gives l̃ ≤ 2√δ
        assert!(*l <= atanh(2.0 * d.sqrt()) + 1e-12, "{l} vs δ={d}");
    }
}

#[test]
fn royden_lemma_on_the_disc() {
    let disc = DomainSpec::unit_disc();
    let d = nb(&[1.0], 0.5);
    let cfg = SearchConfig::fast();
    let err = royden_lemma_sample(&disc, &d, &pt(&[0.8]), &pt(&[0.0]), None, &cfg);
    assert!(matches!(err, Err(KobError::Input(_))));
    let err = royden_lemma_sample(&disc, &d, &pt(&[0.2]), &pt(&[1.0]), None, &cfg);
    assert!(matches!(err, Err(KobError::Domain(_))));

    let s = royden_lemma_sample(&disc, &d, &pt(&[0.8]), &pt(&[1.0]), None, &cfg).unwrap();
    // κ_Δ(0.8; 1) = 1/(1 − 0.64)
    let kappa = 1.0 / (1.0 - 0.64);
    assert!(s.kappa_lower <= kappa * (1.0 + 1e-9) && kappa <= s.kappa_upper * (1.0 + 1e-9));
    assert!(s.l_tilde_lower <= s.l_tilde_upper && s.l_tilde_upper < 1.0);
    assert!(s.conservative_excess() <= 0.0);

    let rep = check_royden_lemma(&disc, &d, 100, None, 1, &cfg).unwrap();
    assert_eq!(rep.samples, 100);
    assert_eq!(rep.verdict, Verdict::Holds);
    assert_eq!(rep.statistic("conservative_violations"), Some(0.0));
    let again = check_royden_lemma(&disc, &d, 100, None, 1, &cfg).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn sarkar_estimate_on_the_disc() {
    let disc = DomainSpec::unit_disc();
    let rep = check_sarkar_estimate(
        &disc,
        &pt(&[1.0]),
        &nb(&[1.0], 0.6),
        &nb(&[1.0], 0.3),
        200,
        None,
        3,
        &SearchConfig::fast(),
    )
    .unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds | Verdict::HoldsWithSlack));
    assert!(rep.statistic("strict_fraction").unwrap() >= 0.95);
    let lower = rep.statistic("set_distance_lower").unwrap();
    assert!((rep.statistic("C").unwrap() - 1.0 / lower.tanh()).abs() < 1e-12);
}

#[test]
fn additive_and_multiplicative_surveys() {
    let disc = DomainSpec::unit_disc();
    let (full, local) = lens_graphs();
    let (p, u, v) = (pt(&[1.0]), nb(&[1.0], 0.6), nb(&[1.0], 0.3));
    let add = additive_gap_survey(&disc, &p, &u, &v, 60, full, local, 7).unwrap();
    assert_eq!(add.verdict, Verdict::Holds);
    assert!(add.samples + add.excluded == 60 && add.samples > 40);
    for g in add.records.column("gap_of_uppers") {
        assert!(g >= 0.0);
    }
    let mul = multiplicative_ratio_survey(&disc, &p, &u, &v, 60, full, local, RATIO_FLOOR, 7).unwrap();
    assert_eq!(mul.verdict, Verdict::Holds);
    assert!(mul.statistic("min_ratio").unwrap() >= 1.0);
    assert!(mul.statistic("sup_ratio").unwrap().is_finite());
    // identical seeds give identical pairs
    assert_eq!(add.records.column("dist_full_upper"), mul.records.column("dist_full_upper"));
    let err = additive_gap_survey(&disc, &p, &v, &u, 10, full, local, 7);
    assert!(matches!(err, Err(KobError::Domain(_))));
}

#[test]
fn length_localization_defects() {
    let disc = DomainSpec::unit_disc();
    let (full, _) = lens_graphs();
    let (p, u, v) = (pt(&[1.0]), nb(&[1.0], 0.6), nb(&[1.0], 0.3));
    let ends = [(0.8, 0.85), (0.75, 0.95), (0.9, 0.78)];
    let mut curves: Vec<Curve> =
        ends.iter().map(|&(a, b)| shortest_curve(full, &pt(&[a]), &pt(&[b])).unwrap()).collect();
    curves.push(Curve::from_parts(vec![pt(&[0.9])], vec![]));
    curves.push(shortest_curve(full, &pt(&[0.8]), &pt(&[0.0])).unwrap());
    let rep = length_localization_survey(&disc, &p, &u, &v, &curves, 64, 1, &SearchConfig::fast()).unwrap();
    assert_eq!(rep.excluded, 1);
    assert_eq!(rep.samples, 4);
    assert_eq!(rep.verdict, Verdict::Holds);
    let defects = rep.records.column("defect_of_uppers");
    assert_eq!(defects[3], 0.0);
    for d in defects {
        assert!(d >= -1e-9 && d.is_finite());
    }
}

#[test]
fn gromov_products_on_the_disc() {
    let g = disc_graph();
    let (o, half) = (pt(&[0.0]), pt(&[0.5]));
    assert_eq!(gromov_product(g, &o, &o, &o).unwrap(), 0.0);
    let zz = gromov_product(g, &half, &half, &o).unwrap();
    assert!((zz - atanh(0.5)).abs() < 0.01 * atanh(0.5), "{zz}");
    let opposite = gromov_product(g, &half, &pt(&[-0.5]), &o).unwrap();
    assert!(opposite.abs() < 1e-9, "{opposite}");
}

fn disc_sequences(p: f64, q: f64) -> SequencePair {
    let disc = DomainSpec::unit_disc();
    let rs = [0.6, 0.8, 0.9, 0.95, 0.975, 0.99];
    SequencePair::new(
        &disc,
        rs.iter().map(|&r| pt(&[p * r])).collect(),
        rs.iter().map(|&r| pt(&[q * r])).collect(),
        pt(&[p]),
        Some(pt(&[q])),
    )
    .unwrap()
}

#[test]
fn gromov_probes_on_the_disc() {
    let g = disc_graph();
    let o = pt(&[0.0]);
    let rep = gromov_property_probe(g, &disc_sequences(1.0, -1.0), &o).unwrap();
    assert_eq!(rep.verdict, Verdict::Holds);
    assert!(rep.statistic("sup").unwrap() < 0.01);
    assert!(matches!(gromov_property_probe(g, &disc_sequences(1.0, 1.0), &o), Err(KobError::Input(_))));

    let seqs = [disc_sequences(1.0, -1.0)];
    let weak = weak_gromov_probe(g, &o, &seqs).unwrap();
    assert_eq!(weak.verdict, Verdict::Holds);
    // k(r, −r) − k(r, 0) = atanh(r) on the diameter; the infimum is at r = 0.6
    let c = weak.statistic("c_empirical").unwrap();
    assert!((c - atanh(0.6)).abs() < 0.01, "{c}");
    let worst_w = seqs[0].w_seq.iter().map(|w| atanh(w.norm())).fold(0.0, f64::max);
    for value in weak.records.column("value") {
        assert!(value >= -worst_w * 1.01);
    }
}

#[test]
fn gromov_products_diverge_on_the_bidisc() {
    let spec = DomainSpec::polydisc(vec![1.0, 1.0]).unwrap();
    let g = build_graph(&spec, &GraphParams::new(0.1, 1.0, 0.25, 4)).unwrap();
    let rs = [0.6, 0.8, 0.9, 0.95];
    let s: Vec<f64> = rs.iter().map(|r| 1.0 - (1.0 - r) * (1.0 - r)).collect();
    let seq = SequencePair::new(
        &spec,
        rs.iter().zip(&s).map(|(&r, &s)| pt(&[s, r])).collect(),
        rs.iter().zip(&s).map(|(&r, &s)| pt(&[s, -r])).collect(),
        pt(&[1.0, 1.0]),
        Some(pt(&[1.0, -1.0])),
    )
    .unwrap();
    let rep = gromov_property_probe(&g, &seq, &pt(&[0.0, 0.0])).unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);
    assert_eq!(rep.flags.get("divergent"), Some(&true));
    // product oracle: k(z,o) = atanh(s), k(z,w) = 2·atanh(r)
    let products = rep.records.column("gromov_product");
    for ((&r, &s), g) in rs.iter().zip(&s).zip(products) {
        let exact = atanh(s) - atanh(r);
        // all three distances are upper bounds, so the error has no fixed sign
        assert!((g - exact).abs() < 0.02, "r={r}: {g} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gromov_products_are_nonnegative(a in -0.9f64..0.9, b in -0.9f64..0.9, c in -0.9f64..0.9) {
        let g = disc_graph();
        let v = gromov_product(g, &pt(&[a]), &pt(&[b]), &pt(&[c])).unwrap();
        prop_assert!(v >= 0.0);
        let (za, zb) = (gromov_product(g, &pt(&[a]), &pt(&[b]), &pt(&[c])).unwrap(), gromov_product(g, &pt(&[b]), &pt(&[a]), &pt(&[c])).unwrap());
        prop_assert!((za - zb).abs() < 1e-12);
    }

    #[test]
    fn sarkar_factor_decreases_toward_one(c in 1.0f64..10.0, k in 0.0f64..20.0) {
        let f = sarkar_factor(c, k);
        prop_assert!(f >= 1.0 && f <= 1.0 + c);
        prop_assert!(sarkar_factor(c, k + 1.0) <= f);
    }
}
