use std::sync::OnceLock;

use koblab_core::{
    build_graph, build_local_graph, geodesic_transfer_check, germ_compare, intersect_with_ball, kob_length,
    local_global_compare, pair_visibility_probe, pair_visibility_sweep, shortest_curve, visibility_probe, ComplexPoint,
    CurveOrigin, DomainSpec, GraphParams, HalfSpace, KobError, MetricGraph, Neighborhood, ProbeParams, SearchConfig,
    SequencePair, Verdict, VisibilityOutcome,
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

fn ball_graph() -> &'static MetricGraph {
    static G: OnceLock<MetricGraph> = OnceLock::new();
    G.get_or_init(|| build_graph(&DomainSpec::unit_ball(2), &GraphParams::new(0.1, 1.0, 0.25, 4)).unwrap())
}

fn bidisc_graph() -> &'static MetricGraph {
    static G: OnceLock<MetricGraph> = OnceLock::new();
    G.get_or_init(|| {
        build_graph(&DomainSpec::polydisc(vec![1.0, 1.0]).unwrap(), &GraphParams::new(0.08, 1.0, 0.25, 4)).unwrap()
    })
}

fn lens_graphs() -> &'static (MetricGraph, MetricGraph) {
    static G: OnceLock<(MetricGraph, MetricGraph)> = OnceLock::new();
    G.get_or_init(|| {
        let disc = DomainSpec::unit_disc();
        let gp = GraphParams::new(0.04, 1.0, 0.25, 4);
        (build_graph(&disc, &gp).unwrap(), build_local_graph(&disc, &nb(&[1.0], 0.5), &gp).unwrap())
    })
}

fn disc_pairs(q: ComplexPoint) -> SequencePair {
    let disc = DomainSpec::unit_disc();
    let p = pt(&[1.0]);
    SequencePair::approach(&disc, &p, &p.scale(-1.0), &q, &q.scale(-1.0), 8, 0.5, 0.4).unwrap()
}

fn bidisc_pairs(rs: &[f64]) -> SequencePair {
    let spec = DomainSpec::polydisc(vec![1.0, 1.0]).unwrap();
    SequencePair::new(
        &spec,
        rs.iter().map(|&r| pt(&[r, r])).collect(),
        rs.iter().map(|&r| pt(&[r, -r])).collect(),
        pt(&[1.0, 1.0]),
        Some(pt(&[1.0, -1.0])),
    )
    .unwrap()
}

#[test]
fn disc_pairs_are_visible() {
    let params = ProbeParams::default();
    let v = pair_visibility_probe(disc_graph(), &disc_pairs(pt(&[-1.0])), &params, None).unwrap();
    assert_eq!(v.verdict, VisibilityOutcome::VisibleEvidence);
    for r in &v.per_n {
        // Poincaré geodesics through ±r pass through the center
        assert!(r.max_bdry_dist > 0.99);
        assert_eq!(r.floors_hit, vec![true; 3]);
        assert_eq!(r.eps_emp.len(), 3);
    }
    let err = pair_visibility_probe(disc_graph(), &disc_pairs(pt(&[1.0])), &params, None);
    assert!(matches!(err, Err(KobError::Input(_))));
    let mut no_q = disc_pairs(pt(&[-1.0]));
    no_q.q = None;
    assert!(matches!(pair_visibility_probe(disc_graph(), &no_q, &params, None), Err(KobError::Input(_))));
}

#[test]
fn disc_mesh_sweep_is_visible() {
    let mesh: Vec<SequencePair> = (1..8)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 8.0;
            disc_pairs(ComplexPoint::scalar(t.cos(), t.sin()))
        })
        .collect();
    let (outcome, verdicts) = pair_visibility_sweep(disc_graph(), &mesh, &ProbeParams::default()).unwrap();
    assert_eq!(outcome, VisibilityOutcome::VisibleEvidence);
    assert_eq!(verdicts.len(), 7);
}

#[test]
fn ball_diameter_is_visible() {
    let g = ball_graph();
    let rs = [0.6, 0.8, 0.9, 0.95];
    let ball = DomainSpec::unit_ball(2);
    let seq = SequencePair::new(
        &ball,
        rs.iter().map(|&r| pt(&[r, 0.0])).collect(),
        rs.iter().map(|&r| pt(&[-r, 0.0])).collect(),
        pt(&[1.0, 0.0]),
        Some(pt(&[-1.0, 0.0])),
    )
    .unwrap();
    let v = pair_visibility_probe(g, &seq, &ProbeParams::default(), None).unwrap();
    assert_eq!(v.verdict, VisibilityOutcome::VisibleEvidence);
    let near = g.h() * 8f64.sqrt();
    for c in &v.curves {
        let closest = c.vertices.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
        assert!(closest <= near, "{closest}");
    }
}

#[test]
fn bidisc_pairs_are_not_visible() {
    let g = bidisc_graph();
    let rs = [0.6, 0.8, 0.9, 0.95];
    let v = pair_visibility_probe(g, &bidisc_pairs(&rs), &ProbeParams::default(), None).unwrap();
    assert_eq!(v.verdict, VisibilityOutcome::NonVisibleEvidence, "{:?}", v.per_n);
    let last = v.per_n.last().unwrap();
    assert_eq!(last.floors_hit, vec![false; 3]);
    assert!((last.max_bdry_dist - 0.05).abs() < 1e-12);
    for (r, rec) in rs.iter().zip(&v.per_n) {
        assert!(rec.max_bdry_dist <= 1.0 - r + 2.0 * g.h() + 1e-12);
        // product law: k((r,r),(r,−r)) = ρ(r,−r) = 2·atanh(r)
        let exact = 2.0 * atanh(*r);
        // midpoint weights run low on edges close to ∂Ω (about 3e-4 at δ = 0.05)
        assert!(
            rec.length_upper >= exact * (1.0 - 1e-3) && rec.length_upper <= exact * 1.05,
            "{r}: {}",
            rec.length_upper
        );
    }
}

#[test]
fn bidisc_explicit_curve_is_a_geodesic_at_oracle_level() {
    let spec = DomainSpec::polydisc(vec![1.0, 1.0]).unwrap();
    let verts: Vec<ComplexPoint> = (0..=40).map(|k| pt(&[0.9, 0.9 - 1.8 * k as f64 / 40.0])).collect();
    let l = kob_length(&spec, &verts, 64, &SearchConfig::fast()).unwrap();
    let exact = 2.0 * atanh(0.9);
    assert!((exact - 2.9444).abs() < 1e-4);
    assert!((l.upper - exact).abs() < 1e-3 * exact, "{} vs {exact}", l.upper);
}

#[test]
fn point_probe_preconditions() {
    let g = disc_graph();
    let (u, v) = (nb(&[1.0], 0.5), nb(&[1.0], 0.25));
    let good = disc_pairs(pt(&[-1.0]));
    let z_far = SequencePair::new(g.spec(), vec![pt(&[0.5])], vec![pt(&[-0.9])], pt(&[1.0]), None).unwrap();
    assert!(matches!(visibility_probe(g, &u, &v, &z_far, &ProbeParams::default(), None), Err(KobError::Domain(_))));
    let w_near = SequencePair::new(g.spec(), vec![pt(&[0.9])], vec![pt(&[0.8])], pt(&[1.0]), None).unwrap();
    assert!(matches!(visibility_probe(g, &u, &v, &w_near, &ProbeParams::default(), None), Err(KobError::Domain(_))));
    let short = SequencePair { z_seq: good.z_seq[2..].to_vec(), ..good.clone() };
    let short = SequencePair { w_seq: short.w_seq[2..].to_vec(), ..short };
    let out = visibility_probe(g, &u, &v, &short, &ProbeParams::default(), Some(g)).unwrap();
    assert_eq!(out.verdict, VisibilityOutcome::VisibleEvidence);
    let bad = ProbeParams { lambdas: vec![0.5], ..ProbeParams::default() };
    assert!(matches!(visibility_probe(g, &u, &v, &short, &bad, None), Err(KobError::Input(_))));
}

#[test]
fn transfer_between_full_and_local_graphs() {
    let (full, local) = lens_graphs();
    let v = nb(&[1.0], 0.25);
    let (a, b) = (pt(&[0.8]), ComplexPoint::scalar(0.92, 0.12));

    let from_local = shortest_curve(local, &a, &b).unwrap();
    let rep = geodesic_transfer_check(&v, &from_local, CurveOrigin::Local, 1.0, full, local, 1.0, 20_000).unwrap();
    assert_eq!(rep.statistic("epsilon_local"), Some(0.0));
    assert!(rep.statistic("epsilon_full").unwrap().is_finite());
    assert_eq!(rep.statistic("injected_excess"), Some(0.0));

    let from_full = shortest_curve(full, &a, &b).unwrap();
    let rep = geodesic_transfer_check(&v, &from_full, CurveOrigin::Full, 1.0, full, local, 1.0, 20_000).unwrap();
    assert_eq!(rep.statistic("epsilon_full"), Some(0.0));
    assert!(rep.statistic("epsilon_local").unwrap().is_finite());

    let mut detour = from_full.clone();
    let mid = detour.seg_lengths.len() / 2;
    detour.seg_lengths[mid] += 0.3;
    let rep2 = geodesic_transfer_check(&v, &detour, CurveOrigin::Full, 1.0, full, local, 1.0, 20_000).unwrap();
    let grew = |key: &str| rep2.statistic(key).unwrap() - rep.statistic(key).unwrap();
    assert!((rep2.statistic("injected_excess").unwrap() - 0.3).abs() < 1e-12);
    assert!((grew("epsilon_full") - 0.3).abs() < 1e-9, "{}", grew("epsilon_full"));
    assert!((grew("epsilon_local") - 0.3).abs() < 0.05, "{}", grew("epsilon_local"));

    let outside = shortest_curve(full, &a, &pt(&[0.2])).unwrap();
    let err = geodesic_transfer_check(&v, &outside, CurveOrigin::Full, 1.0, full, local, 1.0, 20_000);
    assert!(matches!(err, Err(KobError::Domain(_))));
}

#[test]
fn disc_local_global_agreement() {
    let (full, local) = lens_graphs();
    let disc = DomainSpec::unit_disc();
    let rs = [0.6, 0.8, 0.9, 0.95];
    let seq = SequencePair::new(
        &disc,
        rs.iter().map(|&r| pt(&[r])).collect(),
        rs.iter().map(|&r| pt(&[-r])).collect(),
        pt(&[1.0]),
        Some(pt(&[-1.0])),
    )
    .unwrap();
    let rep = local_global_compare(&pt(&[1.0]), &nb(&[1.0], 0.5), full, local, &seq, &ProbeParams::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Holds, "{:?}", rep.records.to_csv());
    assert_eq!(rep.flags.get("agreement"), Some(&true));
    assert_eq!(rep.parameters["global_verdict"], "visible-evidence");
    assert_eq!(rep.statistic("eps_truncated_local"), Some(0.0));
}

#[test]
fn germ_pairs_must_agree_inside_u() {
    let ball = DomainSpec::unit_ball(2);
    let unit = Neighborhood::new(ComplexPoint::zeros(2), 1.0).unwrap();
    let cut = |normal: Vec<f64>, offset: f64| {
        intersect_with_ball(&DomainSpec::half_spaces(2, vec![HalfSpace { normal, offset }]).unwrap(), &unit).unwrap()
    };
    let gp = GraphParams::new(0.25, 1.0, 0.0, 4);
    let ga = build_graph(&ball, &gp).unwrap();
    let mut gpb = gp.clone();
    gpb.search = SearchConfig::affine_only();
    // Re z₁ < 0.9 cuts into U = B((1,0), 0.3)
    let near_cut = cut(vec![1.0, 0.0, 0.0, 0.0], 0.9);
    let gb = build_graph(&near_cut, &gpb).unwrap();
    let seq = SequencePair::new(&ball, vec![pt(&[0.9, 0.0])], vec![pt(&[0.0, 0.5])], pt(&[1.0, 0.0]), None).unwrap();
    let err = germ_compare(&ga, &gb, &pt(&[1.0, 0.0]), &nb(&[1.0, 0.0], 0.3), &seq, &seq, &ProbeParams::default(), 1);
    assert!(matches!(err, Err(KobError::Input(_))));

    // the far cut Re z₁ > −0.5 is a germ of the ball at (1,0), as is the ball itself
    let far_cut = cut(vec![-1.0, 0.0, 0.0, 0.0], 0.5);
    let gb = build_graph(&far_cut, &gpb).unwrap();
    for other in [&ga, &gb] {
        let rep =
            germ_compare(&ga, other, &pt(&[1.0, 0.0]), &nb(&[1.0, 0.0], 0.3), &seq, &seq, &ProbeParams::default(), 1)
                .unwrap();
        assert_eq!(rep.parameters["verdict_a"], rep.parameters["verdict_b"]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn floor_hits_are_monotone_in_the_ladder(mut floors in proptest::collection::vec(0.01f64..0.99, 1..6), k in 0usize..8) {
        floors.sort_by(|a, b| b.total_cmp(a));
        let params = ProbeParams { ladder: floors, ..ProbeParams::default() };
        let seq = disc_pairs(ComplexPoint::scalar((0.7 * k as f64).cos(), (0.7 * k as f64).sin()));
        prop_assume!(seq.q.as_ref() != Some(&seq.p));
        let v = pair_visibility_probe(disc_graph(), &seq, &params, None).unwrap();
        for r in &v.per_n {
            for w in r.floors_hit.windows(2) {
                prop_assert!(!w[0] || w[1]);
            }
        }
    }
}
