use serde::{Deserialize, Serialize};

use super::{run_probe, visibility_probe, ProbeParams, SequencePair, VisibilityOutcome, VisibilityVerdict};
use crate::domain::{DomainSpec, Neighborhood};
use crate::error::{domain, input, Result};
use crate::format;
use crate::geodesic::{certify_geodesic, remeasure, truncate_at_exit, Curve, MetricGraph};
use crate::localization::{check_boundary, point_in, sample_rng, separation, SLACK_REL};
use crate::metric::uniform_far_lower;
use crate::point::ComplexPoint;
use crate::report::{ExperimentReport, Verdict};

/// Graph whose metric the input curve's segment lengths were measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveOrigin {
    Full,
    Local,
}

/// Certifies one curve of `Ω∩V` against both the full and the local graph.
/// Lengths are re-measured in each metric; any excess of the given lengths
/// over their origin metric (an injected detour) is carried to both.
#[allow(clippy::too_many_arguments)]
pub fn geodesic_transfer_check(
    v: &Neighborhood,
    curve: &Curve,
    origin: CurveOrigin,
    lambda: f64,
    full: &MetricGraph,
    local: &MetricGraph,
    gap_allowance: f64,
    pair_budget: usize,
) -> Result<ExperimentReport> {
    if let Some(x) = curve.vertices.iter().find(|x| !v.contains(x)) {
        return domain(format!("curve vertex {x:?} is outside V"));
    }
    let in_full = remeasure(full, curve)?;
    let in_local = remeasure(local, curve)?;
    let base = match origin {
        CurveOrigin::Full => &in_full,
        CurveOrigin::Local => &in_local,
    };
    // differences at rounding level come from summing path distances
    let extra: Vec<f64> = curve
        .seg_lengths
        .iter()
        .zip(&base.seg_lengths)
        .map(|(a, b)| if a - b > 1e-12 * (1.0 + b) { a - b } else { 0.0 })
        .collect();
    let with_extra = |c: &Curve| {
        let mut c = c.clone();
        for (s, e) in c.seg_lengths.iter_mut().zip(&extra) {
            *s += e;
        }
        c
    };
    let cf = certify_geodesic(full, &with_extra(&in_full), lambda, pair_budget)?;
    let cl = certify_geodesic(local, &with_extra(&in_local), lambda, pair_budget)?;
    let mut rep = ExperimentReport::new("transfer", &["graph", "epsilon_emp", "pairs_checked", "worst_t1", "worst_t2"]);
    rep.param("lambda", lambda)
        .param("origin", origin)
        .param("gap_allowance", gap_allowance)
        .param("vertices", curve.len());
    rep.slack_budget = SLACK_REL;
    for (name, c) in [("full", &cf), ("local", &cl)] {
        rep.records.push(vec![
            name.into(),
            c.epsilon_emp.into(),
            c.pairs_checked.into(),
            c.worst_pair.0.into(),
            c.worst_pair.1.into(),
        ]);
    }
    rep.samples = 2;
    let diff = (cf.epsilon_emp - cl.epsilon_emp).abs();
    rep.stat("epsilon_full", cf.epsilon_emp)
        .stat("epsilon_local", cl.epsilon_emp)
        .stat("epsilon_difference", diff)
        .stat("injected_excess", extra.iter().sum());
    rep.verdict = if !cf.epsilon_emp.is_finite() || !cl.epsilon_emp.is_finite() {
        Verdict::Inconclusive
    } else if diff <= gap_allowance + SLACK_REL * (1.0 + gap_allowance) {
        Verdict::Holds
    } else {
        rep.note("both certificates are finite but differ by more than the gap allowance");
        Verdict::HoldsWithSlack
    };
    Ok(rep)
}

/// Hyperbolicity at `p` from the uniform far-set bound with `V = B(p, r_U/2)`.
fn hyperbolic_at(spec: &DomainSpec, p: &ComplexPoint, u: &Neighborhood) -> Result<bool> {
    let v = Neighborhood::new(p.clone(), 0.5 * u.radius)?;
    Ok(uniform_far_lower(spec, separation(u, &v)) > 0.0)
}

fn outcome_verdict(a: VisibilityOutcome, b: VisibilityOutcome) -> Verdict {
    if !a.is_decisive() || !b.is_decisive() {
        Verdict::Inconclusive
    } else if a == b {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

fn verdict_rows(rep: &mut ExperimentReport, label: &str, v: &VisibilityVerdict) {
    for r in &v.per_n {
        let hits: Vec<&str> = r.floors_hit.iter().map(|&h| if h { "1" } else { "0" }).collect();
        rep.records.push(vec![
            label.into(),
            r.n.into(),
            r.max_bdry_dist.into(),
            hits.join(" ").into(),
            r.eps_emp.first().copied().unwrap_or(0.0).into(),
        ]);
    }
}

const COMPARE_COLUMNS: [&str; 5] = ["probe", "n", "max_bdry_dist", "floors_hit", "eps_emp_first_lambda"];

/// Visibility at `p` for Ω and for Ω∩U. The Ω-geodesics are truncated at
/// their exit from U; the last vertex kept becomes the local target, and the
/// truncated piece is certified in the local graph.
pub fn local_global_compare(
    p: &ComplexPoint,
    u: &Neighborhood,
    full: &MetricGraph,
    local: &MetricGraph,
    pairs: &SequencePair,
    params: &ProbeParams,
) -> Result<ExperimentReport> {
    let spec = full.spec();
    check_boundary(spec, p)?;
    if let Some(z) = pairs.z_seq.iter().find(|z| !u.contains(z)) {
        return domain(format!("{z:?} is not in U"));
    }
    let mut rep = ExperimentReport::new("local-global", &COMPARE_COLUMNS);
    rep.param("p", p).param("radius_u", u.radius).param("h", full.h());
    if !hyperbolic_at(spec, p, u)? {
        rep.note("hyperbolicity at p is not established");
        return Ok(rep);
    }
    let list: Vec<_> = pairs.pairs().map(|(z, w)| (z.clone(), w.clone())).collect();
    let global = run_probe(spec, full, &list, params, None)?;
    let mut local_pairs = Vec::new();
    let mut eps_truncated: f64 = 0.0;
    for (curve, (z, _)) in global.curves.iter().zip(&list) {
        let (sub, _) = truncate_at_exit(curve, |x| u.contains(x))?;
        let target = sub.vertices.last().cloned().unwrap_or_else(|| z.clone());
        if sub.len() > 1 {
            let cert = certify_geodesic(local, &remeasure(local, &sub)?, 1.0, params.pair_budget)?;
            eps_truncated = eps_truncated.max(cert.epsilon_emp);
        }
        local_pairs.push((z.clone(), target));
    }
    let local_v = run_probe(local.spec(), local, &local_pairs, params, None)?;
    verdict_rows(&mut rep, "global", &global);
    verdict_rows(&mut rep, "local", &local_v);
    rep.samples = list.len();
    rep.stat("eps_truncated_local", eps_truncated);
    rep.param("global_verdict", global.verdict).param("local_verdict", local_v.verdict);
    rep.flag("agreement", global.verdict == local_v.verdict);
    rep.verdict = outcome_verdict(global.verdict, local_v.verdict);
    Ok(rep)
}

/// Membership probes for germ equivalence inside `U`.
pub const GERM_PROBES: usize = 10_000;

/// Visibility at `p` for two domains that agree inside `U`.
#[allow(clippy::too_many_arguments)]
pub fn germ_compare(
    graph_a: &MetricGraph,
    graph_b: &MetricGraph,
    p: &ComplexPoint,
    u: &Neighborhood,
    pairs_a: &SequencePair,
    pairs_b: &SequencePair,
    params: &ProbeParams,
    seed: u64,
) -> Result<ExperimentReport> {
    let (a, b) = (graph_a.spec(), graph_b.spec());
    if a.dimension() != b.dimension() {
        return input("germ comparison needs domains of equal dimension");
    }
    let whole = DomainSpec::ball(u.center.clone(), u.radius * 2.0)?;
    let mut rng = sample_rng(seed, 0);
    for _ in 0..GERM_PROBES {
        let Some(x) = point_in(&whole, u, &mut rng) else { break };
        if a.is_inside(&x) != b.is_inside(&x) {
            return input(format!("the domains differ inside U at {}: not a germ pair", format::point(&x)));
        }
    }
    let mut rep = ExperimentReport::new("germ", &COMPARE_COLUMNS);
    rep.param("p", p).param("radius_u", u.radius).param("membership_probes", GERM_PROBES).param("seed", seed);
    if !hyperbolic_at(a, p, u)? || !hyperbolic_at(b, p, u)? {
        rep.note("hyperbolicity at p is not established for both domains");
        return Ok(rep);
    }
    let v = Neighborhood::new(p.clone(), 0.5 * u.radius)?;
    let va = visibility_probe(graph_a, u, &v, pairs_a, params, None)?;
    let vb = visibility_probe(graph_b, u, &v, pairs_b, params, None)?;
    verdict_rows(&mut rep, "a", &va);
    verdict_rows(&mut rep, "b", &vb);
    rep.samples = va.per_n.len() + vb.per_n.len();
    rep.param("verdict_a", va.verdict).param("verdict_b", vb.verdict);
    rep.flag("agreement", va.verdict == vb.verdict);
    rep.verdict = outcome_verdict(va.verdict, vb.verdict);
    Ok(rep)
}
