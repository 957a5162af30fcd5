use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_boundary, check_nested, point_in, sample_rng, separation, unit_direction, vanishes, SLACK_REL};
use crate::domain::{intersect_with_ball, DomainSpec, Neighborhood};
use crate::error::{domain, input, Result};
use crate::format;
use crate::geodesic::{set_distance, MetricGraph};
use crate::metric::{
    far_distance_lower, lempert_tilde_upper, lempert_upper, royden_estimate, uniform_far_lower, SearchConfig,
};
use crate::point::ComplexPoint;
use crate::report::{ExperimentReport, Verdict};
use crate::visibility::SequencePair;

/// Hyperbolicity of Ω at `p ∈ ∂Ω`. A positive lower bound for
/// `k_Ω(Ω∩V, Ω∖U)` gives `holds`; Lempert upper bounds along `escape`
/// that shrink to zero give `violated`.
pub fn hyperbolicity_probe(
    spec: &DomainSpec,
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    graph: Option<&MetricGraph>,
    escape: Option<&SequencePair>,
    cfg: &SearchConfig,
) -> Result<ExperimentReport> {
    check_boundary(spec, p)?;
    check_nested(u, v)?;
    let mut rep = ExperimentReport::new("hyperbolicity", &["n", "z", "w", "lempert_upper"]);
    rep.param("p", p).param("radius_u", u.radius).param("radius_v", v.radius).param("bounded", spec.is_bounded());
    rep.slack_budget = 0.0;
    let lower = uniform_far_lower(spec, separation(u, v));
    rep.stat("set_distance_lower", lower);
    if let Some(g) = graph {
        rep.stat("set_distance_upper", set_distance(g, |z| v.contains(z), |z| !u.contains(z)));
    }
    let mut uppers = Vec::new();
    if let Some(seq) = escape {
        for (n, (z, w)) in seq.pairs().enumerate() {
            let l = lempert_upper(spec, z, w, cfg)?;
            rep.records.push(vec![n.into(), format::point(z).into(), format::point(w).into(), l.into()]);
            uppers.push(l);
        }
        rep.samples = uppers.len();
        if let Some(&last) = uppers.last() {
            rep.stat("lempert_upper_last", last);
        }
    }
    let vanishing = vanishes(&uppers);
    rep.flag("lempert_vanishing", vanishing);
    rep.verdict = if lower > 0.0 {
        Verdict::Holds
    } else if vanishing {
        rep.note("Lempert upper bounds along the escaping sequences decrease to zero");
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

/// One evaluation of Royden's lemma `l̃_Ω(z, Ω∖D)·κ_{Ω∩D}(z;v) ≤ κ_Ω(z;v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoydenSample {
    pub z: ComplexPoint,
    pub v: ComplexPoint,
    pub l_tilde_lower: f64,
    pub l_tilde_upper: f64,
    pub kappa_local_lower: f64,
    pub kappa_local_upper: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
}

impl RoydenSample {
    /// `lower·lower − upper(κ_Ω)`; positive means the lemma fails for sure.
    pub fn conservative_excess(&self) -> f64 {
        self.l_tilde_lower * self.kappa_local_lower - self.kappa_upper
    }

    /// `lower(κ_Ω) − upper·upper`; nonnegative means the estimates alone
    /// already prove the inequality.
    pub fn strict_slack(&self) -> f64 {
        self.kappa_lower - self.l_tilde_upper * self.kappa_local_upper
    }
}

/// Candidate far points: just past ∂D along the ray from its center, and
/// the graph nodes outside D nearest to `z`.
fn far_candidates(
    spec: &DomainSpec,
    d: &Neighborhood,
    z: &ComplexPoint,
    graph: Option<&MetricGraph>,
) -> Vec<ComplexPoint> {
    let mut out = Vec::new();
    if let Some(u) = (z - &d.center).normalized() {
        let w = d.center.offset(&u, d.radius * (1.0 + 1e-6));
        if spec.is_inside(&w) {
            out.push(w);
        }
    }
    if let Some(g) = graph {
        let mut outside: Vec<(f64, u32)> =
            g.nodes_where(|x| !d.contains(x)).into_iter().map(|j| (g.node(j as usize).dist(z), j)).collect();
        outside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.extend(outside.into_iter().take(8).map(|(_, j)| g.node(j as usize).clone()));
    }
    out
}

pub fn royden_lemma_sample(
    spec: &DomainSpec,
    d: &Neighborhood,
    z: &ComplexPoint,
    v: &ComplexPoint,
    graph: Option<&MetricGraph>,
    cfg: &SearchConfig,
) -> Result<RoydenSample> {
    if v.is_zero() {
        return input("tangent direction must be nonzero");
    }
    if !spec.is_inside(z) || !d.contains(z) {
        return domain(format!("{z:?} is not in Ω ∩ D"));
    }
    let local = intersect_with_ball(spec, d)?;
    let reach = d.radius - z.dist(&d.center);
    let l_tilde_lower = far_distance_lower(spec, z, reach).tanh();
    let mut l_tilde_upper: f64 = 1.0;
    for w in far_candidates(spec, d, z, graph) {
        l_tilde_upper = l_tilde_upper.min(lempert_tilde_upper(spec, z, &w, cfg)?);
    }
    let kl = royden_estimate(&local, z, v, cfg)?;
    let k = royden_estimate(spec, z, v, cfg)?;
    Ok(RoydenSample {
        z: z.clone(),
        v: v.clone(),
        l_tilde_lower,
        l_tilde_upper: l_tilde_upper.max(l_tilde_lower),
        kappa_local_lower: kl.lower,
        kappa_local_upper: kl.upper,
        kappa_lower: k.lower,
        kappa_upper: k.upper,
    })
}

fn sample_in(
    spec: &DomainSpec,
    nb: &Neighborhood,
    count: usize,
    seed: u64,
) -> Vec<Option<(ComplexPoint, ComplexPoint)>> {
    (0..count)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            point_in(spec, nb, &mut rng).map(|z| {
                let v = unit_direction(spec.dimension(), &mut rng);
                (z, v)
            })
        })
        .collect()
}

/// Royden's localization lemma on `sample_count` random `(z, v)`, `z ∈ Ω∩D`.
/// Violations use `lower(l̃)·lower(κ_{Ω∩D}) > upper(κ_Ω)`, which is sound;
/// the strict variant `upper·upper ≤ lower` is recorded as slack.
pub fn check_royden_lemma(
    spec: &DomainSpec,
    d: &Neighborhood,
    sample_count: usize,
    graph: Option<&MetricGraph>,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "royden",
        &[
            "index",
            "z",
            "v",
            "l_tilde_lower",
            "l_tilde_upper",
            "kappa_local_lower",
            "kappa_local_upper",
            "kappa_lower",
            "kappa_upper",
            "conservative_excess",
            "strict_slack",
        ],
    );
    rep.param("center", &d.center).param("radius", d.radius).param("seed", seed).param("samples", sample_count);
    rep.slack_budget = SLACK_REL;
    let draws = sample_in(spec, d, sample_count, seed);
    let results: Vec<Option<Result<RoydenSample>>> = draws
        .par_iter()
        .enumerate()
        .map(|(i, draw)| {
            draw.as_ref().map(|(z, v)| {
                royden_lemma_sample(spec, d, z, v, graph, &cfg.clone().with_seed(seed.wrapping_add(i as u64)))
            })
        })
        .collect();
    let (mut violations, mut slack_only, mut strict) = (0usize, 0usize, 0usize);
    let (mut worst, mut min_slack) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, r) in results.into_iter().enumerate() {
        let Some(r) = r else {
            rep.excluded += 1;
            continue;
        };
        let s = r?;
        let excess = s.conservative_excess();
        let slack = s.strict_slack();
        if excess > SLACK_REL * (1.0 + s.kappa_upper) {
            violations += 1;
        } else if excess > 0.0 {
            slack_only += 1;
        }
        if slack >= 0.0 {
            strict += 1;
        }
        worst = worst.max(excess);
        min_slack = min_slack.min(slack);
        rep.records.push(vec![
            i.into(),
            format::point(&s.z).into(),
            format::point(&s.v).into(),
            s.l_tilde_lower.into(),
            s.l_tilde_upper.into(),
            s.kappa_local_lower.into(),
            s.kappa_local_upper.into(),
            s.kappa_lower.into(),
            s.kappa_upper.into(),
            excess.into(),
            slack.into(),
        ]);
        rep.samples += 1;
    }
    let frac = if rep.samples > 0 { strict as f64 / rep.samples as f64 } else { 0.0 };
    rep.stat("conservative_violations", violations as f64)
        .stat("max_conservative_excess", worst)
        .stat("strict_fraction", frac)
        .stat("min_strict_slack", min_slack);
    rep.verdict = if rep.samples == 0 {
        rep.note("no samples in Ω ∩ D");
        Verdict::Inconclusive
    } else if violations > 0 {
        Verdict::Violated
    } else if slack_only > 0 {
        Verdict::HoldsWithSlack
    } else {
        Verdict::Holds
    };
    Ok(rep)
}

/// `C = coth(L)`; `None` when the set-distance lower bound `L` is not positive.
pub fn sarkar_constant(set_distance_lower: f64) -> Option<f64> {
    (set_distance_lower > 0.0).then(|| 1.0 / set_distance_lower.tanh())
}

/// `1 + C·e^{−k}`.
pub fn sarkar_factor(c: f64, k: f64) -> f64 {
    1.0 + c * (-k).exp()
}

/// Sarkar's estimate `κ_{Ω∩U}(x;v) ≤ (1 + C e^{−k_Ω(x, Ω∖U)}) κ_Ω(x;v)` for
/// `x ∈ Ω∩V`, with `C = coth(lower bound of k_Ω(Ω∩V, Ω∖U))`. Lower bounds
/// inside `C` and the exponent only enlarge the right side.
#[allow(clippy::too_many_arguments)]
pub fn check_sarkar_estimate(
    spec: &DomainSpec,
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    sample_count: usize,
    graph: Option<&MetricGraph>,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<ExperimentReport> {
    check_boundary(spec, p)?;
    check_nested(u, v)?;
    let mut rep = ExperimentReport::new(
        "sarkar",
        &[
            "index",
            "x",
            "v",
            "k_far_lower",
            "factor",
            "kappa_local_lower",
            "kappa_local_upper",
            "kappa_lower",
            "kappa_upper",
            "sound_excess",
            "strict_slack",
        ],
    );
    rep.param("p", p).param("radius_u", u.radius).param("radius_v", v.radius).param("seed", seed);
    rep.param("samples", sample_count);
    rep.slack_budget = SLACK_REL;
    let lower = uniform_far_lower(spec, separation(u, v));
    rep.stat("set_distance_lower", lower);
    if let Some(g) = graph {
        rep.stat("set_distance_upper", set_distance(g, |z| v.contains(z), |z| !u.contains(z)));
    }
    let Some(c) = sarkar_constant(lower) else {
        rep.note("no positive lower bound for k(Ω∩V, Ω∖U): the constant C is undefined");
        rep.verdict = Verdict::Inconclusive;
        return Ok(rep);
    };
    rep.stat("C", c);
    let local = intersect_with_ball(spec, u)?;
    let draws = sample_in(spec, v, sample_count, seed);
    type Row = (ComplexPoint, ComplexPoint, f64, f64, [f64; 4]);
    let results: Vec<Option<Result<Row>>> = draws
        .par_iter()
        .enumerate()
        .map(|(i, draw)| {
            draw.as_ref().map(|(x, dir)| {
                let cfg = cfg.clone().with_seed(seed.wrapping_add(i as u64));
                let k_far = far_distance_lower(spec, x, (u.radius - x.dist(&u.center)).max(0.0));
                let kl = royden_estimate(&local, x, dir, &cfg)?;
                let k = royden_estimate(spec, x, dir, &cfg)?;
                Ok((x.clone(), dir.clone(), k_far, sarkar_factor(c, k_far), [kl.lower, kl.upper, k.lower, k.upper]))
            })
        })
        .collect();
    let (mut violations, mut strict) = (0usize, 0usize);
    let (mut min_slack, mut max_factor) = (f64::INFINITY, 0.0f64);
    for (i, r) in results.into_iter().enumerate() {
        let Some(r) = r else {
            rep.excluded += 1;
            continue;
        };
        let (x, dir, k_far, factor, [kl_lo, kl_up, k_lo, k_up]) = r?;
        let rhs = factor * k_up;
        let excess = kl_lo - rhs;
        if excess > SLACK_REL * (1.0 + rhs) {
            violations += 1;
        }
        let slack = factor * k_lo - kl_up;
        if slack >= 0.0 {
            strict += 1;
        }
        min_slack = min_slack.min(slack);
        max_factor = max_factor.max(factor);
        rep.records.push(vec![
            i.into(),
            format::point(&x).into(),
            format::point(&dir).into(),
            k_far.into(),
            factor.into(),
            kl_lo.into(),
            kl_up.into(),
            k_lo.into(),
            k_up.into(),
            excess.into(),
            slack.into(),
        ]);
        rep.samples += 1;
    }
    let frac = if rep.samples > 0 { strict as f64 / rep.samples as f64 } else { 0.0 };
    rep.stat("sound_violations", violations as f64)
        .stat("strict_fraction", frac)
        .stat("min_strict_slack", min_slack)
        .stat("max_factor", max_factor);
    rep.verdict = if rep.samples == 0 {
        rep.note("no samples in Ω ∩ V");
        Verdict::Inconclusive
    } else if violations > 0 {
        Verdict::Violated
    } else if strict == rep.samples {
        Verdict::Holds
    } else {
        Verdict::HoldsWithSlack
    };
    Ok(rep)
}
