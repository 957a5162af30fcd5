use rand::Rng;
use rayon::prelude::*;

use super::{check_boundary, check_nested, diverges, point_in, sample_rng, unit_direction, SLACK_REL};
use crate::domain::{intersect_with_ball, DomainSpec, Neighborhood};
use crate::error::{input, Result};
use crate::format;
use crate::geodesic::{Curve, MetricGraph, Overlay};
use crate::metric::{kob_length, SearchConfig};
use crate::point::ComplexPoint;
use crate::report::{Cell, ExperimentReport, Verdict};

/// Pairs with `distance_full` below this are left out of ratio statistics.
pub const RATIO_FLOOR: f64 = 1e-6;

const STRATA: usize = 8;

struct PairRow {
    id: usize,
    z: ComplexPoint,
    w: ComplexPoint,
    full: f64,
    local: f64,
    stratum: usize,
}

/// Stratum `⌊log₂(r_V / δ)⌋` (clamped) of the pair's smaller boundary distance.
fn stratum(spec: &DomainSpec, v: &Neighborhood, z: &ComplexPoint, w: &ComplexPoint) -> usize {
    let delta = spec.boundary_dist(z).min(spec.boundary_dist(w));
    if delta <= 0.0 {
        return STRATA - 1;
    }
    ((v.radius / delta).log2().floor().max(0.0) as usize).min(STRATA - 1)
}

fn check_graphs(full: &MetricGraph, local: &MetricGraph) -> Result<()> {
    if full.h() != local.h() || full.spec().dimension() != local.spec().dimension() {
        return input("full and local graphs must share the lattice spacing and dimension");
    }
    Ok(())
}

/// Random pairs of `Ω ∩ V` attached to both graphs off-lattice, so the same
/// seed surveys the same pairs at every spacing; every other pair is a near
/// pair at distance `h..3h` so that small distances are covered too.
fn survey_pairs(
    spec: &DomainSpec,
    v: &Neighborhood,
    full: &MetricGraph,
    local: &MetricGraph,
    count: usize,
    seed: u64,
) -> (Vec<PairRow>, usize) {
    let h = local.h();
    let rows: Vec<Option<PairRow>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let z = point_in(spec, v, &mut rng)?;
            let w = if i % 2 == 1 {
                let dir = unit_direction(spec.dimension(), &mut rng);
                z.offset(&dir, h * rng.gen_range(1.0..3.0))
            } else {
                point_in(spec, v, &mut rng)?
            };
            if !v.contains(&w) || !spec.is_inside(&w) {
                return None;
            }
            let dist = |g: &MetricGraph| {
                let ov = Overlay::new(g, &[z.clone(), w.clone()]).ok()?;
                ov.distance(ov.id(0), ov.id(1)).ok().filter(|d| d.is_finite())
            };
            let (dl, df) = (dist(local)?, dist(full)?);
            let stratum = stratum(spec, v, &z, &w);
            Some(PairRow { id: i, z, w, full: df, local: dl, stratum })
        })
        .collect();
    let excluded = rows.iter().filter(|r| r.is_none()).count();
    (rows.into_iter().flatten().collect(), excluded)
}

fn stratum_sups(rows: &[PairRow], value: impl Fn(&PairRow) -> Option<f64>) -> Vec<(usize, f64)> {
    let mut sups = [f64::NEG_INFINITY; STRATA];
    for r in rows {
        if let Some(x) = value(r) {
            sups[r.stratum] = sups[r.stratum].max(x);
        }
    }
    sups.iter().enumerate().filter(|(_, s)| s.is_finite()).map(|(k, &s)| (k, s)).collect()
}

#[allow(clippy::too_many_arguments)]
fn base_report(
    name: &str,
    columns: &[&str],
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    full: &MetricGraph,
    pair_count: usize,
    seed: u64,
) -> ExperimentReport {
    let mut rep = ExperimentReport::new(name, columns);
    rep.param("p", p).param("radius_u", u.radius).param("radius_v", v.radius).param("h", full.h());
    rep.param("pairs", pair_count).param("seed", seed);
    rep.slack_budget = SLACK_REL;
    rep
}

/// `distance_local − distance_full` over node pairs of `Ω ∩ V`, with strata
/// by boundary distance. Gaps are ≥ 0 by subgraph domination; a divergent
/// trend of stratum maxima makes the report inconclusive.
#[allow(clippy::too_many_arguments)]
pub fn additive_gap_survey(
    spec: &DomainSpec,
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    pair_count: usize,
    full: &MetricGraph,
    local: &MetricGraph,
    seed: u64,
) -> Result<ExperimentReport> {
    check_boundary(spec, p)?;
    check_nested(u, v)?;
    check_graphs(full, local)?;
    let mut rep = base_report(
        "additive",
        &["pair_id", "z", "w", "dist_full_upper", "dist_local_upper", "gap_of_uppers", "stratum"],
        p,
        u,
        v,
        full,
        pair_count,
        seed,
    );
    let (rows, excluded) = survey_pairs(spec, v, full, local, pair_count, seed);
    rep.excluded = excluded;
    rep.samples = rows.len();
    let (mut min_gap, mut sup_gap) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &rows {
        let gap = r.local - r.full;
        min_gap = min_gap.min(gap);
        sup_gap = sup_gap.max(gap);
        rep.records.push(vec![
            r.id.into(),
            format::point(&r.z).into(),
            format::point(&r.w).into(),
            r.full.into(),
            r.local.into(),
            gap.into(),
            r.stratum.into(),
        ]);
    }
    let sups = stratum_sups(&rows, |r| Some(r.local - r.full));
    for &(k, s) in &sups {
        rep.stat(&format!("sup_gap_stratum_{k}"), s);
    }
    let divergent = diverges(&sups.iter().map(|s| s.1).collect::<Vec<_>>());
    rep.stat("min_gap", min_gap).stat("sup_gap", sup_gap).flag("divergent", divergent);
    rep.verdict = if rows.is_empty() {
        Verdict::Inconclusive
    } else if rows.iter().any(|r| r.local - r.full < -SLACK_REL * (1.0 + r.full)) {
        Verdict::Violated
    } else if divergent {
        rep.note("stratum maxima of the gap grow toward p");
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(rep)
}

/// `distance_local / distance_full` over the same kind of pairs as
/// [`additive_gap_survey`]; pairs with `distance_full < ratio_floor` are
/// counted separately.
#[allow(clippy::too_many_arguments)]
pub fn multiplicative_ratio_survey(
    spec: &DomainSpec,
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    pair_count: usize,
    full: &MetricGraph,
    local: &MetricGraph,
    ratio_floor: f64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_boundary(spec, p)?;
    check_nested(u, v)?;
    check_graphs(full, local)?;
    let mut rep = base_report(
        "multiplicative",
        &["pair_id", "z", "w", "dist_full_upper", "dist_local_upper", "ratio_of_uppers", "stratum"],
        p,
        u,
        v,
        full,
        pair_count,
        seed,
    );
    rep.param("ratio_floor", ratio_floor);
    let (rows, excluded) = survey_pairs(spec, v, full, local, pair_count, seed);
    rep.excluded = excluded;
    rep.samples = rows.len();
    let ratio = |r: &PairRow| (r.full >= ratio_floor).then(|| r.local / r.full);
    let (mut min_ratio, mut sup_ratio, mut below) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for r in &rows {
        let cell = match ratio(r) {
            Some(q) => {
                min_ratio = min_ratio.min(q);
                sup_ratio = sup_ratio.max(q);
                Cell::Num(q)
            }
            None => {
                below += 1;
                Cell::Text("below-floor".into())
            }
        };
        rep.records.push(vec![
            r.id.into(),
            format::point(&r.z).into(),
            format::point(&r.w).into(),
            r.full.into(),
            r.local.into(),
            cell,
            r.stratum.into(),
        ]);
    }
    let sups = stratum_sups(&rows, ratio);
    for &(k, s) in &sups {
        rep.stat(&format!("sup_ratio_stratum_{k}"), s);
    }
    let divergent = diverges(&sups.iter().map(|s| s.1).collect::<Vec<_>>());
    rep.stat("min_ratio", min_ratio)
        .stat("sup_ratio", sup_ratio)
        .stat("below_floor", below as f64)
        .flag("divergent", divergent);
    let counted = rows.len() - below;
    rep.verdict = if counted == 0 {
        Verdict::Inconclusive
    } else if min_ratio < 1.0 - SLACK_REL {
        Verdict::Violated
    } else if divergent {
        rep.note("stratum maxima of the ratio grow toward p");
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(rep)
}

/// Length defect `l_{Ω∩U}(γ) − l_Ω(γ)` (upper-bound lengths, matched
/// quadrature) for curves inside `Ω ∩ V`; curves leaving V are excluded.
#[allow(clippy::too_many_arguments)]
pub fn length_localization_survey(
    spec: &DomainSpec,
    p: &ComplexPoint,
    u: &Neighborhood,
    v: &Neighborhood,
    curves: &[Curve],
    m: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<ExperimentReport> {
    check_boundary(spec, p)?;
    check_nested(u, v)?;
    let local = intersect_with_ball(spec, u)?;
    let mut rep = ExperimentReport::new(
        "length-localization",
        &["curve_id", "vertices", "length_full_upper", "length_local_upper", "defect_of_uppers"],
    );
    rep.param("p", p).param("radius_u", u.radius).param("radius_v", v.radius).param("m", m).param("seed", seed);
    rep.slack_budget = SLACK_REL;
    let cfg = cfg.clone().with_seed(seed);
    let rows: Vec<Option<Result<(usize, f64, f64)>>> = curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            if c.vertices.iter().any(|x| !v.contains(x)) {
                return None;
            }
            Some((|| {
                let lf = kob_length(spec, &c.vertices, m, &cfg)?;
                let ll = kob_length(&local, &c.vertices, m, &cfg)?;
                Ok((i, lf.upper, ll.upper))
            })())
        })
        .collect();
    let mut defects = Vec::new();
    let mut sound_break = false;
    for r in rows {
        let Some(r) = r else {
            rep.excluded += 1;
            continue;
        };
        let (i, lf, ll) = r?;
        let defect = ll - lf;
        // the local upper bound sits above κ_Ω pointwise only when κ_Ω is exact
        if spec.is_model() && defect < -SLACK_REL * (1.0 + lf) {
            sound_break = true;
        }
        defects.push(defect);
        rep.records.push(vec![i.into(), curves[i].len().into(), lf.into(), ll.into(), defect.into()]);
    }
    rep.samples = defects.len();
    let sup = defects.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = defects.iter().copied().fold(f64::INFINITY, f64::min);
    let divergent = diverges(&defects);
    rep.stat("sup_defect", sup).stat("min_defect", min).flag("divergent", divergent);
    rep.verdict = if defects.is_empty() {
        Verdict::Inconclusive
    } else if sound_break {
        Verdict::Violated
    } else if divergent {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(rep)
}
