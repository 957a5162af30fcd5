//! Visibility experiments: visible points and pairs, geodesic transfer
//! between Ω and Ω∩U, local/global agreement and germ independence.

mod compare;
mod sequence;

pub use compare::{geodesic_transfer_check, germ_compare, local_global_compare, CurveOrigin};
pub use sequence::SequencePair;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{DomainSpec, Neighborhood, BOUNDARY_TOL};
use crate::error::{domain, input, KobError, Result};
use crate::geodesic::{certify_geodesic_multi, shortest_curve_with_chords, Curve, MetricGraph};
use crate::localization::check_boundary;
use crate::point::ComplexPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityOutcome {
    VisibleEvidence,
    NonVisibleEvidence,
    Inconclusive,
}

impl VisibilityOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            VisibilityOutcome::VisibleEvidence => "visible-evidence",
            VisibilityOutcome::NonVisibleEvidence => "non-visible-evidence",
            VisibilityOutcome::Inconclusive => "inconclusive",
        }
    }

    pub fn is_decisive(self) -> bool {
        self != VisibilityOutcome::Inconclusive
    }
}

/// One extracted geodesic of a probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRecord {
    pub n: usize,
    /// One entry per λ of the probe.
    pub eps_emp: Vec<f64>,
    pub max_bdry_dist: f64,
    /// One entry per floor of the ladder.
    pub floors_hit: Vec<bool>,
    pub length_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityVerdict {
    pub verdict: VisibilityOutcome,
    pub lambda: Vec<f64>,
    pub ladder: Vec<f64>,
    pub per_n: Vec<GeodesicRecord>,
    pub params: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub lambdas: Vec<f64>,
    /// Floors `r` of the compact slices `K_r`.
    pub ladder: Vec<f64>,
    pub pair_budget: usize,
    /// Box radius of the compact slices.
    pub box_radius: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self { lambdas: vec![1.0, 1.5, 2.0], ladder: vec![0.5, 0.2, 0.05], pair_budget: 20_000, box_radius: 1.0 }
    }
}

impl ProbeParams {
    fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|&l| !(l >= 1.0)) {
            return input("every lambda must be at least 1");
        }
        if self.ladder.is_empty() || self.ladder.iter().any(|&r| !(r > 0.0)) {
            return input("the floor ladder must be a nonempty list of positive floors");
        }
        Ok(())
    }
}

/// Whether `x` lies in `K_r` with room to spare: `δ(x) > r` beyond the
/// boundary tolerance, so touching a floor does not count as hitting it.
fn hits(spec: &DomainSpec, x: &ComplexPoint, r: f64, box_radius: f64) -> bool {
    x.norm() <= box_radius && spec.boundary_dist(x) > r + BOUNDARY_TOL
}

/// Curves, certificates and floor hits for each pair; `floors` is the
/// domain whose compact slices are tested.
pub(crate) fn run_probe(
    floors: &DomainSpec,
    graph: &MetricGraph,
    pairs: &[(ComplexPoint, ComplexPoint)],
    params: &ProbeParams,
    refined: Option<&MetricGraph>,
) -> Result<VisibilityVerdict> {
    params.validate()?;
    let results: Vec<Result<(GeodesicRecord, Curve)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(n, (z, w))| {
            let curve = shortest_curve_with_chords(graph, z, w)?;
            let eps_emp = certify_geodesic_multi(graph, &curve, &params.lambdas, params.pair_budget)?
                .iter()
                .map(|c| c.epsilon_emp)
                .collect();
            let floors_hit = params
                .ladder
                .iter()
                .map(|&r| curve.vertices.iter().any(|x| hits(floors, x, r, params.box_radius)))
                .collect();
            let record = GeodesicRecord {
                n,
                eps_emp,
                max_bdry_dist: curve.max_boundary_distance(floors),
                floors_hit,
                length_upper: curve.total_length(),
            };
            Ok((record, curve))
        })
        .collect();
    let mut out = VisibilityVerdict {
        verdict: VisibilityOutcome::Inconclusive,
        lambda: params.lambdas.clone(),
        ladder: params.ladder.clone(),
        per_n: Vec::new(),
        params: BTreeMap::new(),
        notes: Vec::new(),
        curves: Vec::new(),
    };
    out.params.insert("h".into(), graph.h().into());
    out.params.insert("pairs".into(), pairs.len().into());
    for r in results {
        match r {
            Ok((rec, c)) => {
                out.per_n.push(rec);
                out.curves.push(c);
            }
            Err(KobError::Unreachable(msg)) => {
                out.notes.push(format!("unreachable pair: {msg}"));
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
    }
    out.verdict = classify(&out.per_n, &params.ladder);
    if out.verdict == VisibilityOutcome::NonVisibleEvidence {
        if let (Some(fine), Some((z, w))) = (refined, pairs.last()) {
            let coarse = out.per_n.last().map_or(0.0, |r| r.max_bdry_dist);
            let refined_max = shortest_curve_with_chords(fine, z, w)?.max_boundary_distance(floors);
            out.params.insert("refined_h".into(), fine.h().into());
            out.params.insert("refined_last_max_bdry_dist".into(), refined_max.into());
            if refined_max > coarse + graph.h() {
                out.notes.push("refinement raises the boundary distance of the last curve".into());
                out.verdict = VisibilityOutcome::Inconclusive;
            }
        }
    }
    Ok(out)
}

/// Verdict rule: visible-evidence when one floor is hit by every curve;
/// non-visible-evidence when the maximal boundary distance is
/// non-increasing over the second half and the last curve misses every floor.
pub fn classify(records: &[GeodesicRecord], ladder: &[f64]) -> VisibilityOutcome {
    if records.is_empty() {
        return VisibilityOutcome::Inconclusive;
    }
    if (0..ladder.len()).any(|k| records.iter().all(|r| r.floors_hit[k])) {
        return VisibilityOutcome::VisibleEvidence;
    }
    let tail = &records[records.len() / 2..];
    let decreasing = tail.windows(2).all(|w| w[1].max_bdry_dist <= w[0].max_bdry_dist + BOUNDARY_TOL);
    let last_misses = !records[records.len() - 1].floors_hit.iter().any(|&h| h);
    if decreasing && last_misses {
        VisibilityOutcome::NonVisibleEvidence
    } else {
        VisibilityOutcome::Inconclusive
    }
}

/// Visibility of `p` between `z_n ∈ Ω∩V` and `w_n ∈ Ω∖U`.
pub fn visibility_probe(
    graph: &MetricGraph,
    u: &Neighborhood,
    v: &Neighborhood,
    pairs: &SequencePair,
    params: &ProbeParams,
    refined: Option<&MetricGraph>,
) -> Result<VisibilityVerdict> {
    let spec = graph.spec();
    check_boundary(spec, &pairs.p)?;
    if let Some(z) = pairs.z_seq.iter().find(|z| !v.contains(z)) {
        return domain(format!("{z:?} is not in V"));
    }
    if let Some(w) = pairs.w_seq.iter().find(|w| u.contains(w)) {
        return domain(format!("{w:?} is not outside U"));
    }
    let list: Vec<_> = pairs.pairs().map(|(z, w)| (z.clone(), w.clone())).collect();
    let mut out = run_probe(spec, graph, &list, params, refined)?;
    out.params.insert("p".into(), serde_json::to_value(&pairs.p).unwrap_or(Value::Null));
    out.params.insert("radius_u".into(), u.radius.into());
    out.params.insert("radius_v".into(), v.radius.into());
    Ok(out)
}

/// Visibility of the pair `{p, q}` along sequences `z_n → p`, `w_n → q`.
pub fn pair_visibility_probe(
    graph: &MetricGraph,
    pairs: &SequencePair,
    params: &ProbeParams,
    refined: Option<&MetricGraph>,
) -> Result<VisibilityVerdict> {
    let spec = graph.spec();
    let Some(q) = &pairs.q else { return input("a pair probe needs the second boundary point q") };
    if *q == pairs.p {
        return input("a visible pair needs p ≠ q");
    }
    check_boundary(spec, &pairs.p)?;
    check_boundary(spec, q)?;
    let list: Vec<_> = pairs.pairs().map(|(z, w)| (z.clone(), w.clone())).collect();
    let mut out = run_probe(spec, graph, &list, params, refined)?;
    out.params.insert("p".into(), serde_json::to_value(&pairs.p).unwrap_or(Value::Null));
    out.params.insert("q".into(), serde_json::to_value(q).unwrap_or(Value::Null));
    Ok(out)
}

/// Pair probes over a mesh of targets `q`: visible-evidence when every pair
/// is, non-visible-evidence when some pair is.
pub fn pair_visibility_sweep(
    graph: &MetricGraph,
    mesh: &[SequencePair],
    params: &ProbeParams,
) -> Result<(VisibilityOutcome, Vec<VisibilityVerdict>)> {
    let verdicts = mesh.iter().map(|s| pair_visibility_probe(graph, s, params, None)).collect::<Result<Vec<_>>>()?;
    let outcome = if !verdicts.is_empty() && verdicts.iter().all(|v| v.verdict == VisibilityOutcome::VisibleEvidence) {
        VisibilityOutcome::VisibleEvidence
    } else if verdicts.iter().any(|v| v.verdict == VisibilityOutcome::NonVisibleEvidence) {
        VisibilityOutcome::NonVisibleEvidence
    } else {
        VisibilityOutcome::Inconclusive
    };
    Ok((outcome, verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(max: f64, hits: [bool; 3]) -> GeodesicRecord {
        GeodesicRecord { n: 0, eps_emp: vec![0.0], max_bdry_dist: max, floors_hit: hits.to_vec(), length_upper: 1.0 }
    }

    #[test]
    fn classification_rules() {
        let ladder = [0.5, 0.2, 0.05];
        let visible = [rec(1.0, [true; 3]), rec(0.6, [true; 3]), rec(0.3, [false, true, true])];
        assert_eq!(classify(&visible, &ladder), VisibilityOutcome::VisibleEvidence);
        let fading = [
            rec(0.44, [false, true, true]),
            rec(0.2, [false, false, true]),
            rec(0.12, [false, false, true]),
            rec(0.05, [false; 3]),
        ];
        assert_eq!(classify(&fading, &ladder), VisibilityOutcome::NonVisibleEvidence);
        let bouncing = [
            rec(0.44, [false, true, true]),
            rec(0.3, [false, true, true]),
            rec(0.04, [false; 3]),
            rec(0.1, [false, false, true]),
        ];
        assert_eq!(classify(&bouncing, &ladder), VisibilityOutcome::Inconclusive);
        assert_eq!(classify(&[], &ladder), VisibilityOutcome::Inconclusive);
    }

    #[test]
    fn touching_a_floor_is_not_a_hit() {
        let spec = DomainSpec::unit_disc();
        assert!(!hits(&spec, &ComplexPoint::scalar(0.95, 0.0), 0.05, 1.0));
        assert!(hits(&spec, &ComplexPoint::scalar(0.9, 0.0), 0.05, 1.0));
    }
}
