//! Graph discretization of the integrated Kobayashi distance, shortest
//! curves and their `(λ, ε)`-geodesic certificates.

mod curve;
mod graph;
mod paths;

pub use curve::{reparametrize_by_length, truncate_at_exit, Curve, GeodesicCertificate};
pub use graph::{build_graph, build_local_graph, GraphParams, GraphSummary, MetricGraph, NODE_BUDGET};
pub use paths::{Overlay, ShortestPaths};

use crate::domain::DomainSpec;
use crate::error::{input, KobError, Result};
use crate::metric::{
    distance_lower_unchecked, distance_oracle_unchecked, lempert_upper, Method, MetricEstimate, SearchConfig,
};
use crate::point::ComplexPoint;

/// Rounding allowance when comparing path sums with Dijkstra distances.
const ROUNDING: f64 = 1e-10;

/// Shortest-path distance between two points of Ω (attached to the graph
/// when off-lattice).
pub fn graph_distance(graph: &MetricGraph, a: &ComplexPoint, b: &ComplexPoint) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let ov = Overlay::new(graph, &[a.clone(), b.clone()])?;
    ov.distance(ov.id(0), ov.id(1))
}

/// `[lower, upper]` for k_Ω(z, w): upper = min(graph, Lempert discs),
/// lower from enclosures; collapsed to the oracle on model kinds.
pub fn distance_estimate(
    spec: &DomainSpec,
    graph: &MetricGraph,
    z: &ComplexPoint,
    w: &ComplexPoint,
    cfg: &SearchConfig,
) -> Result<MetricEstimate> {
    if z.dim() != spec.dimension() || w.dim() != spec.dimension() {
        return input("point dimension does not match the domain");
    }
    if !spec.is_inside(z) || !spec.is_inside(w) {
        return Err(KobError::Domain("distance endpoints must lie in the domain".into()));
    }
    if z == w {
        return Ok(MetricEstimate::zero());
    }
    if let Some(k) = distance_oracle_unchecked(spec, z, w) {
        return Ok(MetricEstimate::exact(k));
    }
    let (lower, lower_method) = distance_lower_unchecked(spec, z, w);
    let lempert = lempert_upper(spec, z, w, cfg)?;
    let (mut upper, mut upper_method) = (lempert, Method::Mobius);
    match graph_distance(graph, z, w) {
        Ok(g) if g < upper => {
            upper = g;
            upper_method = Method::Graph;
        }
        Ok(_) | Err(KobError::Unreachable(_)) => {}
        Err(e) => return Err(e),
    }
    let grid_slack = if upper_method == Method::Graph { graph.summary().slack_bound } else { 0.0 };
    Ok(MetricEstimate { lower, upper: upper.max(lower), lower_method, upper_method, grid_slack })
}

/// Dijkstra path between two points as a curve; edge weights become
/// segment lengths, params start as Euclidean arclength.
pub fn shortest_curve(graph: &MetricGraph, a: &ComplexPoint, b: &ComplexPoint) -> Result<Curve> {
    let ov = Overlay::new(graph, &[a.clone(), b.clone()])?;
    ov.path(ov.id(0), ov.id(1))
}

/// [`shortest_curve`] on the overlay that also carries the subdivided chord
/// from `a` to `b`, so endpoints closer to ∂Ω than h are not forced through
/// the lattice.
pub fn shortest_curve_with_chords(graph: &MetricGraph, a: &ComplexPoint, b: &ComplexPoint) -> Result<Curve> {
    let ov = Overlay::with_chords(graph, &[a.clone(), b.clone()])?;
    ov.path(ov.id(0), ov.id(1))
}

/// The same polygon with segment lengths measured in `graph`'s metric:
/// lattice edges take their edge weight, other segments the link quadrature.
pub fn remeasure(graph: &MetricGraph, curve: &Curve) -> Result<Curve> {
    let mut seg = Vec::with_capacity(curve.seg_lengths.len());
    for w in curve.vertices.windows(2) {
        let edge = match (graph.node_of(&w[0]), graph.node_of(&w[1])) {
            (Some(a), Some(b)) => graph.edge_weight(a as usize, b as usize),
            _ => None,
        };
        seg.push(match edge {
            Some(x) => x,
            None => paths::link_weight(graph, &w[0], &w[1])?,
        });
    }
    Ok(Curve { vertices: curve.vertices.clone(), params: curve.params.clone(), seg_lengths: seg })
}

/// Measures `ε_emp = max (L(γ|[tᵢ,tⱼ]) − λ·d(γ(tᵢ), γ(tⱼ)))⁺` over vertex
/// pairs, with `d` the graph distance. Beyond `pair_budget` pairs, rows of
/// evenly spaced source vertices are checked against every other vertex.
pub fn certify_geodesic(
    graph: &MetricGraph,
    curve: &Curve,
    lambda: f64,
    pair_budget: usize,
) -> Result<GeodesicCertificate> {
    Ok(certify_geodesic_multi(graph, curve, &[lambda], pair_budget)?.remove(0))
}

/// [`certify_geodesic`] for several λ, sharing the shortest-path runs.
pub fn certify_geodesic_multi(
    graph: &MetricGraph,
    curve: &Curve,
    lambdas: &[f64],
    pair_budget: usize,
) -> Result<Vec<GeodesicCertificate>> {
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0)) {
        return input(format!("lambda must be at least 1, got {l}"));
    }
    let n = curve.len();
    let mut certs: Vec<GeodesicCertificate> = lambdas
        .iter()
        .map(|&lambda| GeodesicCertificate { lambda, epsilon_emp: 0.0, pairs_checked: 0, worst_pair: (0.0, 0.0) })
        .collect();
    if n < 2 {
        return Ok(certs);
    }
    let ov = Overlay::new(graph, &curve.vertices)?;
    let ids: Vec<u32> = (0..n).map(|k| ov.id(k)).collect();
    let all_pairs = n * (n - 1) / 2;
    let sources: Vec<usize> = if all_pairs <= pair_budget.max(1) {
        (0..n - 1).collect()
    } else {
        let rows = (pair_budget / (n - 1)).clamp(1, n);
        (0..rows).map(|r| r * n / rows).collect()
    };
    let mut prefix = vec![0.0; n];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + curve.seg_lengths[i - 1];
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in &sources {
        let sp = ov.dijkstra(&[ids[i]], &ids);
        for j in 0..n {
            if j == i || !seen.insert((i.min(j), i.max(j))) {
                continue;
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let d = sp.dist[ids[j] as usize];
            if d.is_infinite() {
                return Err(KobError::Unreachable("curve vertices lie in different graph components".into()));
            }
            let len = prefix[hi] - prefix[lo];
            for cert in &mut certs {
                let mut excess = len - cert.lambda * d;
                if excess <= ROUNDING * (1.0 + len) {
                    excess = 0.0;
                }
                if excess > cert.epsilon_emp {
                    cert.epsilon_emp = excess;
                    cert.worst_pair = (curve.params[lo], curve.params[hi]);
                }
            }
        }
    }
    for cert in &mut certs {
        cert.pairs_checked = seen.len();
    }
    Ok(certs)
}

/// Upper bound for `k_Ω(A, B)`: least graph distance between nodes in `A`
/// and nodes in `B`; `+∞` when either side has no nodes or no path joins them.
pub fn set_distance(graph: &MetricGraph, a: impl Fn(&ComplexPoint) -> bool, b: impl Fn(&ComplexPoint) -> bool) -> f64 {
    let sources = graph.nodes_where(a);
    let targets = graph.nodes_where(b);
    if sources.is_empty() || targets.is_empty() {
        return f64::INFINITY;
    }
    let ov = Overlay::new(graph, &[]).expect("empty overlay");
    let sp = ov.dijkstra_first(&sources, &targets);
    targets.iter().map(|&t| sp.dist[t as usize]).fold(f64::INFINITY, f64::min)
}
