//! Lattice graphs whose edge weights are Kobayashi-length upper bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{intersect_with_ball, scan_lattice, DomainSpec, Lattice, Neighborhood};
use crate::error::{input, KobError, Result};
use crate::metric::{segment_length, SearchConfig};
use crate::point::ComplexPoint;

/// Default cap on lattice nodes.
pub const NODE_BUDGET: usize = 300_000;

/// Discretization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub h: f64,
    pub box_radius: f64,
    pub margin: f64,
    /// Midpoint sub-segments per edge.
    pub m: usize,
    /// `None` lifts the node cap.
    pub node_budget: Option<usize>,
    pub search: SearchConfig,
}

impl GraphParams {
    pub fn new(h: f64, box_radius: f64, margin: f64, m: usize) -> Self {
        Self { h, box_radius, margin, m, node_budget: Some(NODE_BUDGET), search: SearchConfig::fast() }
    }

    pub fn unlimited(mut self) -> Self {
        self.node_budget = None;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub node_count: usize,
    pub edge_count: usize,
    pub h: f64,
    pub m: usize,
    /// Relative change of sampled edge weights when `m` doubles.
    pub slack_bound: f64,
}

/// Weighted graph on the lattice points of Ω, stored as a symmetric CSR.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    pub(crate) spec: DomainSpec,
    /// Domain whose lengths floor every weight (local graphs only).
    pub(crate) floor_spec: Option<DomainSpec>,
    pub(crate) params: GraphParams,
    pub(crate) lattice: Lattice,
    /// Dense map from box position to node id (`u32::MAX` when absent).
    lookup: Vec<u32>,
    row_start: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    slack_bound: f64,
}

pub(crate) const NONE: u32 = u32::MAX;

/// Grid offsets `o ∈ {−1, 0, 1}^d` whose first nonzero entry is positive.
fn forward_offsets(dims: usize) -> Vec<Vec<i32>> {
    let total = 3usize.pow(dims as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let o: Vec<i32> = (0..dims)
            .map(|_| {
                let d = (c % 3) as i32 - 1;
                c /= 3;
                d
            })
            .rev()
            .collect();
        if o.iter().find(|&&d| d != 0).is_some_and(|&d| d > 0) {
            out.push(o);
        }
    }
    out
}

/// Whether every quadrature midpoint and the segment midpoint lie in Ω.
pub(crate) fn segment_inside(spec: &DomainSpec, a: &ComplexPoint, b: &ComplexPoint, m: usize) -> bool {
    spec.is_inside(&a.lerp(b, 0.5)) && (0..m).all(|i| spec.is_inside(&a.lerp(b, (i as f64 + 0.5) / m as f64)))
}

/// Upper bound for the Kobayashi length of `[a, b]`, floored by the floor domain.
pub(crate) fn edge_weight(
    spec: &DomainSpec,
    floor: Option<&DomainSpec>,
    a: &ComplexPoint,
    b: &ComplexPoint,
    m: usize,
    cfg: &SearchConfig,
) -> Result<f64> {
    let w = segment_length(spec, a, b, m, cfg)?.upper;
    match floor {
        Some(f) => Ok(w.max(segment_length(f, a, b, m, cfg)?.upper)),
        None => Ok(w),
    }
}

fn validate(params: &GraphParams) -> Result<()> {
    if params.m == 0 {
        return input("grid.m must be at least 1");
    }
    if !(params.h > 0.0 && params.h.is_finite()) {
        return input(format!("grid.h must be positive, got {}", params.h));
    }
    Ok(())
}

fn build(spec: DomainSpec, floor_spec: Option<DomainSpec>, params: &GraphParams) -> Result<MetricGraph> {
    validate(params)?;
    let lattice = scan_lattice(&spec, params.h, params.margin, params.box_radius)?;
    let n = lattice.points.len();
    if let Some(limit) = params.node_budget {
        if n > limit {
            return Err(KobError::GridBudget { nodes: n, limit });
        }
    }
    let side = lattice.side();
    let mut lookup = vec![NONE; side.pow(lattice.real_dims as u32)];
    for (i, idx) in lattice.indices.iter().enumerate() {
        lookup[lattice.linear(idx).expect("scanned index lies in the box")] = i as u32;
    }
    let offsets = forward_offsets(lattice.real_dims);
    let m = params.m;
    let cfg = &params.search;
    let floor = floor_spec.as_ref();
    let forward: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(u32, f64)>> {
            let idx = &lattice.indices[i];
            let a = &lattice.points[i];
            let mut out = Vec::new();
            let mut nb = idx.clone();
            for o in &offsets {
                for ((t, k), d) in nb.iter_mut().zip(idx).zip(o) {
                    *t = k + d;
                }
                let Some(pos) = lattice.linear(&nb) else { continue };
                let j = lookup[pos];
                if j == NONE {
                    continue;
                }
                let b = &lattice.points[j as usize];
                if !segment_inside(&spec, a, b, m) {
                    continue;
                }
                out.push((j, edge_weight(&spec, floor, a, b, m, cfg)?));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut degree = vec![0usize; n];
    for (i, row) in forward.iter().enumerate() {
        degree[i] += row.len();
        for &(j, _) in row {
            degree[j as usize] += 1;
        }
    }
    let mut row_start = vec![0usize; n + 1];
    for i in 0..n {
        row_start[i + 1] = row_start[i] + degree[i];
    }
    let mut fill = row_start[..n].to_vec();
    let mut targets = vec![0u32; row_start[n]];
    let mut weights = vec![0.0; row_start[n]];
    for (i, row) in forward.iter().enumerate() {
        for &(j, w) in row {
            targets[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
            let j = j as usize;
            targets[fill[j]] = i as u32;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
    }
    // rows sorted by target keep traversal order independent of construction
    for i in 0..n {
        let (s, e) = (row_start[i], row_start[i + 1]);
        let mut row: Vec<(u32, f64)> = targets[s..e].iter().copied().zip(weights[s..e].iter().copied()).collect();
        row.sort_by_key(|&(t, _)| t);
        for (k, (t, w)) in row.into_iter().enumerate() {
            targets[s + k] = t;
            weights[s + k] = w;
        }
    }

    let slack_bound = sample_slack(&spec, floor, &lattice, &forward, m, cfg)?;
    Ok(MetricGraph {
        spec,
        floor_spec,
        params: params.clone(),
        lattice,
        lookup,
        row_start,
        targets,
        weights,
        slack_bound,
    })
}

fn sample_slack(
    spec: &DomainSpec,
    floor: Option<&DomainSpec>,
    lattice: &Lattice,
    forward: &[Vec<(u32, f64)>],
    m: usize,
    cfg: &SearchConfig,
) -> Result<f64> {
    let edges: Vec<(usize, u32, f64)> =
        forward.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, w)| (i, j, w))).collect();
    if edges.is_empty() {
        return Ok(0.0);
    }
    let stride = (edges.len() / 64).max(1);
    let mut worst = 0.0f64;
    for &(i, j, w) in edges.iter().step_by(stride) {
        let (a, b) = (&lattice.points[i], &lattice.points[j as usize]);
        let fine = edge_weight(spec, floor, a, b, 2 * m, cfg)?;
        worst = worst.max((w - fine).abs() / fine);
    }
    Ok(worst)
}

/// Graph on the lattice points of Ω with Chebyshev-1 adjacency.
pub fn build_graph(spec: &DomainSpec, params: &GraphParams) -> Result<MetricGraph> {
    build(spec.clone(), None, params)
}

/// Graph on the lattice points of Ω ∩ B with weights
/// `max(κ_{Ω∩B}-length, κ_Ω-length)` (both upper bounds), so that it is an
/// edge-subgraph of [`build_graph`]`(Ω)` dominating it weight by weight.
pub fn build_local_graph(spec: &DomainSpec, nb: &Neighborhood, params: &GraphParams) -> Result<MetricGraph> {
    build(intersect_with_ball(spec, nb)?, Some(spec.clone()), params)
}

impl MetricGraph {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }

    pub fn node_count(&self) -> usize {
        self.lattice.points.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> &[ComplexPoint] {
        &self.lattice.points
    }

    pub fn node(&self, i: usize) -> &ComplexPoint {
        &self.lattice.points[i]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let (s, e) = (self.row_start[i], self.row_start[i + 1]);
        self.targets[s..e].iter().copied().zip(self.weights[s..e].iter().copied())
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbors(i).find(|&(t, _)| t as usize == j).map(|(_, w)| w)
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            node_count: self.node_count(),
            edge_count: self.edge_count(),
            h: self.params.h,
            m: self.params.m,
            slack_bound: self.slack_bound,
        }
    }

    /// Node at lattice position `idx`, if kept.
    pub(crate) fn node_at(&self, idx: &[i32]) -> Option<u32> {
        let j = self.lookup[self.lattice.linear(idx)?];
        (j != NONE).then_some(j)
    }

    /// Node id when `p` sits on a kept lattice point.
    pub fn node_of(&self, p: &ComplexPoint) -> Option<u32> {
        if p.dim() != self.spec.dimension() {
            return None;
        }
        let h = self.params.h;
        let mut idx = Vec::with_capacity(self.lattice.real_dims);
        for x in p.to_reals() {
            let k = (x / h).round();
            if (x - k * h).abs() > 1e-9 * h {
                return None;
            }
            idx.push(k as i32);
        }
        self.node_at(&idx)
    }

    /// Nearest kept node within two lattice cells of `p` (ties to the smaller id).
    pub fn nearest_node(&self, p: &ComplexPoint) -> Option<u32> {
        if p.dim() != self.spec.dimension() {
            return None;
        }
        self.nodes_near(p, 2).into_iter().min_by(|&a, &b| {
            let (da, db) = (self.node(a as usize).dist(p), self.node(b as usize).dist(p));
            da.total_cmp(&db).then(a.cmp(&b))
        })
    }

    /// Ids of nodes satisfying `pred`, ascending.
    pub fn nodes_where(&self, pred: impl Fn(&ComplexPoint) -> bool) -> Vec<u32> {
        (0..self.node_count() as u32).filter(|&i| pred(self.node(i as usize))).collect()
    }

    /// Nodes whose lattice index lies within `ring` cells of `p` on every axis.
    pub(crate) fn nodes_near(&self, p: &ComplexPoint, ring: i32) -> Vec<u32> {
        let h = self.params.h;
        let reals = p.to_reals();
        let lo: Vec<i32> = reals.iter().map(|x| (x / h).floor() as i32 - (ring - 1)).collect();
        let width = 2 * ring as usize;
        let dims = reals.len();
        let mut out = Vec::new();
        let mut idx = vec![0i32; dims];
        for code in 0..width.pow(dims as u32) {
            let mut c = code;
            for d in (0..dims).rev() {
                idx[d] = lo[d] + (c % width) as i32;
                c /= width;
            }
            if let Some(j) = self.node_at(&idx) {
                out.push(j);
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn floor_spec(&self) -> Option<&DomainSpec> {
        self.floor_spec.as_ref()
    }
}
