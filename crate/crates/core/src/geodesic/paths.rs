//! Shortest paths on a [`MetricGraph`] extended by off-lattice query points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::domain::DomainSpec;
use crate::error::{domain, KobError, Result};
use crate::geodesic::curve::Curve;
use crate::geodesic::graph::{segment_inside, MetricGraph};
use crate::metric::segment_length_adaptive;
use crate::point::ComplexPoint;

/// Relative tolerance of the adaptive quadrature on overlay links.
const LINK_TOL: f64 = 1e-6;
/// The same where κ comes from a disc search, whose upper bound jitters
/// between nearby points at about this level.
const SEARCH_LINK_TOL: f64 = 1e-4;

/// Path lengths this close (relatively) count as tied; ties go to the
/// Euclidean-shorter path. Product metrics have many geodesics and the
/// straightest one is the useful representative.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (dist, vertex)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A graph plus query points attached as extra vertices. Points on lattice
/// nodes reuse the node; others get links to nearby nodes whose segments
/// stay in Ω, weighted by adaptive-quadrature length upper bounds.
pub struct Overlay<'g> {
    graph: &'g MetricGraph,
    ids: Vec<u32>,
    extra_points: Vec<ComplexPoint>,
    extra_adj: Vec<Vec<(u32, f64)>>,
    node_links: BTreeMap<u32, Vec<(u32, f64)>>,
}

/// Single-source shortest-path tree.
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pred: Vec<u32>,
}

pub(crate) fn link_weight(graph: &MetricGraph, a: &ComplexPoint, b: &ComplexPoint) -> Result<f64> {
    // search-based quadrature is not exactly symmetric; fix the orientation
    let (a, b) = if a.to_reals() <= b.to_reals() { (a, b) } else { (b, a) };
    let cfg = &graph.params.search;
    let tol = |s: &DomainSpec| if s.is_model() { LINK_TOL } else { SEARCH_LINK_TOL };
    let w = segment_length_adaptive(&graph.spec, a, b, tol(&graph.spec), cfg)?;
    match graph.floor_spec() {
        Some(f) => Ok(w.max(segment_length_adaptive(f, a, b, tol(f), cfg)?)),
        None => Ok(w),
    }
}

impl<'g> Overlay<'g> {
    pub fn new(graph: &'g MetricGraph, points: &[ComplexPoint]) -> Result<Self> {
        let n = graph.node_count() as u32;
        let mut ov = Overlay {
            graph,
            ids: Vec::new(),
            extra_points: Vec::new(),
            extra_adj: Vec::new(),
            node_links: BTreeMap::new(),
        };
        let link_m = graph.params.m.max(8);
        for p in points {
            if p.dim() != graph.spec.dimension() {
                return Err(KobError::Input("query point dimension does not match the graph".into()));
            }
            if let Some(j) = graph.node_of(p) {
                ov.ids.push(j);
                continue;
            }
            if let Some(k) = ov.extra_points.iter().position(|q| q == p) {
                ov.ids.push(n + k as u32);
                continue;
            }
            if !graph.spec.is_inside(p) {
                return domain(format!("query point {p:?} is not in the domain"));
            }
            let id = n + ov.extra_points.len() as u32;
            let mut links = Vec::new();
            for ring in 1..=3 {
                for j in graph.nodes_near(p, ring) {
                    let q = graph.node(j as usize);
                    if segment_inside(&graph.spec, p, q, link_m) {
                        links.push((j, link_weight(graph, p, q)?));
                    }
                }
                if !links.is_empty() {
                    break;
                }
            }
            let reach = 2.0 * graph.h() * (p.dim() as f64 * 2.0).sqrt();
            for (k, q) in ov.extra_points.iter().enumerate() {
                if p.dist(q) <= reach && segment_inside(&graph.spec, p, q, link_m) {
                    let w = link_weight(graph, p, q)?;
                    links.push((n + k as u32, w));
                    ov.extra_adj[k].push((id, w));
                }
            }
            if links.is_empty() {
                return Err(KobError::Unreachable(format!("query point {p:?} has no admissible link to the lattice")));
            }
            for &(j, w) in &links {
                if j < n {
                    ov.node_links.entry(j).or_default().push((id, w));
                }
            }
            ov.extra_points.push(p.clone());
            ov.extra_adj.push(links);
            ov.ids.push(id);
        }
        Ok(ov)
    }

    /// Like [`Overlay::new`], with each straight chord between two query
    /// points that stays in Ω subdivided at spacing ≤ h and attached as well.
    /// Chord lengths are quadrature upper bounds, so distances stay upper
    /// bounds on k_Ω; ids `0..points.len()` refer to the query points.
    pub fn with_chords(graph: &'g MetricGraph, points: &[ComplexPoint]) -> Result<Self> {
        let m = graph.params.m.max(8);
        let mut all = points.to_vec();
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                if a == b || !segment_inside(&graph.spec, a, b, 4 * m) {
                    continue;
                }
                let pieces = (a.dist(b) / graph.h()).ceil() as usize;
                for k in 1..pieces {
                    all.push(a.lerp(b, k as f64 / pieces as f64));
                }
            }
        }
        Overlay::new(graph, &all)
    }

    pub fn graph(&self) -> &MetricGraph {
        self.graph
    }

    /// Vertex id of the `k`-th query point.
    pub fn id(&self, k: usize) -> u32 {
        self.ids[k]
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.node_count() + self.extra_points.len()
    }

    pub fn point(&self, v: u32) -> &ComplexPoint {
        let n = self.graph.node_count() as u32;
        if v < n {
            self.graph.node(v as usize)
        } else {
            &self.extra_points[(v - n) as usize]
        }
    }

    /// Largest link weight attached to any query point (the snapping term).
    pub fn max_link_weight(&self) -> f64 {
        self.extra_adj.iter().flatten().map(|&(_, w)| w).fold(0.0, f64::max)
    }

    fn for_each_neighbor(&self, v: u32, mut f: impl FnMut(u32, f64)) {
        let n = self.graph.node_count() as u32;
        if v < n {
            for (t, w) in self.graph.neighbors(v as usize) {
                f(t, w);
            }
            if let Some(extra) = self.node_links.get(&v) {
                for &(t, w) in extra {
                    f(t, w);
                }
            }
        } else {
            for &(t, w) in &self.extra_adj[(v - n) as usize] {
                f(t, w);
            }
        }
    }

    /// Dijkstra from `sources` (all at distance 0), stopping once every
    /// vertex in `targets` is settled (never, if `targets` is empty).
    pub fn dijkstra(&self, sources: &[u32], targets: &[u32]) -> ShortestPaths {
        self.run(sources, targets, false)
    }

    /// Multi-source Dijkstra stopping at the first settled target.
    pub fn dijkstra_first(&self, sources: &[u32], targets: &[u32]) -> ShortestPaths {
        self.run(sources, targets, true)
    }

    fn run(&self, sources: &[u32], targets: &[u32], stop_first: bool) -> ShortestPaths {
        let total = self.vertex_count();
        let mut dist = vec![f64::INFINITY; total];
        let mut eucl = vec![f64::INFINITY; total];
        let mut pred = vec![u32::MAX; total];
        let mut done = vec![false; total];
        let mut want: Vec<bool> = vec![false; total];
        let mut remaining = 0usize;
        for &t in targets {
            if !want[t as usize] {
                want[t as usize] = true;
                remaining += 1;
            }
        }
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = 0.0;
            eucl[s as usize] = 0.0;
            heap.push(Entry { dist: 0.0, vertex: s });
        }
        while let Some(Entry { vertex: v, .. }) = heap.pop() {
            if done[v as usize] {
                continue;
            }
            done[v as usize] = true;
            // a tie may have nudged dist[v] above the popped key
            let d = dist[v as usize];
            if want[v as usize] {
                remaining -= 1;
                if remaining == 0 || stop_first {
                    break;
                }
            }
            let pv = self.point(v);
            let ev = eucl[v as usize];
            self.for_each_neighbor(v, |t, w| {
                let ti = t as usize;
                if done[ti] {
                    return;
                }
                let nd = d + w;
                let tol = TIE_TOL * (1.0 + nd);
                let better = nd < dist[ti] - tol
                    || (nd <= dist[ti] + tol && {
                        let ne = ev + pv.dist(self.point(t));
                        ne < eucl[ti] || (ne == eucl[ti] && nd < dist[ti])
                    });
                if better {
                    dist[ti] = nd;
                    eucl[ti] = ev + pv.dist(self.point(t));
                    pred[ti] = v;
                    heap.push(Entry { dist: nd, vertex: t });
                }
            });
        }
        ShortestPaths { dist, pred }
    }

    pub fn distance(&self, a: u32, b: u32) -> Result<f64> {
        let d = self.dijkstra(&[a], &[b]).dist[b as usize];
        if d.is_infinite() {
            return Err(KobError::Unreachable(format!(
                "{:?} and {:?} lie in different components of the graph",
                self.point(a),
                self.point(b)
            )));
        }
        Ok(d)
    }

    /// Shortest path from `a` to `b` as a curve with edge weights as segment lengths.
    pub fn path(&self, a: u32, b: u32) -> Result<Curve> {
        let sp = self.dijkstra(&[a], &[b]);
        self.curve_to(&sp, b)
    }

    /// Curve from the tree root to `b`.
    pub fn curve_to(&self, sp: &ShortestPaths, b: u32) -> Result<Curve> {
        if sp.dist[b as usize].is_infinite() {
            return Err(KobError::Unreachable(format!("{:?} is not reachable", self.point(b))));
        }
        let mut chain = vec![b];
        let mut v = b;
        while sp.pred[v as usize] != u32::MAX {
            v = sp.pred[v as usize];
            chain.push(v);
        }
        chain.reverse();
        let vertices: Vec<ComplexPoint> = chain.iter().map(|&v| self.point(v).clone()).collect();
        let seg_lengths: Vec<f64> = chain.windows(2).map(|w| sp.dist[w[1] as usize] - sp.dist[w[0] as usize]).collect();
        Ok(Curve::from_parts(vertices, seg_lengths))
    }
}

impl ShortestPaths {
    pub fn reached(&self, v: u32) -> bool {
        self.dist[v as usize].is_finite()
    }
}
