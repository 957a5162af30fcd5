//! Dispatch from a validated plan to the suite operations.

use std::sync::{Arc, Mutex};

use koblab_core::{
    additive_gap_survey, boundary_approach, build_graph, build_local_graph, certify_geodesic_multi, check_royden_lemma,
    check_sarkar_estimate, distance_estimate, distance_oracle, format, geodesic_transfer_check, germ_compare,
    graph_distance, gromov_property_probe, hyperbolicity_probe, length_localization_survey, local_global_compare,
    multiplicative_ratio_survey, pair_visibility_probe, pair_visibility_sweep, royden_estimate, royden_oracle,
    shortest_curve, shortest_curve_with_chords, visibility_probe, weak_gromov_probe, ComplexPoint, Curve, CurveOrigin,
    DomainDoc, DomainSpec, ExperimentReport, GraphParams, GraphSummary, KobError, MetricEstimate, MetricGraph,
    Neighborhood, ProbeParams, SearchConfig, SequencePair, Verdict, VisibilityOutcome, VisibilityVerdict, RATIO_FLOOR,
};
use serde::Serialize;

use crate::plan::{Experiment, ExperimentPlan};
use crate::CliError;

/// Vertex pairs checked per geodesic certificate before row sampling.
pub const PAIR_BUDGET: usize = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct LabeledGraph {
    pub label: String,
    pub summary: GraphSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledVerdict {
    pub label: String,
    #[serde(flatten)]
    pub verdict: VisibilityVerdict,
}

#[derive(Clone, Debug)]
pub struct LabeledCurve {
    pub label: String,
    pub curve: Curve,
}

/// Everything one plan produces, in emission order.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub plan: ExperimentPlan,
    pub graphs: Vec<LabeledGraph>,
    pub reports: Vec<ExperimentReport>,
    pub visibility: Vec<LabeledVerdict>,
    pub curves: Vec<LabeledCurve>,
}

impl ReportBundle {
    fn new(plan: &ExperimentPlan) -> Self {
        Self { plan: plan.clone(), graphs: Vec::new(), reports: Vec::new(), visibility: Vec::new(), curves: Vec::new() }
    }

    pub fn violated(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::Violated)
    }

    pub fn report(&self, name: &str) -> Option<&ExperimentReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    fn graph(&mut self, label: &str, g: &MetricGraph) {
        self.graphs.push(LabeledGraph { label: label.to_string(), summary: g.summary() });
    }

    fn verdict(&mut self, label: &str, v: VisibilityVerdict, dump: bool) {
        if dump {
            for (k, c) in v.curves.iter().enumerate() {
                self.curves.push(LabeledCurve { label: format!("{label}-curve-{k}"), curve: c.clone() });
            }
        }
        self.visibility.push(LabeledVerdict { label: label.to_string(), verdict: v });
    }
}

/// Graphs shared between plans run in one process.
#[derive(Default)]
pub struct GraphCache {
    graphs: Mutex<Vec<(String, Arc<MetricGraph>)>>,
}

impl GraphCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(
        &self,
        spec: &DomainSpec,
        local: Option<&Neighborhood>,
        params: &GraphParams,
    ) -> koblab_core::Result<Arc<MetricGraph>> {
        let key = serde_json::to_string(&(DomainDoc::from(spec), local, params)).expect("serializable key");
        if let Some((_, g)) = self.graphs.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(g.clone());
        }
        let g = Arc::new(match local {
            Some(nb) => build_local_graph(spec, nb, params)?,
            None => build_graph(spec, params)?,
        });
        self.graphs.lock().unwrap().push((key, g.clone()));
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Lift the lattice node cap.
    pub override_grid_budget: bool,
}

pub fn run_plan(plan: &ExperimentPlan, opts: RunOptions) -> Result<ReportBundle, CliError> {
    run_plan_with(plan, opts, &GraphCache::new())
}

fn suite<T>(what: &str, r: koblab_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Suite { context: what.to_string(), source })
}

struct Ctx<'a> {
    plan: &'a ExperimentPlan,
    opts: RunOptions,
    cache: &'a GraphCache,
    spec: DomainSpec,
}

impl Ctx<'_> {
    fn params_for(&self, h: f64, search: SearchConfig) -> GraphParams {
        let g = &self.plan.grid;
        let mut params = GraphParams::new(h, g.box_radius.unwrap_or(1.0), g.margin.unwrap_or(0.0), self.plan.m());
        params.search = search.with_seed(self.plan.seed);
        if self.opts.override_grid_budget {
            params = params.unlimited();
        }
        params
    }

    fn params(&self) -> GraphParams {
        self.params_for(self.plan.h(), SearchConfig::fast())
    }

    fn full(&self, bundle: &mut ReportBundle) -> Result<Arc<MetricGraph>, CliError> {
        let g = suite("building the graph", self.cache.get(&self.spec, None, &self.params()))?;
        bundle.graph("full", &g);
        Ok(g)
    }

    fn local(&self, bundle: &mut ReportBundle, u: &Neighborhood) -> Result<Arc<MetricGraph>, CliError> {
        let g = suite("building the local graph", self.cache.get(&self.spec, Some(u), &self.params()))?;
        bundle.graph("local", &g);
        Ok(g)
    }

    fn refined(&self, bundle: &mut ReportBundle) -> Result<Option<Arc<MetricGraph>>, CliError> {
        if !self.plan.grid.refine {
            return Ok(None);
        }
        let params = self.params_for(0.5 * self.plan.h(), SearchConfig::fast());
        let g = suite("building the refined graph", self.cache.get(&self.spec, None, &params))?;
        bundle.graph("refined", &g);
        Ok(Some(g))
    }

    fn cfg(&self) -> SearchConfig {
        SearchConfig::default().with_seed(self.plan.seed)
    }

    fn p(&self) -> ComplexPoint {
        self.plan.points.p.clone().expect("validated plan")
    }

    fn ball(&self, r: Option<f64>) -> Result<Neighborhood, CliError> {
        suite("neighbourhood", Neighborhood::new(self.p(), r.expect("validated plan")))
    }

    fn o(&self) -> ComplexPoint {
        self.plan.points.o.clone().unwrap_or_else(|| ComplexPoint::zeros(self.spec.dimension()))
    }

    fn probe_params(&self) -> ProbeParams {
        ProbeParams {
            lambdas: self.plan.lambda.clone(),
            ladder: self.plan.ladder.clone(),
            pair_budget: PAIR_BUDGET,
            box_radius: self.plan.grid.box_radius.unwrap_or(f64::INFINITY),
        }
    }

    /// Straight approach `x + rate^k·t0·inward`, inward defaulting toward the origin.
    fn approach(
        &self,
        spec: &DomainSpec,
        x: &ComplexPoint,
        inward: Option<&ComplexPoint>,
        what: &str,
    ) -> Result<Vec<ComplexPoint>, CliError> {
        let s = &self.plan.sequences;
        let dir = match inward {
            Some(d) => d.clone(),
            None if !x.is_zero() => x.scale(-1.0),
            None => {
                return Err(CliError::Parse {
                    path: format!("points.inward_{what}"),
                    message: "the boundary point is the origin; give an approach direction".into(),
                })
            }
        };
        suite(
            &format!("approach to {what}"),
            boundary_approach(spec, x, &dir, self.plan.count(), s.rate.unwrap_or(0.5), s.t0.unwrap_or(0.4)),
        )
    }

    /// `z_n → p`, and `w_n` from the explicit list, toward `q`, or fixed at `points.w`.
    fn sequences(&self, spec: &DomainSpec, q: Option<&ComplexPoint>) -> Result<SequencePair, CliError> {
        let pts = &self.plan.points;
        let p = self.p();
        let (z, w) = match (&self.plan.sequences.z, &self.plan.sequences.w) {
            (Some(z), Some(w)) => (z.clone(), w.clone()),
            _ => {
                let z = self.approach(spec, &p, pts.inward_p.as_ref(), "p")?;
                let w = match (q, &pts.w) {
                    (Some(q), _) => self.approach(spec, q, pts.inward_q.as_ref(), "q")?,
                    (None, Some(w)) => vec![w.clone(); z.len()],
                    (None, None) => {
                        return Err(CliError::Parse { path: "points.w".into(), message: "no second sequence".into() })
                    }
                };
                (z, w)
            }
        };
        suite("sequences", SequencePair::new(spec, z, w, p, q.cloned()))
    }
}

pub fn run_plan_with(plan: &ExperimentPlan, opts: RunOptions, cache: &GraphCache) -> Result<ReportBundle, CliError> {
    let mut domains = plan.domains()?;
    let spec = domains.remove(0);
    let other = domains.pop();
    let cx = Ctx { plan, opts, cache, spec };
    let mut b = ReportBundle::new(plan);
    let pts = &plan.points;
    let exp = plan.experiment;
    let what = exp.as_str();
    let spec = &cx.spec;
    match exp {
        Experiment::Metric => {
            let (z, v) = (pts.z.clone().unwrap(), pts.v.clone().unwrap());
            let est = suite(what, royden_estimate(spec, &z, &v, &cx.cfg()))?;
            let oracle = royden_oracle(spec, &z, &v).ok();
            b.reports.push(estimate_report("metric", "kappa", &est, oracle, &[("z", &z), ("v", &v)]));
        }
        Experiment::Distance => {
            let (z, w) = (pts.z.clone().unwrap(), pts.w.clone().unwrap());
            let g = cx.full(&mut b)?;
            let est = suite(what, distance_estimate(spec, &g, &z, &w, &cx.cfg()))?;
            let oracle = distance_oracle(spec, &z, &w).ok();
            let mut rep = estimate_report("distance", "distance", &est, oracle, &[("z", &z), ("w", &w)]);
            match graph_distance(&g, &z, &w) {
                Ok(d) => {
                    rep.stat("graph_distance_upper", d);
                    if let Some(k) = oracle {
                        rep.stat("graph_relative_error", (d - k).abs() / k.max(f64::MIN_POSITIVE));
                    }
                }
                Err(KobError::Unreachable(msg)) => {
                    rep.note(format!("graph: {msg}"));
                }
                Err(e) => return suite(what, Err(e)),
            }
            b.reports.push(rep);
        }
        Experiment::Geodesic => {
            let (z, w) = (pts.z.clone().unwrap(), pts.w.clone().unwrap());
            let g = cx.full(&mut b)?;
            let curve = suite(what, shortest_curve_with_chords(&g, &z, &w))?;
            let certs = suite(what, certify_geodesic_multi(&g, &curve, &plan.lambda, PAIR_BUDGET))?;
            let mut rep =
                ExperimentReport::new("geodesic", &["lambda", "epsilon_emp", "pairs_checked", "worst_t1", "worst_t2"]);
            rep.param("z", &z).param("w", &w).param("h", g.h()).param("vertices", curve.len());
            for c in &certs {
                rep.records.push(vec![
                    c.lambda.into(),
                    c.epsilon_emp.into(),
                    c.pairs_checked.into(),
                    c.worst_pair.0.into(),
                    c.worst_pair.1.into(),
                ]);
            }
            rep.samples = certs.len();
            rep.stat("length_upper", curve.total_length());
            if let Ok(k) = distance_oracle(spec, &z, &w) {
                rep.stat("distance_oracle", k);
            }
            let worst = certs.iter().map(|c| c.epsilon_emp).fold(0.0, f64::max);
            rep.stat("epsilon_max", worst);
            rep.verdict = if worst == 0.0 { Verdict::Holds } else { Verdict::HoldsWithSlack };
            b.reports.push(rep);
            b.curves.push(LabeledCurve { label: "geodesic".into(), curve });
        }
        Experiment::Hyperbolicity => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let g = if spec.is_bounded() { Some(cx.full(&mut b)?) } else { None };
            let escape = match (&plan.sequences.z, &plan.sequences.w) {
                (Some(z), Some(w)) => {
                    Some(suite("sequences", SequencePair::new(spec, z.clone(), w.clone(), cx.p(), None))?)
                }
                _ => None,
            };
            let rep = hyperbolicity_probe(spec, &cx.p(), &u, &v, g.as_deref(), escape.as_ref(), &cx.cfg());
            b.reports.push(suite(what, rep)?);
        }
        Experiment::Royden => {
            let d = cx.ball(plan.radii.u)?;
            let cfg = SearchConfig::fast().with_seed(plan.seed);
            b.reports.push(suite(what, check_royden_lemma(spec, &d, plan.samples(), None, plan.seed, &cfg))?);
        }
        Experiment::Sarkar => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let cfg = SearchConfig::fast().with_seed(plan.seed);
            let rep = check_sarkar_estimate(spec, &cx.p(), &u, &v, plan.samples(), None, plan.seed, &cfg);
            b.reports.push(suite(what, rep)?);
        }
        Experiment::Additive | Experiment::Multiplicative => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let (full, local) = (cx.full(&mut b)?, cx.local(&mut b, &u)?);
            let rep = if exp == Experiment::Additive {
                additive_gap_survey(spec, &cx.p(), &u, &v, plan.samples(), &full, &local, plan.seed)
            } else {
                multiplicative_ratio_survey(
                    spec,
                    &cx.p(),
                    &u,
                    &v,
                    plan.samples(),
                    &full,
                    &local,
                    RATIO_FLOOR,
                    plan.seed,
                )
            };
            b.reports.push(suite(what, rep)?);
        }
        Experiment::LengthLocalization => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let full = cx.full(&mut b)?;
            let curves = survey_curves(&full, &v, plan.samples())?;
            let rep = length_localization_survey(spec, &cx.p(), &u, &v, &curves, plan.m(), plan.seed, &cx.cfg());
            b.reports.push(suite(what, rep)?);
        }
        Experiment::Gromov => {
            let g = cx.full(&mut b)?;
            let pairs = cx.sequences(spec, pts.q.as_ref())?;
            b.reports.push(suite(what, gromov_property_probe(&g, &pairs, &cx.o()))?);
        }
        Experiment::WeakGromov => {
            let g = cx.full(&mut b)?;
            let targets: Vec<ComplexPoint> =
                if pts.targets.is_empty() { pts.q.iter().cloned().collect() } else { pts.targets.clone() };
            let pairs = targets.iter().map(|q| cx.sequences(spec, Some(q))).collect::<Result<Vec<_>, _>>()?;
            b.reports.push(suite(what, weak_gromov_probe(&g, &cx.o(), &pairs))?);
        }
        Experiment::Visibility => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let g = cx.full(&mut b)?;
            let fine = cx.refined(&mut b)?;
            let pairs = cx.sequences(spec, pts.q.as_ref())?;
            let out = suite(what, visibility_probe(&g, &u, &v, &pairs, &cx.probe_params(), fine.as_deref()))?;
            b.verdict("visibility", out, true);
        }
        Experiment::PairVisibility => {
            let g = cx.full(&mut b)?;
            if pts.targets.is_empty() {
                let fine = cx.refined(&mut b)?;
                let pairs = cx.sequences(spec, pts.q.as_ref())?;
                let out = suite(what, pair_visibility_probe(&g, &pairs, &cx.probe_params(), fine.as_deref()))?;
                b.verdict("pair", out, true);
            } else {
                let mesh = pts.targets.iter().map(|q| cx.sequences(spec, Some(q))).collect::<Result<Vec<_>, _>>()?;
                let (outcome, verdicts) = suite(what, pair_visibility_sweep(&g, &mesh, &cx.probe_params()))?;
                let mut rep = ExperimentReport::new("pair-visibility-sweep", &["target", "q", "outcome"]);
                for (k, (q, v)) in pts.targets.iter().zip(&verdicts).enumerate() {
                    rep.records.push(vec![k.into(), format::point(q).into(), v.verdict.as_str().into()]);
                }
                rep.samples = verdicts.len();
                rep.param("outcome", outcome);
                rep.verdict = outcome_verdict(outcome);
                b.reports.push(rep);
                for (k, v) in verdicts.into_iter().enumerate() {
                    b.verdict(&format!("target-{k}"), v, false);
                }
            }
        }
        Experiment::Transfer => {
            let (u, v) = (cx.ball(plan.radii.u)?, cx.ball(plan.radii.v)?);
            let (full, local) = (cx.full(&mut b)?, cx.local(&mut b, &u)?);
            let (z, w) = (pts.z.clone().unwrap(), pts.w.clone().unwrap());
            let survey =
                suite(what, additive_gap_survey(spec, &cx.p(), &u, &v, plan.samples(), &full, &local, plan.seed))?;
            let allowance = survey.statistic("sup_gap").unwrap_or(0.0).max(0.0);
            b.reports.push(survey);
            let lambda = plan.lambda[0];
            for (origin, g, label) in [(CurveOrigin::Local, &local, "local"), (CurveOrigin::Full, &full, "full")] {
                let curve = suite(what, shortest_curve(g, &z, &w))?;
                if curve.vertices.iter().any(|x| !v.contains(x)) {
                    let mut rep = ExperimentReport::new("transfer", &[]);
                    rep.param("origin", origin).note(format!("the {label} geodesic leaves V; no transfer check"));
                    b.reports.push(rep);
                    continue;
                }
                let rep = geodesic_transfer_check(&v, &curve, origin, lambda, &full, &local, allowance, PAIR_BUDGET);
                b.reports.push(suite(what, rep)?);
                b.curves.push(LabeledCurve { label: format!("transfer-{label}"), curve });
            }
        }
        Experiment::LocalGlobal => {
            let u = cx.ball(plan.radii.u)?;
            let (full, local) = (cx.full(&mut b)?, cx.local(&mut b, &u)?);
            let pairs = cx.sequences(spec, pts.q.as_ref())?;
            let rep = local_global_compare(&cx.p(), &u, &full, &local, &pairs, &cx.probe_params());
            b.reports.push(suite(what, rep)?);
        }
        Experiment::Germ => {
            let other = other.expect("validated germ plan");
            let u = cx.ball(plan.radii.u)?;
            let ga = cx.full(&mut b)?;
            let params_b = cx.params_for(plan.h(), SearchConfig::affine_only());
            let gb = suite("building the second graph", cache.get(&other, None, &params_b))?;
            b.graph("b", &gb);
            let pairs_a = cx.sequences(spec, pts.q.as_ref())?;
            let pairs_b = cx.sequences(&other, pts.q.as_ref())?;
            let rep = germ_compare(&ga, &gb, &cx.p(), &u, &pairs_a, &pairs_b, &cx.probe_params(), plan.seed);
            b.reports.push(suite(what, rep)?);
        }
    }
    Ok(b)
}

fn outcome_verdict(o: VisibilityOutcome) -> Verdict {
    match o {
        VisibilityOutcome::Inconclusive => Verdict::Inconclusive,
        _ => Verdict::Holds,
    }
}

/// A bracket with its oracle check; the verdict is violated only if the
/// oracle falls outside `[lower, upper]`.
fn estimate_report(
    name: &str,
    quantity: &str,
    est: &MetricEstimate,
    oracle: Option<f64>,
    points: &[(&str, &ComplexPoint)],
) -> ExperimentReport {
    let mut rep = ExperimentReport::new(name, &["lower", "upper", "lower_method", "upper_method", "grid_slack"]);
    for (k, x) in points {
        rep.param(k, x);
    }
    rep.records.push(vec![
        est.lower.into(),
        est.upper.into(),
        est.lower_method.as_str().into(),
        est.upper_method.as_str().into(),
        est.grid_slack.into(),
    ]);
    rep.samples = 1;
    rep.stat(&format!("{quantity}_lower"), est.lower).stat(&format!("{quantity}_upper"), est.upper);
    rep.slack_budget = est.grid_slack;
    let tol = 1e-9;
    rep.verdict = match oracle {
        Some(k) => {
            rep.stat(&format!("{quantity}_oracle"), k);
            if est.contains(k, tol * (1.0 + k)) {
                Verdict::Holds
            } else {
                rep.note("the oracle value lies outside the bracket");
                Verdict::Violated
            }
        }
        None if est.lower <= est.upper * (1.0 + tol) => Verdict::Holds,
        None => Verdict::Violated,
    };
    rep
}

/// Graph geodesics between lattice nodes of `V`, pairing node `i` with the
/// node half the list away.
fn survey_curves(full: &MetricGraph, v: &Neighborhood, count: usize) -> Result<Vec<Curve>, CliError> {
    let nodes = full.nodes_where(|x| v.contains(x));
    let n = nodes.len();
    let mut curves = Vec::new();
    if n < 2 {
        return Ok(curves);
    }
    for k in 0..count.min(n) {
        let i = k * n / count.min(n);
        let j = (i + n / 2) % n;
        if i == j {
            continue;
        }
        let (a, b) = (full.node(nodes[i] as usize).clone(), full.node(nodes[j] as usize).clone());
        match shortest_curve(full, &a, &b) {
            Ok(c) => curves.push(c),
            Err(KobError::Unreachable(_)) => {}
            Err(e) => return suite("length-localization curves", Err(e)),
        }
    }
    Ok(curves)
}
