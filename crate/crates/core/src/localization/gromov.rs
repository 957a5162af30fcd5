use super::{check_boundary, diverges, SLACK_REL};
use crate::error::{input, KobError, Result};
use crate::format;
use crate::geodesic::{MetricGraph, Overlay};
use crate::point::ComplexPoint;
use crate::report::{ExperimentReport, Verdict};
use crate::visibility::SequencePair;

/// `k(z,o)`, `k(w,o)`, `k(z,w)` in the graph metric augmented by the chords
/// between the three points, which resolves points closer to ∂Ω than h.
fn triangle(graph: &MetricGraph, z: &ComplexPoint, w: &ComplexPoint, o: &ComplexPoint) -> Result<[f64; 3]> {
    let ov = Overlay::with_chords(graph, &[z.clone(), w.clone(), o.clone()])?;
    let (iz, iw, io) = (ov.id(0), ov.id(1), ov.id(2));
    let from_o = ov.dijkstra(&[io], &[iz, iw]);
    let zw = ov.distance(iz, iw)?;
    let (zo, wo) = (from_o.dist[iz as usize], from_o.dist[iw as usize]);
    if !zo.is_finite() || !wo.is_finite() {
        return Err(KobError::Unreachable("the base point lies in another graph component".into()));
    }
    Ok([zo, wo, zw])
}

fn product_of(t: [f64; 3]) -> f64 {
    // the graph metric satisfies the triangle inequality up to the
    // tie-breaking tolerance; clip that rounding at zero
    (0.5 * (t[0] + t[1] - t[2])).max(0.0)
}

/// `(z|w)_o = ½(k(z,o) + k(w,o) − k(z,w))` with graph distances.
pub fn gromov_product(graph: &MetricGraph, z: &ComplexPoint, w: &ComplexPoint, o: &ComplexPoint) -> Result<f64> {
    if z == w && w == o {
        return Ok(0.0);
    }
    Ok(product_of(triangle(graph, z, w, o)?))
}

/// `(z_n|w_n)_o` along sequences toward `p ≠ q`; a divergent trend is
/// reported as a violated Gromov property.
pub fn gromov_property_probe(graph: &MetricGraph, pairs: &SequencePair, o: &ComplexPoint) -> Result<ExperimentReport> {
    let spec = graph.spec();
    let Some(q) = &pairs.q else { return input("the Gromov probe needs a second boundary point q") };
    if *q == pairs.p {
        return input("the Gromov property concerns distinct boundary points p ≠ q");
    }
    check_boundary(spec, &pairs.p)?;
    check_boundary(spec, q)?;
    let mut rep = ExperimentReport::new(
        "gromov",
        &["n", "z", "w", "dist_zo_upper", "dist_wo_upper", "dist_zw_upper", "gromov_product", "running_sup"],
    );
    rep.param("p", &pairs.p).param("q", q).param("o", o).param("h", graph.h());
    let mut values = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    for (n, (z, w)) in pairs.pairs().enumerate() {
        let t = triangle(graph, z, w, o)?;
        let g = product_of(t);
        sup = sup.max(g);
        values.push(g);
        rep.records.push(vec![
            n.into(),
            format::point(z).into(),
            format::point(w).into(),
            t[0].into(),
            t[1].into(),
            t[2].into(),
            g.into(),
            sup.into(),
        ]);
    }
    rep.samples = values.len();
    let divergent = diverges(&values);
    rep.stat("sup", sup).stat("last", *values.last().unwrap_or(&f64::NAN)).flag("divergent", divergent);
    rep.verdict = if divergent {
        rep.note("Gromov products grow along the sequence");
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    Ok(rep)
}

/// `k(z_n, w_n) − k(z_n, o)` along sequences `z_n → p`, `w_n → q` for each
/// supplied pair; the empirical `c` is the least value seen.
pub fn weak_gromov_probe(graph: &MetricGraph, o: &ComplexPoint, pairs: &[SequencePair]) -> Result<ExperimentReport> {
    let spec = graph.spec();
    let mut rep = ExperimentReport::new(
        "weak-gromov",
        &["q_index", "n", "z", "w", "dist_zw_upper", "dist_zo_upper", "dist_wo_upper", "value", "running_inf"],
    );
    rep.param("o", o).param("h", graph.h()).param("targets", pairs.len());
    rep.slack_budget = SLACK_REL;
    let mut c = f64::INFINITY;
    let mut divergent = false;
    let mut broken = false;
    for (qi, seq) in pairs.iter().enumerate() {
        let Some(q) = &seq.q else { return input("weak Gromov probes need a target boundary point q") };
        check_boundary(spec, &seq.p)?;
        check_boundary(spec, q)?;
        let mut values = Vec::new();
        let mut inf = f64::INFINITY;
        for (n, (z, w)) in seq.pairs().enumerate() {
            let [zo, wo, zw] = triangle(graph, z, w, o)?;
            let value = zw - zo;
            broken |= value < -wo - SLACK_REL * (1.0 + wo);
            inf = inf.min(value);
            values.push(-value);
            rep.records.push(vec![
                qi.into(),
                n.into(),
                format::point(z).into(),
                format::point(w).into(),
                zw.into(),
                zo.into(),
                wo.into(),
                value.into(),
                inf.into(),
            ]);
        }
        rep.samples += values.len();
        rep.stat(&format!("c_target_{qi}"), inf);
        c = c.min(inf);
        divergent |= diverges(&values);
    }
    rep.stat("c_empirical", c).flag("divergent", divergent);
    rep.verdict = if rep.samples == 0 {
        Verdict::Inconclusive
    } else if broken {
        rep.note("a value fell below −k(w_n, o), contradicting the triangle inequality");
        Verdict::Violated
    } else if divergent {
        rep.note("k(z_n, w_n) − k(z_n, o) decreases without bound along a sequence");
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    Ok(rep)
}
