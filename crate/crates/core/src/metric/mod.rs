//! Certified lower/upper bounds for the Kobayashi–Royden metric κ_Ω, the
//! Lempert function and Kobayashi lengths of polygonal curves.

mod lower;
mod oracle;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, GRID_SAFETY};
use crate::error::{domain, input, KobError, Result};
use crate::point::ComplexPoint;

pub use lower::{far_distance_lower, uniform_far_lower};
pub use oracle::{atanh_clamped, tanh_exp_gap};
pub use search::{AnalyticDiscCandidate, SearchConfig};

/// Provenance tag of a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    /// Closed form on a model domain containing Ω.
    Enclosure,
    /// Poincaré metric of a half-plane pulled back by a linear functional.
    HalfPlane,
    /// Coordinate projection onto a factor.
    Projection,
    /// Nothing better than `0` (lower) or `+∞` (upper).
    Trivial,
    Affine,
    Mobius,
    Polynomial,
    PuncturedFamily,
    Graph,
    Quadrature,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Enclosure => "enclosure",
            Method::HalfPlane => "half-plane",
            Method::Projection => "projection",
            Method::Trivial => "trivial",
            Method::Affine => "affine",
            Method::Mobius => "mobius",
            Method::Polynomial => "polynomial",
            Method::PuncturedFamily => "punctured-family",
            Method::Graph => "graph",
            Method::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An interval `[lower, upper]` known to contain a metric quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: Method,
    pub upper_method: Method,
    /// Relative slack of the upper bound owed to grid validation.
    pub grid_slack: f64,
}

impl MetricEstimate {
    pub fn exact(value: f64) -> Self {
        Self { lower: value, upper: value, lower_method: Method::Oracle, upper_method: Method::Oracle, grid_slack: 0.0 }
    }

    pub fn zero() -> Self {
        Self::exact(0.0)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }
}

fn check_point(spec: &DomainSpec, z: &ComplexPoint, what: &str) -> Result<()> {
    if z.dim() != spec.dimension() {
        return input(format!("{what} has dimension {}, domain has dimension {}", z.dim(), spec.dimension()));
    }
    if !spec.is_inside(z) {
        return domain(format!("{what} {z:?} is not in the domain"));
    }
    Ok(())
}

fn check_tangent(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint) -> Result<()> {
    check_point(spec, z, "base point")?;
    if v.dim() != spec.dimension() {
        return input(format!("direction has dimension {}, domain has dimension {}", v.dim(), spec.dimension()));
    }
    if v.is_zero() {
        return input("tangent direction must be nonzero");
    }
    Ok(())
}

/// Exact κ_Ω(z; v) on model kinds (discs, polydiscs, balls, products of those).
pub fn royden_oracle(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint) -> Result<f64> {
    check_point(spec, z, "base point")?;
    if v.dim() != spec.dimension() {
        return input("direction dimension does not match the domain");
    }
    oracle::kappa(spec, z, v).ok_or_else(|| KobError::Unsupported(format!("no closed-form metric for {spec:?}")))
}

/// Exact k_Ω(z, w) on model kinds.
pub fn distance_oracle(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> Result<f64> {
    check_point(spec, z, "first point")?;
    check_point(spec, w, "second point")?;
    oracle::distance(spec, z, w).ok_or_else(|| KobError::Unsupported(format!("no closed-form distance for {spec:?}")))
}

/// Upper bound for κ_Ω(z; v) from validated analytic discs.
pub fn royden_upper(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint, cfg: &SearchConfig) -> Result<f64> {
    check_tangent(spec, z, v)?;
    let (k, _) = search::kappa_upper(spec, z, v, cfg);
    if k.is_nan() {
        return Err(KobError::Numeric("no valid analytic disc found".into()));
    }
    Ok(k)
}

/// Lower bound for κ_Ω(z; v) from minorants; `0` when none applies.
pub fn royden_lower(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint) -> Result<f64> {
    check_point(spec, z, "base point")?;
    if v.dim() != spec.dimension() {
        return input("direction dimension does not match the domain");
    }
    Ok(lower::kappa(spec, z, v).0)
}

/// Unchecked estimate for hot loops: `z ∈ Ω`, `v ≠ 0` are the caller's job.
pub(crate) fn kappa_estimate(
    spec: &DomainSpec,
    z: &ComplexPoint,
    v: &ComplexPoint,
    cfg: &SearchConfig,
) -> MetricEstimate {
    if let Some(k) = oracle::kappa(spec, z, v) {
        return MetricEstimate::exact(k);
    }
    let (lo, lm) = lower::kappa(spec, z, v);
    let (up, um) = search::kappa_upper(spec, z, v, cfg);
    let grid_slack = if um == Method::Polynomial { 1.0 - GRID_SAFETY } else { 0.0 };
    MetricEstimate { lower: lo, upper: up.max(lo), lower_method: lm, upper_method: um, grid_slack }
}

/// `[royden_lower, royden_upper]`, collapsed to the oracle value on model kinds.
pub fn royden_estimate(
    spec: &DomainSpec,
    z: &ComplexPoint,
    v: &ComplexPoint,
    cfg: &SearchConfig,
) -> Result<MetricEstimate> {
    check_tangent(spec, z, v)?;
    Ok(kappa_estimate(spec, z, v, cfg))
}

/// Upper bound for the pseudo-hyperbolic Lempert function l̃_Ω(z, w).
pub fn lempert_tilde_upper(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint, cfg: &SearchConfig) -> Result<f64> {
    check_point(spec, z, "first point")?;
    check_point(spec, w, "second point")?;
    if z == w {
        return Ok(0.0);
    }
    Ok(search::lempert_tilde_upper(spec, z, w, cfg).0.min(1.0))
}

/// Upper bound for l_Ω(z, w) = tanh⁻¹ l̃_Ω(z, w); `+∞` when no disc connects.
pub fn lempert_upper(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint, cfg: &SearchConfig) -> Result<f64> {
    Ok(atanh_clamped(lempert_tilde_upper(spec, z, w, cfg)?))
}

/// Lower bound for k_Ω(z, w) from enclosing model domains and projections.
pub fn distance_lower(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> Result<MetricEstimate> {
    check_point(spec, z, "first point")?;
    check_point(spec, w, "second point")?;
    let (lo, m) = lower::distance(spec, z, w);
    Ok(MetricEstimate {
        lower: lo,
        upper: f64::INFINITY,
        lower_method: m,
        upper_method: Method::Trivial,
        grid_slack: 0.0,
    })
}

pub(crate) fn distance_lower_unchecked(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> (f64, Method) {
    lower::distance(spec, z, w)
}

pub(crate) fn distance_oracle_unchecked(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> Option<f64> {
    oracle::distance(spec, z, w)
}

/// Composite midpoint rule with `m` sub-segments on `[a, b]`.
pub(crate) fn segment_length(
    spec: &DomainSpec,
    a: &ComplexPoint,
    b: &ComplexPoint,
    m: usize,
    cfg: &SearchConfig,
) -> Result<MetricEstimate> {
    let diff = b - a;
    if diff.is_zero() {
        return Ok(MetricEstimate::zero());
    }
    let m = m.max(1);
    let step = diff.scale(1.0 / m as f64);
    let mut total = MetricEstimate {
        lower: 0.0,
        upper: 0.0,
        lower_method: Method::Quadrature,
        upper_method: Method::Quadrature,
        grid_slack: 0.0,
    };
    let mut exact = true;
    for i in 0..m {
        let mid = a.lerp(b, (i as f64 + 0.5) / m as f64);
        if !spec.is_inside(&mid) {
            return domain(format!("segment leaves the domain near {mid:?}"));
        }
        let k = kappa_estimate(spec, &mid, &step, cfg);
        exact &= k.upper_method == Method::Oracle;
        total.lower += k.lower;
        total.upper += k.upper;
        total.grid_slack = total.grid_slack.max(k.grid_slack);
    }
    if exact {
        total.lower_method = Method::Oracle;
        total.upper_method = Method::Oracle;
    }
    Ok(total)
}

/// Upper Kobayashi length of `[a, b]` refined until doubling `m` changes
/// it by less than `rel_tol`.
pub(crate) fn segment_length_adaptive(
    spec: &DomainSpec,
    a: &ComplexPoint,
    b: &ComplexPoint,
    rel_tol: f64,
    cfg: &SearchConfig,
) -> Result<f64> {
    let mut m = 4;
    let mut prev = segment_length(spec, a, b, m, cfg)?.upper;
    while m < 1024 {
        m *= 2;
        let next = segment_length(spec, a, b, m, cfg)?.upper;
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) {
            return Ok(next.max(prev));
        }
        prev = next;
    }
    Ok(prev)
}

/// Kobayashi–Royden length of the polygon through `vertices`, by composite
/// midpoint quadrature with `m` sub-segments per edge.
pub fn kob_length(
    spec: &DomainSpec,
    vertices: &[ComplexPoint],
    m: usize,
    cfg: &SearchConfig,
) -> Result<MetricEstimate> {
    for (i, v) in vertices.iter().enumerate() {
        check_point(spec, v, &format!("vertex {i}"))?;
    }
    let mut total = MetricEstimate::zero();
    for pair in vertices.windows(2) {
        let s = segment_length(spec, &pair[0], &pair[1], m, cfg)?;
        total.lower += s.lower;
        total.upper += s.upper;
        total.grid_slack = total.grid_slack.max(s.grid_slack);
        if s.upper_method != Method::Oracle && !(s.lower == 0.0 && s.upper == 0.0) {
            total.lower_method = Method::Quadrature;
            total.upper_method = Method::Quadrature;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests;
