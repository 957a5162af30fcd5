//! Polygonal curves with per-segment Kobayashi lengths.

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{domain, input, Result};
use crate::format;
use crate::metric::{segment_length, SearchConfig};
use crate::point::ComplexPoint;

/// A polygon `γ` with parameters and segment-length upper bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub vertices: Vec<ComplexPoint>,
    /// Nondecreasing, one per vertex.
    pub params: Vec<f64>,
    /// One per segment.
    pub seg_lengths: Vec<f64>,
}

impl Curve {
    /// Curve with Euclidean arclength parameters.
    pub fn from_parts(vertices: Vec<ComplexPoint>, seg_lengths: Vec<f64>) -> Self {
        debug_assert_eq!(seg_lengths.len() + 1, vertices.len().max(1));
        let mut params = Vec::with_capacity(vertices.len());
        let mut t = 0.0;
        for (i, v) in vertices.iter().enumerate() {
            if i > 0 {
                t += v.dist(&vertices[i - 1]);
            }
            params.push(t);
        }
        Self { vertices, params, seg_lengths }
    }

    /// Polygon through `vertices` with quadrature length upper bounds.
    pub fn through(spec: &DomainSpec, vertices: Vec<ComplexPoint>, m: usize, cfg: &SearchConfig) -> Result<Self> {
        if vertices.is_empty() {
            return input("a curve needs at least one vertex");
        }
        for v in &vertices {
            if v.dim() != spec.dimension() || !spec.is_inside(v) {
                return domain(format!("curve vertex {v:?} is not in the domain"));
            }
        }
        let seg = vertices
            .windows(2)
            .map(|w| Ok(segment_length(spec, &w[0], &w[1], m, cfg)?.upper))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(vertices, seg))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.seg_lengths.iter().sum()
    }

    /// Length of the sub-polygon between vertices `i ≤ j`.
    pub fn length_between(&self, i: usize, j: usize) -> f64 {
        self.seg_lengths[i..j].iter().sum()
    }

    /// Largest `δ_Ω` along the vertices.
    pub fn max_boundary_distance(&self, spec: &DomainSpec) -> f64 {
        self.vertices.iter().map(|v| spec.boundary_dist(v)).fold(0.0, f64::max)
    }

    /// CSV with columns `index, param, re_z1, im_z1, …, seg_length_upper`;
    /// the segment column holds the length of the segment ending at the row.
    pub fn to_csv(&self) -> String {
        let n = self.vertices.first().map_or(0, |v| v.dim());
        let mut out = String::from("index,param");
        for j in 1..=n {
            out.push_str(&format!(",re_z{j},im_z{j}"));
        }
        out.push_str(",seg_length_upper\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!("{i},{}", format::num(self.params[i])));
            for x in v.to_reals() {
                out.push(',');
                out.push_str(&format::num(x));
            }
            let seg = if i == 0 { 0.0 } else { self.seg_lengths[i - 1] };
            out.push(',');
            out.push_str(&format::num(seg));
            out.push('\n');
        }
        out
    }
}

/// Params become cumulative segment lengths, so `Δparam = seg_length` exactly.
pub fn reparametrize_by_length(curve: &Curve) -> Curve {
    let mut params = Vec::with_capacity(curve.len());
    let mut t = 0.0;
    params.push(0.0);
    for s in &curve.seg_lengths {
        t += s;
        params.push(t);
    }
    params.truncate(curve.len());
    Curve { vertices: curve.vertices.clone(), params, seg_lengths: curve.seg_lengths.clone() }
}

/// Maximal initial sub-curve inside `region`, and the first vertex past it.
pub fn truncate_at_exit(
    curve: &Curve,
    region: impl Fn(&ComplexPoint) -> bool,
) -> Result<(Curve, Option<ComplexPoint>)> {
    match curve.vertices.first() {
        None => return input("cannot truncate an empty curve"),
        Some(v) if !region(v) => return domain(format!("curve starts outside the region at {v:?}")),
        _ => {}
    }
    let Some(k) = curve.vertices.iter().position(|v| !region(v)) else {
        return Ok((curve.clone(), None));
    };
    let sub = Curve {
        vertices: curve.vertices[..k].to_vec(),
        params: curve.params[..k].to_vec(),
        seg_lengths: curve.seg_lengths[..k - 1].to_vec(),
    };
    Ok((sub, Some(curve.vertices[k].clone())))
}

/// Empirical `(λ, ε)`-geodesic certificate for the graph metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCertificate {
    pub lambda: f64,
    pub epsilon_emp: f64,
    pub pairs_checked: usize,
    /// Parameters `(t₁, t₂)` of the worst pair.
    pub worst_pair: (f64, f64),
}
