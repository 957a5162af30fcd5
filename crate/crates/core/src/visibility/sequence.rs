use serde::{Deserialize, Serialize};

use crate::domain::{boundary_approach, DomainSpec};
use crate::error::{domain, input, Result};
use crate::point::ComplexPoint;

/// Paired sequences `z_n → p` and `w_n` (toward `q`, or leaving a neighborhood).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequencePair {
    pub z_seq: Vec<ComplexPoint>,
    pub w_seq: Vec<ComplexPoint>,
    pub p: ComplexPoint,
    pub q: Option<ComplexPoint>,
}

impl SequencePair {
    /// Checks membership, equal lengths and strictly decreasing `δ_Ω(z_n)`.
    pub fn new(
        spec: &DomainSpec,
        z_seq: Vec<ComplexPoint>,
        w_seq: Vec<ComplexPoint>,
        p: ComplexPoint,
        q: Option<ComplexPoint>,
    ) -> Result<Self> {
        if z_seq.is_empty() || z_seq.len() != w_seq.len() {
            return input("sequences must be nonempty and of equal length");
        }
        for x in z_seq.iter().chain(&w_seq) {
            if x.dim() != spec.dimension() || !spec.is_inside(x) {
                return domain(format!("sequence point {x:?} is not in the domain"));
            }
        }
        for k in 1..z_seq.len() {
            if spec.boundary_dist(&z_seq[k]) >= spec.boundary_dist(&z_seq[k - 1]) {
                return input(format!("boundary distance of z_{k} does not decrease"));
            }
        }
        Ok(Self { z_seq, w_seq, p, q })
    }

    /// Straight-line approach to `p` and `q` at geometric rate.
    #[allow(clippy::too_many_arguments)]
    pub fn approach(
        spec: &DomainSpec,
        p: &ComplexPoint,
        p_inward: &ComplexPoint,
        q: &ComplexPoint,
        q_inward: &ComplexPoint,
        count: usize,
        rate: f64,
        t0: f64,
    ) -> Result<Self> {
        let z = boundary_approach(spec, p, p_inward, count, rate, t0)?;
        let w = boundary_approach(spec, q, q_inward, count, rate, t0)?;
        Self::new(spec, z, w, p.clone(), Some(q.clone()))
    }

    pub fn len(&self) -> usize {
        self.z_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_seq.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&ComplexPoint, &ComplexPoint)> {
        self.z_seq.iter().zip(&self.w_seq)
    }
}
