//! Quantitative localization experiments: hyperbolicity at boundary points,
//! Royden's lemma, Sarkar's estimate, additive/multiplicative and length
//! localization surveys, and Gromov-product probes.

mod gromov;
mod inequalities;
mod surveys;

pub use gromov::{gromov_product, gromov_property_probe, weak_gromov_probe};
pub use inequalities::{
    check_royden_lemma, check_sarkar_estimate, hyperbolicity_probe, royden_lemma_sample, sarkar_constant,
    sarkar_factor, RoydenSample,
};
pub use surveys::{additive_gap_survey, length_localization_survey, multiplicative_ratio_survey, RATIO_FLOOR};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{is_boundary_point, DomainSpec, Neighborhood, BOUNDARY_TOL};
use crate::error::{domain, Result};
use crate::point::ComplexPoint;

/// Relative tolerance below which a conservative-direction excess is
/// attributed to rounding.
pub const SLACK_REL: f64 = 1e-9;

/// A trend counts as divergent when the last value exceeds the maximum over
/// the first half of the sequence by this much.
pub const DIVERGENCE_JUMP: f64 = 0.25;

/// Lempert upper bounds at or below this level (and non-increasing) count
/// as vanishing.
pub const VANISH_LEVEL: f64 = 0.05;

/// Independent stream per sample index, so results do not depend on
/// evaluation order.
pub(crate) fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point of `Ω ∩ nb` by rejection from the enclosing cube.
pub(crate) fn point_in(spec: &DomainSpec, nb: &Neighborhood, rng: &mut ChaCha8Rng) -> Option<ComplexPoint> {
    let c = nb.center.to_reals();
    for _ in 0..10_000 {
        let xs: Vec<f64> = c.iter().map(|x| x + rng.gen_range(-nb.radius..nb.radius)).collect();
        let z = ComplexPoint::from_reals(&xs);
        if nb.contains(&z) && spec.is_inside(&z) {
            return Some(z);
        }
    }
    None
}

pub(crate) fn unit_direction(n: usize, rng: &mut ChaCha8Rng) -> ComplexPoint {
    loop {
        let xs: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = ComplexPoint::from_reals(&xs);
        let r = v.norm();
        if r > 0.1 && r <= 1.0 {
            return v.scale(1.0 / r);
        }
    }
}

pub(crate) fn check_boundary(spec: &DomainSpec, p: &ComplexPoint) -> Result<()> {
    if !is_boundary_point(spec, p, BOUNDARY_TOL) {
        return domain(format!("{p:?} is not a boundary point of the domain"));
    }
    Ok(())
}

pub(crate) fn check_nested(u: &Neighborhood, v: &Neighborhood) -> Result<()> {
    if !v.is_compactly_inside(u) {
        return domain(format!("V (radius {}) is not compactly inside U (radius {})", v.radius, u.radius));
    }
    Ok(())
}

/// Least distance between a point of `V` and a point outside `U`.
pub(crate) fn separation(u: &Neighborhood, v: &Neighborhood) -> f64 {
    (u.radius - v.radius - u.center.dist(&v.center)).max(0.0)
}

/// `last − max(first half) ≥ DIVERGENCE_JUMP`, for sequences of length ≥ 2.
pub fn diverges(values: &[f64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let half = values.len() / 2;
    let head = values[..half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values[values.len() - 1] - head >= DIVERGENCE_JUMP
}

/// Non-increasing with last value at most `VANISH_LEVEL`.
pub fn vanishes(values: &[f64]) -> bool {
    !values.is_empty()
        && values.windows(2).all(|w| w[1] <= w[0] * (1.0 + SLACK_REL))
        && values[values.len() - 1] <= VANISH_LEVEL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rules() {
        assert!(diverges(&[0.46, 0.80, 1.15, 1.50]));
        assert!(!diverges(&[0.0, 0.0, 0.01, 0.02]));
        assert!(!diverges(&[1.0]));
        assert!(vanishes(&[0.2027, 0.0200]));
        assert!(!vanishes(&[0.01, 0.02]));
        assert!(!vanishes(&[0.3, 0.1]));
    }

    #[test]
    fn sample_streams_are_independent_of_order() {
        let a: f64 = sample_rng(5, 3).gen();
        let _: f64 = sample_rng(5, 2).gen();
        assert_eq!(a, sample_rng(5, 3).gen::<f64>());
        assert_ne!(a, sample_rng(5, 4).gen::<f64>());
    }

    #[test]
    fn sampled_points_lie_in_the_intersection() {
        let spec = DomainSpec::unit_disc();
        let nb = Neighborhood::new(ComplexPoint::scalar(1.0, 0.0), 0.5).unwrap();
        let mut rng = sample_rng(1, 0);
        for _ in 0..100 {
            let z = point_in(&spec, &nb, &mut rng).unwrap();
            assert!(spec.is_inside(&z) && nb.contains(&z));
            assert!((unit_direction(2, &mut rng).norm() - 1.0).abs() < 1e-12);
        }
    }
}
