//! Minorants: κ and k of Ω bounded below by those of holomorphic images
//! and enclosing model domains.

use crate::domain::{DomainKind, DomainSpec, HalfSpace};
use crate::metric::oracle::{self, atanh_clamped};
use crate::metric::Method;
use crate::point::{ComplexPoint, C64};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// κ of the half-plane `{Re L < b}` pulled back along `L`.
fn half_plane_kappa(h: &HalfSpace, z: &ComplexPoint, v: &ComplexPoint) -> f64 {
    let gap = h.offset - h.functional(z).re;
    if gap <= 0.0 {
        return 0.0;
    }
    h.functional(v).norm() / (2.0 * gap)
}

fn half_plane_distance(h: &HalfSpace, z: &ComplexPoint, w: &ComplexPoint) -> f64 {
    let s1 = C64::new(h.offset, 0.0) - h.functional(z);
    let s2 = C64::new(h.offset, 0.0) - h.functional(w);
    let den = (s1 + s2.conj()).norm();
    if den == 0.0 {
        return 0.0;
    }
    atanh_clamped((s1 - s2).norm() / den)
}

fn enclosing_ball(spec: &DomainSpec) -> Option<f64> {
    match spec.kind() {
        DomainKind::HalfSpaceIntersection(_) | DomainKind::PuncturedExample => None,
        _ => spec.bounding_radius(),
    }
}

/// Best available lower bound for κ_Ω(z; v) with its provenance.
pub(crate) fn kappa(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint) -> (f64, Method) {
    if let Some(k) = oracle::kappa(spec, z, v) {
        return (k, Method::Oracle);
    }
    let (mut best, mut method) = (0.0, Method::Trivial);
    let mut take = |k: f64, m: Method| {
        if k.is_finite() && k > best {
            best = k;
            method = m;
        }
    };
    match spec.kind() {
        DomainKind::Annulus { r_out, .. } => {
            take(oracle::disc_kappa(zero(), *r_out, z.coord(0), v.coord(0)), Method::Enclosure)
        }
        DomainKind::HalfSpaceIntersection(hs) => {
            for h in hs {
                take(half_plane_kappa(h, z, v), Method::HalfPlane);
            }
        }
        DomainKind::Product(a, b) => {
            let (za, zb) = z.split(a.dimension());
            let (va, vb) = v.split(a.dimension());
            take(kappa(a, &za, &va).0, Method::Projection);
            take(kappa(b, &zb, &vb).0, Method::Projection);
        }
        DomainKind::PuncturedExample => {
            take(oracle::disc_kappa(zero(), 1.0, z.coord(0), v.coord(0)), Method::Projection)
        }
        DomainKind::BallIntersection(s, nb) => {
            let (k, m) = kappa(s, z, v);
            take(k, m);
            take(oracle::ball_kappa(&nb.center, nb.radius, z, v), Method::Enclosure);
        }
        _ => {}
    }
    if let Some(r) = enclosing_ball(spec) {
        if z.norm() < r {
            take(oracle::ball_kappa(&ComplexPoint::zeros(spec.dimension()), r, z, v), Method::Enclosure);
        }
    }
    (best, method)
}

/// Best available lower bound for k_Ω(z, w) with its provenance.
pub(crate) fn distance(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> (f64, Method) {
    if let Some(k) = oracle::distance(spec, z, w) {
        return (k, Method::Oracle);
    }
    let (mut best, mut method) = (0.0, Method::Trivial);
    let mut take = |k: f64, m: Method| {
        if k.is_finite() && k > best {
            best = k;
            method = m;
        }
    };
    match spec.kind() {
        DomainKind::Annulus { r_out, .. } => {
            take(oracle::disc_distance(zero(), *r_out, z.coord(0), w.coord(0)), Method::Enclosure)
        }
        DomainKind::HalfSpaceIntersection(hs) => {
            for h in hs {
                take(half_plane_distance(h, z, w), Method::HalfPlane);
            }
        }
        DomainKind::Product(a, b) => {
            let (za, zb) = z.split(a.dimension());
            let (wa, wb) = w.split(a.dimension());
            take(distance(a, &za, &wa).0, Method::Projection);
            take(distance(b, &zb, &wb).0, Method::Projection);
        }
        DomainKind::PuncturedExample => {
            take(oracle::disc_distance(zero(), 1.0, z.coord(0), w.coord(0)), Method::Projection)
        }
        DomainKind::BallIntersection(s, nb) => {
            let (k, m) = distance(s, z, w);
            take(k, m);
            take(oracle::ball_distance(&nb.center, nb.radius, z, w), Method::Enclosure);
        }
        _ => {}
    }
    if let Some(r) = enclosing_ball(spec) {
        if z.norm() < r && w.norm() < r {
            let o = ComplexPoint::zeros(spec.dimension());
            take(oracle::ball_distance(&o, r, z, w), Method::Enclosure);
        }
    }
    (best, method)
}

/// Lower bound for the pseudo-hyperbolic distance from `a` (normalized,
/// `|a| < 1`) to any point of the unit ball at Euclidean distance `≥ x`.
/// Balls of dimension one and higher share the formula; in dimension one
/// the orthogonal part vanishes and the first branch never applies.
fn unit_ball_far(s: f64, x: f64, one_dim: bool) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (1.0 - s * s).max(0.0);
    let m = if !one_dim && x <= s { x / (e + x * x).sqrt() } else { x / (e + s * x) };
    m.min(1.0)
}

fn far_tanh(spec: &DomainSpec, a: &ComplexPoint, d: f64) -> f64 {
    match spec.kind() {
        DomainKind::UnitDisc => unit_ball_far(a.coord(0).norm(), d, true),
        DomainKind::DiscOfRadius(r) => unit_ball_far(a.coord(0).norm() / r, d / r, true),
        DomainKind::Polydisc(radii) => {
            let dj = d / (radii.len() as f64).sqrt();
            radii
                .iter()
                .enumerate()
                .map(|(j, r)| unit_ball_far(a.coord(j).norm() / r, dj / r, true))
                .fold(1.0, f64::min)
        }
        DomainKind::Ball { center, radius } => {
            unit_ball_far(a.dist(center) / radius, d / radius, spec.dimension() == 1)
        }
        DomainKind::Annulus { r_out, .. } => unit_ball_far(a.coord(0).norm() / r_out, d / r_out, true),
        DomainKind::Product(f, g) => {
            let (af, ag) = a.split(f.dimension());
            let dd = d / 2f64.sqrt();
            far_tanh(f, &af, dd).min(far_tanh(g, &ag, dd))
        }
        DomainKind::BallIntersection(s, nb) => {
            far_tanh(s, a, d).max(unit_ball_far(a.dist(&nb.center) / nb.radius, d / nb.radius, spec.dimension() == 1))
        }
        DomainKind::HalfSpaceIntersection(_) | DomainKind::PuncturedExample => 0.0,
    }
}

/// Lower bound for `k_Ω(a, {b ∈ Ω : |a − b| ≥ d})`.
pub fn far_distance_lower(spec: &DomainSpec, a: &ComplexPoint, d: f64) -> f64 {
    atanh_clamped(far_tanh(spec, a, d))
}

fn uniform_far_tanh(spec: &DomainSpec, d: f64) -> f64 {
    let f = |x: f64| if x <= 0.0 { 0.0 } else { (x / (1.0 + 0.25 * x * x)).min(1.0) };
    match spec.kind() {
        DomainKind::UnitDisc => f(d),
        DomainKind::DiscOfRadius(r) => f(d / r),
        DomainKind::Polydisc(radii) => {
            let dj = d / (radii.len() as f64).sqrt();
            radii.iter().map(|r| f(dj / r)).fold(1.0, f64::min)
        }
        DomainKind::Ball { radius, .. } => f(d / radius),
        DomainKind::Annulus { r_out, .. } => f(d / r_out),
        DomainKind::Product(a, b) => {
            let dd = d / 2f64.sqrt();
            uniform_far_tanh(a, dd).min(uniform_far_tanh(b, dd))
        }
        DomainKind::BallIntersection(s, nb) => uniform_far_tanh(s, d).max(f(d / nb.radius)),
        DomainKind::HalfSpaceIntersection(_) | DomainKind::PuncturedExample => 0.0,
    }
}

/// Lower bound for `k_Ω(a, b)` valid for every pair with `|a − b| ≥ d`.
/// Gives `k_Ω(Ω ∩ B(p, r_V), Ω ∖ B(p, r_U)) ≥ uniform_far_lower(Ω, r_U − r_V)`.
pub fn uniform_far_lower(spec: &DomainSpec, d: f64) -> f64 {
    atanh_clamped(uniform_far_tanh(spec, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_ball_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> ComplexPoint {
        loop {
            let xs: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-r..r)).collect();
            let p = ComplexPoint::from_reals(&xs);
            if p.norm() < r {
                return p;
            }
        }
    }

    #[test]
    fn far_bounds_never_exceed_sampled_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [
            DomainSpec::unit_disc(),
            DomainSpec::unit_ball(2),
            DomainSpec::polydisc(vec![1.0, 0.5]).unwrap(),
            DomainSpec::product(DomainSpec::unit_disc(), DomainSpec::disc(2.0).unwrap()),
        ];
        for spec in &cases {
            let n = spec.dimension();
            for _ in 0..2000 {
                let a = rand_ball_point(&mut rng, n, 1.0);
                let b = rand_ball_point(&mut rng, n, 1.0);
                if !spec.is_inside(&a) || !spec.is_inside(&b) {
                    continue;
                }
                let d = a.dist(&b);
                let exact = oracle::distance(spec, &a, &b).unwrap();
                let bound = far_distance_lower(spec, &a, d);
                assert!(bound <= exact + 1e-9, "{spec:?} {a:?} {b:?}: {bound} > {exact}");
                assert!(uniform_far_lower(spec, d) <= exact + 1e-9);
            }
        }
    }

    #[test]
    fn far_bound_is_sharp_on_the_disc_radius() {
        // b = a − d·a/|a| realizes the one-dimensional bound
        let a = ComplexPoint::scalar(0.4, 0.0);
        let b = ComplexPoint::scalar(0.1, 0.0);
        let spec = DomainSpec::unit_disc();
        let exact = oracle::distance(&spec, &a, &b).unwrap();
        assert!((far_distance_lower(&spec, &a, 0.3) - exact).abs() < 1e-12);
    }

    #[test]
    fn half_plane_minorants_are_exact_for_a_half_plane() {
        // {Re z < 1} is a half-plane: the minorant is the whole metric
        let h = HalfSpace { normal: vec![1.0, 0.0], offset: 1.0 };
        let spec = DomainSpec::half_spaces(1, vec![h]).unwrap();
        let z = ComplexPoint::scalar(0.0, 0.3);
        let (k, m) = kappa(&spec, &z, &ComplexPoint::scalar(1.0, 0.0));
        assert_eq!(m, Method::HalfPlane);
        assert!((k - 0.5).abs() < 1e-15);
        // distance along the real axis: ½ log(s₁/s₂)
        let (d, _) = distance(&spec, &ComplexPoint::scalar(0.0, 0.0), &ComplexPoint::scalar(0.9, 0.0));
        assert!((d - 0.5 * (1.0f64 / 0.1).ln()).abs() < 1e-12);
    }

    #[test]
    fn annulus_and_punctured_minorants() {
        let ann = DomainSpec::annulus(0.5, 1.0).unwrap();
        let (k, _) = kappa(&ann, &ComplexPoint::scalar(0.7, 0.0), &ComplexPoint::scalar(1.0, 0.0));
        assert!((k - 1.0 / 0.51).abs() < 1e-12);
        let d = DomainSpec::punctured_example();
        let (k, _) = kappa(&d, &ComplexPoint::real(&[0.1, 0.0]), &ComplexPoint::real(&[0.0, 1.0]));
        assert_eq!(k, 0.0);
    }
}
