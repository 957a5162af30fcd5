//! Closed forms on model domains: discs, polydiscs, balls and their products.

use crate::domain::{DomainKind, DomainSpec};
use crate::point::{ComplexPoint, C64};

/// `tanh⁻¹(x)` given `x` and an accurately computed `1 − x²`.
pub(crate) fn atanh_with(x: f64, one_minus_sq: f64) -> f64 {
    if one_minus_sq <= 0.0 {
        return f64::INFINITY;
    }
    (1.0 + x).ln() - 0.5 * one_minus_sq.ln()
}

/// `tanh⁻¹` with inputs at or above `1 − 1e−12` sent to `+∞`.
pub fn atanh_clamped(x: f64) -> f64 {
    if x >= 1.0 - 1e-12 {
        f64::INFINITY
    } else if x <= 0.0 {
        0.0
    } else {
        x.atanh()
    }
}

/// `tanh(x) − (1 − e^{−x})`, nonnegative for `x ≥ 0`. With `C = coth(d)` it
/// turns `C e^{−k}` into explicit small factors once `k` is large.
pub fn tanh_exp_gap(x: f64) -> f64 {
    x.tanh() - (1.0 - (-x).exp())
}

/// κ of the disc of radius `r` centred at `c`.
pub(crate) fn disc_kappa(c: C64, r: f64, z: C64, v: C64) -> f64 {
    let w = z - c;
    r * v.norm() / (r * r - w.norm_sqr())
}

/// Poincaré distance in the disc of radius `r` centred at `c`.
pub(crate) fn disc_distance(c: C64, r: f64, z: C64, w: C64) -> f64 {
    let (a, b) = ((z - c) / r, (w - c) / r);
    let den = (C64::new(1.0, 0.0) - a.conj() * b).norm_sqr();
    if den == 0.0 {
        return f64::INFINITY;
    }
    let x = ((a - b).norm_sqr() / den).sqrt();
    atanh_with(x, (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr()) / den)
}

pub(crate) fn ball_kappa(center: &ComplexPoint, r: f64, z: &ComplexPoint, v: &ComplexPoint) -> f64 {
    let w = (z - center).scale(1.0 / r);
    let u = v.scale(1.0 / r);
    let e = 1.0 - w.norm_sqr();
    (u.norm_sqr() / e + u.inner(&w).norm_sqr() / (e * e)).sqrt()
}

pub(crate) fn ball_distance(center: &ComplexPoint, r: f64, z: &ComplexPoint, w: &ComplexPoint) -> f64 {
    let a = (z - center).scale(1.0 / r);
    let b = (w - center).scale(1.0 / r);
    let den = (C64::new(1.0, 0.0) - a.inner(&b)).norm_sqr();
    if den == 0.0 {
        return f64::INFINITY;
    }
    let one_minus = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr()) / den;
    let x = (1.0 - one_minus).max(0.0).sqrt();
    atanh_with(x, one_minus)
}

/// Exact κ_Ω(z; v) on model kinds, `None` otherwise.
pub(crate) fn kappa(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint) -> Option<f64> {
    let zero = C64::new(0.0, 0.0);
    match spec.kind() {
        DomainKind::UnitDisc => Some(disc_kappa(zero, 1.0, z.coord(0), v.coord(0))),
        DomainKind::DiscOfRadius(r) => Some(disc_kappa(zero, *r, z.coord(0), v.coord(0))),
        DomainKind::Polydisc(radii) => Some(
            radii.iter().enumerate().map(|(j, r)| disc_kappa(zero, *r, z.coord(j), v.coord(j))).fold(0.0, f64::max),
        ),
        DomainKind::Ball { center, radius } => Some(ball_kappa(center, *radius, z, v)),
        DomainKind::Product(a, b) => {
            let (za, zb) = z.split(a.dimension());
            let (va, vb) = v.split(a.dimension());
            Some(kappa(a, &za, &va)?.max(kappa(b, &zb, &vb)?))
        }
        _ => None,
    }
}

/// Exact k_Ω(z, w) on model kinds, `None` otherwise.
pub(crate) fn distance(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint) -> Option<f64> {
    let zero = C64::new(0.0, 0.0);
    match spec.kind() {
        DomainKind::UnitDisc => Some(disc_distance(zero, 1.0, z.coord(0), w.coord(0))),
        DomainKind::DiscOfRadius(r) => Some(disc_distance(zero, *r, z.coord(0), w.coord(0))),
        DomainKind::Polydisc(radii) => Some(
            radii.iter().enumerate().map(|(j, r)| disc_distance(zero, *r, z.coord(j), w.coord(j))).fold(0.0, f64::max),
        ),
        DomainKind::Ball { center, radius } => Some(ball_distance(center, *radius, z, w)),
        DomainKind::Product(a, b) => {
            let (za, zb) = z.split(a.dimension());
            let (wa, wb) = w.split(a.dimension());
            Some(distance(a, &za, &wa)?.max(distance(b, &zb, &wb)?))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_dominates_one_minus_exp() {
        for i in 0..=400 {
            let x = i as f64 * 0.05;
            assert!(tanh_exp_gap(x) >= -1e-15, "x = {x}");
        }
        assert_eq!(tanh_exp_gap(0.0), 0.0);
    }

    #[test]
    fn clamped_atanh() {
        assert_eq!(atanh_clamped(1.0), f64::INFINITY);
        assert_eq!(atanh_clamped(1.0 - 1e-13), f64::INFINITY);
        assert!((atanh_clamped(0.5) - 0.549_306_144_334_054_8).abs() < 1e-15);
    }

    #[test]
    fn stable_atanh_matches_naive() {
        let zero = C64::new(0.0, 0.0);
        let d = disc_distance(zero, 1.0, C64::new(0.3, 0.1), C64::new(-0.2, 0.4));
        let m = (C64::new(0.3, 0.1) - C64::new(-0.2, 0.4)).norm()
            / (C64::new(1.0, 0.0) - C64::new(0.3, -0.1) * C64::new(-0.2, 0.4)).norm();
        assert!((d - m.atanh()).abs() < 1e-14);
        // near the boundary the stable form keeps digits the naive one loses
        let d = disc_distance(zero, 1.0, zero, C64::new(1.0 - 1e-12, 0.0));
        assert!((d - 0.5 * ((2.0 - 1e-12) / 1e-12f64).ln()).abs() < 1e-3);
    }
}
