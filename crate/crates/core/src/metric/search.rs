//! Upper bounds from explicit holomorphic discs: affine discs, round discs
//! in the complex-line slice (Möbius family) and polynomial discs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainKind, DomainSpec, EXACT_SAFETY, GRID_SAFETY};
use crate::metric::Method;
use crate::point::{ComplexPoint, C64};

/// Knobs for the analytic-disc searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Polynomial disc degree.
    pub degree: usize,
    pub restarts: usize,
    /// Objective evaluations per restart of the polynomial search.
    pub budget: usize,
    pub seed: u64,
    /// Containment grid for polynomial candidates.
    pub angles: usize,
    pub radii: usize,
    /// Radial shrink applied to grid-validated candidates.
    pub safety: f64,
    pub mobius: bool,
    /// Pattern-search iterations of the Möbius family.
    pub mobius_iters: usize,
    pub polynomial: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            restarts: 8,
            budget: 24,
            seed: 0,
            angles: 64,
            radii: 8,
            safety: GRID_SAFETY,
            mobius: true,
            mobius_iters: 200,
            polynomial: true,
        }
    }
}

impl SearchConfig {
    /// Affine and Möbius families only; used for bulk graph weights.
    pub fn fast() -> Self {
        Self { polynomial: false, mobius_iters: 80, ..Self::default() }
    }

    pub fn affine_only() -> Self {
        Self { polynomial: false, mobius: false, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Validated polynomial disc `ζ ↦ base + Σ coefficients[k-1]·ζᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDiscCandidate {
    pub base: ComplexPoint,
    pub coefficients: Vec<ComplexPoint>,
    pub angles: usize,
    pub radii: usize,
    pub safety: f64,
}

impl AnalyticDiscCandidate {
    pub fn eval(&self, zeta: C64) -> ComplexPoint {
        let mut p = self.base.clone();
        let mut power = zeta;
        for c in &self.coefficients {
            p = p.add_scaled(c, power);
            power *= zeta;
        }
        p
    }

    /// Whether the images of the grid points of the disc `|ζ| ≤ safety` lie in Ω.
    pub fn validate(&self, spec: &DomainSpec) -> bool {
        (1..=self.radii).all(|i| {
            let rho = self.safety * i as f64 / self.radii as f64;
            (0..self.angles).all(|k| {
                let th = std::f64::consts::TAU * k as f64 / self.angles as f64;
                spec.is_inside(&self.eval(C64::from_polar(rho, th)))
            })
        })
    }
}

/// Minimizes `objective(c)` over disc centres `c = c0 + s·e^{iθ}` by a
/// coarse polar scan followed by pattern search.
fn center_search(c0: C64, scale: f64, iters: usize, objective: impl Fn(C64) -> f64) -> (f64, C64) {
    const ANGLES: usize = 16;
    const SCALES: usize = 20;
    let mut best = (objective(c0), c0);
    for k in 0..ANGLES {
        let th = std::f64::consts::TAU * k as f64 / ANGLES as f64;
        for j in 0..SCALES {
            let s = 0.05 * 1.45f64.powi(j as i32);
            let c = c0 + C64::from_polar(s * scale, th);
            let f = objective(c);
            if f < best.0 {
                best = (f, c);
            }
        }
    }
    let mut step = 0.1 * scale.max((best.1 - c0).norm());
    let dirs: [C64; 8] = std::array::from_fn(|k| C64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * k as f64));
    for _ in 0..iters {
        let mut moved = false;
        for d in dirs {
            let c = best.1 + d * step;
            let f = objective(c);
            if f < best.0 {
                best = (f, c);
                moved = true;
            }
        }
        if moved {
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < 1e-11 * scale {
                break;
            }
        }
    }
    best
}

/// Upper bound for κ_Ω(z; u) with `|u| = 1` from affine and round discs in
/// the slice of Ω by the line `z + ℂu`.
fn slice_kappa(spec: &DomainSpec, z: &ComplexPoint, u: &ComplexPoint, cfg: &SearchConfig) -> (f64, Method) {
    let r0 = spec.line_radius(z, u) * EXACT_SAFETY;
    if r0.is_infinite() {
        return (0.0, Method::Affine);
    }
    let affine = if r0 > 0.0 { 1.0 / r0 } else { f64::INFINITY };
    if !cfg.mobius || r0 <= 0.0 {
        return (affine, Method::Affine);
    }
    // the round disc D(c, ρ) ∋ 0 has κ_{D}(0; 1) = ρ/(ρ² − |c|²)
    let objective = |c: C64| {
        let zc = z.add_scaled(u, c);
        if !spec.is_inside(&zc) {
            return f64::INFINITY;
        }
        let rho = spec.line_radius(&zc, u) * EXACT_SAFETY;
        let s2 = c.norm_sqr();
        if rho * rho <= s2 {
            f64::INFINITY
        } else {
            rho / (rho * rho - s2)
        }
    };
    let (best, _) = center_search(C64::new(0.0, 0.0), r0, cfg.mobius_iters, objective);
    if best < affine {
        (best, Method::Mobius)
    } else {
        (affine, Method::Affine)
    }
}

fn poly_feasible(
    spec: &DomainSpec,
    z: &ComplexPoint,
    u: &ComplexPoint,
    b: &[ComplexPoint],
    t: f64,
    cfg: &SearchConfig,
) -> bool {
    let mut coefficients = Vec::with_capacity(b.len() + 1);
    coefficients.push(u.scale(t));
    coefficients.extend(b.iter().map(|c| c.scale(t)));
    AnalyticDiscCandidate { base: z.clone(), coefficients, angles: cfg.angles, radii: cfg.radii, safety: 1.0 }
        .validate(spec)
}

/// Largest `t` such that `ζ ↦ z + t(ζu + Σ bₖζᵏ)` passes the grid check.
fn poly_max_t(
    spec: &DomainSpec,
    z: &ComplexPoint,
    u: &ComplexPoint,
    b: &[ComplexPoint],
    start: f64,
    cfg: &SearchConfig,
) -> f64 {
    let (mut lo, mut hi) = (0.0, start);
    let mut grow = 0;
    while poly_feasible(spec, z, u, b, hi, cfg) {
        lo = hi;
        hi *= 1.5;
        grow += 1;
        if grow > 40 {
            return lo;
        }
    }
    for _ in 0..22 {
        let mid = 0.5 * (lo + hi);
        if poly_feasible(spec, z, u, b, mid, cfg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Upper bound for κ_Ω(z; u) from a seeded local search over polynomial discs.
fn polynomial_kappa(spec: &DomainSpec, z: &ComplexPoint, u: &ComplexPoint, cfg: &SearchConfig) -> Option<f64> {
    let r0 = spec.line_radius(z, u);
    if !(r0 > 0.0 && r0.is_finite()) || cfg.degree < 1 {
        return None;
    }
    let n = z.dim();
    let extra = cfg.degree - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_coeffs = |scale: f64, rng: &mut ChaCha8Rng| -> ComplexPoint {
        let xs: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-scale..scale)).collect();
        ComplexPoint::from_reals(&xs)
    };
    let mut best_t = 0.0f64;
    for restart in 0..cfg.restarts.max(1) {
        let mut b: Vec<ComplexPoint> = (0..extra)
            .map(|_| if restart == 0 { ComplexPoint::zeros(n) } else { random_coeffs(0.3, &mut rng) })
            .collect();
        let mut t = poly_max_t(spec, z, u, &b, r0, cfg);
        let mut step = 0.2;
        let mut fails = 0;
        for _ in 0..cfg.budget {
            if extra == 0 {
                break;
            }
            let trial: Vec<ComplexPoint> = b.iter().map(|c| c + &random_coeffs(step, &mut rng)).collect();
            let tt = poly_max_t(spec, z, u, &trial, t.max(1e-3 * r0), cfg);
            if tt > t {
                b = trial;
                t = tt;
            } else {
                fails += 1;
                if fails % 4 == 0 {
                    step *= 0.5;
                }
            }
        }
        best_t = best_t.max(t);
    }
    (best_t > 0.0).then(|| 1.0 / (cfg.safety * best_t))
}

/// Upper bound for κ_Ω(z; v) (no oracle shortcut) with the winning family.
pub(crate) fn kappa_upper(spec: &DomainSpec, z: &ComplexPoint, v: &ComplexPoint, cfg: &SearchConfig) -> (f64, Method) {
    let vn = v.norm();
    let u = v.scale(1.0 / vn);
    let (mut best, mut method) = slice_kappa(spec, z, &u, cfg);
    if cfg.polynomial {
        if let Some(k) = polynomial_kappa(spec, z, &u, cfg) {
            if k < best {
                best = k;
                method = Method::Polynomial;
            }
        }
    }
    (best * vn, method)
}

/// Upper bound for the pseudo-hyperbolic Lempert function from round discs
/// in the complex line from `z` towards `w`.
fn slice_lempert(spec: &DomainSpec, z: &ComplexPoint, w: &ComplexPoint, cfg: &SearchConfig) -> f64 {
    let diff = w - z;
    let dist = diff.norm();
    let u = diff.scale(1.0 / dist);
    let zw = C64::new(dist, 0.0);
    let m = |c: C64| {
        let zc = z.add_scaled(&u, c);
        if !spec.is_inside(&zc) {
            return f64::INFINITY;
        }
        let rho = spec.line_radius(&zc, &u) * EXACT_SAFETY;
        if rho.is_infinite() {
            return 0.0;
        }
        let (a, b) = (-c / rho, (zw - c) / rho);
        if a.norm() >= 1.0 || b.norm() >= 1.0 {
            return f64::INFINITY;
        }
        (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm()
    };
    let mut best = m(C64::new(0.0, 0.0)).min(m(zw));
    if cfg.mobius {
        let scale = spec.line_radius(z, &u).min(1e6).max(dist);
        best = best.min(center_search(zw * 0.5, scale, cfg.mobius_iters, m).0);
    }
    best
}

/// Discs `ζ ↦ (z₁, Tζ)` of the punctured example, for `z₁ = w₁`.
fn punctured_lempert(z: &ComplexPoint, w: &ComplexPoint) -> f64 {
    let z1 = z.coord(0);
    if (z1 - w.coord(0)).norm() > 1e-15 || z1.norm() == 0.0 {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for t in [0.5 / z1.norm(), EXACT_SAFETY / z1.norm()] {
        let (a, b) = (z.coord(1) / t, w.coord(1) / t);
        if a.norm() < 1.0 && b.norm() < 1.0 {
            best = best.min((a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm());
        }
    }
    best
}

/// Upper bound for l̃_Ω(z, w), symmetric in `z` and `w` by construction.
pub(crate) fn lempert_tilde_upper(
    spec: &DomainSpec,
    z: &ComplexPoint,
    w: &ComplexPoint,
    cfg: &SearchConfig,
) -> (f64, Method) {
    let mut best = slice_lempert(spec, z, w, cfg).min(slice_lempert(spec, w, z, cfg));
    let mut method = if cfg.mobius { Method::Mobius } else { Method::Affine };
    if matches!(spec.kind(), DomainKind::PuncturedExample) {
        let p = punctured_lempert(z, w);
        if p < best {
            best = p;
            method = Method::PuncturedFamily;
        }
    }
    (best, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_eval_and_validation() {
        let c = AnalyticDiscCandidate {
            base: ComplexPoint::scalar(0.0, 0.0),
            coefficients: vec![ComplexPoint::scalar(0.5, 0.0), ComplexPoint::scalar(0.25, 0.0)],
            angles: 64,
            radii: 8,
            safety: GRID_SAFETY,
        };
        assert_eq!(c.eval(C64::new(0.0, 0.0)), ComplexPoint::scalar(0.0, 0.0));
        assert_eq!(c.eval(C64::new(1.0, 0.0)), ComplexPoint::scalar(0.75, 0.0));
        assert!(c.validate(&DomainSpec::unit_disc()));
        assert!(!c.validate(&DomainSpec::disc(0.5).unwrap()));
    }

    #[test]
    fn mobius_family_is_exact_on_the_disc() {
        let spec = DomainSpec::unit_disc();
        for x in [0.0, 0.3, 0.5, 0.8, 0.95] {
            let z = ComplexPoint::scalar(x, 0.0);
            let (k, _) = kappa_upper(&spec, &z, &ComplexPoint::scalar(1.0, 0.0), &SearchConfig::fast());
            let exact = 1.0 / (1.0 - x * x);
            assert!(k >= exact * (1.0 - 1e-9) && k <= exact * 1.001, "x={x}: {k} vs {exact}");
        }
    }

    #[test]
    fn polynomial_search_is_deterministic() {
        let spec = DomainSpec::annulus(0.5, 1.0).unwrap();
        let z = ComplexPoint::scalar(0.7, 0.0);
        let u = ComplexPoint::scalar(0.0, 1.0);
        let cfg = SearchConfig::default().with_seed(11);
        assert_eq!(polynomial_kappa(&spec, &z, &u, &cfg), polynomial_kappa(&spec, &z, &u, &cfg));
    }

    #[test]
    fn lempert_round_discs_on_the_disc() {
        let spec = DomainSpec::unit_disc();
        let (l, _) = lempert_tilde_upper(
            &spec,
            &ComplexPoint::scalar(0.3, 0.1),
            &ComplexPoint::scalar(-0.4, 0.5),
            &SearchConfig::fast(),
        );
        let (a, b) = (C64::new(0.3, 0.1), C64::new(-0.4, 0.5));
        let exact = (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm();
        assert!(l >= exact - 1e-12 && l <= exact + 1e-6, "{l} vs {exact}");
    }
}
