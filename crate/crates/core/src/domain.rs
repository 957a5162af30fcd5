//! Domains Ω ⊂ ℂⁿ, Euclidean neighbourhoods of boundary points and the
//! geometric primitives every other module is built on.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{domain, input, KobError, Result};
use crate::point::{ComplexPoint, C64};

/// Radial factor applied to grid-validated radii.
pub const GRID_SAFETY: f64 = 0.999;
/// Rounding guard applied to analytically exact radii.
pub const EXACT_SAFETY: f64 = 1.0 - 1e-12;
/// Tolerance for "p lies on ∂Ω".
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Real-linear constraint `normal · x < offset` on ℝ²ⁿ, with
/// `x = (re z₁, im z₁, …, re zₙ, im zₙ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    fn value(&self, z: &ComplexPoint) -> f64 {
        z.coords().iter().enumerate().map(|(j, c)| self.normal[2 * j] * c.re + self.normal[2 * j + 1] * c.im).sum()
    }

    fn normal_norm(&self) -> f64 {
        self.normal.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// The holomorphic functional `L` with `normal · x = Re L(z)`.
    pub fn functional(&self, z: &ComplexPoint) -> C64 {
        z.coords().iter().enumerate().map(|(j, c)| C64::new(self.normal[2 * j], -self.normal[2 * j + 1]) * c).sum()
    }
}

/// Open Euclidean ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub center: ComplexPoint,
    pub radius: f64,
}

impl Neighborhood {
    pub fn new(center: ComplexPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return input(format!("neighbourhood radius must be positive, got {radius}"));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, z: &ComplexPoint) -> bool {
        z.dist(&self.center) < self.radius
    }

    /// `self ⊂⊂ outer` for concentric balls.
    pub fn is_compactly_inside(&self, outer: &Neighborhood) -> bool {
        self.center.dist(&outer.center) <= 1e-12 && self.radius < outer.radius
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    UnitDisc,
    DiscOfRadius(f64),
    Polydisc(Vec<f64>),
    Ball {
        center: ComplexPoint,
        radius: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    HalfSpaceIntersection(Vec<HalfSpace>),
    Product(Box<DomainSpec>, Box<DomainSpec>),
    /// `D = {(z, w) ∈ ℂ² : z ∈ Δ∖{0}, |zw| < 1}`.
    PuncturedExample,
    BallIntersection(Box<DomainSpec>, Neighborhood),
}

/// A domain Ω ⊂ ℂⁿ described by defining inequalities.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    kind: DomainKind,
    dimension: usize,
}

impl DomainSpec {
    pub fn unit_disc() -> Self {
        Self { kind: DomainKind::UnitDisc, dimension: 1 }
    }

    pub fn disc(radius: f64) -> Result<Self> {
        check_radius(radius, "disc radius")?;
        Ok(Self { kind: DomainKind::DiscOfRadius(radius), dimension: 1 })
    }

    pub fn polydisc(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return input("polydisc needs at least one radius");
        }
        for &r in &radii {
            check_radius(r, "polydisc radius")?;
        }
        let dimension = radii.len();
        Ok(Self { kind: DomainKind::Polydisc(radii), dimension })
    }

    pub fn ball(center: ComplexPoint, radius: f64) -> Result<Self> {
        check_radius(radius, "ball radius")?;
        let dimension = center.dim();
        Ok(Self { kind: DomainKind::Ball { center, radius }, dimension })
    }

    /// Unit ball of ℂⁿ centred at the origin.
    pub fn unit_ball(n: usize) -> Self {
        Self { kind: DomainKind::Ball { center: ComplexPoint::zeros(n), radius: 1.0 }, dimension: n }
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
            return input(format!("annulus needs 0 < r_in < r_out, got {r_in}, {r_out}"));
        }
        Ok(Self { kind: DomainKind::Annulus { r_in, r_out }, dimension: 1 })
    }

    pub fn half_spaces(dimension: usize, constraints: Vec<HalfSpace>) -> Result<Self> {
        if dimension == 0 {
            return input("dimension must be at least 1");
        }
        for (i, h) in constraints.iter().enumerate() {
            if h.normal.len() != 2 * dimension {
                return input(format!(
                    "half-space {i} has {} normal components, expected {}",
                    h.normal.len(),
                    2 * dimension
                ));
            }
            if h.normal_norm() == 0.0 || !h.offset.is_finite() {
                return input(format!("half-space {i} is degenerate"));
            }
        }
        Ok(Self { kind: DomainKind::HalfSpaceIntersection(constraints), dimension })
    }

    pub fn product(a: DomainSpec, b: DomainSpec) -> Self {
        let dimension = a.dimension + b.dimension;
        Self { kind: DomainKind::Product(Box::new(a), Box::new(b)), dimension }
    }

    pub fn punctured_example() -> Self {
        Self { kind: DomainKind::PuncturedExample, dimension: 2 }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_bounded(&self) -> bool {
        self.bounding_radius().is_some()
    }

    /// A radius `R` with `Ω ⊂ B(0, R)`, when one is known.
    pub fn bounding_radius(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::UnitDisc => Some(1.0),
            DomainKind::DiscOfRadius(r) => Some(*r),
            DomainKind::Polydisc(radii) => Some(radii.iter().map(|r| r * r).sum::<f64>().sqrt()),
            DomainKind::Ball { center, radius } => Some(center.norm() + radius),
            DomainKind::Annulus { r_out, .. } => Some(*r_out),
            DomainKind::HalfSpaceIntersection(_) | DomainKind::PuncturedExample => None,
            DomainKind::Product(a, b) => {
                let (ra, rb) = (a.bounding_radius()?, b.bounding_radius()?);
                Some((ra * ra + rb * rb).sqrt())
            }
            DomainKind::BallIntersection(s, nb) => {
                let own = nb.center.norm() + nb.radius;
                Some(s.bounding_radius().map_or(own, |r| r.min(own)))
            }
        }
    }

    /// Whether closed-form Kobayashi–Royden metric and distance are available.
    pub fn is_model(&self) -> bool {
        match &self.kind {
            DomainKind::UnitDisc | DomainKind::DiscOfRadius(_) | DomainKind::Polydisc(_) | DomainKind::Ball { .. } => {
                true
            }
            DomainKind::Product(a, b) => a.is_model() && b.is_model(),
            _ => false,
        }
    }

    fn check_dim(&self, z: &ComplexPoint) -> Result<()> {
        if z.dim() != self.dimension {
            return input(format!("point has dimension {}, domain has dimension {}", z.dim(), self.dimension));
        }
        Ok(())
    }

    /// Membership in the open set Ω. Callers guarantee matching dimension.
    pub fn is_inside(&self, z: &ComplexPoint) -> bool {
        debug_assert_eq!(z.dim(), self.dimension);
        match &self.kind {
            DomainKind::UnitDisc => z.coord(0).norm_sqr() < 1.0,
            DomainKind::DiscOfRadius(r) => z.coord(0).norm() < *r,
            DomainKind::Polydisc(radii) => z.coords().iter().zip(radii).all(|(c, r)| c.norm() < *r),
            DomainKind::Ball { center, radius } => z.dist(center) < *radius,
            DomainKind::Annulus { r_in, r_out } => {
                let m = z.coord(0).norm();
                *r_in < m && m < *r_out
            }
            DomainKind::HalfSpaceIntersection(hs) => hs.iter().all(|h| h.value(z) < h.offset),
            DomainKind::Product(a, b) => {
                let (za, zb) = z.split(a.dimension);
                a.is_inside(&za) && b.is_inside(&zb)
            }
            DomainKind::PuncturedExample => {
                let (s, t) = (z.coord(0).norm(), z.coord(1).norm());
                s > 0.0 && s < 1.0 && s * t < 1.0
            }
            DomainKind::BallIntersection(s, nb) => nb.contains(z) && s.is_inside(z),
        }
    }

    /// Euclidean distance to ∂Ω for `z ∈ Ω` (a lower bound for the
    /// hyperbola part of [`DomainKind::PuncturedExample`], within 1e-9).
    pub fn boundary_dist(&self, z: &ComplexPoint) -> f64 {
        match &self.kind {
            DomainKind::UnitDisc => 1.0 - z.coord(0).norm(),
            DomainKind::DiscOfRadius(r) => r - z.coord(0).norm(),
            DomainKind::Polydisc(radii) => {
                z.coords().iter().zip(radii).map(|(c, r)| r - c.norm()).fold(f64::INFINITY, f64::min)
            }
            DomainKind::Ball { center, radius } => radius - z.dist(center),
            DomainKind::Annulus { r_in, r_out } => {
                let m = z.coord(0).norm();
                (r_out - m).min(m - r_in)
            }
            DomainKind::HalfSpaceIntersection(hs) => {
                hs.iter().map(|h| (h.offset - h.value(z)) / h.normal_norm()).fold(f64::INFINITY, f64::min)
            }
            DomainKind::Product(a, b) => {
                let (za, zb) = z.split(a.dimension);
                a.boundary_dist(&za).min(b.boundary_dist(&zb))
            }
            DomainKind::PuncturedExample => {
                let (s, t) = (z.coord(0).norm(), z.coord(1).norm());
                s.min(1.0 - s).min(hyperbola_distance(s, t) * (1.0 - BOUNDARY_TOL))
            }
            DomainKind::BallIntersection(s, nb) => s.boundary_dist(z).min(nb.radius - z.dist(&nb.center)),
        }
        .max(0.0)
    }

    /// Radius of the largest disc `{z + ζu : |ζ| < r}` inside Ω, computed
    /// from the slice of Ω by the complex line through `z` in the unit
    /// direction `u`. Exact for every kind except [`DomainKind::PuncturedExample`],
    /// where the hyperbola constraint is replaced by a sufficient condition.
    /// Returns `+∞` when the whole line lies in Ω.
    pub fn line_radius(&self, z: &ComplexPoint, u: &ComplexPoint) -> f64 {
        match &self.kind {
            DomainKind::UnitDisc => 1.0 - z.coord(0).norm(),
            DomainKind::DiscOfRadius(r) => r - z.coord(0).norm(),
            DomainKind::Polydisc(radii) => z
                .coords()
                .iter()
                .zip(u.coords())
                .zip(radii)
                .filter(|((_, uj), _)| uj.norm_sqr() > 0.0)
                .map(|((zj, uj), r)| (r - zj.norm()) / uj.norm())
                .fold(f64::INFINITY, f64::min),
            DomainKind::Ball { center, radius } => ball_line_radius(z, u, center, *radius),
            DomainKind::Annulus { r_in, r_out } => {
                let m = z.coord(0).norm();
                (r_out - m).min(m - r_in)
            }
            DomainKind::HalfSpaceIntersection(hs) => {
                let iu = u.scale_c(C64::new(0.0, 1.0));
                hs.iter()
                    .map(|h| {
                        let g = h.value(u).hypot(h.value(&iu));
                        if g > 0.0 {
                            (h.offset - h.value(z)) / g
                        } else {
                            f64::INFINITY
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            DomainKind::Product(a, b) => {
                let (za, zb) = z.split(a.dimension);
                let (ua, ub) = u.split(a.dimension);
                factor_line_radius(a, &za, &ua).min(factor_line_radius(b, &zb, &ub))
            }
            DomainKind::PuncturedExample => punctured_line_radius(z, u),
            DomainKind::BallIntersection(s, nb) => {
                s.line_radius(z, u).min(ball_line_radius(z, u, &nb.center, nb.radius))
            }
        }
        .max(0.0)
    }
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        input(format!("{what} must be positive and finite, got {r}"))
    }
}

fn ball_line_radius(z: &ComplexPoint, u: &ComplexPoint, center: &ComplexPoint, radius: f64) -> f64 {
    let w = z - center;
    let a = w.inner(u).norm();
    let gap = radius * radius - w.norm_sqr();
    if gap <= 0.0 {
        return 0.0;
    }
    gap / ((gap + a * a).sqrt() + a)
}

fn factor_line_radius(f: &DomainSpec, z: &ComplexPoint, u: &ComplexPoint) -> f64 {
    let n = u.norm();
    if n == 0.0 {
        return f64::INFINITY;
    }
    f.line_radius(z, &u.scale(1.0 / n)) / n
}

fn punctured_line_radius(z: &ComplexPoint, u: &ComplexPoint) -> f64 {
    let (z1, z2, u1, u2) = (z.coord(0), z.coord(1), u.coord(0), u.coord(1));
    let mut r = f64::INFINITY;
    let n1 = u1.norm();
    if n1 > 0.0 {
        r = r.min((1.0 - z1.norm()) / n1).min(z1.norm() / n1);
    }
    // |z₁z₂| + r|z₁u₂ + z₂u₁| + r²|u₁u₂| < 1 bounds |(z₁+ζu₁)(z₂+ζu₂)| on |ζ| ≤ r.
    let a = (u1 * u2).norm();
    let b = (z1 * u2 + z2 * u1).norm();
    let c = 1.0 - (z1 * z2).norm();
    let q = if a > 0.0 {
        2.0 * c / (b + (b * b + 4.0 * a * c).sqrt())
    } else if b > 0.0 {
        c / b
    } else {
        f64::INFINITY
    };
    r.min(q)
}

/// Distance in the (|z₁|, |z₂|) quadrant from `(s, t)` to `{st ≥ 1}`.
fn hyperbola_distance(s: f64, t: f64) -> f64 {
    // The nearest point lies up and to the right, on an arc where the
    // squared distance is convex in its first coordinate.
    let f = |x: f64| (x - s).powi(2) + (1.0 / x - t).powi(2);
    let lo = s.max(1e-300);
    let hi = if t > 0.0 { (1.0 / t).min(s + 1.0 / s) } else { s + 1.0 / s };
    if hi <= lo {
        return f(lo).sqrt();
    }
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.max(1.0) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi)).sqrt()
}

/// `z ∈ Ω` (strict interior).
pub fn contains(spec: &DomainSpec, z: &ComplexPoint) -> Result<bool> {
    spec.check_dim(z)?;
    Ok(spec.is_inside(z))
}

/// Euclidean distance `δ_Ω(z)` to the boundary.
pub fn boundary_distance(spec: &DomainSpec, z: &ComplexPoint) -> Result<f64> {
    spec.check_dim(z)?;
    if !spec.is_inside(z) {
        return domain(format!("{z:?} is not in the domain"));
    }
    Ok(spec.boundary_dist(z))
}

/// How [`complex_line_radius`] finds its radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LineRadiusMethod {
    /// Slice geometry of the defining inequalities.
    #[default]
    Analytic,
    /// Bisection validated on an angular × radial grid.
    Grid { angles: usize, radii: usize },
}

/// Certified feasible radius of the affine disc `ζ ↦ z + rζv/|v|` in Ω.
pub fn complex_line_radius(
    spec: &DomainSpec,
    z: &ComplexPoint,
    v: &ComplexPoint,
    method: LineRadiusMethod,
) -> Result<f64> {
    spec.check_dim(z)?;
    spec.check_dim(v)?;
    if !spec.is_inside(z) {
        return domain(format!("{z:?} is not in the domain"));
    }
    let u = v.normalized().ok_or_else(|| KobError::Input("direction must be nonzero".into()))?;
    match method {
        LineRadiusMethod::Analytic => Ok(spec.line_radius(z, &u) * EXACT_SAFETY),
        LineRadiusMethod::Grid { angles, radii } => grid_line_radius(spec, z, &u, angles, radii),
    }
}

fn disc_on_grid(spec: &DomainSpec, z: &ComplexPoint, u: &ComplexPoint, r: f64, angles: usize, radii: usize) -> bool {
    (1..=radii).all(|i| {
        let rho = r * i as f64 / radii as f64;
        (0..angles).all(|k| {
            let theta = std::f64::consts::TAU * k as f64 / angles as f64;
            spec.is_inside(&z.add_scaled(u, C64::from_polar(rho, theta)))
        })
    })
}

fn grid_line_radius(spec: &DomainSpec, z: &ComplexPoint, u: &ComplexPoint, angles: usize, radii: usize) -> Result<f64> {
    if angles < 3 || radii < 1 {
        return input("grid validation needs at least 3 angles and 1 radius");
    }
    let mut lo = 0.0;
    let mut hi = spec.boundary_dist(z).max(1e-12);
    let mut grow = 0;
    while disc_on_grid(spec, z, u, hi, angles, radii) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 80 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            return Ok(lo * GRID_SAFETY);
        }
        let mid = 0.5 * (lo + hi);
        if disc_on_grid(spec, z, u, mid, angles, radii) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(KobError::Numeric("line-radius bisection did not converge".into()))
}

/// Uniform lattice of spacing `h` over the box `[-R, R]^{2n}`, restricted to Ω.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub h: f64,
    /// Largest grid index per real axis (`K = ⌊R/h⌋`).
    pub half_width: i32,
    pub real_dims: usize,
    pub points: Vec<ComplexPoint>,
    pub indices: Vec<Vec<i32>>,
}

impl Lattice {
    pub fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    /// Row-major position of a grid index in the full box.
    pub fn linear(&self, idx: &[i32]) -> Option<usize> {
        let side = self.side() as i64;
        let mut lin = 0i64;
        for &k in idx {
            if k.abs() > self.half_width {
                return None;
            }
            lin = lin * side + (k + self.half_width) as i64;
        }
        Some(lin as usize)
    }
}

/// Lattice points of Ω with `δ_Ω ≥ margin·h`, in lexicographic grid order.
pub fn scan_lattice(spec: &DomainSpec, h: f64, margin: f64, box_radius: f64) -> Result<Lattice> {
    if !(h > 0.0 && h.is_finite()) {
        return input(format!("grid spacing must be positive, got {h}"));
    }
    if !(box_radius > 0.0 && box_radius.is_finite()) {
        return input(format!("box radius must be positive, got {box_radius}"));
    }
    if !(margin >= 0.0) {
        return input(format!("margin must be nonnegative, got {margin}"));
    }
    let real_dims = 2 * spec.dimension;
    let half_width = (box_radius / h + 1e-9).floor() as i32;
    let side = (2 * half_width + 1) as usize;
    let total = (side as f64).powi(real_dims as i32);
    if total > 2.0e8 {
        return Err(KobError::GridBudget { nodes: total as usize, limit: 200_000_000 });
    }
    let mut idx = vec![-half_width; real_dims];
    let mut reals = vec![0.0; real_dims];
    let mut points = Vec::new();
    let mut indices = Vec::new();
    loop {
        for (x, &k) in reals.iter_mut().zip(&idx) {
            *x = k as f64 * h;
        }
        let z = ComplexPoint::from_reals(&reals);
        if spec.is_inside(&z) && spec.boundary_dist(&z) >= margin * h {
            points.push(z);
            indices.push(idx.clone());
        }
        // odometer, last axis fastest
        let mut axis = real_dims;
        loop {
            if axis == 0 {
                return finish_lattice(h, half_width, real_dims, points, indices);
            }
            axis -= 1;
            if idx[axis] < half_width {
                idx[axis] += 1;
                break;
            }
            idx[axis] = -half_width;
        }
    }
}

fn finish_lattice(
    h: f64,
    half_width: i32,
    real_dims: usize,
    points: Vec<ComplexPoint>,
    indices: Vec<Vec<i32>>,
) -> Result<Lattice> {
    if points.is_empty() {
        return Err(KobError::DegenerateGrid(format!(
            "no lattice point of spacing {h} (half-width {half_width}) lies in the domain with the requested margin"
        )));
    }
    Ok(Lattice { h, half_width, real_dims, points, indices })
}

/// Interior lattice points of spacing `h` inside the centred box, kept when
/// `δ_Ω ≥ margin·h`; deterministic lexicographic order.
pub fn sample_interior(spec: &DomainSpec, h: f64, margin: f64, box_radius: f64) -> Result<Vec<ComplexPoint>> {
    Ok(scan_lattice(spec, h, margin, box_radius)?.points)
}

/// Whether `p ∈ ∂Ω` up to `tol`: either `p ∈ Ω` within `tol` of the
/// boundary, or `p ∉ Ω` with points of Ω within `tol` of it.
pub fn is_boundary_point(spec: &DomainSpec, p: &ComplexPoint, tol: f64) -> bool {
    if p.dim() != spec.dimension {
        return false;
    }
    if spec.is_inside(p) {
        return spec.boundary_dist(p) <= tol;
    }
    let real_dims = 2 * spec.dimension;
    let count = 3usize.pow(real_dims as u32);
    let mut dir = vec![0.0; real_dims];
    for code in 0..count {
        let mut c = code;
        for d in dir.iter_mut() {
            *d = (c % 3) as f64 - 1.0;
            c /= 3;
        }
        let Some(u) = ComplexPoint::from_reals(&dir).normalized() else { continue };
        if [0.5 * tol, 1e-3 * tol].iter().any(|&t| spec.is_inside(&p.offset(&u, t))) {
            return true;
        }
    }
    if let Some(u) = p.scale(-1.0).normalized() {
        return spec.is_inside(&p.offset(&u, 0.5 * tol));
    }
    false
}

/// Points `z_k = p + rate^k · t₀ · inward/|inward|`, `k = 0, …, count−1`.
pub fn boundary_approach(
    spec: &DomainSpec,
    p: &ComplexPoint,
    inward: &ComplexPoint,
    count: usize,
    rate: f64,
    t0: f64,
) -> Result<Vec<ComplexPoint>> {
    spec.check_dim(p)?;
    spec.check_dim(inward)?;
    if !(rate > 0.0 && rate < 1.0) {
        return input(format!("approach rate must lie in (0, 1), got {rate}"));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return input(format!("initial offset must be positive, got {t0}"));
    }
    if !is_boundary_point(spec, p, BOUNDARY_TOL) {
        return domain(format!("{p:?} is not a boundary point"));
    }
    let u = inward.normalized().ok_or_else(|| KobError::Input("inward direction is zero".into()))?;
    let mut out = Vec::with_capacity(count);
    let mut t = t0;
    for k in 0..count {
        let z = p.offset(&u, t);
        if !spec.is_inside(&z) {
            return domain(format!("direction is not inward at step {k}: {z:?} is outside the domain"));
        }
        out.push(z);
        t *= rate;
    }
    Ok(out)
}

/// The subdomain `Ω ∩ B`.
pub fn intersect_with_ball(spec: &DomainSpec, nb: &Neighborhood) -> Result<DomainSpec> {
    spec.check_dim(&nb.center)?;
    Ok(DomainSpec { kind: DomainKind::BallIntersection(Box::new(spec.clone()), nb.clone()), dimension: spec.dimension })
}

/// The compactum `K_r = {z ∈ Ω : δ_Ω(z) ≥ r, |z| ≤ box_radius}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSlice {
    pub owner: DomainSpec,
    pub floor: f64,
    pub box_radius: f64,
}

impl CompactSlice {
    pub fn new(owner: DomainSpec, floor: f64, box_radius: f64) -> Result<Self> {
        if !(floor > 0.0) || !(box_radius > 0.0) {
            return input("compact slice needs a positive floor and box radius");
        }
        Ok(Self { owner, floor, box_radius })
    }

    pub fn contains(&self, z: &ComplexPoint) -> bool {
        z.dim() == self.owner.dimension
            && self.owner.is_inside(z)
            && self.owner.boundary_dist(z) >= self.floor
            && z.norm() <= self.box_radius
    }
}

/// JSON document form `{"kind", "params", "dimension"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDoc {
    pub kind: String,
    #[serde(default = "empty_params")]
    pub params: Value,
    pub dimension: usize,
}

fn empty_params() -> Value {
    json!({})
}

fn normalize_kind(kind: &str) -> String {
    kind.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

fn param<T: serde::de::DeserializeOwned>(params: &Value, key: &str, kind: &str) -> Result<T> {
    let v = params.get(key).ok_or_else(|| KobError::Input(format!("params.{key}: missing for kind {kind}")))?;
    serde_json::from_value(v.clone()).map_err(|e| KobError::Input(format!("params.{key}: {e}")))
}

impl TryFrom<&DomainDoc> for DomainSpec {
    type Error = KobError;

    fn try_from(doc: &DomainDoc) -> Result<Self> {
        let p = &doc.params;
        let spec = match normalize_kind(&doc.kind).as_str() {
            "unitdisc" => DomainSpec::unit_disc(),
            "discofradius" | "disc" => DomainSpec::disc(param(p, "R", &doc.kind)?)?,
            "polydisc" => DomainSpec::polydisc(param(p, "radii", &doc.kind)?)?,
            "ball" => {
                let center = match p.get("center") {
                    Some(_) => param(p, "center", &doc.kind)?,
                    None => ComplexPoint::zeros(doc.dimension),
                };
                DomainSpec::ball(center, param(p, "R", &doc.kind)?)?
            }
            "annulus" => DomainSpec::annulus(param(p, "r_in", &doc.kind)?, param(p, "r_out", &doc.kind)?)?,
            "halfspaceintersection" => DomainSpec::half_spaces(doc.dimension, param(p, "inequalities", &doc.kind)?)?,
            "product" => {
                let factors: Vec<DomainDoc> = param(p, "factors", &doc.kind)?;
                if factors.len() != 2 {
                    return input("params.factors: product needs exactly two factors");
                }
                DomainSpec::product(DomainSpec::try_from(&factors[0])?, DomainSpec::try_from(&factors[1])?)
            }
            "puncturedexample" => DomainSpec::punctured_example(),
            "ballintersection" => {
                let inner: DomainDoc = param(p, "domain", &doc.kind)?;
                let nb: Neighborhood = param(p, "neighborhood", &doc.kind)?;
                let nb = Neighborhood::new(nb.center, nb.radius)?;
                intersect_with_ball(&DomainSpec::try_from(&inner)?, &nb)?
            }
            other => return input(format!("kind: unknown domain kind {other:?}")),
        };
        if spec.dimension != doc.dimension {
            return input(format!(
                "dimension: document says {}, kind {} has dimension {}",
                doc.dimension, doc.kind, spec.dimension
            ));
        }
        Ok(spec)
    }
}

impl From<&DomainSpec> for DomainDoc {
    fn from(spec: &DomainSpec) -> Self {
        let (kind, params) = match &spec.kind {
            DomainKind::UnitDisc => ("unitdisc", json!({})),
            DomainKind::DiscOfRadius(r) => ("discofradius", json!({ "R": r })),
            DomainKind::Polydisc(radii) => ("polydisc", json!({ "radii": radii })),
            DomainKind::Ball { center, radius } => ("ball", json!({ "center": center, "R": radius })),
            DomainKind::Annulus { r_in, r_out } => ("annulus", json!({ "r_in": r_in, "r_out": r_out })),
            DomainKind::HalfSpaceIntersection(hs) => ("halfspaceintersection", json!({ "inequalities": hs })),
            DomainKind::Product(a, b) => {
                ("product", json!({ "factors": [DomainDoc::from(a.as_ref()), DomainDoc::from(b.as_ref())] }))
            }
            DomainKind::PuncturedExample => ("puncturedexample", json!({})),
            DomainKind::BallIntersection(s, nb) => {
                ("ballintersection", json!({ "domain": DomainDoc::from(s.as_ref()), "neighborhood": nb }))
            }
        };
        DomainDoc { kind: kind.to_string(), params, dimension: spec.dimension }
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = DomainDoc::deserialize(d)?;
        DomainSpec::try_from(&doc).map_err(serde::de::Error::custom)
    }
}
