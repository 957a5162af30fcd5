//! Experiment plans: JSON schema, defaults and validation.

use koblab_core::{ComplexPoint, DomainDoc, DomainSpec, KobError};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Metric,
    Distance,
    Geodesic,
    Hyperbolicity,
    Royden,
    Sarkar,
    Additive,
    Multiplicative,
    LengthLocalization,
    Gromov,
    WeakGromov,
    Visibility,
    PairVisibility,
    Transfer,
    LocalGlobal,
    Germ,
}

impl Experiment {
    pub const ALL: [Experiment; 16] = [
        Experiment::Metric,
        Experiment::Distance,
        Experiment::Geodesic,
        Experiment::Hyperbolicity,
        Experiment::Royden,
        Experiment::Sarkar,
        Experiment::Additive,
        Experiment::Multiplicative,
        Experiment::LengthLocalization,
        Experiment::Gromov,
        Experiment::WeakGromov,
        Experiment::Visibility,
        Experiment::PairVisibility,
        Experiment::Transfer,
        Experiment::LocalGlobal,
        Experiment::Germ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Metric => "metric",
            Experiment::Distance => "distance",
            Experiment::Geodesic => "geodesic",
            Experiment::Hyperbolicity => "hyperbolicity",
            Experiment::Royden => "royden",
            Experiment::Sarkar => "sarkar",
            Experiment::Additive => "additive",
            Experiment::Multiplicative => "multiplicative",
            Experiment::LengthLocalization => "length-localization",
            Experiment::Gromov => "gromov",
            Experiment::WeakGromov => "weak-gromov",
            Experiment::Visibility => "visibility",
            Experiment::PairVisibility => "pair-visibility",
            Experiment::Transfer => "transfer",
            Experiment::LocalGlobal => "local-global",
            Experiment::Germ => "germ",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == name)
    }

    /// Experiments anchored at a boundary point `p`.
    fn needs_p(self) -> bool {
        !matches!(self, Experiment::Metric | Experiment::Distance | Experiment::Geodesic)
    }

    fn needs_u(self) -> bool {
        matches!(
            self,
            Experiment::Hyperbolicity
                | Experiment::Royden
                | Experiment::Sarkar
                | Experiment::Additive
                | Experiment::Multiplicative
                | Experiment::LengthLocalization
                | Experiment::Visibility
                | Experiment::Transfer
                | Experiment::LocalGlobal
                | Experiment::Germ
        )
    }

    fn needs_v(self) -> bool {
        matches!(
            self,
            Experiment::Hyperbolicity
                | Experiment::Sarkar
                | Experiment::Additive
                | Experiment::Multiplicative
                | Experiment::LengthLocalization
                | Experiment::Visibility
                | Experiment::Transfer
        )
    }

    /// Experiments that discretize the domain.
    pub fn needs_graph(self) -> bool {
        !matches!(self, Experiment::Metric | Experiment::Royden | Experiment::Sarkar | Experiment::Hyperbolicity)
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One domain document, or two for germ comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainField {
    One(DomainDoc),
    Two(Vec<DomainDoc>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Points {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<ComplexPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<ComplexPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o: Option<ComplexPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<ComplexPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<ComplexPoint>,
    /// Tangent direction for metric plans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<ComplexPoint>,
    /// Boundary targets for sweeps and weak Gromov probes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<ComplexPoint>,
    /// Approach directions; the default points from `p` (or `q`) to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inward_p: Option<ComplexPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inward_q: Option<ComplexPoint>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radii {
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub box_radius: Option<f64>,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    /// Rebuild at `h/2` to confirm non-visible evidence.
    #[serde(default)]
    pub refine: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sequences {
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub t0: Option<f64>,
    /// Sample or pair count for randomized checks and surveys.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Explicit sequences replacing the straight-line approach.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<ComplexPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<ComplexPoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub domain: DomainField,
    pub experiment: Experiment,
    #[serde(default)]
    pub points: Points,
    #[serde(default)]
    pub radii: Radii,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub sequences: Sequences,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub ladder: Vec<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

pub const DEFAULT_M: usize = 4;
pub const DEFAULT_MARGIN: f64 = 0.25;
pub const DEFAULT_COUNT: usize = 8;
pub const DEFAULT_RATE: f64 = 0.5;
pub const DEFAULT_T0: f64 = 0.4;
pub const DEFAULT_SAMPLES: usize = 200;

fn err(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.into(), message: message.into() }
}

/// Splits a core message of the form `field: text` into a path under `prefix`.
fn core_err(prefix: &str, e: KobError) -> CliError {
    let msg = match e {
        KobError::Input(m) | KobError::Domain(m) => m,
        other => other.to_string(),
    };
    match msg.split_once(": ") {
        Some((field, rest)) if !field.contains(' ') => err(format!("{prefix}.{field}"), rest),
        _ => err(prefix, msg),
    }
}

/// Parses and validates a plan, filling defaults.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut plan: ExperimentPlan = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        err(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    plan.fill_and_validate()?;
    Ok(plan)
}

impl ExperimentPlan {
    /// The plan's domains: one, or `[A, B]` for germ plans.
    pub fn domains(&self) -> Result<Vec<DomainSpec>, CliError> {
        match &self.domain {
            DomainField::One(doc) => Ok(vec![DomainSpec::try_from(doc).map_err(|e| core_err("domain", e))?]),
            DomainField::Two(docs) => docs
                .iter()
                .enumerate()
                .map(|(k, d)| DomainSpec::try_from(d).map_err(|e| core_err(&format!("domain[{k}]"), e)))
                .collect(),
        }
    }

    pub fn h(&self) -> f64 {
        self.grid.h.expect("validated plan")
    }

    pub fn m(&self) -> usize {
        self.grid.m.unwrap_or(DEFAULT_M)
    }

    pub fn count(&self) -> usize {
        self.sequences.count.unwrap_or(DEFAULT_COUNT)
    }

    pub fn samples(&self) -> usize {
        self.sequences.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn fill_and_validate(&mut self) -> Result<(), CliError> {
        let exp = self.experiment;
        let domains = self.domains()?;
        if exp == Experiment::Germ && domains.len() != 2 {
            return Err(err("domain", "germ plans need a list of two domain documents"));
        }
        if exp != Experiment::Germ && domains.len() != 1 {
            return Err(err("domain", "expected a single domain document"));
        }
        let spec = &domains[0];
        let n = spec.dimension();
        if domains.iter().any(|d| d.dimension() != n) {
            return Err(err("domain[1].dimension", "both germ domains must have the same dimension"));
        }

        // grid
        if self.grid.h.is_none() {
            self.grid.h = match n {
                1 => Some(0.02),
                2 => Some(0.08),
                _ if exp.needs_graph() => {
                    return Err(err("grid.h", format!("no default spacing in dimension {n}; set grid.h")));
                }
                _ => Some(0.25),
            };
        }
        let h = self.h();
        if !(h > 0.0 && h.is_finite()) {
            return Err(err("grid.h", format!("must be positive, got {h}")));
        }
        if self.grid.box_radius.is_none() {
            let bounds: Option<Vec<f64>> = domains.iter().map(|d| d.bounding_radius()).collect();
            match bounds {
                Some(b) => self.grid.box_radius = Some(b.into_iter().fold(0.0, f64::max)),
                None if exp.needs_graph() => {
                    return Err(err("grid.box_radius", "the domain is unbounded; a box radius is required"));
                }
                None => {}
            }
        }
        if let Some(b) = self.grid.box_radius {
            if !(b > 0.0 && b.is_finite()) {
                return Err(err("grid.box_radius", format!("must be positive, got {b}")));
            }
        }
        let margin = *self.grid.margin.get_or_insert(DEFAULT_MARGIN);
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(err("grid.margin", format!("must be nonnegative, got {margin}")));
        }
        if *self.grid.m.get_or_insert(DEFAULT_M) == 0 {
            return Err(err("grid.m", "must be at least 1"));
        }

        // sequences
        if *self.sequences.count.get_or_insert(DEFAULT_COUNT) == 0 {
            return Err(err("sequences.count", "must be at least 1"));
        }
        let rate = *self.sequences.rate.get_or_insert(DEFAULT_RATE);
        if !(rate > 0.0 && rate < 1.0) {
            return Err(err("sequences.rate", format!("must lie in (0, 1), got {rate}")));
        }
        let t0 = *self.sequences.t0.get_or_insert(DEFAULT_T0);
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(err("sequences.t0", format!("must be positive, got {t0}")));
        }
        if *self.sequences.samples.get_or_insert(DEFAULT_SAMPLES) == 0 {
            return Err(err("sequences.samples", "must be at least 1"));
        }
        match (&self.sequences.z, &self.sequences.w) {
            (Some(z), Some(w)) if z.len() != w.len() || z.is_empty() => {
                return Err(err("sequences.w", "explicit sequences must be nonempty and of equal length"));
            }
            (Some(_), None) => return Err(err("sequences.w", "required together with sequences.z")),
            (None, Some(_)) => return Err(err("sequences.z", "required together with sequences.w")),
            _ => {}
        }
        for (name, seq) in [("z", &self.sequences.z), ("w", &self.sequences.w)] {
            for (k, x) in seq.iter().flatten().enumerate() {
                check_dim(&format!("sequences.{name}[{k}]"), x, n)?;
            }
        }

        // lambda and ladder
        if self.lambda.is_empty() {
            self.lambda = vec![1.0, 1.5, 2.0];
        }
        if let Some(k) = self.lambda.iter().position(|&l| !(l >= 1.0 && l.is_finite())) {
            return Err(err(format!("lambda[{k}]"), format!("must be at least 1, got {}", self.lambda[k])));
        }
        if self.ladder.is_empty() {
            self.ladder = vec![0.5, 0.2, 0.05];
        }
        if let Some(k) = self.ladder.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(err(format!("ladder[{k}]"), format!("floors must be positive, got {}", self.ladder[k])));
        }

        // points
        let pts = &self.points;
        for (name, x) in [
            ("p", &pts.p),
            ("q", &pts.q),
            ("o", &pts.o),
            ("z", &pts.z),
            ("w", &pts.w),
            ("v", &pts.v),
            ("inward_p", &pts.inward_p),
            ("inward_q", &pts.inward_q),
        ] {
            if let Some(x) = x {
                check_dim(&format!("points.{name}"), x, n)?;
            }
        }
        for (k, x) in pts.targets.iter().enumerate() {
            check_dim(&format!("points.targets[{k}]"), x, n)?;
        }
        if exp.needs_p() && pts.p.is_none() {
            return Err(err("points.p", format!("a boundary point is required for {exp} plans")));
        }
        match exp {
            Experiment::Metric => {
                require(&pts.z, "points.z", exp)?;
                require(&pts.v, "points.v", exp)?;
            }
            Experiment::Distance | Experiment::Geodesic => {
                require(&pts.z, "points.z", exp)?;
                require(&pts.w, "points.w", exp)?;
            }
            Experiment::Gromov => require(&pts.q, "points.q", exp)?,
            Experiment::PairVisibility | Experiment::WeakGromov if pts.q.is_none() && pts.targets.is_empty() => {
                return Err(err("points.q", format!("{exp} plans need points.q or points.targets")));
            }
            Experiment::Transfer => {
                require(&pts.z, "points.z", exp)?;
                require(&pts.w, "points.w", exp)?;
            }
            Experiment::Visibility | Experiment::LocalGlobal | Experiment::Germ
                if self.sequences.w.is_none() && pts.q.is_none() && pts.w.is_none() =>
            {
                return Err(err("points.w", format!("{exp} plans need points.w, points.q or sequences.w")));
            }
            _ => {}
        }

        // radii and nesting W ⊂⊂ V ⊂⊂ U
        let r = &self.radii;
        for (name, x) in [("U", r.u), ("V", r.v), ("W", r.w)] {
            if let Some(x) = x {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(err(format!("radii.{name}"), format!("must be positive, got {x}")));
                }
            }
        }
        if exp.needs_u() && r.u.is_none() {
            return Err(err("radii.U", format!("required for {exp} plans")));
        }
        if exp.needs_v() && r.v.is_none() {
            return Err(err("radii.V", format!("required for {exp} plans")));
        }
        if let (Some(u), Some(v)) = (r.u, r.v) {
            if v >= u {
                return Err(err("radii.V", format!("V = B(p, {v}) must be compactly inside U = B(p, {u})")));
            }
        }
        if let (Some(v), Some(w)) = (r.v, r.w) {
            if w >= v {
                return Err(err("radii.W", format!("W = B(p, {w}) must be compactly inside V = B(p, {v})")));
            }
        }
        Ok(())
    }
}

fn check_dim(path: &str, x: &ComplexPoint, n: usize) -> Result<(), CliError> {
    if x.dim() != n {
        return Err(err(path, format!("has dimension {}, the domain has dimension {n}", x.dim())));
    }
    Ok(())
}

fn require(x: &Option<ComplexPoint>, path: &str, exp: Experiment) -> Result<(), CliError> {
    match x {
        Some(_) => Ok(()),
        None => Err(err(path, format!("required for {exp} plans"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(text: &str) -> String {
        match parse_plan(text) {
            Err(CliError::Parse { path, .. }) => path,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_disc_distance_plan_gets_defaults() {
        let plan = parse_plan(
            r#"{"domain":{"kind":"unitdisc","params":{},"dimension":1},"experiment":"distance",
                "points":{"z":[0.0],"w":[0.5]},"seed":7}"#,
        )
        .unwrap();
        assert_eq!(plan.grid.h, Some(0.02));
        assert_eq!(plan.grid.m, Some(4));
        assert_eq!(plan.grid.box_radius, Some(1.0));
        assert_eq!(plan.sequences.rate, Some(0.5));
        assert_eq!(plan.sequences.count, Some(8));
        assert_eq!(plan.lambda, vec![1.0, 1.5, 2.0]);
        assert_eq!(plan.ladder, vec![0.5, 0.2, 0.05]);
    }

    #[test]
    fn bidisc_default_spacing() {
        let plan = parse_plan(
            r#"{"domain":{"kind":"polydisc","params":{"radii":[1,1]},"dimension":2},"experiment":"distance",
                "points":{"z":[0,0],"w":[0.5,0.3]},"seed":1}"#,
        )
        .unwrap();
        assert_eq!(plan.grid.h, Some(0.08));
    }

    #[test]
    fn nesting_violation_points_at_v() {
        let text = r#"{"domain":{"kind":"unitdisc","dimension":1},"experiment":"sarkar",
            "points":{"p":[1]},"radii":{"U":0.3,"V":0.6},"seed":1}"#;
        assert_eq!(path_of(text), "radii.V");
    }

    #[test]
    fn unbounded_visibility_needs_a_box() {
        let text = r#"{"domain":{"kind":"puncturedexample","dimension":2},"experiment":"visibility",
            "points":{"p":[0,0],"w":[0.5,0]},"radii":{"U":0.5,"V":0.25},"seed":1}"#;
        assert_eq!(path_of(text), "grid.box_radius");
    }

    #[test]
    fn field_paths() {
        let base = r#""experiment":"distance","points":{"z":[0],"w":[0.5]},"seed":1"#;
        assert_eq!(path_of(&format!(r#"{{"domain":{{"kind":"disk","dimension":1}},{base}}}"#)), "domain.kind");
        assert_eq!(
            path_of(&format!(r#"{{"domain":{{"kind":"discofradius","params":{{}},"dimension":1}},{base}}}"#)),
            "domain.params.R"
        );
        let disc = r#""domain":{"kind":"unitdisc","dimension":1}"#;
        assert_eq!(path_of(&format!(r#"{{{disc},"experiment":"nope","seed":1}}"#)), "experiment");
        assert_eq!(
            path_of(&format!(r#"{{{disc},"experiment":"sarkar","radii":{{"U":0.6,"V":0.3}},"seed":1}}"#)),
            "points.p"
        );
        assert_eq!(
            path_of(&format!(r#"{{{disc},"experiment":"distance","points":{{"z":[0,0],"w":[0.5]}},"seed":1}}"#)),
            "points.z"
        );
        assert_eq!(path_of(&format!(r#"{{{disc},{base},"extra":1}}"#)), "extra");
        assert_eq!(path_of(&format!(r#"{{{disc},"experiment":"distance","points":{{"z":[0],"w":[0.5]}}}}"#)), "");
        assert_eq!(path_of(&format!(r#"{{{disc},{base},"grid":{{"hh":1}}}}"#)), "grid.hh");
        assert_eq!(path_of(&format!(r#"{{{disc},{base},"lambda":[1,0.5]}}"#)), "lambda[1]");
    }

    #[test]
    fn round_trip() {
        let plan = parse_plan(
            r#"{"domain":{"kind":"unitdisc","params":{},"dimension":1},"experiment":"additive",
                "points":{"p":[1]},"radii":{"U":0.6,"V":0.3},"grid":{"h":0.04},"seed":3,"out":"o"}"#,
        )
        .unwrap();
        let again = parse_plan(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(plan, again);
    }
}
