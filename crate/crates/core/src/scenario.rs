//! Versioned JSON scenario files.
//!
//! ```json
//! {
//!   "schema": "sweep-scenario/1",
//!   "name": "half_plane",
//!   "set": { "kind": "half_space", "normal": [0, 1], "offset": 0 },
//!   "perturbation": { "kind": "constant", "value": [1, 1] },
//!   "u0": [0, 0],
//!   "horizon": 1,
//!   "n": 10,
//!   "r": 1
//! }
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catchup::{Perturbation, PerturbationBound, Problem, Reference};
use crate::crowd::{CrowdRule, DiskSet, Wall};
use crate::eikonal::{solve_eikonal, GridField, Room};
use crate::geometry::{ConstraintSet, HalfSpace, MovingSet, Vector};
use crate::options::{SolverOptions, Tolerances};
use crate::{Error, Result};

pub const SCHEMA: &str = "sweep-scenario/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    BallExterior { center: Vec<f64>, radius: f64 },
    Cross { apex: [f64; 2] },
    Polyhedron { faces: Vec<FaceSpec> },
    Disks { count: usize, radius: f64, #[serde(default)] walls: Vec<Wall> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionSpec {
    #[default]
    Fixed,
    Translation { velocity: Vec<f64> },
    /// `C(t) = C + sin(ωt)·amplitude`.
    Oscillation { amplitude: Vec<f64>, omega: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Constant { value: Vec<f64> },
    /// `f(x) = A x + b`, `A` by rows.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Unit direction of the geodesic distance to the room exits, per disk.
    ExitField { room: Room },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub f_inf: Option<f64>,
    pub linear_growth: Option<f64>,
    /// Prox-regularity constant of the set.
    pub eta: Option<f64>,
    /// Stability constant `a` for a second initial datum `v0`.
    pub stability: Option<f64>,
    /// Constant of the equivalence check residual `≤ c_eq·h`.
    pub c_eq: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// A closed form when one is known, the finest grid otherwise.
    #[default]
    Auto,
    ClosedForm,
    FinestGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub set: SetSpec,
    #[serde(default)]
    pub motion: MotionSpec,
    pub perturbation: PerturbationSpec,
    pub u0: Vec<f64>,
    pub horizon: f64,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub r: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub reference: ReferenceSpec,
    pub v0: Option<Vec<f64>>,
}

fn field_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Scenario { field: field.to_string(), message: e.to_string() }
}

fn vector(field: &str, c: &[f64]) -> Result<Vector> {
    Vector::from_slice(c).map_err(|e| field_err(field, e))
}

impl Scenario {
    /// Parses and validates a scenario; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path.is_empty() || path == "." { "<root>".to_string() } else { path };
            Error::Scenario { field, message: inner.to_string() }
        })?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(field_err("schema", format!("expected {SCHEMA:?}, got {:?}", self.schema)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(field_err("horizon", "must be positive"));
        }
        if let Some(r) = self.r {
            if !(r.is_finite() && r > 0.0) {
                return Err(field_err("r", "must be positive"));
            }
        }
        if self.n == Some(0) {
            return Err(field_err("n", "must be positive"));
        }
        if let Some(list) = &self.n_list {
            if list.contains(&0) {
                return Err(field_err("n_list", "entries must be positive"));
            }
        }
        let b = &self.bounds;
        if let Some(f) = b.f_inf {
            if !(f.is_finite() && f >= 0.0) {
                return Err(field_err("bounds.f_inf", "must be finite and nonnegative"));
            }
        }
        for (name, v) in [("bounds.linear_growth", b.linear_growth), ("bounds.eta", b.eta), ("bounds.stability", b.stability), ("bounds.c_eq", b.c_eq)] {
            if let Some(v) = v {
                if !(v > 0.0) || v.is_nan() {
                    return Err(field_err(name, "must be positive"));
                }
            }
        }
        if b.f_inf.is_some() && b.linear_growth.is_some() {
            return Err(field_err("bounds", "declare either f_inf or linear_growth, not both"));
        }
        if let Some(t) = &self.tolerances {
            t.validate().map_err(|e| field_err("tolerances", e))?;
        }
        Ok(())
    }

    /// Solver options: defaults, then scenario tolerances and seed.
    pub fn options(&self, base: SolverOptions) -> SolverOptions {
        let mut o = base;
        if let Some(t) = self.tolerances {
            o.tol = t;
        }
        o.seed = self.seed;
        o
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet> {
        let set = match &self.set {
            SetSpec::HalfSpace { normal, offset } => ConstraintSet::half_space(vector("set.normal", normal)?, *offset),
            SetSpec::Box { lower, upper } => ConstraintSet::axis_box(lower.clone(), upper.clone()),
            SetSpec::BallExterior { center, radius } => ConstraintSet::ball_exterior(vector("set.center", center)?, *radius),
            SetSpec::Cross { apex } => ConstraintSet::cross(*apex),
            SetSpec::Polyhedron { faces } => {
                let faces = faces
                    .iter()
                    .enumerate()
                    .map(|(k, f)| HalfSpace::new(vector(&format!("set.faces[{k}].normal"), &f.normal)?, f.offset))
                    .collect::<Result<Vec<_>>>()?;
                ConstraintSet::polyhedron(faces)
            }
            SetSpec::Disks { count, radius, walls } => DiskSet::new(*count, *radius, walls.clone()).map(ConstraintSet::disks),
        }
        .map_err(|e| field_err("set", e))?;
        match self.bounds.eta {
            Some(eta) => set.with_prox(eta).map_err(|e| field_err("bounds.eta", e)),
            None => Ok(set),
        }
    }

    pub fn moving_set(&self) -> Result<MovingSet> {
        let base = self.constraint_set()?;
        match &self.motion {
            MotionSpec::Fixed => Ok(MovingSet::fixed(base)),
            MotionSpec::Translation { velocity } => {
                MovingSet::translating(base, vector("motion.velocity", velocity)?).map_err(|e| field_err("motion", e))
            }
            MotionSpec::Oscillation { amplitude, omega } => {
                MovingSet::oscillating(base, vector("motion.amplitude", amplitude)?, *omega).map_err(|e| field_err("motion", e))
            }
        }
    }

    /// The room of an exit-field perturbation.
    pub fn room(&self) -> Option<&Room> {
        match &self.perturbation {
            PerturbationSpec::ExitField { room } => Some(room),
            _ => None,
        }
    }

    pub fn exit_field(&self) -> Result<Option<GridField>> {
        self.room()
            .map(|room| room.rasterize().and_then(|m| solve_eikonal(&m)).map_err(|e| field_err("perturbation.room", e)))
            .transpose()
    }

    /// Crowd rule for disk scenarios.
    pub fn crowd_rule(&self) -> Result<CrowdRule> {
        match &self.perturbation {
            PerturbationSpec::Constant { value } => Ok(CrowdRule::Constant(vector("perturbation.value", value)?)),
            PerturbationSpec::ExitField { .. } => Ok(CrowdRule::ExitField(Arc::new(self.exit_field()?.expect("exit field")))),
            PerturbationSpec::Affine { .. } => Err(field_err("perturbation", "crowd scenarios take a constant or exit_field perturbation")),
        }
    }

    fn disk_count(&self) -> Option<usize> {
        match self.set {
            SetSpec::Disks { count, .. } => Some(count),
            _ => None,
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let set = self.moving_set()?;
        let u0 = vector("u0", &self.u0)?;
        if u0.dim() != set.dim() {
            return Err(field_err("u0", format!("expected {} coordinates, got {}", set.dim(), u0.dim())));
        }
        let (f, default_bound) = match &self.perturbation {
            PerturbationSpec::Constant { value } => {
                let v = vector("perturbation.value", value)?;
                if v.dim() != set.dim() {
                    return Err(field_err("perturbation.value", format!("expected {} coordinates", set.dim())));
                }
                let n = v.norm();
                (Perturbation::Constant(v), Some(PerturbationBound::Sup(n)))
            }
            PerturbationSpec::Affine { matrix, offset } => {
                let f = Perturbation::affine(matrix.clone(), vector("perturbation.offset", offset)?)
                    .map_err(|e| field_err("perturbation.matrix", e))?;
                (f, None)
            }
            PerturbationSpec::ExitField { .. } => {
                let rule = self.crowd_rule()?;
                let count = self.disk_count().ok_or_else(|| field_err("set", "exit_field perturbation needs a disks set"))?;
                (rule.to_perturbation(), Some(PerturbationBound::Sup(rule.bound(count))))
            }
        };
        let bound = match (self.bounds.f_inf, self.bounds.linear_growth) {
            (Some(s), _) => PerturbationBound::Sup(s),
            (None, Some(l)) => PerturbationBound::LinearGrowth(l),
            (None, None) => default_bound.ok_or_else(|| field_err("bounds", "affine perturbation needs f_inf or linear_growth"))?,
        };
        let r = match self.r {
            Some(r) => r,
            None => {
                let eta = set.base().prox_constant();
                if eta.is_finite() {
                    eta
                } else {
                    return Err(field_err("r", "required for sets without a finite prox constant"));
                }
            }
        };
        Problem::new(set, f, bound, u0, self.horizon, r).map_err(|e| field_err("problem", e))
    }

    pub fn reference(&self, p: &Problem) -> Result<Reference> {
        match self.reference {
            ReferenceSpec::FinestGrid => Ok(Reference::FinestGrid),
            ReferenceSpec::Auto => Ok(Reference::closed_form(p).unwrap_or(Reference::FinestGrid)),
            ReferenceSpec::ClosedForm => {
                Reference::closed_form(p).ok_or_else(|| field_err("reference", "no closed form is known for this scenario"))
            }
        }
    }

    pub fn v0(&self) -> Result<Option<Vector>> {
        self.v0.as_deref().map(|v| vector("v0", v)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF_PLANE: &str = r#"{
        "schema": "sweep-scenario/1",
        "name": "half_plane",
        "set": { "kind": "half_space", "normal": [0, 1], "offset": 0 },
        "perturbation": { "kind": "constant", "value": [1, 1] },
        "u0": [0, 0],
        "horizon": 1,
        "n": 10,
        "r": 1
    }"#;

    #[test]
    fn parses_half_plane() {
        let sc = Scenario::from_json(HALF_PLANE).unwrap();
        let p = sc.problem().unwrap();
        assert_eq!(p.bound, PerturbationBound::Sup(2f64.sqrt()));
        assert_eq!(sc.n, Some(10));
    }

    #[test]
    fn unknown_field_is_named() {
        let text = HALF_PLANE.replace("\"offset\": 0 }", "\"offset\": 0, \"radius\": 2 }");
        match Scenario::from_json(&text) {
            Err(Error::Scenario { field, message }) => {
                assert_eq!(field, "set");
                assert!(message.contains("radius"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_is_named() {
        let text = HALF_PLANE.replace("\"horizon\": 1", "\"horizon\": \"long\"");
        match Scenario::from_json(&text) {
            Err(Error::Scenario { field, .. }) => assert_eq!(field, "horizon"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_are_named() {
        let bad = HALF_PLANE.replace("\"horizon\": 1", "\"horizon\": -1");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Scenario { field, .. }) if field == "horizon"));
        let bad = HALF_PLANE.replace("sweep-scenario/1", "sweep-scenario/9");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Scenario { field, .. }) if field == "schema"));
        let bad = HALF_PLANE.replace("\"u0\": [0, 0]", "\"u0\": [0, 0, 0]");
        let sc = Scenario::from_json(&bad).unwrap();
        assert!(matches!(sc.problem(), Err(Error::Scenario { field, .. }) if field == "u0"));
    }

    #[test]
    fn disks_and_motion() {
        let text = r#"{
            "schema": "sweep-scenario/1",
            "name": "corridor",
            "set": { "kind": "disks", "count": 2, "radius": 1,
                     "walls": [ { "disk": 0, "axis": "x", "side": "lower", "bound": 1 } ] },
            "perturbation": { "kind": "constant", "value": [1, 0, -1, 0] },
            "u0": [1, -0.5, 2.98, 0.5],
            "horizon": 1,
            "n": 20
        }"#;
        let sc = Scenario::from_json(text).unwrap();
        let p = sc.problem().unwrap();
        assert_eq!(p.r, 1.0);
        assert!(matches!(sc.crowd_rule().unwrap(), CrowdRule::Constant(_)));

        let moving = HALF_PLANE.replace("\"u0\"", "\"motion\": { \"kind\": \"translation\", \"velocity\": [0, -1] }, \"u0\"");
        let p = Scenario::from_json(&moving).unwrap().problem().unwrap();
        assert_eq!(p.set.speed(), 1.0);
    }
}
