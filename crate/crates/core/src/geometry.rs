//! Vectors, constraint sets and moving sets.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::crowd::DiskSet;
use crate::options::SolverOptions;
use crate::projection;
use crate::{Error, Result};

/// A point or direction in `R^d`, `d ≥ 1`, with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("vector must have at least one coordinate"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("vector coordinate {bad} is not finite")));
        }
        Ok(Vector(coords))
    }

    /// Unchecked constructor for coordinates produced by arithmetic on
    /// valid vectors.
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    /// Unit coordinate vector `e_k` in `R^dim`.
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, &c| acc.hypot(c))
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        (self - other).norm()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Vector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|c| a * c).collect())
    }

    /// `v / ‖v‖`, with the convention that the zero vector maps to zero.
    pub fn normalized_or_zero(&self) -> Vector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Vector) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        Error::check_dim(dim, self.dim())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, a: f64) -> Vector {
        self.scaled(a)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

/// `{x : normal·x ≤ offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    /// Builds `{x : a·x ≤ b}`; `a` is normalized internally.
    pub fn new(a: Vector, b: f64) -> Result<Self> {
        let n = a.norm();
        if n == 0.0 {
            return Err(Error::invalid("half-space normal must be nonzero"));
        }
        if !b.is_finite() {
            return Err(Error::invalid("half-space offset must be finite"));
        }
        Ok(HalfSpace { normal: a.scaled(1.0 / n), offset: b / n })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed violation `normal·x − offset` (positive outside).
    pub fn excess(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// `{x : lower_k ≤ x_k ≤ upper_k}`; bounds may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// `R^d ∖ B(center, radius)` (open ball removed, so the set is closed).
#[derive(Clone, Debug, PartialEq)]
pub struct BallExterior {
    center: Vector,
    radius: f64,
}

impl BallExterior {
    pub fn center(&self) -> &Vector {
        &self.center
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{(x, y) : x ≤ apex_x or y ≤ apex_y}` in the plane.
///
/// At the apex the proximal normal cone is `{0}`, so the set is not
/// prox-regular there in any direction in the classical sense.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossSet {
    apex: [f64; 2],
}

impl CrossSet {
    pub fn apex(&self) -> [f64; 2] {
        self.apex
    }
}

/// Finite intersection of half-spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    faces: Vec<HalfSpace>,
}

impl Polyhedron {
    pub fn faces(&self) -> &[HalfSpace] {
        &self.faces
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    HalfSpace(HalfSpace),
    AxisBox(AxisBox),
    BallExterior(BallExterior),
    Cross(CrossSet),
    Polyhedron(Polyhedron),
    Disks(DiskSet),
}

/// A nonempty closed subset of `R^d` with a declared prox-regularity
/// constant (`f64::INFINITY` for convex sets).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    shape: Shape,
    prox: f64,
}

impl ConstraintSet {
    pub fn half_space(normal: Vector, offset: f64) -> Result<Self> {
        Ok(ConstraintSet { shape: Shape::HalfSpace(HalfSpace::new(normal, offset)?), prox: f64::INFINITY })
    }

    pub fn axis_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("box bounds must be nonempty and of equal length"));
        }
        for (k, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::EmptySet(format!("box coordinate {k}: [{lo}, {hi}]")));
            }
        }
        Ok(ConstraintSet { shape: Shape::AxisBox(AxisBox { lower, upper }), prox: f64::INFINITY })
    }

    /// Exterior of a ball; the prox constant is the radius.
    pub fn ball_exterior(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConstraintSet { shape: Shape::BallExterior(BallExterior { center, radius }), prox: radius })
    }

    /// The union of two half-planes `{x ≤ apex_x} ∪ {y ≤ apex_y}`.
    ///
    /// Its prox constant defaults to infinity: the set is declared for
    /// directional use only and the value is never consulted for it by the
    /// integrator, which relies on the user-supplied scale `r`.
    pub fn cross(apex: [f64; 2]) -> Result<Self> {
        if !(apex[0].is_finite() && apex[1].is_finite()) {
            return Err(Error::invalid("cross apex must be finite"));
        }
        Ok(ConstraintSet { shape: Shape::Cross(CrossSet { apex }), prox: f64::INFINITY })
    }

    pub fn polyhedron(faces: Vec<HalfSpace>) -> Result<Self> {
        let Some(first) = faces.first() else {
            return Err(Error::invalid("polyhedron needs at least one half-space"));
        };
        let d = first.normal.dim();
        for f in &faces {
            f.normal.ensure_dim(d)?;
        }
        let set = ConstraintSet { shape: Shape::Polyhedron(Polyhedron { faces }), prox: f64::INFINITY };
        let probe = projection::project_polyhedron(set.as_polyhedron().unwrap(), &Vector::zeros(d));
        match probe {
            Ok(p) if p.converged => Ok(set),
            _ => Err(Error::EmptySet("half-space intersection is infeasible".into())),
        }
    }

    pub fn disks(disks: DiskSet) -> Self {
        let prox = disks.radius();
        ConstraintSet { shape: Shape::Disks(disks), prox }
    }

    /// Overrides the declared prox-regularity constant.
    pub fn with_prox(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || eta.is_nan() {
            return Err(Error::invalid(format!("prox constant must be positive, got {eta}")));
        }
        if let Shape::BallExterior(b) = &self.shape {
            if eta > b.radius {
                return Err(Error::invalid(format!(
                    "prox constant {eta} exceeds ball-exterior radius {}",
                    b.radius
                )));
            }
        }
        self.prox = eta;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn prox_constant(&self) -> f64 {
        self.prox
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::HalfSpace(_) => "half_space",
            Shape::AxisBox(_) => "box",
            Shape::BallExterior(_) => "ball_exterior",
            Shape::Cross(_) => "cross",
            Shape::Polyhedron(_) => "polyhedron",
            Shape::Disks(_) => "disks",
        }
    }

    /// Whether membership and projection are closed-form.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.shape, Shape::Disks(_))
    }

    pub fn as_disks(&self) -> Option<&DiskSet> {
        match &self.shape {
            Shape::Disks(d) => Some(d),
            _ => None,
        }
    }

    pub(crate) fn as_polyhedron(&self) -> Option<&Polyhedron> {
        match &self.shape {
            Shape::Polyhedron(p) => Some(p),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::HalfSpace(h) => h.normal.dim(),
            Shape::AxisBox(b) => b.lower.len(),
            Shape::BallExterior(b) => b.center.dim(),
            Shape::Cross(_) => 2,
            Shape::Polyhedron(p) => p.faces[0].normal.dim(),
            Shape::Disks(d) => d.dim(),
        }
    }

    /// Exact membership for analytic kinds; disk configurations accept
    /// constraint values down to `−tol_feas`.
    pub fn member(&self, x: &Vector) -> Result<bool> {
        self.member_with(x, crate::options::TOL_FEAS)
    }

    pub fn member_with(&self, x: &Vector, tol_feas: f64) -> Result<bool> {
        x.ensure_dim(self.dim())?;
        Ok(match &self.shape {
            Shape::HalfSpace(h) => h.excess(x) <= 0.0,
            Shape::AxisBox(b) => x
                .as_slice()
                .iter()
                .zip(b.lower.iter().zip(&b.upper))
                .all(|(&c, (&lo, &hi))| lo <= c && c <= hi),
            Shape::BallExterior(b) => x.dist(&b.center) >= b.radius,
            Shape::Cross(c) => x[0] <= c.apex[0] || x[1] <= c.apex[1],
            Shape::Polyhedron(p) => p.faces.iter().all(|f| f.excess(x) <= 0.0),
            Shape::Disks(d) => d.is_feasible(x.as_slice(), tol_feas),
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        self.distance_with(x, &SolverOptions::default())
    }

    /// `d(x, C)`: closed form for analytic kinds, through the projection
    /// solver otherwise.
    pub fn distance_with(&self, x: &Vector, opts: &SolverOptions) -> Result<f64> {
        x.ensure_dim(self.dim())?;
        Ok(match &self.shape {
            Shape::HalfSpace(h) => h.excess(x).max(0.0),
            Shape::AxisBox(b) => x
                .as_slice()
                .iter()
                .zip(b.lower.iter().zip(&b.upper))
                .fold(0.0f64, |acc, (&c, (&lo, &hi))| acc.hypot((lo - c).max(c - hi).max(0.0))),
            Shape::BallExterior(b) => (b.radius - x.dist(&b.center)).max(0.0),
            Shape::Cross(c) => {
                if x[0] <= c.apex[0] || x[1] <= c.apex[1] {
                    0.0
                } else {
                    (x[0] - c.apex[0]).min(x[1] - c.apex[1])
                }
            }
            Shape::Polyhedron(_) | Shape::Disks(_) => {
                let p = projection::project_with(self, x, opts)?;
                if !p.converged {
                    return Err(Error::NonConvergence { what: "projection", iterations: p.iterations });
                }
                p.dist
            }
        })
    }

    /// The set translated by `a`; analytic kinds shift their parameters.
    pub fn translated(&self, a: &Vector) -> Result<ConstraintSet> {
        a.ensure_dim(self.dim())?;
        let shape = match &self.shape {
            Shape::HalfSpace(h) => Shape::HalfSpace(HalfSpace { normal: h.normal.clone(), offset: h.offset + h.normal.dot(a) }),
            Shape::AxisBox(b) => Shape::AxisBox(AxisBox {
                lower: b.lower.iter().zip(a.as_slice()).map(|(l, s)| l + s).collect(),
                upper: b.upper.iter().zip(a.as_slice()).map(|(u, s)| u + s).collect(),
            }),
            Shape::BallExterior(b) => Shape::BallExterior(BallExterior { center: &b.center + a, radius: b.radius }),
            Shape::Cross(c) => Shape::Cross(CrossSet { apex: [c.apex[0] + a[0], c.apex[1] + a[1]] }),
            Shape::Polyhedron(p) => Shape::Polyhedron(Polyhedron {
                faces: p
                    .faces
                    .iter()
                    .map(|f| HalfSpace { normal: f.normal.clone(), offset: f.offset + f.normal.dot(a) })
                    .collect(),
            }),
            Shape::Disks(d) => Shape::Disks(d.translated(a.as_slice())),
        };
        Ok(ConstraintSet { shape, prox: self.prox })
    }

    /// Generators of the proximal normal cone `N(C, x)` for `x ∈ C`.
    ///
    /// An empty list means `N(C, x) = {0}`. Constraints within `tol_active`
    /// of being tight count as active.
    pub fn normal_cone(&self, x: &Vector, tol_active: f64) -> Result<Vec<Vector>> {
        x.ensure_dim(self.dim())?;
        let d = self.dim();
        Ok(match &self.shape {
            Shape::HalfSpace(h) => {
                if h.excess(x).abs() <= tol_active {
                    vec![h.normal.clone()]
                } else {
                    vec![]
                }
            }
            Shape::AxisBox(b) => {
                let mut gens = Vec::new();
                for k in 0..d {
                    if (x[k] - b.lower[k]).abs() <= tol_active {
                        gens.push(Vector::unit(d, k).scaled(-1.0));
                    }
                    if (x[k] - b.upper[k]).abs() <= tol_active {
                        gens.push(Vector::unit(d, k));
                    }
                }
                gens
            }
            Shape::BallExterior(b) => {
                let rel = x - &b.center;
                if (rel.norm() - b.radius).abs() <= tol_active {
                    vec![rel.normalized_or_zero().scaled(-1.0)]
                } else {
                    vec![]
                }
            }
            Shape::Cross(c) => {
                let on_vertical = (x[0] - c.apex[0]).abs() <= tol_active && x[1] > c.apex[1] + tol_active;
                let on_horizontal = (x[1] - c.apex[1]).abs() <= tol_active && x[0] > c.apex[0] + tol_active;
                if on_vertical {
                    vec![Vector::unit(2, 0)]
                } else if on_horizontal {
                    vec![Vector::unit(2, 1)]
                } else {
                    vec![]
                }
            }
            Shape::Polyhedron(p) => p
                .faces
                .iter()
                .filter(|f| f.excess(x).abs() <= tol_active)
                .map(|f| f.normal.clone())
                .collect(),
            Shape::Disks(ds) => ds.normal_generators(x.as_slice(), tol_active)?,
        })
    }
}

/// Analytic Hausdorff distance between two sets of the same kind, when
/// one is available. Returns `Some(f64::INFINITY)` for unbounded gaps
/// (e.g. non-parallel half-spaces) and `None` when no closed form is
/// implemented.
pub fn hausdorff(a: &ConstraintSet, b: &ConstraintSet) -> Option<f64> {
    if a.dim() != b.dim() {
        return None;
    }
    match (&a.shape, &b.shape) {
        (Shape::HalfSpace(p), Shape::HalfSpace(q)) => {
            if p.normal.dist(&q.normal) <= 1e-14 {
                Some((p.offset - q.offset).abs())
            } else {
                Some(f64::INFINITY)
            }
        }
        (Shape::BallExterior(p), Shape::BallExterior(q)) => {
            if p.radius != q.radius {
                return None;
            }
            Some(p.center.dist(&q.center).min(p.radius))
        }
        (Shape::AxisBox(p), Shape::AxisBox(q)) => {
            let one_sided = |s: &AxisBox, t: &AxisBox| {
                let mut acc = 0.0f64;
                for k in 0..s.lower.len() {
                    let lo = gap(t.lower[k], s.lower[k]);
                    let hi = gap(s.upper[k], t.upper[k]);
                    acc = acc.hypot(lo.max(hi).max(0.0));
                }
                acc
            };
            Some(one_sided(p, q).max(one_sided(q, p)))
        }
        (Shape::Cross(p), Shape::Cross(q)) => {
            Some((p.apex[0] - q.apex[0]).abs().max((p.apex[1] - q.apex[1]).abs()))
        }
        _ => None,
    }
}

/// `x − y` with `±∞ − ±∞ = 0` for matching infinite bounds.
fn gap(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        x - y
    }
}

/// A user-supplied set-at-time rule with its declared Lipschitz constant.
#[derive(Clone)]
pub struct GeneralMotion {
    rule: Arc<dyn Fn(f64) -> Result<ConstraintSet> + Send + Sync>,
    lipschitz: f64,
    label: String,
}

impl fmt::Debug for GeneralMotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralMotion")
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Motion {
    Fixed,
    /// `C(t) = C_0 + t·velocity`.
    Translation { velocity: Vector },
    /// `C(t)` given by an arbitrary rule with `H(C(t), C(s)) ≤ k|t − s|`.
    General(GeneralMotion),
}

#[derive(Clone, Debug)]
pub struct MovingSet {
    base: ConstraintSet,
    motion: Motion,
}

impl MovingSet {
    pub fn fixed(base: ConstraintSet) -> Self {
        MovingSet { base, motion: Motion::Fixed }
    }

    pub fn translating(base: ConstraintSet, velocity: Vector) -> Result<Self> {
        velocity.ensure_dim(base.dim())?;
        Ok(MovingSet { base, motion: Motion::Translation { velocity } })
    }

    /// A general motion. The rule must return `base`-dimensional sets and
    /// move with Hausdorff speed at most `lipschitz`.
    pub fn general<F>(base: ConstraintSet, lipschitz: f64, label: impl Into<String>, rule: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<ConstraintSet> + Send + Sync + 'static,
    {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::invalid(format!("Lipschitz constant must be finite and nonnegative, got {lipschitz}")));
        }
        Ok(MovingSet {
            base,
            motion: Motion::General(GeneralMotion { rule: Arc::new(rule), lipschitz, label: label.into() }),
        })
    }

    /// `C(t) = C_0 + sin(ω t)·amplitude`, Lipschitz with `k = ω‖amplitude‖`.
    pub fn oscillating(base: ConstraintSet, amplitude: Vector, omega: f64) -> Result<Self> {
        amplitude.ensure_dim(base.dim())?;
        if !omega.is_finite() {
            return Err(Error::invalid("oscillation frequency must be finite"));
        }
        let k = omega.abs() * amplitude.norm();
        let b = base.clone();
        MovingSet::general(base, k, "oscillation", move |t| b.translated(&amplitude.scaled((omega * t).sin())))
    }

    pub fn base(&self) -> &ConstraintSet {
        &self.base
    }

    pub fn motion(&self) -> &Motion {
        &self.motion
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.motion, Motion::Fixed)
    }

    /// Hausdorff speed of the motion: `0`, `‖a‖`, or the declared `k`.
    pub fn speed(&self) -> f64 {
        match &self.motion {
            Motion::Fixed => 0.0,
            Motion::Translation { velocity } => velocity.norm(),
            Motion::General(g) => g.lipschitz,
        }
    }

    pub fn set_at(&self, t: f64) -> Result<ConstraintSet> {
        match &self.motion {
            Motion::Fixed => Ok(self.base.clone()),
            Motion::Translation { velocity } => self.base.translated(&velocity.scaled(t)),
            Motion::General(g) => {
                let set = (g.rule)(t)?;
                Error::check_dim(self.base.dim(), set.dim())?;
                Ok(set)
            }
        }
    }

    /// Samples `H(C(t), C(s)) ≤ k|t − s| + tol` on the given times; returns
    /// the worst excess (negative when the law holds with room) or an error
    /// when the kind has no analytic Hausdorff distance.
    pub fn lipschitz_excess(&self, times: &[f64], tol: f64) -> Result<f64> {
        let k = self.speed();
        let sets = times.iter().map(|&t| self.set_at(t)).collect::<Result<Vec<_>>>()?;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let h = hausdorff(&sets[i], &sets[j])
                    .ok_or_else(|| Error::invalid(format!("no analytic Hausdorff distance for {}", self.base.kind_name())))?;
                worst = worst.max(h - k * (times[i] - times[j]).abs() - tol);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn lower_half_plane() -> ConstraintSet {
        ConstraintSet::half_space(v(&[0.0, 1.0]), 0.0).unwrap()
    }

    #[test]
    fn vector_rejects_empty_and_nonfinite() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(v(&[3.0, 4.0]).norm(), 5.0);
        assert_eq!(Vector::zeros(3).norm(), 0.0);
    }

    #[test]
    fn membership_examples() {
        assert!(lower_half_plane().member(&v(&[3.0, -1.0])).unwrap());
        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(!ext.member(&v(&[0.5, 0.0])).unwrap());
        let cross = ConstraintSet::cross([0.0, 0.0]).unwrap();
        assert!(!cross.member(&v(&[1.0, 1.0])).unwrap());
        assert!(cross.member(&v(&[1.0, -1.0])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = lower_half_plane().member(&v(&[1.0, 2.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
        assert!(lower_half_plane().distance(&v(&[1.0])).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(lower_half_plane().distance(&v(&[3.0, 2.0])).unwrap(), 2.0);
        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(ext.distance(&v(&[0.5, 0.0])).unwrap(), 0.5);
        let cross = ConstraintSet::cross([0.0, 0.0]).unwrap();
        assert_eq!(cross.distance(&v(&[1.0, 3.0])).unwrap(), 1.0);
        let bx = ConstraintSet::axis_box(vec![0.0, 0.0], vec![1.0, f64::INFINITY]).unwrap();
        assert!((bx.distance(&v(&[4.0, -4.0])).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn set_at_examples() {
        let fixed = MovingSet::fixed(lower_half_plane());
        assert_eq!(fixed.set_at(0.7).unwrap(), lower_half_plane());

        let down = MovingSet::translating(lower_half_plane(), v(&[0.0, -1.0])).unwrap();
        let c = down.set_at(0.5).unwrap();
        match c.shape() {
            Shape::HalfSpace(h) => assert_eq!(h.offset(), -0.5),
            _ => unreachable!(),
        }

        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let moving = MovingSet::translating(ext, v(&[1.0, 0.0])).unwrap();
        match moving.set_at(2.0).unwrap().shape() {
            Shape::BallExterior(b) => assert_eq!(b.center(), &v(&[2.0, 0.0])),
            _ => unreachable!(),
        }
    }

    #[test]
    fn ball_exterior_prox_constant_is_bounded_by_radius() {
        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 2.0).unwrap();
        assert_eq!(ext.prox_constant(), 2.0);
        assert!(ext.clone().with_prox(1.5).is_ok());
        assert!(ext.clone().with_prox(2.5).is_err());
        assert!(ext.with_prox(0.0).is_err());
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(ConstraintSet::axis_box(vec![1.0], vec![0.0]).is_err());
        let faces = vec![
            HalfSpace::new(v(&[1.0, 0.0]), -1.0).unwrap(),
            HalfSpace::new(v(&[-1.0, 0.0]), -1.0).unwrap(),
        ];
        assert!(matches!(ConstraintSet::polyhedron(faces), Err(Error::EmptySet(_))));
        assert!(ConstraintSet::ball_exterior(v(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn hausdorff_of_translations() {
        let base = lower_half_plane();
        let normal = MovingSet::translating(base.clone(), v(&[0.0, -2.0])).unwrap();
        let h = hausdorff(&normal.set_at(0.25).unwrap(), &normal.set_at(1.0).unwrap()).unwrap();
        assert!((h - 2.0 * 0.75).abs() <= 1e-12);

        // Tangential motion leaves a half-space invariant.
        let tangential = MovingSet::translating(base, v(&[3.0, 0.0])).unwrap();
        let h = hausdorff(&tangential.set_at(0.0).unwrap(), &tangential.set_at(1.0).unwrap()).unwrap();
        assert_eq!(h, 0.0);

        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let m = MovingSet::translating(ext, v(&[0.3, 0.4])).unwrap();
        let h = hausdorff(&m.set_at(0.0).unwrap(), &m.set_at(1.0).unwrap()).unwrap();
        assert!((h - 0.5).abs() <= 1e-12);
        let h_far = hausdorff(&m.set_at(0.0).unwrap(), &m.set_at(10.0).unwrap()).unwrap();
        assert_eq!(h_far, 1.0);
    }

    #[test]
    fn oscillation_obeys_declared_lipschitz_law() {
        let bx = ConstraintSet::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let m = MovingSet::oscillating(bx, v(&[0.3, 0.4]), 2.0).unwrap();
        assert!((m.speed() - 1.0).abs() < 1e-15);
        let times: Vec<f64> = (0..25).map(|k| k as f64 * 0.13).collect();
        assert!(m.lipschitz_excess(&times, 1e-12).unwrap() <= 0.0);
    }

    #[test]
    fn normal_cone_generators() {
        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let g = ext.normal_cone(&v(&[0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(g, vec![v(&[0.0, -1.0])]);
        assert!(ext.normal_cone(&v(&[0.0, 2.0]), 1e-9).unwrap().is_empty());
        let cross = ConstraintSet::cross([0.0, 0.0]).unwrap();
        assert!(cross.normal_cone(&v(&[0.0, 0.0]), 1e-9).unwrap().is_empty());
        assert_eq!(cross.normal_cone(&v(&[0.0, 2.0]), 1e-9).unwrap(), vec![v(&[1.0, 0.0])]);
    }
}
