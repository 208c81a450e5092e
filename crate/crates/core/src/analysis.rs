//! Verification harness: sampled checks of the quantitative statements of
//! the sweeping-process theory, each with a negative control.
//!
//! Statements about limits or almost-every time are checked through
//! discrete surrogates; every report names the surrogate it uses.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::catchup::{integrate, Perturbation, PerturbationBound, Problem, Trajectory};
use crate::crowd::{corridor_set, corridor_witness, simulate_crowd, Axis, CrowdRule, DiskConfiguration, DiskSet, Wall};
use crate::duality::PNormSpace;
use crate::geometry::{ConstraintSet, MovingSet, Shape, Vector};
use crate::options::SolverOptions;
use crate::projection::{in_gamma_r, project_cone, project_onto_generated_cone, project_with};
use crate::{Error, Result};

/// Violations kept verbatim in a report; the total is always counted.
pub const MAX_RECORDED: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub bound: String,
    pub index: usize,
    pub inputs: Vec<f64>,
    pub margin: f64,
}

/// Outcome of one check. Margins are slacks: negative means violated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<String>,
    pub samples: usize,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, surrogate: Option<&str>) -> Self {
        CheckReport {
            name: name.into(),
            surrogate: surrogate.map(str::to_string),
            samples: 0,
            violation_count: 0,
            violations: Vec::new(),
            worst_margin: None,
            metrics: BTreeMap::new(),
            pass: true,
        }
    }

    /// Records one evaluated inequality.
    pub fn record(&mut self, bound: &str, index: usize, margin: f64, inputs: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        self.worst_margin = Some(match self.worst_margin {
            Some(w) if !(margin < w) && !margin.is_nan() => w,
            _ => margin,
        });
        if !(margin >= 0.0) {
            self.violation_count += 1;
            self.pass = false;
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(Violation { bound: bound.to_string(), index, inputs: inputs(), margin });
            }
        }
    }

    /// A pass/fail condition with no natural margin.
    pub fn require(&mut self, bound: &str, index: usize, ok: bool) {
        self.record(bound, index, if ok { 0.0 } else { -1.0 }, Vec::new);
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(key.to_string(), value);
        }
    }

    /// Folds another report's samples into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.samples += other.samples;
        self.violation_count += other.violation_count;
        self.pass &= other.pass;
        if let Some(m) = other.worst_margin {
            self.worst_margin = Some(self.worst_margin.map_or(m, |w| w.min(m)));
        }
        for v in other.violations {
            if self.violations.len() < MAX_RECORDED {
                self.violations.push(v);
            }
        }
    }

    pub fn violated_bounds(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.violations.iter().map(|v| v.bound.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }
}

/// Two points of `C` with proximal normals.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalPair {
    pub z1: Vector,
    pub zeta1: Vector,
    pub z2: Vector,
    pub zeta2: Vector,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::raw((0..dim).map(|_| StandardNormal.sample(rng)).collect())
}

/// A point of `C` with a proximal normal: `z = P_C(x)` for `x` uniform in
/// the cube `center ± spread`, `ζ = s (x − z)/‖x − z‖` with `s ∈ [0, 2]`
/// (`ζ = 0` when `x ∈ C`).
fn sample_normal(set: &ConstraintSet, center: &Vector, spread: f64, rng: &mut ChaCha8Rng, opts: &SolverOptions) -> Result<(Vector, Vector)> {
    let x = Vector::raw(center.as_slice().iter().map(|c| c + spread * rng.random_range(-1.0..=1.0)).collect());
    let s: f64 = rng.random_range(0.0..=2.0);
    let p = project_with(set, &x, opts)?;
    let z = p.first().cloned().ok_or_else(|| Error::EmptySet("projection returned no point".into()))?;
    let zeta = (&x - &z).normalized_or_zero().scaled(s);
    Ok((z, zeta))
}

pub fn sample_normal_pairs(set: &ConstraintSet, center: &Vector, spread: f64, count: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<NormalPair>> {
    center.ensure_dim(set.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (z1, zeta1) = sample_normal(set, center, spread, &mut rng, opts)?;
            let (z2, zeta2) = sample_normal(set, center, spread, &mut rng, opts)?;
            Ok(NormalPair { z1, zeta1, z2, zeta2 })
        })
        .collect()
}

/// `⟨ζ₁ − ζ₂, z₁ − z₂⟩ ≥ −(‖ζ₁‖ + ‖ζ₂‖)‖z₁ − z₂‖²/η`, tolerance `1e−9`.
/// `η = ∞` is plain monotonicity.
pub fn check_hypomonotonicity(eta: f64, pairs: &[NormalPair]) -> CheckReport {
    let mut rep = CheckReport::new("hypomonotonicity", None);
    rep.metric("eta", eta);
    for (k, p) in pairs.iter().enumerate() {
        let dz = &p.z1 - &p.z2;
        let lhs = (&p.zeta1 - &p.zeta2).dot(&dz);
        let rhs = -(p.zeta1.norm() + p.zeta2.norm()) * dz.norm_sq() / eta;
        rep.record("hypomonotonicity", k, lhs - rhs + 1e-9, || {
            [p.z1.as_slice(), p.zeta1.as_slice(), p.z2.as_slice(), p.zeta2.as_slice()].concat()
        });
    }
    rep
}

/// Central-difference surrogate of `u̇ + P_{N(C,u)}[f(u)] = f(u)` at
/// interior grid times: residual `≤ c_eq·h`.
pub fn check_equation_equivalence(traj: &Trajectory, set: &ConstraintSet, f: &Perturbation, c_eq: f64, opts: &SolverOptions) -> Result<CheckReport> {
    let mut rep = CheckReport::new("equation_equivalence", Some("central difference at interior grid times"));
    let h = traj.h;
    let mut worst = 0.0f64;
    for i in 1..traj.steps() {
        let u = &traj.states[i];
        let du = (&traj.states[i + 1] - &traj.states[i - 1]).scaled(0.5 / h);
        let fu = f.eval(u)?;
        let gens = set.normal_cone(u, opts.tol.active)?;
        let pn = project_onto_generated_cone(&gens, &fu);
        let res = du.dist(&(&fu - &pn));
        worst = worst.max(res);
        rep.record("residual", i, c_eq * h + 1e-12 - res, || u.as_slice().to_vec());
    }
    rep.metric("h", h);
    rep.metric("max_residual", worst);
    rep.metric("c_eq", worst / h);
    rep.metric("declared_c_eq", c_eq);
    Ok(rep)
}

/// `e^{L_f T}(1 + margin)` when `f` has a known Lipschitz constant.
pub fn declared_stability_constant(p: &Problem, margin: f64) -> Option<f64> {
    p.f.lipschitz().map(|l| (l * p.horizon).exp() * (1.0 + margin))
}

/// `sup_t ‖u_n(t) − v_n(t)‖ / ‖u0 − v0‖ ≤ a` (ratio `0` when `u0 = v0`).
pub fn check_stability(p: &Problem, v0: &Vector, n: usize, a: f64, opts: &SolverOptions) -> Result<CheckReport> {
    let mut rep = CheckReport::new("stability", Some("grid sup-norm ratio of two discrete solutions"));
    let q = Problem::new(p.set.clone(), p.f.clone(), p.bound, v0.clone(), p.horizon, p.r)?;
    let u = integrate(p, n, opts)?;
    let v = integrate(&q, n, opts)?;
    let d0 = p.u0.dist(v0);
    let sup = u.states.iter().zip(&v.states).map(|(a, b)| a.dist(b)).fold(0.0, f64::max);
    let ratio = if d0 == 0.0 { 0.0 } else { sup / d0 };
    rep.record("stability", 0, a + 1e-9 - ratio, || [p.u0.as_slice(), v0.as_slice()].concat());
    rep.metric("ratio", ratio);
    rep.metric("declared_a", a);
    Ok(rep)
}

fn set_distance(set: &ConstraintSet, x: &Vector, opts: &SolverOptions) -> Result<f64> {
    if let Shape::Disks(d) = set.shape() {
        if d.is_feasible(x.as_slice(), 0.0) {
            return Ok(0.0);
        }
    }
    set.distance_with(x, opts)
}

fn feasibility_margin(set: &ConstraintSet, x: &Vector, opts: &SolverOptions) -> Result<f64> {
    Ok(match set.shape() {
        Shape::Disks(d) => d.min_constraint(x.as_slice()) + opts.tol.feas,
        _ => opts.tol.feas - set.distance_with(x, opts)?,
    })
}

/// Re-evaluates every per-step bound of a catching-up run from its states.
///
/// With `F[i]` the declared bound on `‖f(u[i])‖` and `B[i] = F[i] + speed`:
/// `‖Δ[i]‖ ≤ B[i]`, `‖u[i+1] − u[i]‖/h ≤ 2B[i]`, `h·B[i] ≤ r/2`,
/// `u[i] ∈ C(t[i])`, `d(u_n(t), C(t)) ≤ h·B[i]` on each interval, and on
/// analytic sets `−Δ[i] ∈ Γ^{r/B[i]}(C(t[i+1]), u[i+1])`.
pub fn audit_trajectory(traj: &Trajectory, p: &Problem, opts: &SolverOptions) -> Result<CheckReport> {
    let mut rep = CheckReport::new("audit", Some("per-step discrete bounds"));
    let h = traj.h;
    let speed = p.set.speed();
    let tol = 1e-9;
    let n = traj.steps();
    if traj.states.len() != n + 1 || traj.fvals.len() != n || traj.times.len() != n + 1 {
        return Err(Error::invalid("trajectory arrays have inconsistent lengths"));
    }
    let set0 = p.set.set_at(traj.times[0])?;
    let m0 = feasibility_margin(&set0, &traj.states[0], opts)?;
    rep.record("feasibility", 0, m0, || traj.states[0].as_slice().to_vec());
    let mut max_delta = 0.0f64;
    let mut max_speed = 0.0f64;
    let mut max_gap = 0.0f64;
    for i in 0..n {
        let u = &traj.states[i];
        let next = &traj.states[i + 1];
        let fu = p.f.eval(u)?;
        let f_bound = match p.bound {
            PerturbationBound::Sup(f) => f,
            PerturbationBound::LinearGrowth(l) => l * (1.0 + u.norm()),
        };
        let b = f_bound + speed;
        let inputs = || [u.as_slice(), next.as_slice()].concat();

        rep.record("perturbation_bound", i, f_bound + tol - fu.norm(), inputs);
        rep.record("fval_consistency", i, tol * (1.0 + fu.norm()) - fu.dist(&traj.fvals[i]), inputs);
        let mut recomputed = next - u;
        recomputed.axpy(-h, &fu);
        let recomputed = recomputed.scaled(1.0 / h);
        let delta = &traj.deltas[i];
        rep.record("delta_consistency", i, tol * (1.0 + recomputed.norm()) - delta.dist(&recomputed), inputs);
        rep.record("delta_bound", i, b + tol - delta.norm(), inputs);
        let sp = traj.speed(i);
        rep.record("speed", i, 2.0 * b + tol - sp, inputs);
        rep.record("step_rule", i, 0.5 * p.r * (1.0 + 1e-12) - h * b, inputs);
        max_delta = max_delta.max(delta.norm());
        max_speed = max_speed.max(sp);

        let t_next = traj.times[i + 1];
        let set_next = p.set.set_at(t_next)?;
        rep.record("feasibility", i + 1, feasibility_margin(&set_next, next, opts)?, || next.as_slice().to_vec());

        for w in [0.25, 0.5, 0.75] {
            let t = traj.times[i] + w * h;
            let x = traj.interpolate(t);
            let gap = set_distance(&p.set.set_at(t)?, &x, opts)?;
            max_gap = max_gap.max(gap);
            rep.record("interpolant_gap", i, h * b + opts.tol.feas - gap, || x.as_slice().to_vec());
        }

        if set_next.is_analytic() && b > 0.0 && !delta.is_zero() {
            // x ∈ P_C(x − (r/B)Δ), decided by distance as in `in_gamma_r`.
            let scale = p.r / b;
            let mut y = next.clone();
            y.axpy(-scale, delta);
            let d = set_next.distance_with(&y, opts)?;
            rep.record("gamma_direction", i, d + opts.tol.proj - scale * delta.norm(), inputs);
        }
    }
    rep.metric("max_delta", max_delta);
    rep.metric("max_speed", max_speed);
    rep.metric("max_interpolant_gap", max_gap);
    rep.metric("h", h);
    Ok(rep)
}

/// Moreau decomposition at a configuration: with `v` the projection of `u`
/// onto `{G_k·v ≥ 0}` and `w` the projection onto the cone generated by
/// `{−G_k}`, checks `v + w = u`, `⟨v, w⟩ = 0`, `λ ≥ 0`, `G_k·v ≥ 0` and
/// `λ_k (G_k·v) = 0`.
pub fn check_polar_decomposition(gradients: &[Vector], u: &Vector, tol: f64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("moreau", None);
    let cone = project_cone(gradients, u)?;
    let negated: Vec<Vector> = gradients.iter().map(|g| g.scaled(-1.0)).collect();
    let w = project_onto_generated_cone(&negated, u);
    let scale = 1.0 + u.norm();
    let inputs = || u.as_slice().to_vec();
    rep.record("identity", 0, tol * scale - (&cone.v + &w).dist(u), inputs);
    rep.record("orthogonality", 0, tol * scale * scale - cone.v.dot(&w).abs(), inputs);
    rep.record("normal_component", 0, tol * scale - cone.normal_component(u).dist(&w), inputs);
    for (k, (g, &l)) in gradients.iter().zip(&cone.lambdas).enumerate() {
        let gv = g.dot(&cone.v);
        rep.record("lambda_sign", k, l, inputs);
        rep.record("feasible_velocity", k, gv + tol * scale, inputs);
        rep.record("complementarity", k, tol * scale - (l * gv).abs(), inputs);
    }
    Ok(rep)
}

/// A random configuration of at most `max_disks` disks built by chaining
/// touching disks, with optional walls touching extreme disks, and a
/// Gaussian spontaneous velocity.
pub fn random_contact_configuration(rng: &mut ChaCha8Rng, max_disks: usize) -> Result<(DiskConfiguration, Vector)> {
    let count = rng.random_range(1..=max_disks.max(1));
    let radius = rng.random_range(0.3..=1.0);
    let mut q = vec![0.0, 0.0];
    let mut tries = 0;
    while q.len() < 2 * count {
        tries += 1;
        if tries > 1000 {
            break;
        }
        let j = rng.random_range(0..q.len() / 2);
        let phi = rng.random_range(0.0..2.0 * PI);
        let c = [q[2 * j] + 2.0 * radius * phi.cos(), q[2 * j + 1] + 2.0 * radius * phi.sin()];
        let clear = (0..q.len() / 2).all(|k| k == j || (c[0] - q[2 * k]).hypot(c[1] - q[2 * k + 1]) >= 2.0 * radius);
        if clear {
            q.extend(c);
        }
    }
    let count = q.len() / 2;
    let mut walls = Vec::new();
    if rng.random_bool(0.5) {
        let (k, x) = (0..count).map(|k| (k, q[2 * k])).min_by(|a, b| a.1.total_cmp(&b.1)).expect("one disk");
        let shared = rng.random_bool(0.5);
        walls.push(Wall::lower(if shared { None } else { Some(k) }, Axis::X, x));
    }
    if rng.random_bool(0.5) {
        let (k, y) = (0..count).map(|k| (k, q[2 * k + 1])).max_by(|a, b| a.1.total_cmp(&b.1)).expect("one disk");
        walls.push(Wall::upper(Some(k), Axis::Y, y));
    }
    let set = DiskSet::new(count, radius, walls)?;
    let u = gaussian(rng, 2 * count);
    Ok((DiskConfiguration::new(set, Vector::raw(q))?, u))
}

/// Scaling of certified directions: for certified `v ∈ Γ^r(C, x)`, every `λv` with
/// `λ ∈ lambdas` is still in `Γ^r(C, x)`.
pub fn check_gamma_scaling(set: &ConstraintSet, triples: &[(Vector, Vector, f64)], lambdas: &[f64], opts: &SolverOptions) -> Result<CheckReport> {
    let mut rep = CheckReport::new("gamma_scaling", None);
    for (k, (x, v, r)) in triples.iter().enumerate() {
        rep.require("premise", k, in_gamma_r(set, x, v, *r, opts)?);
        for &l in lambdas {
            rep.require("scaled", k, in_gamma_r(set, x, &v.scaled(l), *r, opts)?);
        }
    }
    Ok(rep)
}

/// Random `(x, v, r)` with `x = P_C(z)` for `z` in the cube
/// `center ± spread` and `v` along the proximal normal `z − x`, kept only
/// when `v ∈ Γ^r(C, x)`.
pub fn sample_gamma_triples(set: &ConstraintSet, center: &Vector, spread: f64, count: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<(Vector, Vector, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > 100 * count + 1000 {
            return Err(Error::invalid("could not sample enough certified directions"));
        }
        let z = Vector::raw(center.as_slice().iter().map(|c| c + spread * rng.random_range(-1.0..=1.0)).collect());
        let p = project_with(set, &z, opts)?;
        let Some(x) = p.first().cloned() else { continue };
        let dir = (&z - &x).normalized_or_zero();
        if dir.is_zero() {
            continue;
        }
        let v = dir.scaled(rng.random_range(0.1..=2.0));
        let r = spread * rng.random_range(0.1..=2.0);
        if in_gamma_r(set, &x, &v, r, opts)? {
            out.push((x, v, r));
        }
    }
    Ok(out)
}

/// Homogeneity, pairing, finite-difference gradient and (for `p = 2`)
/// identity of `J_p` on random vectors, plus the continuity modulus.
pub fn check_duality(space: &PNormSpace, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new(format!("duality_p{}", space.p()), Some("central finite differences, step 1e-5"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.dim();
    let p = space.p();
    for k in 0..samples {
        let mut x = Vector::raw((0..d).map(|_| rng.random_range(-2.0..=2.0)).collect());
        if k % 10 == 0 {
            x = x.scaled(1e-3);
        }
        let s: f64 = rng.random_range(1e-3..=3.0);
        let jx = space.jp(&x)?;
        let inputs = || x.as_slice().to_vec();

        let lhs = space.jp(&x.scaled(s))?;
        let rhs = jx.scaled(s.powf(p - 1.0));
        rep.record("homogeneity", k, 1e-9 * (1.0 + rhs.norm()) - lhs.dist(&rhs), inputs);

        let np = space.norm(&x)?.powf(p);
        rep.record("pairing", k, 1e-9 * (1.0 + np) - (jx.dot(&x) - np).abs(), inputs);

        let step = 1e-5;
        let mut fd_err = 0.0f64;
        for c in 0..d {
            let e = Vector::unit(d, c);
            let mut a = x.clone();
            a.axpy(step, &e);
            let mut b = x.clone();
            b.axpy(-step, &e);
            let g = (space.potential(&a)? - space.potential(&b)?) / (2.0 * step);
            fd_err = fd_err.max((g - jx[c]).abs());
        }
        rep.record("gradient", k, 1e-6 - fd_err, inputs);

        if p == 2.0 {
            rep.require("identity", k, jx == x);
        }
    }
    let coarse = space.continuity_modulus(1e-2, samples, seed ^ 0x9e37);
    let fine = space.continuity_modulus(1e-3, samples, seed ^ 0x9e37);
    rep.metric("modulus_1e-2", coarse);
    rep.metric("modulus_1e-3", fine);
    rep.require("modulus_decreasing", 0, fine < coarse);
    Ok(rep)
}

fn v2(x: f64, y: f64) -> Vector {
    Vector::raw(vec![x, y])
}

/// Half-plane `{x₂ ≤ 0}`, `f ≡ (1, 1)`, `T = 1`.
pub fn half_plane_slide() -> Result<Problem> {
    Problem::new(
        MovingSet::fixed(ConstraintSet::half_space(v2(0.0, 1.0), 0.0)?),
        Perturbation::Constant(v2(1.0, 1.0)),
        PerturbationBound::Sup(2f64.sqrt()),
        v2(0.0, 0.0),
        1.0,
        1.0,
    )
}

/// Exterior of the unit disk, `f ≡ (1, 0)`, `u0` at angle `θ0`.
pub fn ball_slide(theta0: f64, horizon: f64) -> Result<Problem> {
    Problem::new(
        MovingSet::fixed(ConstraintSet::ball_exterior(v2(0.0, 0.0), 1.0)?),
        Perturbation::Constant(v2(1.0, 0.0)),
        PerturbationBound::Sup(1.0),
        v2(theta0.cos(), theta0.sin()),
        horizon,
        1.0,
    )
}

/// `C(t) = {x₂ ≤ −t}`, `f ≡ 0`, `T = 1`.
pub fn translating_half_plane() -> Result<Problem> {
    Problem::new(
        MovingSet::translating(ConstraintSet::half_space(v2(0.0, 1.0), 0.0)?, v2(0.0, -1.0))?,
        Perturbation::Constant(v2(0.0, 0.0)),
        PerturbationBound::Sup(0.0),
        v2(0.0, 0.0),
        1.0,
        1.0,
    )
}

/// Two disks in the corridor with `r = 1`, `ε = 0.01`, squeezed past each
/// other by `U = (1, 0, −1, 0)`.
pub fn corridor_crowd() -> Result<(ConstraintSet, Vector, CrowdRule)> {
    let set = ConstraintSet::disks(corridor_set(1.0, 0.01)?);
    let q0 = Vector::new(vec![1.0, -0.5, 2.98, 0.5])?;
    Ok((set, q0, CrowdRule::Constant(Vector::new(vec![1.0, 0.0, -1.0, 0.0])?)))
}

/// Verification suites accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "hypomonotonicity",
    "hypomonotonicity-negative",
    "moreau",
    "duality",
    "gamma-scaling",
    "equivalence",
    "stability",
    "audit",
    "audit-negative",
    "corridor",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

fn named(mut rep: CheckReport, name: &str) -> CheckReport {
    rep.name = name.to_string();
    rep
}

fn hypomonotonicity_suite(inflate: f64, opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let ball = ConstraintSet::ball_exterior(v2(0.0, 0.0), 1.0)?;
    let pairs = sample_normal_pairs(&ball, &v2(0.0, 0.0), 1.0, 10_000, opts.seed, opts)?;
    let mut out = vec![named(check_hypomonotonicity(inflate * ball.prox_constant(), &pairs), "ball_exterior")];
    if inflate == 1.0 {
        let half = ConstraintSet::half_space(v2(1.0, 1.0), 0.5)?;
        let pairs = sample_normal_pairs(&half, &v2(0.0, 0.0), 2.0, 1000, opts.seed, opts)?;
        out.push(named(check_hypomonotonicity(f64::INFINITY, &pairs), "half_space_monotone"));
    }
    Ok(out)
}

fn moreau_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let reps = opts.execution.map(1000, |k| -> Result<CheckReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::projection::mix_seed(opts.seed, k as u64));
        let (c, u) = random_contact_configuration(&mut rng, 5)?;
        let basis = crate::crowd::contact_basis(&c, opts.tol.active, opts.tol.feas)?;
        check_polar_decomposition(&basis.gradients, &u, 1e-10)
    });
    let mut total = CheckReport::new("moreau", None);
    for r in reps {
        total.absorb(r?);
    }
    Ok(vec![total])
}

fn duality_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    [2.0, 4.0, 6.0]
        .iter()
        .map(|&p| check_duality(&PNormSpace::new(4, p)?, 1000, opts.seed))
        .collect()
}

fn gamma_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let ball = ConstraintSet::ball_exterior(v2(0.0, 0.0), 1.0)?;
    let triples = sample_gamma_triples(&ball, &v2(0.0, 0.0), 1.0, 100, opts.seed, opts)?;
    let lambdas: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    Ok(vec![check_gamma_scaling(&ball, &triples, &lambdas, opts)?])
}

/// Residual of the equivalence check on the ball slide for each `n`.
pub fn equivalence_residuals(ns: &[usize], opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let p = ball_slide(3.0 * PI / 4.0, 0.5)?;
    let set = p.set.base().clone();
    ns.iter()
        .map(|&n| check_equation_equivalence(&integrate(&p, n, opts)?, &set, &p.f, 10.0, opts))
        .collect()
}

fn equivalence_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let hp = half_plane_slide()?;
    let traj = integrate(&hp, 20, opts)?;
    let mut out = vec![named(check_equation_equivalence(&traj, hp.set.base(), &hp.f, 1e-9, opts)?, "half_plane")];
    let reps = equivalence_residuals(&[50, 100, 200, 400], opts)?;
    let mut halving = CheckReport::new("halving", Some("max residual ratio under h → h/2"));
    for (k, w) in reps.windows(2).enumerate() {
        let ratio = w[1].metrics["max_residual"] / w[0].metrics["max_residual"];
        halving.record("ratio_low", k, ratio - 0.4, Vec::new);
        halving.record("ratio_high", k, 0.6 - ratio, Vec::new);
        halving.metric(&format!("ratio_{k}"), ratio);
    }
    out.extend(reps.into_iter().map(|r| named(r, "ball_slide")));
    out.push(halving);
    Ok(out)
}

fn stability_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let hp = half_plane_slide()?;
    let a = declared_stability_constant(&hp, 1e-2).expect("constant field");
    let mut out = vec![named(check_stability(&hp, &v2(0.1, 0.0), 100, a, opts)?, "half_plane")];
    let th = 3.0 * PI / 4.0;
    let slide = ball_slide(th, 0.5)?;
    let a = slide.horizon.exp() * (1.0 + 1e-2);
    let v0 = v2((th + 0.01).cos(), (th + 0.01).sin());
    out.push(named(check_stability(&slide, &v0, 200, a, opts)?, "ball_slide"));
    out.push(named(check_stability(&slide, &slide.u0.clone(), 200, a, opts)?, "identical_data"));
    Ok(out)
}

fn builtin_audits(opts: &SolverOptions) -> Result<Vec<(String, Trajectory, Problem)>> {
    let mut runs = Vec::new();
    for (name, p, n) in [
        ("half_plane", half_plane_slide()?, 50),
        ("ball_slide", ball_slide(3.0 * PI / 4.0, 0.5)?, 100),
        ("translating_half_plane", translating_half_plane()?, 20),
    ] {
        runs.push((name.to_string(), integrate(&p, n, opts)?, p));
    }
    let (set, q0, rule) = corridor_crowd()?;
    let crowd = simulate_crowd(&set, &q0, &rule, 1.0, 50, opts)?;
    runs.push(("corridor_crowd".to_string(), crowd.sweeping, crowd.problem));
    Ok(runs)
}

fn audit_suite(corrupt: bool, opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    builtin_audits(opts)?
        .into_iter()
        .map(|(name, mut traj, p)| {
            if corrupt {
                for d in &mut traj.deltas {
                    *d = d.scaled(3.0);
                }
            }
            Ok(named(audit_trajectory(&traj, &p, opts)?, &name))
        })
        .collect()
}

fn corridor_suite(opts: &SolverOptions) -> Result<Vec<CheckReport>> {
    let mut rep = CheckReport::new("corridor_sqrt_law", None);
    let mut ratios = Vec::new();
    for (k, eps) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let w = corridor_witness(1.0, eps, opts)?;
        rep.require("multivalued", k, w.projection.nearest.len() >= 2);
        rep.record("distance", k, 1e-6 - (w.projection.dist - w.expected_dist).abs(), || vec![eps]);
        ratios.push(w.projection.dist / eps.sqrt());
        rep.metric(&format!("ratio_eps_{k}"), w.projection.dist / eps.sqrt());
    }
    for (k, r) in ratios.iter().enumerate().skip(1) {
        rep.record("ratio_constant", k, 1e-4 - ((r - ratios[0]) / ratios[0]).abs(), Vec::new);
    }
    let (set, q0, rule) = corridor_crowd()?;
    let crowd = simulate_crowd(&set, &q0, &rule, 1.0, 50, opts)?;
    let audit = named(audit_trajectory(&crowd.sweeping, &crowd.problem, opts)?, "corridor_crowd_audit");
    Ok(vec![rep, audit])
}

/// Runs a named suite. Suites ending in `-negative` feed deliberately
/// corrupted inputs and are expected to fail.
pub fn run_suite(name: &str, opts: &SolverOptions) -> Result<SuiteReport> {
    let checks = match name {
        "hypomonotonicity" => hypomonotonicity_suite(1.0, opts)?,
        "hypomonotonicity-negative" => hypomonotonicity_suite(10.0, opts)?,
        "moreau" => moreau_suite(opts)?,
        "duality" => duality_suite(opts)?,
        "gamma-scaling" => gamma_suite(opts)?,
        "equivalence" => equivalence_suite(opts)?,
        "stability" => stability_suite(opts)?,
        "audit" => audit_suite(false, opts)?,
        "audit-negative" => audit_suite(true, opts)?,
        "corridor" => corridor_suite(opts)?,
        other => return Err(Error::invalid(format!("unknown suite {other:?}; known suites: {}", SUITES.join(", ")))),
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { suite: name.to_string(), checks, pass })
}
