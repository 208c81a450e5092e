//! The catching-up integrator for `u̇ + N(C(t), u) ∋ f(u)`.
//!
//! Each step freezes the perturbation and projects onto the set at the end
//! of the step:
//!
//! ```text
//! u[i+1] = P_{C(t[i+1])}(u[i] + h f(u[i])),   h = T/n
//! ```
//!
//! The run records `Δ[i] = (u[i+1] − u[i] − h f(u[i]))/h` together with the
//! per-step bound used for the step rule `h·B ≤ r/2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::geometry::{ConstraintSet, MovingSet, Shape, Vector};
use crate::options::SolverOptions;
use crate::projection::{project_disk_config, project_with, ProjectionResult};
use crate::{Error, Result};

type FieldRule = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;

/// Single-valued perturbation `f`.
#[derive(Clone)]
pub enum Perturbation {
    Constant(Vector),
    /// `f(x) = A x + b` with `A` given by rows.
    Affine { matrix: Vec<Vec<f64>>, offset: Vector },
    Field { label: String, rule: FieldRule },
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Perturbation::Affine { matrix, offset } => {
                f.debug_struct("Affine").field("matrix", matrix).field("offset", offset).finish()
            }
            Perturbation::Field { label, .. } => f.debug_struct("Field").field("label", label).finish(),
        }
    }
}

impl Perturbation {
    pub fn field<F>(label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        Perturbation::Field { label: label.into(), rule: Arc::new(rule) }
    }

    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vector) -> Result<Self> {
        let d = offset.dim();
        if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::invalid(format!("affine perturbation needs a {d}×{d} matrix")));
        }
        if matrix.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::invalid("affine perturbation matrix must be finite"));
        }
        Ok(Perturbation::Affine { matrix, offset })
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        match self {
            Perturbation::Constant(c) => {
                c.ensure_dim(x.dim())?;
                Ok(c.clone())
            }
            Perturbation::Affine { matrix, offset } => {
                offset.ensure_dim(x.dim())?;
                let out = matrix
                    .iter()
                    .zip(offset.as_slice())
                    .map(|(row, b)| row.iter().zip(x.as_slice()).map(|(a, xi)| a * xi).sum::<f64>() + b)
                    .collect();
                Ok(Vector::raw(out))
            }
            Perturbation::Field { rule, .. } => {
                let v = rule(x)?;
                v.ensure_dim(x.dim())?;
                Ok(v)
            }
        }
    }

    /// Lipschitz constant when it is known in closed form.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Perturbation::Constant(_) => Some(0.0),
            Perturbation::Affine { matrix, .. } => {
                let d = matrix.len();
                let m = DMatrix::from_fn(d, d, |i, j| matrix[i][j]);
                Some(m.singular_values().max())
            }
            Perturbation::Field { .. } => None,
        }
    }
}

/// Declared bound on the perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationBound {
    /// `‖f‖∞ ≤ f_inf`.
    Sup(f64),
    /// `‖f(x)‖ ≤ L(1 + ‖x‖)`.
    LinearGrowth(f64),
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub set: MovingSet,
    pub f: Perturbation,
    pub bound: PerturbationBound,
    pub u0: Vector,
    pub horizon: f64,
    pub r: f64,
}

impl Problem {
    pub fn new(set: MovingSet, f: Perturbation, bound: PerturbationBound, u0: Vector, horizon: f64, r: f64) -> Result<Self> {
        u0.ensure_dim(set.dim())?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!("prox-regularity scale r must be positive, got {r}")));
        }
        let constant = match bound {
            PerturbationBound::Sup(c) | PerturbationBound::LinearGrowth(c) => c,
        };
        if !(constant.is_finite() && constant >= 0.0) {
            return Err(Error::invalid(format!("perturbation bound must be finite and nonnegative, got {constant}")));
        }
        if matches!(bound, PerturbationBound::LinearGrowth(l) if l == 0.0) {
            return Err(Error::invalid("linear-growth constant must be positive"));
        }
        let p = Problem { set, f, bound, u0, horizon, r };
        if !(p.step_bound() > 0.0) {
            return Err(Error::invalid("perturbation bound and set speed are both zero"));
        }
        if !p.set.set_at(0.0)?.member(&p.u0)? {
            return Err(Error::invalid("initial state is not in C(0)"));
        }
        Ok(p)
    }

    /// A priori bound `M` on `‖u‖` over `[t0, t0 + len]` starting from
    /// `norm0`: `1 + M ≤ (1 + norm0 + speed·len) e^{2L·len}`.
    fn growth_radius(&self, l: f64, norm0: f64, len: f64) -> f64 {
        (1.0 + norm0 + self.set.speed() * len) * (2.0 * l * len).exp() - 1.0
    }

    /// The bound `B` entering the step rule `h·B ≤ r/2`: `f_inf + speed`,
    /// or `L(1 + M) + speed` with the a priori radius `M` on `[0, T]`.
    pub fn step_bound(&self) -> f64 {
        match self.bound {
            PerturbationBound::Sup(f) => f + self.set.speed(),
            PerturbationBound::LinearGrowth(l) => {
                l * (1.0 + self.growth_radius(l, self.u0.norm(), self.horizon)) + self.set.speed()
            }
        }
    }

    /// Smallest `n` with `(T/n)·B ≤ r/2`.
    pub fn min_steps(&self) -> usize {
        let x = 2.0 * self.horizon * self.step_bound() / self.r;
        let mut n = x.ceil().max(1.0) as usize;
        while self.horizon / n as f64 * self.step_bound() > 0.5 * self.r {
            n += 1;
        }
        n
    }

    pub fn step_size(&self, n: usize) -> f64 {
        self.horizon / n as f64
    }
}

/// Discrete solution on the uniform grid `t[i] = i·h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub h: f64,
    pub r: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// `Δ[i]` for `i < n`.
    pub deltas: Vec<Vector>,
    /// Frozen perturbation values `f(u[i])`.
    pub fvals: Vec<Vector>,
    /// Per-step bound `B[i]` with `h·B[i] ≤ r/2`.
    pub bounds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<Vec<f64>>>,
    /// Steps whose projection had several minimizers.
    pub flagged_steps: Vec<usize>,
}

impl Trajectory {
    pub(crate) fn start(u0: Vector, h: f64, r: f64) -> Self {
        Trajectory {
            h,
            r,
            times: vec![0.0],
            states: vec![u0],
            deltas: Vec::new(),
            fvals: Vec::new(),
            bounds: Vec::new(),
            multipliers: None,
            flagged_steps: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, state: Vector, delta: Vector, fval: Vector, bound: f64) {
        self.times.push(t);
        self.states.push(state);
        self.deltas.push(delta);
        self.fvals.push(fval);
        self.bounds.push(bound);
    }

    pub fn steps(&self) -> usize {
        self.deltas.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trajectory holds u0")
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectory holds t0")
    }

    /// Piecewise-linear interpolant `u_n(t)`, clamped to the grid.
    pub fn interpolate(&self, t: f64) -> Vector {
        let n = self.steps();
        if n == 0 || t <= 0.0 {
            return self.states[0].clone();
        }
        let s = t / self.h;
        let i = (s.floor() as usize).min(n - 1);
        let w = (s - i as f64).clamp(0.0, 1.0);
        let a = &self.states[i];
        let b = &self.states[i + 1];
        let mut out = a.scaled(1.0 - w);
        out.axpy(w, b);
        out
    }

    /// Discrete speed `‖u[i+1] − u[i]‖/h`.
    pub fn speed(&self, i: usize) -> f64 {
        self.states[i + 1].dist(&self.states[i]) / self.h
    }
}

/// Result of one catching-up step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: Vector,
    /// Set when the projection had several minimizers; `next` is then the
    /// lexicographically smallest.
    pub tie: bool,
    pub projection: ProjectionResult,
}

/// One step `P_C(u + h·fval)` onto a fixed set.
pub fn step(set: &ConstraintSet, u: &Vector, h: f64, fval: &Vector, r: f64, opts: &SolverOptions) -> Result<StepOutcome> {
    u.ensure_dim(set.dim())?;
    fval.ensure_dim(set.dim())?;
    if !set.member_with(u, opts.tol.feas)? {
        return Err(Error::invalid("step requires the current state to be in the set"));
    }
    if h * fval.norm() > 0.5 * r * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("step violates h·‖f‖ ≤ r/2 (h = {h}, ‖f‖ = {}, r = {r})", fval.norm())));
    }
    advance(set, u, h, fval, opts)
}

fn advance(set: &ConstraintSet, u: &Vector, h: f64, fval: &Vector, opts: &SolverOptions) -> Result<StepOutcome> {
    let mut target = u.clone();
    target.axpy(h, fval);
    let projection = match set.shape() {
        Shape::Disks(d) => project_disk_config(d, &target, std::slice::from_ref(u), opts)?,
        _ => project_with(set, &target, opts)?,
    };
    if !projection.converged {
        return Err(Error::NonConvergence { what: "projection", iterations: projection.iterations });
    }
    let next = projection.first().cloned().ok_or_else(|| Error::EmptySet("projection returned no point".into()))?;
    Ok(StepOutcome { next, tie: !projection.is_unique(), projection })
}

/// Runs the catching-up scheme with `n` uniform steps.
pub fn integrate(p: &Problem, n: usize, opts: &SolverOptions) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::invalid("number of steps must be positive"));
    }
    let min_n = p.min_steps();
    if n < min_n {
        return Err(Error::StepRule { n, min_n });
    }
    let h = p.step_size(n);
    let speed = p.set.speed();
    let mut traj = Trajectory::start(p.u0.clone(), h, p.r);
    let mut multipliers = Vec::with_capacity(n);
    let mut all_multipliers = true;

    // Linear growth: windows of length ≤ 1/(4L) with their own a priori radius.
    let mut window_bound = match p.bound {
        PerturbationBound::Sup(f) => f + speed,
        PerturbationBound::LinearGrowth(_) => 0.0,
    };
    let mut window_end = 0usize;

    for i in 0..n {
        let u = traj.states[i].clone();
        if let PerturbationBound::LinearGrowth(l) = p.bound {
            if i == window_end {
                let per_window = ((1.0 / (4.0 * l)) / h * (1.0 + 1e-12)).floor().max(1.0) as usize;
                window_end = (i + per_window).min(n);
                let len = (window_end - i) as f64 * h;
                window_bound = l * (1.0 + p.growth_radius(l, u.norm(), len)) + speed;
            }
        }
        let fail = |traj: &Trajectory, reason: Error| Error::StepFailed {
            step: i,
            reason: Box::new(reason),
            partial: Box::new(traj.clone()),
        };
        let fval = match p.f.eval(&u) {
            Ok(v) => v,
            Err(e) => return Err(fail(&traj, e)),
        };
        let t_next = (i + 1) as f64 * h;
        let set = match p.set.set_at(t_next) {
            Ok(s) => s,
            Err(e) => return Err(fail(&traj, e)),
        };
        let out = match advance(&set, &u, h, &fval, opts) {
            Ok(o) => o,
            Err(e) => return Err(fail(&traj, e)),
        };
        if out.tie {
            traj.flagged_steps.push(i);
        }
        match &out.projection.multipliers {
            Some(m) => multipliers.push(m.clone()),
            None => all_multipliers = false,
        }
        let mut delta = &out.next - &u;
        delta.axpy(-h, &fval);
        let delta = delta.scaled(1.0 / h);
        traj.push(t_next, out.next, delta, fval, window_bound);
    }
    if all_multipliers {
        traj.multipliers = Some(multipliers);
    }
    Ok(traj)
}

type ReferenceRule = Arc<dyn Fn(f64) -> Result<Vector> + Send + Sync>;

/// Limit solution used by [`convergence_study`].
#[derive(Clone)]
pub enum Reference {
    ClosedForm { label: String, rule: ReferenceRule },
    /// Solution on a grid of `4·max(n_list)` steps.
    FinestGrid,
}

impl fmt::Debug for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::ClosedForm { label, .. } => f.debug_struct("ClosedForm").field("label", label).finish(),
            Reference::FinestGrid => f.write_str("FinestGrid"),
        }
    }
}

fn constant_field(p: &Problem) -> Option<&Vector> {
    match &p.f {
        Perturbation::Constant(c) => Some(c),
        _ => None,
    }
}

impl Reference {
    pub fn label(&self) -> &str {
        match self {
            Reference::ClosedForm { label, .. } => label,
            Reference::FinestGrid => "finest_grid",
        }
    }

    /// Slide of a point along the exterior of a fixed ball under a constant
    /// field. With `ψ` the angle between the position and the field,
    /// `ψ̇ = −(s/R) sin ψ` while the field pushes into the ball, then free
    /// flight once `|ψ| = π/2`.
    pub fn circle_slide(p: &Problem) -> Result<Self> {
        let Shape::BallExterior(ball) = p.set.base().shape() else {
            return Err(Error::invalid("circle slide reference needs a ball exterior"));
        };
        let f = constant_field(p).ok_or_else(|| Error::invalid("circle slide reference needs a constant field"))?;
        if !p.set.is_fixed() || p.u0.dim() != 2 {
            return Err(Error::invalid("circle slide reference needs a fixed planar set"));
        }
        let c = [ball.center()[0], ball.center()[1]];
        let radius = ball.radius();
        let rel = [p.u0[0] - c[0], p.u0[1] - c[1]];
        let rho = rel[0].hypot(rel[1]);
        if (rho - radius).abs() > 1e-9 * radius.max(1.0) {
            return Err(Error::invalid("circle slide reference needs u0 on the sphere"));
        }
        let s = f.norm();
        let alpha = f[1].atan2(f[0]);
        let theta0 = rel[1].atan2(rel[0]);
        let psi0 = wrap_angle(theta0 - alpha);
        let fv = [f[0], f[1]];
        let on_circle = move |t: f64| {
            let psi = 2.0 * ((psi0 / 2.0).tan() * (-s * t / radius).exp()).atan();
            let th = psi + alpha;
            [c[0] + radius * th.cos(), c[1] + radius * th.sin()]
        };
        // Release time: |ψ| = π/2.
        let release = if s == 0.0 || psi0.abs() <= std::f64::consts::FRAC_PI_2 {
            0.0
        } else if psi0.abs() >= std::f64::consts::PI {
            f64::INFINITY
        } else {
            radius / s * (psi0.abs() / 2.0).tan().ln()
        };
        let rule = move |t: f64| {
            let (base, dt) = if t <= release {
                (on_circle(t), 0.0)
            } else if release == 0.0 {
                ([c[0] + rel[0], c[1] + rel[1]], t)
            } else {
                (on_circle(release), t - release)
            };
            Vector::new(vec![base[0] + dt * fv[0], base[1] + dt * fv[1]])
        };
        Ok(Reference::ClosedForm { label: "circle_slide".into(), rule: Arc::new(rule) })
    }

    /// `u(t) = P_{C(t)}(u0 + t f)` for half-spaces and boxes, fixed or
    /// translating, under a constant field.
    pub fn projected_free_flight(p: &Problem) -> Result<Self> {
        if !matches!(p.set.base().shape(), Shape::HalfSpace(_) | Shape::AxisBox(_)) {
            return Err(Error::invalid("projected free flight reference needs a half-space or a box"));
        }
        if !matches!(p.set.motion(), crate::geometry::Motion::Fixed | crate::geometry::Motion::Translation { .. }) {
            return Err(Error::invalid("projected free flight reference needs a fixed or translating set"));
        }
        let f = constant_field(p).ok_or_else(|| Error::invalid("projected free flight reference needs a constant field"))?.clone();
        let set = p.set.clone();
        let u0 = p.u0.clone();
        let rule = move |t: f64| {
            let mut x = u0.clone();
            x.axpy(t, &f);
            let proj = project_with(&set.set_at(t)?, &x, &SolverOptions::default())?;
            proj.first().cloned().ok_or_else(|| Error::EmptySet("projection returned no point".into()))
        };
        Ok(Reference::ClosedForm { label: "projected_free_flight".into(), rule: Arc::new(rule) })
    }

    /// A closed form for the problem if one is known.
    pub fn closed_form(p: &Problem) -> Option<Self> {
        Reference::circle_slide(p).or_else(|_| Reference::projected_free_flight(p)).ok()
    }
}

fn wrap_angle(a: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut x = a % tau;
    if x > std::f64::consts::PI {
        x -= tau;
    } else if x <= -std::f64::consts::PI {
        x += tau;
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    /// `max_i ‖u_n(t[i]) − u_ref(t[i])‖` over the grid of `n`.
    pub gap: f64,
}

/// `‖u_n − u_m‖` on the grid of `n` for consecutive entries of the list.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingRow {
    pub n: usize,
    pub m: usize,
    pub gap: f64,
    /// `n · gap`.
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
    pub doubling: Vec<DoublingRow>,
    /// Least-squares slope of `−log gap` against `log n`; `None` when exact.
    pub fitted_order: Option<f64>,
    /// All gaps at rounding level.
    pub exact: bool,
    /// `max n·gap(n, m)`.
    pub kappa: f64,
    /// Successive gaps between consecutive runs never increase.
    pub doubling_monotone: bool,
}

impl ConvergenceStudy {
    pub fn order_label(&self) -> String {
        match self.fitted_order {
            Some(p) if !self.exact => format!("{p}"),
            _ => "exact".to_string(),
        }
    }
}

fn sup_gap(a: &Trajectory, b: impl Fn(f64) -> Result<Vector>) -> Result<f64> {
    let mut gap = 0.0f64;
    for (t, u) in a.times.iter().zip(&a.states) {
        gap = gap.max(u.dist(&b(*t)?));
    }
    Ok(gap)
}

/// Least-squares slope of `log y` against `log x`, negated.
pub fn fitted_order(ns: &[usize], gaps: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(gaps)
        .filter(|(_, g)| **g > 0.0)
        .map(|(n, g)| ((*n as f64).ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

/// Sup-norm gaps to a reference for each `n`, runs in parallel.
pub fn convergence_study(p: &Problem, n_list: &[usize], reference: &Reference, opts: &SolverOptions) -> Result<ConvergenceStudy> {
    if n_list.len() < 3 {
        return Err(Error::invalid(format!("convergence study needs at least 3 step counts, got {}", n_list.len())));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("step counts must be strictly increasing"));
    }
    let n_max = *n_list.last().expect("nonempty");
    let mut jobs: Vec<usize> = n_list.to_vec();
    if matches!(reference, Reference::FinestGrid) {
        jobs.push(4 * n_max);
    }
    let runs: Vec<Result<Trajectory>> = opts.execution.map_slice(&jobs, |&n| integrate(p, n, opts));
    let runs: Vec<Trajectory> = runs.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let gap = match reference {
            Reference::ClosedForm { rule, .. } => sup_gap(&runs[k], |t| rule(t))?,
            Reference::FinestGrid => {
                let fine = runs.last().expect("finest run");
                sup_gap(&runs[k], |t| Ok(fine.interpolate(t)))?
            }
        };
        rows.push(ConvergenceRow { n, h: p.step_size(n), gap });
    }
    let mut doubling = Vec::new();
    for k in 0..n_list.len() - 1 {
        let fine = &runs[k + 1];
        let gap = sup_gap(&runs[k], |t| Ok(fine.interpolate(t)))?;
        doubling.push(DoublingRow { n: n_list[k], m: n_list[k + 1], gap, kappa: n_list[k] as f64 * gap });
    }
    let scale = 1.0 + p.u0.max_abs() + p.step_bound() * p.horizon;
    let exact = rows.iter().all(|r| r.gap <= 1e-12 * scale);
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let fitted = if exact { None } else { fitted_order(n_list, &gaps) };
    let kappa = doubling.iter().map(|d| d.kappa).fold(0.0, f64::max);
    let tiny = 1e-12 * scale;
    let doubling_monotone = doubling.windows(2).all(|w| w[1].gap <= w[0].gap + tiny);
    Ok(ConvergenceStudy {
        reference: reference.label().to_string(),
        rows,
        doubling,
        fitted_order: fitted,
        exact,
        kappa,
        doubling_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn half_plane() -> ConstraintSet {
        ConstraintSet::half_space(v(&[0.0, 1.0]), 0.0).unwrap()
    }

    fn slide_problem(theta0: f64, horizon: f64) -> Problem {
        let set = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        Problem::new(
            MovingSet::fixed(set),
            Perturbation::Constant(v(&[1.0, 0.0])),
            PerturbationBound::Sup(1.0),
            v(&[theta0.cos(), theta0.sin()]),
            horizon,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn step_examples() {
        let opts = SolverOptions::default();
        let s = step(&half_plane(), &v(&[0.0, 0.0]), 0.1, &v(&[1.0, 1.0]), 1.0, &opts).unwrap();
        assert_eq!(s.next, v(&[0.1, 0.0]));
        assert!(!s.tie);

        let u = v(&[0.3, -2.0]);
        assert_eq!(step(&half_plane(), &u, 0.1, &v(&[0.0, 0.0]), 1.0, &opts).unwrap().next, u);

        let ball = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let a = 3.0 * PI / 4.0;
        let u = v(&[a.cos(), a.sin()]);
        let s = step(&ball, &u, 0.01, &v(&[1.0, 0.0]), 1.0, &opts).unwrap();
        let y = [a.cos() + 0.01, a.sin()];
        let ny = y[0].hypot(y[1]);
        assert!(s.next.dist(&v(&[y[0] / ny, y[1] / ny])) < 1e-15);
    }

    #[test]
    fn step_rejects_infeasible_state() {
        let r = step(&half_plane(), &v(&[0.0, 1.0]), 0.1, &v(&[1.0, 1.0]), 1.0, &SolverOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn cross_step_is_flagged() {
        let cross = ConstraintSet::cross([0.0, 0.0]).unwrap();
        let s = step(&cross, &v(&[0.0, 0.0]), 0.5, &v(&[1.0, 1.0]), 10.0, &SolverOptions::default()).unwrap();
        assert!(s.tie);
        assert_eq!(s.next, v(&[0.0, 0.5]));
    }

    #[test]
    fn half_plane_scheme_is_exact() {
        let p = Problem::new(
            MovingSet::fixed(half_plane()),
            Perturbation::Constant(v(&[1.0, 1.0])),
            PerturbationBound::Sup(2f64.sqrt()),
            v(&[0.0, 0.0]),
            1.0,
            1.0,
        )
        .unwrap();
        for n in [3, 10, 64] {
            let traj = integrate(&p, n, &SolverOptions::default()).unwrap();
            for (i, u) in traj.states.iter().enumerate() {
                assert!((u[0] - i as f64 * traj.h).abs() < 1e-14);
                assert_eq!(u[1], 0.0);
            }
            assert!(traj.final_state().dist(&v(&[1.0, 0.0])) < 1e-13);
        }
    }

    #[test]
    fn step_rule_reports_minimal_n() {
        let p = slide_problem(3.0 * PI / 4.0, 10.0);
        assert_eq!(p.min_steps(), 20);
        match integrate(&p, 19, &SolverOptions::default()) {
            Err(Error::StepRule { n: 19, min_n: 20 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(integrate(&p, 20, &SolverOptions::default()).is_ok());
    }

    #[test]
    fn translating_half_plane() {
        let set = MovingSet::translating(half_plane(), v(&[0.0, -1.0])).unwrap();
        let p = Problem::new(set, Perturbation::Constant(v(&[0.0, 0.0])), PerturbationBound::Sup(0.0), v(&[0.0, 0.0]), 1.0, 1.0)
            .unwrap();
        let traj = integrate(&p, 10, &SolverOptions::default()).unwrap();
        for (t, u) in traj.times.iter().zip(&traj.states) {
            assert!(u.dist(&v(&[0.0, -t])) < 1e-14);
        }
        assert_eq!(traj.bounds[0], 1.0);
    }

    #[test]
    fn circle_slide_reference_matches_ode() {
        let p = slide_problem(3.0 * PI / 4.0, 0.5);
        let Reference::ClosedForm { rule, .. } = Reference::circle_slide(&p).unwrap() else { panic!() };
        let th = 2.0 * ((3.0 * PI / 8.0).tan() * (-0.5f64).exp()).atan();
        assert!(rule(0.5).unwrap().dist(&v(&[th.cos(), th.sin()])) < 1e-14);
        assert!(rule(0.0).unwrap().dist(&p.u0) < 1e-15);
    }

    #[test]
    fn circle_slide_releases_at_quarter_turn() {
        let p = slide_problem(3.0 * PI / 4.0, 3.0);
        let Reference::ClosedForm { rule, .. } = Reference::circle_slide(&p).unwrap() else { panic!() };
        let release = (3.0 * PI / 8.0).tan().ln();
        let top = rule(release).unwrap();
        assert!(top.dist(&v(&[0.0, 1.0])) < 1e-12);
        assert!(rule(release + 1.0).unwrap().dist(&v(&[1.0, 1.0])) < 1e-12);
    }

    #[test]
    fn slide_converges_at_first_order() {
        let p = slide_problem(3.0 * PI / 4.0, 0.5);
        let study = convergence_study(&p, &[40, 80, 160, 320, 640], &Reference::circle_slide(&p).unwrap(), &SolverOptions::default())
            .unwrap();
        assert!(rows_decrease(&study.rows));
        assert!(study.fitted_order.unwrap() >= 0.9, "{study:?}");
        assert!(study.doubling_monotone);
    }

    fn rows_decrease(rows: &[ConvergenceRow]) -> bool {
        rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }

    #[test]
    fn half_plane_study_is_exact() {
        let p = Problem::new(
            MovingSet::fixed(half_plane()),
            Perturbation::Constant(v(&[1.0, 1.0])),
            PerturbationBound::Sup(2f64.sqrt()),
            v(&[0.0, 0.0]),
            1.0,
            1.0,
        )
        .unwrap();
        let r = Reference::closed_form(&p).unwrap();
        assert_eq!(r.label(), "projected_free_flight");
        let study = convergence_study(&p, &[4, 8, 16], &r, &SolverOptions::default()).unwrap();
        assert!(study.exact);
        assert_eq!(study.order_label(), "exact");
        assert!(convergence_study(&p, &[4, 8], &r, &SolverOptions::default()).is_err());
        assert!(convergence_study(&p, &[4, 16, 8], &r, &SolverOptions::default()).is_err());
    }

    #[test]
    fn finest_grid_reference() {
        let p = slide_problem(3.0 * PI / 4.0, 0.5);
        let study = convergence_study(&p, &[20, 40, 80], &Reference::FinestGrid, &SolverOptions::default()).unwrap();
        assert!(rows_decrease(&study.rows));
        assert!(study.fitted_order.unwrap() > 0.8);
    }

    #[test]
    fn linear_growth_windows() {
        let set = MovingSet::fixed(half_plane());
        let f = Perturbation::affine(vec![vec![1.0, 0.0], vec![0.0, 0.0]], v(&[0.0, 0.0])).unwrap();
        let p = Problem::new(set, f, PerturbationBound::LinearGrowth(1.0), v(&[1.0, 0.0]), 1.0, 1.0).unwrap();
        assert!(p.min_steps() <= 40);
        let traj = integrate(&p, 40, &SolverOptions::default()).unwrap();
        for (d, b) in traj.deltas.iter().zip(&traj.bounds) {
            assert!(d.norm() <= *b);
        }
        // Windows of length 1/4 give four distinct bounds.
        let mut distinct = traj.bounds.clone();
        distinct.dedup();
        assert_eq!(distinct.len(), 4);
        // Explicit Euler on x' = x.
        let n = traj.steps() as i32;
        assert!((traj.final_state()[0] - (1.0 + traj.h).powi(n)).abs() < 1e-9);
    }

    #[test]
    fn interpolation_is_piecewise_linear() {
        let p = slide_problem(3.0 * PI / 4.0, 0.5);
        let traj = integrate(&p, 10, &SolverOptions::default()).unwrap();
        assert_eq!(traj.interpolate(0.0), traj.states[0]);
        assert_eq!(traj.interpolate(0.5), traj.states[10]);
        let mid = traj.interpolate(0.125);
        let expect = &(&traj.states[2] + &traj.states[3]) * 0.5;
        assert!(mid.dist(&expect) < 1e-15);
    }
}
