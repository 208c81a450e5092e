//! Rigid-disk crowd model: feasible configurations, contact bases and
//! cone-projected velocities.
//!
//! A configuration `q ∈ R^{2N}` stacks the disk centers. It is feasible when
//! every pair satisfies `D_ij(q) = |q_i − q_j| − 2r ≥ 0` and every wall
//! constraint on a center coordinate holds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catchup::{integrate, Perturbation, PerturbationBound, Problem, Trajectory};
use crate::eikonal::GridField;
use crate::geometry::{ConstraintSet, MovingSet, Vector};
use crate::options::SolverOptions;
use crate::projection::{project_cone, project_disk_config, ConeProjection, ProjectionResult};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    /// `q_i[axis] ≥ bound`
    Lower,
    /// `q_i[axis] ≤ bound`
    Upper,
}

/// An axis-aligned constraint on disk centers, for one disk or all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<usize>,
    pub axis: Axis,
    pub side: WallSide,
    pub bound: f64,
}

impl Wall {
    pub fn lower(disk: Option<usize>, axis: Axis, bound: f64) -> Self {
        Wall { disk, axis, side: WallSide::Lower, bound }
    }

    pub fn upper(disk: Option<usize>, axis: Axis, bound: f64) -> Self {
        Wall { disk, axis, side: WallSide::Upper, bound }
    }
}

/// Which inequality a multiplier or gradient belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintLabel {
    Contact { i: usize, j: usize },
    Wall { wall: usize, disk: usize },
}

/// The feasible set `Q` of `N` equal disks, optionally translated.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskSet {
    count: usize,
    radius: f64,
    walls: Vec<Wall>,
    shift: Vec<f64>,
}

impl DiskSet {
    pub fn new(count: usize, radius: f64, walls: Vec<Wall>) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("disk configuration needs at least one disk"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("disk radius must be positive, got {radius}")));
        }
        for w in &walls {
            if !w.bound.is_finite() {
                return Err(Error::invalid("wall bound must be finite"));
            }
            if w.disk.is_some_and(|d| d >= count) {
                return Err(Error::invalid(format!("wall refers to disk {:?} of {count}", w.disk)));
            }
        }
        // Each disk's admissible interval on each axis must be nonempty.
        for disk in 0..count {
            for axis in [Axis::X, Axis::Y] {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for w in walls.iter().filter(|w| w.axis == axis && w.disk.is_none_or(|d| d == disk)) {
                    match w.side {
                        WallSide::Lower => lo = lo.max(w.bound),
                        WallSide::Upper => hi = hi.min(w.bound),
                    }
                }
                if lo > hi {
                    return Err(Error::EmptySet(format!("walls leave no room for disk {disk} on {axis:?}")));
                }
            }
        }
        Ok(DiskSet { count, radius, walls, shift: vec![0.0; 2 * count] })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn dim(&self) -> usize {
        2 * self.count
    }

    pub(crate) fn translated(&self, a: &[f64]) -> DiskSet {
        let mut out = self.clone();
        for (s, d) in out.shift.iter_mut().zip(a) {
            *s += d;
        }
        out
    }

    /// Every wall constraint expanded per affected disk, in declaration order.
    fn wall_rows(&self) -> impl Iterator<Item = (usize, usize, &Wall)> + '_ {
        self.walls.iter().enumerate().flat_map(move |(k, w)| {
            let disks: Vec<usize> = match w.disk {
                Some(d) => vec![d],
                None => (0..self.count).collect(),
            };
            disks.into_iter().map(move |d| (k, d, w))
        })
    }

    /// Constraint order used by gradients, multipliers and linearizations:
    /// contacts `(i, j)` with `i < j` in lexicographic order, then walls.
    pub fn constraint_labels(&self) -> Vec<ConstraintLabel> {
        let mut labels = Vec::new();
        for i in 0..self.count {
            for j in i + 1..self.count {
                labels.push(ConstraintLabel::Contact { i, j });
            }
        }
        labels.extend(self.wall_rows().map(|(wall, disk, _)| ConstraintLabel::Wall { wall, disk }));
        labels
    }

    fn center(&self, q: &[f64], i: usize) -> [f64; 2] {
        [q[2 * i] - self.shift[2 * i], q[2 * i + 1] - self.shift[2 * i + 1]]
    }

    fn wall_value(&self, q: &[f64], disk: usize, w: &Wall) -> f64 {
        let k = 2 * disk + w.axis.offset();
        let coord = q[k] - self.shift[k];
        match w.side {
            WallSide::Lower => coord - w.bound,
            WallSide::Upper => w.bound - coord,
        }
    }

    /// All constraint values (`≥ 0` means satisfied) in label order.
    pub fn constraint_values(&self, q: &[f64]) -> Vec<f64> {
        let mut vals = Vec::new();
        for i in 0..self.count {
            for j in i + 1..self.count {
                let a = self.center(q, i);
                let b = self.center(q, j);
                vals.push((a[0] - b[0]).hypot(a[1] - b[1]) - 2.0 * self.radius);
            }
        }
        vals.extend(self.wall_rows().map(|(_, d, w)| self.wall_value(q, d, w)));
        vals
    }

    pub fn min_constraint(&self, q: &[f64]) -> f64 {
        self.constraint_values(q).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_feasible(&self, q: &[f64], tol: f64) -> bool {
        q.len() == self.dim() && self.min_constraint(q) >= -tol
    }

    /// Rows `a_k` and right-hand sides `b_k` of the linearization
    /// `a_k·q ≥ b_k` around `p`. Coincident centers fall back to the
    /// direction `e_x`.
    pub(crate) fn linearized_constraints(&self, p: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let d = self.dim();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..self.count {
            for j in i + 1..self.count {
                let a = self.center(p, i);
                let b = self.center(p, j);
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                let e = if len > 0.0 { [dx / len, dy / len] } else { [1.0, 0.0] };
                let mut g = vec![0.0; d];
                g[2 * i] = -e[0];
                g[2 * i + 1] = -e[1];
                g[2 * j] = e[0];
                g[2 * j + 1] = e[1];
                let gp: f64 = g.iter().zip(p).map(|(x, y)| x * y).sum();
                rhs.push(gp - (len - 2.0 * self.radius));
                rows.push(g);
            }
        }
        for (_, disk, w) in self.wall_rows() {
            let k = 2 * disk + w.axis.offset();
            let mut g = vec![0.0; d];
            match w.side {
                WallSide::Lower => {
                    g[k] = 1.0;
                    rhs.push(w.bound + self.shift[k]);
                }
                WallSide::Upper => {
                    g[k] = -1.0;
                    rhs.push(-(w.bound + self.shift[k]));
                }
            }
            rows.push(g);
        }
        (rows, rhs)
    }

    /// Gradients of the constraints with value `≤ tol_active` at `q`, in
    /// label order, together with their labels.
    fn active_gradients(&self, q: &[f64], tol_active: f64) -> Result<(Vec<ConstraintLabel>, Vec<Vector>)> {
        let labels = self.constraint_labels();
        let values = self.constraint_values(q);
        let mut out_labels = Vec::new();
        let mut grads = Vec::new();
        for (label, value) in labels.into_iter().zip(values) {
            if value > tol_active {
                continue;
            }
            let g = match label {
                ConstraintLabel::Contact { i, j } => contact_gradient(q, self.count, i, j)?,
                ConstraintLabel::Wall { wall, disk } => {
                    let w = &self.walls[wall];
                    let k = 2 * disk + w.axis.offset();
                    let sign = match w.side {
                        WallSide::Lower => 1.0,
                        WallSide::Upper => -1.0,
                    };
                    Vector::unit(self.dim(), k).scaled(sign)
                }
            };
            out_labels.push(label);
            grads.push(g);
        }
        Ok((out_labels, grads))
    }

    /// Generators `−∇g_k` of the normal cone `N(Q, q)`.
    pub(crate) fn normal_generators(&self, q: &[f64], tol_active: f64) -> Result<Vec<Vector>> {
        let (_, grads) = self.active_gradients(q, tol_active)?;
        Ok(grads.into_iter().map(|g| g.scaled(-1.0)).collect())
    }
}

/// `D_ij = |q_i − q_j| − 2r`.
pub fn signed_distance(q: &Vector, radius: f64, i: usize, j: usize) -> Result<f64> {
    let n = q.dim() / 2;
    if !q.dim().is_multiple_of(2) || i >= n || j >= n || i == j {
        return Err(Error::invalid(format!("invalid disk pair ({i}, {j}) for {n} disks")));
    }
    let len = (q[2 * i] - q[2 * j]).hypot(q[2 * i + 1] - q[2 * j + 1]);
    if len == 0.0 {
        return Err(Error::CoincidentCenters { i, j });
    }
    Ok(len - 2.0 * radius)
}

/// `G_ij = ∇D_ij = (…, −e_ij, …, e_ij, …)` with `e_ij = (q_j − q_i)/|q_j − q_i|`.
pub fn contact_gradient(q: &[f64], count: usize, i: usize, j: usize) -> Result<Vector> {
    let (dx, dy) = (q[2 * j] - q[2 * i], q[2 * j + 1] - q[2 * i + 1]);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return Err(Error::CoincidentCenters { i, j });
    }
    let mut g = vec![0.0; 2 * count];
    g[2 * i] = -dx / len;
    g[2 * i + 1] = -dy / len;
    g[2 * j] = dx / len;
    g[2 * j + 1] = dy / len;
    Ok(Vector::raw(g))
}

/// Disk geometry plus a state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskConfiguration {
    pub set: DiskSet,
    pub q: Vector,
}

impl DiskConfiguration {
    pub fn new(set: DiskSet, q: Vector) -> Result<Self> {
        q.ensure_dim(set.dim())?;
        Ok(DiskConfiguration { set, q })
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.set.is_feasible(self.q.as_slice(), tol)
    }
}

/// Active constraints at a configuration and their gradients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactBasis {
    pub labels: Vec<ConstraintLabel>,
    pub gradients: Vec<Vector>,
}

impl ContactBasis {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.labels
            .iter()
            .filter_map(|l| match *l {
                ConstraintLabel::Contact { i, j } => Some((i, j)),
                _ => None,
            })
            .collect()
    }

    pub fn wall_count(&self) -> usize {
        self.labels.iter().filter(|l| matches!(l, ConstraintLabel::Wall { .. })).count()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Contacts and walls whose constraint value is at most `tol_active`.
pub fn contact_basis(c: &DiskConfiguration, tol_active: f64, tol_feas: f64) -> Result<ContactBasis> {
    if !c.is_feasible(tol_feas) {
        return Err(Error::invalid("contact basis requires a feasible configuration"));
    }
    basis_unchecked(c, tol_active)
}

fn basis_unchecked(c: &DiskConfiguration, tol_active: f64) -> Result<ContactBasis> {
    let (labels, gradients) = c.set.active_gradients(c.q.as_slice(), tol_active)?;
    Ok(ContactBasis { labels, gradients })
}

/// The feasible velocity closest to `u`: projection onto
/// `{v : G_k·v ≥ 0 for active k}`, with the Kuhn–Tucker multipliers.
pub fn actual_velocity(c: &DiskConfiguration, u: &Vector, opts: &SolverOptions) -> Result<(ContactBasis, ConeProjection)> {
    let basis = contact_basis(c, opts.tol.active, opts.tol.feas)?;
    let proj = project_cone(&basis.gradients, u)?;
    Ok((basis, proj))
}

/// Spontaneous velocity of the crowd.
#[derive(Clone, Debug)]
pub enum CrowdRule {
    Constant(Vector),
    /// Each disk follows the unit exit direction of a fast-marching field.
    ExitField(Arc<GridField>),
}

impl CrowdRule {
    pub fn eval(&self, q: &Vector) -> Result<Vector> {
        match self {
            CrowdRule::Constant(u) => {
                u.ensure_dim(q.dim())?;
                Ok(u.clone())
            }
            CrowdRule::ExitField(field) => {
                let mut out = Vec::with_capacity(q.dim());
                for i in 0..q.dim() / 2 {
                    let u = field.spontaneous_velocity([q[2 * i], q[2 * i + 1]])?;
                    out.extend(u);
                }
                Ok(Vector::raw(out))
            }
        }
    }

    /// Sup-norm bound on `‖U(q)‖`.
    pub fn bound(&self, count: usize) -> f64 {
        match self {
            CrowdRule::Constant(u) => u.norm(),
            CrowdRule::ExitField(_) => (count as f64).sqrt(),
        }
    }

    pub fn to_perturbation(&self) -> Perturbation {
        match self {
            CrowdRule::Constant(u) => Perturbation::Constant(u.clone()),
            CrowdRule::ExitField(_) => {
                let rule = self.clone();
                Perturbation::field("exit_field", move |q| rule.eval(q))
            }
        }
    }
}

/// Both discretizations of a crowd run.
#[derive(Clone, Debug)]
pub struct CrowdRun {
    /// Catching-up scheme: `q[i+1] = P_Q(q[i] + h U(q[i]))`.
    pub sweeping: Trajectory,
    /// Velocity scheme: `q[i+1] = q[i] + h P_{C_q}(U(q[i]))`. Deltas hold
    /// `v − U` and multipliers the cone multipliers.
    pub velocity: Trajectory,
    /// `max_i ‖q_sweep[i] − q_vel[i]‖`.
    pub scheme_gap: f64,
    /// The sweeping problem, for auditing.
    pub problem: Problem,
}

/// Runs the crowd model on `[0, T]` with `n` steps.
///
/// The prox-regularity scale for the step rule is the set's declared prox
/// constant (`ConstraintSet::with_prox`), which defaults to the disk radius.
pub fn simulate_crowd(set: &ConstraintSet, q0: &Vector, rule: &CrowdRule, horizon: f64, n: usize, opts: &SolverOptions) -> Result<CrowdRun> {
    let disks = set.as_disks().ok_or_else(|| Error::invalid("crowd simulation needs a disk configuration set"))?;
    let c0 = DiskConfiguration::new(disks.clone(), q0.clone())?;
    if !c0.is_feasible(opts.tol.feas) {
        return Err(Error::invalid("initial crowd configuration is not feasible"));
    }
    let problem = Problem::new(
        MovingSet::fixed(set.clone()),
        rule.to_perturbation(),
        PerturbationBound::Sup(rule.bound(disks.count())),
        q0.clone(),
        horizon,
        set.prox_constant(),
    )?;
    let sweeping = integrate(&problem, n, opts)?;
    let velocity = velocity_scheme(&c0, rule, horizon, n, opts)?;
    let scheme_gap = sweeping
        .states
        .iter()
        .zip(&velocity.states)
        .map(|(a, b)| a.dist(b))
        .fold(0.0, f64::max);
    Ok(CrowdRun { sweeping, velocity, scheme_gap, problem })
}

fn velocity_scheme(c0: &DiskConfiguration, rule: &CrowdRule, horizon: f64, n: usize, opts: &SolverOptions) -> Result<Trajectory> {
    let h = horizon / n as f64;
    let bound = rule.bound(c0.set.count());
    let mut traj = Trajectory::start(c0.q.clone(), h, 0.0);
    traj.multipliers = Some(Vec::new());
    let mut c = c0.clone();
    for i in 0..n {
        let u = rule.eval(&c.q)?;
        // The explicit scheme can overlap by O(h²); those pairs stay active.
        let basis = basis_unchecked(&c, opts.tol.active)?;
        let proj = project_cone(&basis.gradients, &u)?;
        let mut next = c.q.clone();
        next.axpy(h, &proj.v);
        let delta = &proj.v - &u;
        traj.push((i + 1) as f64 * h, next.clone(), delta, u, bound);
        if let Some(m) = traj.multipliers.as_mut() {
            m.push(proj.lambdas);
        }
        c.q = next;
    }
    Ok(traj)
}

/// `Q` of the two-disk corridor: walls `x = 0` and `x = 4r − 2ε` acting on
/// the left and right disk respectively (`r ≤ q_1x`, `q_2x ≤ 3r − 2ε`).
pub fn corridor_set(radius: f64, eps: f64) -> Result<DiskSet> {
    if !(eps > 0.0 && eps <= 0.5 * radius) {
        return Err(Error::invalid(format!("corridor needs 0 < ε ≤ r/2, got ε = {eps}, r = {radius}")));
    }
    DiskSet::new(
        2,
        radius,
        vec![
            Wall::lower(Some(0), Axis::X, radius),
            Wall::upper(Some(1), Axis::X, 3.0 * radius - 2.0 * eps),
        ],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorWitness {
    pub radius: f64,
    pub eps: f64,
    pub q0: Vector,
    pub projection: ProjectionResult,
    /// `2√(rε)`.
    pub expected_dist: f64,
}

/// Projects `q0 = (r − ε, 0, 3r − ε, 0)` onto the corridor set and checks
/// that the projection is multivalued at distance `2√(rε)`.
pub fn corridor_witness(radius: f64, eps: f64, opts: &SolverOptions) -> Result<CorridorWitness> {
    let set = corridor_set(radius, eps)?;
    let q0 = Vector::new(vec![radius - eps, 0.0, 3.0 * radius - eps, 0.0])?;
    let projection = project_disk_config(&set, &q0, &[], opts)?;
    let expected_dist = 2.0 * (radius * eps).sqrt();
    if !projection.converged {
        return Err(Error::NonConvergence { what: "corridor projection", iterations: projection.iterations });
    }
    if projection.nearest.len() < 2 {
        return Err(Error::invalid(format!("corridor projection found {} minimizer(s), expected two", projection.nearest.len())));
    }
    if (projection.dist - expected_dist).abs() > 1e-6 {
        return Err(Error::invalid(format!("corridor distance {} differs from 2√(rε) = {expected_dist}", projection.dist)));
    }
    Ok(CorridorWitness { radius, eps, q0, projection, expected_dist })
}
