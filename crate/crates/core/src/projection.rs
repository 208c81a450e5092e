//! Projection oracles, good-direction sets `Γ^r` and directional
//! prox-regularity certification.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::crowd::DiskSet;
use crate::geometry::{ConstraintSet, Polyhedron, Shape, Vector};
use crate::nnls::{nnls, nnqp};
use crate::options::{SolverOptions, TIE_RELATIVE};
use crate::{Error, Result};

/// Nearest points of `x` in a set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    /// All minimizers found, sorted lexicographically.
    pub nearest: Vec<Vector>,
    pub dist: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Kuhn–Tucker multipliers of the constraints, when the set is described
    /// by inequalities (polyhedra and disk configurations).
    pub multipliers: Option<Vec<f64>>,
}

impl ProjectionResult {
    fn exact(x: &Vector, nearest: Vec<Vector>) -> Self {
        let dist = nearest.first().map_or(0.0, |p| x.dist(p));
        ProjectionResult { nearest, dist, converged: true, iterations: 0, multipliers: None }
    }

    pub fn is_unique(&self) -> bool {
        self.nearest.len() == 1
    }

    /// First minimizer in lexicographic order, the deterministic
    /// tie-break used by the integrator.
    pub fn first(&self) -> Option<&Vector> {
        self.nearest.first()
    }
}

pub fn project(set: &ConstraintSet, x: &Vector) -> Result<ProjectionResult> {
    project_with(set, x, &SolverOptions::default())
}

/// Projects `x` onto `set`.
///
/// Analytic kinds return every minimizer in closed form (two for a point of
/// the cross-set equidistant from both arms; `2d` axis representatives for
/// the center of a ball exterior, whose projection is the whole sphere).
/// Nonconvergence of an iterative solver is reported through
/// `converged = false` with the best iterate, never as an error.
pub fn project_with(set: &ConstraintSet, x: &Vector, opts: &SolverOptions) -> Result<ProjectionResult> {
    x.ensure_dim(set.dim())?;
    Ok(match set.shape() {
        Shape::HalfSpace(h) => {
            let excess = h.excess(x);
            if excess <= 0.0 {
                ProjectionResult::exact(x, vec![x.clone()])
            } else {
                let mut p = x.clone();
                p.axpy(-excess, h.normal());
                // Land exactly on the closed side despite rounding.
                let mut nudge = f64::EPSILON * (1.0 + p.max_abs());
                while h.excess(&p) > 0.0 && nudge < 1e-6 {
                    p.axpy(-h.excess(&p).max(nudge), h.normal());
                    nudge *= 2.0;
                }
                ProjectionResult { nearest: vec![p], dist: excess, converged: true, iterations: 0, multipliers: None }
            }
        }
        Shape::AxisBox(b) => {
            let p: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(b.lower().iter().zip(b.upper()))
                .map(|(&c, (&lo, &hi))| c.clamp(lo, hi))
                .collect();
            ProjectionResult::exact(x, vec![Vector::raw(p)])
        }
        Shape::BallExterior(b) => {
            let rel = x - b.center();
            let n = rel.norm();
            if n >= b.radius() {
                ProjectionResult::exact(x, vec![x.clone()])
            } else if n == 0.0 {
                let d = x.dim();
                let mut reps: Vec<Vector> = (0..d)
                    .flat_map(|k| [1.0, -1.0].map(|s| b.center() + &Vector::unit(d, k).scaled(s * b.radius())))
                    .collect();
                reps.sort_by(|a, b| a.lex_cmp(b));
                ProjectionResult { nearest: reps, dist: b.radius(), converged: true, iterations: 0, multipliers: None }
            } else {
                let mut p = b.center() + &rel.scaled(b.radius() / n);
                // Radial rescaling can land a hair inside the ball.
                let mut nudge = f64::EPSILON;
                while p.dist(b.center()) < b.radius() && nudge < 1e-6 {
                    let rel = &p - b.center();
                    p = b.center() + &rel.scaled((1.0 + nudge) * b.radius() / rel.norm());
                    nudge *= 2.0;
                }
                ProjectionResult { nearest: vec![p], dist: b.radius() - n, converged: true, iterations: 0, multipliers: None }
            }
        }
        Shape::Cross(c) => {
            let [ax, ay] = c.apex();
            if x[0] <= ax || x[1] <= ay {
                ProjectionResult::exact(x, vec![x.clone()])
            } else {
                let dx = x[0] - ax;
                let dy = x[1] - ay;
                let to_vertical = Vector::raw(vec![ax, x[1]]);
                let to_horizontal = Vector::raw(vec![x[0], ay]);
                let tie = (dx - dy).abs() <= 1e-12 * dx.max(dy).max(1.0);
                let mut nearest = if tie {
                    vec![to_vertical, to_horizontal]
                } else if dx < dy {
                    vec![to_vertical]
                } else {
                    vec![to_horizontal]
                };
                nearest.sort_by(|a, b| a.lex_cmp(b));
                ProjectionResult { nearest, dist: dx.min(dy), converged: true, iterations: 0, multipliers: None }
            }
        }
        Shape::Polyhedron(p) => project_polyhedron(p, x)?,
        Shape::Disks(d) => project_disk_config(d, x, &[], opts)?,
    })
}

pub(crate) fn project_polyhedron(p: &Polyhedron, x: &Vector) -> Result<ProjectionResult> {
    // normal·q ≤ offset  ⇔  (−normal)·q ≥ −offset
    let rows: Vec<Vec<f64>> = p.faces().iter().map(|f| f.normal().scaled(-1.0).into_vec()).collect();
    let rhs: Vec<f64> = p.faces().iter().map(|f| -f.offset()).collect();
    let sol = project_inequalities(&rows, &rhs, x.as_slice());
    let q = Vector::raw(sol.point);
    let dist = q.dist(x);
    Ok(ProjectionResult {
        nearest: vec![q],
        dist,
        converged: sol.feasible,
        iterations: sol.iterations,
        multipliers: Some(sol.multipliers),
    })
}

pub(crate) struct InequalityProjection {
    pub point: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub feasible: bool,
    pub iterations: usize,
}

/// `argmin ½‖q − x‖²` subject to `rows[k]·q ≥ rhs[k]`, through the dual
/// `min ½‖Aᵀλ‖² + λ·(Ax − b)` over `λ ≥ 0` and `q = x + Aᵀλ`.
pub(crate) fn project_inequalities(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> InequalityProjection {
    let d = x.len();
    let m = rows.len();
    if m == 0 {
        return InequalityProjection { point: x.to_vec(), multipliers: vec![], feasible: true, iterations: 0 };
    }
    let a = DMatrix::from_fn(m, d, |i, j| rows[i][j]);
    let xv = DVector::from_column_slice(x);
    let b = DVector::from_column_slice(rhs);
    let q = &a * a.transpose();
    let c = &a * &xv - &b;
    let sol = nnqp(&q, &c);
    let lambda = DVector::from_vec(sol.x.clone());
    let point = &xv + a.transpose() * &lambda;
    let scale = 1.0 + xv.amax() + b.amax();
    let slack = &a * &point - &b;
    let feasible = sol.converged && slack.iter().all(|&s| s >= -1e-10 * scale);
    InequalityProjection { point: point.iter().copied().collect(), multipliers: sol.x, feasible, iterations: sol.iterations }
}

/// Moreau decomposition of `u` along the cone `{w : G_k·w ≥ 0 ∀k}` and its
/// polar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeProjection {
    /// `v = argmin ‖w − u‖²` over the feasible cone.
    pub v: Vector,
    /// Multipliers with `u − v = −Σ λ_k G_k`.
    pub lambdas: Vec<f64>,
}

impl ConeProjection {
    /// The normal-cone component `P_N(u) = u − v = −Σ λ_k G_k`.
    pub fn normal_component(&self, u: &Vector) -> Vector {
        u - &self.v
    }
}

/// Projects `u` onto `{w : G_k·w ≥ 0}` by dual nonnegative least squares:
/// `λ = argmin_{λ≥0} ‖Σ λ_k G_k + u‖`, `v = u + Σ λ_k G_k`.
pub fn project_cone(gradients: &[Vector], u: &Vector) -> Result<ConeProjection> {
    let d = u.dim();
    for (k, g) in gradients.iter().enumerate() {
        g.ensure_dim(d)?;
        if g.is_zero() {
            return Err(Error::invalid(format!("cone gradient {k} is zero")));
        }
    }
    if gradients.is_empty() {
        return Ok(ConeProjection { v: u.clone(), lambdas: vec![] });
    }
    let m = gradients.len();
    let a = DMatrix::from_fn(d, m, |i, k| -gradients[k][i]);
    let b = DVector::from_column_slice(u.as_slice());
    let sol = nnls(&a, &b);
    if !sol.converged {
        return Err(Error::NonConvergence { what: "cone projection", iterations: sol.iterations });
    }
    let mut v = u.clone();
    for (g, &l) in gradients.iter().zip(&sol.x) {
        v.axpy(l, g);
    }
    Ok(ConeProjection { v, lambdas: sol.x })
}

/// Projection of `u` onto the closed convex cone generated by
/// `generators` (`{Σ μ_k g_k : μ ≥ 0}`); zero when there are none.
pub fn project_onto_generated_cone(generators: &[Vector], u: &Vector) -> Vector {
    if generators.is_empty() {
        return Vector::zeros(u.dim());
    }
    let d = u.dim();
    let a = DMatrix::from_fn(d, generators.len(), |i, k| generators[k][i]);
    let b = DVector::from_column_slice(u.as_slice());
    let sol = nnls(&a, &b);
    let mut p = Vector::zeros(d);
    for (g, &mu) in generators.iter().zip(&sol.x) {
        p.axpy(mu, g);
    }
    p
}

#[derive(Clone, Debug)]
struct LocalSolution {
    point: Vector,
    cost: f64,
    multipliers: Vec<f64>,
    iterations: usize,
}

/// Projects `x ∈ R^{2N}` onto a disk configuration set by multistart
/// sequential linearization.
///
/// Each start `p_0` iterates `p_{k+1} = argmin ‖q − x‖²` subject to the
/// linearized contacts `D_ij(p_k) + G_ij(p_k)·(q − p_k) ≥ 0` and the wall
/// constraints. `D_ij` is convex, so each linearization is an inner
/// approximation of the feasible set and every iterate is feasible. Starts
/// are `x`, the caller's `hints`, then Gaussian perturbations of `x` drawn
/// from a ChaCha8 stream seeded by `(opts.seed, start index)`. Distinct
/// minima whose costs tie within a relative `1e-6` are all reported.
pub fn project_disk_config(set: &DiskSet, x: &Vector, hints: &[Vector], opts: &SolverOptions) -> Result<ProjectionResult> {
    x.ensure_dim(set.dim())?;
    for h in hints {
        h.ensure_dim(set.dim())?;
    }
    if set.is_feasible(x.as_slice(), opts.tol.feas) {
        let zeros = vec![0.0; set.constraint_labels().len()];
        return Ok(ProjectionResult { nearest: vec![x.clone()], dist: 0.0, converged: true, iterations: 0, multipliers: Some(zeros) });
    }
    let total = opts.multistart.max(1 + hints.len());
    let sigma = 0.5 * set.radius();
    let starts = opts.execution.map(total, |k| {
        let start = if k == 0 {
            x.clone()
        } else if k <= hints.len() {
            hints[k - 1].clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, k as u64));
            let normal = Normal::new(0.0, sigma).expect("positive sigma");
            let coords = x.as_slice().iter().map(|&c| c + normal.sample(&mut rng)).collect();
            Vector::raw(coords)
        };
        solve_from(set, x, &start, opts)
    });
    let iterations: usize = starts.iter().map(|s| s.as_ref().map_or(0, |l| l.iterations)).sum();
    let locals: Vec<LocalSolution> = starts.into_iter().flatten().collect();
    let Some(best) = locals.iter().map(|l| l.cost).min_by(f64::total_cmp) else {
        return Ok(ProjectionResult { nearest: vec![], dist: f64::INFINITY, converged: false, iterations, multipliers: None });
    };
    let cutoff = best + TIE_RELATIVE * best.max(f64::MIN_POSITIVE);
    let mut kept: Vec<&LocalSolution> = Vec::new();
    for l in locals.iter().filter(|l| l.cost <= cutoff) {
        if kept.iter().all(|k| k.point.dist(&l.point) > opts.tol.dedup) {
            kept.push(l);
        }
    }
    kept.sort_by(|a, b| a.point.lex_cmp(&b.point));
    let best_local = kept
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("at least one kept minimizer");
    Ok(ProjectionResult {
        dist: best.sqrt(),
        multipliers: Some(best_local.multipliers.clone()),
        nearest: kept.iter().map(|l| l.point.clone()).collect(),
        converged: true,
        iterations,
    })
}

fn solve_from(set: &DiskSet, target: &Vector, start: &Vector, opts: &SolverOptions) -> Option<LocalSolution> {
    let mut p = start.clone();
    let scale = 1.0 + target.max_abs();
    let mut iterations = 0;
    let multipliers = loop {
        if iterations == opts.max_iterations {
            return None;
        }
        iterations += 1;
        let (rows, rhs) = set.linearized_constraints(p.as_slice());
        let sol = project_inequalities(&rows, &rhs, target.as_slice());
        if !sol.feasible {
            return None;
        }
        let next = Vector::raw(sol.point);
        let step = next.dist(&p);
        p = next;
        if step <= 1e-14 * scale && iterations > 1 {
            break sol.multipliers;
        }
    };
    if !set.is_feasible(p.as_slice(), opts.tol.feas) {
        return None;
    }
    Some(LocalSolution { cost: p.dist(target).powi(2), point: p, multipliers, iterations })
}

/// SplitMix64 finalizer: decorrelates per-start seeds.
pub(crate) fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Whether `v ∈ Γ^r(C, x)`, i.e. `x ∈ P_C(x + r v)`.
///
/// Decided by distance, which handles multivalued projections: since
/// `x ∈ C`, `x` is a nearest point of `y = x + r v` iff
/// `‖y − x‖ ≤ d(y, C) + tol_proj`. `v = 0` is always a good direction.
/// Projection failures surface as errors rather than `false`.
pub fn in_gamma_r(set: &ConstraintSet, x: &Vector, v: &Vector, r: f64, opts: &SolverOptions) -> Result<bool> {
    v.ensure_dim(set.dim())?;
    if !(r > 0.0) {
        return Err(Error::invalid(format!("scale r must be positive, got {r}")));
    }
    if !set.member_with(x, opts.tol.feas)? {
        return Err(Error::invalid("in_gamma_r requires x in the set"));
    }
    if v.is_zero() {
        return Ok(true);
    }
    let mut y = x.clone();
    y.axpy(r, v);
    let d = match set.shape() {
        Shape::Disks(ds) => {
            let p = project_disk_config(ds, &y, std::slice::from_ref(x), opts)?;
            if !p.converged {
                return Err(Error::NonConvergence { what: "projection", iterations: p.iterations });
            }
            p.dist
        }
        _ => set.distance_with(&y, opts)?,
    };
    Ok(r * v.norm() <= d + opts.tol.proj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProxStage {
    /// The projection of `x + s f̂(x)` is not single-valued.
    A,
    /// The direction back from the projection is not a good direction at
    /// scale `r`.
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxViolation {
    pub x: Vector,
    pub s: f64,
    pub stage: ProxStage,
}

/// Outcome of a sampled check of `r`-prox-regularity in a direction `f`.
/// A certificate covers only the sampled points and scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalProxReport {
    pub r: f64,
    pub samples_checked: usize,
    pub violations: Vec<ProxViolation>,
    pub certified: bool,
}

/// Checks, for each sample `x ∈ C` and `s` in `s_grid ⊂ (0, r)`, that
/// `z = P_C(x + s f(x)/‖f(x)‖)` is unique (stage a) and that
/// `(x + s f̂ − z)/‖x + s f̂ − z‖ ∈ Γ^r(C, z)` (stage b).
pub fn certify_directional_prox<F>(
    set: &ConstraintSet,
    f: F,
    r: f64,
    sample: &[Vector],
    s_grid: &[f64],
    opts: &SolverOptions,
) -> Result<DirectionalProxReport>
where
    F: Fn(&Vector) -> Vector + Sync + Send,
{
    if !(r > 0.0) {
        return Err(Error::invalid("scale r must be positive"));
    }
    if let Some(&s) = s_grid.iter().find(|&&s| !(s > 0.0 && s < r)) {
        return Err(Error::invalid(format!("scale {s} is outside (0, {r})")));
    }
    for x in sample {
        if !set.member_with(x, opts.tol.feas)? {
            return Err(Error::invalid(format!("sample point {x:?} is not in the set")));
        }
    }
    let per_point = opts.execution.map_slice(sample, |x| -> Result<Vec<ProxViolation>> {
        let dir = f(x).normalized_or_zero();
        let mut found = Vec::new();
        for &s in s_grid {
            let mut y = x.clone();
            y.axpy(s, &dir);
            let p = match set.shape() {
                Shape::Disks(ds) => project_disk_config(ds, &y, std::slice::from_ref(x), opts)?,
                _ => project_with(set, &y, opts)?,
            };
            if !p.converged || !p.is_unique() {
                found.push(ProxViolation { x: x.clone(), s, stage: ProxStage::A });
                continue;
            }
            let z = &p.nearest[0];
            let back = (&y - z).normalized_or_zero();
            if !in_gamma_r(set, z, &back, r, opts)? {
                found.push(ProxViolation { x: x.clone(), s, stage: ProxStage::B });
            }
        }
        Ok(found)
    });
    let mut violations = Vec::new();
    for v in per_point {
        violations.extend(v?);
    }
    Ok(DirectionalProxReport {
        r,
        samples_checked: sample.len() * s_grid.len(),
        certified: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn half_space_projection() {
        let set = ConstraintSet::half_space(v(&[0.0, 1.0]), 0.0).unwrap();
        let p = project(&set, &v(&[3.0, 2.0])).unwrap();
        assert_eq!(p.nearest, vec![v(&[3.0, 0.0])]);
        assert_eq!(p.dist, 2.0);
    }

    #[test]
    fn cross_projection_is_two_valued_on_the_diagonal() {
        let set = ConstraintSet::cross([0.0, 0.0]).unwrap();
        let p = project(&set, &v(&[1.0, 1.0])).unwrap();
        assert_eq!(p.nearest, vec![v(&[0.0, 1.0]), v(&[1.0, 0.0])]);
        assert_eq!(p.dist, 1.0);
        let p = project(&set, &v(&[1.0, 3.0])).unwrap();
        assert_eq!(p.nearest, vec![v(&[0.0, 3.0])]);
    }

    #[test]
    fn ball_exterior_projection() {
        let set = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = project(&set, &v(&[0.5, 0.0])).unwrap();
        assert_eq!(p.nearest, vec![v(&[1.0, 0.0])]);
        assert_eq!(p.dist, 0.5);
        let center = project(&set, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(center.nearest.len(), 4);
        assert_eq!(center.dist, 1.0);
    }

    #[test]
    fn projections_are_idempotent_and_feasible() {
        let sets = [
            ConstraintSet::half_space(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConstraintSet::ball_exterior(v(&[0.3, -0.2]), 1.5).unwrap(),
            ConstraintSet::cross([0.1, 0.2]).unwrap(),
            ConstraintSet::axis_box(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap(),
        ];
        let pts = [v(&[0.7, 0.9]), v(&[-2.0, 0.1]), v(&[0.31, -0.19]), v(&[5.0, 5.0])];
        for set in &sets {
            for x in &pts {
                let p = project(set, x).unwrap();
                let z = &p.nearest[0];
                assert!(set.member(z).unwrap(), "{} at {x:?}", set.kind_name());
                let again = project(set, z).unwrap();
                assert_eq!(&again.nearest[0], z);
                assert!((p.dist - set.distance(x).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn polyhedron_projection_matches_corner() {
        let faces = vec![
            crate::geometry::HalfSpace::new(v(&[1.0, 0.0]), 0.0).unwrap(),
            crate::geometry::HalfSpace::new(v(&[0.0, 1.0]), 0.0).unwrap(),
        ];
        let set = ConstraintSet::polyhedron(faces).unwrap();
        let p = project(&set, &v(&[2.0, 3.0])).unwrap();
        assert!(p.nearest[0].dist(&v(&[0.0, 0.0])) < 1e-12);
        assert!((p.dist - 13f64.sqrt()).abs() < 1e-12);
        let m = p.multipliers.unwrap();
        assert!((m[0] - 2.0).abs() < 1e-12 && (m[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cone_projection_examples() {
        let g = vec![v(&[-1.0, 0.0, 1.0, 0.0])];
        let c = project_cone(&g, &v(&[1.0, 0.0, -1.0, 0.0])).unwrap();
        assert!(c.v.norm() < 1e-14);
        assert!((c.lambdas[0] - 1.0).abs() < 1e-14);

        let free = project_cone(&[], &v(&[2.0, -3.0])).unwrap();
        assert_eq!(free.v, v(&[2.0, -3.0]));
        assert!(free.lambdas.is_empty());

        let inactive = project_cone(&[v(&[0.0, 1.0])], &v(&[1.0, 3.0])).unwrap();
        assert_eq!(inactive.v, v(&[1.0, 3.0]));
        assert_eq!(inactive.lambdas, vec![0.0]);

        assert!(project_cone(&[v(&[0.0, 0.0])], &v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn cone_projection_single_constraint_dual_formula() {
        // λ = −⟨u, G⟩/‖G‖² when the constraint is violated.
        let g = v(&[0.3, -1.2, 0.5]);
        let u = v(&[-1.0, 2.0, 0.1]);
        let expected = -u.dot(&g) / g.norm_sq();
        let c = project_cone(std::slice::from_ref(&g), &u).unwrap();
        assert!((c.lambdas[0] - expected).abs() < 1e-13);
        assert!(g.dot(&c.v).abs() < 1e-13);
    }

    #[test]
    fn gamma_r_examples() {
        let hs = ConstraintSet::half_space(v(&[0.0, 1.0]), 0.0).unwrap();
        assert!(in_gamma_r(&hs, &v(&[0.0, 0.0]), &v(&[0.0, 1.0]), 100.0, &opts()).unwrap());

        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let x = v(&[1.0, 0.0]);
        assert!(in_gamma_r(&ext, &x, &v(&[-1.0, 0.0]), 0.9, &opts()).unwrap());
        assert!(!in_gamma_r(&ext, &x, &v(&[-1.0, 0.0]), 1.1, &opts()).unwrap());
        assert!(in_gamma_r(&ext, &x, &v(&[0.0, 0.0]), 7.0, &opts()).unwrap());

        assert!(in_gamma_r(&ext, &v(&[0.5, 0.0]), &v(&[1.0, 0.0]), 1.0, &opts()).is_err());
    }

    #[test]
    fn cross_is_prox_regular_towards_the_lower_left_only() {
        let cross = ConstraintSet::cross([0.0, 0.0]).unwrap();
        let sample = vec![v(&[0.0, 0.0]), v(&[-1.0, 3.0]), v(&[2.0, 0.0]), v(&[-0.5, -0.5])];
        let grid = [0.5, 10.0, 1e3];
        let down = certify_directional_prox(&cross, |_| v(&[-1.0, -1.0]), 1e6, &sample, &grid, &opts()).unwrap();
        assert!(down.certified, "{:?}", down.violations);

        let up = certify_directional_prox(&cross, |_| v(&[1.0, 1.0]), 2.0, &[v(&[0.0, 0.0])], &[1.0], &opts()).unwrap();
        assert!(!up.certified);
        assert_eq!(up.violations[0].stage, ProxStage::A);
    }

    #[test]
    fn ball_exterior_is_prox_regular_in_every_direction() {
        let ext = ConstraintSet::ball_exterior(v(&[0.0, 0.0]), 1.0).unwrap();
        let sample: Vec<Vector> = (0..12)
            .map(|k| {
                let a = k as f64 * 0.5;
                v(&[a.cos(), a.sin()])
            })
            .collect();
        let report = certify_directional_prox(
            &ext,
            |x| v(&[-x[0] + 0.3, 0.2 - 0.7 * x[1]]),
            0.5,
            &sample,
            &[0.1, 0.25, 0.49],
            &opts(),
        )
        .unwrap();
        assert!(report.certified);
        assert_eq!(report.samples_checked, 36);
    }

    #[test]
    fn seeds_are_decorrelated() {
        assert_ne!(mix_seed(0, 1), mix_seed(0, 2));
        assert_ne!(mix_seed(1, 1), mix_seed(0, 1));
    }
}
