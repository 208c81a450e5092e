use proptest::prelude::*;

use sweep_core::analysis::check_polar_decomposition;
use sweep_core::catchup::{fitted_order, integrate, Perturbation, PerturbationBound, Problem};
use sweep_core::duality::PNormSpace;
use sweep_core::projection::{in_gamma_r, project, project_cone};
use sweep_core::{ConstraintSet, MovingSet, SolverOptions, Vector};

fn v2(x: f64, y: f64) -> Vector {
    Vector::new(vec![x, y]).unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

fn sets() -> Vec<ConstraintSet> {
    vec![
        ConstraintSet::half_space(v2(1.0, 2.0), 0.5).unwrap(),
        ConstraintSet::axis_box(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap(),
        ConstraintSet::ball_exterior(v2(0.5, -0.5), 1.5).unwrap(),
    ]
}

proptest! {
    #[test]
    fn projection_commutes_with_translation(x in coord(), y in coord(), ax in coord(), ay in coord()) {
        let a = v2(ax, ay);
        let p = v2(x, y);
        for set in sets() {
            let base = project(&set, &p).unwrap();
            let moved = project(&set.translated(&a).unwrap(), &(&p + &a)).unwrap();
            prop_assert!((base.dist - moved.dist).abs() <= 1e-9);
            if base.is_unique() {
                prop_assert!(moved.first().unwrap().dist(&(base.first().unwrap() + &a)) <= 1e-9);
            }
        }
    }

    #[test]
    fn projection_is_nearest_member(x in coord(), y in coord()) {
        let p = v2(x, y);
        for set in sets() {
            let res = project(&set, &p).unwrap();
            let z = res.first().unwrap();
            prop_assert!(set.member(z).unwrap());
            prop_assert!((z.dist(&p) - res.dist).abs() <= 1e-9);
        }
    }

    #[test]
    fn gamma_directions_scale_down(x in coord(), y in coord(), r in 0.1..3.0f64, lambda in 0.0..1.0f64) {
        let opts = SolverOptions::default();
        let set = ConstraintSet::ball_exterior(v2(0.0, 0.0), 1.0).unwrap();
        let z = project(&set, &v2(x, y)).unwrap().first().unwrap().clone();
        let v = (&v2(x, y) - &z).normalized_or_zero();
        if in_gamma_r(&set, &z, &v, r, &opts).unwrap() {
            prop_assert!(in_gamma_r(&set, &z, &v.scaled(lambda), r, &opts).unwrap());
        }
    }

    #[test]
    fn cone_projection_is_moreau_split(
        g in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 1..5),
        u in prop::collection::vec(-2.0..2.0f64, 3),
    ) {
        let gradients: Vec<Vector> = g.into_iter().map(|c| Vector::new(c).unwrap()).filter(|v| v.norm() > 1e-3).collect();
        let u = Vector::new(u).unwrap();
        let rep = check_polar_decomposition(&gradients, &u, 1e-9).unwrap();
        prop_assert!(rep.pass, "{:?}", rep.violations);
        let cone = project_cone(&gradients, &u).unwrap();
        prop_assert!(cone.v.norm() <= u.norm() + 1e-9);
    }

    #[test]
    fn duality_map_is_homogeneous(c in prop::collection::vec(-3.0..3.0f64, 3), s in 0.01..4.0f64, p in 2.0..8.0f64) {
        let space = PNormSpace::new(3, p).unwrap();
        let x = Vector::new(c).unwrap();
        let j = space.jp(&x).unwrap();
        let js = space.jp(&x.scaled(s)).unwrap();
        prop_assert!(js.dist(&j.scaled(s.powf(p - 1.0))) <= 1e-9 * (1.0 + js.norm()));
        let np = space.norm(&x).unwrap().powf(p);
        prop_assert!((j.dot(&x) - np).abs() <= 1e-9 * (1.0 + np));
    }

    #[test]
    fn catchup_states_stay_feasible(fx in -2.0..2.0f64, fy in -2.0..2.0f64, ux in coord(), n in 10usize..60) {
        let set = ConstraintSet::half_space(v2(0.0, 1.0), 0.0).unwrap();
        let f = v2(fx, fy);
        let bound = f.norm().max(0.1);
        let p = Problem::new(MovingSet::fixed(set.clone()), Perturbation::Constant(f), PerturbationBound::Sup(bound), v2(ux, -1.0), 1.0, 1.0).unwrap();
        prop_assume!(n >= p.min_steps());
        let traj = integrate(&p, n, &SolverOptions::default()).unwrap();
        for u in &traj.states {
            prop_assert!(u[1] <= 1e-12);
        }
        for d in &traj.deltas {
            prop_assert!(d.norm() <= bound + 1e-9);
        }
    }

    #[test]
    fn fitted_order_recovers_power_laws(k in 0.5..3.0f64, c in 0.1..10.0f64) {
        let ns = [10usize, 20, 40, 80];
        let gaps: Vec<f64> = ns.iter().map(|&n| c / (n as f64).powf(k)).collect();
        prop_assert!((fitted_order(&ns, &gaps).unwrap() - k).abs() <= 1e-9);
    }
}
