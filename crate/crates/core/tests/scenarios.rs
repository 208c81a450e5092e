use std::path::PathBuf;

use sweep_core::catchup::integrate;
use sweep_core::crowd::simulate_crowd;
use sweep_core::eikonal::{solve_eikonal, CellKind, Room, Segment};
use sweep_core::scenario::Scenario;
use sweep_core::{Error, SolverOptions, Vector};

fn shipped(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../cli/scenarios/{name}.json"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn every_shipped_scenario_parses_and_integrates() {
    for name in ["half_plane", "ball_slide", "translating_half_plane", "cross", "corridor_crowd", "room_exit"] {
        let sc = Scenario::from_json(&shipped(name)).unwrap();
        let p = sc.problem().unwrap();
        let traj = integrate(&p, sc.n.unwrap(), &sc.options(SolverOptions::default())).unwrap();
        assert_eq!(traj.steps(), sc.n.unwrap(), "{name}");
    }
}

#[test]
fn parse_errors_name_the_field() {
    let text = shipped("half_plane").replace("\"horizon\": 1", "\"horizon\": \"long\"");
    match Scenario::from_json(&text) {
        Err(Error::Scenario { field, message }) => {
            assert_eq!(field, "horizon");
            assert!(message.contains("line"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
    let text = shipped("half_plane").replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
    assert!(matches!(Scenario::from_json(&text), Err(Error::Scenario { .. })));
}

#[test]
fn infeasible_start_is_rejected() {
    let text = shipped("half_plane").replace("\"u0\": [0, 0]", "\"u0\": [0, 1]");
    assert!(Scenario::from_json(&text).and_then(|sc| sc.problem()).is_err());
}

#[test]
fn open_room_field_is_distance_to_exit_wall() {
    let room = Room {
        width: 4.0,
        height: 2.0,
        spacing: 0.1,
        obstacles: vec![],
        exits: vec![Segment { a: [0.0, 0.0], b: [0.0, 2.0] }],
    };
    let mask = room.rasterize().unwrap();
    let field = solve_eikonal(&mask).unwrap();
    for j in 0..mask.ny {
        for i in 0..mask.nx {
            let expected = i as f64 * mask.spacing;
            assert!((field.value(i, j) - expected).abs() < 1e-9, "cell ({i}, {j})");
        }
    }
    let values = field.values();
    let order = field.acceptance_order();
    assert!(order.windows(2).all(|w| values[w[0]] <= values[w[1]]));
    let u = field.spontaneous_velocity([2.03, 1.01]).unwrap();
    assert!((u[0] + 1.0).abs() < 1e-12 && u[1].abs() < 1e-12);
}

#[test]
fn field_values_grow_around_obstacles() {
    let sc = Scenario::from_json(&shipped("room_exit")).unwrap();
    let field = sc.exit_field().unwrap().unwrap();
    let m = &field.mask;
    for j in 0..m.ny {
        for i in 0..m.nx {
            let t = field.value(i, j);
            match m.kind(i, j) {
                CellKind::Obstacle => assert!(t.is_infinite()),
                CellKind::Exit => assert_eq!(t, 0.0),
                CellKind::Free => {
                    let c = m.center(i, j);
                    let straight = c[0].hypot(((c[1] - 5.0).abs() - 1.0).max(0.0));
                    assert!(t >= straight - 2.0 * m.spacing, "cell ({i}, {j}): {t} < {straight}");
                }
            }
        }
    }
}

#[test]
fn room_crowd_stays_feasible_and_heads_for_the_exit() {
    let sc = Scenario::from_json(&shipped("room_exit")).unwrap();
    let opts = sc.options(SolverOptions::default());
    let set = sc.constraint_set().unwrap();
    let q0 = Vector::from_slice(&sc.u0).unwrap();
    let run = simulate_crowd(&set, &q0, &sc.crowd_rule().unwrap(), sc.horizon, sc.n.unwrap(), &opts).unwrap();
    let disks = set.as_disks().unwrap();
    for q in &run.sweeping.states {
        assert!(disks.is_feasible(q.as_slice(), 1e-9));
    }
    let dist = |q: &Vector| -> f64 {
        let field = sc.exit_field().unwrap().unwrap();
        (0..disks.count())
            .map(|k| {
                let (i, j) = field.mask.locate([q[2 * k], q[2 * k + 1]]).unwrap();
                field.value(i, j)
            })
            .sum()
    };
    assert!(dist(run.sweeping.final_state()) < dist(&q0));
}
