//! CSV writers. Numbers use the shortest decimal that round-trips.

use std::fmt::Write;

use crate::catchup::{ConvergenceStudy, Trajectory};
use crate::eikonal::GridField;

/// Shortest round-trip decimal (`1.0`, `0.1`, `1e-20`, `inf`).
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `t,u_1..u_d,delta_1..delta_d`; the last row has empty delta fields.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dim();
    let mut out = String::from("t");
    for k in 1..=d {
        write!(out, ",u_{k}").unwrap();
    }
    for k in 1..=d {
        write!(out, ",delta_{k}").unwrap();
    }
    out.push('\n');
    for (i, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
        out.push_str(&num(*t));
        for c in u.as_slice() {
            write!(out, ",{}", num(*c)).unwrap();
        }
        match traj.deltas.get(i) {
            Some(delta) => {
                for c in delta.as_slice() {
                    write!(out, ",{}", num(*c)).unwrap();
                }
            }
            None => out.push_str(&",".repeat(d)),
        }
        out.push('\n');
    }
    out
}

/// `t,q_1x,q_1y,...` for disk configurations.
pub fn frames_csv(traj: &Trajectory) -> String {
    let count = traj.dim() / 2;
    let mut out = String::from("t");
    for k in 1..=count {
        write!(out, ",q_{k}x,q_{k}y").unwrap();
    }
    out.push('\n');
    for (t, q) in traj.times.iter().zip(&traj.states) {
        out.push_str(&num(*t));
        for c in q.as_slice() {
            write!(out, ",{}", num(*c)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `n,gap,fitted_order`, the fitted order (or `exact`) on every row.
pub fn convergence_csv(study: &ConvergenceStudy) -> String {
    let order = study.order_label();
    let mut out = String::from("n,gap,fitted_order\n");
    for row in &study.rows {
        writeln!(out, "{},{},{}", row.n, num(row.gap), order).unwrap();
    }
    out
}

/// `x,y,value` at cell centers, row by row from `y = 0`.
pub fn field_csv(field: &GridField) -> String {
    let m = &field.mask;
    let mut out = String::from("x,y,value\n");
    for j in 0..m.ny {
        for i in 0..m.nx {
            let c = m.center(i, j);
            writeln!(out, "{},{},{}", num(c[0]), num(c[1]), num(field.value(i, j))).unwrap();
        }
    }
    out
}
