//! Geodesic distance to the exit by fast marching, and the unit velocity
//! field it induces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Free,
    Obstacle,
    Exit,
}

/// A uniform grid of square cells; cell `(i, j)` has its center at
/// `origin + ((i + ½)Δx, (j + ½)Δx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMask {
    pub origin: [f64; 2],
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    cells: Vec<CellKind>,
}

impl CellMask {
    pub fn new(origin: [f64; 2], spacing: f64, nx: usize, ny: usize, cells: Vec<CellKind>) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        if nx == 0 || ny == 0 || cells.len() != nx * ny {
            return Err(Error::invalid(format!("grid of {nx}×{ny} cells needs {} entries, got {}", nx * ny, cells.len())));
        }
        Ok(CellMask { origin, spacing, nx, ny, cells })
    }

    pub fn from_fn(origin: [f64; 2], spacing: f64, nx: usize, ny: usize, f: impl Fn(usize, usize) -> CellKind) -> Result<Self> {
        let cells = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
        CellMask::new(origin, spacing, nx, ny, cells)
    }

    /// Rows from top (`j = ny − 1`) to bottom; `.` free, `#` obstacle,
    /// `E` exit.
    pub fn from_rows(spacing: f64, rows: &[&str]) -> Result<Self> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = vec![CellKind::Free; nx * ny];
        for (k, row) in rows.iter().enumerate() {
            let j = ny - 1 - k;
            if row.chars().count() != nx {
                return Err(Error::invalid("mask rows must have equal length"));
            }
            for (i, ch) in row.chars().enumerate() {
                cells[j * nx + i] = match ch {
                    '.' => CellKind::Free,
                    '#' => CellKind::Obstacle,
                    'E' => CellKind::Exit,
                    other => return Err(Error::invalid(format!("unknown mask symbol {other:?}"))),
                };
            }
        }
        CellMask::new([0.0, 0.0], spacing, nx, ny, cells)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn kind(&self, i: usize, j: usize) -> CellKind {
        self.cells[self.index(i, j)]
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.spacing,
            self.origin[1] + (j as f64 + 0.5) * self.spacing,
        ]
    }

    /// The cell containing `pos`, if inside the grid.
    pub fn locate(&self, pos: [f64; 2]) -> Option<(usize, usize)> {
        let sx = (pos[0] - self.origin[0]) / self.spacing;
        let sy = (pos[1] - self.origin[1]) / self.spacing;
        if !(sx >= 0.0 && sy >= 0.0 && sx <= self.nx as f64 && sy <= self.ny as f64) {
            return None;
        }
        Some(((sx as usize).min(self.nx - 1), (sy as usize).min(self.ny - 1)))
    }

    fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i, j) = (i as isize, j as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(di, dj)| {
            let (a, b) = (i + di, j + dj);
            (a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny).then_some((a as usize, b as usize))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    fn contains(&self, p: [f64; 2]) -> bool {
        self.min[0] <= p[0] && p[0] <= self.max[0] && self.min[1] <= p[1] && p[1] <= self.max[1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    fn distance(&self, p: [f64; 2]) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let s = if len2 > 0.0 {
            (((p[0] - self.a[0]) * d[0] + (p[1] - self.a[1]) * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = [self.a[0] + s * d[0], self.a[1] + s * d[1]];
        (p[0] - q[0]).hypot(p[1] - q[1])
    }
}

/// Rectangular room `[0, width] × [0, height]` with rectangular obstacles
/// and exit segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub width: f64,
    pub height: f64,
    pub spacing: f64,
    #[serde(default)]
    pub obstacles: Vec<Rect>,
    pub exits: Vec<Segment>,
}

impl Room {
    /// A cell is an obstacle iff its center lies in an obstacle, and an
    /// exit iff its center is within `Δx/2` of an exit segment.
    pub fn rasterize(&self) -> Result<CellMask> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::invalid("room dimensions must be positive"));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::invalid("room spacing must be positive"));
        }
        let nx = (self.width / self.spacing).round() as usize;
        let ny = (self.height / self.spacing).round() as usize;
        let half = 0.5 * self.spacing * (1.0 + 1e-9);
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = [(i as f64 + 0.5) * self.spacing, (j as f64 + 0.5) * self.spacing];
                let obstacle = self.obstacles.iter().any(|r| r.contains(c));
                let exit = self.exits.iter().any(|s| s.distance(c) <= half);
                if obstacle && exit {
                    return Err(Error::invalid(format!("exit cell ({i}, {j}) lies inside an obstacle")));
                }
                cells.push(if obstacle {
                    CellKind::Obstacle
                } else if exit {
                    CellKind::Exit
                } else {
                    CellKind::Free
                });
            }
        }
        CellMask::new([0.0, 0.0], self.spacing, nx, ny, cells)
    }
}

/// Distance-to-exit values on a mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub mask: CellMask,
    values: Vec<f64>,
    order: Vec<usize>,
}

#[derive(PartialEq)]
struct Trial {
    value: f64,
    index: usize,
}

impl Eq for Trial {}

impl Ord for Trial {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on value, then on index.
        other.value.total_cmp(&self.value).then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-order upwind fast marching for `|∇T| = 1`, `T = 0` on exits.
pub fn solve_eikonal(mask: &CellMask) -> Result<GridField> {
    let n = mask.nx * mask.ny;
    let mut values = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    let mut heap = BinaryHeap::new();
    for (k, kind) in mask.cells.iter().enumerate() {
        if *kind == CellKind::Exit {
            values[k] = 0.0;
            heap.push(Trial { value: 0.0, index: k });
        }
    }
    if heap.is_empty() {
        return Err(Error::NoExit);
    }
    let h = mask.spacing;
    let mut order = Vec::new();
    while let Some(Trial { value, index }) = heap.pop() {
        if accepted[index] || value > values[index] {
            continue;
        }
        accepted[index] = true;
        order.push(index);
        let (i, j) = (index % mask.nx, index / mask.nx);
        for (a, b) in mask.neighbours(i, j) {
            let k = mask.index(a, b);
            if accepted[k] || mask.cells[k] != CellKind::Free {
                continue;
            }
            let t = local_update(mask, &values, &accepted, a, b, h);
            if t < values[k] {
                values[k] = t;
                heap.push(Trial { value: t, index: k });
            }
        }
    }
    Ok(GridField { mask: mask.clone(), values, order })
}

fn local_update(mask: &CellMask, values: &[f64], accepted: &[bool], i: usize, j: usize, h: f64) -> f64 {
    let known = |a: usize, b: usize| {
        let k = mask.index(a, b);
        if accepted[k] {
            values[k]
        } else {
            f64::INFINITY
        }
    };
    let tx = {
        let l = if i > 0 { known(i - 1, j) } else { f64::INFINITY };
        let r = if i + 1 < mask.nx { known(i + 1, j) } else { f64::INFINITY };
        l.min(r)
    };
    let ty = {
        let d = if j > 0 { known(i, j - 1) } else { f64::INFINITY };
        let u = if j + 1 < mask.ny { known(i, j + 1) } else { f64::INFINITY };
        d.min(u)
    };
    let (a, b) = if tx <= ty { (tx, ty) } else { (ty, tx) };
    if b.is_infinite() || b - a >= h {
        a + h
    } else {
        0.5 * (a + b + (2.0 * h * h - (a - b) * (a - b)).sqrt())
    }
}

impl GridField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.mask.index(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cell indices in acceptance order.
    pub fn acceptance_order(&self) -> &[usize] {
        &self.order
    }

    /// Upwind gradient of `T` at a cell: along each axis the one-sided
    /// difference towards the smaller finite neighbour, or zero when the
    /// cell is a local minimum on that axis.
    pub fn cell_gradient(&self, i: usize, j: usize) -> [f64; 2] {
        let m = &self.mask;
        if m.kind(i, j) != CellKind::Free || !self.value(i, j).is_finite() {
            return [0.0, 0.0];
        }
        let t = self.value(i, j);
        let h = m.spacing;
        let axis = |lo: Option<f64>, hi: Option<f64>| {
            let lo = lo.unwrap_or(f64::INFINITY);
            let hi = hi.unwrap_or(f64::INFINITY);
            if lo < t && lo <= hi {
                (t - lo) / h
            } else if hi < t {
                (hi - t) / h
            } else {
                0.0
            }
        };
        let gx = axis(
            (i > 0).then(|| self.value(i - 1, j)),
            (i + 1 < m.nx).then(|| self.value(i + 1, j)),
        );
        let gy = axis(
            (j > 0).then(|| self.value(i, j - 1)),
            (j + 1 < m.ny).then(|| self.value(i, j + 1)),
        );
        [gx, gy]
    }

    /// `U = −∇T/|∇T|` at `pos`, with `∇T` bilinearly interpolated over
    /// the surrounding free cell centers. Zero on exit cells.
    pub fn spontaneous_velocity(&self, pos: [f64; 2]) -> Result<[f64; 2]> {
        let m = &self.mask;
        let (ci, cj) = m.locate(pos).ok_or(Error::OutsideGrid { x: pos[0], y: pos[1] })?;
        match m.kind(ci, cj) {
            CellKind::Exit => return Ok([0.0, 0.0]),
            CellKind::Obstacle => return Err(Error::Unreachable { x: pos[0], y: pos[1] }),
            CellKind::Free => {}
        }
        if !self.value(ci, cj).is_finite() {
            return Err(Error::Unreachable { x: pos[0], y: pos[1] });
        }
        let sx = (pos[0] - m.origin[0]) / m.spacing - 0.5;
        let sy = (pos[1] - m.origin[1]) / m.spacing - 0.5;
        let i0 = sx.floor();
        let j0 = sy.floor();
        let (wx, wy) = (sx - i0, sy - j0);
        let mut g = [0.0, 0.0];
        let mut wsum = 0.0;
        for (di, dj, w) in [(0, 0, (1.0 - wx) * (1.0 - wy)), (1, 0, wx * (1.0 - wy)), (0, 1, (1.0 - wx) * wy), (1, 1, wx * wy)] {
            let (a, b) = (i0 as isize + di, j0 as isize + dj);
            if a < 0 || b < 0 || a as usize >= m.nx || b as usize >= m.ny || w == 0.0 {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            if m.kind(a, b) != CellKind::Free || !self.value(a, b).is_finite() {
                continue;
            }
            let c = self.cell_gradient(a, b);
            g[0] += w * c[0];
            g[1] += w * c[1];
            wsum += w;
        }
        let mut norm = g[0].hypot(g[1]);
        if wsum == 0.0 || norm == 0.0 {
            g = self.cell_gradient(ci, cj);
            norm = g[0].hypot(g[1]);
        }
        if norm == 0.0 {
            return Err(Error::Unreachable { x: pos[0], y: pos[1] });
        }
        Ok([-g[0] / norm, -g[1] / norm])
    }
}
