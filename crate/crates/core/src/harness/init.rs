//! Initial conditions sampled on the staggered grid.

use std::f64::consts::PI;

use super::config::InitKind;
use crate::error::Result;
use crate::grid::{CellField, StaggeredGrid, Velocity, XFaceField, YFaceField};
use crate::linalg::NeumannPoisson;
use crate::model::{ChnsState, Params};

/// `u1 = -x^2 (x-1)^2 (y-1)(2y-1) y / 128`; `u2(x, y) = -u1(y, x)`.
pub fn trig_u1(x: f64, y: f64) -> f64 {
    -x * x * (x - 1.0) * (x - 1.0) * (y - 1.0) * (2.0 * y - 1.0) * y / 128.0
}

/// Build the state at `t = 0`.
///
/// Phase values sit at cell centers, velocities at their faces with wall
/// zeros enforced. With `project` the sampled velocity is replaced by its
/// discretely divergence-free part, which the momentum step assumes.
pub fn init_condition(kind: &InitKind, g: &StaggeredGrid, p: &Params, project: bool) -> Result<ChnsState> {
    let (z, mut u) = match *kind {
        InitKind::Trig => {
            let z = CellField::from_fn(g, |x, y| (PI * x).cos() * (PI * y).cos());
            let u = Velocity { u1: XFaceField::from_fn(g, trig_u1), u2: YFaceField::from_fn(g, |x, y| -trig_u1(y, x)) };
            (z, u)
        }
        InitKind::SquareBubble { side, cx, cy, inside } => {
            let half = 0.5 * side;
            let z = CellField::from_fn(g, |x, y| {
                if (x - cx).abs() < half && (y - cy).abs() < half {
                    inside
                } else {
                    -inside
                }
            });
            (z, Velocity::zeros(g))
        }
        InitKind::CircleBubble { radius, cx, cy, inside } => {
            let z = CellField::from_fn(g, |x, y| if (x - cx).hypot(y - cy) < radius { inside } else { -inside });
            (z, Velocity::zeros(g))
        }
        InitKind::Constant { value } => (CellField::constant(g, value), Velocity::zeros(g)),
    };
    u.enforce_walls();
    if project && (u.u1.max_abs() > 0.0 || u.u2.max_abs() > 0.0) {
        u = NeumannPoisson::new(g, 1e-13).project(&u)?;
    }
    ChnsState::new(z, u, g, p)
}
