//! Staggered difference and interpolation operators.
//!
//! Naming: `d{x,y}_<from>_to_<to>` is a two-point difference in the named
//! direction, `avg_{x,y}_<from>_to_<to>` a two-point midpoint average.
//! Wall treatment:
//!
//! * center -> face differences store explicit zeros on boundary faces
//!   (homogeneous Neumann closure for Z, W; unused for P).
//! * face -> corner differences of a wall-vanishing velocity component use the
//!   degenerate half spacing `k/2` (`h/2`) at the wall row (column).
//! * averages whose target sits on a boundary take the single adjacent value.

use crate::grid::{CellField, CornerField, StaggeredGrid, Velocity, XFaceField, YFaceField};

/// `[d_x f]_{i+1/2, j+1/2} = (f_{i+1} - f_i) / h`
pub fn dx_xface_to_center(f: &XFaceField, g: &StaggeredGrid) -> CellField {
    CellField::from_index_fn(g, |i, j| (f[(i + 1, j)] - f[(i, j)]) / g.h)
}

/// `[d_y f]_{i+1/2, j+1/2} = (f_{j+1} - f_j) / k`
pub fn dy_yface_to_center(f: &YFaceField, g: &StaggeredGrid) -> CellField {
    CellField::from_index_fn(g, |i, j| (f[(i, j + 1)] - f[(i, j)]) / g.k)
}

/// `[D_x f]_{i, j+1/2}` on interior faces, zero on `i = 0, nx`.
pub fn dx_center_to_xface(f: &CellField, g: &StaggeredGrid) -> XFaceField {
    XFaceField::from_index_fn(g, |i, j| {
        if i == 0 || i == g.nx {
            0.0
        } else {
            (f[(i, j)] - f[(i - 1, j)]) / g.h
        }
    })
}

/// `[D_y f]_{i+1/2, j}` on interior faces, zero on `j = 0, ny`.
pub fn dy_center_to_yface(f: &CellField, g: &StaggeredGrid) -> YFaceField {
    YFaceField::from_index_fn(g, |i, j| {
        if j == 0 || j == g.ny {
            0.0
        } else {
            (f[(i, j)] - f[(i, j - 1)]) / g.k
        }
    })
}

/// `[D_y f]_{i, j}` for an x-face quantity that vanishes on the y-walls.
pub fn dy_xface_to_corner(f: &XFaceField, g: &StaggeredGrid) -> CornerField {
    CornerField::from_index_fn(g, |i, j| {
        let above = if j < g.ny { f[(i, j)] } else { 0.0 };
        let below = if j > 0 { f[(i, j - 1)] } else { 0.0 };
        (above - below) / g.k_node(j)
    })
}

/// `[D_x f]_{i, j}` for a y-face quantity that vanishes on the x-walls.
pub fn dx_yface_to_corner(f: &YFaceField, g: &StaggeredGrid) -> CornerField {
    CornerField::from_index_fn(g, |i, j| {
        let right = if i < g.nx { f[(i, j)] } else { 0.0 };
        let left = if i > 0 { f[(i - 1, j)] } else { 0.0 };
        (right - left) / g.h_node(i)
    })
}

/// `[d_y f]_{i, j+1/2} = (f_{i,j+1} - f_{i,j}) / k`
pub fn dy_corner_to_xface(f: &CornerField, g: &StaggeredGrid) -> XFaceField {
    XFaceField::from_index_fn(g, |i, j| (f[(i, j + 1)] - f[(i, j)]) / g.k)
}

/// `[d_x f]_{i+1/2, j} = (f_{i+1,j} - f_{i,j}) / h`
pub fn dx_corner_to_yface(f: &CornerField, g: &StaggeredGrid) -> YFaceField {
    YFaceField::from_index_fn(g, |i, j| (f[(i + 1, j)] - f[(i, j)]) / g.h)
}

pub fn avg_x_xface_to_center(f: &XFaceField, g: &StaggeredGrid) -> CellField {
    CellField::from_index_fn(g, |i, j| 0.5 * (f[(i, j)] + f[(i + 1, j)]))
}

pub fn avg_y_yface_to_center(f: &YFaceField, g: &StaggeredGrid) -> CellField {
    CellField::from_index_fn(g, |i, j| 0.5 * (f[(i, j)] + f[(i, j + 1)]))
}

pub fn avg_x_center_to_xface(f: &CellField, g: &StaggeredGrid) -> XFaceField {
    XFaceField::from_index_fn(g, |i, j| {
        if i == 0 {
            f[(0, j)]
        } else if i == g.nx {
            f[(g.nx - 1, j)]
        } else {
            0.5 * (f[(i - 1, j)] + f[(i, j)])
        }
    })
}

pub fn avg_y_center_to_yface(f: &CellField, g: &StaggeredGrid) -> YFaceField {
    YFaceField::from_index_fn(g, |i, j| {
        if j == 0 {
            f[(i, 0)]
        } else if j == g.ny {
            f[(i, g.ny - 1)]
        } else {
            0.5 * (f[(i, j - 1)] + f[(i, j)])
        }
    })
}

/// `P_h^x` of a y-face field onto corners.
pub fn avg_x_yface_to_corner(f: &YFaceField, g: &StaggeredGrid) -> CornerField {
    CornerField::from_index_fn(g, |i, j| {
        if i == 0 {
            f[(0, j)]
        } else if i == g.nx {
            f[(g.nx - 1, j)]
        } else {
            0.5 * (f[(i - 1, j)] + f[(i, j)])
        }
    })
}

/// `P_h^y` of an x-face field onto corners.
pub fn avg_y_xface_to_corner(f: &XFaceField, g: &StaggeredGrid) -> CornerField {
    CornerField::from_index_fn(g, |i, j| {
        if j == 0 {
            f[(i, 0)]
        } else if j == g.ny {
            f[(i, g.ny - 1)]
        } else {
            0.5 * (f[(i, j - 1)] + f[(i, j)])
        }
    })
}

/// `P_h^y` of a corner field onto x-faces.
pub fn avg_y_corner_to_xface(f: &CornerField, g: &StaggeredGrid) -> XFaceField {
    XFaceField::from_index_fn(g, |i, j| 0.5 * (f[(i, j)] + f[(i, j + 1)]))
}

/// `P_h^x` of a corner field onto y-faces.
pub fn avg_x_corner_to_yface(f: &CornerField, g: &StaggeredGrid) -> YFaceField {
    YFaceField::from_index_fn(g, |i, j| 0.5 * (f[(i, j)] + f[(i + 1, j)]))
}

/// Cell-centered Laplacian `d_x D_x f + d_y D_y f` with zero boundary fluxes.
pub fn laplace_neumann(f: &CellField, g: &StaggeredGrid) -> CellField {
    let (nx, ny) = (g.nx, g.ny);
    let (ih2, ik2) = (1.0 / (g.h * g.h), 1.0 / (g.k * g.k));
    CellField::from_index_fn(g, |i, j| {
        let c = f[(i, j)];
        let mut out = 0.0;
        if i + 1 < nx {
            out += (f[(i + 1, j)] - c) * ih2;
        }
        if i > 0 {
            out -= (c - f[(i - 1, j)]) * ih2;
        }
        if j + 1 < ny {
            out += (f[(i, j + 1)] - c) * ik2;
        }
        if j > 0 {
            out -= (c - f[(i, j - 1)]) * ik2;
        }
        out
    })
}

/// `d_x U1 + d_y U2` at cell centers.
pub fn divergence(u: &Velocity, g: &StaggeredGrid) -> CellField {
    CellField::from_index_fn(g, |i, j| {
        (u.u1[(i + 1, j)] - u.u1[(i, j)]) / g.h + (u.u2[(i, j + 1)] - u.u2[(i, j)]) / g.k
    })
}

/// `(D_x P, D_y P)` on interior faces; boundary faces are zero.
pub fn gradient(p: &CellField, g: &StaggeredGrid) -> Velocity {
    Velocity { u1: dx_center_to_xface(p, g), u2: dy_center_to_yface(p, g) }
}

/// MAC velocity Laplacian with no-slip walls.
///
/// `U1 -> D_x d_x U1 + d_y D_y U1`, `U2 -> D_y d_y U2 + d_x D_x U2`. The mixed
/// derivatives use the half-cell wall closure; values on wall faces are zero.
pub fn velocity_laplacian(u: &Velocity, g: &StaggeredGrid) -> Velocity {
    let (nx, ny) = (g.nx, g.ny);
    let (ih2, ik2) = (1.0 / (g.h * g.h), 1.0 / (g.k * g.k));
    let u1 = XFaceField::from_index_fn(g, |i, j| {
        if i == 0 || i == nx {
            return 0.0;
        }
        let f = &u.u1;
        let c = f[(i, j)];
        let xx = (f[(i + 1, j)] - 2.0 * c + f[(i - 1, j)]) * ih2;
        // corner differences above/below with wall half cells (value 0 on wall)
        let up = if j + 1 < ny { (f[(i, j + 1)] - c) / g.k } else { -c / (0.5 * g.k) };
        let dn = if j > 0 { (c - f[(i, j - 1)]) / g.k } else { c / (0.5 * g.k) };
        xx + (up - dn) / g.k
    });
    let u2 = YFaceField::from_index_fn(g, |i, j| {
        if j == 0 || j == ny {
            return 0.0;
        }
        let f = &u.u2;
        let c = f[(i, j)];
        let yy = (f[(i, j + 1)] - 2.0 * c + f[(i, j - 1)]) * ik2;
        let rt = if i + 1 < nx { (f[(i + 1, j)] - c) / g.h } else { -c / (0.5 * g.h) };
        let lt = if i > 0 { (c - f[(i - 1, j)]) / g.h } else { c / (0.5 * g.h) };
        yy + (rt - lt) / g.h
    });
    Velocity { u1, u2 }
}

/// Velocity averaged to cell centers (for output and post-processing).
pub fn velocity_at_centers(u: &Velocity, g: &StaggeredGrid) -> (CellField, CellField) {
    (avg_x_xface_to_center(&u.u1, g), avg_y_yface_to_center(&u.u2, g))
}
