//! Weighted discrete inner products and norms on the staggered grid.
//!
//! Sums run serially in storage order (y outer, x inner), so results are
//! reproducible bit-for-bit.

use crate::grid::{CellField, CornerField, StaggeredGrid, Velocity, XFaceField, YFaceField};
use crate::ops;

/// `(f, g)_{l2,M}` over cell centers, weight `h k`.
pub fn inner_m(f: &CellField, g: &CellField, grid: &StaggeredGrid) -> f64 {
    let s: f64 = f.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a * b).sum();
    grid.h * grid.k * s
}

/// `(f, g)_{l2,T,M}` over interior x-faces `i = 1..nx-1`.
pub fn inner_tm(f: &XFaceField, g: &XFaceField, grid: &StaggeredGrid) -> f64 {
    let mut s = 0.0;
    for j in 0..grid.ny {
        for i in 1..grid.nx {
            s += f[(i, j)] * g[(i, j)];
        }
    }
    grid.h * grid.k * s
}

/// `(f, g)_{l2,M,T}` over interior y-faces `j = 1..ny-1`.
pub fn inner_mt(f: &YFaceField, g: &YFaceField, grid: &StaggeredGrid) -> f64 {
    let mut s = 0.0;
    for j in 1..grid.ny {
        for i in 0..grid.nx {
            s += f[(i, j)] * g[(i, j)];
        }
    }
    grid.h * grid.k * s
}

/// `(f, g)_{l2,T_x}`: corners `i = 0..nx`, `j = 1..ny-1`, weight `h_i k`.
pub fn inner_tx(f: &CornerField, g: &CornerField, grid: &StaggeredGrid) -> f64 {
    let mut s = 0.0;
    for j in 1..grid.ny {
        for i in 0..=grid.nx {
            s += grid.h_node(i) * grid.k * f[(i, j)] * g[(i, j)];
        }
    }
    s
}

/// `(f, g)_{l2,T_y}`: corners `i = 1..nx-1`, `j = 0..ny`, weight `h k_j`.
pub fn inner_ty(f: &CornerField, g: &CornerField, grid: &StaggeredGrid) -> f64 {
    let mut s = 0.0;
    for j in 0..=grid.ny {
        for i in 1..grid.nx {
            s += grid.h * grid.k_node(j) * f[(i, j)] * g[(i, j)];
        }
    }
    s
}

pub fn norm_m(f: &CellField, grid: &StaggeredGrid) -> f64 {
    inner_m(f, f, grid).sqrt()
}

pub fn norm_tm(f: &XFaceField, grid: &StaggeredGrid) -> f64 {
    inner_tm(f, f, grid).sqrt()
}

pub fn norm_mt(f: &YFaceField, grid: &StaggeredGrid) -> f64 {
    inner_mt(f, f, grid).sqrt()
}

pub fn norm_tx(f: &CornerField, grid: &StaggeredGrid) -> f64 {
    inner_tx(f, f, grid).sqrt()
}

pub fn norm_ty(f: &CornerField, grid: &StaggeredGrid) -> f64 {
    inner_ty(f, f, grid).sqrt()
}

/// Vector inner product `(U1, V1)_{T,M} + (U2, V2)_{M,T}`.
pub fn inner_vec(u: &Velocity, v: &Velocity, grid: &StaggeredGrid) -> f64 {
    inner_tm(&u.u1, &v.u1, grid) + inner_mt(&u.u2, &v.u2, grid)
}

/// `||U||_{l2}^2`.
pub fn l2norm_sq_vec(u: &Velocity, grid: &StaggeredGrid) -> f64 {
    inner_vec(u, u, grid)
}

/// `||D U||^2 = ||d_x U1||_M^2 + ||D_y U1||_{T_y}^2 + ||D_x U2||_{T_x}^2 + ||d_y U2||_M^2`.
pub fn dnorm_sq_vec(u: &Velocity, grid: &StaggeredGrid) -> f64 {
    let a = ops::dx_xface_to_center(&u.u1, grid);
    let b = ops::dy_xface_to_corner(&u.u1, grid);
    let c = ops::dx_yface_to_corner(&u.u2, grid);
    let d = ops::dy_yface_to_center(&u.u2, grid);
    inner_m(&a, &a, grid) + inner_ty(&b, &b, grid) + inner_tx(&c, &c, grid) + inner_m(&d, &d, grid)
}

/// `||D f||^2 = ||D_x f||_{T,M}^2 + ||D_y f||_{M,T}^2` for a cell field.
pub fn dnorm_sq_scalar(f: &CellField, grid: &StaggeredGrid) -> f64 {
    let gx = ops::dx_center_to_xface(f, grid);
    let gy = ops::dy_center_to_yface(f, grid);
    inner_tm(&gx, &gx, grid) + inner_mt(&gy, &gy, grid)
}

/// `(f, 1)_M`.
pub fn integral(f: &CellField, grid: &StaggeredGrid) -> f64 {
    grid.h * grid.k * f.as_slice().iter().sum::<f64>()
}

/// Mean value over the domain.
pub fn mean(f: &CellField, grid: &StaggeredGrid) -> f64 {
    integral(f, grid) / grid.area()
}

/// Subtract the domain mean in place (cell weights are uniform).
pub fn remove_mean(f: &mut CellField) {
    let m = f.as_slice().iter().sum::<f64>() / f.as_slice().len() as f64;
    f.as_mut_slice().iter_mut().for_each(|v| *v -= m);
}
