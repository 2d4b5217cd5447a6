//! Independent oracles for the integration and acceptance tests.
//!
//! Everything here works on raw `Vec<f64>` arrays with explicit index loops
//! and never calls the library's operators or solvers. Linear steps are
//! assembled column by column into dense matrices and solved with LU.

#![allow(dead_code)]

use chns_core::grid::{CellField, StaggeredGrid, Velocity, XFaceField, YFaceField};
use chns_core::{ChnsState, Params};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

/// Grid sizes with the storage conventions `data[j * cols + i]`.
#[derive(Debug, Clone, Copy)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub k: f64,
}

impl Mesh {
    pub fn of(g: &StaggeredGrid) -> Self {
        Self { nx: g.nx, ny: g.ny, h: g.h, k: g.k }
    }
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
    pub fn xfaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn yfaces(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    pub fn corners(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }
    fn c(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    fn xf(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    fn yf(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    fn cn(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    /// Interior velocity unknowns: x-faces `1..nx`, then y-faces `1..ny`.
    pub fn nu(&self) -> usize {
        (self.nx - 1) * self.ny + self.nx * (self.ny - 1)
    }
}

// ---------------------------------------------------------------- stencils

pub fn lap(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            let c = f[m.c(i, j)];
            let mut s = 0.0;
            if i > 0 {
                s += (f[m.c(i - 1, j)] - c) / (m.h * m.h);
            }
            if i + 1 < m.nx {
                s += (f[m.c(i + 1, j)] - c) / (m.h * m.h);
            }
            if j > 0 {
                s += (f[m.c(i, j - 1)] - c) / (m.k * m.k);
            }
            if j + 1 < m.ny {
                s += (f[m.c(i, j + 1)] - c) / (m.k * m.k);
            }
            out[m.c(i, j)] = s;
        }
    }
    out
}

/// Center to x-face difference, zero on the x-walls.
pub fn gx(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.xfaces()];
    for j in 0..m.ny {
        for i in 1..m.nx {
            out[m.xf(i, j)] = (f[m.c(i, j)] - f[m.c(i - 1, j)]) / m.h;
        }
    }
    out
}

/// Center to y-face difference, zero on the y-walls.
pub fn gy(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.yfaces()];
    for j in 1..m.ny {
        for i in 0..m.nx {
            out[m.yf(i, j)] = (f[m.c(i, j)] - f[m.c(i, j - 1)]) / m.k;
        }
    }
    out
}

pub fn div(m: &Mesh, u1: &[f64], u2: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            out[m.c(i, j)] =
                (u1[m.xf(i + 1, j)] - u1[m.xf(i, j)]) / m.h + (u2[m.yf(i, j + 1)] - u2[m.yf(i, j)]) / m.k;
        }
    }
    out
}

/// x-face average onto centers.
fn ax_x2c(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            out[m.c(i, j)] = 0.5 * (f[m.xf(i, j)] + f[m.xf(i + 1, j)]);
        }
    }
    out
}

fn ay_y2c(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            out[m.c(i, j)] = 0.5 * (f[m.yf(i, j)] + f[m.yf(i, j + 1)]);
        }
    }
    out
}

/// Center average onto x-faces; wall faces copy the adjacent cell.
fn ax_c2x(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.xfaces()];
    for j in 0..m.ny {
        for i in 0..=m.nx {
            let l = f[m.c(i.saturating_sub(1), j)];
            let r = f[m.c(i.min(m.nx - 1), j)];
            out[m.xf(i, j)] = if i == 0 { r } else if i == m.nx { l } else { 0.5 * (l + r) };
        }
    }
    out
}

fn ay_c2y(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.yfaces()];
    for j in 0..=m.ny {
        for i in 0..m.nx {
            let b = f[m.c(i, j.saturating_sub(1))];
            let t = f[m.c(i, j.min(m.ny - 1))];
            out[m.yf(i, j)] = if j == 0 { t } else if j == m.ny { b } else { 0.5 * (b + t) };
        }
    }
    out
}

fn dx_x2c(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            out[m.c(i, j)] = (f[m.xf(i + 1, j)] - f[m.xf(i, j)]) / m.h;
        }
    }
    out
}

fn dy_y2c(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cells()];
    for j in 0..m.ny {
        for i in 0..m.nx {
            out[m.c(i, j)] = (f[m.yf(i, j + 1)] - f[m.yf(i, j)]) / m.k;
        }
    }
    out
}

/// x-face to corner y-difference; the wall value is zero at half spacing.
pub fn dy_x2n(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.corners()];
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let above = if j < m.ny { f[m.xf(i, j)] } else { 0.0 };
            let below = if j > 0 { f[m.xf(i, j - 1)] } else { 0.0 };
            let dk = if j == 0 || j == m.ny { 0.5 * m.k } else { m.k };
            out[m.cn(i, j)] = (above - below) / dk;
        }
    }
    out
}

pub fn dx_y2n(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.corners()];
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let right = if i < m.nx { f[m.yf(i, j)] } else { 0.0 };
            let left = if i > 0 { f[m.yf(i - 1, j)] } else { 0.0 };
            let dh = if i == 0 || i == m.nx { 0.5 * m.h } else { m.h };
            out[m.cn(i, j)] = (right - left) / dh;
        }
    }
    out
}

fn ay_x2n(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.corners()];
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let b = f[m.xf(i, j.saturating_sub(1))];
            let t = f[m.xf(i, j.min(m.ny - 1))];
            out[m.cn(i, j)] = if j == 0 { t } else if j == m.ny { b } else { 0.5 * (b + t) };
        }
    }
    out
}

fn ax_y2n(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.corners()];
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let l = f[m.yf(i.saturating_sub(1), j)];
            let r = f[m.yf(i.min(m.nx - 1), j)];
            out[m.cn(i, j)] = if i == 0 { r } else if i == m.nx { l } else { 0.5 * (l + r) };
        }
    }
    out
}

fn ay_n2x(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.xfaces()];
    for j in 0..m.ny {
        for i in 0..=m.nx {
            out[m.xf(i, j)] = 0.5 * (f[m.cn(i, j)] + f[m.cn(i, j + 1)]);
        }
    }
    out
}

fn ax_n2y(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.yfaces()];
    for j in 0..=m.ny {
        for i in 0..m.nx {
            out[m.yf(i, j)] = 0.5 * (f[m.cn(i, j)] + f[m.cn(i + 1, j)]);
        }
    }
    out
}

fn dy_n2x(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.xfaces()];
    for j in 0..m.ny {
        for i in 0..=m.nx {
            out[m.xf(i, j)] = (f[m.cn(i, j + 1)] - f[m.cn(i, j)]) / m.k;
        }
    }
    out
}

fn dx_n2y(m: &Mesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.yfaces()];
    for j in 0..=m.ny {
        for i in 0..m.nx {
            out[m.yf(i, j)] = (f[m.cn(i + 1, j)] - f[m.cn(i, j)]) / m.h;
        }
    }
    out
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn zero_x_walls(m: &Mesh, f: &mut [f64]) {
    for j in 0..m.ny {
        f[m.xf(0, j)] = 0.0;
        f[m.xf(m.nx, j)] = 0.0;
    }
}

fn zero_y_walls(m: &Mesh, f: &mut [f64]) {
    for i in 0..m.nx {
        f[m.yf(i, 0)] = 0.0;
        f[m.yf(i, m.ny)] = 0.0;
    }
}

/// MAC velocity Laplacian as `D d` compositions with the half-cell closure.
pub fn vlap(m: &Mesh, u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut l1 = add(&gx(m, &dx_x2c(m, u1)), &dy_n2x(m, &dy_x2n(m, u1)));
    let mut l2 = add(&gy(m, &dy_y2c(m, u2)), &dx_n2y(m, &dx_y2n(m, u2)));
    zero_x_walls(m, &mut l1);
    zero_y_walls(m, &mut l2);
    (l1, l2)
}

/// Four-term skew convection `C(t) v`.
pub fn conv_mom(m: &Mesh, t1: &[f64], t2: &[f64], v1: &[f64], v2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t2n = ax_y2n(m, t2);
    let t1n = ay_x2n(m, t1);
    let mut c1 = mul(t1, &gx(m, &ax_x2c(m, v1)));
    c1 = add(&c1, &ax_c2x(m, &dx_x2c(m, &mul(v1, t1))));
    c1 = add(&c1, &ay_n2x(m, &mul(&t2n, &dy_x2n(m, v1))));
    c1 = add(&c1, &dy_n2x(m, &mul(&ay_x2n(m, v1), &t2n)));
    let mut c2 = ax_n2y(m, &mul(&t1n, &dx_y2n(m, v2)));
    c2 = add(&c2, &dx_n2y(m, &mul(&t1n, &ax_y2n(m, v2))));
    c2 = add(&c2, &mul(t2, &gy(m, &ay_y2c(m, v2))));
    c2 = add(&c2, &ay_c2y(m, &dy_y2c(m, &mul(v2, t2))));
    zero_x_walls(m, &mut c1);
    zero_y_walls(m, &mut c2);
    (c1, c2)
}

/// Phase transport `P^x(u1 D_x z) + P^y(u2 D_y z)`.
pub fn conv_phase(m: &Mesh, u1: &[f64], u2: &[f64], z: &[f64]) -> Vec<f64> {
    add(&ax_x2c(m, &mul(u1, &gx(m, z))), &ay_y2c(m, &mul(u2, &gy(m, z))))
}

/// Capillary force `(P^x w D_x z, P^y w D_y z)`.
pub fn capillary(m: &Mesh, w: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (mul(&ax_c2x(m, w), &gx(m, z)), mul(&ay_c2y(m, w), &gy(m, z)))
}

// ---------------------------------------------------------- inner products

pub fn ip_m(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ny {
        for i in 0..m.nx {
            s += m.h * m.k * a[m.c(i, j)] * b[m.c(i, j)];
        }
    }
    s
}

pub fn ip_tm(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ny {
        for i in 1..m.nx {
            s += m.h * m.k * a[m.xf(i, j)] * b[m.xf(i, j)];
        }
    }
    s
}

pub fn ip_mt(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 1..m.ny {
        for i in 0..m.nx {
            s += m.h * m.k * a[m.yf(i, j)] * b[m.yf(i, j)];
        }
    }
    s
}

pub fn ip_tx(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 1..m.ny {
        for i in 0..=m.nx {
            let w = if i == 0 || i == m.nx { 0.5 * m.h } else { m.h };
            s += w * m.k * a[m.cn(i, j)] * b[m.cn(i, j)];
        }
    }
    s
}

pub fn ip_ty(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..=m.ny {
        for i in 1..m.nx {
            let w = if j == 0 || j == m.ny { 0.5 * m.k } else { m.k };
            s += m.h * w * a[m.cn(i, j)] * b[m.cn(i, j)];
        }
    }
    s
}

// ---------------------------------------------------------------- packing

pub fn pack(m: &Mesh, u1: &[f64], u2: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nu());
    for j in 0..m.ny {
        for i in 1..m.nx {
            out.push(u1[m.xf(i, j)]);
        }
    }
    for j in 1..m.ny {
        for i in 0..m.nx {
            out.push(u2[m.yf(i, j)]);
        }
    }
    out
}

pub fn unpack(m: &Mesh, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut u1 = vec![0.0; m.xfaces()];
    let mut u2 = vec![0.0; m.yfaces()];
    let mut it = v.iter();
    for j in 0..m.ny {
        for i in 1..m.nx {
            u1[m.xf(i, j)] = *it.next().unwrap();
        }
    }
    for j in 1..m.ny {
        for i in 0..m.nx {
            u2[m.yf(i, j)] = *it.next().unwrap();
        }
    }
    (u1, u2)
}

/// Dense matrix of a linear map `R^n -> R^m` by columns.
pub fn dense(n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut e = vec![0.0; n];
    let mut cols = Vec::with_capacity(n);
    for c in 0..n {
        e[c] = 1.0;
        cols.push(DVector::from_vec(f(&e)));
        e[c] = 0.0;
    }
    DMatrix::from_columns(&cols)
}

pub fn lu_solve(a: DMatrix<f64>, rhs: Vec<f64>) -> Vec<f64> {
    a.lu().solve(&DVector::from_vec(rhs)).expect("oracle system is nonsingular").as_slice().to_vec()
}

// ------------------------------------------------------------------ model

/// Raw copy of one time level.
#[derive(Debug, Clone)]
pub struct Raw {
    pub z: Vec<f64>,
    pub zp: Vec<f64>,
    pub r: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub u1p: Vec<f64>,
    pub u2p: Vec<f64>,
}

impl Raw {
    pub fn of(s: &ChnsState) -> Self {
        Self {
            z: s.z.as_slice().to_vec(),
            zp: s.z_prev.as_slice().to_vec(),
            r: s.r,
            u1: s.u.u1.as_slice().to_vec(),
            u2: s.u.u2.as_slice().to_vec(),
            u1p: s.u_prev.u1.as_slice().to_vec(),
            u2p: s.u_prev.u2.as_slice().to_vec(),
        }
    }
    fn extrap(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| 1.5 * x - 0.5 * y).collect()
    }
    pub fn zt(&self) -> Vec<f64> {
        Self::extrap(&self.z, &self.zp)
    }
    pub fn ut(&self) -> (Vec<f64>, Vec<f64>) {
        (Self::extrap(&self.u1, &self.u1p), Self::extrap(&self.u2, &self.u2p))
    }
}

pub fn e1(m: &Mesh, p: &Params, z: &[f64]) -> f64 {
    z.iter().map(|&v| (v * v - 1.0 - p.beta).powi(2)).sum::<f64>() * m.h * m.k / (4.0 * p.eps2)
}

/// SAV coefficient `F'(z) / sqrt(E1(z) + delta)`.
pub fn sav_b(m: &Mesh, p: &Params, z: &[f64]) -> Vec<f64> {
    let d = (e1(m, p, z) + p.delta).sqrt();
    z.iter().map(|&v| v * (v * v - 1.0 - p.beta) / p.eps2 / d).collect()
}

fn buoy(m: &Mesh, p: &Params, zt: &[f64]) -> Vec<f64> {
    let mut f: Vec<f64> = ay_c2y(m, zt).iter().map(|&v| -p.chi * (v - p.phi0)).collect();
    zero_y_walls(m, &mut f);
    f
}

/// Output of a dense step.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub r: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub p: Vec<f64>,
}

/// Phase block `(Z', W, R')` for a prescribed midpoint velocity.
pub fn ch_dense(m: &Mesh, p: &Params, s: &Raw, uh1: &[f64], uh2: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let n = m.cells();
    let zt = s.zt();
    let b = sav_b(m, p, &zt);
    let q = p.lambda * p.beta / p.eps2;
    let op = |x: &[f64]| -> Vec<f64> {
        let (z, w, r) = (&x[..n], &x[n..2 * n], x[2 * n]);
        let lw = lap(m, w);
        let lz = lap(m, z);
        let mut out = Vec::with_capacity(2 * n + 1);
        out.extend((0..n).map(|c| z[c] / p.dt - p.mobility * lw[c]));
        out.extend((0..n).map(|c| w[c] + 0.5 * p.lambda * lz[c] - 0.5 * q * z[c] - 0.5 * p.lambda * b[c] * r));
        out.push(r - 0.5 * ip_m(m, &b, z));
        out
    };
    let conv = conv_phase(m, uh1, uh2, &zt);
    let lz0 = lap(m, &s.z);
    let mut rhs = Vec::with_capacity(2 * n + 1);
    rhs.extend((0..n).map(|c| s.z[c] / p.dt - conv[c]));
    rhs.extend((0..n).map(|c| -0.5 * p.lambda * lz0[c] + 0.5 * q * s.z[c] + 0.5 * p.lambda * b[c] * s.r));
    rhs.push(s.r - 0.5 * ip_m(m, &b, &s.z));
    let x = lu_solve(dense(2 * n + 1, op), rhs);
    (x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n])
}

fn momentum_lhs(m: &Mesh, p: &Params, t1: &[f64], t2: &[f64], v: &[f64]) -> Vec<f64> {
    let (v1, v2) = unpack(m, v);
    let (l1, l2) = vlap(m, &v1, &v2);
    let (c1, c2) = conv_mom(m, t1, t2, &v1, &v2);
    let o1: Vec<f64> = (0..v1.len()).map(|i| v1[i] / p.dt - 0.5 * p.nu * l1[i] + 0.25 * p.gamma * c1[i]).collect();
    let o2: Vec<f64> = (0..v2.len()).map(|i| v2[i] / p.dt - 0.5 * p.nu * l2[i] + 0.25 * p.gamma * c2[i]).collect();
    pack(m, &o1, &o2)
}

fn momentum_rhs(m: &Mesh, p: &Params, s: &Raw, w: Option<&[f64]>) -> Vec<f64> {
    let (t1, t2) = s.ut();
    let (l1, l2) = vlap(m, &s.u1, &s.u2);
    let (c1, c2) = conv_mom(m, &t1, &t2, &s.u1, &s.u2);
    let mut r1: Vec<f64> =
        (0..l1.len()).map(|i| s.u1[i] / p.dt + 0.5 * p.nu * l1[i] - 0.25 * p.gamma * c1[i]).collect();
    let mut r2: Vec<f64> =
        (0..l2.len()).map(|i| s.u2[i] / p.dt + 0.5 * p.nu * l2[i] - 0.25 * p.gamma * c2[i]).collect();
    if let (Some(w), true) = (w, p.capillary) {
        let (f1, f2) = capillary(m, w, &s.zt());
        r1 = add(&r1, &f1);
        r2 = add(&r2, &f2);
    }
    r2 = add(&r2, &buoy(m, p, &s.zt()));
    pack(m, &r1, &r2)
}

/// Momentum block `(U', P)` for a prescribed chemical potential, with the
/// pressure mean pinned by a bordering multiplier.
pub fn ns_dense(m: &Mesh, p: &Params, s: &Raw, w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (nu, n) = (m.nu(), m.cells());
    let (t1, t2) = s.ut();
    let op = |x: &[f64]| -> Vec<f64> {
        let (v, pr, mu) = (&x[..nu], &x[nu..nu + n], x[nu + n]);
        let g = pack(m, &gx(m, pr), &gy(m, pr));
        let mut out: Vec<f64> = momentum_lhs(m, p, &t1, &t2, v).iter().zip(&g).map(|(a, b)| a + b).collect();
        let (v1, v2) = unpack(m, v);
        out.extend(div(m, &v1, &v2).iter().map(|d| d + mu));
        out.push(pr.iter().sum());
        out
    };
    let mut rhs = momentum_rhs(m, p, s, Some(w));
    rhs.extend(div(m, &s.u1, &s.u2).iter().map(|d| -d));
    rhs.push(0.0);
    let x = lu_solve(dense(nu + n + 1, op), rhs);
    let (u1, u2) = unpack(m, &x[..nu]);
    (u1, u2, x[nu..nu + n].to_vec())
}

/// The whole coupled step as one linear system in `(Z', W, R', U', P)`.
pub fn coupled_dense(m: &Mesh, p: &Params, s: &Raw) -> DenseStep {
    let (n, nu) = (m.cells(), m.nu());
    let zt = s.zt();
    let b = sav_b(m, p, &zt);
    let q = p.lambda * p.beta / p.eps2;
    let (t1, t2) = s.ut();
    let dim = 3 * n + nu + 2;
    let op = |x: &[f64]| -> Vec<f64> {
        let (z, w, r) = (&x[..n], &x[n..2 * n], x[2 * n]);
        let v = &x[2 * n + 1..2 * n + 1 + nu];
        let pr = &x[2 * n + 1 + nu..3 * n + 1 + nu];
        let mu = x[3 * n + 1 + nu];
        let (v1, v2) = unpack(m, v);
        let tr = conv_phase(m, &v1, &v2, &zt);
        let lw = lap(m, w);
        let lz = lap(m, z);
        let mut out = Vec::with_capacity(dim);
        out.extend((0..n).map(|c| z[c] / p.dt - p.mobility * lw[c] + 0.5 * tr[c]));
        out.extend((0..n).map(|c| w[c] + 0.5 * p.lambda * lz[c] - 0.5 * q * z[c] - 0.5 * p.lambda * b[c] * r));
        out.push(r - 0.5 * ip_m(m, &b, z));
        let g = pack(m, &gx(m, pr), &gy(m, pr));
        let cap = if p.capillary {
            let (f1, f2) = capillary(m, w, &zt);
            pack(m, &f1, &f2)
        } else {
            vec![0.0; nu]
        };
        let h = momentum_lhs(m, p, &t1, &t2, v);
        out.extend((0..nu).map(|i| h[i] + g[i] - cap[i]));
        out.extend(div(m, &v1, &v2).iter().map(|d| d + mu));
        out.push(pr.iter().sum());
        out
    };
    let tr0 = conv_phase(m, &s.u1, &s.u2, &zt);
    let lz0 = lap(m, &s.z);
    let mut rhs = Vec::with_capacity(dim);
    rhs.extend((0..n).map(|c| s.z[c] / p.dt - 0.5 * tr0[c]));
    rhs.extend((0..n).map(|c| -0.5 * p.lambda * lz0[c] + 0.5 * q * s.z[c] + 0.5 * p.lambda * b[c] * s.r));
    rhs.push(s.r - 0.5 * ip_m(m, &b, &s.z));
    rhs.extend(momentum_rhs(m, p, s, None));
    rhs.extend(div(m, &s.u1, &s.u2).iter().map(|d| -d));
    rhs.push(0.0);
    let x = lu_solve(dense(dim, op), rhs);
    let (u1, u2) = unpack(m, &x[2 * n + 1..2 * n + 1 + nu]);
    DenseStep {
        z: x[..n].to_vec(),
        w: x[n..2 * n].to_vec(),
        r: x[2 * n],
        u1,
        u2,
        p: x[2 * n + 1 + nu..3 * n + 1 + nu].to_vec(),
    }
}

/// Pure Cahn-Hilliard SAV/Crank-Nicolson trajectory `(Z^n, R^n)`, `n = 0..=steps`.
pub fn pure_ch(m: &Mesh, p: &Params, z0: &[f64], steps: usize) -> Vec<(Vec<f64>, f64)> {
    let zero1 = vec![0.0; m.xfaces()];
    let zero2 = vec![0.0; m.yfaces()];
    let mut s = Raw {
        z: z0.to_vec(),
        zp: z0.to_vec(),
        r: (e1(m, p, z0) + p.delta).sqrt(),
        u1: zero1.clone(),
        u2: zero2.clone(),
        u1p: zero1.clone(),
        u2p: zero2.clone(),
    };
    let mut out = vec![(s.z.clone(), s.r)];
    for _ in 0..steps {
        let (z, _, r) = ch_dense(m, p, &s, &zero1, &zero2);
        s.zp = std::mem::replace(&mut s.z, z);
        s.r = r;
        out.push((s.z.clone(), s.r));
    }
    out
}

// ------------------------------------------------------------- comparisons

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max|a - b| / max(max|b|, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / max_abs(b).max(floor)
}

// ----------------------------------------------------------- random states

/// Smooth random field: a few low cosine modes plus a small offset.
pub fn smooth_cell(g: &StaggeredGrid, rng: &mut ChaCha8Rng, amp: f64) -> CellField {
    let a: Vec<f64> = (0..9).map(|_| rng.random_range(-amp..amp)).collect();
    CellField::from_fn(g, |x, y| {
        let (x, y) = ((x - g.x_lo) / (g.x_hi - g.x_lo), (y - g.y_lo) / (g.y_hi - g.y_lo));
        let mut s = 0.0;
        for m in 0..3 {
            for n in 0..3 {
                s += a[3 * m + n] * (m as f64 * PI * x).cos() * (n as f64 * PI * y).cos();
            }
        }
        s
    })
}

/// Smooth random wall-zero velocity (not divergence free).
pub fn smooth_velocity(g: &StaggeredGrid, rng: &mut ChaCha8Rng, amp: f64) -> Velocity {
    let a: Vec<f64> = (0..8).map(|_| rng.random_range(-amp..amp)).collect();
    let unit = |x: f64, y: f64| ((x - g.x_lo) / (g.x_hi - g.x_lo), (y - g.y_lo) / (g.y_hi - g.y_lo));
    let u1 = XFaceField::from_fn(g, |x, y| {
        let (x, y) = unit(x, y);
        (PI * x).sin() * (a[0] + a[1] * (PI * y).cos() + a[2] * (2.0 * PI * x).cos() * y + a[3] * y * y)
    });
    let u2 = YFaceField::from_fn(g, |x, y| {
        let (x, y) = unit(x, y);
        (PI * y).sin() * (a[4] + a[5] * (PI * x).cos() + a[6] * (2.0 * PI * y).cos() * x + a[7] * x * x)
    });
    let mut u = Velocity { u1, u2 };
    u.enforce_walls();
    u
}

/// Random smooth two-level state with a consistent SAV value.
pub fn random_state(g: &StaggeredGrid, p: &Params, seed: u64, vel_amp: f64) -> ChnsState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = smooth_cell(g, &mut rng, 0.6);
    let u = smooth_velocity(g, &mut rng, vel_amp);
    let mut s = ChnsState::new(z.clone(), u.clone(), g, p).expect("valid random state");
    let dz = smooth_cell(g, &mut rng, 0.05);
    s.z_prev = z.lincomb(1.0, &dz, 1.0);
    let du = smooth_velocity(g, &mut rng, 0.05 * vel_amp);
    s.u_prev = u.lincomb(1.0, &du, 1.0);
    s.r *= 1.0 + rng.random_range(-0.01..0.01);
    s
}

/// Random values on every location of a field, for operator identities.
pub fn noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
