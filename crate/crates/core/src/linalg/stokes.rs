//! Skew-symmetric convection and the generalized Stokes saddle point solve.
//!
//! The momentum half step solves
//!
//! ```text
//! H U + G P = f,    div U = g,    H = I/dt - (nu/2) Lap + (gamma/4) C(U~)
//! ```
//!
//! as one system in `[U; P]` with GMRES, right preconditioned by a block
//! upper triangular factor: the fast-diagonalized symmetric part of `H`, and
//! `S^{-1} ~ (1/dt) (-L)^{-1} + nu/2` for the Schur complement
//! `S = -div H^{-1} G`. `C(U~)` is skew, so `H` is nonsymmetric whenever
//! convection is on.


use super::fastdiag::{Separable2d, SpectralOperator, SymEig1d};
use super::krylov::{gmres_solve, pcg_solve};
use super::{norm2, LinearOperator, SolverReport};
use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid, Velocity};
use crate::model::Params;
use crate::norms;
use crate::ops::*;

const GMRES_RESTART: usize = 40;

/// Skew-symmetric convection `C(U~) V` on interior faces (walls zero).
///
/// Each component is the sum of two advective and two conservative terms;
/// `(C(U~) V, W) = -(V, C(U~) W)` in the face inner product.
pub fn convection(ut: &Velocity, v: &Velocity, g: &StaggeredGrid) -> Velocity {
    let u2c = avg_x_yface_to_corner(&ut.u2, g);
    let u1c = avg_y_xface_to_corner(&ut.u1, g);

    let mut c1 = ut.u1.mul(&dx_center_to_xface(&avg_x_xface_to_center(&v.u1, g), g));
    c1.axpy(1.0, &avg_x_center_to_xface(&dx_xface_to_center(&v.u1.mul(&ut.u1), g), g));
    c1.axpy(1.0, &avg_y_corner_to_xface(&u2c.mul(&dy_xface_to_corner(&v.u1, g)), g));
    c1.axpy(1.0, &dy_corner_to_xface(&avg_y_xface_to_corner(&v.u1, g).mul(&u2c), g));

    let mut c2 = avg_x_corner_to_yface(&u1c.mul(&dx_yface_to_corner(&v.u2, g)), g);
    c2.axpy(1.0, &dx_corner_to_yface(&u1c.mul(&avg_x_yface_to_corner(&v.u2, g)), g));
    c2.axpy(1.0, &ut.u2.mul(&dy_center_to_yface(&avg_y_yface_to_center(&v.u2, g), g)));
    c2.axpy(1.0, &avg_y_center_to_yface(&dy_yface_to_center(&v.u2.mul(&ut.u2), g), g));

    let mut out = Velocity { u1: c1, u2: c2 };
    out.enforce_walls();
    out
}

/// `V -> V/dt - (nu/2) Lap V + (gamma/4) C(U~) V` on interior faces.
#[derive(Debug, Clone)]
pub struct MomentumOperator {
    pub grid: StaggeredGrid,
    pub inv_dt: f64,
    pub half_nu: f64,
    pub quarter_gamma: f64,
    pub u_tilde: Velocity,
}

pub fn momentum_operator(grid: &StaggeredGrid, p: &Params, u_tilde: &Velocity) -> MomentumOperator {
    MomentumOperator {
        grid: *grid,
        inv_dt: 1.0 / p.dt,
        half_nu: 0.5 * p.nu,
        quarter_gamma: 0.25 * p.gamma,
        u_tilde: u_tilde.clone(),
    }
}

impl MomentumOperator {
    pub fn apply_field(&self, v: &Velocity) -> Velocity {
        let mut out = v.scale(self.inv_dt);
        out.axpy(-self.half_nu, &velocity_laplacian(v, &self.grid));
        if self.has_convection() {
            out.axpy(self.quarter_gamma, &convection(&self.u_tilde, v, &self.grid));
        }
        out.enforce_walls();
        out
    }

    fn has_convection(&self) -> bool {
        self.quarter_gamma != 0.0 && (self.u_tilde.u1.max_abs() > 0.0 || self.u_tilde.u2.max_abs() > 0.0)
    }
}

impl LinearOperator for MomentumOperator {
    fn dim(&self) -> usize {
        Velocity::interior_len(&self.grid)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = Velocity::from_interior(&self.grid, x);
        self.apply_field(&v).pack_interior(y);
    }

    fn is_symmetric(&self) -> bool {
        !self.has_convection()
    }
}

/// Result of a saddle point solve.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub u: Velocity,
    /// Mean-zero pressure.
    pub p: CellField,
    /// Outer Schur iterations and the worse of the momentum and divergence
    /// relative residuals.
    pub report: SolverReport,
}

/// Reusable saddle point solver for one grid and one `(dt, nu)` pair.
#[derive(Debug, Clone)]
pub struct StokesSolver {
    grid: StaggeredGrid,
    inv_dt: f64,
    half_nu: f64,
    basis_u1: Separable2d,
    basis_u2: Separable2d,
    poisson: NeumannPoisson,
    pub tol: f64,
    pub maxit: usize,
}

struct VelocityPrecond<'a> {
    s: &'a StokesSolver,
}

impl LinearOperator for VelocityPrecond<'_> {
    fn dim(&self) -> usize {
        Velocity::interior_len(&self.s.grid)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n1 = self.s.basis_u1.len();
        let (a, b) = (self.s.inv_dt, self.s.half_nu);
        for (basis, range) in [(&self.s.basis_u1, 0..n1), (&self.s.basis_u2, n1..x.len())] {
            let (lx, ly) = (&basis.x.values, &basis.y.values);
            basis.apply_spectral(&x[range.clone()], &mut y[range], |i, j| 1.0 / (a - b * (lx[i] + ly[j])));
        }
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Full saddle operator on `[v; p]`: `[H v + G p; -alpha div v]`.
///
/// `alpha` balances the two row blocks so one Krylov tolerance controls both.
struct SaddleOperator<'a> {
    s: &'a StokesSolver,
    h: &'a MomentumOperator,
    alpha: f64,
}

impl LinearOperator for SaddleOperator<'_> {
    fn dim(&self) -> usize {
        self.h.dim() + self.s.grid.nx * self.s.grid.ny
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.s.grid;
        let nv = self.h.dim();
        let p = CellField::from_vec(g, x[nv..].to_vec()).expect("cell vector length");
        self.h.apply(&x[..nv], &mut y[..nv]);
        let gp = gradient(&p, g).to_interior_vec();
        y[..nv].iter_mut().zip(&gp).for_each(|(a, b)| *a += b);
        let d = divergence(&Velocity::from_interior(g, &x[..nv]), g);
        y[nv..].iter_mut().zip(d.as_slice()).for_each(|(a, b)| *a = -self.alpha * b);
    }
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Block upper triangular preconditioner `[H^; G; 0, S^]` with the
/// fast-diagonalized symmetric part for `H^` and the Schur approximation
/// below for `S^`.
struct SaddlePrecond<'a> {
    s: &'a StokesSolver,
    alpha: f64,
}

impl LinearOperator for SaddlePrecond<'_> {
    fn dim(&self) -> usize {
        Velocity::interior_len(&self.s.grid) + self.s.grid.nx * self.s.grid.ny
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.s.grid;
        let nv = Velocity::interior_len(g);
        let (yv, yp) = y.split_at_mut(nv);
        // S = div H^-1 G is negative semidefinite, so S^-1 ~ -SchurPrecond
        let xp: Vec<f64> = x[nv..].iter().map(|v| v / self.alpha).collect();
        SchurPrecond { s: self.s }.apply(&xp, yp);
        yp.iter_mut().for_each(|v| *v = -*v);
        let p = CellField::from_vec(g, yp.to_vec()).expect("cell vector length");
        let gp = gradient(&p, g).to_interior_vec();
        let r: Vec<f64> = x[..nv].iter().zip(&gp).map(|(a, b)| a - b).collect();
        VelocityPrecond { s: self.s }.apply(&r, yv);
    }
    fn is_symmetric(&self) -> bool {
        false
    }
}

struct SchurPrecond<'a> {
    s: &'a StokesSolver,
}

impl LinearOperator for SchurPrecond<'_> {
    fn dim(&self) -> usize {
        self.s.grid.nx * self.s.grid.ny
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.s.poisson.apply_inverse_neg(x, y);
        let m = x.iter().sum::<f64>() / x.len() as f64;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.s.inv_dt * *yi + self.s.half_nu * (xi - m);
        }
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

impl StokesSolver {
    pub fn new(grid: &StaggeredGrid, p: &Params) -> Self {
        Self::with_coefficients(grid, 1.0 / p.dt, 0.5 * p.nu, p.cg_tol)
    }

    /// Solver for operators `inv_dt I - half_nu Lap + skew part`.
    pub fn with_coefficients(grid: &StaggeredGrid, inv_dt: f64, half_nu: f64, tol: f64) -> Self {
        let (nx, ny, h, k) = (grid.nx, grid.ny, grid.h, grid.k);
        Self {
            grid: *grid,
            inv_dt,
            half_nu,
            basis_u1: Separable2d::new(SymEig1d::dirichlet_nodes(nx - 1, h), SymEig1d::dirichlet_cells(ny, k)),
            basis_u2: Separable2d::new(SymEig1d::dirichlet_cells(nx, h), SymEig1d::dirichlet_nodes(ny - 1, k)),
            poisson: NeumannPoisson::new(grid, tol),
            tol,
            maxit: 500,
        }
    }

    /// Solve `H v = f` on packed interior vectors.
    pub fn solve_momentum(&self, h: &MomentumOperator, f: &[f64], tol: f64) -> Result<(Vec<f64>, SolverReport)> {
        let pre = VelocityPrecond { s: self };
        if h.is_symmetric() {
            pcg_solve(h, f, None, &pre, tol, self.maxit)
        } else {
            gmres_solve(h, f, None, &pre, tol, self.maxit, GMRES_RESTART)
        }
    }

    /// Solve `H U + G P = rhs_u`, `div U = rhs_div` with mean-zero `P`.
    pub fn solve(&self, h: &MomentumOperator, rhs_u: &Velocity, rhs_div: &CellField) -> Result<StokesSolution> {
        let g = &self.grid;
        rhs_u.u1.check(g)?;
        rhs_u.u2.check(g)?;
        rhs_div.check(g)?;
        let mean = norms::mean(rhs_div, g);
        if mean.abs() > 1e-10 * rhs_div.max_abs().max(1.0) {
            return Err(ChnsError::IncompatibleDivergenceData { mean });
        }
        let f = rhs_u.to_interior_vec();
        let nv = f.len();
        // scale of the divergence that the pressure must remove
        let mut hf = vec![0.0; nv];
        VelocityPrecond { s: self }.apply(&f, &mut hf);
        let s_rhs = rhs_div.lincomb(1.0, &divergence(&Velocity::from_interior(g, &hf), g), -1.0);
        let (fnorm, snorm) = (norm2(&f), norm2(s_rhs.as_slice()));
        let alpha = if fnorm > 0.0 && snorm > 0.0 { fnorm / snorm } else { 1.0 };

        let op = SaddleOperator { s: self, h, alpha };
        let pre = SaddlePrecond { s: self, alpha };
        let mut b = f.clone();
        b.extend(rhs_div.as_slice().iter().map(|v| -alpha * v));
        // tighten the combined Krylov tolerance until both blocks meet `tol`
        let mut x: Option<Vec<f64>> = None;
        let mut krylov_tol = 0.1 * self.tol;
        let mut iterations = 0;
        for round in 0..4 {
            let attempt = gmres_solve(&op, &b, x.as_deref(), &pre, krylov_tol, self.maxit, GMRES_RESTART);
            let (xk, rep) = match attempt {
                Ok(ok) => ok,
                // a stall below the first tolerance keeps the last iterate
                Err(_) if round > 0 => break,
                Err(e) => return Err(e),
            };
            iterations += rep.iterations;
            let (_, _, residual) = self.residuals(h, &xk, &f, rhs_div, fnorm, snorm);
            x = Some(xk);
            if residual <= self.tol {
                break;
            }
            krylov_tol = (0.1 * krylov_tol).max(1e-15);
        }
        let x = x.expect("at least one round");
        let uvec = x[..nv].to_vec();
        let mut p = CellField::from_vec(g, x[nv..].to_vec())?;
        norms::remove_mean(&mut p);
        let u = Velocity::from_interior(g, &uvec);
        let (_, _, residual) = self.residuals(h, &x, &f, rhs_div, fnorm, snorm);
        let report = SolverReport { iterations, residual, converged: residual <= self.tol };
        if !report.converged {
            return Err(ChnsError::NoConvergence { solver: "stokes", report });
        }
        Ok(StokesSolution { u, p, report })
    }

    /// Momentum and divergence relative residuals of `[v; p]`, and their max.
    fn residuals(
        &self,
        h: &MomentumOperator,
        x: &[f64],
        f: &[f64],
        rhs_div: &CellField,
        fnorm: f64,
        snorm: f64,
    ) -> (f64, f64, f64) {
        let g = &self.grid;
        let nv = f.len();
        let p = CellField::from_vec(g, x[nv..].to_vec()).expect("cell vector length");
        let gp = gradient(&p, g).to_interior_vec();
        let mut hu = vec![0.0; nv];
        h.apply(&x[..nv], &mut hu);
        let mom: Vec<f64> = hu.iter().zip(&gp).zip(f).map(|((a, b), c)| a + b - c).collect();
        let mom_rel = if fnorm > 0.0 { norm2(&mom) / fnorm } else { norm2(&mom) };
        let div_err = divergence(&Velocity::from_interior(g, &x[..nv]), g).lincomb(1.0, rhs_div, -1.0);
        let div_rel = if snorm > 0.0 { norm2(div_err.as_slice()) / snorm } else { norm2(div_err.as_slice()) };
        (mom_rel, div_rel, mom_rel.max(div_rel))
    }
}
/// One-shot saddle point solve; builds a [`StokesSolver`] for `h`.
pub fn stokes_saddle_solve(
    h: &MomentumOperator,
    rhs_u: &Velocity,
    rhs_div: &CellField,
    tol: f64,
) -> Result<StokesSolution> {
    StokesSolver::with_coefficients(&h.grid, h.inv_dt, h.half_nu, tol).solve(h, rhs_u, rhs_div)
}

/// Mean-zero solves of the Neumann Poisson problem `L phi = f`.
#[derive(Debug, Clone)]
pub struct NeumannPoisson {
    grid: StaggeredGrid,
    basis: Separable2d,
    null: (usize, usize),
    pub tol: f64,
}

struct NegLaplace<'a>(&'a StaggeredGrid);

impl LinearOperator for NegLaplace<'_> {
    fn dim(&self) -> usize {
        self.0.nx * self.0.ny
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let f = CellField::from_vec(self.0, x.to_vec()).expect("cell vector length");
        let l = laplace_neumann(&f, self.0);
        y.iter_mut().zip(l.as_slice()).for_each(|(a, b)| *a = -b);
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

impl NeumannPoisson {
    pub fn new(grid: &StaggeredGrid, tol: f64) -> Self {
        let basis = Separable2d::new(SymEig1d::neumann_cells(grid.nx, grid.h), SymEig1d::neumann_cells(grid.ny, grid.k));
        let null = (basis.x.null_index(), basis.y.null_index());
        Self { grid: *grid, basis, null, tol }
    }

    /// `y = (-L)^+ x` through the eigenbasis (the constant mode is dropped).
    pub fn apply_inverse_neg(&self, x: &[f64], y: &mut [f64]) {
        let (lx, ly) = (&self.basis.x.values, &self.basis.y.values);
        let null = self.null;
        self.basis.apply_spectral(x, y, |i, j| if (i, j) == null { 0.0 } else { -1.0 / (lx[i] + ly[j]) });
    }

    /// Mean-zero `phi` with `L phi = f - mean(f)`.
    pub fn solve(&self, f: &CellField) -> Result<(CellField, SolverReport)> {
        let mut rhs = f.scale(-1.0);
        norms::remove_mean(&mut rhs);
        let null = self.null;
        let (lx, ly) = (&self.basis.x.values, &self.basis.y.values);
        let pre = SpectralOperator {
            basis: &self.basis,
            symbol: |i: usize, j: usize| if (i, j) == null { 0.0 } else { -1.0 / (lx[i] + ly[j]) },
        };
        let (x, rep) = pcg_solve(&NegLaplace(&self.grid), rhs.as_slice(), None, &pre, self.tol, 200)?;
        let mut phi = CellField::from_vec(&self.grid, x)?;
        norms::remove_mean(&mut phi);
        Ok((phi, rep))
    }

    /// Discretely solenoidal part `U - G L^{-1} div U` of a velocity.
    pub fn project(&self, u: &Velocity) -> Result<Velocity> {
        let (phi, _) = self.solve(&divergence(u, &self.grid))?;
        let mut out = u.lincomb(1.0, &gradient(&phi, &self.grid), -1.0);
        out.enforce_walls();
        Ok(out)
    }
}
