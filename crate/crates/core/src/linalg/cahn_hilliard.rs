//! Linear algebra of the phase half step.
//!
//! After eliminating `W` and `R`, the new phase solves
//! `A z - 1/4 (b, z)_M g = rhs` with the constant SPD core
//! `A = I + a L^2 - c L` (`L` the Neumann Laplacian) and a rank-one SAV
//! correction. `A` is diagonalized exactly by the cosine-like Neumann basis,
//! which serves as the CG preconditioner.

use super::fastdiag::{Separable2d, SpectralOperator, SymEig1d};
use super::krylov::pcg_solve;
use super::{LinearOperator, SolverReport};
use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid};
use crate::model::Params;
use crate::norms;
use crate::ops;

/// `z -> z + a L(L z) - c L z`.
#[derive(Debug, Clone)]
pub struct ChCoreOperator {
    pub grid: StaggeredGrid,
    pub a: f64,
    pub c: f64,
}

/// Core operator for the given parameters: `a = dt M lambda / 2`,
/// `c = dt M lambda beta / (2 eps^2)`.
pub fn ch_core_operator(grid: &StaggeredGrid, p: &Params) -> ChCoreOperator {
    let d = p.dt * p.mobility * p.lambda;
    ChCoreOperator { grid: *grid, a: 0.5 * d, c: 0.5 * d * p.beta / p.eps2 }
}

impl ChCoreOperator {
    pub fn apply_field(&self, z: &CellField) -> CellField {
        let lz = ops::laplace_neumann(z, &self.grid);
        let llz = ops::laplace_neumann(&lz, &self.grid);
        let mut out = z.clone();
        out.axpy(self.a, &llz);
        out.axpy(-self.c, &lz);
        out
    }
}

impl LinearOperator for ChCoreOperator {
    fn dim(&self) -> usize {
        self.grid.nx * self.grid.ny
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z = CellField::from_vec(&self.grid, x.to_vec()).expect("cell vector length");
        y.copy_from_slice(self.apply_field(&z).as_slice());
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// CG solver for [`ChCoreOperator`] with a fast-diagonalization preconditioner.
#[derive(Debug, Clone)]
pub struct ChCoreSolver {
    pub op: ChCoreOperator,
    basis: Separable2d,
    pub tol: f64,
    pub maxit: usize,
}

impl ChCoreSolver {
    pub fn new(grid: &StaggeredGrid, p: &Params) -> Self {
        let basis = Separable2d::new(SymEig1d::neumann_cells(grid.nx, grid.h), SymEig1d::neumann_cells(grid.ny, grid.k));
        Self { op: ch_core_operator(grid, p), basis, tol: p.cg_tol, maxit: 200 }
    }

    pub fn solve(&self, rhs: &CellField) -> Result<(CellField, SolverReport)> {
        let (a, c) = (self.op.a, self.op.c);
        let (lx, ly) = (&self.basis.x.values, &self.basis.y.values);
        let symbol = |i: usize, j: usize| {
            let mu = lx[i] + ly[j];
            1.0 / (1.0 + a * mu * mu - c * mu)
        };
        let pre = SpectralOperator { basis: &self.basis, symbol };
        let (x, rep) = pcg_solve(&self.op, rhs.as_slice(), None, &pre, self.tol, self.maxit)?;
        Ok((CellField::from_vec(&self.op.grid, x)?, rep))
    }
}

/// Solve `A z + sigma (v, z)_M u = rhs` given a solver for `A`.
///
/// Fails with [`ChnsError::SingularRankOneDenominator`] when
/// `|1 + sigma (v, A^{-1} u)_M| < 1e-12`.
pub fn sherman_morrison_solve(
    mut core: impl FnMut(&CellField) -> Result<CellField>,
    u: &CellField,
    v: &CellField,
    sigma: f64,
    rhs: &CellField,
    grid: &StaggeredGrid,
) -> Result<CellField> {
    let x1 = core(rhs)?;
    let x2 = core(u)?;
    let denom = 1.0 + sigma * norms::inner_m(v, &x2, grid);
    if !(denom.abs() >= 1e-12) {
        return Err(ChnsError::SingularRankOneDenominator { value: denom });
    }
    let theta = sigma * norms::inner_m(v, &x1, grid) / denom;
    Ok(x1.lincomb(1.0, &x2, -theta))
}
