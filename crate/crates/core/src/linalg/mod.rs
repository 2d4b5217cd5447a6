//! Matrix-free linear algebra for the two implicit blocks of a time step.
//!
//! * [`cahn_hilliard`]: the phase solve, a constant-coefficient fourth-order
//!   operator plus a rank-one SAV term, handled by Sherman-Morrison around a
//!   preconditioned CG core solve.
//! * [`stokes`]: the generalized Stokes saddle point system, solved by Krylov
//!   iteration on the pressure Schur complement.
//! * [`fastdiag`]: separable eigen-decompositions of the 1-D stencils, used as
//!   (near-exact) preconditioners.

use std::fmt;

pub mod cahn_hilliard;
pub mod fastdiag;
pub mod krylov;
pub mod stokes;

pub use cahn_hilliard::{ch_core_operator, sherman_morrison_solve, ChCoreOperator, ChCoreSolver};
pub use fastdiag::{Separable2d, SymEig1d};
pub use krylov::{cg_solve, gmres_solve, pcg_solve};
pub use stokes::{
    convection, momentum_operator, stokes_saddle_solve, MomentumOperator, NeumannPoisson, StokesSolution,
    StokesSolver,
};

/// A linear map on flat vectors of length [`LinearOperator::dim`].
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Declared symmetry with respect to the Euclidean inner product.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Identity map, handy as a "no preconditioner" placeholder.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    pub dim: usize,
    pub symmetric: bool,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverReport {
    pub iterations: usize,
    /// Final relative residual `||A x - b|| / ||b||`.
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for SolverReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, relative residual {:.3e}{}",
            self.iterations,
            self.residual,
            if self.converged { "" } else { " (not converged)" }
        )
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Randomized symmetry audit: `max |(A x, y) - (x, A y)| / (|A x| |y|)` over
/// deterministic pseudo-random probes.
pub fn symmetry_defect(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(2685821657736338717) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut worst = 0.0_f64;
    let (mut ax, mut ay) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..probes {
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        op.apply(&x, &mut ax);
        op.apply(&y, &mut ay);
        let scale = norm2(&ax) * norm2(&y) + norm2(&x) * norm2(&ay);
        if scale > 0.0 {
            worst = worst.max((dot(&ax, &y) - dot(&x, &ay)).abs() / scale);
        }
    }
    worst
}
