//! One time step of the scheme: a phase half step (Cahn-Hilliard with SAV)
//! and a momentum half step (generalized Stokes), optionally iterated to
//! self-consistency in the midpoint velocity.

use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid, Velocity};
use crate::linalg::{sherman_morrison_solve, ChCoreSolver, SolverReport, StokesSolver};
use crate::linalg::momentum_operator;
use crate::linalg::stokes::convection;
use crate::model::{buoyancy, capillary_force, sav_coefficients, ChnsState, Params, StepMode};
use crate::norms;
use crate::ops;

/// Transport term `P^x(U1 D_x Z~) + P^y(U2 D_y Z~)` at cell centers.
pub fn phase_convection(u: &Velocity, z_tilde: &CellField, g: &StaggeredGrid) -> CellField {
    let fx = u.u1.mul(&ops::dx_center_to_xface(z_tilde, g));
    let fy = u.u2.mul(&ops::dy_center_to_yface(z_tilde, g));
    let mut out = ops::avg_x_xface_to_center(&fx, g);
    out.axpy(1.0, &ops::avg_y_yface_to_center(&fy, g));
    out
}

/// New phase, midpoint chemical potential and new SAV value.
#[derive(Debug, Clone)]
pub struct ChStepOutput {
    pub z: CellField,
    pub w: CellField,
    pub r: f64,
}

/// Phase half step for a given midpoint velocity.
///
/// Solves `(Z' - Z)/dt = M L W - phase_convection(u_half, Z~)` with
/// `W = -lambda L Zm + lambda beta/eps^2 Zm + lambda Rm b` and
/// `R' - R = 1/2 (b, Z' - Z)_M`, where `Zm`, `Rm` are midpoint averages.
pub fn ch_step(
    s: &ChnsState,
    u_half: &Velocity,
    g: &StaggeredGrid,
    p: &Params,
    core: &ChCoreSolver,
) -> Result<ChStepOutput> {
    let zt = s.z_tilde();
    let b = sav_coefficients(&zt, g, p)?.b;
    let (a, c) = (core.op.a, core.op.c);
    let d = p.dt * p.mobility * p.lambda;

    let lz = ops::laplace_neumann(&s.z, g);
    let llz = ops::laplace_neumann(&lz, g);
    let gvec = ops::laplace_neumann(&b, g).scale(d);
    let conv = phase_convection(u_half, &zt, g);

    let mut rhs = s.z.clone();
    rhs.axpy(-a, &llz);
    rhs.axpy(c, &lz);
    rhs.axpy(s.r - 0.25 * norms::inner_m(&b, &s.z, g), &gvec);
    rhs.axpy(-p.dt, &conv);

    let z = sherman_morrison_solve(|r| core.solve(r).map(|x| x.0), &gvec, &b, -0.25, &rhs, g)?;
    let dz = z.lincomb(1.0, &s.z, -1.0);
    let r = s.r + 0.5 * norms::inner_m(&b, &dz, g);

    let zm = z.lincomb(0.5, &s.z, 0.5);
    let rm = 0.5 * (s.r + r);
    let mut w = ops::laplace_neumann(&zm, g).scale(-p.lambda);
    w.axpy(p.lambda * p.beta / p.eps2, &zm);
    w.axpy(p.lambda * rm, &b);
    Ok(ChStepOutput { z, w, r })
}

/// New velocity and pressure.
#[derive(Debug, Clone)]
pub struct NsStepOutput {
    pub u: Velocity,
    pub p: CellField,
    pub report: SolverReport,
}

/// Right-hand side of the momentum half step.
pub fn momentum_rhs(s: &ChnsState, w_mid: &CellField, g: &StaggeredGrid, p: &Params) -> Velocity {
    let zt = s.z_tilde();
    let mut rhs = s.u.scale(1.0 / p.dt);
    rhs.axpy(0.5 * p.nu, &ops::velocity_laplacian(&s.u, g));
    if p.gamma != 0.0 {
        rhs.axpy(-0.25 * p.gamma, &convection(&s.u_tilde(), &s.u, g));
    }
    if p.capillary {
        rhs.axpy(1.0, &capillary_force(w_mid, &zt, g));
    }
    if p.chi != 0.0 {
        rhs.u2.axpy(1.0, &buoyancy(&zt, g, p));
    }
    rhs.enforce_walls();
    rhs
}

/// Momentum half step: Crank-Nicolson in viscosity and convection, with the
/// midpoint divergence constraint `div (U' + U) = 0`.
pub fn ns_step(
    s: &ChnsState,
    w_mid: &CellField,
    g: &StaggeredGrid,
    p: &Params,
    stokes: &StokesSolver,
) -> Result<NsStepOutput> {
    let h = momentum_operator(g, p, &s.u_tilde());
    let rhs = momentum_rhs(s, w_mid, g, p);
    let rhs_div = ops::divergence(&s.u, g).scale(-1.0);
    let sol = stokes.solve(&h, &rhs, &rhs_div)?;
    Ok(NsStepOutput { u: sol.u, p: sol.p, report: sol.report })
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub picard_iters: usize,
    /// Last Picard update `||U_half^(k+1) - U_half^(k)||`.
    pub picard_update: f64,
    pub stokes: SolverReport,
}

/// Grid, parameters and the reusable solvers for them.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: StaggeredGrid,
    pub params: Params,
    ch: ChCoreSolver,
    stokes: StokesSolver,
}

impl Stepper {
    pub fn new(grid: &StaggeredGrid, params: &Params) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid: *grid,
            params: params.clone(),
            ch: ChCoreSolver::new(grid, params),
            stokes: StokesSolver::new(grid, params),
        })
    }

    pub fn ch_solver(&self) -> &ChCoreSolver {
        &self.ch
    }

    pub fn stokes_solver(&self) -> &StokesSolver {
        &self.stokes
    }

    /// Advance one step in the configured [`StepMode`].
    pub fn step(&self, s: &ChnsState) -> Result<(ChnsState, StepReport)> {
        match self.params.mode {
            StepMode::Coupled => self.coupled_step(s),
            StepMode::Decoupled => self.decoupled_step(s),
        }
    }

    /// Phase step with the extrapolated velocity, then one momentum step.
    pub fn decoupled_step(&self, s: &ChnsState) -> Result<(ChnsState, StepReport)> {
        let (g, p) = (&self.grid, &self.params);
        let ch = ch_step(s, &s.u_tilde(), g, p, &self.ch)?;
        let ns = ns_step(s, &ch.w, g, p, &self.stokes)?;
        let report = StepReport { picard_iters: 1, picard_update: 0.0, stokes: ns.report };
        Ok((self.advance(s, ch, ns), report))
    }

    /// Picard iteration on the midpoint velocity seen by the phase equation.
    pub fn coupled_step(&self, s: &ChnsState) -> Result<(ChnsState, StepReport)> {
        let (g, p) = (&self.grid, &self.params);
        let mut u_half = s.u_tilde();
        let mut last = f64::INFINITY;
        for k in 1..=p.picard_max_iter {
            let ch = ch_step(s, &u_half, g, p, &self.ch)?;
            let ns = ns_step(s, &ch.w, g, p, &self.stokes)?;
            let next = ns.u.lincomb(0.5, &s.u, 0.5);
            let scale = norms::l2norm_sq_vec(&u_half, g).sqrt().max(1.0);
            last = norms::l2norm_sq_vec(&next.lincomb(1.0, &u_half, -1.0), g).sqrt();
            if last <= p.picard_tol * scale {
                let report = StepReport { picard_iters: k, picard_update: last, stokes: ns.report };
                return Ok((self.advance(s, ch, ns), report));
            }
            u_half = next;
        }
        Err(ChnsError::PicardNoConvergence { iterations: p.picard_max_iter, last_update: last })
    }

    fn advance(&self, s: &ChnsState, ch: ChStepOutput, ns: NsStepOutput) -> ChnsState {
        ChnsState {
            z: ch.z,
            w: ch.w,
            r: ch.r,
            u: ns.u,
            p: ns.p,
            z_prev: s.z.clone(),
            u_prev: s.u.clone(),
            t: (s.step + 1) as f64 * self.params.dt,
            step: s.step + 1,
        }
    }
}

/// Receives every state of a run, starting with the initial one.
pub trait Observer {
    fn observe(&mut self, state: &ChnsState, report: Option<&StepReport>) -> Result<()>;
}

impl<F: FnMut(&ChnsState, Option<&StepReport>) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &ChnsState, report: Option<&StepReport>) -> Result<()> {
        self(state, report)
    }
}

/// A stepper together with its current state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub stepper: Stepper,
    pub state: ChnsState,
}

impl Simulation {
    pub fn new(grid: &StaggeredGrid, params: &Params, state: ChnsState) -> Result<Self> {
        state.z.check(grid)?;
        Ok(Self { stepper: Stepper::new(grid, params)?, state })
    }

    pub fn grid(&self) -> &StaggeredGrid {
        &self.stepper.grid
    }

    pub fn params(&self) -> &Params {
        &self.stepper.params
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let (next, report) = self.stepper.step(&self.state)?;
        self.state = next;
        Ok(report)
    }

    /// Take `n` steps, showing each state to `obs` (the current state first).
    pub fn run_steps(&mut self, n: usize, obs: &mut dyn Observer) -> Result<()> {
        obs.observe(&self.state, None)?;
        for _ in 0..n {
            let report = self.step()?;
            obs.observe(&self.state, Some(&report))?;
        }
        Ok(())
    }

    /// Run to `T` with `N = T/dt` steps from the parameters.
    pub fn run(&mut self, obs: &mut dyn Observer) -> Result<()> {
        let n = self.params().step_count()?;
        self.run_steps(n, obs)
    }
}
