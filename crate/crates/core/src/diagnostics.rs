//! Energy audits, inter-grid restriction, Cauchy errors and rate tables.

use std::fmt;
use std::io::Write;

use crate::error::{ChnsError, Result};
use crate::grid::{CellField, CornerField, StaggeredGrid, Velocity, XFaceField, YFaceField};
use crate::model::{buoyancy, energy_total, ChnsState, Params};
use crate::norms;
use crate::ops;
use crate::stepper::{Observer, StepReport};

/// One row of the energy ledger for the step `prev -> next`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedgerEntry {
    pub step: usize,
    pub t: f64,
    /// Modified energy before the step.
    pub energy_before: f64,
    /// Modified energy after the step.
    pub energy: f64,
    pub d_e: f64,
    /// `M dt ||D W^{n+1/2}||^2`.
    pub diss_w: f64,
    /// `nu dt ||D U^{n+1/2}||^2`.
    pub diss_u: f64,
    /// Work of the buoyancy force, `dt (b, U^{n+1/2})`; zero without buoyancy.
    pub work: f64,
    /// `dE + diss_w + diss_u - work`; vanishes for the exact discrete scheme.
    pub residual: f64,
    /// Phase mass `(Z^{n+1}, 1)_M`.
    pub mass: f64,
    pub picard_iters: usize,
}

/// Audit the discrete energy law across one step.
///
/// `next.w` is taken as `W^{n+1/2}` and `(prev.u + next.u)/2` as `U^{n+1/2}`.
pub fn energy_audit(prev: &ChnsState, next: &ChnsState, g: &StaggeredGrid, p: &Params) -> EnergyLedgerEntry {
    let e0 = energy_total(prev, g, p);
    let e1 = energy_total(next, g, p);
    let umid = prev.u.lincomb(0.5, &next.u, 0.5);
    let diss_w = p.mobility * p.dt * norms::dnorm_sq_scalar(&next.w, g);
    let diss_u = p.nu * p.dt * norms::dnorm_sq_vec(&umid, g);
    let work = if p.chi != 0.0 { p.dt * norms::inner_mt(&buoyancy(&prev.z_tilde(), g, p), &umid.u2, g) } else { 0.0 };
    let d_e = e1 - e0;
    EnergyLedgerEntry {
        step: next.step,
        t: next.t,
        energy_before: e0,
        energy: e1,
        d_e,
        diss_w,
        diss_u,
        work,
        residual: d_e + diss_w + diss_u - work,
        mass: norms::integral(&next.z, g),
        picard_iters: 0,
    }
}

/// Observer collecting an [`EnergyLedgerEntry`] per step.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    grid: StaggeredGrid,
    params: Params,
    prev: Option<ChnsState>,
    pub initial_energy: f64,
    pub initial_mass: f64,
    pub entries: Vec<EnergyLedgerEntry>,
}

impl EnergyLedger {
    pub fn new(grid: &StaggeredGrid, params: &Params) -> Self {
        Self {
            grid: *grid,
            params: params.clone(),
            prev: None,
            initial_energy: f64::NAN,
            initial_mass: f64::NAN,
            entries: Vec::new(),
        }
    }

    /// Ledger as CSV: `step,t,E,dE,diss_W,diss_U,residual,mass,picard_iters`.
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "step,t,E,dE,diss_W,diss_U,residual,mass,picard_iters")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                e.step, e.t, e.energy, e.d_e, e.diss_w, e.diss_u, e.residual, e.mass, e.picard_iters
            )?;
        }
        Ok(())
    }

    /// Largest `|residual| / max(1, |E^n|)` over all steps.
    pub fn max_relative_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual.abs() / e.energy_before.abs().max(1.0)).fold(0.0, f64::max)
    }

    /// Whether `E^{n+1} <= E^n + slack * max(1, |E^n|)` at every step, net of buoyancy work.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.entries.iter().all(|e| e.d_e - e.work <= slack * e.energy_before.abs().max(1.0))
    }
}

impl Observer for EnergyLedger {
    fn observe(&mut self, state: &ChnsState, report: Option<&StepReport>) -> Result<()> {
        match &self.prev {
            None => {
                self.initial_energy = energy_total(state, &self.grid, &self.params);
                self.initial_mass = norms::integral(&state.z, &self.grid);
            }
            Some(prev) => {
                let mut e = energy_audit(prev, state, &self.grid, &self.params);
                e.picard_iters = report.map_or(0, |r| r.picard_iters);
                self.entries.push(e);
            }
        }
        self.prev = Some(state.clone());
        Ok(())
    }
}

fn check_refinement(coarse: &StaggeredGrid, fine: &StaggeredGrid) -> Result<()> {
    if coarse.is_refined_by(fine) {
        Ok(())
    } else {
        Err(ChnsError::RefinementMismatch {
            coarse: format!("{}x{}", coarse.nx, coarse.ny),
            fine: format!("{}x{}", fine.nx, fine.ny),
        })
    }
}

/// Transfer from a 2x refined grid to its parent grid.
///
/// Cells average their four children, faces average the two fine faces on
/// the same line, corners are injected.
pub trait Restrict: Sized {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self>;
}

impl Restrict for CellField {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        check_refinement(coarse, fine)?;
        self.check(fine)?;
        Ok(CellField::from_index_fn(coarse, |i, j| {
            0.25 * (self[(2 * i, 2 * j)] + self[(2 * i + 1, 2 * j)] + self[(2 * i, 2 * j + 1)] + self[(2 * i + 1, 2 * j + 1)])
        }))
    }
}

impl Restrict for XFaceField {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        check_refinement(coarse, fine)?;
        self.check(fine)?;
        Ok(XFaceField::from_index_fn(coarse, |i, j| 0.5 * (self[(2 * i, 2 * j)] + self[(2 * i, 2 * j + 1)])))
    }
}

impl Restrict for YFaceField {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        check_refinement(coarse, fine)?;
        self.check(fine)?;
        Ok(YFaceField::from_index_fn(coarse, |i, j| 0.5 * (self[(2 * i, 2 * j)] + self[(2 * i + 1, 2 * j)])))
    }
}

impl Restrict for CornerField {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        check_refinement(coarse, fine)?;
        self.check(fine)?;
        Ok(CornerField::from_index_fn(coarse, |i, j| self[(2 * i, 2 * j)]))
    }
}

impl Restrict for Velocity {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        Ok(Velocity { u1: self.u1.restrict(fine, coarse)?, u2: self.u2.restrict(fine, coarse)? })
    }
}

impl Restrict for ChnsState {
    fn restrict(&self, fine: &StaggeredGrid, coarse: &StaggeredGrid) -> Result<Self> {
        Ok(ChnsState {
            z: self.z.restrict(fine, coarse)?,
            w: self.w.restrict(fine, coarse)?,
            r: self.r,
            u: self.u.restrict(fine, coarse)?,
            p: self.p.restrict(fine, coarse)?,
            z_prev: self.z_prev.restrict(fine, coarse)?,
            u_prev: self.u_prev.restrict(fine, coarse)?,
            t: self.t,
            step: self.step,
        })
    }
}

/// Time norms of a sequence of spatial norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `max_n ||e^n||`.
    Inf2,
    /// `(sum_n dt ||e^n||^2)^{1/2}`.
    Two2,
    /// `max_n |e^n|` for a scalar.
    ScalarInf,
}

/// Quantities compared between grid levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Z,
    DZ,
    R,
    W,
    DW,
    U,
    DxU1,
    DyU1,
    P,
}

impl Quantity {
    pub const ALL: [Quantity; 9] =
        [Self::Z, Self::DZ, Self::R, Self::W, Self::DW, Self::U, Self::DxU1, Self::DyU1, Self::P];

    pub fn name(self) -> &'static str {
        match self {
            Self::Z => "Z",
            Self::DZ => "DZ",
            Self::R => "R",
            Self::W => "W",
            Self::DW => "DW",
            Self::U => "U",
            Self::DxU1 => "dxU1",
            Self::DyU1 => "DyU1",
            Self::P => "P",
        }
    }

    /// The time norm each quantity is reported in.
    pub fn norm(self) -> NormKind {
        match self {
            Self::R => NormKind::ScalarInf,
            Self::W | Self::DW | Self::P => NormKind::Two2,
            _ => NormKind::Inf2,
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&q| q == self).unwrap()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn cell_err(c: &CellField, f: &CellField, gf: &StaggeredGrid, gc: &StaggeredGrid) -> Result<CellField> {
    Ok(c.lincomb(1.0, &f.restrict(gf, gc)?, -1.0))
}

/// Spatial norm of one quantity's Cauchy difference at one time level.
///
/// The fine field is restricted to the coarse grid and subtracted; derived
/// quantities apply the coarse operator to that difference, so `e_DZ = D e_Z`
/// and `e_DyU1 = D_y e_U1`.
pub fn level_difference(
    q: Quantity,
    coarse: &ChnsState,
    fine: &ChnsState,
    gc: &StaggeredGrid,
    gf: &StaggeredGrid,
) -> Result<f64> {
    let e_u1 = || -> Result<XFaceField> { Ok(coarse.u.u1.lincomb(1.0, &fine.u.u1.restrict(gf, gc)?, -1.0)) };
    match q {
        Quantity::Z => Ok(norms::norm_m(&cell_err(&coarse.z, &fine.z, gf, gc)?, gc)),
        Quantity::W => Ok(norms::norm_m(&cell_err(&coarse.w, &fine.w, gf, gc)?, gc)),
        Quantity::P => Ok(norms::norm_m(&cell_err(&coarse.p, &fine.p, gf, gc)?, gc)),
        Quantity::R => Ok((coarse.r - fine.r).abs()),
        Quantity::DZ => {
            Ok(norms::l2norm_sq_vec(&ops::gradient(&cell_err(&coarse.z, &fine.z, gf, gc)?, gc), gc).sqrt())
        }
        Quantity::DW => {
            Ok(norms::l2norm_sq_vec(&ops::gradient(&cell_err(&coarse.w, &fine.w, gf, gc)?, gc), gc).sqrt())
        }
        Quantity::U => Ok(norms::l2norm_sq_vec(&coarse.u.lincomb(1.0, &fine.u.restrict(gf, gc)?, -1.0), gc).sqrt()),
        Quantity::DxU1 => Ok(norms::norm_m(&ops::dx_xface_to_center(&e_u1()?, gc), gc)),
        Quantity::DyU1 => Ok(norms::norm_ty(&ops::dy_xface_to_corner(&e_u1()?, gc), gc)),
    }
}

/// Cauchy errors of all quantities, fed one pair of time levels at a time.
///
/// Steps `n >= 1` are sampled: whole-step quantities at `t^n`, the half-step
/// quantities `W`, `P` at `t^{n-1/2}`.
#[derive(Debug, Clone)]
pub struct CauchyAccumulator {
    coarse: StaggeredGrid,
    fine: StaggeredGrid,
    dt: f64,
    acc: [f64; 9],
    samples: usize,
}

impl CauchyAccumulator {
    pub fn new(coarse: &StaggeredGrid, fine: &StaggeredGrid, dt: f64) -> Result<Self> {
        check_refinement(coarse, fine)?;
        Ok(Self { coarse: *coarse, fine: *fine, dt, acc: [0.0; 9], samples: 0 })
    }

    pub fn push(&mut self, coarse: &ChnsState, fine: &ChnsState) -> Result<()> {
        if coarse.step != fine.step || (coarse.t - fine.t).abs() > 1e-12 * coarse.t.abs().max(1.0) {
            return Err(ChnsError::TrajectoryMismatch(format!(
                "step {} at t={} vs step {} at t={}",
                coarse.step, coarse.t, fine.step, fine.t
            )));
        }
        if coarse.step == 0 {
            return Ok(());
        }
        for q in Quantity::ALL {
            let e = level_difference(q, coarse, fine, &self.coarse, &self.fine)?;
            let a = &mut self.acc[q.index()];
            match q.norm() {
                NormKind::Inf2 | NormKind::ScalarInf => *a = a.max(e),
                NormKind::Two2 => *a += self.dt * e * e,
            }
        }
        self.samples += 1;
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn error(&self, q: Quantity) -> f64 {
        let a = self.acc[q.index()];
        match q.norm() {
            NormKind::Two2 => a.sqrt(),
            _ => a,
        }
    }

    pub fn errors(&self) -> Vec<(Quantity, f64)> {
        Quantity::ALL.iter().map(|&q| (q, self.error(q))).collect()
    }
}

/// A stored run: the states at every step on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: StaggeredGrid,
    pub dt: f64,
    pub states: Vec<ChnsState>,
}

impl Trajectory {
    pub fn new(grid: &StaggeredGrid, dt: f64) -> Self {
        Self { grid: *grid, dt, states: Vec::new() }
    }
}

impl Observer for Trajectory {
    fn observe(&mut self, state: &ChnsState, _: Option<&StepReport>) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

/// `||q_h - q_{h/2}||` in the time norm of `q` over two stored trajectories.
pub fn cauchy_error(coarse: &Trajectory, fine: &Trajectory, q: Quantity) -> Result<f64> {
    if coarse.states.len() != fine.states.len() || (coarse.dt - fine.dt).abs() > 1e-15 * coarse.dt {
        return Err(ChnsError::TrajectoryMismatch(format!(
            "{} states at dt={} vs {} states at dt={}",
            coarse.states.len(),
            coarse.dt,
            fine.states.len(),
            fine.dt
        )));
    }
    let mut acc = CauchyAccumulator::new(&coarse.grid, &fine.grid, coarse.dt)?;
    for (c, f) in coarse.states.iter().zip(&fine.states) {
        acc.push(c, f)?;
    }
    Ok(acc.error(q))
}

/// Observed order `log2(e_h / e_{h/2})`.
pub fn rate(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

/// Round to two decimals, as rates are reported.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One line of an error table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub h: f64,
    pub errors: Vec<f64>,
    /// Rate against the previous (coarser) row; `None` on the first row.
    pub rates: Vec<Option<f64>>,
}

/// Rates between consecutive levels; `errors[level][column]`.
pub fn rate_table(hs: &[f64], errors: &[Vec<f64>]) -> Vec<RateRow> {
    let mut rows: Vec<RateRow> = Vec::with_capacity(hs.len());
    for (l, (&h, e)) in hs.iter().zip(errors).enumerate() {
        let rates = if l == 0 {
            vec![None; e.len()]
        } else {
            e.iter().zip(&errors[l - 1]).map(|(f, c)| Some(round2(rate(*c, *f)))).collect()
        };
        rows.push(RateRow { h, errors: e.clone(), rates });
    }
    rows
}

/// CSV with columns `h, err_1, rate_1, err_2, rate_2, ...`.
pub fn write_rate_csv(w: &mut dyn Write, names: &[&str], rows: &[RateRow]) -> Result<()> {
    let mut header = String::from("h");
    for n in names {
        header.push_str(&format!(",err_{n},rate_{n}"));
    }
    writeln!(w, "{header}")?;
    for r in rows {
        let mut line = format!("{:e}", r.h);
        for (e, rt) in r.errors.iter().zip(&r.rates) {
            match rt {
                Some(v) => line.push_str(&format!(",{e:e},{v:.2}")),
                None => line.push_str(&format!(",{e:e},")),
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Interface length proxy `1/2 (|D Z|, 1)_M` with the gradient averaged to
/// cell centers (a jump of 2 across the interface).
pub fn perimeter_proxy(z: &CellField, g: &StaggeredGrid) -> f64 {
    let gx = ops::avg_x_xface_to_center(&ops::dx_center_to_xface(z, g), g);
    let gy = ops::avg_y_yface_to_center(&ops::dy_center_to_yface(z, g), g);
    let mag = gx.zip_map(&gy, |a, b| a.hypot(b));
    0.5 * norms::integral(&mag, g)
}

/// Vertical centroid of the region weighted by `indicator`.
pub fn centroid_y(indicator: &CellField, g: &StaggeredGrid) -> f64 {
    let y = CellField::from_fn(g, |_, y| y);
    norms::inner_m(&y, indicator, g) / norms::integral(indicator, g)
}
