//! Physical parameters, the split double-well potential, SAV scalar
//! machinery, the discrete modified energy and the momentum source terms.

use std::fmt;
use std::str::FromStr;

use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid, Velocity, YFaceField};
use crate::norms;
use crate::ops;

/// Guard on `E1 + delta` below which the SAV denominator is rejected.
pub const SAV_GUARD: f64 = 1e-20;

/// How the phase equation sees the midpoint velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Extrapolated velocity `(3U^n - U^{n-1})/2` in the phase convection.
    Decoupled,
    /// Picard iteration on `U^{n+1/2}` until the full scheme holds.
    #[default]
    Coupled,
}

impl FromStr for StepMode {
    type Err = ChnsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupled" => Ok(Self::Coupled),
            "decoupled" => Ok(Self::Decoupled),
            other => Err(ChnsError::UnknownKind { what: "mode", name: other.into() }),
        }
    }
}

impl fmt::Display for StepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Coupled => "coupled",
            Self::Decoupled => "decoupled",
        })
    }
}

/// Physical and numerical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Mobility `M`.
    pub mobility: f64,
    /// Mixing coefficient `lambda`.
    pub lambda: f64,
    /// Viscosity `nu`.
    pub nu: f64,
    /// Convection switch: 1 for Navier-Stokes, 0 for Stokes.
    pub gamma: f64,
    /// Interface width squared, `epsilon^2`.
    pub eps2: f64,
    /// Potential splitting constant `beta`.
    pub beta: f64,
    /// SAV shift `delta`.
    pub delta: f64,
    /// Buoyancy coefficient `chi` (0 disables buoyancy).
    pub chi: f64,
    /// Buoyancy reference phase `phi_0`.
    pub phi0: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Relative tolerance of every Krylov solve.
    pub cg_tol: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub mode: StepMode,
    /// Capillary forcing `P W D Z` in the momentum equation.
    pub capillary: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self::convergence_example()
    }
}

impl Params {
    /// Trigonometric convergence case: `T = 0.1`, `dt = 1e-4`, `lambda = nu = 0.1`,
    /// `eps^2 = 0.1`, `M = 0.001`, `beta = 5`, `gamma = 1`.
    pub fn convergence_example() -> Self {
        Self {
            mobility: 1e-3,
            lambda: 0.1,
            nu: 0.1,
            gamma: 1.0,
            eps2: 0.1,
            beta: 5.0,
            delta: 0.0,
            chi: 0.0,
            phi0: 0.0,
            dt: 1e-4,
            t_final: 0.1,
            cg_tol: 1e-11,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            mode: StepMode::Coupled,
            capillary: true,
        }
    }

    /// Square bubble relaxing under surface tension.
    pub fn square_bubble() -> Self {
        Self {
            mobility: 0.002,
            lambda: 0.01,
            nu: 1.0,
            eps2: 1e-4,
            dt: 1e-3,
            t_final: 10.0,
            ..Self::convergence_example()
        }
    }

    /// Rising light bubble with Boussinesq buoyancy.
    pub fn buoyant_bubble() -> Self {
        Self {
            mobility: 0.01,
            lambda: 0.001,
            nu: 1.0,
            eps2: 1e-4,
            dt: 5e-4,
            t_final: 5.0,
            chi: 40.0,
            phi0: -0.05,
            ..Self::convergence_example()
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.eps2.sqrt()
    }

    /// Number of steps `N = T / dt`; rejects non-integer ratios.
    pub fn step_count(&self) -> Result<usize> {
        let ratio = self.t_final / self.dt;
        let n = ratio.round();
        if !ratio.is_finite() || n < 0.0 || (ratio - n).abs() > 1e-8 * n.max(1.0) {
            return Err(ChnsError::NonIntegerStepCount { t_final: self.t_final, dt: self.dt });
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ChnsError::Validation { key: key.into(), reason: format!("must be > 0, got {v}") })
            }
        }
        fn nonneg(key: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ChnsError::Validation { key: key.into(), reason: format!("must be >= 0, got {v}") })
            }
        }
        positive("M", self.mobility)?;
        positive("lambda", self.lambda)?;
        positive("nu", self.nu)?;
        positive("epsilon", self.eps2)?;
        positive("dt", self.dt)?;
        nonneg("beta", self.beta)?;
        nonneg("delta", self.delta)?;
        nonneg("T", self.t_final)?;
        if self.gamma != 0.0 && self.gamma != 1.0 {
            return Err(ChnsError::Validation {
                key: "gamma".into(),
                reason: format!("must be 0 or 1, got {}", self.gamma),
            });
        }
        for (key, v) in [("cg_tol", self.cg_tol), ("picard_tol", self.picard_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ChnsError::Validation { key: key.into(), reason: format!("must lie in (0, 1), got {v}") });
            }
        }
        if self.picard_max_iter == 0 {
            return Err(ChnsError::Validation { key: "picard_max_iter".into(), reason: "must be >= 1".into() });
        }
        if !self.chi.is_finite() || !self.phi0.is_finite() {
            return Err(ChnsError::Validation { key: "chi/phi0".into(), reason: "must be finite".into() });
        }
        self.step_count()?;
        Ok(())
    }
}

/// One time level of the discrete solution plus the level before it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChnsState {
    /// Phase `Z^n` at cell centers.
    pub z: CellField,
    /// Chemical potential from the last half step.
    pub w: CellField,
    /// Scalar auxiliary variable `R^n`.
    pub r: f64,
    /// Velocity `U^n`.
    pub u: Velocity,
    /// Pressure from the last half step, mean zero.
    pub p: CellField,
    pub z_prev: CellField,
    pub u_prev: Velocity,
    pub t: f64,
    pub step: usize,
}

impl ChnsState {
    /// Fresh state at `t = 0` with `R^0 = sqrt(E1(Z^0) + delta)` and the
    /// startup convention `Z^{-1} = Z^0`, `U^{-1} = U^0`.
    pub fn new(z: CellField, u: Velocity, g: &StaggeredGrid, p: &Params) -> Result<Self> {
        z.check(g)?;
        u.u1.check(g)?;
        u.u2.check(g)?;
        let r0 = (e1_h(&z, g, p) + p.delta).sqrt();
        Ok(Self {
            w: g.cell(),
            r: r0,
            p: g.cell(),
            z_prev: z.clone(),
            u_prev: u.clone(),
            z,
            u,
            t: 0.0,
            step: 0,
        })
    }

    /// `(3 Z^n - Z^{n-1}) / 2`
    pub fn z_tilde(&self) -> CellField {
        self.z.lincomb(1.5, &self.z_prev, -0.5)
    }

    /// `(3 U^n - U^{n-1}) / 2`
    pub fn u_tilde(&self) -> Velocity {
        self.u.lincomb(1.5, &self.u_prev, -0.5)
    }
}

/// `F'(z) = z (z^2 - 1 - beta) / eps^2`.
#[inline]
pub fn f_prime(z: f64, p: &Params) -> f64 {
    z * (z * z - 1.0 - p.beta) / p.eps2
}

pub fn f_prime_field(z: &CellField, p: &Params) -> CellField {
    z.map(|v| f_prime(v, p))
}

/// `E1^h(Z) = sum h k (Z^2 - 1 - beta)^2 / (4 eps^2)`.
pub fn e1_h(z: &CellField, g: &StaggeredGrid, p: &Params) -> f64 {
    let s: f64 = z
        .as_slice()
        .iter()
        .map(|&v| {
            let q = v * v - 1.0 - p.beta;
            q * q
        })
        .sum();
    g.h * g.k * s / (4.0 * p.eps2)
}

/// `b = F'(Z~) / sqrt(E1^h(Z~) + delta)` and its denominator.
#[derive(Debug, Clone)]
pub struct SavCoefficients {
    pub b: CellField,
    pub denom: f64,
}

pub fn sav_coefficients(z_tilde: &CellField, g: &StaggeredGrid, p: &Params) -> Result<SavCoefficients> {
    let value = e1_h(z_tilde, g, p) + p.delta;
    if !(value > SAV_GUARD) {
        return Err(ChnsError::NonpositiveSavDenominator { value });
    }
    let denom = value.sqrt();
    let b = z_tilde.map(|v| f_prime(v, p) / denom);
    Ok(SavCoefficients { b, denom })
}

/// Modified discrete energy
/// `1/2 ||U||^2 + lambda (1/2 ||D Z||^2 + R^2) + lambda beta/(2 eps^2) ||Z||_M^2`.
pub fn energy_total(s: &ChnsState, g: &StaggeredGrid, p: &Params) -> f64 {
    energy_of(&s.z, s.r, &s.u, g, p)
}

pub fn energy_of(z: &CellField, r: f64, u: &Velocity, g: &StaggeredGrid, p: &Params) -> f64 {
    0.5 * norms::l2norm_sq_vec(u, g)
        + p.lambda * (0.5 * norms::dnorm_sq_scalar(z, g) + r * r)
        + p.lambda * p.beta / (2.0 * p.eps2) * norms::inner_m(z, z, g)
}

/// Capillary forcing `(P^x W D_x Z~, P^y W D_y Z~)` on interior faces.
pub fn capillary_force(w_mid: &CellField, z_tilde: &CellField, g: &StaggeredGrid) -> Velocity {
    let u1 = ops::avg_x_center_to_xface(w_mid, g).mul(&ops::dx_center_to_xface(z_tilde, g));
    let u2 = ops::avg_y_center_to_yface(w_mid, g).mul(&ops::dy_center_to_yface(z_tilde, g));
    Velocity { u1, u2 }
}

/// Boussinesq body force `-chi (P^y Z~ - phi0)` on interior y-faces.
pub fn buoyancy(z_tilde: &CellField, g: &StaggeredGrid, p: &Params) -> YFaceField {
    let zy = ops::avg_y_center_to_yface(z_tilde, g);
    YFaceField::from_index_fn(g, |i, j| {
        if j == 0 || j == g.ny || p.chi == 0.0 {
            0.0
        } else {
            -p.chi * (zy[(i, j)] - p.phi0)
        }
    })
}
