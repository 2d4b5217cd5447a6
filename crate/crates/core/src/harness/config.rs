//! Flat `key = value` run configuration.
//!
//! `#` starts a comment. The `experiment` key, wherever it appears, selects
//! the preset that every other key then overrides. Unknown keys are errors.

use std::path::Path;
use std::str::FromStr;

use crate::error::{ChnsError, Result};
use crate::grid::StaggeredGrid;
use crate::model::{Params, StepMode};

/// Which driver a configuration is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Converge,
    SquareBubble,
    BuoyantBubble,
    Custom,
}

impl FromStr for Experiment {
    type Err = ChnsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(Self::Converge),
            "square_bubble" => Ok(Self::SquareBubble),
            "buoyant_bubble" => Ok(Self::BuoyantBubble),
            "custom" => Ok(Self::Custom),
            other => Err(ChnsError::UnknownKind { what: "experiment", name: other.into() }),
        }
    }
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converge => "converge",
            Self::SquareBubble => "square_bubble",
            Self::BuoyantBubble => "buoyant_bubble",
            Self::Custom => "custom",
        }
    }
}

/// Initial phase and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    /// `cos(pi x) cos(pi y)` with the polynomial stream-function velocity.
    Trig,
    /// Axis-aligned square of side `side` with phase `inside` (`-inside` outside).
    SquareBubble { side: f64, cx: f64, cy: f64, inside: f64 },
    /// Disc of radius `radius` with phase `inside`.
    CircleBubble { radius: f64, cx: f64, cy: f64, inside: f64 },
    /// Uniform phase, fluid at rest.
    Constant { value: f64 },
}

impl InitKind {
    /// Phase value marking the bubble, if the initial condition has one.
    pub fn bubble_phase(&self) -> Option<f64> {
        match *self {
            Self::SquareBubble { inside, .. } | Self::CircleBubble { inside, .. } => Some(inside),
            _ => None,
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub grid: StaggeredGrid,
    pub init: InitKind,
    /// Coarse cell counts per direction for `converge`; each also runs at 2x.
    pub levels: Vec<usize>,
    /// Write a snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
    /// Additional snapshot times.
    pub snapshot_times: Vec<f64>,
    pub vtk: bool,
    /// Replace the sampled initial velocity by its discretely solenoidal part.
    pub project_initial_velocity: bool,
}

impl RunConfig {
    /// Preset for an experiment before any overrides.
    pub fn preset(experiment: Experiment) -> Self {
        let unit = |n| StaggeredGrid::unit_square(n).expect("valid preset grid");
        match experiment {
            Experiment::Converge => Self {
                experiment,
                params: Params::convergence_example(),
                grid: unit(10),
                init: InitKind::Trig,
                levels: vec![10, 20],
                snapshot_every: 0,
                snapshot_times: Vec::new(),
                vtk: false,
                project_initial_velocity: true,
            },
            Experiment::SquareBubble => Self {
                experiment,
                params: Params::square_bubble(),
                grid: unit(100),
                init: InitKind::SquareBubble { side: 0.4, cx: 0.5, cy: 0.5, inside: 1.0 },
                levels: Vec::new(),
                snapshot_every: 0,
                snapshot_times: vec![0.0, 5.0, 6.0, 8.0, 10.0],
                vtk: false,
                project_initial_velocity: true,
            },
            Experiment::BuoyantBubble => Self {
                experiment,
                params: Params::buoyant_bubble(),
                grid: unit(100),
                init: InitKind::CircleBubble { radius: 0.15, cx: 0.5, cy: 0.25, inside: -1.0 },
                levels: Vec::new(),
                snapshot_every: 0,
                snapshot_times: vec![0.5, 1.0, 4.0, 4.1, 4.2, 5.0],
                vtk: false,
                project_initial_velocity: true,
            },
            Experiment::Custom => Self {
                experiment,
                params: Params::convergence_example(),
                grid: unit(16),
                init: InitKind::Trig,
                levels: Vec::new(),
                snapshot_every: 0,
                snapshot_times: Vec::new(),
                vtk: false,
                project_initial_velocity: true,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for &n in &self.levels {
            if n < 2 {
                return Err(ChnsError::Validation { key: "levels".into(), reason: format!("level {n} < 2") });
            }
        }
        if self.experiment == Experiment::Converge && self.levels.is_empty() {
            return Err(ChnsError::Validation { key: "levels".into(), reason: "at least one level".into() });
        }
        match self.init {
            InitKind::SquareBubble { side: s, inside, .. } | InitKind::CircleBubble { radius: s, inside, .. } => {
                if !(s > 0.0) {
                    return Err(ChnsError::Validation { key: "bubble size".into(), reason: format!("{s} <= 0") });
                }
                if inside.abs() != 1.0 {
                    return Err(ChnsError::Validation {
                        key: "bubble_phase".into(),
                        reason: format!("must be 1 or -1, got {inside}"),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "experiment",
    "init",
    "n",
    "nx",
    "ny",
    "x_lo",
    "x_hi",
    "y_lo",
    "y_hi",
    "M",
    "lambda",
    "nu",
    "gamma",
    "epsilon",
    "eps2",
    "beta",
    "delta",
    "chi",
    "phi0",
    "dt",
    "T",
    "cg_tol",
    "picard_tol",
    "picard_max_iter",
    "mode",
    "capillary",
    "bubble_side",
    "bubble_radius",
    "bubble_cx",
    "bubble_cy",
    "bubble_phase",
    "init_value",
    "levels",
    "snapshot_every",
    "snapshot_times",
    "vtk",
    "project_initial_velocity",
];

fn parse_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| ChnsError::Parse { line, message: format!("expected key = value, got `{body}`") })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ChnsError::Parse { line, message: format!("unknown key `{k}`") });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| ChnsError::Parse { line, message: format!("bad value `{v}` for `{key}`") })
}

fn list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(line, key, s)).collect()
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ChnsError::Parse { line, message: format!("bad boolean `{v}` for `{key}`") }),
    }
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let pairs = parse_lines(text)?;
    let mut experiment = Experiment::Custom;
    for (line, k, v) in &pairs {
        if k == "experiment" {
            experiment = v.parse().map_err(|_| ChnsError::Parse {
                line: *line,
                message: format!("unknown experiment `{v}`"),
            })?;
        }
    }
    let mut cfg = RunConfig::preset(experiment);
    let g = cfg.grid;
    let (mut nx, mut ny) = (g.nx, g.ny);
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (g.x_lo, g.x_hi, g.y_lo, g.y_hi);
    let mut init_name: Option<String> = None;
    let (mut side, mut radius) = (0.4, 0.15);
    let (mut cx, mut cy) = match cfg.init {
        InitKind::SquareBubble { cx, cy, .. } | InitKind::CircleBubble { cx, cy, .. } => (cx, cy),
        _ => (0.5, 0.5),
    };
    let mut phase: Option<f64> = None;
    let mut init_value = 0.0;
    let mut grid_set = false;

    for (line, k, v) in &pairs {
        let (line, v) = (*line, v.as_str());
        let p = &mut cfg.params;
        match k.as_str() {
            "experiment" => {}
            "init" => init_name = Some(v.to_string()),
            "n" => {
                nx = num(line, k, v)?;
                ny = nx;
                grid_set = true;
            }
            "nx" => {
                nx = num(line, k, v)?;
                grid_set = true;
            }
            "ny" => {
                ny = num(line, k, v)?;
                grid_set = true;
            }
            "x_lo" => x_lo = num(line, k, v)?,
            "x_hi" => x_hi = num(line, k, v)?,
            "y_lo" => y_lo = num(line, k, v)?,
            "y_hi" => y_hi = num(line, k, v)?,
            "M" => p.mobility = num(line, k, v)?,
            "lambda" => p.lambda = num(line, k, v)?,
            "nu" => p.nu = num(line, k, v)?,
            "gamma" => p.gamma = num(line, k, v)?,
            "epsilon" => {
                let e: f64 = num(line, k, v)?;
                p.eps2 = e * e;
            }
            "eps2" => p.eps2 = num(line, k, v)?,
            "beta" => p.beta = num(line, k, v)?,
            "delta" => p.delta = num(line, k, v)?,
            "chi" => p.chi = num(line, k, v)?,
            "phi0" => p.phi0 = num(line, k, v)?,
            "dt" => p.dt = num(line, k, v)?,
            "T" => p.t_final = num(line, k, v)?,
            "cg_tol" => p.cg_tol = num(line, k, v)?,
            "picard_tol" => p.picard_tol = num(line, k, v)?,
            "picard_max_iter" => p.picard_max_iter = num(line, k, v)?,
            "mode" => {
                p.mode = v
                    .parse::<StepMode>()
                    .map_err(|_| ChnsError::Parse { line, message: format!("unknown mode `{v}`") })?
            }
            "capillary" => p.capillary = boolean(line, k, v)?,
            "bubble_side" => side = num(line, k, v)?,
            "bubble_radius" => radius = num(line, k, v)?,
            "bubble_cx" => cx = num(line, k, v)?,
            "bubble_cy" => cy = num(line, k, v)?,
            "bubble_phase" => phase = Some(num(line, k, v)?),
            "init_value" => init_value = num(line, k, v)?,
            "levels" => cfg.levels = list(line, k, v)?,
            "snapshot_every" => cfg.snapshot_every = num(line, k, v)?,
            "snapshot_times" => cfg.snapshot_times = list(line, k, v)?,
            "vtk" => cfg.vtk = boolean(line, k, v)?,
            "project_initial_velocity" => cfg.project_initial_velocity = boolean(line, k, v)?,
            _ => unreachable!("key list and match arms disagree on `{k}`"),
        }
    }

    if experiment == Experiment::Converge && !grid_set {
        if let Some(&n) = cfg.levels.first() {
            nx = n;
            ny = n;
        }
    }
    cfg.grid = StaggeredGrid::new(nx, ny, x_lo, x_hi, y_lo, y_hi)?;
    let default_inside = cfg.init.bubble_phase();
    cfg.init = match init_name.as_deref() {
        None => match cfg.init {
            InitKind::SquareBubble { inside, .. } => {
                InitKind::SquareBubble { side, cx, cy, inside: phase.unwrap_or(inside) }
            }
            InitKind::CircleBubble { inside, .. } => {
                InitKind::CircleBubble { radius, cx, cy, inside: phase.unwrap_or(inside) }
            }
            other => other,
        },
        Some("trig") => InitKind::Trig,
        Some("square_bubble") => {
            InitKind::SquareBubble { side, cx, cy, inside: phase.or(default_inside).unwrap_or(1.0) }
        }
        Some("circle_bubble") => {
            InitKind::CircleBubble { radius, cx, cy, inside: phase.or(default_inside).unwrap_or(-1.0) }
        }
        Some("constant") => InitKind::Constant { value: init_value },
        Some(other) => return Err(ChnsError::UnknownKind { what: "initial condition", name: other.into() }),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_converge_config() {
        let cfg = parse_config("experiment = converge\n").unwrap();
        let p = &cfg.params;
        assert_eq!(
            (p.mobility, p.lambda, p.nu, p.eps2, p.dt, p.t_final, p.beta, p.gamma),
            (1e-3, 0.1, 0.1, 0.1, 1e-4, 0.1, 5.0, 1.0)
        );
        assert_eq!(cfg.init, InitKind::Trig);
        assert_eq!(cfg.grid.nx, 10);
    }

    #[test]
    fn zero_dt_is_rejected() {
        let e = parse_config("dt = 0\n").unwrap_err();
        assert!(matches!(e, ChnsError::Validation { ref key, .. } if key == "dt"), "{e}");
    }

    #[test]
    fn unknown_key_names_the_key() {
        let e = parse_config("# comment\nepsilnn = 0.1\n").unwrap_err();
        match e {
            ChnsError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("epsilnn"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn overrides_apply_after_preset() {
        let cfg =
            parse_config("n = 32  # coarse\nT = 1\nexperiment = buoyant_bubble\nbubble_radius = 0.2\nmode = decoupled\n")
                .unwrap();
        assert_eq!(cfg.grid.nx, 32);
        assert_eq!(cfg.params.chi, 40.0);
        assert_eq!(cfg.params.t_final, 1.0);
        assert_eq!(cfg.params.mode, StepMode::Decoupled);
        assert_eq!(cfg.init, InitKind::CircleBubble { radius: 0.2, cx: 0.5, cy: 0.25, inside: -1.0 });
    }

    #[test]
    fn non_integer_step_count_is_rejected() {
        let e = parse_config("dt = 0.3\nT = 1\n").unwrap_err();
        assert!(matches!(e, ChnsError::NonIntegerStepCount { .. }));
    }

    #[test]
    fn every_key_is_accepted() {
        for k in KEYS {
            let r = parse_lines(&format!("{k} = 1"));
            assert!(r.is_ok(), "{k}");
        }
    }
}
