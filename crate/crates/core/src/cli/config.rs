//! Scenario configuration: the TOML schema, fail-fast validation, and the
//! translation into domain objects.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_ops::{gaussian_pulse, CoefficientProfile, Grid1D, ScalarField};
use crate::observe::StencilSpec;
use crate::projectors::{
    mode_compose, AcousticParams, HyperbolicParams, Mode, ModeDecomposition, StateVector,
    StringParams, System, SystemParams,
};

/// Relative tolerance for "whole number of steps" and stencil-match checks.
pub const CONFIG_MATCH_TOL: f64 = 1e-9;

/// One scenario: system, grid, coefficients, initial pulses, observation
/// geometry, diagnostics settings, and output destination.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: System,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub pulses: Vec<PulseConfig>,
    pub observation: ObservationConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
}

/// Union of the per-system parameter fields; [`ScenarioConfig::system_params`]
/// checks that exactly the fields of the configured system are present.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    /// String wave speed.
    pub c: Option<f64>,
    /// Hyperbolic off-diagonal scale ε.
    pub epsilon: Option<f64>,
    pub b_profile: Option<CoefficientProfile>,
    pub c_profile: Option<CoefficientProfile>,
    /// Acoustic adiabatic index γ.
    pub gamma: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// Acoustic projector parameter β; defaults to the consistent value
    /// `δ₁ + δ₂` when omitted.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Gaussian,
}

fn default_shape() -> PulseShape {
    PulseShape::Gaussian
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub mode: Mode,
    #[serde(default = "default_shape")]
    pub shape: PulseShape,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    pub x_obs: f64,
    /// Stencil spatial step; required for string scenarios, ignored
    /// otherwise (hyperbolic/acoustic observation samples directly).
    pub dx: Option<f64>,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_kappa() -> f64 {
    crate::diagnose::DEFAULT_KAPPA
}

fn default_spline_order() -> usize {
    3
}

fn default_threshold_frac() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_spline_order")]
    pub spline_order: usize,
    /// Spline knot spacing; defaults to twice the sample step.
    pub knot_spacing: Option<f64>,
    #[serde(default = "default_threshold_frac")]
    pub threshold_frac: f64,
    /// A-priori emission time of the source (never inferred).
    pub t_zero: f64,
    /// A-priori speed uncertainty entering the error budget.
    #[serde(default)]
    pub delta_speed: f64,
    /// A-priori arrival-time uncertainty entering the error budget.
    #[serde(default)]
    pub delta_arrival: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    #[serde(default)]
    pub emit_plots: bool,
}

/// Reads and fully validates a scenario configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Parses and validates a configuration from TOML text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn require<T: Copy>(field: Option<T>, name: &str, system: System) -> Result<T> {
    field.ok_or_else(|| {
        Error::config(format!("params.{name} is required for system = \"{system:?}\""))
    })
}

fn reject<T>(field: &Option<T>, name: &str, system: System) -> Result<()> {
    if field.is_some() {
        return Err(Error::config(format!(
            "params.{name} does not apply to system = \"{system:?}\""
        )));
    }
    Ok(())
}

impl ScenarioConfig {
    /// Grid described by the `[grid]` table.
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.length, self.grid.points)
    }

    /// System parameters described by the `[params]` table.
    pub fn system_params(&self) -> Result<SystemParams> {
        let p = &self.params;
        let sys = self.system;
        match sys {
            System::String => {
                reject(&p.epsilon, "epsilon", sys)?;
                reject(&p.b_profile, "b_profile", sys)?;
                reject(&p.c_profile, "c_profile", sys)?;
                reject(&p.gamma, "gamma", sys)?;
                reject(&p.delta1, "delta1", sys)?;
                reject(&p.delta2, "delta2", sys)?;
                reject(&p.beta, "beta", sys)?;
                let c = require(p.c, "c", sys)?;
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::config(format!("params.c must be positive, got {c}")));
                }
                Ok(SystemParams::String(StringParams { c }))
            }
            System::Hyperbolic => {
                reject(&p.c, "c", sys)?;
                reject(&p.gamma, "gamma", sys)?;
                reject(&p.delta1, "delta1", sys)?;
                reject(&p.delta2, "delta2", sys)?;
                reject(&p.beta, "beta", sys)?;
                let epsilon = require(p.epsilon, "epsilon", sys)?;
                if !(epsilon >= 0.0) || !epsilon.is_finite() {
                    return Err(Error::config(format!(
                        "params.epsilon must be finite and >= 0, got {epsilon}"
                    )));
                }
                let b_profile = require(p.b_profile, "b_profile", sys)?;
                let c_profile = require(p.c_profile, "c_profile", sys)?;
                Ok(SystemParams::Hyperbolic(HyperbolicParams {
                    b_profile,
                    c_profile,
                    epsilon,
                }))
            }
            System::Acoustic => {
                reject(&p.c, "c", sys)?;
                reject(&p.epsilon, "epsilon", sys)?;
                reject(&p.b_profile, "b_profile", sys)?;
                reject(&p.c_profile, "c_profile", sys)?;
                let gamma = require(p.gamma, "gamma", sys)?;
                let delta1 = require(p.delta1, "delta1", sys)?;
                let delta2 = require(p.delta2, "delta2", sys)?;
                let beta = p.beta.unwrap_or(delta1 + delta2);
                AcousticParams::new(gamma, delta1, delta2, beta)
                    .map(SystemParams::Acoustic)
                    .map_err(|e| Error::config(format!("params: {e}")))
            }
        }
    }

    /// Observation sample instants `t_start, t_start + dt, …, t_end`.
    pub fn frame_times(&self) -> Result<Vec<f64>> {
        let o = &self.observation;
        let steps_real = (o.t_end - o.t_start) / o.dt;
        let steps = steps_real.round();
        if (steps_real - steps).abs() > CONFIG_MATCH_TOL * steps.max(1.0) {
            return Err(Error::config(format!(
                "observation window [{}, {}] is not a whole number of dt = {} steps",
                o.t_start, o.t_end, o.dt
            )));
        }
        let n = steps as usize + 1;
        Ok((0..n).map(|i| o.t_start + i as f64 * o.dt).collect())
    }

    /// Times the truth simulation must store: the observation instants,
    /// plus one extra step for the string displacement stencil (which
    /// differences adjacent-in-time displacement samples).
    pub fn truth_times(&self) -> Result<Vec<f64>> {
        let mut times = self.frame_times()?;
        if self.system == System::String {
            times.push(self.observation.t_end + self.observation.dt);
        }
        Ok(times)
    }

    /// Stencil geometry for series synthesis (string scenarios only).
    pub fn stencil(&self) -> Option<StencilSpec> {
        match self.system {
            System::String => Some(StencilSpec {
                dx: self.observation.dx.unwrap_or(f64::NAN),
                dt: self.observation.dt,
            }),
            _ => None,
        }
    }

    /// Initial state composed from the configured pulses.
    pub fn initial_state(&self) -> Result<StateVector> {
        let grid = self.grid()?;
        let params = self.system_params()?;
        let mut pi = ScalarField::zeros(grid);
        let mut lambda = ScalarField::zeros(grid);
        let mut entropy = if self.system == System::Acoustic {
            Some(ScalarField::zeros(grid))
        } else {
            None
        };
        for (i, pulse) in self.pulses.iter().enumerate() {
            let field = gaussian_pulse(grid, pulse.center, pulse.width, pulse.amplitude)
                .map_err(|e| Error::config(format!("pulses[{i}]: {e}")))?;
            match pulse.mode {
                Mode::Right => pi = pi.add(&field),
                Mode::Left => lambda = lambda.add(&field),
                Mode::Entropy => match entropy.as_mut() {
                    Some(s) => *s = s.add(&field),
                    None => {
                        return Err(Error::config(format!(
                            "pulses[{i}]: entropy pulses exist only for the acoustic system"
                        )))
                    }
                },
            }
        }
        mode_compose(&ModeDecomposition {
            pi,
            lambda,
            entropy,
            params,
        })
    }

    /// Directed propagation speed at `x` (string `c`, hyperbolic `√(b·c)`,
    /// acoustic unit speed in the nondimensional variables).
    pub fn directed_speed(&self, x: f64) -> Result<f64> {
        match self.system_params()? {
            SystemParams::String(p) => Ok(p.c),
            SystemParams::Hyperbolic(p) => {
                let b = p.b_profile.eval(x);
                let c = p.c_profile.eval(x);
                if !(b > 0.0) || !(c > 0.0) {
                    return Err(Error::config(format!(
                        "coefficient profiles must be positive at x = {x}"
                    )));
                }
                Ok((b * c).sqrt())
            }
            SystemParams::Acoustic(_) => Ok(1.0),
        }
    }

    /// Upper bound on the directed speed over the whole domain.
    fn max_speed(&self) -> Result<f64> {
        match self.system_params()? {
            SystemParams::String(p) => Ok(p.c),
            SystemParams::Hyperbolic(p) => {
                let grid = self.grid()?;
                let mut worst = 0.0f64;
                for i in 0..grid.points() {
                    let x = grid.position(i);
                    worst = worst.max(p.b_profile.eval(x) * p.c_profile.eval(x));
                }
                Ok(worst.sqrt())
            }
            SystemParams::Acoustic(_) => Ok(1.0),
        }
    }

    /// Full fail-fast validation of every module precondition the run will
    /// rely on, plus the guard-band check that no pulse excursion comes
    /// within two pulse widths of the domain seam.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().map_err(|e| Error::config(format!("grid: {e}")))?;
        let params = self.system_params()?;
        if let SystemParams::Hyperbolic(p) = &params {
            p.b_profile
                .validate_on(grid)
                .map_err(|e| Error::config(format!("params.b_profile: {e}")))?;
            p.c_profile
                .validate_on(grid)
                .map_err(|e| Error::config(format!("params.c_profile: {e}")))?;
        }

        if self.pulses.is_empty() {
            return Err(Error::config("pulses: at least one pulse is required"));
        }
        let half = self.grid.length / 2.0;
        for (i, p) in self.pulses.iter().enumerate() {
            if !(p.width > 0.0) || !p.width.is_finite() {
                return Err(Error::config(format!(
                    "pulses[{i}].width must be positive, got {}",
                    p.width
                )));
            }
            if p.width < 4.0 * grid.spacing() {
                return Err(Error::config(format!(
                    "pulses[{i}].width = {} under-resolved: needs >= 4 grid spacings ({})",
                    p.width,
                    4.0 * grid.spacing()
                )));
            }
            if !p.amplitude.is_finite() {
                return Err(Error::config(format!("pulses[{i}].amplitude must be finite")));
            }
            if p.center.abs() >= half {
                return Err(Error::config(format!(
                    "pulses[{i}].center = {} outside the domain [{}, {})",
                    p.center, -half, half
                )));
            }
            if p.mode == Mode::Entropy && self.system != System::Acoustic {
                return Err(Error::config(format!(
                    "pulses[{i}].mode = \"entropy\" exists only for the acoustic system"
                )));
            }
        }

        let o = &self.observation;
        if !(o.dt > 0.0) || !o.dt.is_finite() {
            return Err(Error::config(format!(
                "observation.dt must be positive, got {}",
                o.dt
            )));
        }
        if !(o.t_start >= 0.0) || !o.t_start.is_finite() {
            return Err(Error::config(format!(
                "observation.t_start must be >= 0, got {}",
                o.t_start
            )));
        }
        if !(o.t_end > o.t_start) {
            return Err(Error::config(format!(
                "observation.t_end = {} must exceed t_start = {}",
                o.t_end, o.t_start
            )));
        }
        if !(o.noise_sigma >= 0.0) || !o.noise_sigma.is_finite() {
            return Err(Error::config(format!(
                "observation.noise_sigma must be finite and >= 0, got {}",
                o.noise_sigma
            )));
        }
        if o.x_obs < -half || o.x_obs >= half {
            return Err(Error::config(format!(
                "observation.x_obs = {} outside the domain [{}, {})",
                o.x_obs, -half, half
            )));
        }
        match self.system {
            System::String => {
                let dx = o.dx.ok_or_else(|| {
                    Error::config("observation.dx is required for string scenarios")
                })?;
                if !(dx >= grid.spacing()) || !dx.is_finite() {
                    return Err(Error::config(format!(
                        "observation.dx = {dx} must be >= the grid spacing {}",
                        grid.spacing()
                    )));
                }
                if o.x_obs + dx >= half {
                    return Err(Error::config(format!(
                        "observation stencil x_obs + dx = {} leaves the domain [{}, {})",
                        o.x_obs + dx,
                        -half,
                        half
                    )));
                }
            }
            _ => {
                if o.dx.is_some() {
                    return Err(Error::config(
                        "observation.dx applies only to string scenarios \
                         (hyperbolic/acoustic observation samples directly)",
                    ));
                }
            }
        }

        let frames = self.frame_times()?;
        let d = &self.diagnostics;
        let min_frames = (d.spline_order + 2).max(5);
        if frames.len() < min_frames {
            return Err(Error::config(format!(
                "observation window holds {} samples; diagnostics need at least {min_frames}",
                frames.len()
            )));
        }
        if !(d.kappa > 0.0) || !d.kappa.is_finite() {
            return Err(Error::config(format!(
                "diagnostics.kappa must be positive, got {}",
                d.kappa
            )));
        }
        if !(2..=5).contains(&d.spline_order) {
            return Err(Error::config(format!(
                "diagnostics.spline_order must lie in 2..=5, got {}",
                d.spline_order
            )));
        }
        if let Some(h) = d.knot_spacing {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::config(format!(
                    "diagnostics.knot_spacing must be positive, got {h}"
                )));
            }
        }
        if !(d.threshold_frac > 0.0 && d.threshold_frac <= 1.0) {
            return Err(Error::config(format!(
                "diagnostics.threshold_frac must lie in (0, 1], got {}",
                d.threshold_frac
            )));
        }
        if !d.t_zero.is_finite() {
            return Err(Error::config("diagnostics.t_zero must be finite"));
        }
        if !(d.delta_speed >= 0.0) || !(d.delta_arrival >= 0.0) {
            return Err(Error::config(
                "diagnostics.delta_speed and delta_arrival must be >= 0",
            ));
        }
        if self.output.directory.is_empty() {
            return Err(Error::config("output.directory must not be empty"));
        }

        self.check_guard_band(&frames)
    }

    /// Guard band: over the full simulated window every pulse excursion
    /// must stay at least two pulse widths away from the domain boundary.
    fn check_guard_band(&self, frames: &[f64]) -> Result<()> {
        let half = self.grid.length / 2.0;
        let speed = self.max_speed()?;
        let mut t_max = *frames.last().expect("frame_times is nonempty");
        if self.system == System::String {
            t_max += self.observation.dt;
        }
        for (i, p) in self.pulses.iter().enumerate() {
            let (lo, hi) = match p.mode {
                Mode::Right => (p.center, p.center + speed * t_max),
                Mode::Left => (p.center - speed * t_max, p.center),
                Mode::Entropy => (p.center, p.center),
            };
            let margin = 2.0 * p.width;
            if lo - margin < -half || hi + margin > half {
                return Err(Error::config(format!(
                    "pulses[{i}]: excursion [{:.3}, {:.3}] over t <= {t_max} comes within \
                     two widths ({margin}) of the domain boundary +-{half}",
                    lo, hi
                )));
            }
        }
        Ok(())
    }
}
