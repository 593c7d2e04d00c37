//! The four pipeline commands and their file artifacts.
//!
//! Every artifact is written atomically (temp file + rename in the target
//! directory), all numeric CSV columns carry 17 significant digits, and no
//! output embeds timestamps or machine state: identical configurations
//! produce byte-identical files.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::cli::config::{ScenarioConfig, CONFIG_MATCH_TOL};
use crate::diagnose::{
    detect, estimate_arrival, initial_profile_value, localize_source, project_series,
    reconstruct_waveform, DiagnosticsReport, SplineOptions, ARRIVAL_BISECTION_FRAC,
    DETECTION_FLOOR_REL,
};
use crate::error::{Error, Result};
use crate::grid_ops::Grid1D;
use crate::observe::{
    calibrate_delta, synthesize_direct_series, synthesize_string_series, CalibrationResult,
    CalibrationScenario, MeasurementSeries, SamplerKind, StencilSpec, CALIBRATION_PURITY_TOL,
    TIME_MATCH_TOL,
};
use crate::projectors::{
    commutator_norm, idempotency_residual, mode_decompose, Mode, StateVector, System,
    SystemParams,
};
use crate::propagate::{evolve, EvolutionResult, CHARACTERISTIC_STEP_FRACTION, SEAM_GUARD_TOL};
use crate::spline::{LAMBDA_BISECTIONS, LOG_LAMBDA_HI, LOG_LAMBDA_LO};

/// On-disk calibration record (`calibration.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub delta: f64,
    pub trials: usize,
    pub sigma: f64,
    pub stencil: Option<StencilSpec>,
}

impl CalibrationFile {
    fn as_result(&self) -> CalibrationResult {
        CalibrationResult {
            delta: self.delta,
            trials: self.trials,
            sigma_used: self.sigma,
        }
    }
}

/// Run manifest: full config echo, toolkit version, and every numerical
/// tolerance the run relied on, so the run is reproducible from this file
/// alone.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a ScenarioConfig,
    tolerances: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a CalibrationFile>,
}

fn tolerance_table() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("arrival_bisection_knot_frac", ARRIVAL_BISECTION_FRAC),
        ("calibration_purity_tol", CALIBRATION_PURITY_TOL),
        ("characteristic_step_fraction", CHARACTERISTIC_STEP_FRACTION),
        ("config_match_tol", CONFIG_MATCH_TOL),
        ("detection_floor_rel", DETECTION_FLOOR_REL),
        ("lambda_bisections", LAMBDA_BISECTIONS as f64),
        ("log_lambda_hi", LOG_LAMBDA_HI),
        ("log_lambda_lo", LOG_LAMBDA_LO),
        ("seam_guard_tol", SEAM_GUARD_TOL),
        ("time_match_tol", TIME_MATCH_TOL),
    ])
}

fn manifest_for<'a>(command: &'static str, config: &'a ScenarioConfig) -> Manifest<'a> {
    Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        tolerances: tolerance_table(),
        trials: None,
        axis: None,
        values: None,
        workers: None,
        calibration: None,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(format!("cannot create {}: {e}", dir.display())))
}

/// Atomic write: the content lands under its final name only when complete.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::io(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(content.as_bytes())
        .map_err(|e| Error::io(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Error::io(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::io(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::io(format!("cannot parse {}: {e}", path.display())))
}

/// 17 significant digits: enough to round-trip every f64 exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn component_names(system: System) -> &'static [&'static str] {
    match system {
        System::String => &["v", "w"],
        System::Hyperbolic => &["u", "v"],
        System::Acoustic => &["v", "p", "rho"],
    }
}

fn frame_csv(state: &StateVector) -> String {
    let grid = state.grid();
    let mut out = String::from("x");
    for name in component_names(state.system()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..grid.points() {
        out.push_str(&fmt(grid.position(i)));
        for comp in state.components() {
            out.push(',');
            out.push_str(&fmt(comp.values()[i]));
        }
        out.push('\n');
    }
    out
}

fn norms_csv(result: &EvolutionResult) -> String {
    let mut out = String::from("t,norm");
    if result.energy_parts.is_some() {
        out.push_str(",acoustic_energy,entropy_energy");
    }
    out.push('\n');
    for (i, &t) in result.times.iter().enumerate() {
        out.push_str(&fmt(t));
        out.push(',');
        out.push_str(&fmt(result.norms[i]));
        if let Some(parts) = &result.energy_parts {
            out.push(',');
            out.push_str(&fmt(parts[i].0));
            out.push(',');
            out.push_str(&fmt(parts[i].1));
        }
        out.push('\n');
    }
    out
}

fn synthesize(
    cfg: &ScenarioConfig,
    truth: &EvolutionResult,
    times: &[f64],
) -> Result<MeasurementSeries> {
    let o = &cfg.observation;
    match cfg.system {
        System::String => synthesize_string_series(
            truth,
            o.x_obs,
            o.dx.expect("validated string config carries dx"),
            times,
            o.noise_sigma,
            o.seed,
        ),
        _ => synthesize_direct_series(truth, o.x_obs, times, o.noise_sigma, o.seed),
    }
}

fn spline_options(cfg: &ScenarioConfig) -> SplineOptions {
    SplineOptions {
        order: cfg.diagnostics.spline_order,
        knot_spacing: cfg.diagnostics.knot_spacing,
    }
}

/// Simulates the scenario and writes per-frame state CSVs, the norm track,
/// and the manifest.
pub fn cmd_simulate(cfg: &ScenarioConfig, out_dir: &Path) -> Result<()> {
    let state = cfg.initial_state()?;
    let times = cfg.frame_times()?;
    let result = evolve(&state, &times)?;

    ensure_dir(out_dir)?;
    for (i, frame) in result.states.iter().enumerate() {
        write_atomic(&out_dir.join(format!("state_{i:04}.csv")), &frame_csv(frame))?;
    }
    write_atomic(&out_dir.join("norms.csv"), &norms_csv(&result))?;
    write_json(&out_dir.join("manifest.json"), &manifest_for("simulate", cfg))
}

/// Calibrates the detection baseline δ from a pure right-wave scenario,
/// entirely in memory.
pub fn run_calibration(cfg: &ScenarioConfig, trials: usize) -> Result<CalibrationFile> {
    if let Some(i) = cfg.pulses.iter().position(|p| p.mode != Mode::Right) {
        return Err(Error::config(format!(
            "pulses[{i}]: calibration needs a pure right-wave scenario, found a {} pulse",
            cfg.pulses[i].mode
        )));
    }
    let state = cfg.initial_state()?;
    let truth = evolve(&state, &cfg.truth_times()?)?;
    let times = cfg.frame_times()?;
    let sampler = match cfg.stencil() {
        Some(s) => SamplerKind::Stencil { dx: s.dx },
        None => SamplerKind::Direct,
    };
    let scenario = CalibrationScenario {
        truth: &truth,
        sampler,
        x_obs: cfg.observation.x_obs,
        times: &times,
        sigma: cfg.observation.noise_sigma,
        base_seed: cfg.observation.seed,
    };
    let result = calibrate_delta(&scenario, trials)?;
    Ok(CalibrationFile {
        delta: result.delta,
        trials: result.trials,
        sigma: result.sigma_used,
        stencil: cfg.stencil(),
    })
}

/// Calibrates the detection baseline δ from a pure right-wave scenario and
/// writes `calibration.json`.
pub fn cmd_calibrate(cfg: &ScenarioConfig, trials: usize, out_dir: &Path) -> Result<()> {
    let file = run_calibration(cfg, trials)?;

    ensure_dir(out_dir)?;
    write_json(&out_dir.join("calibration.json"), &file)?;
    let mut manifest = manifest_for("calibrate", cfg);
    manifest.trials = Some(trials);
    write_json(&out_dir.join("manifest.json"), &manifest)
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONFIG_MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check_calibration_compatible(cfg: &ScenarioConfig, calib: &CalibrationFile) -> Result<()> {
    let matches = match (cfg.stencil(), &calib.stencil) {
        (None, None) => true,
        (Some(a), Some(b)) => rel_eq(a.dx, b.dx) && rel_eq(a.dt, b.dt),
        _ => false,
    };
    if !matches {
        return Err(Error::precondition(format!(
            "calibration stencil {:?} does not match the scenario stencil {:?}",
            calib.stencil,
            cfg.stencil()
        )));
    }
    if !rel_eq(cfg.observation.noise_sigma, calib.sigma) {
        return Err(Error::precondition(format!(
            "calibration noise level {} does not match observation.noise_sigma {}",
            calib.sigma, cfg.observation.noise_sigma
        )));
    }
    Ok(())
}

/// Dominant detected directed mode: larger weight wins, right breaks ties.
fn dominant_mode(report: &DiagnosticsReport) -> Option<Mode> {
    let has_right = report.detected.contains(&Mode::Right);
    let has_left = report.detected.contains(&Mode::Left);
    match (has_right, has_left) {
        (true, true) => {
            if report.weights.beta_hat > report.weights.alpha_hat {
                Some(Mode::Left)
            } else {
                Some(Mode::Right)
            }
        }
        (true, false) => Some(Mode::Right),
        (false, true) => Some(Mode::Left),
        (false, false) => None,
    }
}

fn waveform_csv(series: &MeasurementSeries, model: &crate::spline::SplineModel) -> String {
    let mut out = String::from("t,value\n");
    for &t in &series.times {
        out.push_str(&fmt(t));
        out.push(',');
        out.push_str(&fmt(model.evaluate(t)));
        out.push('\n');
    }
    out
}

/// In-memory result of the full inverse pipeline.
pub struct Diagnosis {
    pub report: DiagnosticsReport,
    pub series: MeasurementSeries,
    pub initial_state: StateVector,
}

/// Runs the full inverse pipeline (truth simulation → measurement
/// synthesis → detection → reconstruction → localization) entirely in
/// memory, against an already-loaded calibration.
pub fn run_diagnosis(cfg: &ScenarioConfig, calib: &CalibrationFile) -> Result<Diagnosis> {
    check_calibration_compatible(cfg, calib)?;

    let params = cfg.system_params()?;
    let state = cfg.initial_state()?;
    let truth = evolve(&state, &cfg.truth_times()?)?;
    let times = cfg.frame_times()?;
    let series = synthesize(cfg, &truth, &times)?;

    let mut report = detect(&series, &params, &calib.as_result(), cfg.diagnostics.kappa)?;
    let opts = spline_options(cfg);
    for mode in [Mode::Right, Mode::Left] {
        if report.detected.contains(&mode) {
            let model = reconstruct_waveform(&series, mode, &report, &params, &opts)?;
            report.waveform.insert(mode.to_string(), model);
        }
    }

    if let Some(mode) = dominant_mode(&report) {
        let model = &report.waveform[&mode.to_string()];
        let arrival = estimate_arrival(model, cfg.diagnostics.threshold_frac)?;
        let speed = cfg.directed_speed(cfg.observation.x_obs)?;
        let loc = localize_source(
            cfg.observation.x_obs,
            arrival,
            cfg.diagnostics.t_zero,
            speed,
            mode,
            cfg.diagnostics.delta_speed,
            cfg.diagnostics.delta_arrival,
        )?;
        report.arrival_time = Some(arrival);
        report.source_position = Some(loc.position);
        report.error_budget = loc.budget;
    }

    Ok(Diagnosis {
        report,
        series,
        initial_state: state,
    })
}

/// Runs the full inverse pipeline and writes `report.json`, per-mode
/// waveform CSVs, and optional plot data.
pub fn cmd_diagnose(cfg: &ScenarioConfig, calibration_path: &Path, out_dir: &Path) -> Result<()> {
    let calib: CalibrationFile = read_json(calibration_path)?;
    let Diagnosis {
        report,
        series,
        initial_state: state,
    } = run_diagnosis(cfg, &calib)?;
    let params = cfg.system_params()?;
    let dominant = dominant_mode(&report);

    ensure_dir(out_dir)?;
    write_json(&out_dir.join("report.json"), &report)?;
    for (name, model) in &report.waveform {
        write_atomic(
            &out_dir.join(format!("waveform_{name}.csv")),
            &waveform_csv(&series, model),
        )?;
    }
    if let Some(mode) = dominant {
        let model = &report.waveform[&mode.to_string()];
        write_atomic(&out_dir.join("waveform.csv"), &waveform_csv(&series, model))?;
    }
    if cfg.output.emit_plots {
        emit_plots(cfg, &params, &state, &series, &report, dominant, out_dir)?;
    }
    let mut manifest = manifest_for("diagnose", cfg);
    manifest.calibration = Some(&calib);
    write_json(&out_dir.join("manifest.json"), &manifest)
}

/// Plot data: raw series, projected mode tracks, and (when a directed mode
/// was reconstructed) the initial profile against the truth, plus a
/// gnuplot script that renders them.
fn emit_plots(
    cfg: &ScenarioConfig,
    params: &SystemParams,
    initial: &StateVector,
    series: &MeasurementSeries,
    report: &DiagnosticsReport,
    dominant: Option<Mode>,
    out_dir: &Path,
) -> Result<()> {
    write_atomic(&out_dir.join("plot_series.csv"), &series.to_csv())?;

    let right = project_series(series, Mode::Right, params)?;
    let left = project_series(series, Mode::Left, params)?;
    let entropy = if series.system == System::Acoustic {
        Some(project_series(series, Mode::Entropy, params)?)
    } else {
        None
    };
    let mut proj = String::from("t,right,left");
    if entropy.is_some() {
        proj.push_str(",entropy");
    }
    proj.push('\n');
    for i in 0..series.len() {
        proj.push_str(&fmt(series.times[i]));
        proj.push(',');
        proj.push_str(&fmt(right.phi[0][i]));
        proj.push(',');
        proj.push_str(&fmt(left.phi[0][i]));
        if let Some(e) = &entropy {
            proj.push(',');
            proj.push_str(&fmt(e.phi[2][i]));
        }
        proj.push('\n');
    }
    write_atomic(&out_dir.join("plot_projections.csv"), &proj)?;

    let mut plots = vec!["plot_series.csv", "plot_projections.csv"];
    if let Some(mode) = dominant {
        let model = &report.waveform[&mode.to_string()];
        let decomp = mode_decompose(initial)?;
        let truth_field = match mode {
            Mode::Right => &decomp.pi,
            _ => &decomp.lambda,
        };
        let grid = initial.grid();
        let speed = cfg.directed_speed(cfg.observation.x_obs)?;
        let mut rec = String::from("xi,truth,reconstructed\n");
        for i in 0..grid.points() {
            let xi = grid.position(i);
            let value = initial_profile_value(model, mode, cfg.observation.x_obs, speed, xi)?;
            rec.push_str(&fmt(xi));
            rec.push(',');
            rec.push_str(&fmt(truth_field.values()[i]));
            rec.push(',');
            rec.push_str(&fmt(value));
            rec.push('\n');
        }
        write_atomic(&out_dir.join("plot_reconstruction.csv"), &rec)?;
        plots.push("plot_reconstruction.csv");
    }

    let mut script = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset grid\n",
    );
    for file in plots {
        let base = file.trim_end_matches(".csv");
        script.push_str(&format!(
            "set terminal pngcairo size 900,600\nset output '{base}.png'\n\
             plot for [col=2:*] '{file}' using 1:col with lines\n"
        ));
    }
    write_atomic(&out_dir.join("plots.gp"), &script)
}

/// Sweepable configuration axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepAxis {
    Epsilon,
    Delta1,
    Delta2,
    Beta,
    NoiseSigma,
    Dx,
    Dt,
    Points,
}

impl SweepAxis {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "epsilon" => SweepAxis::Epsilon,
            "delta1" => SweepAxis::Delta1,
            "delta2" => SweepAxis::Delta2,
            "beta" => SweepAxis::Beta,
            "noise_sigma" => SweepAxis::NoiseSigma,
            "dx" => SweepAxis::Dx,
            "dt" => SweepAxis::Dt,
            "points" => SweepAxis::Points,
            other => {
                return Err(Error::config(format!(
                    "unknown sweep axis \"{other}\" (expected one of epsilon, delta1, \
                     delta2, beta, noise_sigma, dx, dt, points)"
                )))
            }
        })
    }

    fn check_system(self, system: System) -> Result<()> {
        let ok = match self {
            SweepAxis::Epsilon => system == System::Hyperbolic,
            SweepAxis::Delta1 | SweepAxis::Delta2 | SweepAxis::Beta => system == System::Acoustic,
            SweepAxis::Dx => system == System::String,
            SweepAxis::NoiseSigma | SweepAxis::Dt | SweepAxis::Points => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "sweep axis {self:?} does not apply to system {system:?}"
            )))
        }
    }

    fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::Epsilon => cfg.params.epsilon = Some(value),
            SweepAxis::Delta1 => cfg.params.delta1 = Some(value),
            SweepAxis::Delta2 => cfg.params.delta2 = Some(value),
            SweepAxis::Beta => cfg.params.beta = Some(value),
            SweepAxis::NoiseSigma => cfg.observation.noise_sigma = value,
            SweepAxis::Dx => cfg.observation.dx = Some(value),
            SweepAxis::Dt => cfg.observation.dt = value,
            SweepAxis::Points => {
                if !(value > 0.0) || value.fract() != 0.0 {
                    return Err(Error::config(format!(
                        "points sweep value must be a positive integer, got {value}"
                    )));
                }
                cfg.grid.points = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One assembled row of `sweep.csv`.
struct SweepRow {
    value: f64,
    commutator: Option<f64>,
    idem_right: f64,
    idem_left: f64,
    idem_entropy: Option<f64>,
    report: DiagnosticsReport,
}

fn sweep_header(system: System, axis_name: &str) -> String {
    let mut cols = vec![axis_name];
    if system == System::Hyperbolic {
        cols.push("commutator_norm");
    }
    cols.push("idempotency_right");
    cols.push("idempotency_left");
    if system == System::Acoustic {
        cols.push("idempotency_entropy");
    }
    cols.extend([
        "norm_total",
        "residual_left",
        "residual_right",
        "alpha_hat",
        "beta_hat",
        "detected_right",
        "detected_left",
    ]);
    if system == System::Acoustic {
        cols.push("detected_entropy");
    }
    cols.join(",")
}

fn sweep_row_csv(system: System, row: &SweepRow) -> String {
    let mut fields = vec![fmt(row.value)];
    if system == System::Hyperbolic {
        fields.push(fmt(row.commutator.unwrap_or(0.0)));
    }
    fields.push(fmt(row.idem_right));
    fields.push(fmt(row.idem_left));
    if system == System::Acoustic {
        fields.push(fmt(row.idem_entropy.unwrap_or(0.0)));
    }
    let r = &row.report;
    fields.push(fmt(r.norm_total));
    fields.push(fmt(r.residual_left));
    fields.push(fmt(r.residual_right));
    fields.push(fmt(r.weights.alpha_hat));
    fields.push(fmt(r.weights.beta_hat));
    let flag = |m: Mode| if r.detected.contains(&m) { "1" } else { "0" };
    fields.push(flag(Mode::Right).to_string());
    fields.push(flag(Mode::Left).to_string());
    if system == System::Acoustic {
        fields.push(flag(Mode::Entropy).to_string());
    }
    fields.join(",")
}

fn run_sweep_point(
    cfg: &ScenarioConfig,
    value: f64,
    calibration: Option<&CalibrationFile>,
    point_dir: &Path,
) -> Result<SweepRow> {
    let grid: Grid1D = cfg.grid()?;
    let params = cfg.system_params()?;
    let idem_right = idempotency_residual(&params, grid, Mode::Right)?;
    let idem_left = idempotency_residual(&params, grid, Mode::Left)?;
    let commutator = match &params {
        SystemParams::Hyperbolic(h) => Some(commutator_norm(h, grid)?),
        _ => None,
    };
    let idem_entropy = match &params {
        SystemParams::Acoustic(_) => Some(idempotency_residual(&params, grid, Mode::Entropy)?),
        _ => None,
    };

    let state = cfg.initial_state()?;
    let truth = evolve(&state, &cfg.truth_times()?)?;
    let times = cfg.frame_times()?;
    let series = synthesize(cfg, &truth, &times)?;
    let cal = calibration
        .map(CalibrationFile::as_result)
        .unwrap_or(CalibrationResult {
            delta: 0.0,
            trials: 0,
            sigma_used: cfg.observation.noise_sigma,
        });
    let report = detect(&series, &params, &cal, cfg.diagnostics.kappa)?;

    ensure_dir(point_dir)?;
    write_json(&point_dir.join("report.json"), &report)?;
    write_json(&point_dir.join("manifest.json"), &manifest_for("sweep-point", cfg))?;
    Ok(SweepRow {
        value,
        commutator,
        idem_right,
        idem_left,
        idem_entropy,
        report,
    })
}

/// Runs the pipeline once per axis value (in parallel up to `workers`
/// threads), writes one subdirectory per point, and assembles `sweep.csv`
/// in input order.
pub fn cmd_sweep(
    cfg: &ScenarioConfig,
    axis_name: &str,
    values: &[f64],
    workers: usize,
    calibration: Option<&CalibrationFile>,
    out_dir: &Path,
) -> Result<()> {
    let axis = SweepAxis::parse(axis_name)?;
    axis.check_system(cfg.system)?;
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let points: Vec<ScenarioConfig> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            axis.apply(cfg, v)
                .map_err(|e| Error::config(format!("values[{i}] = {v}: {e}")))
        })
        .collect::<Result<_>>()?;

    ensure_dir(out_dir)?;
    let n = points.len();
    let threads = workers.max(1).min(n);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SweepRow>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let point_dir = out_dir.join(format!("point_{i:03}"));
                let row = run_sweep_point(&points[i], values[i], calibration, &point_dir);
                results.lock().expect("sweep worker poisoned")[i] = Some(row);
            });
        }
    });

    let collected = results.into_inner().expect("sweep worker poisoned");
    let mut csv = sweep_header(cfg.system, axis_name);
    csv.push('\n');
    for slot in collected {
        let row = slot.expect("every sweep point was claimed by a worker")?;
        csv.push_str(&sweep_row_csv(cfg.system, &row));
        csv.push('\n');
    }
    write_atomic(&out_dir.join("sweep.csv"), &csv)?;

    let mut manifest = manifest_for("sweep", cfg);
    manifest.axis = Some(axis_name);
    manifest.values = Some(values);
    manifest.workers = Some(workers);
    manifest.calibration = calibration;
    write_json(&out_dir.join("manifest.json"), &manifest)
}

/// Loads a calibration file written by [`cmd_calibrate`].
pub fn load_calibration(path: &Path) -> Result<CalibrationFile> {
    read_json(path)
}
