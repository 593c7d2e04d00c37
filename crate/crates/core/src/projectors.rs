//! Projection operators onto directed-wave subspaces for the three systems,
//! mode decomposition/recomposition, and projector-quality diagnostics.
//!
//! * String (`v = c·u_x`, `w = u_t`): constant matrices `P± = ½[[1,±1],[±1,1]]`.
//!   Exact projectors: idempotent, complete, mutually annihilating.
//! * Weakly inhomogeneous hyperbolic (`u`, `v`): supermatrix projectors
//!   `P₁,₂ = ½[[1, ±M⁻¹],[±M, 1]]` with `M = D⁻¹ f D`, `f = √(c/b)`. Exact
//!   when `c′b − b′c = 0` (constant `f`), accurate to O(ε) otherwise.
//! * Dissipative acoustic (`v`, `p`, `ρ`): first-order 3×3 operator matrices
//!   with spectral `D` entries, carrying every retained δ-order term, plus
//!   the entropy projector. `P₁+P₂+P₃` is the exact identity for any δ₂, β;
//!   idempotency of the individual projectors holds to O(δ²) only for the
//!   consistent choice of β (see [`beta_idempotency_scan`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_ops::{
    apply_m, apply_m_inv, derivative, CoefficientProfile, Grid1D, ScalarField,
};

/// Which of the three wave systems a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    String,
    Hyperbolic,
    Acoustic,
}

impl System {
    /// Number of state components (string/hyperbolic: 2, acoustic: 3).
    pub fn component_count(self) -> usize {
        match self {
            System::String | System::Hyperbolic => 2,
            System::Acoustic => 3,
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            System::String => "string",
            System::Hyperbolic => "hyperbolic",
            System::Acoustic => "acoustic",
        };
        f.write_str(s)
    }
}

/// Propagation direction of a wave mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
}

/// A directed or entropy mode (entropy exists only for the acoustic system).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Right,
    Left,
    Entropy,
}

impl From<Direction> for Mode {
    fn from(d: Direction) -> Mode {
        match d {
            Direction::Right => Mode::Right,
            Direction::Left => Mode::Left,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Right => "right",
            Mode::Left => "left",
            Mode::Entropy => "entropy",
        };
        f.write_str(s)
    }
}

/// Parameters of the string system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringParams {
    /// Wave speed `c > 0`.
    pub c: f64,
}

/// Parameters of the weakly inhomogeneous hyperbolic system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicParams {
    pub b_profile: CoefficientProfile,
    pub c_profile: CoefficientProfile,
    /// Scale of the off-diagonal evolution operator `L = [[0, εbD],[εcD, 0]]`
    /// used by the commutator diagnostics. The transport speed of the system
    /// is `√(b·c)` itself.
    pub epsilon: f64,
}

/// Physical inputs from which the acoustic dissipation numbers derive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInputs {
    pub mu: f64,
    pub kappa: f64,
    pub c_p: f64,
    pub c_v: f64,
    pub rho0: f64,
    pub c0: f64,
    /// Characteristic scale λ of the longitudinal perturbation.
    pub lambda_scale: f64,
}

/// Parameters of the dissipative acoustic system.
///
/// `beta` enters the first-order projector family as a free parameter.
/// [`beta_idempotency_scan`] reports the idempotency residual as a function
/// of β so the consistent value can be identified empirically (it sits at
/// `β = δ₁ + δ₂`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticParams {
    /// Adiabatic index `γ = c_p/c_v > 1`.
    pub gamma: f64,
    /// Viscous dissipation number `δ₁ = 4μ/(3ρ₀c₀λ) ≥ 0`.
    pub delta1: f64,
    /// Thermal dissipation number `δ₂ = (κ/(ρ₀c₀λ))(1/c_v − 1/c_p) ≥ 0`.
    pub delta2: f64,
    /// Projector dissipation parameter (see type-level docs).
    pub beta: f64,
}

impl AcousticParams {
    pub fn new(gamma: f64, delta1: f64, delta2: f64, beta: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::precondition(format!("gamma must exceed 1, got {gamma}")));
        }
        if delta1 < 0.0 || delta2 < 0.0 {
            return Err(Error::precondition(format!(
                "dissipation numbers must be >= 0, got delta1={delta1}, delta2={delta2}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::precondition("beta must be finite"));
        }
        Ok(AcousticParams {
            gamma,
            delta1,
            delta2,
            beta,
        })
    }

    /// Derives `γ`, `δ₁`, `δ₂` from physical fluid constants.
    pub fn from_physical(ph: &PhysicalInputs, beta: f64) -> Result<Self> {
        for (name, v) in [
            ("mu", ph.mu),
            ("kappa", ph.kappa),
            ("c_p", ph.c_p),
            ("c_v", ph.c_v),
            ("rho0", ph.rho0),
            ("c0", ph.c0),
            ("lambda_scale", ph.lambda_scale),
        ] {
            if !(v.is_finite()) || v < 0.0 {
                return Err(Error::precondition(format!(
                    "physical input {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(ph.c_p > ph.c_v) || ph.c_v <= 0.0 {
            return Err(Error::precondition("physical inputs require c_p > c_v > 0"));
        }
        if ph.rho0 <= 0.0 || ph.c0 <= 0.0 || ph.lambda_scale <= 0.0 {
            return Err(Error::precondition(
                "physical inputs require rho0, c0, lambda_scale > 0",
            ));
        }
        let denom = ph.rho0 * ph.c0 * ph.lambda_scale;
        let delta1 = 4.0 * ph.mu / (3.0 * denom);
        let delta2 = ph.kappa / denom * (1.0 / ph.c_v - 1.0 / ph.c_p);
        let gamma = ph.c_p / ph.c_v;
        AcousticParams::new(gamma, delta1, delta2, beta)
    }

    /// Checks that explicitly given numbers agree with the physical inputs
    /// to 1e-12 (relative to the derived values, absolute below 1).
    pub fn check_against_physical(&self, ph: &PhysicalInputs) -> Result<()> {
        let derived = AcousticParams::from_physical(ph, self.beta)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        if !close(self.delta1, derived.delta1)
            || !close(self.delta2, derived.delta2)
            || !close(self.gamma, derived.gamma)
        {
            return Err(Error::precondition(format!(
                "acoustic parameters disagree with physical inputs: \
                 (gamma, delta1, delta2) = ({}, {}, {}) vs derived ({}, {}, {})",
                self.gamma, self.delta1, self.delta2, derived.gamma, derived.delta1, derived.delta2
            )));
        }
        Ok(())
    }
}

/// System-tagged parameter bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SystemParams {
    String(StringParams),
    Hyperbolic(HyperbolicParams),
    Acoustic(AcousticParams),
}

impl SystemParams {
    pub fn system(&self) -> System {
        match self {
            SystemParams::String(_) => System::String,
            SystemParams::Hyperbolic(_) => System::Hyperbolic,
            SystemParams::Acoustic(_) => System::Acoustic,
        }
    }
}

/// 2- or 3-component field bundle on a shared grid.
///
/// Component meaning by system: string `(v, w)` with `v = c·u_x`, `w = u_t`;
/// hyperbolic `(u, v)`; acoustic `(v, p, ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    params: SystemParams,
    components: Vec<ScalarField>,
}

impl StateVector {
    pub fn new(params: SystemParams, components: Vec<ScalarField>) -> Result<Self> {
        let expected = params.system().component_count();
        if components.len() != expected {
            return Err(Error::precondition(format!(
                "{} state needs {} components, got {}",
                params.system(),
                expected,
                components.len()
            )));
        }
        let grid = components[0].grid();
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::precondition("state components must share one grid"));
        }
        if let SystemParams::String(s) = &params {
            if !(s.c > 0.0) || !s.c.is_finite() {
                return Err(Error::precondition(format!(
                    "string wave speed must be positive, got {}",
                    s.c
                )));
            }
        }
        Ok(StateVector { params, components })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn system(&self) -> System {
        self.params.system()
    }

    pub fn grid(&self) -> Grid1D {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    /// Discrete L² norm over all components: `sqrt(Σ_comp ‖comp‖²)`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let n = c.l2_norm();
                n * n
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        StateVector {
            params: self.params.clone(),
            components: self.components.iter().map(|c| c.scale(a)).collect(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Self {
        StateVector {
            params: self.params.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        StateVector {
            params: self.params.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub(crate) fn with_components(&self, components: Vec<ScalarField>) -> Self {
        debug_assert_eq!(components.len(), self.components.len());
        StateVector {
            params: self.params.clone(),
            components,
        }
    }
}

/// Directed-wave amplitudes of a state, plus the entropy amplitude for the
/// acoustic system.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub pi: ScalarField,
    pub lambda: ScalarField,
    pub entropy: Option<ScalarField>,
    pub params: SystemParams,
}

fn expect_string(state: &StateVector, who: &str) -> Result<StringParams> {
    match state.params() {
        SystemParams::String(p) => Ok(*p),
        other => Err(Error::precondition(format!(
            "{who} expects a string state, got {}",
            other.system()
        ))),
    }
}

fn expect_hyperbolic<'a>(state: &'a StateVector, who: &str) -> Result<&'a HyperbolicParams> {
    match state.params() {
        SystemParams::Hyperbolic(p) => Ok(p),
        other => Err(Error::precondition(format!(
            "{who} expects a hyperbolic state, got {}",
            other.system()
        ))),
    }
}

fn expect_acoustic(state: &StateVector, who: &str) -> Result<AcousticParams> {
    match state.params() {
        SystemParams::Acoustic(p) => Ok(*p),
        other => Err(Error::precondition(format!(
            "{who} expects an acoustic state, got {}",
            other.system()
        ))),
    }
}

/// Applies the string projector `P± = ½[[1,±1],[±1,1]]` pointwise.
///
/// Output components are `(Π, Π)` for right and `(Λ, −Λ)` for left.
pub fn string_project(state: &StateVector, direction: Direction) -> Result<StateVector> {
    expect_string(state, "string_project")?;
    let v = state.component(0);
    let w = state.component(1);
    let out = match direction {
        Direction::Right => {
            let pi = v.zip_with(w, |v, w| 0.5 * (v + w));
            vec![pi.clone(), pi]
        }
        Direction::Left => {
            let lam = v.zip_with(w, |v, w| 0.5 * (v - w));
            let neg = lam.scale(-1.0);
            vec![lam, neg]
        }
    };
    Ok(state.with_components(out))
}

/// Samples `f = √(c/b)` for a hyperbolic parameter set.
pub(crate) fn hyperbolic_f_field(params: &HyperbolicParams, grid: Grid1D) -> Result<ScalarField> {
    let b = params.b_profile.sample(grid)?;
    let c = params.c_profile.sample(grid)?;
    Ok(b.zip_with(&c, |b, c| (c / b).sqrt()))
}

/// Applies the supermatrix projector `½[[1, ±M⁻¹],[±M, 1]]` with
/// `M = D⁻¹ f D`, `f = √(c/b)`.
///
/// Right output is `(Π, MΠ)`, left output `(Λ, −MΛ)`.
pub fn hyperbolic_project(state: &StateVector, direction: Direction) -> Result<StateVector> {
    let params = expect_hyperbolic(state, "hyperbolic_project")?;
    let f = hyperbolic_f_field(params, state.grid())?;
    let u = state.component(0);
    let v = state.component(1);
    let m_inv_v = apply_m_inv(&f, v)?;
    let out = match direction {
        Direction::Right => {
            let pi = u.zip_with(&m_inv_v, |u, m| 0.5 * (u + m));
            let m_pi = apply_m(&f, &pi)?;
            vec![pi, m_pi]
        }
        Direction::Left => {
            let lam = u.zip_with(&m_inv_v, |u, m| 0.5 * (u - m));
            let m_lam = apply_m(&f, &lam)?.scale(-1.0);
            vec![lam, m_lam]
        }
    };
    Ok(state.with_components(out))
}

/// Dissipation-order coefficients shared by the acoustic projectors.
struct AcousticCoeffs {
    /// `δ₂/(2(γ−1))`.
    e: f64,
    /// `δ₂/2 − β/4`.
    q: f64,
    /// `β/4 − γδ₂/(2(γ−1))`.
    r: f64,
    /// `β/4 − δ₂/(2(γ−1))`.
    w: f64,
    delta2: f64,
}

impl AcousticCoeffs {
    fn new(p: &AcousticParams) -> Self {
        let e = p.delta2 / (2.0 * (p.gamma - 1.0));
        AcousticCoeffs {
            e,
            q: p.delta2 / 2.0 - p.beta / 4.0,
            r: p.beta / 4.0 - p.gamma * p.delta2 / (2.0 * (p.gamma - 1.0)),
            w: p.beta / 4.0 - e,
            delta2: p.delta2,
        }
    }
}

/// Applies one of the first-order 3×3 acoustic projectors with spectral `D`
/// entries, keeping every retained δ-order term exactly.
pub fn acoustic_project(state: &StateVector, mode: Mode) -> Result<StateVector> {
    let params = expect_acoustic(state, "acoustic_project")?;
    let k = AcousticCoeffs::new(&params);
    let v = state.component(0);
    let p = state.component(1);
    let rho = state.component(2);
    let dv = derivative(v);
    let dp = derivative(p);
    let drho = derivative(rho);

    let out = match mode {
        Mode::Right | Mode::Left => {
            let s = if mode == Mode::Right { 1.0 } else { -1.0 };
            let n = state.grid().points();
            let mut out_v = Vec::with_capacity(n);
            let mut out_p = Vec::with_capacity(n);
            let mut out_r = Vec::with_capacity(n);
            for j in 0..n {
                // ρ enters the directed rows only through its derivative.
                let (vj, pj) = (v.values()[j], p.values()[j]);
                let (dvj, dpj, drj) = (dv.values()[j], dp.values()[j], drho.values()[j]);
                out_v.push(0.5 * vj + s * k.q * dvj + s * 0.5 * pj - k.e * dpj + k.e * drj);
                out_p.push(s * 0.5 * vj + 0.5 * pj + s * k.r * dpj + s * k.e * drj);
                out_r.push(
                    s * 0.5 * vj + 0.5 * k.delta2 * dvj + 0.5 * pj + s * k.w * dpj + s * k.e * drj,
                );
            }
            let grid = state.grid();
            vec![
                ScalarField::from_values(grid, out_v),
                ScalarField::from_values(grid, out_p),
                ScalarField::from_values(grid, out_r),
            ]
        }
        Mode::Entropy => {
            let grid = state.grid();
            let out_v = dp.zip_with(&drho, |a, b| 2.0 * k.e * (a - b));
            let out_p = ScalarField::zeros(grid);
            let out_r = dv.zip_with(&p.sub(rho), |a, b| -k.delta2 * a - b);
            vec![out_v, out_p, out_r]
        }
    };
    Ok(state.with_components(out))
}

/// Projects a state onto one mode, dispatching on the system.
pub fn project(state: &StateVector, mode: Mode) -> Result<StateVector> {
    match state.system() {
        System::String | System::Hyperbolic => {
            let dir = match mode {
                Mode::Right => Direction::Right,
                Mode::Left => Direction::Left,
                Mode::Entropy => {
                    return Err(Error::precondition(
                        "entropy mode exists only for the acoustic system",
                    ))
                }
            };
            if state.system() == System::String {
                string_project(state, dir)
            } else {
                hyperbolic_project(state, dir)
            }
        }
        System::Acoustic => acoustic_project(state, mode),
    }
}

/// Splits a state into directed-mode amplitudes.
///
/// String: `Π = ½(v+w)`, `Λ = ½(v−w)`. Hyperbolic: `Π = ½(u + M⁻¹v)`,
/// `Λ = ½(u − M⁻¹v)`. Acoustic: `Π`, `Λ` are the `v`-components of the
/// right/left projections and `s` is the `ρ`-component of the entropy
/// projection (the leading-order carrier rows of each mode).
pub fn mode_decompose(state: &StateVector) -> Result<ModeDecomposition> {
    match state.system() {
        System::String => {
            let v = state.component(0);
            let w = state.component(1);
            Ok(ModeDecomposition {
                pi: v.zip_with(w, |v, w| 0.5 * (v + w)),
                lambda: v.zip_with(w, |v, w| 0.5 * (v - w)),
                entropy: None,
                params: state.params().clone(),
            })
        }
        System::Hyperbolic => {
            let params = expect_hyperbolic(state, "mode_decompose")?;
            let f = hyperbolic_f_field(params, state.grid())?;
            let u = state.component(0);
            let m_inv_v = apply_m_inv(&f, state.component(1))?;
            Ok(ModeDecomposition {
                pi: u.zip_with(&m_inv_v, |u, m| 0.5 * (u + m)),
                lambda: u.zip_with(&m_inv_v, |u, m| 0.5 * (u - m)),
                entropy: None,
                params: state.params().clone(),
            })
        }
        System::Acoustic => {
            let right = acoustic_project(state, Mode::Right)?;
            let left = acoustic_project(state, Mode::Left)?;
            let ent = acoustic_project(state, Mode::Entropy)?;
            Ok(ModeDecomposition {
                pi: right.component(0).clone(),
                lambda: left.component(0).clone(),
                entropy: Some(ent.component(2).clone()),
                params: state.params().clone(),
            })
        }
    }
}

/// Rebuilds a state from mode amplitudes.
///
/// String: `(v, w) = (Π+Λ, Π−Λ)` (exact inverse of [`mode_decompose`]).
/// Hyperbolic: `(u, v) = (Π+Λ, M(Π−Λ))`. Acoustic: the sum of the three
/// projected states, each reconstructed by applying the mode's projector to
/// a first-order-corrected carrier of its amplitude; the round trip
/// `mode_compose(mode_decompose(ψ))` returns ψ to O(δ²).
pub fn mode_compose(d: &ModeDecomposition) -> Result<StateVector> {
    match &d.params {
        SystemParams::String(_) => {
            let v = d.pi.add(&d.lambda);
            let w = d.pi.sub(&d.lambda);
            StateVector::new(d.params.clone(), vec![v, w])
        }
        SystemParams::Hyperbolic(p) => {
            let f = hyperbolic_f_field(p, d.pi.grid())?;
            let u = d.pi.add(&d.lambda);
            let v = apply_m(&f, &d.pi.sub(&d.lambda))?;
            StateVector::new(d.params.clone(), vec![u, v])
        }
        SystemParams::Acoustic(p) => {
            let k = AcousticCoeffs::new(p);
            let grid = d.pi.grid();
            // First-order inverse of the v-row carrier maps g ↦ g ± q·Dg.
            let h_plus = d.pi.sub(&derivative(&d.pi).scale(k.q));
            let h_minus = d.lambda.add(&derivative(&d.lambda).scale(k.q));
            let carrier_plus = StateVector::new(
                d.params.clone(),
                vec![h_plus.clone(), h_plus.clone(), h_plus],
            )?;
            let carrier_minus = StateVector::new(
                d.params.clone(),
                vec![h_minus.clone(), h_minus.scale(-1.0), h_minus.scale(-1.0)],
            )?;
            let s = d
                .entropy
                .clone()
                .ok_or_else(|| Error::precondition("acoustic decomposition lacks entropy mode"))?;
            let carrier_ent = StateVector::new(
                d.params.clone(),
                vec![ScalarField::zeros(grid), ScalarField::zeros(grid), s],
            )?;
            let right = acoustic_project(&carrier_plus, Mode::Right)?;
            let left = acoustic_project(&carrier_minus, Mode::Left)?;
            let ent = acoustic_project(&carrier_ent, Mode::Entropy)?;
            Ok(right.add(&left).add(&ent))
        }
    }
}

/// Removes the component means of a state (the antidifferentiation gauge:
/// constants are unobservable through `D⁻¹`-based operators).
fn center_components(state: &StateVector) -> StateVector {
    let comps = state
        .components()
        .iter()
        .map(|c| {
            let m = c.mean();
            c.map(|v| v - m)
        })
        .collect();
    state.with_components(comps)
}

/// Deterministic probe set for operator-norm estimates: localized Gaussian
/// pulses of varied widths and centers, injected alternately into each
/// state component.
fn probe_states(params: &SystemParams, grid: Grid1D) -> Vec<StateVector> {
    let length = grid.length();
    let widths: Vec<f64> = [64.0, 48.0, 32.0, 24.0, 16.0]
        .iter()
        .map(|d| (length / d).max(5.0 * grid.spacing()))
        .collect();
    let centers = [-length / 10.0, length / 16.0];
    let ncomp = params.system().component_count();
    let mut probes = Vec::with_capacity(10);
    for (i, &center) in centers.iter().enumerate() {
        for (j, &width) in widths.iter().enumerate() {
            let pulse = ScalarField::from_fn(grid, |x| {
                let d = x - center;
                (-(d * d) / (2.0 * width * width)).exp()
            });
            let comp_idx = (i * widths.len() + j) % ncomp;
            let components = (0..ncomp)
                .map(|c| {
                    if c == comp_idx {
                        pulse.clone()
                    } else {
                        ScalarField::zeros(grid)
                    }
                })
                .collect();
            probes.push(StateVector::new(params.clone(), components).expect("probe state"));
        }
    }
    probes
}

/// Applies the hyperbolic evolution operator `L = [[0, εbD],[εcD, 0]]`.
fn apply_hyperbolic_l(params: &HyperbolicParams, state: &StateVector) -> Result<StateVector> {
    let grid = state.grid();
    let b = params.b_profile.sample(grid)?;
    let c = params.c_profile.sample(grid)?;
    let du = derivative(state.component(0));
    let dv = derivative(state.component(1));
    let eps = params.epsilon;
    let first = b.zip_with(&dv, |b, dv| eps * b * dv);
    let second = c.zip_with(&du, |c, du| eps * c * du);
    Ok(state.with_components(vec![first, second]))
}

/// Estimates the operator norm of the commutator `[P₁, L]` for the
/// hyperbolic system as the max over a fixed probe set of localized pulses
/// of `‖(P₁L − LP₁)g‖ / ‖g‖`.
///
/// Component means of the commutator output are removed before taking the
/// norm: the zero-mean gauge of `D⁻¹` makes constant offsets unobservable,
/// and for commuting profiles (`c′b − b′c = 0`) the residual mean terms are
/// exactly constant.
pub fn commutator_norm(params: &HyperbolicParams, grid: Grid1D) -> Result<f64> {
    params.b_profile.validate_on(grid)?;
    params.c_profile.validate_on(grid)?;
    let sys = SystemParams::Hyperbolic(params.clone());
    let mut worst: f64 = 0.0;
    for probe in probe_states(&sys, grid) {
        let pl = hyperbolic_project(&apply_hyperbolic_l(params, &probe)?, Direction::Right)?;
        let lp = apply_hyperbolic_l(params, &hyperbolic_project(&probe, Direction::Right)?)?;
        let resid = center_components(&pl.sub(&lp));
        worst = worst.max(resid.l2_norm() / probe.l2_norm());
    }
    Ok(worst)
}

/// One point of the β scan: the idempotency residual of the acoustic
/// projectors at a given β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaScanPoint {
    pub beta: f64,
    pub residual: f64,
}

/// Measures `max ‖P(Pψ) − Pψ‖ / ‖ψ‖` over the probe set and over the
/// right/left projectors, for each candidate β.
///
/// β is a free parameter of the projector family; this scan lets the user
/// locate the value that makes the family consistent (empirically
/// `β = δ₁ + δ₂`).
pub fn beta_idempotency_scan(
    params: &AcousticParams,
    grid: Grid1D,
    betas: &[f64],
) -> Result<Vec<BetaScanPoint>> {
    let mut out = Vec::with_capacity(betas.len());
    for &beta in betas {
        let p = AcousticParams { beta, ..*params };
        let sys = SystemParams::Acoustic(p);
        let mut worst: f64 = 0.0;
        for probe in probe_states(&sys, grid) {
            for mode in [Mode::Right, Mode::Left] {
                let once = acoustic_project(&probe, mode)?;
                let twice = acoustic_project(&once, mode)?;
                worst = worst.max(twice.sub(&once).l2_norm() / probe.l2_norm());
            }
        }
        out.push(BetaScanPoint {
            beta,
            residual: worst,
        });
    }
    Ok(out)
}

/// Idempotency residual of one projector on the probe set:
/// `max ‖P(Pψ) − Pψ‖ / ‖ψ‖`.
pub fn idempotency_residual(params: &SystemParams, grid: Grid1D, mode: Mode) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for probe in probe_states(params, grid) {
        let once = project(&probe, mode)?;
        let twice = project(&once, mode)?;
        worst = worst.max(twice.sub(&once).l2_norm() / probe.l2_norm());
    }
    Ok(worst)
}
