//! Closed-form thermodynamic length and heat along isochores.
//!
//! At fixed volume the line element reduces to `sqrt(T/c_v) ds`, and for
//! the constant-`c_v` family this integrates exactly:
//!
//! ```text
//! L = 2 sqrt(f1(v)) [e^((s2 - s0)/(2 c_v)) - e^((s1 - s0)/(2 c_v))]
//!   = 2 (sqrt(ũ2) - sqrt(ũ1)) = 2 sqrt(c_v) (sqrt(T2) - sqrt(T1))
//! q = ũ2 - ũ1 = c_v (T2 - T1)
//! ```
//!
//! Lengths and heats are signed: both are positive when the process heats
//! the substance (`s2 > s1`) and negative when it cools it. Only differences
//! between two endpoints are reported, since the length is fixed only up to
//! an additive function of volume.
//!
//! Heat is expressed through the shifted energy `ũ = u + c_v f2(v)` rather
//! than `u`. The two coincide for the ideal gas; for the Van der Waals gas
//! `u` can be negative while `ũ = c_v T` cannot, and `sqrt(ũ2) - sqrt(ũ1)`
//! is the combination that matches the length.

use serde::{Deserialize, Serialize};

use crate::eos::{ConstantCvEos, ThermoState};
use crate::error::{Error, Result};
use crate::geometry::ProcessPath;

/// A quasi-static process at constant molar volume.
///
/// The entropy change is stored separately from the starting entropy so
/// processes built from nearby temperatures keep full relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsochoricProcess {
    v: f64,
    s1: f64,
    delta_s: f64,
}

impl IsochoricProcess {
    pub fn from_entropies(v: f64, s1: f64, s2: f64) -> Self {
        IsochoricProcess {
            v,
            s1,
            delta_s: s2 - s1,
        }
    }

    pub fn with_entropy_change(v: f64, s1: f64, delta_s: f64) -> Self {
        IsochoricProcess { v, s1, delta_s }
    }

    /// Process starting at the reference entropy `s0` and ending at `s2`.
    pub fn from_reference(eos: &ConstantCvEos, v: f64, s2: f64) -> Self {
        IsochoricProcess::from_entropies(v, eos.s0(), s2)
    }

    /// Process between two temperatures, using `s(T)` at fixed `v`.
    pub fn from_temperatures(eos: &ConstantCvEos, v: f64, t1: f64, t2: f64) -> Result<Self> {
        let s1 = eos.entropy_at(v, t1)?;
        if !(t2 > 0.0 && t2.is_finite()) {
            return Err(Error::range(
                "temperature",
                t2,
                "must be positive and finite",
            ));
        }
        // c_v ln(T2/T1), formed without cancellation when T2 ≈ T1
        let delta_s = eos.cv() * ((t2 - t1) / t1).ln_1p();
        Ok(IsochoricProcess { v, s1, delta_s })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn s2(&self) -> f64 {
        self.s1 + self.delta_s
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    pub fn temperatures(&self, eos: &ConstantCvEos) -> Result<(f64, f64)> {
        Ok((
            eos.temperature(ThermoState::new(self.s1, self.v))?,
            eos.temperature(ThermoState::new(self.s2(), self.v))?,
        ))
    }

    pub fn path(&self) -> ProcessPath {
        ProcessPath::Isochoric {
            v: self.v,
            s1: self.s1,
            s2: self.s2(),
        }
    }

    /// `ũ` at the starting state.
    fn initial_shifted_energy(&self, eos: &ConstantCvEos) -> Result<f64> {
        eos.shifted_energy(ThermoState::new(self.s1, self.v))
    }
}

/// Signed molar heat: `q > 0` flows into the substance, `q < 0` out of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatFlow {
    pub q: f64,
}

impl HeatFlow {
    pub fn new(q: f64) -> Self {
        HeatFlow { q }
    }

    pub fn is_inflow(&self) -> bool {
        self.q > 0.0
    }

    /// Heat of the same process run backwards, `q_out = -q_in`.
    pub fn reversed(&self) -> Self {
        HeatFlow { q: -self.q }
    }
}

/// Signed isochoric length `2 sqrt(ũ1) (e^(Δs/(2 c_v)) - 1)`.
pub fn isochoric_length(eos: &ConstantCvEos, process: &IsochoricProcess) -> Result<f64> {
    let u1 = process.initial_shifted_energy(eos)?;
    Ok(2.0 * u1.sqrt() * (process.delta_s / (2.0 * eos.cv())).exp_m1())
}

/// Heat absorbed along the isochore, `ũ1 (e^(Δs/c_v) - 1) = c_v (T2 - T1)`.
pub fn isochoric_heat(eos: &ConstantCvEos, process: &IsochoricProcess) -> Result<HeatFlow> {
    let u1 = process.initial_shifted_energy(eos)?;
    Ok(HeatFlow::new(u1 * (process.delta_s / eos.cv()).exp_m1()))
}

/// Heat of the isochoric process that starts at `s0` and has length `length`:
/// `q = (L/4) (L + 4 sqrt(f1(v)))`.
///
/// `length` must be at least `-2 sqrt(f1(v))`; a shorter cooling process
/// would have to end below zero temperature.
pub fn heat_from_length(eos: &ConstantCvEos, v: f64, length: f64) -> Result<HeatFlow> {
    let root = eos.f1(v)?.value.sqrt();
    if !length.is_finite() || length < -2.0 * root {
        return Err(Error::range(
            "length",
            length,
            format!(
                "must be finite and at least -2 sqrt(f1(v)) = {}",
                -2.0 * root
            ),
        ));
    }
    Ok(HeatFlow::new(0.25 * length * (length + 4.0 * root)))
}

/// Length of the isochoric process that starts at `s0` and absorbs `heat`:
/// `L = 2 (sqrt(f1(v) + q) - sqrt(f1(v)))`.
pub fn length_from_heat(eos: &ConstantCvEos, v: f64, heat: HeatFlow) -> Result<f64> {
    let f1 = eos.f1(v)?.value;
    let remaining = f1 + heat.q;
    if !heat.q.is_finite() || !(remaining > 0.0) {
        return Err(Error::range(
            "q",
            heat.q,
            format!("must exceed -f1(v) = {}", -f1),
        ));
    }
    // 2 q / (sqrt(f1 + q) + sqrt(f1)) avoids cancellation for small q
    Ok(2.0 * heat.q / (remaining.sqrt() + f1.sqrt()))
}

/// `L² + 4 sqrt(f1(v)) L - 4 q` for a process starting at `s0`.
pub fn theorem_residual(eos: &ConstantCvEos, v: f64, length: f64, heat: HeatFlow) -> Result<f64> {
    let root = eos.f1(v)?.value.sqrt();
    Ok(length * length + 4.0 * root * length - 4.0 * heat.q)
}

/// `|(dL/ds)² - (1/c_v) dq/ds|` with both slopes in closed form:
/// `dL/ds = (sqrt(f1)/c_v) e^((s - s0)/(2 c_v))` and `dq/ds = T`.
pub fn lemma_check(eos: &ConstantCvEos, v: f64, s: f64) -> Result<f64> {
    let cv = eos.cv();
    let length_slope = eos.f1(v)?.value.sqrt() / cv * ((s - eos.s0()) / (2.0 * cv)).exp();
    let heat_slope = eos.temperature(ThermoState::new(s, v))?;
    Ok((length_slope * length_slope - heat_slope / cv).abs())
}

/// Same residual with both slopes taken by central differences of step `h`
/// of [`isochoric_length`] and [`isochoric_heat`] (processes from `s0`).
pub fn lemma_fd_residual(eos: &ConstantCvEos, v: f64, s: f64, h: f64) -> Result<f64> {
    let length = |x: f64| isochoric_length(eos, &IsochoricProcess::from_reference(eos, v, x));
    let heat = |x: f64| Ok(isochoric_heat(eos, &IsochoricProcess::from_reference(eos, v, x))?.q);
    let dl = (length(s + h)? - length(s - h)?) / (2.0 * h);
    let dq = (heat(s + h)? - heat(s - h)?) / (2.0 * h);
    Ok((dl * dl - dq / eos.cv()).abs())
}

/// Particle mass and the derived factor `θ = m c_v / R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    mass: f64,
    cv: f64,
    theta: f64,
}

impl KineticParams {
    pub fn new(mass: f64, cv: f64, r: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::range("mass", mass, "must be positive and finite"));
        }
        if !(cv > 0.0) || !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c_v and R must be positive (c_v = {cv}, R = {r})"
            )));
        }
        Ok(KineticParams {
            mass,
            cv,
            theta: mass * cv / r,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Mean-square speed scale `v*` at temperature `t` in the kinetic form of
/// the isochoric length, `L = sqrt(θ/3) (sqrt(v*1) - sqrt(v*0))`.
///
/// That form equals `2 sqrt(c_v) (sqrt(T1) - sqrt(T0))` exactly when
/// `v* = 12 c_v T / θ = 12 R T / m`, four times the Maxwell–Boltzmann value
/// `3 R T / m`.
pub fn mean_square_speed(t: f64, kp: &KineticParams) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::range(
            "temperature",
            t,
            "must be positive and finite",
        ));
    }
    Ok(12.0 * kp.cv * t / kp.theta)
}

/// `sqrt(θ/3) (sqrt(v*1) - sqrt(v*0))`, evaluated as a difference quotient.
pub fn kinetic_length(kp: &KineticParams, speed0: f64, speed1: f64) -> f64 {
    let denom = speed1.sqrt() + speed0.sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (kp.theta / 3.0).sqrt() * (speed1 - speed0) / denom
}

/// JSON process description: `{"v", "s1", "s2"}` or `{"v", "T1", "T2"}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDocument {
    pub v: f64,
    #[serde(default)]
    pub s1: Option<f64>,
    #[serde(default)]
    pub s2: Option<f64>,
    #[serde(default, rename = "T1")]
    pub t1: Option<f64>,
    #[serde(default, rename = "T2")]
    pub t2: Option<f64>,
}

/// Where an isochoric process starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessStart {
    Entropy(f64),
    Temperature(f64),
}

impl ProcessDocument {
    /// Validates that exactly one endpoint pair is given and builds the process.
    pub fn to_process(&self, eos: &ConstantCvEos) -> Result<IsochoricProcess> {
        match (self.s1, self.s2, self.t1, self.t2) {
            (Some(s1), Some(s2), None, None) => {
                eos.f1(self.v)?;
                Ok(IsochoricProcess::from_entropies(self.v, s1, s2))
            }
            (None, None, Some(t1), Some(t2)) => {
                IsochoricProcess::from_temperatures(eos, self.v, t1, t2)
            }
            _ => Err(Error::InvalidParameter(
                "a process needs exactly one endpoint pair: s1/s2 or T1/T2".into(),
            )),
        }
    }

    /// The starting point alone, for sweeps that vary the end temperature.
    pub fn start(&self) -> Result<ProcessStart> {
        match (self.s1, self.t1) {
            (Some(s1), None) if self.t2.is_none() => Ok(ProcessStart::Entropy(s1)),
            (None, Some(t1)) if self.s2.is_none() => Ok(ProcessStart::Temperature(t1)),
            _ => Err(Error::InvalidParameter(
                "a process needs exactly one endpoint pair: s1/s2 or T1/T2".into(),
            )),
        }
    }
}
