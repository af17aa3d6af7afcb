//! Runtime verification of the closed-form identities on a grid of states.
//!
//! [`run_suite`] evaluates seven checks at every state of a [`GridSpec`] and
//! collects the worst residual of each into a [`VerificationReport`]:
//!
//! | id                          | identity                                              |
//! |-----------------------------|-------------------------------------------------------|
//! | `energy_ode`                | `∂²u/∂s² - (1/c_v) ∂u/∂s = 0` (finite differences)    |
//! | `length_ode`                | `∂²L/∂s² - (1/(2 c_v)) ∂L/∂s = 0` (finite differences)|
//! | `metric_forms`              | Hessian metric = response-coefficient metric          |
//! | `lemma`                     | `(dL/ds)² = (1/c_v) dq/ds`                            |
//! | `theorem`                   | `L² + 4 sqrt(f1) L - 4 q = 0` for processes from `s0` |
//! | `closed_form_vs_quadrature` | isochoric closed form vs adaptive quadrature          |
//! | `metric_psd_scan`           | metric PSD exactly where `(∂p/∂v)_T < 0`              |
//!
//! All residuals are relative. Each record passes when its worst residual
//! is at most its tolerance, and the report passes when every record does.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eos::{ConstantCvEos, ThermoState};
use crate::error::{Error, Result};
use crate::geometry::{
    metric_coefficient_form, metric_hessian, path_length, response_coefficients,
};
use crate::isochoric::{
    isochoric_heat, isochoric_length, lemma_check, theorem_residual, IsochoricProcess,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    /// Geometric in the distance to the lower edge of the EOS domain, which
    /// clusters points near the Van der Waals covolume.
    Log,
}

/// Inclusive range of `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl AxisRange {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        AxisRange {
            min,
            max,
            count,
            spacing: Spacing::Linear,
        }
    }

    fn points(&self, offset: f64) -> Result<Vec<f64>> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(Error::InvalidParameter(format!(
                "grid range [{}, {}] is not a finite ordered interval",
                self.min, self.max
            )));
        }
        let n = self.count;
        let t = move |i: usize| {
            if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.0
            }
        };
        match self.spacing {
            Spacing::Linear => Ok((0..n)
                .map(|i| self.min + t(i) * (self.max - self.min))
                .collect()),
            Spacing::Log => {
                let (lo, hi) = (self.min - offset, self.max - offset);
                if !(lo > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log spacing needs min above the domain edge {offset}, got {}",
                        self.min
                    )));
                }
                Ok((0..n).map(|i| offset + lo * (hi / lo).powf(t(i))).collect())
            }
        }
    }
}

/// States on which the suite runs: a product of a thermal axis (entropy or
/// temperature) and a volume axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<AxisRange>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<AxisRange>,
    pub v: AxisRange,
    /// Seeds the start entropies of the quadrature comparisons.
    #[serde(default)]
    pub seed: u64,
}

impl GridSpec {
    pub fn entropy_grid(s: AxisRange, v: AxisRange, seed: u64) -> Self {
        GridSpec {
            s: Some(s),
            t: None,
            v,
            seed,
        }
    }

    pub fn temperature_grid(t: AxisRange, v: AxisRange, seed: u64) -> Self {
        GridSpec {
            s: None,
            t: Some(t),
            v,
            seed,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// All grid states, volume-major.
    pub fn states(&self, eos: &ConstantCvEos) -> Result<Vec<ThermoState>> {
        let volumes = self.v.points(eos.domain().lower)?;
        for &v in &volumes {
            eos.f1(v)?;
        }
        let mut states = Vec::new();
        match (&self.s, &self.t) {
            (Some(s_axis), None) => {
                let entropies = s_axis.points(0.0)?;
                for &v in &volumes {
                    states.extend(entropies.iter().map(|&s| ThermoState::new(s, v)));
                }
            }
            (None, Some(t_axis)) => {
                let temperatures = t_axis.points(0.0)?;
                for &v in &volumes {
                    for &t in &temperatures {
                        states.push(eos.state_at_temperature(v, t)?);
                    }
                }
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "grid needs exactly one thermal axis: `s` or `T`".into(),
                ))
            }
        }
        Ok(states)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = |name: &str, a: &AxisRange| {
            format!(
                "{name}[{}, {}]x{}{}",
                a.min,
                a.max,
                a.count,
                if a.spacing == Spacing::Log {
                    " log"
                } else {
                    ""
                }
            )
        };
        if let Some(s) = &self.s {
            write!(f, "{} ", axis("s", s))?;
        }
        if let Some(t) = &self.t {
            write!(f, "{} ", axis("T", t))?;
        }
        write!(f, "{} seed={}", axis("v", &self.v), self.seed)
    }
}

/// Thresholds for each check, and the numerical settings the checks use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub energy_ode: f64,
    pub length_ode: f64,
    pub metric_forms: f64,
    pub lemma: f64,
    pub theorem: f64,
    pub closed_form_vs_quadrature: f64,
    /// Allowed number of states whose PSD flag disagrees with stability.
    pub psd_mismatches: f64,
    /// Finite-difference step in units of `c_v`.
    pub fd_step: f64,
    pub quadrature_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy_ode: 1e-8,
            length_ode: 1e-8,
            metric_forms: 1e-8,
            lemma: 1e-12,
            theorem: 1e-10,
            closed_form_vs_quadrature: 1e-8,
            psd_mismatches: 0.0,
            fd_step: 1e-2,
            quadrature_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub eos: String,
    pub grid: String,
    /// States that contributed a residual.
    pub samples: usize,
    /// States the check does not apply to (mechanically unstable).
    pub skipped: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indefinite_states: Option<Vec<ThermoState>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn record(&self, check_id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check_id == check_id)
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.records.first() {
            let _ = writeln!(out, "eos:  {}", first.eos);
            let _ = writeln!(out, "grid: {}", first.grid);
        }
        let _ = writeln!(
            out,
            "{:<27} {:>7} {:>7} {:>24} {:>24}  result",
            "check", "samples", "skipped", "max_residual", "tolerance"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:<27} {:>7} {:>7} {:>24.16e} {:>24.16e}  {}",
                r.check_id,
                r.samples,
                r.skipped,
                r.max_residual,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
            if let Some(states) = r.indefinite_states.as_ref().filter(|s| !s.is_empty()) {
                let _ = writeln!(out, "    {} indefinite state(s)", states.len());
            }
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

/// `(∂²f - k ∂f)` at `x` by central differences of step `h`.
fn ode_defect(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64, k: f64) -> Result<f64> {
    let (lo, mid, hi) = (f(x - h)?, f(x)?, f(x + h)?);
    let second = (hi - 2.0 * mid + lo) / (h * h);
    let first = (hi - lo) / (2.0 * h);
    Ok(second - k * first)
}

/// Finite-difference defect of `∂²u/∂s² - (1/c_v) ∂u/∂s` at `st`, step `h`.
pub fn energy_ode_residual(eos: &ConstantCvEos, st: ThermoState, h: f64) -> Result<f64> {
    let u = |s: f64| eos.internal_energy(ThermoState::new(s, st.v));
    ode_defect(u, st.s, h, 1.0 / eos.cv())
}

/// Finite-difference defect of `∂²L/∂s² - (1/(2 c_v)) ∂L/∂s`, where `L(s)` is
/// the isochoric length from `s0` to `s` at volume `st.v`.
pub fn length_ode_residual(eos: &ConstantCvEos, st: ThermoState, h: f64) -> Result<f64> {
    let length = |s: f64| isochoric_length(eos, &IsochoricProcess::from_reference(eos, st.v, s));
    ode_defect(length, st.s, h, 0.5 / eos.cv())
}

/// Running maximum of one check.
struct Tally {
    id: &'static str,
    tolerance: f64,
    samples: usize,
    skipped: usize,
    worst: f64,
}

impl Tally {
    fn new(id: &'static str, tolerance: f64) -> Self {
        Tally {
            id,
            tolerance,
            samples: 0,
            skipped: 0,
            worst: 0.0,
        }
    }

    fn push(&mut self, residual: f64) {
        self.samples += 1;
        // NaN must fail the check, so it wins the maximum
        if residual.is_nan() || residual > self.worst {
            self.worst = if residual.is_nan() {
                f64::INFINITY
            } else {
                residual
            };
        }
    }

    fn finish(self, eos: &str, grid: &str) -> CheckRecord {
        CheckRecord {
            check_id: self.id.to_string(),
            eos: eos.to_string(),
            grid: grid.to_string(),
            samples: self.samples,
            skipped: self.skipped,
            max_residual: self.worst,
            tolerance: self.tolerance,
            pass: self.worst <= self.tolerance,
            indefinite_states: None,
        }
    }
}

/// Runs every check on every grid state. Deterministic for a given EOS,
/// grid (including its seed) and tolerances.
pub fn run_suite(
    eos: &ConstantCvEos,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let states = grid.states(eos)?;
    if states.is_empty() {
        return Ok(VerificationReport {
            pass: true,
            records: Vec::new(),
        });
    }
    if !(tol.fd_step > 0.0) || !(tol.quadrature_rel_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "fd_step and quadrature_rel_tol must be positive".into(),
        ));
    }

    let cv = eos.cv();
    let h = tol.fd_step * cv;
    let (s_lo, s_hi) = states
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), st| {
            (lo.min(st.s), hi.max(st.s))
        });
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);

    let mut energy = Tally::new("energy_ode", tol.energy_ode);
    let mut length_ode = Tally::new("length_ode", tol.length_ode);
    let mut forms = Tally::new("metric_forms", tol.metric_forms);
    let mut lemma = Tally::new("lemma", tol.lemma);
    let mut theorem = Tally::new("theorem", tol.theorem);
    let mut quadrature = Tally::new("closed_form_vs_quadrature", tol.closed_form_vs_quadrature);
    let mut psd = Tally::new("metric_psd_scan", tol.psd_mismatches);
    let mut psd_mismatches = 0usize;
    let mut indefinite = Vec::new();

    for &st in &states {
        let t = eos.temperature(st)?;
        let slope_scale = t / cv;

        // Richardson combination of steps h and h/2 removes the O(h²) term
        let richardson = |r_h: f64, r_half: f64| (4.0 * r_half - r_h) / 3.0;
        let e = richardson(
            energy_ode_residual(eos, st, h)?,
            energy_ode_residual(eos, st, 0.5 * h)?,
        );
        energy.push(e.abs() / slope_scale);

        let l_slope = slope_scale.sqrt() / (2.0 * cv);
        let l = richardson(
            length_ode_residual(eos, st, h)?,
            length_ode_residual(eos, st, 0.5 * h)?,
        );
        length_ode.push(l.abs() / l_slope);

        let hessian = metric_hessian(eos, st)?;
        match metric_coefficient_form(eos, st) {
            Ok(coefficient) => forms.push(hessian.max_relative_difference(&coefficient)),
            Err(Error::Stability { .. }) => forms.skipped += 1,
            Err(other) => return Err(other),
        }

        lemma.push(lemma_check(eos, st.v, st.s)? / slope_scale);

        let from_reference = IsochoricProcess::from_reference(eos, st.v, st.s);
        let length = isochoric_length(eos, &from_reference)?;
        let heat = isochoric_heat(eos, &from_reference)?;
        theorem.push(theorem_residual(eos, st.v, length, heat)?.abs() / heat.q.abs().max(1.0));

        let s1 = if s_hi > s_lo {
            rng.gen_range(s_lo..=s_hi)
        } else {
            s_lo
        };
        let process = IsochoricProcess::from_entropies(st.v, s1, st.s);
        let closed = isochoric_length(eos, &process)?;
        let numeric = path_length(eos, &process.path(), tol.quadrature_rel_tol)?;
        quadrature.push((closed.abs() - numeric.length).abs() / closed.abs().max(1e-4));

        let is_psd = hessian.is_positive_semidefinite();
        let stable = match response_coefficients(eos, st) {
            Ok(_) => true,
            Err(Error::Stability { .. }) => false,
            Err(other) => return Err(other),
        };
        if !is_psd {
            indefinite.push(st);
        }
        if is_psd != stable {
            psd_mismatches += 1;
        }
        psd.samples += 1;
    }
    psd.worst = psd_mismatches as f64;

    let eos_label = eos.describe();
    let grid_label = grid.to_string();
    let mut records: Vec<CheckRecord> = [energy, length_ode, forms, lemma, theorem, quadrature]
        .into_iter()
        .map(|t| t.finish(&eos_label, &grid_label))
        .collect();
    let mut scan = psd.finish(&eos_label, &grid_label);
    scan.indefinite_states = Some(indefinite);
    records.push(scan);

    Ok(VerificationReport {
        pass: records.iter().all(|r| r.pass),
        records,
    })
}
