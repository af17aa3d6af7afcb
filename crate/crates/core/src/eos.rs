//! Constant-heat-capacity constitutive laws.
//!
//! Every fluid with a volume-independent `c_v` has a fundamental relation of
//! the form
//!
//! ```text
//! u(s, v) = f1(v) * exp((s - s0) / c_v) - c_v * f2(v)
//! ```
//!
//! for two functions of molar volume `f1 > 0` and `f2`. [`ConstantCvEos`]
//! stores `c_v`, `s0` and the two volume functions together with their
//! analytic first and second derivatives; the ideal gas and the Van der Waals
//! gas are provided as ready-made instances.
//!
//! The quantity `ũ = f1(v) exp((s - s0)/c_v) = u + c_v f2(v) = c_v T` is
//! exposed as [`ConstantCvEos::shifted_energy`]. At fixed volume it differs
//! from `u` by a constant, so heat exchanged along an isochore is a
//! difference of shifted energies for every member of the family.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(s, v)` of the two-dimensional equilibrium state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoState {
    /// Molar entropy.
    pub s: f64,
    /// Molar volume.
    pub v: f64,
}

impl ThermoState {
    pub fn new(s: f64, v: f64) -> Self {
        ThermoState { s, v }
    }
}

/// Value of a volume function and its first two derivatives at one volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// A function of molar volume bundled with its analytic derivatives.
#[derive(Clone)]
pub struct VolumeFunction(Arc<dyn Fn(f64) -> Derivatives + Send + Sync>);

impl VolumeFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Derivatives + Send + Sync + 'static,
    {
        VolumeFunction(Arc::new(f))
    }

    pub fn zero() -> Self {
        VolumeFunction::new(|_| Derivatives {
            value: 0.0,
            first: 0.0,
            second: 0.0,
        })
    }

    fn eval(&self, v: f64) -> Derivatives {
        (self.0)(v)
    }
}

impl fmt::Debug for VolumeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VolumeFunction(..)")
    }
}

/// Open interval `(lower, upper)` of admissible molar volumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeDomain {
    pub lower: f64,
    pub upper: f64,
}

impl VolumeDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter(format!(
                "volume domain ({lower}, {upper}) is empty"
            )));
        }
        Ok(VolumeDomain { lower, upper })
    }

    pub fn above(lower: f64) -> Self {
        VolumeDomain {
            lower,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lower && v < self.upper
    }

    fn check(&self, v: f64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain {
                v,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// Interior sample volumes used for the construction-time `f1 > 0` scan.
    fn probe_points(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        (1..=count).map(move |i| {
            let t = i as f64 / (count + 1) as f64;
            if self.upper.is_finite() {
                self.lower + t * (self.upper - self.lower)
            } else {
                let scale = self.lower.abs().max(1.0);
                self.lower + scale * t / (1.0 - t)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealGasParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub cv: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanDerWaalsParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub cv: f64,
    pub s0: f64,
    pub a: f64,
    pub b: f64,
}

/// Which member of the family an equation of state is.
#[derive(Debug, Clone, PartialEq)]
pub enum EosModel {
    Ideal(IdealGasParams),
    VanDerWaals(VanDerWaalsParams),
    Custom(String),
}

/// Constitutive law `u = f1(v) e^((s - s0)/c_v) - c_v f2(v)`.
#[derive(Debug, Clone)]
pub struct ConstantCvEos {
    cv: f64,
    s0: f64,
    f1: VolumeFunction,
    f2: VolumeFunction,
    domain: VolumeDomain,
    model: EosModel,
}

/// Number of interior volumes scanned for `f1 > 0` when building an EOS.
const F1_PROBES: usize = 257;

/// `x^(-k)` and its first two derivatives.
fn inverse_power(x: f64, k: f64) -> Derivatives {
    let value = x.powf(-k);
    Derivatives {
        value,
        first: -k * value / x,
        second: k * (k + 1.0) * value / (x * x),
    }
}

impl ConstantCvEos {
    /// Builds a custom member of the family.
    ///
    /// Rejects `c_v <= 0` and any `f1` that is non-positive or non-finite at
    /// one of the probe volumes spread over `domain`.
    pub fn new(
        cv: f64,
        s0: f64,
        f1: VolumeFunction,
        f2: VolumeFunction,
        domain: VolumeDomain,
        label: impl Into<String>,
    ) -> Result<Self> {
        let eos = ConstantCvEos {
            cv,
            s0,
            f1,
            f2,
            domain,
            model: EosModel::Custom(label.into()),
        };
        eos.validate()?;
        Ok(eos)
    }

    /// Ideal gas with `u0 = v0 = 1`: `f1 = v^(-R/c_v)`, `f2 = 0`, `v > 0`.
    pub fn ideal(params: IdealGasParams) -> Result<Self> {
        if !(params.r > 0.0 && params.r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gas constant R must be positive, got {}",
                params.r
            )));
        }
        let k = params.r / params.cv;
        let eos = ConstantCvEos {
            cv: params.cv,
            s0: params.s0,
            f1: VolumeFunction::new(move |v| inverse_power(v, k)),
            f2: VolumeFunction::zero(),
            domain: VolumeDomain::above(0.0),
            model: EosModel::Ideal(params),
        };
        eos.validate()?;
        Ok(eos)
    }

    /// Van der Waals gas: `f1 = (v - b)^(-R/c_v)`, `f2 = a / (c_v v)`, `v > b`.
    pub fn van_der_waals(params: VanDerWaalsParams) -> Result<Self> {
        if !(params.r > 0.0 && params.r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gas constant R must be positive, got {}",
                params.r
            )));
        }
        if !(params.a > 0.0 && params.a.is_finite()) || !(params.b > 0.0 && params.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Van der Waals constants must be positive, got a = {}, b = {}",
                params.a, params.b
            )));
        }
        let VanDerWaalsParams { r, cv, a, b, .. } = params;
        let k = r / cv;
        let eos = ConstantCvEos {
            cv,
            s0: params.s0,
            f1: VolumeFunction::new(move |v| inverse_power(v - b, k)),
            f2: VolumeFunction::new(move |v| Derivatives {
                value: a / (cv * v),
                first: -a / (cv * v * v),
                second: 2.0 * a / (cv * v * v * v),
            }),
            domain: VolumeDomain::above(b),
            model: EosModel::VanDerWaals(params),
        };
        eos.validate()?;
        Ok(eos)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cv > 0.0 && self.cv.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c_v must be positive, got {}",
                self.cv
            )));
        }
        if !self.s0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "s0 must be finite, got {}",
                self.s0
            )));
        }
        for v in self.domain.probe_points(F1_PROBES) {
            let f1 = self.f1.eval(v).value;
            if !(f1 > 0.0 && f1.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "f1({v}) = {f1}; f1 must be positive on the whole domain"
                )));
            }
        }
        Ok(())
    }

    pub fn cv(&self) -> f64 {
        self.cv
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn domain(&self) -> VolumeDomain {
        self.domain
    }

    pub fn model(&self) -> &EosModel {
        &self.model
    }

    /// Short human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match &self.model {
            EosModel::Ideal(p) => format!("ideal(R={}, cv={}, s0={})", p.r, p.cv, p.s0),
            EosModel::VanDerWaals(p) => format!(
                "vdw(R={}, cv={}, s0={}, a={}, b={})",
                p.r, p.cv, p.s0, p.a, p.b
            ),
            EosModel::Custom(label) => format!("custom({label}, cv={}, s0={})", self.cv, self.s0),
        }
    }

    /// `f1(v)` and its derivatives; errors outside the domain.
    pub fn f1(&self, v: f64) -> Result<Derivatives> {
        self.domain.check(v)?;
        let d = self.f1.eval(v);
        if !(d.value > 0.0 && d.value.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "f1({v}) = {} is not positive",
                d.value
            )));
        }
        Ok(d)
    }

    /// `f2(v)` and its derivatives; errors outside the domain.
    pub fn f2(&self, v: f64) -> Result<Derivatives> {
        self.domain.check(v)?;
        Ok(self.f2.eval(v))
    }

    /// `exp((s - s0) / c_v)`.
    pub(crate) fn entropy_factor(&self, s: f64) -> f64 {
        ((s - self.s0) / self.cv).exp()
    }

    pub fn internal_energy(&self, st: ThermoState) -> Result<f64> {
        let f1 = self.f1(st.v)?.value;
        let f2 = self.f2(st.v)?.value;
        Ok(f1 * self.entropy_factor(st.s) - self.cv * f2)
    }

    /// `ũ = f1(v) e^((s - s0)/c_v) = u + c_v f2(v) = c_v T`.
    pub fn shifted_energy(&self, st: ThermoState) -> Result<f64> {
        Ok(self.f1(st.v)?.value * self.entropy_factor(st.s))
    }

    /// `T = (∂u/∂s)_v = (f1/c_v) e^((s - s0)/c_v)`.
    pub fn temperature(&self, st: ThermoState) -> Result<f64> {
        Ok(self.shifted_energy(st)? / self.cv)
    }

    /// `p = -(∂u/∂v)_s = -f1'(v) e^((s - s0)/c_v) + c_v f2'(v)`.
    pub fn pressure(&self, st: ThermoState) -> Result<f64> {
        let f1 = self.f1(st.v)?;
        let f2 = self.f2(st.v)?;
        Ok(-f1.first * self.entropy_factor(st.s) + self.cv * f2.first)
    }

    /// Inverse of [`temperature`](Self::temperature) at fixed volume:
    /// `s = s0 + c_v ln(c_v T / f1(v))`.
    pub fn entropy_at(&self, v: f64, temperature: f64) -> Result<f64> {
        let f1 = self.f1(v)?.value;
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::range(
                "temperature",
                temperature,
                "must be positive and finite",
            ));
        }
        Ok(self.s0 + self.cv * (self.cv * temperature / f1).ln())
    }

    pub fn state_at_temperature(&self, v: f64, temperature: f64) -> Result<ThermoState> {
        Ok(ThermoState::new(self.entropy_at(v, temperature)?, v))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, EosDocumentError> {
        let doc: EosDocument = serde_json::from_str(text)?;
        doc.build()
    }
}

/// JSON form of an equation of state:
/// `{"model": "ideal"|"vdw", "R": …, "cv": …, "s0": …, "a": …, "b": …}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosDocument {
    pub model: ModelName,
    #[serde(rename = "R")]
    pub r: f64,
    pub cv: f64,
    #[serde(default)]
    pub s0: f64,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ideal,
    Vdw,
}

#[derive(Debug, thiserror::Error)]
pub enum EosDocumentError {
    #[error("malformed EOS document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("malformed EOS document: {0}")]
    Schema(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl EosDocument {
    pub fn build(&self) -> std::result::Result<ConstantCvEos, EosDocumentError> {
        match self.model {
            ModelName::Ideal => {
                if self.a.is_some() || self.b.is_some() {
                    return Err(EosDocumentError::Schema(
                        "fields `a` and `b` are not accepted for the ideal model".into(),
                    ));
                }
                Ok(ConstantCvEos::ideal(IdealGasParams {
                    r: self.r,
                    cv: self.cv,
                    s0: self.s0,
                })?)
            }
            ModelName::Vdw => {
                let (Some(a), Some(b)) = (self.a, self.b) else {
                    return Err(EosDocumentError::Schema(
                        "the vdw model requires both `a` and `b`".into(),
                    ));
                };
                Ok(ConstantCvEos::van_der_waals(VanDerWaalsParams {
                    r: self.r,
                    cv: self.cv,
                    s0: self.s0,
                    a,
                    b,
                })?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const R: f64 = 8.314;
    const CV: f64 = 12.471;

    fn ideal() -> ConstantCvEos {
        ConstantCvEos::ideal(IdealGasParams {
            r: R,
            cv: CV,
            s0: 0.0,
        })
        .unwrap()
    }

    fn vdw() -> ConstantCvEos {
        ConstantCvEos::van_der_waals(VanDerWaalsParams {
            r: R,
            cv: CV,
            s0: 0.0,
            a: 0.1,
            b: 0.1,
        })
        .unwrap()
    }

    #[test]
    fn internal_energy_at_reference() {
        assert_eq!(
            ideal().internal_energy(ThermoState::new(0.0, 1.0)).unwrap(),
            1.0
        );
        let u = vdw().internal_energy(ThermoState::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(u, 0.9f64.powf(-R / CV) - 0.1, max_relative = 1e-15);
        let u = ideal().internal_energy(ThermoState::new(CV, 1.0)).unwrap();
        assert_relative_eq!(u, std::f64::consts::E, max_relative = 1e-15);
    }

    #[test]
    fn shifted_energy_adds_back_f2() {
        assert_eq!(
            ideal().shifted_energy(ThermoState::new(0.0, 1.0)).unwrap(),
            1.0
        );
        let ut = vdw().shifted_energy(ThermoState::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(ut, 0.9f64.powf(-R / CV), max_relative = 1e-15);
    }

    #[test]
    fn temperature_identities() {
        let eos = vdw();
        for &(s, v) in &[(0.0, 1.0), (-5.0, 0.3), (20.0, 4.0)] {
            let st = ThermoState::new(s, v);
            let t = eos.temperature(st).unwrap();
            assert!(t > 0.0);
            assert_relative_eq!(
                eos.shifted_energy(st).unwrap(),
                CV * t,
                max_relative = 1e-15
            );
            let via_u = eos.internal_energy(st).unwrap() / CV + eos.f2(v).unwrap().value;
            assert_relative_eq!(t, via_u, max_relative = 1e-13);
        }
        let t = ideal().temperature(ThermoState::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(t, 1.0 / CV, max_relative = 1e-15);
    }

    #[test]
    fn temperature_300_kelvin_by_bisection() {
        // root-find T(s) = 300 at v = 1 and compare with the closed-form inverse
        let eos = ideal();
        let (mut lo, mut hi) = (0.0, 200.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eos.temperature(ThermoState::new(mid, 1.0)).unwrap() < 300.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = CV * (300.0 * CV).ln();
        assert_relative_eq!(lo, expected, max_relative = 1e-13);
        assert_relative_eq!(
            eos.entropy_at(1.0, 300.0).unwrap(),
            expected,
            max_relative = 1e-15
        );
        let t = eos.temperature(ThermoState::new(expected, 1.0)).unwrap();
        assert_relative_eq!(t, 300.0, max_relative = 1e-13);
    }

    #[test]
    fn pressure_matches_gas_laws() {
        let eos = ideal();
        assert_relative_eq!(
            eos.pressure(ThermoState::new(0.0, 1.0)).unwrap(),
            R / CV,
            max_relative = 1e-15
        );
        let gas = vdw();
        for i in 0..8 {
            for j in 0..8 {
                let st = ThermoState::new(-10.0 + 5.0 * i as f64, 0.2 + 0.6 * j as f64);
                let t = eos.temperature(st).unwrap();
                assert_relative_eq!(
                    eos.pressure(st).unwrap(),
                    R * t / st.v,
                    max_relative = 1e-12
                );
                let t = gas.temperature(st).unwrap();
                let p = R * t / (st.v - 0.1) - 0.1 / (st.v * st.v);
                assert_relative_eq!(
                    gas.pressure(st).unwrap(),
                    p,
                    max_relative = 1e-10,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn ideal_energy_scales_out_volume() {
        let eos = ideal();
        for &s in &[-3.0, 0.0, 7.5] {
            let reference = eos.internal_energy(ThermoState::new(s, 1.0)).unwrap();
            for &v in &[0.1, 0.5, 2.0, 30.0] {
                let u = eos.internal_energy(ThermoState::new(s, v)).unwrap();
                assert_relative_eq!(u * v.powf(R / CV), reference, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let err = vdw()
            .internal_energy(ThermoState::new(0.0, 0.05))
            .unwrap_err();
        assert_eq!(err.code(), "DOMAIN_ERROR");
        assert!(ideal().f1(0.0).is_err());
        assert!(ideal().pressure(ThermoState::new(0.0, f64::NAN)).is_err());
        assert!(vdw().temperature(ThermoState::new(0.0, 0.1)).is_err());
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(ConstantCvEos::ideal(IdealGasParams {
            r: R,
            cv: 0.0,
            s0: 0.0
        })
        .is_err());
        assert!(ConstantCvEos::ideal(IdealGasParams {
            r: -1.0,
            cv: CV,
            s0: 0.0
        })
        .is_err());
        let bad = ConstantCvEos::van_der_waals(VanDerWaalsParams {
            r: R,
            cv: CV,
            s0: 0.0,
            a: 0.0,
            b: 0.1,
        });
        assert!(bad.is_err());

        // f1 changes sign inside (0, 2): caught by the construction scan
        let f1 = VolumeFunction::new(|v| Derivatives {
            value: 1.0 - v,
            first: -1.0,
            second: 0.0,
        });
        let domain = VolumeDomain::new(0.0, 2.0).unwrap();
        let err = ConstantCvEos::new(1.0, 0.0, f1, VolumeFunction::zero(), domain, "linear");
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn json_documents() {
        let eos =
            ConstantCvEos::from_json(r#"{"model":"ideal","R":8.314,"cv":12.471,"s0":0}"#).unwrap();
        assert!(matches!(eos.model(), EosModel::Ideal(_)));
        let eos =
            ConstantCvEos::from_json(r#"{"model":"vdw","R":8.314,"cv":12.471,"a":0.1,"b":0.1}"#)
                .unwrap();
        assert_eq!(eos.domain().lower, 0.1);

        for bad in [
            r#"{"model":"ideal","R":8.314,"cv":12.471,"gamma":1.4}"#,
            r#"{"model":"ideal","R":8.314,"cv":12.471,"a":0.1}"#,
            r#"{"model":"vdw","R":8.314,"cv":12.471,"a":0.1}"#,
            r#"{"model":"redlich","R":8.314,"cv":12.471}"#,
            r#"{"model":"ideal","cv":12.471}"#,
        ] {
            assert!(
                matches!(
                    ConstantCvEos::from_json(bad),
                    Err(EosDocumentError::Syntax(_) | EosDocumentError::Schema(_))
                ),
                "{bad}"
            );
        }
        assert!(matches!(
            ConstantCvEos::from_json(r#"{"model":"ideal","R":8.314,"cv":-1}"#),
            Err(EosDocumentError::Invalid(_))
        ));
    }
}
