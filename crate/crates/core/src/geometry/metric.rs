use serde::Serialize;

use crate::eos::{ConstantCvEos, ThermoState};
use crate::error::{Error, Result};

/// Symmetric 2×2 Weinhold metric in `(s, v)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricTensor {
    pub eta11: f64,
    pub eta12: f64,
    pub eta22: f64,
}

impl MetricTensor {
    pub fn determinant(&self) -> f64 {
        self.eta11 * self.eta22 - self.eta12 * self.eta12
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.eta11 >= 0.0 && self.eta22 >= 0.0 && self.determinant() >= 0.0
    }

    /// `η11 ṡ² + 2 η12 ṡ v̇ + η22 v̇²`.
    pub fn quadratic_form(&self, ds: f64, dv: f64) -> f64 {
        self.eta11 * ds * ds + 2.0 * self.eta12 * ds * dv + self.eta22 * dv * dv
    }

    /// Largest component-wise relative difference to `other`.
    pub fn max_relative_difference(&self, other: &MetricTensor) -> f64 {
        [
            (self.eta11, other.eta11),
            (self.eta12, other.eta12),
            (self.eta22, other.eta22),
        ]
        .iter()
        .map(|&(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
    }
}

/// Response functions entering the coefficient form of the metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseCoefficients {
    /// Molar heat capacity at constant pressure.
    pub cp: f64,
    /// Thermal expansion coefficient.
    pub alpha: f64,
    /// Isothermal compressibility.
    pub kappa_t: f64,
}

/// Exact Hessian of `u(s, v)`:
///
/// ```text
/// η11 = f1 e / c_v²,  η12 = f1' e / c_v,  η22 = f1'' e - c_v f2''
/// ```
///
/// with `e = exp((s - s0)/c_v)`.
pub fn metric_hessian(eos: &ConstantCvEos, st: ThermoState) -> Result<MetricTensor> {
    let f1 = eos.f1(st.v)?;
    let f2 = eos.f2(st.v)?;
    let e = eos.entropy_factor(st.s);
    let cv = eos.cv();
    Ok(MetricTensor {
        eta11: f1.value * e / (cv * cv),
        eta12: f1.first * e / cv,
        eta22: f1.second * e - cv * f2.second,
    })
}

/// Partial derivatives of the thermal equation of state `p(T, v)`.
struct PressureSlopes {
    temperature: f64,
    /// `(∂p/∂T)_v`
    dp_dt: f64,
    /// `(∂p/∂v)_T`
    dp_dv: f64,
}

fn pressure_slopes(eos: &ConstantCvEos, st: ThermoState) -> Result<PressureSlopes> {
    // p(T, v) = -c_v T f1'/f1 + c_v f2'
    let f1 = eos.f1(st.v)?;
    let f2 = eos.f2(st.v)?;
    let cv = eos.cv();
    let temperature = eos.temperature(st)?;
    let log_slope = f1.first / f1.value;
    let log_curvature = f1.second / f1.value - log_slope * log_slope;
    Ok(PressureSlopes {
        temperature,
        dp_dt: -cv * log_slope,
        dp_dv: -cv * temperature * log_curvature + cv * f2.second,
    })
}

/// `c_p`, `α` and `κ_T` from `p(T, v)`.
///
/// Fails with [`Error::Stability`] where `(∂p/∂v)_T >= 0`.
pub fn response_coefficients(eos: &ConstantCvEos, st: ThermoState) -> Result<ResponseCoefficients> {
    let slopes = pressure_slopes(eos, st)?;
    if !(slopes.dp_dv < 0.0) {
        return Err(Error::Stability {
            s: st.s,
            v: st.v,
            dp_dv: slopes.dp_dv,
        });
    }
    let alpha = -slopes.dp_dt / (st.v * slopes.dp_dv);
    let kappa_t = -1.0 / (st.v * slopes.dp_dv);
    let cp = eos.cv() + slopes.temperature * st.v * alpha * alpha / kappa_t;
    Ok(ResponseCoefficients { cp, alpha, kappa_t })
}

/// The metric written through measurable response functions:
///
/// ```text
/// η = (1/c_v) [[ T,        -T α/κ_T    ],
///              [ -T α/κ_T, c_p/(v κ_T) ]]
/// ```
pub fn metric_coefficient_form(eos: &ConstantCvEos, st: ThermoState) -> Result<MetricTensor> {
    let rc = response_coefficients(eos, st)?;
    let t = eos.temperature(st)?;
    let cv = eos.cv();
    let off = -t * rc.alpha / rc.kappa_t;
    Ok(MetricTensor {
        eta11: t / cv,
        eta12: off / cv,
        eta22: rc.cp / (st.v * rc.kappa_t * cv),
    })
}

/// Speed `sqrt(Q)` of the tangent `(ṡ, v̇)` at `st` under the Hessian metric.
///
/// Negative `Q` within a few ulps of the form's magnitude is rounding noise
/// along a null direction and is clamped to zero.
pub fn line_element(eos: &ConstantCvEos, st: ThermoState, ds: f64, dv: f64) -> Result<f64> {
    let metric = metric_hessian(eos, st)?;
    let form = metric.quadratic_form(ds, dv);
    if form >= 0.0 {
        return Ok(form.sqrt());
    }
    let magnitude = metric.eta11 * ds * ds
        + 2.0 * (metric.eta12 * ds * dv).abs()
        + metric.eta22.abs() * dv * dv;
    if form >= -8.0 * f64::EPSILON * magnitude {
        Ok(0.0)
    } else {
        Err(Error::IndefiniteMetric {
            s: st.s,
            v: st.v,
            form,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{IdealGasParams, VanDerWaalsParams};
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

    fn vdw(a: f64, b: f64) -> ConstantCvEos {
        ConstantCvEos::van_der_waals(VanDerWaalsParams {
            r: R,
            cv: CV,
            s0: 0.0,
            a,
            b,
        })
        .unwrap()
    }

    #[test]
    fn hessian_at_reference_state() {
        let m = metric_hessian(&ideal(), ThermoState::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(m.eta11, 1.0 / (CV * CV), max_relative = 1e-15);
        assert_relative_eq!(m.eta11, 6.4301e-3, max_relative = 1e-4);
        assert_relative_eq!(m.eta12, -R / (CV * CV), max_relative = 1e-15);
        assert!(m.is_positive_semidefinite());
    }

    #[test]
    fn hessian_matches_finite_differences() {
        // second-order central differences of u; error ~ h² so compare at two steps
        let eos = vdw(0.1, 0.1);
        let u = |s: f64, v: f64| eos.internal_energy(ThermoState::new(s, v)).unwrap();
        for &(s, v) in &[(0.0, 1.0), (5.0, 0.4), (-3.0, 3.0), (15.0, 0.25)] {
            let m = metric_hessian(&eos, ThermoState::new(s, v)).unwrap();
            let err = |h: f64| {
                let hs = h * CV;
                let hv = h * (v - 0.1);
                let d11 = (u(s + hs, v) - 2.0 * u(s, v) + u(s - hs, v)) / (hs * hs);
                let d22 = (u(s, v + hv) - 2.0 * u(s, v) + u(s, v - hv)) / (hv * hv);
                let d12 = (u(s + hs, v + hv) - u(s + hs, v - hv) - u(s - hs, v + hv)
                    + u(s - hs, v - hv))
                    / (4.0 * hs * hv);
                MetricTensor {
                    eta11: d11,
                    eta12: d12,
                    eta22: d22,
                }
                .max_relative_difference(&m)
            };
            let (e1, e2) = (err(2e-3), err(1e-3));
            assert!(e1 < 1e-4, "{e1}");
            assert!(e1 / e2 > 3.0 && e1 / e2 < 5.0, "ratio {}", e1 / e2);
        }
    }

    #[test]
    fn ideal_response_coefficients() {
        let eos = ideal();
        for &(s, v) in &[(0.0, 1.0), (100.0, 0.02), (40.0, 24.0)] {
            let st = ThermoState::new(s, v);
            let rc = response_coefficients(&eos, st).unwrap();
            let t = eos.temperature(st).unwrap();
            let p = eos.pressure(st).unwrap();
            assert_relative_eq!(rc.alpha, 1.0 / t, max_relative = 1e-13);
            assert_relative_eq!(rc.kappa_t, 1.0 / p, max_relative = 1e-13);
            assert_relative_eq!(rc.cp, CV + R, max_relative = 1e-13);
        }
        let st = eos.state_at_temperature(1.0, 300.0).unwrap();
        let rc = response_coefficients(&eos, st).unwrap();
        assert_relative_eq!(rc.cp, 20.785, max_relative = 1e-12);
    }

    #[test]
    fn dilute_vdw_approaches_ideal() {
        let (a, b) = (1e-4, 1e-4);
        let gas = vdw(a, b);
        let reference = ideal();
        let v = 1e3 * b;
        let t = 300.0;
        let rc = response_coefficients(&gas, gas.state_at_temperature(v, t).unwrap()).unwrap();
        let ri = response_coefficients(&reference, reference.state_at_temperature(v, t).unwrap())
            .unwrap();
        // deviations are O(a/(R T v)) + O(b/v), here about 1e-3
        for (x, y) in [
            (rc.cp, ri.cp),
            (rc.alpha, ri.alpha),
            (rc.kappa_t, ri.kappa_t),
        ] {
            assert!((x - y).abs() / y < 5e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn coefficient_form_agrees_with_hessian() {
        for eos in [ideal(), vdw(0.1, 0.1)] {
            for i in 0..10 {
                for j in 0..10 {
                    let st = ThermoState::new(2.5 * i as f64, 0.5 + 0.5 * j as f64);
                    let h = metric_hessian(&eos, st).unwrap();
                    let c = metric_coefficient_form(&eos, st).unwrap();
                    assert!(h.max_relative_difference(&c) < 1e-10, "{st:?}");
                }
            }
        }
        let st = ThermoState::new(0.0, 1.0);
        let c = metric_coefficient_form(&ideal(), st).unwrap();
        assert_relative_eq!(c.eta11, 1.0 / (CV * CV), max_relative = 1e-15);
    }

    #[test]
    fn spinodal_is_unstable() {
        // very low entropy at v = 3b: RT below 2a(v-b)²/v³
        let eos = vdw(0.1, 0.1);
        let st = ThermoState::new(-60.0, 0.3);
        let err = response_coefficients(&eos, st).unwrap_err();
        assert_eq!(err.code(), "STABILITY_ERROR");
        assert_eq!(err.state(), Some((-60.0, 0.3)));
        assert!(metric_coefficient_form(&eos, st).is_err());
        assert!(!metric_hessian(&eos, st).unwrap().is_positive_semidefinite());
    }

    #[test]
    fn line_element_cases() {
        let eos = ideal();
        let st = ThermoState::new(3.0, 2.0);
        let t = eos.temperature(st).unwrap();
        let le = line_element(&eos, st, -1.7, 0.0).unwrap();
        assert_relative_eq!(le, (t / CV).sqrt() * 1.7, max_relative = 1e-14);
        assert_eq!(line_element(&eos, st, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn indefinite_state_found_by_scan() {
        let eos = vdw(0.1, 0.1);
        let mut found = None;
        'scan: for i in 0..80 {
            for j in 0..40 {
                let st = ThermoState::new(-80.0 + i as f64, 0.11 + 0.05 * j as f64);
                if metric_hessian(&eos, st).unwrap().eta22 < 0.0 {
                    found = Some(st);
                    break 'scan;
                }
            }
        }
        let st = found.expect("a state with eta22 < 0 exists at low entropy");
        let err = line_element(&eos, st, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::IndefiniteMetric { form, .. } if form < 0.0));
    }
}
