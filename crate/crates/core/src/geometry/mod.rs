//! Weinhold metric and thermodynamic length of quasi-static paths.
//!
//! The metric is the Hessian of `u(s, v)`. It can also be written through
//! `c_p`, `α` and `κ_T`; that coefficient form is kept for cross-checking,
//! while lengths are always integrated with the Hessian form, which needs no
//! stability precondition.

mod metric;
mod path;
pub mod quadrature;

use serde::Serialize;

pub use metric::{
    line_element, metric_coefficient_form, metric_hessian, response_coefficients, MetricTensor,
    ResponseCoefficients,
};
pub use path::{ParametricPath, PathDocument, PathSample, ProcessPath, Reparametrized};

use crate::eos::ConstantCvEos;
use crate::error::{Error, Result};
use quadrature::{integrate, QuadratureOptions};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integrand evaluations allowed over the whole path.
    pub max_evaluations: usize,
}

impl Default for LengthOptions {
    fn default() -> Self {
        LengthOptions {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }
}

impl LengthOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        LengthOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthResult {
    pub length: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

/// Thermodynamic length of `path` with relative tolerance `rel_tol`.
pub fn path_length<P: ParametricPath>(
    eos: &ConstantCvEos,
    path: &P,
    rel_tol: f64,
) -> Result<LengthResult> {
    path_length_with(eos, path, &LengthOptions::with_rel_tol(rel_tol))
}

/// Thermodynamic length of `path`: the integral of the line element over
/// each smooth piece, summed.
pub fn path_length_with<P: ParametricPath>(
    eos: &ConstantCvEos,
    path: &P,
    opts: &LengthOptions,
) -> Result<LengthResult> {
    for vertex in path.vertices() {
        if !vertex.s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path entropy {} is not finite",
                vertex.s
            )));
        }
        eos.f1(vertex.v)?;
    }

    let mut total = LengthResult {
        length: 0.0,
        abs_error_estimate: 0.0,
        subdivisions: 0,
        evaluations: 0,
    };
    for (a, b) in path.pieces() {
        let remaining = opts.max_evaluations.saturating_sub(total.evaluations);
        let piece_opts = QuadratureOptions {
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
            max_evaluations: remaining,
        };
        let integrand = |xi: f64| {
            let p = path.sample(xi);
            line_element(eos, p.state, p.ds, p.dv)
        };
        let piece = integrate(integrand, a, b, &piece_opts).map_err(|e| match e {
            Error::Convergence {
                error_estimate,
                target,
                ..
            } => Error::Convergence {
                budget: opts.max_evaluations,
                error_estimate,
                target,
            },
            other => other,
        })?;
        // pieces run forward in ξ, so each integral is non-negative
        total.length += piece.value.abs();
        total.abs_error_estimate += piece.abs_error;
        total.subdivisions += piece.subdivisions;
        total.evaluations += piece.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{IdealGasParams, ThermoState, VanDerWaalsParams};
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

    /// Fixed-order composite Simpson rule, independent of the adaptive code.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn isochoric_length_against_simpson() {
        let eos = ideal();
        let path = ProcessPath::Isochoric {
            v: 1.0,
            s1: 0.0,
            s2: CV,
        };
        let r = path_length(&eos, &path, 1e-10).unwrap();
        let oracle = simpson(
            |s| (eos.temperature(ThermoState::new(s, 1.0)).unwrap() / CV).sqrt(),
            0.0,
            CV,
            1_000_000,
        );
        assert_relative_eq!(r.length, oracle, max_relative = 1e-12);
        assert_relative_eq!(r.length, 1.29744, max_relative = 1e-5);
        assert!(r.abs_error_estimate <= 1e-10 * r.length);
    }

    #[test]
    fn degenerate_path_has_zero_length() {
        let eos = ideal();
        let path = ProcessPath::Isochoric {
            v: 2.0,
            s1: 3.0,
            s2: 3.0,
        };
        let r = path_length(&eos, &path, 1e-10).unwrap();
        assert_eq!(r.length, 0.0);
        assert_eq!(r.abs_error_estimate, 0.0);
    }

    #[test]
    fn direction_does_not_change_length() {
        let eos = ideal();
        let fwd = ProcessPath::Isentropic {
            s: 1.0,
            v1: 0.5,
            v2: 4.0,
        };
        let back = ProcessPath::Isentropic {
            s: 1.0,
            v1: 4.0,
            v2: 0.5,
        };
        let a = path_length(&eos, &fwd, 1e-12).unwrap().length;
        let b = path_length(&eos, &back, 1e-12).unwrap().length;
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }

    #[test]
    fn out_of_domain_vertex_is_rejected() {
        let eos = ideal();
        let path = ProcessPath::Isentropic {
            s: 1.0,
            v1: -0.5,
            v2: 4.0,
        };
        assert_eq!(
            path_length(&eos, &path, 1e-10).unwrap_err().code(),
            "DOMAIN_ERROR"
        );
    }

    #[test]
    fn isentropic_path_through_indefinite_region() {
        let eos = ConstantCvEos::van_der_waals(VanDerWaalsParams {
            r: R,
            cv: CV,
            s0: 0.0,
            a: 0.1,
            b: 0.1,
        })
        .unwrap();
        let path = ProcessPath::Isentropic {
            s: -40.0,
            v1: 0.15,
            v2: 2.0,
        };
        let err = path_length(&eos, &path, 1e-10).unwrap_err();
        let Error::IndefiniteMetric { s, v, form } = err else {
            panic!("expected an indefinite metric, got {err:?}");
        };
        assert_eq!(s, -40.0);
        assert!(v > 0.15 && v < 2.0 && form < 0.0);
    }

    #[test]
    fn tiny_budget_fails_to_converge() {
        let eos = ideal();
        let path = ProcessPath::Linear {
            from: ThermoState::new(0.0, 1e-3),
            to: ThermoState::new(50.0, 40.0),
        };
        let opts = LengthOptions {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_evaluations: 45,
        };
        let err = path_length_with(&eos, &path, &opts).unwrap_err();
        assert_eq!(err.code(), "CONVERGENCE_ERROR");
    }
}
