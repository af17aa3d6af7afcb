use serde::Deserialize;

use crate::eos::{ConstantCvEos, ThermoState};
use crate::error::{Error, Result};

/// A state on a path together with the path's tangent `(ds/dξ, dv/dξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub state: ThermoState,
    pub ds: f64,
    pub dv: f64,
}

/// A quasi-static process `ξ ↦ (s(ξ), v(ξ))`.
pub trait ParametricPath {
    /// Consecutive parameter intervals on which the tangent is continuous.
    fn pieces(&self) -> Vec<(f64, f64)>;

    fn sample(&self, xi: f64) -> PathSample;

    /// States that must lie in the EOS domain for the whole path to lie in
    /// it (endpoints and corners of straight segments).
    fn vertices(&self) -> Vec<ThermoState>;
}

/// The process shapes understood by the CLI.
///
/// Every variant is parametrized on `ξ ∈ [0, 1]`, except `Polyline` whose
/// `k`-th segment occupies `ξ ∈ [k, k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessPath {
    Isochoric { v: f64, s1: f64, s2: f64 },
    Isentropic { s: f64, v1: f64, v2: f64 },
    Linear { from: ThermoState, to: ThermoState },
    Polyline(Vec<ThermoState>),
}

impl ProcessPath {
    pub fn polyline(points: Vec<ThermoState>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a polyline needs at least two points, got {}",
                points.len()
            )));
        }
        Ok(ProcessPath::Polyline(points))
    }

    pub fn start(&self) -> ThermoState {
        self.sample(self.pieces()[0].0).state
    }

    pub fn end(&self) -> ThermoState {
        let pieces = self.pieces();
        self.sample(pieces[pieces.len() - 1].1).state
    }

    /// Checks every vertex against the EOS domain. Straight segments between
    /// admissible volumes stay admissible because the domain is an interval.
    pub fn validate(&self, eos: &ConstantCvEos) -> Result<()> {
        let coords_finite = self
            .vertices()
            .iter()
            .all(|p| p.s.is_finite() && p.v.is_finite());
        if !coords_finite {
            return Err(Error::InvalidParameter(
                "path coordinates must be finite".into(),
            ));
        }
        for p in self.vertices() {
            eos.f1(p.v)?;
        }
        Ok(())
    }
}

fn segment(from: ThermoState, to: ThermoState, t: f64) -> PathSample {
    let ds = to.s - from.s;
    let dv = to.v - from.v;
    PathSample {
        state: ThermoState::new(from.s + t * ds, from.v + t * dv),
        ds,
        dv,
    }
}

impl ParametricPath for ProcessPath {
    fn pieces(&self) -> Vec<(f64, f64)> {
        match self {
            ProcessPath::Polyline(points) => (0..points.len().saturating_sub(1))
                .map(|k| (k as f64, (k + 1) as f64))
                .collect(),
            _ => vec![(0.0, 1.0)],
        }
    }

    fn sample(&self, xi: f64) -> PathSample {
        match *self {
            ProcessPath::Isochoric { v, s1, s2 } => {
                segment(ThermoState::new(s1, v), ThermoState::new(s2, v), xi)
            }
            ProcessPath::Isentropic { s, v1, v2 } => {
                segment(ThermoState::new(s, v1), ThermoState::new(s, v2), xi)
            }
            ProcessPath::Linear { from, to } => segment(from, to, xi),
            ProcessPath::Polyline(ref points) => {
                let last = points.len().saturating_sub(2);
                let k = (xi.floor().max(0.0) as usize).min(last);
                segment(points[k], points[k + 1], xi - k as f64)
            }
        }
    }

    fn vertices(&self) -> Vec<ThermoState> {
        match self {
            ProcessPath::Polyline(points) => points.clone(),
            _ => vec![self.sample(0.0).state, self.sample(1.0).state],
        }
    }
}

/// `inner` traversed through a monotone change of parameter `ξ = φ(t)`,
/// `t ∈ [t0, t1]`. `map` returns `(φ(t), φ'(t))`.
pub struct Reparametrized<P, F> {
    inner: P,
    map: F,
    t0: f64,
    t1: f64,
}

impl<P, F> Reparametrized<P, F>
where
    P: ParametricPath,
    F: Fn(f64) -> (f64, f64),
{
    pub fn new(inner: P, map: F, t0: f64, t1: f64) -> Self {
        Reparametrized { inner, map, t0, t1 }
    }

    /// Solves `φ(t) = xi` by bisection.
    fn preimage(&self, xi: f64) -> f64 {
        let increasing = (self.map)(self.t1).0 >= (self.map)(self.t0).0;
        let (mut lo, mut hi) = (self.t0, self.t1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ((self.map)(mid).0 < xi) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl<P, F> ParametricPath for Reparametrized<P, F>
where
    P: ParametricPath,
    F: Fn(f64) -> (f64, f64),
{
    fn pieces(&self) -> Vec<(f64, f64)> {
        let inner = self.inner.pieces();
        let mut cuts: Vec<f64> = inner
            .iter()
            .skip(1)
            .map(|&(a, _)| self.preimage(a))
            .collect();
        cuts.insert(0, self.t0);
        cuts.push(self.t1);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn sample(&self, t: f64) -> PathSample {
        let (xi, dxi) = (self.map)(t);
        let inner = self.inner.sample(xi);
        PathSample {
            state: inner.state,
            ds: inner.ds * dxi,
            dv: inner.dv * dxi,
        }
    }

    fn vertices(&self) -> Vec<ThermoState> {
        self.inner.vertices()
    }
}

/// JSON form of a path, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathDocument {
    Isochoric {
        v: f64,
        s1: f64,
        s2: f64,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    Isentropic {
        s: f64,
        v1: f64,
        v2: f64,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    Linear {
        from: ThermoState,
        to: ThermoState,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    Polyline {
        points: Vec<ThermoState>,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
}

impl PathDocument {
    pub fn rel_tol(&self) -> Option<f64> {
        match *self {
            PathDocument::Isochoric { rel_tol, .. }
            | PathDocument::Isentropic { rel_tol, .. }
            | PathDocument::Linear { rel_tol, .. }
            | PathDocument::Polyline { rel_tol, .. } => rel_tol,
        }
    }

    pub fn to_path(&self) -> Result<ProcessPath> {
        Ok(match *self {
            PathDocument::Isochoric { v, s1, s2, .. } => ProcessPath::Isochoric { v, s1, s2 },
            PathDocument::Isentropic { s, v1, v2, .. } => ProcessPath::Isentropic { s, v1, v2 },
            PathDocument::Linear { from, to, .. } => ProcessPath::Linear { from, to },
            PathDocument::Polyline { ref points, .. } => ProcessPath::polyline(points.clone())?,
        })
    }
}
