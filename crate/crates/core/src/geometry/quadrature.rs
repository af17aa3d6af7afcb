//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! Each panel is integrated with the 15-point Kronrod rule and the embedded
//! 7-point Gauss rule; `|K15 - G7|` is the panel error estimate. The panel
//! with the largest estimate is bisected until the summed estimate meets
//! `max(rel_tol * |I|, abs_tol)` or the evaluation budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const EVALS_PER_PANEL: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evaluations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    /// Number of bisections performed.
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Applies the G7/K15 pair on `[a, b]`. Nodes are visited in ascending order,
/// so the first failing evaluation is the leftmost one.
fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut left = [0.0; 7];
    for (j, x) in XGK[..7].iter().enumerate() {
        left[j] = f(center - half * x)?;
    }
    let mid = f(center)?;
    let mut right = [0.0; 7];
    for (j, x) in XGK[..7].iter().enumerate().rev() {
        right[j] = f(center + half * x)?;
    }

    let mut kronrod = WGK[7] * mid;
    let mut gauss = WG[3] * mid;
    for j in 0..7 {
        let pair = left[j] + right[j];
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]`.
///
/// A reversed interval (`b < a`) yields the negated integral. The integrand
/// may fail; the first error aborts the integration and is returned as is.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerances must be positive (rel_tol = {}, abs_tol = {})",
            opts.rel_tol, opts.abs_tol
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    let (a, b, sign) = if b < a { (b, a, -1.0) } else { (a, b, 1.0) };
    if opts.max_evaluations < EVALS_PER_PANEL {
        return Err(Error::InvalidParameter(format!(
            "evaluation budget {} is below one panel ({EVALS_PER_PANEL})",
            opts.max_evaluations
        )));
    }

    let first = gauss_kronrod(&mut f, a, b)?;
    let mut evaluations = EVALS_PER_PANEL;
    let mut subdivisions = 0;
    let mut total = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let target = |value: f64| (opts.rel_tol * value.abs()).max(opts.abs_tol);

    while total_error > target(total) {
        if evaluations + 2 * EVALS_PER_PANEL > opts.max_evaluations {
            return Err(Error::Convergence {
                budget: opts.max_evaluations,
                error_estimate: total_error,
                target: target(total),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel can no longer be split in floating point
            return Err(Error::Convergence {
                budget: opts.max_evaluations,
                error_estimate: total_error,
                target: target(total),
            });
        }
        let left = gauss_kronrod(&mut f, worst.a, mid)?;
        let right = gauss_kronrod(&mut f, mid, worst.b)?;
        evaluations += 2 * EVALS_PER_PANEL;
        subdivisions += 1;

        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        if subdivisions % 64 == 0 {
            // refresh the running sums to stop drift
            total = heap.iter().map(|p| p.value).sum();
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(Integral {
        value: sign * panels.iter().map(|p| p.value).sum::<f64>(),
        abs_error: panels.iter().map(|p| p.error).sum(),
        subdivisions,
        evaluations,
    })
}
