//! The censor's utility over true and false positives, and the sweeps that
//! plot it.
//!
//! `U = 100 - 200 (1 - exp(C ((100 - t) / D + f)))`, with `t` the share of
//! distributor traffic blocked and `f` the share of all traffic that is
//! blocked cover traffic. For `C < 0`, `U` lies in `(-100, 100]` and is a
//! strictly decreasing function of the cost scalar `(100 - t) / D + f`, so
//! orderings of utilities are orderings of that scalar.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::UtilityParams;

/// Header of the curve-CSV format.
pub const CURVE_HEADER: &str = "t,f,utility";

const MAX_CURVE_ROWS: usize = 10_000_000;

/// The linear cost the censor minimizes: `(100 - t) / D + f`.
pub fn cost_scalar(params: &UtilityParams, t: f64, f: f64) -> f64 {
    (100.0 - t) / params.d() + f
}

/// Evaluates the censor utility for `t` in `[0, 100]` and `f >= 0`.
pub fn eval_utility(params: &UtilityParams, t: f64, f: f64) -> f64 {
    debug_assert!((0.0..=100.0).contains(&t), "t = {t}");
    debug_assert!(f >= 0.0, "f = {f}");
    utility_from_cost(params, cost_scalar(params, t, f))
}

/// `100 - 200 (1 - e^{C s})`; `expm1` keeps `s = 0` at exactly 100.
pub fn utility_from_cost(params: &UtilityParams, cost: f64) -> f64 {
    100.0 + 200.0 * (params.c() * cost).exp_m1()
}

/// Which utility curves to sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub t_values: Vec<f64>,
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
}

impl CurveSpec {
    pub fn new(t_values: Vec<f64>, f_min: f64, f_max: f64, f_step: f64) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::Curve("at least one t value is required".into()));
        }
        if let Some(t) = t_values.iter().find(|t| !(0.0..=100.0).contains(*t)) {
            return Err(Error::Curve(format!("t value {t} outside [0, 100]")));
        }
        if !f_min.is_finite() || !f_max.is_finite() || f_min < 0.0 || f_min > f_max {
            return Err(Error::Curve(format!(
                "need 0 <= f_min <= f_max, got {f_min}..{f_max}"
            )));
        }
        if !f_step.is_finite() || f_step <= 0.0 {
            return Err(Error::Curve(format!("f_step must be > 0, got {f_step}")));
        }
        let spec = CurveSpec {
            t_values,
            f_min,
            f_max,
            f_step,
        };
        if spec.steps().saturating_mul(spec.t_values.len()) > MAX_CURVE_ROWS {
            return Err(Error::Curve("sweep exceeds 10^7 rows".into()));
        }
        Ok(spec)
    }

    /// The three curves of the reference figures: t = 100, 50, 0 over f in 0..35.
    pub fn figure_default() -> Self {
        CurveSpec::new(vec![100.0, 50.0, 0.0], 0.0, 35.0, 0.25).expect("valid default")
    }

    /// Number of f samples per curve.
    fn steps(&self) -> usize {
        // Tolerance keeps an exact-multiple endpoint despite division rounding.
        let span = (self.f_max - self.f_min) / self.f_step;
        (span + 1e-9).floor() as usize + 1
    }

    fn f_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps()).map(move |k| self.f_min + k as f64 * self.f_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub t: f64,
    pub f: f64,
    pub utility: f64,
}

/// One row per (t, f): t in the given order, then f ascending.
pub fn utility_curve(params: &UtilityParams, spec: &CurveSpec) -> Vec<CurveRow> {
    spec.t_values
        .iter()
        .flat_map(|&t| {
            spec.f_values().map(move |f| CurveRow {
                t,
                f,
                utility: eval_utility(params, t, f),
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut out: W) -> Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{:.6}", r.t, r.f, r.utility)?;
    }
    Ok(())
}
