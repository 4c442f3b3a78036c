//! Closed form versus grid LP for a single spec.

use serde_json::{json, Value};

use crate::bounds::sharp_bounds;
use crate::domain::{BoxDomain, MomentSpec};
use crate::error::Result;
use crate::oracle::grid::{solve_grid_lp, GridLpProblem, LpStatus, Sense};
use crate::oracle::report::CheckRecord;

/// How far the LP may fall short of the closed form at a given resolution.
pub fn tolerance(bx: &BoxDomain, resolution: usize) -> f64 {
    let w = bx.width_x().max(bx.width_y());
    4.0 * w * w / resolution as f64
}

/// Grid of candidate relative means used when the spec leaves them free.
const PROFILE_STEPS: usize = 10;

struct LpRange {
    lower: Option<f64>,
    upper: Option<f64>,
}

fn lp_range(bx: &BoxDomain, spec: &MomentSpec, resolution: usize) -> Result<LpRange> {
    if spec.mean_x.is_some() && spec.mean_y.is_some() {
        return pinned_range(bx, spec, resolution);
    }
    // Means unknown: the sharp bound is the extreme over all means, so
    // profile the LP over a grid of candidate means.
    let mut range = LpRange {
        lower: None,
        upper: None,
    };
    for i in 0..=PROFILE_STEPS {
        for j in 0..=PROFILE_STEPS {
            let candidate = MomentSpec {
                mean_x: Some(bx.from_unit_x(i as f64 / PROFILE_STEPS as f64)),
                mean_y: Some(bx.from_unit_y(j as f64 / PROFILE_STEPS as f64)),
                ..*spec
            };
            let r = pinned_range(bx, &candidate, resolution)?;
            range.lower = min_opt(range.lower, r.lower);
            range.upper = max_opt(range.upper, r.upper);
        }
    }
    Ok(range)
}

fn pinned_range(bx: &BoxDomain, spec: &MomentSpec, resolution: usize) -> Result<LpRange> {
    let problem = GridLpProblem::for_spec(*bx, spec, resolution, Sense::Min)?;
    let low = solve_grid_lp(&problem)?;
    if low.status == LpStatus::Infeasible {
        return Ok(LpRange {
            lower: None,
            upper: None,
        });
    }
    let high = solve_grid_lp(&problem.with_sense(Sense::Max))?;
    Ok(LpRange {
        lower: low.value,
        upper: high.value,
    })
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

fn spec_params(bx: &BoxDomain, spec: &MomentSpec, resolution: usize) -> Value {
    json!({
        "a": bx.a(), "b": bx.b(), "c": bx.c(), "d": bx.d(),
        "mean_x": spec.mean_x, "mean_y": spec.mean_y,
        "var_x": spec.var_x, "var_y": spec.var_y,
        "resolution": resolution,
    })
}

/// Runs the MIN and MAX grid LPs for `spec` and compares them with the
/// sharp bounds. Returns an `lp_lower` and an `lp_upper` record.
///
/// An endpoint passes when the LP never beats the closed form (beyond
/// `1e-9 (b-a)(d-c)`) and trails it by at most [`tolerance`]. A spec the
/// closed form rejects passes only if the LP is infeasible too. Solver
/// errors and invalid input become failing records.
pub fn verify_bounds(bx: &BoxDomain, spec: &MomentSpec, resolution: usize) -> Vec<CheckRecord> {
    let base = spec_params(bx, spec, resolution);
    let tol = tolerance(bx, resolution);
    let records = |f: &dyn Fn(&str) -> CheckRecord| vec![f("lp_lower"), f("lp_upper")];

    let regime = match spec.regime() {
        Ok(r) => r,
        Err(e) => {
            return records(&|check| CheckRecord::new(check, base.clone()).param("error", e.code()))
        }
    };
    if resolution < 2 {
        return records(&|check| {
            CheckRecord::new(check, base.clone()).param("error", "INVALID_RESOLUTION")
        });
    }
    let closed = sharp_bounds(bx, spec);
    let lp = match lp_range(bx, spec, resolution) {
        Ok(r) => r,
        Err(e) => {
            return records(&|check| {
                CheckRecord::new(check, base.clone())
                    .param("regime", regime.name())
                    .param("error", e.code())
                    .param("message", e.to_string())
            })
        }
    };
    let lp_status = if lp.upper.is_some() {
        "OPTIMAL"
    } else {
        "INFEASIBLE"
    };
    let floor = 1e-9 * bx.area();

    let record = |check: &str, closed_value: Option<f64>, lp_value: Option<f64>, upper: bool| {
        let mut rec = CheckRecord::new(check, base.clone())
            .param("regime", regime.name())
            .param("lp_status", lp_status)
            .param("tol", tol)
            .values(closed_value, lp_value);
        match (&closed, closed_value, lp_value) {
            (Err(e), _, None) => rec = rec.param("closed_form_error", e.code()).pass(true),
            (Err(e), _, Some(_)) => rec = rec.param("closed_form_error", e.code()).pass(false),
            (Ok(_), Some(c), Some(v)) => {
                let gap = if upper { c - v } else { v - c };
                rec = rec.gap(gap).pass(gap >= -floor && gap <= tol);
            }
            _ => rec = rec.pass(false),
        }
        rec
    };
    let (lo, hi) = match &closed {
        Ok(iv) => (Some(iv.lower), Some(iv.upper)),
        Err(_) => (None, None),
    };
    vec![
        record("lp_lower", lo, lp.lower, false),
        record("lp_upper", hi, lp.upper, true),
    ]
}
