//! Floating-point comparison helpers shared by every module.

/// Relative tolerance for comparisons between bound terms and moments.
pub const REL_TOL: f64 = 1e-12;
/// Absolute floor under [`REL_TOL`].
pub const ABS_FLOOR: f64 = 1e-15;

/// Slack allowed when comparing `x` against `y`.
#[inline]
pub fn slack(x: f64, y: f64) -> f64 {
    (REL_TOL * x.abs().max(y.abs())).max(ABS_FLOOR)
}

/// `x <= y` up to the shared tolerance.
#[inline]
pub fn approx_le(x: f64, y: f64) -> bool {
    x <= y + slack(x, y)
}

/// `x == y` up to the shared tolerance.
#[inline]
pub fn approx_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= slack(x, y)
}

/// Clamp into `[lo, hi]`; callers check feasibility first.
#[inline]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}
