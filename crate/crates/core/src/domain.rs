//! Box domain, moment specifications and their unit-box normalization.
//!
//! Every bound and witness is computed on the unit box `[0,1]²` and mapped
//! back. [`MomentSpec::normalize`] performs the feasibility checks once and
//! hands the rest of the crate a [`UnitMoments`] whose values are already
//! clamped into their admissible ranges.

use serde::Serialize;

use crate::error::{Axis, Error, Result};
use crate::numeric::{approx_le, clamp};

/// The rectangle `[a,b] x [c,d]` that bounds `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxDomain {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl BoxDomain {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite();
        if !finite || a >= b || c >= d {
            return Err(Error::InvalidBox { a, b, c, d });
        }
        Ok(BoxDomain { a, b, c, d })
    }

    pub fn unit() -> Self {
        BoxDomain {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn width_x(&self) -> f64 {
        self.b - self.a
    }

    pub fn width_y(&self) -> f64 {
        self.d - self.c
    }

    /// `(b-a)(d-c)`, the factor that carries unit-box covariances back.
    pub fn area(&self) -> f64 {
        self.width_x() * self.width_y()
    }

    pub fn to_unit_x(&self, x: f64) -> f64 {
        (x - self.a) / self.width_x()
    }

    pub fn to_unit_y(&self, y: f64) -> f64 {
        (y - self.c) / self.width_y()
    }

    /// Maps a unit coordinate back to `[a,b]`; 0 and 1 land exactly on `a`, `b`.
    pub fn from_unit_x(&self, u: f64) -> f64 {
        if u == 1.0 {
            self.b
        } else {
            self.a + u * self.width_x()
        }
    }

    pub fn from_unit_y(&self, u: f64) -> f64 {
        if u == 1.0 {
            self.d
        } else {
            self.c + u * self.width_y()
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        approx_le(self.a, x) && approx_le(x, self.b) && approx_le(self.c, y) && approx_le(y, self.d)
    }
}

/// Which moments of the margins are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Only the box is known.
    NoMoments,
    MeansOnly,
    VariancesOnly,
    /// Means and variances of both margins.
    Full,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::NoMoments => "no_moments",
            Regime::MeansOnly => "means_only",
            Regime::VariancesOnly => "variances_only",
            Regime::Full => "full",
        }
    }
}

/// Known first and second moments. Values are in the box's own units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MomentSpec {
    pub mean_x: Option<f64>,
    pub mean_y: Option<f64>,
    pub var_x: Option<f64>,
    pub var_y: Option<f64>,
}

impl MomentSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn means(mean_x: f64, mean_y: f64) -> Self {
        MomentSpec {
            mean_x: Some(mean_x),
            mean_y: Some(mean_y),
            ..Self::default()
        }
    }

    pub fn variances(var_x: f64, var_y: f64) -> Self {
        MomentSpec {
            var_x: Some(var_x),
            var_y: Some(var_y),
            ..Self::default()
        }
    }

    pub fn full(mean_x: f64, mean_y: f64, var_x: f64, var_y: f64) -> Self {
        MomentSpec {
            mean_x: Some(mean_x),
            mean_y: Some(mean_y),
            var_x: Some(var_x),
            var_y: Some(var_y),
        }
    }

    /// Means must be given for both margins or neither; same for variances.
    pub fn regime(&self) -> Result<Regime> {
        let means = match (self.mean_x, self.mean_y) {
            (Some(_), Some(_)) => true,
            (None, None) => false,
            _ => {
                return Err(Error::IncompleteMoments(
                    "means must be given for both X and Y".into(),
                ))
            }
        };
        let vars = match (self.var_x, self.var_y) {
            (Some(_), Some(_)) => true,
            (None, None) => false,
            _ => {
                return Err(Error::IncompleteMoments(
                    "variances must be given for both X and Y".into(),
                ))
            }
        };
        Ok(match (means, vars) {
            (false, false) => Regime::NoMoments,
            (true, false) => Regime::MeansOnly,
            (false, true) => Regime::VariancesOnly,
            (true, true) => Regime::Full,
        })
    }

    /// Validates the spec against `bx` and rescales it to the unit box.
    pub fn normalize(&self, bx: &BoxDomain) -> Result<UnitMoments> {
        let regime = self.regime()?;
        let (alpha, var_x) = normalize_margin(Axis::X, self.mean_x, self.var_x, bx.a(), bx.b())?;
        let (beta, var_y) = normalize_margin(Axis::Y, self.mean_y, self.var_y, bx.c(), bx.d())?;
        Ok(UnitMoments {
            regime,
            alpha,
            beta,
            var_x,
            var_y,
        })
    }

    /// Mirror image under `x -> a + b - x`.
    pub fn reflect_x(&self, bx: &BoxDomain) -> Self {
        MomentSpec {
            mean_x: self.mean_x.map(|m| bx.a() + bx.b() - m),
            ..*self
        }
    }
}

fn normalize_margin(
    axis: Axis,
    mean: Option<f64>,
    var: Option<f64>,
    lo: f64,
    hi: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let width = hi - lo;
    let rel = match mean {
        Some(m) => {
            if !m.is_finite() || !approx_le(lo, m) || !approx_le(m, hi) {
                return Err(Error::MeanOutOfRange {
                    axis,
                    mean: m,
                    lo,
                    hi,
                });
            }
            Some(clamp((m - lo) / width, 0.0, 1.0))
        }
        None => None,
    };
    let unit_var = match var {
        Some(v) => {
            // Bhatia-Davis when the mean is known, quarter width squared otherwise.
            let max = match mean {
                Some(m) => ((m - lo) * (hi - m)).max(0.0),
                None => width * width / 4.0,
            };
            if !v.is_finite() || !approx_le(0.0, v) || !approx_le(v, max) {
                return Err(Error::VarianceInfeasible { axis, var: v, max });
            }
            let unit_max = match rel {
                Some(r) => r * (1.0 - r),
                None => 0.25,
            };
            Some(clamp(v / (width * width), 0.0, unit_max))
        }
        None => None,
    };
    Ok((rel, unit_var))
}

/// A validated moment spec expressed on the unit box.
///
/// `alpha`/`beta` are the relative means, variances are divided by the
/// squared widths. All values are clamped to their feasible ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitMoments {
    pub regime: Regime,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub var_x: Option<f64>,
    pub var_y: Option<f64>,
}

impl UnitMoments {
    pub(crate) fn means(&self) -> Option<(f64, f64)> {
        Some((self.alpha?, self.beta?))
    }

    pub(crate) fn variances(&self) -> Option<(f64, f64)> {
        Some((self.var_x?, self.var_y?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_and_degenerate_boxes() {
        assert!(matches!(
            BoxDomain::new(1.0, 0.0, 0.0, 1.0),
            Err(Error::InvalidBox { .. })
        ));
        assert!(BoxDomain::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoxDomain::new(0.0, 1.0, 0.0, f64::INFINITY).is_err());
        assert!(BoxDomain::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn regime_detection() {
        assert_eq!(MomentSpec::none().regime().unwrap(), Regime::NoMoments);
        assert_eq!(
            MomentSpec::means(0.1, 0.2).regime().unwrap(),
            Regime::MeansOnly
        );
        assert_eq!(
            MomentSpec::variances(0.1, 0.2).regime().unwrap(),
            Regime::VariancesOnly
        );
        assert_eq!(
            MomentSpec::full(0.1, 0.2, 0.0, 0.0).regime().unwrap(),
            Regime::Full
        );
        let partial = MomentSpec {
            mean_x: Some(0.3),
            ..MomentSpec::none()
        };
        assert!(matches!(partial.regime(), Err(Error::IncompleteMoments(_))));
    }

    #[test]
    fn normalization_rescales() {
        let bx = BoxDomain::new(0.0, 2.0, 0.0, 4.0).unwrap();
        let u = MomentSpec::full(1.0, 3.0, 0.5, 2.0).normalize(&bx).unwrap();
        assert_eq!(u.alpha, Some(0.5));
        assert_eq!(u.beta, Some(0.75));
        assert_eq!(u.var_x, Some(0.125));
        assert_eq!(u.var_y, Some(0.125));
    }

    #[test]
    fn bhatia_davis_is_non_strict() {
        let bx = BoxDomain::unit();
        // Two-point marginal on {0,1} sits exactly on the boundary.
        assert!(MomentSpec::full(0.3, 0.6, 0.21, 0.24)
            .normalize(&bx)
            .is_ok());
        let err = MomentSpec::full(0.3, 0.6, 0.22, 0.24)
            .normalize(&bx)
            .unwrap_err();
        assert!(matches!(
            err,
            Error::VarianceInfeasible { axis: Axis::X, .. }
        ));
        let err = MomentSpec::full(0.3, 0.6, 0.2, 0.25)
            .normalize(&bx)
            .unwrap_err();
        assert!(matches!(
            err,
            Error::VarianceInfeasible { axis: Axis::Y, .. }
        ));
    }

    #[test]
    fn rounded_moments_within_tolerance_are_accepted() {
        let bx = BoxDomain::unit();
        let u = MomentSpec::full(1.0 + 1e-16, 0.5, 0.0, 0.25 * (1.0 + 1e-13))
            .normalize(&bx)
            .unwrap();
        assert_eq!(u.alpha, Some(1.0));
        assert_eq!(u.var_y, Some(0.25));
        assert!(MomentSpec::means(1.0 + 1e-9, 0.5).normalize(&bx).is_err());
        assert!(MomentSpec::means(-1e-9, 0.5).normalize(&bx).is_err());
    }

    #[test]
    fn variance_without_mean_uses_quarter_width() {
        let bx = BoxDomain::new(0.0, 2.0, 0.0, 1.0).unwrap();
        assert!(MomentSpec::variances(1.0, 0.25).normalize(&bx).is_ok());
        assert!(MomentSpec::variances(1.01, 0.25).normalize(&bx).is_err());
        assert!(MomentSpec::variances(-0.1, 0.25).normalize(&bx).is_err());
    }

    #[test]
    fn unit_maps_hit_endpoints_exactly() {
        let bx = BoxDomain::new(-0.3, 0.7, 1.1, 2.9).unwrap();
        assert_eq!(bx.from_unit_x(0.0), -0.3);
        assert_eq!(bx.from_unit_x(1.0), 0.7);
        assert_eq!(bx.from_unit_y(1.0), 2.9);
        let reflected = MomentSpec::means(0.0, 2.0).reflect_x(&bx);
        assert!((reflected.mean_x.unwrap() - 0.4).abs() < 1e-15);
    }
}
