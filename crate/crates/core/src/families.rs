//! Parametric marginal families used by the oracle sweeps.
//!
//! Both families are indexed by the relative means `alpha`, `beta` and by
//! concentration parameters `r`, `s`: the three-point family puts mass `r`
//! on the mean and splits the rest between the endpoints, the beta family
//! rescales `Beta(alpha r/(1-r), (1-alpha) r/(1-r))` onto the box. For equal
//! parameters the two families share means and variances:
//! `Var(X) = (1-r) (b-a)^2 alpha (1-alpha)`.

use serde::Serialize;

use crate::domain::{BoxDomain, MomentSpec};
use crate::error::{Error, Result};
use crate::joint::{product_coupling, quantile_coupling, DiscreteJoint};

fn check_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {v} must lie in (0,1)"
        )))
    }
}

fn check_half_open(name: &str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {v} must lie in [0,1)"
        )))
    }
}

/// Three-point marginals `X in {a, E(X), b}`, `Y in {c, E(Y), d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreePointFamily {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub s: f64,
}

impl ThreePointFamily {
    /// `alpha`, `beta` in `(0,1)`; `r`, `s` in `[0,1)` (`r = 0` is the
    /// two-point endpoint law).
    pub fn new(alpha: f64, beta: f64, r: f64, s: f64) -> Result<Self> {
        check_open("alpha", alpha)?;
        check_open("beta", beta)?;
        check_half_open("r", r)?;
        check_half_open("s", s)?;
        Ok(ThreePointFamily { alpha, beta, r, s })
    }

    pub fn marginal_x(&self, bx: &BoxDomain) -> Vec<(f64, f64)> {
        three_point(bx.a(), bx.b(), self.alpha, self.r)
    }

    pub fn marginal_y(&self, bx: &BoxDomain) -> Vec<(f64, f64)> {
        three_point(bx.c(), bx.d(), self.beta, self.s)
    }

    /// Closed-form means and variances of the family.
    pub fn spec(&self, bx: &BoxDomain) -> MomentSpec {
        let (wx, wy) = (bx.width_x(), bx.width_y());
        MomentSpec::full(
            bx.a() + self.alpha * wx,
            bx.c() + self.beta * wy,
            (1.0 - self.r) * wx * wx * self.alpha * (1.0 - self.alpha),
            (1.0 - self.s) * wy * wy * self.beta * (1.0 - self.beta),
        )
    }

    pub fn independent(&self, bx: &BoxDomain) -> Result<DiscreteJoint> {
        product_coupling(&self.marginal_x(bx), &self.marginal_y(bx))
    }

    pub fn comonotone(&self, bx: &BoxDomain) -> Result<DiscreteJoint> {
        quantile_coupling(&self.marginal_x(bx), &self.marginal_y(bx), true)
    }

    pub fn antitone(&self, bx: &BoxDomain) -> Result<DiscreteJoint> {
        quantile_coupling(&self.marginal_x(bx), &self.marginal_y(bx), false)
    }
}

fn three_point(lo: f64, hi: f64, rel: f64, r: f64) -> Vec<(f64, f64)> {
    vec![
        (lo, (1.0 - r) * (1.0 - rel)),
        (lo + rel * (hi - lo), r),
        (hi, (1.0 - r) * rel),
    ]
}

/// Rescaled beta marginals with the same first two moments as
/// [`ThreePointFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFamily {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub s: f64,
}

impl BetaFamily {
    pub fn new(alpha: f64, beta: f64, r: f64, s: f64) -> Result<Self> {
        check_open("alpha", alpha)?;
        check_open("beta", beta)?;
        check_open("r", r)?;
        check_open("s", s)?;
        Ok(BetaFamily { alpha, beta, r, s })
    }

    /// Shape parameters of the unit-scale law of `X`.
    pub fn shapes_x(&self) -> (f64, f64) {
        shapes(self.alpha, self.r)
    }

    pub fn shapes_y(&self) -> (f64, f64) {
        shapes(self.beta, self.s)
    }

    /// Means and variances from the standard beta moment formulas.
    pub fn spec(&self, bx: &BoxDomain) -> MomentSpec {
        let (mx, vx) = beta_moments(self.shapes_x());
        let (my, vy) = beta_moments(self.shapes_y());
        let (wx, wy) = (bx.width_x(), bx.width_y());
        MomentSpec::full(
            bx.a() + mx * wx,
            bx.c() + my * wy,
            vx * wx * wx,
            vy * wy * wy,
        )
    }

    pub fn three_point_twin(&self) -> ThreePointFamily {
        ThreePointFamily {
            alpha: self.alpha,
            beta: self.beta,
            r: self.r,
            s: self.s,
        }
    }
}

fn shapes(rel: f64, conc: f64) -> (f64, f64) {
    let k = conc / (1.0 - conc);
    (rel * k, (1.0 - rel) * k)
}

/// Mean and variance of `Beta(a, b)`.
pub fn beta_moments((a, b): (f64, f64)) -> (f64, f64) {
    let total = a + b;
    (a / total, a * b / (total * total * (total + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn beta_half_half_moments() {
        let fam = BetaFamily::new(0.5, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(fam.shapes_x(), (0.5, 0.5));
        let (m, v) = beta_moments(fam.shapes_x());
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn families_share_moments() {
        let bx = BoxDomain::new(-1.0, 3.0, 2.0, 2.5).unwrap();
        let beta = BetaFamily::new(0.3, 0.8, 0.6, 0.1).unwrap();
        let a = beta.spec(&bx);
        let b = beta.three_point_twin().spec(&bx);
        assert_abs_diff_eq!(a.mean_x.unwrap(), b.mean_x.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.var_x.unwrap(), b.var_x.unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.var_y.unwrap(), b.var_y.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn three_point_couplings_match_closed_form_moments() {
        let bx = BoxDomain::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let fam = ThreePointFamily::new(0.3, 0.6, 0.2, 0.5).unwrap();
        let spec = fam.spec(&bx);
        for j in [fam.independent(&bx), fam.comonotone(&bx), fam.antitone(&bx)] {
            assert!(j.unwrap().moment_residual(&bx, &spec) < 1e-14);
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(ThreePointFamily::new(0.5, 0.5, 0.0, 0.0).is_ok());
        assert!(ThreePointFamily::new(0.0, 0.5, 0.1, 0.1).is_err());
        assert!(ThreePointFamily::new(0.5, 0.5, 1.0, 0.1).is_err());
        assert!(BetaFamily::new(0.5, 0.5, 0.0, 0.5).is_err());
    }
}
