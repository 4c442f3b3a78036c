//! Closed-form sharp covariance bounds for the four knowledge regimes, and
//! the wider comparison bounds they improve on.
//!
//! With relative means `alpha`, `beta` and unit variances `vx`, `vy`, the
//! sharp interval on the unit box is
//!
//! | known            | lower                                   | upper                                   |
//! |------------------|-----------------------------------------|-----------------------------------------|
//! | nothing          | `-1/4`                                  | `1/4`                                   |
//! | means            | `-min(a*b, (1-a)(1-b))`                 | `min(a(1-b), (1-a)b)`                   |
//! | variances        | `-sqrt(vx*vy)`                          | `sqrt(vx*vy)`                           |
//! | both             | `-min(sqrt(vx*vy), a*b, (1-a)(1-b))`    | `min(sqrt(vx*vy), a(1-b), (1-a)b)`      |
//!
//! and every endpoint is multiplied by `(b-a)(d-c)` on the way out.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::domain::{BoxDomain, MomentSpec, Regime, UnitMoments};
use crate::error::{Error, Result};
use crate::numeric::approx_eq;

/// The term of a `min(...)` that produced a bound endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActiveConstraint {
    /// `sqrt(Var(X) Var(Y))`
    CauchySchwarz,
    /// `(E(X)-a)(E(Y)-c)`
    MeanCornerAc,
    /// `(b-E(X))(d-E(Y))`
    MeanCornerBd,
    /// `(E(X)-a)(d-E(Y))`
    MeanCornerAd,
    /// `(b-E(X))(E(Y)-c)`
    MeanCornerBc,
    /// `(b-a)(d-c)/4`
    BoxQuarter,
}

/// Sharp covariance bounds with the constraint(s) active at each end.
///
/// Ties record every tied term, so an active set may hold more than one tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceInterval {
    pub regime: Regime,
    pub lower: f64,
    pub upper: f64,
    pub lower_active: BTreeSet<ActiveConstraint>,
    pub upper_active: BTreeSet<ActiveConstraint>,
}

impl CovarianceInterval {
    pub fn contains(&self, cov: f64, tol: f64) -> bool {
        cov >= self.lower - tol && cov <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A plain closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    fn symmetric(half: f64) -> Self {
        Interval {
            lower: -half,
            upper: half,
        }
    }
}

/// Non-sharp bounds used for comparison.
///
/// `cs` is only available when the variances are known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonBounds {
    /// `±sqrt(Var(X) Var(Y))`
    pub cs: Option<Interval>,
    /// Cauchy-Schwarz with Bhatia-Davis variance maxima plugged in.
    pub csbd: Interval,
    /// `|Cov + (b-E(X))(d-E(Y))| <= (b-a) + (d-c) + (b-a)(d-c)`
    pub bd04: Interval,
    /// As `bd04` with the `(b-a) + (d-c)` terms dropped.
    pub bd04_reduced: Interval,
}

/// Means on the unit scale: `E(X) = a + alpha (b-a)`, `E(Y) = c + beta (d-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeMeans {
    pub alpha: f64,
    pub beta: f64,
}

impl RelativeMeans {
    /// Back to `(E(X), E(Y))` in box units.
    pub fn to_means(&self, bx: &BoxDomain) -> (f64, f64) {
        (bx.from_unit_x(self.alpha), bx.from_unit_y(self.beta))
    }
}

pub fn relative_means(bx: &BoxDomain, spec: &MomentSpec) -> Result<RelativeMeans> {
    let unit = spec.normalize(bx)?;
    match unit.means() {
        Some((alpha, beta)) => Ok(RelativeMeans { alpha, beta }),
        None => Err(Error::IncompleteMoments(
            "relative means need E(X) and E(Y)".into(),
        )),
    }
}

/// `±(b-a)(d-c)/4`.
pub fn bounds_no_moments(bx: &BoxDomain) -> CovarianceInterval {
    scale(
        unit_bounds(&UnitMoments {
            regime: Regime::NoMoments,
            alpha: None,
            beta: None,
            var_x: None,
            var_y: None,
        }),
        bx,
    )
}

pub fn bounds_means_known(bx: &BoxDomain, spec: &MomentSpec) -> Result<CovarianceInterval> {
    bounds_for(bx, spec, Regime::MeansOnly)
}

pub fn bounds_variances_known(bx: &BoxDomain, spec: &MomentSpec) -> Result<CovarianceInterval> {
    bounds_for(bx, spec, Regime::VariancesOnly)
}

pub fn bounds_all_known(bx: &BoxDomain, spec: &MomentSpec) -> Result<CovarianceInterval> {
    bounds_for(bx, spec, Regime::Full)
}

/// The sharpest interval for whatever the spec provides.
pub fn sharp_bounds(bx: &BoxDomain, spec: &MomentSpec) -> Result<CovarianceInterval> {
    let unit = spec.normalize(bx)?;
    Ok(scale(unit_bounds(&unit), bx))
}

fn bounds_for(bx: &BoxDomain, spec: &MomentSpec, expected: Regime) -> Result<CovarianceInterval> {
    let unit = spec.normalize(bx)?;
    if unit.regime != expected {
        return Err(Error::RegimeMismatch {
            expected: expected.name(),
            actual: unit.regime.name(),
        });
    }
    Ok(scale(unit_bounds(&unit), bx))
}

fn scale(unit: CovarianceInterval, bx: &BoxDomain) -> CovarianceInterval {
    let w = bx.area();
    CovarianceInterval {
        lower: unit.lower * w,
        upper: unit.upper * w,
        ..unit
    }
}

/// Unit-box interval; endpoints still need the `(b-a)(d-c)` factor.
pub(crate) fn unit_bounds(unit: &UnitMoments) -> CovarianceInterval {
    use ActiveConstraint::*;

    let mut lower_terms = Vec::with_capacity(3);
    let mut upper_terms = Vec::with_capacity(3);
    if let Some((vx, vy)) = unit.variances() {
        let cs = (vx * vy).sqrt();
        lower_terms.push((CauchySchwarz, cs));
        upper_terms.push((CauchySchwarz, cs));
    }
    if let Some((alpha, beta)) = unit.means() {
        lower_terms.push((MeanCornerAc, alpha * beta));
        lower_terms.push((MeanCornerBd, (1.0 - alpha) * (1.0 - beta)));
        upper_terms.push((MeanCornerAd, alpha * (1.0 - beta)));
        upper_terms.push((MeanCornerBc, (1.0 - alpha) * beta));
    }
    if lower_terms.is_empty() {
        lower_terms.push((BoxQuarter, 0.25));
        upper_terms.push((BoxQuarter, 0.25));
    }
    let (lo, lower_active) = min_with_ties(&lower_terms);
    let (hi, upper_active) = min_with_ties(&upper_terms);
    CovarianceInterval {
        regime: unit.regime,
        lower: 0.0 - lo,
        upper: hi,
        lower_active,
        upper_active,
    }
}

fn min_with_ties(terms: &[(ActiveConstraint, f64)]) -> (f64, BTreeSet<ActiveConstraint>) {
    let min = terms.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let active = terms
        .iter()
        .filter(|&&(_, v)| approx_eq(v, min))
        .map(|&(tag, _)| tag)
        .collect();
    (min, active)
}

/// Cauchy-Schwarz, Cauchy-Schwarz/Bhatia-Davis and Barnett-Dragomir bounds.
pub fn comparison_bounds(bx: &BoxDomain, spec: &MomentSpec) -> Result<ComparisonBounds> {
    let unit = spec.normalize(bx)?;
    let (alpha, beta) = unit
        .means()
        .ok_or_else(|| Error::IncompleteMoments("comparison bounds need E(X) and E(Y)".into()))?;
    let w = bx.area();
    let cs = unit
        .variances()
        .map(|(vx, vy)| Interval::symmetric((vx * vy).sqrt() * w));
    let csbd = Interval::symmetric((alpha * (1.0 - alpha) * beta * (1.0 - beta)).sqrt() * w);

    // -(b-E(X))(d-E(Y))
    let center = -(1.0 - alpha) * (1.0 - beta) * w;
    let widths = bx.width_x() + bx.width_y();
    let bd04 = Interval {
        lower: center - (widths + w),
        upper: center + (widths + w),
    };
    let bd04_reduced = Interval {
        lower: center - w,
        upper: center + w,
    };
    Ok(ComparisonBounds {
        cs,
        csbd,
        bd04,
        bd04_reduced,
    })
}
