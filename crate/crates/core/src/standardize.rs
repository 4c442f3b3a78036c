//! Covariance rescaled to `[-1, 1]` by the sharp bound of each knowledge
//! regime.
//!
//! | measure    | needs             | denominator                                |
//! |------------|-------------------|--------------------------------------------|
//! | `d`        | the box           | `(b-a)(d-c)/4`                             |
//! | `r`        | variances         | `sqrt(Var(X) Var(Y))`                      |
//! | `d_prime`  | means             | means-only bound with the sign of the cov  |
//! | `d_second` | means + variances | full-spec bound with the sign of the cov   |
//!
//! A zero covariance over a zero denominator is read as 0: when a bound
//! collapses to zero the only feasible covariance is zero, and 0 is the
//! limit along feasible specs approaching it.

use serde::Serialize;

use crate::bounds::unit_bounds;
use crate::domain::{BoxDomain, MomentSpec};
use crate::error::{Error, Result};
use crate::families::ThreePointFamily;
use crate::joint::DiscreteJoint;
use crate::numeric::clamp;

/// Unit-box slack allowed when checking the covariance against the bounds.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Unit-box denominators at or below this count as zero.
const ZERO_DENOMINATOR: f64 = 1e-14;
/// Unit-box covariances at or below this count as zero over a zero denominator.
const ZERO_NUMERATOR: f64 = 1e-12;
const ORDERING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UndefinedReason {
    MissingMoment,
    ZeroDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measure {
    pub value: Option<f64>,
    pub reason: Option<UndefinedReason>,
}

impl Measure {
    fn defined(value: f64) -> Self {
        Measure {
            value: Some(value),
            reason: None,
        }
    }

    fn undefined(reason: UndefinedReason) -> Self {
        Measure {
            value: None,
            reason: Some(reason),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizedMeasures {
    pub d: Measure,
    pub r: Measure,
    pub d_prime: Measure,
    pub d_second: Measure,
}

fn ratio(cov: f64, denom: f64) -> Measure {
    if cov == 0.0 {
        return Measure::defined(0.0);
    }
    if denom <= ZERO_DENOMINATOR {
        return if cov.abs() <= ZERO_NUMERATOR {
            Measure::defined(0.0)
        } else {
            Measure::undefined(UndefinedReason::ZeroDenominator)
        };
    }
    Measure::defined(clamp(cov / denom, -1.0, 1.0))
}

/// All measures the spec supports for covariance `cov`.
///
/// Fails if the spec is infeasible or `cov` lies outside the sharp interval
/// for the spec by more than [`FEASIBILITY_TOL`] (unit-box scale).
pub fn measures(bx: &BoxDomain, spec: &MomentSpec, cov: f64) -> Result<StandardizedMeasures> {
    let unit = spec.normalize(bx)?;
    let w = bx.area();
    let interval = unit_bounds(&unit);
    let c = cov / w;
    if !c.is_finite()
        || c < interval.lower - FEASIBILITY_TOL
        || c > interval.upper + FEASIBILITY_TOL
    {
        return Err(Error::CovarianceOutOfRange {
            cov,
            lower: interval.lower * w,
            upper: interval.upper * w,
        });
    }
    let missing = Measure::undefined(UndefinedReason::MissingMoment);
    let cs = unit.variances().map(|(vx, vy)| (vx * vy).sqrt());
    let corner = unit.means().map(|(alpha, beta)| {
        if c < 0.0 {
            (alpha * beta).min((1.0 - alpha) * (1.0 - beta))
        } else {
            (alpha * (1.0 - beta)).min((1.0 - alpha) * beta)
        }
    });
    Ok(StandardizedMeasures {
        d: ratio(c, 0.25),
        r: cs.map_or(missing, |cs| ratio(c, cs)),
        d_prime: corner.map_or(missing, |m| ratio(c, m)),
        d_second: match (cs, corner) {
            (Some(cs), Some(m)) => ratio(c, cs.min(m)),
            _ => missing,
        },
    })
}

/// Measures of a joint distribution from its exact moments.
pub fn measures_from_joint(joint: &DiscreteJoint, bx: &BoxDomain) -> Result<StandardizedMeasures> {
    joint.check_support(bx)?;
    let m = joint.moments();
    measures(bx, &m.spec(), m.cov)
}

/// One inequality of the partial ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrderingLeg {
    /// `|d| <= |r|`
    DLeR,
    /// `|d| <= |d'|`
    DLeDPrime,
    /// `|d''| >= |r|`
    DSecondGeR,
    /// `|d''| >= |d'|`
    DSecondGeDPrime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub holds: bool,
    pub violations: Vec<OrderingLeg>,
}

/// Checks `|d| <= min(|r|, |d'|)` and `|d''| >= max(|r|, |d'|)`.
///
/// `|r|` and `|d'|` are deliberately not compared; either can be larger.
pub fn ordering_check(m: &StandardizedMeasures) -> Result<OrderingReport> {
    let get = |measure: &Measure, name: &'static str| {
        measure
            .value
            .map(f64::abs)
            .ok_or(Error::UndefinedMeasure(name))
    };
    let d = get(&m.d, "d")?;
    let r = get(&m.r, "r")?;
    let dp = get(&m.d_prime, "d_prime")?;
    let ds = get(&m.d_second, "d_second")?;
    let legs = [
        (OrderingLeg::DLeR, d <= r + ORDERING_TOL),
        (OrderingLeg::DLeDPrime, d <= dp + ORDERING_TOL),
        (OrderingLeg::DSecondGeR, ds >= r - ORDERING_TOL),
        (OrderingLeg::DSecondGeDPrime, ds >= dp - ORDERING_TOL),
    ];
    let violations: Vec<_> = legs.iter().filter(|l| !l.1).map(|l| l.0).collect();
    Ok(OrderingReport {
        holds: violations.is_empty(),
        violations,
    })
}

/// Means-only bound over Cauchy-Schwarz bound for the three-point family,
/// by the log-odds formula and by direct division.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyRatios {
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub lower_direct: f64,
    pub upper_direct: f64,
}

/// With `psi = log(p/(1-p))`:
/// lower ratio `sqrt(min(e^(psi_x+psi_y), e^-(psi_x+psi_y)) / ((1-r)(1-s)))`,
/// upper ratio the same with `psi_x - psi_y`.
///
/// `alpha`, `beta` must lie in `(0,1)` and `r`, `s` in `[0,1)`.
pub fn example_family_ratios(alpha: f64, beta: f64, r: f64, s: f64) -> Result<FamilyRatios> {
    let family = ThreePointFamily::new(alpha, beta, r, s)?;
    let psi_x = (alpha / (1.0 - alpha)).ln();
    let psi_y = (beta / (1.0 - beta)).ln();
    let spread = (1.0 - r) * (1.0 - s);
    let lower_ratio = ((psi_x + psi_y).exp().min((-psi_x - psi_y).exp()) / spread).sqrt();
    let upper_ratio = ((psi_x - psi_y).exp().min((psi_y - psi_x).exp()) / spread).sqrt();

    let bx = BoxDomain::unit();
    let spec = family.spec(&bx);
    let cs = (spec.var_x.expect("full") * spec.var_y.expect("full")).sqrt();
    let lower_direct = (alpha * beta).min((1.0 - alpha) * (1.0 - beta)) / cs;
    let upper_direct = (alpha * (1.0 - beta)).min((1.0 - alpha) * beta) / cs;
    Ok(FamilyRatios {
        lower_ratio,
        upper_ratio,
        lower_direct,
        upper_direct,
    })
}
