//! Joint distributions that attain the sharp bounds.
//!
//! Means-only witnesses live on the four box corners and are obtained by
//! shifting the independent coupling along `(1,-1,-1,1)` as far as
//! nonnegativity allows. Full-spec witnesses put `X` on two points chosen by
//! the `kappa_tilde` optimization and let `Y` follow a line in `X`, plus a
//! conditionally centered two-point noise when the variance of `Y` is larger
//! than the line alone can carry.
//!
//! All constructions run on the unit box and are mapped back affinely.

use serde::Serialize;

use crate::bounds::{bounds_all_known, bounds_means_known};
use crate::domain::{BoxDomain, MomentSpec, Regime};
use crate::error::{Error, Result};
use crate::joint::{Atom, DiscreteJoint};
use crate::numeric::{approx_eq, clamp};
use crate::oracle::grid::{solve_grid_lp, GridLpProblem, LpStatus, Sense};

/// Relative means closer than this to a tightness manifold count as on it.
pub const TIE_TOL: f64 = 1e-12;
/// Grid resolution of the LP fallback witness.
pub const FALLBACK_RESOLUTION: usize = 201;

const MOMENT_TOL: f64 = 1e-10;
const COV_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// A witness distribution and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub joint: DiscreteJoint,
    /// True when the closed-form construction failed and the grid LP
    /// supplied the distribution instead.
    pub oracle_witness: bool,
}

/// The 2x2 table of a binary pair, with the independent reference table
/// and the shift along `(1,-1,-1,1)` separating them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryJointCell {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p11: f64,
    pub q00: f64,
    pub q10: f64,
    pub q01: f64,
    pub q11: f64,
    pub shift: f64,
}

/// Maximal covariance along a line `Y = l(X; kappa)` for a two-point `X`.
///
/// `gamma` parametrizes the two-point law as `gamma = sqrt((1-p)/p)`, where
/// `p` is the weight on `x2`; then `x1 = E(X) - sd/gamma`,
/// `x2 = E(X) + gamma*sd` and `Var(X) = (E(X)-x1)(x2-E(X))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaTildeSolution {
    pub kappa_tilde: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub case_id: u8,
    /// Feasible range of `gamma` (unit-free).
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub x1: f64,
    pub x2: f64,
    pub p: f64,
}

/// Witness for the means-only lower bound (at most three corner atoms).
pub fn lower_witness_means(bx: &BoxDomain, spec: &MomentSpec) -> Result<DiscreteJoint> {
    bounds_means_known(bx, spec)?;
    let unit = spec.normalize(bx)?;
    let (alpha, beta) = unit.means().expect("means-only regime");
    Ok(to_box(unit_corner_witness(alpha, beta, Side::Lower), bx))
}

/// Witness for the means-only upper bound (at most three corner atoms).
pub fn upper_witness_means(bx: &BoxDomain, spec: &MomentSpec) -> Result<DiscreteJoint> {
    bounds_means_known(bx, spec)?;
    let unit = spec.normalize(bx)?;
    let (alpha, beta) = unit.means().expect("means-only regime");
    Ok(to_box(unit_corner_witness(alpha, beta, Side::Upper), bx))
}

fn unit_corner_witness(alpha: f64, beta: f64, side: Side) -> Vec<Atom> {
    let q00 = (1.0 - alpha) * (1.0 - beta);
    let q10 = alpha * (1.0 - beta);
    let q01 = (1.0 - alpha) * beta;
    let q11 = alpha * beta;
    let (p00, p10, p01, p11) = match side {
        Side::Lower => {
            let shift = q00.min(q11);
            if (alpha + beta - 1.0).abs() <= TIE_TOL {
                (0.0, q10 + shift, q01 + shift, 0.0)
            } else if q00 <= q11 {
                (0.0, q10 + shift, q01 + shift, q11 - shift)
            } else {
                (q00 - shift, q10 + shift, q01 + shift, 0.0)
            }
        }
        Side::Upper => {
            let shift = q10.min(q01);
            if (alpha - beta).abs() <= TIE_TOL {
                (q00 + shift, 0.0, 0.0, q11 + shift)
            } else if q10 <= q01 {
                (q00 + shift, 0.0, q01 - shift, q11 + shift)
            } else {
                (q00 + shift, q10 - shift, 0.0, q11 + shift)
            }
        }
    };
    vec![
        Atom {
            x: 0.0,
            y: 0.0,
            p: p00,
        },
        Atom {
            x: 1.0,
            y: 0.0,
            p: p10,
        },
        Atom {
            x: 0.0,
            y: 1.0,
            p: p01,
        },
        Atom {
            x: 1.0,
            y: 1.0,
            p: p11,
        },
    ]
}

fn to_box(unit_atoms: Vec<Atom>, bx: &BoxDomain) -> DiscreteJoint {
    let atoms = unit_atoms
        .into_iter()
        .map(|a| Atom {
            x: bx.from_unit_x(a.x),
            y: bx.from_unit_y(a.y),
            p: a.p,
        })
        .collect();
    DiscreteJoint::from_unnormalized(atoms)
}

/// The `kappa_tilde` construction for a complete spec, in box units.
pub fn kappa_tilde(bx: &BoxDomain, spec: &MomentSpec) -> Result<KappaTildeSolution> {
    bounds_all_known(bx, spec)?;
    let unit = spec.normalize(bx)?;
    let (alpha, beta) = unit.means().expect("full regime");
    let (vx, _) = unit.variances().expect("full regime");
    let k = unit_kappa_tilde(alpha, vx, beta);
    Ok(KappaTildeSolution {
        kappa_tilde: k.kappa_tilde * bx.area(),
        x1: bx.from_unit_x(k.x1),
        x2: bx.from_unit_x(k.x2),
        ..k
    })
}

/// Unit-box `kappa_tilde` for `E(X) = alpha`, `Var(X) = var_x`, `E(Y) = beta`.
pub(crate) fn unit_kappa_tilde(alpha: f64, var_x: f64, beta: f64) -> KappaTildeSolution {
    let gamma0 = ((1.0 - beta) / beta).sqrt();
    if var_x <= 0.0 {
        let p = if gamma0.is_finite() {
            1.0 / (1.0 + gamma0 * gamma0)
        } else {
            0.0
        };
        return KappaTildeSolution {
            kappa_tilde: 0.0,
            gamma: gamma0,
            gamma0,
            case_id: 3,
            gamma_lo: gamma0,
            gamma_hi: gamma0,
            x1: alpha,
            x2: alpha,
            p,
        };
    }
    let sd = var_x.sqrt();
    let gamma_lo = sd / alpha;
    // At the Bhatia-Davis maximum both endpoints coincide; keep lo <= hi.
    let gamma_hi = ((1.0 - alpha) / sd).max(gamma_lo);

    let (case_id, gamma, kappa) = if gamma0 < gamma_lo && !approx_eq(gamma0, gamma_lo) {
        (1, gamma_lo, alpha * (1.0 - beta))
    } else if gamma0 > gamma_hi && !approx_eq(gamma0, gamma_hi) {
        (2, gamma_hi, beta * (1.0 - alpha))
    } else {
        (
            3,
            clamp(gamma0, gamma_lo, gamma_hi),
            (var_x * beta * (1.0 - beta)).sqrt(),
        )
    };
    // Land exactly on the box edge when rounding leaves us a hair inside.
    let snap = |x: f64| {
        if x.abs() <= TIE_TOL {
            0.0
        } else if (1.0 - x).abs() <= TIE_TOL {
            1.0
        } else {
            x
        }
    };
    let x1 = snap(clamp(alpha - sd / gamma, 0.0, alpha));
    let x2 = snap(clamp(alpha + gamma * sd, alpha, 1.0));
    KappaTildeSolution {
        kappa_tilde: kappa,
        gamma,
        gamma0,
        case_id,
        gamma_lo,
        gamma_hi,
        x1,
        x2,
        p: 1.0 / (1.0 + gamma * gamma),
    }
}

/// Witness for the upper bound with means and variances known.
pub fn upper_witness_full(bx: &BoxDomain, spec: &MomentSpec) -> Result<Witness> {
    full_witness(bx, spec, Side::Upper)
}

/// Witness for the lower bound: reflect `X`, build the upper witness, reflect back.
pub fn lower_witness_full(bx: &BoxDomain, spec: &MomentSpec) -> Result<Witness> {
    full_witness(bx, spec, Side::Lower)
}

fn full_witness(bx: &BoxDomain, spec: &MomentSpec, side: Side) -> Result<Witness> {
    let bound = bounds_all_known(bx, spec)?;
    let unit = spec.normalize(bx)?;
    let (alpha, beta) = unit.means().expect("full regime");
    let (vx, vy) = unit.variances().expect("full regime");
    let (target, constructed) = match side {
        Side::Upper => (bound.upper, unit_upper_full(alpha, beta, vx, vy)),
        Side::Lower => (
            bound.lower,
            unit_upper_full(1.0 - alpha, beta, vx, vy).map(|atoms| {
                atoms
                    .into_iter()
                    .map(|a| Atom { x: 1.0 - a.x, ..a })
                    .collect()
            }),
        ),
    };
    if let Some(atoms) = constructed {
        let joint = to_box(atoms, bx);
        let cov_err = (joint.cov() - target).abs() / bx.area();
        if joint.moment_residual(bx, spec) <= MOMENT_TOL && cov_err <= COV_TOL {
            return Ok(Witness {
                joint,
                oracle_witness: false,
            });
        }
    }
    oracle_fallback(bx, spec, side)
}

fn oracle_fallback(bx: &BoxDomain, spec: &MomentSpec, side: Side) -> Result<Witness> {
    let sense = match side {
        Side::Lower => Sense::Min,
        Side::Upper => Sense::Max,
    };
    let problem = GridLpProblem::for_spec(*bx, spec, FALLBACK_RESOLUTION, sense)?;
    let solution = solve_grid_lp(&problem)?;
    match (solution.status, solution.witness) {
        (LpStatus::Optimal, Some(joint)) => Ok(Witness {
            joint,
            oracle_witness: true,
        }),
        _ => Err(Error::SolverFailure(
            "fallback grid LP found no feasible witness".into(),
        )),
    }
}

/// Two-point law on `[0,1]` with mean `m` and variance `s`, weights
/// `(1-m, m)`. Collapses to a point mass when `s` is zero.
fn unit_two_point(m: f64, s: f64) -> Vec<(f64, f64)> {
    if s <= 0.0 || m <= 0.0 || m >= 1.0 {
        return vec![(m, 1.0)];
    }
    let sd = s.sqrt();
    let lo = clamp(m - sd * (m / (1.0 - m)).sqrt(), 0.0, m);
    let hi = clamp(m + sd * ((1.0 - m) / m).sqrt(), m, 1.0);
    vec![(lo, 1.0 - m), (hi, m)]
}

/// Unit-box upper witness; `None` if the noise budget cannot be met.
fn unit_upper_full(alpha: f64, beta: f64, vx: f64, vy: f64) -> Option<Vec<Atom>> {
    if vx <= 0.0 || vy <= 0.0 {
        let xs = unit_two_point(alpha, vx);
        let ys = unit_two_point(beta, vy);
        return Some(
            xs.iter()
                .flat_map(|&(x, px)| ys.iter().map(move |&(y, py)| Atom { x, y, p: px * py }))
                .collect(),
        );
    }
    let k = unit_kappa_tilde(alpha, vx, beta);
    let kappa = (vx * vy).sqrt();
    let support = [(k.x1, 1.0 - k.p), (k.x2, k.p)];

    // Ties arise at the Var(Y) maximum, where rounding can leave kappa a
    // hair above kappa_tilde and the noise branch has no headroom left.
    if kappa <= k.kappa_tilde || approx_eq(kappa, k.kappa_tilde) {
        // Y = l(X; kappa) reproduces E(Y), Var(Y) and stays inside [0,1].
        let slope = kappa / vx;
        return Some(
            support
                .iter()
                .map(|&(x, p)| Atom {
                    x,
                    y: clamp(beta + slope * (x - alpha), 0.0, 1.0),
                    p,
                })
                .collect(),
        );
    }

    // Y = l(X; kappa_tilde) + noise, E(noise | X) = 0, with the missing
    // variance Var(Y) - kappa_tilde^2 / Var(X) spread over the two support
    // points in proportion to their Bhatia-Davis headroom m(1-m).
    let slope = k.kappa_tilde / vx;
    let centers: Vec<(f64, f64, f64)> = support
        .iter()
        .map(|&(x, p)| (x, p, clamp(beta + slope * (x - alpha), 0.0, 1.0)))
        .collect();
    let missing = (vy - k.kappa_tilde * slope).max(0.0);
    let headroom: f64 = centers.iter().map(|&(_, p, m)| p * m * (1.0 - m)).sum();
    let fraction = if missing <= 0.0 {
        0.0
    } else if headroom > 0.0 {
        missing / headroom
    } else {
        return None;
    };
    if fraction > 1.0 + 1e-9 {
        return None;
    }
    let fraction = fraction.min(1.0);
    Some(
        centers
            .iter()
            .flat_map(|&(x, p, m)| {
                unit_two_point(m, fraction * m * (1.0 - m))
                    .into_iter()
                    .map(move |(y, py)| Atom { x, y, p: p * py })
            })
            .collect(),
    )
}

/// Witness for any regime. Unknown means are placed at the box center,
/// where the sharp bound for the weaker regime is attained.
pub fn witness(bx: &BoxDomain, spec: &MomentSpec, side: Side) -> Result<Witness> {
    let regime = spec.normalize(bx)?.regime;
    let center_x = bx.from_unit_x(0.5);
    let center_y = bx.from_unit_y(0.5);
    let closed = |joint| Witness {
        joint,
        oracle_witness: false,
    };
    match (regime, side) {
        (Regime::MeansOnly, Side::Lower) => lower_witness_means(bx, spec).map(closed),
        (Regime::MeansOnly, Side::Upper) => upper_witness_means(bx, spec).map(closed),
        (Regime::NoMoments, _) => {
            let centered = MomentSpec::means(center_x, center_y);
            witness(bx, &centered, side)
        }
        (Regime::VariancesOnly, _) => {
            let centered = MomentSpec {
                mean_x: Some(center_x),
                mean_y: Some(center_y),
                ..*spec
            };
            witness(bx, &centered, side)
        }
        (Regime::Full, Side::Lower) => lower_witness_full(bx, spec),
        (Regime::Full, Side::Upper) => upper_witness_full(bx, spec),
    }
}

/// Collapses a joint on the box to the binary pair on the corners with the
/// same `E(X)`, `E(Y)` and `E(XY)` (unit-box coordinates).
pub fn binary_reduction(joint: &DiscreteJoint, bx: &BoxDomain) -> BinaryJointCell {
    let (mut ex, mut ey, mut exy) = (0.0, 0.0, 0.0);
    for a in joint.atoms() {
        let u = bx.to_unit_x(a.x);
        let v = bx.to_unit_y(a.y);
        ex += a.p * u;
        ey += a.p * v;
        exy += a.p * u * v;
    }
    let cell = BinaryJointCell {
        p00: 1.0 - ex - ey + exy,
        p10: ex - exy,
        p01: ey - exy,
        p11: exy,
        q00: (1.0 - ex) * (1.0 - ey),
        q10: ex * (1.0 - ey),
        q01: (1.0 - ex) * ey,
        q11: ex * ey,
        shift: exy - ex * ey,
    };
    for p in [cell.p00, cell.p10, cell.p01, cell.p11] {
        assert!(
            (-1e-12..=1.0 + 1e-12).contains(&p),
            "binary reduction produced probability {p}"
        );
    }
    cell
}
