//! Covariance extremes over joint distributions supported on a grid.
//!
//! The grid spans the box with `nx` by `ny` equally spaced points
//! (endpoints included). Probabilities on the cells are the LP variables;
//! means and variances are linear equality constraints once both means are
//! fixed, and `E(XY)` is the linear objective.

use serde::Serialize;

use crate::domain::{BoxDomain, MomentSpec};
use crate::error::{Error, Result};
use crate::joint::{Atom, DiscreteJoint};
use crate::oracle::simplex::{self, LinearProgram, SimplexStatus};

/// Upper limit on `nx * ny`.
pub const MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MomentKind {
    MeanX,
    MeanY,
    VarX,
    VarY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridLpProblem {
    bx: BoxDomain,
    nx: usize,
    ny: usize,
    constraints: Vec<(MomentKind, f64)>,
    sense: Sense,
}

impl GridLpProblem {
    /// Both means are required because the covariance is only linear in
    /// the cell probabilities once `E(X)` and `E(Y)` are pinned; a variance
    /// constraint is likewise only linear next to its own mean.
    pub fn new(
        bx: BoxDomain,
        nx: usize,
        ny: usize,
        constraints: Vec<(MomentKind, f64)>,
        sense: Sense,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidProblem(format!(
                "grid resolution must be at least 2 per axis, got {nx}x{ny}"
            )));
        }
        if nx.saturating_mul(ny) > MAX_CELLS {
            return Err(Error::InvalidProblem(format!(
                "{nx}x{ny} grid exceeds {MAX_CELLS} cells"
            )));
        }
        let has = |kind| constraints.iter().any(|&(k, _)| k == kind);
        for kind in [
            MomentKind::MeanX,
            MomentKind::MeanY,
            MomentKind::VarX,
            MomentKind::VarY,
        ] {
            if constraints.iter().filter(|&&(k, _)| k == kind).count() > 1 {
                return Err(Error::InvalidProblem(format!(
                    "duplicate {kind:?} constraint"
                )));
            }
        }
        if !has(MomentKind::MeanX) || !has(MomentKind::MeanY) {
            return Err(Error::InvalidProblem(
                "both MEAN_X and MEAN_Y constraints are required".into(),
            ));
        }
        if constraints.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite constraint target".into()));
        }
        Ok(GridLpProblem {
            bx,
            nx,
            ny,
            constraints,
            sense,
        })
    }

    /// Square grid carrying every moment the spec knows. The spec is not
    /// validated, so infeasible targets surface as an INFEASIBLE solution.
    pub fn for_spec(
        bx: BoxDomain,
        spec: &MomentSpec,
        resolution: usize,
        sense: Sense,
    ) -> Result<Self> {
        let mut constraints = Vec::with_capacity(4);
        let pairs = [
            (MomentKind::MeanX, spec.mean_x),
            (MomentKind::MeanY, spec.mean_y),
            (MomentKind::VarX, spec.var_x),
            (MomentKind::VarY, spec.var_y),
        ];
        for (kind, value) in pairs {
            if let Some(v) = value {
                constraints.push((kind, v));
            }
        }
        Self::new(bx, resolution, resolution, constraints, sense)
    }

    pub fn bx(&self) -> &BoxDomain {
        &self.bx
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn with_sense(&self, sense: Sense) -> Self {
        GridLpProblem {
            sense,
            ..self.clone()
        }
    }

    fn target(&self, kind: MomentKind) -> Option<f64> {
        self.constraints
            .iter()
            .find(|&&(k, _)| k == kind)
            .map(|&(_, v)| v)
    }

    /// Number of moment equality constraints (normalization excluded).
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal covariance `E(XY) - E(X)E(Y)` in box units.
    pub value: Option<f64>,
    pub witness: Option<DiscreteJoint>,
}

fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub fn solve_grid_lp(problem: &GridLpProblem) -> Result<LpSolution> {
    let bx = problem.bx;
    let (wx, wy) = (bx.width_x(), bx.width_y());
    let alpha = (problem.target(MomentKind::MeanX).expect("validated") - bx.a()) / wx;
    let beta = (problem.target(MomentKind::MeanY).expect("validated") - bx.c()) / wy;
    let us = unit_grid(problem.nx);
    let vs = unit_grid(problem.ny);
    let cells = problem.nx * problem.ny;
    let cell = |k: usize| (us[k / problem.ny], vs[k % problem.ny]);

    let mut rows = vec![vec![1.0; cells]];
    let mut rhs = vec![1.0];
    for &(kind, target) in &problem.constraints {
        let (row, value): (Vec<f64>, f64) = match kind {
            MomentKind::MeanX => ((0..cells).map(|k| cell(k).0).collect(), alpha),
            MomentKind::MeanY => ((0..cells).map(|k| cell(k).1).collect(), beta),
            MomentKind::VarX => (
                (0..cells).map(|k| (cell(k).0 - alpha).powi(2)).collect(),
                target / (wx * wx),
            ),
            MomentKind::VarY => (
                (0..cells).map(|k| (cell(k).1 - beta).powi(2)).collect(),
                target / (wy * wy),
            ),
        };
        rows.push(row);
        rhs.push(value);
    }
    let sign = match problem.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let objective = (0..cells)
        .map(|k| {
            let (u, v) = cell(k);
            sign * u * v
        })
        .collect();
    let lp = LinearProgram {
        objective,
        rows,
        rhs,
    };
    let res = simplex::solve(&lp)?;
    match res.status {
        SimplexStatus::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: None,
            witness: None,
        }),
        SimplexStatus::Unbounded => Err(Error::SolverFailure(
            "bounded grid LP reported unbounded".into(),
        )),
        SimplexStatus::Optimal => {
            let residual = lp
                .rows
                .iter()
                .zip(&lp.rhs)
                .map(|(row, &b)| {
                    (row.iter().zip(&res.x).map(|(a, x)| a * x).sum::<f64>() - b).abs()
                })
                .fold(0.0, f64::max);
            if residual > simplex::FEAS_TOL {
                return Err(Error::SolverFailure(format!(
                    "optimal basis violates constraints by {residual:e}"
                )));
            }
            let exy: f64 = res
                .x
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| {
                    let (u, v) = cell(k);
                    p * u * v
                })
                .sum();
            let value = (exy - alpha * beta) * bx.area();
            let atoms = res
                .x
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| {
                    let (u, v) = cell(k);
                    Atom {
                        x: bx.from_unit_x(u),
                        y: bx.from_unit_y(v),
                        p,
                    }
                })
                .collect();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                value: Some(value),
                witness: Some(DiscreteJoint::from_unnormalized(atoms)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bounds_all_known, bounds_means_known};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> BoxDomain {
        BoxDomain::unit()
    }

    fn solve_spec(spec: &MomentSpec, res: usize, sense: Sense) -> LpSolution {
        solve_grid_lp(&GridLpProblem::for_spec(unit(), spec, res, sense).unwrap()).unwrap()
    }

    #[test]
    fn corner_grid_examples() {
        let s = solve_spec(&MomentSpec::means(0.3, 0.6), 2, Sense::Max);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value.unwrap(), 0.12, epsilon = 1e-12);
        let s = solve_spec(&MomentSpec::means(0.5, 0.5), 2, Sense::Min);
        assert_abs_diff_eq!(s.value.unwrap(), -0.25, epsilon = 1e-12);
    }

    #[test]
    fn variance_constrained_grid_approaches_from_below() {
        let s = solve_spec(&MomentSpec::full(0.5, 0.5, 0.01, 0.01), 41, Sense::Max);
        let v = s.value.unwrap();
        assert!((0.01 - 2e-3..=0.01 + 1e-9).contains(&v), "value {v}");
        let w = s.witness.unwrap();
        assert!(w.len() <= 5);
        assert!(w.moment_residual(&unit(), &MomentSpec::full(0.5, 0.5, 0.01, 0.01)) <= 1e-9);
        assert_abs_diff_eq!(w.cov(), v, epsilon = 1e-9);
    }

    #[test]
    fn means_lp_cross_checks_closed_form() {
        let spec = MomentSpec::means(0.3, 0.6);
        let iv = bounds_means_known(&unit(), &spec).unwrap();
        let lo = solve_spec(&spec, 21, Sense::Min).value.unwrap();
        let hi = solve_spec(&spec, 21, Sense::Max).value.unwrap();
        assert_abs_diff_eq!(lo, iv.lower, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, iv.upper, epsilon = 1e-12);
    }

    #[test]
    fn full_spec_lp_examples() {
        let spec = MomentSpec::full(0.5, 0.5, 0.01, 0.01);
        let lo = solve_spec(&spec, 41, Sense::Min).value.unwrap();
        assert!((lo + 0.01).abs() <= 2e-3 && lo >= -0.01 - 1e-9);

        let spec = MomentSpec::full(0.3, 0.6, 0.21, 0.24);
        let iv = bounds_all_known(&unit(), &spec).unwrap();
        let lo = solve_spec(&spec, 11, Sense::Min).value.unwrap();
        let hi = solve_spec(&spec, 11, Sense::Max).value.unwrap();
        assert_abs_diff_eq!(lo, iv.lower, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, iv.upper, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_variance_is_reported() {
        let s = solve_spec(&MomentSpec::full(0.3, 0.6, 0.3, 0.1), 21, Sense::Max);
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.value.is_none() && s.witness.is_none());
        // Variance representable only off-grid at this resolution.
        let s = solve_spec(&MomentSpec::full(0.55, 0.5, 1e-6, 0.1), 3, Sense::Max);
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn problem_validation() {
        let bx = unit();
        assert!(GridLpProblem::new(
            bx,
            1,
            5,
            vec![(MomentKind::MeanX, 0.5), (MomentKind::MeanY, 0.5)],
            Sense::Max
        )
        .is_err());
        assert!(GridLpProblem::new(
            bx,
            2000,
            2000,
            vec![(MomentKind::MeanX, 0.5), (MomentKind::MeanY, 0.5)],
            Sense::Max
        )
        .is_err());
        assert!(GridLpProblem::new(
            bx,
            5,
            5,
            vec![(MomentKind::MeanX, 0.5), (MomentKind::VarX, 0.1)],
            Sense::Max
        )
        .is_err());
        assert!(GridLpProblem::new(
            bx,
            5,
            5,
            vec![
                (MomentKind::MeanX, 0.5),
                (MomentKind::MeanX, 0.5),
                (MomentKind::MeanY, 0.5)
            ],
            Sense::Max
        )
        .is_err());
        assert!(
            GridLpProblem::for_spec(bx, &MomentSpec::variances(0.1, 0.1), 5, Sense::Max).is_err()
        );
    }

    #[test]
    fn rectangular_grids_and_wide_boxes() {
        let bx = BoxDomain::new(-10.0, 30.0, 100.0, 101.0).unwrap();
        let spec = MomentSpec::means(0.0, 100.25);
        let p = GridLpProblem::new(
            bx,
            3,
            7,
            vec![(MomentKind::MeanX, 0.0), (MomentKind::MeanY, 100.25)],
            Sense::Max,
        )
        .unwrap();
        let s = solve_grid_lp(&p).unwrap();
        let iv = bounds_means_known(&bx, &spec).unwrap();
        assert_abs_diff_eq!(s.value.unwrap(), iv.upper, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn basic_solution_is_sparse_and_sense_ordered(al in 0.05..0.95f64, be in 0.05..0.95f64,
                                                      fx in 0.2..1.0f64, fy in 0.2..1.0f64) {
            let spec = MomentSpec::full(al, be, fx * al * (1.0 - al), fy * be * (1.0 - be));
            let problem = GridLpProblem::for_spec(unit(), &spec, 9, Sense::Max).unwrap();
            let hi = solve_grid_lp(&problem).unwrap();
            prop_assume!(hi.status == LpStatus::Optimal);
            let lo = solve_grid_lp(&problem.with_sense(Sense::Min)).unwrap();
            prop_assert!(lo.value.unwrap() <= hi.value.unwrap() + 1e-12);
            prop_assert!(hi.witness.unwrap().len() <= problem.num_constraints() + 1);
            let iv = bounds_all_known(&unit(), &spec).unwrap();
            prop_assert!(hi.value.unwrap() <= iv.upper + 1e-9);
            prop_assert!(lo.value.unwrap() >= iv.lower - 1e-9);
        }

        #[test]
        fn refinement_is_monotone(al in 0.05..0.95f64, be in 0.05..0.95f64, fx in 0.3..1.0f64) {
            let spec = MomentSpec {
                var_x: Some(fx * al * (1.0 - al)),
                ..MomentSpec::means(al, be)
            };
            let coarse = GridLpProblem::new(unit(), 6, 6, vec![
                (MomentKind::MeanX, al), (MomentKind::MeanY, be), (MomentKind::VarX, spec.var_x.unwrap())
            ], Sense::Max).unwrap();
            let fine = GridLpProblem::new(unit(), 11, 11, vec![
                (MomentKind::MeanX, al), (MomentKind::MeanY, be), (MomentKind::VarX, spec.var_x.unwrap())
            ], Sense::Max).unwrap();
            let c = solve_grid_lp(&coarse).unwrap();
            prop_assume!(c.status == LpStatus::Optimal);
            let f = solve_grid_lp(&fine).unwrap();
            prop_assert!(f.value.unwrap() >= c.value.unwrap() - 1e-12);
            let cmin = solve_grid_lp(&coarse.with_sense(Sense::Min)).unwrap();
            let fmin = solve_grid_lp(&fine.with_sense(Sense::Min)).unwrap();
            prop_assert!(fmin.value.unwrap() <= cmin.value.unwrap() + 1e-12);
        }
    }
}
