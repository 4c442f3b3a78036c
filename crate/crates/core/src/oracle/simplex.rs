//! Dense two-phase tableau simplex for `min c'x  s.t.  Ax = b, x >= 0`.
//!
//! Built for problems with a handful of equality rows and many columns.
//! Pricing uses the most negative reduced cost; after a run of degenerate
//! pivots the solver switches to Bland's rule for the rest of the solve,
//! which rules out cycling.

use crate::error::{Error, Result};

/// Entries smaller than this are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-11;
/// Phase-one residual above which the problem is declared infeasible.
pub const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-12;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    n: usize,
    stride: usize,
    cells: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    bland: bool,
    degenerate_run: usize,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.cells[i * self.stride + self.stride - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.stride + j]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let stride = self.stride;
        let inv = 1.0 / self.at(r, j);
        let row: Vec<f64> = {
            let slice = &mut self.cells[r * stride..(r + 1) * stride];
            for v in slice.iter_mut() {
                *v *= inv;
            }
            slice[j] = 1.0;
            slice.to_vec()
        };
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.cells[i * stride + j];
            if factor != 0.0 {
                let target = &mut self.cells[i * stride..(i + 1) * stride];
                for (t, &v) in target.iter_mut().zip(&row) {
                    *t -= factor * v;
                }
                target[j] = 0.0;
            }
        }
        let factor = self.cost[j];
        if factor != 0.0 {
            for (t, &v) in self.cost.iter_mut().zip(&row) {
                *t -= factor * v;
            }
            self.cost[j] = 0.0;
        }
        self.basis[r] = j;
        self.pivots += 1;
    }

    fn entering(&self, allowed: usize) -> Option<usize> {
        if self.bland {
            (0..allowed).find(|&j| self.cost[j] < -OPT_TOL)
        } else {
            let mut best = None;
            let mut best_val = -OPT_TOL;
            for j in 0..allowed {
                if self.cost[j] < best_val {
                    best_val = self.cost[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, j);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i).max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                    if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn step(&mut self, allowed: usize) -> Step {
        let Some(j) = self.entering(allowed) else {
            return Step::Optimal;
        };
        let Some(r) = self.leaving(j) else {
            return Step::Unbounded;
        };
        if self.rhs(r) / self.at(r, j) <= 1e-14 {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERATE_STREAK {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
        self.pivot(r, j);
        Step::Pivoted
    }

    fn run(&mut self, allowed: usize, limit: usize) -> Result<Step> {
        loop {
            match self.step(allowed) {
                Step::Pivoted if self.pivots > limit => {
                    return Err(Error::SolverFailure(format!(
                        "pivot limit {limit} exceeded"
                    )))
                }
                Step::Pivoted => {}
                done => return Ok(done),
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<SimplexResult> {
    let m = lp.rows.len();
    let n = lp.objective.len();
    if lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidProblem("inconsistent LP dimensions".into()));
    }
    let width = n + m;
    let stride = width + 1;
    let mut cells = vec![0.0; m * stride];
    for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let dst = &mut cells[i * stride..(i + 1) * stride];
        for (d, &v) in dst.iter_mut().zip(row) {
            *d = sign * v;
        }
        dst[n + i] = 1.0;
        dst[width] = sign * b;
    }

    // Phase one: minimize the sum of artificials.
    let mut cost = vec![0.0; stride];
    for i in 0..m {
        for j in 0..n {
            cost[j] -= cells[i * stride + j];
        }
        cost[width] -= cells[i * stride + width];
    }
    let mut t = Tableau {
        m,
        n,
        stride,
        cells,
        cost,
        basis: (n..n + m).collect(),
        bland: false,
        degenerate_run: 0,
        pivots: 0,
    };
    let limit = 50_000 + 20 * width;
    t.run(width, limit)?;
    let scale = lp.rhs.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
    if -t.cost[width] > FEAS_TOL * scale {
        return Ok(SimplexResult {
            status: SimplexStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            pivots: t.pivots,
        });
    }

    // Drive artificials out of the basis where a structural column allows it.
    for r in 0..m {
        if t.basis[r] < n {
            continue;
        }
        let mut best = None;
        let mut best_abs = PIVOT_TOL;
        for j in 0..n {
            let a = t.at(r, j).abs();
            if a > best_abs {
                best_abs = a;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            t.pivot(r, j);
        }
    }

    // Phase two with the real objective; artificials may not re-enter.
    let mut cost = vec![0.0; stride];
    cost[..n].copy_from_slice(&lp.objective);
    for i in 0..m {
        let b = t.basis[i];
        let cb = if b < n { lp.objective[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..stride {
                cost[j] -= cb * t.cells[i * stride + j];
            }
        }
    }
    for i in 0..m {
        cost[t.basis[i]] = 0.0;
    }
    t.cost = cost;
    t.degenerate_run = 0;
    let outcome = t.run(n, limit)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    let status = match outcome {
        Step::Unbounded => SimplexStatus::Unbounded,
        _ => SimplexStatus::Optimal,
    };
    debug_assert!(t.n == n);
    Ok(SimplexResult {
        status,
        x,
        objective,
        pivots: t.pivots,
    })
}
