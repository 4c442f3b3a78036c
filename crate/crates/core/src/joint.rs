//! Finite-support joint distributions.

use serde::Serialize;

use crate::domain::{BoxDomain, MomentSpec};
use crate::error::{Error, Result};

/// Probabilities below this are treated as float dust and dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

/// Exact moments of a discrete joint distribution (population normalized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
}

impl JointMoments {
    pub fn spec(&self) -> MomentSpec {
        MomentSpec::full(self.mean_x, self.mean_y, self.var_x, self.var_y)
    }
}

/// A probability table over finitely many support points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteJoint {
    atoms: Vec<Atom>,
}

impl DiscreteJoint {
    /// Validates the atoms: finite coordinates, `p >= -1e-15`, `sum p = 1`
    /// within `1e-12`. Exact duplicate support points are merged and atoms
    /// below [`PRUNE_THRESHOLD`] are dropped, renormalizing the rest.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut total = 0.0;
        for atom in &atoms {
            if !(atom.x.is_finite() && atom.y.is_finite() && atom.p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite atom ({}, {}, {})",
                    atom.x, atom.y, atom.p
                )));
            }
            if atom.p < -1e-15 {
                return Err(Error::InvalidParameter(format!(
                    "negative probability {} at ({}, {})",
                    atom.p, atom.x, atom.y
                )));
            }
            total += atom.p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::normalized(atoms))
    }

    /// Like [`DiscreteJoint::new`] but also checks every atom lies in `bx`.
    pub fn new_in_box(atoms: Vec<Atom>, bx: &BoxDomain) -> Result<Self> {
        let joint = Self::new(atoms)?;
        joint.check_support(bx)?;
        Ok(joint)
    }

    /// Equally weighted empirical distribution of `(x, y)` pairs.
    pub fn empirical(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty dataset".into()));
        }
        let p = 1.0 / rows.len() as f64;
        let atoms = rows.iter().map(|&(x, y)| Atom { x, y, p }).collect();
        Ok(DiscreteJoint { atoms })
    }

    /// Internal constructors whose mass is 1 up to rounding.
    pub(crate) fn from_unnormalized(atoms: Vec<Atom>) -> Self {
        Self::normalized(atoms)
    }

    fn normalized(mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|l, r| l.x.total_cmp(&r.x).then(l.y.total_cmp(&r.y)));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.x == atom.x && last.y == atom.y => last.p += atom.p,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.p >= PRUNE_THRESHOLD);
        let total: f64 = merged.iter().map(|a| a.p).sum();
        for atom in &mut merged {
            atom.p /= total;
        }
        DiscreteJoint { atoms: merged }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn check_support(&self, bx: &BoxDomain) -> Result<()> {
        match self.atoms.iter().find(|a| !bx.contains(a.x, a.y)) {
            Some(a) => Err(Error::InvalidParameter(format!(
                "atom ({}, {}) lies outside the box",
                a.x, a.y
            ))),
            None => Ok(()),
        }
    }

    /// Centered two-pass moments.
    pub fn moments(&self) -> JointMoments {
        let mean_x: f64 = self.atoms.iter().map(|a| a.p * a.x).sum();
        let mean_y: f64 = self.atoms.iter().map(|a| a.p * a.y).sum();
        let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
        for a in &self.atoms {
            let dx = a.x - mean_x;
            let dy = a.y - mean_y;
            var_x += a.p * dx * dx;
            var_y += a.p * dy * dy;
            cov += a.p * dx * dy;
        }
        JointMoments {
            mean_x,
            mean_y,
            var_x,
            var_y,
            cov,
        }
    }

    pub fn cov(&self) -> f64 {
        self.moments().cov
    }

    /// Largest deviation, in unit-box coordinates, between the realized
    /// moments and whatever `spec` constrains.
    pub fn moment_residual(&self, bx: &BoxDomain, spec: &MomentSpec) -> f64 {
        let m = self.moments();
        let wx = bx.width_x();
        let wy = bx.width_y();
        let mut worst: f64 = 0.0;
        let mut track = |target: Option<f64>, actual: f64, scale: f64| {
            if let Some(t) = target {
                worst = worst.max(((actual - t) / scale).abs());
            }
        };
        track(spec.mean_x, m.mean_x, wx);
        track(spec.mean_y, m.mean_y, wy);
        track(spec.var_x, m.var_x, wx * wx);
        track(spec.var_y, m.var_y, wy * wy);
        worst
    }

    /// Applies `f` to every support point.
    pub fn map_points(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let (x, y) = f(a.x, a.y);
                Atom { x, y, p: a.p }
            })
            .collect();
        Self::normalized(atoms)
    }
}

/// Independent coupling of two discrete marginals given as `(value, prob)`.
pub fn product_coupling(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Result<DiscreteJoint> {
    let atoms = xs
        .iter()
        .flat_map(|&(x, px)| ys.iter().map(move |&(y, py)| Atom { x, y, p: px * py }))
        .collect();
    DiscreteJoint::new(atoms)
}

/// Comonotone (`increasing = true`) or antitone quantile coupling of two
/// discrete marginals, built with the north-west corner rule.
pub fn quantile_coupling(
    xs: &[(f64, f64)],
    ys: &[(f64, f64)],
    increasing: bool,
) -> Result<DiscreteJoint> {
    let mut xs: Vec<_> = xs.iter().copied().filter(|&(_, p)| p > 0.0).collect();
    let mut ys: Vec<_> = ys.iter().copied().filter(|&(_, p)| p > 0.0).collect();
    xs.sort_by(|l, r| l.0.total_cmp(&r.0));
    ys.sort_by(|l, r| l.0.total_cmp(&r.0));
    if !increasing {
        ys.reverse();
    }
    let mut atoms = Vec::with_capacity(xs.len() + ys.len());
    let (mut i, mut j) = (0, 0);
    let mut rem_x = xs.first().map_or(0.0, |v| v.1);
    let mut rem_y = ys.first().map_or(0.0, |v| v.1);
    while i < xs.len() && j < ys.len() {
        let mass = rem_x.min(rem_y);
        atoms.push(Atom {
            x: xs[i].0,
            y: ys[j].0,
            p: mass,
        });
        rem_x -= mass;
        rem_y -= mass;
        if rem_x <= rem_y {
            i += 1;
            rem_x = xs.get(i).map_or(0.0, |v| v.1);
        } else {
            j += 1;
            rem_y = ys.get(j).map_or(0.0, |v| v.1);
        }
    }
    DiscreteJoint::new(atoms)
}
