//! Sharp covariance bounds for random variables confined to a box
//! `[a, b] x [c, d]`.
//!
//! Depending on what is known about the marginals (nothing, the means, the
//! variances, or both) [`sharp_bounds`] returns the tightest interval for
//! `Cov(X, Y)`; [`witness`] builds a joint distribution attaining either
//! end, [`measures`] rescales a covariance to `[-1, 1]` by those bounds, and
//! the [`oracle`] module re-derives everything by brute-force linear
//! programming over gridded distributions.
//!
//! ```
//! use covbounds::{sharp_bounds, BoxDomain, MomentSpec};
//!
//! let bx = BoxDomain::unit();
//! let iv = sharp_bounds(&bx, &MomentSpec::means(0.3, 0.6)).unwrap();
//! assert!((iv.lower + 0.18).abs() < 1e-15 && (iv.upper - 0.12).abs() < 1e-15);
//! ```

pub mod bounds;
pub mod cli;
pub mod domain;
pub mod error;
pub mod extremal;
pub mod families;
pub mod joint;
pub mod numeric;
pub mod oracle;
pub mod parallel;
pub mod standardize;

pub use bounds::{
    bounds_all_known, bounds_means_known, bounds_no_moments, bounds_variances_known,
    comparison_bounds, relative_means, sharp_bounds, ActiveConstraint, ComparisonBounds,
    CovarianceInterval, Interval, RelativeMeans,
};
pub use domain::{BoxDomain, MomentSpec, Regime};
pub use error::{Axis, Error, Result};
pub use extremal::{kappa_tilde, witness, KappaTildeSolution, Side, Witness};
pub use joint::{Atom, DiscreteJoint, JointMoments};
pub use standardize::{measures, measures_from_joint, ordering_check, StandardizedMeasures};
