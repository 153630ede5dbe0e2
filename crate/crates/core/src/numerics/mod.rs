//! Scalars, model parameters and the Laurent polynomial ring.

pub mod laurent;
pub mod params;
pub mod scalar;

pub use laurent::{divided_difference, laurent_mul, LaurentPoly};
pub use params::{sample_generic, Constraint, ParamSet};
pub use scalar::{cx, CxExt, Precision, Real, ScalarPolicy};
