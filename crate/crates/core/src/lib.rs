//! Computational engine for the type C̃_n affine Hecke algebra and its applications to the
//! open XXZ spin chain, nonsymmetric Koornwinder polynomials and reflection qKZ equations.
//!
//! Every algebraic identity is exposed as a residual check; the [`suites`] module bundles
//! them into reproducible reports.

pub mod baxter;
pub mod error;
pub mod koornwinder;
pub mod linalg;
pub mod matchings;
pub mod numerics;
pub mod qkz;
pub mod report;
pub mod spinrep;
pub mod suites;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
pub use linalg::Mat;
pub use numerics::{LaurentPoly, ParamSet, Precision, Real, ScalarPolicy};
pub use report::{Check, CheckReport};
pub use weyl::WeylElem;

/// Exact rational scalars, the extended-precision mode.
pub type Exact = num_rational::BigRational;
pub type C64 = num_complex::Complex64;
pub type ParamSetF64 = ParamSet<f64>;
pub type ParamSetExact = ParamSet<Exact>;
pub type LaurentPolyF64 = LaurentPoly<f64>;
pub type LaurentPolyExact = LaurentPoly<Exact>;
pub type MatF64 = Mat<f64>;
pub type MatExact = Mat<Exact>;
