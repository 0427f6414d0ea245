//! Numerical workbench for the first moment of GL(2)×GL(3) Rankin–Selberg
//! L-functions at a fixed holomorphic form: GL(3) Kloosterman sums, Eisenstein
//! Hecke coefficients, the localized spectral test function, trace-formula
//! kernels, approximate-functional-equation weights and central values, GL(2)
//! Voronoi summation, and the assembled main, diagonal and Eisenstein terms.

pub mod error;
pub mod numerics;
pub mod par;
pub mod arithmetic;
pub mod kloosterman;
pub mod spectral;
pub mod gl2forms;
pub mod eisenstein;
pub mod afe;
pub mod voronoi;
pub mod tracekernels;
pub mod workbench;

pub use error::{Error, Result};
