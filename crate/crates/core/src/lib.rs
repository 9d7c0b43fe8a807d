//! Kinetostatic stiffness modelling of overconstrained parallel manipulators.

// `!(x < tol)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod chain;
pub mod compliance;
pub mod config;
pub mod data;
pub mod error;
pub mod kinetostatics;
pub mod linalg;
pub mod orthoglide;
pub mod parallelogram;
pub mod procrustes;
pub mod se3;
pub mod validation;

pub use error::{Error, Result};
