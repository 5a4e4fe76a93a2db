//! Numerical toolkit for V-harmonic maps, pseudo-horizontally weakly conformal
//! maps and locally conformally Kähler geometry on coordinate charts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conformality;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod jetcalc;
pub mod linalg;
pub mod maptension;
pub mod scenarios;
pub mod submanifolds;

pub use error::{Error, Result};
