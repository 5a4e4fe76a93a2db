//! Order-2 jet evaluation of coordinate expressions.
//!
//! Expressions are plain closures over [`Hyper`] (a dual number nested two
//! levels deep), so value, gradient and Hessian come out of one evaluation.
//! [`fd_jet2`] and [`fd_map_jet`] provide a finite-difference cross-check.

mod dual;
mod expr;

pub use dual::{Dual, Hyper, Jet1, Real, MAX_VARS};
pub use expr::{
    fd_jet2, fd_map_jet, jet2_eval, jet_discrepancy, map_jet, DomainBox, Jet2, MapExpr, MapFn,
    MapJet, ScalarExprField, DEFAULT_FD_STEP,
};
