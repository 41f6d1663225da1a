//! Finite-domain workbench for clone theory on chains.

pub mod closure;
pub mod error;
pub mod median;
pub mod order_stats;
pub mod report;
pub mod table;
pub mod term;
pub mod verify;
pub mod wild;

pub use error::{Error, Result};
pub use table::{Chain, OpTable, VarMap};
pub use term::{Expr, OpRef, Registry, Term};
