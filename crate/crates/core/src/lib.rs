//! Object reconfiguration planning with an embedded rigid-body simulator as
//! the validity oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrangement;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod manipulation;
pub mod physics;
pub mod planner;
pub mod scenario;

pub use error::{Error, InputError, Result};
