//! Spectral efficiency of cellular networks with Poisson-distributed base
//! stations: the local-average SIR distribution, spectral-efficiency curves
//! and their network averages, and a Monte-Carlo engine to check them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod montecarlo;
pub mod seff;
pub mod sirdist;
pub mod specialfn;

pub use error::{Error, Result};
pub use sirdist::{BranchMode, PathModel, SectorModel};
