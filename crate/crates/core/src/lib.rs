//! Exact discrete Malliavin calculus for finite Rademacher sequences.
//!
//! Every random variable lives on `{-1, +1}^n` with independent, possibly
//! biased coordinates. Functionals are stored either as value tables over all
//! `2^n` outcomes or as chaos vectors of symmetric kernels, and all
//! expectations are computed by exact enumeration or by closed-form
//! combinatorial sums.

pub mod bounds;
pub mod chaos;
pub mod construct;
pub mod distance;
pub mod error;
pub mod io;
pub mod kernel;
pub mod malliavin;
pub mod model;
pub mod moments;
pub mod numeric;

pub use chaos::{ChaosVector, ValueTable};
pub use error::{ChaosError, Result};
pub use kernel::{Kernel, Subset};
pub use model::{Caps, Outcome, RademacherModel};
