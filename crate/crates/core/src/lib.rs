//! Casimir forces from time-domain simulations in an artificial conductive
//! medium.
//!
//! The pipeline excites dipole impulses on a stress surface, records the field
//! responses with a leapfrog Maxwell solver ([`engine`]), integrates them over
//! the surface ([`stress`]) and convolves the result with the kernel g(−t) of
//! the complex-frequency contour ([`kernel`]). [`oracle`] holds independent
//! frequency-domain references, and [`cli`] runs whole campaigns.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod cli;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod oracle;
pub mod special;
pub mod stress;

pub use error::{Error, Result};
