//! Computational laboratory for marked quotients of free groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: free words, the free product `Z/3 * Z/3`, canonical keys;
//! * [`trees`]: the Fabrykowski-Gupta group on the ternary tree, its level
//!   quotients as portraits, and an exact word problem;
//! * [`schreier`]: level Schreier graphs;
//! * [`wreath`]: the wreath extensions `Γ_n` and the quotient maps between them;
//! * [`marked`]: marked groups over pluggable backends, balls, agreement radii,
//!   diagonal products, marking search and lifting;
//! * [`walklab`]: step distributions, exact convolution and random-walk statistics.

pub mod algebra;
pub mod error;
pub mod marked;
pub mod schreier;
pub mod trees;
pub mod walklab;
pub mod wreath;

pub use error::{Error, Result};
