//! Random infinite looptrees and random walks on them.
//!
//! A looptree replaces every parent-with-children star of a plane tree by a
//! cycle; the looptree of Kesten's infinite critical tree is a chain of
//! size-biased cycles (the loopspine) dressed with independent looptree
//! outgrowths. This crate samples balls of that infinite object lazily and
//! exactly, runs walk-kernel and electrical computations on them, and fits
//! the growth exponents: volume alpha, resistance 1, escape alpha+1, and
//! spectral dimension 2*alpha/(alpha+1).
//!
//! Everything random flows through seeded counter-derived streams; fixed
//! (seed, index) reproduces a realization bit for bit at any thread count.

pub mod canon;
pub mod ensemble;
pub mod error;
pub mod estimate;
pub mod gf;
pub mod looptree;
pub mod offspring;
pub mod resistance;
mod solver;
pub mod spine;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
