//! Capacity-equivocation regions of the cognitive interference channel with
//! confidential messages.
//!
//! The crate computes the discrete-memoryless regions for fixed input
//! distributions and their unions by sampling, evaluates the Gaussian
//! regions in closed form, checks the Fourier-Motzkin derivations
//! mechanically, classifies degradedness, and runs small random-coding
//! simulations with exact equivocation.

pub mod channels;
pub mod codesim;
pub mod formats;
pub mod gaussian;
pub mod lp;
pub mod polytope;
pub mod probability;
pub mod hull;
pub mod regions;
pub mod sampling;
