//! Exact-rational toolkit for bounding the success probability of
//! non-signaling 3-colorings of rings and line segments: coloring
//! enumeration, sliding-frame marginal constraints, an exact LP pipeline
//! with independently verifiable certificates, bias/penalty witnesses,
//! and a small state-vector simulator for the one-way ring protocol.

pub mod bounds;
pub mod frames;
pub mod lp;
pub mod lp_build;
pub mod qsim;
pub mod rational;
pub mod ring;
pub mod simplex;
pub mod solver;

pub use rational::Rat;
