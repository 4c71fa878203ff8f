//! Exact and numerical tools for linear forms in ζ(2) arising from period
//! integrals on the moduli space of five points.

#![allow(clippy::needless_range_loop)]

pub mod bases;
pub mod cli;
pub mod contiguity;
pub mod diameter;
pub mod exactnum;
pub mod gram;
pub mod lattice;
pub mod linalg;
pub mod vandermonde;
