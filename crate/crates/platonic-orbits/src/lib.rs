//! Symmetric periodic orbits of the N-body problem built from the rotation
//! groups of the Platonic solids.

pub mod action;
pub mod archimedean;
pub mod bounds;
pub mod catalog;
pub mod kepler;
pub mod chambers;
pub mod config;
pub mod io;
pub mod loops;
pub mod optimizer;
pub mod quadrature;
pub mod symmetry;
pub mod topology;
