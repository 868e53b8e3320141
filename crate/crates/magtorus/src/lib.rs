//! Numerical laboratory for magnetic Schrödinger operators on the flat 2-torus.
//!
//! The crate builds band-limited magnetic fields with quantized flux, assembles
//! the gauge-covariant discrete operator on an N×N grid of magnetically
//! quasi-periodic wavefunctions, solves for low and interior eigenpairs, and
//! measures phase-space equidistribution of the eigenfunctions through a
//! twisted Weyl calculus (ambiguity-function pairings). Classical reference
//! flows (magnetic, geodesic, cyclotron, and the 1-D lattice-averaged limit
//! flow) and a geometric-control certifier round out the toolbox.

pub mod classical;
pub mod eigen;
pub mod exec;
pub mod field;
pub mod grid;
pub mod landau;
pub mod lattice;
pub mod operator;
pub mod que;
pub mod symbol;
pub mod weyl;

pub use num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
