//! Numerical companion library for weighted Bergman kernels, weighted Kohn
//! Laplacians and matrix Schrödinger operators on model weights in ℂ².
//!
//! The crate is organised around the objects it computes with:
//!
//! * [`newton`] — exact integer/rational combinatorics of exponent sets Γ:
//!   derived sets, σ/τ slopes, support functions, λ-exponents and region tags.
//! * [`weights`] — closed-form evaluation of model weights φ_Γ, their complex
//!   Hessians and eigenvalue data.
//! * [`radius`] — radius functions from doubling potentials, the induced
//!   Agmon-type metric on grid graphs, coverings.
//! * [`bergman`] — monomial moment tables, truncated reproducing kernels with
//!   certified tails, and pointwise decay-bound fitting.
//! * [`schrodinger`] — lattice discretizations of magnetic matrix Schrödinger
//!   operators, a sparse Hermitian eigensolver, energy forms and coercivity
//!   scans.
//! * [`oscillation`] — oscillation of subspace-valued mappings, oscillating
//!   potential construction, Muckenhoupt-class diagnostics and the good/bad
//!   cube dichotomy for 2×2 polynomial potentials.
//! * [`config`], [`report`], [`runner`] — the deterministic experiment driver
//!   behind the `bergkern` binary.

pub mod bergman;
pub mod config;
pub mod newton;
pub mod oscillation;
pub mod poly;
pub mod quad;
pub mod radius;
pub mod report;
pub mod runner;
pub mod schrodinger;
pub mod weights;

pub use newton::{HomogeneousProfile, MonomialSet, RegionTag};
pub use weights::{ComplexPoint2, HermitianMatrixSample};
