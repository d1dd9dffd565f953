//! Numerical machinery for positive solutions of `Δu + u^p = 0` with
//! Dirichlet data on tubular neighborhoods `B_ε(Λ)` of embedded closed
//! submanifolds:
//!
//! - [`radial`]: the positive radial ground state `U` on the unit n-ball,
//!   its rescalings, and the spectrum of the radial linearization;
//! - [`manifold`]: Laplace-Beltrami spectra of the base manifolds and
//!   rotation-minimizing frames for closed curves;
//! - [`fermi`]: the metric expansion in Fermi coordinates, the Laplacian
//!   split `Δ = Δ_ḡ + D` and the volume factor `a`;
//! - [`resonance`]: the explicit eigenvalue lattice `μ_i/ε² + λ_j`, the
//!   resonance set, spectral gaps, admissible ε-intervals, Morse-index
//!   counting and eigenvalue-derivative checks;
//! - [`tube`]: the discretized tube, the iterative construction of
//!   approximate solutions, assembled linearized operators and the Picard
//!   fixed point producing a genuine discrete solution;
//! - [`pohozaev`]: divergence/integrated Pohozaev identities, the scaled
//!   Poincaré inequality and the nonexistence certificate;
//! - [`oracle`]: independent brute-force reference implementations used to
//!   validate the production paths (never called by them).

pub mod csvio;
pub mod error;
pub mod fermi;
pub mod grid;
pub mod linalg;
pub mod manifold;
pub mod norms;
pub mod oracle;
pub mod pohozaev;
pub mod radial;
pub mod resonance;
pub mod tube;

pub use error::{Error, Result};
