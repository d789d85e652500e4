//! KCC (Kosambi–Cartan–Chern) geometry of second-order dynamical systems and
//! its application to the Lorenz system.
//!
//! * [`kcc`]: generic engine for connections, invariants and Jacobi stability.
//! * [`lorenz`]: the Lorenz system recast as two second-order equations, with
//!   closed-form invariants and equilibrium analysis.
//! * [`dynamics`]: trajectory and deviation-vector integration, instability
//!   exponents and the curvature-sign onset time.

pub mod dynamics;
pub mod kcc;
pub mod lorenz;
pub mod taylor;
pub mod tensor;

pub use kcc::{Differentiation, Jet, Kcc, KccError, SodeSystem, SpectralSummary};
pub use taylor::Scalar;
pub use tensor::{Matrix, Tensor};
