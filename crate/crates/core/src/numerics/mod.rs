//! Numerical kernels shared by the physics modules: dense symmetric eigensolver,
//! least squares, fixed-step RK4 for linear systems, seeded random streams and
//! compensated statistics.

mod eigen;
mod fit;
mod matrix;
mod ode;
mod rng;
mod stats;
mod trig;

pub use eigen::{eigh, EigenDecomposition};
pub use fit::{linfit, LinearFit};
pub use matrix::{CMatrix, Matrix, SymMatrix};
pub use ode::{propagate_checked, propagate_linear, CheckedPropagation};
pub use rng::RngStream;
pub use stats::{mean_std, pearson, NeumaierSum};
pub use trig::{cos_turns, sin_turns};
