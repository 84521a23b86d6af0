//! Numerical building blocks: special functions, dense SPD linear algebra,
//! Richardson-extrapolated numerical derivatives and seeded random streams.

pub mod diff;
pub mod linalg;
pub mod rng;
pub mod special;

pub use diff::{num_gradient, num_hessian, DiffSpec};
pub use linalg::{solve_spd, Matrix};
pub use rng::RngStream;
