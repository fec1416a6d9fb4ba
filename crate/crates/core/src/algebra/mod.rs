//! Exact arithmetic substrate: rationals, polynomials in `q`, phase-space
//! momentum series and graded kernel tables.

mod kernel;
mod poly;
mod rational;
mod series;

pub use kernel::{GradedKernel, KernelIndex};
pub use poly::QPoly;
pub use rational::{binomial, double_factorial, factorial, Rational};
pub use series::MomentumSeries;
