//! Exact graded-series time kernels for quantum time-of-arrival operators
//! with polynomial potentials, their phase-space transforms, and the
//! floating-point harness that checks them as integral operators.

pub mod algebra;
pub mod classical_toa;
pub mod error;
pub mod kernel_solver;
pub mod numerics;
pub mod transforms;

pub use algebra::{GradedKernel, KernelIndex, MomentumSeries, QPoly, Rational};
pub use classical_toa::{PhasePoint, Potential};
pub use error::{AlgebraError, Error, KernelError, NumericsError, ToaError, TransformError};
pub use kernel_solver::KernelRequest;
pub use numerics::{BumpProfile, QuadSpec};
