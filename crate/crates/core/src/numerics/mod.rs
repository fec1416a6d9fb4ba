//! Floating-point layer: `0F1`, the integral-form kernel, and the kernel as
//! an integral operator on bump functions.

pub mod bump;
pub mod hyper;
pub mod integral_form;
pub mod operator;
pub mod quad;

pub use bump::BumpProfile;
pub use hyper::hyper0f1;
pub use integral_form::kernel_integral_form;
pub use operator::{
    apply_kernel, commutator_residual, expectation, inner_product, CommutatorReport, EvaluableKernel, FloatKernel,
    HamiltonianRoute, IntegralFormKernel, SampledFunction,
};
pub use quad::{QuadRule, QuadSpec};
