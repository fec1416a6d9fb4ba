use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational {0:?}: expected \"num/den\" or an integer")]
    Parse(String),
    #[error("kernel slot (m={m}, j={j}, s={s}) is outside the table layout")]
    InvalidKernelIndex { m: u32, j: u32, s: u32 },
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToaError {
    #[error("momentum is zero")]
    ZeroMomentum,
    #[error("point q'={at} is not classically accessible (H - V = {gap:e})")]
    NotAccessible { at: f64, gap: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid kernel request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("weyl quantization accepts only classical (s = 0) terms; found s = {0}")]
    GradeError(u32),
    #[error("term q^{deg} p^-({k}*2+1) has no kernel representation (requires q-degree >= 1)")]
    UnrepresentableTerm { k: u32, deg: u32 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("0F1 argument {0} is below the supported range (z >= -900)")]
    ArgumentTooNegative(f64),
    #[error("series did not converge: {0}")]
    NoConvergence(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("test functions have negligible overlap ({0:e})")]
    ZeroOverlap(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Crate-level error, for callers that mix modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Toa(#[from] ToaError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
