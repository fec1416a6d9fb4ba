//! Closed integral form of the ħ⁰ kernel:
//! `T₀(q,q') = ½ ∫₀^((q+q')/2) 0F1(; 1; (μ/2ħ²)(q−q')² [V((q+q')/2) − V(s)]) ds`.

use crate::classical_toa::Potential;
use crate::error::NumericsError;
use crate::numerics::hyper::hyper0f1;
use crate::numerics::quad::{integrate, QuadSpec};

/// Relative tolerance for the `0F1` series inside the integrand.
const HYPER_TOL: f64 = 1e-16;

/// The real factor `T₀`; callers apply `(μ/iħ) sgn(q − q')`.
pub fn kernel_integral_form(
    v: &Potential,
    mu: f64,
    hbar: f64,
    q: f64,
    qp: f64,
    quad: &QuadSpec,
) -> Result<f64, NumericsError> {
    if hbar.is_nan() || hbar <= 0.0 {
        return Err(NumericsError::InvalidParameter(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let c = 0.5 * (q + qp);
    let scale = mu / (2.0 * hbar * hbar) * (q - qp) * (q - qp);
    let vc = v.eval_f64(c);
    let mut failure = None;
    let res = integrate(
        |s: f64| match hyper0f1(scale * (vc - v.eval_f64(s)), HYPER_TOL) {
            Ok(x) => x,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        c,
        quad,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(0.5 * res?.value)
}
