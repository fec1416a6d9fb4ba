//! `0F1(; 1; z) = Σ zⁿ/(n!)²`.

use crate::error::NumericsError;

/// Below this argument the power series loses too many digits to
/// cancellation and the Bessel asymptotic form takes over.
const ASYMPTOTIC_BELOW: f64 = -49.0;
const MOST_NEGATIVE: f64 = -900.0;
const MAX_TERMS: usize = 10_000;

/// Sum of the series, stopping once terms decrease and drop below
/// `tol·|partial sum|` (at least 8 terms). For `z < −49` uses
/// `0F1(; 1; z) = J₀(2√−z)` with the Hankel expansion.
pub fn hyper0f1(z: f64, tol: f64) -> Result<f64, NumericsError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumericsError::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if !z.is_finite() {
        return Err(NumericsError::InvalidParameter(format!("non-finite argument {z}")));
    }
    if z < MOST_NEGATIVE {
        return Err(NumericsError::ArgumentTooNegative(z));
    }
    let value = if z < ASYMPTOTIC_BELOW {
        bessel_j0_asymptotic(2.0 * (-z).sqrt())
    } else {
        series(z, tol)?
    };
    if !value.is_finite() {
        return Err(NumericsError::NoConvergence(format!("0F1({z}) is not finite")));
    }
    Ok(value)
}

fn series(z: f64, tol: f64) -> Result<f64, NumericsError> {
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    for n in 1..MAX_TERMS {
        let nf = n as f64;
        term *= z / (nf * nf);
        // Kahan step
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if n >= 8 && nf * nf > z.abs() && term.abs() < tol * sum.abs() {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(NumericsError::NoConvergence(format!(
        "0F1({z}) needs more than {MAX_TERMS} terms"
    )))
}

/// `J₀(x) ≈ √(2/πx) (P cos χ − Q sin χ)`, `χ = x − π/4`, for `x ≳ 14`.
fn bessel_j0_asymptotic(x: f64) -> f64 {
    // a_k = Π_{i=1}^{k} (−(2i−1)²) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a_over_xk = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a_over_xk *= -(odd * odd) / (k as f64 * 8.0 * x);
        }
        let mag = a_over_xk.abs();
        if mag > last || mag < 1e-17 {
            break;
        }
        last = mag;
        // P = Σ (−1)^k a_{2k}/x^{2k}, Q = Σ (−1)^k a_{2k+1}/x^{2k+1}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a_over_xk;
        } else {
            q += sign * a_over_xk;
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
