//! Term-by-term Wigner transform of graded kernels to phase space, its
//! classical and ħ² slices, and Weyl quantization of classical series.

use crate::algebra::{factorial, GradedKernel, MomentumSeries, QPoly, Rational};
use crate::classical_toa::{toa_moment, Potential};
use crate::error::TransformError;
use crate::kernel_solver::linear_sigma_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    FromKernel,
    FromWeyl,
}

/// A phase-space series tagged with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformTable {
    pub series: MomentumSeries,
    pub origin: Origin,
}

impl TransformTable {
    pub fn from_kernel(k: &GradedKernel) -> Self {
        TransformTable {
            series: wigner_transform(k),
            origin: Origin::FromKernel,
        }
    }
}

/// Maps `(μ/iħ) A u^m v^(2j) (μ/2ħ²)^(j−s) sgn(v)` to
/// `−2μ 2^m A (2j)! (−1)^j (μ/2)^(j−s) ħ^(2s) q^m p^-(2j+1)`.
pub fn wigner_transform(k: &GradedKernel) -> MomentumSeries {
    let mu = k.mu();
    let half_mu = mu / Rational::from_integer(2);
    let two = Rational::from_integer(2);
    let mut out = MomentumSeries::new();
    for (idx, a) in k.entries() {
        let mut c = -(&two * mu) * two.powu(idx.m) * a * factorial(2 * idx.j) * half_mu.powu(idx.j - idx.s);
        if idx.j % 2 == 1 {
            c = -c;
        }
        out.add_term(idx.j, idx.s, &QPoly::monomial(idx.m, c));
    }
    out
}

/// The `ħ → 0` limit: grade `s = 0` only.
pub fn classical_limit(t: &MomentumSeries) -> MomentumSeries {
    t.restrict(|_, s| s == 0)
}

/// Grades `s ≥ 1`, empty exactly when the transform is purely classical.
pub fn hbar2_residual(t: &MomentumSeries) -> MomentumSeries {
    t.restrict(|_, s| s >= 1)
}

/// Weyl quantization of a classical series: `c q^a p^-(2k+1)` becomes the
/// kernel entry `A[a][k][0] = −c (−1)^k / (2^(a+1) μ (2k)! (μ/2)^k)`.
pub fn weyl_quantize(t: &MomentumSeries, mu: &Rational) -> Result<GradedKernel, TransformError> {
    if let Some(((_, s), _)) = t.terms().find(|((_, s), _)| *s >= 1) {
        return Err(TransformError::GradeError(s));
    }
    let jmax = t.max_k().unwrap_or(0);
    let mmax = t
        .terms()
        .filter_map(|(_, p)| p.degree())
        .max()
        .unwrap_or(1)
        .max(2 * jmax + 1);
    let mut out = GradedKernel::new(None, mu.clone(), jmax, mmax);
    let half_mu = mu / Rational::from_integer(2);
    let two = Rational::from_integer(2);
    for ((k, _), poly) in t.terms() {
        for (a, c) in poly.terms() {
            if a == 0 {
                return Err(TransformError::UnrepresentableTerm { k, deg: a });
            }
            let denom = two.powu(a + 1) * mu * factorial(2 * k) * half_mu.powu(k);
            let mut val = -c.checked_div(&denom)?;
            if k % 2 == 1 {
                val = -val;
            }
            out.add_to(a, k, 0, &val)?;
        }
    }
    Ok(out)
}

/// Both sides of the sgn-integral identity for `V = aq + ½bq²`, as
/// polynomials in `w = q + q'`:
/// `Σ_j σ_{k,j} b^(k−j) a^j w^(2k+1−j)` and
/// `2^(2k+1) (2k−1)!!/(2k)! ∫₀^(w/2) (V(w/2) − V(q''))^k dq''`.
pub fn linear_identity_sides(a: &Rational, b: &Rational, k: u32) -> (QPoly, QPoly) {
    let sigma = linear_sigma_table(k);
    let lhs = QPoly::from_terms(
        sigma[k as usize]
            .iter()
            .enumerate()
            .map(|(j, s)| (2 * k + 1 - j as u32, s * b.powu(k - j as u32) * a.powu(j as u32))),
    );
    let two = Rational::from_integer(2);
    // (2k−1)!!/(2k)! = 1/(2^k k!)
    let c = two.powu(2 * k + 1) / (two.powu(k) * factorial(k));
    let moment = toa_moment(&Potential::linear(a, b), k, &Rational::zero());
    let half = Rational::new(1, 2).unwrap();
    let rhs = QPoly::from_terms(moment.terms().map(|(d, m)| (d, &c * m * half.powu(d))));
    (lhs, rhs)
}
