//! The time kernel as an integral operator on bump functions, and the
//! canonical commutator check `⟨φ|[H, T]ψ⟩ = iħ⟨φ|ψ⟩`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::json;

use crate::algebra::GradedKernel;
use crate::classical_toa::Potential;
use crate::error::NumericsError;
use crate::numerics::bump::BumpProfile;
use crate::numerics::integral_form::kernel_integral_form;
use crate::numerics::quad::{integrate, integrate_with_breaks, QuadSpec};

/// Overlaps below this are treated as zero.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// Anything that can produce `⟨q|T|q'⟩ = (μ/iħ) T(q,q') sgn(q − q')`.
pub trait EvaluableKernel {
    fn mu(&self) -> f64;

    /// The real symmetric factor `T(q, q')`.
    fn t_factor(&self, q: f64, qp: f64, hbar: f64) -> Result<f64, NumericsError>;

    fn kernel(&self, q: f64, qp: f64, hbar: f64) -> Result<Complex64, NumericsError> {
        let v = q - qp;
        if v == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let t = self.t_factor(q, qp, hbar)?;
        Ok(Complex64::new(0.0, -self.mu() / hbar * t * v.signum()))
    }
}

/// A graded table with coefficients converted to doubles once.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatKernel {
    mu: f64,
    /// `(m, 2j, j − s, A)`.
    terms: Vec<(i32, i32, i32, f64)>,
}

impl FloatKernel {
    pub fn scaled(&self, factor: f64) -> FloatKernel {
        FloatKernel {
            mu: self.mu,
            terms: self.terms.iter().map(|&(m, n, e, c)| (m, n, e, c * factor)).collect(),
        }
    }
}

impl From<&GradedKernel> for FloatKernel {
    fn from(k: &GradedKernel) -> Self {
        FloatKernel {
            mu: k.mu().to_f64(),
            terms: k
                .entries()
                .map(|(i, c)| (i.m as i32, 2 * i.j as i32, (i.j - i.s) as i32, c.to_f64()))
                .collect(),
        }
    }
}

impl EvaluableKernel for FloatKernel {
    fn mu(&self) -> f64 {
        self.mu
    }

    fn t_factor(&self, q: f64, qp: f64, hbar: f64) -> Result<f64, NumericsError> {
        let (u, v) = (q + qp, q - qp);
        let g = self.mu / (2.0 * hbar * hbar);
        Ok(self
            .terms
            .iter()
            .map(|&(m, n, e, c)| c * g.powi(e) * u.powi(m) * v.powi(n))
            .sum())
    }
}

/// The ħ⁰ kernel evaluated through its integral form at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralFormKernel {
    pub potential: Potential,
    pub mu: f64,
    pub quad: QuadSpec,
}

impl EvaluableKernel for IntegralFormKernel {
    fn mu(&self) -> f64 {
        self.mu
    }

    fn t_factor(&self, q: f64, qp: f64, hbar: f64) -> Result<f64, NumericsError> {
        kernel_integral_form(&self.potential, self.mu, hbar, q, qp, &self.quad)
    }
}

/// Complex samples of a function on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub q: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    /// Header `q,re,im`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,re,im\n");
        for (q, z) in self.q.iter().zip(&self.values) {
            let _ = writeln!(out, "{q},{},{}", z.re, z.im);
        }
        out
    }
}

/// `∫ ⟨q|T|q'⟩ f(q') dq'` over `[lo, hi]`, with `q' = q` as a panel break.
fn apply_at<K, F>(
    k: &K,
    f: F,
    (lo, hi): (f64, f64),
    q: f64,
    hbar: f64,
    quad: &QuadSpec,
) -> Result<(Complex64, f64), NumericsError>
where
    K: EvaluableKernel + ?Sized,
    F: Fn(f64) -> Complex64,
{
    let mut failure = None;
    let integrand = |qp: f64| match k.kernel(q, qp, hbar) {
        Ok(kv) => kv * f(qp),
        Err(e) => {
            failure.get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let res = if lo < q && q < hi {
        integrate_with_breaks(integrand, &[lo, q, hi], quad)
    } else {
        integrate(integrand, lo, hi, quad)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    Ok((res.value, res.abs_err))
}

/// `(Tφ)(q)` at each grid point.
pub fn apply_kernel<K: EvaluableKernel + ?Sized>(
    k: &K,
    phi: &BumpProfile,
    qgrid: &[f64],
    hbar: f64,
    quad: &QuadSpec,
) -> Result<SampledFunction, NumericsError> {
    check_hbar(hbar)?;
    let mut values = Vec::with_capacity(qgrid.len());
    for &q in qgrid {
        if !q.is_finite() {
            return Err(NumericsError::InvalidParameter(format!("grid point {q} is not finite")));
        }
        let (z, _) = apply_at(k, |t| phi.value(t), phi.support(), q, hbar, quad)?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(NumericsError::QuadratureFailure(format!("(Tφ)({q}) is not finite")));
        }
        values.push(z);
    }
    Ok(SampledFunction {
        q: qgrid.to_vec(),
        values,
    })
}

fn check_hbar(hbar: f64) -> Result<(), NumericsError> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(NumericsError::InvalidParameter(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

/// `⟨φ|ψ⟩ = ∫ φ̄ ψ`.
pub fn inner_product(phi: &BumpProfile, psi: &BumpProfile, quad: &QuadSpec) -> Result<(Complex64, f64), NumericsError> {
    let (a0, a1) = phi.support();
    let (b0, b1) = psi.support();
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo >= hi {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let r = integrate(|q: f64| phi.value(q).conj() * psi.value(q), lo, hi, quad)?;
    Ok((r.value, r.abs_err))
}

/// Outer quadrature over `supp φ` of `outer(q)`, where `outer` itself runs an
/// inner quadrature; returns the value and a combined error estimate.
fn nested<O>(support: (f64, f64), quad: &QuadSpec, mut outer: O) -> Result<(Complex64, f64), NumericsError>
where
    O: FnMut(f64) -> Result<(Complex64, f64), NumericsError>,
{
    let mut failure = None;
    let mut inner_err: f64 = 0.0;
    let res = integrate(
        |q: f64| match outer(q) {
            Ok((z, e)) => {
                inner_err = inner_err.max(e);
                z
            }
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        support.0,
        support.1,
        quad,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    Ok((res.value, res.abs_err + (support.1 - support.0) * inner_err))
}

fn inner_spec(quad: &QuadSpec) -> QuadSpec {
    QuadSpec {
        abs_tol: quad.abs_tol * 0.1,
        ..*quad
    }
}

/// `⟨φ|Tφ⟩`.
pub fn expectation<K: EvaluableKernel + ?Sized>(
    k: &K,
    phi: &BumpProfile,
    hbar: f64,
    quad: &QuadSpec,
) -> Result<Complex64, NumericsError> {
    check_hbar(hbar)?;
    let inner = inner_spec(quad);
    let (z, _) = nested(phi.support(), quad, |q| {
        let w = phi.value(q).conj();
        if w == Complex64::new(0.0, 0.0) {
            return Ok((w, 0.0));
        }
        let (t, e) = apply_at(k, |x| phi.value(x), phi.support(), q, hbar, &inner)?;
        Ok((w * t, e * w.norm()))
    })?;
    Ok(z)
}

/// How `H` acts on `Tψ` in the commutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HamiltonianRoute {
    /// `⟨φ|H Tψ⟩ = ⟨Hφ|Tψ⟩`, moving `H` onto the compactly supported `φ`.
    #[default]
    Adjoint,
    /// Order-8 central differences of the sampled `Tψ` with step
    /// `abs_tol^(1/6)`.
    FiniteDifference,
}

impl HamiltonianRoute {
    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianRoute::Adjoint => "adjoint",
            HamiltonianRoute::FiniteDifference => "finite-difference",
        }
    }
}

/// Relative commutator residual with its numerical error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    /// `|⟨φ|(HT − TH)ψ⟩ − iħ⟨φ|ψ⟩| / (ħ |⟨φ|ψ⟩|)`.
    pub residual: f64,
    pub error_budget: f64,
    pub commutator: Complex64,
    pub overlap: Complex64,
    pub params: serde_json::Value,
}

impl CommutatorReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "residual": self.residual,
            "error_budget": self.error_budget,
            "params": self.params,
        })
    }
}

const FD8: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

#[allow(clippy::too_many_arguments)]
pub fn commutator_residual<K: EvaluableKernel + ?Sized>(
    v: &Potential,
    k: &K,
    phi: &BumpProfile,
    psi: &BumpProfile,
    mu: f64,
    hbar: f64,
    quad: &QuadSpec,
    route: HamiltonianRoute,
) -> Result<CommutatorReport, NumericsError> {
    check_hbar(hbar)?;
    let (overlap, overlap_err) = inner_product(phi, psi, quad)?;
    if overlap.norm() < OVERLAP_FLOOR {
        return Err(NumericsError::ZeroOverlap(overlap.norm()));
    }
    let kin = hbar * hbar / (2.0 * mu);
    let h_of = |b: &BumpProfile, q: f64| -b.d2(q) * kin + b.value(q) * v.eval_f64(q);
    let inner = inner_spec(quad);
    let psi_supp = psi.support();

    let (commutator, err) = match route {
        HamiltonianRoute::Adjoint => nested(phi.support(), quad, |q| {
            let a = h_of(phi, q).conj();
            let b = phi.value(q).conj();
            apply_at(k, |x| a * psi.value(x) - b * h_of(psi, x), psi_supp, q, hbar, &inner)
        })?,
        HamiltonianRoute::FiniteDifference => {
            let h = quad.abs_tol.powf(1.0 / 6.0);
            let amplification = kin * 2.0 * FD8.iter().map(|c| c.abs()).sum::<f64>() / (h * h);
            nested(phi.support(), quad, |q| {
                let b = phi.value(q).conj();
                if b == Complex64::new(0.0, 0.0) {
                    return Ok((b, 0.0));
                }
                let t_psi = |x: f64| apply_at(k, |y| psi.value(y), psi_supp, x, hbar, &inner);
                let (centre, mut e) = t_psi(q)?;
                let mut d2 = centre * FD8[0];
                for (i, c) in FD8.iter().enumerate().skip(1) {
                    let (plus, e1) = t_psi(q + i as f64 * h)?;
                    let (minus, e2) = t_psi(q - i as f64 * h)?;
                    d2 += (plus + minus) * *c;
                    e = e.max(e1).max(e2);
                }
                d2 /= h * h;
                let h_t_psi = -d2 * kin + centre * v.eval_f64(q);
                let (t_h_psi, e3) = apply_at(k, |y| h_of(psi, y), psi_supp, q, hbar, &inner)?;
                Ok((b * (h_t_psi - t_h_psi), b.norm() * (e * amplification + e3)))
            })?
        }
    };
    let target = Complex64::new(0.0, hbar) * overlap;
    let denom = hbar * overlap.norm();
    let residual = (commutator - target).norm() / denom;
    let error_budget = (err + hbar * overlap_err) / denom;
    let params = json!({
        "route": route.name(),
        "mu": mu,
        "hbar": hbar,
        "abs_tol": quad.abs_tol,
        "phi": { "center": phi.center, "halfwidth": phi.halfwidth },
        "psi": { "center": psi.center, "halfwidth": psi.halfwidth },
    });
    Ok(CommutatorReport {
        residual,
        error_budget,
        commutator,
        overlap,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rational;
    use crate::kernel_solver::{solve_kernel_general, solve_kernel_harmonic, KernelRequest};

    fn free_kernel() -> FloatKernel {
        let k = solve_kernel_general(&KernelRequest::new(Potential::free(), Rational::one(), 0)).unwrap();
        FloatKernel::from(&k)
    }

    fn harmonic(omega: i64, jmax: u32) -> (Potential, FloatKernel) {
        let (one, w) = (Rational::one(), Rational::from_integer(omega));
        let k = solve_kernel_harmonic(&one, &w, jmax).unwrap();
        (Potential::harmonic(&one, &w), FloatKernel::from(&k))
    }

    #[test]
    fn free_kernel_application() {
        let k = free_kernel();
        let phi = BumpProfile::real(0.0, 1.0).unwrap();
        let quad = QuadSpec::new(1e-12);
        let out = apply_kernel(&k, &phi, &[0.0], 1.0, &quad).unwrap();
        // (1/i) ∫ ¼ q' sgn(−q') φ(q') dq' = (i/2) ∫₀¹ q' φ(q') dq'
        let oracle = integrate(|t: f64| t * phi.value(t).re, 0.0, 1.0, &quad).unwrap().value;
        assert!(out.values[0].re.abs() < 1e-14);
        assert!((out.values[0].im - 0.5 * oracle).abs() < 1e-11);
        let zero = k.scaled(0.0);
        let out = apply_kernel(&zero, &phi, &[-0.3, 0.2, 1.7], 1.0, &quad).unwrap();
        assert!(out.values.iter().all(|z| z.norm() == 0.0));
        assert!(out.to_csv().starts_with("q,re,im\n-0.3,0,0\n"));
    }

    #[test]
    fn expectation_values() {
        let (_, k) = harmonic(1, 12);
        let quad = QuadSpec::new(1e-10);
        let phi = BumpProfile::real(0.1, 0.5).unwrap();
        // Antisymmetric imaginary kernel: real φ gives zero.
        let e = expectation(&k, &phi, 1.0, &quad).unwrap();
        assert!(e.norm() < 1e-10);
        let mix = Mix(
            BumpProfile::real(-0.2, 0.5).unwrap(),
            BumpProfile::real(0.3, 0.4).unwrap(),
        );
        let e = mix.expectation(&k, 1.0, &quad);
        assert!(e.norm() > 1e-4);
        assert!(e.im.abs() < 1e-8 * e.norm());
    }

    /// `f + i g` for real bumps `f`, `g`, via bilinearity of the expectation.
    struct Mix(BumpProfile, BumpProfile);

    impl Mix {
        fn expectation<K: EvaluableKernel>(&self, k: &K, hbar: f64, quad: &QuadSpec) -> Complex64 {
            let (f, g) = (&self.0, &self.1);
            let cross = |a: &BumpProfile, b: &BumpProfile| {
                nested(a.support(), quad, |q| {
                    let w = a.value(q).conj();
                    let (t, e) = apply_at(k, |x| b.value(x), b.support(), q, hbar, &inner_spec(quad))?;
                    Ok((w * t, e))
                })
                .unwrap()
                .0
            };
            let i = Complex64::new(0.0, 1.0);
            cross(f, f) + cross(g, g) + i * cross(f, g) - i * cross(g, f)
        }
    }

    #[test]
    fn free_commutator() {
        let b = BumpProfile::real(0.0, 1.0).unwrap();
        let quad = QuadSpec::new(1e-10);
        let rep = commutator_residual(
            &Potential::free(),
            &free_kernel(),
            &b,
            &b,
            1.0,
            1.0,
            &quad,
            HamiltonianRoute::Adjoint,
        )
        .unwrap();
        assert!(rep.residual < 1e-6, "{rep:?}");
        assert!(rep.error_budget < 1e-6);
        let v = rep.to_json_value();
        assert!(v["residual"].is_number() && v["error_budget"].is_number() && v["params"]["hbar"] == 1.0);
    }

    #[test]
    fn harmonic_commutator_and_control() {
        let (v, k) = harmonic(1, 12);
        let quad = QuadSpec::new(1e-10);
        let phi = BumpProfile::real(0.0, 0.5).unwrap();
        let psi = BumpProfile::real(0.1, 0.5).unwrap();
        let rep = commutator_residual(&v, &k, &phi, &psi, 1.0, 1.0, &quad, HamiltonianRoute::Adjoint).unwrap();
        assert!(rep.residual < 1e-6, "{rep:?}");

        let bad = free_kernel().scaled(2.0);
        let rep = commutator_residual(
            &Potential::free(),
            &bad,
            &phi,
            &phi,
            1.0,
            1.0,
            &quad,
            HamiltonianRoute::Adjoint,
        )
        .unwrap();
        assert!((rep.residual - 1.0).abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn finite_difference_route_agrees() {
        let (v, k) = harmonic(1, 8);
        let quad = QuadSpec::new(1e-9);
        let phi = BumpProfile::real(0.0, 0.5).unwrap();
        let rep = commutator_residual(&v, &k, &phi, &phi, 1.0, 1.0, &quad, HamiltonianRoute::FiniteDifference).unwrap();
        assert!(rep.residual < 1e-4, "{rep:?}");
        assert_eq!(rep.params["route"], "finite-difference");
    }

    #[test]
    fn residual_falls_with_truncation_order() {
        let quad = QuadSpec::new(1e-11);
        let phi = BumpProfile::real(0.0, 1.5).unwrap();
        let psi = BumpProfile::real(0.2, 1.5).unwrap();
        let rs: Vec<f64> = [4, 8, 12]
            .iter()
            .map(|&j| {
                let (v, k) = harmonic(3, j);
                commutator_residual(&v, &k, &phi, &psi, 1.0, 1.0, &quad, HamiltonianRoute::Adjoint)
                    .unwrap()
                    .residual
            })
            .collect();
        assert!(rs[0] > rs[1] && rs[1] > rs[2], "{rs:?}");
    }

    #[test]
    fn disjoint_supports_rejected() {
        let a = BumpProfile::real(0.0, 0.5).unwrap();
        let b = BumpProfile::real(2.0, 0.5).unwrap();
        let r = commutator_residual(
            &Potential::free(),
            &free_kernel(),
            &a,
            &b,
            1.0,
            1.0,
            &QuadSpec::default(),
            HamiltonianRoute::Adjoint,
        );
        assert!(matches!(r, Err(NumericsError::ZeroOverlap(_))));
    }

    #[test]
    fn integral_form_kernel_is_evaluable() {
        let one = Rational::one();
        let v = Potential::harmonic(&one, &one);
        let ik = IntegralFormKernel {
            potential: v,
            mu: 1.0,
            quad: QuadSpec::new(1e-12),
        };
        let (_, fk) = harmonic(1, 20);
        for (q, qp) in [(0.3, 0.1), (-0.2, 0.4)] {
            let a = ik.kernel(q, qp, 1.0).unwrap();
            let b = fk.kernel(q, qp, 1.0).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }
}
