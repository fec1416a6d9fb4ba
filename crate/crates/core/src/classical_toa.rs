//! Classical local time of arrival: exact series iterates by two routes,
//! the global time of arrival by quadrature, and the convergence criterion.

use std::fmt;

use crate::algebra::{binomial, double_factorial, factorial, MomentumSeries, QPoly, Rational};
use crate::error::ToaError;
use crate::numerics::quad::{integrate, QuadSpec};

/// Polynomial potential `V(q) = Σ a_s q^s` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Potential {
    poly: QPoly,
}

impl Potential {
    pub fn new(poly: QPoly) -> Self {
        Potential { poly }
    }

    pub fn free() -> Self {
        Potential::default()
    }

    /// `½ μ ω² q²`.
    pub fn harmonic(mu: &Rational, omega: &Rational) -> Self {
        Potential::new(QPoly::monomial(2, mu * omega * omega * Rational::new(1, 2).unwrap()))
    }

    /// `λ q⁴`.
    pub fn quartic(lambda: &Rational) -> Self {
        Potential::new(QPoly::monomial(4, lambda.clone()))
    }

    /// `a q + ½ b q²`.
    pub fn linear(a: &Rational, b: &Rational) -> Self {
        Potential::new(QPoly::from_terms([
            (1, a.clone()),
            (2, b * Rational::new(1, 2).unwrap()),
        ]))
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    /// Degree `D`; the free particle and constants have degree 0.
    pub fn degree(&self) -> u32 {
        self.poly.degree().unwrap_or(0)
    }

    /// Degree ≤ 2, i.e. linear classical equations of motion.
    pub fn is_linear(&self) -> bool {
        self.degree() <= 2
    }

    pub fn coeff(&self, s: u32) -> Rational {
        self.poly.coeff(s)
    }

    pub fn is_free(&self) -> bool {
        self.poly.terms().all(|(d, _)| d == 0)
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.poly.eval_f64(q)
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V(q) = {}", self.poly)
    }
}

/// Phase-space point with arrival point `x` and mass `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    pub x: f64,
    pub mu: f64,
}

/// `∫ₓ^q (V(q) − V(q'))^k dq'` as a polynomial in `q`.
pub fn toa_moment(v: &Potential, k: u32, x: &Rational) -> QPoly {
    let vq = v.poly();
    let mut out = QPoly::zero();
    let mut vpow = QPoly::constant(Rational::one());
    for i in 0..=k {
        // C(k, i) (−1)^i V(q)^(k−i) ∫ₓ^q V(q')^i dq'
        let mut c = binomial(k, i);
        if i % 2 == 1 {
            c = -c;
        }
        let inner = vpow.integral_from(x);
        let outer = vq.pow(k - i);
        out = &out + &(&outer * &inner).scale(&c);
        vpow = &vpow * vq;
    }
    out
}

/// `P_k` with `T_k(q, p; x) = P_k(q) p^-(2k+1)`, from the closed form
/// `P_k = −((2k−1)!!/k!) μ^(k+1) ∫ₓ^q (V(q) − V(q'))^k dq'`.
pub fn toa_iterate_closed(v: &Potential, mu: &Rational, k: u32, x: &Rational) -> QPoly {
    let c = -(double_factorial(2 * k as i64 - 1) / factorial(k)) * mu.powu(k + 1);
    toa_moment(v, k, x).scale(&c)
}

/// One application of `T ↦ −(μ/p) ∫ₓ^q V'(q') ∂T/∂p dq'` on a series.
fn liouville_step(series: &MomentumSeries, dv: &QPoly, mu: &Rational, x: &Rational) -> MomentumSeries {
    let mut out = MomentumSeries::new();
    for ((j, s), poly) in series.terms() {
        // ∂/∂p p^-(2j+1) = −(2j+1) p^-(2j+2); the −μ/p prefactor gives p^-(2j+3).
        let c = mu * Rational::from_integer(2 * j as i64 + 1);
        let integrand = dv * poly;
        out.add_term(j + 1, s, &integrand.integral_from(x).scale(&c));
    }
    out
}

/// `P_k` obtained by iterating the Liouville-inverse recursion from the
/// free seed `−μ(q − x)/p`.
pub fn toa_iterate_liouville(v: &Potential, mu: &Rational, k: u32, x: &Rational) -> QPoly {
    let dv = v.poly().derivative();
    let seed = QPoly::from_terms([(1, -mu.clone()), (0, mu * x)]);
    let mut series = MomentumSeries::new();
    series.add_term(0, 0, &seed);
    for _ in 0..k {
        series = liouville_step(&series, &dv, mu, x);
    }
    series.poly(k, 0)
}

/// Partial sum `Σ_{k≤K} (−1)^k T_k` at ħ-grade 0.
pub fn local_toa(v: &Potential, mu: &Rational, x: &Rational, kmax: u32) -> MomentumSeries {
    let mut out = MomentumSeries::new();
    for k in 0..=kmax {
        let mut pk = toa_iterate_closed(v, mu, k, x);
        if k % 2 == 1 {
            pk = -&pk;
        }
        out.add_term(k, 0, &pk);
    }
    out
}

/// Potential re-centred on the arrival point: `Ṽ(t) = V(t + x)`.
pub fn shift_arrival(v: &Potential, x: &Rational) -> Potential {
    Potential::new(v.poly().shift(x))
}

/// Points in `[lo, hi]` where `V` may attain an extremum: the endpoints and
/// the roots of `V'` found by a grid scan with Newton polish.
pub fn extremum_candidates(v: &Potential, lo: f64, hi: f64) -> Vec<f64> {
    const GRID: usize = 4096;
    let mut out = vec![lo, hi];
    if lo == hi {
        return out;
    }
    let dv = v.poly().derivative();
    let d2v = dv.derivative();
    let f = |t: f64| dv.eval_f64(t);
    let step = (hi - lo) / GRID as f64;
    let mut prev_t = lo;
    let mut prev = f(lo);
    for i in 1..=GRID {
        let t = if i == GRID { hi } else { lo + step * i as f64 };
        let cur = f(t);
        if cur == 0.0 {
            out.push(t);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut a, mut b) = (prev_t, t);
            let mut fa = prev;
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let mut root = 0.5 * (a + b);
            for _ in 0..4 {
                let d = d2v.eval_f64(root);
                if d == 0.0 {
                    break;
                }
                let next = root - f(root) / d;
                if next < prev_t || next > t {
                    break;
                }
                root = next;
            }
            out.push(root);
        }
        prev_t = t;
        prev = cur;
    }
    out
}

/// Result of the local-series convergence test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceMargin {
    /// `M_q = max |V(q) − V(q')|` over the arrival interval.
    pub m_q: f64,
    /// `μ M_q / p²`.
    pub ratio: f64,
    pub converges: bool,
}

pub fn convergence_margin(v: &Potential, mu: f64, q: f64, x: f64, p: f64) -> Result<ConvergenceMargin, ToaError> {
    if p == 0.0 {
        return Err(ToaError::ZeroMomentum);
    }
    let (lo, hi) = (q.min(x), q.max(x));
    let vq = v.eval_f64(q);
    let m_q = extremum_candidates(v, lo, hi)
        .into_iter()
        .map(|t| (vq - v.eval_f64(t)).abs())
        .fold(0.0, f64::max);
    let ratio = mu * m_q / (p * p);
    Ok(ConvergenceMargin {
        m_q,
        ratio,
        converges: ratio < 0.5,
    })
}

/// Geometric bound on `|Σ_{k>K} T_k|` given the margin ratio `r`:
/// `(μ|q−x|/|p|) c_{K+1} (2r)^(K+1) / (1 − 2r)` with
/// `c_k = (2k−1)!!/(2^k k!) ≤ 1`. Infinite when `2r ≥ 1`.
pub fn series_tail_bound(ratio: f64, kmax: u32, mu: f64, q: f64, x: f64, p: f64) -> f64 {
    let two_r = 2.0 * ratio;
    if two_r >= 1.0 {
        return f64::INFINITY;
    }
    let mut c = 1.0;
    for i in 1..=(kmax + 1) {
        c *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    (mu * (q - x).abs() / p.abs()) * c * two_r.powi(kmax as i32 + 1) / (1.0 - two_r)
}

/// Global time of arrival `−sgn(p) √(μ/2) ∫ₓ^q dq' / √(H − V(q'))` by
/// adaptive quadrature.
pub fn toa_quadrature(v: &Potential, pt: &PhasePoint, tol: f64) -> Result<f64, ToaError> {
    if pt.p == 0.0 {
        return Err(ToaError::ZeroMomentum);
    }
    if pt.q == pt.x {
        return Ok(0.0);
    }
    let h = pt.p * pt.p / (2.0 * pt.mu) + v.eval_f64(pt.q);
    let (lo, hi) = (pt.q.min(pt.x), pt.q.max(pt.x));
    let guard = 1e-12 * h.abs().max(1.0);
    for t in extremum_candidates(v, lo, hi) {
        let gap = h - v.eval_f64(t);
        if gap <= guard {
            return Err(ToaError::NotAccessible { at: t, gap });
        }
    }
    let spec = QuadSpec::new(tol);
    let integral = integrate(|t: f64| 1.0 / (h - v.eval_f64(t)).sqrt(), lo, hi, &spec)
        .map_err(|e| ToaError::QuadratureFailure(e.to_string()))?;
    let direction = if pt.q > pt.x { 1.0 } else { -1.0 };
    Ok(-pt.p.signum() * (pt.mu / 2.0).sqrt() * direction * integral.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn zero() -> Rational {
        Rational::zero()
    }

    #[test]
    fn free_seed() {
        let mu = r(3, 2);
        let p0 = toa_iterate_closed(&Potential::free(), &mu, 0, &zero());
        assert_eq!(p0, QPoly::monomial(1, -mu.clone()));
        let x = r(1, 3);
        let v = Potential::quartic(&r(2, 1));
        let seed = QPoly::from_terms([(1, -mu.clone()), (0, &mu * &x)]);
        assert_eq!(toa_iterate_closed(&v, &mu, 0, &x), seed);
        assert_eq!(toa_iterate_liouville(&v, &mu, 0, &x), seed);
    }

    #[test]
    fn harmonic_iterates() {
        let (mu, w) = (r(2, 3), r(5, 4));
        let v = Potential::harmonic(&mu, &w);
        let t1 = toa_iterate_closed(&v, &mu, 1, &zero());
        assert_eq!(t1, QPoly::monomial(3, -r(1, 3) * mu.powu(3) * w.powu(2)));
        let t2 = toa_iterate_liouville(&v, &mu, 2, &zero());
        assert_eq!(t2, QPoly::monomial(5, -r(1, 5) * mu.powu(5) * w.powu(4)));
    }

    #[test]
    fn hand_oracles() {
        let (mu, lam, a) = (r(7, 5), r(-3, 2), r(4, 9));
        // ∫₀^q λ(q⁴ − q'⁴) dq' = (4/5) λ q⁵
        let t1 = toa_iterate_closed(&Potential::quartic(&lam), &mu, 1, &zero());
        assert_eq!(t1, QPoly::monomial(5, -r(4, 5) * mu.powu(2) * &lam));
        // ∫₀^q a(q − q') dq' = a q² / 2
        let v = Potential::new(QPoly::monomial(1, a.clone()));
        let t1 = toa_iterate_liouville(&v, &mu, 1, &zero());
        assert_eq!(t1, QPoly::monomial(2, -r(1, 2) * mu.powu(2) * &a));
    }

    #[test]
    fn local_toa_examples() {
        let one = Rational::one();
        let v = Potential::harmonic(&one, &one);
        let s = local_toa(&v, &one, &zero(), 2);
        // −(1/ω) (−1)^k/(2k+1) (μωq/p)^(2k+1)
        for k in 0..=2u32 {
            let c = if k % 2 == 0 {
                -r(1, 2 * k as i64 + 1)
            } else {
                r(1, 2 * k as i64 + 1)
            };
            assert_eq!(s.poly(k, 0), QPoly::monomial(2 * k + 1, c));
        }
        assert_eq!(s.len(), 3);

        let free = local_toa(&Potential::free(), &r(2, 1), &zero(), 7);
        assert_eq!(free.len(), 1);
        assert_eq!(free.poly(0, 0), QPoly::monomial(1, r(-2, 1)));

        let q = local_toa(&Potential::quartic(&one), &one, &zero(), 1);
        assert_eq!(q.poly(1, 0), QPoly::monomial(5, r(4, 5)));
        assert_eq!(q.poly(0, 0), QPoly::monomial(1, r(-1, 1)));
    }

    #[test]
    fn quadrature_examples() {
        let free = PhasePoint {
            q: 1.0,
            p: 1.0,
            x: 0.0,
            mu: 1.0,
        };
        let t = toa_quadrature(&Potential::free(), &free, 1e-12).unwrap();
        assert!((t + 1.0).abs() < 1e-12);
        let reversed = PhasePoint { p: -1.0, ..free };
        assert!((toa_quadrature(&Potential::free(), &reversed, 1e-12).unwrap() - 1.0).abs() < 1e-12);

        let one = Rational::one();
        let h = Potential::harmonic(&one, &one);
        let pt = PhasePoint {
            q: 0.2,
            p: 1.0,
            x: 0.0,
            mu: 1.0,
        };
        let t = toa_quadrature(&h, &pt, 1e-13).unwrap();
        assert!((t + 0.2f64.atan()).abs() < 1e-12, "{t}");
        let left = PhasePoint { q: -0.2, ..pt };
        assert!((toa_quadrature(&h, &left, 1e-13).unwrap() - 0.2f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_errors() {
        let one = Rational::one();
        let h = Potential::harmonic(&one, &one);
        let pt = PhasePoint {
            q: 0.2,
            p: 0.0,
            x: 0.0,
            mu: 1.0,
        };
        assert_eq!(toa_quadrature(&h, &pt, 1e-10), Err(ToaError::ZeroMomentum));
        // H = ½ + 0 at q = 0; V reaches ½ at x = 1.
        let pt = PhasePoint {
            q: 0.0,
            p: 1.0,
            x: 1.5,
            mu: 1.0,
        };
        assert!(matches!(
            toa_quadrature(&h, &pt, 1e-10),
            Err(ToaError::NotAccessible { .. })
        ));
    }

    #[test]
    fn quartic_series_vs_quadrature() {
        let one = Rational::one();
        let v = Potential::quartic(&one);
        let (q, p) = (0.1, 1.0);
        let m = convergence_margin(&v, 1.0, q, 0.0, p).unwrap();
        assert!(m.converges);
        let kmax = 6;
        let s = local_toa(&v, &one, &zero(), kmax);
        let quad = toa_quadrature(&v, &PhasePoint { q, p, x: 0.0, mu: 1.0 }, 1e-14).unwrap();
        let bound = series_tail_bound(m.ratio, kmax, 1.0, q, 0.0, p);
        assert!((s.eval(q, p, 1.0) - quad).abs() <= bound + 1e-13);
    }

    #[test]
    fn margin_examples() {
        let one = Rational::one();
        let m = convergence_margin(&Potential::free(), 1.0, 0.7, 0.0, 1.0).unwrap();
        assert_eq!((m.ratio, m.converges), (0.0, true));
        let half = Potential::new(QPoly::monomial(2, r(1, 2)));
        let m = convergence_margin(&half, 1.0, 0.2, 0.0, 1.0).unwrap();
        assert!((m.m_q - 0.02).abs() < 1e-15 && (m.ratio - 0.02).abs() < 1e-15 && m.converges);
        let m = convergence_margin(&half, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert!((m.ratio - 2.0).abs() < 1e-15 && !m.converges);
        assert_eq!(
            convergence_margin(&half, 1.0, 2.0, 0.0, 0.0),
            Err(ToaError::ZeroMomentum)
        );
        // Interior extremum: V = q³ − q on [−1, 1], V(1) = 0, max |V(q')| at ±1/√3.
        let cubic = Potential::new(QPoly::from_terms([(3, one.clone()), (1, -one)]));
        let m = convergence_margin(&cubic, 1.0, 1.0, -1.0, 1.0).unwrap();
        let expected = 2.0 / (3.0 * 3f64.sqrt());
        assert!((m.m_q - expected).abs() < 1e-14);
    }

    #[test]
    fn shift_relabels_arrival() {
        let v = Potential::new(QPoly::monomial(2, Rational::one()));
        assert_eq!(shift_arrival(&v, &zero()), v);
        let x = r(1, 1);
        assert_eq!(
            shift_arrival(&v, &x).poly(),
            &QPoly::from_terms([(2, r(1, 1)), (1, r(2, 1)), (0, r(1, 1))])
        );
        let mu = r(3, 2);
        let x = r(-2, 3);
        let shifted = local_toa(&shift_arrival(&v, &x), &mu, &zero(), 3);
        let direct = local_toa(&v, &mu, &x, 3);
        for k in 0..=3 {
            assert_eq!(shifted.poly(k, 0), direct.poly(k, 0).shift(&x));
        }
    }

    fn family(idx: usize, a: Rational, b: Rational) -> Potential {
        let half = r(1, 2);
        let poly = match idx {
            0 => QPoly::zero(),
            1 => QPoly::monomial(1, a),
            2 => QPoly::monomial(2, &half * &b),
            3 => QPoly::from_terms([(1, a), (2, &half * &b)]),
            4 => QPoly::monomial(3, a),
            _ => QPoly::monomial(4, a),
        };
        Potential::new(poly)
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-9i64..10, 1i64..6).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn routes_agree(idx in 0usize..6, a in small(), b in small(), mu in (1i64..5, 1i64..4), x in small()) {
            let v = family(idx, a, b);
            let mu = r(mu.0, mu.1);
            for k in 0..=8 {
                prop_assert_eq!(toa_iterate_closed(&v, &mu, k, &x), toa_iterate_liouville(&v, &mu, k, &x));
            }
        }

        #[test]
        fn odd_in_momentum(idx in 0usize..6, a in small(), b in small(), q in -0.5f64..0.5, p in 0.5f64..2.0) {
            let s = local_toa(&family(idx, a, b), &Rational::one(), &zero(), 5);
            prop_assert!((s.eval(q, p, 1.0) + s.eval(q, -p, 1.0)).abs() <= 1e-12 * s.eval(q, p, 1.0).abs().max(1.0));
        }

        #[test]
        fn series_within_tail_bound(
            idx in 1usize..6,
            a in (-4i64..5, 1i64..4),
            b in (1i64..5, 1i64..4),
            q in -0.4f64..0.4,
            p in 0.8f64..2.0,
        ) {
            let v = family(idx, r(a.0, a.1), r(b.0, b.1));
            let m = convergence_margin(&v, 1.0, q, 0.0, p).unwrap();
            prop_assume!(m.ratio < 0.25 && q.abs() > 1e-6);
            let kmax = 12;
            let s = local_toa(&v, &Rational::one(), &zero(), kmax);
            let quad = toa_quadrature(&v, &PhasePoint { q, p, x: 0.0, mu: 1.0 }, 1e-14).unwrap();
            let bound = series_tail_bound(m.ratio, kmax, 1.0, q, 0.0, p);
            prop_assert!((s.eval(q, p, 1.0) - quad).abs() <= 2.0 * bound + 1e-12, "diff {} bound {}", (s.eval(q, p, 1.0) - quad).abs(), bound);
        }
    }
}
