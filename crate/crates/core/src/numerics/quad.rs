//! Globally adaptive Gauss-Kronrod (7, 15) quadrature over real or complex
//! integrands.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::NumericsError;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (non-negative half).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the embedded 7-point Gauss rule, at XGK[1], XGK[3], XGK[5], 0.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Embedded rule pair used by [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QuadRule {
    #[default]
    GaussKronrod15,
}

/// Absolute-error target and refinement limits for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub max_depth: u32,
    pub rule: QuadRule,
}

impl QuadSpec {
    pub fn new(abs_tol: f64) -> Self {
        QuadSpec {
            abs_tol,
            ..Default::default()
        }
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-10,
            max_depth: 50,
            rule: QuadRule::GaussKronrod15,
        }
    }
}

/// Values that can be integrated: a vector space over `f64` with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    pub abs_err: f64,
    pub evals: usize,
}

struct Panel<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    err: f64,
    at_floor: bool,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Returns the Kronrod value, its error estimate, and whether that estimate
/// sits at the roundoff floor.
fn gk15<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = fc.norm() * WGK[7];
    let mut fvals = [(V::zero(), V::zero()); 7];
    for (i, slot) in fvals.iter_mut().enumerate() {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron = kron + (f1 + f2) * WGK[i];
        abs_k += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[i / 2];
        }
        *slot = (f1, f2);
    }
    let mean = kron * 0.5;
    let mut asc = (fc - mean).norm() * WGK[7];
    for (i, (f1, f2)) in fvals.iter().enumerate() {
        asc += ((*f1 - mean).norm() + (*f2 - mean).norm()) * WGK[i];
    }
    let result = kron * half;
    let res_asc = asc * half.abs();
    let res_abs = abs_k * half.abs();
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let mut at_floor = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor >= err {
        err = floor;
        at_floor = true;
    }
    (result, err, at_floor)
}

/// Integrates `f` over `[a, b]` to an absolute error of `spec.abs_tol`.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult<V>, NumericsError>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    integrate_panels(&mut f, &[a, b], spec)
}

/// Like [`integrate`], with every point of `breaks` forced to be a panel
/// boundary. `breaks` must be sorted; points outside it are ignored.
pub fn integrate_with_breaks<V, F>(mut f: F, breaks: &[f64], spec: &QuadSpec) -> Result<QuadResult<V>, NumericsError>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    integrate_panels(&mut f, breaks, spec)
}

fn integrate_panels<V, F>(f: &mut F, breaks: &[f64], spec: &QuadSpec) -> Result<QuadResult<V>, NumericsError>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    if spec.abs_tol.is_nan() || spec.abs_tol <= 0.0 {
        return Err(NumericsError::InvalidParameter(format!(
            "abs_tol must be positive, got {}",
            spec.abs_tol
        )));
    }
    if breaks.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::InvalidParameter("non-finite integration limit".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = 0.0;
    let mut evals = 0usize;
    // Panels that hit the depth limit are parked here; panels whose error is
    // pure roundoff are settled and never split.
    let mut parked_err = 0.0;
    let mut settled_err = 0.0;

    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, err, at_floor) = gk15(f, a, b);
        evals += 15;
        total = total + value;
        total_err += err;
        heap.push(Panel {
            a,
            b,
            depth: 0,
            value,
            err,
            at_floor,
        });
    }

    while total_err > spec.abs_tol {
        let Some(panel) = heap.pop() else { break };
        if panel.at_floor {
            settled_err += panel.err;
            continue;
        }
        if panel.depth >= spec.max_depth {
            parked_err += panel.err;
            if parked_err > spec.abs_tol {
                return Err(NumericsError::QuadratureFailure(format!(
                    "tolerance {:e} unreachable at depth {}; error estimate {:e}",
                    spec.abs_tol, spec.max_depth, total_err
                )));
            }
            continue;
        }
        let mid = 0.5 * (panel.a + panel.b);
        let (v1, e1, f1) = gk15(f, panel.a, mid);
        let (v2, e2, f2) = gk15(f, mid, panel.b);
        evals += 30;
        total = total - panel.value + v1 + v2;
        total_err += e1 + e2 - panel.err;
        for (a, b, value, err, at_floor) in [(panel.a, mid, v1, e1, f1), (mid, panel.b, v2, e2, f2)] {
            heap.push(Panel {
                a,
                b,
                depth: panel.depth + 1,
                value,
                err,
                at_floor,
            });
        }
    }
    if !total.norm().is_finite() {
        return Err(NumericsError::QuadratureFailure("non-finite integrand value".into()));
    }
    // Error left only in roundoff-limited panels cannot be reduced further.
    if total_err - settled_err > spec.abs_tol {
        return Err(NumericsError::QuadratureFailure(format!(
            "error estimate {:e} exceeds tolerance {:e}",
            total_err, spec.abs_tol
        )));
    }
    Ok(QuadResult {
        value: total,
        abs_err: total_err.max(0.0),
        evals,
    })
}
