//! Smooth compactly supported test functions.

use num_complex::Complex64;

use crate::error::NumericsError;

/// `φ(q) = A exp(−1/(1 − t²))`, `t = (q − c)/w`, for `|t| < 1`; zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    pub center: f64,
    pub halfwidth: f64,
    pub amplitude: Complex64,
}

impl BumpProfile {
    pub fn new(center: f64, halfwidth: f64, amplitude: Complex64) -> Result<Self, NumericsError> {
        if halfwidth.is_nan() || halfwidth <= 0.0 || !halfwidth.is_finite() || !center.is_finite() {
            return Err(NumericsError::InvalidParameter(format!(
                "bump needs finite center and positive halfwidth, got ({center}, {halfwidth})"
            )));
        }
        Ok(BumpProfile {
            center,
            halfwidth,
            amplitude,
        })
    }

    /// Unit real amplitude.
    pub fn real(center: f64, halfwidth: f64) -> Result<Self, NumericsError> {
        BumpProfile::new(center, halfwidth, Complex64::new(1.0, 0.0))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }

    /// `(e^g, g', g'')` in the scaled variable `t`, or `None` off support.
    fn parts(&self, q: f64) -> Option<(f64, f64, f64)> {
        let t = (q - self.center) / self.halfwidth;
        let d = 1.0 - t * t;
        if d <= 0.0 {
            return None;
        }
        let e = (-1.0 / d).exp();
        if e == 0.0 {
            return None;
        }
        let g1 = -2.0 * t / (d * d);
        let g2 = -2.0 / (d * d) - 8.0 * t * t / (d * d * d);
        Some((e, g1, g2))
    }

    pub fn value(&self, q: f64) -> Complex64 {
        match self.parts(q) {
            Some((e, _, _)) => self.amplitude * e,
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn d1(&self, q: f64) -> Complex64 {
        match self.parts(q) {
            Some((e, g1, _)) => self.amplitude * (e * g1 / self.halfwidth),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn d2(&self, q: f64) -> Complex64 {
        match self.parts(q) {
            Some((e, g1, g2)) => self.amplitude * (e * (g1 * g1 + g2) / (self.halfwidth * self.halfwidth)),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let b = BumpProfile::new(0.3, 0.5, Complex64::new(2.0, -1.0)).unwrap();
        assert_eq!(b.support(), (0.3 - 0.5, 0.8));
        assert_eq!(b.value(0.9), Complex64::new(0.0, 0.0));
        assert_eq!(b.value(-0.2), Complex64::new(0.0, 0.0));
        assert!((b.value(0.3) - Complex64::new(2.0, -1.0) * (-1f64).exp()).norm() < 1e-15);
        assert_eq!(b.d1(0.3), Complex64::new(0.0, 0.0));
        assert!(BumpProfile::real(0.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let b = BumpProfile::real(-0.1, 0.7).unwrap();
        let h = 1e-4;
        for q in [-0.7, -0.4, -0.1, 0.2, 0.5] {
            let fd1 = (b.value(q + h) - b.value(q - h)) / (2.0 * h);
            let fd2 = (b.value(q + h) - b.value(q) * 2.0 + b.value(q - h)) / (h * h);
            assert!((fd1 - b.d1(q)).norm() < 1e-6 * b.d1(q).norm().max(1.0), "q={q}");
            assert!((fd2 - b.d2(q)).norm() < 1e-5 * b.d2(q).norm().max(1.0), "q={q}");
        }
    }
}
