use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::rational::{binomial, Rational};

/// Univariate polynomial in `q` with exact rational coefficients.
///
/// Sparse: zero coefficients are never stored, so the zero polynomial is the
/// empty map.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: BTreeMap<u32, Rational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::monomial(0, c)
    }

    pub fn monomial(deg: u32, c: Rational) -> Self {
        let mut p = QPoly::zero();
        p.add_term(deg, c);
        p
    }

    /// `q`, the identity polynomial.
    pub fn var() -> Self {
        QPoly::monomial(1, Rational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, Rational)>>(terms: I) -> Self {
        let mut p = QPoly::zero();
        for (d, c) in terms {
            p.add_term(d, c);
        }
        p
    }

    /// Adds `c q^deg`, dropping the coefficient if it cancels to zero.
    pub fn add_term(&mut self, deg: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(deg) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest stored degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowest stored degree; `None` for the zero polynomial.
    pub fn low_degree(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn coeff(&self, deg: u32) -> Rational {
        self.coeffs.get(&deg).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            coeffs: self.coeffs.iter().map(|(d, v)| (*d, v * c)).collect(),
        }
    }

    /// Multiplies by `q^k`.
    pub fn shift_degree(&self, k: u32) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|(d, v)| (d + k, v.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> QPoly {
        let mut acc = QPoly::constant(Rational::one());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let Some(top) = self.degree() else {
            return Rational::zero();
        };
        let mut acc = Rational::zero();
        for d in (0..=top).rev() {
            acc *= x;
            if let Some(c) = self.coeffs.get(&d) {
                acc += c;
            }
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let Some(top) = self.degree() else {
            return 0.0;
        };
        let mut acc = 0.0;
        for d in (0..=top).rev() {
            acc *= x;
            if let Some(c) = self.coeffs.get(&d) {
                acc += c.to_f64();
            }
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        QPoly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(d, _)| **d > 0)
                .map(|(d, c)| (d - 1, c * Rational::from_integer(*d as i64)))
                .collect(),
        }
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> QPoly {
        QPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(d, c)| (d + 1, c / Rational::from_integer(*d as i64 + 1)))
                .collect(),
        }
    }

    /// Exact `∫_lo^hi P(t) dt`.
    pub fn definite_integral(&self, lo: &Rational, hi: &Rational) -> Rational {
        let a = self.antiderivative();
        a.eval(hi) - a.eval(lo)
    }

    /// `∫_lo^q P(t) dt` as a polynomial in the upper limit `q`.
    pub fn integral_from(&self, lo: &Rational) -> QPoly {
        let a = self.antiderivative();
        let c = a.eval(lo);
        &a - &QPoly::constant(c)
    }

    /// Returns `Q` with `Q(t) = P(t + x)` identically.
    pub fn shift(&self, x: &Rational) -> QPoly {
        if x.is_zero() {
            return self.clone();
        }
        let mut out = QPoly::zero();
        for (d, c) in &self.coeffs {
            // (t + x)^d = Σ C(d, i) x^(d-i) t^i
            for i in 0..=*d {
                out.add_term(i, c * binomial(*d, i) * x.powu(d - i));
            }
        }
        out
    }

    /// Coefficients as doubles, indexed densely by degree.
    pub fn to_dense_f64(&self) -> Vec<f64> {
        let n = self.degree().map_or(0, |d| d as usize + 1);
        let mut v = vec![0.0; n];
        for (d, c) in &self.coeffs {
            v[*d as usize] = c.to_f64();
        }
        v
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})q")?,
                _ => write!(f, "({c})q^{d}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.add_term(*d, c.clone());
        }
        out
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.add_term(*d, -c);
        }
        out
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        let mut out = QPoly::zero();
        for (da, ca) in &self.coeffs {
            for (db, cb) in &rhs.coeffs {
                out.add_term(da + db, ca * cb);
            }
        }
        out
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, -c)).collect(),
        }
    }
}
