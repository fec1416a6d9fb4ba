use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poly::QPoly;
use super::rational::Rational;
use crate::error::AlgebraError;

/// Index of a graded kernel coefficient: the coefficient multiplies
/// `u^m · v^(2j) · (μ/2ħ²)^(j−s)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct KernelIndex {
    pub m: u32,
    pub j: u32,
    pub s: u32,
}

impl KernelIndex {
    pub fn new(m: u32, j: u32, s: u32) -> Self {
        KernelIndex { m, j, s }
    }

    /// `m ≥ 1` and `0 ≤ s ≤ max(j − 1, 0)`.
    pub fn is_valid(&self) -> bool {
        self.m >= 1 && self.s <= self.j.saturating_sub(1)
    }
}

/// Truncated kernel series `T(u, v) = Σ A[m][j][s] (μ/2ħ²)^(j−s) u^m v^(2j)`
/// with `u = q + q'`, `v = q − q'`.
///
/// Odd powers of `v` have no slot in this layout. Potential coefficients are
/// folded into `A`, so the table itself is independent of `μ` and `ħ`; `mu`
/// is carried for evaluation and phase-space transforms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedKernel {
    potential: Option<QPoly>,
    mu: Rational,
    jmax: u32,
    mmax: u32,
    entries: BTreeMap<KernelIndex, Rational>,
}

impl GradedKernel {
    pub fn new(potential: Option<QPoly>, mu: Rational, jmax: u32, mmax: u32) -> Self {
        GradedKernel {
            potential,
            mu,
            jmax,
            mmax,
            entries: BTreeMap::new(),
        }
    }

    pub fn potential(&self) -> Option<&QPoly> {
        self.potential.as_ref()
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn jmax(&self) -> u32 {
        self.jmax
    }

    pub fn mmax(&self) -> u32 {
        self.mmax
    }

    pub fn get(&self, m: u32, j: u32, s: u32) -> Rational {
        self.entries
            .get(&KernelIndex::new(m, j, s))
            .cloned()
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (KernelIndex, &Rational)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check(&self, idx: KernelIndex) -> Result<(), AlgebraError> {
        if !idx.is_valid() || idx.j > self.jmax || idx.m > self.mmax {
            return Err(AlgebraError::InvalidKernelIndex {
                m: idx.m,
                j: idx.j,
                s: idx.s,
            });
        }
        Ok(())
    }

    /// Overwrites an entry; storing zero removes it.
    pub fn set(&mut self, m: u32, j: u32, s: u32, value: Rational) -> Result<(), AlgebraError> {
        let idx = KernelIndex::new(m, j, s);
        self.check(idx)?;
        if value.is_zero() {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, value);
        }
        Ok(())
    }

    pub fn add_to(&mut self, m: u32, j: u32, s: u32, value: &Rational) -> Result<(), AlgebraError> {
        let idx = KernelIndex::new(m, j, s);
        self.check(idx)?;
        if value.is_zero() {
            return Ok(());
        }
        let slot = self.entries.entry(idx).or_default();
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&idx);
        }
        Ok(())
    }

    /// Entries at ħ-grade `s` only.
    pub fn grade(&self, s: u32) -> GradedKernel {
        let mut out = GradedKernel::new(self.potential.clone(), self.mu.clone(), self.jmax, self.mmax);
        out.entries = self
            .entries
            .iter()
            .filter(|(i, _)| i.s == s)
            .map(|(i, c)| (*i, c.clone()))
            .collect();
        out
    }

    pub fn max_grade(&self) -> Option<u32> {
        self.entries.keys().map(|i| i.s).max()
    }

    pub fn has_quantum_corrections(&self) -> bool {
        self.entries.keys().any(|i| i.s >= 1)
    }

    /// Entry-wise equality of the coefficient tables, ignoring header fields.
    pub fn same_coefficients(&self, other: &GradedKernel) -> bool {
        self.entries == other.entries
    }

    /// `self − other`, entry-wise, keeping only nonzero differences.
    pub fn coefficient_difference(&self, other: &GradedKernel) -> BTreeMap<KernelIndex, Rational> {
        let mut diff: BTreeMap<KernelIndex, Rational> = self.entries.clone();
        for (i, c) in &other.entries {
            let slot = diff.entry(*i).or_default();
            *slot -= c;
        }
        diff.retain(|_, c| !c.is_zero());
        diff
    }

    pub fn scaled(&self, factor: &Rational) -> GradedKernel {
        let mut out = GradedKernel::new(self.potential.clone(), self.mu.clone(), self.jmax, self.mmax);
        if !factor.is_zero() {
            out.entries = self.entries.iter().map(|(i, c)| (*i, c * factor)).collect();
        }
        out
    }

    /// Real kernel factor `T(u, v)` in double precision.
    pub fn eval_uv(&self, u: f64, v: f64, hbar: f64) -> f64 {
        let g = self.mu.to_f64() / (2.0 * hbar * hbar);
        self.entries
            .iter()
            .map(|(i, c)| c.to_f64() * g.powi((i.j - i.s) as i32) * u.powi(i.m as i32) * v.powi(2 * i.j as i32))
            .sum()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = KernelDoc {
            potential: self
                .potential
                .as_ref()
                .map(|p| p.terms().map(|(d, c)| (d, c.clone())).collect()),
            mu: self.mu.clone(),
            jmax: self.jmax,
            mmax: self.mmax,
            entries: self
                .entries
                .iter()
                .map(|(i, c)| KernelRow {
                    m: i.m,
                    j: i.j,
                    s: i.s,
                    coeff: c.clone(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("kernel serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("kernel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let doc: KernelDoc = serde_json::from_str(text).map_err(|e| AlgebraError::Json(e.to_string()))?;
        let mut k = GradedKernel::new(doc.potential.map(QPoly::from_terms), doc.mu, doc.jmax, doc.mmax);
        for row in doc.entries {
            k.add_to(row.m, row.j, row.s, &row.coeff)?;
        }
        Ok(k)
    }

    /// Rows `m,j,s,coeff` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,j,s,coeff\n");
        for (i, c) in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", i.m, i.j, i.s, c));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct KernelDoc {
    potential: Option<Vec<(u32, Rational)>>,
    mu: Rational,
    jmax: u32,
    mmax: u32,
    entries: Vec<KernelRow>,
}

#[derive(Serialize, Deserialize)]
struct KernelRow {
    m: u32,
    j: u32,
    s: u32,
    coeff: Rational,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn rejects_invalid_slots() {
        let mut k = GradedKernel::new(None, r(1, 1), 3, 7);
        assert!(k.set(0, 1, 0, r(1, 1)).is_err());
        assert!(k.set(1, 0, 1, r(1, 1)).is_err());
        assert!(k.set(3, 2, 2, r(1, 1)).is_err());
        assert!(k.set(3, 4, 0, r(1, 1)).is_err());
        assert!(k.set(8, 1, 0, r(1, 1)).is_err());
        assert!(k.set(1, 0, 0, r(1, 4)).is_ok());
        assert!(k.set(3, 3, 2, r(1, 4)).is_ok());
    }

    #[test]
    fn zero_entries_not_stored() {
        let mut k = GradedKernel::new(None, r(1, 1), 2, 5);
        k.add_to(3, 1, 0, &r(1, 3)).unwrap();
        k.add_to(3, 1, 0, &r(-1, 3)).unwrap();
        assert!(k.is_empty());
        k.set(1, 0, 0, Rational::zero()).unwrap();
        assert!(k.is_empty());
    }

    #[test]
    fn json_shape() {
        let mut k = GradedKernel::new(Some(QPoly::monomial(2, r(1, 2))), r(1, 1), 0, 1);
        k.set(1, 0, 0, r(1, 4)).unwrap();
        let v = k.to_json_value();
        assert_eq!(v["entries"][0]["coeff"], "1/4");
        assert_eq!(v["entries"][0]["m"], 1);
        assert_eq!(v["potential"][0][1], "1/2");
        assert_eq!(v["mu"], "1");
        assert_eq!(v["jmax"], 0);
    }

    proptest! {
        #[test]
        fn json_roundtrip(entries in proptest::collection::vec((1u32..12, 0u32..5, 0u32..4, -40i64..40, 1i64..50), 0..20)) {
            let mut k = GradedKernel::new(Some(QPoly::from_terms([(3, r(2, 3)), (1, r(-1, 5))])), r(7, 3), 5, 12);
            for (m, j, s, n, d) in entries {
                if KernelIndex::new(m, j, s).is_valid() {
                    k.add_to(m, j, s, &r(n, d)).unwrap();
                }
            }
            let text = k.to_json();
            let back = GradedKernel::from_json(&text).unwrap();
            prop_assert_eq!(&back, &k);
            prop_assert_eq!(back.to_json(), text);
        }
    }
}
