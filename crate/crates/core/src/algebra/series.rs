use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poly::QPoly;
use super::rational::Rational;
use crate::error::AlgebraError;

/// Phase-space series `Σ P_{k,s}(q) · p^-(2k+1) · ħ^(2s)`.
///
/// Only odd inverse powers of `p` are representable. The classical part is
/// the `s = 0` slice.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct MomentumSeries {
    terms: BTreeMap<(u32, u32), QPoly>,
}

impl MomentumSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `poly · p^-(2k+1) · ħ^(2s)`; cancelled entries are removed.
    pub fn add_term(&mut self, k: u32, s: u32, poly: &QPoly) {
        if poly.is_zero() {
            return;
        }
        let entry = self.terms.entry((k, s)).or_default();
        *entry = &*entry + poly;
        if entry.is_zero() {
            self.terms.remove(&(k, s));
        }
    }

    pub fn get(&self, k: u32, s: u32) -> Option<&QPoly> {
        self.terms.get(&(k, s))
    }

    /// The polynomial at `(k, s)`, zero if absent.
    pub fn poly(&self, k: u32, s: u32) -> QPoly {
        self.terms.get(&(k, s)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &QPoly)> {
        self.terms.iter().map(|(key, p)| (*key, p))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn max_k(&self) -> Option<u32> {
        self.terms.keys().map(|(k, _)| *k).max()
    }

    /// Lowest populated ħ-grade.
    pub fn min_grade(&self) -> Option<u32> {
        self.terms.keys().map(|(_, s)| *s).min()
    }

    pub fn restrict<F: Fn(u32, u32) -> bool>(&self, keep: F) -> MomentumSeries {
        MomentumSeries {
            terms: self
                .terms
                .iter()
                .filter(|((k, s), _)| keep(*k, *s))
                .map(|(key, p)| (*key, p.clone()))
                .collect(),
        }
    }

    pub fn map_polys<F: Fn(&QPoly) -> QPoly>(&self, f: F) -> MomentumSeries {
        let mut out = MomentumSeries::new();
        for ((k, s), p) in &self.terms {
            out.add_term(*k, *s, &f(p));
        }
        out
    }

    pub fn sub(&self, other: &MomentumSeries) -> MomentumSeries {
        let mut out = self.clone();
        for ((k, s), p) in &other.terms {
            out.add_term(*k, *s, &-p);
        }
        out
    }

    /// Evaluates the series in double precision.
    pub fn eval(&self, q: f64, p: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .map(|((k, s), poly)| poly.eval_f64(q) * p.powi(-(2 * *k as i32 + 1)) * hbar.powi(2 * *s as i32))
            .sum()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let rows: Vec<SeriesRow> = self
            .terms
            .iter()
            .map(|((k, s), p)| SeriesRow {
                k: *k,
                s: *s,
                poly: p.terms().map(|(d, c)| (d, c.clone())).collect(),
            })
            .collect();
        serde_json::to_value(rows).expect("series rows serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("series rows serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let rows: Vec<SeriesRow> = serde_json::from_str(text).map_err(|e| AlgebraError::Json(e.to_string()))?;
        let mut out = MomentumSeries::new();
        for row in rows {
            let poly = QPoly::from_terms(row.poly);
            out.add_term(row.k, row.s, &poly);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRow {
    k: u32,
    s: u32,
    poly: Vec<(u32, Rational)>,
}
