//! Graded power-series solution of the canonical time kernel equation
//! `−2(ħ²/μ) T_uv + [V((u+v)/2) − V((u−v)/2)] T = 0`, `T(u,0) = u/4`,
//! with closed-form and alternate-recurrence paths for special potentials
//! and structural checks on finished tables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::algebra::{binomial, factorial, GradedKernel, KernelIndex, QPoly, Rational};
use crate::classical_toa::Potential;
use crate::error::KernelError;

/// Potential, mass and truncation for a kernel solve.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelRequest {
    pub potential: Potential,
    pub mu: Rational,
    pub jmax: u32,
    pub mmax: u32,
}

impl KernelRequest {
    /// Request with `Mmax` at the natural support bound of the potential.
    pub fn new(potential: Potential, mu: Rational, jmax: u32) -> Self {
        let mmax = default_mmax(&potential, jmax);
        KernelRequest {
            potential,
            mu,
            jmax,
            mmax,
        }
    }

    pub fn with_mmax(mut self, mmax: u32) -> Self {
        self.mmax = mmax;
        self
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if self.mmax < 2 * self.jmax + 1 {
            return Err(KernelError::InvalidRequest(format!(
                "mmax = {} is below 2*jmax + 1 = {}",
                self.mmax,
                2 * self.jmax + 1
            )));
        }
        Ok(())
    }
}

/// `max(D, 2)·Jmax + 1`: at level `j` no u-power exceeds `1 + D·j`.
pub fn default_mmax(v: &Potential, jmax: u32) -> u32 {
    v.degree().max(2) * jmax + 1
}

/// Weights `w(l, r) = a_l C(l, 2r+1) / 2^(l−1)` of
/// `V((u+v)/2) − V((u−v)/2) = Σ w(l, r) u^(l−2r−1) v^(2r+1)`.
fn odd_split_weights(v: &Potential) -> Vec<(u32, u32, Rational)> {
    let mut out = Vec::new();
    for (l, a) in v.poly().terms() {
        let mut r = 0;
        while 2 * r < l {
            let w = a * binomial(l, 2 * r + 1) / Rational::from_integer(2).powu(l - 1);
            if !w.is_zero() {
                out.push((l, r, w));
            }
            r += 1;
        }
    }
    out
}

/// Fills `A[m][j][s]` for `j ≤ Jmax`, `m ≤ Mmax` from the seed
/// `A[1][0][0] = ¼` via
/// `2mj A^(s)_{m,j} = Σ_r Σ_l w(l, r) A^(s−r)_{m−l+2r, j−r−1}`.
pub fn solve_kernel_general(req: &KernelRequest) -> Result<GradedKernel, KernelError> {
    req.validate()?;
    let weights = odd_split_weights(&req.potential);
    let mut levels: Vec<BTreeMap<(u32, u32), Rational>> = vec![BTreeMap::new(); req.jmax as usize + 1];
    levels[0].insert((1, 0), Rational::new(1, 4)?);
    for j in 1..=req.jmax {
        let mut level: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (l, r, w) in &weights {
            let (l, r) = (*l, *r);
            if r + 1 > j {
                continue;
            }
            let src_j = j - r - 1;
            for ((m_src, s_src), a) in &levels[src_j as usize] {
                let m = m_src + l - 2 * r;
                if m > req.mmax {
                    continue;
                }
                *level.entry((m, s_src + r)).or_default() += w * a;
            }
        }
        let mut done = BTreeMap::new();
        for ((m, s), acc) in level {
            if acc.is_zero() {
                continue;
            }
            done.insert((m, s), acc / Rational::from_integer(2 * m as i64 * j as i64));
        }
        levels[j as usize] = done;
    }
    let mut out = GradedKernel::new(Some(req.potential.poly().clone()), req.mu.clone(), req.jmax, req.mmax);
    for (j, level) in levels.iter().enumerate() {
        for ((m, s), a) in level {
            out.set(*m, j as u32, *s, a.clone())?;
        }
    }
    Ok(out)
}

/// Closed form for `V = ½ μ ω² q²`:
/// `A[2k+1][k][0] = ¼ (μω²/2)^k / (2k+1)!`.
pub fn solve_kernel_harmonic(mu: &Rational, omega: &Rational, jmax: u32) -> Result<GradedKernel, KernelError> {
    let v = Potential::harmonic(mu, omega);
    let mut out = GradedKernel::new(Some(v.poly().clone()), mu.clone(), jmax, default_mmax(&v, jmax));
    let half_k = mu * omega * omega / Rational::from_integer(2);
    for k in 0..=jmax {
        let a = Rational::new(1, 4)? * half_k.powu(k) / factorial(2 * k + 1);
        out.set(2 * k + 1, k, 0, a)?;
    }
    Ok(out)
}

/// `β_{k,j}` for `V = λq⁴`:
/// `β_{k,j} = (β_{k,j−1} + β_{k−1,j−2}) / (2j (4j+1−6k))`, `β_{0,0} = 1`,
/// indexed `[k][j]`. Entries whose u-power `4j+1−6k` is below 1 stay zero.
pub fn anharmonic_beta_table(jmax: u32) -> Vec<Vec<Rational>> {
    let kmax = jmax / 2;
    let mut b = vec![vec![Rational::zero(); jmax as usize + 1]; kmax as usize + 1];
    b[0][0] = Rational::one();
    for j in 1..=jmax as i64 {
        for k in 0..=kmax as i64 {
            let m = 4 * j + 1 - 6 * k;
            if m < 1 || 2 * k > j {
                continue;
            }
            let mut acc = b[k as usize][j as usize - 1].clone();
            if k >= 1 && j >= 2 {
                acc += &b[k as usize - 1][j as usize - 2];
            }
            b[k as usize][j as usize] = acc / Rational::from_integer(2 * j * m);
        }
    }
    b
}

/// `ρ_{k,j}` from its own recurrence
/// `ρ_{k,j} = Σ_{r=0}^{j−2k} (j−r−1) Π_{l=0}^{r} (4(j−l)+1−6k)^(−1) ρ_{k−1,j−2−r}`,
/// seeded by `ρ_{0,j} = Π_{i=1}^{j} (4i+1)^(−1)`. Related to the β table by
/// `ρ_{k,j} = j! 2^(j−k) β_{k,j}`.
pub fn anharmonic_rho_table(jmax: u32) -> Vec<Vec<Rational>> {
    let kmax = jmax / 2;
    let mut rho = vec![vec![Rational::zero(); jmax as usize + 1]; kmax as usize + 1];
    let mut acc = Rational::one();
    for j in 0..=jmax as i64 {
        if j > 0 {
            acc = acc / Rational::from_integer(4 * j + 1);
        }
        rho[0][j as usize] = acc.clone();
    }
    for k in 1..=kmax as i64 {
        for j in (2 * k)..=jmax as i64 {
            let mut sum = Rational::zero();
            let mut lam = Rational::one();
            for r in 0..=(j - 2 * k) {
                let d = 4 * (j - r) + 1 - 6 * k;
                lam = lam / Rational::from_integer(d);
                let src = &rho[k as usize - 1][(j - 2 - r) as usize];
                sum += &(&lam * src * Rational::from_integer(j - r - 1));
            }
            rho[k as usize][j as usize] = sum;
        }
    }
    rho
}

/// Kernel for `V = λq⁴` from the β recurrence:
/// `A[4j+1−6k][j][k] = ¼ β_{k,j} (λ/2)^(j−k)`.
pub fn solve_kernel_anharmonic(lambda: &Rational, mu: &Rational, jmax: u32) -> Result<GradedKernel, KernelError> {
    let v = Potential::quartic(lambda);
    let mut out = GradedKernel::new(Some(v.poly().clone()), mu.clone(), jmax, default_mmax(&v, jmax));
    let half = lambda / Rational::from_integer(2);
    let quarter = Rational::new(1, 4)?;
    for (k, row) in anharmonic_beta_table(jmax).iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let (k, j) = (k as u32, j as u32);
            let m = 4 * j + 1 - 6 * k;
            out.set(m, j, k, &quarter * b * half.powu(j - k))?;
        }
    }
    Ok(out)
}

/// `σ_{k,j} = (σ_{k−1,j−1} + ½ σ_{k−1,j}) / (2k+1−j)`, `σ_{0,0} = 1`,
/// indexed `[k][j]` with `0 ≤ j ≤ k`.
pub fn linear_sigma_table(kmax: u32) -> Vec<Vec<Rational>> {
    let half = Rational::new(1, 2).unwrap();
    let mut sigma: Vec<Vec<Rational>> = Vec::with_capacity(kmax as usize + 1);
    sigma.push(vec![Rational::one()]);
    for k in 1..=kmax as usize {
        let prev = &sigma[k - 1];
        let row = (0..=k)
            .map(|j| {
                let mut acc = Rational::zero();
                if j >= 1 {
                    acc += &prev[j - 1];
                }
                if j < k {
                    acc += &(&half * &prev[j]);
                }
                acc / Rational::from_integer((2 * k + 1 - j) as i64)
            })
            .collect();
        sigma.push(row);
    }
    sigma
}

/// Kernel for `V = aq + ½bq²`:
/// `A[2k+1−j][k][0] = ¼ σ_{k,j} b^(k−j) a^j / (2^k k!)`.
pub fn solve_kernel_linear(a: &Rational, b: &Rational, mu: &Rational, kmax: u32) -> Result<GradedKernel, KernelError> {
    let v = Potential::linear(a, b);
    let mut out = GradedKernel::new(Some(v.poly().clone()), mu.clone(), kmax, default_mmax(&v, kmax));
    let quarter = Rational::new(1, 4)?;
    for (k, row) in linear_sigma_table(kmax).iter().enumerate() {
        let k = k as u32;
        let norm = Rational::from_integer(2).powu(k) * factorial(k);
        for (j, sigma) in row.iter().enumerate() {
            let j = j as u32;
            let c = &quarter * sigma * b.powu(k - j) * a.powu(j) / &norm;
            if !c.is_zero() {
                out.set(2 * k + 1 - j, k, 0, c)?;
            }
        }
    }
    Ok(out)
}

/// The ħ⁰ part of the kernel via the C-recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalTerm {
    /// `C_{m,j}`, nonzero entries only.
    pub c: BTreeMap<(u32, u32), Rational>,
    /// `α^(0)_{m,j} = C_{m,j} / (j! 2^(m+1) m)`.
    pub alpha: BTreeMap<(u32, u32), Rational>,
    potential: Potential,
    mu: Rational,
    jmax: u32,
}

impl ClassicalTerm {
    pub fn to_kernel(&self) -> GradedKernel {
        let mmax = default_mmax(&self.potential, self.jmax);
        let mut out = GradedKernel::new(Some(self.potential.poly().clone()), self.mu.clone(), self.jmax, mmax);
        for ((m, j), a) in &self.alpha {
            out.set(*m, *j, 0, a.clone())
                .expect("classical entries are valid slots");
        }
        out
    }
}

/// `C_{m,j} = Σ_{s=1}^{m−j} s a_s/(m−s) C_{m−s,j−1}`, `C_{m,0} = δ_{m,1}`.
pub fn classical_term(v: &Potential, mu: &Rational, jmax: u32) -> ClassicalTerm {
    let mmax = default_mmax(v, jmax);
    let coeffs: Vec<(u32, Rational)> = v
        .poly()
        .terms()
        .filter(|(d, _)| *d >= 1)
        .map(|(d, c)| (d, c.clone()))
        .collect();
    let mut c: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    c.insert((1, 0), Rational::one());
    for j in 1..=jmax {
        for m in (j + 1)..=mmax {
            let mut acc = Rational::zero();
            for (s, a) in &coeffs {
                if *s > m - j {
                    break;
                }
                if let Some(prev) = c.get(&(m - s, j - 1)) {
                    acc += &(a * Rational::from_integer(*s as i64) * prev / Rational::from_integer((m - s) as i64));
                }
            }
            if !acc.is_zero() {
                c.insert((m, j), acc);
            }
        }
    }
    let alpha = c
        .iter()
        .map(|((m, j), cv)| {
            let d = factorial(*j) * Rational::from_integer(2).powu(m + 1) * Rational::from_integer(*m as i64);
            ((*m, *j), cv / d)
        })
        .collect();
    ClassicalTerm {
        c,
        alpha,
        potential: v.clone(),
        mu: mu.clone(),
        jmax,
    }
}

/// Coefficients `α_{m,n}` of `T = Σ α_{m,n} u^m v^n` for a fixed numeric
/// `g = μ/2ħ²`, with every `n` (odd included) carried.
#[derive(Clone, Debug, PartialEq)]
pub struct UngradedKernel {
    pub g: Rational,
    pub nmax: u32,
    pub mmax: u32,
    pub alpha: BTreeMap<(u32, u32), Rational>,
}

impl UngradedKernel {
    /// Entries with odd `n`; the theory says there are none.
    pub fn odd_entries(&self) -> Vec<((u32, u32), Rational)> {
        self.alpha
            .iter()
            .filter(|((_, n), _)| n % 2 == 1)
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }

    /// `α_{m,2j}` predicted by a graded table: `Σ_s A[m][j][s] g^(j−s)`.
    pub fn matches_graded(&self, k: &GradedKernel) -> bool {
        let mut predicted: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (idx, a) in k.entries() {
            if 2 * idx.j > self.nmax || idx.m > self.mmax {
                continue;
            }
            *predicted.entry((idx.m, 2 * idx.j)).or_default() += &(a * self.g.powu(idx.j - idx.s));
        }
        predicted.retain(|_, v| !v.is_zero());
        predicted == self.alpha
    }
}

/// Ungraded recurrence
/// `mn α_{m,n} = g Σ_{l, i odd} a_l C(l,i)/2^(l−1) α_{m−1−l+i, n−1−i}`
/// with `α_{m,0} = ¼ δ_{m,1}`, used as a debug check of the even-v layout.
pub fn solve_kernel_ungraded(v: &Potential, g: &Rational, nmax: u32, mmax: u32) -> UngradedKernel {
    let mut alpha: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    alpha.insert((1, 0), Rational::new(1, 4).unwrap());
    let terms: Vec<(u32, u32, Rational)> = v
        .poly()
        .terms()
        .flat_map(|(l, a)| {
            (1..=l)
                .step_by(2)
                .map(move |i| (l, i, g * a * binomial(l, i) / Rational::from_integer(2).powu(l - 1)))
        })
        .collect();
    for n in 1..=nmax {
        for m in 1..=mmax {
            let mut acc = Rational::zero();
            for (l, i, w) in &terms {
                if n < 1 + i || m + i < 1 + l {
                    continue;
                }
                if let Some(src) = alpha.get(&(m + i - 1 - l, n - 1 - i)) {
                    acc += &(w * src);
                }
            }
            if !acc.is_zero() {
                alpha.insert((m, n), acc / Rational::from_integer(m as i64 * n as i64));
            }
        }
    }
    UngradedKernel {
        g: g.clone(),
        nmax,
        mmax,
        alpha,
    }
}

/// `⟨q|T|q'⟩ = (μ/iħ) T(q+q', q−q') sgn(q−q')` with `sgn(0) = 0`.
pub fn kernel_eval(k: &GradedKernel, q: f64, qp: f64, hbar: f64) -> Complex64 {
    let v = q - qp;
    if v == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t = k.eval_uv(q + qp, v, hbar);
    Complex64::new(0.0, -k.mu().to_f64() / hbar * t * v.signum())
}

/// Uncancelled terms of the canonical equation for a truncated table.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeResidual {
    /// `(M, N, e) → c` for `c u^M v^N g^e` in `−T_uv + g ΔV T`.
    pub terms: BTreeMap<(u32, u32, u32), Rational>,
    pub lowest_total_degree: Option<u32>,
    pub lowest_v_power: Option<u32>,
    /// Every surviving term lies outside the filled orders: its v-power
    /// needs a `j > Jmax` entry or its u-power an `m > Mmax` entry.
    pub within_truncation: bool,
}

impl PdeResidual {
    pub fn is_exact(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest index `n` of the uncancelled equation in the ungraded
    /// `α_{m,n}` numbering (`n = v-power + 1`).
    pub fn lowest_equation_index(&self) -> Option<u32> {
        self.lowest_v_power.map(|n| n + 1)
    }
}

/// Substitutes the table into `−T_uv + g [V((u+v)/2) − V((u−v)/2)] T`
/// (the canonical equation divided by `2ħ²/μ`, `g = μ/2ħ²`).
pub fn pde_residual(k: &GradedKernel, v: &Potential) -> PdeResidual {
    let mut terms: BTreeMap<(u32, u32, u32), Rational> = BTreeMap::new();
    let weights = odd_split_weights(v);
    for (KernelIndex { m, j, s }, a) in k.entries() {
        if j >= 1 {
            let c = a * Rational::from_integer(2 * m as i64 * j as i64);
            *terms.entry((m - 1, 2 * j - 1, j - s)).or_default() -= &c;
        }
        for (l, r, w) in &weights {
            let key = (m + l - 2 * r - 1, 2 * j + 2 * r + 1, j - s + 1);
            *terms.entry(key).or_default() += &(w * a);
        }
    }
    terms.retain(|_, c| !c.is_zero());
    let lowest_total_degree = terms.keys().map(|(m, n, _)| m + n).min();
    let lowest_v_power = terms.keys().map(|(_, n, _)| *n).min();
    let within_truncation = terms
        .keys()
        .all(|(m, n, _)| n.div_ceil(2) > k.jmax() || m + 1 > k.mmax());
    PdeResidual {
        terms,
        lowest_total_degree,
        lowest_v_power,
        within_truncation,
    }
}

/// Boundary conditions checked by [`boundary_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `T(u, 0) = u/4`.
    USlice,
    /// `T(0, v) = 0`: no `m = 0` coefficients.
    NoConstantInU,
    /// `dT(q,q)/dq + ∂_q T|_{q'=q} + ∂_{q'} T|_{q'=q} = 1`.
    DerivativeSum,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryCondition::USlice => "(i) T(u,0) = u/4",
            BoundaryCondition::NoConstantInU => "(ii) T(0,v) = 0",
            BoundaryCondition::DerivativeSum => "(iii) derivative sum on the diagonal = 1",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub failures: Vec<(BoundaryCondition, String)>,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, c: BoundaryCondition) -> bool {
        self.failures.iter().any(|(f, _)| *f == c)
    }
}

impl fmt::Display for BoundaryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "all boundary conditions hold");
        }
        for (c, detail) in &self.failures {
            writeln!(f, "FAILED {c}: {detail}")?;
        }
        Ok(())
    }
}

pub fn boundary_check(k: &GradedKernel) -> BoundaryReport {
    let mut failures = Vec::new();
    // v = 0 keeps only j = 0 (hence s = 0) entries.
    let slice: QPoly = QPoly::from_terms(k.entries().filter(|(i, _)| i.j == 0).map(|(i, a)| (i.m, a.clone())));
    let quarter_u = QPoly::monomial(1, Rational::new(1, 4).unwrap());
    if slice != quarter_u {
        failures.push((BoundaryCondition::USlice, format!("T(u,0) = {slice}")));
    }
    let m_zero = k.entries().filter(|(i, _)| i.m == 0).count();
    if m_zero > 0 {
        failures.push((BoundaryCondition::NoConstantInU, format!("{m_zero} entries with m = 0")));
    }
    // Odd v-powers are absent, so the sum reduces to 2 Σ m α_{m,0} 2^m q^(m−1).
    let sum = QPoly::from_terms(slice.terms().filter(|(m, _)| *m >= 1).map(|(m, a)| {
        (
            m - 1,
            a * Rational::from_integer(2 * m as i64) * Rational::from_integer(2).powu(m),
        )
    }));
    if sum != QPoly::constant(Rational::one()) {
        failures.push((BoundaryCondition::DerivativeSum, format!("sum = {sum}")));
    }
    BoundaryReport { failures }
}
