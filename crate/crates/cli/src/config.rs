//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use supratoa_core::{Potential, QPoly, Rational};

use crate::error::CliError;

const MAX_ORDER: u32 = 200;
const MAX_GRID: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Kernel,
    Toa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Adjoint,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub potential: Potential,
    pub mu: Rational,
    pub hbar: f64,
    pub x: Rational,
    pub jmax: u32,
    pub kmax: u32,
    pub mmax: Option<u32>,
    pub quad_abs_tol: f64,
    pub series_tol: f64,
    pub output_format: Option<Format>,
    pub output_path: Option<PathBuf>,
    pub toa_q: f64,
    pub toa_p: f64,
    pub bump_center: f64,
    pub bump_halfwidth: f64,
    pub psi_center: f64,
    pub psi_halfwidth: f64,
    pub commutator_threshold: f64,
    pub commutator_route: Route,
    pub grid_kind: GridKind,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_n: usize,
}

pub const SEED_CONFIG: &str = "\
# supratoa run configuration: one `key = value` per line, `#` starts a comment.
# Exact quantities (potential coefficients, mu, x) take integers or \"num/den\".

# Potential as comma-separated `degree:coefficient` terms, or `free`.
# This one is V(q) = q^2/2 + q^4/4.
potential = 2:1/2, 4:1/4
mu = 1
# hbar may also be a decimal.
hbar = 1
# Arrival point.
x = 0

# Kernel order in v^2 and classical series order in 1/p^2.
jmax = 6
kmax = 6
# Highest u-power kept. Omit for the default.
# mmax = 25

quad_abs_tol = 1e-10
series_tol = 1e-12

# json or csv. --format overrides.
output_format = json
# Omit to write to stdout. --out overrides.
# output_path = out.json

# Phase point for the `toa` command; also the momentum of the toa grid.
toa_q = 0.2
toa_p = 1

# Test functions phi and psi for `commutator`.
bump_center = 0
bump_halfwidth = 0.5
psi_center = 0.15
psi_halfwidth = 0.5
commutator_threshold = 1e-6
# adjoint or finite-difference
commutator_route = adjoint

# `grid`: kernel (q, q' square, grid_n^2 rows) or toa (q line at p = toa_p).
grid_kind = kernel
grid_lo = -1
grid_hi = 1
grid_n = 50
";

const KEYS: &[&str] = &[
    "potential",
    "mu",
    "hbar",
    "x",
    "jmax",
    "kmax",
    "mmax",
    "quad_abs_tol",
    "series_tol",
    "output_format",
    "output_path",
    "toa_q",
    "toa_p",
    "bump_center",
    "bump_halfwidth",
    "psi_center",
    "psi_halfwidth",
    "commutator_threshold",
    "commutator_route",
    "grid_kind",
    "grid_lo",
    "grid_hi",
    "grid_n",
];

fn bad(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Value {
        key: key.to_string(),
        msg: msg.into(),
    }
}

pub fn parse_potential(text: &str) -> Result<Potential, CliError> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("free") {
        return Ok(Potential::free());
    }
    let mut terms: BTreeMap<u32, Rational> = BTreeMap::new();
    for part in text.split(',') {
        let part = part.trim();
        let (deg, coeff) = part
            .split_once(':')
            .ok_or_else(|| bad("potential", format!("term {part:?} is not `degree:coefficient`")))?;
        let deg: u32 = deg.trim().parse().map_err(|_| {
            bad(
                "potential",
                format!("degree {:?} is not a non-negative integer", deg.trim()),
            )
        })?;
        if deg > 64 {
            return Err(bad("potential", format!("degree {deg} exceeds 64")));
        }
        let coeff: Rational = coeff.trim().parse().map_err(|e| bad("potential", format!("{e}")))?;
        if terms.insert(deg, coeff).is_some() {
            return Err(bad("potential", format!("degree {deg} appears twice")));
        }
    }
    let poly = QPoly::from_terms(terms);
    if poly.is_zero() {
        return Err(bad("potential", "all coefficients are zero; write `free` instead"));
    }
    Ok(Potential::new(poly))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut raw: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(CliError::Syntax {
                line: line_no,
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::UnknownKey {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            if raw.insert(key, (line_no, value.trim())).is_some() {
                return Err(CliError::Syntax {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        let get = |key: &str| raw.get(key).map(|(_, v)| *v).filter(|v| !v.is_empty());

        let rational = |key: &str, default: &str| -> Result<Rational, CliError> {
            get(key)
                .unwrap_or(default)
                .parse()
                .map_err(|e| bad(key, format!("{e}")))
        };
        let real = |key: &str, default: f64| -> Result<f64, CliError> {
            let Some(v) = get(key) else { return Ok(default) };
            let x = match v.parse::<Rational>() {
                Ok(r) => r.to_f64(),
                Err(_) => v
                    .parse::<f64>()
                    .map_err(|_| bad(key, format!("{v:?} is not a number")))?,
            };
            if !x.is_finite() {
                return Err(bad(key, "must be finite"));
            }
            Ok(x)
        };
        let positive = |key: &str, default: f64| -> Result<f64, CliError> {
            let x = real(key, default)?;
            if x <= 0.0 {
                return Err(bad(key, "must be positive"));
            }
            Ok(x)
        };
        let order = |key: &str, default: u32| -> Result<u32, CliError> {
            let Some(v) = get(key) else { return Ok(default) };
            let n: u32 = v
                .parse()
                .map_err(|_| bad(key, format!("{v:?} is not a non-negative integer")))?;
            if n > MAX_ORDER {
                return Err(bad(key, format!("{n} exceeds the supported maximum {MAX_ORDER}")));
            }
            Ok(n)
        };

        let potential = parse_potential(get("potential").ok_or(CliError::Missing("potential"))?)?;
        let mu = rational("mu", "1")?;
        if mu.is_zero() || mu.is_negative() {
            return Err(bad("mu", "must be positive"));
        }
        let output_format = match get("output_format") {
            None => None,
            Some("json") => Some(Format::Json),
            Some("csv") => Some(Format::Csv),
            Some(v) => return Err(bad("output_format", format!("{v:?} is not json or csv"))),
        };
        let commutator_route = match get("commutator_route").unwrap_or("adjoint") {
            "adjoint" => Route::Adjoint,
            "finite-difference" => Route::FiniteDifference,
            v => {
                return Err(bad(
                    "commutator_route",
                    format!("{v:?} is not adjoint or finite-difference"),
                ))
            }
        };
        let grid_kind = match get("grid_kind").unwrap_or("kernel") {
            "kernel" => GridKind::Kernel,
            "toa" => GridKind::Toa,
            v => return Err(bad("grid_kind", format!("{v:?} is not kernel or toa"))),
        };
        let grid_n = match get("grid_n") {
            None => 50,
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|n| (1..=MAX_GRID).contains(n))
                .ok_or_else(|| bad("grid_n", format!("{v:?} is not an integer in 1..={MAX_GRID}")))?,
        };
        let (grid_lo, grid_hi) = (real("grid_lo", -1.0)?, real("grid_hi", 1.0)?);
        if grid_hi < grid_lo {
            return Err(bad("grid_hi", "must not be below grid_lo"));
        }
        let jmax = order("jmax", 6)?;
        let mmax = match get("mmax") {
            None => None,
            Some(_) => Some(order("mmax", 0)?),
        };
        if let Some(m) = mmax {
            if m < 2 * jmax + 1 {
                return Err(bad("mmax", format!("{m} is below 2*jmax+1 = {}", 2 * jmax + 1)));
            }
        }

        Ok(RunConfig {
            potential,
            mu,
            hbar: positive("hbar", 1.0)?,
            x: rational("x", "0")?,
            jmax,
            kmax: order("kmax", 6)?,
            mmax,
            quad_abs_tol: positive("quad_abs_tol", 1e-10)?,
            series_tol: positive("series_tol", 1e-12)?,
            output_format,
            output_path: get("output_path").map(PathBuf::from),
            toa_q: real("toa_q", 0.2)?,
            toa_p: real("toa_p", 1.0)?,
            bump_center: real("bump_center", 0.0)?,
            bump_halfwidth: positive("bump_halfwidth", 0.5)?,
            psi_center: real("psi_center", 0.15)?,
            psi_halfwidth: positive("psi_halfwidth", 0.5)?,
            commutator_threshold: positive("commutator_threshold", 1e-6)?,
            commutator_route,
            grid_kind,
            grid_lo,
            grid_hi,
            grid_n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parses() {
        let c = RunConfig::parse(SEED_CONFIG).unwrap();
        assert_eq!(c.jmax, 6);
        assert_eq!(c.potential.degree(), 4);
        assert_eq!(c.output_format, Some(Format::Json));
        assert_eq!(c.mmax, None);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse("potential = free\n").unwrap();
        assert!(c.potential.is_free());
        assert_eq!(c.mu, Rational::one());
        assert_eq!(c.grid_n, 50);
        assert_eq!(c.commutator_route, Route::Adjoint);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("potential = 2:1/0", "potential"),
            ("potential = free\nmu = 3/x", "mu"),
            ("potential = free\nmu = -1", "mu"),
            ("potential = free\nhbar = 0", "hbar"),
            ("potential = free\njmax = -2", "jmax"),
            ("potential = free\njmax = 4\nmmax = 3", "mmax"),
            ("potential = free\ngrid_n = 0", "grid_n"),
            ("potential = 2:1, 2:3", "potential"),
            ("potential = 2", "potential"),
        ];
        for (text, key) in cases {
            let e = RunConfig::parse(text).unwrap_err();
            assert!(e.to_string().contains(&format!("`{key}`")), "{text:?} -> {e}");
        }
        assert!(matches!(
            RunConfig::parse("mu = 1"),
            Err(CliError::Missing("potential"))
        ));
        assert!(matches!(
            RunConfig::parse("potential = free\nfoo = 1"),
            Err(CliError::UnknownKey { .. })
        ));
        assert!(matches!(
            RunConfig::parse("potential free"),
            Err(CliError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("potential = free\nmu = 1\nmu = 2"),
            Err(CliError::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn potential_forms() {
        let v = parse_potential(" 1:-3/2 ,2:5/4 ").unwrap();
        assert!(v.is_linear());
        assert_eq!(v.coeff(1), Rational::new(-3, 2).unwrap());
        assert!(parse_potential("FREE").unwrap().is_free());
    }
}
