//! Basic hypergeometric series built from q-Pochhammer symbols alone.
//!
//! These are the `p → 0` limits of the theta series and serve as an
//! independent check on them: no theta function is evaluated here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorial::FactorialValue;
use crate::numeric::{ensure_finite, ensure_nonzero, C64, ZERO_DETECT_TOL};

use super::SeriesValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasicKind {
    /// `rΦs`: `Σ_{n≥0} (a;q)_n/(q,b;q)_n q^{αn(n-1)/2} zⁿ`.
    Phi,
    /// `rΨs`: `Σ_{n∈Z} (a;q)_n/(b;q)_n q^{αn(n-1)/2} zⁿ`.
    Psi,
    /// Very-well-poised `Φ` with `numerator = [t₀, t₁, …]`:
    /// `Σ_{n≥0} (1-t₀²q^{2n})/(1-t₀²) (t₀²;q)_n/(q;q)_n ∏(t₀t_m;q)_n/(qt₀/t_m;q)_n (qz)ⁿ`.
    VwpPhi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicSeries {
    pub kind: BasicKind,
    pub numerator: Vec<C64>,
    #[serde(default)]
    pub denominator: Vec<C64>,
    pub q: C64,
    #[serde(default)]
    pub alpha: C64,
    pub z: C64,
}

/// `(1 - x)` as a tracked factor, exactly zero when `x = 1` to rounding.
fn one_minus(x: C64) -> FactorialValue {
    FactorialValue::factor(1.0 - x, (x - 1.0).norm() <= ZERO_DETECT_TOL)
}

/// `(a;q)_n` for any integer `n`, with `(a;q)_{-n} = 1/(aq^{-n};q)_n`.
fn pochhammer(a: C64, q: C64, n: i64) -> FactorialValue {
    if n < 0 {
        return pochhammer(a * q.powi(n as i32), q, -n).recip();
    }
    let mut acc = FactorialValue::one();
    let mut x = a;
    for _ in 0..n {
        acc = acc * one_minus(x);
        x *= q;
    }
    acc
}

fn pochhammer_ratio(num: &[C64], den: &[C64], q: C64, n: i64) -> FactorialValue {
    let mut acc = FactorialValue::one();
    for &a in num {
        acc = acc * pochhammer(a, q, n);
    }
    for &b in den {
        acc = acc / pochhammer(b, q, n);
    }
    acc
}

fn coefficient(series: &BasicSeries, n: i64) -> Result<C64> {
    let q = series.q;
    let z = series.z;
    let nf = n as f64;
    let zn = z.powi(n as i32);
    let value = match series.kind {
        BasicKind::Phi => {
            let mut den = vec![q];
            den.extend_from_slice(&series.denominator);
            let gauss = if series.alpha == C64::new(0.0, 0.0) {
                C64::new(1.0, 0.0)
            } else {
                (series.alpha * nf * (nf - 1.0) / 2.0 * q.ln()).exp()
            };
            pochhammer_ratio(&series.numerator, &den, q, n).scale(gauss * zn)
        }
        BasicKind::Psi => {
            let gauss = if series.alpha == C64::new(0.0, 0.0) {
                C64::new(1.0, 0.0)
            } else {
                (series.alpha * nf * (nf - 1.0) / 2.0 * q.ln()).exp()
            };
            // an infinite (b;q)_n in the denominator leaves a structural zero
            pochhammer_ratio(&series.numerator, &series.denominator, q, n).scale(gauss * zn)
        }
        BasicKind::VwpPhi => {
            let (t0, ts) = series
                .numerator
                .split_first()
                .ok_or_else(|| Error::DimensionMismatch("vwp_phi needs t0".into()))?;
            let t02 = t0 * t0;
            let mut num = vec![t02];
            let mut den = vec![q];
            for &t in ts {
                num.push(t0 * t);
                den.push(q * t0 / t);
            }
            let w = one_minus(t02 * q.powi(2 * n as i32)) / one_minus(t02);
            (w * pochhammer_ratio(&num, &den, q, n)).scale((q * z).powi(n as i32))
        }
    };
    value
        .value()
        .map_err(|_| Error::Pole(format!("basic coefficient c_{n} is infinite")))
}

/// Partial sum over `window = (lo, hi)`; terms with `n < 0` are used only by `Psi`.
pub fn eval_basic(series: &BasicSeries, window: (i64, i64)) -> Result<SeriesValue> {
    if series.q.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "|q| must be < 1, got {}",
            series.q.norm()
        )));
    }
    ensure_finite(series.z, "z")?;
    ensure_finite(series.alpha, "alpha")?;
    for a in series.numerator.iter().chain(&series.denominator) {
        ensure_finite(*a, "parameter")?;
    }
    if series.kind == BasicKind::VwpPhi {
        for t in &series.numerator {
            ensure_nonzero(*t, "vwp parameter")?;
        }
    }
    let (lo, hi) = window;
    let lo = if series.kind == BasicKind::Psi {
        lo
    } else {
        lo.max(0)
    };
    if lo > hi {
        return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut edge = 0.0f64;
    for n in lo..=hi {
        let c = coefficient(series, n)?;
        sum += c;
        if n == lo || n == hi {
            edge = edge.max(c.norm());
        }
    }
    let next_zero = coefficient(series, hi + 1)
        .map(|c| c == C64::new(0.0, 0.0))
        .unwrap_or(false);
    let prev_zero = series.kind != BasicKind::Psi
        || coefficient(series, lo - 1)
            .map(|c| c == C64::new(0.0, 0.0))
            .unwrap_or(false);
    let terminated = next_zero && prev_zero;
    Ok(SeriesValue {
        value: sum,
        terms_used: (hi - lo + 1) as usize,
        terminated,
        tail_estimate: if terminated { 0.0 } else { edge },
        converged: true,
    })
}

/// The exponent and argument that turn `Σ (a)_n/(q,b)_n q^{αn(n-1)/2} zⁿ` into the
/// standard `rΦs` with the factor `((-1)ⁿq^{n(n-1)/2})^{s+1-r}`.
pub fn standard_convention(r: usize, s: usize, z: C64) -> (C64, C64) {
    let e = s as i64 + 1 - r as i64;
    let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (C64::new(e as f64, 0.0), z * sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, rel_diff};

    #[test]
    fn geometric_series() {
        let q = c(0.4, 0.2);
        let z = c(0.1, 0.05);
        let s = BasicSeries {
            kind: BasicKind::Phi,
            numerator: vec![q],
            denominator: vec![],
            q,
            alpha: c(0.0, 0.0),
            z,
        };
        let v = eval_basic(&s, (0, 40)).unwrap();
        assert!(rel_diff(v.value, 1.0 / (1.0 - z)) < 1e-14);
    }

    #[test]
    fn q_binomial_terminates() {
        // 1Φ0(q^{-N};;q,z) = (zq^{-N};q)_N
        let q = c(0.5, 0.1);
        let z = c(0.3, -0.2);
        let n = 4;
        let s = BasicSeries {
            kind: BasicKind::Phi,
            numerator: vec![q.powi(-n)],
            denominator: vec![],
            q,
            alpha: c(0.0, 0.0),
            z,
        };
        let v = eval_basic(&s, (0, 10)).unwrap();
        let rhs = (0..n).fold(c(1.0, 0.0), |acc, k| acc * (1.0 - z * q.powi(k - n)));
        assert!(rel_diff(v.value, rhs) < 1e-12);
        assert!(v.terminated);
    }

    #[test]
    fn psi_with_q_denominator_is_phi() {
        let q = c(0.45, 0.15);
        let a = vec![c(0.3, 0.4), c(-0.2, 0.5)];
        let b = vec![c(0.6, -0.1)];
        let z = c(0.2, 0.1);
        let phi = BasicSeries {
            kind: BasicKind::Phi,
            numerator: a.clone(),
            denominator: b.clone(),
            q,
            alpha: c(0.0, 0.0),
            z,
        };
        let mut pb = vec![q];
        pb.extend(b);
        let psi = BasicSeries {
            kind: BasicKind::Psi,
            numerator: a,
            denominator: pb,
            q,
            alpha: c(0.0, 0.0),
            z,
        };
        let x = eval_basic(&phi, (0, 30)).unwrap().value;
        let y = eval_basic(&psi, (-6, 30)).unwrap().value;
        assert!(rel_diff(x, y) < 1e-14);
    }

    #[test]
    fn convention_map() {
        assert_eq!(
            standard_convention(2, 1, c(0.5, 0.0)),
            (c(0.0, 0.0), c(0.5, 0.0))
        );
        assert_eq!(
            standard_convention(1, 1, c(0.5, 0.0)),
            (c(1.0, 0.0), c(-0.5, 0.0))
        );
        assert_eq!(
            standard_convention(4, 1, c(0.5, 0.0)),
            (c(-2.0, 0.0), c(0.5, 0.0))
        );
    }
}
