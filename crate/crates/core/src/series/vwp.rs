use serde_json::json;

use crate::error::{Error, Result};
use crate::factorial::{elliptic_factor, theta_factorial, FactorialValue};
use crate::numeric::{ensure_finite, ensure_nonzero, lattice_index, product, C64};
use crate::report::VerificationReport;
use crate::theta::{ModularPair, PrecisionPolicy};

use super::eval::{sum_forward, sum_window, Stop};
use super::{SeriesValue, Termination, VwpKind, VwpSpec};

/// Summation range for a very-well-poised series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VwpRange {
    /// Unilateral summation from `n = 0`.
    From0(Termination),
    /// Partial sum over `n ∈ [lo, hi]`.
    Window(i64, i64),
}

/// Pairs `(a_m, b_m)` of the factorials `θ(a_m;p;q)_n / θ(b_m;p;q)_n`.
fn factor_pairs(spec: &VwpSpec) -> Vec<(C64, C64)> {
    let q = spec.nome.q;
    let t0 = spec.t0;
    let mut pairs = Vec::with_capacity(spec.ts.len() + 1);
    if spec.kind == VwpKind::Unilateral {
        pairs.push((t0 * t0, q));
    }
    pairs.extend(spec.ts.iter().map(|&t| (t0 * t, q * t0 / t)));
    pairs
}

fn ratio_fn(spec: &VwpSpec) -> impl Fn(i64) -> Result<FactorialValue> + '_ {
    let pairs = factor_pairs(spec);
    move |n| {
        let Some(qn) = power(spec.nome.q, n) else {
            return Err(Error::Domain("negative powers need q != 0".into()));
        };
        let mut acc = FactorialValue::scalar(spec.nome.q * spec.z);
        for &(a, b) in &pairs {
            acc = acc * FactorialValue::theta(a * qn, spec.nome.p)?;
            acc = acc / FactorialValue::theta(b * qn, spec.nome.p)?;
        }
        Ok(acc)
    }
}

fn power(q: C64, n: i64) -> Option<C64> {
    if n < 0 && q == C64::new(0.0, 0.0) {
        None
    } else {
        Some(q.powi(n as i32))
    }
}

/// `θ(t₀²q^{2n};p)/θ(t₀²;p)`.
fn weight_fn(spec: &VwpSpec) -> impl Fn(i64) -> Result<FactorialValue> + '_ {
    let t02 = spec.t0 * spec.t0;
    move |n| {
        let q2n = power(spec.nome.q, 2 * n)
            .ok_or_else(|| Error::Domain("negative powers need q != 0".into()))?;
        Ok(FactorialValue::theta(t02 * q2n, spec.nome.p)?
            / FactorialValue::theta(t02, spec.nome.p)?)
    }
}

/// The coefficient `c_n` computed directly from its factorials.
pub fn vwp_coefficient(spec: &VwpSpec, n: i64) -> Result<FactorialValue> {
    spec.validate()?;
    let mut acc = weight_fn(spec)(n)?;
    for (a, b) in factor_pairs(spec) {
        acc = acc * theta_factorial(a, &spec.nome, n)? / theta_factorial(b, &spec.nome, n)?;
    }
    let qz = spec.nome.q * spec.z;
    if n < 0 && qz == C64::new(0.0, 0.0) {
        return Err(Error::Domain("negative indices need q z != 0".into()));
    }
    Ok(acc.scale(qz.powi(n as i32)))
}

/// The very-well-poised series `_{r+1}E_r(t₀;t₁,…,t_{r-4};q,p;z)` (unilateral)
/// or `_rG_r` (bilateral).
pub fn eval_vwp(spec: &VwpSpec, range: VwpRange) -> Result<SeriesValue> {
    spec.validate()?;
    match range {
        VwpRange::From0(termination) => {
            if spec.kind == VwpKind::Bilateral {
                return Err(Error::Domain(
                    "a bilateral series needs an explicit window".into(),
                ));
            }
            if let Termination::Declared(decl) = termination {
                decl.check(spec.shifted_param(decl.param_index)?, &spec.nome)?;
            }
            let tol = PrecisionPolicy::default().series_tol;
            sum_forward(ratio_fn(spec), weight_fn(spec), termination.into(), tol)
        }
        VwpRange::Window(lo, hi) => {
            if lo < 0 && spec.nome.q * spec.z == C64::new(0.0, 0.0) {
                return Err(Error::Domain("negative indices need q z != 0".into()));
            }
            sum_window(ratio_fn(spec), weight_fn(spec), lo, hi)
        }
    }
}

/// Cutoff for the additive very-well-poised series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdditiveTermination {
    /// `u₀ + u_m` (or `2u₀` for `m = 0`) equals `-N` modulo the `τ/σ` lattice.
    Declared {
        index: usize,
        n: u32,
    },
    Terms(usize),
    Cap(usize),
}

/// The additive form of the unilateral very-well-poised series,
/// `Σ [2u₀+2n]/[2u₀] ∏_{m=0}^{r-4} [u₀+u_m]_n/[u₀+1-u_m]_n zⁿ q^{n(Σu_m-(r-7)/2)}`.
///
/// `us` holds `u₁,…,u_{r-4}`; the `m = 0` factor is `[2u₀]_n/[1]_n`.
pub fn eval_vwp_additive(
    u0: C64,
    us: &[C64],
    pair: &ModularPair,
    z: C64,
    termination: AdditiveTermination,
) -> Result<SeriesValue> {
    pair.validate()?;
    ensure_finite(u0, "u0")?;
    ensure_finite(z, "z")?;
    for (i, u) in us.iter().enumerate() {
        ensure_finite(*u, &format!("u{}", i + 1))?;
    }
    let r = us.len() + 4;
    let mut all = vec![u0];
    all.extend_from_slice(us);
    let total: C64 = all.iter().sum();
    let step = pair.q_pow(total - (r as f64 - 7.0) / 2.0) * z;

    let stop = match termination {
        AdditiveTermination::Declared { index, n } => {
            let u = all.get(index).ok_or_else(|| {
                Error::DimensionMismatch(format!(
                    "truncation index {index} outside u0..u{}",
                    us.len()
                ))
            })?;
            let shifted = u0 + u;
            let nome = pair.nome()?;
            let x = pair.q_pow(shifted) * nome.q.powi(n as i32);
            if lattice_index(x, nome.p).is_none() {
                return Err(Error::Constraint(format!(
                    "u0 + u{index} is not -{n} modulo the period lattice"
                )));
            }
            Stop::Exact(n as usize)
        }
        AdditiveTermination::Terms(n) => Stop::Terms(n),
        AdditiveTermination::Cap(n) => Stop::Cap(n),
    };

    let ratio = |n: i64| -> Result<FactorialValue> {
        let nf = n as f64;
        let mut acc = FactorialValue::scalar(step);
        for (m, &u) in all.iter().enumerate() {
            acc = acc * elliptic_factor(u0 + u + nf, pair)?;
            let den = if m == 0 {
                C64::new(1.0, 0.0)
            } else {
                u0 + 1.0 - u
            };
            acc = acc / elliptic_factor(den + nf, pair)?;
        }
        Ok(acc)
    };
    let weight = |n: i64| -> Result<FactorialValue> {
        Ok(elliptic_factor(2.0 * u0 + 2.0 * n as f64, pair)? / elliptic_factor(2.0 * u0, pair)?)
    };
    sum_forward(ratio, weight, stop, PrecisionPolicy::default().series_tol)
}

/// Checks the split of a bilateral very-well-poised window sum over `[-M, M']`
/// into two unilateral partial sums: one over `[0, M']` at the original
/// argument, and one over `[0, M-1]` in `q/t₀` at the reflected argument.
pub fn ge_split_check(
    spec: &VwpSpec,
    m: usize,
    m_prime: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if spec.kind != VwpKind::Bilateral {
        return Err(Error::Domain(
            "the split applies to a bilateral series".into(),
        ));
    }
    spec.validate()?;
    ensure_nonzero(spec.z, "z")?;
    let (q, p) = (spec.nome.q, spec.nome.p);
    ensure_nonzero(q, "q")?;
    let t0 = spec.t0;
    let r = spec.r() as i32;
    let lhs = eval_vwp(spec, VwpRange::Window(-(m as i64), m_prime as i64))?;

    let mut first_ts = spec.ts.clone();
    first_ts.push(q / t0);
    let first = VwpSpec::unilateral(t0, first_ts, spec.z, spec.nome);
    let first_sum = eval_vwp(&first, VwpRange::From0(Termination::Terms(m_prime)))?;

    let mut rhs = first_sum.value;
    let mut terms = lhs.terms_used + first_sum.terms_used;
    if m > 0 {
        let tsq: Vec<C64> = spec.ts.iter().map(|t| t * t).collect();
        let base = spec.z * product(&tsq);
        let mut second_ts = spec.ts.clone();
        second_ts.push(t0);
        let second = VwpSpec::unilateral(q / t0, second_ts, q.powi(r - 8) / base, spec.nome);
        let second_sum = eval_vwp(&second, VwpRange::From0(Termination::Terms(m - 1)))?;
        let t0inv2 = (t0 * t0).inv();
        let mut pre = FactorialValue::scalar(q.powi(r - 7) / base)
            * FactorialValue::theta(t0inv2 * q * q, p)?
            / FactorialValue::theta(t0inv2, p)?;
        for &t in &spec.ts {
            pre = pre * FactorialValue::theta(t / t0, p)? / FactorialValue::theta(q / (t0 * t), p)?;
        }
        rhs += pre.value()? * second_sum.value;
        terms += second_sum.terms_used;
    }
    let echo = json!({ "spec": spec, "M": m, "M_prime": m_prime });
    Ok(VerificationReport::compare(
        lhs.value, rhs, tol, echo, terms,
    ))
}
