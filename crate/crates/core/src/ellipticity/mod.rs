//! Quasiperiodicity multipliers, ellipticity and total ellipticity of term
//! ratios, and their modular invariance.
//!
//! Ellipticity in a summation index or parameter is tested multiplicatively:
//! with `w = q^x`, the shift `x → x + τ/σ` is `w → p·w`, while `x → x + 1/σ`
//! leaves `w` unchanged and holds by construction.

mod family;

pub use family::{
    check_total_ellipticity, family_from_spec, EllipticFamily, Multi1Family, Multi2Family,
    RawSpecFamily, WellPoisedFamily,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorial::elliptic_factor;
use crate::numeric::{rel_diff, C64, I};
use crate::sampling::Sampler;
use crate::series::{classify_additive, AdditiveSpec, SeriesKind};
use crate::theta::{apply_modular, ModularPair, Nome};

/// Rejection threshold: sample points where the ratio is this small (or this
/// large, inverted) sit next to a zero or pole.
pub const DEGENERATE_MODULUS: f64 = 1e-10;

/// Retries allowed per requested sample before giving up.
const RETRIES_PER_SAMPLE: usize = 64;

/// `h(x) = ∏[x+u_m] / ∏[x+v_k] · q^{βx} y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HForm {
    pub zeros: Vec<C64>,
    pub poles: Vec<C64>,
    #[serde(default)]
    pub beta: C64,
    pub y: C64,
    pub pair: ModularPair,
}

pub fn h_eval(form: &HForm, x: C64) -> Result<C64> {
    h_eval_at(form, x, &form.pair)
}

fn h_eval_at(form: &HForm, x: C64, pair: &ModularPair) -> Result<C64> {
    pair.validate_tau()?;
    let mut acc = crate::factorial::FactorialValue::scalar(form.y * pair.q_pow(form.beta * x));
    for &u in &form.zeros {
        acc = acc * elliptic_factor(x + u, pair)?;
    }
    for &v in &form.poles {
        acc = acc / elliptic_factor(x + v, pair)?;
    }
    acc.value()
        .map_err(|_| Error::Pole(format!("h has a pole at x = {x}")))
}

/// Quasiperiodicity data: `h(x+1/σ) = a h(x)`, `h(x+τ/σ) = b e^{2πiσγx} h(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub a: C64,
    pub b: C64,
    pub gamma: C64,
}

pub fn multipliers(form: &HForm) -> Multipliers {
    let (sigma, tau) = (form.pair.sigma, form.pair.tau);
    let diff = form.zeros.len() as i64 - form.poles.len() as i64;
    let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let gamma = C64::new(-diff as f64, 0.0);
    let su: C64 = form.zeros.iter().sum();
    let sv: C64 = form.poles.iter().sum();
    let a = sign * (2.0 * PI * I * form.beta).exp();
    let b = sign
        * (PI * I * tau * (gamma + 2.0 * form.beta)).exp()
        * (2.0 * PI * I * sigma * (sv - su)).exp();
    Multipliers { a, b, gamma }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    IndexPShift,
    ParamPShift,
    #[serde(rename = "modular_S")]
    ModularS,
    #[serde(rename = "modular_T")]
    ModularT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub shift_kind: ShiftKind,
    /// The shifted parameter or index variable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    pub max_rel_dev: f64,
    pub sample_count: usize,
    pub pass: bool,
    /// Outcome of a structural (parameter-identity) check, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_pass: Option<bool>,
}

impl EllipticityReport {
    fn numeric(shift_kind: ShiftKind, parameter: Option<String>, devs: &[f64], tol: f64) -> Self {
        let max = max_dev(devs);
        EllipticityReport {
            shift_kind,
            parameter,
            max_rel_dev: max,
            sample_count: devs.len(),
            pass: max <= tol,
            structural_pass: None,
        }
    }
}

/// NaN-propagating maximum.
pub(crate) fn max_dev(devs: &[f64]) -> f64 {
    devs.iter().fold(0.0, |a: f64, &b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 16,
            tol: 1e-9,
            seed: 0,
        }
    }
}

pub(crate) fn usable(v: C64) -> bool {
    let m = v.norm();
    m.is_finite() && m > DEGENERATE_MODULUS && m < 1.0 / DEGENERATE_MODULUS
}

/// Draws `count` sample points from `draw`, keeping those for which `eval`
/// succeeds with well-conditioned values, and collects the returned deviations.
pub(crate) fn collect_samples<S, D, F>(count: usize, mut draw: D, mut eval: F) -> Result<Vec<f64>>
where
    D: FnMut() -> S,
    F: FnMut(S) -> Option<f64>,
{
    let mut devs = Vec::with_capacity(count);
    let mut attempts = 0;
    while devs.len() < count {
        attempts += 1;
        if attempts > count.max(1) * RETRIES_PER_SAMPLE {
            return Err(Error::Sampling(format!(
                "only {} of {count} usable sample points after {attempts} attempts",
                devs.len()
            )));
        }
        if let Some(d) = eval(draw()) {
            devs.push(d);
        }
    }
    Ok(devs)
}

/// Invariance of a multiplicative-form term ratio under `w → p·w`.
///
/// Sample points `w` have log-modulus uniform between `ln|p|` and `0`.
pub fn check_ellipticity<F>(ratio: F, nome: &Nome, opts: &CheckOptions) -> Result<EllipticityReport>
where
    F: Fn(C64) -> Result<C64>,
{
    let p = nome.p;
    if p.norm() == 0.0 {
        return Err(Error::Domain("ellipticity needs p != 0".into()));
    }
    let mut rng = Sampler::new(opts.seed);
    let devs = collect_samples(
        opts.samples,
        || rng.log_annulus(p.norm(), 1.0),
        |w| {
            let a = ratio(w).ok()?;
            let b = ratio(p * w).ok()?;
            (usable(a) && usable(b)).then(|| rel_diff(b, a))
        },
    )?;
    Ok(EllipticityReport::numeric(
        ShiftKind::IndexPShift,
        None,
        &devs,
        opts.tol,
    ))
}

/// Invariance of a function of an additive variable under `x → x + τ/σ`.
pub fn check_ellipticity_additive<F>(
    f: F,
    pair: &ModularPair,
    opts: &CheckOptions,
) -> Result<EllipticityReport>
where
    F: Fn(C64) -> Result<C64>,
{
    pair.validate()?;
    let shift = pair.tau / pair.sigma;
    let p = pair.p();
    let two_pi_i_sigma = 2.0 * PI * I * pair.sigma;
    let mut rng = Sampler::new(opts.seed);
    let devs = collect_samples(
        opts.samples,
        || rng.log_annulus(p.norm(), 1.0).ln() / two_pi_i_sigma,
        |x| {
            let a = f(x).ok()?;
            let b = f(x + shift).ok()?;
            (usable(a) && usable(b)).then(|| rel_diff(b, a))
        },
    )?;
    Ok(EllipticityReport::numeric(
        ShiftKind::IndexPShift,
        None,
        &devs,
        opts.tol,
    ))
}

/// Measured quasiperiod quotients against [`multipliers`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub multipliers: Multipliers,
    pub max_rel_dev_a: f64,
    pub max_rel_dev_b: f64,
    pub sample_count: usize,
    pub pass: bool,
}

pub fn check_multipliers(form: &HForm, opts: &CheckOptions) -> Result<MultiplierReport> {
    form.pair.validate()?;
    let m = multipliers(form);
    let (sigma, tau) = (form.pair.sigma, form.pair.tau);
    let mut rng = Sampler::new(opts.seed);
    let mut dev_a = Vec::new();
    let devs_b = collect_samples(
        opts.samples,
        || C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5)),
        |x| {
            let h0 = h_eval(form, x).ok()?;
            let h1 = h_eval(form, x + 1.0 / sigma).ok()?;
            let h2 = h_eval(form, x + tau / sigma).ok()?;
            if !(usable(h0) && usable(h1) && usable(h2)) {
                return None;
            }
            dev_a.push(rel_diff(h1 / h0, m.a));
            let expected = m.b * (2.0 * PI * I * sigma * m.gamma * x).exp();
            Some(rel_diff(h2 / h0, expected))
        },
    )?;
    let a = max_dev(&dev_a);
    let b = max_dev(&devs_b);
    Ok(MultiplierReport {
        multipliers: m,
        max_rel_dev_a: a,
        max_rel_dev_b: b,
        sample_count: devs_b.len(),
        pass: a <= opts.tol && b <= opts.tol,
    })
}

/// Structural and numeric modular invariance of an additive spec's term ratio
/// under `(σ, τ) → (σ/τ, -1/τ)`.
///
/// The structural part requires balancing and `Σu² = Σv²` (with the implicit
/// `[n+1]` counted for the unilateral kind). The numeric part compares `h(n)`
/// at `n = 0, 1, …` under both pairs.
pub fn check_modularity(spec: &AdditiveSpec, opts: &CheckOptions) -> Result<EllipticityReport> {
    let cl = classify_additive(spec)?;
    let structural = cl.balanced && cl.modular_constraint == Some(true);
    let form = spec.to_hform();
    let image = apply_modular(spec.pair, 0, -1, 1, 0)?;
    let devs = integer_samples(&form, opts.samples, |form, x| {
        Some(rel_diff(
            h_eval_at(form, x, &image).ok()?,
            h_eval(form, x).ok()?,
        ))
    })?;
    let mut report = EllipticityReport::numeric(ShiftKind::ModularS, None, &devs, opts.tol);
    report.structural_pass = Some(structural);
    report.pass &= structural;
    Ok(report)
}

/// Numeric invariance of the term ratio under `τ → τ + 1`.
pub fn check_modular_t(spec: &AdditiveSpec, opts: &CheckOptions) -> Result<EllipticityReport> {
    spec.validate()?;
    let form = spec.to_hform();
    let image = apply_modular(spec.pair, 1, 1, 0, 1)?;
    let devs = integer_samples(&form, opts.samples, |form, x| {
        Some(rel_diff(
            h_eval_at(form, x, &image).ok()?,
            h_eval(form, x).ok()?,
        ))
    })?;
    Ok(EllipticityReport::numeric(
        ShiftKind::ModularT,
        None,
        &devs,
        opts.tol,
    ))
}

fn integer_samples<F>(form: &HForm, count: usize, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&HForm, C64) -> Option<f64>,
{
    let mut n = 0i64;
    collect_samples(
        count,
        || {
            n += 1;
            let k = n / 2;
            C64::new(if n % 2 == 0 { k } else { -k } as f64, 0.0)
        },
        |x| {
            let h = h_eval(form, x).ok()?;
            if usable(h) {
                f(form, x)
            } else {
                None
            }
        },
    )
}

/// The totally elliptic term ratio built from `u₀` and `u₁,…,u_{r-1}`:
/// `∏[x+u₀+u_m]/[x+u₀-u_m] · [x+u₀-Σu_k]/[x+u₀+Σu_k] · z`.
pub fn vwp_theorem_form(u0: C64, us: &[C64], z: C64, pair: &ModularPair) -> HForm {
    let total: C64 = us.iter().sum();
    let mut zeros: Vec<C64> = us.iter().map(|u| u0 + u).collect();
    let mut poles: Vec<C64> = us.iter().map(|u| u0 - u).collect();
    zeros.push(u0 - total);
    poles.push(u0 + total);
    HForm {
        zeros,
        poles,
        beta: C64::new(0.0, 0.0),
        y: z,
        pair: *pair,
    }
}

pub fn vwp_theorem_h(u0: C64, us: &[C64], z: C64, pair: &ModularPair, x: C64) -> Result<C64> {
    h_eval(&vwp_theorem_form(u0, us, z, pair), x)
}

/// The well-poised balanced unilateral series whose term ratio at `x = n` is
/// `vwp_theorem_h(u₀, [u₁,…,u_{r-2}, u₀-1], z)`.
///
/// Numerator `[2u₀-1, u₀+u₁, …, u₀+u_{r-2}, u₀-S]`, denominator
/// `[u₀-u₁, …, u₀-u_{r-2}, u₀+S]` with `S = u₁+⋯+u_{r-2}+u₀-1`.
pub fn well_poised_spec(u0: C64, us: &[C64], z: C64, pair: &ModularPair) -> AdditiveSpec {
    let s: C64 = us.iter().sum::<C64>() + u0 - 1.0;
    let mut numerator = vec![2.0 * u0 - 1.0];
    numerator.extend(us.iter().map(|u| u0 + u));
    numerator.push(u0 - s);
    let mut denominator: Vec<C64> = us.iter().map(|u| u0 - u).collect();
    denominator.push(u0 + s);
    AdditiveSpec {
        kind: SeriesKind::UnilateralE,
        numerator,
        denominator,
        z,
        pair: *pair,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    fn pair() -> ModularPair {
        ModularPair::new(c(0.11, 0.17), c(0.23, 0.41)).unwrap()
    }

    #[test]
    fn equal_lists_give_constant() {
        let form = HForm {
            zeros: vec![c(0.2, 0.1), c(-0.3, 0.05)],
            poles: vec![c(0.2, 0.1), c(-0.3, 0.05)],
            beta: c(0.0, 0.0),
            y: c(1.5, -0.5),
            pair: pair(),
        };
        assert!(rel_diff(h_eval(&form, c(0.37, 0.1)).unwrap(), c(1.5, -0.5)) < 1e-14);
        let m = multipliers(&form);
        assert!(rel_diff(m.a, c(1.0, 0.0)) < 1e-15);
        assert!(rel_diff(m.b, c(1.0, 0.0)) < 1e-15);
        assert_eq!(m.gamma, c(0.0, 0.0));
    }

    #[test]
    fn multipliers_match_measurement() {
        let form = HForm {
            zeros: vec![c(0.2, 0.1), c(-0.3, 0.05), c(0.45, -0.1)],
            poles: vec![c(0.6, 0.02)],
            beta: c(0.3, 0.1),
            y: c(0.7, 0.2),
            pair: pair(),
        };
        let rep = check_multipliers(&form, &CheckOptions::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn vwp_theorem_h_is_elliptic_in_x_and_u0() {
        let p = pair();
        let us = [c(0.13, 0.02), c(-0.21, 0.05), c(0.3, -0.04), c(0.07, 0.1)];
        let u0 = c(0.17, -0.03);
        let z = c(0.9, 0.1);
        let opts = CheckOptions::default();
        let rx =
            check_ellipticity_additive(|x| vwp_theorem_h(u0, &us, z, &p, x), &p, &opts).unwrap();
        assert!(rx.pass, "{rx:?}");
        let ru =
            check_ellipticity_additive(|v| vwp_theorem_h(v, &us, z, &p, c(1.0, 0.0)), &p, &opts)
                .unwrap();
        assert!(ru.pass, "{ru:?}");
        let zero = vwp_theorem_h(u0, &[c(0.0, 0.0); 3], z, &p, c(0.3, 0.0)).unwrap();
        assert!(rel_diff(zero, z) < 1e-14);
    }

    #[test]
    fn well_poised_spec_matches_theorem_h() {
        let p = pair();
        let us = [c(0.13, 0.02), c(-0.21, 0.05), c(0.3, -0.04)];
        let u0 = c(0.17, -0.03);
        let z = c(0.9, 0.1);
        let spec = well_poised_spec(u0, &us, z, &p);
        let mut full = us.to_vec();
        full.push(u0 - 1.0);
        let form = spec.to_hform();
        for n in 0..5 {
            let x = c(n as f64, 0.0);
            let a = h_eval(&form, x).unwrap();
            let b = vwp_theorem_h(u0, &full, z, &p, x).unwrap();
            assert!(rel_diff(a, b) < 1e-9);
        }
        let cl = classify_additive(&spec).unwrap();
        assert!(cl.balanced && cl.well_poised && cl.modular_constraint == Some(true));
    }

    #[test]
    fn modularity_controls() {
        let p = pair();
        let opts = CheckOptions::default();
        let spec = well_poised_spec(
            c(0.17, -0.03),
            &[c(0.13, 0.02), c(-0.21, 0.05)],
            c(0.9, 0.1),
            &p,
        );
        let r = check_modularity(&spec, &CheckOptions { tol: 1e-8, ..opts }).unwrap();
        assert!(r.pass, "{r:?}");
        let bad = AdditiveSpec {
            kind: SeriesKind::BilateralG,
            numerator: vec![c(0.3, 0.0), c(0.5, 0.0)],
            denominator: vec![c(0.6, 0.0), c(0.2, 0.0)],
            z: c(1.0, 0.0),
            pair: p,
        };
        let r = check_modularity(&bad, &CheckOptions { tol: 1e-8, ..opts }).unwrap();
        assert_eq!(r.structural_pass, Some(false));
        assert!(r.max_rel_dev > 1e-8);
        assert!(!r.pass);
    }
}
