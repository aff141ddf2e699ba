//! p-shifted factorials, the multiplicative theta function `θ(z;p)`, Jacobi's
//! `θ₁` in the rescaled form `[u; σ, τ]`, and the SL(2,Z) action on the
//! modular parameters.
//!
//! Conventions:
//! - `q = e^{2πiσ}`, `p = e^{2πiτ}`, and real powers `q^x` always mean
//!   `e^{2πiσx}`.
//! - `θ(z;p) = (z;p)_∞ (p/z;p)_∞`, which vanishes exactly on `z = p^{-M}`.
//!   Such zeros are detected to relative accuracy 1e-12 and reported as an
//!   exact `0` so that callers can keep structural-zero bookkeeping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ensure_finite, ensure_nonzero, lattice_index, C64, I};

/// Hard cap on the number of factors in a truncated infinite product.
const MAX_PRODUCT_FACTORS: usize = 200_000;

/// Minimum number of factors kept before the tail test may stop a product.
const MIN_PRODUCT_FACTORS: usize = 8;

/// The modular parameters `(σ, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularPair {
    pub sigma: C64,
    pub tau: C64,
}

impl ModularPair {
    /// Builds a pair with `Im σ > 0` and `Im τ > 0`.
    pub fn new(sigma: C64, tau: C64) -> Result<Self> {
        let pair = ModularPair { sigma, tau };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_tau()?;
        ensure_finite(self.sigma, "sigma")?;
        if self.sigma.im <= 0.0 {
            return Err(Error::Domain(format!(
                "Im(sigma) must be positive, got {}",
                self.sigma.im
            )));
        }
        Ok(())
    }

    /// `θ₁` only needs `Im τ > 0`; images of SL(2,Z) may leave `Im σ ≤ 0`.
    pub fn validate_tau(&self) -> Result<()> {
        ensure_finite(self.tau, "tau")?;
        ensure_finite(self.sigma, "sigma")?;
        if self.tau.im <= 0.0 {
            return Err(Error::Domain(format!(
                "Im(tau) must be positive, got {}",
                self.tau.im
            )));
        }
        Ok(())
    }

    /// `q^x = e^{2πiσx}`.
    pub fn q_pow(&self, x: C64) -> C64 {
        (2.0 * PI * I * self.sigma * x).exp()
    }

    /// `p = e^{2πiτ}`.
    pub fn p(&self) -> C64 {
        (2.0 * PI * I * self.tau).exp()
    }

    pub fn nome(&self) -> Result<Nome> {
        nome_from_modular(*self)
    }
}

/// The base `q` and nome `p`, both inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNome")]
pub struct Nome {
    pub q: C64,
    pub p: C64,
}

#[derive(Deserialize)]
struct RawNome {
    q: C64,
    p: C64,
}

impl TryFrom<RawNome> for Nome {
    type Error = Error;

    fn try_from(raw: RawNome) -> Result<Self> {
        Nome::new(raw.q, raw.p)
    }
}

impl Nome {
    pub fn new(q: C64, p: C64) -> Result<Self> {
        ensure_finite(q, "q")?;
        ensure_finite(p, "p")?;
        if q.norm() >= 1.0 || p.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "nome must lie inside the unit disk: |q| = {}, |p| = {}",
                q.norm(),
                p.norm()
            )));
        }
        Ok(Nome { q, p })
    }

    /// The same base with `p = 0`.
    pub fn trigonometric(&self) -> Nome {
        Nome {
            q: self.q,
            p: C64::new(0.0, 0.0),
        }
    }
}

/// Truncation and term-count controls for products and theta series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// An infinite product stops at the first `k ≥ 8` with `|a p^k| < product_tol`.
    pub product_tol: f64,
    /// Tail threshold for the `θ₁` exponential series.
    pub series_tol: f64,
    pub max_terms: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            product_tol: 1e-16,
            series_tol: 1e-16,
            max_terms: 512,
        }
    }
}

impl PrecisionPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.product_tol > 0.0 && self.product_tol < 1e-6) {
            return Err(Error::Domain(format!(
                "product_tol must lie in (0, 1e-6), got {}",
                self.product_tol
            )));
        }
        if self.series_tol.is_nan() || self.series_tol <= 0.0 {
            return Err(Error::Domain("series_tol must be positive".into()));
        }
        if self.max_terms < 64 {
            return Err(Error::Domain(format!(
                "max_terms must be at least 64, got {}",
                self.max_terms
            )));
        }
        Ok(())
    }
}

/// Length of a p-shifted factorial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    Finite(i64),
    Infinite,
}

/// `q = e^{2πiσ}`, `p = e^{2πiτ}`.
pub fn nome_from_modular(pair: ModularPair) -> Result<Nome> {
    pair.validate()?;
    Nome::new(pair.q_pow(C64::new(1.0, 0.0)), pair.p())
}

/// `(a;p)_n` with the default [`PrecisionPolicy`].
pub fn p_pochhammer(a: C64, p: C64, n: Extent) -> Result<C64> {
    p_pochhammer_with(a, p, n, &PrecisionPolicy::default())
}

pub fn p_pochhammer_with(a: C64, p: C64, n: Extent, policy: &PrecisionPolicy) -> Result<C64> {
    ensure_finite(a, "a")?;
    ensure_finite(p, "p")?;
    if p.norm() >= 1.0 {
        return Err(Error::Domain(format!("|p| = {} is not below 1", p.norm())));
    }
    match n {
        Extent::Finite(n) if n >= 0 => {
            let mut acc = C64::new(1.0, 0.0);
            let mut apk = a;
            for _ in 0..n {
                acc *= 1.0 - apk;
                apk *= p;
            }
            Ok(acc)
        }
        Extent::Finite(n) => {
            // (a;p)_{-n} = 1/(a p^{-n}; p)_n
            if p.norm() == 0.0 {
                return Err(Error::Domain(
                    "negative-index p-factorial needs p != 0".into(),
                ));
            }
            let m = (-n) as usize;
            let mut acc = C64::new(1.0, 0.0);
            let mut apk = a * p.powi(n as i32);
            for k in 0..m {
                if (apk - 1.0).norm() <= crate::numeric::ZERO_DETECT_TOL {
                    return Err(Error::Pole(format!(
                        "(a;p)_{n}: factor 1 - a p^{} vanishes",
                        n + k as i64
                    )));
                }
                acc *= 1.0 - apk;
                apk *= p;
            }
            Ok(acc.inv())
        }
        Extent::Infinite => {
            if p.norm() == 0.0 {
                return Ok(1.0 - a);
            }
            let mut acc = C64::new(1.0, 0.0);
            let mut apk = a;
            for k in 0..MAX_PRODUCT_FACTORS {
                if k >= MIN_PRODUCT_FACTORS && apk.norm() < policy.product_tol {
                    return Ok(acc);
                }
                acc *= 1.0 - apk;
                apk *= p;
            }
            Err(Error::NonConvergence {
                terms: MAX_PRODUCT_FACTORS,
                last: apk.norm(),
            })
        }
    }
}

/// `θ(z;p) = (z;p)_∞ (p/z;p)_∞`.
pub fn theta(z: C64, p: C64) -> Result<C64> {
    theta_with(z, p, &PrecisionPolicy::default())
}

pub fn theta_with(z: C64, p: C64, policy: &PrecisionPolicy) -> Result<C64> {
    ensure_nonzero(z, "theta argument")?;
    if theta_vanishes(z, p) {
        return Ok(C64::new(0.0, 0.0));
    }
    let left = p_pochhammer_with(z, p, Extent::Infinite, policy)?;
    let right = p_pochhammer_with(p / z, p, Extent::Infinite, policy)?;
    Ok(left * right)
}

/// True when `z` sits on the zero set `p^{-M}`, `|M| ≤ 64`.
pub fn theta_vanishes(z: C64, p: C64) -> bool {
    lattice_index(z, p).is_some()
}

/// Product `θ(z₁;p)⋯θ(z_k;p)`.
pub fn theta_product(zs: &[C64], p: C64) -> Result<C64> {
    zs.iter()
        .try_fold(C64::new(1.0, 0.0), |acc, &z| Ok(acc * theta(z, p)?))
}

/// Evaluation route for `θ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta1Method {
    /// `2 Σ_{n≥0} (-1)^n e^{πiτ(n+1/2)²} sin π(2n+1)σu`.
    Series,
    /// `p^{1/8} i q^{-u/2} (p;p)_∞ θ(q^u;p)`.
    Product,
}

/// `θ₁(u;σ,τ)`, i.e. the elliptic number `[u;σ,τ]`.
pub fn theta1(u: C64, pair: &ModularPair, method: Theta1Method) -> Result<C64> {
    theta1_with(u, pair, method, &PrecisionPolicy::default())
}

pub fn theta1_with(
    u: C64,
    pair: &ModularPair,
    method: Theta1Method,
    policy: &PrecisionPolicy,
) -> Result<C64> {
    pair.validate_tau()?;
    ensure_finite(u, "u")?;
    match method {
        Theta1Method::Series => theta1_series(u, pair, policy),
        Theta1Method::Product => theta1_product(u, pair, policy),
    }
}

/// Elliptic number `[u] = θ₁(u;σ,τ)` via the default series route.
pub fn elliptic_number(u: C64, pair: &ModularPair) -> Result<C64> {
    theta1(u, pair, Theta1Method::Series)
}

fn theta1_series(u: C64, pair: &ModularPair, policy: &PrecisionPolicy) -> Result<C64> {
    let tau = pair.tau;
    let su = pair.sigma * u;
    let decay = PI * tau.im;
    let growth = su.im.abs();
    let mut sum = C64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for n in 0..policy.max_terms {
        let h = n as f64 + 0.5;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let gauss = (PI * I * tau * h * h).exp();
        let term = sign * gauss * (PI * (2.0 * h) * su).sin();
        sum += term;
        // |sin x| ≤ e^{|Im x|}, so the Gaussian envelope bounds the term.
        let bound = (-decay * h * h + 2.0 * PI * h * growth).exp();
        last = bound;
        let past_peak = h * decay > PI * growth;
        if n >= 1 && past_peak && (bound <= policy.series_tol * sum.norm() || bound < 1e-300) {
            return Ok(2.0 * sum);
        }
    }
    Err(Error::NonConvergence {
        terms: policy.max_terms,
        last,
    })
}

fn theta1_product(u: C64, pair: &ModularPair, policy: &PrecisionPolicy) -> Result<C64> {
    let p = pair.p();
    // p^{1/8} is fixed by τ as e^{πiτ/4}, matching the series route.
    let p8 = (PI * I * pair.tau / 4.0).exp();
    let qu = pair.q_pow(u);
    let q_half = pair.q_pow(-u / 2.0);
    let pp = p_pochhammer_with(p, p, Extent::Infinite, policy)?;
    let th = theta_with(qu, p, policy)?;
    Ok(p8 * I * q_half * pp * th)
}

/// Image of `(σ, τ)` under `τ → (aτ+b)/(cτ+d)`, `σ → σ/(cτ+d)`.
///
/// `Im τ` stays positive; `Im σ` of the image is not constrained.
pub fn apply_modular(pair: ModularPair, a: i64, b: i64, c: i64, d: i64) -> Result<ModularPair> {
    let det = a * d - b * c;
    if det != 1 {
        return Err(Error::Determinant(det));
    }
    pair.validate_tau()?;
    let denom = pair.tau * c as f64 + d as f64;
    Ok(ModularPair {
        sigma: pair.sigma / denom,
        tau: (pair.tau * a as f64 + b as f64) / denom,
    })
}

/// `(-iτ)^{1/2}` on the branch with positive real part.
pub fn modular_s_root(tau: C64) -> Result<C64> {
    let r = (-I * tau).sqrt();
    if r.re > 0.0 {
        Ok(r)
    } else if r.re < 0.0 {
        Ok(-r)
    } else {
        Err(Error::Branch(format!(
            "(-i tau)^(1/2) is purely imaginary at tau = {tau}"
        )))
    }
}

/// `[u;σ/τ,-1/τ] / [u;σ,τ] = -i (-iτ)^{1/2} e^{πiσ²u²/τ}`.
pub fn modular_s_multiplier(u: C64, pair: &ModularPair) -> Result<C64> {
    let root = modular_s_root(pair.tau)?;
    Ok(-I * root * (PI * I * pair.sigma * pair.sigma * u * u / pair.tau).exp())
}

/// `[u;σ,τ+1] / [u;σ,τ] = e^{πi/4}`.
pub fn modular_t_multiplier() -> C64 {
    (PI * I / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, rel_diff};

    #[test]
    fn nome_from_modular_examples() {
        let half = ModularPair::new(c(0.0, 2f64.ln() / (2.0 * PI)), c(0.0, 1.0)).unwrap();
        let nome = nome_from_modular(half).unwrap();
        assert!(rel_diff(nome.q, c(0.5, 0.0)) < 1e-14);

        let pair = ModularPair::new(c(0.0, 0.3), c(0.0, 0.5)).unwrap();
        let nome = nome_from_modular(pair).unwrap();
        // direct exponentials
        assert!(rel_diff(nome.q, c((-0.6 * PI).exp(), 0.0)) < 1e-14);
        assert!(rel_diff(nome.p, c((-PI).exp(), 0.0)) < 1e-14);
        assert!((nome.q.re - 0.151_835_8).abs() < 1e-6);
        assert!((nome.p.re - 0.043_213_9).abs() < 1e-6);
    }

    #[test]
    fn nome_rejects_real_tau() {
        let bad = ModularPair {
            sigma: c(0.0, 0.3),
            tau: c(0.7, 0.0),
        };
        assert!(matches!(nome_from_modular(bad), Err(Error::Domain(_))));
        assert!(ModularPair::new(c(0.2, 0.0), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn pochhammer_small_cases() {
        let p = c(0.5, 0.0);
        assert_eq!(
            p_pochhammer(c(0.3, 0.2), p, Extent::Finite(0)).unwrap(),
            c(1.0, 0.0)
        );
        let v = p_pochhammer(c(0.3, 0.0), p, Extent::Finite(2)).unwrap();
        assert!((v - c(0.595, 0.0)).norm() < 1e-15);
        let a = c(0.3, 0.1);
        let neg = p_pochhammer(a, p, Extent::Finite(-1)).unwrap();
        assert!(rel_diff(neg, (1.0 - a / p).inv()) < 1e-15);
    }

    #[test]
    fn pochhammer_negative_index_pole() {
        let p = c(0.5, 0.0);
        // (p;p)_{-1} = 1/(1;p)_1
        assert!(matches!(
            p_pochhammer(p, p, Extent::Finite(-1)),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn pochhammer_infinite_matches_long_finite_product() {
        let p = c(0.3, 0.2);
        let a = c(0.7, -0.4);
        let inf = p_pochhammer(a, p, Extent::Infinite).unwrap();
        let fin = p_pochhammer(a, p, Extent::Finite(200)).unwrap();
        assert!(rel_diff(inf, fin) < 1e-15);
    }

    #[test]
    fn theta_at_zero_nome_is_linear() {
        assert_eq!(theta(c(0.5, 0.0), c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
        let z = c(0.3, -1.7);
        assert_eq!(theta(z, c(0.0, 0.0)).unwrap(), 1.0 - z);
    }

    #[test]
    fn theta_vanishes_on_lattice() {
        let p = c(0.2, 0.3);
        assert_eq!(theta(c(1.0, 0.0), p).unwrap(), c(0.0, 0.0));
        assert_eq!(theta(p.powi(-2), p).unwrap(), c(0.0, 0.0));
        assert_eq!(theta(p, p).unwrap(), c(0.0, 0.0));
        assert!(theta(c(0.0, 0.0), p).is_err());
    }

    #[test]
    fn theta_p_shift() {
        let z = c(0.3, 0.1);
        let p = c(0.2, 0.0);
        let lhs = theta(p * z, p).unwrap();
        let rhs = -z.inv() * theta(z, p).unwrap();
        assert!(rel_diff(lhs, rhs) < 1e-12);
    }

    #[test]
    fn theta1_zero_and_cross_check() {
        let pair = ModularPair::new(c(0.0, 0.21), c(0.0, 0.43)).unwrap();
        assert_eq!(
            theta1(c(0.0, 0.0), &pair, Theta1Method::Series).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(
            theta1(c(0.0, 0.0), &pair, Theta1Method::Product).unwrap(),
            c(0.0, 0.0)
        );
        let u = c(0.37, 0.0);
        let s = theta1(u, &pair, Theta1Method::Series).unwrap();
        let pr = theta1(u, &pair, Theta1Method::Product).unwrap();
        assert!(rel_diff(s, pr) <= 1e-11, "{s} vs {pr}");
    }

    #[test]
    fn theta1_first_quasiperiod() {
        let pair = ModularPair::new(c(0.15, 0.3), c(0.1, 0.8)).unwrap();
        let u = c(0.2, 0.1);
        let shifted = elliptic_number(u + pair.sigma.inv(), &pair).unwrap();
        let base = elliptic_number(u, &pair).unwrap();
        assert!(rel_diff(shifted, -base) < 1e-10);
    }

    #[test]
    fn apply_modular_generators() {
        let pair = ModularPair::new(c(0.1, 0.3), c(0.2, 0.7)).unwrap();
        let t = apply_modular(pair, 1, 1, 0, 1).unwrap();
        assert_eq!(t.sigma, pair.sigma);
        assert!((t.tau - (pair.tau + 1.0)).norm() < 1e-15);
        let s = apply_modular(pair, 0, -1, 1, 0).unwrap();
        assert!(rel_diff(s.sigma, pair.sigma / pair.tau) < 1e-15);
        assert!(rel_diff(s.tau, -pair.tau.inv()) < 1e-15);
        assert!(s.tau.im > 0.0);
        assert_eq!(apply_modular(pair, 1, 0, 0, 1).unwrap(), pair);
        assert!(matches!(
            apply_modular(pair, 1, 1, 1, 1),
            Err(Error::Determinant(0))
        ));
    }

    #[test]
    fn modular_root_has_positive_real_part() {
        for tau in [c(0.0, 1.0), c(-3.0, 0.1), c(5.0, 0.01)] {
            let r = modular_s_root(tau).unwrap();
            assert!(r.re > 0.0);
            assert!(rel_diff(r * r, -I * tau) < 1e-14);
        }
    }

    #[test]
    fn modular_laws() {
        let pair = ModularPair::new(c(0.1, 0.3), c(0.2, 0.7)).unwrap();
        let u = c(0.13, -0.05);
        let base = elliptic_number(u, &pair).unwrap();
        let s = elliptic_number(u, &apply_modular(pair, 0, -1, 1, 0).unwrap()).unwrap();
        assert!(rel_diff(s, modular_s_multiplier(u, &pair).unwrap() * base) < 1e-12);
        let t = elliptic_number(u, &apply_modular(pair, 1, 1, 0, 1).unwrap()).unwrap();
        assert!(rel_diff(t, modular_t_multiplier() * base) < 1e-12);
    }

    #[test]
    fn policy_validation() {
        assert!(PrecisionPolicy::default().validate().is_ok());
        let bad = PrecisionPolicy {
            product_tol: 1e-3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let few = PrecisionPolicy {
            max_terms: 10,
            ..Default::default()
        };
        assert!(few.validate().is_err());
    }
}
