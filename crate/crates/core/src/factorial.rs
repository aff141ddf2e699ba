//! Elliptic shifted factorials `θ(t;p;q)_n` and `[u]_n` for any integer `n`.
//!
//! Factors that vanish structurally are not multiplied in. They are counted as
//! zero orders (numerator) or pole orders (denominator) so that a coefficient
//! like `θ(q;p;q)_n / θ(q;p;q)_{n}` never divides by a rounding residue.

use std::ops::{Div, Mul};

use crate::error::{Error, Result};
use crate::numeric::{ensure_nonzero, C64};
use crate::theta::{elliptic_number, theta, theta_vanishes, ModularPair, Nome};

/// A product of factors with separate bookkeeping for exact zeros and poles.
///
/// `regular` is the product of all non-vanishing factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialValue {
    regular: C64,
    zero_order: u32,
    pole_order: u32,
}

impl Default for FactorialValue {
    fn default() -> Self {
        Self::one()
    }
}

impl FactorialValue {
    pub fn one() -> Self {
        FactorialValue {
            regular: C64::new(1.0, 0.0),
            zero_order: 0,
            pole_order: 0,
        }
    }

    pub fn scalar(v: C64) -> Self {
        FactorialValue {
            regular: v,
            zero_order: 0,
            pole_order: 0,
        }
    }

    /// A single factor, which may be a structural zero.
    pub fn factor(v: C64, vanishes: bool) -> Self {
        if vanishes {
            FactorialValue {
                regular: C64::new(1.0, 0.0),
                zero_order: 1,
                pole_order: 0,
            }
        } else {
            Self::scalar(v)
        }
    }

    /// `θ(z;p)` as a tracked factor.
    pub fn theta(z: C64, p: C64) -> Result<Self> {
        ensure_nonzero(z, "theta argument")?;
        if theta_vanishes(z, p) {
            Ok(Self::factor(C64::new(0.0, 0.0), true))
        } else {
            Ok(Self::scalar(theta(z, p)?))
        }
    }

    pub fn regular(&self) -> C64 {
        self.regular
    }

    pub fn zero_order(&self) -> u32 {
        self.zero_order
    }

    pub fn pole_order(&self) -> u32 {
        self.pole_order
    }

    /// Net order of vanishing (negative for a pole).
    pub fn order(&self) -> i64 {
        self.zero_order as i64 - self.pole_order as i64
    }

    pub fn is_zero(&self) -> bool {
        self.order() > 0
    }

    /// Flagged infinite: must not be used as a plain scalar.
    pub fn is_pole(&self) -> bool {
        self.order() < 0
    }

    /// Scalar value, with exact zeros resolved and unresolved poles reported.
    pub fn value(&self) -> Result<C64> {
        match self.order() {
            o if o > 0 => Ok(C64::new(0.0, 0.0)),
            0 => Ok(self.regular),
            _ => Err(Error::Pole(format!(
                "factorial has {} vanishing denominator factor(s) against {} in the numerator",
                self.pole_order, self.zero_order
            ))),
        }
    }

    pub fn recip(&self) -> Self {
        FactorialValue {
            regular: self.regular.inv(),
            zero_order: self.pole_order,
            pole_order: self.zero_order,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        FactorialValue {
            regular: self.regular * s,
            ..*self
        }
    }
}

impl Mul for FactorialValue {
    type Output = FactorialValue;

    fn mul(self, rhs: FactorialValue) -> FactorialValue {
        FactorialValue {
            regular: self.regular * rhs.regular,
            zero_order: self.zero_order + rhs.zero_order,
            pole_order: self.pole_order + rhs.pole_order,
        }
    }
}

impl Div for FactorialValue {
    type Output = FactorialValue;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: FactorialValue) -> FactorialValue {
        self * rhs.recip()
    }
}

/// `θ(t;p;q)_n = ∏_{m=0}^{n-1} θ(tq^m;p)`, with `θ(t;p;q)_{-n} = 1/θ(tq^{-n};p;q)_n`.
pub fn theta_factorial(t: C64, nome: &Nome, n: i64) -> Result<FactorialValue> {
    ensure_nonzero(t, "factorial parameter")?;
    if n < 0 {
        let shifted = t * nome.q.powi(n as i32);
        return Ok(theta_factorial(shifted, nome, -n)?.recip());
    }
    let mut acc = FactorialValue::one();
    let mut x = t;
    for _ in 0..n {
        acc = acc * FactorialValue::theta(x, nome.p)?;
        x *= nome.q;
    }
    Ok(acc)
}

/// `θ(t₀,…,t_k;p;q)_n`, the product over the list.
pub fn theta_factorial_multi(ts: &[C64], nome: &Nome, n: i64) -> Result<FactorialValue> {
    ts.iter().try_fold(FactorialValue::one(), |acc, &t| {
        Ok(acc * theta_factorial(t, nome, n)?)
    })
}

/// `[u]` as a tracked factor; it vanishes exactly when `q^u` is a zero of `θ(·;p)`.
pub fn elliptic_factor(u: C64, pair: &ModularPair) -> Result<FactorialValue> {
    if theta_vanishes(pair.q_pow(u), pair.p()) {
        Ok(FactorialValue::factor(C64::new(0.0, 0.0), true))
    } else {
        Ok(FactorialValue::scalar(elliptic_number(u, pair)?))
    }
}

/// `[u]_n = [u][u+1]⋯[u+n-1]`, with `[u]_{-n} = 1/[u-n]_n`.
pub fn elliptic_factorial(u: C64, pair: &ModularPair, n: i64) -> Result<FactorialValue> {
    pair.validate_tau()?;
    if n < 0 {
        return Ok(elliptic_factorial(u + n as f64, pair, -n)?.recip());
    }
    (0..n).try_fold(FactorialValue::one(), |acc, m| {
        Ok(acc * elliptic_factor(u + m as f64, pair)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, rel_diff};

    fn nome() -> Nome {
        Nome::new(c(0.4, 0.0), c(0.2, 0.0)).unwrap()
    }

    #[test]
    fn empty_and_single_factor() {
        let t = c(0.3, 0.7);
        let nm = nome();
        assert_eq!(
            theta_factorial(t, &nm, 0).unwrap().value().unwrap(),
            c(1.0, 0.0)
        );
        let one = theta_factorial(t, &nm, 1).unwrap().value().unwrap();
        assert!(rel_diff(one, theta(t, nm.p).unwrap()) < 1e-15);
    }

    #[test]
    fn negative_index_hits_pole() {
        // θ(q;p;q)_{-2} = 1/(θ(q^{-1};p) θ(1;p))
        let nm = nome();
        let v = theta_factorial(nm.q, &nm, -2).unwrap();
        assert_eq!(v.pole_order(), 1);
        assert_eq!(v.zero_order(), 0);
        assert!(v.is_pole());
        assert!(v.value().is_err());
    }

    #[test]
    fn zero_then_value_is_exact_zero() {
        let nm = nome();
        // θ(q^{-2};p;q)_3 contains θ(1;p)
        let v = theta_factorial(nm.q.powi(-2), &nm, 3).unwrap();
        assert_eq!(v.zero_order(), 1);
        assert_eq!(v.value().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn multi_product() {
        let nm = nome();
        assert_eq!(
            theta_factorial_multi(&[], &nm, 3).unwrap(),
            FactorialValue::one()
        );
        let (a, b) = (c(0.3, 0.2), c(-0.5, 0.6));
        let single = theta_factorial_multi(&[a], &nm, 3).unwrap();
        assert_eq!(single, theta_factorial(a, &nm, 3).unwrap());
        let both = theta_factorial_multi(&[a, b], &nm, 4)
            .unwrap()
            .value()
            .unwrap();
        let parts = theta_factorial(a, &nm, 4).unwrap().value().unwrap()
            * theta_factorial(b, &nm, 4).unwrap().value().unwrap();
        assert!(rel_diff(both, parts) < 1e-14);
    }

    #[test]
    fn additive_factorial_small_cases() {
        let pair = ModularPair::new(c(0.05, 0.25), c(0.1, 0.9)).unwrap();
        let u = c(0.3, 0.1);
        assert_eq!(
            elliptic_factorial(u, &pair, 0).unwrap().value().unwrap(),
            c(1.0, 0.0)
        );
        let m1 = elliptic_factorial(u, &pair, -1).unwrap().value().unwrap();
        let direct = elliptic_number(u - 1.0, &pair).unwrap().inv();
        assert!(rel_diff(m1, direct) < 1e-14);
        // [1]_{-2} = 1/([-1][0])
        let pole = elliptic_factorial(c(1.0, 0.0), &pair, -2).unwrap();
        assert!(pole.is_pole());
    }

    #[test]
    fn tracked_arithmetic() {
        let z = FactorialValue::factor(c(0.0, 0.0), true);
        let x = FactorialValue::scalar(c(2.0, 0.0));
        let q = x * z / z;
        assert_eq!(q.order(), 0);
        assert_eq!(q.value().unwrap(), c(2.0, 0.0));
        assert!((x / z).is_pole());
        assert!((x * z).is_zero());
    }
}
