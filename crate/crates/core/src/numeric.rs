//! Small complex-arithmetic helpers shared across modules.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Largest |M| considered when testing whether `z = p^{-M}`.
pub const LATTICE_SPAN: i32 = 64;

/// Relative tolerance for exact-zero detection of theta factors.
pub const ZERO_DETECT_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `|a - b| / |b|`, falling back to the absolute difference when `b` is tiny.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let d = (a - b).norm();
    let s = b.norm();
    if s < 1e-300 {
        d
    } else {
        d / s
    }
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn ensure_finite(z: C64, what: &str) -> Result<()> {
    if is_finite(z) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} is not finite: {z}")))
    }
}

pub(crate) fn ensure_nonzero(z: C64, what: &str) -> Result<()> {
    ensure_finite(z, what)?;
    if z == C64::new(0.0, 0.0) {
        Err(Error::Domain(format!("{what} must be nonzero")))
    } else {
        Ok(())
    }
}

fn lattice_candidates(z: C64, p: C64) -> impl Iterator<Item = i32> {
    let (lo, hi) = if p.norm() == 0.0 {
        (0, 0)
    } else {
        let est = -z.norm().ln() / p.norm().ln();
        if est.is_finite() {
            (est.floor() as i64, est.ceil() as i64)
        } else {
            (1, 0)
        }
    };
    (lo..=hi)
        .filter(|m| m.unsigned_abs() <= LATTICE_SPAN as u64)
        .map(|m| m as i32)
}

/// Relative distance `min_M |z p^M - 1|` from `z` to the zero set `{p^{-M}}`
/// of `θ(·;p)`, over the candidate exponents nearest in modulus.
pub fn lattice_distance(z: C64, p: C64) -> f64 {
    lattice_candidates(z, p)
        .map(|m| {
            if m == 0 {
                (z - 1.0).norm()
            } else {
                (z * p.powi(m) - 1.0).norm()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Returns `Some(M)` when `z = p^{-M}` to relative accuracy [`ZERO_DETECT_TOL`].
pub fn lattice_index(z: C64, p: C64) -> Option<i32> {
    lattice_candidates(z, p).find(|&m| {
        let d = if m == 0 {
            (z - 1.0).norm()
        } else {
            (z * p.powi(m) - 1.0).norm()
        };
        d <= ZERO_DETECT_TOL
    })
}

/// Product of a slice of complex numbers.
pub fn product(values: &[C64]) -> C64 {
    values.iter().fold(C64::new(1.0, 0.0), |acc, v| acc * v)
}

/// Principal square root.
pub fn sqrt_principal(z: C64) -> C64 {
    z.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_index_finds_integer_powers() {
        let p = c(0.2, 0.1);
        assert_eq!(lattice_index(c(1.0, 0.0), p), Some(0));
        assert_eq!(lattice_index(p.powi(-3), p), Some(3));
        assert_eq!(lattice_index(p.powi(2), p), Some(-2));
        assert_eq!(lattice_index(c(0.5, 0.1), p), None);
    }

    #[test]
    fn lattice_index_with_vanishing_nome() {
        let p = c(0.0, 0.0);
        assert_eq!(lattice_index(c(1.0, 0.0), p), Some(0));
        assert_eq!(lattice_index(c(0.3, 0.0), p), None);
    }

    #[test]
    fn rel_diff_falls_back_to_absolute() {
        assert_eq!(rel_diff(c(1e-30, 0.0), c(0.0, 0.0)), 1e-30);
        assert!((rel_diff(c(2.0, 0.0), c(1.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
