use serde::{Deserialize, Serialize};

use crate::ellipticity::HForm;
use crate::error::Result;
use crate::numeric::{ensure_finite, C64, I};
use crate::theta::{p_pochhammer, Extent, ModularPair};

use super::{SeriesKind, ThetaSeriesSpec};

/// A series with coefficients `∏[u_m]_n / ∏[v_k]_n · zⁿ` in elliptic numbers.
///
/// The unilateral kind carries the implicit `[1]_n` in the denominator,
/// which is not stored in `denominator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveSpec {
    pub kind: SeriesKind,
    pub numerator: Vec<C64>,
    pub denominator: Vec<C64>,
    pub z: C64,
    pub pair: ModularPair,
}

impl AdditiveSpec {
    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        for u in self.numerator.iter().chain(&self.denominator) {
            ensure_finite(*u, "additive parameter")?;
        }
        ensure_finite(self.z, "z")
    }

    /// Denominator parameters including the implicit `1` of the unilateral kind.
    pub fn full_denominator(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.denominator.len() + 1);
        if self.kind == SeriesKind::UnilateralE {
            v.push(C64::new(1.0, 0.0));
        }
        v.extend_from_slice(&self.denominator);
        v
    }

    /// The term ratio `h(x) = ∏[x+u_m]/∏[x+v_k] · z`.
    pub fn to_hform(&self) -> HForm {
        HForm {
            zeros: self.numerator.clone(),
            poles: self.full_denominator(),
            beta: C64::new(0.0, 0.0),
            y: self.z,
            pair: self.pair,
        }
    }

    /// The same series in multiplicative parameters `t = q^u`, `w = q^v`.
    ///
    /// Each `[x]` is `p^{1/8} i q^{-x/2} (p;p)_∞ θ(q^x;p)`; the prefactors that do
    /// not cancel between numerator and denominator move into `z` and `α`.
    pub fn to_theta_series(&self) -> Result<ThetaSeriesSpec> {
        self.validate()?;
        let nome = self.pair.nome()?;
        let pair = &self.pair;
        let full = self.full_denominator();
        let excess = self.numerator.len() as i32 - full.len() as i32;
        let su: C64 = self.numerator.iter().sum();
        let sv: C64 = full.iter().sum();
        let p8 = (std::f64::consts::PI * I * pair.tau / 4.0).exp();
        let pp = p_pochhammer(nome.p, nome.p, Extent::Infinite)?;
        let z = self.z * pair.q_pow(-(su - sv) / 2.0) * (p8 * I * pp).powi(excess);
        let numerator = self.numerator.iter().map(|&u| pair.q_pow(u)).collect();
        let denominator = self.denominator.iter().map(|&v| pair.q_pow(v)).collect();
        // q^{-n/2} per unmatched factor: α = -excess/2, read with q^{αn} = e^{2πiσαn}
        let alpha = C64::new(-(excess as f64) / 2.0, 0.0);
        let mut spec = ThetaSeriesSpec {
            kind: self.kind,
            numerator,
            denominator,
            alpha,
            z,
            nome,
        };
        if excess != 0 {
            // q^{αn} is evaluated on the principal log of q, which may differ
            // from 2πiσ by 2πik; fold the difference into z
            let principal = (alpha * nome.q.ln()).exp();
            let intended = pair.q_pow(alpha);
            spec.z *= intended / principal;
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticity::h_eval;
    use crate::numeric::{c, rel_diff};
    use crate::series::term_ratio;

    #[test]
    fn term_ratios_agree_with_multiplicative_form() {
        let pair = ModularPair::new(c(0.13, 0.21), c(-0.2, 0.37)).unwrap();
        for (num, den) in [
            (vec![c(0.3, 0.1), c(-0.2, 0.05)], vec![c(0.7, -0.1)]),
            (vec![c(0.3, 0.1), c(-0.2, 0.05), c(0.1, 0.1)], vec![]),
            (vec![c(0.3, 0.1)], vec![c(0.7, -0.1), c(0.45, 0.02)]),
        ] {
            let spec = AdditiveSpec {
                kind: SeriesKind::UnilateralE,
                numerator: num,
                denominator: den,
                z: c(0.8, 0.3),
                pair,
            };
            let mult = spec.to_theta_series().unwrap();
            let h = spec.to_hform();
            for n in 0..5 {
                let a = h_eval(&h, c(n as f64, 0.0)).unwrap();
                let b = term_ratio(&mult, n).unwrap();
                assert!(rel_diff(a, b) < 1e-10, "n = {n}: {a} vs {b}");
            }
        }
    }
}
