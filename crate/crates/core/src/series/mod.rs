//! Unilateral `_rE_s` and bilateral `_rG_s` theta hypergeometric series, their
//! very-well-poised forms, classification, and the `p → 0` basic series used
//! as degeneration oracles.

mod additive;
mod basic;
mod classify;
mod eval;
mod vwp;

pub use additive::AdditiveSpec;
pub use basic::{eval_basic, standard_convention, BasicKind, BasicSeries};
pub use classify::{classify, classify_additive, classify_vwp, Classification};
pub use eval::{coefficients, eval_e, eval_g, term_ratio, term_ratio_at, term_ratio_tracked};
pub use vwp::{
    eval_vwp, eval_vwp_additive, ge_split_check, vwp_coefficient, AdditiveTermination, VwpRange,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ensure_finite, ensure_nonzero, rel_diff, C64};
use crate::theta::Nome;

/// Relative tolerance for parameter-identity checks (balancing, poisedness).
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Relative tolerance for a declared truncation `t = q^{-N} p^{-M}`.
pub const TRUNCATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    /// `Σ_{n≥0}` with the implicit `θ(q;p;q)_n` in the denominator.
    #[serde(rename = "unilateral_E")]
    UnilateralE,
    /// `Σ_{n∈Z}`.
    #[serde(rename = "bilateral_G")]
    BilateralG,
}

/// A general `_rE_s` or `_rG_s` series in multiplicative parameters.
///
/// For the unilateral kind the numerator holds `t₀,…,t_{r-1}` and the
/// denominator `w₁,…,w_s`; the `θ(q;p;q)_n` factor is never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSeriesSpec {
    pub kind: SeriesKind,
    pub numerator: Vec<C64>,
    pub denominator: Vec<C64>,
    #[serde(default)]
    pub alpha: C64,
    pub z: C64,
    #[serde(flatten)]
    pub nome: Nome,
}

impl ThetaSeriesSpec {
    pub fn unilateral(numerator: Vec<C64>, denominator: Vec<C64>, z: C64, nome: Nome) -> Self {
        ThetaSeriesSpec {
            kind: SeriesKind::UnilateralE,
            numerator,
            denominator,
            alpha: C64::new(0.0, 0.0),
            z,
            nome,
        }
    }

    pub fn bilateral(numerator: Vec<C64>, denominator: Vec<C64>, z: C64, nome: Nome) -> Self {
        ThetaSeriesSpec {
            kind: SeriesKind::BilateralG,
            numerator,
            denominator,
            alpha: C64::new(0.0, 0.0),
            z,
            nome,
        }
    }

    /// Denominator parameters including the implicit `q` of the unilateral kind.
    pub fn full_denominator(&self) -> Vec<C64> {
        let mut w = Vec::with_capacity(self.denominator.len() + 1);
        if self.kind == SeriesKind::UnilateralE {
            w.push(self.nome.q);
        }
        w.extend_from_slice(&self.denominator);
        w
    }

    /// The bilateral series with `w = q` made explicit.
    pub fn as_bilateral(&self) -> ThetaSeriesSpec {
        ThetaSeriesSpec {
            kind: SeriesKind::BilateralG,
            numerator: self.numerator.clone(),
            denominator: self.full_denominator(),
            ..self.clone()
        }
    }

    /// Rejects zero or non-finite parameters: theta series admit no confluence limits.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.numerator.iter().enumerate() {
            ensure_nonzero(*t, &format!("numerator[{i}]"))?;
        }
        for (i, w) in self.denominator.iter().enumerate() {
            ensure_nonzero(*w, &format!("denominator[{i}]"))?;
        }
        ensure_finite(self.alpha, "alpha")?;
        ensure_finite(self.z, "z")?;
        if self.alpha != C64::new(0.0, 0.0) && self.nome.q == C64::new(0.0, 0.0) {
            return Err(Error::Domain("q^alpha needs q != 0".into()));
        }
        Ok(())
    }
}

/// Declares that `numerator[index] = q^{-N} p^{-M}`, so the series stops after `n = N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationDecl {
    #[serde(rename = "index")]
    pub param_index: usize,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: i32,
}

impl TruncationDecl {
    pub fn new(param_index: usize, n: u32, m: i32) -> Self {
        TruncationDecl { param_index, n, m }
    }

    /// `q^{-N} p^{-M}`.
    pub fn target(&self, nome: &Nome) -> Result<C64> {
        if self.m != 0 && nome.p == C64::new(0.0, 0.0) {
            return Err(Error::Domain("p^{-M} with M != 0 needs p != 0".into()));
        }
        if nome.q == C64::new(0.0, 0.0) {
            return Err(Error::Domain("q^{-N} needs q != 0".into()));
        }
        Ok(nome.q.powi(-(self.n as i32)) * nome.p.powi(-self.m))
    }

    /// Checks `value = q^{-N} p^{-M}` to relative accuracy 1e-12.
    pub fn check(&self, value: C64, nome: &Nome) -> Result<()> {
        let target = self.target(nome)?;
        let err = rel_diff(value, target);
        if err <= TRUNCATION_TOL {
            Ok(())
        } else {
            Err(Error::Constraint(format!(
                "truncated parameter {value} differs from q^-{} p^-{} = {target} (rel {err:e})",
                self.n, self.m
            )))
        }
    }
}

/// How a unilateral sum is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Exact termination after `n = N`, checked against the parameter.
    Declared(TruncationDecl),
    /// Partial sum over `n = 0..=N`.
    Terms(usize),
    /// Sum until the terms drop below the series tolerance or the cap is hit.
    Cap(usize),
}

/// Result of a (partial) summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: C64,
    pub terms_used: usize,
    /// The coefficients vanish identically beyond the summed range.
    pub terminated: bool,
    /// `|last term|` for a non-terminated sum, zero otherwise.
    pub tail_estimate: f64,
    /// False when a [`Termination::Cap`] was hit with the last term above tolerance.
    pub converged: bool,
}

/// The very-well-poised series in the simplified `(t₀; t₁,…,t_{r-4})` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VwpSpec {
    pub t0: C64,
    pub ts: Vec<C64>,
    pub z: C64,
    #[serde(flatten)]
    pub nome: Nome,
    pub kind: VwpKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VwpKind {
    Unilateral,
    Bilateral,
}

impl VwpSpec {
    pub fn unilateral(t0: C64, ts: Vec<C64>, z: C64, nome: Nome) -> Self {
        VwpSpec {
            t0,
            ts,
            z,
            nome,
            kind: VwpKind::Unilateral,
        }
    }

    pub fn bilateral(t0: C64, ts: Vec<C64>, z: C64, nome: Nome) -> Self {
        VwpSpec {
            t0,
            ts,
            z,
            nome,
            kind: VwpKind::Bilateral,
        }
    }

    /// The index `r` of `_{r+1}E_r` / `_rG_r`; `ts` holds `r - 4` parameters.
    pub fn r(&self) -> usize {
        self.ts.len() + 4
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonzero(self.t0, "t0")?;
        for (i, t) in self.ts.iter().enumerate() {
            ensure_nonzero(*t, &format!("t{}", i + 1))?;
        }
        ensure_finite(self.z, "z")
    }

    /// Parameter paired with `t₀` in the factorial `θ(t₀t_m;p;q)_n` (`m = 0` is `t₀` itself).
    pub fn shifted_param(&self, m: usize) -> Result<C64> {
        match m {
            0 => Ok(self.t0 * self.t0),
            m if m <= self.ts.len() => Ok(self.t0 * self.ts[m - 1]),
            _ => Err(Error::DimensionMismatch(format!(
                "truncation index {m} outside t0..t{}",
                self.ts.len()
            ))),
        }
    }

    /// The equivalent general series with the four special parameters spelled out
    /// and the argument replaced by `-z`.
    pub fn to_theta_series(&self) -> Result<ThetaSeriesSpec> {
        let Nome { q, p } = self.nome;
        if p == C64::new(0.0, 0.0) {
            return Err(Error::Domain(
                "the expanded very-well-poised form needs p != 0".into(),
            ));
        }
        let t0 = self.t0;
        let sp = p.sqrt();
        let specials_num = [q * t0, -q * t0, q * t0 / sp, -q * sp * t0];
        let specials_den = [t0, -t0, sp * t0, -t0 / sp];
        let mut numerator = Vec::new();
        let mut denominator = Vec::new();
        if self.kind == VwpKind::Unilateral {
            numerator.push(t0 * t0);
        }
        for &t in &self.ts {
            numerator.push(t0 * t);
            denominator.push(q * t0 / t);
        }
        numerator.extend_from_slice(&specials_num);
        denominator.extend_from_slice(&specials_den);
        let kind = match self.kind {
            VwpKind::Unilateral => SeriesKind::UnilateralE,
            VwpKind::Bilateral => SeriesKind::BilateralG,
        };
        Ok(ThetaSeriesSpec {
            kind,
            numerator,
            denominator,
            alpha: C64::new(0.0, 0.0),
            z: -self.z,
            nome: self.nome,
        })
    }
}

/// A series description as read from JSON, with an optional cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInput {
    #[serde(flatten)]
    pub spec: ThetaSeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
}
