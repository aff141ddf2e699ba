use crate::error::{Error, Result};
use crate::factorial::FactorialValue;
use crate::numeric::{ensure_finite, C64};
use crate::theta::{theta_vanishes, PrecisionPolicy};

use super::{SeriesKind, SeriesValue, Termination, ThetaSeriesSpec};

/// `q^{αx}` read as `e^{αx log q}` on the principal logarithm.
pub(crate) fn q_alpha(q: C64, alpha: C64, x: f64) -> C64 {
    if alpha == C64::new(0.0, 0.0) || x == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        (alpha * x * q.ln()).exp()
    }
}

/// `h(n) = ∏θ(t_m qⁿ;p) / ∏θ(w_k qⁿ;p) · q^{αn} z` with zero/pole bookkeeping.
///
/// The unilateral kind includes the implicit `θ(q^{n+1};p)` denominator.
pub fn term_ratio_tracked(spec: &ThetaSeriesSpec, n: i64) -> Result<FactorialValue> {
    let q = spec.nome.q;
    let p = spec.nome.p;
    let qn = q.powi(n as i32);
    let mut acc = FactorialValue::scalar(q_alpha(q, spec.alpha, n as f64) * spec.z);
    for &t in &spec.numerator {
        acc = acc * FactorialValue::theta(t * qn, p)?;
    }
    for w in spec.full_denominator() {
        acc = acc / FactorialValue::theta(w * qn, p)?;
    }
    Ok(acc)
}

/// The term ratio `c_{n+1}/c_n` as a plain number.
pub fn term_ratio(spec: &ThetaSeriesSpec, n: i64) -> Result<C64> {
    spec.validate()?;
    term_ratio_tracked(spec, n)?
        .value()
        .map_err(|_| Error::Pole(format!("term ratio has a pole at n = {n}")))
}

/// The term ratio at a continuous multiplicative argument `w = q^x`:
/// `∏θ(t_m w;p) / ∏θ(w_k w;p) · w^α z`.
pub fn term_ratio_at(spec: &ThetaSeriesSpec, w: C64) -> Result<C64> {
    ensure_finite(w, "w")?;
    let p = spec.nome.p;
    let mut num = FactorialValue::one();
    for &t in &spec.numerator {
        num = num * FactorialValue::theta(t * w, p)?;
    }
    let mut den = FactorialValue::one();
    for k in spec.full_denominator() {
        let x = k * w;
        if theta_vanishes(x, p) {
            return Err(Error::Pole(format!(
                "denominator theta vanishes at w = {w}"
            )));
        }
        den = den * FactorialValue::theta(x, p)?;
    }
    let walpha = if spec.alpha == C64::new(0.0, 0.0) {
        C64::new(1.0, 0.0)
    } else {
        (spec.alpha * w.ln()).exp()
    };
    Ok((num / den).value()? * walpha * spec.z)
}

/// How [`sum_forward`] decides where to stop.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop {
    /// Sum `0..=N` and require the next coefficient to vanish structurally.
    Exact(usize),
    /// Sum `0..=N`.
    Terms(usize),
    /// Sum until a term is below tolerance, at most this many terms.
    Cap(usize),
}

impl From<Termination> for Stop {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Declared(d) => Stop::Exact(d.n as usize),
            Termination::Terms(n) => Stop::Terms(n),
            Termination::Cap(n) => Stop::Cap(n),
        }
    }
}

/// Sums `Σ_{n≥0} weight(n)·Cₙ` where `C₀ = 1`, `C_{n+1} = Cₙ·ratio(n)`.
///
/// `ratio` carries the cumulative factorial part (a structural zero there
/// terminates the series); `weight` is a per-term factor that never
/// accumulates, such as `θ(t₀²q^{2n};p)/θ(t₀²;p)`.
pub(crate) fn sum_forward<R, W>(
    mut ratio: R,
    mut weight: W,
    stop: Stop,
    tol: f64,
) -> Result<SeriesValue>
where
    R: FnMut(i64) -> Result<FactorialValue>,
    W: FnMut(i64) -> Result<FactorialValue>,
{
    let mut cum = FactorialValue::one();
    let mut sum = C64::new(0.0, 0.0);
    let mut n: usize = 0;
    loop {
        if cum.is_zero() {
            return Ok(SeriesValue {
                value: sum,
                terms_used: n,
                terminated: true,
                tail_estimate: 0.0,
                converged: true,
            });
        }
        let coeff = (cum * weight(n as i64)?)
            .value()
            .map_err(|_| Error::Pole(format!("coefficient c_{n} is infinite")))?;
        sum += coeff;
        let last = coeff.norm();
        match stop {
            Stop::Exact(limit) | Stop::Terms(limit) if n == limit => {
                let next = cum * ratio(n as i64)?;
                if next.is_zero() {
                    return Ok(SeriesValue {
                        value: sum,
                        terms_used: n + 1,
                        terminated: true,
                        tail_estimate: 0.0,
                        converged: true,
                    });
                }
                if let Stop::Exact(_) = stop {
                    return Err(Error::Constraint(format!(
                        "declared truncation at N = {limit} does not make c_{} vanish",
                        limit + 1
                    )));
                }
                return Ok(SeriesValue {
                    value: sum,
                    terms_used: n + 1,
                    terminated: false,
                    tail_estimate: last,
                    converged: true,
                });
            }
            Stop::Cap(max) => {
                if n >= 1 && last <= tol * sum.norm() {
                    return Ok(SeriesValue {
                        value: sum,
                        terms_used: n + 1,
                        terminated: false,
                        tail_estimate: last,
                        converged: true,
                    });
                }
                if n + 1 >= max {
                    return Ok(SeriesValue {
                        value: sum,
                        terms_used: n + 1,
                        terminated: false,
                        tail_estimate: last,
                        converged: false,
                    });
                }
            }
            _ => {}
        }
        cum = cum * ratio(n as i64)?;
        n += 1;
    }
}

/// Tracked coefficients `C_n` for `n ∈ [lo, hi]` (window must contain 0 on its path),
/// built by the forward recurrence and its inverse for negative `n`.
pub(crate) fn walk_coefficients<R>(mut ratio: R, lo: i64, hi: i64) -> Result<Vec<FactorialValue>>
where
    R: FnMut(i64) -> Result<FactorialValue>,
{
    let start = lo.min(0);
    let end = hi.max(0);
    let len = (end - start + 1) as usize;
    let mut out = vec![FactorialValue::one(); len];
    let zero = (-start) as usize;
    for n in 0..end {
        let idx = zero + n as usize;
        out[idx + 1] = out[idx] * ratio(n)?;
    }
    for n in (start + 1..=0).rev() {
        let idx = (n - start) as usize;
        out[idx - 1] = out[idx] / ratio(n - 1)?;
    }
    let from = (lo - start) as usize;
    let to = (hi - start) as usize;
    Ok(out[from..=to].to_vec())
}

/// Windowed bilateral sum `Σ_{n=lo}^{hi} weight(n)·Cₙ`.
pub(crate) fn sum_window<R, W>(ratio: R, mut weight: W, lo: i64, hi: i64) -> Result<SeriesValue>
where
    R: FnMut(i64) -> Result<FactorialValue>,
    W: FnMut(i64) -> Result<FactorialValue>,
{
    if lo > hi {
        return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
    }
    // one extra coefficient on each side to decide termination
    let coeffs = walk_coefficients(ratio, lo - 1, hi + 1)?;
    let mut sum = C64::new(0.0, 0.0);
    let mut edge = 0.0f64;
    for (i, cum) in coeffs[1..coeffs.len() - 1].iter().enumerate() {
        let n = lo + i as i64;
        let coeff = (*cum * weight(n)?)
            .value()
            .map_err(|_| Error::Pole(format!("coefficient c_{n} is infinite")))?;
        sum += coeff;
        if n == lo || n == hi {
            edge = edge.max(coeff.norm());
        }
    }
    let terminated = coeffs[0].is_zero() && coeffs[coeffs.len() - 1].is_zero();
    Ok(SeriesValue {
        value: sum,
        terms_used: (hi - lo + 1) as usize,
        terminated,
        tail_estimate: if terminated { 0.0 } else { edge },
        converged: true,
    })
}

/// Coefficients `c_n`, `n ∈ [lo, hi]`, built by the term-ratio recurrence from `c₀ = 1`.
pub fn coefficients(spec: &ThetaSeriesSpec, lo: i64, hi: i64) -> Result<Vec<FactorialValue>> {
    spec.validate()?;
    if lo > hi {
        return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
    }
    if lo < 0 && spec.z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("negative indices need z != 0".into()));
    }
    walk_coefficients(|n| term_ratio_tracked(spec, n), lo, hi)
}

/// The unilateral series `_rE_s`.
pub fn eval_e(spec: &ThetaSeriesSpec, termination: Termination) -> Result<SeriesValue> {
    if spec.kind != SeriesKind::UnilateralE {
        return Err(Error::Domain("eval_e needs a unilateral_E spec".into()));
    }
    spec.validate()?;
    if let Termination::Declared(decl) = termination {
        let t = spec.numerator.get(decl.param_index).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "truncation index {} outside numerator of length {}",
                decl.param_index,
                spec.numerator.len()
            ))
        })?;
        decl.check(*t, &spec.nome)?;
    }
    let tol = PrecisionPolicy::default().series_tol;
    sum_forward(
        |n| term_ratio_tracked(spec, n),
        |_| Ok(FactorialValue::one()),
        termination.into(),
        tol,
    )
}

/// The bilateral series `_rG_s` summed over `window = (n_min, n_max)`.
///
/// A unilateral spec is summed as its bilateral form, whose negative-index
/// coefficients vanish.
pub fn eval_g(spec: &ThetaSeriesSpec, window: (i64, i64)) -> Result<SeriesValue> {
    spec.validate()?;
    let (lo, hi) = window;
    if lo < 0 && spec.z == C64::new(0.0, 0.0) {
        return Err(Error::Domain("negative indices need z != 0".into()));
    }
    sum_window(
        |n| term_ratio_tracked(spec, n),
        |_| Ok(FactorialValue::one()),
        lo,
        hi,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorial::theta_factorial_multi;
    use crate::numeric::{c, rel_diff};
    use crate::series::TruncationDecl;
    use crate::theta::Nome;

    fn nome() -> Nome {
        Nome::new(c(0.42, 0.13), c(0.21, -0.08)).unwrap()
    }

    /// Coefficient straight from the factorial definition.
    fn direct_coefficient(spec: &ThetaSeriesSpec, n: i64) -> FactorialValue {
        let q = spec.nome.q;
        let num = theta_factorial_multi(&spec.numerator, &spec.nome, n).unwrap();
        let den = theta_factorial_multi(&spec.full_denominator(), &spec.nome, n).unwrap();
        let nn = n as f64;
        let scale = q_alpha(q, spec.alpha, nn * (nn - 1.0) / 2.0) * spec.z.powi(n as i32);
        (num / den).scale(scale)
    }

    #[test]
    fn telescoping_ratio_is_one() {
        let a = vec![c(0.3, 0.4), c(-0.7, 0.2)];
        let spec = ThetaSeriesSpec::bilateral(a.clone(), a, c(1.0, 0.0), nome());
        for n in -3..4 {
            assert!((term_ratio(&spec, n).unwrap() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn coefficient_ratios_match_term_ratio() {
        let mut spec = ThetaSeriesSpec::unilateral(
            vec![c(0.5, 0.3), c(-0.8, 0.1), c(0.6, -0.6)],
            vec![c(0.9, 0.2), c(0.4, -0.7)],
            c(0.7, 0.2),
            nome(),
        );
        spec.alpha = c(1.0, 0.0);
        let cs = coefficients(&spec, 0, 6).unwrap();
        for n in 0..6 {
            let r = cs[n + 1].value().unwrap() / cs[n].value().unwrap();
            assert!(rel_diff(r, term_ratio(&spec, n as i64).unwrap()) < 1e-12);
            let d = direct_coefficient(&spec, n as i64).value().unwrap();
            assert!(rel_diff(cs[n].value().unwrap(), d) < 1e-12);
        }
    }

    #[test]
    fn bilateral_recurrence_matches_negative_factorials() {
        let spec = ThetaSeriesSpec::bilateral(
            vec![c(0.5, 0.3), c(-0.8, 0.1)],
            vec![c(0.9, 0.2), c(0.4, -0.7)],
            c(0.7, 0.2),
            nome(),
        );
        let cs = coefficients(&spec, -5, 3).unwrap();
        for (i, cf) in cs.iter().enumerate() {
            let n = i as i64 - 5;
            let d = direct_coefficient(&spec, n).value().unwrap();
            assert!(rel_diff(cf.value().unwrap(), d) < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn trivial_sums() {
        let nm = nome();
        let t = nm.q.powi(-4);
        let spec =
            ThetaSeriesSpec::unilateral(vec![t, c(0.3, 0.1)], vec![c(0.5, 0.5)], c(1.0, 0.0), nm);
        let v = eval_e(&spec, Termination::Declared(TruncationDecl::new(0, 4, 0))).unwrap();
        assert_eq!(v.terms_used, 5);
        assert!(v.terminated);
        assert_eq!(v.tail_estimate, 0.0);

        let one = ThetaSeriesSpec::unilateral(
            vec![c(1.0, 0.0), c(0.3, 0.1)],
            vec![c(0.5, 0.5)],
            c(1.0, 0.0),
            nm,
        );
        let v = eval_e(&one, Termination::Declared(TruncationDecl::new(0, 0, 0))).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));
        assert_eq!(v.terms_used, 1);

        let zero_z = ThetaSeriesSpec::unilateral(vec![c(0.3, 0.1)], vec![], c(0.0, 0.0), nm);
        let v = eval_e(&zero_z, Termination::Cap(100)).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));

        let g = ThetaSeriesSpec::bilateral(vec![c(0.3, 0.1)], vec![c(0.6, 0.1)], c(0.5, 0.0), nm);
        assert_eq!(eval_g(&g, (0, 0)).unwrap().value, c(1.0, 0.0));
    }

    #[test]
    fn declared_truncation_is_verified() {
        let nm = nome();
        let spec = ThetaSeriesSpec::unilateral(vec![c(0.3, 0.1)], vec![], c(1.0, 0.0), nm);
        let r = eval_e(&spec, Termination::Declared(TruncationDecl::new(0, 2, 0)));
        assert!(matches!(r, Err(Error::Constraint(_))));
        let r = eval_e(&spec, Termination::Declared(TruncationDecl::new(3, 2, 0)));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn bilateral_with_q_denominator_is_one_sided() {
        let nm = nome();
        let num = vec![nm.q.powi(-3), c(0.4, 0.6), c(-0.5, 0.3)];
        let den = vec![c(0.7, -0.2), c(0.8, 0.1)];
        let e = ThetaSeriesSpec::unilateral(num.clone(), den.clone(), c(0.9, 0.1), nm);
        let mut gden = vec![nm.q];
        gden.extend(den);
        let g = ThetaSeriesSpec::bilateral(num, gden, c(0.9, 0.1), nm);
        let ev = eval_e(&e, Termination::Declared(TruncationDecl::new(0, 3, 0))).unwrap();
        let gv = eval_g(&g, (-5, 3)).unwrap();
        assert!(rel_diff(gv.value, ev.value) < 1e-12);
        assert!(gv.terminated);
    }

    #[test]
    fn cap_reports_non_convergence() {
        let nm = nome();
        let spec = ThetaSeriesSpec::unilateral(vec![c(0.3, 0.1)], vec![], c(50.0, 0.0), nm);
        let v = eval_e(&spec, Termination::Cap(5)).unwrap();
        assert!(!v.converged);
        assert_eq!(v.terms_used, 5);
    }

    #[test]
    fn unresolved_pole_is_an_error() {
        let nm = nome();
        // denominator w = q^{-2} gives θ(w q^2) = 0 in c_3
        let spec =
            ThetaSeriesSpec::bilateral(vec![c(0.3, 0.1)], vec![nm.q.powi(-2)], c(1.0, 0.0), nm);
        assert!(matches!(eval_g(&spec, (0, 4)), Err(Error::Pole(_))));
        assert!(eval_g(&spec, (0, 2)).is_ok());
    }
}
