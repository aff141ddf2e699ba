//! Parameterized term ratios whose invariance under `p`-shifts of every
//! index variable and free parameter is checked by [`check_total_ellipticity`].

use crate::error::{Error, Result};
use crate::factorial::FactorialValue;
use crate::numeric::{product, rel_diff, C64};
use crate::sampling::Sampler;
use crate::series::{classify, term_ratio_at, SeriesKind, ThetaSeriesSpec};
use crate::theta::{ModularPair, Nome};

use super::{collect_samples, usable, CheckOptions, EllipticityReport, ShiftKind};

/// A family of term ratios `h_l(w₁,…,w_n; x₁,…,x_k)` in multiplicative index
/// variables `w_i = q^{λ_i}` and free parameters `x_j`.
///
/// Constrained parameters are recomputed from the free ones on every call,
/// so a shifted free parameter keeps the constraints satisfied.
pub trait EllipticFamily {
    fn name(&self) -> String;
    fn nome(&self) -> Nome;
    fn index_names(&self) -> Vec<String>;
    fn parameter_names(&self) -> Vec<String>;
    fn base_parameters(&self) -> Vec<C64>;
    fn ratios(&self, w: &[C64], params: &[C64]) -> Result<Vec<C64>>;
}

fn th(x: C64, p: C64) -> Result<FactorialValue> {
    FactorialValue::theta(x, p)
}

fn finish(v: FactorialValue) -> Result<C64> {
    v.value()
        .map_err(|_| Error::Pole("term ratio has a pole".into()))
}

/// Well-poised balanced single-variable ratios `z ∏ θ(wTs_m;p)/θ(wT/s_m;p)`.
///
/// Pairs are `t_m = Ts_m`, `w_m = T/s_m`, so `t_m w_m = T²` for all `m`, and
/// balancing is `∏s_m = ε` with `ε = ±1`. The last `s` is fixed by `ε`.
/// For the unilateral kind the first pair is `(t₀, q)`, so `s₀ = T/q` follows
/// from `T` and is not free.
#[derive(Debug, Clone, PartialEq)]
pub struct WellPoisedFamily {
    kind: SeriesKind,
    t_big: C64,
    s: Vec<C64>,
    eps: C64,
    z: C64,
    nome: Nome,
}

impl WellPoisedFamily {
    /// Builds the family from a well-poised balanced spec with `α = 0`.
    pub fn from_spec(spec: &ThetaSeriesSpec) -> Result<Self> {
        let cl = classify(spec)?;
        if !(cl.well_poised && cl.balanced) || spec.alpha != C64::new(0.0, 0.0) {
            return Err(Error::Constraint(
                "the family needs a well-poised balanced spec with alpha = 0".into(),
            ));
        }
        let q = spec.nome.q;
        let num = &spec.numerator;
        let (t_big, all_s) = match spec.kind {
            SeriesKind::BilateralG => {
                let t_big = (num[0] * spec.denominator[0]).sqrt();
                (t_big, num.iter().map(|t| t / t_big).collect::<Vec<_>>())
            }
            SeriesKind::UnilateralE => {
                let t_big = (q * num[0]).sqrt();
                let mut s = vec![t_big / q];
                s.extend(num[1..].iter().map(|t| t / t_big));
                (t_big, s)
            }
        };
        let eps = product(&all_s);
        let free_from = usize::from(spec.kind == SeriesKind::UnilateralE);
        let s = all_s[free_from..all_s.len() - 1].to_vec();
        Ok(WellPoisedFamily {
            kind: spec.kind,
            t_big,
            s,
            eps,
            z: spec.z,
            nome: spec.nome,
        })
    }

    /// The bilateral family with `T = q^{u₀}`, `s_m = q^{u_m}` and `s_r = 1/∏s_m`,
    /// whose ratio at `w = q^x` is `vwp_theorem_h(u₀, us, z, x)`.
    pub fn from_theorem(u0: C64, us: &[C64], z: C64, pair: &ModularPair) -> Result<Self> {
        Ok(WellPoisedFamily {
            kind: SeriesKind::BilateralG,
            t_big: pair.q_pow(u0),
            s: us.iter().map(|&u| pair.q_pow(u)).collect(),
            eps: C64::new(1.0, 0.0),
            z,
            nome: pair.nome()?,
        })
    }

    fn all_s(&self, params: &[C64]) -> Vec<C64> {
        let t_big = params[0];
        let mut s = Vec::with_capacity(params.len() + 1);
        if self.kind == SeriesKind::UnilateralE {
            s.push(t_big / self.nome.q);
        }
        s.extend_from_slice(&params[1..]);
        let last = self.eps / product(&s);
        s.push(last);
        s
    }
}

impl EllipticFamily for WellPoisedFamily {
    fn name(&self) -> String {
        "well_poised".into()
    }

    fn nome(&self) -> Nome {
        self.nome
    }

    fn index_names(&self) -> Vec<String> {
        vec!["n".into()]
    }

    fn parameter_names(&self) -> Vec<String> {
        let first = usize::from(self.kind == SeriesKind::UnilateralE);
        let mut names = vec!["T".to_string()];
        names.extend((0..self.s.len()).map(|i| format!("s{}", i + first)));
        names
    }

    fn base_parameters(&self) -> Vec<C64> {
        let mut v = vec![self.t_big];
        v.extend_from_slice(&self.s);
        v
    }

    fn ratios(&self, w: &[C64], params: &[C64]) -> Result<Vec<C64>> {
        let p = self.nome.p;
        let x = w[0] * params[0];
        let mut acc = FactorialValue::scalar(self.z);
        for s in self.all_s(params) {
            acc = acc * th(x * s, p)? / th(x / s, p)?;
        }
        Ok(vec![finish(acc)?])
    }
}

/// Any single-variable spec, with every numerator and denominator parameter
/// but the last numerator free; the last numerator keeps `∏t/∏w` fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSpecFamily {
    spec: ThetaSeriesSpec,
    ratio_const: C64,
}

impl RawSpecFamily {
    pub fn new(spec: ThetaSeriesSpec) -> Result<Self> {
        spec.validate()?;
        if spec.numerator.is_empty() {
            return Err(Error::DimensionMismatch(
                "the family needs a numerator".into(),
            ));
        }
        let ratio_const = product(&spec.numerator) / product(&spec.denominator);
        Ok(RawSpecFamily { spec, ratio_const })
    }

    fn rebuild(&self, params: &[C64]) -> ThetaSeriesSpec {
        let r = self.spec.numerator.len();
        let mut numerator = params[..r - 1].to_vec();
        let denominator = params[r - 1..].to_vec();
        let last = self.ratio_const * product(&denominator) / product(&numerator);
        numerator.push(last);
        ThetaSeriesSpec {
            numerator,
            denominator,
            ..self.spec.clone()
        }
    }
}

impl EllipticFamily for RawSpecFamily {
    fn name(&self) -> String {
        "raw_spec".into()
    }

    fn nome(&self) -> Nome {
        self.spec.nome
    }

    fn index_names(&self) -> Vec<String> {
        vec!["n".into()]
    }

    fn parameter_names(&self) -> Vec<String> {
        let r = self.spec.numerator.len();
        (0..r - 1)
            .map(|i| format!("t{i}"))
            .chain((0..self.spec.denominator.len()).map(|k| format!("w{}", k + 1)))
            .collect()
    }

    fn base_parameters(&self) -> Vec<C64> {
        let r = self.spec.numerator.len();
        let mut v = self.spec.numerator[..r - 1].to_vec();
        v.extend_from_slice(&self.spec.denominator);
        v
    }

    fn ratios(&self, w: &[C64], params: &[C64]) -> Result<Vec<C64>> {
        Ok(vec![term_ratio_at(&self.rebuild(params), w[0])?])
    }
}

/// The well-poised family when it applies, the raw-parameter family otherwise.
pub fn family_from_spec(spec: &ThetaSeriesSpec) -> Result<Box<dyn EllipticFamily>> {
    match WellPoisedFamily::from_spec(spec) {
        Ok(f) => Ok(Box::new(f)),
        Err(Error::Constraint(_)) => Ok(Box::new(RawSpecFamily::new(spec.clone())?)),
        Err(e) => Err(e),
    }
}

/// Ratios `h_l = c(λ+e_l)/c(λ)` of the rank-`n` series with `τ_j = t₀t^{j-1}`
/// and six parameters `t₀,…,t₅`, where `t₅` is fixed by
/// `t^{2n-2} t₀t₁t₂t₃t₄t₅ = q`.
///
/// Free parameters are `t₀,…,t₄, t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multi1Family {
    pub n: usize,
    pub ts: [C64; 5],
    pub t: C64,
    pub nome: Nome,
}

impl Multi1Family {
    pub fn new(n: usize, ts: [C64; 5], t: C64, nome: Nome) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("rank must be at least 1".into()));
        }
        Ok(Multi1Family { n, ts, t, nome })
    }

    pub fn sample(n: usize, nome: Nome, band: (f64, f64), seed: u64) -> Result<Self> {
        let mut rng = Sampler::new(seed);
        let ts = [(); 5].map(|_| rng.in_band(band));
        Self::new(n, ts, rng.in_band(band), nome)
    }
}

impl EllipticFamily for Multi1Family {
    fn name(&self) -> String {
        "multi1".into()
    }

    fn nome(&self) -> Nome {
        self.nome
    }

    fn index_names(&self) -> Vec<String> {
        (1..=self.n).map(|i| format!("lambda{i}")).collect()
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
        v.push("t".into());
        v
    }

    fn base_parameters(&self) -> Vec<C64> {
        let mut v = self.ts.to_vec();
        v.push(self.t);
        v
    }

    fn ratios(&self, big_l: &[C64], params: &[C64]) -> Result<Vec<C64>> {
        let (q, p) = (self.nome.q, self.nome.p);
        let n = self.n;
        let t = params[5];
        let mut six = params[..5].to_vec();
        six.push(q / (t.powi(2 * n as i32 - 2) * product(&params[..5])));
        let tau: Vec<C64> = (0..n).map(|j| six[0] * t.powi(j as i32)).collect();
        let mut out = Vec::with_capacity(n);
        for l in 0..n {
            let (tl, ll) = (tau[l], big_l[l]);
            let mut h = FactorialValue::scalar(q * t.powi(2 * (n - 1 - l) as i32));
            for j in 0..l {
                let (tj, lj) = (tau[j], big_l[j]);
                let s = tj * tl * lj * ll;
                let d = tl / tj * ll / lj;
                h = h * th(s * q, p)? * th(d * q, p)? * th(t * s, p)? * th(t * d, p)?
                    / (th(s, p)? * th(d, p)? * th(s / t * q, p)? * th(d / t * q, p)?);
            }
            for k in l + 1..n {
                let (tk, lk) = (tau[k], big_l[k]);
                let s = tk * tl * lk * ll;
                let d = tk / tl * lk / ll;
                h = h * th(s * q, p)? * th(d / q, p)? * th(t * s, p)? * th(d / t, p)?
                    / (th(s, p)? * th(d, p)? * th(s / t * q, p)? * th(t * d / q, p)?);
            }
            let sq = tl * tl * ll * ll;
            h = h * th(sq * q * q, p)? / th(sq, p)?;
            for &tm in &six {
                h = h * th(tm * tl * ll, p)? / th(tl / tm * ll * q, p)?;
            }
            out.push(finish(h)?);
        }
        Ok(out)
    }
}

/// Ratios `h_l = c(λ+e_l)/c(λ)` of the rank-`n` box series with parameters
/// `t₀,…,t_{2n+3}`, where the last is fixed by `∏t_r = q`.
///
/// Free parameters are `t₀,…,t_{2n+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multi2Family {
    pub n: usize,
    pub ts: Vec<C64>,
    pub nome: Nome,
}

impl Multi2Family {
    /// `ts` holds the `2n+3` free parameters.
    pub fn new(n: usize, ts: Vec<C64>, nome: Nome) -> Result<Self> {
        if n == 0 || ts.len() != 2 * n + 3 {
            return Err(Error::DimensionMismatch(format!(
                "rank {n} needs {} free parameters, got {}",
                2 * n + 3,
                ts.len()
            )));
        }
        Ok(Multi2Family { n, ts, nome })
    }

    pub fn sample(n: usize, nome: Nome, band: (f64, f64), seed: u64) -> Result<Self> {
        let mut rng = Sampler::new(seed);
        let ts = (0..2 * n + 3).map(|_| rng.in_band(band)).collect();
        Self::new(n, ts, nome)
    }
}

impl EllipticFamily for Multi2Family {
    fn name(&self) -> String {
        "multi2".into()
    }

    fn nome(&self) -> Nome {
        self.nome
    }

    fn index_names(&self) -> Vec<String> {
        (1..=self.n).map(|i| format!("lambda{i}")).collect()
    }

    fn parameter_names(&self) -> Vec<String> {
        (0..self.ts.len()).map(|i| format!("t{i}")).collect()
    }

    fn base_parameters(&self) -> Vec<C64> {
        self.ts.clone()
    }

    fn ratios(&self, big_l: &[C64], params: &[C64]) -> Result<Vec<C64>> {
        let (q, p) = (self.nome.q, self.nome.p);
        let n = self.n;
        let mut all = params.to_vec();
        all.push(q / product(params));
        // t_1..t_n carry the index variables
        let tv = |j: usize| all[j + 1];
        let mut out = Vec::with_capacity(n);
        for l in 0..n {
            let (tl, ll) = (tv(l), big_l[l]);
            let mut h = FactorialValue::scalar(q.powi(l as i32 + 1));
            for j in 0..l {
                let (tj, lj) = (tv(j), big_l[j]);
                let s = tj * tl * lj * ll;
                let d = tj / tl * lj / ll;
                h = h * th(s * q, p)? * th(d / q, p)? / (th(s, p)? * th(d, p)?);
            }
            for k in l + 1..n {
                let (tk, lk) = (tv(k), big_l[k]);
                let s = tl * tk * ll * lk;
                let d = tl / tk * ll / lk;
                h = h * th(s * q, p)? * th(d * q, p)? / (th(s, p)? * th(d, p)?);
            }
            let sq = tl * tl * ll * ll;
            h = h * th(sq * q * q, p)? / th(sq, p)?;
            for &tm in &all {
                h = h * th(tl * tm * ll, p)? / th(tl / tm * ll * q, p)?;
            }
            out.push(finish(h)?);
        }
        Ok(out)
    }
}

fn vector_dev(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.iter().chain(b).all(|&v| usable(v)) {
        Some(
            a.iter()
                .zip(b)
                .map(|(x, y)| rel_diff(*y, *x))
                .fold(0.0, f64::max),
        )
    } else {
        None
    }
}

/// One report per index variable (`index_p_shift`) and per free parameter
/// (`param_p_shift`), each comparing all ratios before and after `x → p·x`.
pub fn check_total_ellipticity(
    family: &dyn EllipticFamily,
    opts: &CheckOptions,
) -> Result<Vec<EllipticityReport>> {
    let p = family.nome().p;
    if p.norm() == 0.0 {
        return Err(Error::Domain("ellipticity needs p != 0".into()));
    }
    let base = family.base_parameters();
    let idx_names = family.index_names();
    let dim = idx_names.len();
    let mut reports = Vec::new();

    let targets = idx_names
        .into_iter()
        .map(|name| (ShiftKind::IndexPShift, name))
        .chain(
            family
                .parameter_names()
                .into_iter()
                .map(|name| (ShiftKind::ParamPShift, name)),
        );
    for (slot, (kind, name)) in targets.enumerate() {
        let mut rng = Sampler::new(opts.seed.wrapping_add(slot as u64));
        let devs = collect_samples(
            opts.samples,
            || {
                (0..dim)
                    .map(|_| rng.log_annulus(p.norm(), 1.0))
                    .collect::<Vec<_>>()
            },
            |w| {
                let before = family.ratios(&w, &base).ok()?;
                let after = match kind {
                    ShiftKind::IndexPShift => {
                        let mut ws = w.clone();
                        ws[slot] *= p;
                        family.ratios(&ws, &base).ok()?
                    }
                    _ => {
                        let mut ps = base.clone();
                        ps[slot - dim] *= p;
                        family.ratios(&w, &ps).ok()?
                    }
                };
                vector_dev(&before, &after)
            },
        );
        let devs = devs?;
        let max = super::max_dev(&devs);
        reports.push(EllipticityReport {
            shift_kind: kind,
            parameter: Some(name),
            max_rel_dev: max,
            sample_count: devs.len(),
            pass: max <= opts.tol,
            structural_pass: None,
        });
    }
    Ok(reports)
}
