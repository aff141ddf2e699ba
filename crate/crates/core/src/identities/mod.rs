//! Terminating summation and transformation identities: parameter types that
//! enforce their constraints on construction and deserialization, seeded
//! samplers on the constraint manifolds, and both-sides verifiers.

mod verify;

pub use verify::{
    bailey_map, bailey_map_with_root, general_multi_coefficient, verify_bailey,
    verify_bailey_with_root, verify_ft_sum, verify_multi1, verify_multi2, BaileyRoot,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{lattice_distance, product, rel_diff, C64};
use crate::report::VerificationReport;
use crate::sampling::{validate_band, Sampler};
use crate::series::{ge_split_check, VwpKind, VwpSpec};
use crate::theta::Nome;

/// Relative tolerance for the balancing and truncation constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Samples whose denominator theta arguments come this close to a zero of
/// `θ(·;p)` are redrawn.
pub const CONDITIONING_TOL: f64 = 1e-6;

/// Samples whose terms exceed the sum by more than this factor
/// (`Σ|c(λ)| / |rhs|`) are redrawn: rounding in the terms would swamp the sum.
pub const CANCELLATION_LIMIT: f64 = 1e6;

/// Redraws allowed before a sampler gives up.
pub const MAX_RETRIES: usize = 256;

/// Default modulus band for sampled parameters.
pub const DEFAULT_BAND: (f64, f64) = (0.4, 0.9);

/// Modulus ranges for sampled nomes.
pub const Q_BAND: (f64, f64) = (0.3, 0.6);
pub const P_BAND: (f64, f64) = (0.05, 0.5);

/// Largest exponents in the `q^k ≠ p^l` check.
const RESONANCE_SPAN: i32 = 16;

fn check_constraint(value: C64, target: C64, what: &str) -> Result<()> {
    let err = rel_diff(value, target);
    if err <= CONSTRAINT_TOL {
        Ok(())
    } else {
        Err(Error::Constraint(format!(
            "{what}: {value} differs from {target} (rel {err:e})"
        )))
    }
}

fn check_len(v: &[C64], n: usize, what: &str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} needs {n} parameters, got {}",
            v.len()
        )))
    }
}

fn check_nonzero(v: &[C64]) -> Result<()> {
    for (i, t) in v.iter().enumerate() {
        crate::numeric::ensure_nonzero(*t, &format!("t{i}"))?;
    }
    Ok(())
}

/// Checks `q^k ≠ p^l` for `1 ≤ k, l ≤ 16`.
pub fn check_nonresonant(nome: &Nome) -> Result<()> {
    for k in 1..=RESONANCE_SPAN {
        let qk = nome.q.powi(k);
        for l in 1..=RESONANCE_SPAN {
            if rel_diff(qk, nome.p.powi(l)) <= CONSTRAINT_TOL {
                return Err(Error::Constraint(format!("q^{k} = p^{l}")));
            }
        }
    }
    Ok(())
}

fn well_conditioned(args: &[C64], p: C64) -> bool {
    args.iter()
        .all(|&x| x.norm().is_finite() && lattice_distance(x, p) >= CONDITIONING_TOL)
}

/// Parameters of the terminating very-well-poised balanced `₁₀E₉` sum:
/// `∏t_r = q` and `t₀t₄ = q^{-N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFt")]
pub struct FTParams {
    pub t: Vec<C64>,
    #[serde(flatten)]
    pub nome: Nome,
    #[serde(rename = "N")]
    pub n: u32,
}

#[derive(Deserialize)]
struct RawFt {
    t: Vec<C64>,
    #[serde(flatten)]
    nome: Nome,
    #[serde(rename = "N")]
    n: u32,
}

impl TryFrom<RawFt> for FTParams {
    type Error = Error;

    fn try_from(raw: RawFt) -> Result<Self> {
        FTParams::new(raw.t, raw.nome, raw.n)
    }
}

impl FTParams {
    pub fn new(t: Vec<C64>, nome: Nome, n: u32) -> Result<Self> {
        check_len(&t, 6, "the Frenkel-Turaev sum")?;
        check_nonzero(&t)?;
        let q = nome.q;
        check_constraint(product(&t), q, "balancing t0 t1 t2 t3 t4 t5 = q")?;
        check_constraint(t[0] * t[4], q.powi(-(n as i32)), "truncation t0 t4 = q^-N")?;
        Ok(FTParams { t, nome, n })
    }
}

/// Parameters of the terminating elliptic Bailey transformation:
/// `∏t_m = q²` and `t₀t₆ = q^{-N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBailey")]
pub struct BaileyParams {
    pub t: Vec<C64>,
    #[serde(flatten)]
    pub nome: Nome,
    #[serde(rename = "N")]
    pub n: u32,
}

#[derive(Deserialize)]
struct RawBailey {
    t: Vec<C64>,
    #[serde(flatten)]
    nome: Nome,
    #[serde(rename = "N")]
    n: u32,
}

impl TryFrom<RawBailey> for BaileyParams {
    type Error = Error;

    fn try_from(raw: RawBailey) -> Result<Self> {
        BaileyParams::new(raw.t, raw.nome, raw.n)
    }
}

impl BaileyParams {
    pub fn new(t: Vec<C64>, nome: Nome, n: u32) -> Result<Self> {
        check_len(&t, 8, "the Bailey transformation")?;
        check_nonzero(&t)?;
        let q = nome.q;
        check_constraint(product(&t), q * q, "balancing t0 ... t7 = q^2")?;
        check_constraint(t[0] * t[6], q.powi(-(n as i32)), "truncation t0 t6 = q^-N")?;
        Ok(BaileyParams { t, nome, n })
    }
}

/// Parameters of the rank-`n` sum over `0 ≤ λ₁ ≤ … ≤ λ_n ≤ N`:
/// `t^{2n-2}∏t_r = q` and `t^{n-1}t₀t₄ = q^{-N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMulti1")]
pub struct Multi1Params {
    pub n: usize,
    pub t: C64,
    pub t6: Vec<C64>,
    #[serde(rename = "N")]
    pub big_n: u32,
    #[serde(flatten)]
    pub nome: Nome,
}

#[derive(Deserialize)]
struct RawMulti1 {
    n: usize,
    t: C64,
    t6: Vec<C64>,
    #[serde(rename = "N")]
    big_n: u32,
    #[serde(flatten)]
    nome: Nome,
}

impl TryFrom<RawMulti1> for Multi1Params {
    type Error = Error;

    fn try_from(raw: RawMulti1) -> Result<Self> {
        Multi1Params::new(raw.n, raw.t, raw.t6, raw.big_n, raw.nome)
    }
}

impl Multi1Params {
    pub fn new(n: usize, t: C64, t6: Vec<C64>, big_n: u32, nome: Nome) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("rank n must be at least 1".into()));
        }
        check_len(&t6, 6, "the rank-n sum")?;
        check_nonzero(&t6)?;
        crate::numeric::ensure_nonzero(t, "t")?;
        let q = nome.q;
        let tn = t.powi(n as i32 - 1);
        check_constraint(
            tn * tn * product(&t6),
            q,
            "balancing t^(2n-2) t0 ... t5 = q",
        )?;
        check_constraint(
            tn * t6[0] * t6[4],
            q.powi(-(big_n as i32)),
            "truncation t^(n-1) t0 t4 = q^-N",
        )?;
        Ok(Multi1Params {
            n,
            t,
            t6,
            big_n,
            nome,
        })
    }

    /// `τ_j = t₀t^{j-1}`, `j = 1, …, n`.
    pub fn taus(&self) -> Vec<C64> {
        (0..self.n)
            .map(|j| self.t6[0] * self.t.powi(j as i32))
            .collect()
    }
}

/// Parameters of the rank-`n` box sum: `∏_{r=0}^{2n+3} t_r = q`,
/// `q^{N_j} t_j t_{n+j} = 1`, and `q^k ≠ p^l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMulti2")]
pub struct Multi2Params {
    pub n: usize,
    pub t: Vec<C64>,
    #[serde(rename = "Ns")]
    pub ns: Vec<u32>,
    #[serde(flatten)]
    pub nome: Nome,
}

#[derive(Deserialize)]
struct RawMulti2 {
    n: usize,
    t: Vec<C64>,
    #[serde(rename = "Ns")]
    ns: Vec<u32>,
    #[serde(flatten)]
    nome: Nome,
}

impl TryFrom<RawMulti2> for Multi2Params {
    type Error = Error;

    fn try_from(raw: RawMulti2) -> Result<Self> {
        Multi2Params::new(raw.n, raw.t, raw.ns, raw.nome)
    }
}

impl Multi2Params {
    pub fn new(n: usize, t: Vec<C64>, ns: Vec<u32>, nome: Nome) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("rank n must be at least 1".into()));
        }
        check_len(&t, 2 * n + 4, "the rank-n box sum")?;
        if ns.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rank {n} needs {n} truncation orders, got {}",
                ns.len()
            )));
        }
        check_nonzero(&t)?;
        let q = nome.q;
        check_constraint(product(&t), q, "balancing t0 ... t(2n+3) = q")?;
        for j in 1..=n {
            check_constraint(
                q.powi(ns[j - 1] as i32) * t[j] * t[n + j],
                C64::new(1.0, 0.0),
                &format!("truncation q^N{j} t{j} t{} = 1", n + j),
            )?;
        }
        check_nonresonant(&nome)?;
        Ok(Multi2Params { n, t, ns, nome })
    }
}

/// A nome with `|q|` in [`Q_BAND`], `|p|` in [`P_BAND`] and `q^k ≠ p^l`.
pub fn sample_nome(rng: &mut Sampler) -> Result<Nome> {
    for _ in 0..MAX_RETRIES {
        let nome = Nome::new(rng.in_band(Q_BAND), rng.in_band(P_BAND))?;
        let far = (1..=RESONANCE_SPAN)
            .all(|k| lattice_distance(nome.q.powi(k), nome.p) >= CONDITIONING_TOL);
        if far {
            return Ok(nome);
        }
    }
    Err(Error::Sampling("no non-resonant nome found".into()))
}

fn retry<T, F>(what: &str, mut draw: F) -> Result<T>
where
    F: FnMut() -> Result<Option<T>>,
{
    for _ in 0..MAX_RETRIES {
        if let Some(v) = draw()? {
            return Ok(v);
        }
    }
    Err(Error::Sampling(format!(
        "no well-conditioned {what} parameters after {MAX_RETRIES} draws; widen the band"
    )))
}

/// Denominator theta arguments of the terminating very-well-poised sum `(t₀; ts)` up to `N`.
fn vwp_denominators(t0: C64, ts: &[C64], n: u32, q: C64) -> Vec<C64> {
    let mut args = vec![t0 * t0];
    let mut qk = C64::new(1.0, 0.0);
    for _ in 0..n {
        args.push(q * qk);
        args.extend(ts.iter().map(|t| q * t0 / t * qk));
        qk *= q;
    }
    args
}

fn shifted(base: &[C64], n: u32, q: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(base.len() * n as usize);
    let mut qk = C64::new(1.0, 0.0);
    for _ in 0..n {
        out.extend(base.iter().map(|b| b * qk));
        qk *= q;
    }
    out
}

pub(crate) fn ft_denominators(p: &FTParams) -> Vec<C64> {
    let (t, q) = (&p.t, p.nome.q);
    let mut args = vwp_denominators(t[0], &t[1..], p.n, q);
    let base = [
        q / (t[0] * t[1] * t[2] * t[3]),
        q * t[0] / t[1],
        q * t[0] / t[2],
        q * t[0] / t[3],
    ];
    args.extend(shifted(&base, p.n, q));
    args
}

pub(crate) fn bailey_denominators(p: &BaileyParams, s: &[C64]) -> Vec<C64> {
    let (t, q) = (&p.t, p.nome.q);
    let mut args = vwp_denominators(t[0], &t[1..], p.n, q);
    args.extend(vwp_denominators(s[0], &s[1..], p.n, q));
    let base = [
        q * s[0] * s[0],
        q * t[0] / t[4],
        q * t[0] / t[5],
        q / (s[4] * s[5]),
    ];
    args.extend(shifted(&base, p.n, q));
    args
}

pub(crate) fn multi1_denominators(p: &Multi1Params) -> Vec<C64> {
    let (q, t, n, big_n) = (p.nome.q, p.t, p.n, p.big_n);
    let tau = p.taus();
    let t6 = &p.t6;
    let mut args = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            args.push(tau[k] * tau[j]);
            args.push(tau[k] / tau[j]);
            args.extend(shifted(&[q / t * tau[k] * tau[j]], 2 * big_n, q));
            args.extend(shifted(&[q / t * tau[k] / tau[j]], big_n, q));
        }
        args.push(tau[j] * tau[j]);
        let base: Vec<C64> = t6.iter().map(|tr| q * tau[j] / tr).collect();
        args.extend(shifted(&base, big_n, q));
    }
    for j in 1..=n as i32 {
        let mut base = vec![q * t.powi(2 - n as i32 - j) / (t6[0] * t6[1] * t6[2] * t6[3])];
        base.extend((1..4).map(|r| q * t.powi(j - 1) * t6[0] / t6[r]));
        args.extend(shifted(&base, big_n, q));
    }
    args
}

pub(crate) fn multi2_denominators(p: &Multi2Params) -> Vec<C64> {
    let (q, n, t, ns) = (p.nome.q, p.n, &p.t, &p.ns);
    let (a, b, c) = (t[2 * n + 1], t[2 * n + 2], t[2 * n + 3]);
    let total: u32 = ns.iter().sum();
    let mut args = Vec::new();
    for j in 1..=n {
        for k in j + 1..=n {
            args.push(t[j] * t[k]);
            args.push(t[j] / t[k]);
            args.extend(shifted(&[q * t[j] * t[k]], ns[j - 1] + ns[k - 1], q));
        }
        args.push(t[j] * t[j]);
        let nj = ns[j - 1];
        let base: Vec<C64> = t.iter().map(|tr| q * t[j] / tr).collect();
        args.extend(shifted(&base, nj, q));
        let rhs = [
            q * t[j] / a,
            q * t[j] / b,
            q * t[j] / c,
            q.powi(1 + total as i32 - nj as i32) / (t[j] * a * b * c),
        ];
        args.extend(shifted(&rhs, nj, q));
    }
    args
}

/// `t₀,…,t₃` in the band, `t₄ = q^{-N}/t₀`, `t₅ = q/(t₀t₁t₂t₃t₄)`.
pub fn sample_ft(rng: &mut Sampler, n: u32, nome: &Nome, band: (f64, f64)) -> Result<FTParams> {
    validate_band(band)?;
    let q = nome.q;
    retry("Frenkel-Turaev", || {
        let mut t: Vec<C64> = (0..4).map(|_| rng.in_band(band)).collect();
        t.push(q.powi(-(n as i32)) / t[0]);
        t.push(q / product(&t));
        let params = FTParams::new(t, *nome, n)?;
        if !well_conditioned(&ft_denominators(&params), nome.p) {
            return Ok(None);
        }
        let stable = verify::ft_sides(&params)?.cancellation() <= CANCELLATION_LIMIT;
        Ok(stable.then_some(params))
    })
}

/// `t₀,…,t₅` in the band, `t₆ = q^{-N}/t₀`, `t₇ = q²/(t₀⋯t₆)`.
pub fn sample_bailey(
    rng: &mut Sampler,
    n: u32,
    nome: &Nome,
    band: (f64, f64),
) -> Result<BaileyParams> {
    validate_band(band)?;
    let q = nome.q;
    retry("Bailey", || {
        let mut t: Vec<C64> = (0..6).map(|_| rng.in_band(band)).collect();
        t.push(q.powi(-(n as i32)) / t[0]);
        t.push(q * q / product(&t));
        let params = BaileyParams::new(t, *nome, n)?;
        let s = bailey_map(&params.t, &params.nome);
        if !well_conditioned(&bailey_denominators(&params, &s), nome.p) {
            return Ok(None);
        }
        let sides = verify::bailey_sides(&params, BaileyRoot::Principal)?;
        Ok((sides.cancellation() <= CANCELLATION_LIMIT).then_some(params))
    })
}

/// `t, t₀,…,t₃` in the band, `t₄ = q^{-N}/(t^{n-1}t₀)`, `t₅` from balancing.
pub fn sample_multi1(
    rng: &mut Sampler,
    rank: usize,
    n: u32,
    nome: &Nome,
    band: (f64, f64),
) -> Result<Multi1Params> {
    validate_band(band)?;
    let q = nome.q;
    retry("multi1", || {
        let t = rng.in_band(band);
        let tn = t.powi(rank as i32 - 1);
        let mut t6: Vec<C64> = (0..4).map(|_| rng.in_band(band)).collect();
        t6.push(q.powi(-(n as i32)) / (tn * t6[0]));
        t6.push(q / (tn * tn * product(&t6)));
        let params = Multi1Params::new(rank, t, t6, n, *nome)?;
        if !well_conditioned(&multi1_denominators(&params), nome.p) {
            return Ok(None);
        }
        let stable = verify::multi1_sides(&params)?.cancellation() <= CANCELLATION_LIMIT;
        Ok(stable.then_some(params))
    })
}

/// `t₀,…,t_n` and `t_{2n+1}, t_{2n+2}` in the band, `t_{n+j} = q^{-N_j}/t_j`,
/// `t_{2n+3}` from balancing.
pub fn sample_multi2(
    rng: &mut Sampler,
    ns: &[u32],
    nome: &Nome,
    band: (f64, f64),
) -> Result<Multi2Params> {
    validate_band(band)?;
    let n = ns.len();
    let q = nome.q;
    retry("multi2", || {
        let mut t = vec![C64::new(0.0, 0.0); 2 * n + 4];
        for tj in &mut t[..=n] {
            *tj = rng.in_band(band);
        }
        t[2 * n + 1] = rng.in_band(band);
        t[2 * n + 2] = rng.in_band(band);
        for j in 1..=n {
            t[n + j] = q.powi(-(ns[j - 1] as i32)) / t[j];
        }
        t[2 * n + 3] = q / product(&t[..2 * n + 3]);
        let params = Multi2Params::new(n, t, ns.to_vec(), *nome)?;
        if !well_conditioned(&multi2_denominators(&params), nome.p) {
            return Ok(None);
        }
        let stable = verify::multi2_sides(&params)?.cancellation() <= CANCELLATION_LIMIT;
        Ok(stable.then_some(params))
    })
}

/// A bilateral very-well-poised series and the window `[-M, M']` on which
/// its split into two unilateral partial sums is checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeSplitParams {
    pub spec: VwpSpec,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M_prime")]
    pub m_prime: usize,
}

pub fn verify_ge_split(params: &GeSplitParams, tol: f64) -> Result<VerificationReport> {
    let mut report = ge_split_check(&params.spec, params.m, params.m_prime, tol)?;
    report.params_echo = serde_json::to_value(params).unwrap_or(serde_json::Value::Null);
    Ok(report)
}

/// A balanced bilateral `₁₀G₁₀`-type window: `t₀` and `t₁,…,t₄` in the band,
/// `t₅ = q/(t₀t₁t₂t₃t₄)`, `z = 1`, with `M, M'` drawn from `0..=m_max`.
pub fn sample_ge_split(
    rng: &mut Sampler,
    m_max: u32,
    nome: &Nome,
    band: (f64, f64),
) -> Result<GeSplitParams> {
    validate_band(band)?;
    let q = nome.q;
    retry("G/E split", || {
        let t0 = rng.in_band(band);
        let mut ts: Vec<C64> = (0..4).map(|_| rng.in_band(band)).collect();
        ts.push(q / (t0 * product(&ts)));
        let m = rng.integer(0, m_max) as usize;
        let m_prime = rng.integer(0, m_max) as usize;
        let mut spec = VwpSpec::unilateral(t0, ts, C64::new(1.0, 0.0), *nome);
        spec.kind = VwpKind::Bilateral;
        let params = GeSplitParams { spec, m, m_prime };
        let mut args = vec![t0 * t0, q * q / (t0 * t0)];
        for &t in &params.spec.ts {
            args.extend([t0 * t, q * t0 / t, t / t0, q / (t0 * t)]);
        }
        let far = well_conditioned(&shifted(&args, (m + m_prime + 2) as u32, q), nome.p)
            && well_conditioned(&shifted(&args, m as u32 + 2, q.inv()), nome.p);
        Ok(far.then_some(params))
    })
}
