use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorial::{elliptic_factorial, theta_factorial, FactorialValue};
use crate::numeric::C64;
use crate::report::VerificationReport;
use crate::series::{
    eval_vwp, vwp_coefficient, SeriesValue, Termination, TruncationDecl, VwpRange, VwpSpec,
    CLASSIFY_TOL,
};
use crate::theta::{ModularPair, Nome};

use super::{BaileyParams, FTParams, Multi1Params, Multi2Params};

fn echo<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn fact(t: C64, nome: &Nome, n: u32) -> Result<FactorialValue> {
    theta_factorial(t, nome, n as i64)
}

fn th(x: C64, nome: &Nome) -> Result<FactorialValue> {
    FactorialValue::theta(x, nome.p)
}

fn resolved(v: FactorialValue, what: &str) -> Result<C64> {
    v.value()
        .map_err(|_| Error::Pole(format!("{what} has an unresolved pole")))
}

/// The terminating very-well-poised sum `(t₀; ts)` at unit argument, declared
/// to stop at `N` through the parameter `t₀·ts[index-1]`, and `Σ|c_k|`.
fn terminating_vwp(
    t0: C64,
    ts: &[C64],
    nome: &Nome,
    index: usize,
    n: u32,
) -> Result<(SeriesValue, f64)> {
    let spec = VwpSpec::unilateral(t0, ts.to_vec(), C64::new(1.0, 0.0), *nome);
    let decl = TruncationDecl::new(index, n, 0);
    let value = eval_vwp(&spec, VwpRange::From0(Termination::Declared(decl)))?;
    let mut magnitude = 0.0;
    for k in 0..=n as i64 {
        magnitude += resolved(vwp_coefficient(&spec, k)?, "coefficient")?.norm();
    }
    Ok((value, magnitude))
}

/// Both sides of the Frenkel–Turaev sum.
pub fn verify_ft_sum(params: &FTParams, tol: f64) -> Result<VerificationReport> {
    let s = ft_sides(params)?;
    Ok(VerificationReport::compare(
        s.lhs,
        s.rhs,
        tol,
        echo(params),
        s.terms,
    ))
}

pub(crate) fn ft_sides(params: &FTParams) -> Result<Sides> {
    let FTParams { t, nome, n } = params;
    let (q, n) = (nome.q, *n);
    let (lhs, magnitude) = terminating_vwp(t[0], &t[1..], nome, 4, n)?;
    let mut rhs = fact(q * t[0] * t[0], nome, n)?;
    for (r, s) in [(1, 2), (1, 3), (2, 3)] {
        rhs = rhs * fact(q / (t[r] * t[s]), nome, n)?;
    }
    rhs = rhs / fact(q / (t[0] * t[1] * t[2] * t[3]), nome, n)?;
    for r in 1..=3 {
        rhs = rhs / fact(q * t[0] / t[r], nome, n)?;
    }
    let rhs = resolved(rhs, "right-hand side")?;
    Ok(Sides {
        lhs: lhs.value,
        rhs,
        magnitude,
        terms: lhs.terms_used,
    })
}

/// Which square root `s₀` of `qt₀/(t₁t₂t₃)` the Bailey map uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaileyRoot {
    #[default]
    Principal,
    Negative,
}

/// `s₀ = √(qt₀/(t₁t₂t₃))`, `s_i = s₀t_i/t₀` (`i = 1,2,3`), `s_i = t₀t_i/s₀` (`i = 4,…,7`).
pub fn bailey_map(t: &[C64], nome: &Nome) -> Vec<C64> {
    bailey_map_with_root(t, nome, BaileyRoot::Principal)
}

pub fn bailey_map_with_root(t: &[C64], nome: &Nome, root: BaileyRoot) -> Vec<C64> {
    let mut s0 = (nome.q * t[0] / (t[1] * t[2] * t[3])).sqrt();
    if root == BaileyRoot::Negative {
        s0 = -s0;
    }
    let mut s = vec![s0];
    s.extend((1..4).map(|i| s0 * t[i] / t[0]));
    s.extend((4..8).map(|i| t[0] * t[i] / s0));
    s
}

/// Both sides of the terminating elliptic Bailey transformation with the principal root.
pub fn verify_bailey(params: &BaileyParams, tol: f64) -> Result<VerificationReport> {
    verify_bailey_with_root(params, BaileyRoot::Principal, tol)
}

pub fn verify_bailey_with_root(
    params: &BaileyParams,
    root: BaileyRoot,
    tol: f64,
) -> Result<VerificationReport> {
    let s = bailey_sides(params, root)?;
    let mut echo = echo(params);
    if root == BaileyRoot::Negative {
        echo["root"] = serde_json::json!("negative");
    }
    Ok(VerificationReport::compare(
        s.lhs, s.rhs, tol, echo, s.terms,
    ))
}

/// The magnitude is the larger of the two sides' `Σ|c_k|`, the right one
/// including its prefactor.
pub(crate) fn bailey_sides(params: &BaileyParams, root: BaileyRoot) -> Result<Sides> {
    let BaileyParams { t, nome, n } = params;
    let (q, n) = (nome.q, *n);
    let s = bailey_map_with_root(t, nome, root);
    let (lhs, left_mag) = terminating_vwp(t[0], &t[1..], nome, 6, n)?;
    let (right, right_mag) = terminating_vwp(s[0], &s[1..], nome, 6, n)?;
    let num = [
        q * t[0] * t[0],
        q * s[0] / s[4],
        q * s[0] / s[5],
        q / (t[4] * t[5]),
    ];
    let den = [
        q * s[0] * s[0],
        q * t[0] / t[4],
        q * t[0] / t[5],
        q / (s[4] * s[5]),
    ];
    let mut pre = FactorialValue::one();
    for (a, b) in num.iter().zip(&den) {
        pre = pre * fact(*a, nome, n)? / fact(*b, nome, n)?;
    }
    let pre = resolved(pre, "prefactor")?;
    Ok(Sides {
        lhs: lhs.value,
        rhs: pre * right.value,
        magnitude: left_mag.max(pre.norm() * right_mag),
        terms: lhs.terms_used + right.terms_used,
    })
}

/// Visits every non-decreasing `λ` with entries in `0..=max`.
fn for_each_ordered(n: usize, max: u32, f: &mut dyn FnMut(&[u32]) -> Result<()>) -> Result<()> {
    fn rec(
        lam: &mut Vec<u32>,
        n: usize,
        lo: u32,
        max: u32,
        f: &mut dyn FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if lam.len() == n {
            return f(lam);
        }
        for v in lo..=max {
            lam.push(v);
            rec(lam, n, v, max, f)?;
            lam.pop();
        }
        Ok(())
    }
    rec(&mut Vec::with_capacity(n), n, 0, max, f)
}

/// Visits every `λ` in the box `0 ≤ λ_j ≤ N_j`.
fn for_each_box(ns: &[u32], f: &mut dyn FnMut(&[u32]) -> Result<()>) -> Result<()> {
    let mut lam = vec![0u32; ns.len()];
    loop {
        f(&lam)?;
        let mut i = 0;
        loop {
            if i == ns.len() {
                return Ok(());
            }
            if lam[i] < ns[i] {
                lam[i] += 1;
                break;
            }
            lam[i] = 0;
            i += 1;
        }
    }
}

fn multi1_coefficient(params: &Multi1Params, tau: &[C64], lam: &[u32]) -> Result<FactorialValue> {
    let nome = &params.nome;
    let (q, t, n) = (nome.q, params.t, params.n);
    let total: u32 = lam.iter().sum();
    let weighted: u32 = (0..n).map(|j| (n - 1 - j) as u32 * lam[j]).sum();
    let mut c = FactorialValue::scalar(q.powi(total as i32) * t.powi(2 * weighted as i32));
    for j in 0..n {
        for k in j + 1..n {
            let (tj, tk) = (tau[j], tau[k]);
            let (lj, lk) = (lam[j] as i32, lam[k] as i32);
            let plus = (lk + lj) as i64;
            let minus = (lk - lj) as i64;
            c = c * th(tk * tj * q.powi(lk + lj), nome)? * th(tk / tj * q.powi(lk - lj), nome)?
                / (th(tk * tj, nome)? * th(tk / tj, nome)?);
            c = c * theta_factorial(t * tk * tj, nome, plus)?
                / theta_factorial(q / t * tk * tj, nome, plus)?
                * theta_factorial(t * tk / tj, nome, minus)?
                / theta_factorial(q / t * tk / tj, nome, minus)?;
        }
    }
    for j in 0..n {
        let (tj, lj) = (tau[j], lam[j]);
        c = c * th(tj * tj * q.powi(2 * lj as i32), nome)? / th(tj * tj, nome)?;
        for &tr in &params.t6 {
            c = c * fact(tr * tj, nome, lj)? / fact(q / tr * tj, nome, lj)?;
        }
    }
    Ok(c)
}

/// Both sides of the rank-`n` sum over `0 ≤ λ₁ ≤ … ≤ λ_n ≤ N`; the right-hand
/// side is the product over `j = 1, …, n` of the `j`-dependent factor.
pub fn verify_multi1(params: &Multi1Params, tol: f64) -> Result<VerificationReport> {
    let s = multi1_sides(params)?;
    Ok(VerificationReport::compare(
        s.lhs,
        s.rhs,
        tol,
        echo(params),
        s.terms,
    ))
}

/// Both sides of a brute-force multiple sum, with `Σ|c(λ)|` for judging cancellation.
pub(crate) struct Sides {
    pub lhs: C64,
    pub rhs: C64,
    pub magnitude: f64,
    pub terms: usize,
}

impl Sides {
    /// `Σ|c(λ)| / |rhs|`: the factor by which rounding in the terms is amplified.
    pub fn cancellation(&self) -> f64 {
        self.magnitude / self.rhs.norm()
    }
}

pub(crate) fn multi1_sides(params: &Multi1Params) -> Result<Sides> {
    let nome = &params.nome;
    let (q, t, n, big_n) = (nome.q, params.t, params.n, params.big_n);
    let t6 = &params.t6;
    let tau = params.taus();
    let mut lhs = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut terms = 0usize;
    for_each_ordered(n, big_n, &mut |lam| {
        let c = resolved(multi1_coefficient(params, &tau, lam)?, "coefficient")?;
        lhs += c;
        magnitude += c.norm();
        terms += 1;
        Ok(())
    })?;
    let mut rhs = FactorialValue::one();
    for j in 1..=n as i32 {
        let tj1 = t.powi(1 - j);
        rhs = rhs * fact(q * t.powi(n as i32 + j - 2) * t6[0] * t6[0], nome, big_n)?;
        for (r, s) in [(1, 2), (1, 3), (2, 3)] {
            rhs = rhs * fact(q * tj1 / (t6[r] * t6[s]), nome, big_n)?;
        }
        rhs = rhs
            / fact(
                q * t.powi(2 - n as i32 - j) / (t6[0] * t6[1] * t6[2] * t6[3]),
                nome,
                big_n,
            )?;
        for r in 1..=3 {
            rhs = rhs / fact(q * t.powi(j - 1) * t6[0] / t6[r], nome, big_n)?;
        }
    }
    let rhs = resolved(rhs, "right-hand side")?;
    Ok(Sides {
        lhs,
        rhs,
        magnitude,
        terms,
    })
}

fn multi2_coefficient(params: &Multi2Params, lam: &[u32]) -> Result<FactorialValue> {
    let nome = &params.nome;
    let (q, n, t) = (nome.q, params.n, &params.t);
    let weighted: u32 = (0..n).map(|j| (j as u32 + 1) * lam[j]).sum();
    let mut c = FactorialValue::scalar(q.powi(weighted as i32));
    for j in 1..=n {
        let lj = lam[j - 1] as i32;
        for k in j + 1..=n {
            let lk = lam[k - 1] as i32;
            c = c
                * th(t[j] * t[k] * q.powi(lj + lk), nome)?
                * th(t[j] / t[k] * q.powi(lj - lk), nome)?
                / (th(t[j] * t[k], nome)? * th(t[j] / t[k], nome)?);
        }
        c = c * th(t[j] * t[j] * q.powi(2 * lj), nome)? / th(t[j] * t[j], nome)?;
        for &tr in t {
            c = c * fact(t[j] * tr, nome, lj as u32)? / fact(q * t[j] / tr, nome, lj as u32)?;
        }
    }
    Ok(c)
}

/// Both sides of the rank-`n` box sum, with `a, b, c = t_{2n+1}, t_{2n+2}, t_{2n+3}`.
pub fn verify_multi2(params: &Multi2Params, tol: f64) -> Result<VerificationReport> {
    let s = multi2_sides(params)?;
    Ok(VerificationReport::compare(
        s.lhs,
        s.rhs,
        tol,
        echo(params),
        s.terms,
    ))
}

pub(crate) fn multi2_sides(params: &Multi2Params) -> Result<Sides> {
    let nome = &params.nome;
    let (q, n, t, ns) = (nome.q, params.n, &params.t, &params.ns);
    let mut lhs = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut terms = 0usize;
    for_each_box(ns, &mut |lam| {
        let c = resolved(multi2_coefficient(params, lam)?, "coefficient")?;
        lhs += c;
        magnitude += c.norm();
        terms += 1;
        Ok(())
    })?;
    let (a, b, c) = (t[2 * n + 1], t[2 * n + 2], t[2 * n + 3]);
    let total: u32 = ns.iter().sum();
    let mut rhs = fact(q / (a * b), nome, total)?
        * fact(q / (a * c), nome, total)?
        * fact(q / (b * c), nome, total)?;
    for j in 1..=n {
        for k in j + 1..=n {
            let x = q * t[j] * t[k];
            rhs = rhs * fact(x, nome, ns[j - 1])? * fact(x, nome, ns[k - 1])?
                / fact(x, nome, ns[j - 1] + ns[k - 1])?;
        }
    }
    for j in 1..=n {
        let nj = ns[j - 1];
        rhs = rhs * fact(q * t[j] * t[j], nome, nj)?;
        let den = [
            q * t[j] / a,
            q * t[j] / b,
            q * t[j] / c,
            q.powi(1 + total as i32 - nj as i32) / (t[j] * a * b * c),
        ];
        for x in den {
            rhs = rhs / fact(x, nome, nj)?;
        }
    }
    let rhs = resolved(rhs, "right-hand side")?;
    Ok(Sides {
        lhs,
        rhs,
        magnitude,
        terms,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Visits every `k`-subset `i₁ < … < i_k` of `0..n`.
fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(
        cur: &mut Vec<usize>,
        start: usize,
        n: usize,
        k: usize,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            cur.push(i);
            rec(cur, i + 1, n, k, f)?;
            cur.pop();
        }
        Ok(())
    }
    rec(&mut Vec::with_capacity(k), 0, n, k, f)
}

/// The general multiple-series coefficient
/// `c(λ) = ∏_k ∏_{i₁<…<i_k} ∏_m [u_{km}]_{λ_{i₁}+…+λ_{i_k}} / [v_{km}]_{…} · ∏ z_j^{λ_j}`.
///
/// `u_lists[k-1]`, `v_lists[k-1]` hold the parameters attached to `k`-subsets.
pub fn general_multi_coefficient(
    u_lists: &[Vec<C64>],
    v_lists: &[Vec<C64>],
    zs: &[C64],
    pair: &ModularPair,
    lambda: &[u32],
) -> Result<C64> {
    let n = lambda.len();
    if zs.len() != n || u_lists.len() != v_lists.len() || u_lists.len() > n {
        return Err(Error::DimensionMismatch(format!(
            "{n} index variables with {} arguments and {}/{} parameter lists",
            zs.len(),
            u_lists.len(),
            v_lists.len()
        )));
    }
    let mut balance = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for (k, (us, vs)) in u_lists.iter().zip(v_lists).enumerate() {
        let w = binomial(n - 1, k);
        let d: C64 = us.iter().sum::<C64>() - vs.iter().sum::<C64>();
        balance += d * w;
        scale = scale.max(us.iter().chain(vs).map(|x| x.norm()).fold(0.0, f64::max) * w);
    }
    if balance.norm() > CLASSIFY_TOL * scale.max(1.0) {
        return Err(Error::Constraint(format!(
            "coefficient parameters are not balanced (defect {balance})"
        )));
    }
    let mut c = FactorialValue::one();
    for (k, (us, vs)) in u_lists.iter().zip(v_lists).enumerate() {
        for_each_subset(n, k + 1, &mut |idx| {
            let m: i64 = idx.iter().map(|&i| lambda[i] as i64).sum();
            for &u in us {
                c = c * elliptic_factorial(u, pair, m)?;
            }
            for &v in vs {
                c = c / elliptic_factorial(v, pair, m)?;
            }
            Ok(())
        })?;
    }
    let zpow: C64 = zs
        .iter()
        .zip(lambda)
        .map(|(z, &l)| z.powi(l as i32))
        .product();
    Ok(resolved(c, "coefficient")? * zpow)
}
