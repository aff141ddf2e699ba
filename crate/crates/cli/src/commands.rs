use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use theta_hyper::ellipticity::{
    check_ellipticity, check_ellipticity_additive, check_modular_t, check_modularity,
    check_total_ellipticity, family_from_spec, h_eval, vwp_theorem_form, CheckOptions,
    EllipticityReport, Multi1Family, Multi2Family, WellPoisedFamily,
};
use theta_hyper::identities::{
    sample_bailey, sample_ft, sample_ge_split, sample_multi1, sample_multi2, sample_nome,
    verify_bailey, verify_ft_sum, verify_ge_split, verify_multi1, verify_multi2, BaileyParams,
    FTParams, GeSplitParams, Multi1Params, Multi2Params, DEFAULT_BAND,
};
use theta_hyper::sampling::Sampler;
use theta_hyper::series::{
    eval_e, eval_g, eval_vwp, term_ratio_at, AdditiveSpec, SeriesInput, SeriesKind, Termination,
    TruncationDecl, VwpKind, VwpRange,
};
use theta_hyper::{BatchReport, ModularPair, Nome, PrecisionPolicy, ThetaSeriesSpec, VwpSpec, C64};

use crate::args::{SamplingArgs, Target};

/// An invalid input or a domain failure; reported on stderr with exit code 2.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind, "message": self.message })
    }
}

impl From<theta_hyper::Error> for CliError {
    fn from(e: theta_hyper::Error) -> Self {
        use theta_hyper::Error as E;
        let kind = match e {
            E::Domain(_) => "domain",
            E::Pole(_) => "pole",
            E::NonConvergence { .. } => "non_convergence",
            E::Determinant(_) => "determinant",
            E::DimensionMismatch(_) => "dimension_mismatch",
            E::Constraint(_) => "constraint",
            E::Branch(_) => "branch",
            E::Sampling(_) => "sampling",
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            kind: "parse",
            message: e.to_string(),
        }
    }
}

/// `Ok(true)` when every check passed, `Ok(false)` when some check failed.
pub type Outcome = Result<bool, CliError>;

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let io_err = |e: std::io::Error| CliError {
        kind: "io",
        message: e.to_string(),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(io_err),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_err),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )))
    }
}

#[derive(Deserialize)]
struct VwpInput {
    #[serde(flatten)]
    spec: VwpSpec,
    truncation: Option<TruncationDecl>,
    window: Option<(i64, i64)>,
    max_terms: Option<usize>,
}

pub fn run_eval(input: &Path, out: Option<&Path>) -> Outcome {
    let v = read_json(input)?;
    if !v.is_object() {
        return Err(CliError::usage("eval input must be a JSON object"));
    }
    let cap = PrecisionPolicy::default().max_terms;
    let value = if v.get("t0").is_some() {
        let inp: VwpInput = serde_json::from_value(v)?;
        let range = match (inp.spec.kind, inp.truncation, inp.window) {
            (VwpKind::Bilateral, _, Some(w)) => VwpRange::Window(w.0, w.1),
            (VwpKind::Bilateral, _, None) => {
                return Err(CliError::usage("a bilateral series needs \"window\""))
            }
            (VwpKind::Unilateral, Some(d), _) => VwpRange::From0(Termination::Declared(d)),
            (VwpKind::Unilateral, None, _) => {
                VwpRange::From0(Termination::Cap(inp.max_terms.unwrap_or(cap)))
            }
        };
        eval_vwp(&inp.spec, range)?
    } else {
        let inp: SeriesInput = serde_json::from_value(v)?;
        match (inp.spec.kind, inp.truncation, inp.window) {
            (SeriesKind::BilateralG, _, Some(w)) => eval_g(&inp.spec, w)?,
            (SeriesKind::BilateralG, _, None) => {
                return Err(CliError::usage("a bilateral series needs \"window\""))
            }
            (SeriesKind::UnilateralE, Some(d), _) => eval_e(&inp.spec, Termination::Declared(d))?,
            (SeriesKind::UnilateralE, None, _) => {
                eval_e(&inp.spec, Termination::Cap(inp.max_terms.unwrap_or(cap)))?
            }
        }
    };
    write_json(&value, out)?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum Params {
    Ft(FTParams),
    Bailey(BaileyParams),
    Multi1(Multi1Params),
    Multi2(Multi2Params),
    GeSplit(GeSplitParams),
}

impl Params {
    fn parse(target: Target, v: Value) -> Result<Self, CliError> {
        Ok(match target {
            Target::FtSum => Params::Ft(serde_json::from_value(v)?),
            Target::Bailey => Params::Bailey(serde_json::from_value(v)?),
            Target::Multi1 => Params::Multi1(serde_json::from_value(v)?),
            Target::Multi2 => Params::Multi2(serde_json::from_value(v)?),
            Target::GeSplit => Params::GeSplit(serde_json::from_value(v)?),
        })
    }

    fn verify(&self, tol: f64) -> theta_hyper::Result<theta_hyper::VerificationReport> {
        match self {
            Params::Ft(p) => verify_ft_sum(p, tol),
            Params::Bailey(p) => verify_bailey(p, tol),
            Params::Multi1(p) => verify_multi1(p, tol),
            Params::Multi2(p) => verify_multi2(p, tol),
            Params::GeSplit(p) => verify_ge_split(p, tol),
        }
    }
}

#[derive(Serialize)]
struct SampleFile<'a> {
    target: Target,
    params: &'a [Params],
}

fn sample_params(target: Target, args: &SamplingArgs) -> Result<Vec<Params>, CliError> {
    if args.draws == 0 {
        return Err(CliError::usage("draws must be at least 1"));
    }
    if args.rank == Some(0) {
        return Err(CliError::usage("rank must be at least 1"));
    }
    let fixed = match args.nome {
        Some([qr, qi, pr, pi]) => Some(Nome::new(C64::new(qr, qi), C64::new(pr, pi))?),
        None => None,
    };
    let band = args.band.unwrap_or(DEFAULT_BAND);
    let n_max = args.n_max.unwrap_or_else(|| target.default_n_max());
    let mut rng = Sampler::new(args.seed);
    let mut out = Vec::with_capacity(args.draws);
    for i in 0..args.draws {
        let nome = match fixed {
            Some(n) => n,
            None => sample_nome(&mut rng)?,
        };
        let rank = args.rank.unwrap_or(1 + i % 3);
        let params = match target {
            Target::FtSum => {
                let n = rng.integer(0, n_max);
                Params::Ft(sample_ft(&mut rng, n, &nome, band)?)
            }
            Target::Bailey => {
                let n = rng.integer(0, n_max);
                Params::Bailey(sample_bailey(&mut rng, n, &nome, band)?)
            }
            Target::Multi1 => {
                let n = rng.integer(0, n_max);
                Params::Multi1(sample_multi1(&mut rng, rank, n, &nome, band)?)
            }
            Target::Multi2 => {
                let ns: Vec<u32> = (0..rank).map(|_| rng.integer(0, n_max)).collect();
                Params::Multi2(sample_multi2(&mut rng, &ns, &nome, band)?)
            }
            Target::GeSplit => Params::GeSplit(sample_ge_split(&mut rng, n_max, &nome, band)?),
        };
        out.push(params);
    }
    Ok(out)
}

pub fn run_sample(target: Target, args: &SamplingArgs, out: Option<&Path>) -> Outcome {
    let params = sample_params(target, args)?;
    write_json(
        &SampleFile {
            target,
            params: &params,
        },
        out,
    )?;
    Ok(true)
}

fn read_params(target: Target, path: &Path) -> Result<Vec<Params>, CliError> {
    let v = read_json(path)?;
    let items = match v {
        Value::Object(mut map) if map.contains_key("params") => {
            if let Some(t) = map.remove("target") {
                let declared: Target = serde_json::from_value(t)?;
                if declared != target {
                    return Err(CliError::usage(format!(
                        "input holds {declared:?} parameters, not {target:?}"
                    )));
                }
            }
            match map.remove("params") {
                Some(Value::Array(items)) => items,
                _ => return Err(CliError::usage("\"params\" must be an array")),
            }
        }
        Value::Array(items) => items,
        obj @ Value::Object(_) => vec![obj],
        _ => return Err(CliError::usage("parameters must be an object or an array")),
    };
    if items.is_empty() {
        return Err(CliError::usage("no parameter sets in input"));
    }
    items
        .into_iter()
        .map(|v| Params::parse(target, v))
        .collect()
}

pub fn run_verify(
    target: Target,
    input: Option<&Path>,
    sampling: &SamplingArgs,
    tol: f64,
    out: Option<&Path>,
) -> Outcome {
    check_tol(tol)?;
    let params = match input {
        Some(path) => read_params(target, path)?,
        None => sample_params(target, sampling)?,
    };
    let reports = params
        .iter()
        .map(|p| p.verify(tol))
        .collect::<theta_hyper::Result<Vec<_>>>()?;
    let batch = BatchReport::new(reports);
    write_json(&batch, out)?;
    Ok(batch.all_pass())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CheckKind {
    Index,
    #[default]
    Total,
    Modular,
    ModularT,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum Family {
    /// A multiplicative series spec.
    Series {
        spec: ThetaSeriesSpec,
    },
    /// A series in elliptic numbers.
    Additive {
        spec: AdditiveSpec,
    },
    /// The totally elliptic ratio built from `u₀` and `u₁,…,u_{r-1}`.
    Theorem {
        u0: C64,
        us: Vec<C64>,
        z: C64,
        pair: ModularPair,
    },
    Multi1 {
        n: usize,
        ts: [C64; 5],
        t: C64,
        nome: Nome,
    },
    Multi2 {
        n: usize,
        ts: Vec<C64>,
        nome: Nome,
    },
}

#[derive(Debug, Clone, Deserialize)]
struct Job {
    #[serde(flatten)]
    family: Family,
    #[serde(default)]
    check: CheckKind,
}

#[derive(Serialize)]
struct JobResult {
    family: &'static str,
    check: CheckKind,
    pass: bool,
    reports: Vec<EllipticityReport>,
}

fn theorem_spec(u0: C64, us: &[C64], z: C64, pair: &ModularPair) -> AdditiveSpec {
    let form = vwp_theorem_form(u0, us, z, pair);
    AdditiveSpec {
        kind: SeriesKind::BilateralG,
        numerator: form.zeros,
        denominator: form.poles,
        z,
        pair: *pair,
    }
}

fn run_job(job: &Job, opts: &CheckOptions) -> Result<JobResult, CliError> {
    let unsupported = |family: &str| {
        Err(CliError::usage(format!(
            "check {:?} does not apply to the {family} family",
            job.check
        )))
    };
    let (family, reports) = match (&job.family, job.check) {
        (Family::Series { spec }, CheckKind::Index) => (
            "series",
            vec![check_ellipticity(
                |w| term_ratio_at(spec, w),
                &spec.nome,
                opts,
            )?],
        ),
        (Family::Series { spec }, CheckKind::Total) => (
            "series",
            check_total_ellipticity(family_from_spec(spec)?.as_ref(), opts)?,
        ),
        (Family::Series { .. }, _) => return unsupported("series"),
        (Family::Additive { spec }, check) => {
            spec.validate()?;
            let reports = match check {
                CheckKind::Index => {
                    let form = spec.to_hform();
                    vec![check_ellipticity_additive(
                        |x| h_eval(&form, x),
                        &spec.pair,
                        opts,
                    )?]
                }
                CheckKind::Total => {
                    let family = family_from_spec(&spec.to_theta_series()?)?;
                    check_total_ellipticity(family.as_ref(), opts)?
                }
                CheckKind::Modular => vec![check_modularity(spec, opts)?],
                CheckKind::ModularT => vec![check_modular_t(spec, opts)?],
            };
            ("additive", reports)
        }
        (Family::Theorem { u0, us, z, pair }, check) => {
            pair.validate()?;
            let spec = theorem_spec(*u0, us, *z, pair);
            let reports = match check {
                CheckKind::Index => {
                    let form = spec.to_hform();
                    vec![check_ellipticity_additive(
                        |x| h_eval(&form, x),
                        pair,
                        opts,
                    )?]
                }
                CheckKind::Total => {
                    let family = WellPoisedFamily::from_theorem(*u0, us, *z, pair)?;
                    check_total_ellipticity(&family, opts)?
                }
                CheckKind::Modular => vec![check_modularity(&spec, opts)?],
                CheckKind::ModularT => vec![check_modular_t(&spec, opts)?],
            };
            ("theorem", reports)
        }
        (Family::Multi1 { n, ts, t, nome }, check) => {
            let family = Multi1Family::new(*n, *ts, *t, *nome)?;
            (
                "multi1",
                multi_reports(check_total_ellipticity(&family, opts)?, check)?,
            )
        }
        (Family::Multi2 { n, ts, nome }, check) => {
            let family = Multi2Family::new(*n, ts.clone(), *nome)?;
            (
                "multi2",
                multi_reports(check_total_ellipticity(&family, opts)?, check)?,
            )
        }
    };
    let pass = reports.iter().all(|r| r.pass);
    Ok(JobResult {
        family,
        check: job.check,
        pass,
        reports,
    })
}

fn multi_reports(
    reports: Vec<EllipticityReport>,
    check: CheckKind,
) -> Result<Vec<EllipticityReport>, CliError> {
    use theta_hyper::ellipticity::ShiftKind;
    match check {
        CheckKind::Total => Ok(reports),
        CheckKind::Index => Ok(reports
            .into_iter()
            .filter(|r| r.shift_kind == ShiftKind::IndexPShift)
            .collect()),
        _ => Err(CliError::usage(
            "modular checks apply to single-variable additive specs only",
        )),
    }
}

pub fn run_ellipticity(
    input: &Path,
    tol: f64,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Outcome {
    check_tol(tol)?;
    if samples == 0 {
        return Err(CliError::usage("samples must be at least 1"));
    }
    let jobs: Vec<Job> = match read_json(input)? {
        Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<Result<_, _>>()?,
        v => vec![serde_json::from_value(v)?],
    };
    let opts = CheckOptions { samples, tol, seed };
    let results = jobs
        .iter()
        .map(|j| run_job(j, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = results.iter().all(|r| r.pass);
    write_json(&json!({ "results": results, "pass": pass }), out)?;
    Ok(pass)
}
