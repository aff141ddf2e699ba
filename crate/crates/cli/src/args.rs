use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "theta-hyper",
    version,
    about = "Evaluate theta hypergeometric series and verify elliptic identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a series described by a JSON file.
    Eval {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify an identity on parameters read from a file or sampled from a seed.
    Verify {
        target: Target,
        /// Parameters as written by `sample`, a bare array, or a single object.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run ellipticity and modularity checks described by a JSON file.
    Ellipticity {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw constraint-satisfying parameters for an identity.
    Sample {
        target: Target,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Target {
    FtSum,
    Bailey,
    Multi1,
    Multi2,
    GeSplit,
}

impl Target {
    /// Largest truncation order drawn when `--n-max` is absent.
    pub fn default_n_max(self) -> u32 {
        match self {
            Target::FtSum => 6,
            Target::Bailey => 4,
            Target::Multi1 => 4,
            Target::Multi2 => 3,
            Target::GeSplit => 4,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub draws: usize,
    /// Largest truncation order `N` (or window half-width for ge_split).
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Rank of the multivariable sums; cycles through 1, 2, 3 when absent.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Modulus band `lo,hi` for sampled parameters.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
    /// Fixed nome `q_re,q_im,p_re,p_im`; sampled per draw when absent.
    #[arg(long, value_parser = parse_nome)]
    pub nome: Option<[f64; 4]>,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() == n {
        Ok(v)
    } else {
        Err(format!(
            "expected {n} comma-separated numbers, got {}",
            v.len()
        ))
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_nome(s: &str) -> Result<[f64; 4], String> {
    let v = parse_floats(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}
