use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gebounds::Method;

#[derive(Debug, Parser)]
#[command(
    name = "gebounds",
    version,
    about = "Guessing-entropy bounds and side-channel experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every bound on a probability-list file.
    Bounds(BoundsArgs),
    /// Combine independent per-byte distributions.
    Combine(CombineArgs),
    /// Simulate template attacks and emit an averaged curve.
    Simulate(SimulateArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Comma-separated method ids, or `all` to include the variants.
    #[arg(long, value_parser = parse_methods)]
    pub methods: Option<Methods>,
}

impl MethodArgs {
    pub fn selected(&self) -> Vec<Method> {
        self.methods
            .as_ref()
            .map_or_else(|| Method::STANDARD.to_vec(), |m| m.0.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Methods(pub Vec<Method>);

fn parse_methods(s: &str) -> Result<Methods, String> {
    if s == "all" {
        return Ok(Methods(Method::ALL.to_vec()));
    }
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("no methods given".into());
    }
    Ok(Methods(v))
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Probability list, one value per line (`-` for stdin).
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub methods: MethodArgs,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Probability-list files, one per independent component.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Statistics output (stdout when omitted).
    #[command(flatten)]
    pub out: OutArgs,
    /// Write bound results for the combined distribution here.
    #[arg(long)]
    pub bounds_out: Option<PathBuf>,
    /// Write the materialized product distribution here.
    #[arg(long)]
    pub materialize_out: Option<PathBuf>,
    /// Largest product support that is materialized.
    #[arg(long, default_value_t = gebounds::experiment::DEFAULT_MAX_MATERIALIZE)]
    pub max_support: usize,
    #[command(flatten)]
    pub methods: MethodArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,
    /// Trace schedule `a:b:step` or a comma-separated list.
    #[arg(long, default_value = "1:60:1", value_parser = parse_schedule)]
    pub traces: Schedule,
    #[arg(long, default_value_t = gebounds::experiment::DEFAULT_EXPERIMENTS)]
    pub experiments: usize,
    /// Number of attacked key bytes.
    #[arg(long, default_value_t = 1)]
    pub bytes: usize,
    /// First key byte (the others are random per experiment).
    #[arg(long, default_value_t = 0x2b)]
    pub key_byte: u8,
    #[arg(long, default_value_t = gebounds::experiment::DEFAULT_PROFILING_TRACES)]
    pub profiling_traces: usize,
    #[arg(long, default_value_t = gebounds::experiment::DEFAULT_MAX_MATERIALIZE)]
    pub max_support: usize,
    /// Externally computed bound (`n_traces,<value>` in log2 bits) merged as an extra column.
    #[arg(long = "ches17-csv")]
    pub ches17_csv: Option<PathBuf>,
    /// Also write a matplotlib script plotting the curve file.
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub methods: MethodArgs,
}

#[derive(Debug, Clone)]
pub struct Schedule(pub Vec<usize>);

pub fn parse_schedule(s: &str) -> Result<Schedule, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let v = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step == 0 || a == 0 || b < a {
                return Err(format!("need 1 <= a <= b and step >= 1 in `{s}`"));
            }
            (a..=b).step_by(step).collect()
        }
        [one] => one.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected a:b:step or a list, got `{s}`")),
    };
    gebounds::experiment::validate_schedule(&v).map_err(|e| e.to_string())?;
    Ok(Schedule(v))
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Candidate coefficients `a,b,c` expected to be falsified (`e` and `1/e` accepted).
    #[arg(long, value_parser = parse_coeffs)]
    pub coeffs: Vec<[f64; 3]>,
    /// Candidate coefficients `a,b,c` expected to survive.
    #[arg(long, value_parser = parse_coeffs)]
    pub valid_coeffs: Vec<[f64; 3]>,
    #[arg(long, default_value_t = 1.001)]
    pub mu_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub mu_max: f64,
    #[arg(long, default_value_t = 10_000)]
    pub grid_points: usize,
    /// Size of the random distribution corpus.
    #[arg(long, default_value_t = 10_000)]
    pub corpus: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_real(t: &str) -> Result<f64, String> {
    match t.trim() {
        "e" => Ok(std::f64::consts::E),
        "1/e" => Ok((-1.0f64).exp()),
        other => other.parse().map_err(|e| format!("`{other}`: {e}")),
    }
}

fn parse_coeffs(s: &str) -> Result<[f64; 3], String> {
    let v = s
        .split(',')
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected three values a,b,c, got {}", v.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("1:10:3").unwrap().0, vec![1, 4, 7, 10]);
        assert_eq!(parse_schedule("1,2,8").unwrap().0, vec![1, 2, 8]);
        assert_eq!(parse_schedule("5").unwrap().0, vec![5]);
        assert!(parse_schedule("0:10:1").is_err());
        assert!(parse_schedule("1:10:0").is_err());
        assert!(parse_schedule("3,2").is_err());
        assert!(parse_schedule("1:2").is_err());
    }

    #[test]
    fn coefficients() {
        let c = parse_coeffs("1/e,2,0.6").unwrap();
        assert_eq!(c, [(-1.0f64).exp(), 2.0, 0.6]);
        assert!(parse_coeffs("1,2").is_err());
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("all").unwrap().0.len(), 9);
        assert_eq!(
            parse_methods("massey,inv_e").unwrap().0,
            vec![Method::Massey, Method::InvE]
        );
        assert!(parse_methods("nope").is_err());
    }
}
