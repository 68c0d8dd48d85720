use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use gebounds::bounds::{evaluate_methods, EntropyInput};
use gebounds::dist::{
    combine_materialize, combine_stats, guessing_entropy_exact, normalize, ProbDist,
};
use gebounds::experiment::{run_ge_experiment_with, ExperimentOptions};
use gebounds::io::{self as gio, fmt_num};
use gebounds::verify::{run_verification, InjectedCoefficients, VerifyConfig};
use gebounds::{Error, LeakageParams, MasseyLikeCoefficients};

use crate::args::{BoundsArgs, CombineArgs, SimulateArgs, VerifyArgs};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut s)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut s))
    };
    res.map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(s)
}

fn read_dist(path: &Path) -> Result<ProbDist<f64>> {
    let input = |source| CliError::Input {
        path: path.display().to_string(),
        source,
    };
    let values = gio::parse_prob_list(&read_text(path)?).map_err(input)?;
    let n = normalize(&values).map_err(input)?;
    for w in n.warnings() {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(n.dist)
}

/// Opens `path` for writing, or stdout.
fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            }),
    }
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush().map_err(|e| CliError::Lib(e.into()))
}

pub fn bounds(a: &BoundsArgs) -> Result<()> {
    let d = read_dist(&a.input)?;
    let res = evaluate_methods(&EntropyInput::from_dist(&d), &a.methods.selected());
    let mut w = sink(a.out.out.as_ref())?;
    gio::write_bounds_csv(&mut w, &res)?;
    finish(w)
}

pub fn combine(a: &CombineArgs) -> Result<()> {
    let factors = a
        .inputs
        .iter()
        .map(|p| read_dist(p))
        .collect::<Result<Vec<_>>>()?;
    let stats = combine_stats(&factors)?;

    let product = match combine_materialize(&factors, a.max_support) {
        Ok(d) => Some(d),
        Err(Error::SupportOverflow {
            log2_support,
            limit,
        }) => {
            eprintln!(
                "notice: product support 2^{log2_support:.3} exceeds --max-support {limit}; \
                 emitting statistics only"
            );
            None
        }
        Err(e) => return Err(e.into()),
    };

    let mut extra = vec![("materialized", product.is_some().to_string())];
    if let Some(d) = &product {
        extra.push(("support", d.len().to_string()));
        extra.push(("exact_ge", fmt_num(guessing_entropy_exact(d))));
    }
    let mut w = sink(a.out.out.as_ref())?;
    gio::write_stats_csv(&mut w, &stats, &extra)?;
    finish(w)?;

    if let Some(path) = &a.materialize_out {
        match &product {
            Some(d) => {
                let mut w = sink(Some(path))?;
                gio::write_prob_list(&mut w, d)?;
                finish(w)?;
            }
            None => eprintln!("notice: {} not written (not materialized)", path.display()),
        }
    }
    if let Some(path) = &a.bounds_out {
        let input = match &product {
            Some(d) => EntropyInput::from_dist(d),
            None => EntropyInput::from_stats(&stats),
        };
        let mut w = sink(Some(path))?;
        gio::write_bounds_csv(&mut w, &evaluate_methods(&input, &a.methods.selected()))?;
        finish(w)?;
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    if a.experiments == 0 || a.bytes == 0 {
        return Err(CliError::Usage(
            "--experiments and --bytes must be at least 1".into(),
        ));
    }
    let params = LeakageParams::new(a.sigma, a.key_byte, a.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ches17 = a
        .ches17_csv
        .as_ref()
        .map(|p| {
            gio::read_ches17_csv(&read_text(p)?).map_err(|source| CliError::Input {
                path: p.display().to_string(),
                source,
            })
        })
        .transpose()?;
    let options = ExperimentOptions {
        profiling_traces: a.profiling_traces,
        max_materialize_support: a.max_support,
        methods: a.methods.selected(),
    };
    let curve = run_ge_experiment_with(&params, &a.traces.0, a.experiments, a.bytes, &options)?;
    if curve.total_violations() > 0 {
        eprintln!(
            "warning: {} applicable bound values exceed the exact guessing entropy",
            curve.total_violations()
        );
    }
    let mut w = sink(a.out.out.as_ref())?;
    gio::write_curve_csv(&mut w, &curve, ches17.as_ref())?;
    finish(w)?;

    if let Some(path) = &a.plot_script {
        let data = a
            .out
            .out
            .as_ref()
            .map_or_else(|| "curve.csv".to_string(), |p| p.display().to_string());
        let mut w = sink(Some(path))?;
        w.write_all(plot_script(&data).as_bytes())
            .map_err(|e| CliError::Lib(e.into()))?;
        finish(w)?;
    }
    Ok(())
}

fn plot_script(data: &str) -> String {
    format!(
        r##"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {data:?}
with open(path) as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
x = [int(r["n_traces"]) for r in rows]
for col in rows[0]:
    if col == "log2_ge_exact" or col.endswith("_log2"):
        y = [float(r[col]) if r[col] else float("nan") for r in rows]
        plt.plot(x, y, label=col.removesuffix("_log2"))
plt.xlabel("number of traces")
plt.ylabel("log2 guessing entropy (bits)")
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"##
    )
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    if !(a.mu_min > 1.0) || !(a.mu_max > a.mu_min) || !a.mu_max.is_finite() {
        return Err(CliError::Usage(format!(
            "need 1 < --mu-min < --mu-max, got {} and {}",
            a.mu_min, a.mu_max
        )));
    }
    if a.grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be at least 2".into()));
    }
    let inject = |list: &[[f64; 3]], expect_witness| {
        list.iter()
            .map(|&[x, y, z]| {
                MasseyLikeCoefficients::new(x, y, z)
                    .map(|coeffs| InjectedCoefficients {
                        coeffs,
                        expect_witness,
                    })
                    .map_err(|e| CliError::Usage(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()
    };
    let mut injected = inject(&a.coeffs, true)?;
    injected.extend(inject(&a.valid_coeffs, false)?);
    let cfg = VerifyConfig {
        mu_min: a.mu_min,
        mu_max: a.mu_max,
        grid_points: a.grid_points,
        corpus_size: a.corpus,
        seed: a.seed,
        injected,
        ..VerifyConfig::default()
    };
    let report = run_verification(&cfg)?;
    let mut w = sink(a.out.out.as_ref())?;
    gio::write_report_csv(&mut w, &report.claims)?;
    finish(w)?;

    for c in &report.claims {
        eprintln!("{:<28} {}", c.id, c.status);
    }
    let failed: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
