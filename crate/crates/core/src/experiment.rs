//! Averaged guessing-entropy curves of simulated template attacks.
//!
//! Each experiment profiles templates, attacks `n_bytes` independent key
//! bytes and, for every trace count of the schedule, combines the per-byte
//! posteriors and evaluates the bounds. When the product support fits under
//! the materialization limit the exact guessing entropy is computed too.
//! Curves average `log2` values across experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{evaluate_methods, BoundResult, EntropyInput, Method};
use crate::dist::{combine_materialize, combine_stats, guessing_entropy_exact, ProbDist};
use crate::error::{Error, Result};
use crate::sca::{
    build_templates, simulate_traces, LeakageParams, LikelihoodAccumulator, Posterior,
};

/// Tolerance (bits) of the bound-versus-exact validity check.
pub const VALIDITY_TOL_BITS: f64 = 1e-9;

pub const DEFAULT_EXPERIMENTS: usize = 100;
pub const DEFAULT_PROFILING_TRACES: usize = 5000;
pub const DEFAULT_MAX_MATERIALIZE: usize = 1 << 20;

/// How curve values are averaged; recorded in output metadata.
pub const AVERAGING: &str = "mean of log2 values across experiments";

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub profiling_traces: usize,
    pub max_materialize_support: usize,
    pub methods: Vec<Method>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            profiling_traces: DEFAULT_PROFILING_TRACES,
            max_materialize_support: DEFAULT_MAX_MATERIALIZE,
            methods: Method::STANDARD.to_vec(),
        }
    }
}

/// One trace count of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub n_traces: usize,
    pub ge_exact: Option<f64>,
    pub entropy_bits: f64,
    pub log2_min_prob: f64,
    pub bounds: Vec<BoundResult<f64>>,
}

impl ExperimentRow {
    /// Minimum probability of the combined distribution (`0` on underflow).
    pub fn min_prob(&self) -> f64 {
        self.log2_min_prob.exp2()
    }

    pub fn bound(&self, method: Method) -> Option<&BoundResult<f64>> {
        self.bounds.iter().find(|b| b.method == method)
    }

    /// Applicable bounds exceeding the exact guessing entropy.
    pub fn violations(&self) -> usize {
        let Some(ge) = self.ge_exact else { return 0 };
        let log_ge = ge.log2();
        self.bounds
            .iter()
            .filter(|b| b.applicable && b.value_log2_bits > log_ge + VALIDITY_TOL_BITS)
            .count()
    }
}

/// Averaged value of one bound at one trace count.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: Method,
    pub log2_bits: f64,
    /// Applicable in every experiment.
    pub applicable: bool,
    pub applicable_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n_traces: usize,
    pub log2_ge_exact: Option<f64>,
    pub entropy_bits: f64,
    pub log2_min_prob: f64,
    /// Largest combined minimum probability over the experiments.
    pub max_min_prob: f64,
    pub bounds: Vec<CurvePoint>,
    pub violations: usize,
}

impl CurveRow {
    pub fn bound(&self, method: Method) -> Option<&CurvePoint> {
        self.bounds.iter().find(|b| b.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeta {
    pub seed: u64,
    pub sigma: f64,
    pub key_byte: u8,
    pub n_experiments: usize,
    pub n_bytes: usize,
    pub profiling_traces: usize,
    pub max_materialize_support: usize,
    pub averaging: &'static str,
}

/// Averaged guessing-entropy curve over a trace schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct GECurve {
    pub meta: CurveMeta,
    pub methods: Vec<Method>,
    pub rows: Vec<CurveRow>,
}

impl GECurve {
    pub fn trace_counts(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n_traces).collect()
    }

    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `tag` of experiment `index` under `master`.
pub fn derive_seed(master: u64, index: u64, tag: u64) -> u64 {
    mix(mix(mix(master) ^ index) ^ tag)
}

const TAG_KEYS: u64 = 0x4b45_5953;
const TAG_PROFILING: u64 = 0x5052_4f46;

pub fn validate_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Schedule("empty".into()));
    }
    if schedule[0] == 0 {
        return Err(Error::Schedule("trace counts must be at least 1".into()));
    }
    if let Some(w) = schedule.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Schedule(format!(
            "not strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Key bytes of experiment `index`: byte 0 is the configured key byte, the
/// rest are drawn from the experiment's key stream.
pub fn experiment_key(params: &LeakageParams, index: u64, n_bytes: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.rng_seed(), index, TAG_KEYS));
    std::iter::once(params.key_byte())
        .chain((1..n_bytes).map(|_| rng.random()))
        .collect()
}

/// Runs experiment `index` and returns one row per schedule entry.
pub fn run_single_experiment(
    params: &LeakageParams,
    schedule: &[usize],
    n_bytes: usize,
    index: u64,
    options: &ExperimentOptions,
) -> Result<Vec<ExperimentRow>> {
    validate_schedule(schedule)?;
    if n_bytes == 0 {
        return Err(Error::Domain {
            name: "n_bytes",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    let master = params.rng_seed();
    let key = experiment_key(params, index, n_bytes);
    let profiling_params = params.with_seed(derive_seed(master, index, TAG_PROFILING));
    let profiling = simulate_traces(&profiling_params, options.profiling_traces)?;
    let templates = build_templates(&profiling, profiling_params.key_byte())?;

    let max_traces = *schedule.last().expect("validated non-empty");
    let attacks = key
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let p = params
                .with_key(k)
                .with_seed(derive_seed(master, index, j as u64 + 1));
            simulate_traces(&p, max_traces)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut accs = (0..n_bytes)
        .map(|_| LikelihoodAccumulator::new(&templates))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(schedule.len());
    let mut done = 0;
    for &n in schedule {
        for (acc, traces) in accs.iter_mut().zip(&attacks) {
            for (p, x) in traces.iter().skip(done).take(n - done) {
                acc.absorb(p, x);
            }
        }
        done = n;
        let posteriors = accs
            .iter()
            .map(LikelihoodAccumulator::posterior)
            .collect::<Result<Vec<Posterior>>>()?;
        let factors: Vec<ProbDist<f64>> = posteriors.into_iter().map(|p| p.dist).collect();
        rows.push(evaluate_row(n, &factors, options)?);
    }
    Ok(rows)
}

fn evaluate_row(
    n_traces: usize,
    factors: &[ProbDist<f64>],
    options: &ExperimentOptions,
) -> Result<ExperimentRow> {
    let materialized = if factors.len() == 1 {
        Some(factors[0].clone())
    } else {
        match combine_materialize(factors, options.max_materialize_support) {
            Ok(d) => Some(d),
            Err(Error::SupportOverflow { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let (input, ge_exact) = match &materialized {
        Some(d) => (EntropyInput::from_dist(d), Some(guessing_entropy_exact(d))),
        None => (EntropyInput::from_stats(&combine_stats(factors)?), None),
    };
    Ok(ExperimentRow {
        n_traces,
        ge_exact,
        entropy_bits: input.entropy_bits(),
        log2_min_prob: input.log2_min_prob().expect("from dist or stats"),
        bounds: evaluate_methods(&input, &options.methods),
    })
}

/// Runs `n_experiments` independent experiments and averages them.
pub fn run_ge_experiment(
    params: &LeakageParams,
    trace_schedule: &[usize],
    n_experiments: usize,
    n_bytes: usize,
) -> Result<GECurve> {
    run_ge_experiment_with(
        params,
        trace_schedule,
        n_experiments,
        n_bytes,
        &ExperimentOptions::default(),
    )
}

pub fn run_ge_experiment_with(
    params: &LeakageParams,
    trace_schedule: &[usize],
    n_experiments: usize,
    n_bytes: usize,
    options: &ExperimentOptions,
) -> Result<GECurve> {
    validate_schedule(trace_schedule)?;
    if n_experiments == 0 {
        return Err(Error::Domain {
            name: "n_experiments",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    let runs = (0..n_experiments as u64)
        .into_par_iter()
        .map(|e| run_single_experiment(params, trace_schedule, n_bytes, e, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(params, n_bytes, options, &runs))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Averages per-experiment rows (in experiment order, so the result is
/// independent of how the experiments were scheduled).
pub fn average(
    params: &LeakageParams,
    n_bytes: usize,
    options: &ExperimentOptions,
    runs: &[Vec<ExperimentRow>],
) -> GECurve {
    let n_rows = runs.first().map_or(0, Vec::len);
    let rows = (0..n_rows)
        .map(|i| {
            let at: Vec<&ExperimentRow> = runs.iter().map(|r| &r[i]).collect();
            let log2_ge_exact = at
                .iter()
                .map(|r| r.ge_exact.map(f64::log2))
                .collect::<Option<Vec<_>>>()
                .map(|v| mean(v.into_iter()));
            let bounds = options
                .methods
                .iter()
                .filter_map(|&m| {
                    let pts: Vec<&BoundResult<f64>> =
                        at.iter().filter_map(|r| r.bound(m)).collect();
                    (pts.len() == at.len()).then(|| {
                        let applicable_count = pts.iter().filter(|b| b.applicable).count();
                        CurvePoint {
                            method: m,
                            log2_bits: mean(pts.iter().map(|b| b.value_log2_bits)),
                            applicable: applicable_count == pts.len(),
                            applicable_count,
                        }
                    })
                })
                .collect();
            CurveRow {
                n_traces: at[0].n_traces,
                log2_ge_exact,
                entropy_bits: mean(at.iter().map(|r| r.entropy_bits)),
                log2_min_prob: mean(at.iter().map(|r| r.log2_min_prob)),
                max_min_prob: at.iter().map(|r| r.min_prob()).fold(0.0, f64::max),
                bounds,
                violations: at.iter().map(|r| r.violations()).sum(),
            }
        })
        .collect();
    let methods = options
        .methods
        .iter()
        .copied()
        .filter(|m| runs.iter().flatten().all(|r| r.bound(*m).is_some()))
        .collect();
    GECurve {
        meta: CurveMeta {
            seed: params.rng_seed(),
            sigma: params.noise_sigma(),
            key_byte: params.key_byte(),
            n_experiments: runs.len(),
            n_bytes,
            profiling_traces: options.profiling_traces,
            max_materialize_support: options.max_materialize_support,
            averaging: AVERAGING,
        },
        methods,
        rows,
    }
}
