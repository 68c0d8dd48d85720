//! Verification suite: runs the oracle checks and reports one result per
//! claim.

use std::fmt;

use rayon::prelude::*;

use crate::bounds::{
    bound_at_alpha, evaluate_all, max_entropy_given_ge, BoundResult, EntropyInput,
    MasseyLikeCoefficients, Method,
};
use crate::dist::{guessing_entropy_exact, make_dist, shannon_entropy, ProbDist};
use crate::error::Result;
use crate::oracle::{
    f_gap, falsify_coefficients, finite_diff_check, gap_second_derivative_expanded, log_grid,
    random_corpus, random_dist, refine_sequence, CorpusEntry, Sampler,
};

/// Slack allowed when comparing a bound against an exact guessing entropy.
pub const VALIDITY_TOL: f64 = 1e-9;
/// Relative slack for orderings between bounds.
pub const ORDER_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimStatus {
    Pass,
    /// A witness was found where one was expected.
    FalsifiedAsExpected,
    Fail,
}

impl ClaimStatus {
    pub fn is_success(self) -> bool {
        self != ClaimStatus::Fail
    }
}

impl fmt::Display for ClaimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClaimStatus::Pass => "pass",
            ClaimStatus::FalsifiedAsExpected => "falsified_as_expected",
            ClaimStatus::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimResult {
    pub id: String,
    pub status: ClaimStatus,
    /// Offending (or confirming) parameter, e.g. `μ` for coefficient scans.
    pub witness: Option<f64>,
    pub margin: Option<f64>,
    pub detail: String,
}

impl ClaimResult {
    fn new(id: &str, ok: bool, witness: Option<f64>, margin: Option<f64>, detail: String) -> Self {
        Self {
            id: id.into(),
            status: if ok {
                ClaimStatus::Pass
            } else {
                ClaimStatus::Fail
            },
            witness,
            margin,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status.is_success()
    }
}

/// Candidate coefficients supplied by the user, with the expected outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectedCoefficients {
    pub coeffs: MasseyLikeCoefficients<f64>,
    pub expect_witness: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub mu_min: f64,
    pub mu_max: f64,
    pub grid_points: usize,
    pub gap_points: usize,
    pub corpus_size: usize,
    pub corpus_min_len: usize,
    pub corpus_max_len: usize,
    pub seed: u64,
    pub refine_depth: usize,
    pub injected: Vec<InjectedCoefficients>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            mu_min: 1.001,
            mu_max: 1e6,
            grid_points: 10_000,
            gap_points: 1000,
            corpus_size: 10_000,
            corpus_min_len: 2,
            corpus_max_len: 4096,
            seed: 0,
            refine_depth: 40,
            injected: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub claims: Vec<ClaimResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(ClaimResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.iter().filter(|c| !c.passed())
    }
}

pub fn run_verification(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let grid = log_grid(cfg.mu_min, cfg.mu_max, cfg.grid_points)?;
    let mut claims = Vec::new();
    claims.extend(check_f_gap(cfg.mu_min, cfg.mu_max, cfg.gap_points)?);
    claims.push(check_finite_differences(
        &[1.5, 2.0, 10.0, 100.0],
        1e-4,
        1e-6,
    )?);
    claims.extend(check_falsify_battery(&grid)?);
    for (i, inj) in cfg.injected.iter().enumerate() {
        claims.push(check_injected(&format!("falsify.injected.{i}"), inj, &grid));
    }
    claims.push(check_refinement(cfg.seed, cfg.refine_depth, 1e-6)?);
    claims.push(check_massey_tightness()?);
    let corpus = random_corpus(
        cfg.corpus_size,
        cfg.corpus_min_len,
        cfg.corpus_max_len,
        cfg.seed,
    )?;
    claims.extend(check_corpus(&corpus));
    Ok(VerifyReport { claims })
}

/// Sign, curvature and monotonicity of the gap `f` on a log grid.
pub fn check_f_gap(lo: f64, hi: f64, points: usize) -> Result<Vec<ClaimResult>> {
    let grid = log_grid(lo, hi, points)?;
    let gaps = grid
        .iter()
        .map(|&mu| f_gap(mu))
        .collect::<Result<Vec<_>>>()?;

    let bad_sign = gaps
        .iter()
        .find(|g| !(g.f_value > 0.0 && g.f_prime < 0.0 && g.f_second > 0.0));
    let min_f = gaps.iter().map(|g| g.f_value).fold(f64::INFINITY, f64::min);
    let signs = ClaimResult::new(
        "f_gap.signs",
        bad_sign.is_none(),
        bad_sign.map(|g| g.mu),
        Some(min_f),
        format!("f > 0, f' < 0, f'' > 0 on {points} points in [{lo}, {hi}]"),
    );

    let (worst_mu, worst_rel) = gaps
        .iter()
        .map(|g| {
            let e = gap_second_derivative_expanded(g.mu);
            (g.mu, ((e - g.f_second) / g.f_second).abs())
        })
        .fold((lo, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let second = ClaimResult::new(
        "f_gap.second_derivative",
        worst_rel <= 1e-9,
        Some(worst_mu),
        Some(worst_rel),
        "expanded f'' vs 1/(4 mu (mu-1) (mu-1/2)^2), relative".into(),
    );

    let non_mono = gaps.windows(2).find(|w| !(w[1].f_value < w[0].f_value));
    let mono = ClaimResult::new(
        "f_gap.decreasing",
        non_mono.is_none(),
        non_mono.map(|w| w[1].mu),
        None,
        "f strictly decreasing along the sorted grid".into(),
    );
    Ok(vec![signs, second, mono])
}

pub fn check_finite_differences(mus: &[f64], step: f64, tol: f64) -> Result<ClaimResult> {
    let mut worst = (mus[0], 0.0);
    for &mu in mus {
        let r = finite_diff_check(mu, step)?;
        let res = r.first_residual.max(r.second_residual);
        if !(res <= worst.1) {
            worst = (mu, res);
        }
    }
    Ok(ClaimResult::new(
        "f_gap.finite_differences",
        worst.1 <= tol,
        Some(worst.0),
        Some(worst.1),
        format!("central differences, h = {step}, tolerance {tol}"),
    ))
}

/// Coefficient sets probed by the default battery: the optimal one, which
/// must survive, and perturbations that must be falsified.
pub fn falsify_battery() -> Vec<(&'static str, [f64; 3], bool)> {
    let inv_e = (-1.0f64).exp();
    vec![
        ("falsify.optimal", [inv_e, 2.0, 0.5], false),
        ("falsify.c_0.55", [inv_e, 2.0, 0.55], true),
        ("falsify.a_0.4", [0.4, 2.0, 0.5], true),
        ("falsify.a_plus_0.05", [inv_e + 0.05, 2.0, 0.5], true),
        ("falsify.b_2.05", [inv_e, 2.05, 0.5], true),
    ]
}

pub fn check_falsify_battery(grid: &[f64]) -> Result<Vec<ClaimResult>> {
    falsify_battery()
        .into_iter()
        .map(|(id, [a, b, c], expect_witness)| {
            let inj = InjectedCoefficients {
                coeffs: MasseyLikeCoefficients::new(a, b, c)?,
                expect_witness,
            };
            Ok(check_injected(id, &inj, grid))
        })
        .collect()
}

pub fn check_injected(id: &str, inj: &InjectedCoefficients, grid: &[f64]) -> ClaimResult {
    let rep = falsify_coefficients(&inj.coeffs, grid);
    let (a, b, c) = (inj.coeffs.a(), inj.coeffs.b(), inj.coeffs.c());
    let status = match (rep.falsified(), inj.expect_witness) {
        (true, true) => ClaimStatus::FalsifiedAsExpected,
        (false, false) => ClaimStatus::Pass,
        _ => ClaimStatus::Fail,
    };
    ClaimResult {
        id: id.into(),
        status,
        witness: rep.mu_witness,
        margin: Some(rep.margin),
        detail: format!(
            "a={a} b={b} c={c}; {} expected; {} grid points",
            if inj.expect_witness {
                "witness"
            } else {
                "no witness"
            },
            rep.grid_points
        ),
    }
}

/// Test distributions for the refinement claim: uniform-4 plus five random
/// distributions with at least one bit of entropy.
pub fn refinement_inputs(seed: u64) -> Result<Vec<ProbDist<f64>>> {
    let mut out = vec![ProbDist::uniform(4)?];
    let mut s = seed;
    while out.len() < 6 {
        let sampler = Sampler::ALL[out.len() % Sampler::ALL.len()];
        let n = 3 + (s % 61) as usize;
        let d = random_dist(sampler, n, s)?;
        if d.entropy() >= 1.0 {
            out.push(d);
        }
        s = s.wrapping_add(1);
    }
    Ok(out)
}

pub fn check_refinement(seed: u64, depth: usize, tol: f64) -> Result<ClaimResult> {
    let mut worst_gap = 0.0f64;
    let mut first_bad: Option<f64> = None;
    for (i, d) in refinement_inputs(seed)?.iter().enumerate() {
        let target = bound_at_alpha(Method::InvEChainSup, &EntropyInput::from_dist(d), 0.5)?
            .value
            .expect("small entropy");
        let mut seq = refine_sequence(d, 0.5, 0)?;
        let mut prev = seq.induced_bound();
        let mut ok = true;
        for _ in 0..depth {
            seq.step();
            let b = seq.induced_bound();
            if b < prev - ORDER_REL_TOL * prev.abs() {
                ok = false;
            }
            prev = b;
        }
        let gap = (target - prev).abs();
        worst_gap = worst_gap.max(gap);
        if (!ok || gap > tol) && first_bad.is_none() {
            first_bad = Some(i as f64);
        }
    }
    Ok(ClaimResult::new(
        "refine.convergence",
        first_bad.is_none(),
        first_bad,
        Some(worst_gap),
        format!("alpha = 1/2, k = {depth}; induced bounds non-decreasing and within {tol} of the chain bound"),
    ))
}

/// Truncated geometric distribution of ratio 1/2 with 60 terms.
pub fn truncated_geometric() -> Result<ProbDist<f64>> {
    let w: Vec<f64> = (0..60).map(|i| 0.5f64.powi(i + 1)).collect();
    make_dist(&w)
}

pub fn check_massey_tightness() -> Result<ClaimResult> {
    let d = truncated_geometric()?;
    let ge = guessing_entropy_exact(&d);
    let h = shannon_entropy(&d);
    let massey = (h - 2.0).exp2() + 1.0;
    let err = (massey - ge).abs().max((h - 2.0).abs());
    Ok(ClaimResult::new(
        "massey.tight_at_geometric",
        err < 1e-6,
        None,
        Some(err),
        format!("H = {h}, GE = {ge}, massey = {massey}"),
    ))
}

/// Validity, chain orderings and extremal consistency over a corpus.
pub fn check_corpus(corpus: &[CorpusEntry]) -> Vec<ClaimResult> {
    struct Outcome {
        validity: f64,
        chain: f64,
        extremal: f64,
    }
    let outcomes: Vec<Outcome> = corpus
        .par_iter()
        .map(|e| {
            let ge = guessing_entropy_exact(&e.dist);
            let h = shannon_entropy(&e.dist);
            let res = evaluate_all(&EntropyInput::from_dist(&e.dist));
            Outcome {
                validity: validity_slack(&res, ge),
                chain: chain_slack(&res),
                extremal: extremal_slack(h, ge),
            }
        })
        .collect();

    let claim = |id: &str, detail: &str, f: &dyn Fn(&Outcome) -> f64| {
        let (idx, worst) = outcomes.iter().enumerate().map(|(i, o)| (i, f(o))).fold(
            (None, f64::INFINITY),
            |a, (i, v)| if v < a.1 { (Some(i), v) } else { a },
        );
        let ok = worst >= 0.0;
        ClaimResult::new(
            id,
            ok,
            if ok { None } else { idx.map(|i| i as f64) },
            Some(worst),
            format!("{detail}; {} distributions", corpus.len()),
        )
    };
    vec![
        claim(
            "corpus.validity",
            "applicable bound <= exact GE + 1e-9",
            &|o| o.validity,
        ),
        claim(
            "corpus.chains",
            "chain orderings where all members apply",
            &|o| o.chain,
        ),
        claim(
            "corpus.extremal",
            "H <= extremal entropy of GE + 1e-9",
            &|o| o.extremal,
        ),
    ]
}

fn value(res: &[BoundResult<f64>], m: Method) -> Option<&BoundResult<f64>> {
    res.iter().find(|r| r.method == m)
}

/// Smallest `ge + tol - bound` over applicable bounds.
pub fn validity_slack(res: &[BoundResult<f64>], ge: f64) -> f64 {
    res.iter()
        .filter(|r| r.applicable)
        .map(|r| {
            let v = r.value.unwrap_or_else(|| r.value_log2_bits.exp2());
            ge + VALIDITY_TOL - v
        })
        .fold(f64::INFINITY, f64::min)
}

/// Bound chains, strongest first.
pub const CHAINS: [&[Method]; 2] = [
    &[
        Method::MasseySplitSup,
        Method::MasseyPn,
        Method::MasseyPnHalf,
        Method::Massey,
    ],
    &[
        Method::InvEChainSup,
        Method::InvESplitSup,
        Method::InvEHalf,
        Method::InvE,
    ],
];

/// Smallest relative slack of consecutive chain members; chains with an
/// inapplicable or missing member are skipped.
pub fn chain_slack(res: &[BoundResult<f64>]) -> f64 {
    let mut worst = f64::INFINITY;
    for chain in CHAINS {
        let members: Option<Vec<&BoundResult<f64>>> =
            chain.iter().map(|&m| value(res, m)).collect();
        let Some(members) = members else { continue };
        if !members.iter().all(|r| r.applicable) {
            continue;
        }
        for w in members.windows(2) {
            let (hi, lo) = (w[0].value_log2_bits, w[1].value_log2_bits);
            let scale = hi.abs().max(lo.abs()).max(1.0);
            worst = worst.min(hi - lo + ORDER_REL_TOL * scale);
        }
    }
    worst
}

/// `H_max(GE) + tol - H`; a guessing entropy of one forces `H = 0`.
pub fn extremal_slack(h: f64, ge: f64) -> f64 {
    let cap = if ge > 1.0 {
        max_entropy_given_ge(ge).unwrap_or(0.0)
    } else {
        0.0
    };
    cap + VALIDITY_TOL - h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_battery_outcomes() {
        let grid = log_grid(1.001, 1e6, 10_000).unwrap();
        let claims = check_falsify_battery(&grid).unwrap();
        assert_eq!(claims[0].status, ClaimStatus::Pass);
        for c in &claims[1..] {
            assert_eq!(c.status, ClaimStatus::FalsifiedAsExpected, "{}", c.id);
            assert!(c.witness.is_some() && c.margin.unwrap() > 0.0);
        }
    }

    #[test]
    fn injected_expectation_mismatch_fails() {
        let grid = log_grid(1.001, 1e6, 1000).unwrap();
        let inj = InjectedCoefficients {
            coeffs: MasseyLikeCoefficients::new((-1.0f64).exp(), 2.0, 0.6).unwrap(),
            expect_witness: false,
        };
        assert_eq!(check_injected("x", &inj, &grid).status, ClaimStatus::Fail);
    }

    #[test]
    fn small_run_passes() {
        let cfg = VerifyConfig {
            corpus_size: 60,
            grid_points: 2000,
            ..VerifyConfig::default()
        };
        let rep = run_verification(&cfg).unwrap();
        for c in &rep.claims {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn massey_tightness() {
        let c = check_massey_tightness().unwrap();
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn chain_slack_detects_inversion() {
        let d = ProbDist::<f64>::uniform(8).unwrap();
        let mut res = evaluate_all(&EntropyInput::from_dist(&d));
        assert!(chain_slack(&res) >= 0.0);
        let r = res.iter_mut().find(|r| r.method == Method::InvE).unwrap();
        r.value_log2_bits += 1.0;
        assert!(chain_slack(&res) < 0.0);
    }
}
