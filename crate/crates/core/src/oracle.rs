//! Independent verifiers for the analytical claims behind the bounds.
//!
//! * [`split_once`] / [`refine_sequence`]: the constructive split of the
//!   least likely outcome, whose entropy and guessing-entropy increments are
//!   known in closed form. Applying the `2^H / e + 1/2` bound to each refined
//!   distribution yields a sequence of bounds increasing towards the chain
//!   bound.
//! * [`f_gap`] / [`finite_diff_check`]: the gap between the optimal bound and
//!   the geometric extremal entropy, with its first two derivatives.
//! * [`falsify_coefficients`]: grid search for a guessing entropy `μ` at which
//!   a candidate `a·b^H + c` bound exceeds what the extremal entropy allows.
//! * [`random_dist`]: reproducible random distributions for test corpora.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::bounds::MasseyLikeCoefficients;
use crate::dist::{
    binary_entropy_unchecked, guessing_entropy_exact, make_dist, shannon_entropy, ProbDist,
};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha <= lit(0.5) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha.to_f64().unwrap_or(f64::NAN),
            domain: "(0, 1/2]",
        })
    }
}

/// Replaces the last probability `p_n` by `((1-α)p_n, α p_n)`.
///
/// The result stays positive and non-increasing exactly when `α ∈ (0, 1/2]`.
pub fn split_once<T: Real>(d: &ProbDist<T>, alpha: T) -> Result<ProbDist<T>> {
    check_alpha(alpha)?;
    Ok(split_last(d.probs().to_vec(), alpha))
}

fn split_last<T: Real>(mut probs: Vec<T>, alpha: T) -> ProbDist<T> {
    let last = probs.pop().expect("non-empty distribution");
    let small = alpha * last;
    probs.push(last - small);
    probs.push(small);
    ProbDist::from_sorted_unchecked(probs)
}

/// `Q_k`: the base distribution with its tail split `k` times.
#[derive(Debug, Clone)]
pub struct RefinementSequence<T> {
    base: ProbDist<T>,
    alpha: T,
    depth: usize,
    current: ProbDist<T>,
}

/// Applies [`split_once`] `k` times to the trailing entry.
pub fn refine_sequence<T: Real>(
    d: &ProbDist<T>,
    alpha: T,
    k: usize,
) -> Result<RefinementSequence<T>> {
    check_alpha(alpha)?;
    let mut seq = RefinementSequence {
        base: d.clone(),
        alpha,
        depth: 0,
        current: d.clone(),
    };
    for _ in 0..k {
        seq.step();
    }
    Ok(seq)
}

impl<T: Real> RefinementSequence<T> {
    /// Advances from `Q_k` to `Q_{k+1}`.
    pub fn step(&mut self) {
        let probs = std::mem::replace(
            &mut self.current,
            ProbDist::from_sorted_unchecked(vec![T::one()]),
        );
        self.current = split_last(probs.into_vec(), self.alpha);
        self.depth += 1;
    }

    pub fn base(&self) -> &ProbDist<T> {
        &self.base
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn current(&self) -> &ProbDist<T> {
        &self.current
    }

    /// `(1 - α^k) / (1 - α)`.
    fn geometric_factor(&self) -> T {
        let k = i32::try_from(self.depth).unwrap_or(i32::MAX);
        (T::one() - self.alpha.powi(k)) / (T::one() - self.alpha)
    }

    /// Closed-form entropy of `Q_k`: `H(p) + p_n h(α) (1-α^k)/(1-α)`.
    pub fn expected_entropy(&self) -> T {
        let pn = self.base.min_prob();
        shannon_entropy(&self.base)
            + pn * binary_entropy_unchecked(self.alpha) * self.geometric_factor()
    }

    /// Closed-form guessing entropy of `Q_k`: `G(p) + p_n α (1-α^k)/(1-α)`.
    pub fn expected_guessing_entropy(&self) -> T {
        let pn = self.base.min_prob();
        guessing_entropy_exact(&self.base) + pn * self.alpha * self.geometric_factor()
    }

    /// Bound on `G(p)` from the `2^H / e + 1/2` bound applied to `Q_k`,
    /// recomputed from the materialized `Q_k`:
    /// `2^{H(Q_k)}/e + 1/2 - (G(Q_k) - G(p))`.
    pub fn induced_bound(&self) -> T {
        let shift = guessing_entropy_exact(&self.current) - guessing_entropy_exact(&self.base);
        shannon_entropy(&self.current).exp2() / T::E() + lit(0.5) - shift
    }

    /// Same bound from the closed forms, without touching `Q_k`.
    pub fn induced_bound_closed_form(&self) -> T {
        let pn = self.base.min_prob();
        let factor = self.geometric_factor();
        let exponent =
            shannon_entropy(&self.base) + pn * binary_entropy_unchecked(self.alpha) * factor;
        exponent.exp2() / T::E() + lit(0.5) - pn * self.alpha * factor
    }
}

/// Gap `f(μ)` (nats) between the optimal bound and the extremal entropy,
/// with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalGap<T> {
    pub mu: T,
    pub f_value: T,
    pub f_prime: T,
    pub f_second: T,
}

/// Below this `1/μ` the gap and its derivative are summed as power series.
const SERIES_SWITCH: f64 = 0.01;
const SERIES_TERMS: i32 = 40;

/// `f(μ) = ln(μ-1/2) + 1 - ln(μ-1) + μ ln(1-1/μ)`.
pub fn gap_value<T: Real>(mu: T) -> T {
    let x = mu.recip();
    if x < lit(SERIES_SWITCH) {
        // Σ_{k≥2} x^k [(1 - 2^{-k})/k - 1/(k+1)], every term positive
        let mut sum = T::zero();
        for k in (2..=SERIES_TERMS).rev() {
            let kf: T = lit(f64::from(k));
            let coef = (T::one() - lit::<T>(2.0).powi(-k)) / kf - (kf + T::one()).recip();
            sum = sum + coef * x.powi(k);
        }
        sum
    } else {
        (lit::<T>(0.5) / (mu - T::one())).ln_1p() + one_plus_mu_log(mu)
    }
}

/// `f'(μ) = 1/(μ-1/2) + ln(1-1/μ)`.
pub fn gap_derivative<T: Real>(mu: T) -> T {
    let x = mu.recip();
    if x < lit(SERIES_SWITCH) {
        // Σ_{k≥3} x^k (2^{1-k} - 1/k), every term negative
        let mut sum = T::zero();
        for k in (3..=SERIES_TERMS).rev() {
            let kf: T = lit(f64::from(k));
            let coef = lit::<T>(2.0).powi(1 - k) - kf.recip();
            sum = sum + coef * x.powi(k);
        }
        sum
    } else {
        (mu - lit(0.5)).recip() + ln_one_minus_inv(mu)
    }
}

/// `ln(1 - 1/μ)` for `μ > 1`.
fn ln_one_minus_inv<T: Real>(mu: T) -> T {
    if mu < lit(2.0) {
        (mu - T::one()).ln() - mu.ln()
    } else {
        (-mu.recip()).ln_1p()
    }
}

/// `f''(μ) = 1/(4μ(μ-1)(μ-1/2)²)`.
pub fn gap_second_derivative<T: Real>(mu: T) -> T {
    let h = mu - lit(0.5);
    (lit::<T>(4.0) * mu * (mu - T::one()) * h * h).recip()
}

/// `f''` in its unsimplified form `1/(μ(μ-1)) - 1/(μ-1/2)²`, with the
/// cancelling numerator `(μ-1/2)² - μ(μ-1)` evaluated by exact products.
pub fn gap_second_derivative_expanded<T: Real>(mu: T) -> T {
    let u = mu - lit(0.5);
    let v = mu - T::one();
    let p = u * u;
    let p_err = u.mul_add(u, -p);
    let q = mu * v;
    let q_err = mu.mul_add(v, -q);
    let numerator = (p - q) + (p_err - q_err);
    numerator / (q * p)
}

pub fn f_gap<T: Real>(mu: T) -> Result<ExtremalGap<T>> {
    if !(mu > T::one()) || !mu.is_finite() {
        return Err(Error::Domain {
            name: "mu",
            value: mu.to_f64().unwrap_or(f64::NAN),
            domain: "(1, inf)",
        });
    }
    Ok(ExtremalGap {
        mu,
        f_value: gap_value(mu),
        f_prime: gap_derivative(mu),
        f_second: gap_second_derivative(mu),
    })
}

/// Central-difference residuals for `f'` and `f''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffReport<T> {
    pub mu: T,
    pub step: T,
    /// `(f(μ+h) - f(μ-h)) / 2h`.
    pub first_difference: T,
    /// `(f'(μ+h) - f'(μ-h)) / 2h`.
    pub second_difference: T,
    pub first_residual: T,
    pub second_residual: T,
}

pub fn finite_diff_check<T: Real>(mu: T, step: T) -> Result<FiniteDiffReport<T>> {
    if !(step > T::zero()) || !(mu - step > T::one()) || !mu.is_finite() {
        return Err(Error::Domain {
            name: "h_step",
            value: step.to_f64().unwrap_or(f64::NAN),
            domain: "(0, mu - 1)",
        });
    }
    let gap = f_gap(mu)?;
    let two_h = step + step;
    let first_difference = (gap_value(mu + step) - gap_value(mu - step)) / two_h;
    let second_difference = (gap_derivative(mu + step) - gap_derivative(mu - step)) / two_h;
    Ok(FiniteDiffReport {
        mu,
        step,
        first_difference,
        second_difference,
        first_residual: (first_difference - gap.f_prime).abs(),
        second_residual: (second_difference - gap.f_second).abs(),
    })
}

/// Outcome of a grid search for a violation of a candidate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport<T> {
    pub coeffs: MasseyLikeCoefficients<T>,
    /// Smallest grid `μ` at which the candidate fails.
    pub mu_witness: Option<T>,
    /// Violation in nats at the witness; without a witness, the largest
    /// (non-positive) value of the violation over the grid.
    pub margin: T,
    pub grid_points: usize,
}

impl<T: Real> CounterexampleReport<T> {
    pub fn falsified(&self) -> bool {
        self.mu_witness.is_some()
    }
}

/// `1 + μ ln(1 - 1/μ)`, accurate for large `μ`.
fn one_plus_mu_log<T: Real>(mu: T) -> T {
    let x = mu.recip();
    if x < lit(SERIES_SWITCH) {
        // -Σ_{k≥1} x^k/(k+1)
        let mut sum = T::zero();
        for k in (1..=SERIES_TERMS).rev() {
            sum = sum + x.powi(k) / lit(f64::from(k + 1));
        }
        -sum
    } else {
        T::one() + mu * ln_one_minus_inv(mu)
    }
}

/// Slack (nats) of `log_b((μ-c)/a) ≥ log2(μ-1) - μ log2(1-1/μ)`, i.e. the
/// candidate's entropy ceiling minus the extremal entropy, both in nats.
/// Negative slack means the candidate bound fails at `μ`.
pub fn coefficient_slack<T: Real>(coeffs: &MasseyLikeCoefficients<T>, mu: T) -> T {
    let (a, b, c) = (coeffs.a(), coeffs.b(), coeffs.c());
    if mu <= c {
        return T::neg_infinity();
    }
    let ln_bound = (mu - c).ln() - a.ln();
    // base-2 part, arranged so the O(1/μ) terms cancel analytically
    let base2 =
        ((T::one() - c) / (mu - T::one())).ln_1p() - (a * T::E()).ln() + one_plus_mu_log(mu);
    let kappa = T::LN_2() / b.ln();
    (kappa - T::one()) * ln_bound + base2
}

/// Scans `mu_grid` (ascending) for the first `μ` where the candidate bound
/// `a·b^H + c` would exceed the guessing entropy of the extremal geometric
/// distribution.
pub fn falsify_coefficients<T: Real>(
    coeffs: &MasseyLikeCoefficients<T>,
    mu_grid: &[T],
) -> CounterexampleReport<T> {
    let mut worst = T::neg_infinity();
    for &mu in mu_grid {
        let violation = -coefficient_slack(coeffs, mu);
        if violation > T::zero() {
            return CounterexampleReport {
                coeffs: *coeffs,
                mu_witness: Some(mu),
                margin: violation,
                grid_points: mu_grid.len(),
            };
        }
        worst = worst.max(violation);
    }
    CounterexampleReport {
        coeffs: *coeffs,
        mu_witness: None,
        margin: worst,
        grid_points: mu_grid.len(),
    }
}

/// `n ≥ 2` log-spaced points on `[lo, hi]` with `1 < lo < hi`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if !(lo > T::one()) || !lo.is_finite() {
        return Err(Error::Domain {
            name: "mu_min",
            value: lo.to_f64().unwrap_or(f64::NAN),
            domain: "(1, inf)",
        });
    }
    if !(hi > lo) || !hi.is_finite() {
        return Err(Error::Domain {
            name: "mu_max",
            value: hi.to_f64().unwrap_or(f64::NAN),
            domain: "(mu_min, inf)",
        });
    }
    if n < 2 {
        return Err(Error::Domain {
            name: "points",
            value: n as f64,
            domain: "[2, inf)",
        });
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let last = from_usize::<T>(n - 1);
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (l0 + (l1 - l0) * from_usize::<T>(i) / last).exp(),
        })
        .collect())
}

/// Shapes of random distributions for test corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sampler {
    /// Flat Dirichlet: normalized i.i.d. exponentials.
    Flat,
    /// Geometric decay with a random ratio and mild multiplicative jitter.
    Geometric,
    /// One dominant mass in `[0.5, 0.99)`, the rest flat Dirichlet.
    Spiky,
}

impl Sampler {
    pub const ALL: [Sampler; 3] = [Sampler::Flat, Sampler::Geometric, Sampler::Spiky];

    pub fn id(self) -> &'static str {
        match self {
            Sampler::Flat => "flat",
            Sampler::Geometric => "geometric",
            Sampler::Spiky => "spiky",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Sampler::Flat => 1,
            Sampler::Geometric => 2,
            Sampler::Spiky => 3,
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sampler::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownSampler(s.to_string()))
    }
}

/// Deterministic random distribution of (nominal) size `n`, keyed by
/// `(sampler, n, seed)`. ChaCha streams keep different keys independent.
pub fn random_dist<T: Real>(sampler: Sampler, n: usize, seed: u64) -> Result<ProbDist<T>> {
    if n == 0 {
        return Err(Error::NoPositiveMass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((sampler.stream() << 48) ^ n as u64);
    let weights: Vec<f64> = match sampler {
        Sampler::Flat => (0..n).map(|_| Exp1.sample(&mut rng)).collect(),
        Sampler::Geometric => {
            // keep r^n well above the underflow threshold
            let lo = f64::max(0.2, (-600.0 / n as f64).exp());
            let u: f64 = Open01.sample(&mut rng);
            let ratio = lo + (0.999 - lo) * u;
            (0..n)
                .map(|i| {
                    let jitter: f64 = Open01.sample(&mut rng);
                    ratio.powi(i as i32) * (0.9 + 0.2 * jitter)
                })
                .collect()
        }
        Sampler::Spiky => {
            let u: f64 = Open01.sample(&mut rng);
            let spike = 0.5 + 0.49 * u;
            let rest: Vec<f64> = (1..n).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = rest.iter().sum();
            std::iter::once(spike)
                .chain(rest.into_iter().map(|w| (1.0 - spike) * w / total))
                .collect()
        }
    };
    let values: Vec<T> = weights.into_iter().map(lit).collect();
    make_dist(&values)
}

/// One corpus entry.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub sampler: Sampler,
    pub size: usize,
    pub seed: u64,
    pub dist: ProbDist<f64>,
}

/// `count` random distributions cycling through the samplers, with sizes
/// drawn log-uniformly from `[min_size, max_size]`.
pub fn random_corpus(
    count: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (
        (min_size.max(1) as f64).ln(),
        (max_size.max(min_size) as f64).ln(),
    );
    (0..count)
        .map(|i| {
            let sampler = Sampler::ALL[i % Sampler::ALL.len()];
            let u: f64 = Open01.sample(&mut rng);
            let size = ((l0 + (l1 - l0) * u).exp().round() as usize).clamp(min_size, max_size);
            let entry_seed = seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(i as u64);
            Ok(CorpusEntry {
                sampler,
                size,
                seed: entry_seed,
                dist: random_dist(sampler, size, entry_seed)?,
            })
        })
        .collect()
}
