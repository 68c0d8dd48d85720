//! Lower bounds on guessing entropy of the form `a·b^H + c`.
//!
//! Every bound is reported both as a plain value and as `log2` of that
//! value. The `log2` form never materializes `b^H`, so it stays finite for
//! entropies of thousands of bits (full-key combinations of many bytes).
//!
//! Two families are covered:
//!
//! * Massey family: `2^{H-2} + 1` and its refinements through the minimum
//!   probability `p_n`. Valid when `H ≥ 2` bits.
//! * `1/e` family: `2^H / e`, the improved `2^H / e + 1/2`, and its
//!   refinements through `p_n` obtained by splitting the last outcome once
//!   (`split`) or recursively (`chain`).
//!
//! The refinements are suprema over a split parameter `α ∈ [0, 1/2]`,
//! computed with [`optimize_alpha`].

use std::fmt;
use std::str::FromStr;

use crate::dist::{binary_entropy_unchecked, ProbDist, ProductDistStats};
use crate::error::{Error, Result};
use crate::optimize::optimize_alpha;
use crate::scalar::{lit, Real};

/// Every bound the library knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// `2^{H-2} + 1`.
    Massey,
    /// `2^{H+2p_n-2} + 1 - p_n`.
    MasseyPn,
    /// `2^{H+p_n-2} + 1 - p_n/2`.
    MasseyPnHalf,
    /// `sup_α 2^{H + p_n h(α)/(1-α) - 2} + 1 - p_n α/(1-α)`.
    MasseySplitSup,
    /// `2^H / e`.
    InvE,
    /// `2^H / e + 1/2`, the asymptotically optimal coefficients.
    InvEHalf,
    /// `sup_α 2^{H + p_n h(α)} / e - α p_n + 1/2`.
    InvESplitSup,
    /// `sup_α 2^{H + p_n h(α)/(1-α)} / e + 1/2 - p_n α/(1-α)`.
    InvEChainSup,
    /// `2^{H + p_n/2} / e + 1/2 - p_n`, a weaker closed-form member of the
    /// chain family. Reported on request only.
    InvEChainHalf,
}

impl Method {
    /// Methods emitted by [`evaluate_all`], in output order.
    pub const STANDARD: [Method; 8] = [
        Method::Massey,
        Method::MasseyPn,
        Method::MasseyPnHalf,
        Method::MasseySplitSup,
        Method::InvE,
        Method::InvEHalf,
        Method::InvESplitSup,
        Method::InvEChainSup,
    ];

    pub const ALL: [Method; 9] = [
        Method::Massey,
        Method::MasseyPn,
        Method::MasseyPnHalf,
        Method::MasseySplitSup,
        Method::InvE,
        Method::InvEHalf,
        Method::InvESplitSup,
        Method::InvEChainSup,
        Method::InvEChainHalf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Massey => "massey",
            Method::MasseyPn => "massey_pn",
            Method::MasseyPnHalf => "massey_pn_half",
            Method::MasseySplitSup => "massey_split_sup",
            Method::InvE => "inv_e",
            Method::InvEHalf => "inv_e_half",
            Method::InvESplitSup => "inv_e_split_sup",
            Method::InvEChainSup => "inv_e_chain_sup",
            Method::InvEChainHalf => "inv_e_chain_half",
        }
    }

    /// Whether the bound is a supremum over `α`.
    pub fn is_sup(self) -> bool {
        matches!(
            self,
            Method::MasseySplitSup | Method::InvESplitSup | Method::InvEChainSup
        )
    }

    pub fn needs_min_prob(self) -> bool {
        !matches!(self, Method::Massey | Method::InvE | Method::InvEHalf)
    }

    /// Minimum entropy (bits) at which the bound is known to hold.
    pub fn entropy_threshold(self) -> f64 {
        match self {
            Method::Massey | Method::MasseyPn | Method::MasseyPnHalf | Method::MasseySplitSup => {
                2.0
            }
            Method::InvESplitSup | Method::InvEChainSup | Method::InvEChainHalf => 1.0,
            Method::InvE | Method::InvEHalf => 0.0,
        }
    }

    pub fn condition_note(self) -> &'static str {
        match self.entropy_threshold() {
            t if t >= 2.0 => "H >= 2 bits",
            t if t >= 1.0 => "H >= 1 bit",
            _ => "any H >= 0",
        }
    }

    pub fn is_massey_family(self) -> bool {
        self.entropy_threshold() >= 2.0
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| format!("unknown bound method `{s}`"))
    }
}

/// Coefficients of a candidate bound `E[G] ≥ a·b^H + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasseyLikeCoefficients<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Real> MasseyLikeCoefficients<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Domain {
                name: "a",
                value: a.to_f64().unwrap_or(f64::NAN),
                domain: "(0, inf)",
            });
        }
        if !(b > T::one()) || !b.is_finite() {
            return Err(Error::Domain {
                name: "b",
                value: b.to_f64().unwrap_or(f64::NAN),
                domain: "(1, inf)",
            });
        }
        if !c.is_finite() {
            return Err(Error::Domain {
                name: "c",
                value: c.to_f64().unwrap_or(f64::NAN),
                domain: "finite",
            });
        }
        Ok(Self { a, b, c })
    }

    /// `(1/e, 2, 1/2)`.
    pub fn optimal() -> Self {
        Self {
            a: T::E().recip(),
            b: lit(2.0),
            c: lit(0.5),
        }
    }

    fn base2(a: T, c: T) -> Self {
        debug_assert!(a > T::zero());
        Self { a, b: lit(2.0), c }
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// `a·b^H + c`; infinite when `b^H` overflows.
    pub fn linear(&self, entropy_bits: T) -> T {
        let two: T = lit(2.0);
        let power = if self.b == two {
            entropy_bits.exp2()
        } else {
            self.b.powf(entropy_bits)
        };
        self.a * power + self.c
    }

    pub fn log2(&self, entropy_bits: T) -> T {
        bound_log2(self, entropy_bits)
    }
}

/// `log2(a·b^H + c)` evaluated as
/// `log2 a + H log2 b + log2(1 + (c/a) b^{-H})` without forming `b^H`.
///
/// Returns `-inf` when the bound is not positive, i.e. not meaningful.
pub fn bound_log2<T: Real>(coeffs: &MasseyLikeCoefficients<T>, entropy_bits: T) -> T {
    let lb = coeffs.b.log2();
    let main = coeffs.a.log2() + entropy_bits * lb;
    if coeffs.c == T::zero() {
        return main;
    }
    let ratio = coeffs.c / coeffs.a;
    let magnitude = (ratio.abs().log2() - entropy_bits * lb).exp2();
    let t = if ratio < T::zero() {
        -magnitude
    } else {
        magnitude
    };
    if t <= -T::one() {
        return T::neg_infinity();
    }
    main + t.ln_1p() * T::LOG2_E()
}

/// Entropy and (optionally) minimum probability consumed by the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyInput<T> {
    entropy_bits: T,
    min_prob: Option<T>,
    log2_min_prob: Option<T>,
}

impl<T: Real> EntropyInput<T> {
    pub fn new(entropy_bits: T, min_prob: Option<T>, log2_min_prob: Option<T>) -> Result<Self> {
        if !(entropy_bits >= T::zero()) || !entropy_bits.is_finite() {
            return Err(Error::Domain {
                name: "entropy_bits",
                value: entropy_bits.to_f64().unwrap_or(f64::NAN),
                domain: "[0, inf)",
            });
        }
        if let Some(p) = min_prob {
            if !(p > T::zero() && p <= T::one()) {
                return Err(Error::Domain {
                    name: "min_prob",
                    value: p.to_f64().unwrap_or(f64::NAN),
                    domain: "(0, 1]",
                });
            }
        }
        if let Some(l) = log2_min_prob {
            if !(l <= T::zero()) || l.is_nan() {
                return Err(Error::Domain {
                    name: "log2_min_prob",
                    value: l.to_f64().unwrap_or(f64::NAN),
                    domain: "(-inf, 0]",
                });
            }
        }
        if let (Some(p), Some(l)) = (min_prob, log2_min_prob) {
            let tol: T = lit(1e-12);
            if (p.log2() - l).abs() > tol * T::one().max(l.abs()) {
                return Err(Error::InconsistentMinProb {
                    min_prob: p.to_f64().unwrap_or(f64::NAN),
                    log2_min_prob: l.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self {
            entropy_bits,
            min_prob,
            log2_min_prob,
        })
    }

    /// Input without any minimum-probability information.
    pub fn entropy_only(entropy_bits: T) -> Result<Self> {
        Self::new(entropy_bits, None, None)
    }

    pub fn from_dist(d: &ProbDist<T>) -> Self {
        let p = d.min_prob();
        Self {
            entropy_bits: d.entropy(),
            min_prob: Some(p),
            log2_min_prob: Some(p.log2()),
        }
    }

    /// From product statistics. The linear minimum probability is kept only
    /// when it does not underflow.
    pub fn from_stats(s: &ProductDistStats<T>) -> Self {
        let p = s.log2_min_prob.exp2();
        Self {
            entropy_bits: s.entropy_bits.max(T::zero()),
            min_prob: (p > T::zero() && p.is_normal()).then_some(p),
            log2_min_prob: Some(s.log2_min_prob),
        }
    }

    pub fn entropy_bits(&self) -> T {
        self.entropy_bits
    }

    pub fn min_prob(&self) -> Option<T> {
        self.min_prob
    }

    pub fn log2_min_prob(&self) -> Option<T> {
        self.log2_min_prob
            .or_else(|| self.min_prob.map(|p| p.log2()))
    }

    /// `p_n` for the formulas. May be `0` when only an underflowing
    /// `log2_min_prob` is known, which is the `p_n → 0` limit.
    pub fn pn(&self) -> Option<T> {
        self.min_prob
            .or_else(|| self.log2_min_prob.map(|l| l.exp2()))
    }
}

/// One bound evaluated on one input.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult<T> {
    pub method: Method,
    /// Linear value; absent when it overflows.
    pub value: Option<T>,
    pub value_log2_bits: T,
    pub applicable: bool,
    pub condition_note: &'static str,
    /// Maximizing split parameter, for supremum bounds only.
    pub alpha_star: Option<T>,
}

/// `(h(α), h(α)/(1-α), α/(1-α))`.
fn split_terms<T: Real>(alpha: T) -> (T, T, T) {
    let h = binary_entropy_unchecked(alpha);
    let one_minus = T::one() - alpha;
    (h, h / one_minus, alpha / one_minus)
}

/// Coefficients `(a, c)` (base 2) of `method` at minimum probability `pn`
/// and split parameter `alpha` (ignored by the closed-form bounds).
pub fn method_coefficients<T: Real>(method: Method, pn: T, alpha: T) -> MasseyLikeCoefficients<T> {
    let one = T::one();
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    let quarter: T = lit(0.25);
    let inv_e = T::E().recip();
    let (a, c) = match method {
        Method::Massey => (quarter, one),
        Method::MasseyPn => ((two * pn - two).exp2(), one - pn),
        Method::MasseyPnHalf => ((pn - two).exp2(), one - half * pn),
        Method::MasseySplitSup => {
            let (_, g, r) = split_terms(alpha);
            ((g * pn - two).exp2(), one - r * pn)
        }
        Method::InvE => (inv_e, T::zero()),
        Method::InvEHalf => (inv_e, half),
        Method::InvESplitSup => {
            let (h, _, _) = split_terms(alpha);
            (inv_e * (pn * h).exp2(), half - alpha * pn)
        }
        Method::InvEChainSup => {
            let (_, g, r) = split_terms(alpha);
            (inv_e * (g * pn).exp2(), half - r * pn)
        }
        Method::InvEChainHalf => (inv_e * (half * pn).exp2(), half - pn),
    };
    MasseyLikeCoefficients::base2(a, c)
}

fn require_pn<T: Real>(method: Method, input: &EntropyInput<T>) -> Result<T> {
    if !method.needs_min_prob() {
        return Ok(T::zero());
    }
    input.pn().ok_or(Error::MissingMinProb(method.id()))
}

fn result_from<T: Real>(
    method: Method,
    input: &EntropyInput<T>,
    coeffs: &MasseyLikeCoefficients<T>,
    alpha_star: Option<T>,
) -> BoundResult<T> {
    let h = input.entropy_bits;
    let linear = coeffs.linear(h);
    BoundResult {
        method,
        value: linear.is_finite().then_some(linear),
        value_log2_bits: bound_log2(coeffs, h),
        applicable: h >= lit(method.entropy_threshold()),
        condition_note: method.condition_note(),
        alpha_star,
    }
}

/// Evaluates `method` at a fixed split parameter. For closed-form methods
/// `alpha` is ignored and no `alpha_star` is recorded.
pub fn bound_at_alpha<T: Real>(
    method: Method,
    input: &EntropyInput<T>,
    alpha: T,
) -> Result<BoundResult<T>> {
    if method.is_sup() && !(alpha >= T::zero() && alpha <= lit(0.5)) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha.to_f64().unwrap_or(f64::NAN),
            domain: "[0, 1/2]",
        });
    }
    let pn = require_pn(method, input)?;
    let coeffs = method_coefficients(method, pn, alpha);
    Ok(result_from(
        method,
        input,
        &coeffs,
        method.is_sup().then_some(alpha),
    ))
}

/// Evaluates `method`, maximizing over `α` for the supremum bounds.
pub fn evaluate<T: Real>(method: Method, input: &EntropyInput<T>) -> Result<BoundResult<T>> {
    if !method.is_sup() {
        return bound_at_alpha(method, input, T::zero());
    }
    let pn = require_pn(method, input)?;
    let h = input.entropy_bits;
    // the linear objective is preferred; fall back to log2 once 2^H overflows
    let linear_ok = h + lit(2.0) <= lit(T::MAX_LINEAR_BITS);
    let opt = if linear_ok {
        optimize_alpha(|a| method_coefficients(method, pn, a).linear(h))?
    } else {
        optimize_alpha(|a| bound_log2(&method_coefficients(method, pn, a), h))?
    };
    bound_at_alpha(method, input, opt.alpha)
}

pub fn massey_bound<T: Real>(input: &EntropyInput<T>) -> BoundResult<T> {
    evaluate(Method::Massey, input).expect("closed form needs no min prob")
}

/// The two `p_n`-refined Massey bounds, strongest first.
pub fn massey_pn_bounds<T: Real>(
    input: &EntropyInput<T>,
) -> Result<(BoundResult<T>, BoundResult<T>)> {
    Ok((
        evaluate(Method::MasseyPn, input)?,
        evaluate(Method::MasseyPnHalf, input)?,
    ))
}

pub fn massey_split_sup_bound<T: Real>(input: &EntropyInput<T>) -> Result<BoundResult<T>> {
    evaluate(Method::MasseySplitSup, input)
}

pub fn inv_e_bound<T: Real>(input: &EntropyInput<T>) -> BoundResult<T> {
    evaluate(Method::InvE, input).expect("closed form needs no min prob")
}

pub fn inv_e_half_bound<T: Real>(input: &EntropyInput<T>) -> BoundResult<T> {
    evaluate(Method::InvEHalf, input).expect("closed form needs no min prob")
}

pub fn inv_e_split_sup_bound<T: Real>(input: &EntropyInput<T>) -> Result<BoundResult<T>> {
    evaluate(Method::InvESplitSup, input)
}

pub fn inv_e_chain_sup_bound<T: Real>(input: &EntropyInput<T>) -> Result<BoundResult<T>> {
    evaluate(Method::InvEChainSup, input)
}

pub fn inv_e_chain_half_bound<T: Real>(input: &EntropyInput<T>) -> Result<BoundResult<T>> {
    evaluate(Method::InvEChainHalf, input)
}

/// Runs every standard bound. Bounds that need `p_n` are skipped when the
/// input carries no minimum probability.
pub fn evaluate_all<T: Real>(input: &EntropyInput<T>) -> Vec<BoundResult<T>> {
    evaluate_methods(input, &Method::STANDARD)
}

/// Runs the given methods, skipping those whose inputs are missing.
pub fn evaluate_methods<T: Real>(
    input: &EntropyInput<T>,
    methods: &[Method],
) -> Vec<BoundResult<T>> {
    methods
        .iter()
        .filter(|m| !m.needs_min_prob() || input.pn().is_some())
        .map(|&m| evaluate(m, input).expect("validated input yields finite objectives"))
        .collect()
}

/// Largest Shannon entropy (bits) of any distribution with guessing entropy
/// `mu`, attained in the limit by the geometric distribution of mean `mu`:
/// `log2(μ-1) - μ log2(1 - 1/μ)`.
pub fn max_entropy_given_ge<T: Real>(mu: T) -> Result<T> {
    if !(mu > T::one()) || !mu.is_finite() {
        return Err(Error::Domain {
            name: "mu",
            value: mu.to_f64().unwrap_or(f64::NAN),
            domain: "(1, inf)",
        });
    }
    // ln(1 - 1/μ), written as ln(μ-1) - ln μ near μ = 1 where 1/μ loses digits
    let ln_ratio = if mu < lit(2.0) {
        (mu - T::one()).ln() - mu.ln()
    } else {
        (-mu.recip()).ln_1p()
    };
    let nats = (mu - T::one()).ln() - mu * ln_ratio;
    Ok(nats * T::LOG2_E())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_dist, ProbDist};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn uniform4() -> EntropyInput<f64> {
        EntropyInput::from_dist(&ProbDist::uniform(4).unwrap())
    }

    #[test]
    fn massey_examples() {
        let r = massey_bound(&EntropyInput::entropy_only(2.0).unwrap());
        assert_eq!(r.value, Some(2.0));
        assert!(r.applicable);
        let r = massey_bound(&EntropyInput::entropy_only(8.0).unwrap());
        assert_eq!(r.value, Some(65.0));
        let r = massey_bound(&EntropyInput::entropy_only(1.5).unwrap());
        assert!(close(r.value.unwrap(), 1.707_106_781_186_547_5, 1e-12));
        assert!(!r.applicable);
        assert_eq!(r.alpha_star, None);
    }

    #[test]
    fn massey_pn_examples() {
        let (a, b) = massey_pn_bounds(&uniform4()).unwrap();
        assert!(close(a.value.unwrap(), 2.164_213_562_373_095, 1e-12));
        assert!(close(b.value.unwrap(), 2.064_207_115_002_721, 1e-12));
        assert!(a.applicable && b.applicable);

        let zero_pn = EntropyInput::new(3.0, None, Some(-2000.0)).unwrap();
        let (a, b) = massey_pn_bounds(&zero_pn).unwrap();
        let m = massey_bound(&zero_pn).value.unwrap();
        assert_eq!(a.value.unwrap(), m);
        assert_eq!(b.value.unwrap(), m);

        assert_eq!(
            massey_pn_bounds(&EntropyInput::entropy_only(3.0).unwrap()),
            Err(Error::MissingMinProb("massey_pn"))
        );
    }

    #[test]
    fn massey_split_sup_examples() {
        let input = uniform4();
        let at_half = bound_at_alpha(Method::MasseySplitSup, &input, 0.5).unwrap();
        assert!(close(at_half.value.unwrap(), 2.164_213_562_373_095, 1e-12));
        let sup = massey_split_sup_bound(&input).unwrap();
        assert!(sup.value.unwrap() >= at_half.value.unwrap());
        assert!(sup.value.unwrap() >= 2.0);
        let alpha = sup.alpha_star.unwrap();
        assert!((0.0..=0.5).contains(&alpha));
        assert!(massey_split_sup_bound(&EntropyInput::entropy_only(3.0).unwrap()).is_err());
    }

    #[test]
    fn inv_e_examples() {
        let r = inv_e_bound(&EntropyInput::entropy_only(0.0).unwrap());
        assert!(close(r.value.unwrap(), 0.367_879_441_171_442_33, 1e-15));
        assert!(r.applicable);
        let r = inv_e_bound(&EntropyInput::entropy_only(8.0).unwrap());
        assert!(close(r.value.unwrap(), 94.177_136_939_889_23, 1e-11));
        let r = inv_e_bound(&EntropyInput::entropy_only(1.0).unwrap());
        assert!(close(r.value.unwrap(), 0.735_758_882_342_884_6, 1e-15));
        assert!(r.value.unwrap() <= 1.5);
    }

    #[test]
    fn inv_e_half_examples() {
        let r = inv_e_half_bound(&EntropyInput::entropy_only(0.0).unwrap());
        assert!(close(r.value.unwrap(), 0.867_879_441_171_442_3, 1e-15));
        let r = inv_e_half_bound(&EntropyInput::entropy_only(8.0).unwrap());
        assert!(close(r.value.unwrap(), 94.677_136_939_889_23, 1e-11));
        let r = inv_e_half_bound(&uniform4());
        assert!(close(r.value.unwrap(), 1.971_517_764_685_769_3, 1e-12));
        assert!(r.value.unwrap() <= 2.5);
    }

    #[test]
    fn inv_e_split_examples() {
        let input = uniform4();
        let at_half = bound_at_alpha(Method::InvESplitSup, &input, 0.5).unwrap();
        assert!(close(
            at_half.value.unwrap(),
            2.124_939_395_617_216_7,
            1e-12
        ));
        let sup = inv_e_split_sup_bound(&input).unwrap();
        assert!(sup.value.unwrap() >= at_half.value.unwrap());
        assert!(sup.value.unwrap() >= 1.971_517_764_685_769_3);
    }

    #[test]
    fn inv_e_chain_examples() {
        let input = uniform4();
        let at_half = bound_at_alpha(Method::InvEChainSup, &input, 0.5).unwrap();
        assert!(close(at_half.value.unwrap(), 2.331_040_380_091_556, 1e-12));
        let sup = inv_e_chain_sup_bound(&input).unwrap();
        let split = inv_e_split_sup_bound(&input).unwrap();
        assert!(sup.value.unwrap() >= split.value.unwrap());

        let zero_pn = EntropyInput::new(3.0, None, Some(-3000.0)).unwrap();
        let chain = inv_e_chain_sup_bound(&zero_pn).unwrap();
        assert_eq!(chain.value, inv_e_half_bound(&zero_pn).value);
    }

    #[test]
    fn chain_half_is_weaker_than_chain_at_half() {
        let input = uniform4();
        let printed = inv_e_chain_half_bound(&input).unwrap();
        let at_half = bound_at_alpha(Method::InvEChainSup, &input, 0.5).unwrap();
        assert!(printed.value.unwrap() <= at_half.value.unwrap());
        // below roughly 3 bits the closed form drops under 2^H/e + 1/2
        let improved = inv_e_half_bound(&input);
        assert!(printed.value.unwrap() < improved.value.unwrap());
        let d = EntropyInput::from_dist(&ProbDist::<f64>::uniform(16).unwrap());
        let printed = inv_e_chain_half_bound(&d).unwrap();
        assert!(printed.value.unwrap() >= inv_e_half_bound(&d).value.unwrap());
    }

    #[test]
    fn sup_at_zero_alpha_recovers_base() {
        let input = EntropyInput::from_dist(&make_dist(&[0.4, 0.3, 0.2, 0.1]).unwrap());
        let pairs = [
            (Method::MasseySplitSup, Method::Massey),
            (Method::InvESplitSup, Method::InvEHalf),
            (Method::InvEChainSup, Method::InvEHalf),
        ];
        for (sup, base) in pairs {
            let a = bound_at_alpha(sup, &input, 0.0).unwrap();
            let b = evaluate(base, &input).unwrap();
            assert_eq!(a.value, b.value, "{sup}");
            assert_eq!(a.value_log2_bits, b.value_log2_bits, "{sup}");
        }
    }

    #[test]
    fn bound_at_alpha_rejects_out_of_range() {
        assert!(bound_at_alpha(Method::InvEChainSup, &uniform4(), 0.6).is_err());
    }

    #[test]
    fn max_entropy_examples() {
        assert!(close(max_entropy_given_ge(2.0).unwrap(), 2.0, 1e-15));
        assert!(close(
            max_entropy_given_ge(1.5).unwrap(),
            1.377_443_751_081_734_4,
            1e-14
        ));
        assert!(close(
            max_entropy_given_ge(10.0).unwrap(),
            4.689_955_935_892_812,
            1e-13
        ));
        assert!(max_entropy_given_ge(1.0).is_err());
        assert!(max_entropy_given_ge(0.5).is_err());
    }

    #[test]
    fn bound_log2_examples() {
        let opt = MasseyLikeCoefficients::<f64>::optimal();
        assert!(close(
            bound_log2(&opt, 128.0),
            126.557_304_959_111_04,
            1e-12
        ));
        let correction = (0.5 / opt.a()) * (-128.0f64).exp2();
        assert!(correction < 1e-30);
        let id = MasseyLikeCoefficients::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(bound_log2(&id, 8192.0), 8192.0);
        assert!(close(
            bound_log2(&opt, 2.0),
            1.971_517_764_685_769_3f64.log2(),
            1e-14
        ));
        assert!(close(bound_log2(&opt, 2.0), 0.979_306_710_145_752_1, 1e-13));
    }

    #[test]
    fn bound_log2_not_meaningful_when_nonpositive() {
        let c = MasseyLikeCoefficients::new(1.0, 2.0, -2.0).unwrap();
        assert_eq!(bound_log2(&c, 0.5), f64::NEG_INFINITY);
        assert!(bound_log2(&c, 4.0).is_finite());
    }

    #[test]
    fn coefficients_validation() {
        assert!(MasseyLikeCoefficients::new(0.0, 2.0, 0.5).is_err());
        assert!(MasseyLikeCoefficients::new(-1.0, 2.0, 0.5).is_err());
        assert!(MasseyLikeCoefficients::new(1.0, 1.0, 0.5).is_err());
        assert!(MasseyLikeCoefficients::new(1.0, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn evaluate_all_examples() {
        let rs = evaluate_all(&uniform4());
        assert_eq!(rs.len(), 8);
        for r in &rs {
            assert!(r.applicable, "{}", r.method);
            assert!(r.value.unwrap() <= 2.5, "{} {:?}", r.method, r.value);
            assert_eq!(r.alpha_star.is_some(), r.method.is_sup());
        }

        let stats_only = EntropyInput::<f64>::entropy_only(128.0).unwrap();
        let rs = evaluate_all(&stats_only);
        let ids: Vec<_> = rs.iter().map(|r| r.method).collect();
        assert_eq!(ids, vec![Method::Massey, Method::InvE, Method::InvEHalf]);
        assert!(rs.iter().all(|r| r.value_log2_bits.is_finite()));

        let low = EntropyInput::new(0.5, Some(0.05), None).unwrap();
        for r in evaluate_all(&low) {
            assert_eq!(
                r.applicable,
                matches!(r.method, Method::InvE | Method::InvEHalf)
            );
        }
    }

    #[test]
    fn huge_entropy_uses_log_domain() {
        let input = EntropyInput::<f64>::new(8192.0, None, Some(-9000.0)).unwrap();
        let rs = evaluate_all(&input);
        assert_eq!(rs.len(), 8);
        for r in &rs {
            assert!(r.value.is_none(), "{}", r.method);
            assert!(r.value_log2_bits.is_finite());
        }
        let improved = rs.iter().find(|r| r.method == Method::InvEHalf).unwrap();
        assert!(close(
            improved.value_log2_bits,
            8192.0 - std::f64::consts::LOG2_E,
            1e-9
        ));
    }

    #[test]
    fn entropy_input_validation() {
        assert!(EntropyInput::<f64>::entropy_only(-0.1).is_err());
        assert!(EntropyInput::<f64>::entropy_only(f64::INFINITY).is_err());
        assert!(EntropyInput::new(1.0, Some(0.0), None).is_err());
        assert!(EntropyInput::new(1.0, Some(0.25), Some(-2.0)).is_ok());
        assert!(matches!(
            EntropyInput::new(1.0, Some(0.25), Some(-3.0)),
            Err(Error::InconsistentMinProb { .. })
        ));
        assert!(EntropyInput::new(1.0, None, Some(0.5)).is_err());
    }

    #[test]
    fn method_ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn single_precision_bounds() {
        let input = EntropyInput::from_dist(&ProbDist::<f32>::uniform(4).unwrap());
        let rs = evaluate_all(&input);
        assert_eq!(rs.len(), 8);
        for r in &rs {
            assert!(r.value.unwrap() <= 2.5 + 1e-5);
        }
    }
}
