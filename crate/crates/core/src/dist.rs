//! Probability distributions, Shannon and guessing entropy, and product
//! combination of independent distributions.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, from_usize, lit, CompensatedSum, Real};

/// Finite, strictly positive, non-increasing probability vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist<T> {
    probs: Vec<T>,
}

/// Result of normalizing raw weights into a [`ProbDist`].
#[derive(Debug, Clone)]
pub struct Normalized<T> {
    pub dist: ProbDist<T>,
    /// `order[i]` is the input index of `dist.probs()[i]`.
    pub order: Vec<usize>,
    pub dropped_zeros: usize,
    /// Sum of the raw input before normalization.
    pub input_sum: T,
    /// Input sum deviated from one by more than the normalization tolerance.
    pub renormalized: bool,
}

impl<T: Real> Normalized<T> {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.renormalized {
            out.push(format!(
                "input sums to {} and was renormalized",
                self.input_sum
            ));
        }
        if self.dropped_zeros > 0 {
            out.push(format!("{} zero entries dropped", self.dropped_zeros));
        }
        out
    }
}

/// Builds a distribution from nonnegative weights: zeros are dropped, the
/// rest normalized to sum one and sorted descending (stable on ties).
pub fn make_dist<T: Real>(values: &[T]) -> Result<ProbDist<T>> {
    normalize(values).map(|n| n.dist)
}

/// Like [`make_dist`] but reports the permutation, dropped zeros and whether
/// the input needed renormalization.
pub fn normalize<T: Real>(values: &[T]) -> Result<Normalized<T>> {
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry { index });
        }
        if v < T::zero() {
            return Err(Error::NegativeEntry {
                index,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let mut order: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > T::zero())
        .collect();
    if order.is_empty() {
        return Err(Error::NoPositiveMass);
    }
    let dropped_zeros = values.len() - order.len();
    let input_sum = compensated_sum(order.iter().map(|&i| values[i]));
    // stable: ties keep input order
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));

    let renormalized = (input_sum - T::one()).abs() > lit(T::NORM_TOL);
    let probs: Vec<T> = order.iter().map(|&i| values[i] / input_sum).collect();
    let mut dist = ProbDist { probs };
    // one correction pass keeps the sum within tolerance for huge supports
    let s = compensated_sum(dist.probs.iter().copied());
    if (s - T::one()).abs() > lit(T::NORM_TOL * 1e-3) {
        dist.probs.iter_mut().for_each(|p| *p = *p / s);
    }
    Ok(Normalized {
        dist,
        order,
        dropped_zeros,
        input_sum,
        renormalized,
    })
}

impl<T: Real> ProbDist<T> {
    /// Uniform distribution over `n ≥ 1` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoPositiveMass);
        }
        let p = T::one() / from_usize::<T>(n);
        Ok(Self { probs: vec![p; n] })
    }

    /// Wraps a vector already known to be positive, descending and normalized.
    pub(crate) fn from_sorted_unchecked(probs: Vec<T>) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!(probs.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(probs.iter().all(|&p| p > T::zero()));
        Self { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Smallest probability (the last entry).
    pub fn min_prob(&self) -> T {
        *self.probs.last().expect("non-empty distribution")
    }

    pub fn max_prob(&self) -> T {
        self.probs[0]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn entropy(&self) -> T {
        shannon_entropy(self)
    }

    pub fn guessing_entropy(&self) -> T {
        guessing_entropy_exact(self)
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy<T: Real>(d: &ProbDist<T>) -> T {
    let h = -compensated_sum(d.probs.iter().map(|&p| p * p.log2()));
    h.max(T::zero())
}

/// Binary entropy `h(α)` in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy<T: Real>(alpha: T) -> Result<T> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha.to_f64().unwrap_or(f64::NAN),
            domain: "[0, 1]",
        });
    }
    Ok(binary_entropy_unchecked(alpha))
}

pub(crate) fn binary_entropy_unchecked<T: Real>(alpha: T) -> T {
    if alpha <= T::zero() || alpha >= T::one() {
        return T::zero();
    }
    let nats = -(alpha * alpha.ln() + (T::one() - alpha) * (-alpha).ln_1p());
    nats * T::LOG2_E()
}

/// Exact guessing entropy `Σ i·p_i` (expected number of guesses).
pub fn guessing_entropy_exact<T: Real>(d: &ProbDist<T>) -> T {
    compensated_sum(
        d.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| from_usize::<T>(i + 1) * p),
    )
}

/// Statistics of a tensor product of independent distributions, computed
/// from the factors alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductDistStats<T> {
    pub entropy_bits: T,
    /// `log2` of the product of the factor minima.
    pub log2_min_prob: T,
    /// `Σ log2(n_factor)`.
    pub log2_support: T,
    pub factor_count: usize,
}

impl<T: Real> ProductDistStats<T> {
    /// Minimum probability of the product, `0` when it underflows.
    pub fn min_prob(&self) -> T {
        self.log2_min_prob.exp2()
    }
}

pub fn combine_stats<T: Real>(factors: &[ProbDist<T>]) -> Result<ProductDistStats<T>> {
    if factors.is_empty() {
        return Err(Error::NoFactors);
    }
    let mut h = CompensatedSum::new();
    let mut lmin = CompensatedSum::new();
    let mut lsup = CompensatedSum::new();
    for f in factors {
        h.add(shannon_entropy(f));
        lmin.add(f.min_prob().log2());
        lsup.add(from_usize::<T>(f.len()).log2());
    }
    Ok(ProductDistStats {
        entropy_bits: h.value(),
        log2_min_prob: lmin.value(),
        log2_support: lsup.value(),
        factor_count: factors.len(),
    })
}

/// Full tensor product, sorted descending. Fails when the product support
/// exceeds `max_support`.
pub fn combine_materialize<T: Real>(
    factors: &[ProbDist<T>],
    max_support: usize,
) -> Result<ProbDist<T>> {
    if factors.is_empty() {
        return Err(Error::NoFactors);
    }
    let support = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.len()))
        .filter(|&s| s <= max_support);
    let Some(support) = support else {
        let log2_support: f64 = factors.iter().map(|f| (f.len() as f64).log2()).sum();
        return Err(Error::SupportOverflow {
            log2_support,
            limit: max_support,
        });
    };

    let mut product: Vec<T> = Vec::with_capacity(support);
    product.push(T::one());
    for f in factors {
        let mut next = Vec::with_capacity(product.len() * f.len());
        for &a in &product {
            next.extend(f.probs.iter().map(|&b| a * b));
        }
        product = next;
    }
    normalize(&product).map(|n| n.dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn make_dist_sorts_and_normalizes() {
        let d = make_dist(&[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.3, 0.2]);
        let d = make_dist(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn make_dist_drops_zeros() {
        let n = normalize(&[0.5, 0.0, 0.5]).unwrap();
        assert_eq!(n.dist.probs(), &[0.5, 0.5]);
        assert_eq!(n.dropped_zeros, 1);
        assert_eq!(n.order, vec![0, 2]);
        assert!(!n.renormalized);
    }

    #[test]
    fn make_dist_flags_renormalization() {
        let n = normalize(&[2.0, 1.0, 1.0]).unwrap();
        assert!(n.renormalized);
        assert_eq!(n.warnings().len(), 1);
    }

    #[test]
    fn make_dist_rejections() {
        assert_eq!(make_dist::<f64>(&[]), Err(Error::NoPositiveMass));
        assert_eq!(make_dist(&[0.0, 0.0]), Err(Error::NoPositiveMass));
        assert!(matches!(
            make_dist(&[0.5, -0.1, 0.6]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            make_dist(&[0.5, f64::NAN]),
            Err(Error::NonFiniteEntry { index: 1 })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&make_dist(&[0.5, 0.5]).unwrap()), 1.0);
        let u = ProbDist::<f64>::uniform(256).unwrap();
        assert!(close(shannon_entropy(&u), 8.0, 1e-12));
        let h = shannon_entropy(&make_dist(&[0.75, 0.25]).unwrap());
        assert!(close(h, 0.811_278_124_459_132_9, 1e-12));
    }

    #[test]
    fn singleton_entropy_is_zero() {
        let d = make_dist(&[3.0]).unwrap();
        assert_eq!(shannon_entropy(&d), 0.0);
        assert_eq!(guessing_entropy_exact(&d), 1.0);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(close(
            binary_entropy(0.25).unwrap(),
            0.811_278_124_459_132_9,
            1e-15
        ));
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn guessing_entropy_examples() {
        let u = ProbDist::<f64>::uniform(65536).unwrap();
        assert!(close(guessing_entropy_exact(&u), 32768.5, 1e-9));
        let d = make_dist(&[0.5, 0.3, 0.2]).unwrap();
        assert!(close(guessing_entropy_exact(&d), 1.7, 1e-15));
    }

    #[test]
    fn combine_stats_examples() {
        let u = ProbDist::<f64>::uniform(256).unwrap();
        let s = combine_stats(&[u.clone(), u.clone()]).unwrap();
        assert!(close(s.entropy_bits, 16.0, 1e-12));
        assert!(close(s.log2_support, 16.0, 1e-12));
        assert!(close(s.log2_min_prob, -16.0, 1e-12));
        let s = combine_stats(&vec![u; 16]).unwrap();
        assert!(close(s.entropy_bits, 128.0, 1e-10));
        assert_eq!(s.factor_count, 16);

        let a = make_dist(&[0.75, 0.25]).unwrap();
        let b = make_dist(&[0.5, 0.5]).unwrap();
        let s = combine_stats(&[a, b]).unwrap();
        assert!(close(s.entropy_bits, 1.811_278_124_459_133, 1e-12));
        assert_eq!(combine_stats::<f64>(&[]), Err(Error::NoFactors));
    }

    #[test]
    fn combine_materialize_examples() {
        let u2 = ProbDist::<f64>::uniform(2).unwrap();
        let p = combine_materialize(&[u2.clone(), u2], 16).unwrap();
        assert_eq!(p.probs(), &[0.25; 4]);

        let a = make_dist(&[0.75, 0.25]).unwrap();
        let p = combine_materialize(&[a.clone(), a], 16).unwrap();
        assert_eq!(p.probs(), &[0.5625, 0.1875, 0.1875, 0.0625]);

        let u = ProbDist::<f64>::uniform(256).unwrap();
        let p = combine_materialize(&[u.clone(), u.clone()], 1 << 16).unwrap();
        assert!(close(guessing_entropy_exact(&p), 32768.5, 1e-9));

        match combine_materialize(&[u.clone(), u.clone(), u], 1 << 20) {
            Err(Error::SupportOverflow {
                limit,
                log2_support,
            }) => {
                assert_eq!(limit, 1 << 20);
                assert!(close(log2_support, 24.0, 1e-12));
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn works_in_single_precision() {
        let d = make_dist(&[0.2f32, 0.5, 0.3]).unwrap();
        assert_eq!(d.probs(), &[0.5f32, 0.3, 0.2]);
        assert!((guessing_entropy_exact(&d) - 1.7f32).abs() < 1e-6);
        assert!((shannon_entropy(&ProbDist::<f32>::uniform(256).unwrap()) - 8.0).abs() < 1e-5);
    }
}
