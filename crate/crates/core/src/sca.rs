//! Simulated side-channel leakage of the AES S-box and univariate template
//! attacks on one key byte.
//!
//! Leakage model: `HW(Sbox(p ⊕ k)) + N(0, σ²)`. Templates hold one mean per
//! Hamming-weight class and a single pooled variance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dist::{normalize, ProbDist};
use crate::error::{Error, Result};
use crate::scalar::compensated_sum;

#[rustfmt::skip]
pub const AES_SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Number of Hamming-weight classes of a byte.
pub const HW_CLASSES: usize = 9;

/// Templates never carry a variance below this.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[inline]
pub fn aes_sbox(x: u8) -> u8 {
    AES_SBOX[x as usize]
}

/// S-box lookup for an untyped integer input.
pub fn try_aes_sbox(x: i64) -> Result<u8> {
    u8::try_from(x).map(aes_sbox).map_err(|_| Error::Domain {
        name: "sbox input",
        value: x as f64,
        domain: "[0, 255]",
    })
}

#[inline]
pub fn hamming_weight(x: u8) -> usize {
    x.count_ones() as usize
}

/// Hamming-weight class of the S-box output for plaintext `p` under key `k`.
#[inline]
pub fn leakage_class(plaintext: u8, key: u8) -> usize {
    hamming_weight(aes_sbox(plaintext ^ key))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageParams {
    noise_sigma: f64,
    key_byte: u8,
    rng_seed: u64,
}

impl LeakageParams {
    pub fn new(noise_sigma: f64, key_byte: u8, rng_seed: u64) -> Result<Self> {
        if !(noise_sigma > 0.0) || !noise_sigma.is_finite() {
            return Err(Error::Domain {
                name: "noise_sigma",
                value: noise_sigma,
                domain: "(0, inf)",
            });
        }
        Ok(Self {
            noise_sigma,
            key_byte,
            rng_seed,
        })
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn key_byte(&self) -> u8 {
        self.key_byte
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn with_key(self, key_byte: u8) -> Self {
        Self { key_byte, ..self }
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self }
    }
}

/// Plaintext bytes and one scalar leakage sample per trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    plaintexts: Vec<u8>,
    leakages: Vec<f64>,
}

impl TraceSet {
    pub fn new(plaintexts: Vec<u8>, leakages: Vec<f64>) -> Result<Self> {
        if plaintexts.len() != leakages.len() {
            return Err(Error::Domain {
                name: "leakages length",
                value: leakages.len() as f64,
                domain: "equal to plaintexts length",
            });
        }
        Ok(Self {
            plaintexts,
            leakages,
        })
    }

    pub fn len(&self) -> usize {
        self.plaintexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plaintexts.is_empty()
    }

    pub fn plaintexts(&self) -> &[u8] {
        &self.plaintexts
    }

    pub fn leakages(&self) -> &[f64] {
        &self.leakages
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, f64)> + '_ {
        self.plaintexts
            .iter()
            .copied()
            .zip(self.leakages.iter().copied())
    }

    /// The first `n` traces.
    pub fn prefix(&self, n: usize) -> TraceSet {
        let n = n.min(self.len());
        TraceSet {
            plaintexts: self.plaintexts[..n].to_vec(),
            leakages: self.leakages[..n].to_vec(),
        }
    }
}

/// Generates `n_traces ≥ 1` traces with uniform plaintexts.
pub fn simulate_traces(params: &LeakageParams, n_traces: usize) -> Result<TraceSet> {
    if n_traces == 0 {
        return Err(Error::EmptyTraceSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let noise = Normal::new(0.0, params.noise_sigma).expect("sigma validated");
    let mut plaintexts = Vec::with_capacity(n_traces);
    let mut leakages = Vec::with_capacity(n_traces);
    for _ in 0..n_traces {
        let p: u8 = rng.random();
        let signal = leakage_class(p, params.key_byte) as f64;
        plaintexts.push(p);
        leakages.push(signal + noise.sample(&mut rng));
    }
    Ok(TraceSet {
        plaintexts,
        leakages,
    })
}

/// Per-class leakage means and one pooled variance.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    means: [f64; HW_CLASSES],
    variance: f64,
    counts: [usize; HW_CLASSES],
}

impl TemplateSet {
    /// Templates from explicit parameters (no profiling counts).
    pub fn new(means: [f64; HW_CLASSES], variance: f64) -> Self {
        Self {
            means,
            variance,
            counts: [0; HW_CLASSES],
        }
    }

    pub fn means(&self) -> &[f64; HW_CLASSES] {
        &self.means
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn counts(&self) -> &[usize; HW_CLASSES] {
        &self.counts
    }
}

/// Profiles the templates from traces recorded under a known key.
///
/// Statistics are accumulated over sorted per-class samples, so the result
/// does not depend on trace order.
pub fn build_templates(profiling: &TraceSet, true_key: u8) -> Result<TemplateSet> {
    let mut classes: Vec<Vec<f64>> = vec![Vec::new(); HW_CLASSES];
    for (p, x) in profiling.iter() {
        classes[leakage_class(p, true_key)].push(x);
    }
    let mut means = [0.0; HW_CLASSES];
    let mut counts = [0; HW_CLASSES];
    for (class, xs) in classes.iter_mut().enumerate() {
        if xs.len() < 2 {
            return Err(Error::UnobservedClass {
                class,
                count: xs.len(),
            });
        }
        xs.sort_by(f64::total_cmp);
        counts[class] = xs.len();
        means[class] = compensated_sum(xs.iter().copied()) / xs.len() as f64;
    }
    let scatter = compensated_sum(
        classes
            .iter()
            .zip(means)
            .flat_map(|(xs, m)| xs.iter().map(move |&x| (x - m) * (x - m))),
    );
    let dof = profiling.len() - HW_CLASSES;
    let variance = (scatter / dof as f64).max(VARIANCE_FLOOR);
    Ok(TemplateSet {
        means,
        variance,
        counts,
    })
}

/// Posterior over key candidates, sorted descending.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub dist: ProbDist<f64>,
    /// `candidates[i]` is the key byte carrying `dist.probs()[i]`.
    pub candidates: Vec<u8>,
    /// Candidates whose posterior underflowed to zero.
    pub dropped: usize,
}

impl Posterior {
    /// 1-based position of `key` in the guessing order, if it kept mass.
    pub fn rank_of(&self, key: u8) -> Option<usize> {
        self.candidates
            .iter()
            .position(|&k| k == key)
            .map(|i| i + 1)
    }
}

/// Running Gaussian log-likelihoods of all 256 key candidates.
#[derive(Debug, Clone)]
pub struct LikelihoodAccumulator<'a> {
    templates: &'a TemplateSet,
    log_lik: [f64; 256],
    traces: usize,
}

impl<'a> LikelihoodAccumulator<'a> {
    pub fn new(templates: &'a TemplateSet) -> Result<Self> {
        let v = templates.variance;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DegenerateVariance(v));
        }
        Ok(Self {
            templates,
            log_lik: [0.0; 256],
            traces: 0,
        })
    }

    pub fn absorb(&mut self, plaintext: u8, leakage: f64) {
        let scale = -0.5 / self.templates.variance;
        for (k, ll) in self.log_lik.iter_mut().enumerate() {
            let m = self.templates.means[leakage_class(plaintext, k as u8)];
            let r = leakage - m;
            *ll += scale * r * r;
        }
        self.traces += 1;
    }

    pub fn absorb_all(&mut self, traces: &TraceSet) {
        for (p, x) in traces.iter() {
            self.absorb(p, x);
        }
    }

    pub fn traces(&self) -> usize {
        self.traces
    }

    /// Posterior under a uniform key prior.
    pub fn posterior(&self) -> Result<Posterior> {
        if self.traces == 0 {
            return Err(Error::EmptyTraceSet);
        }
        let max = self
            .log_lik
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self.log_lik.iter().map(|&ll| (ll - max).exp()).collect();
        let n = normalize(&weights)?;
        Ok(Posterior {
            candidates: n.order.iter().map(|&i| i as u8).collect(),
            dropped: n.dropped_zeros,
            dist: n.dist,
        })
    }
}

/// Template attack on one key byte.
pub fn attack_posteriors(templates: &TemplateSet, attack: &TraceSet) -> Result<Posterior> {
    let mut acc = LikelihoodAccumulator::new(templates)?;
    acc.absorb_all(attack);
    acc.posterior()
}

#[cfg(test)]
mod tests {
    use super::*;

    // independent construction: multiplicative inverse in GF(2^8) followed
    // by the affine map
    fn sbox_reference(x: u8) -> u8 {
        fn gmul(mut a: u8, mut b: u8) -> u8 {
            let mut p = 0u8;
            while b != 0 {
                if b & 1 != 0 {
                    p ^= a;
                }
                let hi = a & 0x80;
                a <<= 1;
                if hi != 0 {
                    a ^= 0x1b;
                }
                b >>= 1;
            }
            p
        }
        let inv = if x == 0 {
            0
        } else {
            (1..=255u8).find(|&y| gmul(x, y) == 1).unwrap()
        };
        inv ^ inv.rotate_left(1)
            ^ inv.rotate_left(2)
            ^ inv.rotate_left(3)
            ^ inv.rotate_left(4)
            ^ 0x63
    }

    #[test]
    fn sbox_table() {
        assert_eq!(aes_sbox(0x00), 0x63);
        assert_eq!(aes_sbox(0x53), 0xed);
        for x in 0..=255u8 {
            assert_eq!(aes_sbox(x), sbox_reference(x), "{x:#04x}");
        }
        let mut seen = [false; 256];
        for x in 0..=255u8 {
            seen[aes_sbox(x) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(try_aes_sbox(0x53).unwrap(), 0xed);
        assert!(try_aes_sbox(256).is_err());
        assert!(try_aes_sbox(-1).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LeakageParams::new(0.0, 1, 1).is_err());
        assert!(LeakageParams::new(-1.0, 1, 1).is_err());
        assert!(LeakageParams::new(f64::NAN, 1, 1).is_err());
        assert!(LeakageParams::new(1.0, 1, 1).is_ok());
    }

    #[test]
    fn noiseless_traces_are_integral() {
        let params = LeakageParams::new(1e-9, 0x2b, 3).unwrap();
        let t = simulate_traces(&params, 1000).unwrap();
        for (p, x) in t.iter() {
            assert!((x - x.round()).abs() < 1e-6);
            assert_eq!(x.round() as usize, leakage_class(p, 0x2b));
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let params = LeakageParams::new(1.0, 7, 11).unwrap();
        assert_eq!(
            simulate_traces(&params, 100).unwrap(),
            simulate_traces(&params, 100).unwrap()
        );
        assert_ne!(
            simulate_traces(&params, 100).unwrap(),
            simulate_traces(&params.with_seed(12), 100).unwrap()
        );
        assert_eq!(simulate_traces(&params, 0), Err(Error::EmptyTraceSet));
    }

    #[test]
    fn class_means_follow_law_of_large_numbers() {
        let params = LeakageParams::new(1.0, 0x11, 5).unwrap();
        let t = simulate_traces(&params, 100_000).unwrap();
        let mut sums = [0.0; HW_CLASSES];
        let mut counts = [0usize; HW_CLASSES];
        for (p, x) in t.iter() {
            let c = leakage_class(p, 0x11);
            sums[c] += x;
            counts[c] += 1;
        }
        for c in 0..HW_CLASSES {
            let mean = sums[c] / counts[c] as f64;
            assert!((mean - c as f64).abs() < 0.05, "class {c}: {mean}");
        }
    }

    #[test]
    fn templates_noiseless() {
        let params = LeakageParams::new(1e-9, 0x42, 1).unwrap();
        let t = simulate_traces(&params, 5000).unwrap();
        let tpl = build_templates(&t, 0x42).unwrap();
        for (c, m) in tpl.means().iter().enumerate() {
            assert!((m - c as f64).abs() < 1e-8);
        }
        assert!(tpl.variance() < 1e-12 + 1e-15);
    }

    #[test]
    fn templates_noisy_variance() {
        let params = LeakageParams::new(1.0, 0x42, 2).unwrap();
        let t = simulate_traces(&params, 100_000).unwrap();
        let tpl = build_templates(&t, 0x42).unwrap();
        assert!((tpl.variance() - 1.0).abs() < 0.05);
    }

    #[test]
    fn templates_are_order_free() {
        let params = LeakageParams::new(0.7, 0x99, 4).unwrap();
        let t = simulate_traces(&params, 3000).unwrap();
        let mut idx: Vec<usize> = (0..t.len()).collect();
        idx.reverse();
        idx.rotate_left(1234);
        let shuffled = TraceSet::new(
            idx.iter().map(|&i| t.plaintexts()[i]).collect(),
            idx.iter().map(|&i| t.leakages()[i]).collect(),
        )
        .unwrap();
        assert_eq!(
            build_templates(&t, 0x99).unwrap(),
            build_templates(&shuffled, 0x99).unwrap()
        );
    }

    #[test]
    fn templates_need_every_class() {
        // plaintexts chosen so that HW class 8 (sbox output 0xff) never occurs
        let key = 0u8;
        let p8 = (0..=255u8).find(|&p| aes_sbox(p) == 0xff).unwrap();
        let pts: Vec<u8> = (0..=255u8)
            .filter(|&p| p != p8)
            .chain(0..=255u8)
            .filter(|&p| p != p8)
            .collect();
        let xs = pts.iter().map(|&p| leakage_class(p, key) as f64).collect();
        let t = TraceSet::new(pts, xs).unwrap();
        assert_eq!(
            build_templates(&t, key),
            Err(Error::UnobservedClass { class: 8, count: 0 })
        );
    }

    fn noiseless_templates() -> TemplateSet {
        let mut means = [0.0; HW_CLASSES];
        for (c, m) in means.iter_mut().enumerate() {
            *m = c as f64;
        }
        TemplateSet::new(means, VARIANCE_FLOOR)
    }

    #[test]
    fn single_hw8_trace_pins_the_key() {
        let tpl = noiseless_templates();
        let p = 0x3c;
        let key = (0..=255u8).find(|&k| aes_sbox(p ^ k) == 0xff).unwrap();
        let t = TraceSet::new(vec![p], vec![8.0]).unwrap();
        let post = attack_posteriors(&tpl, &t).unwrap();
        assert_eq!(post.dist.probs(), &[1.0]);
        assert_eq!(post.candidates, vec![key]);
        assert_eq!(post.rank_of(key), Some(1));
        assert_eq!(post.dropped, 255);
    }

    #[test]
    fn single_hw4_trace_is_uniform_over_class() {
        let tpl = noiseless_templates();
        let p = 0xa7;
        let t = TraceSet::new(vec![p], vec![4.0]).unwrap();
        let post = attack_posteriors(&tpl, &t).unwrap();
        // brute-force preimage of the HW-4 class
        let mut expected: Vec<u8> = (0..=255u8)
            .filter(|&k| aes_sbox(p ^ k).count_ones() == 4)
            .collect();
        assert_eq!(expected.len(), 70);
        assert_eq!(post.dist.len(), 70);
        assert!(post
            .dist
            .probs()
            .iter()
            .all(|&q| (q - 1.0 / 70.0).abs() < 1e-15));
        let mut got = post.candidates.clone();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn posterior_normalized() {
        for seed in 0..10u64 {
            let sigma = 0.3 + seed as f64 * 0.4;
            let params = LeakageParams::new(sigma, seed as u8 * 17, seed).unwrap();
            let prof = simulate_traces(&params.with_seed(seed + 100), 4000).unwrap();
            let tpl = build_templates(&prof, params.key_byte()).unwrap();
            let att = simulate_traces(&params, 1 + seed as usize * 3).unwrap();
            let post = attack_posteriors(&tpl, &att).unwrap();
            let s: f64 = post.dist.probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert_eq!(post.candidates.len(), post.dist.len());
        }
    }

    #[test]
    fn attack_rejects_degenerate_input() {
        let tpl = TemplateSet::new([0.0; HW_CLASSES], 0.0);
        let t = TraceSet::new(vec![1], vec![1.0]).unwrap();
        assert_eq!(
            attack_posteriors(&tpl, &t).unwrap_err(),
            Error::DegenerateVariance(0.0)
        );
        let tpl = noiseless_templates();
        let empty = TraceSet::new(vec![], vec![]).unwrap();
        assert_eq!(
            attack_posteriors(&tpl, &empty).unwrap_err(),
            Error::EmptyTraceSet
        );
    }

    #[test]
    fn many_traces_recover_key() {
        let params = LeakageParams::new(1.0, 0xc3, 9).unwrap();
        let prof = simulate_traces(&params.with_seed(99), 5000).unwrap();
        let tpl = build_templates(&prof, 0xc3).unwrap();
        let att = simulate_traces(&params, 200).unwrap();
        let post = attack_posteriors(&tpl, &att).unwrap();
        assert_eq!(post.rank_of(0xc3), Some(1));
    }
}
