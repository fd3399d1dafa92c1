//! The discretized Gaussian shift channel.
//!
//! A run of `x` identical bits is received with analog length `y = x * K`,
//! `K ~ N(1, eps^2)`, and a quantizer maps `y` back to a discrete length.
//! Two quantizer families are supported:
//!
//! * **Rounding** to the nearest integer, optionally truncated so that a run
//!   never shifts by more than `gamma` positions (boundary categories absorb
//!   the tails, and downward shifts are additionally capped at `x - 1` so the
//!   output stays positive);
//! * **Thresholded** quantization onto an arbitrary sorted value set `A`,
//!   with explicit decision thresholds between adjacent values.
//!
//! The threshold `t = 2ab / (a + b)` between two candidate lengths `a < b`
//! equalizes (and thereby minimizes the maximum of) the two crossing
//! probabilities, because the noise is proportional to the transmitted
//! length; this is what [`local_threshold`] returns.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use rand_chacha::rand_core::RngCore;

use crate::qfunc::q_function;
use crate::rng::uniform_f64;
use crate::{Error, Result};

/// Ignore transition mass below this when expanding the untruncated
/// rounding distribution; the remainder is lumped into the last category.
const TAIL_EPS: f64 = 1e-18;

/// Channel noise parameters. The gain is `K ~ N(nu, eps^2)` with `nu` fixed
/// at 1: a calibrated drift is indistinguishable from a rescaled clock, so
/// only the relative spread `eps` matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    eps: f64,
}

impl ChannelParams {
    /// Requires `0 < eps < 1`. Values of practical interest are below ~0.4;
    /// beyond that the gain goes negative with non-negligible probability
    /// and the model stops being meaningful.
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be in (0, 1), got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Minimax decision threshold between candidate run lengths `a < b`:
/// `t = 2ab / (a + b)`, the harmonic mean. Proportional noise makes the
/// two crossing probabilities equal at this point rather than at the
/// arithmetic midpoint.
pub fn local_threshold(a: u32, b: u32) -> Result<f64> {
    if a == 0 || b <= a {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    let (a, b) = (a as f64, b as f64);
    Ok(2.0 * a * b / (a + b))
}

/// Probability of deciding wrongly between lengths `a < b` at the minimax
/// threshold: `Q((b - a) / ((a + b) eps))`. Always worse than the error
/// floor `Q(1/eps)` that adjacent integer lengths (`b = a + 1`, `a -> inf`)
/// approach, which is why unconstrained signalling fails at large lengths.
pub fn pairwise_decision_error(a: u32, b: u32, params: &ChannelParams) -> Result<f64> {
    if a == 0 || b <= a {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    let (af, bf) = (a as f64, b as f64);
    Ok(q_function((bf - af) / ((af + bf) * params.eps)))
}

/// A run-length quantizer.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantizationScheme {
    /// Round the received length to the nearest integer (minimum 1). With
    /// `gamma = Some(g)` shifts are truncated to at most `g` in either
    /// direction; shifts at the cap absorb everything beyond it.
    Rounding { gamma: Option<u32> },
    /// Map onto the sorted `values` using `thresholds`, where
    /// `thresholds[i]` separates `values[i]` from `values[i + 1]`.
    Thresholded { values: Vec<u32>, thresholds: Vec<f64> },
}

impl QuantizationScheme {
    /// Untruncated rounding quantizer.
    pub fn rounding() -> Self {
        QuantizationScheme::Rounding { gamma: None }
    }

    /// Rounding quantizer with shifts truncated to `gamma >= 1` positions.
    pub fn rounding_truncated(gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidScheme("gamma must be >= 1".into()));
        }
        Ok(QuantizationScheme::Rounding { gamma: Some(gamma) })
    }

    /// Thresholded quantizer with explicit thresholds.
    pub fn thresholded(values: Vec<u32>, thresholds: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values[0] == 0 {
            return Err(Error::InvalidScheme("values must be positive".into()));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidScheme("values must be strictly increasing".into()));
        }
        if thresholds.len() + 1 != values.len() {
            return Err(Error::InvalidScheme(format!(
                "need {} thresholds for {} values, got {}",
                values.len() - 1,
                values.len(),
                thresholds.len()
            )));
        }
        for (i, &t) in thresholds.iter().enumerate() {
            if !(t > values[i] as f64 && t < values[i + 1] as f64) {
                return Err(Error::InvalidScheme(format!(
                    "threshold {t} must lie strictly between {} and {}",
                    values[i],
                    values[i + 1]
                )));
            }
        }
        Ok(QuantizationScheme::Thresholded { values, thresholds })
    }

    /// Thresholded quantizer onto `values` with the minimax thresholds of
    /// [`local_threshold`] between each adjacent pair.
    pub fn with_optimal_thresholds(values: Vec<u32>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidScheme("need at least two values".into()));
        }
        let mut thresholds = Vec::with_capacity(values.len() - 1);
        for w in values.windows(2) {
            thresholds.push(local_threshold(w[0], w[1])?);
        }
        Self::thresholded(values, thresholds)
    }

    /// `Q([1, l])`: minimax-thresholded quantizer onto `{1, ..., l}`.
    pub fn contiguous(l: u32) -> Result<Self> {
        Self::with_optimal_thresholds((1..=l).collect())
    }

    /// Deterministic quantization of an analog length. For rounding this is
    /// nearest-integer (clamped to >= 1); truncation is a property of the
    /// per-input transition law, not of the raw map, so `gamma` does not
    /// enter here.
    pub fn quantize(&self, y: f64) -> u32 {
        match self {
            QuantizationScheme::Rounding { .. } => {
                let r = libm::floor(y + 0.5);
                if r < 1.0 {
                    1
                } else {
                    r as u32
                }
            }
            QuantizationScheme::Thresholded { values, thresholds } => {
                let idx = thresholds.partition_point(|&t| t <= y);
                values[idx]
            }
        }
    }
}

/// A binary waveform described by its maximal-run decomposition:
/// `runs[0]` bits of `start_polarity`, then `runs[1]` of the complement, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSequence {
    pub start_polarity: u8,
    pub runs: Vec<u32>,
}

impl RunSequence {
    pub fn new(start_polarity: u8, runs: Vec<u32>) -> Result<Self> {
        if start_polarity > 1 {
            return Err(Error::InvalidSequence("polarity must be 0 or 1".into()));
        }
        if runs.iter().any(|&r| r == 0) {
            return Err(Error::InvalidSequence("run lengths must be >= 1".into()));
        }
        Ok(Self { start_polarity, runs })
    }

    /// Run decomposition of a bit string. Errors on an empty input (an empty
    /// waveform has no polarity).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let first = *bits
            .first()
            .ok_or_else(|| Error::InvalidSequence("empty bit sequence".into()))?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidSequence("bits must be 0 or 1".into()));
        }
        let mut runs = Vec::new();
        let mut cur = first;
        let mut len = 0u32;
        for &b in bits {
            if b == cur {
                len += 1;
            } else {
                runs.push(len);
                cur = b;
                len = 1;
            }
        }
        runs.push(len);
        Ok(Self { start_polarity: first, runs })
    }

    /// Expand back to bits. Inverse of [`RunSequence::from_bits`].
    pub fn to_bits(&self) -> Vec<u8> {
        let mut bits = Vec::with_capacity(self.total_len());
        let mut b = self.start_polarity;
        for &r in &self.runs {
            for _ in 0..r {
                bits.push(b);
            }
            b ^= 1;
        }
        bits
    }

    /// Total bit length.
    pub fn total_len(&self) -> usize {
        self.runs.iter().map(|&r| r as usize).sum()
    }

    /// Fraction of one-bits (average transmitted power, since the "on"
    /// level carries unit power).
    pub fn density(&self) -> f64 {
        let mut ones = 0usize;
        let mut b = self.start_polarity;
        for &r in &self.runs {
            if b == 1 {
                ones += r as usize;
            }
            b ^= 1;
        }
        ones as f64 / self.total_len() as f64
    }
}

/// Exact transition law `P(Y = y | X = x)` of the quantized channel, as a
/// map from output length to probability. Probabilities sum to 1 up to
/// floating point error.
pub fn transition_distribution(
    x: u32,
    scheme: &QuantizationScheme,
    params: &ChannelParams,
) -> Result<BTreeMap<u32, f64>> {
    if x == 0 {
        return Err(Error::InvalidParameter("input run length must be >= 1".into()));
    }
    let eps = params.eps;
    let xf = x as f64;
    // P(Y* > y + 1/2) for the analog length Y* = x K.
    let upper_tail = |half: f64| q_function((half / xf - 1.0) / eps);
    let mut dist = BTreeMap::new();
    match scheme {
        QuantizationScheme::Rounding { gamma } => {
            // Downward shifts cannot exceed x - 1 (outputs stay >= 1).
            let down = gamma.map_or(x - 1, |g| g.min(x - 1));
            // Bottom category x - down absorbs everything below.
            let mut prev_tail = 1.0;
            let mut y = x - down;
            loop {
                let tail = match gamma {
                    Some(g) if y == x + g => 0.0, // top category absorbs the rest
                    _ => upper_tail(y as f64 + 0.5),
                };
                let p = prev_tail - tail;
                if p > 0.0 {
                    *dist.entry(y).or_insert(0.0) += p;
                }
                prev_tail = tail;
                if tail == 0.0 || (gamma.is_none() && y > x && tail < TAIL_EPS) {
                    if tail > 0.0 {
                        *dist.entry(y).or_insert(0.0) += tail; // lump residual
                    }
                    break;
                }
                y += 1;
            }
        }
        QuantizationScheme::Thresholded { values, thresholds } => {
            let mut prev_tail = 1.0; // t_0 = -inf
            for (i, &v) in values.iter().enumerate() {
                let tail = if i < thresholds.len() {
                    upper_tail_threshold(thresholds[i], xf, eps)
                } else {
                    0.0 // t_m = +inf
                };
                dist.insert(v, prev_tail - tail);
                prev_tail = tail;
            }
        }
    }
    Ok(dist)
}

fn upper_tail_threshold(t: f64, xf: f64, eps: f64) -> f64 {
    q_function((t / xf - 1.0) / eps)
}

/// Sample one received run length by inverting the exact transition CDF.
pub fn sample_received_run(
    x: u32,
    scheme: &QuantizationScheme,
    params: &ChannelParams,
    rng: &mut impl RngCore,
) -> Result<u32> {
    let dist = transition_distribution(x, scheme, params)?;
    Ok(sample_from(&dist, rng))
}

fn sample_from(dist: &BTreeMap<u32, f64>, rng: &mut impl RngCore) -> u32 {
    let u = uniform_f64(rng);
    let mut acc = 0.0;
    let mut last = 0;
    for (&y, &p) in dist {
        acc += p;
        last = y;
        if u < acc {
            return y;
        }
    }
    last // u fell into fp slack beyond the accumulated sum
}

/// Pass a whole run sequence through the channel. Each run is perturbed
/// independently; polarity is preserved (the channel shifts edges, it does
/// not flip levels).
pub fn transmit_runs(
    input: &RunSequence,
    scheme: &QuantizationScheme,
    params: &ChannelParams,
    rng: &mut impl RngCore,
) -> Result<RunSequence> {
    // Cache per-length laws: frames reuse a handful of distinct lengths.
    let mut cache: BTreeMap<u32, BTreeMap<u32, f64>> = BTreeMap::new();
    let mut out = Vec::with_capacity(input.runs.len());
    for &x in &input.runs {
        if !cache.contains_key(&x) {
            cache.insert(x, transition_distribution(x, scheme, params)?);
        }
        out.push(sample_from(&cache[&x], rng));
    }
    Ok(RunSequence { start_polarity: input.start_polarity, runs: out })
}
