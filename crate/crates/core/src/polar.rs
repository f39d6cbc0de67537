//! Single-user polarization: the Kronecker transform, channel combining,
//! exact bit-channel tables, good sets and Monte Carlo Bhattacharyya
//! estimates.
//!
//! Indices are 0-based. Bit-channel `i` of depth `n` is reached by reading the
//! `n`-bit binary expansion of `i` from the most significant bit, applying
//! [`combine_minus`] for a 0 and [`combine_plus`] for a 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::BinaryInputDMC;
use crate::error::{Error, Result};
use crate::sc::{sc_decode, LlrPair};

/// Default output-count budget for exact bit-channel tables.
pub const DEFAULT_TABLE_BUDGET: usize = 1_000_000;

/// Posterior tolerance used when merging equivalent outputs.
pub const MERGE_TOL: f64 = 1e-12;

/// Trials per deterministic chunk of a Monte Carlo run.
pub(crate) const MC_CHUNK: usize = 64;

/// Two-sided 95% normal quantile used for half-widths.
pub const Z95: f64 = 1.959_963_984_540_054;

/// `x = u G^{(x)n}` over GF(2).
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    if !u.len().is_power_of_two() {
        return Err(Error::Argument(format!("length {} is not a power of two", u.len())));
    }
    let mut x = u.to_vec();
    transform_in_place(&mut x);
    Ok(x)
}

/// In-place Kronecker transform; the length must be a power of two.
/// The transform is its own inverse.
pub(crate) fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    let mut step = 1;
    while step < n {
        for i in (0..n).filter(|i| i & step == 0) {
            x[i] ^= x[i + step];
        }
        step <<= 1;
    }
}

/// Transform of the low `bits` bits of `word`, bit `t` holding `u_t`.
pub(crate) fn transform_word(word: usize, bits: usize) -> usize {
    let mut x = word;
    let mut step = 1;
    while step < bits {
        for i in (0..bits).filter(|i| i & step == 0) {
            x ^= ((x >> (i + step)) & 1) << i;
        }
        step <<= 1;
    }
    x
}

/// The channel seen by `u1` with `u2` unknown: outputs `(y1, y2)`.
pub fn combine_minus(w: &BinaryInputDMC) -> BinaryInputDMC {
    let k = w.outputs();
    let mut rows = [vec![0.0; k * k], vec![0.0; k * k]];
    for u1 in 0..2u8 {
        for y1 in 0..k {
            for y2 in 0..k {
                rows[u1 as usize][y1 * k + y2] =
                    0.5 * (w.prob(u1, y1) * w.prob(0, y2) + w.prob(u1 ^ 1, y1) * w.prob(1, y2));
            }
        }
    }
    let [a, b] = rows;
    BinaryInputDMC::from_rows(a, b)
}

/// The channel seen by `u2` given `u1`: outputs `(u1, y1, y2)`.
pub fn combine_plus(w: &BinaryInputDMC) -> BinaryInputDMC {
    let k = w.outputs();
    let mut rows = [vec![0.0; 2 * k * k], vec![0.0; 2 * k * k]];
    for u2 in 0..2u8 {
        for u1 in 0..2u8 {
            for y1 in 0..k {
                for y2 in 0..k {
                    rows[u2 as usize][(u1 as usize * k + y1) * k + y2] =
                        0.5 * w.prob(u1 ^ u2, y1) * w.prob(u2, y2);
                }
            }
        }
    }
    let [a, b] = rows;
    BinaryInputDMC::from_rows(a, b)
}

/// Position of a bit-channel: depth `n` (block length `2^n`) and 0-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitChannelIndex {
    n: usize,
    i: usize,
}

impl BitChannelIndex {
    pub fn new(n: usize, i: usize) -> Result<Self> {
        if n >= usize::BITS as usize - 1 || i >= 1 << n {
            return Err(Error::Argument(format!("index {i} outside a block of length 2^{n}")));
        }
        Ok(Self { n, i })
    }

    pub fn depth(self) -> usize {
        self.n
    }

    pub fn index(self) -> usize {
        self.i
    }

    /// Minus (false) / plus (true) steps from the first level on.
    pub fn steps(self) -> impl Iterator<Item = bool> {
        (0..self.n).rev().map(move |b| (self.i >> b) & 1 == 1)
    }
}

fn step_channel(w: &BinaryInputDMC, plus: bool, merge: bool, budget: usize) -> Result<BinaryInputDMC> {
    let k = w.outputs();
    let next = if plus { 2 * k * k } else { k * k };
    if next > budget {
        return Err(Error::Capacity(format!(
            "bit-channel table would need {next} outputs (budget {budget}); \
             enable output merging or use Monte Carlo construction"
        )));
    }
    let c = if plus { combine_plus(w) } else { combine_minus(w) };
    Ok(if merge { c.canonical(MERGE_TOL) } else { c })
}

/// Exact table of bit-channel `index` of `w`.
pub fn bit_channel_exact(
    w: &BinaryInputDMC,
    index: BitChannelIndex,
    merge: bool,
    budget: usize,
) -> Result<BinaryInputDMC> {
    let mut ch = if merge { w.canonical(MERGE_TOL) } else { w.clone() };
    for plus in index.steps() {
        ch = step_channel(&ch, plus, merge, budget)?;
    }
    Ok(ch)
}

/// All `2^n` bit-channels of `w`, built level by level with merging.
pub fn all_bit_channels(w: &BinaryInputDMC, n: usize, budget: usize) -> Result<Vec<BinaryInputDMC>> {
    let mut level = vec![w.canonical(MERGE_TOL)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for ch in &level {
            next.push(step_channel(ch, false, true, budget)?);
            next.push(step_channel(ch, true, true, budget)?);
        }
        level = next;
    }
    Ok(level)
}

/// Bhattacharyya threshold `2^{-N^beta} / positions` for block length `N = 2^n`.
pub fn good_threshold(n: usize, beta: f64, positions: usize) -> f64 {
    let big_n = (1u64 << n) as f64;
    (-big_n.powf(beta)).exp2() / positions as f64
}

/// A Bhattacharyya estimate with a 95% normal-approximation half-width
/// (zero for exact values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZEstimate {
    pub value: f64,
    pub half_width: f64,
}

impl ZEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, half_width: 0.0 }
    }
}

/// How bit-channel reliabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact tables with output merging, within an output-count budget.
    Exact { budget: usize },
    /// Genie-aided Monte Carlo estimates.
    MonteCarlo { trials: usize, seed: u64 },
}

/// Set of good bit-channel indices for a given `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSet {
    pub beta: f64,
    pub indices: Vec<usize>,
}

/// Bhattacharyya parameters of all `2^n` bit-channels.
pub fn bit_channel_z(w: &BinaryInputDMC, n: usize, method: Method) -> Result<Vec<ZEstimate>> {
    match method {
        Method::Exact { budget } => Ok(all_bit_channels(w, n, budget)?
            .iter()
            .map(|c| ZEstimate::exact(c.bhattacharyya()))
            .collect()),
        Method::MonteCarlo { trials, seed } => monte_carlo_z_all(w, n, trials, seed),
    }
}

/// Indices whose Bhattacharyya parameter is below `2^{-N^beta}/N`.
pub fn good_set(w: &BinaryInputDMC, n: usize, beta: f64, method: Method) -> Result<GoodSet> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Argument(format!("beta {beta} outside (0, 1/2)")));
    }
    let thr = good_threshold(n, beta, 1 << n);
    let z = bit_channel_z(w, n, method)?;
    let indices = z.iter().enumerate().filter(|(_, e)| e.value < thr).map(|(i, _)| i).collect();
    Ok(GoodSet { beta, indices })
}

/// Cumulative rows for inverse-CDF sampling of a channel output.
pub(crate) struct OutputSampler {
    cdf: [Vec<f64>; 2],
}

impl OutputSampler {
    pub fn new(w: &BinaryInputDMC) -> Self {
        let cum = |row: &[f64]| {
            let mut acc = 0.0;
            row.iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect::<Vec<_>>()
        };
        Self { cdf: [cum(w.row(0)), cum(w.row(1))] }
    }

    pub fn sample(&self, x: u8, rng: &mut impl Rng) -> usize {
        let row = &self.cdf[x as usize];
        let t = rng.random::<f64>() * row[row.len() - 1];
        row.partition_point(|&c| c <= t).min(row.len() - 1)
    }
}

/// Per-trial random stream: independent of scheduling and worker count.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Running sums of per-position Z samples.
#[derive(Debug, Clone)]
pub(crate) struct ZAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    trials: usize,
}

impl ZAccumulator {
    pub fn new(len: usize) -> Self {
        Self { sum: vec![0.0; len], sum_sq: vec![0.0; len], trials: 0 }
    }

    /// Adds one genie pass: pairs are the bit-channel likelihoods, truth the
    /// transmitted bits.
    pub fn push(&mut self, pairs: &[LlrPair], truth: &[u8]) {
        for ((s, q), (p, &b)) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(pairs.iter().zip(truth)) {
            let v = z_sample(*p, b);
            *s += v;
            *q += v * v;
        }
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.trials += other.trials;
    }

    pub fn estimates(&self) -> Vec<ZEstimate> {
        let t = self.trials as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &q)| {
                let mean = s / t;
                let var = if self.trials > 1 { ((q - t * mean * mean) / (t - 1.0)).max(0.0) } else { 0.0 };
                ZEstimate { value: mean, half_width: Z95 * (var / t).sqrt() }
            })
            .collect()
    }
}

/// `sqrt(W(obs | wrong) / W(obs | true))`; its mean under uniform inputs is Z.
#[inline]
pub(crate) fn z_sample(p: LlrPair, truth: u8) -> f64 {
    let t = p[truth as usize];
    let f = p[1 - truth as usize];
    if f == f64::NEG_INFINITY {
        0.0
    } else {
        (0.5 * (f - t)).exp()
    }
}

/// Runs `trials` in fixed-size chunks and merges them in chunk order, so the
/// result does not depend on how rayon schedules the chunks.
pub(crate) fn run_chunked<F>(len: usize, trials: usize, trial: F) -> ZAccumulator
where
    F: Fn(u64, &mut ZAccumulator) + Sync,
{
    let chunks: Vec<ZAccumulator> = (0..trials.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = ZAccumulator::new(len);
            for t in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(trials) {
                trial(t as u64, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = ZAccumulator::new(len);
    for c in &chunks {
        total.merge(c);
    }
    total
}

/// Genie-aided Monte Carlo estimates of every bit-channel's Bhattacharyya
/// parameter at depth `n`.
pub fn monte_carlo_z_all(w: &BinaryInputDMC, n: usize, trials: usize, seed: u64) -> Result<Vec<ZEstimate>> {
    if trials == 0 {
        return Err(Error::Argument("Monte Carlo estimation needs at least one trial".into()));
    }
    let len = 1usize << n;
    let sampler = OutputSampler::new(w);
    let frozen = vec![None; len];
    let acc = run_chunked(len, trials, |t, acc| {
        let mut rng = trial_rng(seed, t);
        let u: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
        let mut x = u.clone();
        transform_in_place(&mut x);
        let llh: Vec<LlrPair> = x
            .iter()
            .map(|&b| {
                let y = sampler.sample(b, &mut rng);
                [w.prob(0, y).ln(), w.prob(1, y).ln()]
            })
            .collect();
        let pass = sc_decode(&llh, &frozen, Some(&u), &mut 0);
        acc.push(&pass.pairs, &u);
    });
    Ok(acc.estimates())
}

/// Monte Carlo estimate for one bit-channel.
pub fn monte_carlo_z(w: &BinaryInputDMC, index: BitChannelIndex, trials: usize, seed: u64) -> Result<ZEstimate> {
    Ok(monte_carlo_z_all(w, index.depth(), trials, seed)?[index.index()])
}
