//! Joint successive-cancellation decoding of MAC polar codes.
//!
//! Base positions are processed in decoding order. For each one, every
//! column of the code gets the likelihood of its base-domain bit by summing
//! the column's joint input law over all completions consistent with the bits
//! already fixed; an ordinary single-user SC pass over the run then decides
//! the user's block and its re-encoded values become known for later runs.

use rand::Rng;

use crate::base_code::{combinations, DecodingOrder};
use crate::channel::{GaussianMac, MacDMC};
use crate::error::{Error, Result};
use crate::mac_code::{CodeLayout, MacPolarSpec};
use crate::sc::{decide, normalize, sc_decode, LlrPair};

/// Per channel-use log-likelihoods `ln W(y_s | c)` for all `2^m` input
/// combinations `c` (user 1 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelObservation {
    m: usize,
    ll: Vec<f64>,
}

impl ChannelObservation {
    /// From discrete output symbols of a tabulated MAC.
    pub fn from_symbols(w: &MacDMC, ys: &[usize]) -> Self {
        let width = 1usize << w.users();
        let mut ll = Vec::with_capacity(ys.len() * width);
        for &y in ys {
            ll.extend((0..width).map(|c| w.prob(c, y).ln()));
        }
        Self { m: w.users(), ll }
    }

    /// From real outputs of the Gaussian MAC.
    pub fn from_gaussian(w: &GaussianMac, ys: &[f64]) -> Self {
        Self { m: w.m, ll: ys.iter().flat_map(|&y| w.log_likelihoods(y)).collect() }
    }

    /// From per-use log-likelihood rows.
    pub fn from_log_likelihoods(m: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let width = 1usize << m;
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Argument(format!("every use needs {width} log-likelihoods")));
        }
        if rows.iter().flatten().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::Argument("log-likelihoods must be finite or -inf".into()));
        }
        Ok(Self { m, ll: rows.concat() })
    }

    pub fn users(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.ll.len() >> self.m
    }

    pub fn is_empty(&self) -> bool {
        self.ll.is_empty()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let w = 1 << self.m;
        &self.ll[s * w..(s + 1) * w]
    }
}

/// Inverse-CDF sampler for a tabulated MAC.
pub struct MacSampler<'a> {
    w: &'a MacDMC,
    cdf: Vec<Vec<f64>>,
}

impl<'a> MacSampler<'a> {
    pub fn new(w: &'a MacDMC) -> Self {
        let cdf = (0..1usize << w.users())
            .map(|c| {
                let mut acc = 0.0;
                w.row(c)
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { w, cdf }
    }

    pub fn sample(&self, combination: usize, rng: &mut impl Rng) -> usize {
        let row = &self.cdf[combination];
        let t = rng.random::<f64>() * row[row.len() - 1];
        row.partition_point(|&c| c <= t).min(row.len() - 1)
    }

    /// One output per channel use for the per-user codewords `x`.
    pub fn transmit(&self, x: &[Vec<u8>], rng: &mut impl Rng) -> Vec<usize> {
        let m = self.w.users();
        (0..x[0].len())
            .map(|s| {
                let c = (0..m).fold(0usize, |acc, j| (acc << 1) | x[j][s] as usize);
                self.sample(c, rng)
            })
            .collect()
    }
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded information bits per user, in index order.
    pub messages: Vec<Vec<u8>>,
    /// Full decoded input vectors per user.
    pub inputs: Vec<Vec<u8>>,
    /// `|ln p(0) - ln p(1)|` of every decision, per user and index.
    pub margins: Vec<Vec<f64>>,
    /// Elementary likelihood operations performed.
    pub ops: u64,
}

struct Pass {
    u: Vec<Vec<u8>>,
    pairs: Vec<Vec<LlrPair>>,
    ops: u64,
}

/// Log-sum-exp of the consistent completions, split by the value of `bit`.
fn marginal(col: &[f64], known_mask: usize, known_vals: usize, bit: usize) -> LlrPair {
    let mut hi = [f64::NEG_INFINITY; 2];
    for (d, &v) in col.iter().enumerate() {
        if d & known_mask == known_vals {
            let b = (d >> bit) & 1;
            hi[b] = hi[b].max(v);
        }
    }
    let mut sum = [0.0f64; 2];
    for (d, &v) in col.iter().enumerate() {
        if d & known_mask == known_vals {
            let b = (d >> bit) & 1;
            if hi[b] > f64::NEG_INFINITY {
                sum[b] += (v - hi[b]).exp();
            }
        }
    }
    [hi[0] + sum[0].ln(), hi[1] + sum[1].ln()]
}

/// Column joint log-likelihoods `ln p(y_col | d)` for each base-domain word `d`.
fn column_joints(layout: &CodeLayout, obs: &ChannelObservation, ops: &mut u64) -> Vec<f64> {
    let (m, len, run) = (layout.users(), layout.order.base_len(), layout.run_len());
    let combos = combinations(m, len);
    let dom = 1usize << (m * len);
    let mut out = vec![0.0; run * dom];
    for c in 0..run {
        for d in 0..dom {
            out[c * dom + d] = (0..len).map(|s| obs.row(s * run + c)[combos[d * len + s] as usize]).sum();
        }
    }
    *ops += (run * dom * len) as u64;
    out
}

fn run(
    layout: &CodeLayout,
    frozen: &[Vec<Option<u8>>],
    obs: &ChannelObservation,
    genie: Option<&[Vec<u8>]>,
) -> Pass {
    let (m, run_len, big_n) = (layout.users(), layout.run_len(), layout.block_len());
    let mut ops = 0u64;
    let joints = column_joints(layout, obs, &mut ops);
    let dom = 1usize << (m * layout.order.base_len());
    let seq = layout.order.sequence();
    let mut known_mask = 0usize;
    let mut known = vec![0usize; run_len];
    let mut u = vec![vec![0u8; big_n]; m];
    let mut pairs = vec![vec![[0.0; 2]; big_n]; m];
    for (p, &bit) in seq.iter().enumerate() {
        let llh: Vec<LlrPair> =
            (0..run_len).map(|c| marginal(&joints[c * dom..(c + 1) * dom], known_mask, known[c], bit)).collect();
        ops += (run_len * dom) as u64;
        let (j, t) = layout.owner(p);
        let block = t * run_len..(t + 1) * run_len;
        let pass = sc_decode(&llh, &frozen[j][block.clone()], genie.map(|g| &g[j][block.clone()]), &mut ops);
        u[j][block.clone()].copy_from_slice(&pass.u);
        pairs[j][block].copy_from_slice(&pass.pairs);
        for (k, &v) in known.iter_mut().zip(&pass.x) {
            *k |= (v as usize) << bit;
        }
        known_mask |= 1 << bit;
    }
    Pass { u, pairs, ops }
}

fn check_obs(spec: &MacPolarSpec, obs: &ChannelObservation) -> Result<()> {
    if obs.users() != spec.m || obs.len() != spec.block_len() {
        return Err(Error::Argument(format!(
            "observation has {} users x {} uses, code needs {} x {}",
            obs.users(),
            obs.len(),
            spec.m,
            spec.block_len()
        )));
    }
    Ok(())
}

/// Joint SC decoding; exact likelihood ties decide 0.
pub fn decode(spec: &MacPolarSpec, obs: &ChannelObservation) -> Result<DecodeResult> {
    check_obs(spec, obs)?;
    let pass = run(&spec.layout(), &spec.frozen_mask(), obs, None);
    let messages = spec.info_sets.iter().zip(&pass.u).map(|(info, uj)| info.iter().map(|&i| uj[i]).collect()).collect();
    let margins = pass.pairs.iter().map(|pj| pj.iter().map(|p| (p[0] - p[1]).abs()).collect()).collect();
    Ok(DecodeResult { messages, inputs: pass.u, margins, ops: pass.ops })
}

/// Genie-aided pass: every position continues with the true bit. Flags the
/// information positions whose local decision would have been wrong.
pub fn genie_decode(spec: &MacPolarSpec, obs: &ChannelObservation, inputs: &[Vec<u8>]) -> Result<Vec<Vec<bool>>> {
    check_obs(spec, obs)?;
    if inputs.len() != spec.m || inputs.iter().any(|u| u.len() != spec.block_len()) {
        return Err(Error::Argument("true inputs must be one length-N vector per user".into()));
    }
    let pairs = genie_pairs(&spec.layout(), &spec.frozen_mask(), obs, inputs);
    Ok(spec
        .info_sets
        .iter()
        .enumerate()
        .map(|(j, info)| {
            let mut flags = vec![false; spec.block_len()];
            for &i in info {
                flags[i] = decide(pairs[j][i]) != inputs[j][i];
            }
            flags
        })
        .collect())
}

/// Bit-channel likelihood pairs of a genie-aided pass, per user and index.
pub(crate) fn genie_pairs(
    layout: &CodeLayout,
    frozen: &[Vec<Option<u8>>],
    obs: &ChannelObservation,
    inputs: &[Vec<u8>],
) -> Vec<Vec<LlrPair>> {
    run(layout, frozen, obs, Some(inputs)).pairs
}

/// Likelihood pair of the bit at base position `p` for one block of `L`
/// channel uses, given the `p` bits decoded before it (in decoding order).
pub fn base_level_likelihood(order: &DecodingOrder, p: usize, block_obs: &[Vec<f64>], decided: &[u8]) -> Result<LlrPair> {
    let (m, len) = (order.users(), order.base_len());
    if p >= m * len || decided.len() != p {
        return Err(Error::Argument(format!("position {p} needs exactly {p} decided bits")));
    }
    if block_obs.len() != len || block_obs.iter().any(|r| r.len() != 1 << m) {
        return Err(Error::Argument(format!("block needs {len} rows of {} log-likelihoods", 1 << m)));
    }
    let combos = combinations(m, len);
    let col: Vec<f64> = (0..1usize << (m * len))
        .map(|d| (0..len).map(|s| block_obs[s][combos[d * len + s] as usize]).sum())
        .collect();
    let seq = order.sequence();
    let (mut mask, mut vals) = (0usize, 0usize);
    for (&bit, &b) in seq.iter().zip(decided) {
        mask |= 1 << bit;
        vals |= ((b & 1) as usize) << bit;
    }
    Ok(normalize(marginal(&col, mask, vals, seq[p])))
}
