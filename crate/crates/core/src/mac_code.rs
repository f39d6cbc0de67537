//! Length-`N` MAC polar codes built on a base code.
//!
//! Every user encodes with the plain `G^{(x)n}` transform. The decoding order
//! repeats each symbol of the base order as a run of `N/L`: run `p` decodes
//! block `t` (indices `t*N/L .. (t+1)*N/L`) of the user that owns base
//! position `p`, where `t` is that position's rank within its user. The
//! bit-channels of run `p` are the single-user bit-channels, at depth `n - l`,
//! of the base bit-channel at position `p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::base_code::{base_bit_channel, BaseJoint, DecodingOrder, RateEngine, DEFAULT_JOINT_BUDGET};
use crate::channel::{BinaryInputDMC, MacDMC, RateTuple};
use crate::decoder::{genie_pairs, ChannelObservation, MacSampler};
use crate::error::{Error, Result};
use crate::polar::{
    all_bit_channels, good_threshold, run_chunked, transform_in_place, trial_rng, Method, ZEstimate,
    DEFAULT_TABLE_BUDGET,
};

/// Default `beta` for threshold construction.
pub const DEFAULT_BETA: f64 = 0.45;

/// A base order with every symbol repeated `k` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedOrder {
    pub base: DecodingOrder,
    pub k: usize,
    pub word: Vec<u8>,
}

pub fn expand_order(order: &DecodingOrder, k: usize) -> Result<ExpandedOrder> {
    if k == 0 {
        return Err(Error::Argument("expansion factor must be at least 1".into()));
    }
    let word = order.word().iter().flat_map(|&j| std::iter::repeat_n(j, k)).collect();
    Ok(ExpandedOrder { base: order.clone(), k, word })
}

/// Mapping between global decoding positions and `(user, index)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeLayout {
    pub order: DecodingOrder,
    /// `N = 2^n`.
    pub n: usize,
    owners: Vec<(usize, usize)>,
    positions: Vec<Vec<usize>>,
}

impl CodeLayout {
    pub fn new(order: &DecodingOrder, n: usize) -> Result<Self> {
        let len = order.base_len();
        let l = len.trailing_zeros() as usize;
        if n < l || n > 40 {
            return Err(Error::Argument(format!("depth {n} must satisfy log2(L) = {l} <= n <= 40")));
        }
        let m = order.users();
        let mut seen = vec![0usize; m];
        let owners: Vec<(usize, usize)> = order
            .word()
            .iter()
            .map(|&j| {
                let t = seen[j as usize];
                seen[j as usize] += 1;
                (j as usize, t)
            })
            .collect();
        let mut positions = vec![vec![0; len]; m];
        for (p, &(j, t)) in owners.iter().enumerate() {
            positions[j][t] = p;
        }
        Ok(Self { order: order.clone(), n, owners, positions })
    }

    pub fn users(&self) -> usize {
        self.order.users()
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// `N / L`.
    pub fn run_len(&self) -> usize {
        self.block_len() / self.order.base_len()
    }

    /// Owner `(user, rank)` of base position `p`.
    pub fn owner(&self, p: usize) -> (usize, usize) {
        self.owners[p]
    }

    /// `(user, index in that user's input vector)` decoded at global position `g`.
    pub fn user_index(&self, g: usize) -> (usize, usize) {
        let (p, r) = (g / self.run_len(), g % self.run_len());
        let (j, t) = self.owners[p];
        (j, t * self.run_len() + r)
    }

    /// Global decoding position of index `i` of user `j`.
    pub fn global_position(&self, j: usize, i: usize) -> usize {
        let (t, r) = (i / self.run_len(), i % self.run_len());
        self.positions[j][t] * self.run_len() + r
    }

    /// Base position and outer index of `(user, index)`.
    pub fn base_position(&self, j: usize, i: usize) -> (usize, usize) {
        (self.positions[j][i / self.run_len()], i % self.run_len())
    }
}

/// Exact bit-channel of global decoding position `pos` for block length `2^n`,
/// summed straight from the joint law of all `mN` input bits.
///
/// Outputs are `(y_1^N, earlier decoded bits)`; only tiny codes fit the budget.
pub fn mac_bit_channel_exact(
    w: &MacDMC,
    order: &DecodingOrder,
    n: usize,
    pos: usize,
    budget: usize,
) -> Result<BinaryInputDMC> {
    let layout = CodeLayout::new(order, n)?;
    let (m, big_n) = (w.users(), layout.block_len());
    if order.users() != m {
        return Err(Error::Argument("order and channel disagree on the user count".into()));
    }
    let bits = m * big_n;
    if pos >= bits {
        return Err(Error::Argument(format!("position {pos} outside 0..{bits}")));
    }
    let y_count = (w.outputs() as u128).pow(big_n as u32);
    let work = y_count.saturating_mul(1u128 << bits.min(100));
    let outputs = y_count.saturating_mul(1u128 << pos);
    if bits > 24 || work > budget as u128 * 64 || outputs > budget as u128 {
        return Err(Error::Capacity(format!(
            "exact MAC bit-channel needs {outputs} outputs and {work} joint terms (budget {budget})"
        )));
    }
    let (y_count, outputs) = (y_count as usize, outputs as usize);
    // channel-use input combinations for every d (bit g = decoding position g)
    let mut combos = vec![0u16; (1 << bits) * big_n];
    let mut u = vec![vec![0u8; big_n]; m];
    for d in 0..1usize << bits {
        for g in 0..bits {
            let (j, i) = layout.user_index(g);
            u[j][i] = ((d >> g) & 1) as u8;
        }
        for (j, uj) in u.iter().enumerate() {
            let mut x = uj.clone();
            transform_in_place(&mut x);
            for (s, &b) in x.iter().enumerate() {
                combos[d * big_n + s] |= (b as u16) << (m - 1 - j);
            }
        }
    }
    let scale = 2.0 / (1u64 << bits) as f64;
    let prefix = (1usize << pos) - 1;
    let mut rows = [vec![0.0; outputs], vec![0.0; outputs]];
    let mut digits = vec![0usize; big_n];
    for y in 0..y_count {
        let mut rest = y;
        for s in (0..big_n).rev() {
            digits[s] = rest % w.outputs();
            rest /= w.outputs();
        }
        for d in 0..1usize << bits {
            let p: f64 = (0..big_n).map(|s| w.prob(combos[d * big_n + s] as usize, digits[s])).product();
            if p > 0.0 {
                rows[(d >> pos) & 1][(y << pos) | (d & prefix)] += scale * p;
            }
        }
    }
    let [a, b] = rows;
    Ok(BinaryInputDMC::from_rows(a, b))
}

/// How frozen bits are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenBits {
    Zeros,
    /// Uniform random values drawn from the given seed (one stream per user).
    Random { seed: u64 },
}

/// How information positions are selected from the reliabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// `Z < 2^{-N^beta} / (mN)`.
    Threshold,
    /// The `round(N R_j)` most reliable positions of every user `j`, with
    /// `R` the base-code rate tuple.
    TargetRates,
}

/// Construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    pub beta: f64,
    pub method: Method,
    pub selection: Selection,
    pub frozen: FrozenBits,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            method: Method::Exact { budget: DEFAULT_TABLE_BUDGET },
            selection: Selection::Threshold,
            frozen: FrozenBits::Zeros,
        }
    }
}

/// A fully specified MAC polar code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacPolarSpec {
    pub m: usize,
    pub base_len: usize,
    pub order: DecodingOrder,
    pub n: usize,
    /// Sorted 0-based information positions in every user's input vector.
    pub info_sets: Vec<Vec<usize>>,
    pub frozen: FrozenBits,
    pub beta: f64,
    pub method: Method,
    pub selection: Selection,
    /// Bhattacharyya estimates per user and input index, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_estimates: Option<Vec<Vec<ZEstimate>>>,
}

impl MacPolarSpec {
    /// A code with explicitly given information sets.
    pub fn with_info_sets(order: &DecodingOrder, n: usize, info_sets: Vec<Vec<usize>>, frozen: FrozenBits) -> Result<Self> {
        let layout = CodeLayout::new(order, n)?;
        if info_sets.len() != order.users() {
            return Err(Error::Argument("one information set per user is required".into()));
        }
        let mut sets = info_sets;
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
            if s.last().is_some_and(|&i| i >= layout.block_len()) {
                return Err(Error::Argument("information index outside the block".into()));
            }
        }
        Ok(Self {
            m: order.users(),
            base_len: order.base_len(),
            order: order.clone(),
            n,
            info_sets: sets,
            frozen,
            beta: DEFAULT_BETA,
            method: Method::Exact { budget: DEFAULT_TABLE_BUDGET },
            selection: Selection::Threshold,
            z_estimates: None,
        })
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn layout(&self) -> CodeLayout {
        CodeLayout::new(&self.order, self.n).expect("validated at construction")
    }

    /// Achieved per-user rates `|info_j| / N`.
    pub fn rates(&self) -> Vec<f64> {
        self.info_sets.iter().map(|s| s.len() as f64 / self.block_len() as f64).collect()
    }

    /// Full-length frozen vectors (entries at information positions are 0).
    pub fn frozen_values(&self) -> Vec<Vec<u8>> {
        let big_n = self.block_len();
        (0..self.m)
            .map(|j| {
                let mut v = match self.frozen {
                    FrozenBits::Zeros => vec![0u8; big_n],
                    FrozenBits::Random { seed } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(j as u64);
                        (0..big_n).map(|_| rng.random::<bool>() as u8).collect()
                    }
                };
                for &i in &self.info_sets[j] {
                    v[i] = 0;
                }
                v
            })
            .collect()
    }

    /// Per-user `Option` mask: `Some(value)` at frozen positions.
    pub fn frozen_mask(&self) -> Vec<Vec<Option<u8>>> {
        self.frozen_values()
            .into_iter()
            .zip(&self.info_sets)
            .map(|(vals, info)| {
                let mut mask: Vec<Option<u8>> = vals.into_iter().map(Some).collect();
                for &i in info {
                    mask[i] = None;
                }
                mask
            })
            .collect()
    }

    /// Union bound using the stored estimates.
    pub fn union_bound(&self) -> Option<f64> {
        self.z_estimates.as_ref().map(|z| fer_union_bound(self, z))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let check = Self::with_info_sets(&spec.order, spec.n, spec.info_sets.clone(), spec.frozen)?;
        if check.info_sets != spec.info_sets || spec.m != check.m || spec.base_len != check.base_len {
            return Err(Error::Validation("spec fields are inconsistent with its order".into()));
        }
        Ok(spec)
    }
}

/// Bhattacharyya estimates for every user and input index of a length-`2^n`
/// code on `w`.
pub fn code_reliabilities(w: &MacDMC, order: &DecodingOrder, n: usize, method: Method) -> Result<Vec<Vec<ZEstimate>>> {
    let layout = CodeLayout::new(order, n)?;
    let (m, big_n, run) = (w.users(), layout.block_len(), layout.run_len());
    if order.users() != m {
        return Err(Error::Argument("order and channel disagree on the user count".into()));
    }
    let mut z = vec![vec![ZEstimate::exact(1.0); big_n]; m];
    match method {
        Method::Exact { budget } => {
            let joint = BaseJoint::new(w, order.base_len(), DEFAULT_JOINT_BUDGET)?;
            let outer = run.trailing_zeros() as usize;
            for p in 0..order.word().len() {
                let base = base_bit_channel(&joint, order, p, true, budget)?;
                let (j, t) = layout.owner(p);
                for (r, ch) in all_bit_channels(&base, outer, budget)?.iter().enumerate() {
                    z[j][t * run + r] = ZEstimate::exact(ch.bhattacharyya());
                }
            }
        }
        Method::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Argument("Monte Carlo construction needs at least one trial".into()));
            }
            let sampler = MacSampler::new(w);
            let all_free = vec![vec![None; big_n]; m];
            let acc = run_chunked(m * big_n, trials, |t, acc| {
                let mut rng = trial_rng(seed, t);
                let u: Vec<Vec<u8>> =
                    (0..m).map(|_| (0..big_n).map(|_| rng.random::<bool>() as u8).collect()).collect();
                let ys = sampler.transmit(&encode_inputs(&u), &mut rng);
                let obs = ChannelObservation::from_symbols(w, &ys);
                let pairs = genie_pairs(&layout, &all_free, &obs, &u);
                let flat_pairs: Vec<_> = pairs.concat();
                acc.push(&flat_pairs, &u.concat());
            });
            for (k, e) in acc.estimates().into_iter().enumerate() {
                z[k / big_n][k % big_n] = e;
            }
        }
    }
    Ok(z)
}

/// Builds a code: reliabilities per position, then per-user information sets.
pub fn construct(w: &MacDMC, order: &DecodingOrder, n: usize, opts: &ConstructOptions) -> Result<MacPolarSpec> {
    if !(opts.beta > 0.0 && opts.beta < 0.5) {
        return Err(Error::Argument(format!("beta {} outside (0, 1/2)", opts.beta)));
    }
    let z = code_reliabilities(w, order, n, opts.method)?;
    let (m, big_n) = (w.users(), 1usize << n);
    let info_sets: Vec<Vec<usize>> = match opts.selection {
        Selection::Threshold => {
            let thr = good_threshold(n, opts.beta, m * big_n);
            z.iter()
                .map(|zj| zj.iter().enumerate().filter(|(_, e)| e.value < thr).map(|(i, _)| i).collect())
                .collect()
        }
        Selection::TargetRates => {
            let target = RateEngine::new(w, order.base_len())?.rate_tuple(order);
            z.iter()
                .zip(target.rates())
                .map(|(zj, &r)| {
                    let k = ((big_n as f64 * r).round() as usize).min(big_n);
                    let mut idx: Vec<usize> = (0..big_n).collect();
                    idx.sort_by(|&a, &b| zj[a].value.total_cmp(&zj[b].value).then(a.cmp(&b)));
                    idx.truncate(k);
                    idx
                })
                .collect()
        }
    };
    let mut spec = MacPolarSpec::with_info_sets(order, n, info_sets, opts.frozen)?;
    spec.beta = opts.beta;
    spec.method = opts.method;
    spec.selection = opts.selection;
    spec.z_estimates = Some(z);
    Ok(spec)
}

/// Per-user codewords `x_j = u_j G^{(x)n}`.
pub(crate) fn encode_inputs(u: &[Vec<u8>]) -> Vec<Vec<u8>> {
    u.iter()
        .map(|uj| {
            let mut x = uj.clone();
            transform_in_place(&mut x);
            x
        })
        .collect()
}

/// Input vectors with messages scattered into the information positions.
pub fn input_vectors(spec: &MacPolarSpec, messages: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    if messages.len() != spec.m {
        return Err(Error::Argument(format!("{} messages for {} users", messages.len(), spec.m)));
    }
    let mut u = spec.frozen_values();
    for (j, (msg, info)) in messages.iter().zip(&spec.info_sets).enumerate() {
        if msg.len() != info.len() {
            return Err(Error::Argument(format!(
                "user {} message has {} bits, information set has {}",
                j + 1,
                msg.len(),
                info.len()
            )));
        }
        for (&i, &b) in info.iter().zip(msg) {
            u[j][i] = b & 1;
        }
    }
    Ok(u)
}

/// Encodes every user's message independently.
pub fn encode(spec: &MacPolarSpec, messages: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    Ok(encode_inputs(&input_vectors(spec, messages)?))
}

/// Sum of the Bhattacharyya parameters of all selected positions.
pub fn fer_union_bound(spec: &MacPolarSpec, z: &[Vec<ZEstimate>]) -> f64 {
    spec.info_sets
        .iter()
        .zip(z)
        .map(|(info, zj)| info.iter().map(|&i| zj[i].value).sum::<f64>())
        .sum()
}

/// Per-position triple of the two-user comparison channel built from `wp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyTriple {
    /// `I(U_i; Y, U_1^{i-1}, V_1^i)`.
    pub i1: f64,
    /// `I(V_i; Y, U_1^i, V_1^{i-1})`.
    pub i2: f64,
    /// `I(U_i, V_i; Y, U_1^{i-1}, V_1^{i-1})`.
    pub isum: f64,
}

/// Triples of the pairwise polar transform of length `2^n` on the MAC
/// `derived_two_user_mac(wp)`, which is the single-user transform of length
/// `2^{n+1}` on `wp` with `(u_i, v_i)` at positions `(2i, 2i+1)`.
pub fn sty_comparison_profile(wp: &BinaryInputDMC, n: usize, budget: usize) -> Result<Vec<StyTriple>> {
    let half = all_bit_channels(wp, n, budget)?;
    let full = all_bit_channels(wp, n + 1, budget)?;
    Ok(half
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let minus = full[2 * i].mutual_information();
            let plus = full[2 * i + 1].mutual_information();
            // with v_i known, u_i sees one copy of the depth-n channel
            StyTriple { i1: ch.mutual_information(), i2: plus, isum: minus + plus }
        })
        .collect())
}

/// Rate tuple targeted by a spec's order on `w`.
pub fn target_rates(w: &MacDMC, spec: &MacPolarSpec) -> Result<RateTuple> {
    Ok(RateEngine::new(w, spec.base_len)?.rate_tuple(&spec.order))
}
