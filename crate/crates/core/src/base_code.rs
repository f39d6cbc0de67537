//! Decoding orders of a length-`L` base code and the rate tuples they
//! achieve.
//!
//! An order is stored as its user word: position `p` of the decoding sequence
//! holds the (0-based) user whose next input bit is decoded there. Within a
//! user the bits are always decoded in their natural order, so the word
//! determines the permutation uniquely.
//!
//! Base-domain bit `j * L + t` is bit `t` of user `j`'s length-`L` input.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{entropy, BinaryInputDMC, MacDMC, RateTuple, RegionConstraints, UserSet};
use crate::error::{Error, Result};
use crate::polar::{transform_word, DEFAULT_TABLE_BUDGET, MERGE_TOL};

/// Default cap on the number of enumerated orders.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000;

/// Default cap on `|Y|^L * 2^{mL}` entries of the base-code joint table.
pub const DEFAULT_JOINT_BUDGET: usize = 1 << 24;

/// A decoding order of the `mL` base-code input bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecodingOrder {
    m: usize,
    len: usize,
    word: Vec<u8>,
}

impl DecodingOrder {
    /// `word` lists 0-based users; every user must appear exactly `len` times
    /// and `len` must be a power of two.
    pub fn new(m: usize, len: usize, word: Vec<u8>) -> Result<Self> {
        if m == 0 || m > crate::channel::MAX_USERS {
            return Err(Error::Argument(format!("user count {m} out of range")));
        }
        if !len.is_power_of_two() {
            return Err(Error::Argument(format!("base length {len} is not a power of two")));
        }
        if word.len() != m * len {
            return Err(Error::Argument(format!("word has {} symbols, expected {}", word.len(), m * len)));
        }
        let mut counts = vec![0usize; m];
        for &j in &word {
            let slot = counts
                .get_mut(j as usize)
                .ok_or_else(|| Error::Argument(format!("user {} outside 1..={m}", j as usize + 1)))?;
            *slot += 1;
        }
        if counts.iter().any(|&c| c != len) {
            return Err(Error::Argument(format!("every user must appear {len} times, got {counts:?}")));
        }
        Ok(Self { m, len, word })
    }

    /// Users decoded one after another, each for its whole block.
    pub fn sequential(len: usize, user_order: &[usize]) -> Result<Self> {
        let word = user_order.iter().flat_map(|&j| std::iter::repeat_n(j as u8, len)).collect();
        Self::new(user_order.len(), len, word)
    }

    /// Parses a comma-separated list of 1-based users, e.g. `"1,2,3,1,2,3"`.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let word = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&j| (1..=m).contains(&j))
                    .map(|j| (j - 1) as u8)
                    .ok_or_else(|| Error::Parse(format!("bad user `{s}` in order `{text}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if word.len() % m != 0 {
            return Err(Error::Parse(format!("order `{text}` length is not a multiple of {m}")));
        }
        Self::new(m, word.len() / m, word)
    }

    /// Builds an order from a permutation: `perm[j * L + t]` is the 0-based
    /// decoding position of bit `t` of user `j`.
    pub fn from_permutation(m: usize, len: usize, perm: &[usize]) -> Result<Self> {
        if perm.len() != m * len {
            return Err(Error::Argument("permutation has the wrong length".into()));
        }
        let mut word = vec![u8::MAX; m * len];
        for (i, &p) in perm.iter().enumerate() {
            if p >= word.len() || word[p] != u8::MAX {
                return Err(Error::Argument(format!("{perm:?} is not a permutation")));
            }
            word[p] = (i / len) as u8;
        }
        let order = Self::new(m, len, word)?;
        if order.permutation() != perm {
            return Err(Error::Argument("permutation breaks the within-user bit order".into()));
        }
        Ok(order)
    }

    pub fn users(&self) -> usize {
        self.m
    }

    /// Base length `L`.
    pub fn base_len(&self) -> usize {
        self.len
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// `perm[j * L + t]` = decoding position of bit `t` of user `j`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm = vec![0; self.word.len()];
        for (p, bit) in self.sequence().into_iter().enumerate() {
            perm[bit] = p;
        }
        perm
    }

    /// Base-domain bit decoded at each position.
    pub fn sequence(&self) -> Vec<usize> {
        let mut seen = vec![0usize; self.m];
        self.word
            .iter()
            .map(|&j| {
                let t = seen[j as usize];
                seen[j as usize] += 1;
                j as usize * self.len + t
            })
            .collect()
    }

    /// Decoding positions owned by user `j`.
    pub fn user_positions(&self, j: usize) -> Vec<usize> {
        self.word.iter().enumerate().filter(|(_, &u)| u as usize == j).map(|(p, _)| p).collect()
    }

    /// Positions `p` with user `j1` at `p` and user `j2` at `p + 1`.
    pub fn adjacencies(&self, j1: usize, j2: usize) -> Vec<usize> {
        self.word
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] as usize == j1 && w[1] as usize == j2)
            .map(|(p, _)| p)
            .collect()
    }

    fn swapped(&self, p: usize) -> Self {
        let mut word = self.word.clone();
        word.swap(p, p + 1);
        Self { m: self.m, len: self.len, word }
    }
}

impl fmt::Display for DecodingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.word.iter().map(|&j| (j as usize + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for DecodingOrder {
    type Err = Error;

    /// Parses with the user count taken from the largest user present.
    fn from_str(s: &str) -> Result<Self> {
        let m = s
            .split(',')
            .filter_map(|t| t.trim().parse::<usize>().ok())
            .max()
            .ok_or_else(|| Error::Parse(format!("empty order `{s}`")))?;
        Self::parse(s, m)
    }
}

impl Serialize for DecodingOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DecodingOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(mL)! / (L!)^m`.
pub fn order_count(m: usize, len: usize) -> u128 {
    let mut count: u128 = 1;
    let mut placed = 0u128;
    for _ in 0..m {
        for k in 1..=len as u128 {
            placed += 1;
            count = count * placed / k;
        }
    }
    count
}

/// Every decoding order, in lexicographic order of the user word.
pub fn enumerate_orders(m: usize, len: usize, budget: u128) -> Result<Vec<DecodingOrder>> {
    if !len.is_power_of_two() || m == 0 {
        return Err(Error::Argument(format!("need m >= 1 and a power-of-two base length, got {m}, {len}")));
    }
    let total = order_count(m, len);
    if total > budget {
        return Err(Error::Capacity(format!(
            "{total} orders exceed the enumeration budget of {budget}; use local search"
        )));
    }
    fn fill(word: &mut Vec<u8>, left: &mut [usize], out: &mut Vec<Vec<u8>>, target: usize) {
        if word.len() == target {
            out.push(word.clone());
            return;
        }
        for j in 0..left.len() {
            if left[j] > 0 {
                left[j] -= 1;
                word.push(j as u8);
                fill(word, left, out, target);
                word.pop();
                left[j] += 1;
            }
        }
    }
    let mut words = Vec::with_capacity(total as usize);
    fill(&mut Vec::with_capacity(m * len), &mut vec![len; m], &mut words, m * len);
    Ok(words.into_iter().map(|word| DecodingOrder { m, len, word }).collect())
}

/// The joint law `p(y_1^L | d)` of the base code: each user's `L` input bits
/// pass through `G^{(x)l}` and the `L` channel uses are independent.
#[derive(Debug, Clone)]
pub struct BaseJoint {
    m: usize,
    len: usize,
    outputs: usize,
    y_count: usize,
    /// `table[y * 2^{mL} + d]`.
    table: Vec<f64>,
}

impl BaseJoint {
    pub fn new(w: &MacDMC, len: usize, budget: usize) -> Result<Self> {
        let m = w.users();
        if !len.is_power_of_two() {
            return Err(Error::Argument(format!("base length {len} is not a power of two")));
        }
        let bits = m * len;
        let y_count = (w.outputs() as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        let entries = y_count.saturating_mul(1u128 << bits.min(100));
        if bits > 24 || entries > budget as u128 {
            return Err(Error::Capacity(format!(
                "base-code joint table needs {entries} entries (budget {budget})"
            )));
        }
        let y_count = y_count as usize;
        let inputs = 1usize << bits;
        let combos = combinations(m, len);
        let mut table = vec![0.0; y_count * inputs];
        let mut digits = vec![0usize; len];
        for y in 0..y_count {
            let mut rest = y;
            for s in (0..len).rev() {
                digits[s] = rest % w.outputs();
                rest /= w.outputs();
            }
            let row = &mut table[y * inputs..(y + 1) * inputs];
            for (d, slot) in row.iter_mut().enumerate() {
                let cs = &combos[d * len..(d + 1) * len];
                *slot = cs.iter().zip(&digits).map(|(&c, &ys)| w.prob(c as usize, ys)).product();
            }
        }
        Ok(Self { m, len, outputs: w.outputs(), y_count, table })
    }

    pub fn users(&self) -> usize {
        self.m
    }

    pub fn base_len(&self) -> usize {
        self.len
    }

    /// Number of distinct `y_1^L`.
    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn single_outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, y: usize) -> &[f64] {
        let inputs = 1 << (self.m * self.len);
        &self.table[y * inputs..(y + 1) * inputs]
    }

    /// `I(D_S; Y_1^L)` for the base-domain bit set `mask`.
    pub fn information(&self, mask: usize) -> f64 {
        let bits = self.m * self.len;
        let inputs = 1usize << bits;
        let kept = mask.count_ones() as usize;
        // compress d & mask into 0..2^kept
        let index: Vec<usize> = (0..inputs).map(|d| pext(d, mask)).collect();
        let scale = 1.0 / inputs as f64;
        let mut cell = vec![0.0; 1 << kept];
        let mut h_y = 0.0;
        let mut h_yd = 0.0;
        for y in 0..self.y_count {
            cell.iter_mut().for_each(|c| *c = 0.0);
            let mut py = 0.0;
            for (d, &p) in self.row(y).iter().enumerate() {
                cell[index[d]] += p;
                py += p;
            }
            h_y -= crate::channel::plogp(py * scale);
            h_yd += entropy(&cell.iter().map(|c| c * scale).collect::<Vec<_>>());
        }
        (h_y + kept as f64 - h_yd).max(0.0)
    }
}

/// Channel-use input combinations for every base-domain input `d`:
/// `out[d * L + s]` is the combination index sent on use `s`.
pub(crate) fn combinations(m: usize, len: usize) -> Vec<u16> {
    let bits = m * len;
    let user_mask = (1usize << len) - 1;
    let xs: Vec<usize> = (0..1usize << len).map(|u| transform_word(u, len)).collect();
    let mut out = vec![0u16; (1usize << bits) * len];
    for d in 0..1usize << bits {
        for j in 0..m {
            let x = xs[(d >> (j * len)) & user_mask];
            for s in 0..len {
                out[d * len + s] |= (((x >> s) & 1) << (m - 1 - j)) as u16;
            }
        }
    }
    out
}

/// Packs the bits of `value` selected by `mask` into the low bits.
pub(crate) fn pext(value: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let b = m.trailing_zeros();
        out |= ((value >> b) & 1) << k;
        k += 1;
        m &= m - 1;
    }
    out
}

/// Chain-rule terms `I(D_{pi^{-1}(i)}; Y_1^L, earlier bits)` of an order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleProfile {
    pub terms: Vec<f64>,
}

/// The `mL` binary-input bit-channels of the base code under an order.
#[derive(Debug, Clone)]
pub struct BaseBitChannels {
    pub channels: Vec<BinaryInputDMC>,
}

/// Bit-channel at decoding position `p`: outputs are `(y_1^L, earlier bits)`.
pub fn base_bit_channel(
    joint: &BaseJoint,
    order: &DecodingOrder,
    p: usize,
    merge: bool,
    budget: usize,
) -> Result<BinaryInputDMC> {
    check_order(joint, order)?;
    let outputs = joint.y_count.saturating_mul(1 << p);
    if outputs > budget {
        return Err(Error::Capacity(format!("bit-channel {p} needs {outputs} outputs (budget {budget})")));
    }
    let bits = joint.m * joint.len;
    let inputs = 1usize << bits;
    let seq = order.sequence();
    // d rewritten in decoding order: bit q holds the bit decoded at position q
    let code: Vec<usize> = (0..inputs)
        .map(|d| seq.iter().enumerate().map(|(q, &b)| ((d >> b) & 1) << q).sum())
        .collect();
    let prefix_mask = (1usize << p) - 1;
    let mut rows = [vec![0.0; outputs], vec![0.0; outputs]];
    let scale = 2.0 / inputs as f64;
    for y in 0..joint.y_count {
        for (d, &prob) in joint.row(y).iter().enumerate() {
            let c = code[d];
            rows[(c >> p) & 1][(y << p) | (c & prefix_mask)] += scale * prob;
        }
    }
    let [a, b] = rows;
    let ch = BinaryInputDMC::from_rows(a, b);
    Ok(if merge { ch.canonical(MERGE_TOL) } else { ch })
}

fn check_order(joint: &BaseJoint, order: &DecodingOrder) -> Result<()> {
    if order.m != joint.m || order.len != joint.len {
        return Err(Error::Argument(format!(
            "order for (m={}, L={}) used with a base code of (m={}, L={})",
            order.m, order.len, joint.m, joint.len
        )));
    }
    Ok(())
}

/// All base bit-channels of `w` under `order`, merged to canonical form.
pub fn base_bit_channels(w: &MacDMC, order: &DecodingOrder) -> Result<BaseBitChannels> {
    let joint = BaseJoint::new(w, order.len, DEFAULT_JOINT_BUDGET)?;
    base_bit_channels_from(&joint, order)
}

pub fn base_bit_channels_from(joint: &BaseJoint, order: &DecodingOrder) -> Result<BaseBitChannels> {
    let channels = (0..order.word.len())
        .map(|p| base_bit_channel(joint, order, p, true, DEFAULT_TABLE_BUDGET))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaseBitChannels { channels })
}

/// Chain-rule profile computed from the bit-channel tables.
pub fn chain_profile(w: &MacDMC, order: &DecodingOrder) -> Result<ChainRuleProfile> {
    let joint = BaseJoint::new(w, order.len, DEFAULT_JOINT_BUDGET)?;
    chain_profile_from(&joint, order)
}

pub fn chain_profile_from(joint: &BaseJoint, order: &DecodingOrder) -> Result<ChainRuleProfile> {
    let ch = base_bit_channels_from(joint, order)?;
    Ok(ChainRuleProfile { terms: ch.channels.iter().map(BinaryInputDMC::mutual_information).collect() })
}

/// `R_j = (1/L) * sum of the terms at positions owned by user j`.
pub fn rates_from_profile(order: &DecodingOrder, profile: &ChainRuleProfile) -> RateTuple {
    let mut r = vec![0.0; order.m];
    for (&j, &t) in order.word.iter().zip(&profile.terms) {
        r[j as usize] += t / order.len as f64;
    }
    RateTuple::from_vec(r)
}

/// Rate tuple of an order, from exact bit-channel tables.
pub fn rate_tuple(w: &MacDMC, order: &DecodingOrder) -> Result<RateTuple> {
    Ok(rates_from_profile(order, &chain_profile(w, order)?))
}

/// Swaps the `occurrence`-th adjacency where a bit of `j1` is decoded right
/// before a bit of `j2` (users are 0-based).
pub fn transpose(order: &DecodingOrder, j1: usize, j2: usize, occurrence: usize) -> Result<DecodingOrder> {
    if j1 == j2 {
        return Err(Error::Precondition("a transposition needs two distinct users".into()));
    }
    let adj = order.adjacencies(j1, j2);
    let p = *adj.get(occurrence).ok_or_else(|| {
        Error::Precondition(format!(
            "user {} is never decoded right before user {} (occurrence {occurrence}, found {})",
            j1 + 1,
            j2 + 1,
            adj.len()
        ))
    })?;
    Ok(order.swapped(p))
}

/// Users reachable from `j` through chains of `a -> b` adjacencies (a != b).
pub fn reachable(order: &DecodingOrder, j: usize) -> UserSet {
    let mut edges = vec![0u32; order.m];
    for w in order.word.windows(2) {
        if w[0] != w[1] {
            edges[w[0] as usize] |= 1 << w[1];
        }
    }
    let mut seen = edges[j];
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        for k in UserSet(frontier).users() {
            next |= edges[k] & !seen;
        }
        seen |= next;
        frontier = next;
    }
    UserSet(seen)
}

/// Rate tuples of arbitrary orders from prefix-set mutual informations
/// `I(D_S; Y_1^L)`, where `S` holds the first `a_j` bits of every user `j`.
///
/// All `(L+1)^m` prefix sets are evaluated up front.
#[derive(Debug, Clone)]
pub struct RateEngine {
    m: usize,
    len: usize,
    prefix_info: Vec<f64>,
    pub constraints: RegionConstraints,
}

impl RateEngine {
    pub fn new(w: &MacDMC, len: usize) -> Result<Self> {
        let constraints = crate::channel::region_constraints(w)?;
        let joint = BaseJoint::new(w, len, DEFAULT_JOINT_BUDGET)?;
        Ok(Self::from_joint(&joint, constraints))
    }

    pub fn from_joint(joint: &BaseJoint, constraints: RegionConstraints) -> Self {
        let (m, len) = (joint.m, joint.len);
        let sets = (len + 1).pow(m as u32);
        let prefix_info = (0..sets)
            .into_par_iter()
            .map(|key| {
                let mut mask = 0usize;
                let mut rest = key;
                for j in 0..m {
                    let a = rest % (len + 1);
                    rest /= len + 1;
                    mask |= ((1usize << a) - 1) << (j * len);
                }
                joint.information(mask)
            })
            .collect();
        Self { m, len, prefix_info, constraints }
    }

    pub fn users(&self) -> usize {
        self.m
    }

    pub fn base_len(&self) -> usize {
        self.len
    }

    fn key(&self, counts: &[usize]) -> usize {
        counts.iter().rev().fold(0, |acc, &a| acc * (self.len + 1) + a)
    }

    /// Chain-rule terms as differences of prefix informations.
    pub fn profile(&self, order: &DecodingOrder) -> ChainRuleProfile {
        let mut counts = vec![0usize; self.m];
        let mut prev = 0.0;
        let terms = order
            .word
            .iter()
            .map(|&j| {
                counts[j as usize] += 1;
                let cur = self.prefix_info[self.key(&counts)];
                let t = cur - prev;
                prev = cur;
                t
            })
            .collect();
        ChainRuleProfile { terms }
    }

    pub fn rate_tuple(&self, order: &DecodingOrder) -> RateTuple {
        rates_from_profile(order, &self.profile(order))
    }
}

/// Search strategy for [`nearest_order`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchMode {
    /// Every order; ties go to the lexicographically smallest word.
    Exhaustive { budget: u128 },
    /// Steepest descent over adjacent transpositions, started from the best
    /// sequential (corner) order and from `restarts` random orders.
    Local { restarts: usize, seed: u64 },
}

/// Order whose rate tuple is closest to `q`, with the Euclidean distance.
pub fn nearest_order(engine: &RateEngine, q: &RateTuple, mode: SearchMode) -> Result<(DecodingOrder, f64)> {
    if q.rates().len() != engine.m {
        return Err(Error::Argument(format!("rate tuple has {} entries, expected {}", q.rates().len(), engine.m)));
    }
    match mode {
        SearchMode::Exhaustive { budget } => {
            let orders = enumerate_orders(engine.m, engine.len, budget)?;
            let mut best: Option<(DecodingOrder, f64)> = None;
            for o in orders {
                let d = engine.rate_tuple(&o).distance(q);
                if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    best = Some((o, d));
                }
            }
            Ok(best.expect("at least one order"))
        }
        SearchMode::Local { restarts, seed } => {
            let mut best = local_descent(engine, q, best_corner(engine, q)?);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..restarts {
                let mut word: Vec<u8> =
                    (0..engine.m).flat_map(|j| std::iter::repeat_n(j as u8, engine.len)).collect();
                word.shuffle(&mut rng);
                let start = DecodingOrder { m: engine.m, len: engine.len, word };
                let cand = local_descent(engine, q, start);
                if cand.1 < best.1 || (cand.1 == best.1 && cand.0 < best.0) {
                    best = cand;
                }
            }
            Ok(best)
        }
    }
}

fn best_corner(engine: &RateEngine, q: &RateTuple) -> Result<DecodingOrder> {
    let mut users: Vec<usize> = (0..engine.m).collect();
    let mut best: Option<(DecodingOrder, f64)> = None;
    loop {
        let o = DecodingOrder::sequential(engine.len, &users)?;
        let d = engine.rate_tuple(&o).distance(q);
        if best.as_ref().is_none_or(|(bo, bd)| d < *bd || (d == *bd && o < *bo)) {
            best = Some((o, d));
        }
        if !next_permutation(&mut users) {
            break;
        }
    }
    Ok(best.unwrap().0)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn local_descent(engine: &RateEngine, q: &RateTuple, start: DecodingOrder) -> (DecodingOrder, f64) {
    let mut cur_d = engine.rate_tuple(&start).distance(q);
    let mut cur = start;
    loop {
        let mut best: Option<(DecodingOrder, f64)> = None;
        for p in 0..cur.word.len() - 1 {
            if cur.word[p] == cur.word[p + 1] {
                continue;
            }
            let cand = cur.swapped(p);
            let d = engine.rate_tuple(&cand).distance(q);
            if d < cur_d && best.as_ref().is_none_or(|(bo, bd)| d < *bd || (d == *bd && cand < *bo)) {
                best = Some((cand, d));
            }
        }
        match best {
            Some((o, d)) => {
                cur = o;
                cur_d = d;
            }
            None => return (cur, cur_d),
        }
    }
}

/// Outcome of a covering-radius experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub m: usize,
    pub base_len: usize,
    pub samples: usize,
    /// Largest nearest-order distance over the sampled face points.
    pub radius: f64,
    /// `(m - 1) sqrt(m) / L`.
    pub bound: f64,
    /// Largest `|Q_j - R_j|` at the minimizing orders.
    pub max_coordinate_gap: f64,
    /// `(m - 1) / L`.
    pub coordinate_bound: f64,
    pub argmax_point: Vec<f64>,
    pub argmax_order: String,
}

/// Max over sampled face points of the distance to the nearest base-code rate
/// tuple, found by exhaustive search.
pub fn covering_radius_estimate(
    engine: &RateEngine,
    samples: usize,
    seed: u64,
    budget: u128,
) -> Result<CoverReport> {
    let (m, len) = (engine.m, engine.len);
    let orders = enumerate_orders(m, len, budget)?;
    let rates: Vec<RateTuple> = orders.iter().map(|o| engine.rate_tuple(o)).collect();
    let points = engine.constraints.sample_dominant_face(samples, seed, crate::channel::DEFAULT_SAMPLING_ATTEMPTS)?;
    let mut report = CoverReport {
        m,
        base_len: len,
        samples,
        radius: 0.0,
        bound: (m as f64 - 1.0) * (m as f64).sqrt() / len as f64,
        max_coordinate_gap: 0.0,
        coordinate_bound: (m as f64 - 1.0) / len as f64,
        argmax_point: Vec::new(),
        argmax_order: String::new(),
    };
    for q in &points {
        let (k, d) = rates
            .iter()
            .enumerate()
            .map(|(k, r)| (k, r.distance(q)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        report.max_coordinate_gap = report.max_coordinate_gap.max(rates[k].max_gap(q));
        if d > report.radius || report.argmax_point.is_empty() {
            report.radius = d;
            report.argmax_point = q.rates().to_vec();
            report.argmax_order = orders[k].to_string();
        }
    }
    Ok(report)
}

/// Prefix informations keyed by count vectors, for callers that want to
/// inspect them directly.
pub fn prefix_informations(engine: &RateEngine) -> HashMap<Vec<usize>, f64> {
    let mut out = HashMap::new();
    for key in 0..engine.prefix_info.len() {
        let mut counts = Vec::with_capacity(engine.m);
        let mut rest = key;
        for _ in 0..engine.m {
            counts.push(rest % (engine.len + 1));
            rest /= engine.len + 1;
        }
        out.insert(counts, engine.prefix_info[key]);
    }
    out
}
