//! Binary-input channels, m-user binary-input MACs and the geometry of
//! their uniform rate regions.
//!
//! All information quantities are in bits and assume independent uniform
//! inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Row-sum tolerance for probability tables.
pub const PROB_TOL: f64 = 1e-12;

/// Largest user count accepted by [`region_constraints`] by default.
pub const DEFAULT_SUBSET_LIMIT: usize = 6;

/// Largest number of users representable in a [`UserSet`].
pub const MAX_USERS: usize = 16;

#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a (not necessarily normalized) mass vector.
pub(crate) fn entropy(masses: &[f64]) -> f64 {
    -masses.iter().copied().map(plogp).sum::<f64>()
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for &p in row {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!("{what}: entry {p} is not a probability")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Validation(format!("{what}: row sums to {sum}, expected 1")));
    }
    Ok(())
}

/// A binary-input discrete memoryless channel given by its transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryInputDMC {
    probs: [Vec<f64>; 2],
}

impl BinaryInputDMC {
    /// Builds a channel from the rows `p(.|0)` and `p(.|1)`.
    pub fn new(given0: Vec<f64>, given1: Vec<f64>) -> Result<Self> {
        if given0.is_empty() || given0.len() != given1.len() {
            return Err(Error::Validation(format!(
                "rows must be nonempty and of equal length (got {} and {})",
                given0.len(),
                given1.len()
            )));
        }
        check_row(&given0, "p(y|0)")?;
        check_row(&given1, "p(y|1)")?;
        Ok(Self { probs: [given0, given1] })
    }

    /// Trusted constructor for tables produced by exact internal arithmetic.
    pub(crate) fn from_rows(given0: Vec<f64>, given1: Vec<f64>) -> Self {
        debug_assert_eq!(given0.len(), given1.len());
        Self { probs: [given0, given1] }
    }

    /// Binary erasure channel with erasure probability `eps`. Output 2 is the erasure.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Argument(format!("erasure probability {eps} outside [0,1]")));
        }
        Ok(Self::from_rows(vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]))
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("crossover probability {p} outside [0,1]")));
        }
        Ok(Self::from_rows(vec![1.0 - p, p], vec![p, 1.0 - p]))
    }

    /// The two-output identity channel.
    pub fn noiseless() -> Self {
        Self::from_rows(vec![1.0, 0.0], vec![0.0, 1.0])
    }

    pub fn outputs(&self) -> usize {
        self.probs[0].len()
    }

    /// `p(y | x)`.
    #[inline]
    pub fn prob(&self, x: u8, y: usize) -> f64 {
        self.probs[x as usize][y]
    }

    pub fn row(&self, x: u8) -> &[f64] {
        &self.probs[x as usize]
    }

    /// Symmetric capacity `I(X;Y)` with uniform `X`.
    pub fn mutual_information(&self) -> f64 {
        let mut acc = 0.0;
        for (&a, &b) in self.probs[0].iter().zip(&self.probs[1]) {
            let q = 0.5 * (a + b);
            if a > 0.0 {
                acc += 0.5 * a * (a / q).log2();
            }
            if b > 0.0 {
                acc += 0.5 * b * (b / q).log2();
            }
        }
        acc.clamp(0.0, 1.0)
    }

    /// Bhattacharyya parameter `sum_y sqrt(p(y|0) p(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        self.probs[0]
            .iter()
            .zip(&self.probs[1])
            .map(|(&a, &b)| (a * b).sqrt())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Merges outputs carrying the same posterior `p(y|0)/(p(y|0)+p(y|1))`
    /// (within `tol`) and drops zero-mass outputs.
    ///
    /// The result is equivalent to `self`: mutual information and the
    /// Bhattacharyya parameter are preserved, and two equivalent channels
    /// map to the same canonical table.
    pub fn canonical(&self, tol: f64) -> Self {
        let mut items: Vec<(f64, f64, f64)> = self.probs[0]
            .iter()
            .zip(&self.probs[1])
            .filter(|(&a, &b)| a + b > 0.0)
            .map(|(&a, &b)| (a / (a + b), a, b))
            .collect();
        items.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut p0 = Vec::new();
        let mut p1 = Vec::new();
        let mut anchor = f64::NAN;
        for (q, a, b) in items {
            if !p0.is_empty() && q - anchor <= tol {
                *p0.last_mut().unwrap() += a;
                *p1.last_mut().unwrap() += b;
            } else {
                anchor = q;
                p0.push(a);
                p1.push(b);
            }
        }
        Self::from_rows(p0, p1)
    }

    /// True when both channels have the same canonical table within `tol`.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        let merge = tol.max(1e-9);
        let a = self.canonical(merge);
        let b = other.canonical(merge);
        a.outputs() == b.outputs()
            && (0..2).all(|x| {
                a.probs[x]
                    .iter()
                    .zip(&b.probs[x])
                    .all(|(u, v)| (u - v).abs() <= tol)
            })
    }
}

/// Set of users, stored as a bitmask over 0-based user indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UserSet(pub u32);

impl UserSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn all(m: usize) -> Self {
        Self(((1u64 << m) - 1) as u32)
    }

    pub fn from_users(users: &[usize]) -> Self {
        Self(users.iter().fold(0, |acc, &j| acc | (1 << j)))
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn users(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&j| self.0 >> j & 1 == 1)
    }
}

/// An m-user binary-input MAC `p(y | x[1..m])`.
///
/// Rows are indexed by the input combination with user 1 as the most
/// significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct MacDMC {
    m: usize,
    outputs: usize,
    probs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProbTable {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelFile {
    m: usize,
    outputs: usize,
    probs: ProbTable,
}

impl MacDMC {
    /// Builds a MAC from a row-major table of `2^m` rows.
    pub fn new(m: usize, outputs: usize, probs: Vec<f64>) -> Result<Self> {
        if m == 0 || m > MAX_USERS {
            return Err(Error::Validation(format!("user count {m} outside 1..={MAX_USERS}")));
        }
        if outputs == 0 || probs.len() != (1 << m) * outputs {
            return Err(Error::Validation(format!(
                "table has {} entries, expected 2^{m} x {outputs}",
                probs.len()
            )));
        }
        for (c, row) in probs.chunks(outputs).enumerate() {
            check_row(row, &format!("input combination {c}"))?;
        }
        Ok(Self { m, outputs, probs })
    }

    pub(crate) fn from_table(m: usize, outputs: usize, probs: Vec<f64>) -> Self {
        Self { m, outputs, probs }
    }

    /// Wraps a single-user channel as a 1-user MAC.
    pub fn from_single(w: &BinaryInputDMC) -> Self {
        let mut probs = w.row(0).to_vec();
        probs.extend_from_slice(w.row(1));
        Self::from_table(1, w.outputs(), probs)
    }

    /// MAC whose output reveals every input bit.
    pub fn noiseless(m: usize) -> Self {
        let k = 1 << m;
        let mut probs = vec![0.0; k * k];
        for c in 0..k {
            probs[c * k + c] = 1.0;
        }
        Self::from_table(m, k, probs)
    }

    /// MAC whose output is uniform and independent of the inputs.
    pub fn pure_noise(m: usize, outputs: usize) -> Self {
        Self::from_table(m, outputs, vec![1.0 / outputs as f64; (1 << m) * outputs])
    }

    /// Independent per-user channels observed jointly; output index is
    /// mixed-radix with user 1 most significant.
    pub fn product(channels: &[BinaryInputDMC]) -> Self {
        let m = channels.len();
        let outputs: usize = channels.iter().map(|w| w.outputs()).product();
        let mut probs = vec![0.0; (1 << m) * outputs];
        for c in 0..1usize << m {
            for y in 0..outputs {
                let mut rest = y;
                let mut p = 1.0;
                for (j, w) in channels.iter().enumerate().rev() {
                    let yj = rest % w.outputs();
                    rest /= w.outputs();
                    p *= w.prob(((c >> (m - 1 - j)) & 1) as u8, yj);
                }
                probs[c * outputs + y] = p;
            }
        }
        Self::from_table(m, outputs, probs)
    }

    pub fn users(&self) -> usize {
        self.m
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Transition row for an input combination.
    #[inline]
    pub fn row(&self, combination: usize) -> &[f64] {
        &self.probs[combination * self.outputs..(combination + 1) * self.outputs]
    }

    #[inline]
    pub fn prob(&self, combination: usize, y: usize) -> f64 {
        self.probs[combination * self.outputs + y]
    }

    /// Bit of user `j` (0-based) inside an input combination index.
    #[inline]
    pub fn user_bit(&self, combination: usize, j: usize) -> u8 {
        ((combination >> (self.m - 1 - j)) & 1) as u8
    }

    /// The single-user channel seen by `user` when all other users' inputs are
    /// fixed by `others` (a full combination whose bit for `user` is ignored).
    pub fn slice_user(&self, user: usize, others: usize) -> BinaryInputDMC {
        let bit = 1 << (self.m - 1 - user);
        let c0 = others & !bit;
        BinaryInputDMC::from_rows(self.row(c0).to_vec(), self.row(c0 | bit).to_vec())
    }

    /// Serializes to the JSON channel format.
    pub fn to_json(&self) -> String {
        let file = ChannelFile {
            m: self.m,
            outputs: self.outputs,
            probs: ProbTable::Rows(self.probs.chunks(self.outputs).map(<[f64]>::to_vec).collect()),
        };
        serde_json::to_string(&file).expect("channel serialization")
    }

    /// Parses the JSON channel format. `probs` may be a list of rows or a flat
    /// row-major list.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        let probs = match file.probs {
            ProbTable::Flat(v) => v,
            ProbTable::Rows(rows) => {
                if rows.iter().any(|r| r.len() != file.outputs) {
                    return Err(Error::Validation("every row must have `outputs` entries".into()));
                }
                rows.concat()
            }
        };
        Self::new(file.m, file.outputs, probs)
    }
}

/// `I(X[J]; Y, X[J^c])` with independent uniform inputs, by exact summation.
pub fn mac_mutual_information(w: &MacDMC, subset: UserSet) -> Result<f64> {
    if !subset.is_subset_of(UserSet::all(w.m)) {
        return Err(Error::Argument(format!(
            "user set {:#b} is not a subset of the {} users",
            subset.0, w.m
        )));
    }
    if subset.is_empty() {
        return Ok(0.0);
    }
    let combos = 1usize << w.m;
    // H(Y | X) averaged over all input rows
    let h_given_all = (0..combos).map(|c| entropy(w.row(c))).sum::<f64>() / combos as f64;

    // Bits of users in J inside the combination index.
    let j_mask: usize = subset.users().map(|j| 1 << (w.m - 1 - j)).sum();
    let share = 1.0 / (1usize << subset.len()) as f64;
    let mut h_given_rest = 0.0;
    let mut groups = 0usize;
    let mut mix = vec![0.0; w.outputs];
    for base in (0..combos).filter(|c| c & j_mask == 0) {
        mix.iter_mut().for_each(|v| *v = 0.0);
        for c in (0..combos).filter(|c| c & !j_mask == base) {
            for (acc, &p) in mix.iter_mut().zip(w.row(c)) {
                *acc += share * p;
            }
        }
        h_given_rest += entropy(&mix);
        groups += 1;
    }
    h_given_rest /= groups as f64;
    Ok((h_given_rest - h_given_all).max(0.0))
}

/// Independent uniform-input rate region constraints, one per nonempty subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConstraints {
    pub m: usize,
    /// Bound for subset mask `s` at index `s`; index 0 is the empty set.
    pub bounds: Vec<f64>,
    pub sum_rate: f64,
}

impl RegionConstraints {
    pub fn bound(&self, subset: UserSet) -> f64 {
        self.bounds[subset.0 as usize]
    }

    /// True when every subset constraint holds within `tol` and the rates sum
    /// to the sum-rate within `tol`.
    pub fn on_dominant_face(&self, q: &RateTuple, tol: f64) -> bool {
        let r = q.rates();
        if r.len() != self.m || r.iter().any(|&v| v < -tol) {
            return false;
        }
        if (r.iter().sum::<f64>() - self.sum_rate).abs() > tol {
            return false;
        }
        (1..self.bounds.len()).all(|s| {
            let total: f64 = UserSet(s as u32).users().map(|j| r[j]).sum();
            total <= self.bounds[s] + tol
        })
    }

    /// Rejection-samples points uniformly from the dominant face: points are
    /// drawn from the simplex `{sum Q = I(W), Q >= 0}` and kept when all
    /// subset constraints hold.
    pub fn sample_dominant_face(
        &self,
        count: usize,
        seed: u64,
        max_attempts: usize,
    ) -> Result<Vec<RateTuple>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            if attempts >= max_attempts {
                return Err(Error::Sampling(format!(
                    "accepted {} of {count} points after {attempts} attempts",
                    out.len()
                )));
            }
            attempts += 1;
            let mut e: Vec<f64> = (0..self.m)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = e.iter().sum();
            e.iter_mut().for_each(|v| *v *= self.sum_rate / total);
            let q = RateTuple { rates: e };
            if self.on_dominant_face(&q, 1e-12) {
                out.push(q);
            }
        }
        Ok(out)
    }

    /// Vertices of the dominant face: one per user ordering, as the chain-rule
    /// rates of decoding users in that order.
    pub fn corner(&self, user_order: &[usize]) -> RateTuple {
        let mut rates = vec![0.0; self.m];
        let mut known = 0u32;
        // R_j = b(rest) - b(rest minus j), decoding from the first user
        for &j in user_order.iter().rev() {
            let before = self.bounds[known as usize];
            known |= 1 << j;
            rates[j] = self.bounds[known as usize] - before;
        }
        RateTuple { rates }
    }
}

/// All `2^m - 1` subset constraints of the uniform rate region.
pub fn region_constraints(w: &MacDMC) -> Result<RegionConstraints> {
    region_constraints_with_limit(w, DEFAULT_SUBSET_LIMIT)
}

pub fn region_constraints_with_limit(w: &MacDMC, limit: usize) -> Result<RegionConstraints> {
    if w.m > limit {
        return Err(Error::Capacity(format!(
            "{} users exceed the subset-evaluation limit of {limit}",
            w.m
        )));
    }
    let mut bounds = vec![0.0; 1 << w.m];
    for (s, b) in bounds.iter_mut().enumerate().skip(1) {
        *b = mac_mutual_information(w, UserSet(s as u32))?;
    }
    let sum_rate = *bounds.last().unwrap();
    Ok(RegionConstraints { m: w.m, bounds, sum_rate })
}

/// Dominant-face membership test against freshly computed constraints.
pub fn on_dominant_face(w: &MacDMC, q: &RateTuple, tol: f64) -> Result<bool> {
    Ok(region_constraints(w)?.on_dominant_face(q, tol))
}

/// Default attempt budget for [`sample_dominant_face`].
pub const DEFAULT_SAMPLING_ATTEMPTS: usize = 1_000_000;

pub fn sample_dominant_face(w: &MacDMC, count: usize, seed: u64) -> Result<Vec<RateTuple>> {
    region_constraints(w)?.sample_dominant_face(count, seed, DEFAULT_SAMPLING_ATTEMPTS)
}

/// An m-vector of per-user rates in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTuple {
    rates: Vec<f64>,
}

impl RateTuple {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(-1e-12..=1.0 + 1e-12).contains(*r)) {
            return Err(Error::Argument(format!("rate {r} outside [0,1]")));
        }
        Ok(Self { rates })
    }

    pub(crate) fn from_vec(rates: Vec<f64>) -> Self {
        Self { rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &RateTuple) -> f64 {
        self.rates
            .iter()
            .zip(&other.rates)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest per-coordinate gap.
    pub fn max_gap(&self, other: &RateTuple) -> f64 {
        self.rates
            .iter()
            .zip(&other.rates)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// BPSK-modulated users summed in Gaussian noise:
/// `y = sum_j s(x[j]) + noise`, with `s(0) = -amplitude`, `s(1) = +amplitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMac {
    pub m: usize,
    pub amplitude: f64,
    pub noise_variance: f64,
}

impl GaussianMac {
    pub fn new(m: usize, amplitude: f64, noise_variance: f64) -> Result<Self> {
        if m == 0 || m > MAX_USERS {
            return Err(Error::Argument(format!("user count {m} outside 1..={MAX_USERS}")));
        }
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Argument(format!("noise variance {noise_variance} must be positive")));
        }
        Ok(Self { m, amplitude, noise_variance })
    }

    /// Noiseless received level for an input combination.
    pub fn mean(&self, combination: usize) -> f64 {
        (0..self.m)
            .map(|j| {
                if (combination >> (self.m - 1 - j)) & 1 == 1 {
                    self.amplitude
                } else {
                    -self.amplitude
                }
            })
            .sum()
    }

    /// Log-densities `ln p(y | x)` for all input combinations.
    pub fn log_likelihoods(&self, y: f64) -> Vec<f64> {
        let norm = -0.5 * (2.0 * std::f64::consts::PI * self.noise_variance).ln();
        (0..1usize << self.m)
            .map(|c| {
                let d = y - self.mean(c);
                norm - d * d / (2.0 * self.noise_variance)
            })
            .collect()
    }

    /// Quantizes the output on a uniform grid of `bins` cells over
    /// `[grid_min, grid_max]`; the outermost cells absorb the tails.
    pub fn quantize(&self, grid_min: f64, grid_max: f64, bins: usize) -> Result<MacDMC> {
        if bins < 2 || !(grid_max > grid_min) {
            return Err(Error::Argument(format!(
                "grid [{grid_min}, {grid_max}] with {bins} bins is empty"
            )));
        }
        let sigma = self.noise_variance.sqrt();
        let width = (grid_max - grid_min) / bins as f64;
        let mut probs = Vec::with_capacity((1 << self.m) * bins);
        for c in 0..1usize << self.m {
            let mu = self.mean(c);
            let normal = Normal::new(mu, sigma).map_err(|e| Error::Argument(e.to_string()))?;
            let mass = |a: f64, b: f64| -> f64 {
                // upper-tail form keeps precision to the right of the mean
                if a >= mu {
                    normal.sf(a) - normal.sf(b)
                } else {
                    normal.cdf(b) - normal.cdf(a)
                }
            };
            for k in 0..bins {
                let a = if k == 0 { f64::NEG_INFINITY } else { grid_min + k as f64 * width };
                let b = if k + 1 == bins { f64::INFINITY } else { grid_min + (k + 1) as f64 * width };
                probs.push(mass(a, b).max(0.0));
            }
        }
        Ok(MacDMC::from_table(self.m, bins, probs))
    }
}

/// Quantized m-user BPSK Gaussian MAC.
pub fn gaussian_mac_quantized(
    m: usize,
    amplitude: f64,
    noise_variance: f64,
    grid_min: f64,
    grid_max: f64,
    bins: usize,
) -> Result<MacDMC> {
    GaussianMac::new(m, amplitude, noise_variance)?.quantize(grid_min, grid_max, bins)
}

/// Two-user MAC sending `u xor v` and `v` over two independent copies of `wp`.
/// Output index is `y1 * |Y'| + y2`.
pub fn derived_two_user_mac(wp: &BinaryInputDMC) -> MacDMC {
    let k = wp.outputs();
    let mut probs = vec![0.0; 4 * k * k];
    for u in 0..2u8 {
        for v in 0..2u8 {
            let c = ((u << 1) | v) as usize;
            for y1 in 0..k {
                for y2 in 0..k {
                    probs[c * k * k + y1 * k + y2] = wp.prob(u ^ v, y1) * wp.prob(v, y2);
                }
            }
        }
    }
    MacDMC::from_table(2, k * k, probs)
}
