//! Experiment drivers behind the `macpolar` command line: rate-region tables,
//! base-code point clouds, covering-radius runs, code construction, frame
//! error simulation and the pairwise-transform comparison.
//!
//! Every command returns a report that renders as CSV or JSON. Output is a
//! pure function of the configuration (including the seed).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base_code::{
    covering_radius_estimate, enumerate_orders, CoverReport, DecodingOrder, RateEngine,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::channel::{
    derived_two_user_mac, region_constraints_with_limit, BinaryInputDMC, GaussianMac, MacDMC, UserSet,
    DEFAULT_SUBSET_LIMIT,
};
use crate::decoder::{decode, ChannelObservation, MacSampler};
use crate::error::{Error, Result};
use crate::mac_code::{construct, encode, sty_comparison_profile, ConstructOptions, FrozenBits, MacPolarSpec, Selection};
use crate::polar::{good_threshold, trial_rng, Method, DEFAULT_TABLE_BUDGET, MC_CHUNK, Z95};

/// Tolerance for reported face membership.
pub const FACE_TOL: f64 = 1e-6;

/// A comparison triple is intermediate when its sum information lies in
/// `(delta, 2 - delta)`.
pub const INTERMEDIATE_DELTA: f64 = 0.1;

/// Where the channel comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    /// JSON channel file.
    File(PathBuf),
    /// BPSK Gaussian MAC; quantized for tables, continuous when simulating.
    Gaussian,
    /// `m` independent copies of BEC(p), one per user.
    Bec(f64),
    /// `m` independent copies of BSC(p), one per user.
    Bsc(f64),
    /// Two users sending `u xor v` and `v` over BEC(p).
    DerivedBec(f64),
    /// Two users sending `u xor v` and `v` over BSC(p).
    DerivedBsc(f64),
    /// Output equals the input combination.
    Noiseless,
}

impl FromStr for ChannelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let param = |rest: &str| -> Result<f64> {
            rest.parse::<f64>().map_err(|_| Error::Argument(format!("bad channel parameter in `{s}`")))
        };
        if s == "builtin:gaussian" || s == "gaussian" {
            return Ok(Self::Gaussian);
        }
        if s == "noiseless" || s == "builtin:noiseless" {
            return Ok(Self::Noiseless);
        }
        let spec = s.strip_prefix("builtin:").unwrap_or(s);
        if let Some((kind, rest)) = spec.split_once(':') {
            match kind {
                "bec" => return Ok(Self::Bec(param(rest)?)),
                "bsc" => return Ok(Self::Bsc(param(rest)?)),
                "derived-bec" => return Ok(Self::DerivedBec(param(rest)?)),
                "derived-bsc" => return Ok(Self::DerivedBsc(param(rest)?)),
                _ => {}
            }
        }
        if s.starts_with("builtin:") {
            return Err(Error::Argument(format!("unknown built-in channel `{s}`")));
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

/// Quantization grid and noise model of the built-in Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
    pub noise_variance: f64,
    pub amplitude: f64,
}

impl Default for Grid {
    fn default() -> Self {
        // noise variance 1/2, i.e. N0 = 1 with sigma^2 = N0 / 2
        Self { min: -8.0, max: 8.0, bins: 1600, noise_variance: 0.5, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderChoice {
    All,
    /// Comma-separated 1-based user word.
    Word(String),
}

impl FromStr for OrderChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(if s.eq_ignore_ascii_case("all") { Self::All } else { Self::Word(s.to_string()) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Argument(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

/// Reliability estimation used by `construct`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructMethod {
    Exact,
    MonteCarlo,
}

impl FromStr for ConstructMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "montecarlo" | "monte-carlo" | "mc" => Ok(Self::MonteCarlo),
            _ => Err(Error::Argument(format!("unknown method `{s}` (exact or montecarlo)"))),
        }
    }
}

/// Full configuration of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelSource,
    pub m: usize,
    pub base_len: usize,
    pub order: OrderChoice,
    pub n: usize,
    /// Smallest depth of the comparison table.
    pub n_min: usize,
    pub beta: f64,
    /// Simulation trials, or Monte Carlo construction trials.
    pub trials: usize,
    pub seed: u64,
    pub grid: Grid,
    pub method: ConstructMethod,
    pub selection: Selection,
    pub frozen: FrozenBits,
    /// Face samples for `cover`.
    pub samples: usize,
    /// Also run `cover` at `2L`.
    pub double_len: bool,
    /// Code file for `simulate`; constructed from the other fields if absent.
    pub spec: Option<PathBuf>,
    pub budget: usize,
    pub subset_limit: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            channel: ChannelSource::Gaussian,
            m: 3,
            base_len: 2,
            order: OrderChoice::All,
            n: 8,
            n_min: 4,
            beta: crate::mac_code::DEFAULT_BETA,
            trials: 1000,
            seed: 0,
            grid: Grid::default(),
            method: ConstructMethod::Exact,
            selection: Selection::Threshold,
            frozen: FrozenBits::Zeros,
            samples: 200,
            double_len: false,
            spec: None,
            budget: DEFAULT_TABLE_BUDGET,
            subset_limit: DEFAULT_SUBSET_LIMIT,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Argument("trials must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Argument("m must be at least 1".into()));
        }
        Ok(())
    }

    fn order(&self, m: usize) -> Result<DecodingOrder> {
        match &self.order {
            OrderChoice::Word(w) => DecodingOrder::parse(w, m),
            OrderChoice::All => Err(Error::Argument("this command needs a single --order word".into())),
        }
    }
}

fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

/// A channel ready for tables and, when continuous, for sampling.
#[derive(Debug, Clone)]
pub struct LoadedChannel {
    pub table: MacDMC,
    pub gaussian: Option<GaussianMac>,
}

pub fn load_channel(config: &SimConfig) -> Result<LoadedChannel> {
    let m = config.m;
    let copies = |w: BinaryInputDMC| MacDMC::product(&vec![w; m]);
    let (table, gaussian) = match &config.channel {
        ChannelSource::File(path) => (MacDMC::from_json(&read_file(path)?)?, None),
        ChannelSource::Gaussian => {
            let g = GaussianMac::new(m, config.grid.amplitude, config.grid.noise_variance)?;
            (g.quantize(config.grid.min, config.grid.max, config.grid.bins)?, Some(g))
        }
        ChannelSource::Bec(p) => (copies(BinaryInputDMC::bec(*p)?), None),
        ChannelSource::Bsc(p) => (copies(BinaryInputDMC::bsc(*p)?), None),
        ChannelSource::DerivedBec(p) => (derived_two_user_mac(&BinaryInputDMC::bec(*p)?), None),
        ChannelSource::DerivedBsc(p) => (derived_two_user_mac(&BinaryInputDMC::bsc(*p)?), None),
        ChannelSource::Noiseless => (MacDMC::noiseless(m), None),
    };
    Ok(LoadedChannel { table, gaussian })
}

/// Single-user channel named by the source (the comparison demo's `W'`).
pub fn load_single_user(config: &SimConfig) -> Result<BinaryInputDMC> {
    match &config.channel {
        ChannelSource::Bec(p) | ChannelSource::DerivedBec(p) => BinaryInputDMC::bec(*p),
        ChannelSource::Bsc(p) | ChannelSource::DerivedBsc(p) => BinaryInputDMC::bsc(*p),
        ChannelSource::Noiseless => Ok(BinaryInputDMC::noiseless()),
        ChannelSource::File(path) => {
            let w = MacDMC::from_json(&read_file(path)?)?;
            if w.users() != 1 {
                return Err(Error::Argument("the comparison demo needs a single-user channel".into()));
            }
            Ok(w.slice_user(0, 0))
        }
        ChannelSource::Gaussian => Err(Error::Argument("the comparison demo needs a discrete channel".into())),
    }
}

/// CSV/JSON rendering shared by all reports.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialization");
                s.push('\n');
                s
            }
        }
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(sep)
}

fn subset_label(s: UserSet) -> String {
    s.users().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    /// 1-based users separated by spaces.
    pub subset: String,
    pub size: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub m: usize,
    pub rows: Vec<RegionRow>,
    /// `I(W)`, the bound of the full user set.
    pub sum_rate: f64,
}

impl Report for RegionReport {
    fn to_csv(&self) -> String {
        let mut s = String::from("subset,size,bound\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{}", r.subset, r.size, r.bound);
        }
        s
    }
}

/// All `2^m - 1` rate constraints, ordered by subset size then members.
pub fn cmd_region(config: &SimConfig) -> Result<RegionReport> {
    config.validate()?;
    let w = load_channel(config)?.table;
    let c = region_constraints_with_limit(&w, config.subset_limit.max(w.users()))?;
    let m = w.users();
    let mut subsets: Vec<UserSet> = (1..1u32 << m).map(UserSet).collect();
    subsets.sort_by_key(|s| (s.len(), s.users().collect::<Vec<_>>()));
    let rows = subsets
        .into_iter()
        .map(|s| RegionRow { subset: subset_label(s), size: s.len(), bound: c.bound(s) })
        .collect();
    Ok(RegionReport { m, rows, sum_rate: c.sum_rate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCodeRow {
    /// 1-based row number in lexicographic order of the words.
    pub index: usize,
    pub order: String,
    pub rates: Vec<f64>,
    pub sum: f64,
    pub on_face: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCodesReport {
    pub m: usize,
    pub base_len: usize,
    pub sum_rate: f64,
    pub rows: Vec<BaseCodeRow>,
}

impl Report for BaseCodesReport {
    fn to_csv(&self) -> String {
        let mut s = String::from("index,order");
        for j in 1..=self.m {
            let _ = write!(s, ",R{j}");
        }
        s.push_str(",sum,on_face\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},\"{}\",{},{},{}", r.index, r.order, join(&r.rates, ","), r.sum, r.on_face);
        }
        s
    }
}

/// Rate tuple of every base-code order (or of the one given).
pub fn cmd_basecodes(config: &SimConfig) -> Result<BaseCodesReport> {
    config.validate()?;
    let w = load_channel(config)?.table;
    let (m, len) = (w.users(), config.base_len);
    let orders = match &config.order {
        OrderChoice::All => enumerate_orders(m, len, DEFAULT_ENUMERATION_BUDGET)?,
        OrderChoice::Word(word) => {
            let o = DecodingOrder::parse(word, m)?;
            if o.base_len() != len {
                return Err(Error::Argument(format!("order has base length {}, expected {len}", o.base_len())));
            }
            vec![o]
        }
    };
    let engine = RateEngine::new(&w, len)?;
    let rows = orders
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let r = engine.rate_tuple(o);
            BaseCodeRow {
                index: k + 1,
                order: o.to_string(),
                rates: r.rates().to_vec(),
                sum: r.sum(),
                on_face: engine.constraints.on_dominant_face(&r, FACE_TOL),
            }
        })
        .collect();
    Ok(BaseCodesReport { m, base_len: len, sum_rate: engine.constraints.sum_rate, rows })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverRuns {
    pub runs: Vec<CoverReport>,
}

impl Report for CoverRuns {
    fn to_csv(&self) -> String {
        let mut s = String::from(
            "m,L,samples,radius,bound,max_coordinate_gap,coordinate_bound,argmax_order,argmax_point\n",
        );
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},\"{}\",{}",
                r.m,
                r.base_len,
                r.samples,
                r.radius,
                r.bound,
                r.max_coordinate_gap,
                r.coordinate_bound,
                r.argmax_order,
                join(&r.argmax_point, " ")
            );
        }
        s
    }
}

/// Covering-radius estimate at `L` (and `2L` when requested).
pub fn cmd_cover(config: &SimConfig) -> Result<CoverRuns> {
    config.validate()?;
    let w = load_channel(config)?.table;
    let mut lens = vec![config.base_len];
    if config.double_len {
        lens.push(2 * config.base_len);
    }
    let runs = lens
        .into_iter()
        .map(|len| {
            let engine = RateEngine::new(&w, len)?;
            covering_radius_estimate(&engine, config.samples, config.seed, DEFAULT_ENUMERATION_BUDGET)
        })
        .collect::<Result<_>>()?;
    Ok(CoverRuns { runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructReport {
    pub spec: MacPolarSpec,
    pub rates: Vec<f64>,
    pub target_rates: Vec<f64>,
    pub union_bound: f64,
    /// Per-position threshold `2^{-N^beta} / (mN)`; only meaningful in
    /// threshold mode.
    pub threshold: f64,
}

impl Report for ConstructReport {
    fn to_csv(&self) -> String {
        let mut s = String::from("user,info_bits,rate,target_rate,union_bound\n");
        for (j, info) in self.spec.info_sets.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                j + 1,
                info.len(),
                self.rates[j],
                self.target_rates[j],
                self.union_bound
            );
        }
        s
    }
}

fn construct_options(config: &SimConfig) -> ConstructOptions {
    let method = match config.method {
        ConstructMethod::Exact => Method::Exact { budget: config.budget },
        ConstructMethod::MonteCarlo => Method::MonteCarlo { trials: config.trials, seed: config.seed },
    };
    ConstructOptions { beta: config.beta, method, selection: config.selection, frozen: config.frozen }
}

/// Builds a code for the configured channel and order.
pub fn cmd_construct(config: &SimConfig) -> Result<ConstructReport> {
    config.validate()?;
    let w = load_channel(config)?.table;
    construct_report(&w, &config.order(w.users())?, config.n, &construct_options(config))
}

pub fn construct_report(w: &MacDMC, order: &DecodingOrder, n: usize, opts: &ConstructOptions) -> Result<ConstructReport> {
    let spec = construct(w, order, n, opts)?;
    let target = crate::mac_code::target_rates(w, &spec)?;
    Ok(ConstructReport {
        rates: spec.rates(),
        target_rates: target.rates().to_vec(),
        union_bound: spec.union_bound().unwrap_or(f64::NAN),
        threshold: good_threshold(n, opts.beta, spec.m << n),
        spec,
    })
}

/// Frame error statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerReport {
    pub trials: usize,
    pub frame_errors: usize,
    pub fer: f64,
    /// Wilson score interval at 95%.
    pub ci_low: f64,
    pub ci_high: f64,
    pub union_bound: Option<f64>,
    /// Information-bit errors per user.
    pub bit_errors: Vec<u64>,
}

impl Report for FerReport {
    fn to_csv(&self) -> String {
        let mut s = String::from("trials,frame_errors,fer,ci_low,ci_high,union_bound");
        for j in 1..=self.bit_errors.len() {
            let _ = write!(s, ",bit_errors_{j}");
        }
        s.push('\n');
        let ub = self.union_bound.map(|v| v.to_string()).unwrap_or_default();
        let _ = write!(s, "{},{},{},{},{},{}", self.trials, self.frame_errors, self.fer, self.ci_low, self.ci_high, ub);
        for b in &self.bit_errors {
            let _ = write!(s, ",{b}");
        }
        s.push('\n');
        s
    }
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Monte Carlo frame error rate of joint SC decoding.
///
/// Trials use independent random streams keyed by `(seed, trial)`; the
/// result does not depend on the thread count.
pub fn simulate(spec: &MacPolarSpec, channel: &LoadedChannel, trials: usize, seed: u64) -> Result<FerReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let w = &channel.table;
    if w.users() != spec.m {
        return Err(Error::Argument(format!("code has {} users, channel has {}", spec.m, w.users())));
    }
    let sampler = MacSampler::new(w);
    let noise = match channel.gaussian {
        Some(g) => Some(Normal::new(0.0, g.noise_variance.sqrt()).map_err(|e| Error::Argument(e.to_string()))?),
        None => None,
    };
    let big_n = spec.block_len();
    let one = |t: u64| -> Result<(bool, Vec<u64>)> {
        let mut rng = trial_rng(seed, t);
        let msgs: Vec<Vec<u8>> =
            spec.info_sets.iter().map(|s| (0..s.len()).map(|_| rng.random::<bool>() as u8).collect()).collect();
        let x = encode(spec, &msgs)?;
        let obs = match (channel.gaussian, noise) {
            (Some(g), Some(noise)) => {
                let ys: Vec<f64> = (0..big_n)
                    .map(|s| {
                        let c = x.iter().fold(0usize, |acc, xj| (acc << 1) | xj[s] as usize);
                        g.mean(c) + noise.sample(&mut rng)
                    })
                    .collect();
                ChannelObservation::from_gaussian(&g, &ys)
            }
            _ => ChannelObservation::from_symbols(w, &sampler.transmit(&x, &mut rng)),
        };
        let out = decode(spec, &obs)?;
        let bits: Vec<u64> = out
            .messages
            .iter()
            .zip(&msgs)
            .map(|(a, b)| a.iter().zip(b).filter(|(p, q)| p != q).count() as u64)
            .collect();
        Ok((out.messages != msgs, bits))
    };
    let chunks: Vec<Result<(usize, Vec<u64>)>> = (0..trials.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut frames = 0;
            let mut bits = vec![0u64; spec.m];
            for t in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(trials) {
                let (fe, be) = one(t as u64)?;
                frames += fe as usize;
                for (a, b) in bits.iter_mut().zip(be) {
                    *a += b;
                }
            }
            Ok((frames, bits))
        })
        .collect();
    let mut frame_errors = 0;
    let mut bit_errors = vec![0u64; spec.m];
    for c in chunks {
        let (f, b) = c?;
        frame_errors += f;
        for (a, v) in bit_errors.iter_mut().zip(b) {
            *a += v;
        }
    }
    let (ci_low, ci_high) = wilson_interval(frame_errors, trials, Z95);
    Ok(FerReport {
        trials,
        frame_errors,
        fer: frame_errors as f64 / trials as f64,
        ci_low,
        ci_high,
        union_bound: spec.union_bound(),
        bit_errors,
    })
}

/// Reads a code file: a bare spec or the output of `construct`.
pub fn load_spec(path: &std::path::Path) -> Result<MacPolarSpec> {
    let text = read_file(path)?;
    if let Ok(report) = serde_json::from_str::<ConstructReport>(&text) {
        return MacPolarSpec::from_json(&serde_json::to_string(&report.spec).expect("spec serialization"));
    }
    MacPolarSpec::from_json(&text)
}

/// Simulates the code in `config.spec`, or a freshly constructed one.
pub fn cmd_simulate(config: &SimConfig) -> Result<FerReport> {
    config.validate()?;
    let channel = load_channel(config)?;
    let spec = match &config.spec {
        Some(path) => load_spec(path)?,
        None => {
            let mut opts = construct_options(config);
            if let Method::MonteCarlo { seed, .. } = &mut opts.method {
                // keep construction and simulation streams apart
                *seed = ChaCha8Rng::seed_from_u64(config.seed).random();
            }
            construct(&channel.table, &config.order(channel.table.users())?, config.n, &opts)?
        }
    };
    simulate(&spec, &channel, config.trials, config.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRow {
    pub n: usize,
    pub index: usize,
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
    pub intermediate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub base_len: usize,
    pub order: String,
    pub rates: [f64; 2],
    pub on_face: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// `I(W')`, `I(W'-)`, `I(W'+)`.
    pub capacity: f64,
    pub capacity_minus: f64,
    pub capacity_plus: f64,
    /// Fraction of intermediate triples per depth, as `(n, fraction)`.
    pub fractions: Vec<(usize, f64)>,
    pub triples: Vec<TripleRow>,
    /// Dominant-face corner of the square region of the pairwise transform.
    pub square_corner: [f64; 2],
    /// Rate tuples of the joint scheme on the derived MAC.
    pub joint_points: Vec<JointPoint>,
}

impl Report for CounterexampleReport {
    /// Long format: `section,key,v1,v2,v3`.
    fn to_csv(&self) -> String {
        let mut s = String::from("section,key,v1,v2,v3\n");
        let _ = writeln!(s, "capacity,I,{},{},{}", self.capacity, self.capacity_minus, self.capacity_plus);
        let _ = writeln!(s, "square_corner,,{},{},", self.square_corner[0], self.square_corner[1]);
        for (n, f) in &self.fractions {
            let _ = writeln!(s, "fraction,n={n},{f},,");
        }
        for t in &self.triples {
            let _ = writeln!(s, "triple,n={} i={},{},{},{}", t.n, t.index, t.i1, t.i2, t.isum);
        }
        for p in &self.joint_points {
            let _ = writeln!(s, "joint,L={} order={},{},{},{}", p.base_len, p.order.replace(',', " "), p.rates[0], p.rates[1], p.on_face);
        }
        s
    }
}

fn is_intermediate(t: &TripleRow) -> bool {
    t.isum > INTERMEDIATE_DELTA && t.isum < 2.0 - INTERMEDIATE_DELTA
}

/// Pairwise-transform triples for `n_min..=n` and the joint scheme's points
/// on the derived two-user MAC for base lengths 1 and `L`.
pub fn cmd_counterexample(config: &SimConfig) -> Result<CounterexampleReport> {
    let wp = load_single_user(config)?;
    if config.n_min > config.n {
        return Err(Error::Argument(format!("n_min {} exceeds n {}", config.n_min, config.n)));
    }
    let mut triples = Vec::new();
    let mut fractions = Vec::new();
    for n in config.n_min..=config.n {
        let profile = sty_comparison_profile(&wp, n, config.budget)?;
        let rows: Vec<TripleRow> = profile
            .iter()
            .enumerate()
            .map(|(index, t)| {
                let mut row = TripleRow { n, index, i1: t.i1, i2: t.i2, isum: t.isum, intermediate: false };
                row.intermediate = is_intermediate(&row);
                row
            })
            .collect();
        fractions.push((n, rows.iter().filter(|r| r.intermediate).count() as f64 / rows.len() as f64));
        triples.extend(rows);
    }
    let w = derived_two_user_mac(&wp);
    let mut lens = vec![1];
    if config.base_len > 1 {
        lens.push(config.base_len);
    }
    let mut joint_points = Vec::new();
    for len in lens {
        let engine = RateEngine::new(&w, len)?;
        for o in enumerate_orders(2, len, DEFAULT_ENUMERATION_BUDGET)? {
            let r = engine.rate_tuple(&o);
            joint_points.push(JointPoint {
                base_len: len,
                order: o.to_string(),
                rates: [r.rates()[0], r.rates()[1]],
                on_face: engine.constraints.on_dominant_face(&r, FACE_TOL),
            });
        }
    }
    let capacity = wp.mutual_information();
    Ok(CounterexampleReport {
        capacity,
        capacity_minus: crate::polar::combine_minus(&wp).mutual_information(),
        capacity_plus: crate::polar::combine_plus(&wp).mutual_information(),
        fractions,
        triples,
        square_corner: [capacity, capacity],
        joint_points,
    })
}

/// Subcommands of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Region,
    BaseCodes,
    Cover,
    Construct,
    Simulate,
    Counterexample,
}

/// Runs a command and renders its report.
pub fn run_command(command: Command, config: &SimConfig, format: Format) -> Result<String> {
    Ok(match command {
        Command::Region => cmd_region(config)?.render(format),
        Command::BaseCodes => cmd_basecodes(config)?.render(format),
        Command::Cover => cmd_cover(config)?.render(format),
        Command::Construct => cmd_construct(config)?.render(format),
        Command::Simulate => cmd_simulate(config)?.render(format),
        Command::Counterexample => cmd_counterexample(config)?.render(format),
    })
}
