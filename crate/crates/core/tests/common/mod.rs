//! Brute-force reference computations shared by the integration tests. They
//! only use the public channel tables and re-derive everything else.
#![allow(dead_code)]

use macpolar::channel::MacDMC;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Explicit `G^{(x)n}` as a dense 0/1 matrix.
pub fn kron_matrix(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    for _ in 0..n {
        let k = g.len();
        let mut next = vec![vec![0u8; 2 * k]; 2 * k];
        for r in 0..k {
            for c in 0..k {
                // [[G, 0], [G, G]]
                next[r][c] = g[r][c];
                next[k + r][c] = g[r][c];
                next[k + r][k + c] = g[r][c];
            }
        }
        g = next;
    }
    g
}

pub fn mat_transform(u: &[u8]) -> Vec<u8> {
    let n = u.len().trailing_zeros() as usize;
    let g = kron_matrix(n);
    (0..u.len()).map(|c| (0..u.len()).fold(0u8, |acc, r| acc ^ (u[r] & g[r][c]))).collect()
}

pub fn random_mac(rng: &mut impl Rng, m: usize, outputs: usize) -> MacDMC {
    let mut probs = Vec::new();
    for _ in 0..1usize << m {
        let row: Vec<f64> = (0..outputs).map(|_| 0.05 + rng.random::<f64>()).collect();
        let s: f64 = row.iter().sum();
        probs.extend(row.iter().map(|p| p / s));
    }
    MacDMC::new(m, outputs, probs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Joint law of a length-`L` block: `p[y][d]` with `y` the output word (first
/// use most significant) and bit `j*L + t` of `d` user `j`'s `t`-th input bit.
pub struct BlockLaw {
    pub m: usize,
    pub len: usize,
    pub y_count: usize,
    pub p: Vec<Vec<f64>>,
}

pub fn block_law(w: &MacDMC, len: usize) -> BlockLaw {
    let m = w.users();
    let bits = m * len;
    let y_count = w.outputs().pow(len as u32);
    let mut p = vec![vec![0.0; 1 << bits]; y_count];
    for d in 0..1usize << bits {
        let xs: Vec<Vec<u8>> = (0..m)
            .map(|j| mat_transform(&(0..len).map(|t| ((d >> (j * len + t)) & 1) as u8).collect::<Vec<_>>()))
            .collect();
        for (y, row) in p.iter_mut().enumerate() {
            let mut rest = y;
            let mut prob = 1.0;
            for s in (0..len).rev() {
                let ys = rest % w.outputs();
                rest /= w.outputs();
                let c = (0..m).fold(0, |acc, j| (acc << 1) | xs[j][s] as usize);
                prob *= w.prob(c, ys);
            }
            row[d] = prob;
        }
    }
    BlockLaw { m, len, y_count, p }
}

/// Base-domain bit of every decoding position of a 0-based user word.
pub fn word_bits(word: &[u8], len: usize) -> Vec<usize> {
    let mut seen = [0usize; 16];
    word.iter()
        .map(|&j| {
            let t = seen[j as usize];
            seen[j as usize] += 1;
            j as usize * len + t
        })
        .collect()
}

fn entropy(masses: impl Iterator<Item = f64>) -> f64 {
    masses.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `H(Y, D_S)` under uniform inputs.
fn joint_entropy(law: &BlockLaw, mask: usize) -> f64 {
    let bits = law.m * law.len;
    let scale = 1.0 / (1u64 << bits) as f64;
    let mut total = 0.0;
    for row in &law.p {
        let mut acc = std::collections::HashMap::new();
        for (d, &v) in row.iter().enumerate() {
            *acc.entry(d & mask).or_insert(0.0) += v * scale;
        }
        total += entropy(acc.into_values());
    }
    total
}

/// Chain-rule terms `I(D_k; Y, earlier D)` of a 0-based user word.
pub fn chain_terms(law: &BlockLaw, word: &[u8]) -> Vec<f64> {
    let mut mask = 0usize;
    word_bits(word, law.len)
        .into_iter()
        .map(|b| {
            let before = joint_entropy(law, mask);
            mask |= 1 << b;
            1.0 + before - joint_entropy(law, mask)
        })
        .collect()
}

/// Successive MAP over a single block: bits in word order, each decided from
/// the law summed over undecided bits; frozen bits are forced and ties (within
/// a relative `1e-10`) go to 0. Also reports decisions that sit close to the
/// tie band, where rounding could legitimately flip the outcome.
pub fn successive_map(law: &BlockLaw, word: &[u8], frozen: &[Vec<Option<u8>>], y: usize) -> (Vec<Vec<u8>>, bool) {
    let mut out = vec![vec![0u8; law.len]; law.m];
    let (mut mask, mut vals) = (0usize, 0usize);
    let mut near_tie = false;
    for b in word_bits(word, law.len) {
        let (j, t) = (b / law.len, b % law.len);
        let mut s = [0.0f64; 2];
        for (d, &v) in law.p[y].iter().enumerate() {
            if d & mask == vals {
                s[(d >> b) & 1] += v;
            }
        }
        let bit = match frozen[j][t] {
            Some(f) => f,
            None => {
                let rel = (s[1] - s[0]) / s[0].max(s[1]);
                if (rel.abs() - 1e-10).abs() < 1e-12 {
                    near_tie = true;
                }
                u8::from(rel > 1e-10)
            }
        };
        out[j][t] = bit;
        mask |= 1 << b;
        vals |= (bit as usize) << b;
    }
    (out, near_tie)
}

/// Single-user SC decoder in the likelihood-ratio domain, recomputing each
/// bit's ratio from scratch. `lr[i] = W(y_i|0) / W(y_i|1)`.
pub fn reference_sc(lr: &[f64], frozen: &[Option<u8>]) -> Vec<u8> {
    let n = lr.len();
    let mut u = vec![0u8; n];
    for i in 0..n {
        let l = bit_lr(lr, &u[..i], i);
        u[i] = match frozen[i] {
            Some(f) => f,
            None => u8::from(l < 1.0),
        };
    }
    u
}

/// LR of bit `i` given the earlier bits, with the code split as
/// `x = (T(u_a) ^ T(u_b), T(u_b))`.
fn bit_lr(lr: &[f64], prefix: &[u8], i: usize) -> f64 {
    let n = lr.len();
    if n == 1 {
        return lr[0];
    }
    let h = n / 2;
    if i < h {
        // u_i of the first half: combine (u_a ^ u_b) and u_b observations
        let a: Vec<f64> = (0..h).map(|k| lr[k]).collect();
        let b: Vec<f64> = (0..h).map(|k| lr[k + h]).collect();
        let comb: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| check(x, y)).collect();
        bit_lr(&comb, prefix, i)
    } else {
        let ua = &prefix[..h];
        let xa = mat_transform(ua);
        let comb: Vec<f64> = (0..h)
            .map(|k| {
                let first = if xa[k] == 0 { lr[k] } else { 1.0 / lr[k] };
                let v = first * lr[k + h];
                // 0 * inf: contradictory halves after a wrong decision
                if v.is_nan() {
                    1.0
                } else {
                    v
                }
            })
            .collect();
        bit_lr(&comb, &prefix[h..], i - h)
    }
}

/// LR of `a ^ b` from the LRs of `a` and `b`.
fn check(x: f64, y: f64) -> f64 {
    match (x, y) {
        (x, y) if x.is_infinite() => y,
        (x, y) if y.is_infinite() => x,
        (0.0, y) => 1.0 / y,
        (x, 0.0) => 1.0 / x,
        (x, y) => (x * y + 1.0) / (x + y),
    }
}
