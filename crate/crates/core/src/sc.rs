//! Log-domain successive-cancellation kernel for the natural-order transform
//! `x = u G^{(x)n}`, where the first half of `x` carries `T(u_a ^ u_b)` and
//! the second half carries `T(u_b)`.

/// Log-likelihood pair `(ln p(. | 0), ln p(. | 1))`, up to a common offset.
pub type LlrPair = [f64; 2];

#[inline]
pub(crate) fn lse(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

#[inline]
pub(crate) fn normalize(p: LlrPair) -> LlrPair {
    let hi = p[0].max(p[1]);
    if hi == f64::NEG_INFINITY || hi.is_nan() {
        // contradictory observation after a wrong decision
        return [0.0, 0.0];
    }
    [p[0] - hi, p[1] - hi]
}

/// Log-likelihood differences this small count as ties; mathematically
/// equal sums can come out a few ulps apart.
pub const TIE_TOL: f64 = 1e-10;

/// Hard decision; ties go to 0.
#[inline]
pub(crate) fn decide(p: LlrPair) -> u8 {
    u8::from(p[1] > p[0] + TIE_TOL)
}

#[inline]
fn check_node(a: LlrPair, b: LlrPair) -> LlrPair {
    normalize([lse(a[0] + b[0], a[1] + b[1]), lse(a[0] + b[1], a[1] + b[0])])
}

#[inline]
fn bit_node(a: LlrPair, b: LlrPair, s: u8) -> LlrPair {
    if s == 0 {
        normalize([a[0] + b[0], a[1] + b[1]])
    } else {
        normalize([a[1] + b[0], a[0] + b[1]])
    }
}

/// Per-call outputs of [`sc_decode`].
#[derive(Debug, Clone)]
pub(crate) struct ScPass {
    /// Bits carried forward: decisions, frozen values, or the genie's truth.
    pub u: Vec<u8>,
    /// `T(u)`.
    pub x: Vec<u8>,
    /// Normalized bit-channel likelihood pair at each position.
    pub pairs: Vec<LlrPair>,
}

/// Successive cancellation over channel likelihoods `llh` of the code bits.
///
/// `frozen[i]` forces position `i`; when `genie` is given every position is
/// continued with the true bit instead of the decision.
pub(crate) fn sc_decode(
    llh: &[LlrPair],
    frozen: &[Option<u8>],
    genie: Option<&[u8]>,
    ops: &mut u64,
) -> ScPass {
    let n = llh.len();
    debug_assert!(n.is_power_of_two() && frozen.len() == n);
    let mut pass = ScPass { u: vec![0; n], x: vec![0; n], pairs: vec![[0.0; 2]; n] };
    recurse(llh, frozen, genie, &mut pass.u, &mut pass.x, &mut pass.pairs, ops);
    pass
}

fn recurse(
    llh: &[LlrPair],
    frozen: &[Option<u8>],
    genie: Option<&[u8]>,
    u: &mut [u8],
    x: &mut [u8],
    pairs: &mut [LlrPair],
    ops: &mut u64,
) {
    let n = llh.len();
    *ops += n as u64;
    if n == 1 {
        let p = normalize(llh[0]);
        pairs[0] = p;
        u[0] = match (genie, frozen[0]) {
            (Some(g), _) => g[0],
            (None, Some(f)) => f,
            (None, None) => decide(p),
        };
        x[0] = u[0];
        return;
    }
    let h = n / 2;
    let left: Vec<LlrPair> = (0..h).map(|i| check_node(llh[i], llh[i + h])).collect();
    let (ua, ub) = u.split_at_mut(h);
    let (xa, xb) = x.split_at_mut(h);
    let (pa, pb) = pairs.split_at_mut(h);
    let (fa, fb) = frozen.split_at(h);
    let (ga, gb) = match genie {
        Some(g) => (Some(&g[..h]), Some(&g[h..])),
        None => (None, None),
    };
    recurse(&left, fa, ga, ua, xa, pa, ops);
    let right: Vec<LlrPair> = (0..h).map(|i| bit_node(llh[i], llh[i + h], xa[i])).collect();
    recurse(&right, fb, gb, ub, xb, pb, ops);
    for i in 0..h {
        xa[i] ^= xb[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::polar_transform;

    #[test]
    fn noiseless_recovers_everything() {
        let u = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let x = polar_transform(&u).unwrap();
        let llh: Vec<LlrPair> = x
            .iter()
            .map(|&b| if b == 0 { [0.0, f64::NEG_INFINITY] } else { [f64::NEG_INFINITY, 0.0] })
            .collect();
        let mut ops = 0;
        let pass = sc_decode(&llh, &[None; 8], None, &mut ops);
        assert_eq!(pass.u, u);
        assert_eq!(pass.x, x);
    }

    #[test]
    fn frozen_positions_forced() {
        let llh = vec![[0.0, 0.0]; 4];
        let frozen = [Some(1), None, Some(1), None];
        let pass = sc_decode(&llh, &frozen, None, &mut 0);
        assert_eq!(pass.u[0], 1);
        assert_eq!(pass.u[2], 1);
        // erasures everywhere: ties decide 0
        assert_eq!(pass.u[1], 0);
    }
}
