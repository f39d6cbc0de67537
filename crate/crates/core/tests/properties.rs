//! Property tests on random channels, orders and codes.

mod common;

use proptest::prelude::*;

use macpolar::base_code::{reachable, transpose, DecodingOrder, RateEngine};
use macpolar::channel::{BinaryInputDMC, MacDMC, RateTuple, UserSet};
use macpolar::decoder::{decode, ChannelObservation};
use macpolar::mac_code::{encode, expand_order, CodeLayout, FrozenBits, MacPolarSpec};
use macpolar::polar::{bit_channel_exact, combine_minus, combine_plus, polar_transform, BitChannelIndex};

fn bdmc() -> impl Strategy<Value = BinaryInputDMC> {
    (2usize..=5).prop_flat_map(|k| {
        (prop::collection::vec(0.01f64..1.0, k), prop::collection::vec(0.01f64..1.0, k)).prop_map(|(a, b)| {
            let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
            BinaryInputDMC::new(a.iter().map(|v| v / sa).collect(), b.iter().map(|v| v / sb).collect()).unwrap()
        })
    })
}

fn mac(m: usize) -> impl Strategy<Value = MacDMC> {
    (2usize..=3).prop_flat_map(move |k| {
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, k), 1 << m).prop_map(move |rows| {
            let probs = rows
                .iter()
                .flat_map(|r| {
                    let s: f64 = r.iter().sum();
                    r.iter().map(move |v| v / s)
                })
                .collect();
            MacDMC::new(m, k, probs).unwrap()
        })
    })
}

/// Random order word for `m` users with `len` bits each.
fn order(m: usize, len: usize) -> impl Strategy<Value = DecodingOrder> {
    let word: Vec<u8> = (0..m).flat_map(|j| std::iter::repeat_n(j as u8, len)).collect();
    Just(word).prop_shuffle().prop_map(move |w| DecodingOrder::new(m, len, w).unwrap())
}

fn bits(len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_an_involution(n in 0usize..=10, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let u: Vec<u8> = (0..1usize << n).map(|_| rand::Rng::random::<bool>(&mut r) as u8).collect();
        prop_assert_eq!(polar_transform(&polar_transform(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn transform_is_linear(u in bits(32), v in bits(32)) {
        let sum: Vec<u8> = u.iter().zip(&v).map(|(a, b)| a ^ b).collect();
        let tu = polar_transform(&u).unwrap();
        let tv = polar_transform(&v).unwrap();
        let both: Vec<u8> = tu.iter().zip(&tv).map(|(a, b)| a ^ b).collect();
        prop_assert_eq!(polar_transform(&sum).unwrap(), both);
    }

    #[test]
    fn transform_matches_explicit_matrix(u in bits(16)) {
        prop_assert_eq!(polar_transform(&u).unwrap(), common::mat_transform(&u));
    }

    #[test]
    fn one_step_conserves_and_extremizes(w in bdmc()) {
        let (minus, plus) = (combine_minus(&w), combine_plus(&w));
        let i = w.mutual_information();
        prop_assert!((minus.mutual_information() + plus.mutual_information() - 2.0 * i).abs() < 1e-9);
        prop_assert!(minus.mutual_information() <= i + 1e-12 && i <= plus.mutual_information() + 1e-12);
        prop_assert!((plus.bhattacharyya() - w.bhattacharyya().powi(2)).abs() < 1e-12);
        let z = w.bhattacharyya();
        prop_assert!(minus.bhattacharyya() <= 2.0 * z - z * z + 1e-12);
        prop_assert!(minus.bhattacharyya() >= z - 1e-12);
    }

    #[test]
    fn merging_keeps_information_and_z(w in bdmc(), i in 0usize..4) {
        let idx = BitChannelIndex::new(2, i).unwrap();
        let a = bit_channel_exact(&w, idx, true, 1 << 20).unwrap();
        let b = bit_channel_exact(&w, idx, false, 1 << 20).unwrap();
        prop_assert!((a.mutual_information() - b.mutual_information()).abs() < 1e-12);
        prop_assert!((a.bhattacharyya() - b.bhattacharyya()).abs() < 1e-12);
    }

    #[test]
    fn rate_tuples_lie_on_the_face(w in mac(3), o in order(3, 2)) {
        let engine = RateEngine::new(&w, 2).unwrap();
        let r = engine.rate_tuple(&o);
        prop_assert!((r.sum() - engine.constraints.sum_rate).abs() < 1e-9);
        prop_assert!(engine.constraints.on_dominant_face(&r, 1e-6));
    }

    #[test]
    fn transposition_is_an_involution(o in order(3, 2), pick in any::<prop::sample::Index>()) {
        let word = o.word().to_vec();
        let adj: Vec<usize> = (0..word.len() - 1).filter(|&p| word[p] != word[p + 1]).collect();
        prop_assume!(!adj.is_empty());
        let p = adj[pick.index(adj.len())];
        let (j1, j2) = (word[p] as usize, word[p + 1] as usize);
        let k = o.adjacencies(j1, j2).iter().position(|&q| q == p).unwrap();
        let once = transpose(&o, j1, j2, k).unwrap();
        let k2 = once.adjacencies(j2, j1).iter().position(|&q| q == p).unwrap();
        prop_assert_eq!(transpose(&once, j2, j1, k2).unwrap(), o);
    }

    #[test]
    fn transposition_moves_at_most_one_over_l(w in mac(2), o in order(2, 4), pick in any::<prop::sample::Index>()) {
        let engine = RateEngine::new(&w, 4).unwrap();
        let word = o.word().to_vec();
        let adj: Vec<usize> = (0..word.len() - 1).filter(|&p| word[p] != word[p + 1]).collect();
        let p = adj[pick.index(adj.len())];
        let (j1, j2) = (word[p] as usize, word[p + 1] as usize);
        let k = o.adjacencies(j1, j2).iter().position(|&q| q == p).unwrap();
        let (a, b) = (engine.rate_tuple(&o), engine.rate_tuple(&transpose(&o, j1, j2, k).unwrap()));
        let d = b.rates()[j1] - a.rates()[j1];
        prop_assert!((-1e-9..=0.25 + 1e-9).contains(&d));
    }

    /// No nonempty subset of the users below their target is decoded entirely
    /// after everyone else, and every such user reaches one at or above it.
    #[test]
    fn deficit_sets_are_never_last(w in mac(3), o in order(3, 2), seed in 0u64..1000) {
        let engine = RateEngine::new(&w, 2).unwrap();
        let q = &engine.constraints.sample_dominant_face(1, seed, 1_000_000).unwrap()[0];
        let r = engine.rate_tuple(&o);
        let deficit: Vec<usize> = (0..3).filter(|&j| r.rates()[j] < q.rates()[j] - 1e-12).collect();
        let a = UserSet::from_users(&deficit);
        for b in (1u32..8).map(UserSet).filter(|b| b.is_subset_of(a)) {
            let last_other = o.word().iter().rposition(|&j| !b.contains(j as usize));
            let first_in = o.word().iter().position(|&j| b.contains(j as usize)).unwrap();
            prop_assert!(last_other.is_some_and(|p| p > first_in), "{} decoded last for {}", b.0, o);
        }
        for &j in &deficit {
            let reach = reachable(&o, j);
            prop_assert!((0..3).any(|k| reach.contains(k) && !a.contains(k)), "user {} of {}", j + 1, o);
        }
    }

    #[test]
    fn layout_is_a_bijection(o in order(3, 2), n in 1usize..=5) {
        let layout = CodeLayout::new(&o, n).unwrap();
        let expanded = expand_order(&o, 1 << (n - 1)).unwrap();
        let big_n = 1usize << n;
        let mut seen = vec![false; 3 * big_n];
        for g in 0..3 * big_n {
            let (j, i) = layout.user_index(g);
            prop_assert_eq!(j as u8, expanded.word[g]);
            prop_assert!(!seen[j * big_n + i]);
            seen[j * big_n + i] = true;
            prop_assert_eq!(layout.global_position(j, i), g);
        }
    }

    #[test]
    fn encoding_is_linear_and_per_user(
        o in order(2, 2),
        info1 in prop::sample::subsequence((0..16).collect::<Vec<usize>>(), 0..=16),
        info2 in prop::sample::subsequence((0..16).collect::<Vec<usize>>(), 0..=16),
        seed in any::<u64>(),
    ) {
        let spec = MacPolarSpec::with_info_sets(&o, 4, vec![info1.clone(), info2.clone()], FrozenBits::Zeros).unwrap();
        let mut r = common::rng(seed);
        let mut msg = |k: usize| -> Vec<u8> { (0..k).map(|_| rand::Rng::random::<bool>(&mut r) as u8).collect() };
        let (a, b) = ((msg(info1.len()), msg(info2.len())), (msg(info1.len()), msg(info2.len())));
        let xor = |p: &[u8], q: &[u8]| -> Vec<u8> { p.iter().zip(q).map(|(s, t)| s ^ t).collect() };
        let xa = encode(&spec, &[a.0.clone(), a.1.clone()]).unwrap();
        let xb = encode(&spec, &[b.0.clone(), b.1.clone()]).unwrap();
        let xs = encode(&spec, &[xor(&a.0, &b.0), xor(&a.1, &b.1)]).unwrap();
        prop_assert_eq!(xs[0].clone(), xor(&xa[0], &xb[0]));
        prop_assert_eq!(xs[1].clone(), xor(&xa[1], &xb[1]));
        // changing user 1 leaves user 2's codeword alone
        let mixed = encode(&spec, &[b.0.clone(), a.1.clone()]).unwrap();
        prop_assert_eq!(mixed[1].clone(), xa[1].clone());
    }

    #[test]
    fn decoder_is_deterministic_and_respects_frozen_bits(
        o in order(2, 2),
        info1 in prop::sample::subsequence((0..8).collect::<Vec<usize>>(), 0..=8),
        frozen_seed in any::<u64>(),
        ll in prop::collection::vec(prop::collection::vec(-6.0f64..0.0, 4), 8),
    ) {
        let spec = MacPolarSpec::with_info_sets(&o, 3, vec![info1, vec![2, 5, 7]], FrozenBits::Random { seed: frozen_seed }).unwrap();
        let obs = ChannelObservation::from_log_likelihoods(2, &ll).unwrap();
        let a = decode(&spec, &obs).unwrap();
        prop_assert_eq!(&a, &decode(&spec, &obs).unwrap());
        for (j, mask) in spec.frozen_mask().iter().enumerate() {
            for (i, f) in mask.iter().enumerate() {
                if let Some(v) = f {
                    prop_assert_eq!(a.inputs[j][i], *v);
                }
            }
        }
        // a common offset per channel use changes nothing
        let shifted: Vec<Vec<f64>> = ll.iter().enumerate().map(|(s, r)| r.iter().map(|v| v - s as f64).collect()).collect();
        let b = decode(&spec, &ChannelObservation::from_log_likelihoods(2, &shifted).unwrap()).unwrap();
        prop_assert_eq!(a.inputs, b.inputs);
    }

    #[test]
    fn rate_tuple_validation(r in prop::collection::vec(-0.5f64..1.5, 1..4)) {
        let ok = r.iter().all(|v| (0.0..=1.0).contains(v));
        prop_assert_eq!(RateTuple::new(r).is_ok(), ok);
    }
}
