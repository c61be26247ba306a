use std::collections::HashSet;

use hiddensum::attack::{random_invertible, random_standard};
use hiddensum::classify::{
    canonical_key, canonical_key_of_group, classify_all, ClassTable, Universe,
};
use hiddensum::enumerate::{count_variety, enumerate_all_iter, enumerate_variety_with, free_bits};
use hiddensum::exec::Exec;
use hiddensum::hiddensum::standardize;
use hiddensum::tbcipher::{brick_group, is_affine_wrt, KeySchedule, ToyCipherSpec};
use hiddensum::{AffineMap, EmbeddedHiddenSum, Gf2Vector, HiddenSum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_sum(dim: usize, tail: usize, seed: u64) -> EmbeddedHiddenSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = random_standard(dim - tail, tail, &mut rng).unwrap();
    let g = random_invertible(dim, &mut rng);
    EmbeddedHiddenSum::new(std, g).unwrap()
}

/// `(dim, tail)` with `2 ≤ head`, `1 ≤ tail`, and a nonempty variety.
fn shape(max_dim: usize) -> impl Strategy<Value = (usize, usize)> {
    (3..=max_dim)
        .prop_flat_map(|n| (Just(n), 1..=n - 2))
        .prop_filter("odd head needs tail >= 2", |&(n, d)| {
            d > 1 || (n - d) % 2 == 0
        })
}

/// `f` is affine for `∘` iff `f(x∘y)∘f(0) = f(x)∘f(y)` for all `x, y`.
fn affine_all_pairs<S: HiddenSum>(f: &[u64], sum: &S) -> bool {
    let n = 1u64 << sum.dim();
    (0..n).all(|x| {
        (0..n).all(|y| {
            let lhs = sum.circ_bits(f[sum.circ_bits(x, y) as usize], f[0]);
            lhs == sum.circ_bits(f[x as usize], f[y as usize])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_is_two_sided(n in 1usize..=64, seed: u64) {
        let m = random_invertible(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let inv = m.inverse().unwrap();
        prop_assert!(m.mul(&inv).unwrap().is_identity());
        prop_assert!(inv.mul(&m).unwrap().is_identity());
        let (counted, _) = m.inverse_counting().unwrap();
        prop_assert_eq!(counted, inv);
    }

    #[test]
    fn affine_maps_compose(n in 1usize..=20, seed: u64, x: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = AffineMap::new(random_invertible(n, &mut rng), Gf2Vector::truncated(n, seed)).unwrap();
        let g = AffineMap::new(random_invertible(n, &mut rng), Gf2Vector::truncated(n, seed >> 20)).unwrap();
        let x = x & hiddensum::gf2::mask(n);
        prop_assert_eq!(f.then(&g).apply_bits(x), g.apply_bits(f.apply_bits(x)));
    }

    #[test]
    fn coordinates_invert_combine((dim, tail) in shape(24), seed: u64, v: u64) {
        let t = random_sum(dim, tail, seed);
        let v = v & hiddensum::gf2::mask(dim);
        prop_assert_eq!(t.combine_bits(t.coordinates_bits(v)), v);
        prop_assert_eq!(t.coordinates_bits(t.combine_bits(v)), v);
    }

    #[test]
    fn circ_is_an_elementary_abelian_group((dim, tail) in shape(24), seed: u64, x: u64, y: u64, z: u64) {
        let t = random_sum(dim, tail, seed);
        let m = hiddensum::gf2::mask(dim);
        let (x, y, z) = (x & m, y & m, z & m);
        prop_assert_eq!(t.circ_bits(x, 0), x);
        prop_assert_eq!(t.circ_bits(x, x), 0);
        prop_assert_eq!(t.circ_bits(x, y), t.circ_bits(y, x));
        prop_assert_eq!(t.circ_bits(t.circ_bits(x, y), z), t.circ_bits(x, t.circ_bits(y, z)));
    }

    #[test]
    fn translations_by_u_are_in_the_group((dim, tail) in shape(24), seed: u64, x: u64) {
        let t = random_sum(dim, tail, seed);
        let x = x & hiddensum::gf2::mask(dim);
        for u in t.u_space() {
            prop_assert_eq!(t.circ_bits(x, u.bits()), x ^ u.bits());
        }
    }

    #[test]
    fn conjugation_round_trips((dim, tail) in shape(12), seed: u64) {
        let t = random_sum(dim, tail, seed);
        let g = random_invertible(dim, &mut ChaCha8Rng::seed_from_u64(!seed));
        let g_inv = g.inverse().unwrap();
        let a = t.algebra();
        prop_assert_eq!(a.conjugate(&g, &g_inv).conjugate(&g_inv, &g), a);
    }

    #[test]
    fn document_round_trips((dim, tail) in shape(16), seed: u64) {
        let t = random_sum(dim, tail, seed);
        let back = EmbeddedHiddenSum::from_toml(&t.to_toml()).unwrap();
        prop_assert_eq!(back.algebra(), t.algebra());
        prop_assert_eq!(back.to_toml(), t.to_toml());
    }

    #[test]
    fn normal_form_recovers_the_group((dim, tail) in shape(10), seed: u64) {
        let t = random_sum(dim, tail, seed);
        let s = standardize(&t.to_generated()).unwrap();
        prop_assert!(s.is_block_form());
        prop_assert_eq!(s.tail, tail);
        let e = s.embedded().unwrap();
        prop_assert_eq!(e.algebra(), t.algebra());
        prop_assert_eq!(canonical_key(&e), canonical_key(&t));
    }

    #[test]
    fn generated_group_is_regular((dim, tail) in shape(8), seed: u64) {
        let g = random_sum(dim, tail, seed).to_generated();
        let v = g.validate().unwrap();
        prop_assert!(v.violation.is_none(), "{:?}", v.violation);
        prop_assert_eq!(v.order, 1usize << dim);
        prop_assert_eq!(g.u_space().unwrap().len(), tail);
    }

    #[test]
    fn circ_affine_check_matches_all_pairs(seed: u64, flip in proptest::option::of((0u64..64, 0u64..64))) {
        let t = random_sum(6, 2 + (seed % 3) as usize, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5);
        let m = random_invertible(6, &mut rng);
        let shift = seed >> 58;
        let mut f: Vec<u64> = (0..64)
            .map(|x| t.combine_bits(hiddensum::gf2::vec_mat(t.coordinates_bits(x), m.row_words()) ^ shift))
            .collect();
        if let Some((a, b)) = flip {
            f.swap(a as usize, b as usize);
        }
        let fast = is_affine_wrt(&f, &t);
        prop_assert_eq!(fast.is_some(), affine_all_pairs(&f, &t));
        if flip.is_none_or(|(a, b)| a == b) {
            let found = fast.unwrap();
            prop_assert_eq!(found.m, m);
            prop_assert_eq!(found.t.bits(), shift);
        }
    }

    #[test]
    fn toy_cipher_is_affine_for_the_hidden_sum(key in 0u64..64, rounds in 1usize..=8, constant: bool) {
        let schedule = if constant { KeySchedule::Constant } else { KeySchedule::XorRoundIndex };
        let cipher = ToyCipherSpec::default().with_rounds(rounds).with_schedule(schedule).build().unwrap();
        let table = cipher.encryption_table(key);
        let sum = hiddensum::tbcipher::toy_hidden_sum();
        prop_assert!(is_affine_wrt(&table, &sum).is_some());
        if rounds == 1 {
            let plain = EmbeddedHiddenSum::standard(hiddensum::StandardHiddenSum::translations(6));
            prop_assert!(is_affine_wrt(&table, &plain).is_none());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn keys_are_class_invariants((dim, tail) in shape(5), seed: u64) {
        let universe = Universe::build(dim, Exec::Parallel).unwrap();
        let table = classify_all(dim, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = random_standard(dim - tail, tail, &mut rng).unwrap();
        let g = random_invertible(dim, &mut rng);
        let h = random_invertible(dim, &mut rng);
        let t = EmbeddedHiddenSum::new(std.clone(), g.clone()).unwrap();
        let u = EmbeddedHiddenSum::new(std, h.mul(&g).unwrap()).unwrap();
        let (kt, ku) = (canonical_key(&t).digest, canonical_key(&u).digest);
        prop_assert!(universe.contains(kt) && universe.contains(ku));
        let ct = table.locate(&universe, kt).unwrap();
        prop_assert!(ct.is_some());
        prop_assert_eq!(ct, table.locate(&universe, ku).unwrap());
        prop_assert_eq!(table.classes[ct.unwrap()].dim_u, tail);
    }
}

#[test]
fn brick_group_is_enumerated() {
    let key = canonical_key_of_group(&brick_group()).unwrap();
    let listed: HashSet<_> = enumerate_all_iter(3, 1)
        .unwrap()
        .map(|t| canonical_key(&t))
        .collect();
    assert_eq!(listed.len(), 7);
    assert!(listed.contains(&key));
}

#[test]
fn enumeration_agrees_with_counts() {
    for n in 2..=7usize {
        for d in 1..=8usize {
            if free_bits(n, d) > 20 {
                break;
            }
            let seq = enumerate_variety_with(Exec::Sequential, n, d).unwrap();
            let par = enumerate_variety_with(Exec::Parallel, n, d).unwrap();
            assert_eq!(seq, par, "({n},{d})");
            assert_eq!(count_variety(n, d).unwrap(), seq.len().into(), "({n},{d})");
            assert!(seq.iter().all(|t| t.is_nondegenerate()));
        }
    }
}

#[test]
fn enumerated_groups_validate() {
    for dim in 3..=6 {
        for d in 1..=dim - 2 {
            for t in enumerate_all_iter(dim, d).unwrap().step_by(997) {
                let g = t.to_generated();
                let v = g.validate().unwrap();
                assert!(v.violation.is_none(), "N={dim} d={d}: {:?}", v.violation);
                assert!(g.normalized_by_translations().unwrap());
                assert_eq!(g.u_space().unwrap(), t.u_space());
            }
        }
    }
}

#[test]
fn class_table_survives_export() {
    let dir = tempfile::tempdir().unwrap();
    for dim in 3..=5 {
        let table = classify_all(dim, false).unwrap();
        let stem = format!("classes_N{dim}");
        table.export(dir.path(), &stem).unwrap();
        assert_eq!(ClassTable::import(dir.path(), &stem).unwrap(), table);
    }
}
