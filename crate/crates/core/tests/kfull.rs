use std::collections::{BTreeSet, HashSet};

use kfull_core::arith::{omega_trial, FactorSieve};
use kfull_core::constants::C2;
use kfull_core::kfull::{
    count_kfull, enumerate_kfull, integer_kth_root, is_kfull, part_tuples, read_dump, rep_of, tuple_count, write_dump,
    KFullRep, KFullSpace, Order,
};
use proptest::prelude::*;

/// k-full by trial division, no sieve involved.
fn kfull_trial(mut n: u64, k: u32) -> bool {
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 && e < k {
            return false;
        }
        p += 1;
    }
    n == 1 || k <= 1
}

#[test]
fn generator_is_a_bijection_onto_kfull_numbers() {
    let n = 100_000u64;
    let sieve = FactorSieve::new(n).unwrap();
    for k in 2..=4 {
        let want: Vec<u64> = (1..=n).filter(|&x| kfull_trial(x, k)).collect();
        let got = enumerate_kfull(n, k, &sieve, Order::Generator).unwrap();
        let values: Vec<u64> = got.iter().map(|e| e.value).collect();
        let distinct: HashSet<u64> = values.iter().copied().collect();
        assert_eq!(distinct.len(), values.len(), "k = {k}: duplicates");
        let mut sorted = values.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, want, "k = {k}");
        let asc: Vec<u64> = enumerate_kfull(n, k, &sieve, Order::Ascending)
            .unwrap()
            .iter()
            .map(|e| e.value)
            .collect();
        assert_eq!(asc, want);
    }
}

#[test]
fn representation_round_trips() {
    let n = 100_000u64;
    let sieve = FactorSieve::new(n).unwrap();
    for k in 2..=4 {
        for e in enumerate_kfull(n, k, &sieve, Order::Generator).unwrap() {
            assert_eq!(e.rep.value().unwrap(), e.value as u128);
            assert_eq!(rep_of(e.value, k, &sieve).unwrap(), e.rep);
            assert_eq!(e.omega, omega_trial(e.value).unwrap(), "n = {}", e.value);
            // the parts are squarefree and pairwise coprime
            let mut seen = HashSet::new();
            for &p in &e.rep.parts {
                for (q, mult) in sieve.factorize(p).unwrap() {
                    assert_eq!(mult, 1);
                    assert!(seen.insert(q));
                }
            }
        }
    }
}

#[test]
fn non_kfull_input_is_rejected() {
    let sieve = FactorSieve::new(1000).unwrap();
    assert!(rep_of(12, 2, &sieve).is_err());
    assert!(!is_kfull(12, 2, &sieve).unwrap());
    assert!(is_kfull(72, 2, &sieve).unwrap());
    assert!(rep_of(72, 1, &sieve).is_err());
}

#[test]
fn count_to_a_million_matches_brute_force() {
    let n = 1_000_000u64;
    for k in 2..=5 {
        let want = (1..=n).filter(|&x| kfull_trial(x, k)).count() as u64;
        assert_eq!(count_kfull(n, k).unwrap(), want, "k = {k}");
        assert_eq!(KFullSpace::build(n, k).unwrap().count(), want);
    }
}

#[test]
fn squarefull_count_scales_like_root_n() {
    let n = 10_000_000_000u64;
    let q = count_kfull(n, 2).unwrap() as f64;
    let r = q / (n as f64).sqrt();
    assert!((r - C2).abs() < 0.05, "Q/√N = {r}");
}

#[test]
fn tuples_are_exactly_the_parts_that_occur() {
    let n = 200_000u64;
    let sieve = FactorSieve::new(n).unwrap();
    for k in 2..=4 {
        let occurring: BTreeSet<Vec<u64>> = (1..=n)
            .filter(|&x| kfull_trial(x, k))
            .map(|x| rep_of(x, k, &sieve).unwrap().parts)
            .collect();
        let tuples = part_tuples(n, k, &sieve).unwrap();
        let listed: BTreeSet<Vec<u64>> = tuples.iter().map(|t| t.parts.clone()).collect();
        assert_eq!(listed, occurring, "k = {k}");
        assert_eq!(tuple_count(n, k).unwrap(), tuples.len() as u64);
        for t in &tuples {
            assert_eq!(t.quotient, n as u128 / t.product);
            assert_eq!(t.m_max as u128, integer_kth_root(t.quotient, k));
        }
        let total: u64 = tuples.iter().map(|t| t.m_max).sum();
        assert_eq!(total, count_kfull(n, k).unwrap());
    }
}

#[test]
fn tuple_count_is_sublinear() {
    // tuples are bounded by ∏ N^(1/(k+i)); far fewer than k-full numbers for k = 2
    for (n, k) in [(1_000_000_000u64, 2u32), (1_000_000_000, 3), (1_000_000_000_000, 2)] {
        let t = tuple_count(n, k).unwrap() as f64;
        let bound: f64 = (1..k).map(|i| (n as f64).powf(1.0 / (k + i) as f64)).product();
        assert!(t <= bound, "N = {n}, k = {k}: {t} > {bound}");
    }
}

#[test]
fn histogram_agrees_with_entries() {
    let space = KFullSpace::build(3_000_000, 3).unwrap();
    let hist = space.omega_histogram();
    let mut direct = vec![0u64; 64];
    for e in space.entries() {
        direct[e.omega as usize] += 1;
    }
    for (w, c) in hist.iter() {
        assert_eq!(direct[w as usize], c);
    }
    assert_eq!(hist.total(), space.count());
}

#[test]
fn dump_round_trips() {
    let space = KFullSpace::build(50_000, 3).unwrap();
    let entries: Vec<_> = space.entries_ordered(Order::Ascending).collect();
    let mut buf = Vec::new();
    write_dump(&mut buf, 50_000, 3, entries.clone()).unwrap();
    let (head, back) = read_dump(&buf[..]).unwrap();
    assert_eq!((head.k, head.n), (3, 50_000));
    assert_eq!(back, entries);
    assert!(read_dump(&buf[..buf.len() - 1]).is_err());
    assert!(read_dump(&b"NOTADUMP\0\0\0\0"[..]).is_err());
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(count_kfull(100, 1).is_err());
    assert!(count_kfull(2_000_000_000_000_000_000, 2).is_err());
    let rep = KFullRep {
        k: 2,
        m: u64::MAX,
        parts: vec![u64::MAX],
    };
    assert!(rep.value().is_err());
}

proptest! {
    #[test]
    fn kth_root_brackets(x in any::<u64>(), k in 2u32..=8) {
        let r = integer_kth_root(x as u128, k);
        prop_assert!(r.pow(k) <= x as u128);
        prop_assert!((r + 1).pow(k) > x as u128);
    }

    #[test]
    fn kth_root_of_power(r in 1u64..=1_000_000, k in 2u32..=3) {
        let x = (r as u128).pow(k);
        prop_assert_eq!(integer_kth_root(x, k), r as u128);
        prop_assert_eq!(integer_kth_root(x - 1, k), r as u128 - 1);
    }

    #[test]
    fn rep_builds_kfull_numbers(m in 1u64..=30, a in 1u64..=6, b in 1u64..=4, k in 2u32..=3) {
        // coprime squarefree parts from disjoint prime pools
        let parts = if k == 2 { vec![[1, 2, 3, 5, 6, 10][a as usize - 1]] }
            else { vec![[1, 2, 3, 6, 1, 2][a as usize - 1], [1, 5, 7, 35][b as usize - 1]] };
        let rep = KFullRep { k, m, parts };
        let v = rep.value().unwrap();
        prop_assume!(v <= 1_000_000);
        static SIEVE: std::sync::OnceLock<FactorSieve> = std::sync::OnceLock::new();
        let sieve = SIEVE.get_or_init(|| FactorSieve::new(1_000_000).unwrap());
        prop_assert!(kfull_trial(v as u64, k));
        prop_assert_eq!(rep_of(v as u64, k, sieve).unwrap(), rep);
    }
}
