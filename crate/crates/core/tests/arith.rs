use kfull_core::arith::{omega_census, omega_distribution, omega_trial, FactorSieve, PrimeCounts};
use proptest::prelude::*;
use std::sync::OnceLock;

const LIMIT: u64 = 1_000_000;

fn sieve() -> &'static FactorSieve {
    static S: OnceLock<FactorSieve> = OnceLock::new();
    S.get_or_init(|| FactorSieve::new(LIMIT).unwrap())
}

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[test]
fn omega_matches_trial_division_to_a_million() {
    let s = sieve();
    for n in 1..=LIMIT {
        assert_eq!(s.omega(n).unwrap(), omega_trial(n).unwrap(), "n = {n}");
    }
}

#[test]
fn spf_is_least_prime_divisor() {
    let s = sieve();
    for n in 2..=20_000u64 {
        let p = s.spf(n).unwrap() as u64;
        assert_eq!(n % p, 0);
        assert!(is_prime_trial(p));
        assert!((2..p).all(|d| n % d != 0), "n = {n}");
        assert_eq!(p == n, is_prime_trial(n));
    }
}

#[test]
fn prime_count_to_ten_million() {
    // trial division by odd primes up to √n as the oracle
    let n = 10_000_000u64;
    let small: Vec<u64> = (3..=3163).filter(|&p| is_prime_trial(p)).collect();
    let mut count = 1u64; // 2
    let mut m = 3;
    while m <= n {
        if small.iter().take_while(|&&p| p * p <= m).all(|&p| m % p != 0) {
            count += 1;
        }
        m += 2;
    }
    assert_eq!(count, 664_579);
    let s = FactorSieve::new(n).unwrap();
    assert_eq!(s.primes().len() as u64, count);
    assert_eq!(PrimeCounts::new(n).unwrap().pi(n), count);
}

#[test]
fn prime_counts_at_all_quotients() {
    let n = 1_000_003u64;
    let s = sieve();
    let pc = PrimeCounts::new(n).unwrap();
    let mut prefix = vec![0u64; (n + 1) as usize];
    let big = FactorSieve::new(n).unwrap();
    for v in 2..=n {
        prefix[v as usize] = prefix[v as usize - 1] + big.is_prime(v) as u64;
    }
    for d in 1..=n {
        let v = n / d;
        assert_eq!(pc.pi(v), prefix[v as usize], "v = {v}");
        if d > 3000 {
            break;
        }
    }
    assert!(s.is_prime(999_983));
}

#[test]
fn omega_distribution_routes_agree() {
    for n in [1u64, 2, 3, 100, 65_537, 2_000_000] {
        assert_eq!(omega_distribution(n).unwrap(), omega_census(n).unwrap().all, "n = {n}");
    }
}

#[test]
fn liouville_mean_shrinks() {
    let mean = |n: u64| {
        let c = omega_census(n).unwrap();
        let s: i64 = c
            .all
            .iter()
            .map(|(w, k)| if w % 2 == 0 { k as i64 } else { -(k as i64) })
            .sum();
        s as f64 / n as f64
    };
    let (small, big) = (mean(10_000), mean(10_000_000));
    assert!(big.abs() < 0.005, "{big}");
    assert!(big.abs() < small.abs(), "{big} vs {small}");
}

#[test]
fn squarefree_density_near_six_over_pi_squared() {
    let n = 10_000_000u64;
    let d = omega_census(n).unwrap().squarefree.total() as f64 / n as f64;
    assert!((d - 6.0 / std::f64::consts::PI.powi(2)).abs() < 0.001, "{d}");
}

#[test]
fn census_totals() {
    // Σ_n Ω(n) = Σ_{p^a <= N} ⌊N/p^a⌋ is an independent count
    let n = 3_000_000u64;
    let c = omega_census(n).unwrap();
    assert_eq!(c.all.total(), n);
    let big = FactorSieve::new(n).unwrap();
    let mut want = 0u64;
    for &p in big.primes() {
        let mut q = p as u64;
        while q <= n {
            want += n / q;
            q *= p as u64;
        }
    }
    let got: u64 = c.all.iter().map(|(w, k)| w as u64 * k).sum();
    assert_eq!(got, want);
}

proptest! {
    #[test]
    fn omega_is_completely_additive(a in 1u64..=1000, b in 1u64..=1000) {
        let s = sieve();
        prop_assert_eq!(s.omega(a * b).unwrap(), s.omega(a).unwrap() + s.omega(b).unwrap());
    }

    #[test]
    fn factorization_multiplies_back(n in 1u64..=LIMIT) {
        let f = sieve().factorize(n).unwrap();
        let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(prod, n);
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(f.iter().all(|&(p, e)| e >= 1 && is_prime_trial(p)));
    }

    #[test]
    fn pointwise_functions_agree(n in 1u64..=LIMIT) {
        let s = sieve();
        let f = s.factorize(n).unwrap();
        let omega: u32 = f.iter().map(|&(_, e)| e).sum();
        let squarefree = f.iter().all(|&(_, e)| e == 1);
        prop_assert_eq!(s.liouville(n).unwrap(), if omega.is_multiple_of(2) { 1 } else { -1 });
        prop_assert_eq!(s.mu_squared(n).unwrap(), squarefree as u8);
        let mu = if squarefree { if f.len().is_multiple_of(2) { 1 } else { -1 } } else { 0 };
        prop_assert_eq!(s.mobius(n).unwrap(), mu);
    }

    #[test]
    fn powers_of_two(t in 0u32..20) {
        prop_assert_eq!(sieve().omega(1 << t).unwrap(), t);
    }
}
