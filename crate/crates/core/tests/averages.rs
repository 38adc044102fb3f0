use std::f64::consts::PI;

use kfull_core::arith::FactorSieve;
use kfull_core::averages::{
    all_n_histogram, br_average, ek_from_histogram, ek_normalize, ek_statistics, erdos_turan_bound, k_invariance_check,
    kfull_average, kfull_average_from, kfull_histogram, liouville_mean, loyd_average, omega_alpha_atoms, power_average,
    shifted_power_average, squarefree_average, star_discrepancy, star_discrepancy_weighted, weyl_from_histogram,
    weyl_sum, Domain, Observable, Window,
};
use kfull_core::dynamics::{Alpha, DynSystem, Point, TestFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn omega_slow(mut n: u64) -> u32 {
    let mut w = 0;
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            n /= p;
            w += 1;
        }
        p += 1;
    }
    w + (n > 1) as u32
}

fn kfull_slow(mut n: u64, k: u32) -> bool {
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
    n == 1
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn e_of(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

fn golden_br() -> Observable {
    Observable::birkhoff(
        &DynSystem::circle(Alpha::Golden),
        &TestFunction::Trig(1),
        &Point::Circle(0.0),
    )
    .unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_one_averages_to_one(n in 1u64..=200_000, k in 2u32..=5) {
        let r = kfull_average(&Observable::one(), n, k).unwrap();
        prop_assert_eq!(r.value(), c(1.0));
        let p = power_average(&Observable::one(), n, k).unwrap();
        prop_assert_eq!(p.value(), c(1.0));
    }

    #[test]
    fn liouville_on_powers(n in 1u64..=200_000, half in 1u32..=3) {
        let lam = Observable::liouville();
        let even = power_average(&lam, n, 2 * half).unwrap();
        prop_assert_eq!(even.value(), c(1.0));
        let odd = power_average(&lam, n, 2 * half + 1).unwrap();
        prop_assert_eq!(odd.value_re, liouville_mean(n).unwrap());
        prop_assert_eq!(shifted_power_average(&lam, n, 2 * half, 2).unwrap().value(), c(-1.0));
    }
}

#[test]
fn liouville_mean_matches_direct_sum() {
    let n = 100_000u64;
    let s: i64 = (1..=n)
        .map(|m| if omega_slow(m).is_multiple_of(2) { 1 } else { -1 })
        .sum();
    assert_eq!(liouville_mean(n).unwrap(), s as f64 / n as f64);
}

#[test]
fn kfull_averages_match_direct_scan() {
    let n = 1_000_000u64;
    let g = golden();
    for k in 2..=3 {
        let (mut lam, mut br, mut count) = (0i64, Complex64::new(0.0, 0.0), 0u64);
        for m in (1..=n).filter(|&m| kfull_slow(m, k)) {
            let w = omega_slow(m);
            lam += if w.is_multiple_of(2) { 1 } else { -1 };
            br += e_of(w as f64 * g);
            count += 1;
        }
        let r = kfull_average(&Observable::liouville(), n, k).unwrap();
        assert_eq!(r.term_count, count);
        assert!((r.value_re - lam as f64 / count as f64).abs() < 1e-14);
        let b = kfull_average(&golden_br(), n, k).unwrap();
        assert!((b.value() - br / count as f64).norm() < 1e-12, "k = {k}");
    }
}

#[test]
fn liouville_average_over_squarefull_numbers_to_a_hundred() {
    // 1 4 8 9 16 25 27 32 36 49 64 72 81 100 have Ω = 0 2 3 2 4 2 3 5 4 2 6 5 4 4
    let r = kfull_average(&Observable::liouville(), 100, 2).unwrap();
    assert_eq!(r.term_count, 14);
    assert_eq!(r.value_re, 6.0 / 14.0);
}

#[test]
fn two_point_rotation_reproduces_liouville() {
    let sys = DynSystem::cyclic(2).unwrap();
    let f = TestFunction::PointValues(vec![c(1.0), c(-1.0)]);
    let n = 100_000_000u64;
    let br = br_average(&sys, &f, &Point::Cyclic(0), n, 2).unwrap();
    let lam = kfull_average(&Observable::liouville(), n, 2).unwrap();
    assert_eq!(br.value_re, lam.value_re);
    assert_eq!(br.target(), Some(c(0.0)));
    assert_eq!(br.deviation, Some(lam.value_re.abs()));
    assert!(!sys.is_totally_uniquely_ergodic());
}

#[test]
fn trivial_frequency_gives_one() {
    let sys = DynSystem::circle(Alpha::Golden);
    let r = br_average(&sys, &TestFunction::Trig(0), &Point::Circle(0.0), 10_000, 2).unwrap();
    assert!((r.value() - c(1.0)).norm() < 1e-15);
    assert_eq!(r.deviation, Some(0.0));
}

#[test]
fn invariance_matches_direct_sums() {
    let n = 100_000u64;
    let g = golden();
    let report = k_invariance_check(&golden_br(), n, 2, &[2, 3, 5, 6]).unwrap();
    let direct = |m: u64| -> Complex64 {
        let wm = omega_slow(m);
        (1..=n)
            .map(|x| e_of((2 * omega_slow(x) + wm) as f64 * g))
            .sum::<Complex64>()
            / n as f64
    };
    let base = direct(1);
    assert!((Complex64::new(report.base_re, report.base_im) - base).norm() < 1e-12);
    for row in &report.rows {
        let want = direct(row.m);
        assert!(
            (Complex64::new(row.value_re, row.value_im) - want).norm() < 1e-12,
            "m = {}",
            row.m
        );
        assert!((row.deviation - (want - base).norm()).abs() < 1e-12);
    }
    let lam = k_invariance_check(&Observable::liouville(), n, 2, &[2]).unwrap();
    assert_eq!(lam.max_deviation, 2.0);
    let one = k_invariance_check(&Observable::one(), n, 3, &[2, 3, 5]).unwrap();
    assert_eq!(one.max_deviation, 0.0);
}

#[test]
fn power_average_echo_shrinks() {
    // |kfull average − power average| for the golden-rotation observable
    let obs = golden_br();
    let gap = |n: u64| {
        let a = kfull_average(&obs, n, 2).unwrap().value();
        let b = power_average(&obs, n, 2).unwrap().value();
        (a - b).norm()
    };
    let (small, big) = (gap(100_000_000), gap(1_000_000_000_000));
    assert!(big < small, "{big} vs {small}");
}

#[test]
fn ek_mean_matches_prime_power_count() {
    // mean of Ω over n <= N is (1/N) Σ_{p^a <= N} ⌊N/p^a⌋
    let n = 10_000_000u64;
    let sieve = FactorSieve::new(n).unwrap();
    let mut total = 0u64;
    for &p in sieve.primes() {
        let mut q = p as u64;
        while q <= n {
            total += n / q;
            q *= p as u64;
        }
    }
    let ll = (n as f64).ln().ln();
    let want = (total as f64 / n as f64 - ll) / ll.sqrt();
    let r = ek_statistics(n, 1, Domain::AllN).unwrap();
    assert!((r.mean - want).abs() < 1e-12, "{} vs {want}", r.mean);
    assert_eq!(r.sample_count, n);
    let mass: f64 = r.atoms.iter().map(|a| a.mass).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn ks_distance_matches_direct_scan() {
    let n = 20_000u64;
    let k = 2;
    let mut zs: Vec<f64> = (1..=n)
        .filter(|&m| kfull_slow(m, k))
        .map(|m| ek_normalize(omega_slow(m), n, k as f64))
        .collect();
    zs.sort_by(f64::total_cmp);
    let cdf = |z: f64| 0.5 * (1.0 + erf_series(z / 2f64.sqrt()));
    let len = zs.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &z) in zs.iter().enumerate() {
        ks = ks
            .max((cdf(z) - i as f64 / len).abs())
            .max((cdf(z) - (i + 1) as f64 / len).abs());
    }
    let r = ek_statistics(n, k, Domain::Kfull).unwrap();
    assert!((r.ks_distance - ks).abs() < 1e-7, "{} vs {ks}", r.ks_distance);
}

/// erf by its Taylor series, accurate to ~1e-9 for |x| < 3.
fn erf_series(x: f64) -> f64 {
    assert!(x.abs() < 3.0);
    let (mut term, mut sum) = (x, x);
    for j in 1..200 {
        term *= -x * x / j as f64;
        sum += term / (2 * j + 1) as f64;
    }
    2.0 / PI.sqrt() * sum
}

#[test]
fn loyd_factorizes_for_the_trivial_frequency() {
    let n = 1_000_000u64;
    let sys = DynSystem::circle(Alpha::Golden);
    let x = Point::Circle(0.0);
    let loyd = loyd_average(&sys, &TestFunction::Trig(0), &x, Window::Tent, n, 2, Domain::Kfull).unwrap();
    let window = kfull_average(&Observable::window(Window::Tent, 2.0), n, 2).unwrap();
    assert!((loyd.value() - window.value()).norm() < 1e-15);
    // tent mass against the standard normal by Simpson's rule
    let m = 20_000;
    let h = 2.0 / m as f64;
    let f = |t: f64| (1.0 - t.abs()) * (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    let simpson: f64 = (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(-1.0 + i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((loyd.target_re.unwrap() - simpson).abs() < 1e-9);
    let zero = loyd_average(&sys, &TestFunction::Trig(1), &x, Window::Zero, n, 2, Domain::Kfull).unwrap();
    assert_eq!(zero.value(), c(0.0));
}

#[test]
fn weyl_sums() {
    let half = Alpha::rational(1, 2).unwrap();
    assert_eq!(weyl_sum(half, 2, 1000, 2).unwrap(), c(1.0));
    assert_eq!(weyl_sum(Alpha::rational(0, 1).unwrap(), 1, 1000, 3).unwrap(), c(1.0));
    // α = 1/2, h = 1 is the Liouville average
    let lam = kfull_average(&Observable::liouville(), 1_000_000, 2).unwrap();
    assert!((weyl_sum(half, 1, 1_000_000, 2).unwrap() - lam.value()).norm() < 1e-15);
    assert!(weyl_sum(Alpha::Golden, 0, 1000, 2).is_err());
}

#[test]
fn star_discrepancy_examples() {
    assert_eq!(star_discrepancy(&[0.0]).unwrap(), 1.0);
    assert_eq!(star_discrepancy(&[0.0, 0.5]).unwrap(), 0.5);
    for n in [1usize, 7, 100] {
        let pts: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        assert!((star_discrepancy(&pts).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    }
    assert!(star_discrepancy(&[]).is_err());
    assert!(star_discrepancy(&[1.0]).is_err());
}

#[test]
fn discrepancy_is_below_the_erdos_turan_bound() {
    let n = 100_000_000u64;
    let hist = kfull_histogram(n, 2).unwrap();
    let atoms = omega_alpha_atoms(Alpha::Golden, &hist);
    let d = star_discrepancy_weighted(&atoms).unwrap();
    // the weighted form agrees with expanding every atom
    let expanded: Vec<f64> = atoms
        .iter()
        .flat_map(|&(x, c)| std::iter::repeat_n(x, c as usize))
        .collect();
    assert_eq!(star_discrepancy(&expanded).unwrap(), d);
    for big_h in [1u32, 5, 10, 40] {
        let w: Vec<f64> = (1..=big_h as i64)
            .map(|h| weyl_from_histogram(Alpha::Golden, h, &hist, n, 2).unwrap().modulus)
            .collect();
        assert!(d <= erdos_turan_bound(&w), "H = {big_h}");
    }
}

#[test]
fn squarefree_baselines() {
    let n = 10_000_000u64;
    let r = squarefree_average(&Observable::one(), n).unwrap();
    assert_eq!(r.normalized.value(), c(1.0));
    assert!((r.unnormalized_re - 6.0 / PI / PI).abs() < 0.001);
    let lam = squarefree_average(&Observable::liouville(), n).unwrap();
    // Σ μ(n) = Σ λ(n) μ²(n); M(10^7) = 1037
    assert_eq!(lam.unnormalized_re * n as f64, 1037.0);
}

#[test]
fn large_n_histogram_is_complete() {
    let n = 150_000_000u64;
    let hist = all_n_histogram(n).unwrap();
    assert_eq!(hist.total(), n);
    let ek = ek_from_histogram(&hist, n, 1, 1.0, Domain::AllN);
    let r = kfull_average_from(&Observable::one(), &hist, n, 1);
    assert_eq!(r.value(), c(1.0));
    assert!(ek.ks_distance > 0.0 && ek.ks_distance < 1.0);
}
