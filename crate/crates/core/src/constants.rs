//! The Erdős–Szekeres constant
//!
//! ```text
//! c_k = ∏_p (1 + Σ_{m=k+1}^{2k-1} p^(-m/k))
//! ```
//!
//! evaluated two ways: as an Euler product over primes, and as the multi-sum
//! over squarefree pairwise coprime `(n_1, …, n_(k-1))` of
//! `∏ n_i^(-(1 + i/k))`. For `k = 2` both equal `ζ(3/2)/ζ(3)`, which is
//! also the Bateman–Grosswald constant `A`; `B = ζ(2/3)/ζ(2)` needs ζ to the
//! left of 1, so [`zeta`] uses an accelerated alternating series.
//!
//! Bounds are floating-point evaluations of documented formulas, not
//! certified interval arithmetic.

use std::collections::HashMap;

use serde::Serialize;

use crate::arith::{primes_upto, FactorSieve};
use crate::error::{Error, Result};
use crate::kfull::{count_kfull, integer_kth_root};
use crate::sum::Neumaier;

/// ζ(3/2)/ζ(3), the squarefull density constant `c_2`.
pub const C2: f64 = 2.173_254_312_519_554;

const BORWEIN_TERMS: usize = 32;

/// A truncated evaluation whose true value lies within
/// `value ± truncation_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub truncation_bound: f64,
    /// Primes used by a product, or the size of the truncation box of a sum.
    pub terms_used: u64,
}

impl ConstantEstimate {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.truncation_bound
    }
}

/// ζ(s) for real `s > 0`, `s != 1`.
///
/// Borwein's acceleration of the alternating series
/// `η(s) = Σ (-1)^(n-1) n^(-s)` with 32 terms, then `ζ = η / (1 - 2^(1-s))`.
/// The relative truncation error is below `3 / (3 + √8)^32 / |1 - 2^(1-s)|`.
pub fn zeta(s: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 || s == 1.0 {
        return Err(Error::Domain(format!("zeta needs real s > 0, s != 1; got {s}")));
    }
    let n = BORWEIN_TERMS;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0f64;
    let mut acc = 1.0f64;
    d.push(acc);
    for i in 1..=n {
        term *= 4.0 * (n + i - 1) as f64 * (n - i + 1) as f64 / ((2 * i) as f64 * (2 * i - 1) as f64);
        acc += term;
        d.push(acc);
    }
    let dn = d[n];
    let mut sum = Neumaier::new();
    for (j, &dj) in d.iter().take(n).enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum.add(sign * (dj - dn) / ((j + 1) as f64).powf(s));
    }
    Ok(-sum.value() / (dn * (1.0 - 2f64.powf(1.0 - s))))
}

/// Relative truncation error of [`zeta`] at `s`.
pub fn zeta_error_bound(s: f64) -> f64 {
    3.0 / (3.0 + 8f64.sqrt()).powi(BORWEIN_TERMS as i32) / (1.0 - 2f64.powf(1.0 - s)).abs()
}

/// How the primes above the cutoff are accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerTail {
    /// Value is the bare partial product. The bound uses `log(1+x) <= x`
    /// and `Σ_{p>P} p^(-m/k) <= ∫_P^∞ t^(-m/k) dt`.
    Bounded,
    /// The partial product times `exp(Σ_{p>P} log f(p))`, the tail summed
    /// through the prime zeta function. The bound covers the truncated
    /// series and floating-point error.
    #[default]
    PrimeZeta,
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("k must be >= 2, got {k}")));
    }
    Ok(())
}

/// `log f(p)` where `f(p) = 1 + Σ_{m=k+1}^{2k-1} p^(-m/k)`.
fn log_local_factor(p: f64, k: u32) -> f64 {
    let u = p.powf(-1.0 / k as f64);
    let mut g = 0.0;
    for _ in k + 1..=2 * k - 1 {
        g = (g + 1.0) * u;
    }
    g *= u.powi(k as i32);
    g.ln_1p()
}

/// Euler product for `c_k` over primes up to `prime_limit`.
pub fn euler_product_ck(k: u32, prime_limit: u64, tail: EulerTail) -> Result<ConstantEstimate> {
    check_k(k)?;
    if prime_limit < 2 {
        return Err(Error::Domain("prime_limit must be >= 2".into()));
    }
    let primes = primes_upto(prime_limit);
    let mut log_sum = Neumaier::new();
    let mut log_abs = 0.0;
    for &p in &primes {
        let l = log_local_factor(p as f64, k);
        log_sum.add(l);
        log_abs += l.abs();
    }
    let p_cut = prime_limit as f64;
    let kf = k as f64;
    let (log_value, bound_fn): (f64, Box<dyn Fn(f64) -> f64>) = match tail {
        EulerTail::Bounded => {
            let t: f64 = (1..k).map(|j| kf / j as f64 * p_cut.powf(-(j as f64) / kf)).sum();
            (log_sum.value(), Box::new(move |v: f64| v * t.exp_m1()))
        }
        EulerTail::PrimeZeta => {
            let tail = euler_tail_prime_zeta(k, prime_limit, &primes)?;
            log_abs += tail.value.abs();
            let b = tail.bound;
            (log_sum.value() + tail.value, Box::new(move |v: f64| v * b.exp_m1()))
        }
    };
    let value = log_value.exp();
    // rounding in the logarithms and the final exp
    let rounding = value * 16.0 * f64::EPSILON * (log_abs + 1.0);
    Ok(ConstantEstimate {
        value,
        truncation_bound: bound_fn(value) + rounding,
        terms_used: primes.len() as u64,
    })
}

struct TailSum {
    value: f64,
    bound: f64,
}

/// Power-series coefficients of `log(1 + Σ_{m=k+1}^{2k-1} u^m)` up to `u^deg`.
fn log_series(k: u32, deg: usize) -> Vec<f64> {
    let mut h = vec![0.0; deg + 1];
    h[0] = 1.0;
    for m in (k + 1)..=(2 * k - 1) {
        if (m as usize) <= deg {
            h[m as usize] = 1.0;
        }
    }
    let mut b = vec![0.0; deg + 1];
    for j in 1..=deg {
        let mut acc = h[j] * j as f64;
        for i in 1..j {
            acc -= i as f64 * b[i] * h[j - i];
        }
        b[j] = acc / j as f64;
    }
    b
}

fn mobius_small(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// `Σ_{p>P} log f(p)` via `log f(p) = Σ_j b_j p^(-j/k)` and the prime zeta
/// tails `Σ_{p>P} p^(-s) = Σ_n μ(n)/n · log ζ_{>P}(ns)`, where `ζ_{>P}` is ζ
/// with the Euler factors of primes `<= P` removed.
fn euler_tail_prime_zeta(k: u32, prime_limit: u64, primes: &[u64]) -> Result<TailSum> {
    const TARGET: f64 = 1e-19;
    let kf = k as f64;
    let ln_p = (prime_limit as f64).ln();
    // log of Σ_{n>P} n^(-σ) <= P^(1-σ)/(σ-1)
    let ln_excess = |sigma: f64| (1.0 - sigma) * ln_p - (sigma - 1.0).ln();

    // radius where Σ u^m = 1/2, so |log(1+g)| <= ln 2 there (Cauchy bound on b_j)
    let g = |u: f64| (k + 1..=2 * k - 1).map(|m| u.powi(m as i32)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let radius = lo;
    if -radius.ln() - ln_p / kf > -0.1 {
        return Err(Error::Domain(format!(
            "prime_limit {prime_limit} too small for the prime-zeta tail at k = {k}"
        )));
    }
    let ln_term = |j: usize| -(j as f64) * radius.ln() + ln_excess(j as f64 / kf);
    let mut deg = 2 * k as usize;
    while ln_term(deg + 1) > TARGET.ln() - 5.0 {
        deg += 1;
    }
    // geometric remainder of Σ_{j>deg} ln2 · R^(-j) · P^(1-j/k)/(j/k-1)
    let ratio = (-radius.ln() - ln_p / kf).exp();
    let series_rem = std::f64::consts::LN_2 * ln_term(deg + 1).exp() / (1.0 - ratio);
    let b = log_series(k, deg);

    let mut reduced: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut log_zeta_reduced = |sigma: f64| -> Result<(f64, f64)> {
        if let Some(&v) = reduced.get(&sigma.to_bits()) {
            return Ok(v);
        }
        let z = zeta(sigma)?;
        let mut acc = Neumaier::new();
        let mut mag = z.ln().abs();
        acc.add(z.ln());
        for &p in primes {
            let t = (-(p as f64).powf(-sigma)).ln_1p();
            if t == 0.0 {
                break;
            }
            acc.add(t);
            mag += t.abs();
        }
        let err = 8.0 * f64::EPSILON * mag + zeta_error_bound(sigma);
        reduced.insert(sigma.to_bits(), (acc.value(), err));
        Ok((acc.value(), err))
    };

    let mut total = Neumaier::new();
    let mut bound = series_rem;
    for (j, &bj) in b.iter().enumerate().skip(k as usize + 1) {
        if bj == 0.0 {
            continue;
        }
        let s = j as f64 / kf;
        let mut pz = Neumaier::new();
        let mut pz_bound = 0.0;
        for n in 1u64.. {
            let sigma = n as f64 * s;
            let excess = ln_excess(sigma).exp();
            if excess / (n as f64) < TARGET {
                pz_bound += excess / n as f64 / (1.0 - (-s * ln_p).exp());
                break;
            }
            let mu = mobius_small(n);
            if mu == 0 {
                continue;
            }
            let (lz, err) = log_zeta_reduced(sigma)?;
            pz.add(mu as f64 * lz / n as f64);
            pz_bound += err / n as f64;
        }
        total.add(bj * pz.value());
        bound += bj.abs() * pz_bound;
    }
    Ok(TailSum {
        value: total.value(),
        bound,
    })
}

/// `Σ_{m=1}^{x} m^(-s)` for `s > 1` by Euler–Maclaurin from `m = 16`.
pub(crate) fn partial_zeta(s: f64, x: u64) -> f64 {
    const DIRECT: u64 = 64;
    const A: u64 = 16;
    if x <= DIRECT {
        return (1..=x).rev().map(|m| (m as f64).powf(-s)).sum();
    }
    // B_2 … B_12
    const BERN: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let head: f64 = (1..A).rev().map(|m| (m as f64).powf(-s)).sum();
    let (a, xf) = (A as f64, x as f64);
    let integral = (a.powf(1.0 - s) - xf.powf(1.0 - s)) / (s - 1.0);
    let ends = 0.5 * (a.powf(-s) + xf.powf(-s));
    // f^(r)(t) = (-1)^r (s)_r t^(-s-r) with (s)_r the rising factorial
    let mut corr = 0.0;
    let mut rising = s; // (s)_1
    let mut fact = 2.0; // (2j)!
    for (j, &bj) in BERN.iter().enumerate() {
        let r = 2 * j + 1;
        let dx = -rising * xf.powf(-s - r as f64);
        let da = -rising * a.powf(-s - r as f64);
        corr += bj / fact * (dx - da);
        rising *= (s + r as f64) * (s + r as f64 + 1.0);
        fact *= ((2 * j + 3) * (2 * j + 4)) as f64;
    }
    head + integral + ends + corr
}

/// `Σ_{n<=x} μ²(n) n^(-s)` as `Σ_{d<=√x} μ(d) d^(-2s) H_s(⌊x/d²⌋)`.
pub(crate) fn squarefree_zeta_partial(s: f64, x: u64) -> Result<f64> {
    let root = integer_kth_root(x as u128, 2) as u64;
    let mu = FactorSieve::new(root.max(2))?.mobius_table()?;
    let mut acc = Neumaier::new();
    for d in 1..=root {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let df = d as f64;
        acc.add(m as f64 * df.powf(-2.0 * s) * partial_zeta(s, x / (d * d)));
    }
    Ok(acc.value())
}

/// Largest box edge for the sieve-backed multi-sum when `k >= 3`.
pub const MULTISUM_SIEVE_CAP: u64 = 50_000_000;
/// Largest `D_1` accepted when `k = 2`.
pub const MULTISUM_K2_CAP: u64 = 1_000_000_000_000_000;

/// Truncated multi-sum for `c_k` over the box `n_i <= bounds[i-1]`.
///
/// Every term is positive, so the true constant lies in
/// `[value, value + truncation_bound]`, where
/// `truncation_bound = Σ_i (k/i) D_i^(-i/k) · ∏_{j != i} (1 + k/j)` compares
/// each escaping index against the unconstrained series.
pub fn multisum_ck(k: u32, bounds: &[u64]) -> Result<ConstantEstimate> {
    check_k(k)?;
    if bounds.len() != k as usize - 1 {
        return Err(Error::Domain(format!(
            "expected {} truncation bounds for k = {k}, got {}",
            k - 1,
            bounds.len()
        )));
    }
    if let Some(&bad) = bounds.iter().find(|&&d| d == 0) {
        return Err(Error::Domain(format!("truncation bounds must be >= 1, got {bad}")));
    }
    let kf = k as f64;
    let exps: Vec<f64> = (1..k).map(|i| 1.0 + i as f64 / kf).collect();
    let full: Vec<f64> = (1..k).map(|j| 1.0 + kf / j as f64).collect();
    let mut bound = 0.0;
    for i in 1..k as usize {
        let tail = kf / i as f64 * (bounds[i - 1] as f64).powf(-(i as f64) / kf);
        let others: f64 = (1..k as usize).filter(|&j| j != i).map(|j| full[j - 1]).product();
        bound += tail * others;
    }
    let terms_used = bounds.iter().fold(1u64, |a, &d| a.saturating_mul(d));

    let value = if k == 2 {
        let d = bounds[0];
        if d > MULTISUM_K2_CAP {
            return Err(Error::Domain(format!("D_1 = {d} exceeds {MULTISUM_K2_CAP}")));
        }
        if d <= 1 << 20 {
            let sieve = FactorSieve::new(d.max(2))?;
            let mut acc = Neumaier::new();
            for n in 1..=d {
                if sieve.mu_squared(n)? == 1 {
                    acc.add((n as f64).powf(-exps[0]));
                }
            }
            acc.value()
        } else {
            squarefree_zeta_partial(exps[0], d)?
        }
    } else {
        let top = *bounds.iter().max().unwrap();
        if top > MULTISUM_SIEVE_CAP {
            return Err(Error::Domain(format!(
                "truncation bound {top} exceeds {MULTISUM_SIEVE_CAP} for k >= 3"
            )));
        }
        let sieve = FactorSieve::new(top.max(2))?;
        let d1 = bounds[0];
        let mut prefix = Vec::with_capacity(d1 as usize + 1);
        let mut acc = Neumaier::new();
        prefix.push(0.0);
        for n in 1..=d1 {
            if sieve.mu_squared(n)? == 1 {
                acc.add((n as f64).powf(-exps[0]));
            }
            prefix.push(acc.value());
        }
        let mut total = Neumaier::new();
        let mut primes = Vec::new();
        outer_tuples(
            k as usize - 1,
            bounds,
            &exps,
            &sieve,
            1,
            1.0,
            &mut primes,
            &mut |w, ps| {
                total.add(w * coprime_squarefree_sum(ps, d1, &prefix, exps[0]));
            },
        )?;
        total.value()
    };
    Ok(ConstantEstimate {
        value,
        truncation_bound: bound,
        terms_used,
    })
}

/// Visits squarefree pairwise coprime `(n_idx, …, n_2)` in the box, passing the
/// weight `∏ n_i^(-s_i)` and the primes of their product.
#[allow(clippy::too_many_arguments)]
fn outer_tuples<F: FnMut(f64, &[u64])>(
    idx: usize,
    bounds: &[u64],
    exps: &[f64],
    sieve: &FactorSieve,
    radical: u64,
    weight: f64,
    primes: &mut Vec<u64>,
    visit: &mut F,
) -> Result<()> {
    if idx == 1 {
        visit(weight, primes);
        return Ok(());
    }
    for c in 1..=bounds[idx - 1] {
        if c > 1 && (sieve.mu_squared(c)? == 0 || crate::arith::gcd(c, radical) != 1) {
            continue;
        }
        let before = primes.len();
        primes.extend(sieve.factorize(c)?.into_iter().map(|(p, _)| p));
        outer_tuples(
            idx - 1,
            bounds,
            exps,
            sieve,
            radical * c,
            weight * (c as f64).powf(-exps[idx - 1]),
            primes,
            visit,
        )?;
        primes.truncate(before);
    }
    Ok(())
}

/// `Σ_{n<=x, n squarefree, gcd(n, ∏ primes) = 1} n^(-s)` from prefix sums of
/// the unrestricted series, removing one prime at a time:
/// `G(r, x) = Σ_j (-p^(-s))^j G(r/p, ⌊x/p^j⌋)`.
fn coprime_squarefree_sum(primes: &[u64], x: u64, prefix: &[f64], s: f64) -> f64 {
    match primes.split_first() {
        None => prefix[x as usize],
        Some((&p, rest)) => {
            let ps = (p as f64).powf(-s);
            let mut acc = Neumaier::new();
            let mut coef = 1.0;
            let mut y = x;
            while y >= 1 {
                acc.add(coef * coprime_squarefree_sum(rest, y, prefix, s));
                coef *= -ps;
                y /= p;
            }
            acc.value()
        }
    }
}

/// `c_k` to near machine precision, for main terms of asymptotic reports.
pub fn erdos_szekeres_constant(k: u32) -> Result<ConstantEstimate> {
    euler_product_ck(k, 100_000, EulerTail::PrimeZeta)
}

/// Bateman–Grosswald constants `(A, B) = (ζ(3/2)/ζ(3), ζ(2/3)/ζ(2))`.
pub fn bateman_grosswald_constants() -> Result<(f64, f64)> {
    Ok((zeta(1.5)? / zeta(3.0)?, zeta(2.0 / 3.0)? / zeta(2.0)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoTermReport {
    /// `A·N^(1/2) + B·N^(1/3)`
    pub main_term: f64,
    pub residual: f64,
    /// `residual / N^(1/6)`
    pub normalized_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub n: u64,
    pub k: u32,
    #[serde(rename = "Q")]
    pub q: u64,
    pub c_k: f64,
    /// `c_k·N^(1/k)`
    pub main_term: f64,
    pub residual: f64,
    /// `residual / N^(1/(k+1))`
    pub normalized_residual: f64,
    /// Present for `k = 2` only.
    pub two_term: Option<TwoTermReport>,
}

/// `Q_k(N)` against `c_k N^(1/k)`, and for `k = 2` against `A√N + B N^(1/3)`.
pub fn count_vs_asymptotic(n: u64, k: u32) -> Result<AsymptoticReport> {
    let q = count_kfull(n, k)?;
    let ck = erdos_szekeres_constant(k)?.value;
    let nf = n as f64;
    let main_term = ck * nf.powf(1.0 / k as f64);
    let residual = q as f64 - main_term;
    let two_term = if k == 2 {
        let (a, b) = bateman_grosswald_constants()?;
        let main = a * nf.sqrt() + b * nf.cbrt();
        let r = q as f64 - main;
        Some(TwoTermReport {
            main_term: main,
            residual: r,
            normalized_residual: r / nf.powf(1.0 / 6.0),
        })
    } else {
        None
    };
    Ok(AsymptoticReport {
        n,
        k,
        q,
        c_k: ck,
        main_term,
        residual,
        normalized_residual: residual / nf.powf(1.0 / (k as f64 + 1.0)),
        two_term,
    })
}
