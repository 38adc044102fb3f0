//! Sieve-based multiplicative arithmetic.
//!
//! [`FactorSieve`] is a linear (Euler) sieve storing the smallest prime factor
//! of every integer up to its limit as a `u32`, so a table costs 4 bytes per
//! entry plus 4 bytes per prime (about 4.2 bytes/entry at 10^7). Limits are
//! capped below 2^32. [`OmegaTable`] adds one byte per entry.
//!
//! For averages over every `n <= N` with `N` far beyond a comfortable table
//! size, [`omega_census`] runs a segmented sieve that never materialises a
//! full table and returns only the distribution of Ω.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Upper bound on Ω(n) for n < 2^64, used as histogram width.
pub const OMEGA_SLOTS: usize = 64;

/// Smallest-prime-factor table for `2 ..= limit`.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u32,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

fn try_alloc<T: Clone>(entries: u64, fill: T) -> Result<Vec<T>> {
    let bytes = entries as u128 * std::mem::size_of::<T>() as u128;
    let n = usize::try_from(entries).map_err(|_| Error::Resource {
        requested_bytes: bytes,
        entries,
    })?;
    let mut v = Vec::new();
    v.try_reserve_exact(n).map_err(|_| Error::Resource {
        requested_bytes: bytes,
        entries,
    })?;
    v.resize(n, fill);
    Ok(v)
}

impl FactorSieve {
    /// Builds the table with a linear sieve in O(limit).
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit must be >= 2, got {limit}")));
        }
        if limit >= u32::MAX as u64 {
            return Err(Error::Domain(format!(
                "sieve limit {limit} exceeds the 32-bit table cap"
            )));
        }
        let n = limit as usize;
        let mut spf: Vec<u32> = try_alloc(limit + 1, 0u32)?;
        // π(x) < 1.26 x / ln x for x > 1
        let prime_guess = (1.26 * limit as f64 / (limit as f64).ln()) as usize + 16;
        let mut primes: Vec<u32> = Vec::with_capacity(prime_guess);
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let lp = spf[i];
            for &p in &primes {
                if p > lp {
                    break;
                }
                let j = i * p as usize;
                if j > n {
                    break;
                }
                spf[j] = p;
            }
        }
        Ok(Self {
            limit: limit as u32,
            spf,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Smallest prime factor; `None` for 0 and 1 or beyond the limit.
    pub fn spf(&self, n: u64) -> Option<u32> {
        if n < 2 || n > self.limit() {
            None
        } else {
            Some(self.spf[n as usize])
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.spf(n) == Some(n as u32)
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.limit() {
            Err(Error::OutOfRange { n, limit: self.limit() })
        } else {
            Ok(n as usize)
        }
    }

    /// Ω(n), prime factors counted with multiplicity.
    pub fn omega(&self, n: u64) -> Result<u32> {
        let mut n = self.check(n)?;
        let mut count = 0;
        while n > 1 {
            n /= self.spf[n] as usize;
            count += 1;
        }
        Ok(count)
    }

    /// μ²(n): 1 when n is squarefree.
    pub fn mu_squared(&self, n: u64) -> Result<u8> {
        Ok(self.mobius(n)?.unsigned_abs())
    }

    /// μ(n).
    pub fn mobius(&self, n: u64) -> Result<i8> {
        let mut n = self.check(n)?;
        let mut sign = 1i8;
        while n > 1 {
            let p = self.spf[n] as usize;
            n /= p;
            if n % p == 0 {
                return Ok(0);
            }
            sign = -sign;
        }
        Ok(sign)
    }

    /// λ(n) = (−1)^Ω(n).
    pub fn liouville(&self, n: u64) -> Result<i8> {
        Ok(if self.omega(n)? % 2 == 0 { 1 } else { -1 })
    }

    /// Prime factorization sorted by prime.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        let mut n = self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// Ω for every `n <= limit`, derived from the sieve in O(limit).
    pub fn omega_table(&self) -> Result<OmegaTable> {
        let mut omega: Vec<u8> = try_alloc(self.limit() + 1, 0u8)?;
        for n in 2..omega.len() {
            omega[n] = omega[n / self.spf[n] as usize] + 1;
        }
        Ok(OmegaTable { omega })
    }

    /// μ(n) for every `n <= limit` (index 0 holds 0).
    pub fn mobius_table(&self) -> Result<Vec<i8>> {
        let mut mu: Vec<i8> = try_alloc(self.limit() + 1, 0i8)?;
        mu[1] = 1;
        for n in 2..mu.len() {
            let p = self.spf[n] as usize;
            let q = n / p;
            mu[n] = if q.is_multiple_of(p) { 0 } else { -mu[q] };
        }
        Ok(mu)
    }
}

/// Ω(n) for `1 <= n <= limit`; entry 0 is unused.
#[derive(Debug, Clone)]
pub struct OmegaTable {
    omega: Vec<u8>,
}

impl OmegaTable {
    pub fn limit(&self) -> u64 {
        (self.omega.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> Result<u32> {
        if n == 0 || n > self.limit() {
            return Err(Error::OutOfRange { n, limit: self.limit() });
        }
        Ok(self.omega[n as usize] as u32)
    }

    /// Raw table, index `n` holds Ω(n).
    pub fn as_slice(&self) -> &[u8] {
        &self.omega
    }

    /// Distribution of Ω over `1 ..= upto`.
    pub fn histogram(&self, upto: u64) -> Result<OmegaHistogram> {
        if upto > self.limit() {
            return Err(Error::OutOfRange {
                n: upto,
                limit: self.limit(),
            });
        }
        let mut h = OmegaHistogram::new();
        for &w in &self.omega[1..=upto as usize] {
            h.counts[w as usize] += 1;
        }
        Ok(h)
    }
}

/// Ω(n) by trial division, for arguments outside any table.
pub fn omega_trial(mut n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Domain("Ω(0) is undefined".into()));
    }
    let mut count = 0;
    while n.is_multiple_of(2) {
        n /= 2;
        count += 1;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        while n.is_multiple_of(d) {
            n /= d;
            count += 1;
        }
        d += 2;
    }
    if n > 1 {
        count += 1;
    }
    Ok(count)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Integer counts indexed by Ω. Every average in this crate depends on `n`
/// only through Ω(n), so a histogram is a complete summary of a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaHistogram {
    counts: Vec<u64>,
}

impl Default for OmegaHistogram {
    fn default() -> Self {
        Self::new()
    }
}

impl OmegaHistogram {
    pub fn new() -> Self {
        Self {
            counts: vec![0; OMEGA_SLOTS * 2],
        }
    }

    pub fn from_counts(mut counts: Vec<u64>) -> Self {
        if counts.len() < OMEGA_SLOTS * 2 {
            counts.resize(OMEGA_SLOTS * 2, 0);
        }
        Self { counts }
    }

    #[inline]
    pub fn add(&mut self, omega: u32, count: u64) {
        let i = omega as usize;
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += count;
    }

    pub fn merge(&mut self, other: &OmegaHistogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, omega: u32) -> u64 {
        self.counts.get(omega as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero `(omega, count)` pairs in increasing Ω.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (w as u32, c))
    }

    /// The histogram of `scale * Ω + shift`.
    pub fn affine(&self, scale: u32, shift: u32) -> OmegaHistogram {
        let mut out = OmegaHistogram::new();
        for (w, c) in self.iter() {
            out.add(scale * w + shift, c);
        }
        out
    }
}

/// Distribution of Ω over `1..=n`, and over the squarefree integers in that range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaCensus {
    pub n: u64,
    pub all: OmegaHistogram,
    pub squarefree: OmegaHistogram,
}

const SEGMENT: u64 = 1 << 17;

pub(crate) fn primes_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for i in 2..=limit as usize {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit as usize {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn census_segment(lo: u64, hi: u64, primes: &[u64]) -> (OmegaHistogram, OmegaHistogram) {
    let len = (hi - lo) as usize;
    let mut omega = vec![0u8; len];
    let mut found = vec![1u64; len];
    let mut squarefree = vec![true; len];
    for &p in primes {
        if p * p >= hi {
            break;
        }
        let mut pe = p;
        let mut e = 1;
        loop {
            let mut j = lo.div_ceil(pe) * pe;
            while j < hi {
                let i = (j - lo) as usize;
                omega[i] += 1;
                found[i] *= p;
                if e == 2 {
                    squarefree[i] = false;
                }
                j += pe;
            }
            match pe.checked_mul(p) {
                Some(next) if next < hi => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    let mut all = OmegaHistogram::new();
    let mut sf = OmegaHistogram::new();
    for i in 0..len {
        let n = lo + i as u64;
        // whatever remains after removing primes below sqrt(hi) is 1 or a single prime
        let w = omega[i] as u32 + u32::from(found[i] != n);
        all.add(w, 1);
        if squarefree[i] {
            sf.add(w, 1);
        }
    }
    (all, sf)
}

/// Ω distribution of `1..=n` by a segmented sieve; memory O(√n + segment).
/// Segments are reduced by integer addition, so the result does not depend on
/// the rayon pool size.
pub fn omega_census(n: u64) -> Result<OmegaCensus> {
    if n == 0 {
        return Err(Error::Domain("census needs n >= 1".into()));
    }
    let root = crate::kfull::integer_kth_root(n as u128, 2) as u64;
    let primes = primes_upto(root);
    let segments: Vec<(u64, u64)> = (0..)
        .map(|s: u64| (1 + s * SEGMENT, (1 + (s + 1) * SEGMENT).min(n + 1)))
        .take_while(|&(lo, _)| lo <= n)
        .collect();
    let (all, squarefree) = segments
        .par_iter()
        .map(|&(lo, hi)| census_segment(lo, hi, &primes))
        .reduce(
            || (OmegaHistogram::new(), OmegaHistogram::new()),
            |(mut a, mut b), (c, d)| {
                a.merge(&c);
                b.merge(&d);
                (a, b)
            },
        );
    Ok(OmegaCensus { n, all, squarefree })
}

/// `π(⌊n/d⌋)` for every `d`, by the Lucy–Hedgehog recurrence in
/// O(n^(3/4)) time and O(√n) memory.
#[derive(Debug, Clone)]
pub struct PrimeCounts {
    n: u64,
    root: u64,
    /// `small[v] = π(v)` for `v <= root`
    small: Vec<u64>,
    /// `large[i] = π(⌊n/i⌋)` for `1 <= i <= root`
    large: Vec<u64>,
}

impl PrimeCounts {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("prime counts need n >= 1".into()));
        }
        let root = crate::kfull::integer_kth_root(n as u128, 2) as u64;
        let r = root as usize;
        let mut small: Vec<u64> = (0..=root).map(|v| v.saturating_sub(1)).collect();
        let mut large: Vec<u64> = (0..=root).map(|i| n.checked_div(i).map_or(0, |q| q - 1)).collect();
        for p in 2..=r {
            if small[p] == small[p - 1] {
                continue;
            }
            let below = small[p - 1];
            let p2 = (p as u64) * (p as u64);
            let upto = (n / p2).min(root) as usize;
            for i in 1..=upto {
                let d = i as u64 * p as u64;
                let v = if d <= root {
                    large[d as usize]
                } else {
                    small[(n / d) as usize]
                };
                large[i] -= v - below;
            }
            if p2 <= root {
                for v in (p2 as usize..=r).rev() {
                    small[v] -= small[v / p] - below;
                }
            }
        }
        Ok(PrimeCounts { n, root, small, large })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `π(v)` for `v` of the form `⌊n/d⌋` (every `v <= √n` qualifies).
    pub fn pi(&self, v: u64) -> u64 {
        if v <= self.root {
            self.small[v as usize]
        } else {
            self.large[(self.n / v) as usize]
        }
    }
}

/// Ω distribution of `1..=n` without sieving to `n`.
///
/// Counts `n = p_1 ⋯ p_j` with `p_1 <= … <= p_j` by enumerating the prefix
/// `m = p_1 ⋯ p_(j-1)` with `m·p_(j-1) <= n` and reading the number of valid
/// last primes off [`PrimeCounts`]. Cost is dominated by the prime counts
/// plus the number of such prefixes, a few million at `n = 10^12`.
pub fn omega_distribution(n: u64) -> Result<OmegaHistogram> {
    let pc = PrimeCounts::new(n)?;
    let primes = primes_upto(pc.root);
    let mut hist = OmegaHistogram::new();
    hist.add(0, 1);
    hist.add(1, pc.pi(n));
    // counts[j] for j >= 2, accumulated per top-level prime in parallel
    let per_prime: Vec<Vec<u64>> = primes
        .par_iter()
        .enumerate()
        .filter(|&(_, &p)| p * p <= n)
        .map(|(i, &p)| {
            let mut counts = vec![0u64; OMEGA_SLOTS];
            almost_prime_dfs(n, &pc, &primes, p, i, 1, &mut counts);
            counts
        })
        .collect();
    for counts in per_prime {
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                hist.add(j as u32, c);
            }
        }
    }
    Ok(hist)
}

/// `m` is a product of `depth` primes whose largest is `primes[idx]`.
fn almost_prime_dfs(n: u64, pc: &PrimeCounts, primes: &[u64], m: u64, idx: usize, depth: usize, counts: &mut [u64]) {
    // last prime q with primes[idx] <= q <= n/m
    counts[depth + 1] += pc.pi(n / m) - idx as u64;
    for (j, &p) in primes.iter().enumerate().skip(idx) {
        match m.checked_mul(p).and_then(|mp| mp.checked_mul(p)) {
            Some(v) if v <= n => almost_prime_dfs(n, pc, primes, m * p, j, depth + 1, counts),
            _ => break,
        }
    }
}
