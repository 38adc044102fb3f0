//! k-full numbers through their unique representation
//!
//! ```text
//! n = m^k · n_1^(k+1) · n_2^(k+2) ⋯ n_(k-1)^(2k-1)
//! ```
//!
//! with `n_1, …, n_(k-1)` squarefree and pairwise coprime. Enumeration walks
//! the admissible part tuples `(n_1, …, n_(k-1))` and, for each, every
//! `m <= M = ⌊(N / ∏ n_i^(k+i))^(1/k)⌋`. Ω of an entry is assembled as
//! `k·Ω(m) + Σ (k+i)·Ω(n_i)`, so only a sieve up to `N^(1/k)` is needed and
//! the k-full value itself is never factored.

use std::io::{self, Read, Write};

use rayon::prelude::*;

use crate::arith::{gcd, FactorSieve, OmegaHistogram, OmegaTable};
use crate::error::{Error, Result};

/// Largest supported `N`.
pub const MAX_N: u64 = 1_000_000_000_000_000_000;

/// Largest `r` with `r^k <= x`.
///
/// Panics if `k == 0`.
pub fn integer_kth_root(x: u128, k: u32) -> u128 {
    assert!(k >= 1, "integer_kth_root needs k >= 1");
    if x < 2 || k == 1 {
        return x;
    }
    if k == 2 {
        return x.isqrt();
    }
    if k >= 128 {
        return 1;
    }
    // for k >= 3 the root is below 2^43, well inside f64's exact range
    let mut r = (x as f64).powf(1.0 / k as f64).round() as u128;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("k must be >= 2, got {k}")));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    if n > MAX_N {
        return Err(Error::Overflow(format!("N = {n} exceeds the supported bound 10^18")));
    }
    Ok(())
}

/// True iff every prime dividing `n` divides it at least `k` times.
pub fn is_kfull(n: u64, k: u32, sieve: &FactorSieve) -> Result<bool> {
    check_k(k)?;
    Ok(sieve.factorize(n)?.iter().all(|&(_, e)| e >= k))
}

/// The tuple `(m, n_1, …, n_(k-1))` of a k-full number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KFullRep {
    pub k: u32,
    pub m: u64,
    /// `parts[i - 1]` is `n_i`.
    pub parts: Vec<u64>,
}

impl KFullRep {
    /// `m^k · ∏ n_i^(k+i)`, or an overflow error.
    pub fn value(&self) -> Result<u128> {
        let overflow = || Error::Overflow(format!("value of {self:?} exceeds u128"));
        let mut v = (self.m as u128).checked_pow(self.k).ok_or_else(overflow)?;
        for (i, &p) in self.parts.iter().enumerate() {
            let e = self.k + 1 + i as u32;
            v = (p as u128)
                .checked_pow(e)
                .and_then(|pe| v.checked_mul(pe))
                .ok_or_else(overflow)?;
        }
        Ok(v)
    }
}

/// Splits a k-full `n` into its representation.
pub fn rep_of(n: u64, k: u32, sieve: &FactorSieve) -> Result<KFullRep> {
    check_k(k)?;
    let mut m = 1u64;
    let mut parts = vec![1u64; k as usize - 1];
    for (p, e) in sieve.factorize(n)? {
        if e < k {
            return Err(Error::NotKFull {
                n,
                k,
                prime: p,
                exponent: e,
            });
        }
        let i = e % k;
        let m_exp = if i == 0 {
            e / k
        } else {
            parts[i as usize - 1] *= p;
            (e - k - i) / k
        };
        m *= p.pow(m_exp);
    }
    Ok(KFullRep { k, m, parts })
}

/// One admissible choice of `(n_1, …, n_(k-1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartTuple {
    pub parts: Vec<u64>,
    /// `∏ n_i^(k+i)`
    pub product: u128,
    /// `⌊N / product⌋`
    pub quotient: u128,
    /// `Σ (k+i)·Ω(n_i)`
    pub omega: u32,
    /// Number of admissible `m`, `⌊quotient^(1/k)⌋`.
    pub m_max: u64,
}

impl PartTuple {
    /// `∏ n_i^(1 + i/k)`, the weight denominator in the decomposition.
    pub fn weight_denominator(&self, k: u32) -> f64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &p)| (p as f64).powf(1.0 + (i as f64 + 1.0) / k as f64))
            .product()
    }
}

/// Visits squarefree, pairwise coprime tuples with `n_i <= bounds[i-1]` and
/// `∏ n_i^(k+i) <= n`, in lexicographic order of `(n_(k-1), …, n_1)`.
pub(crate) fn visit_tuples<F: FnMut(&[u64], u128, u32)>(
    n: u128,
    k: u32,
    bounds: Option<&[u64]>,
    sieve: &FactorSieve,
    visit: &mut F,
) -> Result<()> {
    let slots = k as usize - 1;
    let mut parts = vec![1u64; slots];
    #[allow(clippy::too_many_arguments)]
    fn rec<F: FnMut(&[u64], u128, u32)>(
        idx: usize,
        k: u32,
        quotient: u128,
        radical: u64,
        omega: u32,
        parts: &mut [u64],
        bounds: Option<&[u64]>,
        sieve: &FactorSieve,
        visit: &mut F,
    ) -> Result<()> {
        if idx == 0 {
            visit(parts, quotient, omega);
            return Ok(());
        }
        let e = k + idx as u32;
        let mut hi = integer_kth_root(quotient, e) as u64;
        if let Some(b) = bounds {
            hi = hi.min(b[idx - 1]);
        }
        if hi > sieve.limit() && hi > 1 {
            return Err(Error::Domain(format!(
                "sieve limit {} too small for parts up to {hi}",
                sieve.limit()
            )));
        }
        for c in 1..=hi {
            if c > 1 && (sieve.mu_squared(c)? == 0 || gcd(c, radical) != 1) {
                continue;
            }
            let w = if c == 1 { 0 } else { sieve.omega(c)? };
            parts[idx - 1] = c;
            let ce = (c as u128).pow(e);
            rec(
                idx - 1,
                k,
                quotient / ce,
                radical * c,
                omega + e * w,
                parts,
                bounds,
                sieve,
                visit,
            )?;
        }
        parts[idx - 1] = 1;
        Ok(())
    }
    rec(slots, k, n, 1, 0, &mut parts, bounds, sieve, visit)
}

/// All admissible part tuples for `(n, k)` in generator order.
pub fn part_tuples(n: u64, k: u32, sieve: &FactorSieve) -> Result<Vec<PartTuple>> {
    check_k(k)?;
    check_n(n)?;
    let mut out = Vec::new();
    visit_tuples(n as u128, k, None, sieve, &mut |parts, quotient, omega| {
        out.push(PartTuple {
            parts: parts.to_vec(),
            product: parts
                .iter()
                .enumerate()
                .map(|(i, &p)| (p as u128).pow(k + 1 + i as u32))
                .product(),
            quotient,
            omega,
            m_max: integer_kth_root(quotient, k) as u64,
        });
    })?;
    Ok(out)
}

/// Number of admissible part tuples, the inner count of the `S_2` bound.
pub fn tuple_count(n: u64, k: u32) -> Result<u64> {
    check_k(k)?;
    check_n(n)?;
    let sieve = FactorSieve::new(integer_kth_root(n as u128, k + 1).max(2) as u64)?;
    let mut count = 0u64;
    visit_tuples(n as u128, k, None, &sieve, &mut |_, _, _| count += 1)?;
    Ok(count)
}

/// Q_k(N), the number of k-full integers in `1..=N`.
pub fn count_kfull(n: u64, k: u32) -> Result<u64> {
    check_k(k)?;
    check_n(n)?;
    let sieve = FactorSieve::new(integer_kth_root(n as u128, k + 1).max(2) as u64)?;
    let mut count = 0u64;
    visit_tuples(n as u128, k, None, &sieve, &mut |_, quotient, _| {
        count += integer_kth_root(quotient, k) as u64;
    })?;
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KFullEntry {
    pub value: u64,
    pub rep: KFullRep,
    pub omega: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    /// Lexicographic in `(n_(k-1), …, n_1, m)`.
    #[default]
    Generator,
    /// Collects every entry, then sorts by value.
    Ascending,
}

/// The k-full numbers up to `N` with their representations and Ω, ready to
/// enumerate, count, or summarise.
#[derive(Debug, Clone)]
pub struct KFullSpace {
    n: u64,
    k: u32,
    tuples: Vec<PartTuple>,
    omega: OmegaTable,
}

impl KFullSpace {
    /// `sieve` must reach `⌊N^(1/k)⌋`; one sieve of that size covers both
    /// the parts and `m`.
    pub fn new(n: u64, k: u32, sieve: &FactorSieve) -> Result<Self> {
        check_k(k)?;
        check_n(n)?;
        let need = integer_kth_root(n as u128, k) as u64;
        if sieve.limit() < need {
            return Err(Error::Domain(format!(
                "sieve limit {} below N^(1/k) = {need}",
                sieve.limit()
            )));
        }
        let tuples = part_tuples(n, k, sieve)?;
        let omega = sieve.omega_table()?;
        Ok(Self { n, k, tuples, omega })
    }

    /// Builds its own sieve of size `max(2, ⌊N^(1/k)⌋)`.
    pub fn build(n: u64, k: u32) -> Result<Self> {
        check_k(k)?;
        check_n(n)?;
        let sieve = FactorSieve::new(integer_kth_root(n as u128, k).max(2) as u64)?;
        Self::new(n, k, &sieve)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn tuples(&self) -> &[PartTuple] {
        &self.tuples
    }

    pub fn omega_table(&self) -> &OmegaTable {
        &self.omega
    }

    pub fn count(&self) -> u64 {
        self.tuples.iter().map(|t| t.m_max).sum()
    }

    /// Distribution of Ω over the k-full integers up to `N`.
    pub fn omega_histogram(&self) -> OmegaHistogram {
        let table = self.omega.as_slice();
        let k = self.k;
        self.tuples
            .par_iter()
            .fold(OmegaHistogram::new, |mut h, t| {
                let mut local = [0u64; 64];
                for &w in &table[1..=t.m_max as usize] {
                    local[w as usize] += 1;
                }
                for (w, &c) in local.iter().enumerate() {
                    if c > 0 {
                        h.add(k * w as u32 + t.omega, c);
                    }
                }
                h
            })
            .reduce(OmegaHistogram::new, |mut a, b| {
                a.merge(&b);
                a
            })
    }

    /// Streams every entry in generator order.
    pub fn entries(&self) -> impl Iterator<Item = KFullEntry> + '_ {
        let k = self.k;
        self.tuples.iter().flat_map(move |t| {
            (1..=t.m_max).map(move |m| {
                let mk = (m as u128).pow(k);
                KFullEntry {
                    value: (mk * t.product) as u64,
                    rep: KFullRep {
                        k,
                        m,
                        parts: t.parts.clone(),
                    },
                    omega: k * self.omega.as_slice()[m as usize] as u32 + t.omega,
                }
            })
        })
    }

    pub fn entries_ordered(&self, order: Order) -> Box<dyn Iterator<Item = KFullEntry> + '_> {
        match order {
            Order::Generator => Box::new(self.entries()),
            Order::Ascending => {
                let mut all: Vec<_> = self.entries().collect();
                all.sort_unstable_by_key(|e| e.value);
                Box::new(all.into_iter())
            }
        }
    }
}

/// Every k-full `n <= N` with its representation and Ω.
pub fn enumerate_kfull(n: u64, k: u32, sieve: &FactorSieve, order: Order) -> Result<Vec<KFullEntry>> {
    let space = KFullSpace::new(n, k, sieve)?;
    Ok(space.entries_ordered(order).collect())
}

/// Header of the binary entry dump.
///
/// Layout, all little-endian:
///
/// | bytes | field |
/// |-------|-------|
/// | 8 | magic `b"KFULLDMP"` |
/// | 4 | format version (`u32`, currently 1) |
/// | 4 | `k` (`u32`) |
/// | 8 | `N` (`u64`) |
///
/// followed by records of `20 + 8·(k-1)` bytes: value `u64`, `m` `u64`,
/// `n_1 … n_(k-1)` as `u64`, Ω as `u32`. Records run to end of file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub version: u32,
    pub k: u32,
    pub n: u64,
}

pub const DUMP_MAGIC: &[u8; 8] = b"KFULLDMP";
pub const DUMP_VERSION: u32 = 1;

pub fn write_dump<W: Write, I: IntoIterator<Item = KFullEntry>>(
    mut w: W,
    n: u64,
    k: u32,
    entries: I,
) -> io::Result<u64> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&k.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    let mut written = 0;
    for e in entries {
        if e.rep.parts.len() != k as usize - 1 {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "entry has wrong k"));
        }
        w.write_all(&e.value.to_le_bytes())?;
        w.write_all(&e.rep.m.to_le_bytes())?;
        for p in &e.rep.parts {
            w.write_all(&p.to_le_bytes())?;
        }
        w.write_all(&e.omega.to_le_bytes())?;
        written += 1;
    }
    Ok(written)
}

pub fn read_dump<R: Read>(mut r: R) -> io::Result<(DumpHeader, Vec<KFullEntry>)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if &head[..8] != DUMP_MAGIC {
        return Err(bad("not a k-full dump"));
    }
    let u32_at = |b: &[u8], i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
    let u64_at = |b: &[u8], i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
    let header = DumpHeader {
        version: u32_at(&head, 8),
        k: u32_at(&head, 12),
        n: u64_at(&head, 16),
    };
    if header.version != DUMP_VERSION {
        return Err(bad("unsupported dump version"));
    }
    if header.k < 2 {
        return Err(bad("dump header has k < 2"));
    }
    let width = 20 + 8 * (header.k as usize - 1);
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % width != 0 {
        return Err(bad("truncated record"));
    }
    let entries = body
        .chunks_exact(width)
        .map(|rec| KFullEntry {
            value: u64_at(rec, 0),
            rep: KFullRep {
                k: header.k,
                m: u64_at(rec, 8),
                parts: (0..header.k as usize - 1).map(|i| u64_at(rec, 16 + 8 * i)).collect(),
            },
            omega: u32_at(rec, width - 4),
        })
        .collect();
    Ok((header, entries))
}
