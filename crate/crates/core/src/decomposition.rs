//! The rewriting of a k-full average as nested averages over `m`.
//!
//! With `n = m^k ∏ n_i^(k+i)` every k-full sum splits into a sum over the
//! part tuples of an inner sum over `m <= M`, `M = ⌊(N/∏ n_i^(k+i))^(1/k)⌋`:
//!
//! ```text
//! N^(-1/k) Σ_{k-full n<=N} a(n) = Σ_tuples  M/N^(1/k) · E_{m<=M} a(m^k ∏ n_i^(k+i))
//! ```
//!
//! [`exact_decomposition`] checks this identity against an independent
//! direct scan. [`truncated_decomposition`] keeps tuples in a box
//! `n_i <= D_i` and replaces `M/N^(1/k)` by `1/∏ n_i^(1+i/k)`, then compares
//! the error against `Σ D_i^(-i/k) + N^(-1/(k(k+1)))`.
//!
//! Inner averages use the integer count `M`; an empty inner range
//! contributes nothing.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{FactorSieve, OmegaTable};
use crate::averages::{histogram_sum, Observable};
use crate::error::{Error, Result};
use crate::kfull::{integer_kth_root, is_kfull, visit_tuples, KFullSpace, Order};
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::VERSION;

/// Largest `N` for which the direct side of [`exact_decomposition`] scans
/// every integer; above it the direct side sums enumerated entries in
/// ascending order.
pub const DIRECT_SCAN_LIMIT: u64 = 10_000_000;

/// Relative tolerance of the exact identity.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionLedger {
    pub n: u64,
    pub k: u32,
    /// Box `(D_1, …, D_(k-1))`; for the exact form, the largest possible parts.
    pub d: Vec<u64>,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub s1_re: f64,
    pub s1_im: f64,
    pub measured_error: f64,
    /// Zero for the exact form.
    pub stated_bound: f64,
    /// `measured_error / stated_bound`; absent when the bound is zero.
    pub ratio: Option<f64>,
    /// Part tuples with a nonempty inner range.
    pub tuples: u64,
    pub observable: String,
    pub version: &'static str,
}

impl DecompositionLedger {
    pub fn lhs(&self) -> Complex64 {
        Complex64::new(self.lhs_re, self.lhs_im)
    }

    pub fn s1(&self) -> Complex64 {
        Complex64::new(self.s1_re, self.s1_im)
    }
}

fn check(n: u64, k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("k must be >= 2, got {k}")));
    }
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    Ok(())
}

fn root_f64(n: u64, k: u32) -> f64 {
    (n as f64).powf(1.0 / k as f64)
}

/// Largest admissible `D_i`: `⌊N^(1/((k−1)(k+i)))⌋`.
pub fn max_admissible(n: u64, k: u32) -> Vec<u64> {
    (1..k)
        .map(|i| integer_kth_root(n as u128, (k - 1) * (k + i)) as u64)
        .collect()
}

fn check_box(n: u64, k: u32, d: &[u64]) -> Result<()> {
    if d.len() != k as usize - 1 {
        return Err(Error::Domain(format!(
            "expected {} truncation bounds, got {}",
            k - 1,
            d.len()
        )));
    }
    for (i, &di) in d.iter().enumerate() {
        let e = (k - 1) * (k + 1 + i as u32);
        let ok = di >= 1 && (di as u128).checked_pow(e).is_some_and(|v| v <= n as u128);
        if !ok {
            return Err(Error::Domain(format!(
                "D_{} = {di} outside [1, N^(1/{e})] for N = {n}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Direct `Σ a(n)` and `Σ |a(n)|` over k-full `n <= N`, independent of the
/// tuple machinery when `N <= DIRECT_SCAN_LIMIT`.
fn direct_sum(obs: &Observable, n: u64, k: u32) -> Result<(Complex64, f64, u64)> {
    let mut acc = ComplexNeumaier::new();
    let mut abs = Neumaier::new();
    let mut count = 0u64;
    if n <= DIRECT_SCAN_LIMIT {
        let sieve = FactorSieve::new(n.max(2))?;
        for v in 1..=n {
            if is_kfull(v, k, &sieve)? {
                let a = obs.eval_at_omega(sieve.omega(v)?, n);
                acc.add(a);
                abs.add(a.norm());
                count += 1;
            }
        }
    } else {
        let space = KFullSpace::build(n, k)?;
        for entry in space.entries_ordered(Order::Ascending) {
            let a = obs.eval_at_omega(entry.omega, n);
            acc.add(a);
            abs.add(a.norm());
            count += 1;
        }
    }
    Ok((acc.value(), abs.value(), count))
}

/// Sum of `a` over `m <= m_max` at `ω = base + kΩ(m)`.
fn inner_sum(obs: &Observable, omega: &OmegaTable, n: u64, k: u32, base: u32, m_max: u64) -> Result<Complex64> {
    let mut acc = ComplexNeumaier::new();
    for m in 1..=m_max {
        acc.add(obs.eval_at_omega(base + k * omega.get(m)?, n));
    }
    Ok(acc.value())
}

/// Evaluates both sides of the untruncated rewriting and fails with a
/// consistency error if they differ by more than `EXACT_TOLERANCE` relative
/// to `N^(-1/k) Σ |a(n)|`.
pub fn exact_decomposition(obs: &Observable, n: u64, k: u32) -> Result<DecompositionLedger> {
    check(n, k)?;
    let root = root_f64(n, k);
    let (direct, abs, _) = direct_sum(obs, n, k)?;
    let lhs = direct / root;

    let space = KFullSpace::build(n, k)?;
    let table = space.omega_table();
    let mut nested = ComplexNeumaier::new();
    let mut tuples = 0u64;
    for t in space.tuples() {
        if t.m_max == 0 {
            continue;
        }
        tuples += 1;
        nested.add(inner_sum(obs, table, n, k, t.omega, t.m_max)?);
    }
    let s1 = nested.value() / root;
    let err = (lhs - s1).norm();
    let scale = (abs / root).max(f64::MIN_POSITIVE);
    if err > EXACT_TOLERANCE * scale {
        return Err(Error::Consistency(format!(
            "nested sum {s1} differs from direct sum {lhs} by {err:e} (N = {n}, k = {k})"
        )));
    }
    let d = (1..k).map(|i| integer_kth_root(n as u128, k + i) as u64).collect();
    Ok(DecompositionLedger {
        n,
        k,
        d,
        lhs_re: lhs.re,
        lhs_im: lhs.im,
        s1_re: s1.re,
        s1_im: s1.im,
        measured_error: err,
        stated_bound: 0.0,
        ratio: None,
        tuples,
        observable: obs.description().to_string(),
        version: VERSION,
    })
}

/// Per-N data shared by every box of a scan.
struct ScanContext {
    n: u64,
    k: u32,
    lhs: Complex64,
    omega: OmegaTable,
}

impl ScanContext {
    fn new(obs: &Observable, n: u64, k: u32) -> Result<Self> {
        check(n, k)?;
        let space = KFullSpace::build(n, k)?;
        let lhs = histogram_sum(obs, &space.omega_histogram(), n, 1, 0) / root_f64(n, k);
        let m_limit = integer_kth_root(n as u128, k).max(2) as u64;
        let omega = FactorSieve::new(m_limit)?.omega_table()?;
        Ok(ScanContext { n, k, lhs, omega })
    }

    /// `admissible` enforces `D_i <= N^(1/((k−1)(k+i)))`; otherwise any
    /// `D_i >= 1` is accepted.
    fn ledger(&self, obs: &Observable, d: &[u64], admissible: bool) -> Result<DecompositionLedger> {
        let (n, k) = (self.n, self.k);
        if admissible {
            check_box(n, k, d)?;
        } else if d.len() != k as usize - 1 || d.contains(&0) {
            return Err(Error::Domain(format!(
                "expected {} truncation bounds >= 1, got {d:?}",
                k - 1
            )));
        }
        let sieve = FactorSieve::new(d.iter().copied().max().unwrap_or(1).max(2))?;
        let mut s1 = ComplexNeumaier::new();
        let mut tuples = 0u64;
        let mut failure = None;
        visit_tuples(n as u128, k, Some(d), &sieve, &mut |parts, quotient, omega| {
            let m_max = integer_kth_root(quotient, k) as u64;
            if m_max == 0 || failure.is_some() {
                return;
            }
            tuples += 1;
            let weight: f64 = parts
                .iter()
                .enumerate()
                .map(|(i, &p)| (p as f64).powf(-(1.0 + (i as f64 + 1.0) / k as f64)))
                .product();
            match inner_sum(obs, &self.omega, n, k, omega, m_max) {
                Ok(sum) => s1.add(sum * (weight / m_max as f64)),
                Err(e) => failure = Some(e),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let s1 = s1.value();
        let err = (self.lhs - s1).norm();
        let kf = k as f64;
        let bound = d
            .iter()
            .enumerate()
            .map(|(i, &di)| (di as f64).powf(-(i as f64 + 1.0) / kf))
            .sum::<f64>()
            + (n as f64).powf(-1.0 / (kf * (kf + 1.0)));
        Ok(DecompositionLedger {
            n,
            k,
            d: d.to_vec(),
            lhs_re: self.lhs.re,
            lhs_im: self.lhs.im,
            s1_re: s1.re,
            s1_im: s1.im,
            measured_error: err,
            stated_bound: bound,
            ratio: Some(err / bound),
            tuples,
            observable: obs.description().to_string(),
            version: VERSION,
        })
    }
}

/// Truncated rewriting over the box `n_i <= D_i`, with
/// `1 <= D_i <= N^(1/((k−1)(k+i)))`.
pub fn truncated_decomposition(obs: &Observable, n: u64, k: u32, d: &[u64]) -> Result<DecompositionLedger> {
    check(n, k)?;
    check_box(n, k, d)?;
    ScanContext::new(obs, n, k)?.ledger(obs, d, true)
}

/// How truncation boxes are chosen for each `N` of a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DRule {
    /// `D = 2, 4, 8, …` below the admissible maximum, then the maximum,
    /// applied to every index and capped per index.
    Doubling,
    /// `D_i = ⌊√max_i⌋`.
    SqrtOfMax,
    /// `D_i = max_i`.
    Max,
    /// The same box for every `N`. It is not checked against the
    /// admissible range, so a scan can also probe boxes beyond it.
    Fixed(Vec<u64>),
}

impl DRule {
    pub fn boxes(&self, n: u64, k: u32) -> Vec<Vec<u64>> {
        let max = max_admissible(n, k);
        match self {
            DRule::Doubling => {
                let top = max.iter().copied().max().unwrap_or(1);
                let mut out = Vec::new();
                let mut t = 2u64;
                while t < top {
                    out.push(max.iter().map(|&m| t.min(m).max(1)).collect());
                    t *= 2;
                }
                out.push(max.iter().map(|&m| m.max(1)).collect());
                out
            }
            DRule::SqrtOfMax => vec![max
                .iter()
                .map(|&m| (integer_kth_root(m as u128, 2) as u64).max(1))
                .collect()],
            DRule::Max => vec![max.iter().map(|&m| m.max(1)).collect()],
            DRule::Fixed(d) => vec![d.clone()],
        }
    }
}

/// Truncated ledgers for every `N` in the list and every box of the rule.
pub fn error_exponent_scan(obs: &Observable, k: u32, n_list: &[u64], rule: &DRule) -> Result<Vec<DecompositionLedger>> {
    if n_list.is_empty() {
        return Err(Error::Domain("scan needs at least one N".into()));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let ctx = ScanContext::new(obs, n, k)?;
        let admissible = !matches!(rule, DRule::Fixed(_));
        for d in rule.boxes(n, k) {
            rows.push(ctx.ledger(obs, &d, admissible)?);
        }
    }
    Ok(rows)
}

/// `re` when the imaginary part is zero, otherwise `re+imi` / `re-imi`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// `N,k,D1..D(k-1),lhs,s1,err,bound,ratio`
pub fn csv_header(k: u32) -> Vec<String> {
    let mut h = vec!["N".to_string(), "k".to_string()];
    h.extend((1..k).map(|i| format!("D{i}")));
    h.extend(["lhs", "s1", "err", "bound", "ratio"].map(String::from));
    h
}

pub fn csv_record(row: &DecompositionLedger) -> Vec<String> {
    let mut r = vec![row.n.to_string(), row.k.to_string()];
    r.extend(row.d.iter().map(u64::to_string));
    r.push(format_complex(row.lhs()));
    r.push(format_complex(row.s1()));
    r.push(row.measured_error.to_string());
    r.push(row.stated_bound.to_string());
    r.push(row.ratio.map(|x| x.to_string()).unwrap_or_default());
    r
}
