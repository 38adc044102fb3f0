//! Finite-N averages of observables that depend on `n` only through Ω(n).
//!
//! Every average here is a reduction of an [`OmegaHistogram`]: the k-full
//! histogram comes from [`KFullSpace`], the histogram of all `n <= N` from a
//! segmented census or from prime counts. Histograms are integer counts, so
//! their parallel construction is exact, and the floating-point reduction runs
//! in increasing Ω with compensated summation. Reports are therefore
//! bit-identical across thread counts.

use std::fmt;
use std::sync::Arc;

use libm::erfc;
use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{omega_census, omega_distribution, omega_trial, OmegaHistogram};
use crate::dynamics::{e, Alpha, DynSystem, Point, TestFunction};
use crate::error::{Error, Result};
use crate::kfull::KFullSpace;
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::VERSION;

/// Above this `N`, the distribution of Ω over all `n <= N` is obtained from
/// prime counts instead of the segmented census.
pub const CENSUS_LIMIT: u64 = 100_000_000;

type OmegaFn = dyn Fn(u32, u64) -> Complex64 + Send + Sync;

/// `a(n) = g(Ω(n), N)`.
#[derive(Clone)]
pub struct Observable {
    g: Arc<OmegaFn>,
    description: String,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("description", &self.description)
            .finish()
    }
}

impl Observable {
    pub fn new<F>(description: impl Into<String>, g: F) -> Self
    where
        F: Fn(u32, u64) -> Complex64 + Send + Sync + 'static,
    {
        Observable {
            g: Arc::new(g),
            description: description.into(),
        }
    }

    pub fn eval_at_omega(&self, omega: u32, n: u64) -> Complex64 {
        (self.g)(omega, n)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn constant(c: Complex64) -> Self {
        Observable::new(format!("constant {c}"), move |_, _| c)
    }

    pub fn one() -> Self {
        Observable::new("constant 1", |_, _| Complex64::new(1.0, 0.0))
    }

    /// `λ(n) = (-1)^Ω(n)`
    pub fn liouville() -> Self {
        Observable::new("liouville", |w, _| {
            Complex64::new(if w % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
    }

    /// `f(T^Ω(n) x)`
    pub fn birkhoff(system: &DynSystem, f: &TestFunction, x: &Point) -> Result<Self> {
        system.check_point(x)?;
        system.check_function(f)?;
        const TABLE: usize = 512;
        let table = system.orbit_values(f, x, TABLE)?;
        let (system, f, x) = (system.clone(), f.clone(), x.clone());
        let description = format!("birkhoff {system:?} {f:?} x={x:?}");
        Ok(Observable::new(description, move |w, _| match table.get(w as usize) {
            Some(&v) => v,
            None => system
                .iterate(w as u64, &x)
                .and_then(|p| f.eval(&p))
                .expect("validated at construction"),
        }))
    }

    /// `e(h·Ω(n)·α)`
    pub fn weyl(alpha: Alpha, h: i64) -> Self {
        Observable::new(format!("weyl alpha={alpha} h={h}"), move |w, _| {
            e(alpha.frac_mul_signed(h as i128 * w as i128))
        })
    }

    /// `F((Ω(n) − c log log N)/(c √(log log N)))`
    pub fn window(window: Window, c: f64) -> Self {
        Observable::new(format!("{window:?} window c={c}"), move |w, n| {
            Complex64::new(window.eval(ek_normalize(w, n, c)), 0.0)
        })
    }

    /// Pointwise product.
    pub fn times(&self, other: &Observable) -> Self {
        let (a, b) = (self.g.clone(), other.g.clone());
        Observable::new(
            format!("({}) * ({})", self.description, other.description),
            move |w, n| a(w, n) * b(w, n),
        )
    }
}

/// `(ω − c·log log N)/(c·√(log log N))`
pub fn ek_normalize(omega: u32, n: u64, c: f64) -> f64 {
    let ll = (n as f64).ln().ln();
    (omega as f64 - c * ll) / (c * ll.sqrt())
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Compactly supported windows on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `max(0, 1 − |t|)`
    Tent,
    /// `(1 − t²)³` on `[-1, 1]`, twice continuously differentiable
    Bump,
    /// Identically zero.
    Zero,
}

impl Window {
    pub fn eval(&self, t: f64) -> f64 {
        if !(-1.0..=1.0).contains(&t) {
            return 0.0;
        }
        match self {
            Window::Tent => 1.0 - t.abs(),
            Window::Bump => {
                let s = 1.0 - t * t;
                s * s * s
            }
            Window::Zero => 0.0,
        }
    }

    /// `∫ F dΦ`, in closed form from the even moments
    /// `M_2j = ∫_{-1}^{1} t^2j φ(t) dt = (2j−1) M_{2j−2} − 2φ(1)`.
    pub fn gaussian_mass(&self) -> f64 {
        let phi1 = std_normal_pdf(1.0);
        let m0 = 2.0 * std_normal_cdf(1.0) - 1.0;
        match self {
            // 2 ∫_0^1 (1 − t) φ(t) dt
            Window::Tent => m0 - 2.0 * (std_normal_pdf(0.0) - phi1),
            Window::Bump => {
                let m2 = m0 - 2.0 * phi1;
                let m4 = 3.0 * m2 - 2.0 * phi1;
                let m6 = 5.0 * m4 - 2.0 * phi1;
                m0 - 3.0 * m2 + 3.0 * m4 - m6
            }
            Window::Zero => 0.0,
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tent" => Ok(Window::Tent),
            "bump" => Ok(Window::Bump),
            "zero" => Ok(Window::Zero),
            _ => Err(Error::Domain(format!("unknown window {s:?}; expected tent or bump"))),
        }
    }
}

/// Which integers an Erdős–Kac or Loyd statistic runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Kfull,
    AllN,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kfull" => Ok(Domain::Kfull),
            "all_n" | "all" => Ok(Domain::AllN),
            _ => Err(Error::Domain(format!("unknown domain {s:?}; expected kfull or all_n"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub value_re: f64,
    pub value_im: f64,
    pub n: u64,
    pub k: u32,
    pub term_count: u64,
    pub target_re: Option<f64>,
    pub target_im: Option<f64>,
    /// `|value − target|`
    pub deviation: Option<f64>,
    pub observable: String,
    pub version: &'static str,
}

impl AverageReport {
    fn new(value: Complex64, n: u64, k: u32, term_count: u64, obs: &Observable) -> Self {
        AverageReport {
            value_re: value.re,
            value_im: value.im,
            n,
            k,
            term_count,
            target_re: None,
            target_im: None,
            deviation: None,
            observable: obs.description().to_string(),
            version: VERSION,
        }
    }

    pub fn with_target(mut self, target: Complex64) -> Self {
        self.target_re = Some(target.re);
        self.target_im = Some(target.im);
        self.deviation = Some((self.value() - target).norm());
        self
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }

    pub fn target(&self) -> Option<Complex64> {
        Some(Complex64::new(self.target_re?, self.target_im?))
    }
}

/// `Σ_ω count(ω)·g(kω + shift, N)` in increasing ω.
pub fn histogram_sum(obs: &Observable, hist: &OmegaHistogram, n: u64, scale: u32, shift: u32) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for (w, c) in hist.iter() {
        acc.add(obs.eval_at_omega(scale * w + shift, n) * c as f64);
    }
    acc.value()
}

/// Ω histogram of the k-full numbers up to `n`.
pub fn kfull_histogram(n: u64, k: u32) -> Result<OmegaHistogram> {
    Ok(KFullSpace::build(n, k)?.omega_histogram())
}

/// Ω histogram of `1..=n`.
pub fn all_n_histogram(n: u64) -> Result<OmegaHistogram> {
    if n <= CENSUS_LIMIT {
        Ok(omega_census(n)?.all)
    } else {
        omega_distribution(n)
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    Ok(())
}

/// Average over a precomputed k-full histogram.
pub fn kfull_average_from(obs: &Observable, hist: &OmegaHistogram, n: u64, k: u32) -> AverageReport {
    let total = hist.total();
    let v = histogram_sum(obs, hist, n, 1, 0) / total as f64;
    AverageReport::new(v, n, k, total, obs)
}

/// `(1/Q_k(N)) Σ_{n<=N, n k-full} a(n)`
pub fn kfull_average(obs: &Observable, n: u64, k: u32) -> Result<AverageReport> {
    let hist = kfull_histogram(n, k)?;
    Ok(kfull_average_from(obs, &hist, n, k))
}

/// Average of `a(n^k m)` over a precomputed histogram of all `n <= N`.
pub fn shifted_power_average_from(
    obs: &Observable,
    hist: &OmegaHistogram,
    n: u64,
    k: u32,
    m: u64,
) -> Result<AverageReport> {
    check_k(k)?;
    if m == 0 {
        return Err(Error::Domain("multiplier m must be >= 1".into()));
    }
    let wm = omega_trial(m)?;
    let v = histogram_sum(obs, hist, n, k, wm) / hist.total() as f64;
    Ok(AverageReport::new(v, n, k, hist.total(), obs))
}

/// `(1/N) Σ_{n<=N} a(n^k)`
pub fn power_average(obs: &Observable, n: u64, k: u32) -> Result<AverageReport> {
    shifted_power_average(obs, n, k, 1)
}

/// `(1/N) Σ_{n<=N} a(n^k m)`
pub fn shifted_power_average(obs: &Observable, n: u64, k: u32, m: u64) -> Result<AverageReport> {
    check_k(k)?;
    let hist = all_n_histogram(n)?;
    shifted_power_average_from(obs, &hist, n, k, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceRow {
    pub m: u64,
    pub omega_m: u32,
    pub value_re: f64,
    pub value_im: f64,
    /// `|shifted − unshifted|`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub n: u64,
    pub k: u32,
    pub observable: String,
    pub base_re: f64,
    pub base_im: f64,
    pub rows: Vec<InvarianceRow>,
    pub max_deviation: f64,
    pub version: &'static str,
}

/// Compares `(1/N) Σ a(n^k m)` against `(1/N) Σ a(n^k)` for each `m`.
pub fn k_invariance_check(obs: &Observable, n: u64, k: u32, m_set: &[u64]) -> Result<InvarianceReport> {
    check_k(k)?;
    let hist = all_n_histogram(n)?;
    let base = shifted_power_average_from(obs, &hist, n, k, 1)?.value();
    let mut rows = Vec::with_capacity(m_set.len());
    for &m in m_set {
        let v = shifted_power_average_from(obs, &hist, n, k, m)?.value();
        rows.push(InvarianceRow {
            m,
            omega_m: omega_trial(m)?,
            value_re: v.re,
            value_im: v.im,
            deviation: (v - base).norm(),
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(InvarianceReport {
        n,
        k,
        observable: obs.description().to_string(),
        base_re: base.re,
        base_im: base.im,
        rows,
        max_deviation,
        version: VERSION,
    })
}

/// Bergelson–Richter average `E_{k-full n<=N} f(T^Ω(n) x)` against `∫ f dμ`.
pub fn br_average(system: &DynSystem, f: &TestFunction, x: &Point, n: u64, k: u32) -> Result<AverageReport> {
    let hist = kfull_histogram(n, k)?;
    br_average_from(system, f, x, &hist, n, k)
}

pub fn br_average_from(
    system: &DynSystem,
    f: &TestFunction,
    x: &Point,
    hist: &OmegaHistogram,
    n: u64,
    k: u32,
) -> Result<AverageReport> {
    let obs = Observable::birkhoff(system, f, x)?;
    let target = system.invariant_integral(f)?;
    Ok(kfull_average_from(&obs, hist, n, k).with_target(target))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkAtom {
    pub omega: u32,
    pub z: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkBin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub gauss_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EKReport {
    pub n: u64,
    pub k: u32,
    pub domain: Domain,
    pub sample_count: u64,
    pub ks_distance: f64,
    pub mean: f64,
    pub variance: f64,
    /// Mass below the first bin.
    pub underflow: f64,
    /// Mass at or above the last bin.
    pub overflow: f64,
    pub bins: Vec<EkBin>,
    pub atoms: Vec<EkAtom>,
    pub version: &'static str,
}

/// Histogram bins: `EK_BINS` equal bins covering `[-EK_RANGE, EK_RANGE)`.
pub const EK_BINS: usize = 32;
pub const EK_RANGE: f64 = 4.0;

fn check_ek_n(n: u64) -> Result<()> {
    if n < 16 {
        return Err(Error::Domain(format!("Erdős–Kac statistics need N >= 16, got {n}")));
    }
    Ok(())
}

fn domain_histogram(n: u64, k: u32, domain: Domain) -> Result<(OmegaHistogram, f64, u32)> {
    Ok(match domain {
        Domain::Kfull => (kfull_histogram(n, k)?, k as f64, k),
        Domain::AllN => (all_n_histogram(n)?, 1.0, 1),
    })
}

/// Distribution of the Erdős–Kac normalised Ω over the domain, with `c = k`
/// for k-full numbers and `c = 1` for all integers.
pub fn ek_statistics(n: u64, k: u32, domain: Domain) -> Result<EKReport> {
    check_ek_n(n)?;
    let (hist, c, k) = domain_histogram(n, k, domain)?;
    Ok(ek_from_histogram(&hist, n, k, c, domain))
}

/// KS distance, moments and binned masses of the atoms `(z(ω), count(ω))`.
///
/// The empirical CDF is a step function, so the supremum of `|F − Φ|` is
/// attained at one side of a jump; both sides are checked.
pub fn ek_from_histogram(hist: &OmegaHistogram, n: u64, k: u32, c: f64, domain: Domain) -> EKReport {
    let total = hist.total();
    let tf = total as f64;
    let mut atoms = Vec::new();
    let mut ks: f64 = 0.0;
    let mut below: u64 = 0;
    let mut mean = Neumaier::new();
    for (w, cnt) in hist.iter() {
        let z = ek_normalize(w, n, c);
        let phi = std_normal_cdf(z);
        let before = below as f64 / tf;
        below += cnt;
        let after = below as f64 / tf;
        ks = ks.max((phi - before).abs()).max((phi - after).abs());
        let mass = cnt as f64 / tf;
        mean.add(mass * z);
        atoms.push(EkAtom { omega: w, z, mass });
    }
    let mean = mean.value();
    let mut var = Neumaier::new();
    for a in &atoms {
        var.add(a.mass * (a.z - mean) * (a.z - mean));
    }
    let width = 2.0 * EK_RANGE / EK_BINS as f64;
    let mut bin_counts = vec![0u64; EK_BINS];
    let (mut under, mut over) = (0u64, 0u64);
    for (a, (_, cnt)) in atoms.iter().zip(hist.iter()) {
        let pos = ((a.z + EK_RANGE) / width).floor();
        if pos < 0.0 {
            under += cnt;
        } else if pos >= EK_BINS as f64 {
            over += cnt;
        } else {
            bin_counts[pos as usize] += cnt;
        }
    }
    let bins = bin_counts
        .iter()
        .enumerate()
        .map(|(i, &cnt)| {
            let lo = -EK_RANGE + i as f64 * width;
            let hi = lo + width;
            EkBin {
                lo,
                hi,
                mass: cnt as f64 / tf,
                gauss_mass: std_normal_cdf(hi) - std_normal_cdf(lo),
            }
        })
        .collect();
    EKReport {
        n,
        k,
        domain,
        sample_count: total,
        ks_distance: ks,
        mean,
        variance: var.value(),
        underflow: under as f64 / tf,
        overflow: over as f64 / tf,
        bins,
        atoms,
        version: VERSION,
    }
}

/// Loyd average `E F(z(n)) f(T^Ω(n) x)` against `(∫ F dΦ)(∫ f dμ)`.
#[allow(clippy::too_many_arguments)]
pub fn loyd_average(
    system: &DynSystem,
    f: &TestFunction,
    x: &Point,
    window: Window,
    n: u64,
    k: u32,
    domain: Domain,
) -> Result<AverageReport> {
    check_ek_n(n)?;
    let (hist, c, k) = domain_histogram(n, k, domain)?;
    loyd_average_from(system, f, x, window, &hist, n, k, c)
}

#[allow(clippy::too_many_arguments)]
pub fn loyd_average_from(
    system: &DynSystem,
    f: &TestFunction,
    x: &Point,
    window: Window,
    hist: &OmegaHistogram,
    n: u64,
    k: u32,
    c: f64,
) -> Result<AverageReport> {
    let obs = Observable::window(window, c).times(&Observable::birkhoff(system, f, x)?);
    let target = system.invariant_integral(f)? * window.gaussian_mass();
    Ok(kfull_average_from(&obs, hist, n, k).with_target(target))
}

/// `E_{k-full n<=N} e(h Ω(n) α)`
pub fn weyl_sum(alpha: Alpha, h: i64, n: u64, k: u32) -> Result<Complex64> {
    Ok(weyl_report(alpha, h, n, k)?.value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    pub value_re: f64,
    pub value_im: f64,
    pub modulus: f64,
    pub n: u64,
    pub k: u32,
    pub h: i64,
    pub alpha: String,
    pub term_count: u64,
    pub version: &'static str,
}

impl WeylReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

pub fn weyl_report(alpha: Alpha, h: i64, n: u64, k: u32) -> Result<WeylReport> {
    let hist = kfull_histogram(n, k)?;
    weyl_from_histogram(alpha, h, &hist, n, k)
}

pub fn weyl_from_histogram(alpha: Alpha, h: i64, hist: &OmegaHistogram, n: u64, k: u32) -> Result<WeylReport> {
    if h == 0 {
        return Err(Error::Domain("Weyl sums need h != 0".into()));
    }
    let v = kfull_average_from(&Observable::weyl(alpha, h), hist, n, k).value();
    Ok(WeylReport {
        value_re: v.re,
        value_im: v.im,
        modulus: v.norm(),
        n,
        k,
        h,
        alpha: alpha.to_string(),
        term_count: hist.total(),
        version: VERSION,
    })
}

/// Star discrepancy of a finite sample in `[0, 1)`:
/// `max_i max(i/n − x_(i), x_(i) − (i−1)/n)` over the sorted sample.
pub fn star_discrepancy(samples: &[f64]) -> Result<f64> {
    let atoms: Vec<(f64, u64)> = samples.iter().map(|&x| (x, 1)).collect();
    star_discrepancy_weighted(&atoms)
}

/// Star discrepancy of a sample given as `(point, multiplicity)` atoms.
pub fn star_discrepancy_weighted(atoms: &[(f64, u64)]) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::Domain("star discrepancy of an empty sample".into()));
    }
    if let Some(&(x, _)) = atoms.iter().find(|(x, _)| !(0.0..1.0).contains(x)) {
        return Err(Error::Domain(format!("sample point {x} outside [0, 1)")));
    }
    let mut sorted = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: u64 = sorted.iter().map(|a| a.1).sum();
    if total == 0 {
        return Err(Error::Domain("star discrepancy with zero total weight".into()));
    }
    let tf = total as f64;
    let mut below = 0u64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // merge equal points so the jump is taken at once
        let x = sorted[i].0;
        let before = below as f64 / tf;
        while i < sorted.len() && sorted[i].0 == x {
            below += sorted[i].1;
            i += 1;
        }
        let after = below as f64 / tf;
        d = d.max(after - x).max(x - before);
    }
    Ok(d)
}

/// Erdős–Turán bound on discrepancy from Weyl sums `|W_1|, …, |W_H|`:
/// `6/(H+1) + (4/π) Σ_h (1/h − 1/(H+1)) |W_h|`. It bounds the extreme
/// discrepancy and hence the star discrepancy.
pub fn erdos_turan_bound(weyl_moduli: &[f64]) -> f64 {
    let hp1 = weyl_moduli.len() as f64 + 1.0;
    let tail: f64 = weyl_moduli
        .iter()
        .enumerate()
        .map(|(i, w)| (1.0 / (i + 1) as f64 - 1.0 / hp1) * w)
        .sum();
    6.0 / hp1 + 4.0 / std::f64::consts::PI * tail
}

/// Atoms `(frac(ω α), count)` of the k-full histogram.
pub fn omega_alpha_atoms(alpha: Alpha, hist: &OmegaHistogram) -> Vec<(f64, u64)> {
    hist.iter().map(|(w, c)| (alpha.frac_mul(w as u128), c)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquarefreeReport {
    /// `E_{n<=N, squarefree} a(n)`
    pub normalized: AverageReport,
    /// `(1/N) Σ_{n<=N} μ²(n) a(n)`
    pub unnormalized_re: f64,
    pub unnormalized_im: f64,
    /// `(1/N) #{n <= N squarefree}`
    pub density: f64,
}

/// Averages over squarefree `n <= N`, both normalised by their count and by `N`.
pub fn squarefree_average(obs: &Observable, n: u64) -> Result<SquarefreeReport> {
    let census = omega_census(n)?;
    let count = census.squarefree.total();
    let sum = histogram_sum(obs, &census.squarefree, n, 1, 0);
    let normalized = AverageReport::new(sum / count as f64, n, 1, count, obs);
    Ok(SquarefreeReport {
        normalized,
        unnormalized_re: sum.re / n as f64,
        unnormalized_im: sum.im / n as f64,
        density: count as f64 / n as f64,
    })
}

/// `(1/N) Σ_{n<=N} λ(n)`
pub fn liouville_mean(n: u64) -> Result<f64> {
    Ok(power_average(&Observable::liouville(), n, 1)?.value_re)
}
