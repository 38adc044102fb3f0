//! Command-line configuration. The parsed [`Cli`] is plain data and
//! round-trips through serde.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Parses `1000`, `1_000`, `1e12` or `10^12`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    let bad = || format!("expected a positive integer such as 1000, 1e12 or 10^12, got {s:?}");
    let pow = |base: &str, exp: &str| -> Result<u64, String> {
        let b: u64 = base.parse().map_err(|_| bad())?;
        let e: u32 = exp.parse().map_err(|_| bad())?;
        b.checked_pow(e).ok_or_else(bad)
    };
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| bad())?;
        return m.checked_mul(pow("10", e)?).ok_or_else(bad);
    }
    if let Some((b, e)) = t.split_once('^') {
        return pow(b, e);
    }
    t.parse().map_err(|_| bad())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "kfull", version, about = "Finite-N experiments over k-full numbers")]
pub struct Cli {
    /// Worker threads (output does not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub output: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SystemKind {
    /// x ↦ x + α on the circle, f = e(hx)
    Circle,
    /// x ↦ x + 1 mod q, f(i) = e(h i / q)
    Cyclic,
    /// (x, y) ↦ (x + α, y + x), f = e(h x + h2 y)
    Skew,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value_t = SystemKind::Circle)]
    pub system: SystemKind,
    /// p/q, golden, sqrt2m1, or a decimal
    #[arg(long, default_value = "golden")]
    pub alpha: String,
    /// Number of points of the cyclic system.
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    /// Frequency of the test function.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub h: i64,
    /// Second frequency for the skew product.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub h2: i64,
    /// Starting point: coordinates in [0,1) separated by commas, or a state index.
    #[arg(long)]
    pub x: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ObservableKind {
    One,
    Liouville,
    /// f(T^Ω(n) x) for the chosen system
    Br,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum OrderArg {
    Generator,
    Ascending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum DomainArg {
    Kfull,
    AllN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum WindowArg {
    Tent,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ModeArg {
    Exact,
    Truncated,
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum RuleArg {
    Doubling,
    Sqrt,
    Max,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Q_k(N) against c_k N^(1/k) (and A√N + B N^(1/3) for k = 2)
    Count {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Stream every k-full n <= N with its representation and Ω
    Enum {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = OrderArg::Generator)]
        order: OrderArg,
        /// Write a binary dump here instead of streaming text.
        #[arg(long)]
        dump: Option<std::path::PathBuf>,
    },
    /// c_k by Euler product and by multi-sum; A and B for k = 2
    Constants {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_parser = parse_count, default_value = "1000000")]
        prime_limit: u64,
        /// Multi-sum box D_1,…,D_(k-1); defaults to 10^14 for k = 2 and
        /// D_i = ⌊10^(6/i)⌋ otherwise.
        #[arg(long = "D", value_delimiter = ',', value_parser = parse_count)]
        d: Option<Vec<u64>>,
    },
    /// Bergelson–Richter average over k-full numbers
    Br {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Erdős–Kac distribution, KS distance and histogram
    Ek {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = DomainArg::Kfull)]
        domain: DomainArg,
    },
    /// Erdős–Kac window times a Bergelson–Richter term
    Loyd {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = WindowArg::Tent)]
        window: WindowArg,
        #[arg(long, value_enum, default_value_t = DomainArg::Kfull)]
        domain: DomainArg,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Weyl sums of Ω(n)α over k-full numbers
    Weyl {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value = "golden")]
        alpha: String,
        /// Single frequency.
        #[arg(long, allow_negative_numbers = true, conflicts_with = "big_h")]
        h: Option<i64>,
        /// All frequencies 1..=H, with star discrepancy and Erdős–Turán bound.
        #[arg(long = "H")]
        big_h: Option<u32>,
    },
    /// Mean along k-th powers, with and without multipliers m
    Invariance {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        m: Vec<u64>,
        #[arg(long, value_enum, default_value_t = ObservableKind::Br)]
        observable: ObservableKind,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Nested-sum rewriting of the k-full average, exact or truncated
    Decompose {
        /// One N, or several separated by commas for a scan.
        #[arg(long = "N", value_delimiter = ',', value_parser = parse_count, required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Truncation box for mode truncated, or a fixed box for scans.
        #[arg(long = "D", value_delimiter = ',', value_parser = parse_count)]
        d: Option<Vec<u64>>,
        #[arg(long, value_enum, default_value_t = RuleArg::Doubling)]
        rule: RuleArg,
        #[arg(long, value_enum, default_value_t = ObservableKind::Liouville)]
        observable: ObservableKind,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Liouville mean, squarefree density and the squarefree average
    Baseline {
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[command(flatten)]
        sys: SystemArgs,
    },
}
