use std::fs::File;
use std::io::{BufWriter, Write};

use kfull_core::averages::{
    self, all_n_histogram, br_average, ek_statistics, erdos_turan_bound, k_invariance_check, kfull_histogram,
    liouville_mean, loyd_average, omega_alpha_atoms, squarefree_average, star_discrepancy_weighted,
    weyl_from_histogram, AverageReport, Observable, WeylReport,
};
use kfull_core::constants::{
    bateman_grosswald_constants, count_vs_asymptotic, euler_product_ck, multisum_ck, zeta, ConstantEstimate, EulerTail,
};
use kfull_core::decomposition::{
    csv_header, csv_record, error_exponent_scan, exact_decomposition, truncated_decomposition, DRule,
};
use kfull_core::dynamics::{e, Alpha, DynSystem, Point, TestFunction};
use kfull_core::kfull::{write_dump, KFullEntry, KFullSpace, Order};
use kfull_core::VERSION;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{
    Cli, Command, DomainArg, Format, ModeArg, ObservableKind, OrderArg, RuleArg, SystemArgs, SystemKind, WindowArg,
};
use crate::CliError;

type Out<'a> = &'a mut dyn Write;

fn json<T: Serialize>(out: Out, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_rows(out: Out, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn check_k(k: u32) -> Result<(), CliError> {
    if k < 2 {
        return Err(CliError::Usage(format!("--k must be >= 2, got {k}")));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--N must be >= 1".into()));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli, out: Out) -> Result<(), CliError> {
    let fmt = cli.output;
    match &cli.command {
        Command::Count { n, k } => count(out, fmt, *n, *k),
        Command::Enum { n, k, order, dump } => enumerate(out, fmt, *n, *k, *order, dump.as_deref()),
        Command::Constants { k, prime_limit, d } => constants(out, fmt, *k, *prime_limit, d.as_deref()),
        Command::Br { n, k, sys } => br(out, fmt, *n, *k, sys),
        Command::Ek { n, k, domain } => ek(out, fmt, *n, *k, *domain),
        Command::Loyd {
            n,
            k,
            window,
            domain,
            sys,
        } => loyd(out, fmt, *n, *k, *window, *domain, sys),
        Command::Weyl { n, k, alpha, h, big_h } => weyl(out, fmt, *n, *k, alpha, *h, *big_h),
        Command::Invariance {
            n,
            k,
            m,
            observable,
            sys,
        } => invariance(out, fmt, *n, *k, m, *observable, sys),
        Command::Decompose {
            n,
            k,
            mode,
            d,
            rule,
            observable,
            sys,
        } => decompose(out, fmt, n, *k, *mode, d.as_deref(), *rule, *observable, sys),
        Command::Baseline { n, sys } => baseline(out, fmt, *n, sys),
    }
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    #[serde(flatten)]
    inner: T,
    version: &'static str,
}

fn versioned<T: Serialize>(inner: T) -> Versioned<T> {
    Versioned {
        inner,
        version: VERSION,
    }
}

fn count(out: Out, fmt: Format, n: u64, k: u32) -> Result<(), CliError> {
    check_k(k)?;
    check_n(n)?;
    let r = count_vs_asymptotic(n, k)?;
    match fmt {
        Format::Json => json(out, &versioned(&r)),
        Format::Csv => {
            let header = strings(&[
                "N",
                "k",
                "Q",
                "c_k",
                "main_term",
                "residual",
                "normalized_residual",
                "two_term_main",
                "two_term_residual",
                "two_term_normalized",
            ]);
            let t = r.two_term.as_ref();
            let row = vec![
                r.n.to_string(),
                r.k.to_string(),
                r.q.to_string(),
                r.c_k.to_string(),
                r.main_term.to_string(),
                r.residual.to_string(),
                r.normalized_residual.to_string(),
                opt(t.map(|t| t.main_term)),
                opt(t.map(|t| t.residual)),
                opt(t.map(|t| t.normalized_residual)),
            ];
            csv_rows(out, &header, [row])
        }
    }
}

#[derive(Serialize)]
struct EntryLine<'a> {
    value: u64,
    m: u64,
    parts: &'a [u64],
    omega: u32,
}

#[derive(Serialize)]
struct DumpSummary {
    n: u64,
    k: u32,
    count: u64,
    path: String,
    version: &'static str,
}

fn enumerate(
    out: Out,
    fmt: Format,
    n: u64,
    k: u32,
    order: OrderArg,
    dump: Option<&std::path::Path>,
) -> Result<(), CliError> {
    check_k(k)?;
    check_n(n)?;
    let space = KFullSpace::build(n, k)?;
    let order = match order {
        OrderArg::Generator => Order::Generator,
        OrderArg::Ascending => Order::Ascending,
    };
    let entries = space.entries_ordered(order);
    if let Some(path) = dump {
        let file =
            File::create(path).map_err(|e| CliError::Compute(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let count = write_dump(&mut w, n, k, entries)?;
        w.flush()?;
        let summary = DumpSummary {
            n,
            k,
            count,
            path: path.display().to_string(),
            version: VERSION,
        };
        return match fmt {
            Format::Json => json(out, &summary),
            Format::Csv => csv_rows(
                out,
                &strings(&["N", "k", "count", "path"]),
                [vec![
                    n.to_string(),
                    k.to_string(),
                    count.to_string(),
                    summary.path.clone(),
                ]],
            ),
        };
    }
    match fmt {
        Format::Json => {
            for KFullEntry { value, rep, omega } in entries {
                let line = EntryLine {
                    value,
                    m: rep.m,
                    parts: &rep.parts,
                    omega,
                };
                serde_json::to_writer(&mut *out, &line)?;
                writeln!(out)?;
            }
            Ok(())
        }
        Format::Csv => {
            let mut header = strings(&["value", "m"]);
            header.extend((1..k).map(|i| format!("n{i}")));
            header.push("omega".into());
            let rows = entries.map(|e| {
                let mut r = vec![e.value.to_string(), e.rep.m.to_string()];
                r.extend(e.rep.parts.iter().map(u64::to_string));
                r.push(e.omega.to_string());
                r
            });
            csv_rows(out, &header, rows)
        }
    }
}

#[derive(Serialize)]
struct ConstantsReport {
    k: u32,
    prime_limit: u64,
    euler: ConstantEstimate,
    euler_bounded: ConstantEstimate,
    multisum_d: Vec<u64>,
    multisum: ConstantEstimate,
    /// |euler − multisum| <= sum of both bounds
    methods_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta_ratio: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    version: &'static str,
}

/// Default multi-sum box: `10^14` for `k = 2`, else `D_i = ⌊10^(6/i)⌋`.
pub fn default_box(k: u32) -> Vec<u64> {
    if k == 2 {
        vec![100_000_000_000_000]
    } else {
        (1..k).map(|i| 10f64.powf(6.0 / i as f64).floor() as u64).collect()
    }
}

fn constants(out: Out, fmt: Format, k: u32, prime_limit: u64, d: Option<&[u64]>) -> Result<(), CliError> {
    check_k(k)?;
    let euler = euler_product_ck(k, prime_limit, EulerTail::PrimeZeta)?;
    let euler_bounded = euler_product_ck(k, prime_limit, EulerTail::Bounded)?;
    let d = d.map(<[u64]>::to_vec).unwrap_or_else(|| default_box(k));
    let multisum = multisum_ck(k, &d)?;
    let methods_agree = (euler.value - multisum.value).abs() <= euler.truncation_bound + multisum.truncation_bound;
    let (zeta_ratio, a, b) = if k == 2 {
        let (a, b) = bateman_grosswald_constants()?;
        (Some(zeta(1.5)? / zeta(3.0)?), Some(a), Some(b))
    } else {
        (None, None, None)
    };
    let r = ConstantsReport {
        k,
        prime_limit,
        euler,
        euler_bounded,
        multisum_d: d,
        multisum,
        methods_agree,
        zeta_ratio,
        a,
        b,
        version: VERSION,
    };
    match fmt {
        Format::Json => json(out, &r),
        Format::Csv => {
            let row = |name: &str, c: &ConstantEstimate| {
                vec![
                    name.to_string(),
                    c.value.to_string(),
                    c.truncation_bound.to_string(),
                    c.terms_used.to_string(),
                ]
            };
            let mut rows = vec![
                row("euler_prime_zeta", &r.euler),
                row("euler_bounded", &r.euler_bounded),
                row("multisum", &r.multisum),
            ];
            for (name, v) in [("zeta_ratio", r.zeta_ratio), ("A", r.a), ("B", r.b)] {
                if let Some(v) = v {
                    rows.push(vec![name.to_string(), v.to_string(), String::new(), String::new()]);
                }
            }
            csv_rows(
                out,
                &strings(&["quantity", "value", "truncation_bound", "terms_used"]),
                rows,
            )
        }
    }
}

/// `e(num/q)`, exact at the quarter turns.
fn unit_root(num: i64, q: u64) -> Complex64 {
    let r = num.rem_euclid(q as i64) as u64;
    if r == 0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * r == q {
        Complex64::new(-1.0, 0.0)
    } else if 4 * r == q {
        Complex64::new(0.0, 1.0)
    } else if 4 * r == 3 * q {
        Complex64::new(0.0, -1.0)
    } else {
        e(r as f64 / q as f64)
    }
}

fn parse_alpha(s: &str) -> Result<Alpha, CliError> {
    s.parse::<Alpha>().map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_coords(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coordinate {t:?} in --x")))
        })
        .collect()
}

/// The system, test function and starting point selected on the command line.
pub fn build_system(args: &SystemArgs) -> Result<(DynSystem, TestFunction, Point), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    let (system, f) = match args.system {
        SystemKind::Circle => (DynSystem::circle(alpha), TestFunction::Trig(args.h)),
        SystemKind::Cyclic => {
            let sys = DynSystem::cyclic(args.q)?;
            let values = (0..args.q)
                .map(|i| unit_root(args.h.wrapping_mul(i as i64), args.q))
                .collect();
            (sys, TestFunction::PointValues(values))
        }
        SystemKind::Skew => (DynSystem::skew(alpha), TestFunction::TrigVec(vec![args.h, args.h2])),
    };
    let x = match &args.x {
        None => system.origin(),
        Some(s) => match args.system {
            SystemKind::Cyclic => Point::Cyclic(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--x must be a state index, got {s:?}")))?,
            ),
            SystemKind::Circle => match parse_coords(s)?.as_slice() {
                [t] => Point::Circle(*t),
                _ => return Err(CliError::Usage("--x needs one coordinate for the circle".into())),
            },
            SystemKind::Skew => match parse_coords(s)?.as_slice() {
                [a, b] => Point::Skew(*a, *b),
                _ => return Err(CliError::Usage("--x needs two coordinates for the skew product".into())),
            },
        },
    };
    system.check_point(&x)?;
    Ok((system, f, x))
}

const REPORT_HEADER: [&str; 8] = [
    "value_re",
    "value_im",
    "n",
    "k",
    "term_count",
    "target_re",
    "target_im",
    "deviation",
];

fn report_row(r: &AverageReport) -> Vec<String> {
    vec![
        r.value_re.to_string(),
        r.value_im.to_string(),
        r.n.to_string(),
        r.k.to_string(),
        r.term_count.to_string(),
        opt(r.target_re),
        opt(r.target_im),
        opt(r.deviation),
    ]
}

fn emit_report(out: Out, fmt: Format, r: &AverageReport) -> Result<(), CliError> {
    match fmt {
        Format::Json => json(out, r),
        Format::Csv => csv_rows(out, &strings(&REPORT_HEADER), [report_row(r)]),
    }
}

#[derive(Serialize)]
struct BrReport {
    #[serde(flatten)]
    report: AverageReport,
    totally_uniquely_ergodic: bool,
}

fn br(out: Out, fmt: Format, n: u64, k: u32, sys: &SystemArgs) -> Result<(), CliError> {
    check_k(k)?;
    check_n(n)?;
    let (system, f, x) = build_system(sys)?;
    let report = br_average(&system, &f, &x, n, k)?;
    match fmt {
        Format::Json => json(
            out,
            &BrReport {
                report,
                totally_uniquely_ergodic: system.is_totally_uniquely_ergodic(),
            },
        ),
        Format::Csv => emit_report(out, fmt, &report),
    }
}

fn domain(d: DomainArg) -> averages::Domain {
    match d {
        DomainArg::Kfull => averages::Domain::Kfull,
        DomainArg::AllN => averages::Domain::AllN,
    }
}

fn ek(out: Out, fmt: Format, n: u64, k: u32, d: DomainArg) -> Result<(), CliError> {
    check_k(k)?;
    let r = ek_statistics(n, k, domain(d))?;
    match fmt {
        Format::Json => json(out, &r),
        Format::Csv => {
            let mut rows = vec![vec![
                "-inf".into(),
                r.bins[0].lo.to_string(),
                r.underflow.to_string(),
                String::new(),
            ]];
            rows.extend(r.bins.iter().map(|b| {
                vec![
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.mass.to_string(),
                    b.gauss_mass.to_string(),
                ]
            }));
            rows.push(vec![
                r.bins[r.bins.len() - 1].hi.to_string(),
                "inf".into(),
                r.overflow.to_string(),
                String::new(),
            ]);
            csv_rows(out, &strings(&["lo", "hi", "mass", "gauss_mass"]), rows)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn loyd(out: Out, fmt: Format, n: u64, k: u32, w: WindowArg, d: DomainArg, sys: &SystemArgs) -> Result<(), CliError> {
    check_k(k)?;
    let (system, f, x) = build_system(sys)?;
    let window = match w {
        WindowArg::Tent => averages::Window::Tent,
        WindowArg::Bump => averages::Window::Bump,
    };
    let r = loyd_average(&system, &f, &x, window, n, k, domain(d))?;
    emit_report(out, fmt, &r)
}

#[derive(Serialize)]
struct WeylScan {
    n: u64,
    k: u32,
    alpha: String,
    rows: Vec<WeylReport>,
    star_discrepancy: f64,
    erdos_turan_bound: f64,
    version: &'static str,
}

fn weyl(
    out: Out,
    fmt: Format,
    n: u64,
    k: u32,
    alpha: &str,
    h: Option<i64>,
    big_h: Option<u32>,
) -> Result<(), CliError> {
    check_k(k)?;
    check_n(n)?;
    let alpha = parse_alpha(alpha)?;
    let hist = kfull_histogram(n, k)?;
    let header = strings(&["h", "value_re", "value_im", "modulus"]);
    let row = |r: &WeylReport| {
        vec![
            r.h.to_string(),
            r.value_re.to_string(),
            r.value_im.to_string(),
            r.modulus.to_string(),
        ]
    };
    match big_h {
        None => {
            let r = weyl_from_histogram(alpha, h.unwrap_or(1), &hist, n, k)?;
            match fmt {
                Format::Json => json(out, &r),
                Format::Csv => csv_rows(out, &header, [row(&r)]),
            }
        }
        Some(0) => Err(CliError::Usage("--H must be >= 1".into())),
        Some(big_h) => {
            let rows = (1..=big_h as i64)
                .map(|h| weyl_from_histogram(alpha, h, &hist, n, k))
                .collect::<Result<Vec<_>, _>>()?;
            let moduli: Vec<f64> = rows.iter().map(|r| r.modulus).collect();
            let scan = WeylScan {
                n,
                k,
                alpha: alpha.to_string(),
                star_discrepancy: star_discrepancy_weighted(&omega_alpha_atoms(alpha, &hist))?,
                erdos_turan_bound: erdos_turan_bound(&moduli),
                rows,
                version: VERSION,
            };
            match fmt {
                Format::Json => json(out, &scan),
                Format::Csv => csv_rows(out, &header, scan.rows.iter().map(row)),
            }
        }
    }
}

fn observable(kind: ObservableKind, sys: &SystemArgs) -> Result<Observable, CliError> {
    Ok(match kind {
        ObservableKind::One => Observable::one(),
        ObservableKind::Liouville => Observable::liouville(),
        ObservableKind::Br => {
            let (system, f, x) = build_system(sys)?;
            Observable::birkhoff(&system, &f, &x)?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn invariance(
    out: Out,
    fmt: Format,
    n: u64,
    k: u32,
    m: &[u64],
    kind: ObservableKind,
    sys: &SystemArgs,
) -> Result<(), CliError> {
    check_k(k)?;
    check_n(n)?;
    let obs = observable(kind, sys)?;
    let r = k_invariance_check(&obs, n, k, m)?;
    match fmt {
        Format::Json => json(out, &r),
        Format::Csv => {
            let mut rows = vec![vec![
                "1".into(),
                "0".into(),
                r.base_re.to_string(),
                r.base_im.to_string(),
                "0".into(),
            ]];
            rows.extend(r.rows.iter().map(|row| {
                vec![
                    row.m.to_string(),
                    row.omega_m.to_string(),
                    row.value_re.to_string(),
                    row.value_im.to_string(),
                    row.deviation.to_string(),
                ]
            }));
            csv_rows(
                out,
                &strings(&["m", "omega_m", "value_re", "value_im", "deviation"]),
                rows,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn decompose(
    out: Out,
    fmt: Format,
    ns: &[u64],
    k: u32,
    mode: ModeArg,
    d: Option<&[u64]>,
    rule: RuleArg,
    kind: ObservableKind,
    sys: &SystemArgs,
) -> Result<(), CliError> {
    check_k(k)?;
    for &n in ns {
        check_n(n)?;
    }
    let obs = observable(kind, sys)?;
    let rows = match mode {
        ModeArg::Exact => ns
            .iter()
            .map(|&n| exact_decomposition(&obs, n, k))
            .collect::<Result<Vec<_>, _>>()?,
        ModeArg::Truncated => {
            let d = d.ok_or_else(|| CliError::Usage("--mode truncated needs --D".into()))?;
            ns.iter()
                .map(|&n| truncated_decomposition(&obs, n, k, d))
                .collect::<Result<Vec<_>, _>>()?
        }
        ModeArg::Scan => {
            let rule = match (d, rule) {
                (Some(d), _) => DRule::Fixed(d.to_vec()),
                (None, RuleArg::Doubling) => DRule::Doubling,
                (None, RuleArg::Sqrt) => DRule::SqrtOfMax,
                (None, RuleArg::Max) => DRule::Max,
            };
            error_exponent_scan(&obs, k, ns, &rule)?
        }
    };
    match fmt {
        Format::Json if rows.len() == 1 => json(out, &rows[0]),
        Format::Json => json(out, &rows),
        Format::Csv => csv_rows(out, &csv_header(k), rows.iter().map(csv_record)),
    }
}

#[derive(Serialize)]
struct BaselineReport {
    n: u64,
    liouville_mean: f64,
    squarefree_density: f64,
    six_over_pi_squared: f64,
    /// (1/N) Σ λ(n) μ²(n)
    liouville_squarefree_mean: f64,
    squarefree_br: AverageReport,
    /// (1/N) Σ μ²(n) f(T^Ω(n) x)
    squarefree_br_unnormalized_re: f64,
    squarefree_br_unnormalized_im: f64,
    all_n_br: AverageReport,
    version: &'static str,
}

fn baseline(out: Out, fmt: Format, n: u64, sys: &SystemArgs) -> Result<(), CliError> {
    check_n(n)?;
    let (system, f, x) = build_system(sys)?;
    let obs = Observable::birkhoff(&system, &f, &x)?;
    let target = system.invariant_integral(&f)?;
    let sf = squarefree_average(&obs, n)?;
    let sf_lambda = squarefree_average(&Observable::liouville(), n)?;
    let hist = all_n_histogram(n)?;
    let all = averages::shifted_power_average_from(&obs, &hist, n, 1, 1)?.with_target(target);
    let r = BaselineReport {
        n,
        liouville_mean: liouville_mean(n)?,
        squarefree_density: sf.density,
        six_over_pi_squared: 6.0 / std::f64::consts::PI.powi(2),
        liouville_squarefree_mean: sf_lambda.unnormalized_re,
        squarefree_br: sf.normalized.clone().with_target(target),
        squarefree_br_unnormalized_re: sf.unnormalized_re,
        squarefree_br_unnormalized_im: sf.unnormalized_im,
        all_n_br: all,
        version: VERSION,
    };
    match fmt {
        Format::Json => json(out, &r),
        Format::Csv => {
            let rows = [
                ("liouville_mean", r.liouville_mean),
                ("squarefree_density", r.squarefree_density),
                ("six_over_pi_squared", r.six_over_pi_squared),
                ("liouville_squarefree_mean", r.liouville_squarefree_mean),
                ("squarefree_br_re", r.squarefree_br.value_re),
                ("squarefree_br_im", r.squarefree_br.value_im),
                ("squarefree_br_unnormalized_re", r.squarefree_br_unnormalized_re),
                ("squarefree_br_unnormalized_im", r.squarefree_br_unnormalized_im),
                ("all_n_br_re", r.all_n_br.value_re),
                ("all_n_br_im", r.all_n_br.value_im),
            ]
            .map(|(q, v)| vec![q.to_string(), v.to_string()]);
            csv_rows(out, &strings(&["quantity", "value"]), rows)
        }
    }
}
