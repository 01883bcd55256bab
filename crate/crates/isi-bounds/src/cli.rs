//! Command-line surface: channel selection, SNR sweeps, CSV emission, and
//! gnuplot scripts for the five reference figure families.
//!
//! Exit codes: 0 success, 2 argument or channel-spec parse error,
//! 3 pipeline (numerical) or I/O error. All rate columns are in bits per
//! channel use, printed with 12 significant digits; identical invocations
//! produce byte-identical files. `ISI_BOUNDS_THREADS` caps the worker
//! thread count.

use crate::bounds::{self, BoundPoint, QuadratureRule};
use crate::channel::{self, ChannelResponse};
use crate::nats_to_bits;
use crate::sir_mc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "isi-bounds",
    version,
    about = "Certified lower bounds and Monte-Carlo estimates for the symmetric information rate of finite-ISI Gaussian channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the rate bounds over an SNR grid and write CSV
    Bounds(BoundsArgs),
    /// Monte-Carlo estimate of the symmetric information rate
    Sir(SirArgs),
    /// Write the data and gnuplot files for one reference figure (4-8)
    Figure(FigureArgs),
    /// List the built-in channels
    Channels,
}

#[derive(Debug, Args)]
struct ChannelSource {
    /// Built-in channel name (see `channels`)
    #[arg(long, conflicts_with = "file")]
    channel: Option<String>,
    /// Channel spec file (directives: alphabet, taps, label)
    #[arg(long)]
    file: Option<PathBuf>,
}

impl ChannelSource {
    fn resolve(&self) -> Result<ChannelResponse, CliError> {
        match (&self.channel, &self.file) {
            (Some(name), None) => channel::channel_by_name(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown channel `{name}` (known: {})",
                    channel::channel_names().join(", ")
                ))
            }),
            (None, Some(path)) => channel::load_channel_file(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
            _ => Err(CliError::Usage(
                "select a channel with --channel NAME or --file PATH".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuadArg {
    /// 96-node Gauss-Hermite rule
    Gh96,
    /// Adaptive Gauss-Kronrod cross-check rule
    Adaptive,
}

impl From<QuadArg> for QuadratureRule {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::Gh96 => QuadratureRule::GaussHermite96,
            QuadArg::Adaptive => QuadratureRule::Adaptive,
        }
    }
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// SNR grid in dB: `start:stop:step` or a single value
    #[arg(long, default_value = "-10:14:1", allow_hyphen_values = true)]
    snr: String,
    /// Comma-separated dominant-tap counts
    #[arg(long, default_value = "0")]
    m: String,
    #[arg(long, value_enum, default_value_t = QuadArg::Gh96)]
    quad: QuadArg,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SirArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// SNR grid in dB: `start:stop:step` or a single value
    #[arg(long, default_value = "-10:14:1", allow_hyphen_values = true)]
    snr: String,
    /// Total symbol budget (split over 20 batches)
    #[arg(long, default_value_t = 1_000_000)]
    symbols: u64,
    /// PRNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure number: 4-8
    id: u8,
    /// Total symbol budget for the rate-curve Monte-Carlo reference
    #[arg(long, default_value_t = 1_000_000)]
    symbols: u64,
    /// PRNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = QuadArg::Gh96)]
    quad: QuadArg,
    /// Output directory for the CSV and gnuplot files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Pipeline(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Pipeline(m) => m,
        }
    }
}

impl From<bounds::PipelineError> for CliError {
    fn from(e: bounds::PipelineError) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<sir_mc::SirError> for CliError {
    fn from(e: sir_mc::SirError) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Pipeline(format!("I/O error: {e}"))
    }
}

/// Entry point called by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with code 0, usage errors
            // on stderr with code 2
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_thread_pool();
    let result = match cli.command {
        Command::Bounds(args) => cmd_bounds(&args),
        Command::Sir(args) => cmd_sir(&args),
        Command::Figure(args) => cmd_figure(&args),
        Command::Channels => cmd_channels(),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

/// Applies `ISI_BOUNDS_THREADS` before any parallel work runs; malformed
/// or zero values are ignored.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("ISI_BOUNDS_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

/// Parses `start:stop:step` (inclusive, `step > 0`) or a single value.
fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("--snr `{s}`: {msg}"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("`{t}` is not a number")))
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if (stop - start).abs() < 1e-12 {
                return Ok(vec![start]);
            }
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop must not be below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad("expected `value` or `start:stop:step`")),
    }
}

fn parse_m_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("--m `{s}`: `{t}` is not a count")))
        })
        .collect()
}

/// 12 significant digits, locale-independent.
fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn bounds_grid(
    ch: &ChannelResponse,
    snrs: &[f64],
    ms: &[usize],
    rule: QuadratureRule,
) -> Result<Vec<BoundPoint>, CliError> {
    let jobs: Vec<(f64, usize)> = snrs
        .iter()
        .flat_map(|&snr| ms.iter().map(move |&m| (snr, m)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(snr, m)| bounds::bound_point(ch, snr, m, rule))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(points)
}

pub(crate) const BOUNDS_HEADER: &str =
    "snr_db,M,R,phi,rho_max,sigma_rho,F_SLC,F_l,F_u1,F_u2,C_SLC,C_L1,C_L2";

fn bounds_csv(points: &[BoundPoint]) -> String {
    let mut out = String::new();
    out.push_str(BOUNDS_HEADER);
    out.push('\n');
    for p in points {
        let cols = [
            fmt(p.snr_db),
            p.requested_m.to_string(),
            fmt(p.r),
            fmt(p.phi),
            fmt(p.rho_max),
            fmt(p.sigma_rho),
            fmt(nats_to_bits(p.f_slc)),
            fmt(nats_to_bits(p.f_l)),
            fmt(nats_to_bits(p.f_u1)),
            fmt(nats_to_bits(p.f_u2)),
            fmt(nats_to_bits(p.c_slc)),
            fmt(nats_to_bits(p.c_l1)),
            fmt(nats_to_bits(p.c_l2)),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

fn cmd_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let ch = args.source.resolve()?;
    let snrs = parse_grid(&args.snr)?;
    let ms = parse_m_list(&args.m)?;
    if ms.is_empty() {
        return Err(CliError::Usage("--m needs at least one count".into()));
    }
    let points = bounds_grid(&ch, &snrs, &ms, args.quad.into())?;
    write_output(args.out.as_deref(), &bounds_csv(&points))
}

fn cmd_sir(args: &SirArgs) -> Result<(), CliError> {
    let ch = args.source.resolve()?;
    let snrs = parse_grid(&args.snr)?;
    let mut out = String::new();
    out.push_str("snr_db,sir_bits,stderr_bits,n_symbols,seed\n");
    for &snr in &snrs {
        let est = sir_mc::estimate_sir(&ch, snr, args.symbols, args.seed)?;
        // advisory cross-check against the conjectured curve; never fatal
        if let Ok(bp) = bounds::bound_point(&ch, snr, 0, QuadratureRule::GaussHermite96) {
            let slack = nats_to_bits(bp.c_slc) - est.rate_bits();
            if slack > 5.0 * est.stderr_bits() {
                eprintln!(
                    "note: at {snr} dB the estimate sits {slack:.4} bits below the SLC curve (> 5 sigma); consider more symbols"
                );
            }
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt(snr),
            fmt(est.rate_bits()),
            fmt(est.stderr_bits()),
            est.n_symbols,
            est.seed
        );
    }
    write_output(args.out.as_deref(), &out)
}

fn cmd_channels() -> Result<(), CliError> {
    let mut out = String::new();
    for (name, alias) in [
        ("identity", None),
        ("dicode", Some("ch1")),
        ("epr4", Some("ch2")),
        ("lowpass7", Some("ch3")),
        ("cauchy11", Some("ch4")),
        ("dicode-complex", Some("ch5")),
    ] {
        let ch = channel::channel_by_name(name).expect("registry is static");
        let taps = ch
            .taps()
            .iter()
            .map(|t| {
                if t.im == 0.0 {
                    format!("{:.6}", t.re)
                } else {
                    format!("{:.6}{:+.6}j", t.re, t.im)
                }
            })
            .collect::<Vec<_>>()
            .join(", ");
        let alias = alias.map(|a| format!(" ({a})")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{name}{alias}: {} inputs, taps [{taps}]  # {}",
            ch.alphabet(),
            ch.label()
        );
    }
    print!("{out}");
    Ok(())
}

/// Channel, cluster counts, featured count, and dB grid for each
/// reference figure.
///
/// The largest count in each list is the one whose upper bound dips below
/// the conjectured baseline somewhere on the grid; the smaller counts show
/// how the bounds tighten on the way there. Figure 8's grid starts where
/// that dip begins, because for the quaternary channel the dip covers the
/// whole plotted range rather than just the top of it.
fn figure_recipe(id: u8) -> Option<(ChannelResponse, Vec<usize>, usize, Vec<f64>)> {
    let db = |lo: i32, hi: i32| (lo..=hi).map(f64::from).collect();
    match id {
        4 => Some((channel::dicode(), vec![0, 1, 2, 4], 4, db(-10, 14))),
        5 => Some((channel::epr4(), vec![0, 1, 2, 4, 10], 10, db(-10, 14))),
        6 => Some((channel::lowpass7(), vec![0, 1, 2, 4, 8], 8, db(-10, 14))),
        7 => Some((channel::cauchy11(), vec![0, 1, 2], 2, db(-10, 14))),
        8 => Some((channel::dicode_complex(), vec![0, 1, 2, 4, 6], 6, db(3, 13))),
        _ => None,
    }
}

fn cmd_figure(args: &FigureArgs) -> Result<(), CliError> {
    let (ch, ms, featured, snrs) = figure_recipe(args.id)
        .ok_or_else(|| CliError::Usage(format!("figure {} does not exist (try 4-8)", args.id)))?;
    let rule: QuadratureRule = args.quad.into();

    let points = bounds_grid(&ch, &snrs, &ms, rule)?;
    let at = |snr: f64, m: usize| -> &BoundPoint {
        points
            .iter()
            .find(|p| p.snr_db == snr && p.requested_m == m)
            .expect("every grid pair was computed")
    };

    // part (a): Monte-Carlo rate curve against the certified bounds
    let mut rates = String::new();
    let _ = writeln!(
        rates,
        "snr_db,sir_bits,stderr_bits,C_SLC,C_L1_M0,C_L1_M{featured}"
    );
    for &snr in &snrs {
        let est = sir_mc::estimate_sir(&ch, snr, args.symbols, args.seed)?;
        let _ = writeln!(
            rates,
            "{},{},{},{},{},{}",
            fmt(snr),
            fmt(est.rate_bits()),
            fmt(est.stderr_bits()),
            fmt(nats_to_bits(at(snr, 0).c_slc)),
            fmt(nats_to_bits(at(snr, 0).c_l1)),
            fmt(nats_to_bits(at(snr, featured).c_l1)),
        );
    }

    // part (b): bound-minus-baseline gaps per cluster count
    let mut gaps = String::new();
    gaps.push_str("snr_db");
    for &m in &ms {
        let _ = write!(gaps, ",dF_u1_M{m},dF_l_M{m}");
    }
    gaps.push('\n');
    for &snr in &snrs {
        gaps.push_str(&fmt(snr));
        for &m in &ms {
            let p = at(snr, m);
            let _ = write!(
                gaps,
                ",{},{}",
                fmt(nats_to_bits(p.f_u1 - p.f_slc)),
                fmt(nats_to_bits(p.f_l - p.f_slc))
            );
        }
        gaps.push('\n');
    }

    std::fs::create_dir_all(&args.out)?;
    let id = args.id;
    let rates_name = format!("figure{id}_rates.csv");
    let gaps_name = format!("figure{id}_gaps.csv");
    std::fs::write(args.out.join(&rates_name), &rates)?;
    std::fs::write(args.out.join(&gaps_name), &gaps)?;
    std::fs::write(
        args.out.join(format!("figure{id}.gp")),
        gnuplot_script(id, &rates_name, &gaps_name, featured, &ms, ch.label()),
    )?;
    Ok(())
}

fn gnuplot_script(
    id: u8,
    rates_name: &str,
    gaps_name: &str,
    featured: usize,
    ms: &[usize],
    label: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# data files: {rates_name}, {gaps_name}");
    let _ = writeln!(s, "# channel: {label}");
    s.push_str("set datafile separator \",\"\nset grid\nset xlabel \"SNR (dB)\"\n");
    s.push_str("set terminal pngcairo size 900,600\n\n");

    let _ = writeln!(s, "set output \"figure{id}a.png\"");
    s.push_str("set key bottom right\nset ylabel \"rate (bits/channel use)\"\n");
    let _ = writeln!(
        s,
        "plot \"{rates_name}\" skip 1 using 1:2:3 with yerrorlines title \"SIR (Monte-Carlo)\", \\"
    );
    let _ = writeln!(s, "     \"\" skip 1 using 1:4 with lines title \"SLC\", \\");
    let _ = writeln!(
        s,
        "     \"\" skip 1 using 1:5 with lines title \"lower bound, M=0\", \\"
    );
    let _ = writeln!(
        s,
        "     \"\" skip 1 using 1:6 with lines title \"lower bound, M={featured}\""
    );
    s.push('\n');

    let _ = writeln!(s, "set output \"figure{id}b.png\"");
    s.push_str("set key top right\nset ylabel \"F - F_SLC (bits)\"\n");
    s.push_str("plot 0 with lines lc \"gray\" notitle");
    for (i, &m) in ms.iter().enumerate() {
        let col_u = 2 + 2 * i;
        let col_l = 3 + 2 * i;
        let _ = write!(
            s,
            ", \\\n     \"{gaps_name}\" skip 1 using 1:{col_u} with lines title \"upper, M={m}\", \\\n     \"\" skip 1 using 1:{col_l} with lines dt 2 title \"lower, M={m}\""
        );
    }
    s.push('\n');
    s
}
