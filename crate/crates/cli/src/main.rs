use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use cicsec::channels::{CicChannel, DegradingKernel, Direction, GaussianParams};
use cicsec::codesim::{simulate, target_bound, SimConfig};
use cicsec::formats::{fmt9, parse_channel, parse_dist, Csv, Curve, Plot};
use cicsec::gaussian::{sweep_gaussian, ParamRegion, DEFAULT_BETA_STEPS, DEFAULT_RHO_STEPS};
use cicsec::regions::{fme_check, sweep_union, FmeCards, RegionKind, SamplingSpec};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

fn fail<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Failure(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "cicsec", version, about = "Rate regions and secrecy simulations for the cognitive interference channel")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Boundary of the Gaussian capacity (and secrecy) region.
    GaussRegion(GaussArgs),
    /// Achievable (R1, R2, R2e) points of a discrete memoryless channel.
    DmcRegion(DmcArgs),
    /// Degradedness verdicts for a channel file.
    CheckDegraded(DegradedArgs),
    /// Random-coding simulation at short block lengths.
    Simulate(SimArgs),
    /// Cross-checks the projected rate-splitting region against the direct one.
    FmeCheck(FmeArgs),
}

fn steps(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v < 2 {
        return Err(format!("need at least 2 steps, got {v}"));
    }
    Ok(v)
}

#[derive(Args, Debug)]
struct GaussArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    p1: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    p2: f64,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_RHO_STEPS, value_parser = steps)]
    rho_steps: usize,
    #[arg(long, default_value_t = DEFAULT_BETA_STEPS, value_parser = steps)]
    beta_steps: usize,
    /// Upper concave envelope of the union (default).
    #[arg(long, conflicts_with = "raw")]
    hull: bool,
    /// Pointwise envelope of the union without convexification.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Capaequi,
    Corollary1,
    Secrecy,
    NoSecrecy,
    Degraded1,
    Degraded2,
}

#[derive(Args, Debug)]
struct DmcArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    u_card: Option<usize>,
    #[arg(long)]
    v_card: Option<usize>,
    /// Random distributions drawn in addition to the grid.
    #[arg(long)]
    samples: Option<usize>,
    /// Simplex grid resolution (0 disables the grid).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest number of distributions evaluated.
    #[arg(long)]
    budget: Option<usize>,
    /// With no-secrecy: also impose R1 <= I(U,X1;Z).
    #[arg(long)]
    extra_row: bool,
    /// Emit every vertex instead of the extreme points of the hull.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DegradedArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    dist: PathBuf,
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// R1,R21,R22 in bits per channel use.
    #[arg(long, value_delimiter = ',', required = true)]
    rates: Vec<f64>,
    /// Dummy-index rate; defaults to I(X2;Y|U,X1) rounded down to a multiple of 1/n.
    #[arg(long)]
    rt: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 20)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FmeArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Fixed cardinalities |U|,|X1|,|V|,|X2|,|Y|,|Z| (random when absent).
    #[arg(long, value_delimiter = ',')]
    cards: Option<Vec<usize>>,
}

/// The invocation with the program path reduced to its file name.
fn command_line() -> String {
    let mut args = std::env::args();
    let prog = args
        .next()
        .map(|p| Path::new(&p).file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or(p))
        .unwrap_or_else(|| "cicsec".into());
    std::iter::once(prog).chain(args).collect::<Vec<_>>().join(" ")
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Failure(format!("cannot read {}: {e}", path.display())))
}

fn load_channel(path: &Path) -> Result<CicChannel, CliError> {
    parse_channel(&read(path)?).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// The member attaining the largest R2 at `r1` (first one on ties).
fn maximizer(members: &[ParamRegion], r1: f64) -> Option<&ParamRegion> {
    let mut best: Option<(&ParamRegion, f64)> = None;
    for m in members {
        if let Some((r2, _)) = m.at(r1) {
            if best.is_none_or(|(_, b)| r2 > b) {
                best = Some((m, r2));
            }
        }
    }
    best.map(|(m, _)| m)
}

fn gauss_region(args: GaussArgs) -> Result<(), CliError> {
    let g = GaussianParams::new(args.a, args.b, args.p1, args.p2).map_err(fail)?;
    let sweep = sweep_gaussian(&g, args.rho_steps, args.beta_steps, !args.raw).map_err(fail)?;
    let mut csv = Csv::new(&command_line(), &["rho", "beta", "r1", "r2", "r2e"]);
    for p in &sweep.boundary {
        let (rho, beta) = maximizer(&sweep.members, p.r1).map_or((f64::NAN, f64::NAN), |m| (m.rho, m.beta));
        csv.row(&[fmt9(rho), fmt9(beta), fmt9(p.r1), fmt9(p.r2), fmt9(p.r2e)]);
    }
    write(&args.out, csv.as_str())?;
    if let Some(svg) = &args.svg {
        let tag = format!("a={} b={} P1={} P2={}", g.a, g.b, g.p1, g.p2);
        let mut curves = vec![Curve {
            id: "boundary-r2".into(),
            label: format!("R2 ({tag})"),
            points: sweep.boundary.iter().map(|p| (p.r1, p.r2)).collect(),
        }];
        if g.a.abs() < 1.0 {
            curves.push(Curve {
                id: "boundary-r2e".into(),
                label: format!("R2e ({tag})"),
                points: sweep.boundary.iter().map(|p| (p.r1, p.r2e)).collect(),
            });
        }
        let plot = Plot {
            title: format!("Gaussian region, {tag}"),
            x_label: "R1 [bits]".into(),
            y_label: "R2, R2e [bits]".into(),
            curves,
        };
        write(svg, &plot.to_svg())?;
    }
    let last = sweep.boundary.last();
    println!(
        "gauss-region: {} boundary points, max R1 {}, max R2 {}",
        sweep.boundary.len(),
        fmt9(last.map_or(0.0, |p| p.r1)),
        fmt9(sweep.boundary.iter().map(|p| p.r2).fold(0.0, f64::max)),
    );
    Ok(())
}

fn dmc_region(args: DmcArgs) -> Result<(), CliError> {
    let ch = load_channel(&args.channel)?;
    if args.extra_row && !matches!(args.mode, Mode::NoSecrecy) {
        return Err(CliError::Usage("--extra-row is only valid with --mode no-secrecy".into()));
    }
    let kind = match args.mode {
        Mode::Capaequi => RegionKind::CapacityEquivocation,
        Mode::Corollary1 => RegionKind::Corollary1,
        Mode::Secrecy => RegionKind::Secrecy,
        Mode::NoSecrecy if args.extra_row => RegionKind::NoSecrecyAugmented,
        Mode::NoSecrecy => RegionKind::NoSecrecy,
        Mode::Degraded1 => RegionKind::Degraded1,
        Mode::Degraded2 => RegionKind::Degraded2,
    };
    let degraded = |dir: Direction| {
        ch.physical_kernel(dir, 1e-9).is_some() || ch.check_stochastic_degraded(dir, 1e-7).0
    };
    match args.mode {
        Mode::Degraded1 if !degraded(Direction::ZgivenY) => {
            eprintln!("warning: Z is not degraded from Y; the degraded-1 formula need not describe this channel")
        }
        Mode::Degraded2 if !degraded(Direction::YgivenZ) => {
            eprintln!("warning: Y is not degraded from Z; the degraded-2 formula need not describe this channel")
        }
        _ => {}
    }
    let mut spec = SamplingSpec::for_channel(&ch);
    if let Some(v) = args.u_card {
        spec.card_u = v;
    }
    if let Some(v) = args.v_card {
        spec.card_v = v;
    }
    if let Some(v) = args.samples {
        spec.samples = v;
    }
    if let Some(v) = args.grid {
        spec.grid = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.budget {
        spec.budget = v;
    }
    let cloud = sweep_union(&ch, &spec, kind).map_err(fail)?;
    let cloud = if args.raw { cloud } else { cloud.convexified() };
    if cloud.partial {
        eprintln!("warning: family truncated at {} distributions", spec.budget);
    }
    let mut csv = Csv::new(&command_line(), &["r1", "r2", "r2e", "source"]);
    for p in &cloud.points {
        let [r1, r2, r2e] = p.rates;
        csv.row(&[fmt9(r1), fmt9(r2), fmt9(r2e), format!("{:016x}", p.source)]);
    }
    write(&args.out, csv.as_str())?;
    let m = cloud.max_rates();
    println!(
        "dmc-region: {} distributions, {} points, max R1 {}, max R2 {}, max R2e {}",
        cloud.evaluated,
        cloud.points.len(),
        fmt9(m[0]),
        fmt9(m[1]),
        fmt9(m[2])
    );
    Ok(())
}

fn kernel_text(k: &DegradingKernel, from: &str, to: &str) -> String {
    let mut s = String::new();
    for x1 in 0..k.card_x1 {
        for f in 0..k.card_from {
            let row: Vec<String> = (0..k.card_to).map(|t| fmt9(k.get(x1, f, t))).collect();
            let _ = writeln!(s, "    q({to}|{from}={f},x1={x1}) = {}", row.join(" "));
        }
    }
    s
}

fn check_degraded(args: DegradedArgs) -> Result<(), CliError> {
    let ch = load_channel(&args.channel)?;
    let mut out = String::new();
    let verdicts = [
        ("physical-1", Direction::ZgivenY, true),
        ("physical-2", Direction::YgivenZ, true),
        ("stochastic-ZgivenY", Direction::ZgivenY, false),
        ("stochastic-YgivenZ", Direction::YgivenZ, false),
    ];
    for (name, dir, physical) in verdicts {
        let kernel = if physical {
            ch.physical_kernel(dir, args.tol)
        } else {
            ch.check_stochastic_degraded(dir, args.tol).1
        };
        let _ = writeln!(out, "{name}: {}", kernel.is_some());
        if let Some(k) = kernel {
            let (from, to) = match dir {
                Direction::ZgivenY => ("y", "z"),
                Direction::YgivenZ => ("z", "y"),
            };
            out.push_str(&kernel_text(&k, from, to));
        }
    }
    print!("{out}");
    Ok(())
}

fn sim(args: SimArgs) -> Result<(), CliError> {
    let [r1, r21, r22] = args.rates[..] else {
        return Err(CliError::Usage(format!("--rates takes R1,R21,R22, got {} values", args.rates.len())));
    };
    let ch = load_channel(&args.channel)?;
    let dist = parse_dist(&read(&args.dist)?).map_err(|e| CliError::Failure(format!("{}: {e}", args.dist.display())))?;
    let mut csv = Csv::new(&command_line(), &["n", "r1", "r21", "r22", "rt", "pe", "equiv", "targetBound", "seed"]);
    for &n in &args.n {
        let rt = match args.rt {
            Some(v) => v,
            None => SimConfig::default_rt(&dist, &ch, n).map_err(fail)?,
        };
        let cfg = SimConfig {
            n,
            r1,
            r21,
            r22,
            rt,
            trials: args.trials,
            draws: args.draws,
            seed: args.seed,
            dist: dist.clone(),
            ch: ch.clone(),
        };
        let report = simulate(&cfg, true).map_err(fail)?;
        let target = target_bound(&cfg).map_err(fail)?;
        csv.row(&[
            n.to_string(),
            fmt9(r1),
            fmt9(r21),
            fmt9(r22),
            fmt9(rt),
            fmt9(report.pe),
            fmt9(report.equivocation),
            fmt9(target),
            args.seed.to_string(),
        ]);
        println!(
            "n={n} rt={} pe={} equivocation={} target={}",
            fmt9(rt),
            fmt9(report.pe),
            fmt9(report.equivocation),
            fmt9(target)
        );
    }
    write(&args.out, csv.as_str())
}

fn fme(args: FmeArgs) -> Result<(), CliError> {
    let cards: Option<FmeCards> = match args.cards {
        None => None,
        Some(v) => {
            let c: FmeCards = v
                .try_into()
                .map_err(|v: Vec<usize>| CliError::Usage(format!("--cards takes 6 values, got {}", v.len())))?;
            if c.contains(&0) {
                return Err(CliError::Usage("--cards entries must be positive".into()));
            }
            Some(c)
        }
    };
    let failures = fme_check(args.samples as usize, args.seed, cards).map_err(fail)?;
    for f in &failures {
        println!("instance {} cards {:?}: {}\n  {}", f.index, f.cards, f.reason, f.profile);
    }
    println!("fme-check: {} instances, {} failures", args.samples, failures.len());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("{} of {} instances failed", failures.len(), args.samples)))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::GaussRegion(a) => gauss_region(a),
        Cmd::DmcRegion(a) => dmc_region(a),
        Cmd::CheckDegraded(a) => check_degraded(a),
        Cmd::Simulate(a) => sim(a),
        Cmd::FmeCheck(a) => fme(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
