//! `fbqc`: compare fusion-based quantum computing schemes by resource-state
//! preparation cost and loss-per-photon threshold.
//!
//! Every subcommand is deterministic for a fixed `--seed`: records printed
//! in `--format records` mode are byte-identical across runs with the same
//! arguments. Generated files (figure, results log) land in `--out`.

use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbqc_core::encode::apply_shor_encoding;
use fbqc_core::fusion::{
    exact_encoded_fusion_dist, EncodedFusionSampler, EncodedOutcome, FusionStrategy,
    PhysicalFusionModel,
};
use fbqc_core::optimize::optimize_schedule;
use fbqc_core::records::{curve_rows, Record};
use fbqc_core::reports::{emit_figure_data, load_reference_table, report_table1, ReferenceRow};
use fbqc_core::threshold::{estimate_percolation_control, estimate_threshold};
use fbqc_core::{build_base_state, Error, GraphState, ResourceFamily, ShorCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "fbqc", version, about = "Fusion-based quantum computing scheme comparison")]
struct Cli {
    /// Base seed for all randomized work.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for generated files (results log, figure).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable report.
    Text,
    /// One structured-text record per line.
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a preparation schedule and report its cost in 3GHZ units.
    Cost(CostArgs),
    /// Outcome distribution of one encoded fusion under loss.
    FusionStats(FusionStatsArgs),
    /// Estimate a loss-per-photon threshold by Monte Carlo percolation.
    Threshold(ThresholdArgs),
    /// Reproduce the published cost table and flag regressions.
    Table1(Table1Args),
    /// Emit the threshold-versus-photons comparison figure.
    Figure(FigureArgs),
    /// Print rows of the embedded comparison dataset.
    Reference(ReferenceArgs),
}

#[derive(Args)]
struct CostArgs {
    /// Resource family: fourstar, sixring, eightld, bellpair.
    #[arg(long, required_unless_present = "edges", conflicts_with = "edges")]
    family: Option<String>,

    /// Shor code parameters n,m.
    #[arg(long, value_parser = parse_code, required_unless_present = "edges", conflicts_with = "edges")]
    code: Option<(u32, u32)>,

    /// Optimize a custom target read from an edge-list file instead
    /// (first line `qubits N`, then one `u v` pair per line).
    #[arg(long)]
    edges: Option<PathBuf>,

    /// Split-evaluation budget for the schedule search.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
}

#[derive(Args)]
struct FusionStatsArgs {
    /// Shor code parameters n,m.
    #[arg(long, value_parser = parse_code)]
    code: (u32, u32),

    /// Failure-basis strategy: randomized, static-bias, local-adaptive.
    #[arg(long)]
    strategy: String,

    /// Loss probability per photon.
    #[arg(long)]
    eta: f64,

    /// Boost fusion success from 1/2 to 3/4 with an ancilla Bell pair.
    #[arg(long)]
    boosted: bool,

    /// Photons per encoded qubit (1 or 2).
    #[arg(long, default_value_t = 2)]
    photons_per_qubit: u8,

    /// Compute the exact distribution by enumeration (the default).
    #[arg(long, conflicts_with = "samples")]
    exact: bool,

    /// Estimate by Monte Carlo with this many samples instead.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Fusion network family: fourstar, sixring, eightld.
    #[arg(long, required_unless_present = "control", conflicts_with = "control")]
    family: Option<String>,

    /// Shor code parameters n,m.
    #[arg(long, value_parser = parse_code, required_unless_present = "control", conflicts_with = "control")]
    code: Option<(u32, u32)>,

    /// Failure-basis strategy: randomized, static-bias, local-adaptive.
    #[arg(long, required_unless_present = "control", conflicts_with = "control")]
    strategy: Option<String>,

    /// Boost fusion success from 1/2 to 3/4 with an ancilla Bell pair.
    #[arg(long, conflicts_with = "control")]
    boosted: bool,

    /// Photons per encoded qubit (1 or 2).
    #[arg(long, default_value_t = 2, conflicts_with = "control")]
    photons_per_qubit: u8,

    /// Run the analytic control instead: plain site erasure on the 6-ring
    /// lattice, whose threshold is the known bond-percolation value.
    #[arg(long)]
    control: bool,

    /// Periodic lattice sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "6,8,10")]
    sizes: Vec<usize>,

    /// Monte Carlo trials per (eta, L) grid point.
    #[arg(long)]
    trials: u64,

    /// Loss bracket lo,hi to scan.
    #[arg(long, value_parser = parse_bracket)]
    bracket: (f64, f64),
}

#[derive(Args)]
struct Table1Args {
    /// Split-evaluation budget per row.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
}

#[derive(Args)]
struct FigureArgs {
    /// Keep only the Pareto-best points of each series.
    #[arg(long)]
    envelope: bool,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Column filter key=value; repeatable, all must match. Keys:
    /// adaptivity|method, ref|source, network, state, encoding, qubits,
    /// boosted.
    #[arg(long = "filter", value_parser = parse_filter)]
    filters: Vec<(String, String)>,
}

fn parse_code(s: &str) -> Result<(u32, u32), String> {
    let trimmed = s.trim().trim_start_matches('{').trim_end_matches('}');
    let (n, m) = trimmed
        .split_once(',')
        .ok_or_else(|| format!("expected n,m, got '{s}'"))?;
    let n = n.trim().parse::<u32>().map_err(|e| format!("bad n in '{s}': {e}"))?;
    let m = m.trim().parse::<u32>().map_err(|e| format!("bad m in '{s}': {e}"))?;
    Ok((n, m))
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got '{s}'"))?;
    let lo = lo.trim().parse::<f64>().map_err(|e| format!("bad lo in '{s}': {e}"))?;
    let hi = hi.trim().parse::<f64>().map_err(|e| format!("bad hi in '{s}': {e}"))?;
    Ok((lo, hi))
}

const FILTER_KEYS: &[&str] = &[
    "adaptivity", "method", "ref", "source", "network", "state", "encoding", "qubits", "boosted",
];

fn parse_filter(s: &str) -> Result<(String, String), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let key = key.trim().to_lowercase();
    if !FILTER_KEYS.contains(&key.as_str()) {
        return Err(format!("unknown filter key '{key}' (expected one of {})", FILTER_KEYS.join(", ")));
    }
    Ok((key, value.trim().to_string()))
}

fn parse_strategy(name: &str, code: &ShorCode) -> Result<FusionStrategy, Error> {
    match name {
        "randomized" | "random" => Ok(FusionStrategy::RandomizedFailure),
        "static-bias" | "static" => Ok(FusionStrategy::static_default(code)),
        "local-adaptive" | "adaptive" => Ok(FusionStrategy::LocalAdaptive),
        other => Err(Error::InvalidParameter(format!(
            "unknown strategy '{other}' (expected randomized, static-bias, or local-adaptive)"
        ))),
    }
}

fn code_label(n: u32, m: u32) -> String {
    format!("{{{n},{m}}}")
}

/// Two-column text row; keeps the human format grep-friendly.
fn kv(key: &str, value: impl Display) -> String {
    format!("{key:<18}{value}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    fs::create_dir_all(&cli.out)?;
    let mut lines: Vec<String> = Vec::new();
    let mut exit = ExitCode::SUCCESS;
    match &cli.command {
        Command::Cost(args) => run_cost(&cli, args, &mut lines)?,
        Command::FusionStats(args) => run_fusion_stats(&cli, args, &mut lines)?,
        Command::Threshold(args) => run_threshold(&cli, args, &mut lines)?,
        Command::Table1(args) => exit = run_table1(&cli, args, &mut lines)?,
        Command::Figure(args) => run_figure(&cli, args, &mut lines)?,
        Command::Reference(args) => run_reference(&cli, args, &mut lines)?,
    }
    let mut stdout = std::io::stdout().lock();
    for line in &lines {
        if let Err(err) = writeln!(stdout, "{line}") {
            // Downstream consumers like `head` close the pipe early.
            if err.kind() == std::io::ErrorKind::BrokenPipe {
                break;
            }
            return Err(err.into());
        }
    }
    Ok(exit)
}

fn run_cost(cli: &Cli, args: &CostArgs, lines: &mut Vec<String>) -> CliResult<()> {
    let (family_label, code_label, target) = match &args.edges {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let state = GraphState::from_edge_list_text(&text)?;
            ("custom".to_string(), "-".to_string(), state)
        }
        None => {
            // clap guarantees both are present when --edges is absent.
            let family = ResourceFamily::from_name(args.family.as_deref().unwrap())?;
            let (n, m) = args.code.unwrap();
            let code = ShorCode::new(n, m)?;
            let base = build_base_state(&family)?;
            let state = apply_shor_encoding(&base, &code)?;
            (family.name().to_string(), self::code_label(n, m), state)
        }
    };
    let qubits = target.num_qubits();
    let result = optimize_schedule(&target, args.budget, cli.seed)?;
    let gap = (result.cost as f64 / result.lower_bound as f64 - 1.0) * 100.0;
    match cli.format {
        Format::Records => lines.push(
            Record::new("cost")
                .field("family", &family_label)
                .field("code", &code_label)
                .field("qubits", qubits)
                .field("lower_bound", result.lower_bound)
                .field("cost", result.cost)
                .float("gap_percent", gap)
                .field("evaluations", result.evaluations)
                .field("exhaustive", result.optimal)
                .field("budget", args.budget)
                .field("seed", cli.seed)
                .finish(),
        ),
        Format::Text => {
            lines.push(kv("family", &family_label));
            lines.push(kv("code", &code_label));
            lines.push(kv("qubits", qubits));
            lines.push(kv("cost", format!("{} (3GHZ units)", result.cost)));
            lines.push(kv("lower bound", result.lower_bound));
            lines.push(kv("gap", format!("{gap:.2}% above lower bound")));
            lines.push(kv("evaluations", result.evaluations));
            lines.push(kv("exhaustive", if result.optimal { "yes" } else { "no" }));
        }
    }
    Ok(())
}

fn run_fusion_stats(cli: &Cli, args: &FusionStatsArgs, lines: &mut Vec<String>) -> CliResult<()> {
    let (n, m) = args.code;
    let code = ShorCode::new(n, m)?;
    let strategy = parse_strategy(&args.strategy, &code)?;
    let model = PhysicalFusionModel::new(args.eta, args.photons_per_qubit, args.boosted)?;

    let (dist, mode, samples) = match args.samples {
        Some(samples) => {
            if samples == 0 {
                return Err(Error::InvalidParameter("--samples must be positive".into()).into());
            }
            let sampler = EncodedFusionSampler::new(&code, &strategy, &model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut counts = [0u64; 4];
            for _ in 0..samples {
                let slot = match sampler.draw(&mut rng) {
                    EncodedOutcome::Both => 0,
                    EncodedOutcome::XxOnly => 1,
                    EncodedOutcome::ZzOnly => 2,
                    EncodedOutcome::Neither => 3,
                };
                counts[slot] += 1;
            }
            let p = |c: u64| c as f64 / samples as f64;
            let dist = fbqc_core::FloatDist {
                both: p(counts[0]),
                xx_only: p(counts[1]),
                zz_only: p(counts[2]),
                neither: p(counts[3]),
            };
            (dist, "sampled", samples)
        }
        None => {
            let exact = exact_encoded_fusion_dist(&code, &strategy, &model).map_err(|e| match e {
                Error::EnumerationLimit(msg) => {
                    Error::EnumerationLimit(format!("{msg}; use --samples N for Monte Carlo"))
                }
                other => other,
            })?;
            // Adaptive policies produce correct but enormous dyadic
            // denominators; only show fractions while they are readable.
            let compact = exact.total().denom().to_string().len() <= 12
                && [&exact.both, &exact.xx_only, &exact.zz_only, &exact.neither]
                    .iter()
                    .all(|p| p.denom().to_string().len() <= 12);
            if cli.format == Format::Text && compact {
                lines.push(kv("exact fractions", ""));
                lines.push(kv("  both", &exact.both));
                lines.push(kv("  xx_only", &exact.xx_only));
                lines.push(kv("  zz_only", &exact.zz_only));
                lines.push(kv("  neither", &exact.neither));
            }
            (exact.to_float(), "exact", 0)
        }
    };

    match cli.format {
        Format::Records => {
            let mut record = Record::new("fusion-stats")
                .field("code", code_label(n, m))
                .field("strategy", strategy.name())
                .float("eta", args.eta)
                .field("boosted", args.boosted)
                .field("photons_per_qubit", args.photons_per_qubit)
                .field("mode", mode);
            if mode == "sampled" {
                record = record.field("samples", samples).field("seed", cli.seed);
            }
            lines.push(
                record
                    .float("p_both", dist.both)
                    .float("p_xx_only", dist.xx_only)
                    .float("p_zz_only", dist.zz_only)
                    .float("p_neither", dist.neither)
                    .float("p_xx", dist.both + dist.xx_only)
                    .float("p_zz", dist.both + dist.zz_only)
                    .finish(),
            );
        }
        Format::Text => {
            lines.push(kv("code", code_label(n, m)));
            lines.push(kv("strategy", strategy.name()));
            lines.push(kv("eta", format!("{:.6}", args.eta)));
            lines.push(kv("boosted", if args.boosted { "yes" } else { "no" }));
            lines.push(kv("photons/qubit", args.photons_per_qubit));
            if mode == "sampled" {
                lines.push(kv("mode", format!("sampled ({samples} draws, seed {})", cli.seed)));
            } else {
                lines.push(kv("mode", "exact enumeration"));
            }
            lines.push(kv("p(both)", format!("{:.6}", dist.both)));
            lines.push(kv("p(xx only)", format!("{:.6}", dist.xx_only)));
            lines.push(kv("p(zz only)", format!("{:.6}", dist.zz_only)));
            lines.push(kv("p(neither)", format!("{:.6}", dist.neither)));
            lines.push(kv("p(xx)", format!("{:.6}", dist.both + dist.xx_only)));
            lines.push(kv("p(zz)", format!("{:.6}", dist.both + dist.zz_only)));
        }
    }
    Ok(())
}

fn run_threshold(cli: &Cli, args: &ThresholdArgs, lines: &mut Vec<String>) -> CliResult<()> {
    // Context fields for the persisted log; every record carries the seed
    // and enough parameters to rerun it.
    struct Context {
        family: String,
        code: Option<String>,
        strategy: Option<String>,
        boosted: Option<bool>,
        photons_per_qubit: Option<u8>,
    }

    let (estimate, ctx) = if args.control {
        let estimate =
            estimate_percolation_control(&args.sizes, args.trials, args.bracket, cli.seed)?;
        let ctx = Context {
            family: "control".to_string(),
            code: None,
            strategy: None,
            boosted: None,
            photons_per_qubit: None,
        };
        (estimate, ctx)
    } else {
        // clap guarantees these are present when --control is absent.
        let family = ResourceFamily::from_name(args.family.as_deref().unwrap())?;
        let (n, m) = args.code.unwrap();
        let code = ShorCode::new(n, m)?;
        let strategy = parse_strategy(args.strategy.as_deref().unwrap(), &code)?;
        // Loss is swept over the bracket; the model here only fixes the
        // photon count and boosting.
        let model = PhysicalFusionModel::new(0.0, args.photons_per_qubit, args.boosted)?;
        let estimate = estimate_threshold(
            &family,
            &code,
            &strategy,
            &model,
            &args.sizes,
            args.trials,
            args.bracket,
            cli.seed,
        )?;
        let ctx = Context {
            family: family.name().to_string(),
            code: Some(code_label(n, m)),
            strategy: Some(strategy.name().to_string()),
            boosted: Some(args.boosted),
            photons_per_qubit: Some(args.photons_per_qubit),
        };
        (estimate, ctx)
    };

    let context_record = |kind: &str| {
        let mut record = Record::new(kind).field("family", &ctx.family);
        if let Some(code) = &ctx.code {
            record = record.field("code", code);
        }
        if let Some(strategy) = &ctx.strategy {
            record = record.field("strategy", strategy);
        }
        if let Some(boosted) = ctx.boosted {
            record = record.field("boosted", boosted);
        }
        if let Some(ppq) = ctx.photons_per_qubit {
            record = record.field("photons_per_qubit", ppq);
        }
        record
    };
    let sizes_label = args
        .sizes
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let estimate_record = context_record("threshold")
        .field("sizes", &sizes_label)
        .field("trials", args.trials)
        .float("bracket_lo", args.bracket.0)
        .float("bracket_hi", args.bracket.1)
        .float("threshold", estimate.threshold)
        .float("ci_low", estimate.ci_low)
        .float("ci_high", estimate.ci_high)
        .field("seed", cli.seed)
        .finish();

    // Append-only results log: the estimate line plus one raw row per
    // (eta, L) grid point, each self-describing.
    let log_path = cli.out.join("threshold_results.log");
    let mut log = fs::OpenOptions::new().create(true).append(true).open(&log_path)?;
    writeln!(log, "{estimate_record}")?;
    for point in &estimate.curves {
        let row = context_record("threshold-curve")
            .float("eta", point.eta)
            .field("l", point.l)
            .field("failures", point.failures)
            .field("trials", point.trials)
            .field("seed", cli.seed)
            .finish();
        writeln!(log, "{row}")?;
    }

    match cli.format {
        Format::Records => {
            lines.push(estimate_record);
            lines.extend(curve_rows(&estimate));
        }
        Format::Text => {
            lines.push(kv("family", &ctx.family));
            if let Some(code) = &ctx.code {
                lines.push(kv("code", code));
            }
            if let Some(strategy) = &ctx.strategy {
                lines.push(kv("strategy", strategy));
            }
            if let Some(boosted) = ctx.boosted {
                lines.push(kv("boosted", if boosted { "yes" } else { "no" }));
            }
            if let Some(ppq) = ctx.photons_per_qubit {
                lines.push(kv("photons/qubit", ppq));
            }
            lines.push(kv("sizes", &sizes_label));
            lines.push(kv("trials/point", args.trials));
            lines.push(kv("bracket", format!("[{:.6}, {:.6}]", args.bracket.0, args.bracket.1)));
            lines.push(kv("threshold", format!("{:.6}", estimate.threshold)));
            lines.push(kv(
                "95% CI",
                format!("[{:.6}, {:.6}]", estimate.ci_low, estimate.ci_high),
            ));
            lines.push(kv("seed", cli.seed));
            lines.push(kv(
                "results log",
                format!("{} (+{} records)", log_path.display(), estimate.curves.len() + 1),
            ));
        }
    }
    Ok(())
}

fn run_table1(cli: &Cli, args: &Table1Args, lines: &mut Vec<String>) -> CliResult<ExitCode> {
    let report = report_table1(args.budget, cli.seed)?;
    match cli.format {
        Format::Records => {
            for row in &report.rows {
                lines.push(
                    Record::new("table1-row")
                        .field("family", row.family.name())
                        .field("code", code_label(row.code.n(), row.code.m()))
                        .field("qubits", row.qubits)
                        .field("reference_cost", row.reference_cost)
                        .field("computed_cost", row.computed_cost)
                        .field("lower_bound", row.lower_bound)
                        .float("gap_percent", row.gap_percent())
                        .field("evaluations", row.evaluations)
                        .field("exhaustive", row.exhaustive)
                        .field("flagged", row.flagged)
                        .field("budget", report.budget)
                        .field("seed", report.seed)
                        .finish(),
                );
            }
        }
        Format::Text => {
            lines.push(format!(
                "{:<10}{:<8}{:<8}{:<11}{:<10}{:<13}{:<10}{}",
                "family", "code", "qubits", "reference", "computed", "lower_bound", "gap", "status"
            ));
            for row in &report.rows {
                lines.push(format!(
                    "{:<10}{:<8}{:<8}{:<11}{:<10}{:<13}{:<10}{}",
                    row.family.name(),
                    code_label(row.code.n(), row.code.m()),
                    row.qubits,
                    row.reference_cost,
                    row.computed_cost,
                    row.lower_bound,
                    format!("{:.2}%", row.gap_percent()),
                    if row.flagged { "FLAGGED" } else { "ok" },
                ));
            }
            lines.push(kv("budget", report.budget));
            lines.push(kv("seed", report.seed));
            if report.any_flagged() {
                lines.push("one or more rows exceed the reference cost by >10%".to_string());
            }
        }
    }
    Ok(if report.any_flagged() { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn run_figure(cli: &Cli, args: &FigureArgs, lines: &mut Vec<String>) -> CliResult<()> {
    let rows = load_reference_table();
    let data = emit_figure_data(&rows, &[], args.envelope);
    let path = cli.out.join("figure.svg");
    fs::write(&path, data.svg.as_bytes())?;
    let points: usize = data.series.iter().map(|s| s.points.len()).sum();
    match cli.format {
        Format::Records => {
            lines.push(
                Record::new("figure")
                    .field("file", "figure.svg")
                    .field("series", data.series.len())
                    .field("points", points)
                    .field("envelope", args.envelope)
                    .finish(),
            );
            for series in &data.series {
                for (photons, lppt) in &series.points {
                    lines.push(
                        Record::new("figure-point")
                            .field("series", &series.label)
                            .field("photons", photons)
                            .float("lppt", *lppt)
                            .finish(),
                    );
                }
            }
        }
        Format::Text => {
            lines.push(kv("figure", path.display()));
            lines.push(kv("series", data.series.len()));
            lines.push(kv("points", points));
            lines.push(kv("envelope", if args.envelope { "yes" } else { "no" }));
            for series in &data.series {
                lines.push(format!("  {:<55}{} points", series.label, series.points.len()));
            }
        }
    }
    Ok(())
}

fn run_reference(cli: &Cli, args: &ReferenceArgs, lines: &mut Vec<String>) -> CliResult<()> {
    let rows: Vec<ReferenceRow> = load_reference_table()
        .into_iter()
        .filter(|row| args.filters.iter().all(|(k, v)| row.matches(k, v)))
        .collect();
    match cli.format {
        Format::Records => {
            for row in &rows {
                lines.push(
                    Record::new("reference-row")
                        .field("adaptivity", row.adaptivity)
                        .field("source", row.source_ref)
                        .field("network", row.network)
                        .field("state", row.unencoded_state)
                        .field("encoding", row.encoding.label())
                        .field("qubits", row.qubit_count)
                        .float("lppt", row.lppt)
                        .field("boosted", row.boosted)
                        .finish(),
                );
            }
        }
        Format::Text => {
            lines.push(format!(
                "{:<32}{:<22}{:<15}{:<10}{:<10}{:<8}{:<8}{}",
                "adaptivity", "source", "network", "state", "encoding", "qubits", "lppt", "boosted"
            ));
            for row in &rows {
                lines.push(format!(
                    "{:<32}{:<22}{:<15}{:<10}{:<10}{:<8}{:<8}{}",
                    row.adaptivity,
                    row.source_ref,
                    row.network,
                    row.unencoded_state,
                    row.encoding.label(),
                    row.qubit_count,
                    format!("{:.1}%", row.lppt * 100.0),
                    if row.boosted { "yes" } else { "no" },
                ));
            }
            lines.push(format!("{} rows", rows.len()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_parser_accepts_plain_and_braced() {
        assert_eq!(parse_code("2,2").unwrap(), (2, 2));
        assert_eq!(parse_code("{7,4}").unwrap(), (7, 4));
        assert_eq!(parse_code(" 3 , 2 ").unwrap(), (3, 2));
        assert!(parse_code("2").is_err());
        assert!(parse_code("a,b").is_err());
    }

    #[test]
    fn bracket_and_filter_parsers_validate() {
        assert_eq!(parse_bracket("0.01,0.05").unwrap(), (0.01, 0.05));
        assert!(parse_bracket("0.01").is_err());
        assert_eq!(
            parse_filter("network=6ring").unwrap(),
            ("network".to_string(), "6ring".to_string())
        );
        assert!(parse_filter("bogus=1").is_err());
        assert!(parse_filter("network").is_err());
    }

    #[test]
    fn strategy_names_resolve() {
        let code = ShorCode::new(2, 2).unwrap();
        assert_eq!(parse_strategy("randomized", &code).unwrap().name(), "randomized");
        assert_eq!(parse_strategy("static-bias", &code).unwrap().name(), "static-bias");
        assert_eq!(parse_strategy("local-adaptive", &code).unwrap().name(), "local-adaptive");
        assert!(parse_strategy("greedy", &code).is_err());
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
