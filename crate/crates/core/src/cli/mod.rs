//! The `rhs` command-line tool.
//!
//! Settings come from built-in defaults, then an optional `--config`
//! file, then command-line flags. Every command writes into `--out` and
//! finishes with a `run_manifest.txt` listing the effective settings.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid
//! configuration, 4 numeric failure.

pub mod config;
pub mod experiments;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::inference::mean_sd;
use crate::model::Dataset;
use crate::simulate::gen_dataset;
use config::ExperimentConfig;
use experiments::PreprocessOptions;
use io::{fmt, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Core(Error::Config(_) | Error::Parameter { .. }) => 3,
            CliError::Core(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rhs", version, about = "Horseshoe-family Gibbs samplers for sparse linear regression")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// rbhs, rbhs+, rbrhs, bhs, bhs+ or brhs.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HS_THREADS")]
    threads: Option<usize>,
    /// Record wall-clock time in the run manifest.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one dataset and summarize the posterior.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        chains: Option<usize>,
        /// Also write every retained draw.
        #[arg(long)]
        draws: bool,
    },
    /// Simulate and fit replicates, reporting selection and estimation metrics.
    Replicate {
        #[command(flatten)]
        common: Common,
    },
    /// Interval coverage and length over simulated replicates.
    Coverage {
        #[command(flatten)]
        common: Common,
    },
    /// Repeated train/test splits with held-out prediction error.
    Multisplit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        splits: Option<usize>,
    },
    /// Filter a feature-major expression matrix.
    Preprocess {
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 25.0)]
        percentile: f64,
        #[arg(long, default_value_t = 2.0)]
        min_range: f64,
        #[arg(long, default_value_t = 300)]
        top_k: usize,
        /// Feature id to use as the response; also writes `dataset.csv`.
        #[arg(long)]
        response: Option<String>,
    },
    /// Export one simulated dataset and its true coefficients.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(m) = &common.method {
        cfg.set("method", m)?;
    }
    macro_rules! apply {
        ($($field:ident => $target:expr),*) => {
            $(if let Some(v) = common.$field.clone() { $target(&mut cfg, v); })*
        };
    }
    apply!(
        seed => |c: &mut ExperimentConfig, v| c.seed = v,
        iters => |c: &mut ExperimentConfig, v| c.n_iter = v,
        burnin => |c: &mut ExperimentConfig, v| c.burn_in = v,
        thin => |c: &mut ExperimentConfig, v| c.thin = v,
        level => |c: &mut ExperimentConfig, v| c.level = v,
        replicates => |c: &mut ExperimentConfig, v| c.replicates = v,
        out => |c: &mut ExperimentConfig, v| c.out = v,
        threads => |c: &mut ExperimentConfig, v| c.threads = Some(v)
    );
    cfg.timing |= common.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(
    out: &Path,
    command: &str,
    settings: &[(String, String)],
    outputs: &[&str],
    elapsed: Option<f64>,
) -> Result<(), CliError> {
    let mut text = format!("command = {command}\nversion = {}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in settings {
        text.push_str(&format!("{k} = {v}\n"));
    }
    text.push_str(&format!("outputs = {}\n", outputs.join(", ")));
    if let Some(secs) = elapsed {
        text.push_str(&format!("elapsed_seconds = {secs:.3}\n"));
    }
    io::write_text(&out.join("run_manifest.txt"), &text)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Core(Error::Config(format!("cannot start {n} worker threads: {e}"))))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn mean_sd_rows(table: &mut Table, label_width: usize, columns: &[Vec<f64>]) {
    let stats: Vec<(f64, f64)> = columns.iter().map(|c| mean_sd(c)).collect();
    for (label, pick) in [("mean", 0), ("sd", 1)] {
        let mut row = vec![label.to_string()];
        row.extend(std::iter::repeat_n(String::new(), label_width - 1));
        row.extend(stats.iter().map(|s| fmt(if pick == 0 { s.0 } else { s.1 })));
        table.push(row);
    }
}

/// Records the loaded data's shape; the design keys describe simulations only.
fn note_dims(settings: &mut Vec<(String, String)>, data: &Dataset) {
    settings.push(("data_n".into(), data.n().to_string()));
    settings.push(("data_p".into(), data.p().to_string()));
}

fn cmd_fit(cfg: &ExperimentConfig, settings: &mut Vec<(String, String)>) -> Result<Vec<&'static str>, CliError> {
    let path = cfg.data.as_ref().ok_or_else(|| CliError::Core(Error::Config("fit requires --data".into())))?;
    let (data, names) = io::read_dataset(path)?;
    note_dims(settings, &data);
    let spec = cfg.sampler_spec();
    let chains = with_pool(cfg.threads, || experiments::fit_chains(&spec, &data, 0, cfg.chains))??;
    let summary = experiments::summarize_fit(&chains, &names, cfg.level)?;

    let multi = cfg.chains > 1;
    let mut header = vec!["term", "median", "lo", "hi", "selected"];
    if multi {
        header.push("psrf");
    }
    let mut table = Table::with_header(&header);
    for row in &summary {
        let mut cells = vec![
            row.term.clone(),
            fmt(row.median),
            fmt(row.interval.lo),
            fmt(row.interval.hi),
            row.selected.to_string(),
        ];
        if let Some(r) = row.psrf {
            cells.push(fmt(r));
        }
        table.push(cells);
    }
    table.write(&cfg.out.join("summary.csv"))?;
    let mut outputs = vec!["summary.csv"];

    if cfg.write_draws {
        let header: Vec<String> =
            ["chain", "draw", "intercept"].iter().map(|s| s.to_string()).chain(names.iter().cloned()).collect();
        let mut table = Table::new(header);
        for (c, draws) in chains.iter().enumerate() {
            for k in 0..draws.len() {
                let mut cells = vec![c.to_string(), k.to_string(), fmt(draws.beta0[k])];
                cells.extend(draws.row(k).iter().map(|&v| fmt(v)));
                table.push(cells);
            }
        }
        table.write(&cfg.out.join("draws.csv"))?;
        outputs.push("draws.csv");
    }
    Ok(outputs)
}

fn cmd_replicate(cfg: &ExperimentConfig) -> Result<Vec<&'static str>, CliError> {
    let rows = with_pool(cfg.threads, || experiments::run_replicates(cfg))??;
    let mut table = Table::with_header(&["replicate", "tp", "fp", "fn", "tn", "f1", "mcc", "l1"]);
    for r in &rows {
        table.push(vec![
            r.replicate.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.tn.to_string(),
            fmt(r.f1),
            fmt(r.mcc),
            fmt(r.l1),
        ]);
    }
    let columns: Vec<Vec<f64>> = vec![
        rows.iter().map(|r| r.tp as f64).collect(),
        rows.iter().map(|r| r.fp as f64).collect(),
        rows.iter().map(|r| r.fn_ as f64).collect(),
        rows.iter().map(|r| r.tn as f64).collect(),
        rows.iter().map(|r| r.f1).collect(),
        rows.iter().map(|r| r.mcc).collect(),
        rows.iter().map(|r| r.l1).collect(),
    ];
    mean_sd_rows(&mut table, 1, &columns);
    table.write(&cfg.out.join("metrics.csv"))?;

    let mut summary = Table::with_header(&["method", "TP", "FP", "F1", "MCC", "L1"]);
    let mut cells = vec![cfg.method.to_string()];
    for k in [0, 1, 4, 5, 6] {
        let (m, s) = mean_sd(&columns[k]);
        cells.push(format!("{m:.3}({s:.3})"));
    }
    summary.push(cells);
    summary.write(&cfg.out.join("summary.csv"))?;
    Ok(vec!["metrics.csv", "summary.csv"])
}

fn cmd_coverage(cfg: &ExperimentConfig) -> Result<Vec<&'static str>, CliError> {
    let (intervals, truth) = with_pool(cfg.threads, || experiments::run_coverage(cfg))??;
    let (pooled, by_coef) = experiments::coverage_tables(&intervals, &truth)?;
    for (rows, name) in [(&pooled, "coverage.csv"), (&by_coef, "coverage_by_coefficient.csv")] {
        let mut table = Table::with_header(&["term", "coverage", "avg_length"]);
        for r in rows {
            table.push(vec![r.term.clone(), fmt(r.coverage), fmt(r.avg_length)]);
        }
        table.write(&cfg.out.join(name))?;
    }
    Ok(vec!["coverage.csv", "coverage_by_coefficient.csv"])
}

fn cmd_multisplit(cfg: &ExperimentConfig, settings: &mut Vec<(String, String)>) -> Result<Vec<&'static str>, CliError> {
    let path = cfg.data.as_ref().ok_or_else(|| CliError::Core(Error::Config("multisplit requires --data".into())))?;
    let (data, _) = io::read_dataset(path)?;
    note_dims(settings, &data);
    let rows = with_pool(cfg.threads, || experiments::run_multisplit(cfg, &data))??;
    let mut table = Table::with_header(&["split", "model_size", "mad"]);
    for r in &rows {
        table.push(vec![r.split.to_string(), r.model_size.to_string(), fmt(r.mad)]);
    }
    let columns = vec![rows.iter().map(|r| r.model_size as f64).collect(), rows.iter().map(|r| r.mad).collect()];
    mean_sd_rows(&mut table, 1, &columns);
    table.write(&cfg.out.join("splits.csv"))?;
    Ok(vec!["splits.csv"])
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<&'static str>, CliError> {
    let (data, truth) = gen_dataset(&cfg.design, cfg.seed, cfg.replicate_index)?;
    let names = io::default_names(data.p());
    io::write_dataset(&cfg.out.join("dataset.csv"), &data, &names)?;
    let mut table = Table::with_header(&["term", "value"]);
    table.push(vec!["intercept".into(), fmt(truth.beta0)]);
    for (name, b) in names.iter().zip(&truth.beta) {
        table.push(vec![name.clone(), fmt(*b)]);
    }
    table.write(&cfg.out.join("truth.csv"))?;
    Ok(vec!["dataset.csv", "truth.csv"])
}

fn cmd_preprocess(
    input: &Path,
    out: &Path,
    opts: &PreprocessOptions,
    response: Option<&str>,
) -> Result<Vec<&'static str>, CliError> {
    let matrix = io::read_matrix(input)?;
    let (y, features) = match response {
        Some(id) => {
            let (y, rest) = experiments::take_response(&matrix, id)?;
            (Some(y), rest)
        }
        None => (None, matrix.clone()),
    };
    // The percentile threshold is taken over every value in the input,
    // response included.
    let (_, log) = experiments::preprocess(&matrix, opts)?;
    let (kept, stage_log) = experiments::preprocess_with_threshold(&features, opts, log.threshold)?;
    io::write_matrix(&out.join("filtered.csv"), &kept)?;
    let text = format!(
        "threshold = {}\ninput = {}\nafter_max_filter = {}\nafter_range_filter = {}\nafter_top_k = {}\n",
        fmt(stage_log.threshold),
        stage_log.input,
        stage_log.after_max_filter,
        stage_log.after_range_filter,
        stage_log.after_top_k
    );
    io::write_text(&out.join("preprocess_log.txt"), &text)?;
    let mut outputs = vec!["filtered.csv", "preprocess_log.txt"];
    if let Some(y) = y {
        let data = experiments::to_dataset(y, &kept)?;
        io::write_dataset(&out.join("dataset.csv"), &data, &kept.ids)?;
        outputs.push("dataset.csv");
    }
    Ok(outputs)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    if let Command::Preprocess { input, out, percentile, min_range, top_k, response } = &cli.command {
        io::ensure_dir(out)?;
        let opts = PreprocessOptions { percentile: *percentile, min_range: *min_range, top_k: *top_k };
        let outputs = cmd_preprocess(input, out, &opts, response.as_deref())?;
        let settings = vec![
            ("input".to_string(), input.display().to_string()),
            ("percentile".to_string(), percentile.to_string()),
            ("min_range".to_string(), min_range.to_string()),
            ("top_k".to_string(), top_k.to_string()),
            ("response".to_string(), response.clone().unwrap_or_else(|| "-".into())),
        ];
        return write_manifest(out, "preprocess", &settings, &outputs, None);
    }

    let (name, common) = match &cli.command {
        Command::Fit { common, .. } => ("fit", common),
        Command::Replicate { common } => ("replicate", common),
        Command::Coverage { common } => ("coverage", common),
        Command::Multisplit { common, .. } => ("multisplit", common),
        Command::Simulate { common } => ("simulate", common),
        Command::Preprocess { .. } => unreachable!("handled above"),
    };
    let mut cfg = load_config(common)?;
    match &cli.command {
        Command::Fit { data, chains, draws, .. } => {
            if let Some(d) = data {
                cfg.data = Some(d.clone());
            }
            if let Some(c) = chains {
                cfg.chains = *c;
            }
            cfg.write_draws |= draws;
        }
        Command::Multisplit { data, train, splits, .. } => {
            if let Some(d) = data {
                cfg.data = Some(d.clone());
            }
            if train.is_some() {
                cfg.train = *train;
            }
            if let Some(s) = splits {
                cfg.splits = *s;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    io::ensure_dir(&cfg.out)?;
    let mut settings = cfg.describe();
    let outputs = match name {
        "fit" => cmd_fit(&cfg, &mut settings)?,
        "replicate" => cmd_replicate(&cfg)?,
        "coverage" => cmd_coverage(&cfg)?,
        "multisplit" => cmd_multisplit(&cfg, &mut settings)?,
        _ => cmd_simulate(&cfg)?,
    };
    let elapsed = cfg.timing.then(|| start.elapsed().as_secs_f64());
    write_manifest(&cfg.out, name, &settings, &outputs, elapsed)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
