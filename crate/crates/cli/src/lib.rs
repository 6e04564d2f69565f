//! Command-line front end: argument parsing, dispatch and file emission for
//! the `plnc` binary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use plnc_core::mapsolver::min_t;
use plnc_core::netmap::{catalog_for, CatalogRecord};
use plnc_core::quantizer::region_grid;
use plnc_core::simulator::{run_ser_sweep_with, SimConfig};
use plnc_core::singular::enumerate_singular_states;
use plnc_core::{
    Constellation, ConstellationDescriptor, ConstellationName, FadeState, MapCatalog, MapPolicy,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PLNC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "plnc", version, about = "Adaptive physical-layer network coding for the two-way relay channel")]
pub struct Cli {
    /// Write the result to this file (atomically) instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary of one constellation, or the comparison tables for all named sets.
    Info {
        #[arg(long, value_parser = parse_constellation)]
        constellation: Option<Constellation>,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
    },
    /// Singular fade states in canonical order.
    Singular {
        #[arg(long, value_parser = parse_constellation)]
        constellation: Constellation,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// The removing-map catalog, one entry per singular fade state.
    Maps {
        #[arg(long, value_parser = parse_constellation)]
        constellation: Constellation,
        #[arg(long, value_enum, default_value_t = MapsFormat::Json)]
        emit: MapsFormat,
    },
    /// Smallest removing Latin square for one fade state.
    Solve {
        #[arg(long, value_parser = parse_constellation)]
        constellation: Constellation,
        /// Fade state as `re,im`.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        state: FadeState,
        #[arg(long, value_enum, default_value_t = InfoFormat::Text)]
        format: InfoFormat,
    },
    /// Region assignment over a square of the fade-state plane.
    Quantize {
        #[command(flatten)]
        source: CatalogSource,
        /// Half-width of the plotted square.
        #[arg(long, default_value_t = 3.0, value_parser = parse_positive)]
        extent: f64,
        /// Samples per side.
        #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u32).range(2..=4096))]
        res: u32,
        #[arg(long, value_enum, default_value_t = GridFormat::Svg)]
        out: GridFormat,
    },
    /// Monte Carlo end-to-end SER sweep.
    Simulate {
        #[command(flatten)]
        source: CatalogSource,
        /// Rician factor K (0 is Rayleigh).
        #[arg(long, default_value_t = 0.0, value_parser = parse_nonnegative)]
        k: f64,
        /// SNR grid in dB as `start:step:stop`, or a single value.
        #[arg(long, value_parser = parse_snr_grid, allow_hyphen_values = true)]
        snr: SnrGrid,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest BC alphabet the relay may use.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=64))]
        bc_cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = PolicyArg::AdaptiveCatalog)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        out: TableFormat,
    },
}

#[derive(Debug, Args)]
pub struct CatalogSource {
    /// Named set (psk4, s4, psk8, qam8cross, s8) or a JSON constellation file.
    #[arg(long, value_parser = parse_constellation)]
    pub constellation: Constellation,
    /// Load the map catalog from a JSON file written by `maps`.
    #[arg(long, value_name = "PATH")]
    pub catalog: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InfoFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapsFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Svg,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    AdaptiveCatalog,
    FixedXor,
}

impl From<PolicyArg> for MapPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::AdaptiveCatalog => MapPolicy::AdaptiveCatalog,
            PolicyArg::FixedXor => MapPolicy::FixedXor,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

/// A named constellation, or a JSON descriptor `{"label", "points": [[re, im], ...]}`.
pub fn parse_constellation(s: &str) -> Result<Constellation, String> {
    if let Ok(name) = s.parse::<ConstellationName>() {
        return Ok(plnc_core::constellation::build_named(name));
    }
    let path = Path::new(s);
    if !path.is_file() {
        let names: Vec<&str> = ConstellationName::ALL.iter().map(|n| n.as_str()).collect();
        return Err(format!("not a named set ({}) or a readable file", names.join(", ")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {s}: {e}"))?;
    let desc: ConstellationDescriptor =
        serde_json::from_str(&text).map_err(|e| format!("invalid constellation file {s}: {e}"))?;
    Constellation::from_descriptor(&desc).map_err(|e| e.to_string())
}

pub fn parse_state(s: &str) -> Result<FadeState, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("fade state must be finite".into());
    }
    Ok(FadeState::from_parts(re, im))
}

pub fn parse_snr_grid(s: &str) -> Result<SnrGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| -> Result<f64, String> {
        let v: f64 = p.trim().parse().map_err(|e| format!("bad SNR value {p:?}: {e}"))?;
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(format!("bad SNR value {p:?}"));
        }
        Ok(v)
    };
    match parts.as_slice() {
        [single] => Ok(SnrGrid(vec![num(single)?])),
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step.is_finite() && step > 0.0 && start.is_finite() && stop.is_finite()) {
                return Err("step must be positive and the bounds finite".into());
            }
            if stop < start {
                return Err("stop is below start".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 10_000 {
                return Err("too many SNR points".into());
            }
            Ok(SnrGrid((0..=n).map(|k| start + step * k as f64).collect()))
        }
        _ => Err(format!("expected `start:step:stop` or a single value, got {s:?}")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative and finite, got {s}"))
    }
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => bail!("{THREADS_ENV} must be a positive integer, got {v:?}"),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{THREADS_ENV}: {e}"),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 for invalid arguments, 1 when the
/// computation fails.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(n) = threads {
        // Fails only if the pool already exists, e.g. on repeated in-process calls.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli, threads) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Runs a parsed command, writing to `--output` or stdout.
pub fn execute(cli: &Cli, threads: Option<usize>) -> anyhow::Result<()> {
    let text = render(&cli.command, threads)?;
    match &cli.output {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| anyhow!("cannot write {}: {}", path.display(), e.error))?;
    Ok(())
}

fn load_catalog(source: &CatalogSource) -> anyhow::Result<MapCatalog> {
    match &source.catalog {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let records: Vec<CatalogRecord> = serde_json::from_str(&text)
                .with_context(|| format!("invalid catalog file {}", path.display()))?;
            Ok(MapCatalog::from_records(&source.constellation, &records)?)
        }
        None => Ok(catalog_for(&source.constellation)?.1),
    }
}

/// The command's output as text.
pub fn render(command: &Command, threads: Option<usize>) -> anyhow::Result<String> {
    match command {
        Command::Info { constellation: None, format } => {
            let rows = table_rows()?;
            Ok(match format {
                InfoFormat::Text => format_table(&rows),
                InfoFormat::Json => serde_json::to_string_pretty(&rows_json(&rows))? + "\n",
            })
        }
        Command::Info { constellation: Some(c), format } => {
            let row = summary_row(c)?;
            Ok(match format {
                InfoFormat::Text => format!(
                    "constellation: {}\nM={}\nd_min={:.4}\n|H|={}\nmax BC size={}\n",
                    row.label, row.m, row.d_min, row.singular, row.max_bc
                ),
                InfoFormat::Json => serde_json::to_string_pretty(&rows_json(&[row]).remove(0))? + "\n",
            })
        }
        Command::Singular { constellation, format } => {
            let cat = enumerate_singular_states(constellation);
            match format {
                TableFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["re", "im", "abs", "arg"])?;
                    for h in cat.states() {
                        w.serialize((h.value().re, h.value().im, h.gamma(), h.theta()))?;
                    }
                    Ok(String::from_utf8(w.into_inner()?)?)
                }
                TableFormat::Json => {
                    let rows: Vec<serde_json::Value> = cat
                        .states()
                        .iter()
                        .map(|h| {
                            serde_json::json!({
                                "re": h.value().re, "im": h.value().im, "abs": h.gamma(), "arg": h.theta()
                            })
                        })
                        .collect();
                    Ok(serde_json::to_string_pretty(&rows)? + "\n")
                }
            }
        }
        Command::Maps { constellation, emit } => {
            let (_, catalog) = catalog_for(constellation)?;
            Ok(match emit {
                MapsFormat::Json => serde_json::to_string_pretty(&catalog.to_records())? + "\n",
                MapsFormat::Text => {
                    let mut out = String::new();
                    for (k, e) in catalog.entries().iter().enumerate() {
                        writeln!(out, "[{k}] h = {}  t = {}  ({})", e.state, e.map.t(), e.origin)?;
                        writeln!(out, "{}", e.map)?;
                    }
                    writeln!(out, "solver fallbacks: {}", catalog.solver_fallbacks())?;
                    out
                }
            })
        }
        Command::Solve { constellation, state, format } => {
            let (t, map) = min_t(constellation, *state)?;
            Ok(match format {
                InfoFormat::Text => format!("t(h) = {t} for h = {state}\n{map}\n"),
                InfoFormat::Json => {
                    serde_json::to_string_pretty(&serde_json::json!({
                        "state": [state.value().re, state.value().im],
                        "t": t,
                        "grid": map.rows(),
                    }))? + "\n"
                }
            })
        }
        Command::Quantize { source, extent, res, out } => {
            let catalog = load_catalog(source)?;
            let grid = region_grid(&source.constellation, &catalog, *extent, *res as usize)?;
            Ok(match out {
                GridFormat::Svg => grid.to_svg(&catalog),
                GridFormat::Csv => grid.to_csv(),
            })
        }
        Command::Simulate { source, k, snr, trials, seed, bc_cap, policy, out } => {
            let catalog = load_catalog(source)?;
            let mut cfg = SimConfig::new(source.constellation.clone());
            cfg.rician_k = *k;
            cfg.snr_db_grid = snr.0.clone();
            cfg.trials_per_point = *trials;
            cfg.seed = *seed;
            cfg.relay_bc_size_cap = bc_cap.map(|c| c as usize);
            cfg.map_policy = (*policy).into();
            cfg.workers = threads;
            let result = run_ser_sweep_with(&cfg, &catalog)?;
            Ok(match out {
                TableFormat::Csv => result.to_csv(),
                TableFormat::Json => serde_json::to_string_pretty(&result)? + "\n",
            })
        }
    }
}

/// One row of the comparison tables.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub m: usize,
    pub d_min: f64,
    pub singular: usize,
    pub max_bc: usize,
}

pub fn summary_row(c: &Constellation) -> anyhow::Result<SummaryRow> {
    let (states, catalog) = catalog_for(c)?;
    Ok(SummaryRow {
        label: c.label().to_string(),
        m: c.len(),
        d_min: c.d_min(),
        singular: states.len(),
        max_bc: catalog.max_t(),
    })
}

/// Rows for every named set, computed from scratch.
pub fn table_rows() -> anyhow::Result<Vec<SummaryRow>> {
    ConstellationName::ALL
        .iter()
        .map(|&n| summary_row(&plnc_core::constellation::build_named(n)))
        .collect()
}

fn rows_json(rows: &[SummaryRow]) -> Vec<serde_json::Value> {
    rows.iter()
        .map(|r| {
            serde_json::json!({
                "constellation": r.label, "m": r.m, "d_min": r.d_min,
                "singular_states": r.singular, "max_bc_size": r.max_bc
            })
        })
        .collect()
}

fn format_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    for (title, m) in [("4-point signal sets", 4), ("8-point signal sets", 8)] {
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "{:<12} {:>8} {:>6} {:>12}", "set", "d_min", "|H|", "max BC size");
        for r in rows.iter().filter(|r| r.m == m) {
            let _ = writeln!(out, "{:<12} {:>8.4} {:>6} {:>12}", r.label, r.d_min, r.singular, r.max_bc);
        }
        out.push('\n');
    }
    out
}

/// Both comparison tables as text, regenerated from live computation.
pub fn emit_table_summary() -> anyhow::Result<String> {
    Ok(format_table(&table_rows()?))
}
