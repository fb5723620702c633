//! Command-line surface: the `simulate`, `bench` and `report` subcommands,
//! artifact manifests with content digests, and stable exit codes.
//!
//! Exit codes: 0 success, 2 configuration or parameter errors, 3 solver
//! errors, 4 format errors. `AXICYL_THREADS` caps worker parallelism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{self, Suite, SuiteOptions};
use crate::config::SimConfig;
use crate::diagnostics::DiagnosticsSeries;
use crate::error::{Error, Result};
use crate::evolution::{self, RunRecord};
use crate::io::{self, CsvWriter, CSV_HEADER};
use crate::plot;

/// Ceiling on the worst recorded discrete-continuity residual for the
/// `div_ok` conservation flag.
pub const DIV_RESIDUAL_TOL: f64 = 1e-9;
/// Ceiling on the cumulative relative energy-identity residual for the
/// `energy_ok` flag.
pub const ENERGY_RESIDUAL_TOL: f64 = 1e-3;
/// Relative slack allowed on the swirl maximum principle for unforced runs.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-10;

/// Convention statement echoed into every run summary so reported numbers
/// can be reconciled without consulting the source.
const CONVENTIONS: &str = "volume integrals use the r dr dz measure with the \
constant angular factor dropped from both sides of every estimate; radially \
weighted integrals read their weights in the same measure";

#[derive(Parser)]
#[command(
    name = "axicyl",
    version,
    about = "Meridian-plane solver and inequality verification bench for \
             axisymmetric incompressible flow in a finite cylinder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation: diagnostics CSV, checkpoints, and a JSON summary.
    Simulate {
        /// Key-value config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Continue from this checkpoint instead of the configured initial
        /// state; cumulative diagnostics then measure from the restart time.
        #[arg(long)]
        restart: Option<PathBuf>,
    },
    /// Run a verification suite: JSON reports, a summary table, ratio plots.
    Bench {
        /// One of: hardy, interp, hardy-interp, weighted, h2, h3, energy,
        /// swirl, order-reduction, all.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Randomized samples per field ensemble.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Coarse,fine resolution pair, e.g. 64,128.
        #[arg(long)]
        grids: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive report artifacts from a prior output directory.
    Report {
        /// Directory holding simulate and/or bench outputs.
        #[arg(long = "in")]
        input: PathBuf,
        /// csv, json or svg.
        #[arg(long)]
        format: String,
    },
}

/// Manifest of one command invocation: every emitted file with its content
/// digest. Identical config and seed reproduce identical digests.
#[derive(Debug, Serialize)]
pub struct RunArtifacts {
    pub command: String,
    pub status: String,
    pub error: Option<String>,
    pub config_echo: Option<String>,
    pub options: BTreeMap<String, String>,
    pub csv: Vec<String>,
    pub json: Vec<String>,
    pub svg: Vec<String>,
    pub checkpoint_dir: Option<String>,
    pub checkpoints: Vec<String>,
    /// Relative path → hex SHA-256, for every file above.
    pub digests: BTreeMap<String, String>,
}

#[derive(Clone, Copy)]
enum Kind {
    Csv,
    Json,
    Svg,
    Checkpoint,
    Extra,
}

/// Accumulates emitted files during a command and digests them on `seal`.
struct ArtifactSet {
    root: PathBuf,
    command: String,
    config_echo: Option<String>,
    options: BTreeMap<String, String>,
    checkpoint_dir: Option<String>,
    files: Vec<(String, Kind)>,
}

impl ArtifactSet {
    fn new(command: &str, root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            command: command.to_string(),
            config_echo: None,
            options: BTreeMap::new(),
            checkpoint_dir: None,
            files: Vec::new(),
        }
    }

    fn add(&mut self, rel: impl Into<String>, kind: Kind) {
        self.files.push((rel.into(), kind));
    }

    fn seal(self, status: &str, error: Option<String>) -> Result<RunArtifacts> {
        let mut arts = RunArtifacts {
            command: self.command,
            status: status.to_string(),
            error,
            config_echo: self.config_echo,
            options: self.options,
            csv: Vec::new(),
            json: Vec::new(),
            svg: Vec::new(),
            checkpoint_dir: self.checkpoint_dir,
            checkpoints: Vec::new(),
            digests: BTreeMap::new(),
        };
        for (rel, kind) in self.files {
            let digest = io::sha256_hex(&self.root.join(&rel))?;
            arts.digests.insert(rel.clone(), digest);
            match kind {
                Kind::Csv => arts.csv.push(rel),
                Kind::Json => arts.json.push(rel),
                Kind::Svg => arts.svg.push(rel),
                Kind::Checkpoint => arts.checkpoints.push(rel),
                Kind::Extra => {}
            }
        }
        Ok(arts)
    }
}

/// Pass/fail record of the discrete conservation statements over a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConservationFlags {
    pub div_residual_max: f64,
    pub div_ok: bool,
    pub energy_residual: f64,
    pub energy_ok: bool,
    /// Relative overshoot of the swirl sup over its initial value; absent on
    /// forced runs, where no maximum principle applies.
    pub max_principle_margin: Option<f64>,
    pub max_principle_ok: Option<bool>,
}

/// Swirl concentration ratios over the exponent sweep; `None` marks values
/// undefined on quiescent data.
#[derive(Debug, Serialize, Deserialize)]
pub struct LimitSweep {
    pub exponents: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
    pub monotone: bool,
    pub final_ratio: Option<f64>,
    pub degenerate: bool,
}

/// Final JSON summary of a simulation.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub t_end: f64,
    pub steps: u64,
    pub energy: f64,
    /// Regularity functional at the final time.
    pub x: f64,
    pub phi_v: f64,
    pub gamma_v: f64,
    pub interaction_abs: f64,
    pub criterion_exponent: f64,
    /// Concentration ratio at the configured exponent; `None` on quiescent
    /// swirl.
    pub criterion_ratio: Option<f64>,
    pub limit_sweep: LimitSweep,
    /// The twelve data constants; `None` where undefined (see `d_flags`).
    pub d_values: Vec<Option<f64>>,
    pub d_flags: Vec<String>,
    pub conservation: ConservationFlags,
    pub conventions: String,
}

fn build_summary(cfg: &SimConfig, steps: u64, series: &DiagnosticsSeries) -> Result<RunSummary> {
    let snap = series.snapshot();
    let dc = series.d_constants()?;
    let lc = series.limit_check();
    let opt = |v: f64| if v.is_finite() { Some(v) } else { None };
    let u0 = series.initial().u_inf;
    let unforced = cfg.forcing_preset == "quiescent";
    let (margin, mp_ok) = if unforced && u0 > 0.0 {
        let m = snap.u_inf_sup / u0 - 1.0;
        (Some(m), Some(m <= MAX_PRINCIPLE_SLACK))
    } else {
        (None, None)
    };
    let energy_residual = series.energy_residual();
    Ok(RunSummary {
        t_end: snap.t,
        steps,
        energy: snap.energy,
        x: snap.x,
        phi_v: snap.phi_v,
        gamma_v: snap.gamma_v,
        interaction_abs: series.interaction_abs(),
        criterion_exponent: cfg.d,
        criterion_ratio: series.criterion_ratio(),
        limit_sweep: LimitSweep {
            exponents: lc.exponents,
            ratios: lc.ratios.into_iter().map(opt).collect(),
            monotone: lc.monotone,
            final_ratio: opt(lc.final_ratio),
            degenerate: lc.degenerate,
        },
        d_values: dc.values.iter().copied().map(opt).collect(),
        d_flags: dc.flags,
        conservation: ConservationFlags {
            div_residual_max: snap.div_residual_max,
            div_ok: snap.div_residual_max <= DIV_RESIDUAL_TOL,
            energy_residual,
            energy_ok: energy_residual.abs() <= ENERGY_RESIDUAL_TOL,
            max_principle_margin: margin,
            max_principle_ok: mp_ok,
        },
        conventions: CONVENTIONS.to_string(),
    })
}

/// Run a simulation and persist its artifacts. On solver failure the partial
/// outputs are retained and described by `failure.json`.
pub fn command_simulate(
    config_path: &Path,
    out_dir: &Path,
    restart: Option<&Path>,
) -> Result<RunArtifacts> {
    let cfg = SimConfig::from_file(config_path)?;
    fs::create_dir_all(out_dir)?;
    fs::create_dir_all(out_dir.join("checkpoints"))?;

    let mut arts = ArtifactSet::new("simulate", out_dir);
    let echo = cfg.echo();
    fs::write(out_dir.join("config.echo.txt"), &echo)?;
    arts.config_echo = Some(echo);
    arts.checkpoint_dir = Some("checkpoints".to_string());
    arts.add("config.echo.txt", Kind::Extra);
    if let Some(ck) = restart {
        arts.options
            .insert("restart".to_string(), ck.display().to_string());
    }

    let mut csv = CsvWriter::create(&out_dir.join("diagnostics.csv"))?;
    let mut last_step: u64 = 0;
    let run_result = {
        let csv = &mut csv;
        let arts = &mut arts;
        let last_step = &mut last_step;
        let mut on_record = |rec: &RunRecord| -> Result<()> {
            *last_step = rec.step;
            if !rec.emit {
                return Ok(());
            }
            csv.write_row(&rec.series.row(rec.step, rec.dt)?)?;
            let name = format!("step-{:08}.ckpt", rec.step);
            io::write_checkpoint(rec.state, &out_dir.join("checkpoints").join(&name))?;
            arts.add(format!("checkpoints/{name}"), Kind::Checkpoint);
            Ok(())
        };
        match restart {
            None => evolution::run(&cfg, &mut on_record),
            Some(ck) => {
                let grid = cfg.build_grid()?;
                io::read_checkpoint(ck, &cfg.elliptic_settings(&grid))
                    .and_then(|state| evolution::run_from(state, &cfg, &mut on_record))
            }
        }
    };
    csv.finish()?;
    arts.add("diagnostics.csv", Kind::Csv);

    match run_result {
        Ok((_, series)) => {
            let summary = build_summary(&cfg, last_step, &series)?;
            io::write_json(&out_dir.join("summary.json"), &summary)?;
            arts.add("summary.json", Kind::Json);
            let manifest = arts.seal("ok", None)?;
            io::write_json(&out_dir.join("manifest.json"), &manifest)?;
            Ok(manifest)
        }
        Err(e) => {
            let manifest = arts.seal("failed", Some(e.to_string()))?;
            io::write_json(&out_dir.join("failure.json"), &manifest)?;
            Err(e)
        }
    }
}

fn parse_grid_pair(raw: &str) -> Result<(usize, usize)> {
    let bad = || {
        Error::Parameter(format!(
            "--grids expects '<coarse>,<fine>' with increasing positive sizes, got '{raw}'"
        ))
    };
    let (a, b) = raw.split_once(',').ok_or_else(bad)?;
    let coarse: usize = a.trim().parse().map_err(|_| bad())?;
    let fine: usize = b.trim().parse().map_err(|_| bad())?;
    if coarse == 0 || fine <= coarse {
        return Err(bad());
    }
    Ok((coarse, fine))
}

/// Run a verification suite and persist reports, the summary table, and the
/// worst-ratio bar chart.
pub fn command_bench(
    suite_name: &str,
    seed: u64,
    samples: usize,
    grids: Option<&str>,
    out_dir: &Path,
) -> Result<RunArtifacts> {
    let suite = Suite::parse(suite_name)?;
    if samples == 0 {
        return Err(Error::Parameter(
            "samples must be at least 1 (a zero-sample ensemble verifies nothing)".into(),
        ));
    }
    let grids = grids.map(parse_grid_pair).transpose()?;
    let opts = SuiteOptions {
        seed,
        samples,
        grids,
        ..SuiteOptions::default()
    };
    let output = bench::run_suite(suite, &opts)?;

    fs::create_dir_all(out_dir)?;
    let mut arts = ArtifactSet::new("bench", out_dir);
    arts.options
        .insert("suite".to_string(), suite.name().to_string());
    arts.options.insert("seed".to_string(), seed.to_string());
    arts.options
        .insert("samples".to_string(), samples.to_string());
    if let Some((c, f)) = grids {
        arts.options.insert("grids".to_string(), format!("{c},{f}"));
    }

    io::write_json(&out_dir.join("reports.json"), &output)?;
    arts.add("reports.json", Kind::Json);

    let mut table = String::from(
        "name,count,degenerate,coarse_grid,fine_grid,coarse_max,fine_max,max_ratio,median_fine,drift\n",
    );
    for s in &output.summaries {
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            s.name,
            s.count,
            s.degenerate_count,
            s.coarse_grid,
            s.fine_grid,
            s.coarse_max,
            s.fine_max,
            s.max_ratio,
            s.median_fine,
            s.drift
        ));
    }
    fs::write(out_dir.join("summary.csv"), table)?;
    arts.add("summary.csv", Kind::Csv);

    let mut bars: Vec<(String, f64)> = output
        .summaries
        .iter()
        .map(|s| (s.name.clone(), s.max_ratio))
        .collect();
    bars.sort_by(|a, b| a.0.cmp(&b.0));
    if !bars.is_empty() {
        let svg = plot::bar_chart("worst observed ratios", "lhs / rhs", &bars)?;
        fs::write(out_dir.join("ratios.svg"), svg)?;
        arts.add("ratios.svg", Kind::Svg);
    }

    let manifest = arts.seal("ok", None)?;
    io::write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Parse the diagnostics CSV back into (t, X) samples, verifying the header.
fn read_x_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("diagnostics CSV is empty".into()))?;
    if header != CSV_HEADER {
        return Err(Error::Format(
            "diagnostics CSV header does not match the column contract".into(),
        ));
    }
    let t_col = 1;
    let x_col = 12;
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != CSV_HEADER.split(',').count() {
            return Err(Error::Format(format!(
                "diagnostics CSV row {} has {} columns",
                k + 1,
                cells.len()
            )));
        }
        let parse = |idx: usize| -> Result<f64> {
            cells[idx]
                .parse()
                .map_err(|_| Error::Format(format!("diagnostics CSV row {}: bad number", k + 1)))
        };
        points.push((parse(t_col)?, parse(x_col)?));
    }
    Ok(points)
}

/// Per-inequality extract of a bench report file.
#[derive(Debug, Serialize)]
struct BenchRow {
    name: String,
    max_ratio: f64,
    drift: f64,
}

fn read_bench_rows(path: &Path) -> Result<Vec<BenchRow>> {
    let text = fs::read_to_string(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("bench report file is not valid JSON: {e}")))?;
    let summaries = doc
        .get("summaries")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Format("bench report file lacks a 'summaries' array".into()))?;
    let num = |v: Option<&serde_json::Value>| v.and_then(|x| x.as_f64()).unwrap_or(f64::NAN);
    let mut rows = Vec::new();
    for s in summaries {
        let name = s
            .get("name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Format("bench summary entry lacks a name".into()))?;
        rows.push(BenchRow {
            name: name.to_string(),
            max_ratio: num(s.get("max_ratio")),
            drift: num(s.get("drift")),
        });
    }
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "NaN".to_string(),
    }
}

/// Derive tables or plots from a directory produced by `simulate` and/or
/// `bench`. Emits only what the present inputs support.
pub fn command_report(in_dir: &Path, format: &str) -> Result<RunArtifacts> {
    if !matches!(format, "csv" | "json" | "svg") {
        return Err(Error::Config(format!(
            "unknown report format '{format}' (expected csv, json or svg)"
        )));
    }
    let summary_path = in_dir.join("summary.json");
    let series_path = in_dir.join("diagnostics.csv");
    let bench_path = in_dir.join("reports.json");

    let summary: Option<RunSummary> = if summary_path.exists() {
        let text = fs::read_to_string(&summary_path)?;
        Some(
            serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("summary.json is malformed: {e}")))?,
        )
    } else {
        None
    };
    let x_series = if series_path.exists() {
        Some(read_x_series(&series_path)?)
    } else {
        None
    };
    let bench_rows = if bench_path.exists() {
        Some(read_bench_rows(&bench_path)?)
    } else {
        None
    };
    if summary.is_none() && x_series.is_none() && bench_rows.is_none() {
        return Err(Error::Format(format!(
            "'{}' holds no summary.json, diagnostics.csv or reports.json to report on",
            in_dir.display()
        )));
    }

    let mut arts = ArtifactSet::new("report", in_dir);
    arts.options.insert("format".to_string(), format.to_string());

    match format {
        "svg" => {
            if let Some(points) = &x_series {
                let svg = plot::line_plot(
                    "regularity functional over time",
                    "t",
                    "X(t)",
                    &[("X".to_string(), points.clone())],
                );
                fs::write(in_dir.join("x_t.svg"), svg)?;
                arts.add("x_t.svg", Kind::Svg);
            }
            if let Some(s) = &summary {
                let pts: Vec<(f64, f64)> = s
                    .limit_sweep
                    .exponents
                    .iter()
                    .zip(&s.limit_sweep.ratios)
                    .map(|(&d, r)| (d.log2(), r.unwrap_or(f64::NAN)))
                    .collect();
                let svg = plot::line_plot(
                    "swirl concentration ratio vs exponent",
                    "log2 d",
                    "ratio",
                    &[("ratio".to_string(), pts)],
                );
                fs::write(in_dir.join("ratio_vs_d.svg"), svg)?;
                arts.add("ratio_vs_d.svg", Kind::Svg);
            }
            if let Some(rows) = &bench_rows {
                if !rows.is_empty() {
                    let bars: Vec<(String, f64)> = rows
                        .iter()
                        .map(|r| (r.name.clone(), r.max_ratio))
                        .collect();
                    let svg = plot::bar_chart("worst observed ratios", "lhs / rhs", &bars)?;
                    fs::write(in_dir.join("inequality_ratios.svg"), svg)?;
                    arts.add("inequality_ratios.svg", Kind::Svg);
                }
            }
        }
        "csv" => {
            let mut table = String::from("quantity,value\n");
            if let Some(s) = &summary {
                table.push_str(&format!("t_end,{}\n", s.t_end));
                table.push_str(&format!("steps,{}\n", s.steps));
                table.push_str(&format!("energy,{}\n", s.energy));
                table.push_str(&format!("x,{}\n", s.x));
                table.push_str(&format!("phi_v,{}\n", s.phi_v));
                table.push_str(&format!("gamma_v,{}\n", s.gamma_v));
                table.push_str(&format!("interaction_abs,{}\n", s.interaction_abs));
                table.push_str(&format!("criterion_exponent,{}\n", s.criterion_exponent));
                table.push_str(&format!("criterion_ratio,{}\n", fmt_opt(s.criterion_ratio)));
                table.push_str(&format!(
                    "div_residual_max,{}\n",
                    s.conservation.div_residual_max
                ));
                table.push_str(&format!(
                    "energy_residual,{}\n",
                    s.conservation.energy_residual
                ));
                table.push_str(&format!(
                    "max_principle_margin,{}\n",
                    fmt_opt(s.conservation.max_principle_margin)
                ));
                for (k, v) in s.d_values.iter().enumerate() {
                    table.push_str(&format!("D{},{}\n", k + 1, fmt_opt(*v)));
                }
                for (d, r) in s.limit_sweep.exponents.iter().zip(&s.limit_sweep.ratios) {
                    table.push_str(&format!("ratio_at_d{d},{}\n", fmt_opt(*r)));
                }
            }
            if let Some(rows) = &bench_rows {
                for r in rows {
                    table.push_str(&format!("max_ratio:{},{}\n", r.name, r.max_ratio));
                    table.push_str(&format!("drift:{},{}\n", r.name, r.drift));
                }
            }
            fs::write(in_dir.join("report.csv"), table)?;
            arts.add("report.csv", Kind::Csv);
        }
        _ => {
            #[derive(Serialize)]
            struct ReportDoc<'a> {
                summary: Option<&'a RunSummary>,
                bench: Option<&'a Vec<BenchRow>>,
            }
            io::write_json(
                &in_dir.join("report.json"),
                &ReportDoc {
                    summary: summary.as_ref(),
                    bench: bench_rows.as_ref(),
                },
            )?;
            arts.add("report.json", Kind::Json);
        }
    }

    let manifest = arts.seal("ok", None)?;
    io::write_json(&in_dir.join("report_manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Apply `AXICYL_THREADS` to the global worker pool. A second initialization
/// (e.g. in one test process) is harmless and ignored.
fn init_thread_pool() -> Result<()> {
    let Some(raw) = std::env::var_os("AXICYL_THREADS") else {
        return Ok(());
    };
    let text = raw.to_string_lossy();
    let n: usize = text.trim().parse().map_err(|_| {
        Error::Config(format!(
            "AXICYL_THREADS must be a positive integer, got '{text}'"
        ))
    })?;
    if n == 0 {
        return Err(Error::Config(
            "AXICYL_THREADS must be a positive integer, got '0'".into(),
        ));
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    init_thread_pool()?;
    match cli.command {
        Command::Simulate {
            config,
            out,
            restart,
        } => {
            let arts = command_simulate(&config, &out, restart.as_deref())?;
            println!(
                "simulate: {} files in {}",
                arts.digests.len(),
                out.display()
            );
        }
        Command::Bench {
            suite,
            seed,
            samples,
            grids,
            out,
        } => {
            let arts = command_bench(&suite, seed, samples, grids.as_deref(), &out)?;
            println!("bench: {} files in {}", arts.digests.len(), out.display());
        }
        Command::Report { input, format } => {
            let arts = command_report(&input, &format)?;
            println!(
                "report: {} files in {}",
                arts.digests.len(),
                input.display()
            );
        }
    }
    Ok(())
}

/// Parse the process arguments, run the selected command, and map the
/// outcome to the stable exit-code contract.
pub fn execute() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are configuration errors; --help/--version exit 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
