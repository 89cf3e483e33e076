//! gpt-selftest: reproduce the polygon sweep tables, the window-model game
//! bounds, and the reference strategies from the command line.
//!
//! Reports are deterministic: the same command line (including the seed)
//! produces byte-identical output. Wall-clock columns are suppressed unless
//! --timing is given for the same reason. Exit codes are a stable contract:
//! 0 all checks pass, 2 a numeric check failed, 3 usage error.

use adaptive_chsh_core::chsh::{self, TableKind, TableRow, TABLE_CSV_HEADER, TSIRELSON};
use adaptive_chsh_core::cone::{ConeH, ConeV};
use adaptive_chsh_core::dd;
use adaptive_chsh_core::epsilon;
use adaptive_chsh_core::game::GameOutcomeTable;
use adaptive_chsh_core::quantum::quantum_reference;
use adaptive_chsh_core::scalar::{rat, Rat, Scalar};
use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::{Read, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_MISMATCH: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "gpt-selftest", version, about = "Polygon CHSH sweeps and adaptive-game bounds")]
struct Cli {
    /// Worker threads for parallel sweeps; defaults to GPT_SELFTEST_JOBS,
    /// then to all cores
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write the report to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format for tabular commands
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Arithmetic mode; each command supports exactly one and rejects the
    /// other (sweep tables, figure2 and quantum are approx, the rest exact)
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Approx,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep maximal tensor products of odd polygons against the closed form
    TableOdd {
        /// Largest polygon to include
        #[arg(long, default_value_t = 13)]
        n_max: usize,
        /// Allow the multi-hour range up to n = 29
        #[arg(long)]
        full_range: bool,
        /// Include wall-clock seconds in the report
        #[arg(long)]
        timing: bool,
    },
    /// Sweep self-dualized even polygons against the closed form
    TableSelfdual {
        /// Largest polygon to include
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Allow the multi-hour range up to n = 30
        #[arg(long)]
        full_range: bool,
        /// Include wall-clock seconds in the report
        #[arg(long)]
        timing: bool,
    },
    /// Build the window models and verify the game bounds exactly
    Gbit {
        /// Window parameters as p/q rationals in [0, 1/8]
        #[arg(long, value_delimiter = ',', default_value = "1/20,1/16,1/12,1/10,1/8")]
        epsilon: Vec<String>,
    },
    /// Print the quantum strategy tables and its winning probability
    Quantum,
    /// Emit plot data: self-dual sweep points, the formula curve, the limit
    Figure2 {
        /// Largest polygon to include
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Allow the multi-hour range up to n = 30
        #[arg(long)]
        full_range: bool,
    },
    /// Sample separable square pairs and confirm the classical ceiling
    ClassicalCheck {
        /// Number of sampled mixtures
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed for the sampled mixtures
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Convert a cone text file between facet and generator descriptions
    Enumerate {
        /// Input path, or - for stdin
        input: PathBuf,
    },
}

impl Command {
    fn natural_mode(&self) -> Mode {
        match self {
            Command::Gbit { .. } | Command::ClassicalCheck { .. } | Command::Enumerate { .. } => {
                Mode::Exact
            }
            _ => Mode::Approx,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    init_jobs(cli.jobs)?;
    if let Some(mode) = cli.mode {
        let natural = cli.command.natural_mode();
        if mode != natural {
            bail!(
                "this command only runs in {} arithmetic; --mode {} is not available",
                natural.as_str(),
                mode.as_str()
            );
        }
    }
    let format = cli.format;
    let (payload, code) = match cli.command {
        Command::TableOdd { n_max, full_range, timing } => {
            cmd_table(TableKind::Odd, n_max, full_range, timing, format)?
        }
        Command::TableSelfdual { n_max, full_range, timing } => {
            cmd_table(TableKind::SelfDual, n_max, full_range, timing, format)?
        }
        Command::Gbit { epsilon } => cmd_gbit(&epsilon, format)?,
        Command::Quantum => cmd_quantum(),
        Command::Figure2 { n_max, full_range } => cmd_figure2(n_max, full_range, format)?,
        Command::ClassicalCheck { samples, seed } => cmd_classical_check(samples, seed, format),
        Command::Enumerate { input } => cmd_enumerate(&input)?,
    };
    emit(cli.out.as_deref(), &payload)?;
    Ok(code)
}

fn init_jobs(flag: Option<usize>) -> Result<()> {
    let jobs = match flag {
        Some(j) => Some(j),
        None => match std::env::var("GPT_SELFTEST_JOBS") {
            Ok(v) => {
                Some(v.parse::<usize>().with_context(|| {
                    format!("GPT_SELFTEST_JOBS must be a thread count, got {v:?}")
                })?)
            }
            Err(_) => None,
        },
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("failed to configure the worker pool")?;
    }
    Ok(())
}

fn emit(out: Option<&std::path::Path>, payload: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// polygon tables
// ---------------------------------------------------------------------------

fn table_range(kind: TableKind, n_max: usize, full_range: bool) -> Result<()> {
    let (start, cap) = match kind {
        TableKind::Odd => (5, if full_range { 29 } else { 13 }),
        TableKind::SelfDual => (4, if full_range { 30 } else { 12 }),
    };
    if n_max < start || n_max > cap {
        bail!(
            "--n-max must lie in {start}..={cap} for {} polygons{}",
            kind.as_str(),
            if full_range { "" } else { " (pass --full-range to go higher)" }
        );
    }
    Ok(())
}

fn cmd_table(
    kind: TableKind,
    n_max: usize,
    full_range: bool,
    timing: bool,
    format: Option<Format>,
) -> Result<(String, u8)> {
    table_range(kind, n_max, full_range)?;
    let rows = chsh::table_rows(kind, n_max)?;
    let ok = rows.iter().all(|r| r.abs_diff <= 1e-4);
    let payload = match format.unwrap_or(Format::Csv) {
        Format::Csv => table_csv(&rows, timing)?,
        Format::Json => table_json(&rows, timing),
    };
    Ok((payload, if ok { EXIT_OK } else { EXIT_MISMATCH }))
}

fn table_csv(rows: &[TableRow], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_fields(timing))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn table_json(rows: &[TableRow], timing: bool) -> String {
    let rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let f = r.csv_fields(timing);
            serde_json::json!({
                "n": r.n,
                "kind": f[1],
                "optimum": f[2],
                "formula_value": f[3],
                "abs_diff": f[4],
                "problems_solved": r.problems_solved,
                "wall_time": f[6],
            })
        })
        .collect();
    let mut s = serde_json::json!({ "schema": 1, "rows": rows }).to_string();
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// window models
// ---------------------------------------------------------------------------

fn cmd_gbit(epsilons: &[String], format: Option<Format>) -> Result<(String, u8)> {
    let mut code = EXIT_OK;
    let mut reports = Vec::new();
    for text in epsilons {
        let eps = Rat::parse_entry(text)
            .ok_or_else(|| anyhow!("--epsilon entries must be p/q rationals, got {text:?}"))?;
        let model = epsilon::build_epsilon_model(eps.clone())?;
        let sweep = epsilon::post_measurement_sweep(&model, true);
        let bound_ok = sweep.matches_closed_form
            && sweep.p_win_upper == epsilon::gbit_bound(&eps)?
            && sweep.p_win_lower == epsilon::gbit_bound_floor(&eps)?;
        if !bound_ok {
            code = EXIT_MISMATCH;
            eprintln!(
                "window {} disagrees with the closed form: swept [{}, {}], witnesses {} / {}",
                eps.render(),
                sweep.ch_min.render(),
                sweep.ch_max.render(),
                render_vec(&sweep.min_witness),
                render_vec(&sweep.max_witness),
            );
        }
        reports.push(epsilon::report(&model, &sweep));
    }
    let payload = match format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = String::new();
            for r in &reports {
                s.push_str(&r.to_string());
                s.push('\n');
            }
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let cols = [
                "epsilon",
                "vertex_count",
                "ray_count",
                "ch_min",
                "ch_max",
                "p_win_upper",
                "p_win_lower",
                "matches_closed_form",
                "pruned",
            ];
            w.write_record(cols)?;
            for r in &reports {
                w.write_record(cols.map(|c| json_field(&r[c])))?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    Ok((payload, code))
}

fn json_field(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(Scalar::render).collect();
    format!("({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// reference strategies
// ---------------------------------------------------------------------------

fn cmd_quantum() -> (String, u8) {
    let q = quantum_reference();
    let game = GameOutcomeTable::standard();
    let mut s = String::new();
    let _ = writeln!(s, "winning probability: {:.10}", q.p_win(&game));
    for b in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "announcement ({},{}): probability {:.10}, wins {:.10}",
            b.0,
            b.1,
            q.announcement_probability(b),
            q.p_win_given(&game, b)
        );
        let _ = writeln!(s, "P(a,c|r_A,r_C), rows (r_A,a), columns (r_C,c):");
        let table = q.conditional_table(b);
        let _ = writeln!(s, "        (0,0)         (0,1)         (1,0)         (1,1)");
        for (r, chunk) in table.chunks(4).enumerate() {
            let cells: Vec<String> = chunk.iter().map(|x| format!("{x:.10}")).collect();
            let _ = writeln!(s, "({},{})  {}", r / 2, r % 2, cells.join("  "));
        }
    }
    (s, EXIT_OK)
}

fn cmd_figure2(n_max: usize, full_range: bool, format: Option<Format>) -> Result<(String, u8)> {
    table_range(TableKind::SelfDual, n_max, full_range)?;
    let rows = chsh::table_rows(TableKind::SelfDual, n_max)?;
    let ok = rows.iter().all(|r| r.abs_diff <= 1e-4);
    let payload = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "lp_point", "curve_value"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    format!("{:.10}", r.optimum),
                    format!("{:.10}", r.formula_value),
                ])?;
            }
            w.write_record(["limit", "-", &format!("{TSIRELSON:.10}")])?;
            String::from_utf8(w.into_inner()?)?
        }
        Format::Json => {
            let points: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "n": r.n,
                        "lp_point": format!("{:.10}", r.optimum),
                        "curve_value": format!("{:.10}", r.formula_value),
                    })
                })
                .collect();
            let mut s = serde_json::json!({
                "schema": 1,
                "points": points,
                "limit": format!("{TSIRELSON:.10}"),
            })
            .to_string();
            s.push('\n');
            s
        }
    };
    Ok((payload, if ok { EXIT_OK } else { EXIT_MISMATCH }))
}

fn cmd_classical_check(samples: usize, seed: u64, format: Option<Format>) -> (String, u8) {
    let report = chsh::classical_bound_check(samples, seed);
    let ok = report.violations == 0
        && report.decomposition_mismatches == 0
        && report.max_winning_probability <= rat(3, 4);
    let payload = match format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = serde_json::json!({
                "schema": 1,
                "samples": report.samples,
                "violations": report.violations,
                "decomposition_mismatches": report.decomposition_mismatches,
                "max_winning_probability": report.max_winning_probability.render(),
            })
            .to_string();
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "samples,violations,decomposition_mismatches,max_winning_probability\n{},{},{},{}\n",
            report.samples,
            report.violations,
            report.decomposition_mismatches,
            report.max_winning_probability.render()
        ),
    };
    (payload, if ok { EXIT_OK } else { EXIT_MISMATCH })
}

// ---------------------------------------------------------------------------
// raw cone conversion
// ---------------------------------------------------------------------------

fn cmd_enumerate(input: &std::path::Path) -> Result<(String, u8)> {
    let text = if input == std::path::Path::new("-") {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        std::fs::read_to_string(input)
            .with_context(|| format!("cannot read {}", input.display()))?
    };
    let kind = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.chars().next())
        .ok_or_else(|| anyhow!("empty cone file"))?;
    let payload = match kind {
        'H' => dd::enumerate(&ConeH::<Rat>::from_text(&text)?).to_text(),
        'V' => {
            let v = ConeV::<Rat>::from_text(&text)?;
            dd::v_to_h(&v).to_text()
        }
        other => bail!("cone files start with an H or V header, got {other:?}"),
    };
    Ok((payload, EXIT_OK))
}
