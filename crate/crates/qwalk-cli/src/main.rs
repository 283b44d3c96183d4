//! Command-line surface for the walk/SSH simulator: evolution dumps, band
//! tables, winding numbers, spreading coefficients, parameter sweeps, and
//! kink detection, as CSV or JSON tables.

use qwalk_cli::{config, table};

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use qwalk::bands;
use qwalk::ssh;
use qwalk::sweep::{self, CoinSweepConfig, DeltaSweepConfig, SshSweepConfig, DEFAULT_KINK_FACTOR};
use qwalk::{distribution, evolve, moments, CoinState, LatticeState, StepParams};

use config::{
    parse_angle, parse_spinor, resolve_grid, spinor_string, validate_delta, ConfigDoc,
};
use table::{write_table, Format, Table};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Chiral quantum walk and SSH chain simulator",
    subcommand_required = false
)]
struct Cli {
    /// JSON configuration file; explicit flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Echo the fully resolved configuration as JSON and exit
    #[arg(long, global = true)]
    print_config: bool,

    /// Output path (stdout when omitted); QWALK_OUTPUT_DIR prefixes relative paths
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<String>,

    /// Output format: csv or json
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,

    /// Seed for sampled (finite-shot) columns
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve an n-step walk from site 0 and dump the final state
    Evolve {
        /// Plate retardation in radians (accepts pi fractions like pi/2)
        #[arg(long)]
        delta: Option<String>,
        /// Number of steps
        #[arg(long)]
        n: Option<u32>,
        /// Initial coin spinor 'alpha,beta' (complex literals, normalized)
        #[arg(long)]
        coin: Option<String>,
        /// Plate charge q (half-integer)
        #[arg(long)]
        q: Option<f64>,
    },
    /// Tabulate quasi-energies, group velocity, and Bloch vector over the zone
    Bands {
        #[arg(long)]
        delta: Option<String>,
        /// Number of k points
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Winding number of the Bloch eigenvectors around the chiral axis
    Winding {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Spreading coefficient by quadrature, closed form, and residue sum
    Spreading {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Retardation sweep: finite-n moments against the asymptotics
    SweepDelta {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        coin: Option<String>,
        /// Samples per row (0 = exact columns only)
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        delta_start: Option<String>,
        #[arg(long)]
        delta_stop: Option<String>,
        #[arg(long)]
        delta_count: Option<usize>,
        #[arg(long)]
        delta_step: Option<String>,
    },
    /// Meridian coin sweep at fixed retardation
    SweepCoin {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        theta_start: Option<String>,
        #[arg(long)]
        theta_stop: Option<String>,
        #[arg(long)]
        theta_count: Option<usize>,
        #[arg(long)]
        theta_step: Option<String>,
    },
    /// Inter-cell hopping sweep of the SSH chain
    SweepSsh {
        /// Intra-cell hopping t
        #[arg(long)]
        t: Option<f64>,
        /// Evolution time
        #[arg(long)]
        tau: Option<f64>,
        /// Initial sublattice spinor 'a,b'
        #[arg(long)]
        chi: Option<String>,
        /// Lattice size override (cells)
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        tp_start: Option<f64>,
        #[arg(long)]
        tp_stop: Option<f64>,
        #[arg(long)]
        tp_count: Option<usize>,
        #[arg(long)]
        tp_step: Option<f64>,
    },
    /// SSH band structure table
    SshBands {
        #[arg(long)]
        t: Option<f64>,
        /// Inter-cell hopping t'
        #[arg(long)]
        tp: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Locate slope discontinuities in a sweep table column
    DetectKink {
        /// CSV file produced by a sweep command
        #[arg(long)]
        input: Option<String>,
        /// Column to scan for kinks
        #[arg(long)]
        column: Option<String>,
        /// Parameter column (default: the first column)
        #[arg(long)]
        param_column: Option<String>,
        /// Peak threshold as a multiple of the median |second difference|
        #[arg(long)]
        threshold_factor: Option<f64>,
    },
}

#[derive(Debug)]
enum AppError {
    Validation(String),
    Runtime(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::Runtime(m) => m,
        }
    }
}

impl From<qwalk::Error> for AppError {
    fn from(e: qwalk::Error) -> Self {
        match e {
            qwalk::Error::Numerical(_) | qwalk::Error::ResidueMismatch { .. } => {
                AppError::Runtime(e.to_string())
            }
            _ => AppError::Validation(e.to_string()),
        }
    }
}

fn validation(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

type AppResult<T> = Result<T, AppError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> AppResult<()> {
    let Cli {
        config,
        print_config,
        output: flag_output,
        format: flag_format,
        seed: flag_seed,
        command,
    } = cli;
    let Some(command) = command else {
        let mut help = Cli::command();
        let _ = help.print_help();
        return Err(validation("a subcommand is required"));
    };

    let command_name = command_name(&command);
    let flags = flags_to_doc(&command, flag_output, flag_format, flag_seed)?;
    let file = match &config {
        Some(path) => ConfigDoc::from_path(path).map_err(AppError::Validation)?,
        None => ConfigDoc::default(),
    };
    if let Some(file_cmd) = &file.command {
        if file_cmd != command_name {
            return Err(validation(format!(
                "config file is for command '{file_cmd}', but '{command_name}' was invoked"
            )));
        }
    }
    let merged = file.merged_under(flags);

    let format = match &merged.format {
        Some(f) => Format::parse(f).map_err(AppError::Validation)?,
        None => Format::Csv,
    };
    let output = merged.output.clone().map(resolve_output_path);

    match command {
        Cmd::Evolve { .. } => run_evolve(merged, print_config, output, format),
        Cmd::Bands { .. } => run_bands(merged, print_config, output, format),
        Cmd::Winding { .. } => run_winding(merged, print_config, output, format),
        Cmd::Spreading { .. } => run_spreading(merged, print_config, output, format),
        Cmd::SweepDelta { .. } => run_sweep_delta(merged, print_config, output, format),
        Cmd::SweepCoin { .. } => run_sweep_coin(merged, print_config, output, format),
        Cmd::SweepSsh { .. } => run_sweep_ssh(merged, print_config, output, format),
        Cmd::SshBands { .. } => run_ssh_bands(merged, print_config, output, format),
        Cmd::DetectKink { .. } => run_detect_kink(merged, print_config, output, format),
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Evolve { .. } => "evolve",
        Cmd::Bands { .. } => "bands",
        Cmd::Winding { .. } => "winding",
        Cmd::Spreading { .. } => "spreading",
        Cmd::SweepDelta { .. } => "sweep-delta",
        Cmd::SweepCoin { .. } => "sweep-coin",
        Cmd::SweepSsh { .. } => "sweep-ssh",
        Cmd::SshBands { .. } => "ssh-bands",
        Cmd::DetectKink { .. } => "detect-kink",
    }
}

fn angle_opt(text: &Option<String>, flag: &str) -> AppResult<Option<f64>> {
    match text {
        Some(s) => parse_angle(s)
            .map(Some)
            .map_err(|e| validation(format!("--{flag}: {e}"))),
        None => Ok(None),
    }
}

/// Lower the typed CLI flags into the flat config document.
fn flags_to_doc(
    cmd: &Cmd,
    output: Option<String>,
    format: Option<String>,
    seed: Option<u64>,
) -> AppResult<ConfigDoc> {
    let mut doc = ConfigDoc {
        command: Some(command_name(cmd).to_string()),
        output,
        format,
        seed,
        ..ConfigDoc::default()
    };
    match cmd {
        Cmd::Evolve { delta, n, coin, q } => {
            doc.delta = angle_opt(delta, "delta")?;
            doc.n = *n;
            doc.coin = coin.clone();
            doc.q = *q;
        }
        Cmd::Bands { delta, grid } | Cmd::Winding { delta, grid } | Cmd::Spreading { delta, grid } => {
            doc.delta = angle_opt(delta, "delta")?;
            doc.grid = *grid;
        }
        Cmd::SweepDelta {
            n,
            coin,
            shots,
            delta_start,
            delta_stop,
            delta_count,
            delta_step,
        } => {
            doc.n = *n;
            doc.coin = coin.clone();
            doc.shots = *shots;
            doc.delta_start = angle_opt(delta_start, "delta-start")?;
            doc.delta_stop = angle_opt(delta_stop, "delta-stop")?;
            doc.delta_count = *delta_count;
            doc.delta_step = angle_opt(delta_step, "delta-step")?;
        }
        Cmd::SweepCoin {
            delta,
            n,
            shots,
            theta_start,
            theta_stop,
            theta_count,
            theta_step,
        } => {
            doc.delta = angle_opt(delta, "delta")?;
            doc.n = *n;
            doc.shots = *shots;
            doc.theta_start = angle_opt(theta_start, "theta-start")?;
            doc.theta_stop = angle_opt(theta_stop, "theta-stop")?;
            doc.theta_count = *theta_count;
            doc.theta_step = angle_opt(theta_step, "theta-step")?;
        }
        Cmd::SweepSsh {
            t,
            tau,
            chi,
            cells,
            tp_start,
            tp_stop,
            tp_count,
            tp_step,
        } => {
            doc.t = *t;
            doc.tau = *tau;
            doc.chi = chi.clone();
            doc.cells = *cells;
            doc.tp_start = *tp_start;
            doc.tp_stop = *tp_stop;
            doc.tp_count = *tp_count;
            doc.tp_step = *tp_step;
        }
        Cmd::SshBands { t, tp, grid } => {
            doc.t = *t;
            doc.tp = *tp;
            doc.grid = *grid;
        }
        Cmd::DetectKink {
            input,
            column,
            param_column,
            threshold_factor,
        } => {
            doc.input = input.clone();
            doc.column = column.clone();
            doc.param_column = param_column.clone();
            doc.threshold_factor = *threshold_factor;
        }
    }
    Ok(doc)
}

/// Relative output paths land in QWALK_OUTPUT_DIR when it is set.
fn resolve_output_path(path: String) -> PathBuf {
    let p = PathBuf::from(&path);
    if p.is_relative() {
        if let Ok(dir) = std::env::var("QWALK_OUTPUT_DIR") {
            if !dir.is_empty() {
                return Path::new(&dir).join(p);
            }
        }
    }
    p
}

fn require_delta(doc: &ConfigDoc, cmd: &str) -> AppResult<f64> {
    let delta = doc
        .delta
        .ok_or_else(|| validation(format!("--delta is required for {cmd}")))?;
    validate_delta(delta).map_err(AppError::Validation)
}

fn coin_from(doc: &ConfigDoc, field: &Option<String>) -> AppResult<CoinState> {
    let _ = doc;
    match field {
        Some(text) => parse_spinor(text).map_err(AppError::Validation),
        None => Ok(CoinState::left()),
    }
}

fn emit(
    doc: &ConfigDoc,
    print_config: bool,
    mut table: Table,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    if print_config {
        print!("{}", doc.to_pretty_json());
        return Ok(());
    }
    // leading metadata: version, command, seed, resolved config; the
    // destination path is not part of the recorded config, so identical
    // runs give identical bytes wherever they land
    let recorded = ConfigDoc {
        output: None,
        ..doc.clone()
    };
    let mut meta = vec![
        ("qwalk".to_string(), VERSION.to_string()),
        (
            "command".to_string(),
            doc.command.clone().unwrap_or_default(),
        ),
        (
            "seed".to_string(),
            doc.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
        ),
        (
            "config".to_string(),
            serde_json::to_string(&recorded).expect("plain config json"),
        ),
    ];
    meta.extend(table.meta);
    table.meta = meta;
    write_table(&table, output.as_deref(), format)
        .map_err(|e| AppError::Runtime(format!("writing output: {e}")))
}

fn run_evolve(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let delta = require_delta(&doc, "evolve")?;
    let steps = doc.n.unwrap_or(6);
    let coin = coin_from(&doc, &doc.coin.clone())?;
    let q = doc.q.unwrap_or(0.5);
    let params = StepParams::new(delta, q)?;

    doc.delta = Some(delta);
    doc.n = Some(steps);
    doc.coin = Some(spinor_string(&coin));
    doc.q = Some(q);
    doc.format = Some(format.name().to_string());

    let state = evolve(&LatticeState::localized(0, &coin), &params, steps)
        .pop()
        .expect("non-empty evolution");
    let dist = distribution(&state);

    let mut table = Table::new(
        ["m", "probability", "amp_l_re", "amp_l_im", "amp_r_re", "amp_r_im"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    if steps > 0 {
        let report = moments(&dist, steps)?;
        table = table
            .with_meta("m1_over_n", table::fmt_f64(report.m1_over_n))
            .with_meta("m2_over_n2", table::fmt_f64(report.m2_over_n2));
    }
    for (i, &[l, r]) in state.amplitudes().iter().enumerate() {
        let m = state.min_site() + i as i64;
        table.push_row(vec![m as f64, dist.probability(m), l.re, l.im, r.re, r.im]);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_bands(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let delta = require_delta(&doc, "bands")?;
    let grid = doc.grid.unwrap_or(512);
    if grid < 2 {
        return Err(validation("--grid must be at least 2"));
    }
    doc.delta = Some(delta);
    doc.grid = Some(grid);
    doc.format = Some(format.name().to_string());

    let mut table = Table::new(
        ["k", "e_upper", "e_lower", "v", "n_x", "n_y", "n_z", "n_factor", "gap"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for j in 0..grid {
        let k = -PI + 2.0 * PI * j as f64 / grid as f64;
        let (e_up, e_dn) = bands::quasi_energy(delta, k);
        let gap = bands::band_gap(delta, k);
        let row = match bands::band_point(delta, k) {
            Ok(p) => vec![k, e_up, e_dn, p.v, p.n[0], p.n[1], p.n[2], p.n_factor, gap],
            Err(_) => vec![
                k,
                e_up,
                e_dn,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                bands::normalization(delta, k),
                gap,
            ],
        };
        table.push_row(row);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_winding(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let delta = require_delta(&doc, "winding")?;
    let grid = doc.grid.unwrap_or(1024);
    doc.delta = Some(delta);
    doc.grid = Some(grid);
    doc.format = Some(format.name().to_string());
    if print_config {
        print!("{}", doc.to_pretty_json());
        return Ok(());
    }

    let result = bands::winding_number(delta, grid)?;
    println!("winding = {}", result.winding);
    println!("turns = {}", table::fmt_f64(result.turns));
    println!(
        "chiral_axis = ({}, {}, {})",
        table::fmt_f64(result.chiral_axis[0]),
        table::fmt_f64(result.chiral_axis[1]),
        table::fmt_f64(result.chiral_axis[2])
    );
    if output.is_some() {
        let mut table = Table::new(vec!["k".into(), "planar_angle".into()])
            .with_meta("winding", result.winding)
            .with_meta("turns", table::fmt_f64(result.turns));
        for (j, angle) in result.arc.iter().enumerate() {
            let k = -PI + 2.0 * PI * j as f64 / result.arc.len() as f64;
            table.push_row(vec![k, *angle]);
        }
        emit(&doc, false, table, output, format)?;
    }
    Ok(())
}

fn run_spreading(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let delta = require_delta(&doc, "spreading")?;
    let grid = doc.grid.unwrap_or(4096);
    doc.delta = Some(delta);
    doc.grid = Some(grid);
    doc.format = Some(format.name().to_string());
    if print_config {
        print!("{}", doc.to_pretty_json());
        return Ok(());
    }

    let quad = bands::spreading_coefficient_numeric(delta, grid)?.value;
    let closed = bands::spreading_coefficient_closed(delta).value;
    let residue = bands::residue_oracle(delta);
    println!("L_quadrature = {}", table::fmt_f64(quad));
    println!("L_closed     = {}", table::fmt_f64(closed));
    match &residue {
        Ok(report) => println!("L_residue    = {}", table::fmt_f64(report.total)),
        Err(e) => println!("L_residue    = undefined ({e})"),
    }
    if output.is_some() {
        let mut table = Table::new(vec![
            "delta".into(),
            "l_quadrature".into(),
            "l_closed".into(),
            "l_residue".into(),
        ]);
        table.push_row(vec![
            delta,
            quad,
            closed,
            residue.map(|r| r.total).unwrap_or(f64::NAN),
        ]);
        emit(&doc, false, table, output, format)?;
    }
    Ok(())
}

fn moment_columns(sampled: bool) -> Vec<String> {
    let mut cols: Vec<String> = [
        "M1_over_n",
        "M2_over_n2",
        "sqrtM2_over_n",
        "M1_asym",
        "L_closed",
        "sqrtL_closed",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if sampled {
        cols.extend(
            [
                "sampled_M1_over_n",
                "sampled_M1_err",
                "sampled_M2_over_n2",
                "sampled_M2_err",
                "sampled_sqrtM2_over_n",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
    }
    cols
}

fn moment_cells(row: &sweep::SweepRow, sampled: bool) -> Vec<f64> {
    let mut cells = vec![
        row.m1_over_n,
        row.m2_over_n2,
        row.sqrt_m2_over_n,
        row.asym_m1,
        row.asym_m2,
        row.asym_m2.max(0.0).sqrt(),
    ];
    if sampled {
        match row.sampled {
            Some(s) => cells.extend([
                s.m1_over_n,
                s.m1_err,
                s.m2_over_n2,
                s.m2_err,
                s.sqrt_m2_over_n,
            ]),
            None => cells.extend([f64::NAN; 5]),
        }
    }
    cells
}

fn run_sweep_delta(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let start = doc.delta_start.unwrap_or(PI / 8.0);
    let stop = doc.delta_stop.unwrap_or(PI);
    let grid = resolve_grid("delta", start, stop, doc.delta_count, doc.delta_step, 15)
        .map_err(AppError::Validation)?;
    let steps = doc.n.unwrap_or(6);
    let coin = coin_from(&doc, &doc.coin.clone())?;
    let shots = doc.shots.unwrap_or(0);
    let seed = doc.seed.unwrap_or(1);

    doc.delta_start = Some(start);
    doc.delta_stop = Some(stop);
    doc.delta_count = Some(grid.count);
    doc.delta_step = None;
    doc.n = Some(steps);
    doc.coin = Some(spinor_string(&coin));
    doc.shots = Some(shots);
    doc.seed = Some(seed);
    doc.format = Some(format.name().to_string());

    let config = DeltaSweepConfig {
        grid,
        steps,
        coin,
        shots,
        seed,
    };
    let rows = sweep::run_delta_sweep(&config)?;

    let sampled = shots > 0;
    let mut columns = vec!["delta".to_string()];
    columns.extend(moment_columns(sampled));
    let mut table = Table::new(columns);
    for row in &rows {
        let mut cells = vec![row.parameter];
        cells.extend(moment_cells(row, sampled));
        table.push_row(cells);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_sweep_coin(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let delta = require_delta(&doc, "sweep-coin")?;
    let start = doc.theta_start.unwrap_or(0.0);
    let stop = doc.theta_stop.unwrap_or(PI);
    let grid = resolve_grid("theta", start, stop, doc.theta_count, doc.theta_step, 23)
        .map_err(AppError::Validation)?;
    let steps = doc.n.unwrap_or(6);
    let shots = doc.shots.unwrap_or(0);
    let seed = doc.seed.unwrap_or(1);

    doc.delta = Some(delta);
    doc.theta_start = Some(start);
    doc.theta_stop = Some(stop);
    doc.theta_count = Some(grid.count);
    doc.theta_step = None;
    doc.n = Some(steps);
    doc.shots = Some(shots);
    doc.seed = Some(seed);
    doc.format = Some(format.name().to_string());

    let config = CoinSweepConfig {
        delta,
        theta_grid: grid,
        steps,
        shots,
        seed,
    };
    let rows = sweep::run_coin_sweep(&config)?;

    let sampled = shots > 0;
    let mut columns = vec!["theta".to_string()];
    columns.extend(moment_columns(sampled));
    let mut table = Table::new(columns);
    for row in &rows {
        let mut cells = vec![row.parameter];
        cells.extend(moment_cells(row, sampled));
        table.push_row(cells);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_sweep_ssh(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let t = doc.t.unwrap_or(1.0);
    let start = doc.tp_start.unwrap_or(0.0);
    let stop = doc.tp_stop.unwrap_or(2.0);
    let grid = resolve_grid("tp", start, stop, doc.tp_count, doc.tp_step, 26)
        .map_err(AppError::Validation)?;
    let tau = doc.tau.unwrap_or(50.0);
    let chi0 = coin_from(&doc, &doc.chi.clone())?;

    doc.t = Some(t);
    doc.tp_start = Some(start);
    doc.tp_stop = Some(stop);
    doc.tp_count = Some(grid.count);
    doc.tp_step = None;
    doc.tau = Some(tau);
    doc.chi = Some(spinor_string(&chi0));
    doc.format = Some(format.name().to_string());

    let config = SshSweepConfig {
        t,
        t_prime_grid: grid,
        tau,
        chi0,
        cells: doc.cells,
    };
    let rows = sweep::run_ssh_sweep(&config)?;

    let mut table = Table::new(
        ["t_prime", "M2_over_tau2", "M2_over_tau2T2", "L_closed", "L_residue"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for row in &rows {
        table.push_row(vec![
            row.parameter,
            row.m2_over_tau2,
            row.m2_over_tau2_t2,
            row.l_closed,
            row.l_residue.unwrap_or(f64::NAN),
        ]);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_ssh_bands(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let t = doc.t.unwrap_or(1.0);
    let tp = doc
        .tp
        .ok_or_else(|| validation("--tp is required for ssh-bands"))?;
    let grid = doc.grid.unwrap_or(512);
    if grid < 2 {
        return Err(validation("--grid must be at least 2"));
    }
    let params = ssh::SshParams::new(t, tp)?;

    doc.t = Some(t);
    doc.tp = Some(tp);
    doc.grid = Some(grid);
    doc.format = Some(format.name().to_string());

    let mut table = Table::new(
        ["k", "energy", "velocity", "n_x", "n_y"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for j in 0..grid {
        let k = -PI + 2.0 * PI * j as f64 / grid as f64;
        let e = ssh::band_energy(&params, k);
        let row = match ssh::band_point(&params, k) {
            Ok(p) => vec![k, p.e, p.v, p.n[0], p.n[1]],
            Err(_) => vec![k, e, f64::NAN, f64::NAN, f64::NAN],
        };
        table.push_row(row);
    }
    emit(&doc, print_config, table, output, format)
}

fn run_detect_kink(
    mut doc: ConfigDoc,
    print_config: bool,
    output: Option<PathBuf>,
    format: Format,
) -> AppResult<()> {
    let input = doc
        .input
        .clone()
        .ok_or_else(|| validation("--input is required for detect-kink"))?;
    let column = doc
        .column
        .clone()
        .ok_or_else(|| validation("--column is required for detect-kink"))?;
    let factor = doc.threshold_factor.unwrap_or(DEFAULT_KINK_FACTOR);
    if !(factor.is_finite() && factor > 0.0) {
        return Err(validation("--threshold-factor must be positive"));
    }

    doc.input = Some(input.clone());
    doc.column = Some(column.clone());
    doc.threshold_factor = Some(factor);
    doc.format = Some(format.name().to_string());
    if print_config {
        print!("{}", doc.to_pretty_json());
        return Ok(());
    }

    let parsed = Table::read_csv_path(Path::new(&input)).map_err(AppError::Validation)?;
    let value_idx = parsed
        .column_index(&column)
        .ok_or_else(|| validation(format!("no column '{column}' in {input}")))?;
    let param_idx = match &doc.param_column {
        Some(name) => parsed
            .column_index(name)
            .ok_or_else(|| validation(format!("no column '{name}' in {input}")))?,
        None => 0,
    };
    let params = parsed.column(param_idx);
    let values = parsed.column(value_idx);
    let kinks = sweep::detect_transitions(&params, &values, factor)?;

    if kinks.is_empty() {
        println!("no kinks above threshold");
    }
    for kink in &kinks {
        println!(
            "kink at {} = {} (strength {})",
            parsed.columns[param_idx],
            table::fmt_f64(kink.parameter),
            table::fmt_f64(kink.strength)
        );
    }
    if output.is_some() {
        let mut table = Table::new(vec!["parameter".into(), "strength".into()]);
        for kink in &kinks {
            table.push_row(vec![kink.parameter, kink.strength]);
        }
        emit(&doc, false, table, output, format)?;
    }
    Ok(())
}
