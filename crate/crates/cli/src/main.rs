//! `pincer`: plan and validate spiral pincer sweep searches.
//!
//! Verbs: `speeds`, `schedule`, `table`, `simulate`, `frames`. Exit codes:
//! 0 success, 1 usage or i/o failure, 2 infeasible scenario, 3 simulation
//! escape detected.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pincer_cli::config::{parse_config, OutputFormat, RunSpec};
use pincer_cli::fmt::sig;
use pincer_cli::report;
use pincer_core::analytics::{critical_speed, derive_constants, resolve_speed, SpeedSpec};
use pincer_core::error::Error as CoreError;
use pincer_core::schedule::build_schedule;
use pincer_core::sim::{self, frames::SvgFrameWriter, SimConfig, Verdict};

#[derive(Parser)]
#[command(
    name = "pincer",
    about = "Spiral pincer sweep planning and worst-case validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict output files to one format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Run a single even team size (overrides config and sweep range).
    #[arg(long)]
    n: Option<u32>,
    /// Sweeper speed as a multiple of the exact critical speed.
    #[arg(long)]
    multiplier: Option<f64>,
    /// Simulation grid cells per side.
    #[arg(long)]
    grid_cells: Option<usize>,
    /// Simulation time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Run everything twice and fail unless outputs are byte-identical.
    #[arg(long)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the speed benchmarks for the scenario.
    Speeds(CommonArgs),
    /// Print and export the full sweep schedule for one team size.
    Schedule(CommonArgs),
    /// Emit the per-team-size result table (CSV/JSON).
    Table(CommonArgs),
    /// Run the worst-case simulation and report the verdict.
    Simulate(SimulateArgs),
    /// Export simulation frames with a manifest.
    Frames(CommonArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run the protocol even when the schedule reports an infeasible speed.
    #[arg(long)]
    force: bool,
}

enum CliError {
    Usage(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Io(_) => ExitCode::from(1),
            CliError::Infeasible(_) => ExitCode::from(2),
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::InfeasibleSpeed { .. } | CoreError::InfeasibleScenario { .. } => {
                CliError::Infeasible(e.to_string())
            }
            CoreError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn load_spec(args: &CommonArgs) -> Result<RunSpec, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut spec = parse_config(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(n) = args.n {
        if n < 2 || n % 2 != 0 {
            return Err(CliError::Usage(format!(
                "--n must be even and >= 2, got {n}"
            )));
        }
        spec.scenario.n = n;
        spec.sweep_over_n = None;
    }
    if let Some(m) = args.multiplier {
        if !(m > 0.0) {
            return Err(CliError::Usage(format!(
                "--multiplier must be positive, got {m}"
            )));
        }
        spec.scenario.speed = SpeedSpec::CriticalMultiple(m);
    }
    if args.grid_cells.is_some() || args.dt.is_some() {
        let mut sim = spec.sim.clone().unwrap_or_default();
        if args.grid_cells.is_some() {
            sim.grid_cells = args.grid_cells;
        }
        if args.dt.is_some() {
            sim.dt = args.dt;
        }
        spec.sim = Some(sim);
    }
    if let Some(out) = &args.out {
        spec.output_dir = out.clone();
    }
    if let Some(format) = &args.format {
        spec.formats = match format.as_str() {
            "csv" => vec![OutputFormat::Csv],
            "json" => vec![OutputFormat::Json],
            _ => unreachable!("clap validates the format"),
        };
    }
    spec.scenario
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_speeds(args: &CommonArgs) -> Result<ExitCode, CliError> {
    let spec = load_spec(args)?;
    let mut lines = Vec::new();
    for n in spec.team_sizes() {
        let params = spec.scenario_for(n);
        let b = critical_speed(&params)?;
        lines.push(format!(
            "n={n}: v_lb={} v_simplified={} v_critical={} residual={}",
            sig(b.v_lb),
            sig(b.v_simplified),
            sig(b.v_critical),
            sig(b.residual)
        ));
        if let Ok(vs) = resolve_speed(&params, &b) {
            if vs > params.vt {
                let c = derive_constants(&params, vs)?;
                lines.push(format!(
                    "      vs={} gamma={} phi={} lambda={}",
                    sig(vs),
                    sig(c.gamma),
                    sig(c.phi),
                    sig(c.lambda)
                ));
            }
        }
    }
    let text = lines.join("\n");
    println!("{text}");
    if let Some(out) = &args.out {
        write_file(&out.join("speeds.txt"), &(text + "\n"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_schedule(args: &CommonArgs) -> Result<ExitCode, CliError> {
    let spec = load_spec(args)?;
    let params = spec.scenario_for(spec.scenario.n);
    let schedule = build_schedule(&params)?;
    for w in &schedule.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "n={} vs={} v_critical={} cycles={} R_N={} eta={}",
        params.n,
        sig(schedule.vs),
        sig(schedule.benchmarks.v_critical),
        schedule.n_sweeps,
        sig(schedule.r_n),
        schedule.end_game.eta
    );
    println!(
        "T_tilde_spiral={} T_tilde_in={} T_last={} T_in_last={} T_total={}",
        sig(schedule.t_tilde_spiral),
        sig(schedule.t_tilde_in),
        sig(schedule.end_game.t_last),
        sig(schedule.end_game.t_in_last),
        sig(schedule.t_total)
    );
    for c in &schedule.cycles {
        println!(
            "  cycle {}: R_i={} T_spiral={} delta={} delta_eff={} T_in={}",
            c.index,
            sig(c.r_i),
            sig(c.t_spiral_i),
            sig(c.delta_i),
            sig(c.delta_eff_i),
            sig(c.t_in_i)
        );
    }
    if let Some(out) = &args.out {
        let json =
            serde_json::to_string_pretty(&schedule).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(&out.join("schedule.json"), &json)?;
        let mut csv =
            String::from("index,R_i,R_tilde_i,T_spiral_i,delta_i,delta_eff_i,T_in_i,gamma_i\n");
        for c in &schedule.cycles {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.index,
                sig(c.r_i),
                sig(c.r_tilde_i),
                sig(c.t_spiral_i),
                sig(c.delta_i),
                sig(c.delta_eff_i),
                sig(c.t_in_i),
                sig(c.gamma_i)
            ));
        }
        write_file(&out.join("cycles.csv"), &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn render_table(
    spec: &RunSpec,
) -> Result<(report::Table, Option<String>, Option<String>), CliError> {
    let mut table = report::run_table(spec)?;
    if spec.sim.is_some() {
        report::run_sim_validation(spec, &mut table)?;
    }
    let csv = spec
        .formats
        .contains(&OutputFormat::Csv)
        .then(|| report::to_csv(&table.rows));
    let json = spec
        .formats
        .contains(&OutputFormat::Json)
        .then(|| report::to_json(&table.rows));
    Ok((table, csv, json))
}

fn cmd_table(args: &CommonArgs) -> Result<ExitCode, CliError> {
    let spec = load_spec(args)?;
    let (table, csv, json) = render_table(&spec)?;
    if args.seedless {
        let (_, csv2, json2) = render_table(&spec)?;
        if csv != csv2 || json != json2 {
            return Err(CliError::Io(
                "determinism check failed: repeated runs produced different bytes".into(),
            ));
        }
    }
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(csv) = &csv {
        write_file(&spec.output_dir.join("table.csv"), csv)?;
        println!("wrote {}", spec.output_dir.join("table.csv").display());
    }
    if let Some(json) = &json {
        write_file(&spec.output_dir.join("table.json"), json)?;
        println!("wrote {}", spec.output_dir.join("table.json").display());
    }
    if table.any_infeasible {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, CliError> {
    let mut spec = load_spec(&args.common)?;
    let mut sim_config: SimConfig = spec.sim.clone().unwrap_or_default();
    if args.force {
        sim_config.force_run = true;
    }
    spec.sim = Some(sim_config.clone());
    let params = spec.scenario_for(spec.scenario.n);
    let outcome = sim::run(&params, &sim_config)?;
    if outcome.cells_per_sensor < 10.0 {
        eprintln!(
            "warning: only {:.1} cells per sensor half-length; verdicts are unreliable below about ten (raise --grid-cells)",
            outcome.cells_per_sensor
        );
    }
    println!(
        "verdict={} clear_time={} protocol_end={} peak_radius={} grid={}x{} dt={}",
        outcome.verdict,
        outcome
            .clear_time
            .map(sig)
            .unwrap_or_else(|| "-".to_string()),
        sig(outcome.protocol_end_time),
        sig(outcome.peak_radius),
        outcome.grid_cells,
        outcome.grid_cells,
        sig(outcome.dt)
    );
    if let Some(total) = outcome.analytic_total_time {
        if let Some(clear) = outcome.clear_time {
            println!(
                "analytic_total={} relative_deviation={}",
                sig(total),
                sig((clear - total).abs() / total)
            );
        }
    }
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&spec.output_dir.join("outcome.json"), &json)?;
    println!("wrote {}", spec.output_dir.join("outcome.json").display());
    if outcome.verdict == Verdict::Escaped {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_frames(args: &CommonArgs) -> Result<ExitCode, CliError> {
    let spec = load_spec(args)?;
    let params = spec.scenario_for(spec.scenario.n);
    let mut sim_config = spec.sim.clone().unwrap_or_default();
    if sim_config.frame_interval <= 0.0 {
        // Default cadence: about fifty frames over the analytic schedule.
        let schedule = build_schedule(&params)?;
        sim_config.frame_interval = schedule.t_total / 50.0;
    }
    let frames_dir = spec.output_dir.join("frames");
    let mut writer = SvgFrameWriter::new(&frames_dir, params.r0)?;
    let outcome = sim::run_with_sink(&params, &sim_config, &mut writer)?;
    if outcome.cells_per_sensor < 10.0 {
        eprintln!(
            "warning: only {:.1} cells per sensor half-length; verdicts are unreliable below about ten (raise --grid-cells)",
            outcome.cells_per_sensor
        );
    }
    let count = writer.finish()?;
    println!(
        "verdict={} frames={} manifest={}",
        outcome.verdict,
        count,
        frames_dir.join("manifest.csv").display()
    );
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&spec.output_dir.join("outcome.json"), &json)?;
    if outcome.verdict == Verdict::Escaped {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Die quietly when a pipe closes (e.g. `pincer schedule ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match &cli.command {
        Command::Speeds(args) => cmd_speeds(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Table(args) => cmd_table(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Frames(args) => cmd_frames(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
