use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use poro_hdg::verification::Field;
use poro_hdg_cli::config::{Config, ConfigError, Document, Mode};
use poro_hdg_cli::presets;
use poro_hdg_cli::run::{self, RunError};

/// HDG solver for 2D Biot poroelastic waves.
#[derive(Debug, Parser)]
#[command(name = "poro-hdg", version, arg_required_else_help = true)]
struct Cli {
    /// Configuration file.
    #[arg(long, value_name = "PATH", conflicts_with = "scenario", required_unless_present_any = ["scenario", "list_scenarios"])]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Polynomial degree k.
    #[arg(long, value_name = "K")]
    degree: Option<usize>,
    /// Time step in seconds.
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    /// Final time in seconds.
    #[arg(long, value_name = "S")]
    tfinal: Option<f64>,
    /// Number of study levels: n = 2, 4, ..., 2^L.
    #[arg(long, value_name = "L")]
    levels: Option<u32>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// simulate, convergence-study or oracle-check.
    #[arg(long, value_name = "M")]
    mode: Option<String>,
    /// Write the condensed trace matrix in Matrix Market format.
    #[arg(long)]
    emit_matrix: bool,
    /// Seed for random oracle data.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override any config key, e.g. `--set mesh.nx=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// List built-in scenarios and exit.
    #[arg(long)]
    list_scenarios: bool,
}

fn document(cli: &Cli) -> Result<Document, ConfigError> {
    let mut doc = match (&cli.config, &cli.scenario) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
            Document::parse(&text)?
        }
        (None, Some(name)) => presets::document(name)?,
        (None, None) => unreachable!("enforced by the argument parser"),
    };
    let mut set = |k: &str, v: String| doc.set(k, &v);
    if let Some(k) = cli.degree {
        set("run.degree", k.to_string())?;
    }
    if let Some(dt) = cli.dt {
        set("time.dt", format!("{dt:?}"))?;
    }
    if let Some(t) = cli.tfinal {
        set("time.t_final", format!("{t:?}"))?;
    }
    if let Some(l) = cli.levels {
        if l == 0 || l > 12 {
            return Err(ConfigError::Invalid { path: "--levels".into(), msg: "expected 1..=12".into() });
        }
        let levels: Vec<String> = (1..=l).map(|i| (1usize << i).to_string()).collect();
        set("study.levels", levels.join(", "))?;
    }
    if let Some(out) = &cli.out {
        set("output.directory", out.display().to_string())?;
    }
    if let Some(m) = &cli.mode {
        set("run.mode", m.clone())?;
    }
    if let Some(s) = cli.seed {
        set("run.seed", s.to_string())?;
    }
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid { path: item.clone(), msg: "expected KEY=VALUE".into() })?;
        doc.set(k, v)?;
    }
    Ok(doc)
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let cfg = Config::from_document(&document(cli)?)?;
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let out = Path::new(&cfg.output.directory);
    match cfg.mode {
        Mode::Simulate => {
            let s = run::simulate(&cfg, out, cli.emit_matrix)?;
            println!(
                "{} elements, {} trace unknowns, {} steps of dt = {:e}",
                s.elements, s.trace_unknowns, s.steps, s.dt
            );
            if let (Some(first), Some(last)) = (s.diagnostics.first(), s.diagnostics.last()) {
                println!("energy X^2: {:e} -> {:e}, dissipated 2Y^2 = {:e}", first.x2, last.x2, 2.0 * last.y2);
            }
            if let Some(e) = s.errors {
                println!("final L2 errors: sigma {:.3e}, v_s {:.3e}, v_f {:.3e}, p {:.3e}", e[0], e[1], e[2], e[3]);
            }
            println!("{} snapshots written to {}", s.snapshots.len(), out.display());
            if !s.all_finite {
                return Err(RunError::Check("non-finite values in the solution".into()));
            }
        }
        Mode::ConvergenceStudy => {
            if cli.emit_matrix {
                eprintln!("--emit-matrix is ignored in convergence-study mode");
            }
            let report = run::convergence(&cfg, out)?;
            print!("{}", report.to_table());
            let slopes: Vec<String> = Field::ALL
                .iter()
                .map(|&f| match report.asymptotic_slope(f) {
                    Ok(s) => format!("{} {s:.2}", f.name()),
                    Err(_) => format!("{} -", f.name()),
                })
                .collect();
            println!("fitted slopes: {}", slopes.join(", "));
        }
        Mode::OracleCheck => {
            if cli.emit_matrix {
                let grid = run::time_grid(&cfg)?;
                let solver = run::build_solver(&cfg, run::build_mesh(&cfg)?, grid.dt)?;
                std::fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.display().to_string(), source })?;
                run::write_matrix(&solver, &out.join("trace_matrix.mtx"))?;
            }
            let d = run::oracle(&cfg, 5)?;
            println!("max relative difference {d:.3e}");
            if !(d <= 1e-9) {
                return Err(RunError::Check(format!("condensed and monolithic steps differ by {d:e}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.list_scenarios {
        for name in presets::names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
