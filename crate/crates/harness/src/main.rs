use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use driftevo::config::{apply_overrides, load_object};
use driftevo::output::{resolve_out, summary_path, write_json, CsvSink};
use driftevo::runner::{embedded_config, run_experiment};
use driftevo::sweep::{run_sweep, Axis};
use driftevo::verify::{run_verify, VerifyConfig};
use driftevo::{ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "driftevo", version, about = "Evolution under drifting targets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: $DRIFTEVO_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set n=12 --set drift=long-swap`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Common {
    fn merged(&self) -> Result<Map<String, Value>> {
        let mut map = load_object(self.config.as_deref())?;
        apply_overrides(&mut map, &self.sets)?;
        if let Some(s) = self.seed {
            map.insert("seed".into(), s.into());
        }
        if let Some(t) = self.threads {
            map.insert("threads".into(), t.into());
        }
        Ok(map)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and write a trajectory CSV plus a JSON summary.
    Run(Common),
    /// Check the strict-benefit property on random cases.
    Verify(Common),
    /// Run a template config across values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "delta-multiplier")]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Sweep { common, axis, values } => cmd_sweep(common, axis, values),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftevo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_run(c: &Common) -> Result<()> {
    let cfg = ExperimentConfig::from_value(Value::Object(c.merged()?))?;
    let out = resolve_out(c.out.as_deref(), cfg.out.as_deref(), "run.csv");
    let mut sink = CsvSink::create(&out, &embedded_config(&cfg))?;
    let summary = run_experiment(&cfg, &mut |rows| sink.write_rows(&rows))?;
    sink.finish()?;
    let spath = summary_path(&out);
    write_json(&spath, &summary)?;
    println!(
        "{} trials, success rate {:.4} ({}/{}), g = {}, horizon = {}",
        summary.trials.len(),
        summary.success_rate,
        summary.successes,
        summary.trials.len(),
        summary.parameters.generations,
        summary.horizon
    );
    println!("trajectories: {}", out.display());
    println!("summary: {}", spath.display());
    Ok(())
}

fn cmd_verify(c: &Common) -> Result<()> {
    let cfg: VerifyConfig =
        serde_json::from_value(Value::Object(c.merged()?)).map_err(|e| HarnessError::Config(e.to_string()))?;
    let out = resolve_out(c.out.as_deref(), cfg.out.as_deref(), "verify.json");
    let report = run_verify(&cfg)?;
    write_json(&out, &report)?;
    for cell in &report.cells {
        println!(
            "{:?} n={} eps={} checked={}/{} contradictory={} violations={} (below 1-eps: {}) min_margin={}",
            cell.family,
            cell.n,
            cell.epsilon,
            cell.checked,
            cell.cases,
            cell.contradictory,
            cell.violations,
            cell.violations_below_accuracy,
            cell.min_margin.map_or("n/a".into(), |m| format!("{m:e}"))
        );
    }
    println!("report: {}", out.display());
    if report.total_violations > 0 {
        return Err(HarnessError::Violation(format!("{} strict-benefit violations", report.total_violations)));
    }
    Ok(())
}

fn cmd_sweep(c: &Common, axis: &str, values: &[f64]) -> Result<()> {
    let axis: Axis = axis.parse()?;
    let cfg = ExperimentConfig::from_value(Value::Object(c.merged()?))?;
    let out = resolve_out(c.out.as_deref(), cfg.out.as_deref(), "sweep.csv");
    let cells = run_sweep(&cfg, axis, values)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(&out)?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    writeln!(w, "# config: {}", serde_json::to_string(&embedded_config(&cfg)).expect("json"))?;
    let mut csv = csv::Writer::from_writer(w);
    for cell in &cells {
        csv.serialize(cell)?;
        println!("{} = {}: success rate {:.4} ({}/{})", axis_name(axis), cell.axis_value, cell.success_rate, cell.successes, cell.trials);
    }
    csv.flush()?;
    write_json(&summary_path(&out), &cells)?;
    println!("table: {}", out.display());
    Ok(())
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::DeltaMultiplier => "delta multiplier",
        Axis::Delta => "delta",
        Axis::Epsilon => "epsilon",
        Axis::N => "n",
    }
}
