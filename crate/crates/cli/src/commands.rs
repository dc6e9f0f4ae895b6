use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use vbi_core::analysis::{compare_scenario, run_benchmark, ComparisonReport};
use vbi_core::io::{write_sweep_csv, write_time_series_csv};
use vbi_core::simulators::{simulate_coupled, simulate_decoupled, Scenario, SimulationOutput};
use vbi_core::theory::{parametric_sweep, summarize_sweep};
use vbi_core::validation::{run_all, CheckResult};

use crate::config::{Config, RunMode};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    TheorySweep,
    Simulate,
    Compare,
    Benchmark,
    Validate,
}

/// Written as `manifest.toml` next to every run's outputs. `config.toml` in the
/// same directory holds the effective configuration, so
/// `vbi <command> --config <dir>/config.toml` repeats the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Roughness seed, then traffic seed.
    pub seeds: Vec<u64>,
    pub version: String,
    pub jobs: usize,
    pub emit_traces: bool,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
}

pub struct Context {
    pub config: Config,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub emit_traces: bool,
    pub jobs: usize,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn runtime(e: vbi_core::VbiError) -> CliError {
    CliError::Runtime(e.to_string())
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<(), CliError> {
        self.write(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            for r in rows {
                c.serialize(r).map_err(std::io::Error::other)?;
            }
            c.flush()
        })
    }

    fn traces(&mut self, stem: &str, out: &SimulationOutput<f64>) -> Result<(), CliError> {
        self.write(&format!("{stem}_bridge.csv"), |w| write_time_series_csv(&out.bridge_result, w))?;
        self.write(&format!("{stem}_vehicle.csv"), |w| write_time_series_csv(&out.vehicle_result, w))?;
        let rows: Vec<ContactRow> = out
            .contact_trace
            .iter()
            .enumerate()
            .map(|(step, c)| ContactRow {
                step,
                wv: c.wv,
                wv_rate: c.wv_rate,
                tire_force: c.tire_force,
                total_reaction: c.total_reaction,
                iterations: out.iteration_counts.get(step).copied().unwrap_or(0),
            })
            .collect();
        self.csv(&format!("{stem}_contact.csv"), &rows)
    }

    fn finish(mut self, ctx: &Context, command: Command, start: Instant) -> Result<(), CliError> {
        let effective = ctx.config.to_toml();
        self.write("config.toml", |w| w.write_all(effective.as_bytes()))?;
        let manifest = RunManifest {
            command,
            config_path: ctx.config_path.clone(),
            output_dir: self.dir.clone(),
            seeds: ctx.config.seeds(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            jobs: ctx.jobs,
            emit_traces: ctx.emit_traces,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            files: self.files.clone(),
        };
        let text = toml::to_string(&manifest).expect("manifest is serializable");
        self.write("manifest.toml", |w| w.write_all(text.as_bytes()))
    }
}

#[derive(Serialize)]
struct ContactRow {
    step: usize,
    wv: f64,
    wv_rate: f64,
    tire_force: f64,
    total_reaction: f64,
    iterations: usize,
}

pub fn theory_sweep(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    ctx.config.check_theory()?;
    let rows = parametric_sweep(&ctx.config.theory).map_err(runtime)?;
    let summary = summarize_sweep(&rows);
    let mut out = Outputs::new(&ctx.out)?;
    out.write("sweep.csv", |w| write_sweep_csv(&rows, w))?;
    out.csv("sweep_summary.csv", &summary)?;
    let (stiff, flexible) = (summary.first(), summary.last());
    if let (Some(s), Some(f)) = (stiff, flexible) {
        println!(
            "{} cells, {} pairs: stiff end max error {:.2}%, flexible end max error {:.4}%",
            rows.len(),
            summary.len(),
            s.max_error_pct,
            f.max_error_pct
        );
    }
    out.finish(ctx, Command::TheorySweep, start)
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let c = &ctx.config;
    let cfg = c.scenario(c.bridge.span, c.bridge.node_spacing, &c.vehicle.preset, c.traffic.n_vehicles)?;
    let scenario = Scenario::prepare(cfg).map_err(runtime)?;
    let mut out = Outputs::new(&ctx.out)?;
    let mode = c.simulation.mode;
    if matches!(mode, RunMode::Coupled | RunMode::Both) {
        let r = simulate_coupled(&scenario).map_err(runtime)?;
        println!("coupled: {} steps in {:.3} s", scenario.steps(), r.wall_time);
        out.traces("coupled", &r)?;
    }
    if matches!(mode, RunMode::Decoupled | RunMode::Both) {
        let r = simulate_decoupled(&scenario).map_err(runtime)?;
        println!("decoupled: {} steps in {:.3} s", scenario.steps(), r.wall_time);
        out.traces("decoupled", &r)?;
    }
    out.finish(ctx, Command::Simulate, start)
}

fn fmt_span(span: f64) -> String {
    format!("{span}").replace('.', "p")
}

pub fn compare(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let c = &ctx.config;
    c.check_compare()?;
    let mut cells = Vec::new();
    for v in &c.compare.vehicles {
        for &n in &c.compare.n_vehicles {
            for &span in &c.compare.spans {
                cells.push((v.clone(), n, span));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    // `collect` keeps grid order whatever order the workers finish in.
    type Cell = (ComparisonReport<f64>, Option<(SimulationOutput<f64>, SimulationOutput<f64>)>);
    let results: Vec<Result<Cell, CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(v, n, span)| {
                let cfg = c.scenario(*span, c.bridge.node_spacing, v, *n)?;
                let sc = Scenario::prepare(cfg).map_err(runtime)?;
                let (report, cpl, dec) =
                    compare_scenario(&sc, v, c.simulation.frequency_cutoff).map_err(runtime)?;
                Ok((report, ctx.emit_traces.then_some((cpl, dec))))
            })
            .collect()
    });
    let mut out = Outputs::new(&ctx.out)?;
    let mut reports = Vec::with_capacity(results.len());
    for ((v, n, span), r) in cells.iter().zip(results) {
        let (report, traces) = r?;
        println!(
            "{v:<10} {span:>5} m n={n:<3} bridge MSE {:.3e}  vehicle MSE {:.3e}  median iterations {}",
            report.mse_time, report.vehicle_mse_time, report.median_iterations
        );
        if let Some((cpl, dec)) = traces {
            let stem = format!("traces/{v}_{}m_n{n}", fmt_span(*span));
            out.traces(&format!("{stem}_coupled"), &cpl)?;
            out.traces(&format!("{stem}_decoupled"), &dec)?;
        }
        reports.push(report);
    }
    out.csv("compare.csv", &reports)?;
    out.finish(ctx, Command::Compare, start)
}

pub fn benchmark(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    let c = &ctx.config;
    c.check_benchmark()?;
    let b = &c.benchmark;
    // Serial on purpose: concurrent runs would distort each other's wall times.
    let base = c.scenario(b.spans[0], b.node_spacing, &b.vehicle, b.n_vehicles)?;
    let outcome = run_benchmark(&base, &b.spans, b.repetitions, &b.strict_modes).map_err(runtime)?;
    for r in &outcome.records {
        println!(
            "{:>5} m  {:>6} DOFs  strict={:<5}  coupled {:.4} s  decoupled {:.5} s  speedup {:.0}x",
            r.span, r.dof_count, r.strict_mode, r.coupled_seconds, r.decoupled_seconds, r.speedup
        );
    }
    let mut out = Outputs::new(&ctx.out)?;
    out.csv("benchmark.csv", &outcome.records)?;
    out.finish(ctx, Command::Benchmark, start)?;
    if !outcome.deterministic {
        return Err(CliError::Runtime("repeated runs produced different responses".into()));
    }
    if let Some((span, strict, e)) = outcome.failures.first() {
        return Err(CliError::Runtime(format!(
            "{} coupled run(s) failed; first at {span} m (strict={strict}): {e}",
            outcome.failures.len()
        )));
    }
    Ok(())
}

pub fn validate(ctx: &Context) -> Result<(), CliError> {
    let start = Instant::now();
    ctx.config.check_validate()?;
    let checks = run_all(&ctx.config.validate.options()).map_err(runtime)?;
    print_checks(&checks);
    let mut out = Outputs::new(&ctx.out)?;
    out.csv("validation.csv", &checks)?;
    out.finish(ctx, Command::Validate, start)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn print_checks(checks: &[CheckResult]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    println!("{:<width$}  {:>12}  {:>12}  {:>9}  verdict", "check", "expected", "actual", "tolerance");
    for c in checks {
        println!(
            "{:<width$}  {:>12.6}  {:>12.6}  {:>9.1e}  {}",
            c.name,
            c.expected,
            c.actual,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
}
