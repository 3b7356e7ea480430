//! Command-line entry point.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use crate::analytic::extract_rabi_from_duration_sweep;
use crate::config::{parse_config, Experiment, RunConfig};
use crate::error::{Error, Result};
use crate::output::{render, write_results, ResultTable};
use crate::sweep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "edsr", version, about = "Chirped EDSR lineshape simulator")]
struct Args {
    /// Run configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for sweep points (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output file; overrides `output_path`. Without either, results go to
    /// standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(path) = &args.output {
        cfg.output_path = Some(path.clone());
    }
    if args.verbose {
        eprintln!("{}", cfg.to_text());
    }

    match run_with_threads(&cfg, args.threads, args.verbose) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(cfg: &RunConfig, threads: Option<usize>, verbose: bool) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    if verbose {
        eprintln!("using {} worker thread(s)", pool.current_num_threads());
    }
    pool.install(|| run_config(cfg, verbose))
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(cfg: &RunConfig, threads: Option<usize>, verbose: bool) -> Result<()> {
    if verbose && threads.is_some() {
        eprintln!("built without the `parallel` feature; --threads ignored");
    }
    run_config(cfg, verbose)
}

/// Executes the configured experiment and writes its table.
pub fn run_config(cfg: &RunConfig, verbose: bool) -> Result<()> {
    let started = Instant::now();
    eprintln!("running {}", cfg.experiment.name());
    let table = execute(cfg, verbose)?;
    eprintln!(
        "{}: {} rows in {:.1} s",
        cfg.experiment.name(),
        table.rows.len(),
        started.elapsed().as_secs_f64()
    );
    let echo = cfg.to_text();
    match &cfg.output_path {
        Some(path) => write_results(&table, &echo, path, cfg.output_format),
        None => std::io::stdout()
            .write_all(render(&table, &echo, cfg.output_format).as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Runs the experiment selected by `cfg`.
pub fn execute(cfg: &RunConfig, verbose: bool) -> Result<ResultTable> {
    Ok(match cfg.experiment {
        Experiment::Lineshape => {
            let sc = cfg.sweep_config()?;
            if verbose {
                eprintln!("{} field points", sc.fields().len());
            }
            ResultTable::from(&sweep::field_sweep_lineshape(&sc)?[..])
        }
        Experiment::FixedFreq => {
            let sc = cfg.sweep_config()?;
            ResultTable::from(&sweep::fixed_frequency_sweep(&sc, cfg.measurement_time)?[..])
        }
        Experiment::Duration => {
            let sc = cfg.sweep_config()?;
            let b = cfg.single_field(cfg.duration.field)?;
            let samples = sweep::duration_sweep(&sc, b, &cfg.duration.durations)?;
            let points: Vec<_> = samples
                .iter()
                .map(|s| s.fit_point(cfg.measurement.is_some()))
                .collect();
            let fm = sc.program.schedule.fm_depth;
            match extract_rabi_from_duration_sweep(&points, fm, cfg.duration.saturation) {
                Ok(fit) => eprintln!(
                    "fitted rabi = {:.4e} Hz (tau0 = {:.4e} s, p_max = {:.4})",
                    fit.rabi, fit.tau0, fit.p_max
                ),
                Err(e) => eprintln!("rabi fit unavailable: {e}"),
            }
            ResultTable::from(&samples[..])
        }
        Experiment::Parity => {
            let sc = cfg.sweep_config()?;
            let b = cfg.single_field(cfg.parity.field)?;
            let fm = cfg.parity.fm_depth.unwrap_or(sc.program.schedule.fm_depth);
            ResultTable::from(&sweep::parity_scan(&sc, b, &cfg.parity.window_centers, fm)?[..])
        }
        Experiment::LzTable => ResultTable::from(
            &sweep::landau_zener_table(
                cfg.lz.rabi,
                &cfg.lz.ratios,
                cfg.lz.window_factor,
                &cfg.electron,
                &cfg.propagation(),
                cfg.integrator.execution,
            )?[..],
        ),
        Experiment::ValidateRwa => {
            let rows = sweep::rwa_comparison(
                &cfg.program()?,
                &cfg.rwa.larmor,
                &cfg.electron,
                cfg.integrator.dt,
                cfg.integrator.execution,
            )?;
            let worst = rows.iter().map(|r| r.difference()).fold(0.0, f64::max);
            eprintln!("max |P(rotating) - P(lab)| = {worst:.3e}");
            ResultTable::from(&rows[..])
        }
    })
}
