mod args;
mod config;
mod error;
mod grid;
mod output;
mod probe;
mod run;

use args::{Cli, Command, Format, MethodId};
use clap::Parser;
use config::{methods, resolve_model, Settings};
use error::CliError;
use output::{SweepReport, SweepRow, SCHEMA_ID};
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use thimbleq::parallel::{par_map, Execution};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thimbleq: {e}");
            e.exit_code()
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("THIMBLEQ_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "THIMBLEQ_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_sweep(
    grid: grid::Grid,
    figure: Option<args::FigureId>,
    methods: Vec<MethodId>,
    settings: &Settings,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let results = par_map(&grid.points, Execution::Parallel, |(_, m)| {
        run::run_point(m, &methods, settings, false)
    });
    let rows: Vec<SweepRow> = grid
        .points
        .iter()
        .zip(results)
        .flat_map(|((x, _), rs)| rs.into_iter().map(move |row| SweepRow { param: *x, row }))
        .collect();
    if !rows.is_empty() && rows.iter().all(|r| !r.row.succeeded()) {
        return Err(CliError::Numerical(
            "every method failed at every grid point".into(),
        ));
    }
    let text = match format {
        Format::Csv => output::sweep_csv(&rows),
        Format::Json => output::json(&SweepReport {
            schema: SCHEMA_ID,
            kind: "sweep",
            figure,
            param: grid.param.clone(),
            spacing: grid.spacing,
            model: grid.points[0].1,
            methods,
            tolerance: settings.tol,
            rows,
        }),
    };
    emit(out, &text)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Probe {
            model,
            numerics,
            out,
        } => {
            let model = resolve_model(&model)?;
            let settings = Settings::from_args(&numerics)?;
            let report = probe::probe(&model, &settings)?;
            emit(out.as_deref(), &output::json(&report))
        }
        Command::Estimate {
            model,
            methods: m,
            numerics,
            output: o,
        } => {
            let model = resolve_model(&model)?;
            let settings = Settings::from_args(&numerics)?;
            let methods = methods(&m, &MethodId::ALL);
            let rows = run::run_point(&model, &methods, &settings, true);
            if rows.iter().all(|r| !r.succeeded()) {
                for r in &rows {
                    eprintln!("{}: {}", r.method.name(), r.error.as_deref().unwrap_or(""));
                }
                return Err(CliError::Numerical("every requested method failed".into()));
            }
            let text = match o.format.unwrap_or(Format::Json) {
                Format::Csv => output::estimate_csv(&rows),
                Format::Json => output::json(&output::EstimateReport {
                    schema: SCHEMA_ID,
                    kind: "estimate",
                    model,
                    tolerance: settings.tol,
                    window: settings.window_for(&model),
                    results: rows,
                }),
            };
            emit(o.out.as_deref(), &text)
        }
        Command::Figure {
            id,
            count,
            methods: m,
            numerics,
            output: o,
        } => {
            let settings = Settings::from_args(&numerics)?;
            let grid = grid::figure(id, count)?;
            let methods = methods(&m, &grid::DEFAULT_SWEEP_METHODS);
            run_sweep(
                grid,
                Some(id),
                methods,
                &settings,
                o.format.unwrap_or(Format::Csv),
                o.out.as_deref(),
            )
        }
        Command::Sweep {
            model,
            param,
            from,
            to,
            count,
            spacing,
            methods: m,
            numerics,
            output: o,
        } => {
            let base = resolve_model(&model)?;
            let settings = Settings::from_args(&numerics)?;
            let xs = grid::axis(from, to, count, spacing)?;
            let grid = grid::sweep(&base, &param, xs, spacing)?;
            let methods = methods(&m, &grid::DEFAULT_SWEEP_METHODS);
            run_sweep(
                grid,
                None,
                methods,
                &settings,
                o.format.unwrap_or(Format::Csv),
                o.out.as_deref(),
            )
        }
    }
}
