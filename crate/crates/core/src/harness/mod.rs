//! Command-line experiments: configuration, drivers and output files.

pub mod config;
pub mod output;
pub mod run;

use std::path::Path;
use std::time::Instant;

pub use config::{load_config, Experiment, Limits, RunConfig};
pub use output::{emit_csv, emit_meta, Meta};
pub use run::{ResultRow, RESULT_HEADER};

use crate::error::{Error, Result};
use output::{Timings, COERCIVITY_HEADER, ORDER_HEADER, SELFTEST_HEADER, SURFACE_HEADER, TRACE_HEADER};

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub failed_rows: usize,
    pub skipped_rows: usize,
}


fn count(statuses: impl Iterator<Item = String>) -> (usize, usize) {
    statuses.fold((0, 0), |(f, s), st| {
        (f + st.starts_with("failed") as usize, s + st.starts_with("skipped") as usize)
    })
}

/// Run one experiment and write its files into `out`.
///
/// `experiment = None` runs the self test, which ignores `cfg`.
pub fn run_experiment(
    experiment: Option<Experiment>,
    cfg: Option<&RunConfig>,
    out: &Path,
    override_caps: bool,
) -> Result<RunSummary> {
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let mut outputs = Vec::new();
    let mut emit = |name: &str| -> std::path::PathBuf {
        outputs.push(name.to_string());
        out.join(name)
    };

    let (failed, skipped, row_times) = match experiment {
        None => {
            let rows = run::run_selftest()?;
            emit_csv(&rows, &SELFTEST_HEADER, &emit("selftest.csv"))?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            (failed, 0, vec![])
        }
        Some(exp) => {
            let cfg = cfg.ok_or_else(|| Error::Config(format!("{} needs a config", exp.name())))?;
            cfg.validate()?;
            cfg.validate_for(exp)?;
            let limits = if override_caps { Limits::unlimited() } else { cfg.limits };
            let results = |rows: &[ResultRow], path: &Path| -> Result<(usize, usize, Vec<Option<f64>>)> {
                emit_csv(rows, &RESULT_HEADER, path)?;
                let (f, s) = count(rows.iter().map(|r| r.status.clone()));
                Ok((f, s, rows.iter().map(|r| r.time_s).collect()))
            };
            match exp {
                Experiment::Solve => {
                    let (row, solved) = run::run_solve(cfg, &limits)?;
                    let r = results(std::slice::from_ref(&row), &emit("results.csv"))?;
                    if let (true, Some(s)) = (cfg.dump_system, solved) {
                        let m = std::fs::File::create(emit("matrix.csv"))?;
                        let b = std::fs::File::create(emit("rhs.csv"))?;
                        s.system.write_debug(std::io::BufWriter::new(m), std::io::BufWriter::new(b))?;
                    }
                    r
                }
                Experiment::Convergence => {
                    let (rows, orders) = run::run_convergence(cfg, &limits)?;
                    let r = results(&rows, &emit("results.csv"))?;
                    emit_csv(&orders, &ORDER_HEADER, &emit("orders.csv"))?;
                    r
                }
                Experiment::Pollution => results(&run::run_pollution(cfg, &limits)?, &emit("results.csv"))?,
                Experiment::Trace => {
                    let (row, samples) = run::run_trace(cfg, &limits)?;
                    let r = results(std::slice::from_ref(&row), &emit("results.csv"))?;
                    emit_csv(&samples, &TRACE_HEADER, &emit("trace.csv"))?;
                    r
                }
                Experiment::Surface => {
                    let (row, samples) = run::run_surface(cfg, &limits)?;
                    let r = results(std::slice::from_ref(&row), &emit("results.csv"))?;
                    emit_csv(&samples, &SURFACE_HEADER, &emit("surface.csv"))?;
                    r
                }
                Experiment::Coercivity => {
                    let rows = run::run_coercivity(cfg, &limits)?;
                    emit_csv(&rows, &COERCIVITY_HEADER, &emit("coercivity.csv"))?;
                    let (f, s) = count(rows.iter().map(|r| r.status.clone()));
                    (f, s, rows.iter().map(|r| r.time_s).collect())
                }
            }
        }
    };

    outputs.push("meta.json".into());
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: experiment.map_or("selftest", |e| e.name()).into(),
        config_hash: cfg.map(|c| c.hash()).transpose()?,
        config: cfg.cloned(),
        override_caps,
        threads: rayon::current_num_threads(),
        timings: Timings { total_s: start.elapsed().as_secs_f64(), rows: row_times },
        outputs: outputs.clone(),
        failed_rows: failed,
        skipped_rows: skipped,
    };
    emit_meta(&meta, &out.join("meta.json"))?;
    Ok(RunSummary { outputs, failed_rows: failed, skipped_rows: skipped })
}
