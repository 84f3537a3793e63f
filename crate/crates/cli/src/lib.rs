//! Library half of the `bellscan` binary: argument resolution, execution and
//! table output. Acceptance tests drive it directly.

pub mod config;
pub mod output;

use std::io::Write;

use bellscan::ch_analytic::optimal_state;
use bellscan::optimize::{lowest_threshold_per_noise, sweep, Family};
use bellscan::{BellError, SweepRow};
use thiserror::Error;

pub use config::{Cli, Command, Format, RunConfig, SEED_ENV};
pub use output::{format_number, AnalyticRow, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] BellError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Result of a run: the table plus one human-readable line per `(M, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub summary: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.command == Command::Analytic {
        return analytic(cfg);
    }
    let family = if cfg.i3322 {
        Family::I3322
    } else {
        Family::Chained(cfg.m_list.clone())
    };
    let rows = sweep(&family, &cfg.ratios, &cfg.q_list, &cfg.options)?;
    let summary = summarize(&rows);
    let rows = if cfg.command == Command::NoiseSweep {
        best_per_noise(rows)
    } else {
        rows
    };
    Ok(Report {
        table: Table::Sweep {
            rows,
            azimuth: cfg.options.allow_azimuth,
        },
        summary,
    })
}

/// One row per `(M, q)`: the lowest-threshold ratio, or the largest value when
/// no ratio violates.
fn best_per_noise(rows: Vec<SweepRow>) -> Vec<SweepRow> {
    let mut out: Vec<SweepRow> = Vec::new();
    for row in rows {
        match out.last_mut() {
            Some(last) if last.m == row.m && last.q.to_bits() == row.q.to_bits() => {
                let better = match (row.best_eta_crit, last.best_eta_crit) {
                    (Some(a), Some(b)) => a < b,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => row.best_value > last.best_value,
                };
                if better {
                    *last = row;
                }
            }
            _ => out.push(row),
        }
    }
    out
}

fn summarize(rows: &[SweepRow]) -> Vec<String> {
    lowest_threshold_per_noise(rows)
        .into_iter()
        .map(|g| match (g.eta_crit, g.ratio) {
            (Some(eta), Some(ratio)) => format!(
                "M={} q={} min_eta_crit={} at ratio={}",
                g.m,
                format_number(g.q),
                format_number(eta),
                format_number(ratio)
            ),
            _ => format!("M={} q={} no violation", g.m, format_number(g.q)),
        })
        .collect()
}

fn analytic(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut rows = Vec::with_capacity(cfg.etas.len());
    let mut summary = Vec::with_capacity(cfg.etas.len());
    for &eta in &cfg.etas {
        let row = match optimal_state(eta)? {
            Some(sol) => AnalyticRow {
                eta,
                t_star: Some(sol.rotation.t),
                lambda_star: Some(sol.rotation.lambda),
                schmidt_ratio: Some(sol.schmidt_ratio),
            },
            None => AnalyticRow {
                eta,
                t_star: None,
                lambda_star: None,
                schmidt_ratio: None,
            },
        };
        summary.push(match row.lambda_star {
            Some(l) => format!("eta={} lambda_star={}", format_number(eta), format_number(l)),
            None => format!("eta={} no violation", format_number(eta)),
        });
        rows.push(row);
    }
    Ok(Report {
        table: Table::Analytic(rows),
        summary,
    })
}

/// Executes and writes the table to `--out` (summary to stdout) or, without
/// `--out`, the table to stdout and the summary to stderr.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = execute(cfg)?;
    let bytes = report.table.render(cfg.format)?;
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            let mut out = std::io::stdout().lock();
            for line in &report.summary {
                writeln!(out, "{line}")?;
            }
        }
        None => {
            std::io::stdout().lock().write_all(&bytes)?;
            let mut err = std::io::stderr().lock();
            for line in &report.summary {
                writeln!(err, "{line}")?;
            }
        }
    }
    Ok(report)
}
