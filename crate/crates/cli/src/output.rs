//! Table rendering. Every number is printed with 12 significant digits.

use bellscan::SweepRow;
use serde::Serialize;

use crate::config::Format;
use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: shortest of fixed or scientific, trailing zeros
/// removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let p = SIGNIFICANT_DIGITS as i32;
    let sci = format!("{:.*e}", (p - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= p {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{:.*}", (p - 1 - exp) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the printed precision.
fn rounded(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

/// CH optimum at one efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRow {
    pub eta: f64,
    pub t_star: Option<f64>,
    pub lambda_star: Option<f64>,
    pub schmidt_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Sweep { rows: Vec<SweepRow>, azimuth: bool },
    Analytic(Vec<AnalyticRow>),
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), format_number)
}

fn angle_header(max_m: usize, azimuth: bool) -> Vec<String> {
    let mut h = Vec::new();
    let kinds: &[&str] = if azimuth { &["theta", "phi"] } else { &["theta"] };
    for kind in kinds {
        for party in ["a", "b"] {
            h.extend((1..=max_m).map(|k| format!("{kind}_{party}{k}")));
        }
    }
    h
}

/// Angles of one row spread into the shared header, blanks where the row has
/// fewer settings than the widest row.
fn angle_cells(row: &SweepRow, max_m: usize, azimuth: bool) -> Vec<String> {
    let blocks = if azimuth { 4 } else { 2 };
    let mut cells = vec![String::new(); blocks * max_m];
    for (b, chunk) in row.settings.chunks(row.m).enumerate().take(blocks) {
        for (k, &a) in chunk.iter().enumerate() {
            cells[b * max_m + k] = format_number(a);
        }
    }
    cells
}

#[derive(Serialize)]
struct JsonSweepRow {
    #[serde(rename = "M")]
    m: usize,
    q: f64,
    ratio: f64,
    best_value: f64,
    eta_crit: Option<f64>,
    violated: bool,
    settings: Vec<f64>,
}

#[derive(Serialize)]
struct JsonAnalyticRow {
    eta: f64,
    t_star: Option<f64>,
    lambda_star: Option<f64>,
    schmidt_ratio: Option<f64>,
}

impl Table {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Table::Sweep { rows, azimuth } => {
                let max_m = rows.iter().map(|r| r.m).max().unwrap_or(0);
                let mut header: Vec<String> =
                    ["M", "q", "ratio", "best_value", "eta_crit", "violated"]
                        .map(String::from)
                        .to_vec();
                header.extend(angle_header(max_m, *azimuth));
                w.write_record(&header)?;
                for r in rows {
                    let mut rec = vec![
                        r.m.to_string(),
                        format_number(r.q),
                        format_number(r.ratio),
                        format_number(r.best_value),
                        opt(r.best_eta_crit),
                        r.best_eta_crit.is_some().to_string(),
                    ];
                    rec.extend(angle_cells(r, max_m, *azimuth));
                    w.write_record(&rec)?;
                }
            }
            Table::Analytic(rows) => {
                w.write_record(["eta", "t_star", "lambda_star", "schmidt_ratio"])?;
                for r in rows {
                    w.write_record([
                        format_number(r.eta),
                        opt(r.t_star),
                        opt(r.lambda_star),
                        opt(r.schmidt_ratio),
                    ])?;
                }
            }
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    fn json(&self) -> Result<Vec<u8>, CliError> {
        let mut out = match self {
            Table::Sweep { rows, .. } => {
                let recs: Vec<JsonSweepRow> = rows
                    .iter()
                    .map(|r| JsonSweepRow {
                        m: r.m,
                        q: rounded(r.q),
                        ratio: rounded(r.ratio),
                        best_value: rounded(r.best_value),
                        eta_crit: r.best_eta_crit.map(rounded),
                        violated: r.best_eta_crit.is_some(),
                        settings: r.settings.iter().copied().map(rounded).collect(),
                    })
                    .collect();
                serde_json::to_vec_pretty(&recs)?
            }
            Table::Analytic(rows) => {
                let recs: Vec<JsonAnalyticRow> = rows
                    .iter()
                    .map(|r| JsonAnalyticRow {
                        eta: rounded(r.eta),
                        t_star: r.t_star.map(rounded),
                        lambda_star: r.lambda_star.map(rounded),
                        schmidt_ratio: r.schmidt_ratio.map(rounded),
                    })
                    .collect();
                serde_json::to_vec_pretty(&recs)?
            }
        };
        out.push(b'\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.001), "0.001");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(-0.125), "-0.125");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(1e-7), "1e-07");
        assert_eq!(format_number(-2.5e-9 / 3.0), "-8.33333333333e-10");
        assert_eq!(format_number(3e15), "3e+15");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
    }

    fn row(m: usize, eta: Option<f64>) -> SweepRow {
        SweepRow {
            m,
            q: 0.0,
            ratio: 0.5,
            best_value: 0.1,
            best_eta_crit: eta,
            settings: (0..2 * m).map(|i| i as f64 * 0.1).collect(),
            converged: true,
        }
    }

    #[test]
    fn csv_layout() {
        let t = Table::Sweep {
            rows: vec![row(2, Some(0.8)), row(3, None)],
            azimuth: false,
        };
        let text = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "M,q,ratio,best_value,eta_crit,violated,theta_a1,theta_a2,theta_a3,theta_b1,theta_b2,theta_b3"
        );
        assert_eq!(lines[1], "2,0,0.5,0.1,0.8,true,0,0.1,,0.2,0.3,");
        assert_eq!(lines[2], "3,0,0.5,0.1,NA,false,0,0.1,0.2,0.3,0.4,0.5");
    }

    #[test]
    fn json_records() {
        let t = Table::Sweep {
            rows: vec![row(2, None)],
            azimuth: false,
        };
        let v: serde_json::Value = serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v[0]["M"], 2);
        assert!(v[0]["eta_crit"].is_null());
        assert_eq!(v[0]["violated"], false);
        assert_eq!(v[0]["settings"].as_array().unwrap().len(), 4);
    }
}
