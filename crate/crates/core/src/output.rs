//! Byte-stable text, JSON and CSV renderings of results.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compare::{ConclusivenessReport, SignificanceMatrix};
use crate::error::{Error, Result};
use crate::variance_lab::{QStar, SweepPoint, VarianceModelFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "table" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

pub const SWEEP_CSV_HEADER: &str = "Q,var_abar,mean_T,repetitions";

/// Matrix as an aligned table; each cell lists the closed, open and paired
/// verdicts, with `.` where a verdict is unavailable.
pub fn matrix_text(m: &SignificanceMatrix) -> String {
    let width = m.methods.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(3);
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "");
    for name in &m.methods {
        let _ = write!(out, "  {name:>width$}");
    }
    out.push('\n');
    for (i, name) in m.methods.iter().enumerate() {
        let _ = write!(out, "{name:width$}");
        for j in 0..m.len() {
            let cell = m.cell(i, j).map_or_else(|| "-".to_owned(), |c| c.render());
            let _ = write!(out, "  {cell:>width$}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "cells: [closed, open, paired] at p = {}", m.p_limit);
    out
}

pub fn matrix_json(m: &SignificanceMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)? + "\n")
}

/// Parses [`matrix_json`] output and checks its structure.
pub fn matrix_from_json(text: &str) -> Result<SignificanceMatrix> {
    let m: SignificanceMatrix = serde_json::from_str(text)?;
    if !m.is_antisymmetric() {
        return Err(Error::Config("matrix is not antisymmetric".into()));
    }
    Ok(m)
}

/// Long-format CSV: one row per ordered pair.
pub fn matrix_csv(m: &SignificanceMatrix) -> String {
    let mut out = String::from("row,col,closed,open,paired\n");
    for i in 0..m.len() {
        for j in 0..m.len() {
            if let Some(c) = m.cell(i, j) {
                let s = |x: Option<crate::stats::Symbol>| x.map_or(String::new(), |s| s.as_char().to_string());
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    m.methods[i],
                    m.methods[j],
                    s(c.closed),
                    s(c.open),
                    s(c.paired)
                );
            }
        }
    }
    out
}

/// `Q,var_abar,mean_T,repetitions`, floats in shortest round-trip form.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{:e},{},{}", p.queries, p.var_abar, p.mean_tasks, p.repetitions);
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepPoint>> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, message: String| Error::Parse {
        path: "<sweep csv>".into(),
        line: line + 1,
        message,
    };
    match lines.next() {
        Some((_, h)) if h.trim() == SWEEP_CSV_HEADER => {}
        _ => return Err(err(0, format!("expected header `{SWEEP_CSV_HEADER}`"))),
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(err(i, format!("expected 4 fields, found {}", f.len())));
        }
        let bad = |name: &str| err(i, format!("invalid {name}"));
        points.push(SweepPoint {
            queries: f[0].parse().map_err(|_| bad("Q"))?,
            var_abar: f[1].parse().map_err(|_| bad("var_abar"))?,
            mean_tasks: f[2].parse().map_err(|_| bad("mean_T"))?,
            repetitions: f[3].parse().map_err(|_| bad("repetitions"))?,
        });
    }
    Ok(points)
}

/// Fit summary in `key = value` lines.
pub fn fit_text(fit: &VarianceModelFit, q_star: Option<QStar>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alpha = {:e}", fit.alpha);
    let _ = writeln!(out, "beta = {:e}", fit.beta);
    let _ = writeln!(out, "gamma = {:e}", fit.gamma);
    let _ = writeln!(out, "scale = {:e}", fit.scale);
    let _ = writeln!(out, "r_squared = {}", fit.r_squared);
    let _ = writeln!(out, "residual_rms = {:e}", fit.residual_rms);
    match q_star {
        Some(QStar::Interior(q)) => {
            let _ = writeln!(out, "q_star = {q}");
        }
        Some(QStar::Decreasing) => {
            let _ = writeln!(out, "q_star = decreasing (alpha <= 0: use the largest feasible Q)");
        }
        None => {
            let _ = writeln!(out, "q_star = undefined (beta <= 0)");
        }
    }
    out
}

#[derive(Serialize)]
struct FitJson<'a> {
    #[serde(flatten)]
    fit: &'a VarianceModelFit,
    q_star: Option<QStar>,
}

pub fn fit_json(fit: &VarianceModelFit, q_star: Option<QStar>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&FitJson { fit, q_star })? + "\n")
}

pub fn report_text(r: &ConclusivenessReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "comparisons: {}", r.comparisons);
    let _ = writeln!(out, "conclusive closed: {}", r.closed);
    let _ = writeln!(out, "conclusive open: {}", r.open);
    let _ = writeln!(out, "conclusive paired: {}", r.paired);
    if r.paired_below_open {
        let _ = writeln!(
            out,
            "note: fewer paired than open conclusions (negatively correlated methods widen paired intervals)"
        );
    }
    let _ = writeln!(out, "inversions: {}", r.inversions.len());
    for inv in &r.inversions {
        let _ = writeln!(
            out,
            "  [{}] {} vs {}: {:?} {} / {:?} {}",
            inv.matrix,
            inv.row,
            inv.col,
            inv.first.0,
            inv.first.1.as_char(),
            inv.second.0,
            inv.second.1.as_char()
        );
    }
    out
}

pub fn report_json(r: &ConclusivenessReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::VerdictCell;
    use crate::stats::Symbol;

    fn two_by_two() -> SignificanceMatrix {
        let c = VerdictCell {
            closed: Some(Symbol::Plus),
            open: Some(Symbol::Zero),
            paired: None,
        };
        SignificanceMatrix {
            methods: vec!["ncc".into(), "lr".into()],
            p_limit: 0.95,
            cells: vec![vec![None, Some(c)], vec![Some(c.flipped()), None]],
        }
    }

    #[test]
    fn matrix_table() {
        let text = matrix_text(&two_by_two());
        assert_eq!(
            text,
            "     ncc   lr\nncc    -  +0.\nlr   -0.    -\ncells: [closed, open, paired] at p = 0.95\n"
        );
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = two_by_two();
        let text = matrix_json(&m).unwrap();
        assert_eq!(matrix_from_json(&text).unwrap(), m);
        assert_eq!(matrix_json(&matrix_from_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn sweep_round_trip() {
        let pts = vec![
            SweepPoint {
                queries: 1,
                var_abar: 1.0 / 3.0 * 1e-4,
                mean_tasks: 83.0,
                repetitions: 200,
            },
            SweepPoint {
                queries: 90,
                var_abar: 0.0,
                mean_tasks: 5.5,
                repetitions: 200,
            },
        ];
        let csv = sweep_csv(&pts);
        assert!(csv.starts_with("Q,var_abar,mean_T,repetitions\n1,"));
        assert_eq!(sweep_from_csv(&csv).unwrap(), pts);
        assert!(sweep_from_csv("Q,var\n").is_err());
    }
}
