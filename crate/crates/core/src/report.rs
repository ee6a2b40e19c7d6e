//! Trajectory tables, their CSV form and the conservation report derived
//! from them.
//!
//! The report is computed from the table alone, so re-analysing a saved CSV
//! reproduces it exactly: values are written with 17 significant digits.

use std::io::{Read, Write};

use serde::Serialize;

use crate::config::Tolerances;
use crate::dynamics::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Case, Coordinates};

/// Column-major view of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn columns(case: Case, full_state: bool) -> Vec<String> {
    let mut c: Vec<&str> = vec!["t", "Pi1", "Pi2", "Pi3"];
    if case == Case::Noncoincident {
        c.extend(["Gamma1", "Gamma2", "Gamma3"]);
    }
    c.extend(["alpha", "l", "H"]);
    match case {
        Case::Coincident => c.push("casimir_pi2"),
        Case::Noncoincident => c.extend(["casimir_pigamma", "casimir_gamma2"]),
    }
    if full_state {
        c.extend(["mu1", "mu2", "mu3"]);
    }
    c.into_iter().map(String::from).collect()
}

impl Table {
    /// Builds a table from samples; `reduced` extracts the flat reduced
    /// coordinates of a sample state.
    pub fn from_trajectory<S>(
        traj: &Trajectory<S>,
        case: Case,
        reduced: impl Fn(&S) -> Vec<f64>,
    ) -> Table {
        let full = traj.first().diagnostics.spatial_momentum.is_some();
        let rows = traj
            .samples
            .iter()
            .map(|Sample { t, state, diagnostics: d }| {
                let mut row = vec![*t];
                row.extend(reduced(state));
                row.push(d.energy);
                row.extend(&d.casimirs);
                if let Some(mu) = d.spatial_momentum {
                    row.extend(mu.iter());
                }
                row
            })
            .collect();
        Table {
            columns: columns(case, full),
            rows,
        }
    }

    pub fn reduced<R: Coordinates>(traj: &Trajectory<R>, case: Case) -> Table {
        Table::from_trajectory(traj, case, |s| s.coords())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn case(&self) -> Result<Case> {
        if self.columns.iter().any(|c| c == "Gamma1") {
            Ok(Case::Noncoincident)
        } else if self.columns.iter().any(|c| c == "casimir_pi2") {
            Ok(Case::Coincident)
        } else {
            Err(Error::config("trajectory", "unrecognized column schema"))
        }
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Table> {
        let mut input = csv::Reader::from_reader(r);
        let columns: Vec<String> = input.headers().map_err(csv_error)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for (i, record) in input.records().enumerate() {
            let record = record.map_err(csv_error)?;
            let row = record
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::config(format!("trajectory row {}", i + 1), e.to_string()))?;
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::config("trajectory", format!("{other:?}")),
    }
}

/// One conservation check on a column (or group of columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub initial: Vec<f64>,
    #[serde(rename = "final")]
    pub last: Vec<f64>,
    pub max_relative_drift: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub case: Case,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// `max_k ‖q_k − q_0‖∞ / s` with `s = ‖q_0‖∞`, or 1 when `q_0 = 0`.
pub fn max_relative_drift(series: &[Vec<f64>]) -> f64 {
    let q0 = &series[0];
    let scale = q0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    series
        .iter()
        .map(|q| q.iter().zip(q0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        .fold(0.0f64, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) })
        / scale
}

fn check(table: &Table, name: &str, cols: &[&str], tolerance: f64) -> Option<Check> {
    let data: Vec<Vec<f64>> = cols.iter().map(|c| table.column(c)).collect::<Option<_>>()?;
    let series: Vec<Vec<f64>> = (0..table.rows.len()).map(|k| data.iter().map(|c| c[k]).collect()).collect();
    let drift = max_relative_drift(&series);
    Some(Check {
        name: name.into(),
        initial: series[0].clone(),
        last: series.last()?.clone(),
        max_relative_drift: drift,
        tolerance,
        passed: drift < tolerance,
    })
}

/// Conservation report for a trajectory table. Energy and `l` are only
/// checked for uncontrolled runs.
pub fn analyze(table: &Table, uncontrolled: bool, tol: &Tolerances) -> Result<ScenarioReport> {
    if table.rows.is_empty() {
        return Err(Error::config("trajectory", "no samples"));
    }
    let case = table.case()?;
    let mut checks = Vec::new();
    if uncontrolled {
        checks.extend(check(table, "energy", &["H"], tol.energy));
        checks.extend(check(table, "l", &["l"], tol.l));
    }
    match case {
        Case::Coincident => checks.extend(check(table, "casimir_pi2", &["casimir_pi2"], tol.casimirs)),
        Case::Noncoincident => {
            checks.extend(check(table, "casimir_pigamma", &["casimir_pigamma"], tol.casimirs));
            checks.extend(check(table, "casimir_gamma2", &["casimir_gamma2"], tol.casimirs));
        }
    }
    // the gravity-axis component μ·a equals Π·Γ, already checked above
    if case == Case::Coincident {
        checks.extend(check(table, "spatial_momentum", &["mu1", "mu2", "mu3"], tol.momentum));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ScenarioReport {
        case,
        samples: table.rows.len(),
        checks,
        passed,
    })
}
