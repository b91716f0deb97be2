//! CSV output of ledger and criterion records.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criterion::{CriterionRecord, CriterionReport, CriterionSample};
use crate::error::{Error, Result};
use crate::ledger::LedgerRecord;

/// One line of the time-series CSV; field order is the column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub time: f64,
    pub energy_l2: f64,
    pub diss_u: f64,
    pub diss_v: f64,
    pub diss_theta: f64,
    pub damp_u: f64,
    pub damp_v: f64,
    pub h1_energy: f64,
    pub residual_l2: f64,
    pub besov_u: f64,
    pub besov_v: f64,
    pub criterion_integrand: f64,
    pub criterion_integral: f64,
    pub hs_norm_sup: f64,
}

pub const TIMESERIES_COLUMNS: [&str; 14] = [
    "time",
    "energy_l2",
    "diss_u",
    "diss_v",
    "diss_theta",
    "damp_u",
    "damp_v",
    "h1_energy",
    "residual_l2",
    "besov_u",
    "besov_v",
    "criterion_integrand",
    "criterion_integral",
    "hs_norm_sup",
];

impl TimeseriesRow {
    pub fn new(ledger: &LedgerRecord, criterion: &CriterionRecord) -> Self {
        Self {
            time: ledger.time,
            energy_l2: ledger.energy_l2,
            diss_u: ledger.diss_u,
            diss_v: ledger.diss_v,
            diss_theta: ledger.diss_theta,
            damp_u: ledger.damp_u,
            damp_v: ledger.damp_v,
            h1_energy: ledger.h1_energy,
            residual_l2: ledger.residual_l2,
            besov_u: criterion.besov_u,
            besov_v: criterion.besov_v,
            criterion_integrand: criterion.integrand,
            criterion_integral: criterion.integral_to_date,
            hs_norm_sup: criterion.hs_norm_sup,
        }
    }
}

impl CriterionSample for TimeseriesRow {
    fn time(&self) -> f64 {
        self.time
    }

    fn integrand(&self) -> f64 {
        self.criterion_integrand
    }
}

/// Pairs ledger and criterion records recorded at the same times.
pub fn rows(ledger: &[LedgerRecord], criterion: &[CriterionRecord]) -> Result<Vec<TimeseriesRow>> {
    if ledger.len() != criterion.len() {
        return Err(Error::InvalidArgument(format!(
            "ledger and criterion series differ in length ({} vs {})",
            ledger.len(),
            criterion.len()
        )));
    }
    Ok(ledger
        .iter()
        .zip(criterion)
        .map(|(l, c)| TimeseriesRow::new(l, c))
        .collect())
}

pub fn write_timeseries(path: &Path, rows: &[TimeseriesRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(TIMESERIES_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a time-series CSV; an empty file yields no rows.
pub fn read_timeseries(path: &Path) -> Result<Vec<TimeseriesRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if !headers.is_empty() && headers.iter().ne(TIMESERIES_COLUMNS) {
        return Err(Error::InvalidArgument(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Gradient-balance details that do not fit the main time series:
/// `J₁ … J₇`, both damping-gradient forms and the `Ḣ¹` residual.
pub fn write_ledger_details(path: &Path, ledger: &[LedgerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "time",
        "residual_l2",
        "residual_h1",
        "j1",
        "j2",
        "j3",
        "j4",
        "j5",
        "j6",
        "j7",
        "damp_grad_u_direct",
        "damp_grad_u_pointwise",
        "damp_grad_v_direct",
        "damp_grad_v_pointwise",
    ])?;
    for r in ledger {
        let mut fields = vec![r.time, r.residual_l2, r.residual_h1];
        fields.extend(r.j_terms.0);
        fields.extend([
            r.damping_gradient_u.direct,
            r.damping_gradient_u.pointwise,
            r.damping_gradient_v.direct,
            r.damping_gradient_v.pointwise,
        ]);
        w.write_record(fields.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_criterion(path: &Path, records: &[CriterionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable criterion summary.
pub fn criterion_summary(report: &CriterionReport, delta: Option<f64>, gamma: Option<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "criterion integral  {:.12e}", report.integral);
    let _ = writeln!(s, "final time          {}", report.final_time);
    let _ = writeln!(s, "samples             {}", report.samples);
    if let (Some(d), Some(g)) = (delta, gamma) {
        let _ = writeln!(s, "exponents           delta = {d}, gamma = {g}");
    }
    let _ = writeln!(s, "flag                {}", report.flag);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::accumulate;

    fn row(t: f64, f: f64) -> TimeseriesRow {
        TimeseriesRow {
            time: t,
            criterion_integrand: f,
            energy_l2: 1.0 / (1.0 + t),
            ..Default::default()
        }
    }

    #[test]
    fn three_records_make_four_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        let rs = vec![row(0.0, 1.0), row(0.5, 1.0), row(1.0, 1.0)];
        write_timeseries(&path, &rs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), TIMESERIES_COLUMNS.join(","));
        let back = read_timeseries(&path).unwrap();
        assert_eq!(back, rs);
        assert!((accumulate(&back).unwrap().integral - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(read_timeseries(&empty).unwrap().is_empty());
        let header_only = dir.path().join("header.csv");
        write_timeseries(&header_only, &[]).unwrap();
        assert!(read_timeseries(&header_only).unwrap().is_empty());
    }

    #[test]
    fn foreign_columns_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_timeseries(&path).is_err());
    }
}
