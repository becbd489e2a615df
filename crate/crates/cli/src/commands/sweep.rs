//! Werner pair sweep over the local dimension.

use qhide_core::bit_hiding::werner_pair;
use qhide_core::security::{dist_global, dist_locc_seesaw, dist_ppt, werner_ppt_lp, Cut, SeesawSettings};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{Check, Entry, RunReport};

/// CSV schema of the sweep table; `status` is `ok` or the error that failed the row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub epsilon_ppt: f64,
    pub ppt_lower: f64,
    pub ppt_gap: f64,
    pub epsilon_lp: f64,
    pub epsilon_seesaw: f64,
    pub global: f64,
    pub status: String,
}

impl SweepRow {
    fn failed(d: usize, message: String) -> Self {
        Self {
            d,
            epsilon_ppt: f64::NAN,
            ppt_lower: f64::NAN,
            ppt_gap: f64::NAN,
            epsilon_lp: f64::NAN,
            epsilon_seesaw: f64::NAN,
            global: f64::NAN,
            status: message,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn sweep_row(d: usize, seed: u64) -> SweepRow {
    let compute = || -> qhide_core::Result<SweepRow> {
        let cs = werner_pair(d)?;
        let (rho, sigma) = (cs.state(0)?, cs.state(1)?);
        let cut = Cut::of_scheme(&cs);
        let ppt = dist_ppt(&rho, &sigma, &cut)?;
        let settings = SeesawSettings {
            seed,
            ..SeesawSettings::default()
        };
        Ok(SweepRow {
            d,
            epsilon_ppt: ppt.upper,
            ppt_lower: ppt.lower,
            ppt_gap: ppt.gap(),
            epsilon_lp: werner_ppt_lp(&[d], 0, 1)?,
            epsilon_seesaw: dist_locc_seesaw(&rho, &sigma, &cut, &settings)?.value,
            global: dist_global(&rho, &sigma)?,
            status: "ok".into(),
        })
    };
    compute().unwrap_or_else(|e| SweepRow::failed(d, e.to_string()))
}

/// Rows in `dims` order regardless of completion order.
pub fn sweep_rows(dims: &[usize], seed: u64) -> Vec<SweepRow> {
    dims.par_iter().map(|&d| sweep_row(d, seed)).collect()
}

pub fn sweep_checks(rows: &[SweepRow], tol: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for r in rows {
        let name = |what: &str| format!("d={}/{what}", r.d);
        checks.push(Check::holds(name("solved"), r.ok()));
        if !r.ok() {
            continue;
        }
        checks.push(Check::le(name("seesaw-below-ppt"), r.epsilon_seesaw - r.epsilon_ppt, tol));
        checks.push(Check::le(name("ppt-below-global"), r.epsilon_ppt - r.global, tol));
        checks.push(Check::le(name("duality-gap"), r.ppt_gap, tol));
        checks.push(Check::le(name("sdp-matches-lp"), (r.epsilon_ppt - r.epsilon_lp).abs(), tol));
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    sorted.sort_by_key(|r| r.d);
    for w in sorted.windows(2) {
        checks.push(Check::le(
            format!("non-increasing d={}->{}", w[0].d, w[1].d),
            w[1].epsilon_ppt - w[0].epsilon_ppt,
            tol,
        ));
    }
    checks
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in rows {
        writer.serialize(r)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| csv::Error::from(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let dims = config.usize_list("dims")?;
    if let Some(bad) = dims.iter().find(|&&d| d < 2) {
        return Err(CliError::Usage(format!("Werner pairs need d >= 2, got {bad}")));
    }
    let rows = sweep_rows(&dims, config.seed()?);
    let checks = sweep_checks(&rows, config.tolerance()?);
    let mut entries = Vec::new();
    for r in rows.iter().filter(|r| r.ok()) {
        entries.push(Entry::new(format!("d={}/epsilon_ppt", r.d), r.epsilon_ppt, "ppt-sdp", "upper"));
        entries.push(Entry::new(format!("d={}/epsilon_seesaw", r.d), r.epsilon_seesaw, "locc-seesaw", "lower"));
        entries.push(Entry::new(format!("d={}/global", r.d), r.global, "global-helstrom", "exact-global"));
    }
    let mut report = RunReport::new(config, checks, entries, json!({ "rows": rows }));
    report.csv_table = Some(rows_to_csv(&rows)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn qubit_row_orders_estimators() {
        let row = sweep_row(2, 1);
        assert!(row.ok(), "{}", row.status);
        assert!(row.epsilon_ppt >= row.epsilon_seesaw - 1e-6);
        assert!((row.epsilon_ppt - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![sweep_row(2, 1), SweepRow::failed(5, "solver error: stalled".into())];
        let text = rows_to_csv(&rows).unwrap();
        assert!(text.starts_with("d,epsilon_ppt,ppt_lower,ppt_gap,epsilon_lp,epsilon_seesaw,global,status"));
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].status, rows[1].status);
        assert!(back[1].epsilon_ppt.is_nan());
    }

    #[test]
    fn empty_dims_is_a_usage_error() {
        let config = ExperimentConfig::resolve(Command::Sweep, None, &[("dims", " , ".into())]).unwrap();
        assert!(matches!(run(&config), Err(CliError::Usage(_))));
    }

    #[test]
    fn failed_rows_fail_the_report() {
        let checks = sweep_checks(&[SweepRow::failed(2, "boom".into())], 1e-6);
        assert!(!checks[0].passed);
    }
}
