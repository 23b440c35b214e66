//! `sweep.csv` rows and the human-readable summary table.

use scaling_lab::SweepRow;
use serde::Serialize;
use std::io::Write;

/// Column order of `sweep.csv`. Documented in `schema/sweep.csv.toml`.
pub const HEADER: [&str; 15] = [
    "n",
    "rho",
    "l",
    "kernel",
    "accept_mean",
    "accept_se",
    "accept_theory",
    "sjd",
    "sjd_se",
    "sjd_norm",
    "sjd_theory",
    "lag1_corr",
    "flag",
    "seed",
    "wall_ms",
];

#[derive(Serialize)]
struct CsvRow {
    n: usize,
    rho: f64,
    l: f64,
    kernel: String,
    accept_mean: f64,
    accept_se: f64,
    accept_theory: Option<f64>,
    sjd: f64,
    sjd_se: f64,
    sjd_norm: f64,
    sjd_theory: Option<f64>,
    lag1_corr: f64,
    flag: String,
    seed: u64,
    wall_ms: f64,
}

impl From<&SweepRow> for CsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            n: r.n,
            rho: r.rho,
            l: r.l,
            kernel: r.kernel.to_string(),
            accept_mean: r.acceptance.mean,
            accept_se: r.acceptance.std_error,
            accept_theory: r.accept_theory,
            sjd: r.sjd.s_n,
            sjd_se: r.sjd.std_error,
            sjd_norm: r.sjd.s_n_normalized,
            sjd_theory: r.sjd_theory,
            lag1_corr: r.lag1_corr,
            flag: r.flag_label(),
            seed: r.seed,
            wall_ms: (r.wall_ms * 1000.0).round() / 1000.0,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in rows {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn summary_table(rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{:>7} {:>7} {:>7} {:<12} {:>16} {:>8} {:>11} {:>11}  {}\n",
        "n", "rho", "l", "kernel", "accept", "theory", "sjd", "sjd theory", "flag"
    );
    for r in rows {
        let (sjd, _) = r.sjd_compared();
        s.push_str(&format!(
            "{:>7} {:>7.4} {:>7.4} {:<12} {:>8.4} ± {:<5.4} {:>8} {:>11.4e} {:>11}  {}\n",
            r.n,
            r.rho,
            r.l,
            r.kernel.to_string(),
            r.acceptance.mean,
            r.acceptance.std_error,
            opt(r.accept_theory),
            sjd,
            r.sjd_theory.map_or_else(|| "-".into(), |v| format!("{v:.4e}")),
            r.flag_label(),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use scaling_lab::diagnostics::{StepConstant, StepExponent, SweepConfig};
    use scaling_lab::{scaling_sweep, ProposalKind, ReferenceDensity, TargetFamily};

    fn rows() -> Vec<SweepRow> {
        let config = SweepConfig {
            target: TargetFamily::Product { kappa: 0.0, density: ReferenceDensity::Gaussian },
            kernels: vec![ProposalKind::Rwm, ProposalKind::Mala],
            n_grid: vec![20],
            rho_grid: vec![StepExponent::Value(1.0)],
            l_grid: vec![StepConstant::Value(2.0)],
            iterations: 500,
            burn_in: None,
            replicates: 2,
            master_seed: 1,
            i_star: 1,
            tolerance: 0.02,
            sjd_tolerance: 0.15,
            degenerate_high: 0.95,
            degenerate_low: 0.01,
        };
        scaling_sweep(&config).unwrap().rows
    }

    #[test]
    fn header_matches_schema_order() {
        let mut buf = Vec::new();
        write_csv(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, HEADER.join(","));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn missing_theory_is_an_empty_cell() {
        let mut buf = Vec::new();
        write_csv(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mala = text.lines().find(|l| l.contains(",mala,")).unwrap();
        let cells: Vec<&str> = mala.split(',').collect();
        assert_eq!(cells[6], "");
        assert_eq!(cells[10], "");
    }

    #[test]
    fn empty_sweep_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), HEADER.join(","));
    }

    #[test]
    fn summary_has_one_line_per_row() {
        assert_eq!(summary_table(&rows()).lines().count(), 3);
    }
}
