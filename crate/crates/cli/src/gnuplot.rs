//! gnuplot script for a finished sweep: acceptance against n, and SJD against n on
//! log-log axes, one series per (kernel, ρ, l) with the theory as dashed lines.

use scaling_lab::SweepRow;

struct Series {
    kernel: String,
    rho: f64,
    l: f64,
    preconditioned: bool,
    has_theory: bool,
}

fn series(rows: &[SweepRow]) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let kernel = r.kernel.to_string();
        if !out.iter().any(|s| s.kernel == kernel && s.rho == r.rho && s.l == r.l) {
            out.push(Series {
                kernel,
                rho: r.rho,
                l: r.l,
                preconditioned: r.kernel.is_preconditioned(),
                has_theory: r.accept_theory.is_some(),
            });
        }
    }
    out
}

fn close(column: usize, v: f64) -> String {
    format!("abs(${column}-({v:e})) <= 1e-9*abs({v:e})")
}

fn selector(s: &Series) -> String {
    format!("strcol(4) eq \"{}\" && {} && {}", s.kernel, close(2, s.rho), close(3, s.l))
}

/// Script that reads `csv_name` from its own directory and writes two PNGs.
pub fn script(rows: &[SweepRow], csv_name: &str) -> String {
    let all = series(rows);
    let mut s = String::new();
    s.push_str("# gnuplot script for ");
    s.push_str(csv_name);
    s.push_str("; run from the directory holding it\n");
    s.push_str("set datafile separator \",\"\nset terminal pngcairo size 1000,650\nset key outside right\n");
    s.push_str("set grid\nset logscale x 2\nset xlabel \"n\"\n\n");

    s.push_str("set output \"acceptance.png\"\nset ylabel \"acceptance\"\nset yrange [0:1]\nplot \\\n");
    let mut parts = Vec::new();
    for (k, se) in all.iter().enumerate() {
        let sel = selector(se);
        let title = format!("{} rho={} l={:.4}", se.kernel, se.rho, se.l);
        parts.push(format!(
            "  \"{csv_name}\" skip 1 using 1:(({sel}) ? $5 : 1/0):6 with yerrorlines lc {} title \"{title}\"",
            k + 1
        ));
        if se.has_theory {
            parts.push(format!(
                "  \"{csv_name}\" skip 1 using 1:(({sel}) ? $7 : 1/0) with lines dt 2 lc {} notitle",
                k + 1
            ));
        }
    }
    s.push_str(&parts.join(", \\\n"));
    s.push_str("\n\n");

    s.push_str("set output \"sjd.png\"\nset ylabel \"squared jump distance\"\nset autoscale y\nset logscale xy\n");
    s.push_str("set format y \"%.0e\"\nplot \\\n");
    let mut parts = Vec::new();
    for (k, se) in all.iter().enumerate() {
        let sel = selector(se);
        let (col, label) = if se.preconditioned { (10, "normalized ") } else { (8, "") };
        let title = format!("{label}{} rho={} l={:.4}", se.kernel, se.rho, se.l);
        parts.push(format!(
            "  \"{csv_name}\" skip 1 using 1:(({sel}) ? ${col} : 1/0) with linespoints lc {} title \"{title}\"",
            k + 1
        ));
        if se.has_theory {
            parts.push(format!(
                "  \"{csv_name}\" skip 1 using 1:(({sel}) ? $11 : 1/0) with lines dt 2 lc {} notitle",
                k + 1
            ));
        }
    }
    s.push_str(&parts.join(", \\\n"));
    s.push('\n');
    s
}
