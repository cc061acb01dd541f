//! Text outputs of a run: `report.csv` and `summary.txt`.

use std::fmt::Write;

use crate::config::ScenarioConfig;
use crate::metrics::ScenarioReport;

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        "NA".to_string()
    }
}

/// One row per outcome, a mean and an SD column per policy.
pub fn report_csv(reports: &[ScenarioReport]) -> String {
    let mut out = String::from("outcome");
    for r in reports {
        let p = r.policy.key();
        write!(out, ",{p}.mean,{p}.sd").expect("write to String");
    }
    out.push('\n');
    let Some(first) = reports.first() else {
        return out;
    };
    for row in &first.rows {
        out.push_str(&row.name);
        for r in reports {
            let (mean, sd) = r.row(&row.name).map_or((f64::NAN, f64::NAN), |x| (x.mean, x.sd));
            write!(out, ",{},{}", cell(mean), cell(sd)).expect("write to String");
        }
        out.push('\n');
    }
    out
}

fn mean_sd(report: &ScenarioReport, name: &str) -> String {
    match report.row(name) {
        Some(r) if r.mean.is_finite() => format!("{:.3} ({:.3})", r.mean, r.sd),
        _ => "-".to_string(),
    }
}

const FACILITY_ROWS: [(&str, &str); 10] = [
    ("rho_doc", "rho_doc"),
    ("rho_ncd", "rho_NCD"),
    ("rho_phar", "rho_phar"),
    ("rho_lab", "rho_lab"),
    ("w_opd", "w_OPD"),
    ("w_phar", "w_phar"),
    ("w_lab", "w_lab"),
    ("w_ncd", "w_NCD"),
    ("los", "LOS"),
    ("mape", "MAPE %"),
];

/// Run metadata, per-facility outcomes for each policy, and the disparity
/// table with one column per policy.
pub fn summary_text(config: &ScenarioConfig, reports: &[ScenarioReport]) -> String {
    let mut out = String::new();
    let w = &mut out;
    let protocol = config.protocol();
    writeln!(w, "config digest  {}", config.digest()).unwrap();
    writeln!(
        w,
        "protocol       {} replications x {} days, first {} discarded, master seed {}",
        protocol.replications, protocol.horizon_days, protocol.warmup_days, protocol.master_seed
    )
    .unwrap();
    writeln!(w, "arrival term   {}", config.arrival_term).unwrap();
    if let Some(r) = reports.first() {
        let seeds: Vec<String> = r.replications.iter().map(|s| s.seed.to_string()).collect();
        writeln!(w, "seeds          {}", seeds.join(" ")).unwrap();
    }

    let names = config.facility_names();
    for r in reports {
        writeln!(w).unwrap();
        writeln!(w, "{} ({})", r.policy.heading(), r.policy.key()).unwrap();
        write!(w, "{:<10}", "").unwrap();
        for n in &names {
            write!(w, " {n:>20}").unwrap();
        }
        writeln!(w).unwrap();
        for (key, label) in FACILITY_ROWS {
            write!(w, "{label:<10}").unwrap();
            for n in &names {
                write!(w, " {:>20}", mean_sd(r, &format!("{n}.{key}"))).unwrap();
            }
            writeln!(w).unwrap();
        }
        let clamped: u64 = r.replications.iter().map(|s| s.clamped_residuals).sum();
        writeln!(w, "clamped residuals: {clamped}").unwrap();
    }

    writeln!(w).unwrap();
    writeln!(w, "Disparity across facilities (%)").unwrap();
    write!(w, "{:<10}", "").unwrap();
    for r in reports {
        write!(w, " {:>20}", r.policy.heading()).unwrap();
    }
    writeln!(w).unwrap();
    let delta_rows = FACILITY_ROWS
        .iter()
        .filter(|(k, _)| *k != "mape")
        .map(|(k, l)| (format!("delta.{k}"), format!("D {l}")))
        .chain([("beta".to_string(), "beta %".to_string())]);
    for (key, label) in delta_rows {
        write!(w, "{label:<10}").unwrap();
        for r in reports {
            write!(w, " {:>20}", mean_sd(r, &key)).unwrap();
        }
        writeln!(w).unwrap();
    }
    out
}
