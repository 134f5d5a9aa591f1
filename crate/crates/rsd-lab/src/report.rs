//! CSV and structured-text rendering with a provenance header.

use std::fmt::Write as _;

use crate::experiments::{ExperimentReport, ReportRow};

pub const CSV_COLUMNS: [&str; 7] = ["quantity", "school", "t_or_epsilon", "estimate", "stderr", "bound", "pass"];

/// Identifies the producing binary; override at build time with
/// `RSD_LAB_BUILD_ID` (e.g. the output of `git describe`).
pub fn build_id() -> &'static str {
    option_env!("RSD_LAB_BUILD_ID").unwrap_or(concat!("rsd-lab-", env!("CARGO_PKG_VERSION")))
}

/// Header fields written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub master_seed: u64,
    pub replications: u64,
    pub config_hash: String,
}

impl Provenance {
    fn lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("command", self.command.clone()),
            ("master_seed", self.master_seed.to_string()),
            ("replications", self.replications.to_string()),
            ("config_hash", self.config_hash.clone()),
            ("build_id", build_id().to_string()),
        ]
    }

    /// `# key = value` lines, for CSV files.
    pub fn comment_header(&self) -> String {
        self.lines().into_iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }

    /// `key = value` lines, for text files.
    pub fn text_header(&self) -> String {
        self.lines().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(r: &ReportRow) -> String {
    [
        field(&r.quantity),
        opt(r.school),
        opt(r.t_or_epsilon),
        r.estimate.to_string(),
        opt(r.stderr),
        opt(r.bound),
        opt(r.pass),
    ]
    .join(",")
}

pub fn rows_csv(prov: &Provenance, rows: &[ReportRow]) -> String {
    let mut s = prov.comment_header();
    s.push_str(&CSV_COLUMNS.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn experiment_csv(prov: &Provenance, report: &ExperimentReport) -> String {
    rows_csv(prov, &report.rows)
}

pub fn experiment_text(prov: &Provenance, report: &ExperimentReport) -> String {
    let mut s = prov.text_header();
    let _ = writeln!(s, "experiment = {}", report.experiment);
    for (k, v) in &report.notes {
        let _ = writeln!(s, "{k} = {v}");
    }
    let _ = writeln!(s, "result = {}", if report.all_pass() { "pass" } else { "fail" });
    let _ = writeln!(s, "\n[rows]");
    for r in &report.rows {
        let _ = write!(s, "{}", r.quantity);
        if let Some(k) = r.school {
            let _ = write!(s, " school={k}");
        }
        if let Some(x) = r.t_or_epsilon {
            let _ = write!(s, " at={x}");
        }
        let _ = write!(s, " estimate={}", r.estimate);
        if let Some(se) = r.stderr {
            let _ = write!(s, " stderr={se}");
        }
        if let Some(b) = r.bound {
            let _ = write!(s, " reference={b}");
        }
        if let Some(p) = r.pass {
            let _ = write!(s, " {}", if p { "pass" } else { "FAIL" });
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance { command: "experiment".into(), master_seed: 7, replications: 10, config_hash: "ab".into() }
    }

    #[test]
    fn csv_shape() {
        let rows = vec![
            ReportRow::new("tail_frequency", 0.25).school(1).at(0.1).stderr(0.01).bound(12.5).pass(true),
            ReportRow::new("gamma_bar", 0.5),
        ];
        let csv = rows_csv(&prov(), &rows);
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "quantity,school,t_or_epsilon,estimate,stderr,bound,pass");
        assert_eq!(body[1], "tail_frequency,1,0.1,0.25,0.01,12.5,true");
        assert_eq!(body[2], "gamma_bar,,,0.5,,,");
        assert!(csv.contains("# master_seed = 7\n"));
        assert!(csv.contains("# config_hash = ab\n"));
    }

    #[test]
    fn quoting() {
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("plain"), "plain");
    }
}
