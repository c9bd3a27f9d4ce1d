//! CSV and JSON serialisation of a [`Report`].

use crate::runner::Report;

pub const COLUMNS: [&str; 14] = [
    "job_id", "theorem", "m", "p", "body", "function", "parameter", "value", "stderr", "limit",
    "rate", "target", "rel_gap", "verdict",
];

/// 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per sweep point followed by one summary row per job. Point rows
/// leave the summary columns empty; summary rows leave `parameter` and
/// `value` empty and carry the limit's standard error in `stderr`.
pub fn to_csv(report: &Report) -> String {
    let mut out = String::new();
    if let Some(ts) = &report.generated {
        out.push_str(&format!("# generated {ts}\n"));
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for job in &report.jobs {
        let lead = [
            field(&job.id),
            job.theorem.name().to_string(),
            job.m.to_string(),
            number(job.p),
            field(&job.body),
            field(&job.function),
        ];
        for pt in &job.points {
            let mut row = lead.to_vec();
            row.extend([
                number(pt.parameter),
                number(pt.value),
                number(pt.stderr),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let mut row = lead.to_vec();
        row.extend([
            String::new(),
            String::new(),
            opt(job.limit_stderr),
            opt(job.limit),
            opt(job.rate),
            opt(job.target),
            opt(job.rel_gap),
            if job.verdict { "pass" } else { "fail" }.to_string(),
        ]);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::JobReport;
    use nonlocal_core::convergence::SweepPoint;
    use nonlocal_core::Theorem;

    fn report() -> Report {
        Report {
            seed: 1,
            workers: 1,
            generated: None,
            jobs: vec![JobReport {
                id: "j,1".into(),
                theorem: Theorem::BbmTaylor,
                m: 2,
                p: 2.0,
                body: "box(1)".into(),
                function: "gaussian".into(),
                workers: 1,
                points: vec![SweepPoint {
                    parameter: 0.1,
                    value: 1.0 / 3.0,
                    stderr: 0.0,
                }],
                limit: Some(0.5),
                limit_stderr: Some(0.01),
                rate: Some(1.0),
                aitken_limit: Some(0.5),
                aitken_degenerate: Some(false),
                target: Some(0.5),
                rel_gap: Some(0.0),
                tolerance: 0.05,
                bound: None,
                verdict: true,
                error: None,
            }],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 14);
        assert!(lines[1].starts_with("\"j,1\",bbm_taylor,2,"));
        assert!(lines[1].contains("3.3333333333333331e-1"));
        assert!(lines[2].ends_with(",pass"));
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17] {
            let s = number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn timestamp_header() {
        let mut r = report();
        r.generated = Some("2026-01-01T00:00:00Z".into());
        assert!(to_csv(&r).starts_with("# generated"));
    }
}
