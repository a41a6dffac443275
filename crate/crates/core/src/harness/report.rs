use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::harness::{fmt_f64, Proportion, SummaryStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(invalid(format!("unknown report format {other:?}"))),
        }
    }
}

/// Renders a summary. Output depends only on `summary`.
pub fn report(summary: &SummaryStats, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Text => Ok(text(summary)),
        ReportFormat::Csv => csv(summary),
    }
}

fn text(s: &SummaryStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# configuration");
    for (key, value) in s.info.entries() {
        let _ = writeln!(out, "{key:<12} {value}");
    }
    let _ = writeln!(out, "{:<12} {}", "records", s.n);

    let _ = writeln!(out, "\n# metrics");
    let _ = write!(out, "{:<18} {:>22} {:>22} {:>22}", "metric", "mean", "min", "max");
    for (level, _) in &s.metrics[0].quantiles {
        let _ = write!(out, " {:>22}", format!("q{:02}", (level * 100.0).round() as u32));
    }
    out.push('\n');
    for m in &s.metrics {
        let _ = write!(
            out,
            "{:<18} {:>22} {:>22} {:>22}",
            m.name,
            fmt_f64(m.mean),
            fmt_f64(m.min),
            fmt_f64(m.max)
        );
        for (_, q) in &m.quantiles {
            let _ = write!(out, " {:>22}", fmt_f64(*q));
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\n# empirical probabilities (Wilson 95%)");
    let props = s
        .ratio_tails
        .iter()
        .chain([&s.lemma1, &s.full_coverage]);
    for p in props {
        let _ = writeln!(out, "{}", proportion_line(p));
    }

    let _ = writeln!(out, "\n# bound vs empirical");
    for row in &s.bounds {
        let bound = row.bound.map_or("n/a".to_string(), fmt_f64);
        let verdict = match row.consistent() {
            None => "not applicable at these parameters",
            Some(true) => "consistent",
            Some(false) => "VIOLATED",
        };
        let _ = writeln!(
            out,
            "{:<22} bound {:>22}  {}  {}",
            row.bound_name,
            bound,
            proportion_line(&row.empirical),
            verdict
        );
    }
    for row in s.bounds.iter().filter(|r| r.vacuous()) {
        let _ = writeln!(
            out,
            "VACUOUS: {} bound {} >= 1 at k={}",
            row.bound_name,
            fmt_f64(row.bound.unwrap_or_default()),
            s.info.k
        );
    }
    out
}

fn proportion_line(p: &Proportion) -> String {
    format!(
        "{:<40} {:>8}/{:<8} {} [{}, {}]",
        p.label,
        p.successes,
        p.n,
        fmt_f64(p.estimate),
        fmt_f64(p.lower),
        fmt_f64(p.upper)
    )
}

fn csv(s: &SummaryStats) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "name", "value", "lower", "upper"])?;
    for (key, value) in s.info.entries() {
        let section = if key == "rng" { "rng" } else { "config" };
        w.write_record([section, key, value.as_str(), "", ""])?;
    }
    w.write_record(["config", "records", s.n.to_string().as_str(), "", ""])?;
    for m in &s.metrics {
        let mut row = |stat: String, v: f64| {
            w.write_record([
                "metric",
                format!("{}.{stat}", m.name).as_str(),
                fmt_f64(v).as_str(),
                "",
                "",
            ])
        };
        row("mean".into(), m.mean)?;
        row("min".into(), m.min)?;
        row("max".into(), m.max)?;
        for (level, q) in &m.quantiles {
            row(format!("q{:02}", (level * 100.0).round() as u32), *q)?;
        }
    }
    for p in s.ratio_tails.iter().chain([&s.lemma1, &s.full_coverage]) {
        w.write_record([
            "probability",
            p.label.as_str(),
            fmt_f64(p.estimate).as_str(),
            fmt_f64(p.lower).as_str(),
            fmt_f64(p.upper).as_str(),
        ])?;
    }
    for row in &s.bounds {
        let bound = row.bound.map_or(String::new(), fmt_f64);
        w.write_record(["bound", row.bound_name, bound.as_str(), "", ""])?;
        w.write_record([
            "bound_empirical",
            row.bound_name,
            fmt_f64(row.empirical.estimate).as_str(),
            fmt_f64(row.empirical.lower).as_str(),
            fmt_f64(row.empirical.upper).as_str(),
        ])?;
        if row.vacuous() {
            w.write_record(["vacuous", row.bound_name, bound.as_str(), "", ""])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, summarize, ExperimentConfig};

    fn summary(k: usize) -> SummaryStats {
        let cfg = ExperimentConfig {
            k,
            trials: 200,
            master_seed: 5,
            ..Default::default()
        };
        summarize(&run_experiment(&cfg).unwrap(), &cfg.run_info()).unwrap()
    }

    #[test]
    fn byte_stable() {
        let s = summary(10);
        for f in [ReportFormat::Text, ReportFormat::Csv] {
            assert_eq!(report(&s, f).unwrap(), report(&s, f).unwrap());
        }
    }

    #[test]
    fn csv_numbers_parse_back() {
        let s = summary(10);
        let doc = report(&s, ReportFormat::Csv).unwrap();
        let mut reader = csv::Reader::from_reader(doc.as_bytes());
        let mut found = 0;
        for row in reader.records() {
            let row = row.unwrap();
            if &row[0] == "metric" && &row[1] == "ratio_discrete.mean" {
                let v: f64 = row[2].parse().unwrap();
                let want = s.metrics[2].mean;
                assert!((v - want).abs() <= 1e-12 * want.abs());
                found += 1;
            }
            if &row[0] == "probability" && &row[1] == "P[lemma1_event]" {
                let v: f64 = row[2].parse().unwrap();
                assert!((v - s.lemma1.estimate).abs() <= 1e-12);
                found += 1;
            }
        }
        assert_eq!(found, 2);
    }

    #[test]
    fn vacuous_bounds_are_flagged() {
        // 2√k·2^(-k/300) ≥ 1 at k = 10
        let s = summary(10);
        let text = report(&s, ReportFormat::Text).unwrap();
        assert!(text.contains("VACUOUS: main_theorem bound"), "{text}");
        let csv = report(&s, ReportFormat::Csv).unwrap();
        assert!(csv.contains("vacuous,main_theorem,"));
        assert!(text.contains(crate::seeding::RNG_ID));
    }
}
