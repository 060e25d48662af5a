//! Rendering of risk reports: ratio tables, mean-max table, flat CSV and a
//! lossless JSON dump.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::DataError;
use crate::market::ScenarioKind;
use crate::montecarlo::{DealerRisk, EpsilonSamples, RiskReport, ScenarioRisk};

pub const RATIO_TABLES_FILE: &str = "ratio_tables.txt";
pub const MEAN_MAX_FILE: &str = "mean_max.txt";
pub const REPORT_CSV_FILE: &str = "report.csv";
pub const DUMP_FILE: &str = "report.json";
pub const HISTOGRAM_FILE: &str = "histograms.csv";
pub const EPSILON_FILE: &str = "exposure_reductions.csv";

/// `x` rounded to `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - magnitude;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let factor = 10f64.powi(-decimals);
        format!("{:.0}", (x / factor).round() * factor)
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(|v| format_sig(v, 6)).unwrap_or_else(|| "-".into())
}

fn opt_full(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn metadata_lines(report: &RiskReport, prefix: &str) -> String {
    let m = &report.metadata;
    let mut s = String::new();
    let _ = writeln!(s, "{prefix}seed: {}", m.seed);
    let _ = writeln!(s, "{prefix}paths: {}", m.n_paths);
    let _ = writeln!(s, "{prefix}level: {}", m.level);
    let _ = writeln!(s, "{prefix}correlation: {:?}", m.correlation);
    let marginals: Vec<String> = m.marginals.iter().map(|(c, mg)| format!("{c}={}", mg.label())).collect();
    let _ = writeln!(s, "{prefix}marginals: {}", marginals.join(", "));
    for note in &m.notes {
        let _ = writeln!(s, "{prefix}{note}");
    }
    s
}

fn cleared_scenarios(report: &RiskReport) -> Vec<&ScenarioRisk> {
    report.scenarios.iter().filter(|s| s.kind != ScenarioKind::NoCcp).collect()
}

/// Dealer-by-scenario ratios to the no-CCP base for EE, VaR and ES.
pub fn render_ratio_tables(report: &RiskReport) -> String {
    let mut out = metadata_lines(report, "# ");
    let scenarios = cleared_scenarios(report);
    let width = report.dealers.iter().map(|d| d.len()).max().unwrap_or(6).max(6);
    let pct = format!("{}", report.metadata.level * 100.0);
    type Measure = fn(&DealerRisk) -> Option<f64>;
    let measures: [(&str, Measure); 3] = [
        ("Expected exposure", |d| d.ee_ratio),
        ("Value at risk", |d| d.var_ratio),
        ("Expected shortfall", |d| d.es_ratio),
    ];
    for (title, get) in measures {
        let label = if title == "Expected exposure" { title.to_string() } else { format!("{title} ({pct}%)") };
        let _ = writeln!(out, "\n{label}, ratio to no-CCP");
        let _ = write!(out, "{:<width$}", "dealer");
        for s in &scenarios {
            let _ = write!(out, " {:>12}", s.name);
        }
        out.push('\n');
        for (i, dealer) in report.dealers.iter().enumerate() {
            let _ = write!(out, "{dealer:<width$}");
            for s in &scenarios {
                let cell = &s.dealers[i];
                let flag = if title != "Expected exposure" && cell.low_confidence { "*" } else { "" };
                let _ = write!(out, " {:>12}", format!("{}{flag}", opt_sig(get(cell))));
            }
            out.push('\n');
        }
        if title == "Expected exposure" {
            let _ = write!(out, "{:<width$}", "Total");
            for s in &scenarios {
                let _ = write!(out, " {:>12}", opt_sig(s.total_ee_ratio));
            }
            out.push('\n');
            if scenarios.iter().any(|s| s.analytic_total_ee.is_some()) {
                let base = report.scenarios.iter().find(|s| s.kind == ScenarioKind::NoCcp);
                let _ = write!(out, "{:<width$}", "Total (closed form)");
                for s in &scenarios {
                    let r = match (s.analytic_total_ee, base.and_then(|b| b.analytic_total_ee)) {
                        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                        _ => None,
                    };
                    let _ = write!(out, " {:>12}", opt_sig(r));
                }
                out.push('\n');
            }
        }
    }
    if report
        .scenarios
        .iter()
        .any(|s| s.dealers.iter().any(|d| d.low_confidence))
    {
        let _ = writeln!(out, "\n* fewer than {} tail samples", crate::montecarlo::MIN_TAIL_COUNT);
    }
    out
}

/// Average over paths of the largest dealer exposure, millions.
pub fn render_mean_max(report: &RiskReport) -> String {
    let mut out = metadata_lines(report, "# ");
    let _ = writeln!(out, "\n{:<12} {:>14} {:>12} {:>10}", "scenario", "mean_max", "std_error", "ratio");
    for s in &report.scenarios {
        let _ = writeln!(
            out,
            "{:<12} {:>14} {:>12} {:>10}",
            s.name,
            format_sig(s.mean_max, 6),
            format_sig(s.mean_max_std_error, 6),
            opt_sig(s.mean_max_ratio)
        );
    }
    out
}

/// `dealer,scenario,measure,value,ratio_to_base,std_error` at full precision.
pub fn render_csv(report: &RiskReport) -> Result<String, DataError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["dealer", "scenario", "measure", "value", "ratio_to_base", "std_error"])?;
    let base = report.scenarios.iter().find(|s| s.kind == ScenarioKind::NoCcp);
    for s in &report.scenarios {
        for (i, dealer) in report.dealers.iter().enumerate() {
            let d = &s.dealers[i];
            w.write_record([dealer, &s.name, "ee", &d.ee.to_string(), &opt_full(d.ee_ratio), &d.ee_std_error.to_string()])?;
            w.write_record([dealer, &s.name, "var", &d.var.to_string(), &opt_full(d.var_ratio), ""])?;
            w.write_record([dealer, &s.name, "es", &d.es.to_string(), &opt_full(d.es_ratio), ""])?;
            if let Some(a) = &s.analytic_ee {
                let b = base.and_then(|b| b.analytic_ee.as_ref()).map(|b| b[i]);
                let r = b.filter(|b| *b > 0.0).map(|b| a[i] / b);
                w.write_record([dealer, &s.name, "ee_analytic", &a[i].to_string(), &opt_full(r), ""])?;
            }
        }
        w.write_record([
            "TOTAL",
            &s.name,
            "ee",
            &s.total_ee.to_string(),
            &opt_full(s.total_ee_ratio),
            &s.total_ee_std_error.to_string(),
        ])?;
        if let Some(a) = s.analytic_total_ee {
            let r = base.and_then(|b| b.analytic_total_ee).filter(|b| *b > 0.0).map(|b| a / b);
            w.write_record(["TOTAL", &s.name, "ee_analytic", &a.to_string(), &opt_full(r), ""])?;
        }
        w.write_record([
            "MAX",
            &s.name,
            "mean_max",
            &s.mean_max.to_string(),
            &opt_full(s.mean_max_ratio),
            &s.mean_max_std_error.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| DataError::Invalid(e.to_string()))?;
    let mut out = metadata_lines(report, "# ");
    out.push_str(&String::from_utf8(bytes).map_err(|e| DataError::Invalid(e.to_string()))?);
    Ok(out)
}

/// Histogram bins as `scenario,dealer,bin_lower,bin_upper,count`; all
/// dealers are bundled, so `dealer` is `all`.
pub fn render_histograms(report: &RiskReport) -> Result<String, DataError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "dealer", "bin_lower", "bin_upper", "count"])?;
    for h in &report.histograms {
        for (b, count) in h.counts.iter().enumerate() {
            w.write_record([
                h.label.as_str(),
                "all",
                &h.edges[b].to_string(),
                &h.edges[b + 1].to_string(),
                &count.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| DataError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DataError::Invalid(e.to_string()))
}

/// Raw `e^0 - e^n` values as `scenario,dealer,value`.
pub fn write_epsilon_csv(samples: &EpsilonSamples, path: &Path) -> Result<(), DataError> {
    let file = std::fs::File::create(path).map_err(|e| DataError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["scenario", "dealer", "value"])?;
    let n = samples.dealers.len();
    for (name, values) in samples.scenarios.iter().zip(&samples.values) {
        for (idx, v) in values.iter().enumerate() {
            w.write_record([name.as_str(), samples.dealers[idx % n].as_str(), &v.to_string()])?;
        }
    }
    w.flush().map_err(|e| DataError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn to_json(report: &RiskReport) -> Result<String, DataError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn read_dump(path: &Path) -> Result<RiskReport, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, DataError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| DataError::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

/// Writes ratio tables, mean-max table, flat CSV, JSON dump and (when
/// present) histograms into `dir`.
pub fn write_report(report: &RiskReport, dir: &Path) -> Result<Vec<PathBuf>, DataError> {
    std::fs::create_dir_all(dir).map_err(|e| DataError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files = vec![
        write_file(dir, RATIO_TABLES_FILE, &render_ratio_tables(report))?,
        write_file(dir, MEAN_MAX_FILE, &render_mean_max(report))?,
        write_file(dir, REPORT_CSV_FILE, &render_csv(report)?)?,
        write_file(dir, DUMP_FILE, &to_json(report)?)?,
    ];
    if !report.histograms.is_empty() {
        files.push(write_file(dir, HISTOGRAM_FILE, &render_histograms(report)?)?);
    }
    Ok(files)
}
