use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plot::{line_plot_svg, Series};
use super::realization::{arch_dir, read_json, write_json, ArchResult, METRICS_FILE};
use super::sweep::{SweepKind, SweepPlan, PLAN_FILE};
use crate::{Arch, Error, Result};

pub const CSV_FILE: &str = "realizations.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// One line of `realizations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub sweep_value: usize,
    pub arch: Arch,
    pub realization: usize,
    pub auc: f64,
    pub balanced_accuracy: f64,
    pub closed_set_accuracy: Option<f64>,
    pub gamma_summary: Option<f64>,
    pub n_params: usize,
}

/// Mean, sample standard deviation and range of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    /// `std` uses the `n - 1` denominator and is 0 for a single value.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // summation rounding can push the mean of equal values past them
        let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, min, max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: usize,
    pub arch: Arch,
    pub n_realizations: usize,
    pub auc: Stat,
    pub balanced_accuracy: Stat,
    pub closed_set_accuracy: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub sweep: SweepKind,
    pub parameter: String,
    pub rows: Vec<SummaryRow>,
    pub notes: Vec<String>,
}

impl SummaryTable {
    pub fn row(&self, sweep_value: usize, arch: Arch) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.arch == arch)
    }
}

/// Groups rows by `(sweep_value, arch)` in first-appearance order.
pub fn summarize(kind: SweepKind, rows: &[CsvRow]) -> SummaryTable {
    let mut keys: Vec<(usize, Arch)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.sweep_value, r.arch)) {
            keys.push((r.sweep_value, r.arch));
        }
    }
    let out = keys
        .into_iter()
        .map(|(v, a)| {
            let group: Vec<&CsvRow> = rows.iter().filter(|r| r.sweep_value == v && r.arch == a).collect();
            let pick = |f: &dyn Fn(&CsvRow) -> Option<f64>| -> Vec<f64> { group.iter().filter_map(|r| f(r)).collect() };
            SummaryRow {
                sweep_value: v,
                arch: a,
                n_realizations: group.len(),
                auc: Stat::of(&pick(&|r| Some(r.auc))).expect("nonempty group"),
                balanced_accuracy: Stat::of(&pick(&|r| Some(r.balanced_accuracy))).expect("nonempty group"),
                closed_set_accuracy: Stat::of(&pick(&|r| r.closed_set_accuracy)),
            }
        })
        .collect::<Vec<_>>();
    let mut notes = vec![
        "std is the sample standard deviation over realizations".to_string(),
        "balanced_accuracy is the mean of the authorized acceptance rate and the outlier rejection rate".to_string(),
    ];
    if rows.iter().any(|r| r.arch == Arch::DClass) {
        notes.push("dclass has no threshold; its AUC scans the outlier-class probability".into());
    }
    SummaryTable {
        sweep: kind,
        parameter: kind.parameter().into(),
        rows: out,
        notes,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sweep_value",
        "arch",
        "realization",
        "auc",
        "balanced_accuracy",
        "closed_set_accuracy",
        "gamma_summary",
        "n_params",
    ])?;
    for r in rows {
        w.write_record([
            r.sweep_value.to_string(),
            r.arch.to_string(),
            r.realization.to_string(),
            r.auc.to_string(),
            r.balanced_accuracy.to_string(),
            fmt_opt(r.closed_set_accuracy),
            fmt_opt(r.gamma_summary),
            r.n_params.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::Input(format!("csv buffer: {e}")))
}

/// Parses a `realizations.csv` written by [`report`].
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::MissingData(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::MissingData(format!("bad number `{}` in {}", field(i), path.display())))
        };
        let opt = |i: usize| -> Result<Option<f64>> { if field(i).is_empty() { Ok(None) } else { num(i).map(Some) } };
        let int = |i: usize| -> Result<usize> {
            field(i)
                .parse()
                .map_err(|_| Error::MissingData(format!("bad integer `{}` in {}", field(i), path.display())))
        };
        rows.push(CsvRow {
            sweep_value: int(0)?,
            arch: field(1).parse()?,
            realization: int(2)?,
            auc: num(3)?,
            balanced_accuracy: num(4)?,
            closed_set_accuracy: opt(5)?,
            gamma_summary: opt(6)?,
            n_params: int(7)?,
        });
    }
    Ok(rows)
}

fn collect_rows(dir: &Path, plan: &SweepPlan) -> Result<Vec<CsvRow>> {
    let mut rows = Vec::new();
    for point in &plan.points {
        for &arch in &plan.archs {
            for r in 0..plan.n_realizations {
                let path = arch_dir(&plan.realization_dir(dir, point, r), arch).join(METRICS_FILE);
                let m: ArchResult = read_json(&path)?;
                let in_unit = |v: f64| (0.0..=1.0).contains(&v);
                if m.arch != arch || !in_unit(m.auc) || !in_unit(m.balanced_accuracy) {
                    return Err(Error::MissingData(format!("{} is inconsistent", path.display())));
                }
                rows.push(CsvRow {
                    sweep_value: point.value,
                    arch,
                    realization: r,
                    auc: m.auc,
                    balanced_accuracy: m.balanced_accuracy,
                    closed_set_accuracy: m.closed_set_accuracy,
                    gamma_summary: m.gamma_summary(),
                    n_params: m.param_count,
                });
            }
        }
    }
    Ok(rows)
}

fn figure(table: &SummaryTable, metric: &str, pick: fn(&SummaryRow) -> Stat) -> String {
    let mut archs: Vec<Arch> = Vec::new();
    for r in &table.rows {
        if !archs.contains(&r.arch) {
            archs.push(r.arch);
        }
    }
    let series: Vec<Series> = archs
        .iter()
        .map(|&a| Series {
            name: a.to_string(),
            points: table
                .rows
                .iter()
                .filter(|r| r.arch == a)
                .map(|r| {
                    let s = pick(r);
                    (r.sweep_value as f64, s.mean, s.std)
                })
                .collect(),
        })
        .collect();
    line_plot_svg(&format!("{metric} vs {}", table.parameter), &table.parameter, metric, &series)
}

/// Builds `realizations.csv`, `summary.json`, `fig_auc.svg` and
/// `fig_acc.svg` in a sweep directory.
///
/// Every input is read and checked before anything is written, so a
/// missing or corrupt result leaves the directory untouched.
pub fn report(dir: &Path) -> Result<SummaryTable> {
    let plan_path = dir.join(PLAN_FILE);
    if !plan_path.exists() {
        return Err(Error::MissingData(format!("no sweep results in {}", dir.display())));
    }
    let plan: SweepPlan = read_json(&plan_path)?;
    let rows = collect_rows(dir, &plan)?;
    if rows.is_empty() {
        return Err(Error::MissingData(format!("sweep in {} has no results", dir.display())));
    }
    let table = summarize(plan.kind, &rows);
    let csv = write_csv(&rows)?;
    let auc_svg = figure(&table, "auc", |r| r.auc);
    let acc_svg = figure(&table, "balanced_accuracy", |r| r.balanced_accuracy);

    let put = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    };
    put(CSV_FILE, &csv)?;
    write_json(&dir.join(SUMMARY_FILE), &table)?;
    put("fig_auc.svg", auc_svg.as_bytes())?;
    put("fig_acc.svg", acc_svg.as_bytes())?;
    Ok(table)
}
