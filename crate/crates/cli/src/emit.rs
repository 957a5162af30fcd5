//! Rendering a bundle to `summary.json` plus CSV files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use koblab_core::{Cell, Table, VisibilityVerdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::run::ReportBundle;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedFile {
    pub name: String,
    pub contents: String,
}

fn verdict_table(v: &VisibilityVerdict) -> Table {
    let mut cols = vec!["n".to_string()];
    cols.extend(v.lambda.iter().map(|l| format!("eps_emp_lambda_{l}")));
    cols.push("max_bdry_dist".into());
    cols.extend(v.ladder.iter().map(|r| format!("hits_floor_{r}")));
    cols.push("length_upper".into());
    let mut t = Table { columns: cols, rows: Vec::new() };
    for r in &v.per_n {
        let mut row: Vec<Cell> = vec![r.n.into()];
        row.extend(r.eps_emp.iter().map(|&e| Cell::from(e)));
        row.push(r.max_bdry_dist.into());
        row.extend(r.floors_hit.iter().map(|&h| Cell::from(usize::from(h))));
        row.push(r.length_upper.into());
        t.rows.push(row);
    }
    t
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    seed: u64,
    violated: bool,
    plan: &'a crate::ExperimentPlan,
    graphs: &'a [crate::run::LabeledGraph],
    reports: Vec<Value>,
    visibility: Vec<Value>,
    curves: Vec<Value>,
}

/// Files in emission order; `summary.json` comes last.
pub fn render_bundle(bundle: &ReportBundle) -> Vec<RenderedFile> {
    let plan = &bundle.plan;
    let exp = plan.experiment.as_str();
    let mut files = Vec::new();
    let next = |contents: String, files: &mut Vec<RenderedFile>| {
        let name = format!("{exp}-{}-{}.csv", plan.seed, files.len());
        files.push(RenderedFile { name: name.clone(), contents });
        name
    };
    let mut reports = Vec::new();
    for r in &bundle.reports {
        let file = (!r.records.rows.is_empty()).then(|| next(r.records.to_csv(), &mut files));
        let mut v = serde_json::to_value(r).expect("report serializes");
        let obj = v.as_object_mut().expect("report is an object");
        obj.remove("records");
        obj.insert("file".into(), json!(file));
        reports.push(v);
    }
    let mut visibility = Vec::new();
    for lv in &bundle.visibility {
        let file = (!lv.verdict.per_n.is_empty()).then(|| next(verdict_table(&lv.verdict).to_csv(), &mut files));
        let mut v = serde_json::to_value(lv).expect("verdict serializes");
        let obj = v.as_object_mut().expect("verdict is an object");
        obj.remove("per_n");
        obj.insert("file".into(), json!(file));
        visibility.push(v);
    }
    let mut curves = Vec::new();
    for c in &bundle.curves {
        let file = next(c.curve.to_csv(), &mut files);
        let mut m = BTreeMap::new();
        m.insert("label", json!(c.label));
        m.insert("file", json!(file));
        m.insert("vertices", json!(c.curve.len()));
        m.insert("length_upper", json!(c.curve.total_length()));
        curves.push(json!(m));
    }
    let summary = Summary {
        experiment: exp,
        seed: plan.seed,
        violated: bundle.violated(),
        plan,
        graphs: &bundle.graphs,
        reports,
        visibility,
        curves,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    files.push(RenderedFile { name: "summary.json".into(), contents: text });
    files
}

/// Writes the rendered bundle into `dir`, creating it when missing.
pub fn emit_reports(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path, source| CliError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for f in render_bundle(bundle) {
        let path = dir.join(&f.name);
        std::fs::write(&path, f.contents.as_bytes()).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
