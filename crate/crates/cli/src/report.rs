//! Reports and their human and machine renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::spec::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub file: String,
    pub name: String,
    pub kind: String,
    pub tolerance: f64,
}

/// One checked invariant. `residual` is absent for exact (boolean) checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub input: String,
    pub check: String,
    pub residual: Option<f64>,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputEcho>,
    pub results: BTreeMap<String, Value>,
    pub verdicts: Vec<VerdictEntry>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { schema_version: SCHEMA_VERSION, command: command.into(), inputs: Vec::new(), results: BTreeMap::new(), verdicts: Vec::new() }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.passed).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Human => render_human(report),
    }
}

pub fn parse_machine(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

fn render_human(report: &Report) -> String {
    let mut out = String::new();
    writeln!(out, "{} (schema {})", report.command, report.schema_version).unwrap();
    if !report.inputs.is_empty() {
        let rows: Vec<Vec<String>> = report
            .inputs
            .iter()
            .map(|i| vec![i.name.clone(), i.kind.clone(), i.file.clone(), format!("{:.1e}", i.tolerance)])
            .collect();
        out.push_str("\ninputs\n");
        table(&mut out, 1, &["name", "kind", "file", "tol"], &rows);
    }
    for (key, value) in &report.results {
        writeln!(out, "\n{key}").unwrap();
        value_lines(&mut out, 1, value);
    }
    if !report.verdicts.is_empty() {
        let rows: Vec<Vec<String>> = report
            .verdicts
            .iter()
            .map(|v| {
                vec![
                    v.input.clone(),
                    v.check.clone(),
                    v.residual.map_or("-".into(), |r| format!("{r:.3e}")),
                    format!("{:.1e}", v.tol),
                    if v.passed { "pass" } else { "FAIL" }.into(),
                ]
            })
            .collect();
        out.push_str("\nverdicts\n");
        table(&mut out, 1, &["input", "check", "residual", "tol", "status"], &rows);
        writeln!(out, "\n{} checks, {} failed", report.verdicts.len(), report.failures()).unwrap();
    }
    out
}

fn indent(level: usize) -> String {
    "  ".repeat(level)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().unwrap()),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(_) => "{..}".into(),
    }
}

fn is_scalar(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| !i.is_array() && !i.is_object()),
        Value::Object(_) => false,
        _ => true,
    }
}

/// Arrays of flat objects sharing one key set render as tables.
fn as_table(items: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = items.first()?.as_object()?;
    let keys: Vec<String> = first.keys().cloned().collect();
    let mut rows = Vec::new();
    for item in items {
        let obj = item.as_object()?;
        if obj.len() != keys.len() || !obj.values().all(is_scalar) {
            return None;
        }
        rows.push(keys.iter().map(|k| obj.get(k).map(scalar)).collect::<Option<Vec<_>>>()?);
    }
    Some((keys, rows))
}

fn complex_entry(v: &Value) -> Option<String> {
    match v.as_array()?.as_slice() {
        [re, im] => {
            let (re, im) = (re.as_f64()?, im.as_f64()?);
            let sign = if im.is_sign_negative() { '-' } else { '+' };
            Some(format!("{re:.4e}{sign}{:.4e}i", im.abs()))
        }
        _ => None,
    }
}

/// Rows of `[re, im]` pairs render as a matrix.
fn complex_matrix(items: &[Value]) -> Option<Vec<Vec<String>>> {
    if items.is_empty() {
        return None;
    }
    items.iter().map(|row| row.as_array()?.iter().map(complex_entry).collect()).collect()
}

fn value_lines(out: &mut String, level: usize, value: &Value) {
    if let Some(rows) = value.as_array().and_then(|items| complex_matrix(items)) {
        let width = rows.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(out, "{}{}", indent(level), cells.join("  ")).unwrap();
        }
        return;
    }
    match value {
        Value::Object(map) => {
            let width = map.keys().filter(|k| is_scalar(&map[*k])).map(|k| k.len()).max().unwrap_or(0);
            for (k, v) in map {
                if is_scalar(v) {
                    writeln!(out, "{}{k:<width$}  {}", indent(level), scalar(v)).unwrap();
                }
            }
            for (k, v) in map {
                if !is_scalar(v) {
                    writeln!(out, "{}{k}", indent(level)).unwrap();
                    value_lines(out, level + 1, v);
                }
            }
        }
        Value::Array(items) => match as_table(items) {
            Some((keys, rows)) => {
                let headers: Vec<&str> = keys.iter().map(String::as_str).collect();
                table(out, level, &headers, &rows);
            }
            None => {
                for (i, item) in items.iter().enumerate() {
                    if is_scalar(item) {
                        writeln!(out, "{}{i}  {}", indent(level), scalar(item)).unwrap();
                    } else {
                        writeln!(out, "{}[{i}]", indent(level)).unwrap();
                        value_lines(out, level + 1, item);
                    }
                }
            }
        },
        other => writeln!(out, "{}{}", indent(level), scalar(other)).unwrap(),
    }
}

fn table(out: &mut String, level: usize, headers: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("{}{}", indent(level), padded.join("  ").trim_end())
    };
    writeln!(out, "{}", line(headers.to_vec())).unwrap();
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect())).unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut r = Report::new("sectors");
        r.inputs.push(InputEcho { file: "a.json".into(), name: "a".into(), kind: "state".into(), tolerance: 1e-9 });
        r.results.insert(
            "a".into(),
            json!({"sectors": [{"sector": 1, "dim": 2, "weight": 0.3}, {"sector": 2, "dim": 3, "weight": 0.7000000000000001}],
                   "ambient_dim": 5}),
        );
        r.verdicts.push(VerdictEntry { input: "a".into(), check: "weights_sum".into(), residual: Some(1.1e-16), tol: 1e-9, passed: true });
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(render_report(&Report::new("verify"), Format::Human), "verify (schema 1)\n");
    }

    #[test]
    fn machine_round_trip() {
        let r = sample();
        let text = render_report(&r, Format::Machine);
        let back = parse_machine(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(render_report(&back, Format::Machine), text);
    }

    #[test]
    fn sector_table_is_aligned() {
        let text = render_report(&sample(), Format::Human);
        assert!(text.contains("    dim  sector  weight"));
        assert!(text.contains("    2    1       3.000000e-1"));
        assert!(text.contains("1.100e-16"));
    }
}
