//! Fixed-format serialization of runs: CSV for plots and golden tests,
//! versioned JSON for full fidelity.
//!
//! Column orders are frozen; floats print in shortest round-trip form so
//! identical runs yield byte-identical files. Vacuous bound entries print
//! as NaN; points without diagnostics leave those cells empty.

use crate::continuation::{Path, PathPoint};
use crate::fold::FoldDiagnostics;
use crate::gmres::GmresTrace;
use crate::newton::NewtonResult;

/// Schema version stamped into every JSON artifact.
pub const JSON_SCHEMA_VERSION: u32 = 1;

/// Fixed column order of the per-point diagnostics block.
pub const DIAGNOSTIC_COLUMNS: [&str; 9] =
    ["sigma_N", "sigma_Nminus1", "gap", "proj", "xi", "alpha", "tau", "bound", "actual"];

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn diag_cells(d: &FoldDiagnostics) -> Vec<String> {
    let bound = d.sigma_min_fx_bound.value().unwrap_or(f64::NAN);
    vec![
        fmt(d.sigma_n),
        fmt(d.sigma_n_minus_1),
        fmt(d.gap),
        fmt(d.proj),
        fmt(d.xi),
        fmt(d.alpha),
        fmt(d.tau),
        fmt(bound),
        fmt(d.sigma_min_fx_actual),
    ]
}

/// One diagnostics CSV row: s, lambda, then the diagnostic block.
pub fn diagnostics_csv_row(s: f64, lambda: f64, d: &FoldDiagnostics) -> String {
    let mut cells = vec![fmt(s), fmt(lambda)];
    cells.extend(diag_cells(d));
    cells.join(",")
}

/// Diagnostics CSV for a whole path (points without diagnostics are
/// skipped).
pub fn diagnostics_csv(path: &Path) -> String {
    let mut out = String::from("s,lambda,");
    out.push_str(&DIAGNOSTIC_COLUMNS.join(","));
    out.push('\n');
    for pt in &path.points {
        if let Some(d) = &pt.diagnostics {
            out.push_str(&diagnostics_csv_row(pt.s, pt.lambda, d));
            out.push('\n');
        }
    }
    out
}

fn path_csv_row(pt: &PathPoint) -> String {
    let mut cells = vec![fmt(pt.s), fmt(pt.lambda), fmt(pt.functional)];
    match &pt.diagnostics {
        Some(d) => cells.extend(diag_cells(d)),
        None => cells.extend(std::iter::repeat(String::new()).take(DIAGNOSTIC_COLUMNS.len())),
    }
    cells.join(",")
}

/// Path CSV: s, lambda, the problem functional, then the diagnostic block.
pub fn path_csv(path: &Path) -> String {
    let mut out = String::from("s,lambda,functional,");
    out.push_str(&DIAGNOSTIC_COLUMNS.join(","));
    out.push('\n');
    for pt in &path.points {
        out.push_str(&path_csv_row(pt));
        out.push('\n');
    }
    out
}

/// GMRES trace CSV: iteration, residual_norm.
pub fn gmres_trace_csv(trace: &GmresTrace) -> String {
    let mut out = String::from("iteration,residual_norm\n");
    for (i, r) in trace.residual_norms.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt(*r)));
    }
    out
}

/// Singular-value tail CSV: index, sigma.
pub fn singular_values_csv(values: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt(*v)));
    }
    out
}

#[derive(serde::Serialize)]
struct Versioned<'a, T: serde::Serialize> {
    schema: u32,
    #[serde(flatten)]
    payload: Wrapper<'a, T>,
}

#[derive(serde::Serialize)]
struct Wrapper<'a, T: serde::Serialize> {
    #[serde(rename = "data")]
    inner: &'a T,
}

/// Pretty JSON with the schema version stamped at the top.
pub fn to_versioned_json<T: serde::Serialize>(value: &T) -> String {
    let v = Versioned { schema: JSON_SCHEMA_VERSION, payload: Wrapper { inner: value } };
    serde_json::to_string_pretty(&v).expect("serialization of plain data cannot fail")
}

/// Full-fidelity JSON of a path.
pub fn path_json(path: &Path) -> String {
    to_versioned_json(path)
}

/// JSON of one Newton run (per-step residuals and inner iteration counts).
pub fn newton_result_json(result: &NewtonResult) -> String {
    to_versioned_json(result)
}
