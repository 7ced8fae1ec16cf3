//! CSV and JSON rendering of reports, sweeps and Monte Carlo runs.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::{MonteCarloResult, SweepResult, SweepRow};
use crate::error::{MetroError, Result};

pub const CSV_HEADER: &str =
    "scenario,size,resource,q,fisher,qfi,delta_phi_ep,heisenberg_eq8,uncertainty_eq9,ml_phase_eq10,ratio_eq8";

const ROW_FIELDS: [&str; 8] =
    ["resource", "fisher", "qfi", "delta_phi_ep", "heisenberg_eq8", "uncertainty_eq9", "ml_phase_eq10", "ratio_eq8"];

const MC_HEADER: &str = "scenario,size,phi_true,t_shots,trials,seed,fisher,crb_at_T,mse";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(MetroError::Schema(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Emittable<'a> {
    Row(&'a SweepRow),
    Sweep(&'a SweepResult),
    MonteCarlo(&'a MonteCarloResult),
}

/// C-style `%.17g`: 17 significant digits, trailing zeros removed,
/// `nan`/`inf` for non-finite values.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_row(row: &SweepRow, out: &mut String) {
    let q = row.q.map_or_else(|| "nan".to_string(), |q| q.to_string());
    let _ = write!(out, "{},{},", row.scenario.name(), format_g17(row.size));
    let mut cells: Vec<String> = ROW_FIELDS.iter().map(|f| format_g17(row.report.value(f))).collect();
    cells.insert(1, q);
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format_g17(x))
    }
}

fn json_row(row: &SweepRow) -> Value {
    let mut obj = Map::new();
    obj.insert("scenario".into(), json!(row.scenario.name()));
    obj.insert("size".into(), json_number(row.size));
    for (i, f) in ROW_FIELDS.iter().enumerate() {
        if i == 1 {
            obj.insert("q".into(), row.q.map_or(json!("nan"), |q| json!(q)));
        }
        obj.insert((*f).into(), json_number(row.report.value(f)));
        if let Some(Err(e)) = row.report.field(f) {
            obj.insert(format!("{f}_err"), json!(e.to_string()));
        }
    }
    Value::Object(obj)
}

/// Renders `item` as the text that [`emit_results`] writes.
pub fn render(item: Emittable<'_>, format: OutputFormat) -> String {
    match (item, format) {
        (Emittable::Row(row), OutputFormat::Csv) => {
            let mut out = format!("{CSV_HEADER}\n");
            csv_row(row, &mut out);
            out
        }
        (Emittable::Sweep(sweep), OutputFormat::Csv) => {
            let mut out = format!("{CSV_HEADER}\n");
            sweep.rows.iter().for_each(|r| csv_row(r, &mut out));
            let _ = writeln!(out, "# slope={}", format_g17(sweep.fitted_slope));
            out
        }
        (Emittable::MonteCarlo(mc), OutputFormat::Csv) => {
            let cells = [
                mc.scenario.name().to_string(),
                format_g17(mc.size),
                format_g17(mc.phi_true),
                mc.t_shots.to_string(),
                mc.trials.to_string(),
                mc.seed.to_string(),
                format_g17(mc.fisher),
                format_g17(mc.crb_at_t),
                format_g17(mc.mse),
            ];
            format!("{MC_HEADER}\n{}\n", cells.join(","))
        }
        (Emittable::Row(row), OutputFormat::Json) => pretty(json!({ "rows": [json_row(row)] })),
        (Emittable::Sweep(sweep), OutputFormat::Json) => pretty(json!({
            "rows": sweep.rows.iter().map(json_row).collect::<Vec<_>>(),
            "fitted_slope": json_number(sweep.fitted_slope),
            "slope_column": sweep.slope_column,
        })),
        (Emittable::MonteCarlo(mc), OutputFormat::Json) => pretty(json!({
            "scenario": mc.scenario.name(),
            "size": json_number(mc.size),
            "phi_true": json_number(mc.phi_true),
            "t_shots": mc.t_shots,
            "trials": mc.trials,
            "seed": mc.seed,
            "fisher": json_number(mc.fisher),
            "crb_at_T": json_number(mc.crb_at_t),
            "mse": json_number(mc.mse),
            "estimates": mc.estimates.iter().map(|&e| json_number(e)).collect::<Vec<_>>(),
        })),
    }
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes `item` to `path` in the requested format.
pub fn emit_results(item: Emittable<'_>, format: OutputFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(item, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        let cases = [
            (0.25, "0.25"),
            (1.0, "1"),
            (16.0, "16"),
            (0.1, "0.10000000000000001"),
            (1.0 / 3.0, "0.33333333333333331"),
            (1e-5, "1.0000000000000001e-05"),
            (1e20, "1e+20"),
            (123456789.0, "123456789"),
            (-2.5e-300, "-2.5e-300"),
            (f64::NAN, "nan"),
            (0.0, "0"),
            (std::f64::consts::PI, "3.1415926535897931"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [1e-300, 0.1 + 0.2, 6.02214076e23, -7.0 / 9.0, 1e16, 12345.678] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
