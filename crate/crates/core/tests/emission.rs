use std::f64::consts::PI;

use metrolab::experiments::{
    emit_results, monte_carlo_mse, render, scenario_row, sweep_scaling, Emittable, OutputFormat, Scenario,
    ScenarioKind, ScenarioParams, CSV_HEADER,
};

fn zero_n(n: usize) -> Scenario {
    Scenario::new(ScenarioKind::ZeroNSuperposition, ScenarioParams { n: Some(n), ..Default::default() }).unwrap()
}

#[test]
fn single_report_is_header_plus_row() {
    let row = scenario_row(&zero_n(2), 1).unwrap();
    let csv = render(Emittable::Row(&row), OutputFormat::Csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, [CSV_HEADER, "zero-n-superposition,2,2.0000000000000004,nan,16,16,0.25,0.49999999999999989,0.25,0.78539816339744806,0.50000000000000011"]);
}

#[test]
fn sweep_csv_has_slope_trailer() {
    let sweep = sweep_scaling(&zero_n(2), &[2.0, 4.0, 8.0, 16.0], 1).unwrap();
    let csv = render(Emittable::Sweep(&sweep), OutputFormat::Csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], CSV_HEADER);
    let slope: f64 = lines[5].strip_prefix("# slope=").unwrap().parse().unwrap();
    assert_eq!(slope, sweep.fitted_slope);
    // Every cell parses back to the value it came from.
    for (line, row) in lines[1..5].iter().zip(&sweep.rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 11);
        assert_eq!(cells[1].parse::<f64>().unwrap(), row.size);
        assert_eq!(cells[6].parse::<f64>().unwrap(), row.report.value("delta_phi_ep"));
    }
}

#[test]
fn json_shape() {
    let sweep = sweep_scaling(&zero_n(2), &[2.0, 4.0, 8.0, 16.0], 1).unwrap();
    let v: serde_json::Value = serde_json::from_str(&render(Emittable::Sweep(&sweep), OutputFormat::Json)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["fitted_slope"].as_f64().unwrap(), sweep.fitted_slope);
    let keys: Vec<&str> = v["rows"][0].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.join(","), CSV_HEADER);
}

#[test]
fn json_marks_failed_fields() {
    let s =
        Scenario::new(ScenarioKind::KerrCoherent, ScenarioParams { alpha: Some(0.0), ..Default::default() }).unwrap();
    let row = scenario_row(&s, 1).unwrap();
    let v: serde_json::Value = serde_json::from_str(&render(Emittable::Row(&row), OutputFormat::Json)).unwrap();
    let r = &v["rows"][0];
    assert_eq!(r["heisenberg_eq8"], "nan");
    assert!(r["heisenberg_eq8_err"].as_str().unwrap().starts_with("NoResourceError"));
    assert!(r.get("qfi_err").is_none());
    let csv = render(Emittable::Row(&row), OutputFormat::Csv);
    assert!(!csv.contains("_err"));
}

#[test]
fn monte_carlo_emission_and_file_output() {
    let s = Scenario::new(ScenarioKind::GhzRamsey, ScenarioParams { n: Some(2), ..Default::default() }).unwrap();
    let mc = monte_carlo_mse(&s, PI / 8.0, 1000, 10, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.json");
    emit_results(Emittable::MonteCarlo(&mc), OutputFormat::Json, &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["estimates"].as_array().unwrap().len(), 10);
    assert_eq!(v["mse"].as_f64().unwrap(), mc.mse);
    let csv = render(Emittable::MonteCarlo(&mc), OutputFormat::Csv);
    assert_eq!(csv.lines().count(), 2);
}
