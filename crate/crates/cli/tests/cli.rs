use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wgqed-ssh"));
    c.env_remove("WGQED_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn payload(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let lines = payload(text);
    let i = lines[0].split(',').position(|c| c == name).expect("column present");
    lines[1..].iter().map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

fn numbers(text: &str, name: &str) -> Vec<f64> {
    column(text, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn phase_diagram_default_grid_has_all_rows_and_no_inconsistencies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd.csv");
    let o = run(&["phase-diagram", "--check-analytic", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(payload(&text).len(), 40_001);
    assert_eq!(
        payload(&text)[0],
        "a_over_lambda,b_over_a,nu,defined,delta_phi,min_abs_n"
    );
    let bad = std::fs::read_to_string(dir.path().join("pd.inconsistencies.csv")).unwrap();
    assert_eq!(payload(&bad).len(), 1, "header only");
}

#[test]
fn phase_diagram_nu_is_size_independent_where_defined() {
    let grid = ["--a-count", "60", "--b-count", "60"];
    let small = stdout(&run(&[&["phase-diagram", "-M", "8"][..], &grid].concat()));
    let large = stdout(&run(&[&["phase-diagram", "--M", "100"][..], &grid].concat()));
    let (nu8, d8) = (column(&small, "nu"), column(&small, "defined"));
    let (nu100, d100) = (column(&large, "nu"), column(&large, "defined"));
    let mut compared = 0;
    for k in 0..nu8.len() {
        if d8[k] == "true" && d100[k] == "true" {
            assert_eq!(nu8[k], nu100[k], "row {k}");
            compared += 1;
        }
    }
    assert!(compared > 1000);
}

#[test]
fn chiral_spectrum_gap_closes_at_the_localized_point() {
    let text = stdout(&run(&["spectrum"]));
    let value = numbers(&text, "value");
    let gap = numbers(&text, "mass_gap");
    assert_eq!(value.len(), 201);
    let k = value.iter().position(|&v| (v - 0.4).abs() < 1e-12).unwrap();
    assert!(gap[k] < 1e-12, "gap {}", gap[k]);
    assert!(numbers(&text, "symmetry_defect").iter().all(|&d| d < 1e-10));
}

#[test]
fn nonchiral_spectrum_has_six_fold_kernel() {
    let text = stdout(&run(&["spectrum", "--non-chiral", "--count", "3"]));
    assert_eq!(column(&text, "kernel_dim"), ["0", "6", "0"]);
}

#[test]
fn edge_output_has_fit_columns_and_decaying_populations() {
    let text = stdout(&run(&["edge", "--a", "1.2375", "--b-over-lambda", "0.55"]));
    let pop = numbers(&text, "population");
    assert_eq!(pop.len(), 10);
    assert!((pop.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(pop[1] > pop[3] && pop[3] > pop[5]);
    assert!(numbers(&text, "xi_fit")[0].is_finite());
    assert!(numbers(&text, "xi_approx")[0].is_finite());
}

#[test]
fn single_atom_survival_is_exponential() {
    let text = stdout(&run(&["dynamics", "--initial", "single-atom", "--samples", "50"]));
    let t = numbers(&text, "t");
    let p = numbers(&text, "p_mean");
    assert_eq!(t.len(), 51);
    for (t, p) in t.iter().zip(&p) {
        assert!((p - (-t).exp()).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn same_config_gives_byte_identical_payload() {
    let args = ["disorder", "--realizations", "50", "--delta-j", "0.02,0.05", "--seed", "7"];
    let a = stdout(&run(&args));
    let b = stdout(&bin().args(args).env("WGQED_WORKERS", "3").output().unwrap());
    assert_eq!(a, b);
    let c = stdout(&run(&["disorder", "--realizations", "50", "--delta-j", "0.02,0.05", "--seed", "8"]));
    assert_ne!(payload(&a), payload(&c));
}

fn replay_matches(format: &str, file: &str) {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join(file);
    let o = run(&[
        "dynamics", "--sigma", "0.02", "--realizations", "20", "--samples", "20", "--format", format,
        "-o", first.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let second = dir.path().join(format!("again.{format}"));
    let o = run(&["--replay", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let strip = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#') && !l.contains("\"output\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn replay_reproduces_csv() {
    replay_matches("csv", "run.csv");
}

#[test]
fn replay_reproduces_json() {
    replay_matches("json", "run.json");
}

#[test]
fn json_envelope_is_versioned() {
    let text = stdout(&run(&["decay", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], "wgqed-ssh/1");
    assert_eq!(v["metadata"]["config"]["sites"], 10);
    assert_eq!(v["payload"]["tables"][0]["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("run.toml");
    std::fs::write(&toml, "sites = 12\nb_over_lambda = 0.5\nsamples = 4\n").unwrap();
    let text = stdout(&run(&["decay", "--config", toml.to_str().unwrap()]));
    assert_eq!(numbers(&text, "rate").len(), 12);
    let text = stdout(&run(&["decay", "--config", toml.to_str().unwrap(), "-M", "6"]));
    assert_eq!(numbers(&text, "rate").len(), 6);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--nope"]).status.code(), Some(2));
    assert_eq!(run(&["phase-diagram", "--a-count", "0"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--b-over-a", "1.5", "--count", "2"]).status.code(), Some(2));
    let o = run(&["edge", "--non-chiral", "--error-json"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "precondition");
    assert_eq!(run(&["--replay", "/nonexistent/file.csv"]).status.code(), Some(1));
}

#[test]
fn plot_flag_and_plot_command_write_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = run(&["spectrum", "--count", "11", "--plot", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join("spec.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 10);

    let pd = dir.path().join("pd.json");
    let o = run(&[
        "phase-diagram", "--a-count", "20", "--b-count", "20", "--format", "json", "-o",
        pd.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let target = dir.path().join("heat.svg");
    let o = run(&["plot", pd.to_str().unwrap(), "-o", target.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(target).unwrap();
    assert!(svg.matches("<rect").count() >= 400);
}

#[test]
fn dynamics_writes_final_occupations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dyn.csv");
    let o = run(&["dynamics", "--samples", "10", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let fin = std::fs::read_to_string(dir.path().join("dyn.final.csv")).unwrap();
    let pop = numbers(&fin, "population");
    assert_eq!(pop.len(), 10);
    // the symmetric edge pair at the default point is dark
    assert!(pop[0] + pop[1] > 0.99);
}
