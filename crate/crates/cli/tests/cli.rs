use std::path::Path;
use std::process::Command;

use vbpbb_cli::output::read_summary_json;

fn vbpbb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vbpbb"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn vbpbb");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn simulate(dir: &Path, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join("series.csv");
    run_ok(vbpbb().arg("simulate").args(args).arg("--out").arg(&path));
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn two_sample_period_gives_two_rows_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), &["--length", "400", "--cosine", "2:1", "--noise-sd", "0.5"]);
    let out = dir.path().join("out");
    run_ok(
        vbpbb()
            .args(["analyze", "--component", "alt:2", "--b", "200"])
            .arg("--input")
            .arg(&input)
            .arg("--out-dir")
            .arg(&out),
    );
    let rows = csv_rows(&out.join("bands.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r[6] == "vbpbb").count(), 2);
    assert_eq!(rows.iter().filter(|r| r[6] == "pbb").count(), 2);
    let header = std::fs::read_to_string(out.join("bands.csv")).unwrap();
    assert!(header.starts_with("component,phase_index,phase_time_hours,lower,median,upper,method\n"));
}

#[test]
fn analyze_outputs_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(
        dir.path(),
        &["--length", "1680", "--cosine", "24:10", "--cosine", "168:5", "--noise-sd", "5", "--seed", "4"],
    );
    let out = dir.path().join("out");
    let stdout = run_ok(
        vbpbb()
            .args(["analyze", "--component", "daily:24:2", "--component", "weekly:168"])
            .args(["--b", "300", "--plots", "--periodogram"])
            .arg("--input")
            .arg(&input)
            .arg("--out-dir")
            .arg(&out),
    );
    assert!(stdout.contains("daily fundamental"));

    let summary = read_summary_json(&out.join("summary.json")).unwrap();
    assert_eq!(summary.components.len(), 3);
    for c in &summary.components {
        assert_eq!(c.significant, c.gap > 0.0, "{}", c.label);
        assert!(c.lower_range.0 <= c.lower_range.1);
        assert!(c.upper_range.0 <= c.upper_range.1);
    }
    assert!((summary.components[0].frequency - 1.0 / 24.0).abs() < 1e-15);
    assert!(summary.components[0].significant);
    assert!(summary.combined.as_ref().unwrap().r_squared.unwrap() > 0.0);

    // row count = sum over methods and components of the period
    let rows = csv_rows(&out.join("bands.csv"));
    assert_eq!(rows.len(), 2 * (24 + 24 + 168));
    // numbers carry at least six significant digits
    let lower = &rows[0][3];
    let mantissa = lower.trim_start_matches('-').split('e').next().unwrap();
    assert!(mantissa.chars().filter(char::is_ascii_digit).count() >= 6, "{lower}");

    let spectrum = csv_rows(&out.join("periodogram.csv"));
    assert_eq!(spectrum.len(), 840);
    for name in ["daily_fundamental.svg", "daily_second_harmonic.svg", "weekly_fundamental.svg", "cycle_daily.svg"] {
        let svg = std::fs::read_to_string(out.join("plots").join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name}");
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
b = 100
pbb_mode = "off"
out_dir = "unused"
components = [{ name = "daily", period_hours = 24 }]

[synthetic]
length_samples = 720
noise_sd = 1.0
seed = 3
components = [{ period_samples = 24, amplitude = 4.0 }]
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(
        vbpbb()
            .arg("analyze")
            .arg("--config")
            .arg(&config)
            .args(["--alpha", "0.1", "--seed", "5"])
            .arg("--out-dir")
            .arg(&out),
    );
    let summary = read_summary_json(&out.join("summary.json")).unwrap();
    assert_eq!((summary.b, summary.seed, summary.alpha), (100, 5, 0.1));
    assert_eq!(summary.pbb_mode, "off");
    assert_eq!(summary.components[0].width_ratio_vs_pbb, None);
    assert_eq!(csv_rows(&out.join("bands.csv")).len(), 24);
}

#[test]
fn failures_exit_nonzero_and_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gappy.csv");
    std::fs::write(
        &input,
        "timestamp,value\n2023-01-01T00:00,1\n2023-01-01T01:00,2\n2023-01-01T04:00,3\n",
    )
    .unwrap();
    let out = vbpbb()
        .args(["analyze", "--component", "daily:24"])
        .arg("--input")
        .arg(&input)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("loading input series"), "{err}");
    assert!(err.contains("rows 3"), "{err}");

    let out = vbpbb()
        .args(["analyze", "--override-m", "8760", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn filter_and_periodogram_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate(dir.path(), &["--length", "480", "--cosine", "24:3"]);
    let comp = dir.path().join("daily.csv");
    let stdout = run_ok(
        vbpbb()
            .args(["filter", "--period-hours", "24"])
            .arg("--input")
            .arg(&input)
            .arg("--out")
            .arg(&comp),
    );
    assert!(stdout.contains("m = 49"), "{stdout}");
    let rows = csv_rows(&comp);
    assert_eq!(rows.len(), 480 - 48);
    // a clean cosine comes back close to itself; first output sits at t = 24
    let first: f64 = rows[0][1].parse().unwrap();
    assert!((first - 3.0).abs() < 0.2, "{first}");
    assert_eq!(rows[0][0], "2013-09-07T00:00:00");

    let pg = dir.path().join("pg.csv");
    let stdout = run_ok(vbpbb().arg("periodogram").arg("--input").arg(&input).arg("--out").arg(&pg).args(["--top", "1"]));
    assert!(stdout.contains("period 2.4"), "{stdout}");
    assert_eq!(csv_rows(&pg).len(), 240);
}
