use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vizassist"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_file(name: &str, content: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("vizassist-{}-{name}", std::process::id()));
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn fit_matches_golden_program() {
    let out = bin()
        .args(["fit", "--template", "scatterplot", "--data"])
        .arg(fixture("iris.csv"))
        .output()
        .unwrap();
    let golden = std::fs::read_to_string(fixture("rendered/scatterplot_iris.js")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn fit_with_explicit_binding() {
    let out = bin()
        .args([
            "fit",
            "--template",
            "scatterplot",
            "--bind",
            "x=petalLength",
            "--bind",
            "y=petalWidth",
            "--data",
        ])
        .arg(fixture("iris.csv"))
        .output()
        .unwrap();
    let src = stdout(&out);
    assert!(src.contains("d.petalLength") && src.contains("d.petalWidth"));
}

#[test]
fn augment_reads_stdin() {
    let src = std::fs::read_to_string(fixture("rendered/line_iris.js")).unwrap();
    let mut child = bin()
        .args(["augment", "--viz", "line", "--interaction", "hover"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(src.as_bytes())
        .unwrap();
    let out = stdout(&child.wait_with_output().unwrap());
    let state = vizassist_service::session::detect_state(&out).unwrap();
    assert_eq!(state.key(), "hover");
}

#[test]
fn augment_error_is_reported_with_code() {
    let src = std::fs::read_to_string(fixture("rendered/pie_iris.js")).unwrap();
    let path = temp_file("pie.js", &src);
    let out = bin()
        .args([
            "augment",
            "--viz",
            "pie",
            "--interaction",
            "drag",
            "--source",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[UnsupportedPair]"));
}

#[test]
fn xval_reports_hand_counted_accuracy() {
    let mut csv = String::from("id,viz_type,viable,interactions\n");
    for n in 0..76 {
        csv += &format!("h{n},custom,true,hover\n");
    }
    for n in 0..24 {
        csv += &format!("c{n},custom,true,click\n");
    }
    let path = temp_file("xval.csv", &csv);
    let out = bin()
        .args(["xval", "--k", "1", "--corpus"])
        .arg(&path)
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(
        text.lines().any(|l| l.starts_with("overall\t0.7600")),
        "{text}"
    );
    assert!(
        text.lines().any(|l| l.starts_with("click\t0.0000")),
        "{text}"
    );
}

#[test]
fn area_recommendations_stay_applicable() {
    let out = bin()
        .args(["recommend", "--viz", "area", "--json"])
        .output()
        .unwrap();
    let recs: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let names: Vec<&str> = recs
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["interaction"].as_str().unwrap())
        .collect();
    assert!(!names.is_empty());
    assert!(
        names.iter().all(|n| ["brush", "hover"].contains(n)),
        "{names:?}"
    );
}

#[test]
fn stats_prints_headline_counts() {
    let text = stdout(&bin().arg("stats").output().unwrap());
    assert!(text.contains("viable\t1228"));
    assert!(text.contains("interactive\t659 (43.9%)"));
    assert!(text.contains("viz\tbar\t251\t19.8%"));
}

#[test]
fn classify_rendered_svg() {
    let out = bin()
        .arg("classify")
        .arg(fixture("rendered/pie_cars.svg"))
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["viz"], "pie");
}
