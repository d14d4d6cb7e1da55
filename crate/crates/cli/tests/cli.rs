use std::path::Path;
use std::process::{Command, Output};

fn salemlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salemlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_writes_set_and_stage_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = salemlab(&[
        "build",
        "cantor:3",
        "--stage",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        json.trim(),
        r#"{"space":["0/1","1/1"],"pieces":[["0/1","1/9"],["2/9","1/3"],["2/3","7/9"],["8/9","1/1"]]}"#
    );
    let csv = std::fs::read_to_string(dir.path().join("c.stages.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "stage,pieces,min_diam,max_diam,config_hash");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("2,4,1.111111e-1,1.111111e-1,"));
}

#[test]
fn scheme_labels_with_commas_are_quoted() {
    let o = salemlab(&["build", "gcantor:1/3,1/4", "--stage", "1"]);
    assert!(o.status.success());
    let o = salemlab(&[
        "report",
        "gcantor:1/3,1/4",
        "--stage",
        "4",
        "--xi-max",
        "4096",
        "--bands",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rec = rdr.records().next().unwrap().unwrap();
    assert_eq!(&rec[0], "gcantor:1/3,1/4");
    assert_eq!(rec.len(), 12);
}

#[test]
fn metric_prints_exact_rational() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(
        &a,
        r#"{"space":["0/1","1/1"],"pieces":[["0/1","1/3"],["2/3","1/1"]]}"#,
    )
    .unwrap();
    std::fs::write(&b, r#"{"space":["0/1","1/1"],"pieces":[["0/1","1/1"]]}"#).unwrap();
    let o = salemlab(&["metric", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("1/6\t"));
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    let o = salemlab(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = dir.join(format!("{}.sweep.csv", name.trim_end_matches(".csv")));
    (std::fs::read(&out).unwrap(), std::fs::read(sweep).unwrap())
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "report", "salpha:1", "--stage", "5", "--xi-max", "8192", "--bands", "6", "--seed", "3",
    ];
    let first = run_to(dir.path(), "a.csv", &args);
    let second = run_to(dir.path(), "b.csv", &args);
    assert_eq!(first, second);
    let o = Command::new(env!("CARGO_BIN_EXE_salemlab"))
        .args([
            "report", "salpha:1", "--stage", "5", "--xi-max", "8192", "--bands", "6", "--seed", "3",
        ])
        .env("SALEMLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.stdout, first.0);
}

#[test]
fn config_hash_tracks_parameters() {
    let a = stdout(&salemlab(&[
        "sweep",
        "cantor:3",
        "--samples",
        "4",
        "--seed",
        "0",
    ]));
    let b = stdout(&salemlab(&[
        "sweep",
        "cantor:3",
        "--samples",
        "4",
        "--seed",
        "1",
    ]));
    let hash = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .to_string()
    };
    assert_ne!(hash(&a), hash(&b));
    assert_eq!(hash(&a).len(), 16);
}

#[test]
fn exit_codes() {
    assert_eq!(salemlab(&["build", "cantor:x"]).status.code(), Some(2));
    assert_eq!(salemlab(&["build", "cantor:1"]).status.code(), Some(2));
    assert_eq!(salemlab(&["reduce", "phi", "1,*2"]).status.code(), Some(2));
    assert_eq!(
        salemlab(&["reduce", "fp", "3/2", "0"]).status.code(),
        Some(3)
    );
    assert_eq!(
        salemlab(&["metric", "/nonexistent/a", "/nonexistent/b"])
            .status
            .code(),
        Some(1)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_salemlab"))
        .args(["build", "interval"])
        .env("SALEMLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phi_reduction_reports_membership() {
    let o = salemlab(&["reduce", "phi", "0,*(10)^ω"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["input_in_p3"], false);
    assert_eq!(v["phi_in_p3"], false);
    let o = salemlab(&["reduce", "phi", "1,01,0001"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["phi_in_p3"], true);
}
