use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use yeargraph_core::graphstore::{exchange_paths, import_pg};

fn yeargraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yeargraph"))
        .args(args)
        .env("YEARGRAPH_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SEVEN_YEARS: &str = r#"
version = 1
seed = 3
years = [2014, 2015, 2016, 2017, 2018, 2019, 2020]
applicants_per_year = 40

[[attributes]]
name = "region"
values = ["Kanto", "Kansai", "Tohoku"]

[[attributes]]
name = "english"
values = ["Entry", "Business", "Native"]
missing = 0.0
"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    let o = yeargraph(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Usage"));
    for sub in ["ingest", "generate", "serve", "export", "import"] {
        assert!(stdout(&o).contains(sub), "{sub}");
    }
    assert!(yeargraph(&["--version"]).status.success());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(yeargraph(&[]).status.code(), Some(1));
    assert_eq!(yeargraph(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(yeargraph(&["ingest"]).status.code(), Some(1));
    let o = yeargraph(&["serve", "--listen", "127.0.0.1:0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no datasets"));
}

#[test]
fn ingest_without_inputs_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "ingest.toml", "version = 1\n[[columns]]\nkind = \"attribute\"\nname = \"region\"\n");
    let o = yeargraph(&["ingest", "--config", p(&config), "--out", p(&dir.path().join("g"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no input files"), "{}", stderr(&o));
}

#[test]
fn ingest_one_row_reports_one_applicant() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "fy2019.csv", "id,region,english\n7,Kanto,\n");
    let config = write(
        dir.path(),
        "ingest.toml",
        "version = 1\nid_column = \"id\"\n[files]\n\"fy2019.csv\" = 2019\n\n[[columns]]\nkind = \"attribute\"\nname = \"region\"\n\n[[columns]]\nkind = \"attribute\"\nname = \"english\"\n",
    );
    let out = dir.path().join("g");
    let o = yeargraph(&["ingest", "--config", p(&config), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("rows: 1"), "{text}");
    assert!(text.contains("1 applicants"), "{text}");
    assert!(text.contains("edges: 1"), "{text}");
    assert!(text.contains("warnings: 0"), "{text}");
    let graph = import_pg(&out).unwrap();
    assert_eq!(graph.applicant_count(), 1);
}

#[test]
fn ingest_edge_count_matches_filled_cells() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS.replace("missing = 0.0", "missing = 0.3").as_str());
    let data = dir.path().join("data");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&data)]).status.success());

    let mut filled = 0;
    for entry in std::fs::read_dir(&data).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let mut reader = csv::Reader::from_path(&path).unwrap();
            let header = reader.headers().unwrap().clone();
            for row in reader.records() {
                let row = row.unwrap();
                filled += header
                    .iter()
                    .zip(row.iter())
                    .filter(|(h, c)| (*h == "region" || *h == "english") && !c.trim().is_empty())
                    .count();
            }
        }
    }
    let out = dir.path().join("g");
    let o = yeargraph(&["ingest", "--config", p(&data.join("ingest.toml")), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&format!("edges: {filled}\n")), "{} vs {filled}", stdout(&o));
    assert!(stdout(&o).contains("rows: 280"));
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&a)]).status.success());
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&b)]).status.success());
    for year in 2014..=2020 {
        let name = format!("fy{year}.csv");
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
    let c = dir.path().join("c");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&c), "--seed", "99"]).status.success());
    assert_ne!(std::fs::read(a.join("fy2014.csv")).unwrap(), std::fs::read(c.join("fy2014.csv")).unwrap());
}

#[test]
fn generate_zero_applicants_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "version = 1\nseed = 1\nyears = [2019]\napplicants_per_year = 0\n[[attributes]]\nname = \"region\"\nvalues = [\"Kanto\"]\n",
    );
    let out = dir.path().join("d");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&out)]).status.success());
    let text = std::fs::read_to_string(out.join("fy2019.csv")).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
}

#[test]
fn generate_without_missing_cells_fills_every_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS);
    let out = dir.path().join("d");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&out)]).status.success());
    let text = std::fs::read_to_string(out.join("fy2017.csv")).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.split(',').all(|c| !c.is_empty()), "{line}");
    }
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS);
    let data = dir.path().join("data");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&data)]).status.success());
    let first = dir.path().join("first");
    let o = yeargraph(&["export", "--config", p(&data.join("ingest.toml")), "--out", p(&first)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = dir.path().join("second");
    assert!(yeargraph(&["export", "--dataset", p(&first), "--out", p(&second)]).status.success());
    let (n1, e1) = exchange_paths(&first);
    let (n2, e2) = exchange_paths(&second);
    assert_eq!(std::fs::read(n1).unwrap(), std::fs::read(n2).unwrap());
    assert_eq!(std::fs::read(e1).unwrap(), std::fs::read(e2).unwrap());

    let o = yeargraph(&["import", "--dataset", p(&second)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("years: 2014-2020 (7 years)"), "{}", stdout(&o));
    assert_eq!(import_pg(&first).unwrap(), import_pg(&second).unwrap());
}

#[test]
fn import_corrupted_line_cites_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS);
    let data = dir.path().join("data");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&data)]).status.success());
    let base = dir.path().join("g");
    assert!(yeargraph(&["export", "--config", p(&data.join("ingest.toml")), "--out", p(&base)]).status.success());
    let (nodes, _) = exchange_paths(&base);
    let text = std::fs::read_to_string(&nodes).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[4] = "this line is not a node";
    std::fs::write(&nodes, lines.join("\n") + "\n").unwrap();
    let o = yeargraph(&["import", "--dataset", p(&base)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn serve_bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "ingest.toml", "version = 1\nno_such_key = true\n");
    let o = yeargraph(&["serve", "--listen", "127.0.0.1:0", "--config", p(&config)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("configuration error"), "{}", stderr(&o));

    let o = yeargraph(&["serve", "--listen", "127.0.0.1:0", "--config", p(&dir.path().join("absent.toml"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn http_get(addr: &str, path: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").unwrap();
    let status = head.split(' ').nth(1).unwrap().parse().unwrap();
    (status, body.to_string())
}

#[test]
fn serve_generated_seven_year_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.toml", SEVEN_YEARS);
    let root = dir.path().join("datasets");
    let demo = root.join("demo");
    assert!(yeargraph(&["generate", "--config", p(&spec), "--out", p(&demo)]).status.success());

    let mut child = Command::new(env!("CARGO_BIN_EXE_yeargraph"))
        .args(["serve", "--listen", "127.0.0.1:0", "--dataset-dir", p(&root)])
        .env("YEARGRAPH_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let server = Server(child);
    let addr = loop {
        let line = lines.next().expect("server exited").unwrap();
        if let Some(url) = line.strip_prefix("listening on http://") {
            break url.to_string();
        }
    };

    let (status, body) = http_get(&addr, "/api/datasets/demo/years");
    assert_eq!(status, 200, "{body}");
    let years: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(years.as_array().unwrap().len(), 7, "{body}");

    let (status, body) = http_get(&addr, "/api/datasets/nope/years");
    assert_eq!(status, 404);
    assert!(body.contains("not_found"));
    drop(server);
}
