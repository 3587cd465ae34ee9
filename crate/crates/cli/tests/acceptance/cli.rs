use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::thread::sleep;
use std::time::{Duration, Instant};

use dronecine_core::flightplan::import_qgc_plan;
use dronecine_core::project::load_project;

const BIN: &str = env!("CARGO_BIN_EXE_dronecine");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn dronecine(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

/// Runs and checks the exit status, returning stdout.
fn expect(code: i32, args: &[&str]) -> String {
    let out = dronecine(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "dronecine {}\nstdout: {}\nstderr: {}",
        args.join(" "),
        text(&out.stdout),
        text(&out.stderr)
    );
    text(&out.stdout).to_string()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn batch(dir: &Path) {
    let p = |name: &str| dir.join(name).to_str().unwrap().to_string();
    let project = fixture("project.json");
    let project = project.to_str().unwrap();
    let controls = fixture("controls.csv");

    // plan-scan: defaults reproduce the reference mission, twice over
    for suffix in ["a", "b"] {
        let out = expect(
            0,
            &[
                "plan-scan",
                "--output",
                &p(&format!("scan_{suffix}.json")),
                "--manifest",
                &p(&format!("manifest_{suffix}.csv")),
            ],
        );
        assert!(out.contains("total images: 2856"), "{out}");
    }
    assert_eq!(read(&dir.join("scan_a.json")), read(&dir.join("scan_b.json")));
    assert_eq!(read(&dir.join("manifest_a.csv")), read(&dir.join("manifest_b.csv")));
    assert_eq!(text(&read(&dir.join("manifest_a.csv"))).lines().count(), 2857);

    // verify-overlap: thresholds and strict mode
    let out = expect(
        0,
        &[
            "verify-overlap",
            "--plan",
            &p("scan_a.json"),
            "--mode",
            "landscape",
            "--strict",
        ],
    );
    assert!(out.contains("threshold"), "{out}");
    expect(
        0,
        &[
            "plan-scan",
            "--in-track-overlap",
            "0.6",
            "--length-x-m",
            "20",
            "--length-y-m",
            "20",
            "--output",
            &p("sparse.json"),
        ],
    );
    let out = dronecine(&[
        "verify-overlap",
        "--plan",
        &p("sparse.json"),
        "--mode",
        "detail",
        "--strict",
        "--output",
        &p("report.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("below the 80% detail threshold"),
        "{}",
        text(&out.stderr)
    );
    expect(0, &["verify-overlap", "--plan", &p("sparse.json"), "--mode", "detail"]);

    // shot: unit-free aliases, a plan export, and rejected parameters
    expect(
        0,
        &[
            "shot",
            "--type",
            "orbit",
            "--radius",
            "25",
            "--height",
            "15",
            "--arc-deg",
            "-270",
            "--output",
            &p("orbit.json"),
            "--plan",
            &p("orbit.plan"),
        ],
    );
    expect(
        0,
        &[
            "shot",
            "--type",
            "orbit",
            "--radius-m",
            "25",
            "--height-m",
            "15",
            "--arc",
            "-270",
            "--output",
            &p("orbit2.json"),
        ],
    );
    assert_eq!(read(&dir.join("orbit.json")), read(&dir.join("orbit2.json")));
    assert!(import_qgc_plan(&read(&dir.join("orbit.plan"))).unwrap().waypoints.len() > 2);
    expect(
        0,
        &[
            "shot",
            "--type",
            "chase",
            "--target-actor",
            "1",
            "--project",
            project,
            "--duration-s",
            "8",
            "--output",
            &p("chase.json"),
        ],
    );
    let out = dronecine(&["shot", "--type", "flyby", "--radius-m", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("--radius-m"));
    let out = dronecine(&["shot", "--type", "orbit", "--radius-m", "-5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("shot.radius"), "{}", text(&out.stderr));
    expect(
        1,
        &["shot", "--type", "orbit", "--target-actor", "9", "--project", project],
    );

    // simulate: scripted pilot plus two shot drones, deterministic outputs
    for suffix in ["a", "b"] {
        let out = expect(
            0,
            &[
                "simulate",
                "--project",
                project,
                "--shot",
                &p("orbit.json"),
                "--shot",
                &p("chase.json"),
                "--controls",
                controls.to_str().unwrap(),
                "--seconds",
                "10",
                "--trace",
                &p(&format!("trace_{suffix}.jsonl")),
                "--events",
                &p(&format!("events_{suffix}.json")),
                "--summary",
                &p(&format!("summary_{suffix}.json")),
            ],
        );
        assert!(out.contains("ticks: 200"), "{out}");
        assert!(out.contains("coverage: 1.0000"), "{out}");
    }
    for name in ["trace", "events", "summary"] {
        let ext = if name == "trace" { "jsonl" } else { "json" };
        assert_eq!(
            read(&dir.join(format!("{name}_a.{ext}"))),
            read(&dir.join(format!("{name}_b.{ext}"))),
            "{name}"
        );
    }
    assert_eq!(text(&read(&dir.join("trace_a.jsonl"))).lines().count(), 201);
    expect(1, &["simulate", "--seconds", "-1"]);

    // export: every source format, and the error classes
    expect(
        0,
        &[
            "export",
            "--input",
            &p("orbit.plan"),
            "--from",
            "qgc",
            "--to",
            "litchi",
            "--output",
            &p("orbit.csv"),
        ],
    );
    expect(
        0,
        &[
            "export",
            "--input",
            &p("scan_a.json"),
            "--from",
            "scan",
            "--to",
            "manifest",
            "--output",
            &p("manifest_c.csv"),
        ],
    );
    assert_eq!(read(&dir.join("manifest_a.csv")), read(&dir.join("manifest_c.csv")));
    expect(
        0,
        &[
            "export",
            "--input",
            &p("scan_a.json"),
            "--from",
            "scan",
            "--to",
            "qgc",
            "--output",
            &p("scan.plan"),
        ],
    );
    assert_eq!(
        import_qgc_plan(&read(&dir.join("scan.plan"))).unwrap().waypoints.len(),
        2856
    );
    expect(
        0,
        &[
            "export",
            "--input",
            &p("chase.json"),
            "--from",
            "shot",
            "--to",
            "qgc",
            "--interval-s",
            "2",
            "--output",
            &p("chase.plan"),
        ],
    );
    expect(
        0,
        &[
            "export",
            "--input",
            project,
            "--from",
            "project",
            "--to",
            "litchi",
            "--drone",
            "3",
            "--source",
            "flight-plan",
            "--output",
            &p("survey.csv"),
        ],
    );
    assert_eq!(text(&read(&dir.join("survey.csv"))).lines().count(), 4);
    expect(
        1,
        &[
            "export",
            "--input",
            project,
            "--from",
            "project",
            "--to",
            "manifest",
            "--scan",
            "1",
            "--output",
            &p("x.csv"),
        ],
    );
    expect(
        1,
        &[
            "export",
            "--input",
            &p("orbit.plan"),
            "--from",
            "qgc",
            "--to",
            "manifest",
            "--output",
            &p("x.csv"),
        ],
    );
    expect(
        2,
        &[
            "export",
            "--input",
            &p("missing.plan"),
            "--from",
            "qgc",
            "--to",
            "litchi",
            "--output",
            &p("x.csv"),
        ],
    );
    std::fs::write(dir.join("broken.json"), br#"{"spec": {"target": 1}}"#).unwrap();
    let out = dronecine(&[
        "export",
        "--input",
        &p("broken.json"),
        "--from",
        "shot",
        "--to",
        "qgc",
        "--output",
        &p("x.plan"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("`spec.target`"), "{}", text(&out.stderr));

    // usage
    assert!(expect(0, &["--help"]).contains("plan-scan"));
    expect(0, &["export", "--help"]);
    expect(1, &["no-such-command"]);
    expect(1, &["plan-scan", "--length-x-m", "wide"]);
}

fn service(dir: &Path) {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let url = format!("http://{addr}");
    let _server = Server(
        Command::new(BIN)
            .args(["serve", "--addr", &addr])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .unwrap(),
    );
    let deadline = Instant::now() + Duration::from_secs(5);
    while dronecine(&["remote", "--url", &url, "health"]).status.code() != Some(0) {
        assert!(Instant::now() < deadline, "service did not come up");
        sleep(Duration::from_millis(20));
    }
    let project = fixture("project.json");
    let id = expect(
        0,
        &[
            "remote",
            "--url",
            &url,
            "create",
            "--project",
            project.to_str().unwrap(),
        ],
    );
    let id = id.trim();
    assert_eq!(expect(0, &["remote", "--url", &url, "sessions"]).trim(), id);
    let saved = dir.join("remote.json");
    expect(
        0,
        &[
            "remote",
            "--url",
            &url,
            "save",
            "--session",
            id,
            "--output",
            saved.to_str().unwrap(),
        ],
    );
    assert_eq!(
        load_project(&read(&saved)).unwrap(),
        load_project(&read(&project)).unwrap()
    );
    let summary: serde_json::Value = serde_json::from_str(&expect(
        0,
        &["remote", "--url", &url, "run", "--session", id, "--seconds", "2"],
    ))
    .unwrap();
    assert_eq!(summary["ticks"], 40);
    expect(
        1,
        &[
            "remote",
            "--url",
            &url,
            "run",
            "--session",
            "00000000-0000-0000-0000-000000000000",
        ],
    );
    drop(_server);
    expect(2, &["remote", "--url", &url, "health"]);
}

pub fn run() {
    let dir = tempfile::tempdir().unwrap();
    batch(dir.path());
    service(dir.path());
}
