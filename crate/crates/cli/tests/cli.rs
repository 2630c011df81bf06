use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcl"))
        .args(args)
        .env_remove("MCL_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_build_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.bin");
    let tree = dir.path().join("tree.mct");
    let out = dir.path().join("q.csv");
    let o = mcl(&[
        "gen-data",
        "--dim",
        "20",
        "--n",
        "300",
        "--seed",
        "4",
        "--out",
        s(&data),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(&fs::read(&data).unwrap()[..4], b"MCL1");

    let o = mcl(&[
        "build",
        "--data",
        s(&data),
        "--strategy",
        "ball",
        "--out",
        s(&tree),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = mcl(&[
        "query",
        "--data",
        s(&data),
        "--tree",
        s(&tree),
        "--queries",
        "25",
        "--check",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert!(text.starts_with("query,center,nn,distance"));

    let o = mcl(&[
        "query",
        "--data",
        s(&data),
        "--tree",
        s(&tree),
        "--radius",
        "0.3",
        "--point",
        "fffff",
        "--check",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0,fffff,0.3,"));
}

#[test]
fn text_datasets_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("cube.txt");
    let o = mcl(&[
        "gen-data",
        "--domain",
        "unit-cube",
        "--dim",
        "3",
        "--n",
        "50",
        "--out",
        s(&data),
    ]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&data)
        .unwrap()
        .starts_with("unit-cube,3,50,0"));
    let tree = dir.path().join("t");
    assert_eq!(
        code(&mcl(&["build", "--data", s(&data), "--out", s(&tree)])),
        0
    );
    let o = mcl(&[
        "query",
        "--data",
        s(&data),
        "--tree",
        s(&tree),
        "--point",
        "0.5,0.5,0.5",
        "--check",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mcl(&["frobnicate"])), 2);
    assert_eq!(code(&mcl(&["run"])), 2);
    assert_eq!(code(&mcl(&["run", "/no/such/config.toml"])), 2);
    assert_eq!(code(&mcl(&["gen-data", "--dim", "0", "--n", "5"])), 2);
    assert_eq!(code(&mcl(&["--threads", "0", "report", s(dir.path())])), 2);

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"bench\"\n[tree]\nbin_capasity = 3\n").unwrap();
    let o = mcl(&["run", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bin_capasity"));

    let junk = dir.path().join("junk.bin");
    fs::write(&junk, b"MCL1garbage").unwrap();
    assert_eq!(
        code(&mcl(&[
            "build",
            "--data",
            s(&junk),
            "--out",
            s(&dir.path().join("t"))
        ])),
        2
    );
}

fn small_sweep(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("sweep.toml");
    fs::write(
        &cfg,
        "experiment = \"curse_sweep\"\nseed = 3\n[domain]\ndims = [4, 24]\n[data]\nn = 300\n[queries]\ncount = 40\n",
    )
    .unwrap();
    cfg
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("art");
    let o = mcl(&[
        "run",
        s(&small_sweep(dir.path())),
        "--out",
        s(&out),
        "--threads",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["config"]["experiment"], "curse_sweep");

    let o = mcl(&["report", s(&out)]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("speedup"), "{text}");
    assert!(text.contains("d=24"));
    assert_eq!(code(&o), 0, "{text}");
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path());
    let out = dir.path().join("a");
    let o = Command::new(env!("CARGO_BIN_EXE_mcl"))
        .args(["run", s(&cfg), "--out", s(&out)])
        .env("MCL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let meta = fs::read_to_string(out.join("meta.json")).unwrap();
    assert!(meta.contains("\"seed\": 99"));

    let o = Command::new(env!("CARGO_BIN_EXE_mcl"))
        .args(["run", s(&cfg), "--out", s(&out), "--seed", "5"])
        .env("MCL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(out.join("meta.json"))
        .unwrap()
        .contains("\"seed\": 5"));
}

#[test]
fn report_errors_and_warnings() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mcl(&["report", s(dir.path())])), 2);
    assert_eq!(code(&mcl(&["report", s(&dir.path().join("missing"))])), 2);

    let out = dir.path().join("art");
    assert_eq!(
        code(&mcl(&[
            "run",
            s(&small_sweep(dir.path())),
            "--out",
            s(&out)
        ])),
        0
    );

    let meta_path = out.join("meta.json");
    let meta = fs::read_to_string(&meta_path).unwrap();
    let old = meta.replace(
        &format!("\"version\": \"{}\"", env!("CARGO_PKG_VERSION")),
        "\"version\": \"0.0.1\"",
    );
    fs::write(&meta_path, &old).unwrap();
    let o = mcl(&["report", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    // fractions no longer increasing: the re-check fails
    let csv_path = out.join("curse.csv");
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = csv.lines().map(String::from).collect();
    let swap: Vec<String> = lines[1..].iter().rev().cloned().collect();
    let d_col = |l: &str| l.split(',').next().unwrap().to_string();
    for (l, s) in lines[1..].iter_mut().zip(swap) {
        let d = d_col(l);
        *l = format!("{d}{}", &s[d_col(&s).len()..]);
    }
    fs::write(&csv_path, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&mcl(&["report", s(&out)])), 1);

    fs::write(&csv_path, "d,n\nx,y\n").unwrap();
    assert_eq!(code(&mcl(&["report", s(&out)])), 2);
    fs::write(&meta_path, "{not json").unwrap();
    assert_eq!(code(&mcl(&["report", s(&out)])), 2);
}
