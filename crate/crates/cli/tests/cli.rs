use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_excursions"));
    c.env_remove("EXCURSION_SEED");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = c.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8_lossy(&stdout).into_owned(),
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

fn manifest_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from manifest"))
        .to_string()
}

#[test]
fn verify_defaults_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(bin().arg("verify").arg("--out").arg(dir.path()));
    assert_eq!(code, 0, "{err}");
    let e: f64 = manifest_value(dir.path(), "result.occupation_max_error")
        .parse()
        .unwrap();
    assert!(e < 1e-10);
    let text = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
}

#[test]
fn null_experiment_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(bin()
        .args(["run", "--config"])
        .arg(config("null.toml"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{out}{err}");
    assert!(dir.path().join("report.csv").exists());
    assert!(fs::read_dir(dir.path().join("plots")).unwrap().count() >= 3);
}

#[test]
fn missing_kappa_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("null.toml")).unwrap();
    let cut: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with("kappa"))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, cut).unwrap();
    let (code, _, err) = run(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o")));
    assert_eq!(code, 2);
    assert!(err.contains("kappa"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unreadable_config_exit_two() {
    let (code, _, _) = run(bin().args(["run", "--config", "/nonexistent/x.toml"]));
    assert_eq!(code, 2);
}

#[test]
fn same_seed_same_bytes_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, threads) in [("a", "1"), ("b", "3")] {
        let (code, _, err) = run(bin()
            .args(["run", "--config"])
            .arg(config("null.toml"))
            .args(["--threads", threads, "--out"])
            .arg(dir.path().join(sub)));
        assert_eq!(code, 0, "{err}");
    }
    for f in ["report.csv", "manifest.txt"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let go = |sub: &str, env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["run", "--config"]).arg(config("null.toml"));
        c.arg("--out").arg(dir.path().join(sub));
        if let Some(e) = env {
            c.env("EXCURSION_SEED", e);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        assert_eq!(run(&mut c).0, 0);
        fs::read(dir.path().join(sub).join("report.csv")).unwrap()
    };
    let by_env = go("env", Some("11"), None);
    let by_flag = go("flag", None, Some("11"));
    let both = go("both", Some("12"), Some("11"));
    assert_eq!(by_env, by_flag);
    assert_eq!(both, by_flag);
    assert_eq!(manifest_value(&dir.path().join("both"), "seed"), "11");

    let mut c = bin();
    c.args(["run", "--config"])
        .arg(config("null.toml"))
        .arg("--out")
        .arg(dir.path().join("bad"))
        .env("EXCURSION_SEED", "abc");
    let (code, _, err) = run(&mut c);
    assert_eq!(code, 2);
    assert!(err.contains("EXCURSION_SEED"));
}

#[test]
fn plot_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "n,functional,statistic,value,null_band,verdict\n").unwrap();
    let (code, _, _) = run(bin()
        .arg("plot")
        .arg(&empty)
        .arg("--out")
        .arg(dir.path().join("p0")));
    assert_eq!(code, 0);
    assert!(!dir.path().join("p0").exists());

    let report = dir.path().join("r.csv");
    fs::write(
        &report,
        "n,functional,statistic,value,null_band,verdict\n\
         0,x(1),ks,0.3,0.1,info\n2,x(1),ks,0.05,0.1,pass\n",
    )
    .unwrap();
    for sub in ["p1", "p2"] {
        let (code, _, _) = run(bin()
            .arg("plot")
            .arg(&report)
            .arg("--out")
            .arg(dir.path().join(sub)));
        assert_eq!(code, 0);
    }
    let a = fs::read(dir.path().join("p1/x_1.svg")).unwrap();
    let b = fs::read(dir.path().join("p2/x_1.svg")).unwrap();
    assert_eq!(a, b);

    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "n,functional,statistic,value,null_band,verdict\n0,x(1),ks,oops,0.1,info\n",
    )
    .unwrap();
    let (code, _, _) = run(bin().arg("plot").arg(&bad).arg("--out").arg(dir.path()));
    assert_eq!(code, 2);
}

#[test]
fn j1_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "t,x1,mode\n0,0,constant\nlifetime=inf\n").unwrap();
    fs::write(&b, "t,x1,mode\n0,1,constant\nlifetime=inf\n").unwrap();
    let (code, out, _) = run(bin().arg("j1").arg(&a).arg(&b).args(["--horizon", "2"]));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "distance=1");
    let (code, out, _) = run(bin().arg("j1").arg(&a).arg(&a).args(["--horizon", "2"]));
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "distance=0");
    fs::write(&b, "t,x1\n0,1\n").unwrap();
    let (code, _, _) = run(bin().arg("j1").arg(&a).arg(&b).args(["--horizon", "2"]));
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_triple_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(bin()
        .args(["run", "--config"])
        .arg(config("simulate.toml"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{err}");
    for f in [
        "x.csv",
        "local_time.csv",
        "eta.csv",
        "points.csv",
        "manifest.txt",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let x = excursions::io::read_path(&dir.path().join("x.csv")).unwrap();
    assert_eq!(x.dim(), 1);
}
