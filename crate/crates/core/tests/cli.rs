use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BASE: &str = r#"
[grid]
d = 2
n = 32
L = 20.0

[params]
mu = 1.0
lam = 0.0
kappa = 1.0
pressure = { law = "gamma", coefficient = 0.7142857142857143, exponent = 1.4 }

[integrator]
dt = 0.1
t_end = 1.0
snapshot_cadence = 2

[[norms]]
kind = "fourier_besov"
field = "state"
s = 0.0
p = 2
sigma = 1

[[norms]]
kind = "linf"
field = "m"

[output]
snapshots = true
"#;

fn band_limited(amp: f64) -> String {
    format!("{BASE}\n[initial]\nkind = \"band_limited\"\nseed = 7\namplitude = {amp}\nk0 = 1.0\n")
}

fn nsk(dir: &Path, sub: &str, config: &str, extra: &[&str], threads: &str) -> Output {
    let cfg = dir.join(format!("{sub}.toml"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nsk"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .env("NSK_THREADS", threads)
        .output()
        .unwrap()
}

fn run_to(dir: &Path, name: &str, sub: &str, config: &str, threads: &str) -> (Output, std::path::PathBuf) {
    let out = dir.join(name);
    let o = nsk(dir, sub, config, &["--out", out.to_str().unwrap()], threads);
    (o, out)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_errors_exit_2_and_list_every_problem() {
    let tmp = TempDir::new().unwrap();
    let bad = BASE.replace("mu = 1.0", "mu = -1.0\nmuu = 2.0").replace("n = 32", "n = 31");
    let o = nsk(tmp.path(), "simulate", &bad, &[], "1");
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["muu", "mu > 0", "n"] {
        assert!(err.contains(needle), "missing {needle}: {err}");
    }
}

#[test]
fn verify_writes_per_check_json() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = run_to(tmp.path(), "v", "verify", BASE, "1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify_summary.json")).unwrap()).unwrap();
    let checks = summary.as_array().unwrap();
    assert!(checks.len() >= 10);
    for c in checks {
        let name = c["name"].as_str().unwrap();
        assert!(out.join("verify").join(format!("{name}.json")).exists());
        assert_eq!(c["passed"], Value::Bool(true), "{name}");
    }
    assert_eq!(manifest(&out)["status"], "COMPLETE");
}

#[test]
fn zero_amplitude_gives_zero_norms() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = run_to(tmp.path(), "z", "simulate", &band_limited(0.0), "1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("norms.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("fb_") || h.starts_with("linf_"))
        .map(|(i, _)| i)
        .collect();
    assert_eq!(cols.len(), 2);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for &c in &cols {
            assert_eq!(rec[c].parse::<f64>().unwrap(), 0.0);
        }
        rows += 1;
    }
    assert!(rows > 1);
}

#[test]
fn same_seed_gives_identical_bytes_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = band_limited(0.001);
    let (a, da) = run_to(tmp.path(), "a", "simulate", &cfg, "1");
    let (b, db) = run_to(tmp.path(), "b", "simulate", &cfg, "1");
    let (c, dc) = run_to(tmp.path(), "c", "simulate", &cfg, "3");
    for o in [&a, &b, &c] {
        assert_eq!(o.status.code(), Some(0), "{}", stderr(o));
    }
    let csv = |d: &Path| std::fs::read(d.join("norms.csv")).unwrap();
    assert_eq!(csv(&da), csv(&db));
    assert_eq!(csv(&da), csv(&dc));
    assert_eq!(
        std::fs::read(da.join("snapshot_final.bin")).unwrap(),
        std::fs::read(dc.join("snapshot_final.bin")).unwrap()
    );
}

#[test]
fn seed_flag_changes_band_limited_data() {
    let tmp = TempDir::new().unwrap();
    let cfg = band_limited(0.001);
    let (_, da) = run_to(tmp.path(), "a", "simulate", &cfg, "1");
    let out = tmp.path().join("b");
    let o = nsk(tmp.path(), "simulate", &cfg, &["--out", out.to_str().unwrap(), "--seed", "8"], "1");
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(std::fs::read(da.join("norms.csv")).unwrap(), std::fs::read(out.join("norms.csv")).unwrap());
    assert_eq!(manifest(&out)["seed"], 8);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = band_limited(0.005);
    let (o, straight) = run_to(tmp.path(), "straight", "simulate", &cfg.replace("t_end = 1.0", "t_end = 2.0"), "1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (o, first) = run_to(tmp.path(), "first", "simulate", &cfg, "1");
    assert_eq!(o.status.code(), Some(0));
    let snap = first.join("snapshot_final.bin");
    let resumed_cfg = format!(
        "resume_from = {:?}\n{}",
        snap.to_str().unwrap(),
        cfg.replace("t_end = 1.0", "t_end = 2.0")
    );
    let (o, second) = run_to(tmp.path(), "second", "simulate", &resumed_cfg, "1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let a = nsk::snapshot::read(&straight.join("snapshot_final.bin")).unwrap().state;
    let b = nsk::snapshot::read(&second.join("snapshot_final.bin")).unwrap().state;
    assert!((a.time - 2.0).abs() < 1e-12 && (b.time - 2.0).abs() < 1e-12);
    let scale = a.max_abs();
    let mut diff = 0.0f64;
    for (x, y) in a.components().zip(b.components()) {
        diff = diff.max(x.sub(y).unwrap().max_abs());
    }
    assert!(diff <= 1e-12 * scale, "{diff} vs {scale}");
}

#[test]
fn truncated_snapshot_is_rejected_on_resume() {
    let tmp = TempDir::new().unwrap();
    let cfg = band_limited(0.005);
    let (_, first) = run_to(tmp.path(), "first", "simulate", &cfg, "1");
    let bytes = std::fs::read(first.join("snapshot_final.bin")).unwrap();
    let cut = tmp.path().join("cut.bin");
    std::fs::write(&cut, &bytes[..bytes.len() - 5]).unwrap();
    let resumed = format!("resume_from = {:?}\n{cfg}", cut.to_str().unwrap());
    let (o, _) = run_to(tmp.path(), "second", "simulate", &resumed, "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("snapshot"), "{}", stderr(&o));
}

#[test]
fn vacuum_exits_3_with_last_state_persisted() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        "enforce_smallness = false\n{}\n[initial]\nkind = \"gaussian\"\namplitude = -0.97\nbumps = [{{ center = [0.5, 0.5], width = 1.0, density = 1.0, momentum = [3.0, 0.0] }}]\n",
        BASE.replace("[output]\nsnapshots = true", "")
    );
    let (o, out) = run_to(tmp.path(), "vac", "simulate", &cfg, "1");
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["status"], "INCOMPLETE");
    assert!(m["failure"].as_str().unwrap().contains("vacuum"));
    assert!(out.join("snapshot_final.bin").exists());
    assert!(out.join("norms.csv").exists());
}

#[test]
fn smallness_gate_rejects_large_data() {
    let tmp = TempDir::new().unwrap();
    let (o, _) = run_to(tmp.path(), "big", "simulate", &band_limited(0.5), "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("smallness"), "{}", stderr(&o));
}

#[test]
fn decay_fit_and_plot_data() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        "{}\n[initial]\nkind = \"gaussian\"\namplitude = 0.001\nbumps = [{{ center = [0.5, 0.5], width = 1.5, density = 1.0 }}]\n[fit]\nwindow = [2.0, 8.0]\n",
        BASE.replace("L = 20.0", "L = 40.0").replace("n = 32", "n = 64").replace("t_end = 1.0", "t_end = 8.0")
    );
    let out = tmp.path().join("fit");
    let o = nsk(tmp.path(), "decay-fit", &cfg, &["--out", out.to_str().unwrap(), "--emit-plot-data"], "1");
    assert!(matches!(o.status.code(), Some(0)), "{}", stderr(&o));
    let fits: Value = serde_json::from_str(&std::fs::read_to_string(out.join("fits.json")).unwrap()).unwrap();
    let fb = fits["fits"].as_array().unwrap().iter().find(|f| f["series"].as_str().unwrap().starts_with("fb_")).unwrap();
    assert!(fb["fit"]["exponent"].as_f64().unwrap() < 0.0);
    let plot = std::fs::read_to_string(out.join("plot_data.csv")).unwrap();
    assert!(plot.starts_with("series,kind,t,value"));
    assert!(plot.contains(",fit,"));
}

#[test]
fn kernel_and_linear_probe_run() {
    let tmp = TempDir::new().unwrap();
    let kcfg = format!(
        "{}\n[sampling]\nstart = 1.0\nend = 10.0\ncount = 10\n[[kernel]]\nk = 0\n",
        BASE.replace("[integrator]\ndt = 0.1\nt_end = 1.0\nsnapshot_cadence = 2", "")
    );
    let (o, _) = run_to(tmp.path(), "short", "kernel-probe", &kcfg.replace("count = 10", "count = 6"), "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 8 sample times"));
    let (o, out) = run_to(tmp.path(), "k", "kernel-probe", &kcfg, "2");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("fits.json").exists());
    let lcfg = format!("{kcfg}\n[initial]\nkind = \"gaussian\"\nbumps = [{{ center = [0.5, 0.5], width = 1.0, density = 1.0 }}]\n");
    let (o, out) = run_to(tmp.path(), "l", "linear-probe", &lcfg, "2");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(manifest(&out)["steps_done"], 10);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = nsk::config::parse_config(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if let Some(kind) = cfg.kind {
            assert!(cfg.violations(Some(kind)).is_empty(), "{}", path.display());
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
