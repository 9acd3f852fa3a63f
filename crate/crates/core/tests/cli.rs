use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nlcsim::cli_io::csv::read_csv;

const TG: &str = r#"
[grid]
dim = 2
n = 32

[solver]
dt = 1e-3
t_end = 0.05

[init.u]
kind = "taylor_green"
amplitude = 1.0

[init.d]
kind = "constant_director"

[monitor]
cadence = 10

[output]
checkpoint_every = 25
"#;

fn nlcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlcsim"))
        .args(args)
        .env("NLCSIM_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run_in(dir: &Path, cfg: &str) -> Output {
    nlcsim(&[
        "run",
        "--config",
        cfg,
        "--output-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn taylor_green_energy_column_decays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tg.toml", TG);
    let out = run_in(dir.path(), &cfg);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("held"), "{stdout}");

    let rows = read_csv(&dir.path().join("diagnostics.csv"))
        .unwrap()
        .records;
    assert_eq!(rows.len(), 6);
    let e0 = rows[0].energy;
    for r in &rows {
        let expect = (-4.0 * r.t).exp() * e0;
        assert!(
            ((r.energy - expect) / expect).abs() < 1e-5,
            "t={} {}",
            r.t,
            r.energy
        );
        assert!(!r.blowup_flag);
    }
    assert!(dir.path().join("checkpoint.bin").exists());
}

#[test]
fn zero_initial_data_gives_zero_norm_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = TG.replace("amplitude = 1.0", "amplitude = 0.0");
    let cfg = write_config(dir.path(), "zero.toml", &text);
    assert_eq!(run_in(dir.path(), &cfg).status.code(), Some(0));
    for r in read_csv(&dir.path().join("diagnostics.csv"))
        .unwrap()
        .records
    {
        for x in &r.reals()[1..] {
            assert_eq!(*x, 0.0);
        }
        assert!(r.criterion_ok);
    }
}

#[test]
fn quiet_suppresses_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tg.toml", TG);
    let out = nlcsim(&[
        "run",
        "--config",
        &cfg,
        "--output-dir",
        dir.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn blow_up_exits_two_with_flagged_final_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = TG
        .replace("amplitude = 1.0", "amplitude = 2e8")
        .replace("dt = 1e-3", "dt = 1e-12")
        .replace("t_end = 0.05", "t_end = 1e-12");
    let cfg = write_config(dir.path(), "boom.toml", &text);
    let out = run_in(dir.path(), &cfg);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir.path().join("diagnostics.csv"))
        .unwrap()
        .records;
    assert!(rows.last().unwrap().blowup_flag);
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &TG.replace("[solver]\n", "[solver]\nsolvr_dt = 1\n"),
    );
    let out = run_in(dir.path(), &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.solvr_dt"));

    let cfg = write_config(dir.path(), "dt.toml", &TG.replace("dt = 1e-3", "dt = 0"));
    let out = run_in(dir.path(), &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.dt must be > 0"));

    assert_eq!(nlcsim(&["run"]).status.code(), Some(1));
    assert_eq!(nlcsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = nlcsim(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let cfg = write_config(dir.path(), "tg.toml", TG);
    assert_eq!(run_in(dir.path(), &cfg).status.code(), Some(0));
    let ck = dir.path().join("checkpoint.bin");
    let bytes = fs::read(&ck).unwrap();
    fs::write(&ck, &bytes[..bytes.len() / 2]).unwrap();
    let out = nlcsim(&["inspect-checkpoint", ck.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}

#[test]
fn resume_reproduces_the_unbroken_run() {
    let full = tempfile::tempdir().unwrap();
    let split = tempfile::tempdir().unwrap();
    let long = TG.replace("t_end = 0.05", "t_end = 0.1");
    let cfg_long = write_config(full.path(), "long.toml", &long);
    assert_eq!(run_in(full.path(), &cfg_long).status.code(), Some(0));

    let cfg_short = write_config(split.path(), "short.toml", TG);
    assert_eq!(run_in(split.path(), &cfg_short).status.code(), Some(0));
    let out = nlcsim(&[
        "resume",
        "--config",
        &cfg_long,
        "--output-dir",
        split.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let a = fs::read_to_string(full.path().join("diagnostics.csv")).unwrap();
    let b = fs::read_to_string(split.path().join("diagnostics.csv")).unwrap();
    assert_eq!(a, b);

    let out = nlcsim(&[
        "inspect-checkpoint",
        split.path().join("checkpoint.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("step") && text.contains("ok"), "{text}");
}

#[test]
fn resume_refuses_a_changed_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tg.toml", TG);
    assert_eq!(run_in(dir.path(), &cfg).status.code(), Some(0));
    let other = write_config(
        dir.path(),
        "other.toml",
        &TG.replace("cadence = 10", "cadence = 5"),
    );
    let out = nlcsim(&[
        "resume",
        "--config",
        &other,
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("digest"));
}

const AUDIT: &str = r#"
[audit]
dim = 2
n_low = 16
n_high = 32
corpus_size = 4
seed = 11
"#;

#[test]
fn audit_is_bit_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), "audit.toml", AUDIT);
    for d in [&a, &b] {
        let out = nlcsim(&[
            "audit",
            "--config",
            &cfg,
            "--output-dir",
            d.path().to_str().unwrap(),
            "--quiet",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ra = fs::read(a.path().join("audit.tsv")).unwrap();
    let rb = fs::read(b.path().join("audit.tsv")).unwrap();
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert!(text.contains("interpolation besov"));
}

#[test]
fn audit_of_a_zero_corpus_is_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = AUDIT.replace("corpus_size = 4", "corpus_size = 1\nband = 0");
    let cfg = write_config(dir.path(), "zero.toml", &text);
    let out = nlcsim(&[
        "audit",
        "--config",
        &cfg,
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("audit.tsv")).unwrap();
    let rows: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows,
        vec!["id\tmax_ratio_low\tmax_ratio_high\trel_delta\tevaluated\tskipped"]
    );
}
