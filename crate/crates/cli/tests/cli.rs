use std::path::Path;
use std::process::{Command, Output};

fn roprec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roprec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = roprec(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn json(path: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sample_measure_recover() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (ens, truth, meas, rep) = (p(d, "e.txt"), p(d, "t.txt"), p(d, "b.txt"), p(d, "r.json"));
    ok(&[
        "sample",
        "--m",
        "6",
        "--n",
        "5",
        "--L",
        "60",
        "--seed",
        "1",
        "--rank",
        "1",
        "--truth-seed",
        "2",
        "--truth-out",
        &truth,
        "--out",
        &ens,
    ]);
    ok(&[
        "measure",
        "--ensemble",
        &ens,
        "--matrix",
        &truth,
        "--out",
        &meas,
    ]);
    ok(&[
        "recover",
        "--ensemble",
        &ens,
        "--measurements",
        &meas,
        "--method",
        "schatten-p",
        "--p",
        "0.5",
        "--constraint",
        "eq",
        "--truth",
        &truth,
        "--out",
        &rep,
        "--matrix-out",
        &p(d, "x.txt"),
    ]);
    let report = json(&rep);
    assert_eq!(report["feasible"], true);
    assert!(report["relative_error"].as_f64().unwrap() < 1e-6);
    assert!(d.join("x.txt").exists());
}

#[test]
fn csv_row_replays_through_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let csv = p(d, "trials.csv");
    ok(&[
        "phase-transition",
        "--set",
        "dims=6x6",
        "--set",
        "ratios=4",
        "--set",
        "method=nuclear",
        "--trials",
        "2",
        "--seed",
        "11",
        "--out",
        &csv,
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    let (ens, truth, meas, rep) = (p(d, "e.txt"), p(d, "t.txt"), p(d, "b.txt"), p(d, "r.json"));
    ok(&[
        "sample",
        "--m",
        "6",
        "--n",
        "6",
        "--L",
        col("L"),
        "--seed",
        col("ensemble_seed"),
        "--rank",
        col("r"),
        "--truth-seed",
        col("truth_seed"),
        "--truth-out",
        &truth,
        "--out",
        &ens,
    ]);
    ok(&[
        "measure",
        "--ensemble",
        &ens,
        "--matrix",
        &truth,
        "--out",
        &meas,
    ]);
    ok(&[
        "recover",
        "--ensemble",
        &ens,
        "--measurements",
        &meas,
        "--method",
        "nuclear",
        "--constraint",
        "eq",
        "--seed",
        col("trial_seed"),
        "--truth",
        &truth,
        "--out",
        &rep,
    ]);
    let replayed = json(&rep)["relative_error"].as_f64().unwrap();
    let recorded: f64 = col("error").parse().unwrap();
    assert!(
        (replayed - recorded).abs() <= 1e-12 * recorded.max(1e-300) + 1e-300,
        "{replayed} vs {recorded}"
    );
}

#[test]
fn certify_writes_conditions_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (ens, out) = (p(d, "e.txt"), p(d, "c.json"));
    ok(&[
        "sample", "--m", "8", "--n", "8", "--L", "120", "--seed", "3", "--out", &ens,
    ]);
    ok(&[
        "certify",
        "--ensemble",
        &ens,
        "--r",
        "1",
        "--k",
        "4",
        "--trials",
        "50",
        "--eta1",
        "0.01",
        "--out",
        &out,
    ]);
    let c = json(&out);
    for key in [
        "caveat",
        "rub_order",
        "c1_hat",
        "c2_hat",
        "exact_condition",
        "general_condition",
        "bounds",
    ] {
        assert!(!c[key].is_null(), "missing {key}");
    }
    assert!(c["c1_hat"].as_f64().unwrap() <= c["c2_hat"].as_f64().unwrap());
}

#[test]
fn experiments_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = p(d, "lad.cfg");
    std::fs::write(&cfg, "experiment = lad_robustness\ndims = 5x5\nL = 60\ncorruption = 0.05\ntrials = 2\nseed = 4\n")
        .unwrap();
    let run = |tag: &str| {
        let (t, c) = (p(d, &format!("t{tag}.csv")), p(d, &format!("c{tag}.csv")));
        ok(&["lad-robustness", &cfg, "--out", &t, "--cells-out", &c]);
        (std::fs::read(t).unwrap(), std::fs::read(c).unwrap())
    };
    assert_eq!(run("a"), run("b"));
    // Without --out the trials CSV goes to stdout, unchanged.
    let stdout = ok(&["lad-robustness", &cfg]).stdout;
    assert_eq!(stdout, run("c").0);
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "bad.cfg");
    std::fs::write(&cfg, "experiment = phase_transition\ntrials = many\n").unwrap();
    let out = roprec(&["phase-transition", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let wrong_kind = p(dir.path(), "kind.cfg");
    std::fs::write(&wrong_kind, "experiment = bound_check\n").unwrap();
    assert!(!roprec(&["phase-transition", &wrong_kind]).status.success());
    assert!(!roprec(&["phase-transition", "--set", "nonsense=1"])
        .status
        .success());
}

#[test]
fn recover_rejects_mismatched_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (ens, truth, meas) = (p(d, "e.txt"), p(d, "t.txt"), p(d, "b.txt"));
    ok(&[
        "sample",
        "--m",
        "3",
        "--n",
        "3",
        "--L",
        "20",
        "--rank",
        "1",
        "--truth-out",
        &truth,
        "--out",
        &ens,
    ]);
    ok(&[
        "measure",
        "--ensemble",
        &ens,
        "--matrix",
        &truth,
        "--out",
        &meas,
    ]);
    let base = [
        "recover",
        "--ensemble",
        &ens,
        "--measurements",
        &meas,
        "--out",
        &p(d, "r.json"),
    ];
    let sphere_for_schatten = [
        &base[..],
        &["--method", "schatten-p", "--constraint", "sphere"],
    ]
    .concat();
    assert!(!roprec(&sphere_for_schatten).status.success());
    let eq_for_least_q = [&base[..], &["--method", "least-q", "--constraint", "eq"]].concat();
    assert!(!roprec(&eq_for_least_q).status.success());
    let missing = [
        "measure",
        "--ensemble",
        &p(d, "nope.txt"),
        "--matrix",
        &truth,
        "--out",
        &meas,
    ];
    let out = roprec(&missing);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
