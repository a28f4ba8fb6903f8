use std::fs;
use std::process::{Command, Output};

fn qpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses a CSV body into rows of cells, skipping the header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn ideal_reference_row() {
    let o = qpa(&["ideal", "--f-alpha", "0.95", "--steps", "8"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("n,fidelity,one_minus_fidelity,step_probability,survival,efficiency\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 9);
    let infid = num(&r[5][2]);
    assert!((infid - 8.20e-6).abs() / 8.20e-6 < 0.01, "{infid}");
}

#[test]
fn ideal_without_intrusion() {
    let o = qpa(&["ideal", "--f-alpha", "0", "--steps", "4"]);
    for r in rows(&stdout(&o)) {
        assert!((num(&r[1]) - 1.0).abs() < 1e-15 && (num(&r[4]) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn ideal_survival_saturates() {
    let r = rows(&stdout(&qpa(&["ideal", "--f-alpha", "0.5", "--steps", "20"])));
    assert!((num(&r[20][4]) - 0.94).abs() < 0.01);
}

#[test]
fn noisy_behaviours() {
    let flip = rows(&stdout(&qpa(&[
        "noisy",
        "--channel",
        "bit-flip",
        "--theta",
        "0.1",
        "--steps",
        "10",
    ])));
    let infid: Vec<f64> = flip.iter().map(|r| num(&r[2])).collect();
    assert!(infid.windows(2).all(|w| w[1] < w[0]));

    let disp = rows(&stdout(&qpa(&[
        "noisy",
        "--channel",
        "disp-x",
        "--theta",
        "1e-3",
        "--steps",
        "10",
    ])));
    let last: Vec<f64> = disp.iter().rev().take(3).map(|r| num(&r[2])).collect();
    assert!((last[0] - last[1]).abs() < 1e-10 && last[0] > 1e-7);
}

#[test]
fn noisy_without_channel_matches_ideal() {
    let ideal = qpa(&["ideal", "--steps", "6"]);
    let none = qpa(&["noisy", "--channel", "none", "--theta", "0.3", "--steps", "6"]);
    assert_eq!(ideal.stdout, none.stdout);
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "sweep",
        "--channel",
        "thermal",
        "--theta-max",
        "0.2",
        "--theta-count",
        "5",
        "--out",
    ];
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.push(path.to_str().unwrap());
        assert!(qpa(&full).status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_ordering_and_consistency() {
    let o = qpa(&[
        "sweep",
        "--channel",
        "bit-flip,phase-flip,disp-z+",
        "--theta-min",
        "0",
        "--theta-max",
        "0.1",
        "--theta-count",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 12);
    let thetas: Vec<f64> = r.iter().map(|x| num(&x[0])).collect();
    assert!(thetas.windows(2).all(|w| w[0] <= w[1]));

    // theta = 0 is the noiseless value after five rounds
    let ideal = rows(&stdout(&qpa(&["ideal", "--steps", "5"])));
    assert!((num(&r[0][2]) - num(&ideal[5][2])).abs() < 1e-15);

    // phase flips hurt more than bit flips at equal strength
    for chunk in r.chunks(3).skip(1) {
        assert!(num(&chunk[1][2]) > num(&chunk[0][2]));
    }

    // grid endpoint equals a single noisy run
    let single = rows(&stdout(&qpa(&[
        "noisy",
        "--channel",
        "disp-z+",
        "--theta",
        "0.1",
        "--steps",
        "5",
    ])));
    assert_eq!(r[11][2], single[5][2]);
}

#[test]
fn table1_rows() {
    let o = qpa(&["table1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let names: Vec<&str> = r.iter().map(|x| x[0].as_str()).collect();
    assert_eq!(
        names,
        [
            "rot-x",
            "rot-y",
            "rot-z",
            "bit-flip",
            "bit-phase-flip",
            "phase-flip",
            "disp-x",
            "disp-y",
            "disp-z+"
        ]
    );
    let theta: Vec<f64> = r.iter().map(|x| num(&x[1])).collect();
    assert!((theta[0] - theta[3]).abs() / theta[3] < 1e-3);
    assert!((theta[6] - theta[7]).abs() / theta[7] < 0.01);
    assert!((theta[8] - 1.27e-1).abs() / 1.27e-1 < 0.02);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# noisy run\nchannel = phase-flip\ntheta=0.05\nsteps=3\nf-alpha=0.95\n",
    )
    .unwrap();
    let from_file = qpa(&["noisy", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    let direct = qpa(&["noisy", "--channel", "phase-flip", "--theta", "0.05", "--steps", "3"]);
    assert_eq!(from_file.stdout, direct.stdout);

    let overridden = qpa(&["noisy", "--config", cfg.to_str().unwrap(), "--steps", "2"]);
    assert_eq!(rows(&stdout(&overridden)).len(), 3);
}

#[test]
fn bad_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour=blue\n").unwrap();
    let o = qpa(&["ideal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn usage_errors_exit_one_with_single_line() {
    for args in [
        vec!["noisy", "--channel", "warp-drive", "--theta", "0.1"],
        vec!["ideal", "--f-alpha", "1.5"],
        vec!["ideal", "--steps", "many"],
        vec!["noisy", "--channel", "disp-x", "--theta", "2.0"],
        vec!["noisy", "--channel", "bit-flip", "--location", "charlie"],
        vec!["frobnicate"],
    ] {
        let o = qpa(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn numerical_failure_exits_two() {
    let o = qpa(&["table1", "--target", "1e-12"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("target"));
}

#[test]
fn verify_passes_on_fresh_build() {
    let o = qpa(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("representation agreement (disp-z+)"));
}

#[test]
fn verify_reports_corrupted_kraus() {
    let o = qpa(&["verify", "--corrupt-kraus-normalization"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("kraus completeness (bit-flip)"));
    assert!(stdout(&o).contains("FAIL kraus completeness (bit-flip)"));
}
