use std::f64::consts::PI;
use std::process::Command as Process;

use cavity_tangle::model::{Family, PairSum};
use cavity_tangle_cli::{
    file_arguments, parse_config, run, scan_grid, trajectory_points, CliError, Command, Layer,
    Model, EXIT_IO, EXIT_PHYSICS, EXIT_USAGE,
};

fn argv(s: &str) -> Vec<String> {
    std::iter::once("cavity-tangle".to_string())
        .chain(s.split_whitespace().map(String::from))
        .collect()
}

fn rows(path: &std::path::Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn header(path: &std::path::Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
#[allow(clippy::approx_constant)]
fn parses_trajectory_flags() {
    let c = parse_config(argv(
        "trajectory --kappa 1 --ising 0.5 --family phi --alpha 1.0472 --n 1 --out t.csv",
    ))
    .unwrap();
    assert_eq!(c.command, Command::Trajectory);
    assert_eq!(c.model, Model::Homogeneous);
    assert_eq!((c.kappa, c.ising, c.alpha, c.n), (1.0, 0.5, 1.0472, 1));
    assert_eq!(c.family, Family::Phi);
    assert_eq!(c.out_path, "t.csv");
}

#[test]
fn defaults() {
    let c = parse_config(argv("scan")).unwrap();
    assert_eq!(c.model, Model::Homogeneous);
    assert_eq!(c.pair_sum, PairSum::Matrix);
    assert_eq!(c.family, Family::Psi);
    assert_eq!(c.alpha, 2f64.sqrt().atan());
    assert_eq!((c.n, c.seed), (1, 0));
    assert_eq!((c.t_max, c.t_steps), (20.0, 401));
    assert_eq!((c.j_min, c.j_max, c.j_steps), (0.0, 2.0, 201));
    assert_eq!(c.layers, vec![Layer::Purity]);
    assert_eq!(c.out_path, "-");
}

#[test]
fn usage_errors() {
    for bad in [
        "",
        "--kappa 1",
        "wobble",
        "trajectory --kappa one",
        "trajectory --t-steps 1",
        "trajectory --kappa nan",
        "trajectory --out=",
        "scan --layers concurrence",
    ] {
        let err = parse_config(argv(bad)).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{bad:?}: {err:?}");
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# scan setup\nkappa=1\nt-max = 5  # short\n\nfamily=phi\n").unwrap();
    let c = parse_config(argv(&format!("scan --config {} --kappa 4", cfg.display()))).unwrap();
    assert_eq!(c.kappa, 4.0);
    assert_eq!(c.t_max, 5.0);
    assert_eq!(c.family, Family::Phi);
}

#[test]
fn config_file_errors() {
    assert!(matches!(file_arguments("kapa=1"), Err(CliError::Usage(_))));
    assert!(matches!(
        file_arguments("config=x"),
        Err(CliError::Usage(_))
    ));
    assert!(matches!(file_arguments("kappa"), Err(CliError::Usage(_))));
    assert_eq!(
        file_arguments("t_max=3\n# x=1\n").unwrap(),
        vec!["--t-max=3"]
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kappa=fast\n").unwrap();
    let err = parse_config(argv(&format!("scan --config {}", cfg.display()))).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
    let missing = dir.path().join("missing.cfg");
    let err = parse_config(argv(&format!("scan --config {}", missing.display()))).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_IO);
}

#[test]
fn redcurve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("red.csv");
    let t_max = PI / (2.0 * 3f64.sqrt());
    let c = parse_config(argv(&format!(
        "redcurve --n 1 --t-steps 3 --t-max {t_max} --out {}",
        out.display()
    )))
    .unwrap();
    run(&c).unwrap();
    assert_eq!(header(&out), "t,purity,concurrence");
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][0], 0.0);
    assert!((r[0][1] - 1.0).abs() < 1e-12);
    assert!((r[0][2] - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!((r[1][1] - 0.5).abs() < 1e-12);
    // End of the interval: excitation in the cavity, product qubit state.
    assert!((r[2][1] - 1.0).abs() < 1e-12 && r[2][2] < 1e-8);
}

#[test]
fn row_counts_and_headers() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.csv");
    run(&parse_config(argv(&format!(
        "trajectory --t-steps 2 --out {}",
        traj.display()
    )))
    .unwrap())
    .unwrap();
    assert_eq!(rows(&traj).len(), 2);

    let scan = dir.path().join("s.csv");
    run(&parse_config(argv(&format!(
        "scan --j-steps 5 --t-steps 5 --t-max 2 --out {}",
        scan.display()
    )))
    .unwrap())
    .unwrap();
    assert_eq!(header(&scan), "J,t,purity");
    assert_eq!(rows(&scan).len(), 25);

    run(&parse_config(argv(&format!(
        "scan --j-steps 5 --t-steps 5 --t-max 2 --layers purity,concurrence --out {}",
        scan.display()
    )))
    .unwrap())
    .unwrap();
    assert_eq!(header(&scan), "J,t,purity,concurrence");
    assert!(rows(&scan).iter().all(|r| r.len() == 4));
}

#[test]
fn csv_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let c = parse_config(argv(&format!(
        "trajectory --model quasi-homogeneous --family phi --alpha 1.0471975511965976 --t-steps 50 --out {}",
        out.display()
    )))
    .unwrap();
    run(&c).unwrap();
    let points = trajectory_points(&c).unwrap();
    for (row, p) in rows(&out).iter().zip(&points) {
        assert_eq!(row[0].to_bits(), p.t.to_bits());
        assert_eq!(row[1].to_bits(), p.purity.to_bits());
        assert_eq!(row[2].to_bits(), p.concurrence.to_bits());
    }

    let scan = dir.path().join("s.csv");
    let c = parse_config(argv(&format!(
        "scan --j-steps 4 --t-steps 6 --t-max 3 --layers concurrence,purity --out {}",
        scan.display()
    )))
    .unwrap();
    run(&c).unwrap();
    let grid = scan_grid(&c).unwrap();
    let conc = grid.concurrence.unwrap();
    for (i, row) in rows(&scan).iter().enumerate() {
        assert_eq!(row[2].to_bits(), grid.purity[i].to_bits());
        assert_eq!(row[3].to_bits(), conc[i].to_bits());
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let c = parse_config(argv(&format!(
            "scan --j-steps 7 --t-steps 9 --t-max 4 --n 2 --family phi --out {}",
            out.display()
        )))
        .unwrap();
        run(&c).unwrap();
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_cavity-tangle"))
}

#[test]
fn exit_statuses() {
    let status = |args: &[&str]| binary().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&[]), EXIT_USAGE as i32);
    assert_eq!(status(&["trajectory", "--kappa", "x"]), EXIT_USAGE as i32);
    assert_eq!(
        status(&[
            "trajectory",
            "--t-steps",
            "2",
            "--out",
            "/nonexistent-dir/out.csv"
        ]),
        EXIT_IO as i32
    );
    assert_eq!(
        status(&["trajectory", "--t-steps", "2", "--n", "0"]),
        EXIT_PHYSICS as i32
    );
    assert_eq!(status(&["redcurve", "--t-steps", "2"]), 0);
}

#[test]
fn thread_count_does_not_change_output() {
    let run_with = |threads: &str| {
        binary()
            .args(["scan", "--j-steps", "6", "--t-steps", "5", "--t-max", "2"])
            .env("CAVITY_TANGLE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run_with("1");
    let four = run_with("4");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run_with("zero").status.code(), Some(EXIT_USAGE as i32));
}
