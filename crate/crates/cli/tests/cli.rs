use std::path::Path;
use std::process::{Command, Output};

fn floquet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floquet"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with("# floquet ")).collect::<Vec<_>>().join("\n")
}

#[test]
fn simulate_writes_a_trace_and_prints_the_final_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let o = floquet(&["simulate", "--protocol", "ff", "--out", "res"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let f: f64 = stdout.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(f > 0.98, "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("res/simulate_ff.csv")).unwrap();
    assert!(csv.starts_with("# floquet "));
    assert!(csv.contains("\nt_us,fidelity\n"));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&floquet(&["figure", "nope"], dir.path())), 2);
    assert_eq!(code(&floquet(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&floquet(&["scan", "--axis", "protocol.name", "--values", "1"], dir.path())), 2);
    assert_eq!(code(&floquet(&["scan", "--axis", "tau", "--range", "1:2:0"], dir.path())), 2);

    std::fs::write(dir.path().join("bad.toml"), "[protocol]\ntau_us = -2.0\n").unwrap();
    let o = floquet(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    assert_eq!(code(&floquet(&["simulate", "--config", "missing.toml"], dir.path())), 5);

    // Ω inside the guard band around the first zero of J1(2Ω).
    let o = floquet(&["simulate", "--set", "protocol.capital_omega=1.9158529", "--protocol", "fe"], dir.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    // Ω = π/4 is not a multiple of π; strict mode turns that warning into a config error.
    assert_eq!(code(&floquet(&["simulate", "--strict-floquet"], dir.path())), 3);
}

#[test]
fn scans_are_reproducible_with_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("noisy.toml"),
        "[protocol]\nname = \"fe\"\ntau_us = 2.0\n[noise]\nbandwidth_mhz = 2.5\nrms_mhz = 0.05\ntones = 64\n[ensemble]\nrealizations = 6\n",
    )
    .unwrap();
    let run = |out: &str| {
        let o = floquet(
            &["scan", "--config", "noisy.toml", "--axis", "gamma_rms", "--values", "0.02,0.08", "--seed", "3", "--out", out],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        body(&dir.path().join(out).join("scan_fe_noise_rms_mhz.csv"))
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!(a.contains("gamma_rms") || a.contains("rms_mhz,final_fidelity,std,sem"));
}

#[test]
fn figure_list_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = floquet(&["figure", "--list"], dir.path());
    assert_eq!(code(&o), 0);
    let ids = String::from_utf8(o.stdout).unwrap();
    assert_eq!(ids.lines().count(), 11);
    let o = floquet(&["figure", "fig3b", "--out", "figs"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for p in ["lz", "ff", "fe"] {
        assert!(dir.path().join(format!("figs/fig3b_{p}.csv")).exists());
    }
}

#[test]
fn ramsey_reports_the_decay_rate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("r.toml"),
        "[noise]\nbandwidth_mhz = 2.5\nt2star_us = 4.0\ntones = 1000\n[ensemble]\nrealizations = 1000\n[ramsey]\ndetuning_mhz = 1.0\nduration_us = 16.0\n",
    )
    .unwrap();
    let o = floquet(&["ramsey", "--config", "r.toml", "--out", "."], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let t2: f64 = stdout.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((t2 - 4.0).abs() < 0.6, "{stdout}");
    assert!(dir.path().join("ramsey.csv").exists());
    assert_eq!(code(&floquet(&["ramsey"], dir.path())), 3);
}

#[test]
fn variational_fits_and_evolves_a_qutrit() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("qutrit.txt"),
        "# H0 then H1, real and imaginary parts\n3\n\
         -1 0  0.1 0.05  0 0\n0.1 -0.05  0.2 0  0.1 0\n0 0  0.1 0  1.5 0\n\
         0 0  0.5 0  0.1 0.1\n0.5 0  0 0  0.4 0\n0.1 -0.1  0.4 0  0 0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("v.toml"),
        "[variational]\nproblem = \"qutrit.txt\"\nlambda0 = 1.0\ntau = 1.0\nharmonics = 5\nomega = 120.0\nframe_compensated = true\nbudget = 600\nrestarts = 2\n[stepper]\nbase_dt_us = 0.001\n",
    )
    .unwrap();
    let o = floquet(&["variational", "--config", "v.toml", "--out", "v"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let fid = |label: &str| -> f64 {
        let line = stdout.lines().find(|l| l.starts_with(label)).unwrap();
        line.split_whitespace().last().unwrap().parse().unwrap()
    };
    assert!(fid("dense-cd") > 0.9999, "{stdout}");
    assert!(fid("dense-floquet") > fid("dense-bare"), "{stdout}");
    for f in ["variational_fit.csv", "variational_dense-bare.csv", "variational_dense-cd.csv", "variational_dense-floquet.csv"] {
        assert!(dir.path().join("v").join(f).exists(), "{f}");
    }

    std::fs::write(dir.path().join("bad.txt"), "3\n1 0 0 0\n").unwrap();
    let o = floquet(&["variational", "--config", "v.toml", "--problem", "bad.txt"], dir.path());
    assert_eq!(code(&o), 3);
}
