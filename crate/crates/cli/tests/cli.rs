use std::path::Path;
use std::process::{Command, Output};

fn conelab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conelab"));
    c.args(args).env_remove("CONELAB_OUT");
    if let Some(p) = env_out {
        c.env("CONELAB_OUT", p);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn regions_prints_label() {
    let o = conelab(&["regions", "--xi", "0,0,10"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Elliptic");
    let o = conelab(&["regions", "--xi", "-2,0,1"], None);
    assert_eq!(stdout(&o).trim(), "Oscillatory");
}

#[test]
fn bad_input_exits_one() {
    let o = conelab(&["decay", "--bogus"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = conelab(&["regions", "--xi", "1,2"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = conelab(&["regions", "--xi", "0,0,0"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = conelab(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 1\nlamdas = [8.0]\n").unwrap();
    let o = conelab(&["--config", cfg.to_str().unwrap(), "pieces"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
    let o = conelab(&["--lambdas", "4", "pieces"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
    let o = conelab(&["--trials", "0", "tau"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn decay_writes_csv_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let args = ["--out", out.to_str().unwrap(), "decay", "--direction", "1.5,0,1", "--rmin", "100", "--rmax", "10000"];
    let o = conelab(&args, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("PASS C2 decay 0")), "{s}");
    assert!(s.lines().any(|l| l.starts_with("PASS C3")), "{s}");
    let fits = std::fs::read_to_string(out.join("fits.csv")).unwrap();
    assert!(fits.starts_with("# conelab "));
    assert!(fits.contains("# config {\"command\":\"decay\""));
    assert!(fits.contains("experiment,x_name,slope,intercept,max_residual,n_points,pass\n"));
    let decay = std::fs::read_to_string(out.join("decay.csv")).unwrap();
    assert_eq!(decay.lines().filter(|l| !l.starts_with('#')).count(), 34);

    // Same config and seed: byte-identical output.
    let first: Vec<Vec<u8>> = ["fits.csv", "decay.csv"].iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(conelab(&args, None).status.code(), Some(0));
    let second: Vec<Vec<u8>> = ["fits.csv", "decay.csv"].iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn env_var_sets_output_dir_and_config_file_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[sweep]\nlambdas = [64.0]\n").unwrap();
    let o = conelab(&["--config", cfg.to_str().unwrap(), "pieces"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("partition_64.json").exists());
    let checks = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(checks.contains("\"seed\":5"));
    assert!(stdout(&o).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn tau_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let o = conelab(&["--trials", "1", "tau"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("PASS C10 tau")), "{s}");
    assert!(s.contains("tau_hat ="));
    let rows = std::fs::read_to_string(dir.path().join("tau.csv")).unwrap();
    assert!(rows.contains("lambda,j,delta,sector_count,ratio,random_ratio,knapp_ratio\n"));
}
