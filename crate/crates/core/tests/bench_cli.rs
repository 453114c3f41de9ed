use std::path::Path;
use std::process::Command;

use onebit::bench::*;

fn fast(method: Method, sweep: SweepVar) -> SweepConfig {
    let mut c = SweepConfig::fast(method, sweep);
    c.n = 30;
    c.s = 3;
    c.trials = 3;
    c
}

fn csv_bytes(r: &SweepReport) -> (Vec<u8>, Vec<u8>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    r.write_csv(&mut a).unwrap();
    r.write_agg_csv(&mut b).unwrap();
    (a, b)
}

#[test]
fn single_trial_runs_are_byte_identical() {
    for method in [Method::PvAug, Method::Edf, Method::Combined] {
        let mut c = fast(method, SweepVar::MOverN);
        c.trials = 1;
        let a = csv_bytes(&run_m_sweep(&c).unwrap());
        let b = csv_bytes(&run_m_sweep(&c).unwrap());
        assert_eq!(a, b, "{method}");
    }
}

#[test]
fn reports_are_deterministic_under_both_couplings() {
    for coupling in [Coupling::Paired, Coupling::Independent] {
        let mut c = fast(Method::PvAug, SweepVar::Tau);
        c.coupling = coupling;
        c.grid = vec![1.0, 15.0, 40.0];
        assert_eq!(csv_bytes(&run_tau_sweep(&c).unwrap()), csv_bytes(&run_tau_sweep(&c).unwrap()));
    }
}

#[test]
fn header_and_shape() {
    let c = fast(Method::Combined, SweepVar::MOverN);
    let rep = run_m_sweep(&c).unwrap();
    let (rows, agg) = csv_bytes(&rep);
    let rows = String::from_utf8(rows).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("method,grid_var,grid_value,trial,seed,norm_error,signal_error,status,wall_ms"));
    assert_eq!(lines.count(), c.grid.len() * c.trials);
    let agg = String::from_utf8(agg).unwrap();
    assert_eq!(agg.lines().count(), c.grid.len() + 1);
    assert!(agg.starts_with(AGG_HEADER));
    for r in &rep.rows {
        assert_eq!(r.grid_var, SweepVar::MOverN);
        assert_eq!(r.wall_ms, 0.0);
    }
    let keys: Vec<(usize, usize)> = rep.rows.iter().map(|r| (r.grid_index, r.trial)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn paired_coupling_reuses_trial_signals() {
    let c = fast(Method::Edf, SweepVar::MOverN);
    let rep = run_m_sweep(&c).unwrap();
    for t in 0..c.trials {
        let seeds: Vec<u64> = rep.rows.iter().filter(|r| r.trial == t).map(|r| r.seed).collect();
        assert!(seeds.windows(2).all(|w| w[0] == w[1]));
    }
    let mut ind = c.clone();
    ind.coupling = Coupling::Independent;
    let rep = run_m_sweep(&ind).unwrap();
    let mut seeds: Vec<u64> = rep.rows.iter().map(|r| r.seed).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds.len(), rep.rows.len());
}

fn parse_opt(field: &str) -> Option<f64> {
    (!field.is_empty()).then(|| field.parse().unwrap())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Recomputes the aggregate file from the row file alone.
fn recompute_aggregates(rows_csv: &str, failed: impl Fn(&str) -> bool) -> String {
    let mut out = String::from(AGG_HEADER);
    out.push('\n');
    let rows: Vec<Vec<&str>> = rows_csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let mut grid: Vec<&str> = Vec::new();
    for r in &rows {
        if !grid.contains(&r[2]) {
            grid.push(r[2]);
        }
    }
    let stats = |v: &[f64]| -> (Option<f64>, Option<f64>) {
        if v.is_empty() {
            return (None, None);
        }
        let k = v.len() as f64;
        let mean = v.iter().sum::<f64>() / k;
        let sd = if v.len() < 2 { 0.0 } else { (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)).sqrt() };
        (Some(mean), Some(sd))
    };
    for g in grid {
        let at: Vec<&Vec<&str>> = rows.iter().filter(|r| r[2] == g).collect();
        let ok: Vec<&&Vec<&str>> = at.iter().filter(|r| !failed(r[7])).collect();
        let norms: Vec<f64> = ok.iter().filter_map(|r| parse_opt(r[5])).collect();
        let sigs: Vec<f64> = ok.iter().filter_map(|r| parse_opt(r[6])).collect();
        let (mn, sn) = stats(&norms);
        let (ms, ss) = stats(&sigs);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            at[0][0],
            at[0][1],
            g,
            at.len(),
            at.len() - ok.len(),
            fmt_opt(mn),
            fmt_opt(sn),
            fmt_opt(ms),
            fmt_opt(ss)
        ));
    }
    out
}

#[test]
fn aggregates_are_recomputable_from_rows() {
    let failed = |s: &str| !matches!(s, "ok" | "optimal" | "saturated");
    for (method, sweep) in [
        (Method::PvAug, SweepVar::MOverN),
        (Method::Edf, SweepVar::Tau),
        (Method::Combined, SweepVar::Tau),
    ] {
        let mut c = fast(method, sweep);
        c.trials = 4;
        if sweep == SweepVar::Tau {
            c.grid = vec![1e-6, 0.5, 15.0, 1e4];
        }
        let rep = match sweep {
            SweepVar::MOverN => run_m_sweep(&c),
            SweepVar::Tau => run_tau_sweep(&c),
        }
        .unwrap();
        let (rows, agg) = csv_bytes(&rep);
        let rows = String::from_utf8(rows).unwrap();
        assert_eq!(recompute_aggregates(&rows, failed), String::from_utf8(agg).unwrap(), "{method}");
        for r in &rep.rows {
            assert!(!r.status.is_empty());
            assert_eq!(r.failed, failed(r.status));
            if r.failed {
                assert!(r.norm_error.is_none() && r.signal_error.is_none());
            }
        }
    }
}

#[test]
fn extreme_thresholds_for_edf() {
    let mut c = fast(Method::Edf, SweepVar::Tau);
    c.trials = 20;
    c.grid = vec![1e-6, 1e4];
    let rep = run_tau_sweep(&c).unwrap();
    let high: Vec<&TrialRow> = rep.rows.iter().filter(|r| r.grid_value == 1e4).collect();
    assert!(high.iter().all(|r| r.status == "saturated"));
    let low = &rep.aggregates[0];
    assert!(low.failures > 0, "tiny thresholds should produce F_m <= 1/2");
    assert!(rep.rows.iter().filter(|r| r.grid_value == 1e-6 && r.failed).all(|r| r.status == "below_half"));
}

#[test]
fn relative_tau_grid() {
    let mut c = fast(Method::Edf, SweepVar::Tau);
    c.tau_relative = true;
    c.grid = vec![1.0];
    c.m_over_n = 100.0;
    c.trials = 10;
    let rep = run_tau_sweep(&c).unwrap();
    assert_eq!(rep.aggregates[0].failures, 0);
    assert!(rep.aggregates[0].mean_norm_error.unwrap() < 2.0);
}

#[test]
fn edf_error_decays_like_a_power_of_m() {
    let mut c = SweepConfig::standard(Method::Edf, SweepVar::MOverN);
    c.grid = vec![10.0, 40.0, 160.0];
    let rep = run_m_sweep(&c).unwrap();
    let pts: Vec<(f64, f64)> = rep
        .aggregates
        .iter()
        .map(|a| ((a.grid_value * c.n as f64).ln(), a.mean_norm_error.unwrap().ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((-1.2..=-0.3).contains(&slope), "slope {slope}");
}

#[test]
fn timing_is_recorded_on_request() {
    let mut c = fast(Method::PvAug, SweepVar::MOverN);
    c.timing = true;
    c.trials = 1;
    let rep = run_m_sweep(&c).unwrap();
    assert!(rep.rows.iter().all(|r| r.wall_ms >= 0.0));
    assert!(rep.rows.iter().any(|r| r.wall_ms > 0.0));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = fast(Method::Edf, SweepVar::MOverN);
    c.grid = vec![];
    assert!(run_m_sweep(&c).is_err());
    let mut c = fast(Method::Edf, SweepVar::MOverN);
    c.trials = 0;
    assert!(run_m_sweep(&c).is_err());
    let mut c = fast(Method::Combined, SweepVar::MOverN);
    c.grid = vec![0.001];
    assert!(run_m_sweep(&c).is_err());
    let mut c = fast(Method::Edf, SweepVar::MOverN);
    c.s = 100;
    assert!(run_m_sweep(&c).is_err());
}

#[test]
fn planner_outputs() {
    let out = plan_sample_size(&PlanGoal::new(PlanMethod::EdfFixed)).unwrap();
    assert_eq!(out.counts, vec![("m", 548042)]);
    assert!(out.to_string().contains("m = 548042"));

    let mut g = PlanGoal::new(PlanMethod::PvAug);
    g.delta = 0.9;
    let l = (2.0 * 300.0 / 10.0f64).ln();
    let expected = ((2f64.sqrt() * 20.0 / 0.9).powi(5) * 10.0 * l * l).ceil() as u64;
    assert_eq!(plan_sample_size(&g).unwrap().counts, vec![("m", expected)]);
    g.tau = Some(1.0);
    let err = plan_sample_size(&g).unwrap_err().to_string();
    assert!(err.contains("min(1, tau/2)"), "{err}");

    let out = plan_sample_size(&PlanGoal::new(PlanMethod::Combined)).unwrap();
    let names: Vec<&str> = out.counts.iter().map(|c| c.0).collect();
    assert_eq!(names, vec!["m1", "m2", "m"]);

    let out = plan_sample_size(&PlanGoal::new(PlanMethod::EdfUniform)).unwrap();
    assert_eq!(out.counts, vec![("m", 113442)]);
    let mut g = PlanGoal::new(PlanMethod::CdfInterval);
    g.delta = 0.1;
    assert!(plan_sample_size(&g).is_ok());
    g.delta = 0.3;
    assert!(plan_sample_size(&g).is_err());
}

fn onebit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onebit"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cli_plan() {
    assert!(run_ok(onebit().args(["plan"])).contains("m = 548042"));
    let combined = run_ok(onebit().args(["plan", "--method", "combined"]));
    assert!(combined.contains("m1 = ") && combined.contains("m2 = "));
    let out = onebit().args(["plan", "--delta", "50"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
    assert_eq!(onebit().args(["plan", "--method", "nope"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn cli_sweep_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edf.csv");
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# small run\nn = 20\ns = 2\ntrials = 2\ngrid = 5, 10\n").unwrap();
    let args = |p: &Path| {
        vec![
            "sweep-m".to_string(),
            "--method".into(),
            "edf".into(),
            "--config".into(),
            cfg.display().to_string(),
            "--seed".into(),
            "9".into(),
            "-o".into(),
            p.display().to_string(),
        ]
    };
    run_ok(onebit().args(args(&out)));
    let rows = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 2);
    assert!(rows.starts_with(CSV_HEADER));
    assert!(dir.path().join("edf.agg.csv").exists());

    let again = dir.path().join("again.csv");
    run_ok(onebit().args(args(&again)).env("ONEBIT_WORKERS", "1"));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    let bad = onebit().args(args(&again)).env("ONEBIT_WORKERS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(onebit().args(args(&again)).output().unwrap().status.code(), Some(2));
}

#[test]
fn cli_sweep_tau_fast() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.csv");
    let stdout = run_ok(onebit().args([
        "sweep-tau",
        "--fast",
        "--method",
        "edf",
        "--grid",
        "5,15,45",
        "--trials",
        "2",
        "-o",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.starts_with(AGG_HEADER));
    assert_eq!(stdout.lines().count(), 4);
}

#[test]
fn cli_simulate_recover_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    run_ok(onebit().args([
        "simulate", "--n", "25", "--s", "3", "--m", "400", "--seed", "4", "--signal", &p("x.txt"), "--signs", &p("y.txt"),
        "--ensemble", &p("e.csv"),
    ]));
    let est = run_ok(onebit().args(["recover", "--ensemble", &p("e.csv"), "--signs", &p("y.txt"), "--truth", &p("x.txt")]));
    assert_eq!(est.lines().count(), 25);

    run_ok(onebit().args([
        "simulate", "--n", "25", "--s", "3", "--m", "50000", "--shift", "constant", "--tau", "10", "--signal", &p("x2.txt"),
        "--signs", &p("y2.txt"),
    ]));
    let out = run_ok(onebit().args(["estimate-norm", "--signs", &p("y2.txt"), "--tau", "10"]));
    assert!(out.contains("status = ok"), "{out}");
    let lambda: f64 = out.lines().find_map(|l| l.strip_prefix("lambda = ")).unwrap().parse().unwrap();
    let x: Vec<f64> = std::fs::read_to_string(p("x2.txt")).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((lambda - norm).abs() < 0.5, "{lambda} vs {norm}");

    let missing = onebit().args(["estimate-norm", "--signs", &p("nope.txt"), "--tau", "1"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
