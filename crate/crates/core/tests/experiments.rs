use tvd::experiments::{fit_loglog_slope, replicate_data, replicate_mse, run_experiment, sidecar_path, Estimator, ExperimentSpec};
use tvd::{SignalKind, SolverConfig, TvError};

fn spec(signal: SignalKind, estimator: Estimator, sigma: f64) -> ExperimentSpec {
    ExperimentSpec { signal, n_list: vec![8, 12, 16], reps: 4, sigma, estimator, seed: 11 }
}

fn tight() -> SolverConfig {
    SolverConfig { rel_tol: 1e-10, bisect_tol: 1e-9, max_iters: 200_000, ..SolverConfig::default() }
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let s = spec(SignalKind::Four, Estimator::Notuning, 0.7);
    let cfg = SolverConfig::default();
    let a = run_experiment(&s, &cfg).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_experiment(&s, &cfg).unwrap());
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert_eq!(a.sidecar_json().unwrap(), b.sidecar_json().unwrap());
    assert_eq!(a.records.len(), 3);
    for r in &a.records {
        assert_eq!(r.big_n, r.n * r.n);
        assert!(r.mse_mean > 0.0 && r.mse_stderr >= 0.0);
    }
}

#[test]
fn replicate_data_depends_on_seed_n_and_rep() {
    let theta = tvd::make_signal(&SignalKind::Two.at(8)).unwrap();
    let a = replicate_data(&theta, 1.0, 5, 0);
    assert_eq!(a, replicate_data(&theta, 1.0, 5, 0));
    assert_ne!(a, replicate_data(&theta, 1.0, 5, 1));
    assert_ne!(a, replicate_data(&theta, 1.0, 6, 0));
}

#[test]
fn vanishing_noise_recovers_the_signal() {
    for signal in SignalKind::ALL {
        let s = ExperimentSpec { sigma: 1e-6, ..spec(signal, Estimator::IdealConstrained, 1e-6) };
        for &n in &s.n_list {
            let mse = replicate_mse(&s, n, 0, &tight()).unwrap();
            assert!(mse <= 1e-8, "{signal} n = {n}: {mse}");
        }
    }
}

#[test]
fn risk_grows_with_noise_level() {
    for estimator in [Estimator::IdealConstrained, Estimator::Notuning] {
        let mut last = 0.0;
        for sigma in [0.25, 0.5, 1.0, 2.0] {
            let s = ExperimentSpec { n_list: vec![16], reps: 30, ..spec(SignalKind::Two, estimator, sigma) };
            let mse = run_experiment(&s, &SolverConfig::default()).unwrap().records[0].mse_mean;
            assert!(mse > last, "{estimator} sigma = {sigma}: {mse} <= {last}");
            last = mse;
        }
    }
}

#[test]
fn csv_and_sidecar_layout() {
    let s = ExperimentSpec { n_list: vec![4, 6], reps: 2, ..spec(SignalKind::Worst, Estimator::IdealConstrained, 0.5) };
    let report = run_experiment(&s, &SolverConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("worst.csv");
    let side = report.write(&csv).unwrap();
    assert_eq!(side, sidecar_path(&csv));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "signal,estimator,n,N,mse_mean,mse_stderr");
    assert!(lines[1].starts_with("worst,ideal_constrained,4,16,"));
    assert!(lines[2].starts_with("worst,ideal_constrained,6,36,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(json["seed"], 11);
    assert_eq!(json["spec"]["n_list"], serde_json::json!([4, 6]));
    assert!((json["slope"].as_f64().unwrap() - report.fit.slope).abs() == 0.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let s = ExperimentSpec { n_list: vec![16, 8], ..spec(SignalKind::Two, Estimator::Notuning, 1.0) };
    assert!(matches!(run_experiment(&s, &SolverConfig::default()), Err(TvError::Argument(_))));
}

#[test]
fn exact_power_laws_are_recovered() {
    let pts: Vec<(f64, f64)> = [64.0, 256.0, 1024.0].iter().map(|&n: &f64| (n, 1.0 / n)).collect();
    let fit = fit_loglog_slope(&pts).unwrap();
    assert!((fit.slope + 1.0).abs() < 1e-12);
    assert!(fit.intercept.abs() < 1e-12);
    assert!(fit.slope_stderr < 1e-12);

    let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 5000.0].iter().map(|&n: &f64| (n, 4.0 * n.powf(-0.75))).collect();
    let fit = fit_loglog_slope(&pts).unwrap();
    assert!((fit.slope + 0.75).abs() < 1e-12);
    assert!((fit.intercept - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn noisy_fit_matches_normal_equations() {
    let pts = [(16.0, 0.30), (64.0, 0.12), (256.0, 0.061), (1024.0, 0.019), (4096.0, 0.0090)];
    // closed form via the 2x2 normal equations
    let k = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, m) in &pts {
        let (x, y) = (f64::ln(n), f64::ln(m));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = k * sxx - sx * sx;
    let slope = (k * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let ssr: f64 = pts.iter().map(|&(n, m)| (f64::ln(m) - intercept - slope * f64::ln(n)).powi(2)).sum();
    let stderr = (ssr / (k - 2.0) * k / det).sqrt();

    let fit = fit_loglog_slope(&pts).unwrap();
    assert!((fit.slope - slope).abs() < 1e-12);
    assert!((fit.intercept - intercept).abs() < 1e-12);
    assert!((fit.slope_stderr - stderr).abs() < 1e-12);
}

#[test]
fn fit_rejects_bad_points() {
    assert!(fit_loglog_slope(&[(4.0, 1.0)]).is_err());
    assert!(fit_loglog_slope(&[(4.0, 1.0), (16.0, 0.0)]).is_err());
    assert!(fit_loglog_slope(&[(4.0, 1.0), (4.0, 0.5)]).is_err());
}
