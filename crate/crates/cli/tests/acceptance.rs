//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line (run with `--nocapture` to see them).

use std::time::Instant;

use anderson_core::estimators::{
    evls_tail_curve, generalized_minami_curve, wegner_curve, BandEdgeWindow, EnsembleParams,
};
use anderson_core::lattice::LatticeGeometry;
use anderson_core::les::{poisson_fit, poisson_fit_calibration, default_windows};
use anderson_core::operator::{
    analytic_bc_spectrum, block_direct_sum_laplacian, hamiltonian, laplacian, potential,
    BoundaryCondition, Configuration, OperatorMatrix,
};
use anderson_core::randomness::{sample_configuration, Density, SeedSpec};
use anderson_core::spectral::{
    cluster_report, eigensolve, feynman_hellmann_alphas, solve_hamiltonian,
    weyl_rank_m_check, IntervalSet, Spectrum,
};
use anderson_core::splitting::{degenerate_d2_instance, split_cluster, verify_certificate};
use rand::Rng;

fn finish(name: &str, what: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_s,
        "{name} exceeded its runtime budget: {elapsed:.1}s >= {limit_s}s"
    );
    println!("{name} PASS: {what} ({elapsed:.1}s)");
}

#[test]
fn ac1_analytic_spectra() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for d in [1usize, 2] {
        for l in [2usize, 4, 6, 8] {
            for r in [1usize, 2] {
                let geometry = LatticeGeometry::new(d, l, r).unwrap();
                for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
                    let numeric = eigensolve(&laplacian(geometry, bc), false).unwrap();
                    let oracle = analytic_bc_spectrum(geometry, bc).unwrap();
                    let deviation = numeric.max_deviation(&oracle);
                    worst = worst.max(deviation);
                    assert!(
                        deviation <= 1e-10,
                        "d={d} L={l} r={r} {bc}: deviation {deviation:e}"
                    );
                }
            }
        }
    }
    finish("AC-1", &format!("analytic spectra, worst deviation {worst:.2e}"), started, 5.0);
}

#[test]
fn ac2_bracketing() {
    let started = Instant::now();
    let mut geometries = Vec::new();
    for d in [1usize, 2] {
        for l in (2..=16).step_by(2) {
            geometries.push(LatticeGeometry::new(d, l, 2).unwrap());
        }
    }
    let mut worst_slack = f64::INFINITY;
    for case in 0..200u64 {
        let geometry = geometries[case as usize % geometries.len()];
        let configuration = sample_configuration(
            geometry,
            Density::Uniform,
            &SeedSpec::new(1000 + case, 0, "bracketing"),
        );
        let v = potential(&configuration).into_entries();
        let h = eigensolve(&hamiltonian(&configuration, BoundaryCondition::Simple), false)
            .unwrap();
        let neumann = OperatorMatrix::new(
            geometry,
            block_direct_sum_laplacian(geometry, BoundaryCondition::Neumann).into_entries() + &v,
        )
        .unwrap();
        let dirichlet = OperatorMatrix::new(
            geometry,
            block_direct_sum_laplacian(geometry, BoundaryCondition::Dirichlet).into_entries() + &v,
        )
        .unwrap();
        let lower = eigensolve(&neumann, false).unwrap();
        let upper = eigensolve(&dirichlet, false).unwrap();
        for j in 0..h.len() {
            let slack_lower = h.eigenvalues()[j] - lower.eigenvalues()[j];
            let slack_upper = upper.eigenvalues()[j] - h.eigenvalues()[j];
            worst_slack = worst_slack.min(slack_lower).min(slack_upper);
            assert!(
                slack_lower >= -1e-10 && slack_upper >= -1e-10,
                "bracketing violated at case {case}, j={j}"
            );
        }
    }
    finish(
        "AC-2",
        &format!("bracketing on 200 cases, worst slack {worst_slack:.2e}"),
        started,
        30.0,
    );
}

#[test]
fn ac3_shift_covariance() {
    let started = Instant::now();
    // couplings and shifts on the dyadic 2^-26 grid keep every addition in
    // the identity exactly representable
    let scale = (1u64 << 26) as f64;
    let geometries = [
        LatticeGeometry::new(1, 16, 2).unwrap(),
        LatticeGeometry::new(2, 8, 2).unwrap(),
    ];
    for case in 0..100u64 {
        let geometry = geometries[case as usize % 2];
        let mut rng = SeedSpec::new(3, case, "shift").rng();
        let values: Vec<f64> = (0..geometry.num_blocks())
            .map(|_| (rng.gen::<f64>() * scale).round() / scale)
            .collect();
        let tau = ((rng.gen::<f64>() * 2.0 - 1.0) * scale).round() / scale;
        let configuration = Configuration::new(geometry, values.clone()).unwrap();
        let shifted =
            Configuration::new(geometry, values.iter().map(|v| v + tau).collect()).unwrap();
        let lhs = hamiltonian(&shifted, BoundaryCondition::Simple);
        let rhs = hamiltonian(&configuration, BoundaryCondition::Simple).shifted(tau);
        let diff = lhs.sub(&rhs).unwrap().max_abs_entry();
        assert_eq!(diff, 0.0, "case {case}: max difference {diff:e}");
    }
    finish("AC-3", "shift covariance exact on 100 cases", started, 5.0);
}

#[test]
fn ac4_weyl_rank_m() {
    let started = Instant::now();
    for (r, bound) in [(2usize, 2usize), (1, 1)] {
        let geometry = LatticeGeometry::new(1, 16, r).unwrap();
        let mut rng = SeedSpec::new(4, r as u64, "weyl-acceptance").rng();
        let mut worst = 0usize;
        for trial in 0..1000u64 {
            let configuration = sample_configuration(
                geometry,
                Density::Uniform,
                &SeedSpec::new(40_000 + trial, 0, "weyl-acceptance"),
            );
            let block = rng.gen_range(0..geometry.num_blocks());
            let new_value: f64 = rng.gen();
            let lo: f64 = rng.gen_range(-0.5..4.8);
            let width: f64 = rng.gen_range(0.005..2.5);
            let window = IntervalSet::interval(lo, lo + width).unwrap();
            let moved = weyl_rank_m_check(&configuration, block, new_value, &window).unwrap();
            worst = worst.max(moved);
            assert!(
                moved <= bound,
                "rank {} moved {moved} eigenvalues at trial {trial}",
                geometry.block_rank()
            );
        }
        println!("  rank {} worst movement: {worst}", geometry.block_rank());
    }
    finish("AC-4", "rank-m eigenvalue movement bounded on 2x1000 trials", started, 120.0);
}

#[test]
fn ac5_wegner_and_minami_scaling() {
    let started = Instant::now();
    let params = EnsembleParams {
        geometry: LatticeGeometry::new(1, 16, 2).unwrap(),
        density: Density::Uniform,
        bc: BoundaryCondition::Simple,
        trials: 100_000,
        master_seed: 42,
    };
    let wegner = wegner_curve(&params, 0.5, &[0.02, 0.04, 0.08]).unwrap();
    let wegner_slope = wegner.expected_count.slope.expect("positive estimates");
    assert!(
        (0.9..=1.1).contains(&wegner_slope),
        "Wegner slope {wegner_slope} outside [0.9, 1.1]"
    );
    // triple events below width 0.2 are too rare to estimate at this trial
    // count, so the quadratic-law slope is fitted where events occur
    let minami = generalized_minami_curve(&params, 0.5, &[0.2, 0.3, 0.4]).unwrap();
    let minami_slope = minami.slope.expect("positive estimates");
    assert!(
        minami_slope >= 1.8,
        "Minami slope {minami_slope} below 1.8"
    );
    finish(
        "AC-5",
        &format!("Wegner slope {wegner_slope:.3}, Minami slope {minami_slope:.3}"),
        started,
        900.0,
    );
}

#[test]
fn ac6_evls_tail_monotonicity() {
    let started = Instant::now();
    let params = EnsembleParams {
        geometry: LatticeGeometry::new(1, 32, 2).unwrap(),
        density: Density::Uniform,
        bc: BoundaryCondition::Simple,
        trials: 100_000,
        master_seed: 42,
    };
    let window = BandEdgeWindow::new(0.5, params.geometry).unwrap();
    let deltas = [1e-2, 1e-4, 1e-6];
    let out = evls_tail_curve(&params, &window, &deltas).unwrap();
    // per-trial nesting makes the tail exactly monotone in delta
    assert!(
        out.tail.estimate[0] >= out.tail.estimate[1]
            && out.tail.estimate[1] >= out.tail.estimate[2],
        "tail not monotone: {:?}",
        out.tail.estimate
    );
    // and the confidence bands must respect the same ordering
    assert!(out.tail.ci_low[0] <= out.tail.ci_high[0]);
    assert!(
        out.tail.ci_low[1] <= out.tail.ci_high[0],
        "CI ordering violated between 1e-2 and 1e-4"
    );
    assert!(
        out.tail.ci_low[2] <= out.tail.ci_high[1],
        "CI ordering violated between 1e-4 and 1e-6"
    );
    assert_eq!(out.inclusion_violations, 0, "per-trial inclusion violated");
    finish(
        "AC-6",
        &format!(
            "EVLS tail monotone {:?} with zero inclusion violations",
            out.tail.estimate
        ),
        started,
        1200.0,
    );
}

#[test]
fn ac7_splitting_certificates() {
    let started = Instant::now();
    let mut successes = 0;
    let total = 50u64;
    for instance in 0..total {
        let problem = degenerate_d2_instance(8, 0.05, instance, 2025).unwrap();
        let certificate = split_cluster(&problem, 500, 100 + instance).unwrap();
        if !certificate.success {
            continue;
        }
        let audit = verify_certificate(&problem, &certificate);
        assert!(
            audit.sound,
            "certificate failed fresh re-verification at instance {instance}: {audit:?}"
        );
        assert!(audit.spacing > certificate.target_spacing);
        assert!(audit.sup_distance <= problem.epsilon);
        successes += 1;
    }
    let rate = successes as f64 / total as f64;
    assert!(
        rate >= 0.9,
        "only {successes}/{total} instances produced verified certificates"
    );
    finish(
        "AC-7",
        &format!("splitting certified on {successes}/{total} degenerate instances"),
        started,
        600.0,
    );
}

#[test]
fn ac8_poisson_les() {
    let started = Instant::now();
    let params = EnsembleParams {
        geometry: LatticeGeometry::new(1, 512, 2).unwrap(),
        density: Density::Uniform,
        bc: BoundaryCondition::Simple,
        trials: 2000,
        master_seed: 42,
    };
    let report = poisson_fit(&params, 0.5, &default_windows()).unwrap();
    for window in &report.windows {
        assert!(
            window.chi_square.p_value > 0.01,
            "window |I|={} rejected Poisson: p = {}",
            window.length,
            window.chi_square.p_value
        );
        assert!(window.identity_ok, "counting identity failed at |I|={}", window.length);
    }
    let calibration =
        poisson_fit_calibration(1.0, 400, 150, &default_windows(), 0.05, 9090).unwrap();
    assert!(
        calibration.rejection_rate <= 0.05,
        "calibration rejects at {:.3} > nominal 0.05",
        calibration.rejection_rate
    );
    let p_values: Vec<String> = report
        .windows
        .iter()
        .map(|w| format!("{:.3}", w.chi_square.p_value))
        .collect();
    finish(
        "AC-8",
        &format!(
            "Poisson fit p-values [{}], n_hat {:.4}, calibration rate {:.3}",
            p_values.join(", "),
            report.n_hat,
            calibration.rejection_rate
        ),
        started,
        3600.0,
    );
}

/// Maximal runs separated by `gap`, returned as an interval with margin.
fn isolated_cluster(spectrum: &Spectrum, gap: f64, margin: f64) -> Option<IntervalSet> {
    let ev = spectrum.eigenvalues();
    let mut start = 0usize;
    for j in 0..=ev.len() {
        let boundary = j == ev.len() || (j > 0 && ev[j] - ev[j - 1] > gap);
        if boundary && j > start {
            let window =
                IntervalSet::interval(ev[start] - margin, ev[j - 1] + margin).unwrap();
            let report = cluster_report(spectrum, &window);
            if report.gap_to_rest >= 0.1 && report.n == j - start {
                return Some(window);
            }
            start = j;
        } else if boundary {
            start = j;
        }
    }
    None
}

#[test]
fn ac9_feynman_hellmann() {
    let started = Instant::now();
    let geometry = LatticeGeometry::new(1, 8, 2).unwrap();
    let h = 1e-5;
    let mut clusters = 0;
    let mut seed = 0u64;
    let mut worst_fd = 0.0f64;
    let mut worst_sum = 0.0f64;
    while clusters < 100 {
        seed += 1;
        assert!(seed < 4000, "could not assemble 100 isolated clusters");
        let configuration =
            sample_configuration(geometry, Density::Uniform, &SeedSpec::new(seed, 0, "fh-acc"));
        let spectrum = solve_hamiltonian(&configuration, BoundaryCondition::Simple, true);
        let Some(window) = isolated_cluster(&spectrum, 0.14, 0.02) else {
            continue;
        };
        let alphas = feynman_hellmann_alphas(&spectrum, &window, geometry).unwrap();
        let total: f64 = alphas.iter().sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
        assert!((total - 1.0).abs() <= 1e-9, "alpha sum off by {}", total - 1.0);
        for (block, &alpha) in alphas.iter().enumerate() {
            let mean_at = |value: f64| {
                let moved =
                    configuration.with_value(block, configuration.value(block) + value);
                let spec = solve_hamiltonian(&moved, BoundaryCondition::Simple, false);
                cluster_report(&spec, &window).mean.expect("cluster stable")
            };
            let derivative = (mean_at(h) - mean_at(-h)) / (2.0 * h);
            let misfit = (alpha - derivative).abs();
            worst_fd = worst_fd.max(misfit);
            assert!(
                misfit <= 1e-6,
                "cluster {clusters}, block {block}: alpha {alpha} vs {derivative}"
            );
        }
        clusters += 1;
    }
    finish(
        "AC-9",
        &format!(
            "Feynman-Hellmann on 100 clusters, worst misfit {worst_fd:.2e}, worst sum error {worst_sum:.2e}"
        ),
        started,
        300.0,
    );
}

#[test]
fn ac10_cli_determinism() {
    let started = Instant::now();
    let binary = env!("CARGO_BIN_EXE_anderson-lab");
    let base = std::env::temp_dir().join(format!("anderson-ac10-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);

    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "spectrum",
            ["spectrum", "--d", "1", "--L", "8", "--r", "2", "--bc", "dirichlet", "--check-analytic", "--dump-matrix"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "wegner",
            ["wegner", "--d", "1", "--L", "8", "--r", "2", "--trials", "500", "--seed", "7", "--center", "0.5", "--widths", "0.05,0.1"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "minami",
            ["minami", "--d", "1", "--L", "8", "--r", "2", "--trials", "500", "--seed", "7", "--center", "0.5", "--widths", "0.3,0.5"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "evls",
            ["evls", "--d", "1", "--L", "8", "--r", "2", "--trials", "500", "--seed", "7", "--E", "0.5", "--deltas", "1e-1,1e-3"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "weakminami",
            ["weakminami", "--d", "1", "--L", "8", "--r", "2", "--trials", "500", "--seed", "7", "--E", "0.5", "--deltas", "0.2,0.4"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "split",
            ["split", "--d", "2", "--L", "8", "--r", "2", "--epsilon", "0.05", "--factory", "degenerate-d2", "--seed", "11", "--budget", "200"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "les",
            ["les", "--d", "1", "--L", "64", "--r", "2", "--trials", "250", "--seed", "7", "--E", "0.5", "--ell", "32"]
                .map(String::from)
                .to_vec(),
        ),
        (
            "les-calibrate",
            ["les", "--d", "1", "--L", "8", "--r", "2", "--trials", "300", "--seed", "7", "--calibrate", "--lambda", "1.0", "--reps", "50"]
                .map(String::from)
                .to_vec(),
        ),
    ];

    for (name, args) in &commands {
        // both runs share one configuration (including the output path);
        // only the thread hint differs
        let out_dir = base.join(name);
        let mut outputs = Vec::new();
        for threads in ["1", "2"] {
            let _ = std::fs::remove_dir_all(&out_dir);
            std::fs::create_dir_all(&out_dir).unwrap();
            let status = std::process::Command::new(binary)
                .args(args)
                .arg("--out")
                .arg(&out_dir)
                .arg("--threads")
                .arg(threads)
                .output()
                .expect("command runs");
            assert!(
                status.status.success(),
                "{name} with {threads} threads failed: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            let mut files: Vec<_> = std::fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            let contents: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(p).unwrap(),
                    )
                })
                .collect();
            assert!(!contents.is_empty(), "{name} produced no output files");
            outputs.push(contents);
        }
        assert_eq!(outputs[0].len(), outputs[1].len(), "{name}: file sets differ");
        for (a, b) in outputs[0].iter().zip(&outputs[1]) {
            assert_eq!(a.0, b.0, "{name}: file names differ");
            assert_eq!(
                a.1, b.1,
                "{name}: file {} differs between thread counts",
                a.0
            );
        }
    }

    // a config file reproduces the flag-driven run byte for byte
    let config_json = serde_json::json!({
        "schema_version": 1,
        "command": "wegner",
        "d": 1, "l": 8, "r": 2,
        "bc": "simple",
        "density": "uniform",
        "seed": 7,
        "trials": 500,
        "center": 0.5,
        "widths": [0.05, 0.1],
        "out_dir": base.join("wegner-config").to_string_lossy(),
    });
    let config_path = base.join("wegner.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config_json).unwrap()).unwrap();
    let status = std::process::Command::new(binary)
        .args(["run", "--config"])
        .arg(&config_path)
        .output()
        .expect("config run");
    assert!(status.status.success());
    let flag_run = std::fs::read(base.join("wegner/wegner_expected.csv")).unwrap();
    let config_run = std::fs::read(base.join("wegner-config/wegner_expected.csv")).unwrap();
    // bodies agree apart from the differing out_dir recorded in the header
    let body = |bytes: &[u8]| {
        String::from_utf8_lossy(bytes)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&flag_run), body(&config_run));

    let _ = std::fs::remove_dir_all(&base);
    finish("AC-10", "byte-identical outputs across thread counts for 8 commands", started, 600.0);
}
