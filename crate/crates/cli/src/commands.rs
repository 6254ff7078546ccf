//! Command execution: every command is a pure function of its [`RunConfig`],
//! writing reports under the configured output directory and printing a
//! one-line verdict.

use std::fs;
use std::path::{Path, PathBuf};

use anderson_core::error::{Error, Result};
use anderson_core::operator::{analytic_bc_spectrum, hamiltonian, Configuration};
use anderson_core::report::EstimateReport;
use anderson_core::spectral::{eigensolve, IntervalSet};
use anderson_core::{estimators, les, splitting};
use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};

/// Exit codes: 0 ok, 2 validation, 3 invariant or oracle violation,
/// 4 split budget exhausted.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    schema_version: u32,
    config: &'a RunConfig,
    report: T,
}

fn write_file(path: &Path, text: String) -> Result<()> {
    fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))
        .and_then(|_| fs::write(path, text))
        .map_err(|io| Error::OutputWrite(format!("{}: {io}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, config: &RunConfig, report: &T) -> Result<()> {
    let output = Output {
        schema_version: SCHEMA_VERSION,
        config,
        report,
    };
    let mut text = serde_json::to_string_pretty(&output).expect("report serializes");
    text.push('\n');
    write_file(path, text)
}

fn write_csv(path: &Path, config: &RunConfig, body: &str) -> Result<()> {
    let mut text = format!(
        "# schema_version={}\n# config={}\n",
        SCHEMA_VERSION,
        serde_json::to_string(config).expect("config serializes")
    );
    text.push_str(body);
    write_file(path, text)
}

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    PathBuf::from(&config.out_dir).join(name)
}

fn write_report_pair(config: &RunConfig, stem: &str, report: &EstimateReport) -> Result<()> {
    write_json(&out_path(config, &format!("{stem}.json")), config, report)?;
    write_csv(
        &out_path(config, &format!("{stem}.csv")),
        config,
        &report.to_csv(),
    )?;
    println!(
        "wrote {} and {}",
        out_path(config, &format!("{stem}.json")).display(),
        out_path(config, &format!("{stem}.csv")).display()
    );
    Ok(())
}

/// Runs one command. Returns its exit code; hard errors map to exit 2.
pub fn execute(config: &RunConfig) -> i32 {
    let outcome = match config.command.as_str() {
        "spectrum" => cmd_spectrum(config),
        "wegner" => cmd_wegner(config),
        "minami" => cmd_minami(config),
        "evls" => cmd_evls(config),
        "weakminami" => cmd_weak_minami(config),
        "split" => cmd_split(config),
        "les" => cmd_les(config),
        other => {
            eprintln!("unknown command {other:?}");
            return EXIT_VALIDATION;
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_VALIDATION
        }
    }
}

fn configuration_from(config: &RunConfig) -> Result<Configuration> {
    let geometry = config.geometry()?;
    match &config.omega {
        Some(values) => Configuration::new(geometry, values.clone()),
        None => Ok(Configuration::constant(geometry, 0.0)),
    }
}

fn cmd_spectrum(config: &RunConfig) -> Result<i32> {
    let bc = config.boundary_condition()?;
    let configuration = configuration_from(config)?;
    let h = hamiltonian(&configuration, bc);
    let spectrum = eigensolve(&h, false)?;
    write_csv(
        &out_path(config, "spectrum.csv"),
        config,
        &spectrum.to_csv(),
    )?;
    println!(
        "wrote {} ({} eigenvalues)",
        out_path(config, "spectrum.csv").display(),
        spectrum.len()
    );
    if config.dump_matrix {
        write_csv(&out_path(config, "matrix.csv"), config, &h.to_csv())?;
        println!("wrote {}", out_path(config, "matrix.csv").display());
    }
    if config.check_analytic {
        if config.omega.is_some() {
            eprintln!("analytic oracle applies to the free Laplacian only");
            return Ok(EXIT_VALIDATION);
        }
        let oracle = analytic_bc_spectrum(config.geometry()?, bc)?;
        let deviation = spectrum.max_deviation(&oracle);
        println!("analytic check: max deviation {deviation:.3e}");
        if !(deviation <= 1e-10) {
            eprintln!("oracle mismatch: deviation {deviation:.3e} above 1e-10");
            return Ok(EXIT_ORACLE);
        }
    }
    Ok(EXIT_OK)
}

fn require<T: Copy>(value: Option<T>, what: &'static str) -> Result<T> {
    value.ok_or(Error::OutOfDomain {
        what,
        range: "required",
        value: f64::NAN,
    })
}

fn cmd_wegner(config: &RunConfig) -> Result<i32> {
    let params = config.ensemble()?;
    let center = require(config.center, "center")?;
    let widths = config.widths.clone().ok_or(Error::EmptyGrid)?;
    let curve = estimators::wegner_curve(&params, center, &widths)?;
    write_report_pair(config, "wegner_expected", &curve.expected_count)?;
    write_report_pair(config, "wegner_probability", &curve.probability)?;
    match curve.expected_count.slope {
        Some(slope) => println!("verdict: expected-count slope vs width = {slope:.4}"),
        None => println!("verdict: slope undefined (degenerate grid)"),
    }
    Ok(EXIT_OK)
}

fn cmd_minami(config: &RunConfig) -> Result<i32> {
    let params = config.ensemble()?;
    let center = require(config.center, "center")?;
    let widths = config.widths.clone().ok_or(Error::EmptyGrid)?;
    let report = estimators::generalized_minami_curve(&params, center, &widths)?;
    write_report_pair(config, "minami", &report)?;
    match report.slope {
        Some(slope) => println!("verdict: P{{count >= m+1}} slope vs width = {slope:.4}"),
        None => println!("verdict: slope undefined (all estimates zero)"),
    }
    Ok(EXIT_OK)
}

fn cmd_evls(config: &RunConfig) -> Result<i32> {
    let params = config.ensemble()?;
    let e = require(config.e, "E")?;
    let deltas = config.deltas.clone().ok_or(Error::EmptyGrid)?;
    let window = estimators::BandEdgeWindow::new(e, params.geometry)?;
    let out = estimators::evls_tail_curve(&params, &window, &deltas)?;
    write_report_pair(config, "evls", &out.tail)?;
    // events nest per trial, so the estimates are monotone in delta exactly
    let mut sorted: Vec<(f64, f64)> = deltas
        .iter()
        .copied()
        .zip(out.tail.estimate.iter().copied())
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite deltas"));
    let monotone = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
    println!(
        "verdict: tail monotone in delta = {monotone}, inclusion violations = {}",
        out.inclusion_violations
    );
    if out.inclusion_violations > 0 || !monotone {
        return Ok(EXIT_ORACLE);
    }
    Ok(EXIT_OK)
}

fn cmd_weak_minami(config: &RunConfig) -> Result<i32> {
    let params = config.ensemble()?;
    let e = require(config.e, "E")?;
    let deltas = config.deltas.clone().ok_or(Error::EmptyGrid)?;
    let window = estimators::BandEdgeWindow::new(e, params.geometry)?;
    let reports = estimators::weak_minami_curve(&params, &window, &deltas)?;
    write_report_pair(config, "weakminami_lower", &reports[0])?;
    write_report_pair(config, "weakminami_upper", &reports[1])?;
    for report in &reports {
        let mut sorted: Vec<(f64, f64)> = deltas
            .iter()
            .copied()
            .zip(report.estimate.iter().copied())
            .collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite deltas"));
        let monotone = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
        println!("verdict: {} monotone in delta = {monotone}", report.quantity);
    }
    Ok(EXIT_OK)
}

fn cmd_split(config: &RunConfig) -> Result<i32> {
    let epsilon = require(config.epsilon, "epsilon")?;
    let budget = config.budget.unwrap_or(500);
    let problem = match config.factory.as_deref() {
        Some("degenerate-d2") => splitting::degenerate_d2_instance(
            config.l,
            epsilon,
            config.instance.unwrap_or(0),
            config.seed,
        )?,
        Some(other) => {
            eprintln!("unknown factory {other:?} (available: degenerate-d2)");
            return Ok(EXIT_VALIDATION);
        }
        None => {
            let omega = configuration_from(config)?;
            let (lo, hi) = require(config.interval, "interval")?;
            splitting::SplittingProblem::new(omega, IntervalSet::interval(lo, hi)?, epsilon)
        }
    };
    match splitting::validate_problem(&problem) {
        Ok(report) => {
            println!(
                "cluster: n = {}, gap to rest = {:.6}, strict 8-epsilon isolation = {}, \
                 finite-volume window = {}",
                report.cluster.n,
                report.cluster.gap_to_rest,
                report.strict_isolation,
                report.strict_band_edge
            );
        }
        Err(rejection) => {
            eprintln!("rejected: {rejection}");
            return Ok(EXIT_VALIDATION);
        }
    }
    let certificate = splitting::split_cluster(&problem, budget, config.seed)?;
    let audit = splitting::verify_certificate(&problem, &certificate);
    #[derive(Serialize)]
    struct SplitOutput {
        problem: splitting::SplittingProblem,
        certificate: splitting::SplittingCertificate,
        audit: splitting::CertificateAudit,
    }
    write_json(
        &out_path(config, "split_certificate.json"),
        config,
        &SplitOutput {
            problem: problem.clone(),
            certificate: certificate.clone(),
            audit: audit.clone(),
        },
    )?;
    println!(
        "wrote {}",
        out_path(config, "split_certificate.json").display()
    );
    println!(
        "verdict: success = {}, spacing = {:.3e} (target {:.3e}), displacement = {:.3e}, \
         iterations = {}, re-verified = {}",
        certificate.success,
        certificate.achieved_spacing,
        certificate.target_spacing,
        certificate.sup_distance,
        certificate.iterations,
        audit.sound
    );
    if !certificate.success {
        return Ok(EXIT_BUDGET);
    }
    if !audit.sound {
        return Ok(EXIT_ORACLE);
    }
    Ok(EXIT_OK)
}

fn cmd_les(config: &RunConfig) -> Result<i32> {
    if config.calibrate {
        let lambda = config.lambda.unwrap_or(1.0);
        let reps = config.reps.unwrap_or(200);
        let windows = config
            .windows
            .clone()
            .unwrap_or_else(les::default_windows);
        let report = les::poisson_fit_calibration(
            lambda,
            config.trials,
            reps,
            &windows,
            0.05,
            config.seed,
        )?;
        write_json(&out_path(config, "les_calibration.json"), config, &report)?;
        println!(
            "wrote {}",
            out_path(config, "les_calibration.json").display()
        );
        println!(
            "verdict: calibration rejection rate = {:.4} over {} tests at alpha = {}",
            report.rejection_rate, report.tests, report.alpha
        );
        return Ok(EXIT_OK);
    }

    let params = config.ensemble()?;
    let e = require(config.e, "E")?;
    let windows = config
        .windows
        .clone()
        .unwrap_or_else(les::default_windows);
    let (report, samples) = les::poisson_fit_with_points(&params, e, &windows)?;

    let mut csv = String::from("trial,point\n");
    for (trial, sample) in samples.iter().enumerate() {
        for p in &sample.points {
            csv.push_str(&format!("{trial},{p:.16e}\n"));
        }
    }
    write_csv(&out_path(config, "les_points.csv"), config, &csv)?;
    write_json(&out_path(config, "les.json"), config, &report)?;
    println!(
        "wrote {} and {}",
        out_path(config, "les.json").display(),
        out_path(config, "les_points.csv").display()
    );

    if let Some(ell) = config.ell {
        let proximity = les::xi_zeta_proximity(
            &params,
            e,
            &[ell],
            (-report.s_radius, report.s_radius),
        )?;
        write_json(&out_path(config, "les_proximity.json"), config, &proximity)?;
        println!(
            "wrote {} (mean xi/zeta distance {:.6})",
            out_path(config, "les_proximity.json").display(),
            proximity.mean[0]
        );
    }

    if let Some(warning) = &report.warning {
        println!("warning: {warning}");
    }
    let identities = report.windows.iter().all(|w| w.identity_ok);
    let p_values: Vec<String> = report
        .windows
        .iter()
        .map(|w| format!("|I|={}: p={:.4}", w.length, w.chi_square.p_value))
        .collect();
    println!(
        "verdict: n_hat({e}) = {:.5}; chi-square {}; counting identity = {identities}",
        report.n_hat,
        p_values.join(", ")
    );
    if !identities {
        return Ok(EXIT_ORACLE);
    }
    Ok(EXIT_OK)
}
