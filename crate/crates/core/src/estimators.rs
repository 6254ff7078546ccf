//! Monte Carlo estimators for the probabilistic spectral quantities:
//! Wegner and generalized Minami counting curves, weak Minami band-edge
//! curves, level-spacing tail probabilities, Cartan-type measure checks and
//! the density of states.
//!
//! Trials are embarrassingly parallel. Each trial owns the substream
//! `(master_seed, trial_index, "ensemble")`, and aggregation runs in trial
//! order, so every report is bit-identical regardless of thread count. Two
//! estimator runs with the same parameters see the same configurations,
//! which makes nesting relations between estimated events exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::operator::{BoundaryCondition, Configuration};
use crate::randomness::{sample_configuration, Density, SeedSpec};
use crate::report::{EstimateReport, SCHEMA_VERSION};
use crate::spectral::{
    cluster_report, count_in, solve_hamiltonian, spac, IntervalSet, Spectrum,
};
use crate::stats::{log_log_slope, mean_interval, wilson_interval};

/// Stream label under which all ensemble configurations are drawn.
pub const ENSEMBLE_LABEL: &str = "ensemble";

/// Shared description of a Monte Carlo ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub geometry: LatticeGeometry,
    pub density: Density,
    pub bc: BoundaryCondition,
    pub trials: usize,
    pub master_seed: u64,
}

impl EnsembleParams {
    fn metadata(&self) -> serde_json::Value {
        json!({
            "d": self.geometry.dimension(),
            "L": self.geometry.side(),
            "r": self.geometry.block_side(),
            "bc": self.bc.to_string(),
            "density": self.density.to_string(),
        })
    }
}

/// Runs one closure per trial on the trial's sampled configuration,
/// collecting results in trial order.
pub fn run_trials<T, F>(params: &EnsembleParams, per_trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &Configuration) -> T + Sync,
{
    (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = SeedSpec::new(params.master_seed, trial as u64, ENSEMBLE_LABEL);
            let configuration = sample_configuration(params.geometry, params.density, &seed);
            per_trial(trial, &configuration)
        })
        .collect()
}

/// Runs one eigenvalue-only diagonalization per trial.
pub fn run_spectra<T, F>(params: &EnsembleParams, per_spectrum: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &Spectrum) -> T + Sync,
{
    run_trials(params, |trial, configuration| {
        let spectrum = solve_hamiltonian(configuration, params.bc, false);
        per_spectrum(trial, &spectrum)
    })
}

/// `γ_{L,n,r} = 2 (1 - cos(π/r)) (1 - 1/n - 9√2 / (√(nL) r^d))`.
///
/// The admissible band-edge width for splitting an `n`-cluster at finite
/// volume; negative for small `L`, in which case no admissible window exists
/// and callers must reject.
pub fn gamma_lnr(l: usize, n: usize, r: usize, d: usize) -> f64 {
    let base = 2.0 * (1.0 - (std::f64::consts::PI / r as f64).cos());
    let n_f = n as f64;
    let correction = 9.0 * 2.0f64.sqrt() / ((n_f * l as f64).sqrt() * (r.pow(d as u32)) as f64);
    base * (1.0 - 1.0 / n_f - correction)
}

/// `γ_{L,2,r} = 2 (1 - cos(π/r)) (1/2 - 9√2 / (√L r^d))`, the pair-splitting
/// variant used as the induction hypothesis window.
pub fn gamma_l2r(l: usize, r: usize, d: usize) -> f64 {
    let base = 2.0 * (1.0 - (std::f64::consts::PI / r as f64).cos());
    let correction = 9.0 * 2.0f64.sqrt() / ((l as f64).sqrt() * (r.pow(d as u32)) as f64);
    base * (0.5 - correction)
}

/// Asymptotic band-edge scale `γ_{∞,r} = 1 - cos(π/r)`.
pub fn gamma_inf(r: usize) -> f64 {
    1.0 - (std::f64::consts::PI / r as f64).cos()
}

/// Band-edge energy window `I_E = [0,E] ∪ [4d+1-E, 4d+1]` with `E < γ_{∞,r}`.
#[derive(Debug, Clone)]
pub struct BandEdgeWindow {
    e: f64,
    intervals: IntervalSet,
}

impl BandEdgeWindow {
    pub fn new(e: f64, geometry: LatticeGeometry) -> Result<Self> {
        let gamma = gamma_inf(geometry.block_side());
        if !(e > 0.0 && e < gamma) {
            return Err(Error::WindowTooWide {
                e,
                gamma,
                r: geometry.block_side(),
            });
        }
        Ok(Self {
            e,
            intervals: IntervalSet::band_edge(e, geometry.dimension())?,
        })
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn intervals(&self) -> &IntervalSet {
        &self.intervals
    }
}

/// Wegner curve: interval counting statistics over a width grid at a fixed
/// interval center.
pub struct WegnerCurve {
    /// `E{tr χ_I}` per width, with standard-error intervals and slope.
    pub expected_count: EstimateReport,
    /// `P{tr χ_I >= 1}` per width, with Wilson intervals.
    pub probability: EstimateReport,
}

pub fn wegner_curve(
    params: &EnsembleParams,
    center: f64,
    widths: &[f64],
) -> Result<WegnerCurve> {
    if widths.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if params.trials < 100 {
        return Err(Error::TooFewTrials {
            got: params.trials,
            need: 100,
        });
    }
    let intervals = width_grid(center, widths)?;
    let counts = run_spectra(params, |_, spectrum| {
        intervals
            .iter()
            .map(|i| count_in(spectrum, i) as u32)
            .collect::<Vec<_>>()
    });

    let n = params.trials as u64;
    let mut mean_est = Vec::new();
    let mut mean_lo = Vec::new();
    let mut mean_hi = Vec::new();
    let mut p_est = Vec::new();
    let mut p_lo = Vec::new();
    let mut p_hi = Vec::new();
    for (w, _) in widths.iter().enumerate() {
        let per_width: Vec<f64> = counts.iter().map(|c| c[w] as f64).collect();
        let (m, lo, hi) = mean_interval(&per_width);
        mean_est.push(m);
        mean_lo.push(lo);
        mean_hi.push(hi);
        let hits = counts.iter().filter(|c| c[w] >= 1).count() as u64;
        let (p, lo, hi) = wilson_interval(hits, n);
        p_est.push(p);
        p_lo.push(lo);
        p_hi.push(hi);
    }
    let slope = log_log_slope(widths, &mean_est);
    let mut meta = params.metadata();
    meta["center"] = json!(center);

    Ok(WegnerCurve {
        expected_count: EstimateReport {
            schema_version: SCHEMA_VERSION,
            quantity: "wegner_expected_count".into(),
            params: meta.clone(),
            grid: widths.to_vec(),
            estimate: mean_est,
            ci_low: mean_lo,
            ci_high: mean_hi,
            slope,
            n_trials: n,
            seed: params.master_seed,
        },
        probability: EstimateReport {
            schema_version: SCHEMA_VERSION,
            quantity: "wegner_probability_at_least_one".into(),
            params: meta,
            grid: widths.to_vec(),
            estimate: p_est,
            ci_low: p_lo,
            ci_high: p_hi,
            slope: None,
            n_trials: n,
            seed: params.master_seed,
        },
    })
}

/// Generalized Minami curve: `P{tr χ_I >= m+1}` over a width grid, where
/// `m = r^d` is the projection rank. Collapses to the classic two-eigenvalue
/// Minami event when `r = 1`.
pub fn generalized_minami_curve(
    params: &EnsembleParams,
    center: f64,
    widths: &[f64],
) -> Result<EstimateReport> {
    if widths.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let threshold = params.geometry.block_rank() + 1;
    let intervals = width_grid(center, widths)?;
    let counts = run_spectra(params, |_, spectrum| {
        intervals
            .iter()
            .map(|i| count_in(spectrum, i))
            .collect::<Vec<_>>()
    });
    let n = params.trials as u64;
    let mut est = Vec::new();
    let mut lo_v = Vec::new();
    let mut hi_v = Vec::new();
    let mut expected_events_largest = 0.0f64;
    for (w, _) in widths.iter().enumerate() {
        let hits = counts.iter().filter(|c| c[w] >= threshold).count() as u64;
        let (p, lo, hi) = wilson_interval(hits, n);
        est.push(p);
        lo_v.push(lo);
        hi_v.push(hi);
        expected_events_largest = expected_events_largest.max(hits as f64);
    }
    let slope = log_log_slope(widths, &est);
    let mut meta = params.metadata();
    meta["center"] = json!(center);
    meta["threshold"] = json!(threshold);
    // power is reported, not enforced
    meta["events_at_largest_width"] = json!(expected_events_largest);

    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        quantity: "generalized_minami_probability".into(),
        params: meta,
        grid: widths.to_vec(),
        estimate: est,
        ci_low: lo_v,
        ci_high: hi_v,
        slope,
        n_trials: n,
        seed: params.master_seed,
    })
}

/// Weak Minami curves: `P{tr χ_I >= 2}` for width-`δ` subintervals anchored
/// at the lower and upper band edges. Returns one report per edge.
pub fn weak_minami_curve(
    params: &EnsembleParams,
    window: &BandEdgeWindow,
    deltas: &[f64],
) -> Result<Vec<EstimateReport>> {
    if deltas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &d in deltas {
        if !(d >= 0.0 && d <= window.e()) {
            return Err(Error::OutOfDomain {
                what: "delta",
                range: "[0, E]",
                value: d,
            });
        }
    }
    let top = 4.0 * params.geometry.dimension() as f64 + 1.0;
    let lower: Vec<IntervalSet> = deltas
        .iter()
        .map(|&d| IntervalSet::interval(0.0, d))
        .collect::<Result<_>>()?;
    let upper: Vec<IntervalSet> = deltas
        .iter()
        .map(|&d| IntervalSet::interval(top - d, top))
        .collect::<Result<_>>()?;

    let hits = run_spectra(params, |_, spectrum| {
        let lo: Vec<bool> = lower.iter().map(|i| count_in(spectrum, i) >= 2).collect();
        let hi: Vec<bool> = upper.iter().map(|i| count_in(spectrum, i) >= 2).collect();
        (lo, hi)
    });

    let n = params.trials as u64;
    let mut reports = Vec::with_capacity(2);
    for edge in ["lower", "upper"] {
        let mut est = Vec::new();
        let mut lo_v = Vec::new();
        let mut hi_v = Vec::new();
        for (w, _) in deltas.iter().enumerate() {
            let count = hits
                .iter()
                .filter(|(lo, hi)| if edge == "lower" { lo[w] } else { hi[w] })
                .count() as u64;
            let (p, lo, hi) = wilson_interval(count, n);
            est.push(p);
            lo_v.push(lo);
            hi_v.push(hi);
        }
        let mut meta = params.metadata();
        meta["E"] = json!(window.e());
        meta["edge"] = json!(edge);
        reports.push(EstimateReport {
            schema_version: SCHEMA_VERSION,
            quantity: format!("weak_minami_{edge}_edge"),
            params: meta,
            grid: deltas.to_vec(),
            estimate: est,
            ci_low: lo_v,
            ci_high: hi_v,
            slope: None,
            n_trials: n,
            seed: params.master_seed,
        });
    }
    Ok(reports)
}

/// Level-spacing tail over a band-edge window, plus the per-trial inclusion
/// between the two-eigenvalue event and the small-spacing event.
pub struct EvlsTail {
    /// `P{spac_{I_E} < δ}` per `δ`, Wilson intervals.
    pub tail: EstimateReport,
    /// Trials violating `{tr χ_I' >= 2} ⊆ {spac_{I_E} < δ}` for an edge
    /// subinterval `I'` of width `δ`; must be zero.
    pub inclusion_violations: u64,
}

pub fn evls_tail_curve(
    params: &EnsembleParams,
    window: &BandEdgeWindow,
    deltas: &[f64],
) -> Result<EvlsTail> {
    if deltas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let top = 4.0 * params.geometry.dimension() as f64 + 1.0;
    let edge_subintervals: Vec<Option<(IntervalSet, IntervalSet)>> = deltas
        .iter()
        .map(|&d| {
            if d > 0.0 && d <= window.e() {
                Some((
                    IntervalSet::interval(0.0, d).expect("ordered"),
                    IntervalSet::interval(top - d, top).expect("ordered"),
                ))
            } else {
                None
            }
        })
        .collect();

    let per_trial = run_spectra(params, |_, spectrum| {
        let s = spac(spectrum, window.intervals());
        let mut violations = 0u64;
        for (w, subs) in edge_subintervals.iter().enumerate() {
            if let Some((lo_i, hi_i)) = subs {
                let two_close =
                    count_in(spectrum, lo_i) >= 2 || count_in(spectrum, hi_i) >= 2;
                if two_close && !(s < deltas[w]) {
                    violations += 1;
                }
            }
        }
        (s, violations)
    });

    let n = params.trials as u64;
    let mut est = Vec::new();
    let mut lo_v = Vec::new();
    let mut hi_v = Vec::new();
    for &delta in deltas {
        let hits = per_trial.iter().filter(|(s, _)| *s < delta).count() as u64;
        let (p, lo, hi) = wilson_interval(hits, n);
        est.push(p);
        lo_v.push(lo);
        hi_v.push(hi);
    }
    let inclusion_violations = per_trial.iter().map(|(_, v)| v).sum();
    let mut meta = params.metadata();
    meta["E"] = json!(window.e());

    Ok(EvlsTail {
        tail: EstimateReport {
            schema_version: SCHEMA_VERSION,
            quantity: "evls_tail_probability".into(),
            params: meta,
            grid: deltas.to_vec(),
            estimate: est,
            ci_low: lo_v,
            ci_high: hi_v,
            slope: None,
            n_trials: n,
            seed: params.master_seed,
        },
        inclusion_violations,
    })
}

/// Monte Carlo measure of the bad set `{s ∈ (-ε,ε)^blocks : spac_I < δ}`
/// around a base configuration holding an isolated cluster in `I`.
pub fn cartan_measure_check(
    base: &Configuration,
    epsilon: f64,
    intervals: &IntervalSet,
    deltas: &[f64],
    samples: usize,
    master_seed: u64,
) -> Result<EstimateReport> {
    if deltas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(epsilon > 0.0) {
        return Err(Error::OutOfDomain {
            what: "epsilon",
            range: "(0, inf)",
            value: epsilon,
        });
    }
    let geometry = base.geometry();
    let base_spectrum = solve_hamiltonian(base, BoundaryCondition::Simple, false);
    let report = cluster_report(&base_spectrum, intervals);
    if report.n == 0 || !(report.gap_to_rest > 0.0) {
        return Err(Error::NoIsolatedCluster);
    }

    let spacings: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeedSpec::new(master_seed, i as u64, "cartan").rng();
            let values: Vec<f64> = base
                .values()
                .iter()
                .map(|&v| {
                    let u: f64 = rand::Rng::gen(&mut rng);
                    v + epsilon * (2.0 * u - 1.0)
                })
                .collect();
            let shifted = Configuration::new(geometry, values).expect("same block count");
            let spectrum = solve_hamiltonian(&shifted, BoundaryCondition::Simple, false);
            spac(&spectrum, intervals)
        })
        .collect();

    let n = samples as u64;
    let mut est = Vec::new();
    let mut lo_v = Vec::new();
    let mut hi_v = Vec::new();
    for &delta in deltas {
        let hits = spacings.iter().filter(|&&s| s < delta).count() as u64;
        let (p, lo, hi) = wilson_interval(hits, n);
        est.push(p);
        lo_v.push(lo);
        hi_v.push(hi);
    }
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        quantity: "cartan_bad_set_measure".into(),
        params: json!({
            "d": geometry.dimension(),
            "L": geometry.side(),
            "r": geometry.block_side(),
            "epsilon": epsilon,
            "cluster_size": report.n,
            "gap_to_rest": report.gap_to_rest,
            "intervals": intervals.intervals(),
        }),
        grid: deltas.to_vec(),
        estimate: est,
        ci_low: lo_v,
        ci_high: hi_v,
        slope: None,
        n_trials: n,
        seed: master_seed,
    })
}

/// Eigenvalue-counting density of states: `n̂(E) = E{tr χ_[E-h,E+h]} / (L^d 2h)`.
pub fn dos_estimate(
    params: &EnsembleParams,
    energies: &[f64],
    half_width: f64,
) -> Result<EstimateReport> {
    if energies.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(half_width > 0.0) {
        return Err(Error::OutOfDomain {
            what: "half width",
            range: "(0, inf)",
            value: half_width,
        });
    }
    let windows: Vec<IntervalSet> = energies
        .iter()
        .map(|&e| IntervalSet::interval(e - half_width, e + half_width))
        .collect::<Result<_>>()?;
    let counts = run_spectra(params, |_, spectrum| {
        windows
            .iter()
            .map(|w| count_in(spectrum, w) as f64)
            .collect::<Vec<_>>()
    });
    let volume = params.geometry.num_sites() as f64;
    let scale = 1.0 / (volume * 2.0 * half_width);
    let mut est = Vec::new();
    let mut lo_v = Vec::new();
    let mut hi_v = Vec::new();
    for (w, _) in energies.iter().enumerate() {
        let per: Vec<f64> = counts.iter().map(|c| c[w]).collect();
        let (m, lo, hi) = mean_interval(&per);
        est.push(m * scale);
        lo_v.push(lo * scale);
        hi_v.push(hi * scale);
    }
    let mut meta = params.metadata();
    meta["half_width"] = json!(half_width);
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        quantity: "density_of_states".into(),
        params: meta,
        grid: energies.to_vec(),
        estimate: est,
        ci_low: lo_v,
        ci_high: hi_v,
        slope: None,
        n_trials: params.trials as u64,
        seed: params.master_seed,
    })
}

fn width_grid(center: f64, widths: &[f64]) -> Result<Vec<IntervalSet>> {
    widths
        .iter()
        .map(|&w| {
            if w < 0.0 {
                return Err(Error::OutOfDomain {
                    what: "interval width",
                    range: "[0, inf)",
                    value: w,
                });
            }
            IntervalSet::interval(center - w / 2.0, center + w / 2.0)
        })
        .collect()
}
