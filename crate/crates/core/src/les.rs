//! Local eigenvalue statistics: the volume-rescaled point process `ξ` around
//! a reference energy, its subcube superposition `ζ`, the negligible-array
//! conditions that drive the Poisson limit, goodness-of-fit tests against the
//! Poisson law, and the finite-volume multiplicity check.
//!
//! Points follow the convention `s_j = L^d (E - E_j)`, so an eigenvalue just
//! below the reference energy produces a positive point. The superposition
//! `ζ` pools the eigenvalues of the independent subcube Hamiltonians using
//! the *full* volume scaling, which makes `ζ` with subcube side `ℓ = L`
//! bit-identical to `ξ`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimators::{gamma_inf, run_trials, EnsembleParams};
use crate::lattice::LatticeGeometry;
use crate::operator::{BoundaryCondition, Configuration};
use crate::randomness::SeedSpec;
use crate::report::SCHEMA_VERSION;
use crate::spectral::{solve_hamiltonian, IntervalSet, Spectrum};
use crate::stats::{
    chi_square_gof, ks_test, mean_interval, quantile, wilson_interval, ChiSquareResult,
};

/// Which process a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    /// Full-cube process `ξ`.
    Xi,
    /// Subcube superposition `ζ`.
    Zeta,
}

/// One trial's rescaled eigenvalue points inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProcessSample {
    /// Sorted ascending.
    pub points: Vec<f64>,
    pub kind: ProcessKind,
    /// Reference energy.
    pub e: f64,
    /// Full cube side.
    pub l: usize,
    /// Subcube side for `ζ`.
    pub ell: Option<usize>,
}

fn check_reference_energy(e: f64, d: usize) -> Result<()> {
    let top = 4.0 * d as f64 + 1.0;
    if !(e > 0.0 && e < top) {
        return Err(Error::OutOfDomain {
            what: "reference energy",
            range: "(0, 4d+1)",
            value: e,
        });
    }
    Ok(())
}

fn rescaled_points(spectrum: &Spectrum, e: f64, volume: f64, window: (f64, f64)) -> Vec<f64> {
    let mut points: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|&ev| volume * (e - ev))
        .filter(|&s| s >= window.0 && s <= window.1)
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    points
}

/// Rescaled point process of `H_ω` (simple boundary conditions) around `E`,
/// restricted to a window in rescaled units.
pub fn build_xi(
    configuration: &Configuration,
    e: f64,
    window: (f64, f64),
) -> Result<PointProcessSample> {
    let geometry = configuration.geometry();
    check_reference_energy(e, geometry.dimension())?;
    let spectrum = solve_hamiltonian(configuration, BoundaryCondition::Simple, false);
    let volume = geometry.num_sites() as f64;
    Ok(PointProcessSample {
        points: rescaled_points(&spectrum, e, volume, window),
        kind: ProcessKind::Xi,
        e,
        l: geometry.side(),
        ell: None,
    })
}

/// Restriction of a configuration to one subcube of side `ell` (row-major
/// over the `(L/ell)^d` subcube grid).
pub fn restrict_to_subcube(
    configuration: &Configuration,
    ell: usize,
    subcube: usize,
) -> Result<Configuration> {
    let geometry = configuration.geometry();
    let d = geometry.dimension();
    let l = geometry.side();
    let r = geometry.block_side();
    if ell == 0 || !ell.is_multiple_of(r) || !l.is_multiple_of(ell) {
        return Err(Error::BadSubcubeSide { ell });
    }
    let grid_side = l / ell;
    let num_subcubes = grid_side.pow(d as u32);
    if subcube >= num_subcubes {
        return Err(Error::BlockOutOfRange {
            index: subcube,
            blocks: num_subcubes,
        });
    }
    let sub_geometry = LatticeGeometry::new(d, ell, r)?;
    let blocks_per_edge = l / r;
    let sub_blocks_per_edge = ell / r;

    // grid coordinates of this subcube
    let mut grid = vec![0usize; d];
    let mut rest = subcube;
    for axis in (0..d).rev() {
        grid[axis] = rest % grid_side;
        rest /= grid_side;
    }

    let mut values = Vec::with_capacity(sub_geometry.num_blocks());
    for sub_block in 0..sub_geometry.num_blocks() {
        let mut coords = vec![0usize; d];
        let mut rest = sub_block;
        for axis in (0..d).rev() {
            coords[axis] = rest % sub_blocks_per_edge;
            rest /= sub_blocks_per_edge;
        }
        let mut parent = 0usize;
        for axis in 0..d {
            parent = parent * blocks_per_edge + grid[axis] * sub_blocks_per_edge + coords[axis];
        }
        values.push(configuration.value(parent));
    }
    Configuration::new(sub_geometry, values)
}

/// Superposed subcube process `ζ`: diagonalizes the `(L/ell)^d` independent
/// subcube Hamiltonians and pools their rescaled eigenvalues, keeping the
/// full-volume scaling.
pub fn build_zeta(
    configuration: &Configuration,
    e: f64,
    ell: usize,
    window: (f64, f64),
) -> Result<PointProcessSample> {
    let geometry = configuration.geometry();
    let d = geometry.dimension();
    check_reference_energy(e, d)?;
    let l = geometry.side();
    let r = geometry.block_side();
    if ell == 0 || !ell.is_multiple_of(r) || !l.is_multiple_of(ell) {
        return Err(Error::BadSubcubeSide { ell });
    }
    let num_subcubes = (l / ell).pow(d as u32);
    let volume = geometry.num_sites() as f64;
    let mut points = Vec::new();
    for subcube in 0..num_subcubes {
        let restricted = restrict_to_subcube(configuration, ell, subcube)?;
        let spectrum = solve_hamiltonian(&restricted, BoundaryCondition::Simple, false);
        points.extend(rescaled_points(&spectrum, e, volume, window));
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    Ok(PointProcessSample {
        points,
        kind: ProcessKind::Zeta,
        e,
        l,
        ell: Some(ell),
    })
}

/// Sorted-sequence L1 matching distance between two point multisets, with an
/// unmatched-point penalty of half the window length per point.
pub fn matching_distance(xi: &[f64], zeta: &[f64], window: (f64, f64)) -> f64 {
    let radius = (window.1 - window.0) / 2.0;
    let matched: f64 = xi
        .iter()
        .zip(zeta.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    matched + xi.len().abs_diff(zeta.len()) as f64 * radius
}

/// Per-trial `ξ` samples over an ensemble.
pub fn xi_ensemble(
    params: &EnsembleParams,
    e: f64,
    window: (f64, f64),
) -> Result<Vec<PointProcessSample>> {
    check_reference_energy(e, params.geometry.dimension())?;
    Ok(run_trials(params, |_, configuration| {
        build_xi(configuration, e, window).expect("validated energy")
    }))
}

/// Distribution of the `ξ`/`ζ` matching distance as the subcube side grows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProximityReport {
    pub schema_version: u32,
    pub e: f64,
    pub window: (f64, f64),
    pub ells: Vec<usize>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub q90: Vec<f64>,
    pub n_trials: u64,
    pub seed: u64,
    pub params: serde_json::Value,
}

pub fn xi_zeta_proximity(
    params: &EnsembleParams,
    e: f64,
    ells: &[usize],
    window: (f64, f64),
) -> Result<ProximityReport> {
    if ells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    check_reference_energy(e, params.geometry.dimension())?;
    let l = params.geometry.side();
    let r = params.geometry.block_side();
    for &ell in ells {
        if ell == 0 || ell % r != 0 || !l.is_multiple_of(ell) {
            return Err(Error::BadSubcubeSide { ell });
        }
    }
    let distances: Vec<Vec<f64>> = run_trials(params, |_, configuration| {
        let xi = build_xi(configuration, e, window).expect("validated");
        ells.iter()
            .map(|&ell| {
                let zeta = build_zeta(configuration, e, ell, window).expect("validated");
                matching_distance(&xi.points, &zeta.points, window)
            })
            .collect()
    });
    let mut mean = Vec::new();
    let mut median = Vec::new();
    let mut q90 = Vec::new();
    for (i, _) in ells.iter().enumerate() {
        let mut per: Vec<f64> = distances.iter().map(|d| d[i]).collect();
        per.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        mean.push(per.iter().sum::<f64>() / per.len() as f64);
        median.push(quantile(&per, 0.5));
        q90.push(quantile(&per, 0.9));
    }
    Ok(ProximityReport {
        schema_version: SCHEMA_VERSION,
        e,
        window,
        ells: ells.to_vec(),
        mean,
        median,
        q90,
        n_trials: params.trials as u64,
        seed: params.master_seed,
        params: json!({
            "d": params.geometry.dimension(),
            "L": l,
            "r": r,
            "density": params.density.to_string(),
        }),
    })
}

/// Empirical negligible-array quantities at one volume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UanaRung {
    pub l: usize,
    pub ell: usize,
    /// `sup_j P{ξ^{ℓ,j}(I) >= 1}` with a Wilson interval.
    pub sup_p_one: f64,
    pub sup_p_one_ci: (f64, f64),
    /// `Σ_j P{ξ^{ℓ,j}(I) >= 1}` with a normal-approximation interval.
    pub sum_p_one: f64,
    pub sum_p_one_ci: (f64, f64),
    /// `Σ_j P{ξ^{ℓ,j}(I) >= 2}`.
    pub sum_p_two: f64,
    pub sum_p_two_ci: (f64, f64),
    /// `E{ζ(I)}`.
    pub mean_count: f64,
    /// Exact integer identity `E{ζ(I)} = Σ_j Σ_{t>=1} P{ξ^{ℓ,j}(I) >= t}`.
    pub identity_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UanaReport {
    pub schema_version: u32,
    pub e: f64,
    pub window: (f64, f64),
    pub rungs: Vec<UanaRung>,
    pub n_trials: u64,
    pub seed: u64,
}

/// Evaluates the three negligible-array conditions on a ladder of
/// `(L, ell)` volumes at fixed `d`, `r`, density and trial count.
#[allow(clippy::too_many_arguments)]
pub fn uana_condition_check(
    d: usize,
    r: usize,
    density: crate::randomness::Density,
    trials: usize,
    master_seed: u64,
    ladder: &[(usize, usize)],
    e: f64,
    window: (f64, f64),
) -> Result<UanaReport> {
    if ladder.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    for &(l, ell) in ladder {
        let geometry = LatticeGeometry::new(d, l, r)?;
        check_reference_energy(e, d)?;
        if ell == 0 || ell % r != 0 || l % ell != 0 {
            return Err(Error::BadSubcubeSide { ell });
        }
        let params = EnsembleParams {
            geometry,
            density,
            bc: BoundaryCondition::Simple,
            trials,
            master_seed,
        };
        let num_subcubes = (l / ell).pow(d as u32);
        let volume = geometry.num_sites() as f64;
        let counts: Vec<Vec<u64>> = run_trials(&params, |_, configuration| {
            (0..num_subcubes)
                .map(|j| {
                    let restricted =
                        restrict_to_subcube(configuration, ell, j).expect("validated");
                    let spectrum =
                        solve_hamiltonian(&restricted, BoundaryCondition::Simple, false);
                    rescaled_points(&spectrum, e, volume, window).len() as u64
                })
                .collect()
        });
        let n = trials as u64;
        let mut sup_p_one = 0.0f64;
        let mut sup_ci = (0.0, 0.0);
        let mut sum_p_one = 0.0;
        let mut var_sum_one = 0.0;
        let mut sum_p_two = 0.0;
        let mut var_sum_two = 0.0;
        let mut total_count: u64 = 0;
        let mut sum_tail: u64 = 0; // Σ_j Σ_{t>=1} #{trials with count_j >= t}
        for j in 0..num_subcubes {
            let hits_one = counts.iter().filter(|c| c[j] >= 1).count() as u64;
            let hits_two = counts.iter().filter(|c| c[j] >= 2).count() as u64;
            let (p1, lo1, hi1) = wilson_interval(hits_one, n);
            if p1 >= sup_p_one {
                sup_p_one = p1;
                sup_ci = (lo1, hi1);
            }
            let p2 = hits_two as f64 / n as f64;
            sum_p_one += p1;
            sum_p_two += p2;
            var_sum_one += p1 * (1.0 - p1) / n as f64;
            var_sum_two += p2 * (1.0 - p2) / n as f64;
            let max_count = counts.iter().map(|c| c[j]).max().unwrap_or(0);
            for t in 1..=max_count {
                sum_tail += counts.iter().filter(|c| c[j] >= t).count() as u64;
            }
            total_count += counts.iter().map(|c| c[j]).sum::<u64>();
        }
        let z = crate::stats::Z_95;
        let mean_count = total_count as f64 / n as f64;
        rungs.push(UanaRung {
            l,
            ell,
            sup_p_one,
            sup_p_one_ci: sup_ci,
            sum_p_one,
            sum_p_one_ci: (
                sum_p_one - z * var_sum_one.sqrt(),
                sum_p_one + z * var_sum_one.sqrt(),
            ),
            sum_p_two,
            sum_p_two_ci: (
                sum_p_two - z * var_sum_two.sqrt(),
                sum_p_two + z * var_sum_two.sqrt(),
            ),
            mean_count,
            identity_ok: sum_tail == total_count,
        });
    }
    Ok(UanaReport {
        schema_version: SCHEMA_VERSION,
        e,
        window,
        rungs,
        n_trials: trials as u64,
        seed: master_seed,
    })
}

/// Kolmogorov-Smirnov outcome.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Poisson goodness of fit for one counting window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowFit {
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
    /// Fitted intensity `n̂(E) · |I|`.
    pub lambda: f64,
    pub mean_count: f64,
    /// Histogram of per-trial window counts, index = count.
    pub histogram: Vec<u64>,
    pub chi_square: ChiSquareResult,
    /// KS of within-window consecutive gaps against `Exp(n̂(E))`;
    /// absent when fewer than 8 gaps were observed.
    pub gap_ks: Option<KsResult>,
    /// Exact integer identity `E{ξ(I)} = Σ_{t>=1} P{ξ(I) >= t}`.
    pub identity_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonFitReport {
    pub schema_version: u32,
    pub e: f64,
    /// Eigenvalue-counting density of states at `E` from the same ensemble.
    pub n_hat: f64,
    pub n_hat_ci: (f64, f64),
    /// Half-length of the covering window in rescaled units.
    pub s_radius: f64,
    pub windows: Vec<WindowFit>,
    pub n_trials: u64,
    pub seed: u64,
    pub warning: Option<String>,
    pub params: serde_json::Value,
}

/// Default counting windows in rescaled units.
pub fn default_windows() -> Vec<(f64, f64)> {
    vec![(0.0, 1.0), (0.0, 2.0), (-2.0, 2.0)]
}

fn fit_from_samples(
    samples: &[Vec<f64>],
    windows: &[(f64, f64)],
    s_radius: f64,
) -> (f64, (f64, f64), Vec<WindowFit>) {
    let n_trials = samples.len() as f64;
    let covering_counts: Vec<f64> = samples
        .iter()
        .map(|pts| {
            pts.iter()
                .filter(|&&p| p >= -s_radius && p <= s_radius)
                .count() as f64
        })
        .collect();
    let (mean_cover, lo_cover, hi_cover) = mean_interval(&covering_counts);
    let n_hat = mean_cover / (2.0 * s_radius);
    let n_hat_ci = (lo_cover / (2.0 * s_radius), hi_cover / (2.0 * s_radius));

    let mut fits = Vec::with_capacity(windows.len());
    for &(lo, hi) in windows {
        let counts: Vec<u64> = samples
            .iter()
            .map(|pts| pts.iter().filter(|&&p| p >= lo && p <= hi).count() as u64)
            .collect();
        let max_count = counts.iter().copied().max().unwrap_or(0) as usize;
        let mut histogram = vec![0u64; max_count + 1];
        for &c in &counts {
            histogram[c as usize] += 1;
        }
        let length = hi - lo;
        let lambda = n_hat * length;
        // expected Poisson bin masses, final bin open to the right
        let mut expected = Vec::with_capacity(histogram.len() + 1);
        let mut pmf = (-lambda).exp();
        let mut cdf = 0.0;
        for t in 0..=max_count {
            if t > 0 {
                pmf *= lambda / t as f64;
            }
            expected.push(n_trials * pmf);
            cdf += pmf;
        }
        expected.push(n_trials * (1.0 - cdf).max(0.0));
        let mut observed = histogram.clone();
        observed.push(0);
        // the intensity was estimated from the data; df = bins-1 keeps the
        // test on the conservative side
        let chi_square = chi_square_gof(&observed, &expected, 5.0, 0);

        let total: u64 = counts.iter().sum();
        let mut tail_sum: u64 = 0;
        for t in 1..=(max_count as u64) {
            tail_sum += counts.iter().filter(|&&c| c >= t).count() as u64;
        }
        let mean_count = total as f64 / n_trials;

        let mut gaps = Vec::new();
        for pts in samples {
            let inside: Vec<f64> = pts
                .iter()
                .copied()
                .filter(|&p| p >= lo && p <= hi)
                .collect();
            for w in inside.windows(2) {
                gaps.push(w[1] - w[0]);
            }
        }
        let gap_ks = if gaps.len() >= 8 && n_hat > 0.0 {
            ks_test(&gaps, |x| 1.0 - (-n_hat * x).exp())
                .map(|(statistic, p_value)| KsResult { statistic, p_value })
        } else {
            None
        };

        fits.push(WindowFit {
            lo,
            hi,
            length,
            lambda,
            mean_count,
            histogram,
            chi_square,
            gap_ks,
            identity_ok: tail_sum == total,
        });
    }
    (n_hat, n_hat_ci, fits)
}

/// Tests the per-trial window counts of `ξ` against the Poisson law with
/// intensity `n̂(E) |I|`, where `n̂(E)` comes from the same ensemble.
///
/// Requires at least 200 trials. Outside `d = 1`, energies beyond the
/// band-edge scale `γ_{∞,r}` only produce a warning: the Poisson limit is
/// tied to localization, which is guaranteed near the edges but not checked
/// here.
pub fn poisson_fit(
    params: &EnsembleParams,
    e: f64,
    windows: &[(f64, f64)],
) -> Result<PoissonFitReport> {
    Ok(poisson_fit_with_points(params, e, windows)?.0)
}

/// Same as [`poisson_fit`], additionally returning the per-trial samples the
/// fit was computed from (for bulk export).
pub fn poisson_fit_with_points(
    params: &EnsembleParams,
    e: f64,
    windows: &[(f64, f64)],
) -> Result<(PoissonFitReport, Vec<PointProcessSample>)> {
    if params.trials < 200 {
        return Err(Error::TooFewTrials {
            got: params.trials,
            need: 200,
        });
    }
    if windows.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let d = params.geometry.dimension();
    check_reference_energy(e, d)?;
    let s_radius = windows
        .iter()
        .map(|&(lo, hi)| lo.abs().max(hi.abs()))
        .fold(0.0f64, f64::max);
    let point_samples = xi_ensemble(params, e, (-s_radius, s_radius))?;
    let samples: Vec<Vec<f64>> = point_samples.iter().map(|s| s.points.clone()).collect();
    let (n_hat, n_hat_ci, fits) = fit_from_samples(&samples, windows, s_radius);
    let warning = if d >= 2 && e >= gamma_inf(params.geometry.block_side()) {
        Some(format!(
            "E = {e} lies outside the band-edge scale gamma_inf = {}; \
             the Poisson limit is only backed by localization there",
            gamma_inf(params.geometry.block_side())
        ))
    } else {
        None
    };
    let report = PoissonFitReport {
        schema_version: SCHEMA_VERSION,
        e,
        n_hat,
        n_hat_ci,
        s_radius,
        windows: fits,
        n_trials: params.trials as u64,
        seed: params.master_seed,
        warning,
        params: json!({
            "d": d,
            "L": params.geometry.side(),
            "r": params.geometry.block_side(),
            "density": params.density.to_string(),
        }),
    };
    Ok((report, point_samples))
}

/// Calibration of the fit pipeline on synthetic Poisson data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema_version: u32,
    pub lambda: f64,
    pub reps: usize,
    pub trials_per_rep: usize,
    pub alpha: f64,
    pub tests: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
}

fn sample_poisson(rng: &mut impl Rng, lambda: f64) -> u64 {
    // inversion on the CDF; fine for the moderate intensities used here
    let u: f64 = rng.gen();
    let mut t = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    while u > cdf && t < 10_000 {
        t += 1;
        pmf *= lambda / t as f64;
        cdf += pmf;
    }
    t
}

/// Feeds synthetic Poisson point processes through the same window-count
/// chi-square machinery and reports the rejection rate at level `alpha`.
pub fn poisson_fit_calibration(
    lambda: f64,
    trials_per_rep: usize,
    reps: usize,
    windows: &[(f64, f64)],
    alpha: f64,
    master_seed: u64,
) -> Result<CalibrationReport> {
    if windows.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(lambda > 0.0) {
        return Err(Error::OutOfDomain {
            what: "intensity",
            range: "(0, inf)",
            value: lambda,
        });
    }
    let s_radius = windows
        .iter()
        .map(|&(lo, hi)| lo.abs().max(hi.abs()))
        .fold(0.0f64, f64::max);
    let outcomes: Vec<(u64, u64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let samples: Vec<Vec<f64>> = (0..trials_per_rep)
                .map(|trial| {
                    let mut rng = SeedSpec::new(
                        master_seed,
                        (rep * trials_per_rep + trial) as u64,
                        "calibration",
                    )
                    .rng();
                    let count = sample_poisson(&mut rng, lambda * 2.0 * s_radius);
                    let mut pts: Vec<f64> = (0..count)
                        .map(|_| {
                            let u: f64 = rng.gen();
                            s_radius * (2.0 * u - 1.0)
                        })
                        .collect();
                    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
                    pts
                })
                .collect();
            let (_, _, fits) = fit_from_samples(&samples, windows, s_radius);
            let tests = fits.len() as u64;
            let rejections = fits
                .iter()
                .filter(|f| f.chi_square.p_value < alpha)
                .count() as u64;
            (tests, rejections)
        })
        .collect();
    let tests: u64 = outcomes.iter().map(|o| o.0).sum();
    let rejections: u64 = outcomes.iter().map(|o| o.1).sum();
    Ok(CalibrationReport {
        schema_version: SCHEMA_VERSION,
        lambda,
        reps,
        trials_per_rep,
        alpha,
        tests,
        rejections,
        rejection_rate: rejections as f64 / tests as f64,
    })
}

/// Exactly coincident eigenvalue pairs (consecutive difference below `tol`)
/// inside the interval set.
pub fn count_exact_ties(spectrum: &Spectrum, intervals: &IntervalSet, tol: f64) -> usize {
    let inside: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&e| intervals.contains(e))
        .collect();
    inside.windows(2).filter(|w| w[1] - w[0] < tol).count()
}

/// Multiplicity audit over an ensemble: exact-tie counts in a band-edge
/// window plus the distribution of the per-trial minimum spacing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub schema_version: u32,
    pub e: f64,
    pub tie_tolerance: f64,
    pub ties_total: u64,
    pub trials_with_ties: u64,
    /// Quantiles (1%, 10%, 50%) of the per-trial minimum in-window spacing,
    /// over trials holding at least two in-window eigenvalues.
    pub min_spacing_q01: Option<f64>,
    pub min_spacing_q10: Option<f64>,
    pub min_spacing_q50: Option<f64>,
    pub trials_with_pairs: u64,
    pub n_trials: u64,
    pub seed: u64,
}

/// Tie threshold: below eigensolver residual, above rounding noise.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn multiplicity_check(params: &EnsembleParams, e: f64) -> Result<MultiplicityReport> {
    let geometry = params.geometry;
    let gamma = gamma_inf(geometry.block_side());
    if !(e > 0.0 && e < gamma) {
        return Err(Error::WindowTooWide {
            e,
            gamma,
            r: geometry.block_side(),
        });
    }
    let window = IntervalSet::band_edge(e, geometry.dimension())?;
    let per_trial: Vec<(usize, Option<f64>)> = run_trials(params, |_, configuration| {
        let spectrum = solve_hamiltonian(configuration, params.bc, false);
        let inside: Vec<f64> = spectrum
            .eigenvalues()
            .iter()
            .copied()
            .filter(|&v| window.contains(v))
            .collect();
        let ties = inside
            .windows(2)
            .filter(|w| w[1] - w[0] < TIE_TOLERANCE)
            .count();
        let min_spacing = inside
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        (
            ties,
            if min_spacing.is_finite() {
                Some(min_spacing)
            } else {
                None
            },
        )
    });
    let ties_total: u64 = per_trial.iter().map(|(t, _)| *t as u64).sum();
    let trials_with_ties = per_trial.iter().filter(|(t, _)| *t > 0).count() as u64;
    let mut spacings: Vec<f64> = per_trial.iter().filter_map(|(_, s)| *s).collect();
    spacings.sort_by(|a, b| a.partial_cmp(b).expect("finite spacings"));
    let q = |p: f64| {
        if spacings.is_empty() {
            None
        } else {
            Some(quantile(&spacings, p))
        }
    };
    Ok(MultiplicityReport {
        schema_version: SCHEMA_VERSION,
        e,
        tie_tolerance: TIE_TOLERANCE,
        ties_total,
        trials_with_ties,
        min_spacing_q01: q(0.01),
        min_spacing_q10: q(0.10),
        min_spacing_q50: q(0.50),
        trials_with_pairs: spacings.len() as u64,
        n_trials: params.trials as u64,
        seed: params.master_seed,
    })
}
