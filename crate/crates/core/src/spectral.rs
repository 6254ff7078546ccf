//! Dense symmetric eigensolving and the spectral functionals built on top of
//! it: interval eigenvalue counts, the level-spacing function `spac`, the
//! discriminant `disc`, cluster isolation reports, spectral projections and
//! Feynman-Hellmann block sensitivities.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::operator::{hamiltonian, BoundaryCondition, Configuration, OperatorMatrix};

/// Eigenvalues sorted ascending with multiplicity, optionally paired with an
/// orthonormal eigenbasis (column `j` belongs to eigenvalue `j`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    /// Builds a spectrum from bare eigenvalues; sorts them ascending.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Self {
            eigenvalues,
            eigenvectors: None,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<f64>> {
        self.eigenvectors.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// One eigenvalue per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for v in &self.eigenvalues {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    /// Largest absolute deviation against another sorted spectrum.
    pub fn max_deviation(&self, other: &Spectrum) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .fold(
                if self.len() == other.len() {
                    0.0
                } else {
                    f64::INFINITY
                },
                |m, (a, b)| m.max((a - b).abs()),
            )
    }
}

/// A sorted list of pairwise disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Validates ordering (`lo <= hi`) and pairwise disjointness, sorting the
    /// intervals by left endpoint.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::MalformedIntervals);
            }
        }
        intervals.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::MalformedIntervals);
            }
        }
        Ok(Self { intervals })
    }

    /// A single closed interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    /// The symmetric band-edge window `[0, e] ∪ [4d+1-e, 4d+1]`.
    pub fn band_edge(e: f64, d: usize) -> Result<Self> {
        let top = 4.0 * d as f64 + 1.0;
        if !(e > 0.0) || 2.0 * e >= top {
            return Err(Error::MalformedIntervals);
        }
        Self::new(vec![(0.0, e), (top - e, top)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Distance from a point to the set (0 when inside).
    pub fn distance_to(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| (lo - x).max(x - hi).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total Lebesgue measure.
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    /// Inflates every interval by `eps` on both sides, merging overlaps.
    pub fn inflate(&self, eps: f64) -> Self {
        let mut inflated: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| (lo - eps, hi + eps))
            .collect();
        inflated.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(inflated.len());
        for (lo, hi) in inflated {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    /// Whether every interval of `self` lies inside some interval of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|&(lo, hi)| {
            other
                .intervals
                .iter()
                .any(|&(olo, ohi)| olo <= lo && hi <= ohi)
        })
    }

    /// Shifts the whole set by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            intervals: self.intervals.iter().map(|&(lo, hi)| (lo + c, hi + c)).collect(),
        }
    }
}

/// Isolation report for the eigenvalues of a spectrum inside an interval set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Number of eigenvalues (with multiplicity) inside the set.
    pub n: usize,
    /// Average of the in-set eigenvalues; `None` when the cluster is empty.
    pub mean: Option<f64>,
    /// Distance from the interval set to the nearest eigenvalue outside it;
    /// infinite when no eigenvalue lies outside.
    #[serde(with = "crate::report::maybe_infinite")]
    pub gap_to_rest: f64,
}

/// Full eigendecomposition of a symmetric operator matrix.
///
/// Any solver satisfying the residual (`|Av - λv| <= 1e-9 (1+|λ|)`) and
/// orthogonality (`1e-10`) contracts is acceptable; this one delegates to
/// nalgebra's symmetric eigendecomposition and sorts the results.
pub fn eigensolve(matrix: &OperatorMatrix, want_vectors: bool) -> Result<Spectrum> {
    let entries = matrix.entries();
    let n = entries.nrows();
    let mut max_asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asym = max_asym.max((entries[(i, j)] - entries[(j, i)]).abs());
        }
    }
    if max_asym > 0.0 {
        return Err(Error::NotSymmetric { max_asym });
    }

    if !want_vectors {
        let mut values: Vec<f64> = entries.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        return Ok(Spectrum {
            eigenvalues: values,
            eigenvectors: None,
        });
    }

    let decomp = entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &decomp.eigenvectors.column(i));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
    })
}

/// Convenience: spectrum of `H_ω` with the given boundary condition.
pub fn solve_hamiltonian(
    configuration: &Configuration,
    bc: BoundaryCondition,
    want_vectors: bool,
) -> Spectrum {
    eigensolve(&hamiltonian(configuration, bc), want_vectors).expect("constructed symmetric")
}

/// Number of eigenvalues, with multiplicity, inside the closed interval set.
pub fn count_in(spectrum: &Spectrum, intervals: &IntervalSet) -> usize {
    spectrum
        .eigenvalues()
        .iter()
        .filter(|&&e| intervals.contains(e))
        .count()
}

fn in_set(spectrum: &Spectrum, intervals: &IntervalSet) -> Vec<f64> {
    spectrum
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&e| intervals.contains(e))
        .collect()
}

/// Eigenvalue level spacing: minimum `|E_j - E_k|` over distinct index pairs
/// with both eigenvalues in the set. Infinite when fewer than two eigenvalues
/// lie in the set; zero exactly when the set holds a degenerate eigenvalue.
pub fn spac(spectrum: &Spectrum, intervals: &IntervalSet) -> f64 {
    let values = in_set(spectrum, intervals);
    if values.len() < 2 {
        return f64::INFINITY;
    }
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Discriminant: product of squared pairwise differences of the in-set
/// eigenvalues. Empty product (1) when at most one eigenvalue is in the set.
pub fn disc(spectrum: &Spectrum, intervals: &IntervalSet) -> f64 {
    let values = in_set(spectrum, intervals);
    let mut product = 1.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let diff = values[i] - values[j];
            product *= diff * diff;
        }
    }
    product
}

/// Count, mean and isolation gap of the eigenvalues inside the set.
pub fn cluster_report(spectrum: &Spectrum, intervals: &IntervalSet) -> ClusterReport {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut gap = f64::INFINITY;
    for &e in spectrum.eigenvalues() {
        if intervals.contains(e) {
            n += 1;
            sum += e;
        } else {
            gap = gap.min(intervals.distance_to(e));
        }
    }
    ClusterReport {
        n,
        mean: if n > 0 { Some(sum / n as f64) } else { None },
        gap_to_rest: gap,
    }
}

/// Spectral projection `P = Σ_{λ_j ∈ I} v_j v_jᵀ`.
pub fn spectral_projection(
    spectrum: &Spectrum,
    intervals: &IntervalSet,
    geometry: LatticeGeometry,
) -> Result<OperatorMatrix> {
    let vectors = spectrum.eigenvectors().ok_or(Error::MissingEigenvectors)?;
    let n = vectors.nrows();
    let mut p = DMatrix::zeros(n, n);
    for (j, &e) in spectrum.eigenvalues().iter().enumerate() {
        if intervals.contains(e) {
            let v = vectors.column(j);
            // outer product keeps exact symmetry entrywise
            for a in 0..n {
                for b in a..n {
                    let term = v[a] * v[b];
                    p[(a, b)] += term;
                    if a != b {
                        p[(b, a)] += term;
                    }
                }
            }
        }
    }
    OperatorMatrix::new(geometry, p)
}

/// All block sensitivities `α_k = (1/n) tr(P χ_{Λ_r(k)} P)` of an isolated
/// cluster, computed from the eigenvectors. By the Feynman-Hellmann theorem
/// `α_k` equals the derivative of the cluster mean with respect to `ω_k`.
pub fn feynman_hellmann_alphas(
    spectrum: &Spectrum,
    intervals: &IntervalSet,
    geometry: LatticeGeometry,
) -> Result<Vec<f64>> {
    let vectors = spectrum.eigenvectors().ok_or(Error::MissingEigenvectors)?;
    let selected: Vec<usize> = spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|&(_, &e)| intervals.contains(e))
        .map(|(j, _)| j)
        .collect();
    if selected.is_empty() {
        return Err(Error::NoIsolatedCluster);
    }
    // site weights Σ_j v_j(s)^2 equal the diagonal of P
    let mut site_weight = vec![0.0f64; vectors.nrows()];
    for &j in &selected {
        let v = vectors.column(j);
        for (s, w) in site_weight.iter_mut().enumerate() {
            *w += v[s] * v[s];
        }
    }
    let n = selected.len() as f64;
    let mut alphas = Vec::with_capacity(geometry.num_blocks());
    for block in 0..geometry.num_blocks() {
        let sum: f64 = geometry
            .block_sites(block)?
            .into_iter()
            .map(|s| site_weight[s])
            .sum();
        alphas.push(sum / n);
    }
    Ok(alphas)
}

/// Single-block sensitivity of the cluster mean of `H_ω` (simple boundary
/// conditions), diagonalizing internally.
pub fn feynman_hellmann_alpha(
    configuration: &Configuration,
    intervals: &IntervalSet,
    block: usize,
) -> Result<f64> {
    let geometry = configuration.geometry();
    if block >= geometry.num_blocks() {
        return Err(Error::BlockOutOfRange {
            index: block,
            blocks: geometry.num_blocks(),
        });
    }
    let spectrum = solve_hamiltonian(configuration, BoundaryCondition::Simple, true);
    Ok(feynman_hellmann_alphas(&spectrum, intervals, geometry)?[block])
}

/// Change of the interval eigenvalue count under a single-block replacement
/// `ω_k -> new_value`. Rank-`m` perturbation theory bounds it by `m = r^d`.
pub fn weyl_rank_m_check(
    configuration: &Configuration,
    block: usize,
    new_value: f64,
    intervals: &IntervalSet,
) -> Result<usize> {
    let geometry = configuration.geometry();
    if block >= geometry.num_blocks() {
        return Err(Error::BlockOutOfRange {
            index: block,
            blocks: geometry.num_blocks(),
        });
    }
    let before = solve_hamiltonian(configuration, BoundaryCondition::Simple, false);
    let after = solve_hamiltonian(
        &configuration.with_value(block, new_value),
        BoundaryCondition::Simple,
        false,
    );
    let a = count_in(&before, intervals);
    let b = count_in(&after, intervals);
    Ok(a.abs_diff(b))
}
