//! Finite-volume operators: cutoff Laplacians with the three boundary
//! conditions, the block random potential, and the derived Hamiltonians.
//!
//! All matrices are dense, real and exactly symmetric. The positive free
//! Laplacian acts as `(H0 f)(n) = 2d f(n) - Σ_{|k-n|=1} f(k)`; restricting to
//! the cube by simple truncation keeps the diagonal at `2d`. The boundary
//! operator `m_Λ`, which counts nearest neighbors outside the cube, is added
//! for Dirichlet conditions and subtracted for Neumann conditions, so all
//! three restrictions have spectrum inside `[0, 4d]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::spectral::Spectrum;

/// Boundary condition of a cutoff Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Plain truncation `χ_Λ H0 χ_Λ`.
    Simple,
    /// Truncation plus the outside-neighbor count on the diagonal.
    Dirichlet,
    /// Truncation minus the outside-neighbor count on the diagonal.
    Neumann,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Simple => write!(f, "simple"),
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
            BoundaryCondition::Neumann => write!(f, "neumann"),
        }
    }
}

/// A real symmetric matrix indexed by the sites of a lattice cube.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    geometry: LatticeGeometry,
    entries: DMatrix<f64>,
}

impl OperatorMatrix {
    /// Wraps a dense matrix, enforcing shape and exact symmetry.
    pub fn new(geometry: LatticeGeometry, entries: DMatrix<f64>) -> Result<Self> {
        let n = geometry.num_sites();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::GeometryMismatch);
        }
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if max_asym > 0.0 {
            return Err(Error::NotSymmetric { max_asym });
        }
        Ok(Self { geometry, entries })
    }

    pub fn geometry(&self) -> LatticeGeometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// `self + t * Id`.
    pub fn shifted(&self, t: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..entries.nrows() {
            entries[(i, i)] += t;
        }
        Self {
            geometry: self.geometry,
            entries,
        }
    }

    /// Entrywise `self - other`; geometries must match.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(Self {
            geometry: self.geometry,
            entries: &self.entries - &other.entries,
        })
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Row-major CSV rows of the full symmetric matrix, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:.16e}", self.entries[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Random block couplings `ω = {ω_k}`, one value per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    geometry: LatticeGeometry,
    values: Vec<f64>,
}

impl Configuration {
    pub fn new(geometry: LatticeGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.num_blocks() {
            return Err(Error::ConfigurationLength {
                got: values.len(),
                expected: geometry.num_blocks(),
            });
        }
        Ok(Self { geometry, values })
    }

    /// All blocks set to `value`.
    pub fn constant(geometry: LatticeGeometry, value: f64) -> Self {
        Self {
            geometry,
            values: vec![value; geometry.num_blocks()],
        }
    }

    pub fn geometry(&self) -> LatticeGeometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, block: usize) -> f64 {
        self.values[block]
    }

    /// Copy with block `k` replaced by `value`.
    pub fn with_value(&self, block: usize, value: f64) -> Self {
        let mut values = self.values.clone();
        values[block] = value;
        Self {
            geometry: self.geometry,
            values,
        }
    }

    /// Sup-norm distance to another configuration on the same geometry.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Cutoff Laplacian on the cube with the requested boundary condition.
pub fn laplacian(geometry: LatticeGeometry, bc: BoundaryCondition) -> OperatorMatrix {
    let n = geometry.num_sites();
    let two_d = 2.0 * geometry.dimension() as f64;
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        entries[(i, i)] = two_d;
    }
    for (a, b) in geometry.neighbor_pairs() {
        entries[(a, b)] = -1.0;
        entries[(b, a)] = -1.0;
    }
    match bc {
        BoundaryCondition::Simple => {}
        BoundaryCondition::Dirichlet => {
            for i in 0..n {
                entries[(i, i)] += geometry.outside_neighbor_count(i).expect("valid site") as f64;
            }
        }
        BoundaryCondition::Neumann => {
            for i in 0..n {
                entries[(i, i)] -= geometry.outside_neighbor_count(i).expect("valid site") as f64;
            }
        }
    }
    OperatorMatrix { geometry, entries }
}

/// Closed-form spectrum of the Dirichlet or Neumann cutoff Laplacian.
///
/// Eigenvalues `2d - 2 Σ_i cos(π n_i / L)` with `n_i ∈ {1,…,L}` for Dirichlet
/// and `n_i ∈ {0,…,L-1}` for Neumann, sorted ascending with multiplicity.
/// Simple boundary conditions have no closed form here.
pub fn analytic_bc_spectrum(geometry: LatticeGeometry, bc: BoundaryCondition) -> Result<Spectrum> {
    let offset = match bc {
        BoundaryCondition::Dirichlet => 1usize,
        BoundaryCondition::Neumann => 0usize,
        BoundaryCondition::Simple => return Err(Error::NoAnalyticSpectrum),
    };
    let d = geometry.dimension();
    let l = geometry.side();
    let one_dim: Vec<f64> = (0..l)
        .map(|k| 2.0 - 2.0 * (std::f64::consts::PI * (k + offset) as f64 / l as f64).cos())
        .collect();
    let mut values = vec![0.0f64];
    for _ in 0..d {
        let mut next = Vec::with_capacity(values.len() * l);
        for &v in &values {
            for &e in &one_dim {
                next.push(v + e);
            }
        }
        values = next;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(Spectrum::from_eigenvalues(values))
}

/// `γ_r = 2(1 - cos(π/r))`: the second-smallest Neumann eigenvalue of an
/// r-sided block, and `4d` minus the second-largest Dirichlet eigenvalue.
pub fn neumann_second_eigenvalue_gap(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::OutOfDomain {
            what: "block side r",
            range: "[2, inf)",
            value: r as f64,
        });
    }
    Ok(2.0 * (1.0 - (std::f64::consts::PI / r as f64).cos()))
}

/// Block indicator `χ_{Λ_r(k)}` as a diagonal 0/1 matrix.
pub fn block_indicator(geometry: LatticeGeometry, block: usize) -> Result<OperatorMatrix> {
    let diag = geometry.block_indicator_diagonal(block)?;
    let n = geometry.num_sites();
    let mut entries = DMatrix::zeros(n, n);
    for (site, v) in diag.into_iter().enumerate() {
        entries[(site, site)] = v;
    }
    Ok(OperatorMatrix { geometry, entries })
}

/// Diagonal random potential `V_ω = Σ_k ω_k χ_{Λ_r(k)}`.
pub fn potential(configuration: &Configuration) -> OperatorMatrix {
    let geometry = configuration.geometry();
    let n = geometry.num_sites();
    let mut entries = DMatrix::zeros(n, n);
    for site in 0..n {
        let block = geometry.block_of_site(site).expect("valid site");
        entries[(site, site)] = configuration.value(block);
    }
    OperatorMatrix { geometry, entries }
}

/// `H_ω = H0 + V_ω` with the requested boundary condition on `H0`.
pub fn hamiltonian(configuration: &Configuration, bc: BoundaryCondition) -> OperatorMatrix {
    let geometry = configuration.geometry();
    let mut op = laplacian(geometry, bc);
    for site in 0..geometry.num_sites() {
        let block = geometry.block_of_site(site).expect("valid site");
        op.entries[(site, site)] += configuration.value(block);
    }
    op
}

/// Deformed Hamiltonian `H_{ω,κ} = H_ω - (1-κ) H0 = κ H0 + V_ω`
/// (simple boundary conditions), for `κ ∈ (0, 1]`.
pub fn deformed_hamiltonian(configuration: &Configuration, kappa: f64) -> Result<OperatorMatrix> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::OutOfDomain {
            what: "kappa",
            range: "(0, 1]",
            value: kappa,
        });
    }
    let geometry = configuration.geometry();
    let mut op = laplacian(geometry, BoundaryCondition::Simple);
    op.entries *= kappa;
    for site in 0..geometry.num_sites() {
        let block = geometry.block_of_site(site).expect("valid site");
        op.entries[(site, site)] += configuration.value(block);
    }
    Ok(op)
}

/// Block-diagonal direct sum `⊕_k Δ_k^{bc}` of the per-block cutoff
/// Laplacians, in the global site indexing. Used as the comparison operator
/// in Dirichlet-Neumann bracketing.
pub fn block_direct_sum_laplacian(
    geometry: LatticeGeometry,
    bc: BoundaryCondition,
) -> OperatorMatrix {
    let n = geometry.num_sites();
    let d = geometry.dimension();
    let r = geometry.block_side();
    let block_geometry = LatticeGeometry::new(d, r, r).expect("r divides r");
    let block_op = laplacian(block_geometry, bc);
    let mut entries = DMatrix::zeros(n, n);
    for block in 0..geometry.num_blocks() {
        let sites = geometry.block_sites(block).expect("valid block");
        // block_sites is ascending row-major, matching the block-local indexing
        for (bi, &si) in sites.iter().enumerate() {
            for (bj, &sj) in sites.iter().enumerate() {
                entries[(si, sj)] = block_op.entries[(bi, bj)];
            }
        }
    }
    OperatorMatrix { geometry, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigensolve;
    use approx::assert_abs_diff_eq;

    fn geom(d: usize, l: usize, r: usize) -> LatticeGeometry {
        LatticeGeometry::new(d, l, r).unwrap()
    }

    #[test]
    fn simple_laplacian_d1_l2() {
        let op = laplacian(geom(1, 2, 2), BoundaryCondition::Simple);
        assert_eq!(op.entries()[(0, 0)], 2.0);
        assert_eq!(op.entries()[(0, 1)], -1.0);
        assert_eq!(op.entries()[(1, 0)], -1.0);
        assert_eq!(op.entries()[(1, 1)], 2.0);
        let spec = eigensolve(&op, false).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn dirichlet_and_neumann_d1_l2() {
        let dir = laplacian(geom(1, 2, 2), BoundaryCondition::Dirichlet);
        assert_eq!(dir.entries()[(0, 0)], 3.0);
        assert_eq!(dir.entries()[(1, 1)], 3.0);
        let spec = eigensolve(&dir, false).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 4.0, epsilon = 1e-12);

        let neu = laplacian(geom(1, 2, 2), BoundaryCondition::Neumann);
        assert_eq!(neu.entries()[(0, 0)], 1.0);
        assert_eq!(neu.entries()[(1, 1)], 1.0);
        let spec = eigensolve(&neu, false).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_spectra_small_cases() {
        let dir = analytic_bc_spectrum(geom(1, 2, 2), BoundaryCondition::Dirichlet).unwrap();
        assert_abs_diff_eq!(dir.eigenvalues()[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dir.eigenvalues()[1], 4.0, epsilon = 1e-15);

        let neu = analytic_bc_spectrum(geom(1, 2, 2), BoundaryCondition::Neumann).unwrap();
        assert_abs_diff_eq!(neu.eigenvalues()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(neu.eigenvalues()[1], 2.0, epsilon = 1e-15);

        // d=2, L=2 Neumann: sums of {0,2} over two axes
        let neu2 = analytic_bc_spectrum(geom(2, 2, 2), BoundaryCondition::Neumann).unwrap();
        let expected = [0.0, 2.0, 2.0, 4.0];
        for (v, e) in neu2.eigenvalues().iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }

        assert!(matches!(
            analytic_bc_spectrum(geom(1, 2, 2), BoundaryCondition::Simple),
            Err(Error::NoAnalyticSpectrum)
        ));
    }

    #[test]
    fn gamma_r_values() {
        assert_abs_diff_eq!(neumann_second_eigenvalue_gap(2).unwrap(), 2.0, epsilon = 1e-15);
        // second-smallest Neumann eigenvalue on an r=2 block in d=1
        let spec = eigensolve(
            &laplacian(geom(1, 2, 2), BoundaryCondition::Neumann),
            false,
        )
        .unwrap();
        assert_abs_diff_eq!(
            spec.eigenvalues()[1],
            neumann_second_eigenvalue_gap(2).unwrap(),
            epsilon = 1e-12
        );
        // monotone decrease toward zero
        let mut prev = neumann_second_eigenvalue_gap(2).unwrap();
        for r in 3..40 {
            let g = neumann_second_eigenvalue_gap(r).unwrap();
            assert!(g < prev && g > 0.0);
            prev = g;
        }
        assert!(neumann_second_eigenvalue_gap(1).is_err());
    }

    #[test]
    fn block_indicators_partition_the_identity() {
        let g = geom(1, 4, 2);
        let chi0 = block_indicator(g, 0).unwrap();
        for (i, want) in [1.0, 1.0, 0.0, 0.0].into_iter().enumerate() {
            assert_eq!(chi0.entries()[(i, i)], want);
        }
        let chi1 = block_indicator(g, 1).unwrap();
        // disjoint supports multiply to zero
        assert_eq!((chi0.entries() * chi1.entries()).amax(), 0.0);
        // and the full family sums to the identity
        let sum = chi0.entries() + chi1.entries();
        assert_eq!(sum, DMatrix::<f64>::identity(4, 4));
        assert!(block_indicator(g, 2).is_err());
    }

    #[test]
    fn potential_is_block_constant_diagonal() {
        let g = geom(1, 4, 2);
        let cfg = Configuration::new(g, vec![0.3, 0.7]).unwrap();
        let v = potential(&cfg);
        for (i, want) in [0.3, 0.3, 0.7, 0.7].into_iter().enumerate() {
            assert_eq!(v.entries()[(i, i)], want);
        }
        let zero = potential(&Configuration::constant(g, 0.0));
        assert_eq!(zero.max_abs_entry(), 0.0);
        // all-ones -> identity, via the partition property
        let ones = potential(&Configuration::constant(g, 1.0));
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(ones.entries(), &id);
    }

    #[test]
    fn hamiltonian_small_example() {
        let g = geom(1, 2, 2);
        let cfg = Configuration::new(g, vec![0.5]).unwrap();
        let h = hamiltonian(&cfg, BoundaryCondition::Simple);
        assert_eq!(h.entries()[(0, 0)], 2.5);
        assert_eq!(h.entries()[(0, 1)], -1.0);
        let spec = eigensolve(&h, false).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 3.5, epsilon = 1e-12);

        let free = hamiltonian(&Configuration::constant(g, 0.0), BoundaryCondition::Simple);
        assert_eq!(free, laplacian(g, BoundaryCondition::Simple));
    }

    #[test]
    fn shift_covariance_is_exact() {
        // dyadic couplings and shift keep all additions exactly representable
        let g = geom(2, 4, 2);
        let cfg = Configuration::new(g, vec![0.125, 0.875, 0.375, 0.25]).unwrap();
        let tau = 0.3125;
        let shifted_cfg = Configuration::new(g, cfg.values().iter().map(|v| v + tau).collect())
            .unwrap();
        let lhs = hamiltonian(&shifted_cfg, BoundaryCondition::Simple);
        let rhs = hamiltonian(&cfg, BoundaryCondition::Simple).shifted(tau);
        assert_eq!(lhs.sub(&rhs).unwrap().max_abs_entry(), 0.0);
    }

    #[test]
    fn deformed_hamiltonian_cases() {
        let g = geom(1, 2, 2);
        let cfg = Configuration::new(g, vec![0.0]).unwrap();
        let half = deformed_hamiltonian(&cfg, 0.5).unwrap();
        assert_eq!(half.entries()[(0, 0)], 1.0);
        assert_eq!(half.entries()[(0, 1)], -0.5);

        let cfg2 = Configuration::new(g, vec![0.7]).unwrap();
        let full = deformed_hamiltonian(&cfg2, 1.0).unwrap();
        assert_eq!(full, hamiltonian(&cfg2, BoundaryCondition::Simple));

        assert!(deformed_hamiltonian(&cfg, 0.0).is_err());
        assert!(deformed_hamiltonian(&cfg, 1.5).is_err());
    }

    #[test]
    fn block_direct_sums_d1_l4() {
        let g = geom(1, 4, 2);
        let neu = block_direct_sum_laplacian(g, BoundaryCondition::Neumann);
        assert_eq!(neu.entries()[(0, 0)], 1.0);
        assert_eq!(neu.entries()[(0, 1)], -1.0);
        assert_eq!(neu.entries()[(1, 2)], 0.0);
        let spec = eigensolve(&neu, false).unwrap();
        let expected = [0.0, 0.0, 2.0, 2.0];
        for (v, e) in spec.eigenvalues().iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
        let dir = block_direct_sum_laplacian(g, BoundaryCondition::Dirichlet);
        let spec = eigensolve(&dir, false).unwrap();
        let expected = [2.0, 2.0, 4.0, 4.0];
        for (v, e) in spec.eigenvalues().iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
    }
}
