//! Geometry of the cube `Λ_L = {1,…,L}^d` and its partition into blocks
//! `Λ_r(k)` of side `r`.
//!
//! Sites carry 1-based coordinates and are mapped to 0-based row-major linear
//! indices (the last coordinate varies fastest). Blocks are the `(L/r)^d`
//! disjoint subcubes anchored at coordinates `1 + r·a`, indexed row-major in
//! the block coordinates `a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cube of side `l` in dimension `d`, partitioned into blocks of side `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    d: usize,
    l: usize,
    r: usize,
}

impl LatticeGeometry {
    /// Requires `l % r == 0` so the blocks partition the cube.
    pub fn new(d: usize, l: usize, r: usize) -> Result<Self> {
        if d == 0 || l == 0 || r == 0 {
            return Err(Error::DegenerateGeometry);
        }
        if !l.is_multiple_of(r) {
            return Err(Error::IndivisibleGeometry { l, r });
        }
        Ok(Self { d, l, r })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Sites per edge.
    pub fn side(&self) -> usize {
        self.l
    }

    /// Block side.
    pub fn block_side(&self) -> usize {
        self.r
    }

    /// Total number of sites `L^d`.
    pub fn num_sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    /// Number of blocks `(L/r)^d`.
    pub fn num_blocks(&self) -> usize {
        (self.l / self.r).pow(self.d as u32)
    }

    /// Uniform rank `m = r^d` of the block projections.
    pub fn block_rank(&self) -> usize {
        self.r.pow(self.d as u32)
    }

    /// Row-major linear index of a site given by 1-based coordinates.
    pub fn site_index(&self, coords: &[i64]) -> Result<usize> {
        if coords.len() != self.d {
            return Err(Error::DegenerateGeometry);
        }
        let mut index = 0usize;
        for (axis, &c) in coords.iter().enumerate() {
            if c < 1 || c > self.l as i64 {
                return Err(Error::CoordinateOutOfRange {
                    axis,
                    value: c,
                    l: self.l,
                });
            }
            index = index * self.l + (c as usize - 1);
        }
        Ok(index)
    }

    /// Inverse of [`site_index`](Self::site_index): 1-based coordinates.
    pub fn site_coords(&self, site: usize) -> Result<Vec<i64>> {
        self.check_site(site)?;
        let mut coords = vec![0i64; self.d];
        let mut rest = site;
        for axis in (0..self.d).rev() {
            coords[axis] = (rest % self.l) as i64 + 1;
            rest /= self.l;
        }
        Ok(coords)
    }

    /// Index of the unique block containing `site`.
    pub fn block_of_site(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        let blocks_per_edge = self.l / self.r;
        let mut rest = site;
        let mut digits = vec![0usize; self.d];
        for axis in (0..self.d).rev() {
            digits[axis] = rest % self.l;
            rest /= self.l;
        }
        let mut block = 0usize;
        for &digit in &digits {
            block = block * blocks_per_edge + digit / self.r;
        }
        Ok(block)
    }

    /// Sites of block `k`, ascending.
    pub fn block_sites(&self, block: usize) -> Result<Vec<usize>> {
        self.check_block(block)?;
        let blocks_per_edge = self.l / self.r;
        // 0-based anchor coordinate per axis
        let mut anchor = vec![0usize; self.d];
        let mut rest = block;
        for axis in (0..self.d).rev() {
            anchor[axis] = (rest % blocks_per_edge) * self.r;
            rest /= blocks_per_edge;
        }
        let mut sites = Vec::with_capacity(self.block_rank());
        let mut offsets = vec![0usize; self.d];
        loop {
            let mut index = 0usize;
            for axis in 0..self.d {
                index = index * self.l + anchor[axis] + offsets[axis];
            }
            sites.push(index);
            // odometer over the r^d offsets
            let mut axis = self.d;
            loop {
                if axis == 0 {
                    sites.sort_unstable();
                    return Ok(sites);
                }
                axis -= 1;
                offsets[axis] += 1;
                if offsets[axis] < self.r {
                    break;
                }
                offsets[axis] = 0;
            }
        }
    }

    /// Diagonal of the block indicator `χ_{Λ_r(k)}` as a 0/1 vector over sites.
    pub fn block_indicator_diagonal(&self, block: usize) -> Result<Vec<f64>> {
        let mut diag = vec![0.0; self.num_sites()];
        for site in self.block_sites(block)? {
            diag[site] = 1.0;
        }
        Ok(diag)
    }

    /// Number of nearest neighbors of `site` lying outside the cube.
    ///
    /// This is the diagonal of the boundary operator `m_Λ` that converts
    /// simple into Dirichlet (`+m`) or Neumann (`-m`) boundary conditions.
    pub fn outside_neighbor_count(&self, site: usize) -> Result<usize> {
        let coords = self.site_coords(site)?;
        let mut count = 0;
        for &c in &coords {
            if c == 1 {
                count += 1;
            }
            if c == self.l as i64 {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Pairs of distinct nearest-neighbor sites inside the cube, each pair once.
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.num_sites();
        let mut pairs = Vec::new();
        for site in 0..n {
            let coords = self.site_coords(site).expect("site in range");
            for axis in 0..self.d {
                if coords[axis] < self.l as i64 {
                    let mut next = coords.clone();
                    next[axis] += 1;
                    let other = self.site_index(&next).expect("neighbor in range");
                    pairs.push((site, other));
                }
            }
        }
        pairs
    }

    fn check_site(&self, site: usize) -> Result<()> {
        let sites = self.num_sites();
        if site >= sites {
            return Err(Error::SiteOutOfRange { index: site, sites });
        }
        Ok(())
    }

    fn check_block(&self, block: usize) -> Result<()> {
        let blocks = self.num_blocks();
        if block >= blocks {
            return Err(Error::BlockOutOfRange {
                index: block,
                blocks,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_site_maps_to_zero() {
        let g1 = LatticeGeometry::new(1, 4, 2).unwrap();
        assert_eq!(g1.site_index(&[1]).unwrap(), 0);
        let g2 = LatticeGeometry::new(2, 4, 2).unwrap();
        assert_eq!(g2.site_index(&[1, 1]).unwrap(), 0);
    }

    #[test]
    fn site_index_is_bijective_d2_l4() {
        let g = LatticeGeometry::new(2, 4, 2).unwrap();
        let mut seen = [false; 16];
        for x in 1..=4 {
            for y in 1..=4 {
                let idx = g.site_index(&[x, y]).unwrap();
                assert!(!seen[idx], "index {idx} hit twice");
                seen[idx] = true;
                assert_eq!(g.site_coords(idx).unwrap(), vec![x, y]);
            }
        }
        assert!(seen.iter().all(|&s| s));
        // row-major: last coordinate fastest
        assert_eq!(g.site_index(&[2, 3]).unwrap(), 6);
    }

    #[test]
    fn rejects_indivisible_side() {
        assert!(matches!(
            LatticeGeometry::new(1, 5, 2),
            Err(Error::IndivisibleGeometry { l: 5, r: 2 })
        ));
    }

    #[test]
    fn coordinate_out_of_range() {
        let g = LatticeGeometry::new(2, 4, 2).unwrap();
        assert!(g.site_index(&[0, 1]).is_err());
        assert!(g.site_index(&[1, 5]).is_err());
    }

    #[test]
    fn blocks_partition_pairs_in_d1() {
        let g = LatticeGeometry::new(1, 4, 2).unwrap();
        // sites {1,2} -> block 0, sites {3,4} -> block 1
        assert_eq!(g.block_of_site(0).unwrap(), 0);
        assert_eq!(g.block_of_site(1).unwrap(), 0);
        assert_eq!(g.block_of_site(2).unwrap(), 1);
        assert_eq!(g.block_of_site(3).unwrap(), 1);
    }

    #[test]
    fn rank_one_blocks_are_sites() {
        let g = LatticeGeometry::new(1, 4, 1).unwrap();
        for site in 0..4 {
            assert_eq!(g.block_of_site(site).unwrap(), site);
        }
    }

    #[test]
    fn d2_blocks_are_squares() {
        let g = LatticeGeometry::new(2, 4, 2).unwrap();
        assert_eq!(g.num_blocks(), 4);
        for block in 0..4 {
            let sites = g.block_sites(block).unwrap();
            assert_eq!(sites.len(), 4);
            // all sites agree with block_of_site and form a 2x2 square
            let coords: Vec<_> = sites
                .iter()
                .map(|&s| {
                    assert_eq!(g.block_of_site(s).unwrap(), block);
                    g.site_coords(s).unwrap()
                })
                .collect();
            let xs: Vec<i64> = coords.iter().map(|c| c[0]).collect();
            let ys: Vec<i64> = coords.iter().map(|c| c[1]).collect();
            assert_eq!(xs.iter().max().unwrap() - xs.iter().min().unwrap(), 1);
            assert_eq!(ys.iter().max().unwrap() - ys.iter().min().unwrap(), 1);
        }
    }

    #[test]
    fn block_indicator_trace_and_disjointness() {
        let g = LatticeGeometry::new(2, 4, 2).unwrap();
        let mut sum = vec![0.0; g.num_sites()];
        for block in 0..g.num_blocks() {
            let diag = g.block_indicator_diagonal(block).unwrap();
            let trace: f64 = diag.iter().sum();
            assert_eq!(trace, g.block_rank() as f64);
            for (s, d) in sum.iter_mut().zip(&diag) {
                // disjoint supports: no site is covered twice
                assert!(*s * d == 0.0);
                *s += d;
            }
        }
        assert!(sum.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn boundary_neighbor_counts_d1() {
        let g = LatticeGeometry::new(1, 4, 2).unwrap();
        let counts: Vec<_> = (0..4)
            .map(|s| g.outside_neighbor_count(s).unwrap())
            .collect();
        assert_eq!(counts, vec![1, 0, 0, 1]);
    }
}
