//! Uniform cell grids, region decompositions and piecewise-constant fields.
//!
//! Every cell of a [`Grid`] carries one basis function, the indicator of the
//! cell. Functions are identified with coefficient vectors indexed by cell;
//! everything outside the bounding box is the zero function.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::check_dimension;
use crate::error::{Error, Result};

/// Axis-aligned box of cubic cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    pub cells_per_axis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    h: f64,
    strides: [usize; 2],
}

impl Grid {
    /// Builds a grid over `[box_min, box_max]` with the given cell counts.
    /// Cells are indexed lexicographically with the last axis fastest.
    pub fn new(box_min: &[f64], box_max: &[f64], cells_per_axis: &[usize]) -> Result<Self> {
        Self::from_spec(GridSpec {
            box_min: box_min.to_vec(),
            box_max: box_max.to_vec(),
            cells_per_axis: cells_per_axis.to_vec(),
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        let n = spec.box_min.len();
        check_dimension(n)?;
        if spec.box_max.len() != n || spec.cells_per_axis.len() != n {
            return Err(Error::InvalidGrid(format!(
                "box_min, box_max and cells_per_axis must all have length {n}"
            )));
        }
        let mut h = None;
        for k in 0..n {
            let (lo, hi, m) = (spec.box_min[k], spec.box_max[k], spec.cells_per_axis[k]);
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidGrid(format!("axis {k}: degenerate box [{lo}, {hi}]")));
            }
            if m == 0 {
                return Err(Error::InvalidGrid(format!("axis {k}: zero cells")));
            }
            let hk = (hi - lo) / m as f64;
            match h {
                None => h = Some(hk),
                Some(h0) if ((hk - h0) / h0).abs() > 1e-12 => {
                    return Err(Error::InvalidGrid(format!(
                        "cells are not cubic: h = {h0} on axis 0 but {hk} on axis {k}"
                    )));
                }
                _ => {}
            }
        }
        let h = h.expect("dimension checked");
        if h >= 0.5 {
            return Err(Error::CellTooLarge { h });
        }
        let strides = if n == 1 { [1, 0] } else { [spec.cells_per_axis[1], 1] };
        Ok(Self { spec, h, strides })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.box_min.len()
    }

    /// Cell side length.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Cell volume `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.spec.cells_per_axis.iter().product()
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.spec.cells_per_axis
    }

    /// Per-axis integer index of a cell (unused axes are zero).
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [idx, 0]
        } else {
            [idx / self.strides[0], idx % self.strides[0]]
        }
    }

    pub fn linear_index(&self, multi: [usize; 2]) -> usize {
        multi[0] * self.strides[0] + multi[1] * self.strides[1]
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.dim())
            .map(|k| self.spec.box_min[k] + (m[k] as f64 + 0.5) * self.h)
            .collect()
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.num_cells()).map(|i| self.center(i)).collect()
    }

    /// Signed index offset `multi(j) - multi(i)`.
    pub fn offset(&self, i: usize, j: usize) -> [i64; 2] {
        let (a, b) = (self.multi_index(i), self.multi_index(j));
        [b[0] as i64 - a[0] as i64, b[1] as i64 - a[1] as i64]
    }

    /// Euclidean distance between the closed cells `i` and `j`.
    pub fn cell_distance(&self, i: usize, j: usize) -> f64 {
        let d = self.offset(i, j);
        let gap2: i64 = d.iter().map(|&v| (v.abs() - 1).max(0).pow(2)).sum();
        self.h * (gap2 as f64).sqrt()
    }

    /// Stable content hash identifying the grid (hex, 16 characters).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.spec).expect("grid spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Cells whose centers lie in the closed box `[min, max]`.
    pub fn cells_in_box(&self, b: &BoxSpec) -> Result<Vec<usize>> {
        if b.min.len() != self.dim() || b.max.len() != self.dim() {
            return Err(Error::InvalidRegions(format!(
                "box predicate has wrong dimension (expected {})",
                self.dim()
            )));
        }
        let tol = 1e-9 * self.h;
        Ok((0..self.num_cells())
            .filter(|&i| {
                let c = self.center(i);
                (0..self.dim()).all(|k| c[k] >= b.min[k] - tol && c[k] <= b.max[k] + tol)
            })
            .collect())
    }
}

/// Closed axis-aligned box used as a geometric cell predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// A set of cells given either explicitly or as a union of boxes (cells whose
/// centers lie in any of the boxes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Cells(Vec<usize>),
    Boxes(Vec<BoxSpec>),
}

impl RegionSpec {
    pub fn interval(lo: f64, hi: f64) -> Self {
        RegionSpec::Boxes(vec![BoxSpec { min: vec![lo], max: vec![hi] }])
    }

    pub fn resolve(&self, grid: &Grid) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = match self {
            RegionSpec::Cells(cells) => {
                if let Some(&bad) = cells.iter().find(|&&c| c >= grid.num_cells()) {
                    return Err(Error::InvalidRegions(format!(
                        "cell index {bad} out of range (grid has {} cells)",
                        grid.num_cells()
                    )));
                }
                cells.iter().copied().collect()
            }
            RegionSpec::Boxes(boxes) => {
                let mut s = BTreeSet::new();
                for b in boxes {
                    s.extend(grid.cells_in_box(b)?);
                }
                s
            }
        };
        Ok(set.into_iter().collect())
    }
}

/// How Ω is split into reconstruction blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// `count` consecutive runs of Ω cells in index order.
    Equal { count: usize },
    Blocks(Vec<RegionSpec>),
}

/// Validated decomposition into Ω, measurement windows and reconstruction
/// blocks. All index lists are sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    pub omega: Vec<usize>,
    pub w1: Vec<usize>,
    pub w2: Vec<usize>,
    pub partition: Vec<Vec<usize>>,
}

impl RegionSet {
    /// Validates explicit index sets. `partition = None` means a single block
    /// equal to Ω.
    pub fn new(
        grid: &Grid,
        omega: &[usize],
        w1: &[usize],
        w2: &[usize],
        partition: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let sorted = |v: &[usize], name: &str| -> Result<Vec<usize>> {
            let set: BTreeSet<usize> = v.iter().copied().collect();
            if set.len() != v.len() {
                return Err(Error::InvalidRegions(format!("{name} lists a cell twice")));
            }
            if let Some(&bad) = set.iter().find(|&&c| c >= grid.num_cells()) {
                return Err(Error::InvalidRegions(format!("{name}: cell {bad} out of range")));
            }
            if set.is_empty() {
                return Err(Error::InvalidRegions(format!("{name} is empty")));
            }
            Ok(set.into_iter().collect())
        };
        let omega = sorted(omega, "omega")?;
        let w1 = sorted(w1, "w1")?;
        let w2 = sorted(w2, "w2")?;

        for (name, w) in [("w1", &w1), ("w2", &w2)] {
            for &c in w {
                if omega.binary_search(&c).is_ok() {
                    return Err(Error::InvalidRegions(format!("{name} cell {c} lies inside omega")));
                }
            }
            for &c in w {
                for &o in &omega {
                    if grid.cell_distance(c, o) < grid.h() * (1.0 - 1e-9) {
                        return Err(Error::InvalidRegions(format!(
                            "{name} cell {c} is closer than one cell width to omega cell {o}"
                        )));
                    }
                }
            }
        }

        let partition = match partition {
            None => vec![omega.clone()],
            Some(blocks) => {
                let mut seen = BTreeSet::new();
                let mut out = Vec::with_capacity(blocks.len());
                for (b, block) in blocks.into_iter().enumerate() {
                    if block.is_empty() {
                        return Err(Error::InvalidRegions(format!("partition block {b} is empty")));
                    }
                    let mut block = block;
                    block.sort_unstable();
                    for &c in &block {
                        if omega.binary_search(&c).is_err() {
                            return Err(Error::InvalidRegions(format!(
                                "partition block {b} contains cell {c} outside omega"
                            )));
                        }
                        if !seen.insert(c) {
                            return Err(Error::InvalidRegions(format!(
                                "cell {c} belongs to more than one partition block"
                            )));
                        }
                    }
                    out.push(block);
                }
                if seen.len() != omega.len() {
                    let missing: Vec<usize> =
                        omega.iter().copied().filter(|c| !seen.contains(c)).collect();
                    return Err(Error::InvalidRegions(format!(
                        "partition does not cover omega; missing cells {missing:?}"
                    )));
                }
                out
            }
        };
        Ok(Self { omega, w1, w2, partition })
    }

    /// Cells not in Ω.
    pub fn exterior(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.num_cells())
            .filter(|c| self.omega.binary_search(c).is_err())
            .collect()
    }

    pub fn windows_coincide(&self) -> bool {
        self.w1 == self.w2
    }

    pub fn in_omega(&self, cell: usize) -> bool {
        self.omega.binary_search(&cell).is_ok()
    }

    /// Same Ω and partition with both windows replaced.
    pub fn with_windows(&self, grid: &Grid, w1: &[usize], w2: &[usize]) -> Result<Self> {
        Self::new(grid, &self.omega, w1, w2, Some(self.partition.clone()))
    }
}

/// Resolves region specifications against a grid and validates the result.
pub fn define_regions(
    grid: &Grid,
    omega: &RegionSpec,
    w1: &RegionSpec,
    w2: &RegionSpec,
    partition: Option<&PartitionSpec>,
) -> Result<RegionSet> {
    let omega_cells = omega.resolve(grid)?;
    let blocks = match partition {
        None => None,
        Some(PartitionSpec::Equal { count }) => {
            let count = *count;
            if count == 0 || count > omega_cells.len() {
                return Err(Error::InvalidRegions(format!(
                    "cannot split {} omega cells into {count} blocks",
                    omega_cells.len()
                )));
            }
            let base = omega_cells.len() / count;
            let extra = omega_cells.len() % count;
            let mut blocks = Vec::with_capacity(count);
            let mut start = 0;
            for b in 0..count {
                let len = base + usize::from(b < extra);
                blocks.push(omega_cells[start..start + len].to_vec());
                start += len;
            }
            Some(blocks)
        }
        Some(PartitionSpec::Blocks(specs)) => {
            Some(specs.iter().map(|s| s.resolve(grid)).collect::<Result<Vec<_>>>()?)
        }
    };
    RegionSet::new(grid, &omega_cells, &w1.resolve(grid)?, &w2.resolve(grid)?, blocks)
}

/// Which cells a [`CellField`] may be nonzero on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    All,
    Omega,
    Exterior,
    W1,
    W2,
}

/// Piecewise-constant function: one coefficient per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField {
    pub values: Vec<f64>,
    pub support: Support,
}

impl CellField {
    pub fn zeros(num_cells: usize, support: Support) -> Self {
        Self { values: vec![0.0; num_cells], support }
    }

    /// Field with `values[k]` on `cells[k]` and zero elsewhere.
    pub fn from_cells(num_cells: usize, support: Support, cells: &[usize], values: &[f64]) -> Self {
        assert_eq!(cells.len(), values.len(), "one value per cell");
        let mut f = Self::zeros(num_cells, support);
        for (&c, &v) in cells.iter().zip(values) {
            f.values[c] = v;
        }
        f
    }

    /// Constant `value` on `cells`.
    pub fn constant_on(num_cells: usize, support: Support, cells: &[usize], value: f64) -> Self {
        Self::from_cells(num_cells, support, cells, &vec![value; cells.len()])
    }

    pub fn restrict(&self, cells: &[usize]) -> Vec<f64> {
        cells.iter().map(|&c| self.values[c]).collect()
    }

    fn allowed(&self, regions: &RegionSet, cell: usize) -> bool {
        match self.support {
            Support::All => true,
            Support::Omega => regions.in_omega(cell),
            Support::Exterior => !regions.in_omega(cell),
            Support::W1 => regions.w1.binary_search(&cell).is_ok(),
            Support::W2 => regions.w2.binary_search(&cell).is_ok(),
        }
    }

    pub fn validate(&self, grid: &Grid, regions: &RegionSet) -> Result<()> {
        if self.values.len() != grid.num_cells() {
            return Err(Error::InvalidField(format!(
                "field has {} values but the grid has {} cells",
                self.values.len(),
                grid.num_cells()
            )));
        }
        for (c, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidField(format!("non-finite value at cell {c}")));
            }
            if v != 0.0 && !self.allowed(regions, c) {
                return Err(Error::InvalidField(format!(
                    "value {v} at cell {c} outside the {:?} support",
                    self.support
                )));
            }
        }
        Ok(())
    }

    /// `L²` norm over `cells` for cell volume `vol`.
    pub fn l2_norm_on(&self, cells: &[usize], vol: f64) -> f64 {
        (cells.iter().map(|&c| self.values[c].powi(2)).sum::<f64>() * vol).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_grid() {
        let g = Grid::new(&[-1.0], &[1.0], &[8]).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.num_cells(), 8);
        assert_eq!(g.center(0), vec![-0.875]);
        assert_eq!(g.center(1), vec![-0.625]);
        assert_eq!(g.center(7), vec![0.875]);
    }

    #[test]
    fn two_dimensional_grid() {
        let g = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[8, 8]).unwrap();
        assert_eq!(g.num_cells(), 64);
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.multi_index(9), [1, 1]);
        assert_eq!(g.linear_index([3, 5]), 29);
        assert_eq!(g.center(9), vec![-0.625, -0.625]);
    }

    #[test]
    fn coarse_grid_rejected() {
        let err = Grid::new(&[0.0], &[1.0], &[1]).unwrap_err();
        assert!(matches!(err, Error::CellTooLarge { .. }));
        assert!(err.to_string().contains("refine"));
    }

    #[test]
    fn non_cubic_and_degenerate_rejected() {
        assert!(Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[4, 4]).is_err());
        assert!(Grid::new(&[1.0], &[0.0], &[4]).is_err());
        assert!(Grid::new(&[0.0, 0.0, 0.0], &[1.0; 3], &[4; 3]).is_err());
    }

    #[test]
    fn cell_distance_counts_gap() {
        let g = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[8, 8]).unwrap();
        let a = g.linear_index([2, 2]);
        assert_eq!(g.cell_distance(a, g.linear_index([3, 2])), 0.0);
        assert_eq!(g.cell_distance(a, g.linear_index([3, 3])), 0.0);
        assert_eq!(g.cell_distance(a, g.linear_index([4, 2])), 0.25);
        assert!((g.cell_distance(a, g.linear_index([4, 4])) - 0.25 * 2f64.sqrt()).abs() < 1e-15);
    }

    fn standard_1d() -> Grid {
        Grid::new(&[-2.0], &[2.0], &[32]).unwrap()
    }

    #[test]
    fn valid_window_configuration() {
        let g = standard_1d();
        let r = define_regions(
            &g,
            &RegionSpec::interval(-0.5, 0.5),
            &RegionSpec::interval(1.0, 1.5),
            &RegionSpec::interval(1.0, 1.5),
            None,
        )
        .unwrap();
        assert_eq!(r.omega.len(), 8);
        assert_eq!(r.w1.len(), 4);
        assert!(r.windows_coincide());
        assert_eq!(r.partition, vec![r.omega.clone()]);
    }

    #[test]
    fn adjacent_window_rejected() {
        let g = standard_1d();
        // omega = cells 12..20, cell 20 shares a face with cell 19.
        let omega: Vec<usize> = (12..20).collect();
        let err = RegionSet::new(&g, &omega, &[20], &[20], None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("20") && msg.contains("19"), "{msg}");
        // one-cell gap is fine
        RegionSet::new(&g, &omega, &[21], &[21], None).unwrap();
    }

    #[test]
    fn overlapping_window_rejected() {
        let g = standard_1d();
        let omega: Vec<usize> = (12..20).collect();
        assert!(RegionSet::new(&g, &omega, &[15], &[25], None).is_err());
    }

    #[test]
    fn equal_partition() {
        let g = Grid::new(&[-2.0], &[2.0], &[64]).unwrap();
        let r = define_regions(
            &g,
            &RegionSpec::interval(-0.5, 0.5),
            &RegionSpec::interval(1.0, 1.5),
            &RegionSpec::interval(1.0, 1.5),
            Some(&PartitionSpec::Equal { count: 4 }),
        )
        .unwrap();
        assert_eq!(r.omega.len(), 16);
        assert_eq!(r.partition.len(), 4);
        for block in &r.partition {
            assert_eq!(block.len(), 4);
        }
        let union: BTreeSet<usize> = r.partition.iter().flatten().copied().collect();
        assert_eq!(union.into_iter().collect::<Vec<_>>(), r.omega);
    }

    #[test]
    fn partition_must_cover_and_be_disjoint() {
        let g = standard_1d();
        let omega: Vec<usize> = (12..20).collect();
        let w = [24usize];
        assert!(RegionSet::new(&g, &omega, &w, &w, Some(vec![(12..16).collect()])).is_err());
        assert!(RegionSet::new(
            &g,
            &omega,
            &w,
            &w,
            Some(vec![(12..17).collect(), (16..20).collect()])
        )
        .is_err());
        assert!(RegionSet::new(&g, &omega, &w, &w, Some(vec![vec![], (12..20).collect()])).is_err());
    }

    #[test]
    fn region_validation_order_independent() {
        let g = standard_1d();
        let omega: Vec<usize> = (12..20).collect();
        let mut shuffled = omega.clone();
        shuffled.reverse();
        let a = RegionSet::new(&g, &omega, &[22, 23], &[24], None).unwrap();
        let b = RegionSet::new(&g, &shuffled, &[23, 22], &[24], None).unwrap();
        assert_eq!(a, b);
        let again = RegionSet::new(&g, &a.omega, &a.w1, &a.w2, Some(a.partition.clone())).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn field_support_enforced() {
        let g = standard_1d();
        let r = RegionSet::new(&g, &(12..20).collect::<Vec<_>>(), &[24], &[24], None).unwrap();
        let q = CellField::constant_on(32, Support::Omega, &r.omega, 1.0);
        q.validate(&g, &r).unwrap();
        let mut bad = q.clone();
        bad.values[3] = 1.0;
        assert!(bad.validate(&g, &r).is_err());
        let mut nan = q;
        nan.values[12] = f64::NAN;
        assert!(nan.validate(&g, &r).is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(standard_1d().hash(), standard_1d().hash());
        assert_ne!(standard_1d().hash(), Grid::new(&[-2.0], &[2.0], &[64]).unwrap().hash());
    }
}
