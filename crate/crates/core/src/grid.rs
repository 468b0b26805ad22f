//! Uniform discretizations of probability simplexes and of local-policy spaces.

use crate::dist::{Distribution, LocalPolicy};
use crate::error::{Error, Result};

/// The uniform 1/N grid on the probability simplex over `dim` elements:
/// all weight vectors whose entries are multiples of `1/resolution`.
///
/// Cells are enumerated in lexicographic order of their integer composition
/// (first coordinate ascending, then second, …), which fixes tie-breaking
/// everywhere downstream.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dim: usize,
    resolution: u32,
    points: Vec<Vec<u32>>,
}

impl SimplexGrid {
    pub fn new(dim: usize, resolution: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("simplex dimension must be positive".into()));
        }
        if resolution == 0 {
            return Err(Error::Domain("grid resolution must be positive".into()));
        }
        let mut points = Vec::new();
        let mut current = vec![0u32; dim];
        enumerate_compositions(resolution, 0, &mut current, &mut points);
        Ok(Self { dim, resolution, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of grid cells, `C(resolution + dim - 1, dim - 1)`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integer composition of cell `index` (entries sum to `resolution`).
    pub fn composition(&self, index: usize) -> &[u32] {
        &self.points[index]
    }

    /// The grid point of cell `index` as a distribution.
    pub fn distribution(&self, index: usize) -> Distribution {
        let n = self.resolution as f64;
        let weights = self.points[index].iter().map(|&c| c as f64 / n).collect();
        Distribution::new(weights).expect("grid point is a valid distribution")
    }

    /// Index of an exact composition, if present.
    pub fn position(&self, composition: &[u32]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == composition)
    }

    /// Nearest grid cell in L1 distance; ties resolve to the lowest
    /// enumeration index. Distances within `1e-12` of the incumbent count
    /// as ties so that representation error cannot flip an exact midpoint.
    pub fn project(&self, mu: &Distribution) -> Result<usize> {
        if mu.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: mu.len() });
        }
        let n = self.resolution as f64;
        let mut best = f64::INFINITY;
        let mut best_idx = 0;
        for (i, comp) in self.points.iter().enumerate() {
            let mut d = 0.0;
            for (k, &c) in comp.iter().enumerate() {
                d += (mu.weight(k) - c as f64 / n).abs();
            }
            if d < best - 1e-12 {
                best = d;
                best_idx = i;
            }
        }
        Ok(best_idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.points.iter().map(|p| p.as_slice())
    }
}

fn enumerate_compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for c in 0..=remaining {
        current[pos] = c;
        enumerate_compositions(remaining - c, pos + 1, current, out);
    }
}

/// Number of weak compositions of `resolution` into `dim` parts.
pub fn simplex_cell_count(dim: usize, resolution: u32) -> u128 {
    // C(resolution + dim - 1, dim - 1)
    let n = resolution as u128 + dim as u128 - 1;
    let k = dim as u128 - 1;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// The discretized local-policy space: one per-state action-simplex grid,
/// enumerated over the Cartesian product of rows with state 0 most
/// significant.
#[derive(Debug, Clone)]
pub struct PolicyGrid {
    row_grid: SimplexGrid,
    num_states: usize,
}

impl PolicyGrid {
    pub fn new(num_states: usize, num_actions: usize, resolution: u32) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::Domain("policy grid needs at least one state".into()));
        }
        let row_grid = SimplexGrid::new(num_actions, resolution)?;
        let cells = row_grid.len() as u128;
        if cells.checked_pow(num_states as u32).is_none()
            || cells.pow(num_states as u32) > usize::MAX as u128
        {
            return Err(Error::Domain("policy grid too large to enumerate".into()));
        }
        Ok(Self { row_grid, num_states })
    }

    pub fn row_grid(&self) -> &SimplexGrid {
        &self.row_grid
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Number of grid policies: `(row cells)^(num_states)`.
    pub fn len(&self) -> usize {
        self.row_grid.len().pow(self.num_states as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-state row-grid indices of policy cell `index` (state 0 first).
    pub fn row_indices(&self, index: usize) -> Vec<usize> {
        let base = self.row_grid.len();
        let mut rows = vec![0usize; self.num_states];
        let mut rem = index;
        for s in (0..self.num_states).rev() {
            rows[s] = rem % base;
            rem /= base;
        }
        rows
    }

    /// Policy cell index from per-state row indices.
    pub fn index_from_rows(&self, rows: &[usize]) -> usize {
        let base = self.row_grid.len();
        rows.iter().fold(0usize, |acc, &r| acc * base + r)
    }

    /// The grid policy at `index`.
    pub fn policy(&self, index: usize) -> LocalPolicy {
        let rows = self
            .row_indices(index)
            .into_iter()
            .map(|r| self.row_grid.distribution(r))
            .collect();
        LocalPolicy::new(rows).expect("grid rows form a policy")
    }

    /// Projects each row of `policy` to its nearest row-grid cell.
    pub fn project(&self, policy: &LocalPolicy) -> Result<usize> {
        if policy.num_states() != self.num_states {
            return Err(Error::DimensionMismatch {
                expected: self.num_states,
                got: policy.num_states(),
            });
        }
        let mut rows = Vec::with_capacity(self.num_states);
        for s in 0..self.num_states {
            rows.push(self.row_grid.project(policy.row(s))?);
        }
        Ok(self.index_from_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts_match_compositions() {
        for (dim, res) in [(2usize, 20u32), (3, 7), (5, 20), (4, 1)] {
            let grid = SimplexGrid::new(dim, res).unwrap();
            assert_eq!(grid.len() as u128, simplex_cell_count(dim, res), "dim={dim} res={res}");
        }
        assert_eq!(simplex_cell_count(5, 20), 10626);
    }

    #[test]
    fn enumeration_is_lexicographic_in_first_coordinate() {
        let grid = SimplexGrid::new(2, 20).unwrap();
        assert_eq!(grid.composition(0), &[0, 20]);
        assert_eq!(grid.composition(10), &[10, 10]);
        assert_eq!(grid.composition(20), &[20, 0]);
    }

    #[test]
    fn every_grid_point_is_a_distribution() {
        let grid = SimplexGrid::new(3, 6).unwrap();
        for i in 0..grid.len() {
            let d = grid.distribution(i);
            assert_eq!(d.len(), 3);
        }
    }

    #[test]
    fn projecting_a_grid_point_returns_itself() {
        let grid = SimplexGrid::new(3, 8).unwrap();
        for i in (0..grid.len()).step_by(7) {
            assert_eq!(grid.project(&grid.distribution(i)).unwrap(), i);
        }
    }

    #[test]
    fn projection_picks_nearest_point() {
        let grid = SimplexGrid::new(2, 20).unwrap();
        let mu = Distribution::new(vec![0.537, 0.463]).unwrap();
        let idx = grid.project(&mu).unwrap();
        assert_eq!(grid.composition(idx), &[11, 9]); // (0.55, 0.45)
    }

    #[test]
    fn projection_tie_breaks_to_lowest_index() {
        let grid = SimplexGrid::new(2, 20).unwrap();
        // equidistant between (0.50,0.50) and (0.55,0.45)
        let mu = Distribution::new(vec![0.525, 0.475]).unwrap();
        let idx = grid.project(&mu).unwrap();
        assert_eq!(grid.composition(idx), &[10, 10]);
    }

    #[test]
    fn policy_grid_indexing_round_trips() {
        let pg = PolicyGrid::new(2, 2, 4).unwrap();
        assert_eq!(pg.len(), 25);
        for i in 0..pg.len() {
            let rows = pg.row_indices(i);
            assert_eq!(pg.index_from_rows(&rows), i);
        }
        // lowest index = both rows at row cell 0
        assert_eq!(pg.row_indices(0), vec![0, 0]);
    }

    #[test]
    fn policy_projection_is_per_row() {
        let pg = PolicyGrid::new(2, 2, 20).unwrap();
        let h = LocalPolicy::new(vec![
            Distribution::new(vec![0.2, 0.8]).unwrap(),
            Distribution::new(vec![0.25, 0.75]).unwrap(),
        ])
        .unwrap();
        let idx = pg.project(&h).unwrap();
        let back = pg.policy(idx);
        assert!(back.row(0).l1_distance(h.row(0)).unwrap() < 1e-12);
        assert!(back.row(1).l1_distance(h.row(1)).unwrap() < 1e-12);
    }
}
