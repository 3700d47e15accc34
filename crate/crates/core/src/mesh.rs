//! Uniform quadrilateral meshes of the unit square.
//!
//! Nodes live on the lattice `(i·h, j·h)` with `0 ≤ i, j ≤ 2ⁿ` and are numbered
//! row-major: node `(i, j)` has id `j·(2ⁿ+1) + i`, so `x` varies fastest. Cells are
//! indexed the same way by their lower-left lattice corner.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MIN_LEVEL: u32 = 1;
pub const MAX_LEVEL: u32 = 12;

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// The cell containing a point together with the point's reference coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellLocation {
    /// Cell column (x direction).
    pub ci: usize,
    /// Cell row (y direction).
    pub cj: usize,
    pub xi: f64,
    pub eta: f64,
}

/// Uniform Q1 mesh of `(0,1)²` with `2ⁿ` cells per side.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMesh {
    level: u32,
    cells_per_side: usize,
    h: f64,
    boundary_chain: Vec<usize>,
    interior_ids: Vec<usize>,
    /// node id -> position in `boundary_chain`, `usize::MAX` for interior nodes
    boundary_slot: Vec<usize>,
    /// node id -> position in `interior_ids`, `usize::MAX` for boundary nodes
    interior_slot: Vec<usize>,
}

impl GridMesh {
    /// Builds the mesh with `h = 2⁻ⁿ`, `1 ≤ n ≤ 12`.
    pub fn new(level: u32) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
            return Err(Error::Config(format!(
                "refinement level {level} outside [{MIN_LEVEL}, {MAX_LEVEL}]"
            )));
        }
        let cells = 1usize << level;
        let side = cells + 1;
        let node_count = side * side;
        let id = |i: usize, j: usize| j * side + i;

        // counterclockwise from (0,0): bottom, right, top, left
        let mut boundary_chain = Vec::with_capacity(4 * cells);
        boundary_chain.extend((0..cells).map(|i| id(i, 0)));
        boundary_chain.extend((0..cells).map(|j| id(cells, j)));
        boundary_chain.extend((0..cells).map(|k| id(cells - k, cells)));
        boundary_chain.extend((0..cells).map(|k| id(0, cells - k)));

        let mut boundary_slot = vec![usize::MAX; node_count];
        for (slot, &node) in boundary_chain.iter().enumerate() {
            boundary_slot[node] = slot;
        }
        let interior_ids: Vec<usize> = (1..cells)
            .flat_map(|j| (1..cells).map(move |i| id(i, j)))
            .collect();
        let mut interior_slot = vec![usize::MAX; node_count];
        for (slot, &node) in interior_ids.iter().enumerate() {
            interior_slot[node] = slot;
        }

        Ok(Self {
            level,
            cells_per_side: cells,
            h: 1.0 / cells as f64,
            boundary_chain,
            interior_ids,
            boundary_slot,
            interior_slot,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells_per_side + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side() * self.nodes_per_side()
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    /// Boundary node ids, counterclockwise from the origin.
    pub fn boundary_chain(&self) -> &[usize] {
        &self.boundary_chain
    }

    /// Interior node ids in row-major order.
    pub fn interior_ids(&self) -> &[usize] {
        &self.interior_ids
    }

    pub fn boundary_slot(&self, node: usize) -> Option<usize> {
        let s = self.boundary_slot[node];
        (s != usize::MAX).then_some(s)
    }

    pub fn interior_slot(&self, node: usize) -> Option<usize> {
        let s = self.interior_slot[node];
        (s != usize::MAX).then_some(s)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_slot[node] != usize::MAX
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * self.nodes_per_side() + i
    }

    /// Lattice index `(i, j)` of a node.
    pub fn lattice(&self, node: usize) -> (usize, usize) {
        let side = self.nodes_per_side();
        (node % side, node / side)
    }

    pub fn node_point(&self, node: usize) -> Point {
        let (i, j) = self.lattice(node);
        Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    /// Node ids of cell `(ci, cj)` in local order SW, SE, NE, NW.
    pub fn cell_nodes(&self, ci: usize, cj: usize) -> [usize; 4] {
        let sw = self.node_id(ci, cj);
        let side = self.nodes_per_side();
        [sw, sw + 1, sw + side + 1, sw + side]
    }

    /// Lower-left corner of cell `(ci, cj)`.
    pub fn cell_origin(&self, ci: usize, cj: usize) -> Point {
        Point::new(ci as f64 * self.h, cj as f64 * self.h)
    }

    /// Iterates cells as `(ci, cj)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let c = self.cells_per_side;
        (0..c).flat_map(move |cj| (0..c).map(move |ci| (ci, cj)))
    }

    /// Finds the cell containing `p`.
    ///
    /// A point on a shared edge or vertex belongs to the cell whose lower-left
    /// corner is closest to it from below, i.e. the cell index is `⌊p/h⌋`, clamped
    /// to the last cell on the right and top sides of the square.
    pub fn locate_cell(&self, p: Point) -> Result<CellLocation> {
        if !p.in_unit_square() {
            return Err(Error::Domain { x: p.x, y: p.y });
        }
        let n = self.cells_per_side as f64;
        let last = self.cells_per_side - 1;
        let ci = ((p.x * n).floor() as usize).min(last);
        let cj = ((p.y * n).floor() as usize).min(last);
        Ok(CellLocation {
            ci,
            cj,
            xi: p.x * n - ci as f64,
            eta: p.y * n - cj as f64,
        })
    }
}

/// Convenience constructor mirroring [`GridMesh::new`].
pub fn build_mesh(level: u32) -> Result<GridMesh> {
    GridMesh::new(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        let m = build_mesh(1).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.boundary_chain().len(), 8);
        assert_eq!(m.interior_ids(), &[4]);

        let m = build_mesh(4).unwrap();
        assert_eq!(m.node_count(), 289);
        assert_eq!(m.boundary_chain().len(), 64);
        assert_eq!(m.interior_ids().len(), 225);

        let m = build_mesh(9).unwrap();
        assert_eq!(m.node_count(), 263_169);
    }

    #[test]
    fn level_out_of_range() {
        assert!(matches!(build_mesh(0), Err(Error::Config(_))));
        assert!(matches!(build_mesh(13), Err(Error::Config(_))));
    }

    #[test]
    fn boundary_chain_is_closed_cycle() {
        for level in 1..=6 {
            let m = build_mesh(level).unwrap();
            let chain = m.boundary_chain();
            assert_eq!(chain[0], 0);
            let mut arc = 0.0;
            for k in 0..chain.len() {
                let a = m.node_point(chain[k]);
                let b = m.node_point(chain[(k + 1) % chain.len()]);
                let (dx, dy) = ((a.x - b.x).abs(), (a.y - b.y).abs());
                assert!(
                    (dx == m.h() && dy == 0.0) || (dx == 0.0 && dy == m.h()),
                    "step {k} is not a lattice edge"
                );
                arc += dx + dy;
            }
            assert!((arc - 4.0).abs() < 1e-14);
            // counterclockwise: second node lies on the bottom edge
            assert_eq!(m.node_point(chain[1]), Point::new(m.h(), 0.0));
        }
    }

    #[test]
    fn partition_of_nodes() {
        let m = build_mesh(3).unwrap();
        let mut seen = vec![0u8; m.node_count()];
        for &n in m.boundary_chain().iter().chain(m.interior_ids()) {
            seen[n] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
        for node in 0..m.node_count() {
            assert_eq!(m.is_boundary(node), m.interior_slot(node).is_none());
        }
    }

    #[test]
    fn cell_areas_sum_to_one() {
        for level in 1..=8 {
            let m = build_mesh(level).unwrap();
            let area: f64 = m.cells().map(|_| m.h() * m.h()).sum();
            assert!((area - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn locate_cell_examples() {
        let m = build_mesh(1).unwrap();
        let loc = m.locate_cell(Point::new(0.25, 0.25)).unwrap();
        assert_eq!((loc.ci, loc.cj, loc.xi, loc.eta), (0, 0, 0.5, 0.5));
        let loc = m.locate_cell(Point::new(0.5, 0.5)).unwrap();
        assert_eq!((loc.ci, loc.cj, loc.xi, loc.eta), (1, 1, 0.0, 0.0));

        let m = build_mesh(2).unwrap();
        let loc = m.locate_cell(Point::new(1.0, 1.0)).unwrap();
        assert_eq!((loc.ci, loc.cj, loc.xi, loc.eta), (3, 3, 1.0, 1.0));
    }

    #[test]
    fn locate_cell_outside() {
        let m = build_mesh(2).unwrap();
        assert!(matches!(
            m.locate_cell(Point::new(1.0 + 1e-12, 0.5)),
            Err(Error::Domain { .. })
        ));
        assert!(m.locate_cell(Point::new(-0.1, 0.5)).is_err());
    }

    #[test]
    fn cell_nodes_order() {
        let m = build_mesh(1).unwrap();
        assert_eq!(m.cell_nodes(1, 0), [1, 2, 5, 4]);
    }
}
