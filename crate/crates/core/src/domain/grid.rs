use std::collections::VecDeque;
use std::sync::Arc;

use super::{DomainError, DomainSpec, Shape};
use crate::geometry::Point;

pub const DEFAULT_MIN_CELLS: f64 = 8.0;

#[derive(Debug, Clone, Copy)]
pub struct RasterOptions {
    /// Minimum number of cells across the narrowest feature.
    pub min_cells: f64,
}

impl Default for RasterOptions {
    fn default() -> Self {
        RasterOptions {
            min_cells: DEFAULT_MIN_CELLS,
        }
    }
}

const OUTSIDE: u32 = u32::MAX;
const GHOST_BIT: u32 = 1 << 31;

/// Lattice neighbour classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Interior(usize),
    Ghost(usize),
    Outside,
}

/// A planar domain sampled on the lattice `hℤ²`.
///
/// Interior nodes are the lattice points strictly inside the analytic domain
/// that belong to its largest 4-connected component. The ghost layer holds
/// every non-interior lattice point 8-adjacent to an interior node and carries
/// Dirichlet data.
#[derive(Debug, Clone)]
pub struct GridDomain {
    spec: DomainSpec,
    shape: Arc<Shape>,
    h: f64,
    /// lattice index of local cell (0, 0)
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    /// per lattice cell: interior id, ghost id | GHOST_BIT, or OUTSIDE
    cells: Vec<u32>,
    interior: Vec<(u32, u32)>,
    ghosts: Vec<(u32, u32)>,
    near_boundary: Vec<bool>,
    pruned: usize,
}

pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<GridDomain, DomainError> {
    rasterize_with(spec, h, RasterOptions::default())
}

pub fn rasterize_with(spec: &DomainSpec, h: f64, opts: RasterOptions) -> Result<GridDomain, DomainError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(DomainError::InvalidParameter {
            name: "h",
            reason: format!("must be finite and > 0, got {h}"),
        });
    }
    let shape = spec.shape()?;
    let feature = spec.narrowest_feature();
    let cells = feature / h;
    if cells < opts.min_cells {
        return Err(DomainError::ResolutionTooCoarse {
            h,
            feature,
            cells,
            required: opts.min_cells.ceil() as usize,
        });
    }

    let (lo, hi) = shape.bounding_box();
    let i0 = (lo.x / h).floor() as i64 - 2;
    let j0 = (lo.y / h).floor() as i64 - 2;
    let nx = ((hi.x / h).ceil() as i64 + 2 - i0 + 1) as usize;
    let ny = ((hi.y / h).ceil() as i64 + 2 - j0 + 1) as usize;

    let inside: Vec<bool> = {
        use rayon::prelude::*;
        (0..nx * ny)
            .into_par_iter()
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                let p = Point::new((i0 + i as i64) as f64 * h, (j0 + j as i64) as f64 * h);
                shape.contains(p)
            })
            .collect()
    };

    // largest 4-connected component of lattice-interior points
    let mut comp = vec![u32::MAX; nx * ny];
    let mut best: Option<(u32, usize)> = None;
    let mut n_comp = 0u32;
    let mut total_inside = 0usize;
    let mut queue = VecDeque::new();
    for start in 0..nx * ny {
        if !inside[start] || comp[start] != u32::MAX {
            continue;
        }
        let id = n_comp;
        n_comp += 1;
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(c) = queue.pop_front() {
            size += 1;
            let (i, j) = (c % nx, c / nx);
            let mut visit = |n: usize| {
                if inside[n] && comp[n] == u32::MAX {
                    comp[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(c - 1);
            }
            if i + 1 < nx {
                visit(c + 1);
            }
            if j > 0 {
                visit(c - nx);
            }
            if j + 1 < ny {
                visit(c + nx);
            }
        }
        total_inside += size;
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((id, size));
        }
    }
    let Some((keep, kept)) = best else {
        return Err(DomainError::EmptyDomain { h });
    };

    let mut cells_out = vec![OUTSIDE; nx * ny];
    let mut interior = Vec::with_capacity(kept);
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            if comp[c] == keep {
                cells_out[c] = interior.len() as u32;
                interior.push((i as u32, j as u32));
            }
        }
    }
    let mut ghosts = Vec::new();
    let mut near_boundary = vec![false; interior.len()];
    for (id, &(i, j)) in interior.iter().enumerate() {
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                let c = nj as usize * nx + ni as usize;
                if cells_out[c] == OUTSIDE {
                    cells_out[c] = GHOST_BIT | ghosts.len() as u32;
                    ghosts.push((ni as u32, nj as u32));
                }
                if (di == 0 || dj == 0) && cells_out[c] & GHOST_BIT != 0 {
                    near_boundary[id] = true;
                }
            }
        }
    }

    Ok(GridDomain {
        spec: spec.clone(),
        shape: Arc::new(shape),
        h,
        i0,
        j0,
        nx,
        ny,
        cells: cells_out,
        interior,
        ghosts,
        near_boundary,
        pruned: total_inside - kept,
    })
}

impl GridDomain {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn ghost_count(&self) -> usize {
        self.ghosts.len()
    }

    /// Lattice points strictly inside the analytic domain that were dropped
    /// because they are not 4-connected to the main component.
    pub fn pruned_count(&self) -> usize {
        self.pruned
    }

    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn lattice_point(&self, i: u32, j: u32) -> Point {
        Point::new(
            (self.i0 + i as i64) as f64 * self.h,
            (self.j0 + j as i64) as f64 * self.h,
        )
    }

    pub fn point(&self, node: usize) -> Point {
        let (i, j) = self.interior[node];
        self.lattice_point(i, j)
    }

    pub fn ghost_point(&self, ghost: usize) -> Point {
        let (i, j) = self.ghosts[ghost];
        self.lattice_point(i, j)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = Point> + '_ {
        (0..self.interior.len()).map(|n| self.point(n))
    }

    /// Local lattice coordinates of an interior node.
    pub fn lattice_coords(&self, node: usize) -> (usize, usize) {
        let (i, j) = self.interior[node];
        (i as usize, j as usize)
    }

    /// Classify the lattice cell at local coordinates `(i, j)`.
    pub fn cell(&self, i: i64, j: i64) -> Neighbor {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return Neighbor::Outside;
        }
        let v = self.cells[j as usize * self.nx + i as usize];
        if v == OUTSIDE {
            Neighbor::Outside
        } else if v & GHOST_BIT != 0 {
            Neighbor::Ghost((v & !GHOST_BIT) as usize)
        } else {
            Neighbor::Interior(v as usize)
        }
    }

    /// Neighbour of an interior node at lattice offset `(di, dj)`.
    #[inline]
    pub fn neighbor(&self, node: usize, di: i64, dj: i64) -> Neighbor {
        let (i, j) = self.interior[node];
        self.cell(i as i64 + di, j as i64 + dj)
    }

    /// Interior node at the lattice point nearest to `p`, if any.
    pub fn node_at(&self, p: Point) -> Option<usize> {
        let i = (p.x / self.h).round() as i64 - self.i0;
        let j = (p.y / self.h).round() as i64 - self.j0;
        match self.cell(i, j) {
            Neighbor::Interior(n) => Some(n),
            _ => None,
        }
    }

    /// Interior node closest to `p` (exhaustive search when `p` does not
    /// round onto an interior lattice point).
    pub fn nearest_node(&self, p: Point) -> usize {
        if let Some(n) = self.node_at(p) {
            return n;
        }
        (0..self.interior.len())
            .min_by(|&a, &b| self.point(a).dist(p).total_cmp(&self.point(b).dist(p)).then(a.cmp(&b)))
            .expect("grid has at least one interior node")
    }

    /// Interior nodes with a ghost 4-neighbour.
    pub fn is_near_boundary(&self, node: usize) -> bool {
        self.near_boundary[node]
    }

    /// Boolean mask over the full lattice (row-major, `nx * ny`).
    pub fn interior_mask(&self) -> Vec<bool> {
        self.cells.iter().map(|&v| v != OUTSIDE && v & GHOST_BIT == 0).collect()
    }

    /// Interior 4-neighbours of a node.
    pub fn interior_neighbors4(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(di, dj)| match self.neighbor(node, di, dj) {
                Neighbor::Interior(n) => Some(n),
                _ => None,
            })
    }

    /// Area estimate `count · h²`.
    pub fn area_estimate(&self) -> f64 {
        self.interior.len() as f64 * self.h * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::spec::KOCH_SIDE;

    fn relaxed() -> RasterOptions {
        RasterOptions { min_cells: 1.0 }
    }

    #[test]
    fn coarse_square_has_nine_nodes() {
        let g = rasterize_with(&DomainSpec::Square { side: 1.0 }, 0.25, relaxed()).unwrap();
        assert_eq!(g.interior_count(), 9);
        // the 8-cell rule rejects this spacing by default
        assert!(matches!(
            rasterize(&DomainSpec::Square { side: 1.0 }, 0.25),
            Err(DomainError::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn coarse_disk_uses_strict_membership() {
        let g = rasterize_with(&DomainSpec::UnitDisk, 0.5, relaxed()).unwrap();
        // x² + y² < 1 holds at the origin, the four axis points and the four
        // diagonal points (0.5² + 0.5² = 0.5)
        assert_eq!(g.interior_count(), 9);
        assert!(g.node_at(Point::new(0.5, 0.5)).is_some());
        assert!(g.node_at(Point::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn ghost_layer_covers_stencils() {
        let g = rasterize(&DomainSpec::UnitDisk, 1.0 / 16.0).unwrap();
        for n in 0..g.interior_count() {
            for dj in -1..=1 {
                for di in -1..=1 {
                    assert_ne!(g.neighbor(n, di, dj), Neighbor::Outside);
                }
            }
        }
        for k in 0..g.ghost_count() {
            assert!(!g.shape().contains(g.ghost_point(k)) || g.pruned_count() > 0);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            rasterize(&DomainSpec::UnitDisk, -1.0),
            Err(DomainError::InvalidParameter { name: "h", .. })
        ));
        assert!(matches!(
            rasterize(&DomainSpec::UnitDisk, 0.3),
            Err(DomainError::ResolutionTooCoarse { .. })
        ));
        assert!(matches!(
            rasterize_with(
                &DomainSpec::Annulus { r_in: 0.3, r_out: 0.35 },
                1.0,
                RasterOptions { min_cells: 0.0 }
            ),
            Err(DomainError::EmptyDomain { .. })
        ));
    }

    #[test]
    fn interior_is_single_component() {
        let g = rasterize(
            &DomainSpec::SquareMinusBall {
                side: 2.0,
                hole_radius: 0.5,
            },
            1.0 / 32.0,
        )
        .unwrap();
        let mut seen = vec![false; g.interior_count()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 0;
        while let Some(n) = stack.pop() {
            count += 1;
            for m in g.interior_neighbors4(n) {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        assert_eq!(count, g.interior_count());
    }

    #[test]
    fn koch_node_count_matches_area() {
        // each iteration adds 3·4^{k-1} triangles of side s/3^k
        let s = KOCH_SIDE;
        let tri = |a: f64| 3f64.sqrt() / 4.0 * a * a;
        let area: f64 = tri(s)
            + (1..=3)
                .map(|k| 3.0 * 4f64.powi(k - 1) * tri(s / 3f64.powi(k)))
                .sum::<f64>();
        let h = 0.01;
        let g = rasterize(&DomainSpec::KochSnowflake { iterations: 3 }, h).unwrap();
        let expected = area / (h * h);
        let rel = (g.interior_count() as f64 - expected).abs() / expected;
        assert!(rel < 0.01, "{} nodes vs {expected}", g.interior_count());
    }

    #[test]
    fn node_area_converges_under_refinement() {
        let spec = DomainSpec::Annulus { r_in: 0.5, r_out: 1.5 };
        let exact = std::f64::consts::PI * (1.5f64.powi(2) - 0.25);
        let err = |h: f64| (rasterize(&spec, h).unwrap().area_estimate() - exact).abs() / exact;
        let (coarse, fine) = (err(1.0 / 16.0), err(1.0 / 64.0));
        assert!(fine < 0.01 && fine < coarse, "{coarse} {fine}");
    }
}
