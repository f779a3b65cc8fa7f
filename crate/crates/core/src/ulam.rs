//! Ulam discretization of the transfer operator: grid partitions of the
//! domain, exact sparse transfer matrices, stationary densities, and the
//! discrete operator action.
//!
//! The transfer operator `L f = Σ_i (f∘φ_i^{-1})/(J∘φ_i^{-1})·χ_{φ(R_i)}`
//! is discretized on piecewise-constant densities over a grid partition as
//! the row-stochastic matrix
//!
//! ```text
//! P_ij = m(Q_i ∩ φ^{-1}(Q_j)) / m(Q_i),
//! ```
//!
//! where each preimage is computed branch-by-branch by exact polygon
//! clipping: for affine branches `φ^{-1}(Q_j)` is itself a polygon, so every
//! entry is a finite geometric computation with no sampling noise.
//!
//! Determinism: assembly is parallel over matrix columns and reductions run
//! in fixed (ascending-index, compensated) order, so results are identical
//! regardless of thread count.

use rayon::prelude::*;

use crate::geometry::{apply_affine, clip_convex, shared_edge_length, Kahan, Point2, Polygon};
use crate::maps::{PiecewiseAffineMap, POINT_TOL};
use crate::{Error, Result};

/// Power-iteration stopping tolerance on successive L¹ distances.
pub const STEP_TOL: f64 = 1e-12;

/// Required invariance residual `‖Lρ − ρ‖₁` of a computed density.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Iteration cap for the power method.
pub const MAX_ITERATIONS: usize = 100_000;

/// Grid partition of a polygonal domain: squares of side `width/n` over the
/// domain's bounding box, each clipped to the domain, empty clips dropped.
///
/// Cells are ordered by square index, iterating grid columns (x) outer and
/// grid rows (y) inner; this makes the ordering reproducible and is the
/// ordering used in every exported file.
#[derive(Debug, Clone)]
pub struct UlamPartition {
    cells: Vec<Polygon>,
    areas: Vec<f64>,
    centroids: Vec<Point2>,
    /// Unordered adjacent pairs `(i, j, shared_edge_length)` with `i < j`.
    adjacency: Vec<(usize, usize, f64)>,
    /// Length of ∂Ω contained in each cell's boundary.
    boundary_lengths: Vec<f64>,
    resolution: usize,
    omega: Polygon,
    square_to_cell: Vec<Option<usize>>,
    grid_cols: usize,
    grid_rows: usize,
    side: f64,
    origin: Point2,
}

impl UlamPartition {
    /// Builds the partition at resolution `n` (must be even and ≥ 2 so that
    /// the corner of the tent domain falls on grid lines).
    pub fn build(omega: &Polygon, n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidResolution(n));
        }
        let (lo, hi) = omega
            .bounding_box()
            .ok_or_else(|| Error::InvalidPolygon("empty domain".into()))?;
        let width = hi.x - lo.x;
        let side = width / n as f64;
        let grid_cols = n;
        let grid_rows = ((hi.y - lo.y) / side - 1e-9).ceil().max(1.0) as usize;

        let mut cells = Vec::new();
        let mut square_to_cell = vec![None; grid_cols * grid_rows];
        for cx in 0..grid_cols {
            for cy in 0..grid_rows {
                let x0 = lo.x + cx as f64 * side;
                let y0 = lo.y + cy as f64 * side;
                let square = Polygon::new(vec![
                    Point2::new(x0, y0),
                    Point2::new(x0 + side, y0),
                    Point2::new(x0 + side, y0 + side),
                    Point2::new(x0, y0 + side),
                ])?;
                let cell = clip_convex(&square, omega);
                if !cell.is_empty() {
                    square_to_cell[cx * grid_rows + cy] = Some(cells.len());
                    cells.push(cell);
                }
            }
        }

        let areas: Vec<f64> = cells.iter().map(Polygon::area).collect();
        let centroids: Vec<Point2> = cells.iter().map(Polygon::centroid).collect();
        let mut total = Kahan::new();
        for &a in &areas {
            total.add(a);
        }
        if (total.sum() - omega.area()).abs() > 1e-10 {
            return Err(Error::InvalidMap(format!(
                "partition areas sum to {}, domain area is {}",
                total.sum(),
                omega.area()
            )));
        }

        // Adjacency from grid-neighbor squares (diagonal neighbors meet in
        // at most a point and are skipped by the positive-length filter).
        let mut adjacency = Vec::new();
        for cx in 0..grid_cols {
            for cy in 0..grid_rows {
                let Some(i) = square_to_cell[cx * grid_rows + cy] else {
                    continue;
                };
                let mut neighbors = Vec::new();
                if cy + 1 < grid_rows {
                    neighbors.push(cx * grid_rows + cy + 1);
                }
                if cx + 1 < grid_cols {
                    neighbors.push((cx + 1) * grid_rows + cy);
                }
                for sq in neighbors {
                    let Some(j) = square_to_cell[sq] else {
                        continue;
                    };
                    let len = shared_edge_length(&cells[i], &cells[j]);
                    if len > 1e-12 {
                        adjacency.push((i.min(j), i.max(j), len));
                    }
                }
            }
        }
        adjacency.sort_by_key(|&(i, j, _)| (i, j));

        let omega_edges: Vec<(Point2, Point2)> = {
            let v = omega.vertices();
            (0..v.len()).map(|k| (v[k], v[(k + 1) % v.len()])).collect()
        };
        let boundary_lengths: Vec<f64> = cells
            .iter()
            .map(|cell| {
                let mut acc = Kahan::new();
                for &(a, b) in &omega_edges {
                    acc.add(edge_overlap_with_polygon(cell, a, b));
                }
                acc.sum()
            })
            .collect();

        Ok(UlamPartition {
            cells,
            areas,
            centroids,
            adjacency,
            boundary_lengths,
            resolution: n,
            omega: omega.clone(),
            square_to_cell,
            grid_cols,
            grid_rows,
            side,
            origin: lo,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Polygon] {
        &self.cells
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn centroids(&self) -> &[Point2] {
        &self.centroids
    }

    pub fn adjacency(&self) -> &[(usize, usize, f64)] {
        &self.adjacency
    }

    pub fn boundary_lengths(&self) -> &[f64] {
        &self.boundary_lengths
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn omega(&self) -> &Polygon {
        &self.omega
    }

    /// Index of the cell containing `p`, or `None` if `p` lies outside the
    /// partition (beyond tolerance). Checks the grid square of `p` first,
    /// then its 8 neighbors to absorb points on shared edges.
    pub fn locate(&self, p: Point2) -> Option<usize> {
        let fx = ((p.x - self.origin.x) / self.side).floor();
        let fy = ((p.y - self.origin.y) / self.side).floor();
        let cx = (fx.max(0.0) as usize).min(self.grid_cols - 1);
        let cy = (fy.max(0.0) as usize).min(self.grid_rows - 1);
        if let Some(i) = self.square_to_cell[cx * self.grid_rows + cy] {
            if self.cells[i].contains(p, POINT_TOL) {
                return Some(i);
            }
        }
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                let nx = cx as i64 + dx;
                let ny = cy as i64 + dy;
                if nx < 0 || ny < 0 || nx >= self.grid_cols as i64 || ny >= self.grid_rows as i64 {
                    continue;
                }
                if let Some(i) = self.square_to_cell[nx as usize * self.grid_rows + ny as usize] {
                    if self.cells[i].contains(p, POINT_TOL) {
                        return Some(i);
                    }
                }
            }
        }
        None
    }

    /// Cell indices whose grid squares intersect the bounding box of `poly`.
    /// Returned in ascending cell order.
    fn candidates(&self, poly: &Polygon) -> Vec<usize> {
        let Some((lo, hi)) = poly.bounding_box() else {
            return Vec::new();
        };
        let cx0 = (((lo.x - self.origin.x) / self.side).floor().max(0.0) as usize)
            .min(self.grid_cols - 1);
        let cx1 = (((hi.x - self.origin.x) / self.side).floor().max(0.0) as usize)
            .min(self.grid_cols - 1);
        let cy0 = (((lo.y - self.origin.y) / self.side).floor().max(0.0) as usize)
            .min(self.grid_rows - 1);
        let cy1 = (((hi.y - self.origin.y) / self.side).floor().max(0.0) as usize)
            .min(self.grid_rows - 1);
        let mut out = Vec::new();
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                if let Some(i) = self.square_to_cell[cx * self.grid_rows + cy] {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Length of the cell-boundary portion lying on the segment `a → b`.
fn edge_overlap_with_polygon(cell: &Polygon, a: Point2, b: Point2) -> f64 {
    let dir = b - a;
    let len = dir.norm();
    if len <= 1e-12 {
        return 0.0;
    }
    let unit = dir / len;
    let verts = cell.vertices();
    let n = verts.len();
    let mut acc = Kahan::new();
    for k in 0..n {
        let p1 = verts[k];
        let p2 = verts[(k + 1) % n];
        let c1 = (p1 - a).x * unit.y - (p1 - a).y * unit.x;
        let c2 = (p2 - a).x * unit.y - (p2 - a).y * unit.x;
        if c1.abs() > 1e-12 || c2.abs() > 1e-12 {
            continue;
        }
        let (t1, t2) = ((p1 - a).dot(&unit), (p2 - a).dot(&unit));
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let overlap = hi.min(len) - lo.max(0.0);
        if overlap > 1e-12 {
            acc.add(overlap);
        }
    }
    acc.sum()
}

/// Sparse Ulam matrix of a piecewise-affine map on a partition.
///
/// `rows[i]` holds the row-stochastic entries `(j, P_ij)`; `cols[j]` holds
/// the raw kernel areas `(i, m(Q_i ∩ φ^{-1}(Q_j)))` used by the density
/// action. `t_param` records the family parameter when the map came from the
/// tent family.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
    pub t_param: Option<f64>,
}

/// Assembles the transfer matrix by exact clipping: for each column `j` and
/// branch `b`, the preimage `φ_b^{-1}(Q_j ∩ φ_b(R_b))` is a polygon whose
/// intersections with the cells give the kernel areas.
pub fn transfer_matrix(map: &PiecewiseAffineMap, part: &UlamPartition) -> Result<TransferMatrix> {
    if map.branches().is_empty() {
        return Err(Error::EmptyMap);
    }
    let branch_data: Vec<(Polygon, _)> = map.branches().iter().map(|b| (b.image(), b)).collect();

    let cols: Vec<Vec<(usize, f64)>> = (0..part.len())
        .into_par_iter()
        .map(|j| {
            let mut col: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
            for (image, branch) in &branch_data {
                let reachable = clip_convex(&part.cells()[j], image);
                if reachable.is_empty() {
                    continue;
                }
                let pre = clip_convex(&apply_affine(&branch.inverse, &reachable), &branch.domain);
                if pre.is_empty() {
                    continue;
                }
                for i in part.candidates(&pre) {
                    let w = clip_convex(&part.cells()[i], &pre).area();
                    if w > 0.0 {
                        *col.entry(i).or_insert(0.0) += w;
                    }
                }
            }
            col.into_iter().collect()
        })
        .collect();

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); part.len()];
    for (j, col) in cols.iter().enumerate() {
        for &(i, w) in col {
            rows[i].push((j, w / part.areas()[i]));
        }
    }

    Ok(TransferMatrix {
        rows,
        cols,
        t_param: None,
    })
}

impl TransferMatrix {
    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Row sums of the stochastic matrix (1 within 1e−10 whenever the map
    /// sends its domain into itself).
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Kahan::new();
                for &(_, p) in row {
                    acc.add(p);
                }
                acc.sum()
            })
            .collect()
    }

    /// Discrete transfer-operator action on piecewise-constant (possibly
    /// signed) values: `f'_j = Σ_i f_i · m(Q_i ∩ φ^{-1}(Q_j)) / m(Q_j)`.
    /// Preserves total mass `Σ f_j·a_j` and nonnegativity.
    pub fn apply(&self, part: &UlamPartition, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), part.len());
        self.cols
            .par_iter()
            .enumerate()
            .map(|(j, col)| {
                let mut acc = Kahan::new();
                for &(i, w) in col {
                    acc.add(f[i] * w);
                }
                acc.sum() / part.areas()[j]
            })
            .collect()
    }

    /// Stationary density by power iteration from the uniform density,
    /// renormalized to unit mass each step; stops when successive L¹
    /// distances fall below [`STEP_TOL`]. The result's invariance residual
    /// `‖Lρ − ρ‖₁` is verified against [`RESIDUAL_TOL`].
    pub fn stationary_density(&self, part: &UlamPartition) -> Result<DensityVector> {
        let mut cur = vec![1.0; part.len()];
        let mut dist = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let mut next = self.apply(part, &cur);
            let mass = mass_of(&next, part);
            if mass <= 0.0 || !mass.is_finite() {
                return Err(Error::NonConvergence {
                    t: self.t_param,
                    iterations: 0,
                    residual: f64::NAN,
                });
            }
            for v in &mut next {
                *v /= mass;
            }
            dist = l1_between(&next, &cur, part);
            cur = next;
            if dist < STEP_TOL {
                let residual = l1_between(&self.apply(part, &cur), &cur, part);
                if residual > RESIDUAL_TOL {
                    return Err(Error::NonConvergence {
                        t: self.t_param,
                        iterations: MAX_ITERATIONS,
                        residual,
                    });
                }
                return Ok(DensityVector { values: cur });
            }
        }
        Err(Error::NonConvergence {
            t: self.t_param,
            iterations: MAX_ITERATIONS,
            residual: dist,
        })
    }
}

/// Piecewise-constant probability density on a partition's cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    pub values: Vec<f64>,
}

impl DensityVector {
    /// The uniform density (values ≡ 1).
    pub fn uniform(part: &UlamPartition) -> Self {
        DensityVector {
            values: vec![1.0; part.len()],
        }
    }

    /// Total mass `Σ values_j · area_j`.
    pub fn mass(&self, part: &UlamPartition) -> f64 {
        mass_of(&self.values, part)
    }
}

pub(crate) fn mass_of(values: &[f64], part: &UlamPartition) -> f64 {
    let mut acc = Kahan::new();
    for (v, a) in values.iter().zip(part.areas()) {
        acc.add(v * a);
    }
    acc.sum()
}

pub(crate) fn l1_between(a: &[f64], b: &[f64], part: &UlamPartition) -> f64 {
    let mut acc = Kahan::new();
    for i in 0..a.len() {
        acc.add((a[i] - b[i]).abs() * part.areas()[i]);
    }
    acc.sum()
}

/// L¹ norm `Σ |f_j|·a_j` of grid values.
pub fn l1_norm(f: &[f64], part: &UlamPartition) -> f64 {
    let mut acc = Kahan::new();
    for (v, a) in f.iter().zip(part.areas()) {
        acc.add(v.abs() * a);
    }
    acc.sum()
}

/// Duality defect `|∫ f·Lg dm − ∫ (f∘φ)·g dm|` for piecewise-constant `f`,
/// `g`. The left side uses the discrete operator; the right side integrates
/// `f∘φ` by a fixed-order midpoint rule with a 4×4 point grid per cell
/// (points falling outside a clipped cell are dropped and the weight is
/// renormalized to the cell area). Small on fine grids; exactly 0 up to
/// rounding when `f` is constant.
pub fn duality_check(
    map: &PiecewiseAffineMap,
    part: &UlamPartition,
    matrix: &TransferMatrix,
    f: &[f64],
    g: &[f64],
) -> f64 {
    let lg = matrix.apply(part, g);
    let mut lhs = Kahan::new();
    for j in 0..part.len() {
        lhs.add(f[j] * lg[j] * part.areas()[j]);
    }

    let mut rhs = Kahan::new();
    for (i, &g_i) in g.iter().enumerate() {
        if g_i == 0.0 {
            continue;
        }
        let cell = &part.cells()[i];
        let (lo, hi) = cell.bounding_box().expect("cells are non-empty");
        let (wx, wy) = (hi.x - lo.x, hi.y - lo.y);
        let mut samples = Kahan::new();
        let mut kept = 0usize;
        for kx in 0..4 {
            for ky in 0..4 {
                let p = Point2::new(
                    lo.x + (kx as f64 + 0.5) * wx / 4.0,
                    lo.y + (ky as f64 + 0.5) * wy / 4.0,
                );
                if !cell.contains(p, 0.0) {
                    continue;
                }
                kept += 1;
                if let Ok((image, _)) = map.eval(p) {
                    if let Some(target) = part.locate(image) {
                        samples.add(f[target]);
                    }
                }
            }
        }
        let mean = if kept > 0 {
            samples.sum() / kept as f64
        } else {
            // Sliver cell missed by all 16 points: fall back to the centroid.
            let c = cell.centroid();
            match map.eval(c) {
                Ok((image, _)) => part.locate(image).map_or(0.0, |t| f[t]),
                Err(_) => 0.0,
            }
        };
        rhs.add(mean * g_i * part.areas()[i]);
    }
    (lhs.sum() - rhs.sum()).abs()
}

/// Writes the density CSV `cell_id,cx,cy,area,rho` (cell centroids, one row
/// per cell in cell-index order, 17 significant digits).
pub fn write_density_csv<W: std::io::Write>(
    out: &mut W,
    part: &UlamPartition,
    rho: &DensityVector,
) -> Result<()> {
    writeln!(out, "cell_id,cx,cy,area,rho")?;
    for i in 0..part.len() {
        let c = part.centroids()[i];
        writeln!(
            out,
            "{},{},{},{},{}",
            i,
            fmt_f64(c.x),
            fmt_f64(c.y),
            fmt_f64(part.areas()[i]),
            fmt_f64(rho.values[i])
        )?;
    }
    Ok(())
}

/// Fixed-format float with 17 significant digits ('.' decimal separator,
/// no locale dependence), chosen for round-trip fidelity.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Optional JSON export of the matrix as lists of `(col, weight)` pairs.
pub fn matrix_to_json(matrix: &TransferMatrix) -> serde_json::Value {
    serde_json::json!({
        "t": matrix.t_param,
        "rows": matrix
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| serde_json::json!([j, w])).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}
