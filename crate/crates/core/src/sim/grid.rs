//! Discretized contamination field for the worst-case evader region.
//!
//! Contamination lives on cell centers. The wavefront advances by true
//! Euclidean distance-to-set with sub-cell accumulation: every clean cell
//! near the front carries the remaining distance the front must travel to
//! reach it, measured against contaminated cell centers within a relaxation
//! window (plus each front cell's own sub-cell overshoot). Distances along
//! any window direction are exact; intermediate directions deviate below a
//! percent, far inside the grid tolerances used by the checks.

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Half-width, in cells, of the Chebyshev relaxation window.
const WINDOW: i32 = 4;

/// Precomputed relaxation hop.
#[derive(Debug, Clone, Copy)]
struct Offset {
    di: i32,
    dj: i32,
    dist: f64,
    unit: [f64; 2],
}

/// Contamination field over a square grid centered on the region center.
#[derive(Debug, Clone)]
pub struct WorldGrid {
    pub side: usize,
    pub cell_size: f64,
    pub half_extent: f64,
    contaminated: Vec<bool>,
    /// Remaining front travel distance for banded clean cells, else +inf.
    rem: Vec<f64>,
    /// Geometric distance at the last band rebuild, else +inf.
    geom: Vec<f64>,
    /// Sub-cell overshoot of the front past a contaminated cell's center,
    /// along the stored propagation direction.
    resid: Vec<f64>,
    /// Unit direction the front was moving when the cell contaminated.
    resid_dir: Vec<[f64; 2]>,
    relax_min: Vec<f64>,
    relax_dir: Vec<[f64; 2]>,
    relax_stamp: Vec<u32>,
    stamp: u32,
    touched: Vec<u32>,
    offsets: Vec<Offset>,
    pub contaminated_count: usize,
    /// Largest center radius ever contaminated (monotone; drives the escape
    /// check).
    pub max_reached_radius: f64,
}

impl WorldGrid {
    /// Grid with every cell whose center lies within `r0` contaminated.
    pub fn new(side: usize, half_extent: f64, r0: f64, sensor_reach: f64) -> Result<Self> {
        if half_extent < r0 + sensor_reach {
            return Err(Error::GridTooSmall {
                half_extent,
                required: r0 + sensor_reach,
            });
        }
        if side < 8 {
            return Err(Error::InvalidParameter {
                name: "grid_cells",
                message: format!("grid needs at least 8 cells per side, got {side}"),
            });
        }
        let cell_size = 2.0 * half_extent / side as f64;
        let n2 = side * side;
        let mut offsets = Vec::new();
        for dj in -WINDOW..=WINDOW {
            for di in -WINDOW..=WINDOW {
                if di == 0 && dj == 0 {
                    continue;
                }
                let d = ((di * di + dj * dj) as f64).sqrt() * cell_size;
                offsets.push(Offset {
                    di,
                    dj,
                    dist: d,
                    unit: [di as f64 * cell_size / d, dj as f64 * cell_size / d],
                });
            }
        }
        let mut grid = Self {
            side,
            cell_size,
            half_extent,
            contaminated: vec![false; n2],
            rem: vec![f64::INFINITY; n2],
            geom: vec![f64::INFINITY; n2],
            resid: vec![0.0; n2],
            resid_dir: vec![[0.0, 0.0]; n2],
            relax_min: vec![f64::INFINITY; n2],
            relax_dir: vec![[0.0, 0.0]; n2],
            relax_stamp: vec![0; n2],
            stamp: 0,
            touched: Vec::new(),
            offsets,
            contaminated_count: 0,
            max_reached_radius: 0.0,
        };
        let max_resid = cell_size * std::f64::consts::SQRT_2 / 2.0;
        for idx in 0..n2 {
            let c = grid.cell_center(idx);
            let rho = c.norm();
            if rho <= r0 {
                grid.contaminated[idx] = true;
                grid.contaminated_count += 1;
                // The true region boundary extends past the outermost
                // contaminated centers; carry the difference sub-cell, but
                // only on the boundary ring. Interior cells must not keep a
                // phantom head start for when clearing exposes them later.
                if rho >= r0 - cell_size && rho > 0.0 {
                    grid.resid[idx] = (r0 - rho).min(max_resid);
                    grid.resid_dir[idx] = [c.x / rho, c.y / rho];
                }
                grid.max_reached_radius = grid.max_reached_radius.max(rho);
            }
        }
        Ok(grid)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side + i
    }

    /// World coordinates of the cell center.
    #[inline]
    pub fn cell_center(&self, idx: usize) -> Point2 {
        let i = idx % self.side;
        let j = idx / self.side;
        Point2::new(
            -self.half_extent + (i as f64 + 0.5) * self.cell_size,
            -self.half_extent + (j as f64 + 0.5) * self.cell_size,
        )
    }

    /// Grid cell containing a world point, if inside the grid.
    pub fn locate(&self, p: Point2) -> Option<(usize, usize)> {
        let fi = (p.x + self.half_extent) / self.cell_size;
        let fj = (p.y + self.half_extent) / self.cell_size;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        if i >= self.side || j >= self.side {
            return None;
        }
        Some((i, j))
    }

    #[inline]
    pub fn is_contaminated(&self, idx: usize) -> bool {
        self.contaminated[idx]
    }

    fn has_clean_neighbor(&self, i: usize, j: usize) -> bool {
        let side = self.side;
        for dj in -1i32..=1 {
            for di in -1i32..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let ni = i as i32 + di;
                let nj = j as i32 + dj;
                if ni < 0 || nj < 0 || ni >= side as i32 || nj >= side as i32 {
                    continue;
                }
                if !self.contaminated[(nj as usize) * side + ni as usize] {
                    return true;
                }
            }
        }
        false
    }

    /// Dilate the contamination isotropically by `advance = vt * dt`.
    pub fn spread_step(&mut self, advance: f64) {
        if advance <= 0.0 || self.contaminated_count == 0 {
            return;
        }
        // Rebuild the band: relax every clean cell within the window of a
        // front cell against the current contaminated set.
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.relax_stamp.fill(0);
            self.stamp = 1;
        }
        self.touched.clear();
        let side = self.side as i32;
        for j in 0..self.side {
            let row = j * self.side;
            for i in 0..self.side {
                let idx = row + i;
                if !self.contaminated[idx] || !self.has_clean_neighbor(i, j) {
                    continue;
                }
                let resid = self.resid[idx];
                let dir = self.resid_dir[idx];
                for off in &self.offsets {
                    let ni = i as i32 + off.di;
                    let nj = j as i32 + off.dj;
                    if ni < 0 || nj < 0 || ni >= side || nj >= side {
                        continue;
                    }
                    let nidx = (nj as usize) * self.side + ni as usize;
                    if self.contaminated[nidx] {
                        continue;
                    }
                    // Credit the sub-cell overshoot only along its own
                    // direction; an isotropic credit overshoots on oblique
                    // hops and the error compounds around corners.
                    let proj = (dir[0] * off.unit[0] + dir[1] * off.unit[1]).max(0.0);
                    let cand = off.dist - resid * proj;
                    if self.relax_stamp[nidx] != self.stamp {
                        self.relax_stamp[nidx] = self.stamp;
                        self.relax_min[nidx] = cand;
                        self.relax_dir[nidx] = off.unit;
                        self.touched.push(nidx as u32);
                    } else if cand < self.relax_min[nidx] {
                        self.relax_min[nidx] = cand;
                        self.relax_dir[nidx] = off.unit;
                    }
                }
            }
        }
        // Merge the fresh measurement with the decrement history, then
        // advance the front. Progress toward a cell persists across set
        // growth (sub-cell overshoot rides along in `resid`), but dies when
        // its nearest source is cleared and the measured distance grows.
        for k in 0..self.touched.len() {
            let idx = self.touched[k] as usize;
            let measured = self.relax_min[idx];
            let base = if measured > self.geom[idx] + 1e-9 {
                measured
            } else {
                self.rem[idx].min(measured)
            };
            self.geom[idx] = measured;
            let rem = base - advance;
            if rem <= 0.0 {
                let dir = self.relax_dir[idx];
                self.contaminate(idx, -rem, dir);
            } else {
                self.rem[idx] = rem;
            }
        }
    }

    fn contaminate(&mut self, idx: usize, overshoot: f64, dir: [f64; 2]) {
        self.contaminated[idx] = true;
        self.contaminated_count += 1;
        self.resid[idx] = overshoot;
        self.resid_dir[idx] = dir;
        self.rem[idx] = f64::INFINITY;
        self.geom[idx] = f64::INFINITY;
        let rho = self.cell_center(idx).norm();
        if rho > self.max_reached_radius {
            self.max_reached_radius = rho;
        }
    }

    /// Clear every contaminated cell whose center satisfies `pred` within
    /// the world-space bounding box. Returns the number of cells cleared.
    pub fn clear_region(
        &mut self,
        min: Point2,
        max: Point2,
        pred: impl Fn(Point2) -> bool,
    ) -> usize {
        let lo_i = (((min.x + self.half_extent) / self.cell_size).floor() as i64).max(0) as usize;
        let lo_j = (((min.y + self.half_extent) / self.cell_size).floor() as i64).max(0) as usize;
        let hi_i = (((max.x + self.half_extent) / self.cell_size).ceil() as i64)
            .clamp(0, self.side as i64) as usize;
        let hi_j = (((max.y + self.half_extent) / self.cell_size).ceil() as i64)
            .clamp(0, self.side as i64) as usize;
        let mut cleared = 0;
        for j in lo_j..hi_j {
            let row = j * self.side;
            for i in lo_i..hi_i {
                let idx = row + i;
                if !self.contaminated[idx] {
                    continue;
                }
                if pred(self.cell_center(idx)) {
                    self.contaminated[idx] = false;
                    self.contaminated_count -= 1;
                    self.resid[idx] = 0.0;
                    self.resid_dir[idx] = [0.0, 0.0];
                    self.rem[idx] = f64::INFINITY;
                    self.geom[idx] = f64::INFINITY;
                    cleared += 1;
                }
            }
        }
        cleared
    }

    /// Current outermost contaminated center radius (0 when clear).
    pub fn outer_radius(&self) -> f64 {
        let mut best = 0.0f64;
        for idx in 0..self.contaminated.len() {
            if self.contaminated[idx] {
                let rho = self.cell_center(idx).norm();
                if rho > best {
                    best = rho;
                }
            }
        }
        best
    }

    /// Row-run encoding of the contaminated cells, for rendering.
    pub fn contaminated_runs(&self) -> Vec<(usize, usize, usize)> {
        let mut runs = Vec::new();
        for j in 0..self.side {
            let row = j * self.side;
            let mut i = 0;
            while i < self.side {
                if self.contaminated[row + i] {
                    let start = i;
                    while i < self.side && self.contaminated[row + i] {
                        i += 1;
                    }
                    runs.push((j, start, i));
                } else {
                    i += 1;
                }
            }
        }
        runs
    }
}
