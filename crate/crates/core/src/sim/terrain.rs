use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Height field on a uniform east/north lattice. Node `(col, row)` sits at
/// `(origin_east + col * cell_size, origin_north + row * cell_size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTerrain")]
pub struct Terrain {
    origin_east: f64,
    origin_north: f64,
    cell_size: f64,
    cols: usize,
    rows: usize,
    /// Row-major, `rows * cols` values.
    heights: Vec<f64>,
    /// Row-major per cell, `(rows - 1) * (cols - 1)` flags, or empty when the
    /// terrain has no water.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    water: Vec<bool>,
}

#[derive(Deserialize)]
struct RawTerrain {
    origin_east: f64,
    origin_north: f64,
    cell_size: f64,
    cols: usize,
    rows: usize,
    heights: Vec<f64>,
    #[serde(default)]
    water: Vec<bool>,
}

impl TryFrom<RawTerrain> for Terrain {
    type Error = Error;

    fn try_from(r: RawTerrain) -> Result<Self> {
        Terrain::new(r.origin_east, r.origin_north, r.cell_size, r.cols, r.rows, r.heights)?.with_water(r.water)
    }
}

impl Terrain {
    pub fn new(
        origin_east: f64,
        origin_north: f64,
        cell_size: f64,
        cols: usize,
        rows: usize,
        heights: Vec<f64>,
    ) -> Result<Self> {
        ensure_finite("terrain.origin_east", origin_east)?;
        ensure_finite("terrain.origin_north", origin_north)?;
        ensure_positive("terrain.cell_size", cell_size)?;
        if cols < 2 || rows < 2 {
            return Err(Error::invalid("terrain", "needs at least 2 x 2 lattice nodes"));
        }
        if heights.len() != cols * rows {
            return Err(Error::invalid(
                "terrain.heights",
                format!("expected {} values, got {}", cols * rows, heights.len()),
            ));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::invalid("terrain.heights", "must be finite"));
        }
        Ok(Terrain {
            origin_east,
            origin_north,
            cell_size,
            cols,
            rows,
            heights,
            water: Vec::new(),
        })
    }

    /// Builds a lattice by evaluating `f(east, north)` at every node.
    pub fn from_fn(
        origin_east: f64,
        origin_north: f64,
        cell_size: f64,
        cols: usize,
        rows: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let heights = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (c, r)))
            .map(|(c, r)| f(origin_east + c as f64 * cell_size, origin_north + r as f64 * cell_size))
            .collect();
        Terrain::new(origin_east, origin_north, cell_size, cols, rows, heights)
    }

    pub fn flat(
        origin_east: f64,
        origin_north: f64,
        cell_size: f64,
        cols: usize,
        rows: usize,
        height: f64,
    ) -> Result<Self> {
        Terrain::new(
            origin_east,
            origin_north,
            cell_size,
            cols,
            rows,
            vec![height; cols * rows],
        )
    }

    pub fn with_water(mut self, water: Vec<bool>) -> Result<Self> {
        if !water.is_empty() && water.len() != (self.cols - 1) * (self.rows - 1) {
            return Err(Error::invalid(
                "terrain.water",
                format!("expected {} cell flags", (self.cols - 1) * (self.rows - 1)),
            ));
        }
        self.water = water;
        Ok(self)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn node_height(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn node_position(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_east + col as f64 * self.cell_size,
            self.origin_north + row as f64 * self.cell_size,
        )
    }

    /// (min_east, min_north, max_east, max_north)
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let (max_e, max_n) = self.node_position(self.cols - 1, self.rows - 1);
        (self.origin_east, self.origin_north, max_e, max_n)
    }

    pub fn contains(&self, east: f64, north: f64) -> bool {
        self.edge_distance(east, north) >= 0.0
    }

    /// Distance to the nearest boundary edge; negative outside.
    pub fn edge_distance(&self, east: f64, north: f64) -> f64 {
        let (e0, n0, e1, n1) = self.bounds();
        (east - e0).min(e1 - east).min(north - n0).min(n1 - north)
    }

    /// Cell containing the point and the fractional offsets inside it. Points
    /// on the far edges belong to the last cell.
    fn locate(&self, east: f64, north: f64) -> Result<(usize, usize, f64, f64)> {
        if !self.contains(east, north) {
            return Err(Error::OutOfBounds { east, north });
        }
        let fx = (east - self.origin_east) / self.cell_size;
        let fy = (north - self.origin_north) / self.cell_size;
        let col = (fx.floor() as usize).min(self.cols - 2);
        let row = (fy.floor() as usize).min(self.rows - 2);
        Ok((col, row, fx - col as f64, fy - row as f64))
    }

    /// Bilinear interpolation of the four surrounding lattice heights.
    pub fn height_at(&self, east: f64, north: f64) -> Result<f64> {
        let (col, row, tx, ty) = self.locate(east, north)?;
        let lerp = |a: f64, b: f64, t: f64| a * (1.0 - t) + b * t;
        let south = lerp(self.node_height(col, row), self.node_height(col + 1, row), tx);
        let north_edge = lerp(self.node_height(col, row + 1), self.node_height(col + 1, row + 1), tx);
        Ok(lerp(south, north_edge, ty))
    }

    pub fn has_water(&self) -> bool {
        !self.water.is_empty()
    }

    pub fn is_water(&self, east: f64, north: f64) -> bool {
        match self.locate(east, north) {
            Ok((col, row, _, _)) if self.has_water() => self.water[row * (self.cols - 1) + col],
            _ => false,
        }
    }
}

/// Bilinear terrain height at a horizontal position.
pub fn terrain_height_at(terrain: &Terrain, east: f64, north: f64) -> Result<f64> {
    terrain.height_at(east, north)
}
