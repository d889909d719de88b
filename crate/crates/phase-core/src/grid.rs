use crate::{CoreError, Result, Side, SlabGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// Geometric stretching away from both walls so that `cells_in_layer` cells
    /// fit inside `layer_width`, growing by `ratio` until the bulk spacing is reached.
    Boundary { layer_width: f64, cells_in_layer: usize, ratio: f64 },
}

/// Cell-centred finite-volume grid on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    geometry: SlabGeometry,
    edges: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
    grading: Grading,
    bulk_spacing: f64,
}

impl SpatialGrid {
    pub fn uniform(geometry: SlabGeometry, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(CoreError::InvalidArgument("grid needs at least one cell".into()));
        }
        let l = geometry.length();
        let edges: Vec<f64> = (0..=cells).map(|i| l * i as f64 / cells as f64).collect();
        Self::from_edges_inner(geometry, edges, Grading::Uniform, l / cells as f64)
    }

    /// Uniform bulk of nominal `bulk_cells` with geometric refinement at both walls.
    pub fn graded(geometry: SlabGeometry, bulk_cells: usize, layer_width: f64, cells_in_layer: usize, ratio: f64) -> Result<Self> {
        if bulk_cells == 0 || cells_in_layer == 0 {
            return Err(CoreError::InvalidArgument("cell counts must be positive".into()));
        }
        if !(layer_width > 0.0) || !(ratio >= 1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "layer width must be positive and ratio >= 1 (got {layer_width}, {ratio})"
            )));
        }
        let l = geometry.length();
        let hb = l / bulk_cells as f64;
        let grading = Grading::Boundary { layer_width, cells_in_layer, ratio };
        let h0 = if ratio == 1.0 {
            layer_width / cells_in_layer as f64
        } else {
            layer_width * (ratio - 1.0) / (ratio.powi(cells_in_layer as i32) - 1.0)
        };
        if h0 >= hb {
            let mut g = Self::uniform(geometry, bulk_cells)?;
            g.grading = grading;
            return Ok(g);
        }
        let mut stretch = Vec::new();
        let mut h = h0;
        while h < hb {
            stretch.push(h);
            h *= ratio;
            if ratio == 1.0 && stretch.len() >= cells_in_layer {
                break;
            }
        }
        let lg: f64 = stretch.iter().sum();
        let lm = l - 2.0 * lg;
        if lm <= 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "graded layers of width {lg} do not fit in a slab of length {l}"
            )));
        }
        let n_mid = (lm / hb).ceil().max(1.0) as usize;
        let mut edges = Vec::with_capacity(2 * stretch.len() + n_mid + 1);
        let mut x = 0.0;
        edges.push(0.0);
        for &s in &stretch {
            x += s;
            edges.push(x);
        }
        let x_mid = x;
        for i in 1..=n_mid {
            edges.push(x_mid + lm * i as f64 / n_mid as f64);
        }
        let x_right = l - lg;
        let mut acc = 0.0;
        for &s in stretch.iter().rev() {
            acc += s;
            edges.push(x_right + acc);
        }
        let last = edges.len() - 1;
        edges[last] = l;
        Self::from_edges_inner(geometry, edges, grading, hb)
    }

    pub fn from_edges(geometry: SlabGeometry, edges: Vec<f64>) -> Result<Self> {
        let hb = edges.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        Self::from_edges_inner(geometry, edges, Grading::Uniform, hb)
    }

    fn from_edges_inner(geometry: SlabGeometry, edges: Vec<f64>, grading: Grading, bulk_spacing: f64) -> Result<Self> {
        if edges.len() < 2 {
            return Err(CoreError::InvalidArgument("grid needs at least two edges".into()));
        }
        if edges[0] != 0.0 || (edges[edges.len() - 1] - geometry.length()).abs() > 1e-14 * geometry.length() {
            return Err(CoreError::InvalidArgument("edges must span [0, L]".into()));
        }
        if edges.windows(2).any(|p| p[1] <= p[0]) {
            return Err(CoreError::InvalidArgument("edges must be strictly increasing".into()));
        }
        let centers = edges.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let widths = edges.windows(2).map(|p| p[1] - p[0]).collect();
        Ok(Self { geometry, edges, centers, widths, grading, bulk_spacing })
    }

    pub fn geometry(&self) -> SlabGeometry {
        self.geometry
    }

    pub fn length(&self) -> f64 {
        self.geometry.length()
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Nominal bulk spacing `L / bulk_cells`; the default time step is `ε` times this.
    pub fn bulk_spacing(&self) -> f64 {
        self.bulk_spacing
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Number of cells lying entirely within distance `d` of the wall.
    pub fn cells_within(&self, d: f64, side: Side) -> usize {
        let tol = 1e-12 * self.length();
        match side {
            Side::Left => self.edges[1..].iter().take_while(|&&e| e <= d + tol).count(),
            Side::Right => {
                let l = self.length();
                self.edges[..self.edges.len() - 1].iter().rev().take_while(|&&e| l - e <= d + tol).count()
            }
        }
    }

    /// Index of the cell adjacent to a wall.
    pub fn wall_cell(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.cells() - 1,
        }
    }
}
