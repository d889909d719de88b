use std::sync::Arc;

use crate::{CoreError, Quadrature, Result, Side, SpatialGrid};

/// Values on (time sample × cell × angle), row-major in that order.
#[derive(Debug, Clone)]
pub struct PhaseField {
    grid: Arc<SpatialGrid>,
    quad: Arc<Quadrature>,
    times: Arc<[f64]>,
    eps: f64,
    values: Vec<f64>,
}

/// Values on (time sample × cell).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SpatialGrid>,
    times: Arc<[f64]>,
    values: Vec<f64>,
}

/// Full-range angular values at both walls, (time sample × side × angle).
#[derive(Debug, Clone)]
pub struct WallTrace {
    quad: Arc<Quadrature>,
    times: Arc<[f64]>,
    values: Vec<f64>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(CoreError::Shape("need at least one time sample".into()));
    }
    if times.windows(2).any(|p| p[1] <= p[0]) {
        return Err(CoreError::Shape("time samples must be strictly increasing".into()));
    }
    Ok(())
}

impl PhaseField {
    pub fn zeros(grid: Arc<SpatialGrid>, quad: Arc<Quadrature>, times: Arc<[f64]>, eps: f64) -> Result<Self> {
        check_times(&times)?;
        let n = times.len() * grid.cells() * quad.len();
        Ok(Self { grid, quad, times, eps, values: vec![0.0; n] })
    }

    pub fn from_values(grid: Arc<SpatialGrid>, quad: Arc<Quadrature>, times: Arc<[f64]>, eps: f64, values: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        let n = times.len() * grid.cells() * quad.len();
        if values.len() != n {
            return Err(CoreError::Shape(format!("expected {n} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument("phase field values must be finite".into()));
        }
        Ok(Self { grid, quad, times, eps, values })
    }

    /// Sample `f(t, x, μ)` at cell centres.
    pub fn from_fn(
        grid: Arc<SpatialGrid>,
        quad: Arc<Quadrature>,
        times: Arc<[f64]>,
        eps: f64,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, quad, times, eps)?;
        let (nx, nv) = (out.grid.cells(), out.quad.len());
        for (n, &t) in out.times.iter().enumerate() {
            for (i, &x) in out.grid.centers().iter().enumerate() {
                for (k, &mu) in out.quad.nodes().iter().enumerate() {
                    out.values[(n * nx + i) * nv + k] = f(t, x, mu);
                }
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn times(&self) -> &Arc<[f64]> {
        &self.times
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn stride(&self) -> usize {
        self.grid.cells() * self.quad.len()
    }

    /// All (cell × angle) values at time sample `n`.
    pub fn slice(&self, n: usize) -> &[f64] {
        let s = self.stride();
        &self.values[n * s..(n + 1) * s]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.values[n * s..(n + 1) * s]
    }

    pub fn at(&self, n: usize, i: usize, k: usize) -> f64 {
        self.values[(n * self.grid.cells() + i) * self.quad.len() + k]
    }

    pub fn same_shape(&self, other: &PhaseField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) && Arc::ptr_eq(&self.quad, &other.quad) && Arc::ptr_eq(&self.times, &other.times)
            || (*self.grid == *other.grid && *self.quad == *other.quad && *self.times == *other.times)
    }

    fn check(&self, other: &PhaseField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(CoreError::Shape("phase fields live on different grids".into()))
        }
    }

    /// `self + a·other`.
    pub fn axpy(&mut self, a: f64, other: &PhaseField) -> Result<()> {
        self.check(other)?;
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn sub(&self, other: &PhaseField) -> Result<PhaseField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> PhaseField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Multiply every value by `w(t, x, μ)`.
    pub fn weighted(&self, w: impl Fn(f64, f64, f64) -> f64) -> PhaseField {
        let mut out = self.clone();
        let (nx, nv) = (self.grid.cells(), self.quad.len());
        for (n, &t) in self.times.iter().enumerate() {
            for (i, &x) in self.grid.centers().iter().enumerate() {
                for (k, &mu) in self.quad.nodes().iter().enumerate() {
                    out.values[(n * nx + i) * nv + k] *= w(t, x, mu);
                }
            }
        }
        out
    }

    /// Velocity average `ū = ½ Σ w_k f_k` at every (t, x).
    pub fn velocity_average(&self) -> ScalarField {
        let nv = self.quad.len();
        let values = self.values.chunks(nv).map(|c| self.quad.average(c)).collect();
        ScalarField { grid: self.grid.clone(), times: self.times.clone(), values }
    }

    /// `f − ū`.
    pub fn fluctuation(&self) -> PhaseField {
        let nv = self.quad.len();
        let mut out = self.clone();
        for c in out.values.chunks_mut(nv) {
            let a = self.quad.average(c);
            c.iter_mut().for_each(|v| *v -= a);
        }
        out
    }

    /// Angle-constant extension of a scalar field.
    pub fn from_scalar(s: &ScalarField, quad: Arc<Quadrature>, eps: f64) -> PhaseField {
        let nv = quad.len();
        let values = s.values.iter().flat_map(|&v| std::iter::repeat_n(v, nv)).collect();
        PhaseField { grid: s.grid.clone(), quad, times: s.times.clone(), eps, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl ScalarField {
    pub fn zeros(grid: Arc<SpatialGrid>, times: Arc<[f64]>) -> Result<Self> {
        check_times(&times)?;
        let n = times.len() * grid.cells();
        Ok(Self { grid, times, values: vec![0.0; n] })
    }

    pub fn from_values(grid: Arc<SpatialGrid>, times: Arc<[f64]>, values: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() * grid.cells() {
            return Err(CoreError::Shape(format!(
                "expected {} values, got {}",
                times.len() * grid.cells(),
                values.len()
            )));
        }
        Ok(Self { grid, times, values })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, times: Arc<[f64]>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut out = Self::zeros(grid, times)?;
        let nx = out.grid.cells();
        for (n, &t) in out.times.iter().enumerate() {
            for (i, &x) in out.grid.centers().iter().enumerate() {
                out.values[n * nx + i] = f(t, x);
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn times(&self) -> &Arc<[f64]> {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let nx = self.grid.cells();
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let nx = self.grid.cells();
        &mut self.values[n * nx..(n + 1) * nx]
    }

    /// `∫ f dx` at time sample `n` (cell-average quadrature).
    pub fn integral(&self, n: usize) -> f64 {
        self.slice(n).iter().zip(self.grid.widths()).map(|(v, h)| v * h).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl WallTrace {
    pub fn zeros(quad: Arc<Quadrature>, times: Arc<[f64]>) -> Result<Self> {
        check_times(&times)?;
        let n = times.len() * 2 * quad.len();
        Ok(Self { quad, times, values: vec![0.0; n] })
    }

    pub fn from_values(quad: Arc<Quadrature>, times: Arc<[f64]>, values: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() * 2 * quad.len() {
            return Err(CoreError::Shape("wall trace length mismatch".into()));
        }
        Ok(Self { quad, times, values })
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn times(&self) -> &Arc<[f64]> {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Angular values at one wall and time sample.
    pub fn side(&self, n: usize, side: Side) -> &[f64] {
        let nv = self.quad.len();
        let o = (n * 2 + side.index()) * nv;
        &self.values[o..o + nv]
    }

    pub fn side_mut(&mut self, n: usize, side: Side) -> &mut [f64] {
        let nv = self.quad.len();
        let o = (n * 2 + side.index()) * nv;
        &mut self.values[o..o + nv]
    }

    pub fn axpy(&mut self, a: f64, other: &WallTrace) -> Result<()> {
        if self.values.len() != other.values.len() || *self.times != *other.times {
            return Err(CoreError::Shape("wall traces live on different grids".into()));
        }
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn sub(&self, other: &WallTrace) -> Result<WallTrace> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> WallTrace {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }
}
