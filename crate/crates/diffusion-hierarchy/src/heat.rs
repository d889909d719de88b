use std::sync::Arc;

use phase_core::stencil::{DerivativeOperator, Interpolator};

use crate::{HierarchyError, Result};

/// Time series `t ↦ value` for Dirichlet data.
pub type Series = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum HeatBoundary {
    Dirichlet(Series),
    /// Homogeneous Neumann.
    Neumann,
}

impl std::fmt::Debug for HeatBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeatBoundary::Dirichlet(_) => write!(f, "Dirichlet"),
            HeatBoundary::Neumann => write!(f, "Neumann"),
        }
    }
}

impl HeatBoundary {
    pub fn zero_dirichlet() -> Self {
        HeatBoundary::Dirichlet(Arc::new(|_| 0.0))
    }

    fn is_neumann(&self) -> bool {
        matches!(self, HeatBoundary::Neumann)
    }
}

/// `∂_t u = D ∂_x² u` on `[0, L]` with nodes `x_j = jL/M`.
#[derive(Debug, Clone)]
pub struct HeatProblem {
    pub length: f64,
    pub intervals: usize,
    pub t_final: f64,
    pub dt: f64,
    pub diffusivity: f64,
    /// Initial values at the `M + 1` nodes.
    pub initial: Vec<f64>,
    pub left: HeatBoundary,
    pub right: HeatBoundary,
    /// Number of leading Crank–Nicolson steps replaced by two backward-Euler
    /// half steps each, which damps the stiff modes excited by corner
    /// mismatches.
    pub startup: usize,
}

impl HeatProblem {
    /// Default grid: 400 intervals, `Δt = 2.5e−4`, unit diffusivity.
    pub fn new(length: f64, t_final: f64, initial: impl Fn(f64) -> f64, left: HeatBoundary, right: HeatBoundary) -> Self {
        let intervals = 400;
        let initial = (0..=intervals).map(|j| initial(length * j as f64 / intervals as f64)).collect();
        Self { length, intervals, t_final, dt: 2.5e-4, diffusivity: 1.0, initial, left, right, startup: 2 }
    }

    /// Same problem on `intervals` intervals, resampling `initial`.
    pub fn with_grid(mut self, intervals: usize, dt: f64, initial: impl Fn(f64) -> f64) -> Self {
        self.intervals = intervals;
        self.dt = dt;
        self.initial = (0..=intervals).map(|j| initial(self.length * j as f64 / intervals as f64)).collect();
        self
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|j| self.length * j as f64 / self.intervals as f64).collect()
    }

    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("length", self.length), ("t_final", self.t_final), ("dt", self.dt), ("diffusivity", self.diffusivity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HierarchyError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.intervals < 8 {
            return Err(HierarchyError::InvalidArgument(format!("need at least 8 intervals, got {}", self.intervals)));
        }
        if self.initial.len() != self.intervals + 1 || self.initial.iter().any(|v| !v.is_finite()) {
            return Err(HierarchyError::InvalidArgument(format!(
                "initial data must be {} finite nodal values",
                self.intervals + 1
            )));
        }
        Ok(())
    }
}

/// Thomas algorithm; `a` sub-, `b` main, `c` super-diagonal.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = b.len();
    let mut beta = b[0];
    if beta.abs() < 1e-300 {
        return Err(HierarchyError::Singular(0));
    }
    d[0] /= beta;
    for i in 1..n {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        if beta.abs() < 1e-300 {
            return Err(HierarchyError::Singular(i));
        }
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i + 1] * d[i + 1];
    }
    Ok(())
}

struct Stepper<'a> {
    p: &'a HeatProblem,
    r: f64,
}

impl Stepper<'_> {
    fn laplacian(&self, u: &[f64], j: usize) -> f64 {
        let n = u.len();
        if j == 0 {
            2.0 * (u[1] - u[0])
        } else if j == n - 1 {
            2.0 * (u[n - 2] - u[n - 1])
        } else {
            u[j - 1] - 2.0 * u[j] + u[j + 1]
        }
    }

    /// θ-scheme step of length `dt` ending at `t_next`.
    fn step(&self, u: &mut Vec<f64>, dt: f64, theta: f64, t_next: f64) -> Result<()> {
        let n = u.len();
        let lam = self.r * dt;
        let mut a = vec![0.0; n];
        let mut b = vec![1.0 + 2.0 * theta * lam; n];
        let mut c = vec![0.0; n];
        let mut d: Vec<f64> = (0..n).map(|j| u[j] + (1.0 - theta) * lam * self.laplacian(u, j)).collect();
        for j in 1..n {
            a[j] = -theta * lam;
        }
        for j in 0..n - 1 {
            c[j] = -theta * lam;
        }
        c[0] = -2.0 * theta * lam;
        a[n - 1] = -2.0 * theta * lam;
        for (side, j) in [(&self.p.left, 0), (&self.p.right, n - 1)] {
            if let HeatBoundary::Dirichlet(g) = side {
                b[j] = 1.0;
                if j == 0 {
                    c[0] = 0.0;
                } else {
                    a[j] = 0.0;
                }
                d[j] = g(t_next);
            }
        }
        let mut scratch = vec![0.0; n];
        thomas(&a, &b, &c, &mut d, &mut scratch)?;
        *u = d;
        Ok(())
    }
}

/// Crank–Nicolson with pinned Dirichlet rows and ghost-reflected Neumann rows.
pub fn solve_heat(p: &HeatProblem) -> Result<HeatSolution> {
    p.validate()?;
    let h = p.length / p.intervals as f64;
    let steps = p.steps();
    let dt = p.t_final / steps as f64;
    let st = Stepper { p, r: p.diffusivity / (h * h) };
    let mut u = p.initial.clone();
    for (side, j) in [(&p.left, 0), (&p.right, p.intervals)] {
        if let HeatBoundary::Dirichlet(g) = side {
            u[j] = g(0.0);
        }
    }
    let mut levels = Vec::with_capacity((steps + 1) * u.len());
    levels.extend_from_slice(&u);
    for n in 1..=steps {
        let t = n as f64 * dt;
        if n <= p.startup {
            st.step(&mut u, 0.5 * dt, 1.0, t - 0.5 * dt)?;
            st.step(&mut u, 0.5 * dt, 1.0, t)?;
        } else {
            st.step(&mut u, dt, 0.5, t)?;
        }
        levels.extend_from_slice(&u);
    }
    Ok(HeatSolution::new(p.nodes(), dt, steps, levels, p.diffusivity, p.left.is_neumann(), p.right.is_neumann()))
}

/// Nodal solution at every time level, with time interpolation and
/// spatial derivatives up to fourth order.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    x: Vec<f64>,
    dt: f64,
    steps: usize,
    levels: Vec<f64>,
    diffusivity: f64,
    neumann: [bool; 2],
    ghosts: [usize; 2],
    ops: Vec<DerivativeOperator>,
}

const GHOSTS: usize = 8;
pub const MAX_DERIVATIVE: usize = 4;

impl HeatSolution {
    fn new(x: Vec<f64>, dt: f64, steps: usize, levels: Vec<f64>, diffusivity: f64, left: bool, right: bool) -> Self {
        let h = x[1] - x[0];
        let l = *x.last().unwrap();
        let ghosts = [if left { GHOSTS } else { 0 }, if right { GHOSTS } else { 0 }];
        let mut ext: Vec<f64> = (1..=ghosts[0]).rev().map(|j| -(j as f64) * h).collect();
        ext.extend_from_slice(&x);
        ext.extend((1..=ghosts[1]).map(|j| l + j as f64 * h));
        let ops = (1..=MAX_DERIVATIVE).map(|d| DerivativeOperator::new(&ext, d)).collect();
        Self { x, dt, steps, levels, diffusivity, neumann: [left, right], ghosts, ops }
    }

    /// Identically zero solution on the given nodes (the zero-data problem).
    pub fn zero(x: Vec<f64>, t_final: f64, steps: usize, diffusivity: f64, left_neumann: bool, right_neumann: bool) -> Self {
        let n = x.len();
        Self::new(x, t_final / steps as f64, steps, vec![0.0; n * (steps + 1)], diffusivity, left_neumann, right_neumann)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn level(&self, n: usize) -> &[f64] {
        let m = self.x.len();
        &self.levels[n * m..(n + 1) * m]
    }

    /// Nodal values at time `t` by cubic Lagrange interpolation between levels.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        let tf = self.t_final();
        if !(t >= -1e-12 && t <= tf * (1.0 + 1e-12) + 1e-12) {
            return Err(HierarchyError::InvalidArgument(format!("time {t} outside [0, {tf}]")));
        }
        let s = t / self.dt;
        let m = self.x.len();
        if self.steps < 3 {
            let n = (s.round() as usize).min(self.steps);
            return Ok(self.level(n).to_vec());
        }
        let n0 = (s.floor() as isize - 1).clamp(0, self.steps as isize - 3) as usize;
        let w: Vec<f64> = (0..4)
            .map(|i| {
                (0..4)
                    .filter(|&j| j != i)
                    .map(|j| (s - (n0 + j) as f64) / (i as f64 - j as f64))
                    .product()
            })
            .collect();
        let mut out = vec![0.0; m];
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.level(n0 + i)) {
                *o += wi * v;
            }
        }
        Ok(out)
    }

    /// `[u, ∂_x u, …, ∂_x^order u]` at the nodes at time `t`.
    pub fn derivatives(&self, t: f64, order: usize) -> Result<Vec<Vec<f64>>> {
        if order > MAX_DERIVATIVE {
            return Err(HierarchyError::InvalidArgument(format!("derivative order {order} above {MAX_DERIVATIVE}")));
        }
        let u = self.at(t)?;
        Ok(self.derivatives_of(&u, order))
    }

    /// Derivatives of arbitrary nodal data with this solution's boundary treatment.
    pub fn derivatives_of(&self, u: &[f64], order: usize) -> Vec<Vec<f64>> {
        let m = self.x.len();
        let [gl, gr] = self.ghosts;
        let mut ext = Vec::with_capacity(m + gl + gr);
        ext.extend((1..=gl).rev().map(|j| u[j]));
        ext.extend_from_slice(u);
        ext.extend((1..=gr).map(|j| u[m - 1 - j]));
        let mut out = vec![u.to_vec()];
        let mut buf = vec![0.0; ext.len()];
        for d in 1..=order {
            self.ops[d - 1].apply(&ext, &mut buf);
            let mut v = buf[gl..gl + m].to_vec();
            if d % 2 == 1 {
                if self.neumann[0] {
                    v[0] = 0.0;
                }
                if self.neumann[1] {
                    v[m - 1] = 0.0;
                }
            }
            out.push(v);
        }
        out
    }

    pub fn sampler(&self, points: &[f64]) -> Result<PointSampler> {
        PointSampler::new(&self.x, points)
    }
}

/// Fifth-order Lagrange interpolation from heat nodes to fixed points.
#[derive(Debug, Clone)]
pub struct PointSampler {
    stencils: Vec<(usize, Vec<f64>)>,
}

impl PointSampler {
    pub fn new(nodes: &[f64], points: &[f64]) -> Result<Self> {
        let (a, b) = (nodes[0], *nodes.last().unwrap());
        if let Some(p) = points.iter().find(|&&p| !(p >= a - 1e-12 && p <= b + 1e-12)) {
            return Err(HierarchyError::InvalidArgument(format!("sample point {p} outside [{a}, {b}]")));
        }
        let it = Interpolator::new(nodes.to_vec(), 5);
        Ok(Self { stencils: points.iter().map(|&p| it.weights(p)).collect() })
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn sample(&self, nodal: &[f64]) -> Vec<f64> {
        self.stencils.iter().map(|(s, w)| w.iter().zip(&nodal[*s..]).map(|(a, b)| a * b).sum()).collect()
    }
}
