use std::sync::Arc;

use phase_core::{PhaseField, Quadrature, Side, SpatialGrid, WallTrace};

use crate::{BoundaryCondition, Result, TransportError};

pub type InitialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialScheme {
    /// First-order upwind face values.
    Upwind,
    /// Piecewise-linear reconstruction with minmod-limited slopes. The slopes
    /// are lagged inside the source iteration and converge with it.
    Minmod,
}

/// Which time levels are kept in the trajectory. Level `n` is stored when
/// `n % stride == 0`, when `t_n <= dense_until`, and always for the first
/// and last level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordPolicy {
    pub stride: usize,
    pub dense_until: f64,
}

impl Default for RecordPolicy {
    fn default() -> Self {
        Self { stride: 1, dense_until: 0.0 }
    }
}

#[derive(Clone)]
pub struct TransportProblem {
    pub grid: Arc<SpatialGrid>,
    pub quad: Arc<Quadrature>,
    pub eps: f64,
    pub t_final: f64,
    /// Requested step; the solver uses `t_final / ceil(t_final / dt)`.
    pub dt: f64,
    pub initial: InitialFn,
    pub bc: BoundaryCondition,
    pub scheme: SpatialScheme,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub record: RecordPolicy,
}

impl std::fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportProblem")
            .field("cells", &self.grid.cells())
            .field("angles", &self.quad.len())
            .field("eps", &self.eps)
            .field("t_final", &self.t_final)
            .field("dt", &self.dt)
            .field("bc", &self.bc)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl TransportProblem {
    /// Problem with the default step `Δt = ε h` (h the bulk spacing), upwind fluxes,
    /// tolerance 1e−12 and every level recorded.
    pub fn new(
        grid: Arc<SpatialGrid>,
        quad: Arc<Quadrature>,
        eps: f64,
        t_final: f64,
        initial: InitialFn,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let dt = eps * grid.bulk_spacing();
        let p = Self {
            grid,
            quad,
            eps,
            t_final,
            dt,
            initial,
            bc,
            scheme: SpatialScheme::Upwind,
            tolerance: 1e-12,
            max_iterations: 5000,
            record: RecordPolicy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("t_final", self.t_final), ("dt", self.dt), ("tolerance", self.tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TransportError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.record.stride == 0 {
            return Err(TransportError::Invalid("record stride must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    /// Initial state as cell averages (three-point Gauss per cell), (cell × angle).
    pub fn initial_state(&self) -> Vec<f64> {
        let g = (0.6f64).sqrt() / 2.0;
        let w = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut u = Vec::with_capacity(self.grid.cells() * self.quad.len());
        for (&c, &h) in self.grid.centers().iter().zip(self.grid.widths()) {
            let xs = [c - g * h, c, c + g * h];
            for &mu in self.quad.nodes() {
                u.push(xs.iter().zip(&w).map(|(&x, w)| w * (self.initial)(x, mu)).sum());
            }
        }
        u
    }

    fn check_datum(&self, t: f64) -> Result<()> {
        if matches!(self.bc, BoundaryCondition::InFlow(_)) {
            return Ok(());
        }
        let g = self.bc.datum();
        for side in Side::BOTH {
            let flux = self.bc.datum_flux(&self.quad, t, side);
            let scale = self
                .quad
                .incoming(side)
                .map(|k| g(t, side, self.quad.node(k)).abs())
                .fold(1.0, f64::max);
            if flux.abs() > 1e-12 * scale {
                return Err(TransportError::Incompatible { time: t, side: side.name(), flux });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    /// New state, (cell × angle).
    pub state: Vec<f64>,
    /// Wall values, left then right, full angular range each.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub field: PhaseField,
    pub traces: WallTrace,
    pub iterations: Vec<usize>,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    /// `∫∫ u dμ dx` at record `n`.
    pub fn mass(&self, n: usize) -> f64 {
        let q = self.field.quadrature();
        let h = self.field.grid().widths();
        self.field.slice(n).chunks(q.len()).zip(h).map(|(c, hi)| hi * q.integrate(c)).sum()
    }
}

/// Outward flux `Σ w μ n u` of the recorded trace at record `n`.
pub fn boundary_flux(traj: &Trajectory, side: Side, n: usize) -> f64 {
    traj.traces.quadrature().outward_flux(traj.traces.side(n, side), side)
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

struct Sweeper<'a> {
    p: &'a TransportProblem,
    dt: f64,
}

impl Sweeper<'_> {
    /// Limited slopes of direction `k` in the current iterate.
    fn slopes(&self, u: &[f64], k: usize, inflow: f64, sigma: &mut [f64]) {
        let nv = self.p.quad.len();
        let c = self.p.grid.centers();
        let h = self.p.grid.widths();
        let nx = c.len();
        let mu = self.p.quad.node(k);
        let val = |i: usize| u[i * nv + k];
        for i in 0..nx {
            let left = if i > 0 {
                Some((val(i) - val(i - 1)) / (c[i] - c[i - 1]))
            } else if mu > 0.0 {
                Some((val(0) - inflow) / (0.5 * h[0]))
            } else {
                None
            };
            let right = if i + 1 < nx {
                Some((val(i + 1) - val(i)) / (c[i + 1] - c[i]))
            } else if mu < 0.0 {
                Some((inflow - val(i)) / (0.5 * h[i]))
            } else {
                None
            };
            sigma[i] = match (left, right) {
                (Some(a), Some(b)) => minmod(a, b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
        }
    }

    /// Implicit sweep of direction `k`; returns the outgoing face value.
    fn sweep(&self, k: usize, un: &[f64], ubar: &[f64], inflow: f64, sigma: Option<&[f64]>, u: &mut [f64]) -> f64 {
        let nv = self.p.quad.len();
        let h = self.p.grid.widths();
        let nx = h.len();
        let eps = self.p.eps;
        let mu = self.p.quad.node(k);
        let m = mu.abs();
        // downstream face offset: +h/2 for μ > 0, −h/2 for μ < 0
        let mut face = inflow;
        for j in 0..nx {
            let i = if mu > 0.0 { j } else { nx - 1 - j };
            let a = eps * h[i] / self.dt;
            let s = h[i] / eps;
            let half_slope = sigma.map_or(0.0, |sg| 0.5 * h[i] * sg[i]) * mu.signum();
            let ui = (a * un[i * nv + k] + s * ubar[i] + m * face - m * half_slope) / (a + m + s);
            u[i * nv + k] = ui;
            face = ui + half_slope;
        }
        face
    }
}

/// Wall values of a state: incoming from `incoming`, outgoing by reconstruction.
fn incoming_values(p: &TransportProblem, t: f64, side: Side, outgoing: &[f64], out: &mut [f64]) -> Result<()> {
    let q = &p.quad;
    let g = p.bc.datum();
    match &p.bc {
        BoundaryCondition::InFlow(_) => {
            for k in q.incoming(side) {
                out[k] = g(t, side, q.node(k));
            }
        }
        BoundaryCondition::Diffuse(_) => {
            let avg = q.half_range_average(outgoing, side)?;
            for k in q.incoming(side) {
                out[k] = avg + p.eps * g(t, side, q.node(k));
            }
        }
        BoundaryCondition::Specular(_) => {
            for k in q.incoming(side) {
                out[k] = outgoing[q.reflect(k)] + p.eps * g(t, side, q.node(k));
            }
        }
    }
    Ok(())
}

/// One backward-Euler step from `state` to time `t_next`.
pub fn step(p: &TransportProblem, state: &[f64], t_next: f64) -> Result<StepOutput> {
    let q = &p.quad;
    let nv = q.len();
    let nx = p.grid.cells();
    if state.len() != nv * nx {
        return Err(TransportError::Invalid(format!("state has {} values, expected {}", state.len(), nv * nx)));
    }
    let sw = Sweeper { p, dt: p.effective_dt() };
    let minmod = p.scheme == SpatialScheme::Minmod;

    let mut u = state.to_vec();
    let mut u_prev = state.to_vec();
    let mut ubar: Vec<f64> = u.chunks(nv).map(|c| q.average(c)).collect();
    // wall traces: [left | right], full range
    let mut trace = vec![0.0; 2 * nv];
    for side in Side::BOTH {
        let i = p.grid.wall_cell(side);
        let o = side.index() * nv;
        for k in 0..nv {
            trace[o + k] = state[i * nv + k];
        }
    }
    {
        let (l, r) = trace.split_at_mut(nv);
        let lo = l.to_vec();
        incoming_values(p, t_next, Side::Left, &lo, l)?;
        let ro = r.to_vec();
        incoming_values(p, t_next, Side::Right, &ro, r)?;
    }
    let mut sigma = vec![vec![0.0; nx]; nv];
    if minmod {
        for (k, sg) in sigma.iter_mut().enumerate() {
            let side = if q.node(k) > 0.0 { Side::Left } else { Side::Right };
            sw.slopes(&u, k, trace[side.index() * nv + k], sg);
        }
    }

    let neg: Vec<usize> = (0..nv).filter(|&k| q.node(k) < 0.0).collect();
    let pos: Vec<usize> = (0..nv).filter(|&k| q.node(k) > 0.0).collect();
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < p.max_iterations {
        it += 1;
        for &k in &neg {
            let b = trace[nv + k];
            let out = sw.sweep(k, state, &ubar, b, minmod.then_some(&sigma[k][..]), &mut u);
            trace[k] = out;
        }
        {
            let l = &mut trace[..nv];
            let lo = l.to_vec();
            incoming_values(p, t_next, Side::Left, &lo, l)?;
        }
        for &k in &pos {
            let b = trace[k];
            let out = sw.sweep(k, state, &ubar, b, minmod.then_some(&sigma[k][..]), &mut u);
            trace[nv + k] = out;
        }
        {
            let r = &mut trace[nv..];
            let ro = r.to_vec();
            incoming_values(p, t_next, Side::Right, &ro, r)?;
        }
        for (i, c) in u.chunks(nv).enumerate() {
            ubar[i] = q.average(c);
        }
        if minmod {
            for (k, sg) in sigma.iter_mut().enumerate() {
                let side = if q.node(k) > 0.0 { Side::Left } else { Side::Right };
                sw.slopes(&u, k, trace[side.index() * nv + k], sg);
            }
        }
        residual = u.iter().zip(&u_prev).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        if residual <= p.tolerance {
            break;
        }
        u_prev.copy_from_slice(&u);
    }
    if residual > p.tolerance {
        return Err(TransportError::Convergence { time: t_next, residual, iterations: it });
    }
    // make the recorded incoming values consistent with the final outgoing ones
    {
        let (l, r) = trace.split_at_mut(nv);
        let lo = l.to_vec();
        incoming_values(p, t_next, Side::Left, &lo, l)?;
        let ro = r.to_vec();
        incoming_values(p, t_next, Side::Right, &ro, r)?;
    }
    Ok(StepOutput { state: u, trace, iterations: it, residual })
}

/// March from 0 to `t_final`, recording according to the problem's policy.
pub fn solve(p: &TransportProblem) -> Result<Trajectory> {
    p.validate()?;
    let q = &p.quad;
    let nv = q.len();
    let steps = p.steps();
    let dt = p.effective_dt();
    let mut state = p.initial_state();

    let mut times = vec![0.0];
    let mut values = state.clone();
    let mut traces = Vec::with_capacity(2 * nv);
    let l = p.grid.length();
    for x in [0.0, l] {
        for &mu in q.nodes() {
            traces.push((p.initial)(x, mu));
        }
    }
    let mut iterations = Vec::with_capacity(steps);

    for n in 1..=steps {
        let t = n as f64 * dt;
        p.check_datum(t)?;
        let out = step(p, &state, t)?;
        iterations.push(out.iterations);
        state = out.state;
        if n == steps || n % p.record.stride == 0 || t <= p.record.dense_until {
            times.push(t);
            values.extend_from_slice(&state);
            traces.extend_from_slice(&out.trace);
        }
    }
    let times: Arc<[f64]> = times.into();
    let field = PhaseField::from_values(p.grid.clone(), q.clone(), times.clone(), p.eps, values)?;
    let traces = WallTrace::from_values(q.clone(), times, traces)?;
    Ok(Trajectory { field, traces, iterations, dt, steps })
}
