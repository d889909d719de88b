//! Discrete-ordinates Milne solver.
//!
//! Along each characteristic the equation is integrated exactly against a
//! piecewise-cubic representation of `Φ̄`, so the only discretisation error is
//! the interpolation of the scalar average. The fixed point in `Φ̄` is found by
//! a dense LU solve of the reduced system `(I − A) Φ̄ = b`, where `A` is the
//! source-to-average map of one transport sweep; a final sweep measures the
//! source-iteration residual of the result.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use phase_core::stencil::fornberg;
use phase_core::Quadrature;

use crate::{MilneError, Result};

const FIRST_SPACING: f64 = 3e-3;
const STRETCH: f64 = 1.02;

/// Nodes `0 = η_0 < … < η_J = η_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MilneGrid {
    eta: Vec<f64>,
}

impl Default for MilneGrid {
    fn default() -> Self {
        Self::new(400, 30.0).expect("default Milne grid")
    }
}

impl MilneGrid {
    /// Geometric spacing from `η = 0` blending into a uniform tail, with
    /// exactly `points` nodes.
    pub fn new(points: usize, eta_max: f64) -> Result<Self> {
        if !(eta_max >= 20.0) {
            return Err(MilneError::InvalidArgument(format!("eta_max must be >= 20, got {eta_max}")));
        }
        if points < 40 {
            return Err(MilneError::InvalidArgument(format!("need at least 40 Milne nodes, got {points}")));
        }
        let mut tail = eta_max / points as f64;
        let mut layout = geometric_head(tail);
        for _ in 0..100 {
            layout = geometric_head(tail);
            let used = layout.len() - 1;
            if used + 2 > points {
                return Err(MilneError::InvalidArgument(format!("{points} nodes cannot reach eta_max = {eta_max}")));
            }
            let m = points - 1 - used;
            let next = (eta_max - layout[used]) / m as f64;
            if (next - tail).abs() <= 1e-15 * tail {
                break;
            }
            tail = next;
        }
        let used = layout.len() - 1;
        Ok(Self { eta: uniform_tail(layout, eta_max, points - 1 - used) })
    }

    /// Same head as [`MilneGrid::new`], uniform tail of the given spacing.
    pub fn with_tail_spacing(eta_max: f64, tail: f64) -> Result<Self> {
        if !(eta_max >= 20.0) || !(tail > 0.0) {
            return Err(MilneError::InvalidArgument(format!("bad Milne grid eta_max = {eta_max}, spacing = {tail}")));
        }
        let head = geometric_head(tail);
        let m = ((eta_max - head[head.len() - 1]) / tail).ceil().max(1.0) as usize;
        Ok(Self { eta: uniform_tail(head, eta_max, m) })
    }

    pub fn from_nodes(eta: Vec<f64>) -> Result<Self> {
        if eta.len() < 4 || eta[0] != 0.0 || eta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MilneError::InvalidArgument("Milne nodes must start at 0 and increase".into()));
        }
        Ok(Self { eta })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn eta_max(&self) -> f64 {
        self.eta[self.eta.len() - 1]
    }

    /// Spacing of the last interval.
    pub fn tail_spacing(&self) -> f64 {
        let n = self.eta.len();
        self.eta[n - 1] - self.eta[n - 2]
    }

    /// Same head and tail spacing, reaching `factor · η_max`.
    pub fn extended(&self, factor: f64) -> Result<Self> {
        Self::with_tail_spacing(self.eta_max() * factor, self.tail_spacing())
    }

    /// Every interval split in two.
    pub fn refined(&self) -> Self {
        let mut eta = Vec::with_capacity(2 * self.eta.len() - 1);
        for w in self.eta.windows(2) {
            eta.push(w[0]);
            eta.push(0.5 * (w[0] + w[1]));
        }
        eta.push(self.eta_max());
        Self { eta }
    }
}

fn geometric_head(tail: f64) -> Vec<f64> {
    let mut eta = vec![0.0];
    let mut h = FIRST_SPACING.min(tail);
    while h < tail {
        let last = eta[eta.len() - 1];
        eta.push(last + h);
        h *= STRETCH;
    }
    eta
}

fn uniform_tail(mut head: Vec<f64>, eta_max: f64, m: usize) -> Vec<f64> {
    let start = head[head.len() - 1];
    let h = (eta_max - start) / m as f64;
    for i in 1..m {
        head.push(start + i as f64 * h);
    }
    head.push(eta_max);
    head
}

/// `∫_0^Δ e^{−r/ν} r^d dr / ν` for `d = 0..=3`.
fn moments(delta: f64, nu: f64) -> [f64; 4] {
    let x = delta / nu;
    let mut g = [0.0; 4];
    if x < 1.0 {
        // lower incomplete gamma by its power series
        for (k, gk) in g.iter_mut().enumerate() {
            let mut term = x.powi(k as i32 + 1);
            let mut sum = 0.0;
            for j in 0..40 {
                let t = term / (k + j + 1) as f64;
                sum += t;
                if t.abs() < 1e-18 * sum.abs() {
                    break;
                }
                term *= -x / (j + 1) as f64;
            }
            *gk = sum;
        }
    } else {
        let e = (-x).exp();
        g[0] = 1.0 - e;
        for k in 1..4 {
            g[k] = k as f64 * g[k - 1] - x.powi(k as i32) * e;
        }
    }
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = nu.powi(k as i32) * g[k];
    }
    out
}

/// Interval stencil start for interval `j` on `n` nodes.
fn stencil_start(j: usize, n: usize) -> usize {
    j.saturating_sub(1).min(n - 4)
}

/// Weights of `∫_0^Δ e^{−r/|ν|}/|ν| Φ̄(z ∓ r) dr` on the stencil nodes.
fn step_weights(nodes: &[f64], z: f64, delta: f64, nu_abs: f64, backward_in_eta: bool) -> [f64; 4] {
    let m = moments(delta, nu_abs);
    let w = fornberg(z, nodes, 3);
    let mut out = [0.0; 4];
    let mut fact = 1.0;
    for d in 0..4 {
        if d > 0 {
            fact *= d as f64;
        }
        let sign = if backward_in_eta && d % 2 == 1 { -1.0 } else { 1.0 };
        let c = sign * m[d] / fact;
        for (o, wd) in out.iter_mut().zip(&w[d]) {
            *o += c * wd;
        }
    }
    out
}

/// Per-interval coefficients of one direction.
#[derive(Debug, Clone)]
struct Sweep {
    nu: f64,
    decay: Vec<f64>,
    weights: Vec<[f64; 4]>,
}

impl Sweep {
    fn new(eta: &[f64], nu: f64) -> Self {
        let n = eta.len();
        let a = nu.abs();
        let mut decay = Vec::with_capacity(n - 1);
        let mut weights = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            let s = stencil_start(j, n);
            let delta = eta[j + 1] - eta[j];
            decay.push((-delta / a).exp());
            // ν > 0 marches to η_{j+1} looking back; ν < 0 marches to η_j looking forward
            let w = if nu > 0.0 {
                step_weights(&eta[s..s + 4], eta[j + 1], delta, a, true)
            } else {
                step_weights(&eta[s..s + 4], eta[j], delta, a, false)
            };
            weights.push(w);
        }
        Self { nu, decay, weights }
    }

    /// Nodal values given `Φ̄`; `inflow` is used at `η = 0` when `ν > 0`,
    /// `Φ̄(η_max)` closes `ν < 0`.
    fn run(&self, phibar: &[f64], inflow: f64, out: &mut [f64]) {
        let n = phibar.len();
        if self.nu > 0.0 {
            out[0] = inflow;
            for j in 0..n - 1 {
                let s = stencil_start(j, n);
                let w = &self.weights[j];
                out[j + 1] = self.decay[j] * out[j]
                    + w[0] * phibar[s]
                    + w[1] * phibar[s + 1]
                    + w[2] * phibar[s + 2]
                    + w[3] * phibar[s + 3];
            }
        } else {
            out[n - 1] = phibar[n - 1];
            for j in (0..n - 1).rev() {
                let s = stencil_start(j, n);
                let w = &self.weights[j];
                out[j] = self.decay[j] * out[j + 1]
                    + w[0] * phibar[s]
                    + w[1] * phibar[s + 1]
                    + w[2] * phibar[s + 2]
                    + w[3] * phibar[s + 3];
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilneProblem {
    pub quadrature: Arc<Quadrature>,
    pub grid: MilneGrid,
    /// Incoming datum at the positive nodes, in ascending `μ`.
    pub rho: Vec<f64>,
    /// Re-solve on a grid reaching `2 η_max` to measure truncation sensitivity.
    pub check_truncation: bool,
}

impl MilneProblem {
    pub fn new(quadrature: Arc<Quadrature>, rho: Vec<f64>) -> Self {
        Self { quadrature, grid: MilneGrid::default(), rho, check_truncation: true }
    }

    /// Datum sampled from a function of `μ ∈ (0, 1]`.
    pub fn from_fn(quadrature: Arc<Quadrature>, rho: impl Fn(f64) -> f64) -> Self {
        let n = quadrature.len();
        let r = quadrature.nodes()[n / 2..].iter().map(|&m| rho(m)).collect();
        Self::new(quadrature, r)
    }
}

#[derive(Debug, Clone)]
pub struct MilneSolution {
    pub eta: Vec<f64>,
    /// `Φ(η_j, μ_k)` stored row-major by node.
    pub phi: Vec<f64>,
    pub phibar: Vec<f64>,
    pub phi_inf: f64,
    /// Fitted `β̂` in `|Φ̄ − Φ_∞| ~ e^{−β̂η}`; `None` when the profile is flat.
    pub decay_rate: Option<f64>,
    /// `|Φ_∞(2η_max) − Φ_∞(η_max)|` when requested.
    pub truncation_sensitivity: Option<f64>,
    /// Largest change of `Φ̄` under one more source-iteration sweep.
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl MilneSolution {
    pub fn directions(&self) -> usize {
        self.phi.len() / self.eta.len()
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.phi[j * self.directions() + k]
    }

    /// `Ψ₀ = Φ − Φ_∞` at node `j`.
    pub fn psi(&self, j: usize) -> Vec<f64> {
        let nv = self.directions();
        self.phi[j * nv..(j + 1) * nv].iter().map(|v| v - self.phi_inf).collect()
    }
}

/// Milne solutions for the unit incoming data `ρ = e_k`, one per positive node.
/// Any datum is a linear combination of these, so time-dependent data need a
/// single factorisation.
#[derive(Debug, Clone)]
pub struct MilneBasis {
    quad: Arc<Quadrature>,
    grid: MilneGrid,
    sweeps: Vec<Sweep>,
    phibar: Vec<Vec<f64>>,
    phi_inf: Vec<f64>,
}

impl MilneBasis {
    pub fn new(quad: Arc<Quadrature>, grid: MilneGrid) -> Result<Self> {
        let eta = grid.nodes();
        let n = eta.len();
        let nv = quad.len();
        let sweeps: Vec<Sweep> = quad.nodes().iter().map(|&m| Sweep::new(eta, m)).collect();

        // A: Φ̄ ↦ ½ Σ w Φ with zero inflow, assembled column by column.
        let mut a = DMatrix::<f64>::identity(n, n);
        let mut unit = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for col in 0..n {
            unit[col] = 1.0;
            for (k, sw) in sweeps.iter().enumerate() {
                sw.run(&unit, 0.0, &mut buf);
                let hw = 0.5 * quad.weight(k);
                for (row, v) in buf.iter().enumerate() {
                    a[(row, col)] -= hw * v;
                }
            }
            unit[col] = 0.0;
        }
        let lu = a.clone().lu();
        let half = nv / 2;
        let mut phibar = Vec::with_capacity(half);
        let mut phi_inf = Vec::with_capacity(half);
        for k in half..nv {
            let sw = &sweeps[k];
            let zero = vec![0.0; n];
            sw.run(&zero, 1.0, &mut buf);
            let b = DVector::from_iterator(n, buf.iter().map(|v| 0.5 * quad.weight(k) * v));
            let mut x = lu.solve(&b).ok_or(MilneError::Singular)?;
            // one step of iterative refinement
            let r = &b - &a * &x;
            x += lu.solve(&r).ok_or(MilneError::Singular)?;
            let v: Vec<f64> = x.iter().copied().collect();
            phi_inf.push(v[n - 1]);
            phibar.push(v);
        }
        Ok(Self { quad, grid, sweeps, phibar, phi_inf })
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn grid(&self) -> &MilneGrid {
        &self.grid
    }

    /// Number of incoming directions (basis size).
    pub fn incoming(&self) -> usize {
        self.phibar.len()
    }

    /// Positive node `k` of the basis.
    pub fn incoming_node(&self, k: usize) -> f64 {
        self.quad.node(self.quad.len() / 2 + k)
    }

    pub fn basis_phibar(&self, k: usize) -> &[f64] {
        &self.phibar[k]
    }

    pub fn basis_limit(&self, k: usize) -> f64 {
        self.phi_inf[k]
    }

    /// Flux-weighted mean of the datum. Constants are exact solutions, so
    /// only `ρ − c` goes through the basis.
    pub fn reference(&self, rho: &[f64]) -> f64 {
        let half = self.quad.len() / 2;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, r) in rho.iter().enumerate() {
            let w = self.quad.weight(half + k) * self.quad.node(half + k);
            num += w * r;
            den += w;
        }
        num / den
    }

    /// `Φ_∞` for datum `rho`.
    pub fn limit(&self, rho: &[f64]) -> f64 {
        let c = self.reference(rho);
        c + rho.iter().zip(&self.phi_inf).map(|(r, p)| (r - c) * p).sum::<f64>()
    }

    pub fn phibar(&self, rho: &[f64]) -> Vec<f64> {
        let c = self.reference(rho);
        let mut out = vec![c; self.grid.len()];
        for (r, b) in rho.iter().zip(&self.phibar) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += (r - c) * v;
            }
        }
        out
    }

    /// Nodal profile of direction `nu` (either sign, any value) for a given
    /// `Φ̄`, with incoming value `inflow` when `nu > 0`.
    pub fn profile(&self, phibar: &[f64], nu: f64, inflow: f64) -> Vec<f64> {
        let mut out = vec![0.0; phibar.len()];
        Sweep::new(self.grid.nodes(), nu).run(phibar, inflow, &mut out);
        out
    }

    /// Value of a profile at an arbitrary `η ∈ [0, η_max]`, continuing the
    /// characteristic from the nearest upstream node.
    pub fn value_at(&self, phibar: &[f64], profile: &[f64], nu: f64, eta: f64) -> f64 {
        let (j, w, decay, from) = self.partial_step(nu, eta);
        let s = stencil_start(j, phibar.len());
        decay * profile[from] + (0..4).map(|m| w[m] * phibar[s + m]).sum::<f64>()
    }

    /// Interval index, source weights, decay factor and upstream node for a
    /// partial step ending at `eta`.
    fn partial_step(&self, nu: f64, eta: f64) -> (usize, [f64; 4], f64, usize) {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let z = eta.clamp(0.0, nodes[n - 1]);
        let j = nodes.partition_point(|&e| e <= z).saturating_sub(1).min(n - 2);
        let s = stencil_start(j, n);
        let a = nu.abs();
        if nu > 0.0 {
            let delta = z - nodes[j];
            (j, step_weights(&nodes[s..s + 4], z, delta, a, true), (-delta / a).exp(), j)
        } else {
            let delta = nodes[j + 1] - z;
            (j, step_weights(&nodes[s..s + 4], z, delta, a, false), (-delta / a).exp(), j + 1)
        }
    }

    /// Full solution for datum `rho` (length = number of positive nodes).
    pub fn solve(&self, rho: &[f64]) -> Result<MilneSolution> {
        if rho.len() != self.incoming() {
            return Err(MilneError::InvalidArgument(format!(
                "datum has {} values, expected {}",
                rho.len(),
                self.incoming()
            )));
        }
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(MilneError::InvalidArgument("datum must be finite".into()));
        }
        let phibar = self.phibar(rho);
        let eta = self.grid.nodes().to_vec();
        let n = eta.len();
        let nv = self.quad.len();
        let half = nv / 2;
        let mut phi = vec![0.0; n * nv];
        let mut buf = vec![0.0; n];
        let mut avg = vec![0.0; n];
        for (k, sw) in self.sweeps.iter().enumerate() {
            let inflow = if k >= half { rho[k - half] } else { 0.0 };
            sw.run(&phibar, inflow, &mut buf);
            let hw = 0.5 * self.quad.weight(k);
            for j in 0..n {
                phi[j * nv + k] = buf[j];
                avg[j] += hw * buf[j];
            }
        }
        let scale = rho.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let residual = avg.iter().zip(&phibar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        if residual > 1e-12 {
            return Err(MilneError::Convergence(residual));
        }
        let phi_inf = phibar[n - 1];
        let decay_rate = fit_decay(&eta, &phibar, phi_inf);
        Ok(MilneSolution {
            eta,
            phi,
            phibar,
            phi_inf,
            decay_rate,
            truncation_sensitivity: None,
            residual,
            warnings: Vec::new(),
        })
    }
}

/// Slope of `log|Φ̄ − Φ_∞|` over the second half of the range where the
/// deviation is resolved above round-off.
fn fit_decay(eta: &[f64], phibar: &[f64], limit: f64) -> Option<f64> {
    let dev: Vec<f64> = phibar.iter().map(|p| (p - limit).abs()).collect();
    let peak = dev.iter().copied().fold(0.0, f64::max);
    let floor = 1e-10 * peak.max(limit.abs()).max(1e-300);
    if peak <= 1e-13 * limit.abs().max(1.0) {
        return None;
    }
    let end = dev.iter().rposition(|&d| d > floor)?;
    let start_eta = 0.5 * eta[end];
    let pts: Vec<(f64, f64)> = (0..=end)
        .filter(|&j| eta[j] >= start_eta && dev[j] > 0.0)
        .map(|j| (eta[j], dev[j].ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    Some(-sxy / sxx)
}

/// Solve one Milne problem, optionally re-solving on a doubled domain.
pub fn solve_milne(problem: &MilneProblem) -> Result<MilneSolution> {
    let basis = MilneBasis::new(problem.quadrature.clone(), problem.grid.clone())?;
    let mut sol = basis.solve(&problem.rho)?;
    if problem.check_truncation {
        let wide = MilneBasis::new(problem.quadrature.clone(), problem.grid.extended(2.0)?)?;
        let d = (wide.limit(&problem.rho) - sol.phi_inf).abs();
        sol.truncation_sensitivity = Some(d);
        if d > 1e-8 {
            sol.warnings.push(format!("Phi_inf changes by {d:e} when eta_max doubles"));
        }
    }
    Ok(sol)
}
