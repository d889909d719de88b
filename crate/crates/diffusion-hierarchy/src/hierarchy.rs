use std::sync::Arc;

use initial_layer::{build_ui1, InitialDatum};
use milne_layer::MilneBasis;
use phase_core::{Quadrature, Side};
use transport_solver::{BoundaryFn, BoundaryKind};

use crate::heat::{solve_heat, HeatBoundary, HeatProblem, HeatSolution, PointSampler};
use crate::{HierarchyError, Result};

/// Wall limit `(t, side) ↦ Φ_∞`, the Dirichlet datum of the in-flow interior problem.
pub type WallSeries = Arc<dyn Fn(f64, Side) -> f64 + Send + Sync>;

/// `Φ_∞(t)` at each wall from the Milne basis, with the in-flow datum read
/// on the basis nodes: `ρ_k = g(t, side, μ(ν_k))`.
pub fn milne_limit_series(basis: MilneBasis, g: BoundaryFn) -> WallSeries {
    Arc::new(move |t, side| {
        let rho: Vec<f64> = (0..basis.incoming()).map(|k| g(t, side, side.inward(basis.incoming_node(k)))).collect();
        basis.limit(&rho)
    })
}

/// Heat grid shared by the three interior levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatGrid {
    pub intervals: usize,
    pub dt: f64,
    pub startup: usize,
}

impl Default for HeatGrid {
    fn default() -> Self {
        Self { intervals: 400, dt: 2.5e-4, startup: 2 }
    }
}

fn problem(
    length: f64,
    t_final: f64,
    diffusivity: f64,
    grid: HeatGrid,
    initial: &dyn Fn(f64) -> f64,
    left: HeatBoundary,
    right: HeatBoundary,
) -> HeatProblem {
    let mut p = HeatProblem::new(length, t_final, |_| 0.0, left, right).with_grid(grid.intervals, grid.dt, initial);
    p.diffusivity = diffusivity;
    p.startup = grid.startup;
    p
}

fn boundaries(kind: BoundaryKind, dirichlet: Option<&WallSeries>) -> Result<(HeatBoundary, HeatBoundary)> {
    match kind {
        BoundaryKind::InFlow => {
            let s = dirichlet
                .ok_or_else(|| HierarchyError::InvalidArgument("in-flow interior needs the Milne limit series".into()))?;
            let side = |sd: Side| {
                let s = s.clone();
                HeatBoundary::Dirichlet(Arc::new(move |t| s(t, sd)))
            };
            Ok((side(Side::Left), side(Side::Right)))
        }
        BoundaryKind::Diffuse | BoundaryKind::Specular => Ok((HeatBoundary::Neumann, HeatBoundary::Neumann)),
    }
}

/// `Ū₀`: heat flow of `ū_o`, Dirichlet `Φ_∞(t)` for in-flow walls, Neumann otherwise.
pub fn build_u0(
    kind: BoundaryKind,
    ubar_o: &dyn Fn(f64) -> f64,
    limit: Option<&WallSeries>,
    length: f64,
    t_final: f64,
    diffusivity: f64,
    grid: HeatGrid,
) -> Result<HeatSolution> {
    let (l, r) = boundaries(kind, limit)?;
    solve_heat(&problem(length, t_final, diffusivity, grid, ubar_o, l, r))
}

/// `Ū₁`: heat flow of `Θ_{1,∞}` (given at the heat nodes), homogeneous
/// Dirichlet for in-flow walls, Neumann otherwise.
pub fn build_u1(kind: BoundaryKind, theta1: &[f64], length: f64, t_final: f64, diffusivity: f64, grid: HeatGrid) -> Result<HeatSolution> {
    if theta1.len() != grid.intervals + 1 {
        return Err(HierarchyError::InvalidArgument(format!(
            "Θ₁∞ has {} values, heat grid has {} nodes",
            theta1.len(),
            grid.intervals + 1
        )));
    }
    let (l, r) = match kind {
        BoundaryKind::InFlow => (HeatBoundary::zero_dirichlet(), HeatBoundary::zero_dirichlet()),
        _ => (HeatBoundary::Neumann, HeatBoundary::Neumann),
    };
    let h = length / grid.intervals as f64;
    let mut p = problem(length, t_final, diffusivity, grid, &|_| 0.0, l, r);
    p.initial = theta1.to_vec();
    debug_assert!((p.nodes()[1] - h).abs() < 1e-15);
    solve_heat(&p)
}

/// `Ū₂`: zero initial and boundary data, hence identically zero.
pub fn build_u2(kind: BoundaryKind, length: f64, t_final: f64, diffusivity: f64, grid: HeatGrid) -> HeatSolution {
    let nodes = (0..=grid.intervals).map(|j| length * j as f64 / grid.intervals as f64).collect();
    let steps = ((t_final / grid.dt) - 1e-9).ceil().max(1.0) as usize;
    let neumann = kind != BoundaryKind::InFlow;
    HeatSolution::zero(nodes, t_final, steps, diffusivity, neumann, neumann)
}

/// The interior levels `Ū₀, Ū₁, Ū₂`. They do not depend on `ε`.
#[derive(Debug, Clone)]
pub struct Interior {
    kind: BoundaryKind,
    length: f64,
    u0: HeatSolution,
    u1: HeatSolution,
    u2: HeatSolution,
    theta1: Vec<f64>,
}

/// Interior derivatives at fixed points and one time:
/// `u0[d] = ∂_x^d Ū₀` (d ≤ 4), `u1[d]` (d ≤ 3), `u2[d]` (d ≤ 2).
#[derive(Debug, Clone)]
pub struct InteriorSample {
    pub u0: Vec<Vec<f64>>,
    pub u1: Vec<Vec<f64>>,
    pub u2: Vec<Vec<f64>>,
}

impl Interior {
    /// Solves the hierarchy. `Θ_{1,∞}` comes from the first-order initial
    /// layer built at the heat nodes on the angular rule `quad`.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        kind: BoundaryKind,
        u_o: &InitialDatum,
        limit: Option<&WallSeries>,
        quad: Arc<Quadrature>,
        length: f64,
        t_final: f64,
        grid: HeatGrid,
    ) -> Result<Self> {
        let diffusivity = quad.second_moment();
        let q = quad.clone();
        let u = u_o.clone();
        let ubar = move |x: f64| {
            let v: Vec<f64> = q.nodes().iter().map(|&m| u(x, m)).collect();
            q.average(&v)
        };
        let u0 = build_u0(kind, &ubar, limit, length, t_final, diffusivity, grid)?;
        let nodes = u0.nodes().to_vec();
        let theta1 = build_ui1(u_o, &ubar, &nodes, quad, length)?.limit().to_vec();
        let u1 = build_u1(kind, &theta1, length, t_final, diffusivity, grid)?;
        let u2 = build_u2(kind, length, t_final, diffusivity, grid);
        Ok(Self { kind, length, u0, u1, u2, theta1 })
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn diffusivity(&self) -> f64 {
        self.u0.diffusivity()
    }

    pub fn t_final(&self) -> f64 {
        self.u0.t_final()
    }

    pub fn u0(&self) -> &HeatSolution {
        &self.u0
    }

    pub fn u1(&self) -> &HeatSolution {
        &self.u1
    }

    pub fn u2(&self) -> &HeatSolution {
        &self.u2
    }

    /// `Θ_{1,∞}` at the heat nodes.
    pub fn theta1(&self) -> &[f64] {
        &self.theta1
    }

    pub fn sampler(&self, points: &[f64]) -> Result<PointSampler> {
        self.u0.sampler(points)
    }

    pub fn sample(&self, t: f64, sampler: &PointSampler) -> Result<InteriorSample> {
        let pick = |s: &HeatSolution, order: usize| -> Result<Vec<Vec<f64>>> {
            Ok(s.derivatives(t, order)?.iter().map(|d| sampler.sample(d)).collect())
        };
        Ok(InteriorSample { u0: pick(&self.u0, 4)?, u1: pick(&self.u1, 3)?, u2: pick(&self.u2, 2)? })
    }
}
