use std::sync::Arc;

use initial_layer::{build_ui1, build_ui1_dx, InitialDatum, InitialLayerTerm};
use milne_layer::{CutoffLayer, LayerDatum, MilneBasis, MilneGrid, SpecularExtension};
use phase_core::{PhaseField, Quadrature, Side, SlabGeometry, SpatialGrid, WallTrace};
use transport_solver::{BoundaryCondition, BoundaryKind};

use crate::compat::{check_compatibility, CompatibilityReport};
use crate::heat::PointSampler;
use crate::hierarchy::{milne_limit_series, HeatGrid, Interior, WallSeries};
use crate::{HierarchyError, Result};

/// Offsets (in cell widths, from the centre) and weights of the three-point
/// Gauss rule used for cell averages.
pub const CELL_GAUSS: [(f64, f64); 3] = [(-0.387_298_334_620_741_7, 5.0 / 18.0), (0.0, 8.0 / 18.0), (0.387_298_334_620_741_7, 5.0 / 18.0)];

/// Gauss points of every cell (three per cell, in order) followed by the two walls.
pub fn cell_points(grid: &SpatialGrid) -> Vec<f64> {
    let mut pts: Vec<f64> = grid
        .centers()
        .iter()
        .zip(grid.widths())
        .flat_map(|(&c, &h)| CELL_GAUSS.iter().map(move |(o, _)| c + o * h))
        .collect();
    pts.push(0.0);
    pts.push(grid.length());
    pts
}

/// Problem data shared by every `ε`.
#[derive(Clone)]
pub struct ExpansionSetup {
    pub u_o: InitialDatum,
    pub bc: BoundaryCondition,
    pub quad: Arc<Quadrature>,
    pub geometry: SlabGeometry,
    pub t_final: f64,
    pub heat: HeatGrid,
    pub milne: MilneGrid,
}

impl std::fmt::Debug for ExpansionSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpansionSetup")
            .field("bc", &self.bc)
            .field("angles", &self.quad.len())
            .field("t_final", &self.t_final)
            .field("heat", &self.heat)
            .finish()
    }
}

impl ExpansionSetup {
    pub fn new(u_o: InitialDatum, bc: BoundaryCondition, quad: Arc<Quadrature>, geometry: SlabGeometry, t_final: f64) -> Self {
        Self { u_o, bc, quad, geometry, t_final, heat: HeatGrid::default(), milne: MilneGrid::default() }
    }

    pub fn kind(&self) -> BoundaryKind {
        self.bc.kind()
    }
}

/// The `ε`-independent part of the expansion: validated data, the interior
/// hierarchy and (for in-flow walls) the Milne basis.
#[derive(Clone)]
pub struct Hierarchy {
    setup: ExpansionSetup,
    interior: Arc<Interior>,
    basis: Option<MilneBasis>,
    limit: Option<WallSeries>,
    report: CompatibilityReport,
}

impl std::fmt::Debug for Hierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hierarchy").field("setup", &self.setup).field("report", &self.report).finish()
    }
}

fn wall_slope(nodes: &[f64], v: &[f64], side: Side) -> f64 {
    let n = v.len();
    match side {
        Side::Left => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (nodes[2] - nodes[0]),
        Side::Right => (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (nodes[n - 1] - nodes[n - 3]),
    }
}

impl Hierarchy {
    /// Validates compatibility, then solves the interior levels.
    pub fn new(setup: ExpansionSetup) -> Result<Self> {
        if !(setup.t_final > 0.0) {
            return Err(HierarchyError::InvalidArgument(format!("t_final must be positive, got {}", setup.t_final)));
        }
        let kind = setup.kind();
        let mut report =
            check_compatibility(&setup.u_o, &setup.bc, &setup.quad, setup.geometry, setup.t_final, [0.0; 2], [0.0; 2])
                .into_result()?;
        let (basis, limit) = if kind == BoundaryKind::InFlow {
            let b = MilneBasis::new(setup.quad.clone(), setup.milne.clone())?;
            let l = milne_limit_series(b.clone(), setup.bc.datum().clone());
            (Some(b), Some(l))
        } else {
            (None, None)
        };
        let interior = Interior::build(
            kind,
            &setup.u_o,
            limit.as_ref(),
            setup.quad.clone(),
            setup.geometry.length(),
            setup.t_final,
            setup.heat,
        )?;
        let th = interior.theta1();
        let nodes = interior.u1().nodes();
        report.corner_mismatch = match kind {
            BoundaryKind::InFlow => [th[0].abs(), th[th.len() - 1].abs()],
            _ => Side::BOTH.map(|s| wall_slope(nodes, th, s).abs()),
        };
        Ok(Self { setup, interior: Arc::new(interior), basis, limit, report })
    }

    pub fn setup(&self) -> &ExpansionSetup {
        &self.setup
    }

    pub fn interior(&self) -> &Arc<Interior> {
        &self.interior
    }

    pub fn report(&self) -> &CompatibilityReport {
        &self.report
    }

    pub fn milne_basis(&self) -> Option<&MilneBasis> {
        self.basis.as_ref()
    }

    /// `Φ_∞(t)` at a wall (in-flow only).
    pub fn wall_limit(&self, t: f64, side: Side) -> Option<f64> {
        self.limit.as_ref().map(|l| l(t, side))
    }

    /// Expansion for one `ε`, evaluated as cell averages on `grid` for the
    /// directions of `quad`.
    pub fn bundle(&self, eps: f64, grid: Arc<SpatialGrid>, quad: Arc<Quadrature>) -> Result<ExpansionBundle> {
        ExpansionBundle::new(self, eps, grid, quad)
    }
}

enum Layers {
    None,
    Cutoff(Vec<CutoffLayer>),
    Extension(Vec<SpecularExtension>),
}

/// The expansion for one `ε` on a fixed grid and angular rule.
pub struct ExpansionBundle {
    eps: f64,
    kind: BoundaryKind,
    grid: Arc<SpatialGrid>,
    quad: Arc<Quadrature>,
    interior: Arc<Interior>,
    points: Vec<f64>,
    sampler: PointSampler,
    /// `u_o − ū_o` at (point, direction)
    fluct0: Vec<f64>,
    ui1: InitialLayerTerm,
    ui1_dx: InitialLayerTerm,
    layers: Layers,
}

impl std::fmt::Debug for ExpansionBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpansionBundle")
            .field("eps", &self.eps)
            .field("kind", &self.kind)
            .field("cells", &self.grid.cells())
            .field("angles", &self.quad.len())
            .finish()
    }
}

/// One value per constituent of `u_a`, unscaled: `u_a = U₀ + εU₁ + ε²U₂ +
/// U^I₀ + εU^I₁ + c U^B` with `c = 1` for `U^B₀` (in-flow), `c = ε` for
/// `U^B₁` (specular); `ub` is zero for diffuse walls.
#[derive(Debug, Clone)]
pub struct Constituents<T> {
    pub u0: T,
    pub u1: T,
    pub u2: T,
    pub ui0: T,
    pub ui1: T,
    pub ub: T,
}

/// Source of the remainder equation split by origin: interior truncation,
/// initial layer, boundary layer, and the time derivative of the boundary layer.
#[derive(Debug, Clone)]
pub struct Sources<T> {
    pub interior: T,
    pub initial: T,
    pub boundary: T,
    pub boundary_dt: T,
}

impl Sources<PhaseField> {
    pub fn total(&self) -> PhaseField {
        let mut s = self.interior.clone();
        for f in [&self.initial, &self.boundary, &self.boundary_dt] {
            s.axpy(1.0, f).expect("sources share a shape");
        }
        s
    }
}

/// `u_a`, its constituents and the remainder source at a list of times.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub eps: f64,
    pub kind: BoundaryKind,
    pub ua: PhaseField,
    pub ua_trace: WallTrace,
    pub parts: Constituents<PhaseField>,
    pub part_traces: Constituents<WallTrace>,
    pub sources: Sources<PhaseField>,
}

impl Assembly {
    /// Coefficient of `ub` in `u_a`.
    pub fn boundary_scale(&self) -> f64 {
        boundary_scale(self.kind, self.eps)
    }
}

fn boundary_scale(kind: BoundaryKind, eps: f64) -> f64 {
    match kind {
        BoundaryKind::InFlow => 1.0,
        BoundaryKind::Specular => eps,
        BoundaryKind::Diffuse => 0.0,
    }
}

const CHUNK: usize = 32;
const FIELDS: usize = 10;

impl ExpansionBundle {
    fn new(h: &Hierarchy, eps: f64, grid: Arc<SpatialGrid>, quad: Arc<Quadrature>) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(HierarchyError::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let setup = &h.setup;
        if (grid.length() - setup.geometry.length()).abs() > 1e-12 {
            return Err(HierarchyError::InvalidArgument("grid and geometry lengths differ".into()));
        }
        let kind = setup.kind();
        let points = cell_points(&grid);
        let sampler = h.interior.sampler(&points)?;
        let length = grid.length();
        let u_o = setup.u_o.clone();
        let q = quad.clone();
        let u = u_o.clone();
        let ubar = move |x: f64| {
            let v: Vec<f64> = q.nodes().iter().map(|&m| u(x, m)).collect();
            q.average(&v)
        };
        let nv = quad.len();
        let mut fluct0 = Vec::with_capacity(points.len() * nv);
        for &x in &points {
            let m = ubar(x);
            fluct0.extend(quad.nodes().iter().map(|&mu| u_o(x, mu) - m));
        }
        let ui1 = build_ui1(&u_o, &ubar, &points, quad.clone(), length)?;
        let ui1_dx = build_ui1_dx(&u_o, &ubar, &points, quad.clone(), length)?;
        let datum = |side: Side| -> LayerDatum {
            let g = setup.bc.datum().clone();
            Arc::new(move |t, mu| g(t, side, mu))
        };
        let layers = match kind {
            BoundaryKind::InFlow => {
                let basis = h.basis.as_ref().expect("in-flow hierarchy carries a Milne basis");
                let mut v = Vec::new();
                for side in Side::BOTH {
                    v.push(CutoffLayer::new(basis, datum(side), eps, side, setup.geometry, &points, quad.clone())?);
                }
                Layers::Cutoff(v)
            }
            BoundaryKind::Specular => {
                let mut v = Vec::new();
                for side in Side::BOTH {
                    v.push(SpecularExtension::new(datum(side), eps, side, setup.geometry, &points, quad.clone())?);
                }
                Layers::Extension(v)
            }
            BoundaryKind::Diffuse => Layers::None,
        };
        Ok(Self { eps, kind, grid, quad, interior: h.interior.clone(), points, sampler, fluct0, ui1, ui1_dx, layers })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    /// Evaluation points: three Gauss points per cell, then the two walls.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Boundary-layer values, time derivative and source at `t`, summed over walls.
    fn boundary(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let add = |acc: &mut Vec<f64>, v: Vec<f64>| acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        let n = self.points.len() * self.quad.len();
        let (mut ub, mut dt, mut s) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        match &self.layers {
            Layers::None => return None,
            Layers::Cutoff(ls) => {
                for l in ls {
                    add(&mut ub, l.ub0(t));
                    add(&mut dt, l.dt_ub0(t).into_iter().map(|v| -self.eps * v).collect());
                    add(&mut s, l.s_bl3(t));
                }
            }
            Layers::Extension(ls) => {
                for l in ls {
                    add(&mut ub, l.ub1(t));
                    add(&mut dt, l.s_bl_dt(t));
                    add(&mut s, l.s_bl_b(t));
                }
            }
        }
        Some((ub, dt, s))
    }

    /// Pointwise values at time `t` given the layer rows at `τ = t/ε²`.
    /// Returns `FIELDS` arrays over (point, direction):
    /// `u0, u1, u2, ui0, ui1, ub, s_is, s_il, s_bl, s_bl_dt`.
    fn point_values(&self, t: f64, ui1: &[f64], ui1_dx: &[f64]) -> Result<Vec<Vec<f64>>> {
        let eps = self.eps;
        let e2 = eps * eps;
        let d = self.interior.diffusivity();
        let smp = self.interior.sample(t, &self.sampler)?;
        let nv = self.quad.len();
        let np = self.points.len();
        let decay = (-t / e2).exp();
        let mut out = vec![vec![0.0; np * nv]; FIELDS];
        for p in 0..np {
            let a: Vec<f64> = smp.u0.iter().map(|v| v[p]).collect();
            let b: Vec<f64> = smp.u1.iter().map(|v| v[p]).collect();
            let c: Vec<f64> = smp.u2.iter().map(|v| v[p]).collect();
            for k in 0..nv {
                let m = self.quad.node(k);
                let j = p * nv + k;
                out[0][j] = a[0];
                out[1][j] = b[0] - m * a[1];
                out[2][j] = c[0] - m * b[1] + (m * m - d) * a[2];
                out[3][j] = decay * self.fluct0[j];
                out[4][j] = ui1[j];
                let first = (d - m * m) * b[2] + m * c[1] + m * (m * m - 2.0 * d) * a[3];
                let second = d * c[2] - m * d * b[3] + (m * m - d) * d * a[4];
                out[6][j] = -e2 * first - e2 * eps * second;
                out[7][j] = -eps * m * ui1_dx[j];
            }
        }
        if let Some((ub, dt, s)) = self.boundary(t) {
            out[5] = ub;
            out[8] = s;
            out[9] = dt;
        }
        Ok(out)
    }

    /// Assembles every field at `times` (strictly increasing, within `[0, T]`).
    pub fn assemble(&self, times: &[f64]) -> Result<Assembly> {
        let t_final = self.interior.t_final();
        if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HierarchyError::InvalidArgument("times must be non-empty and strictly increasing".into()));
        }
        if times[0] < 0.0 || times[times.len() - 1] > t_final * (1.0 + 1e-12) {
            return Err(HierarchyError::InvalidArgument(format!("times must lie in [0, {t_final}]")));
        }
        let times: Arc<[f64]> = times.into();
        let nv = self.quad.len();
        let nc = self.grid.cells();
        let zero = || PhaseField::zeros(self.grid.clone(), self.quad.clone(), times.clone(), self.eps);
        let zero_trace = || WallTrace::zeros(self.quad.clone(), times.clone());
        let mut fields: Vec<PhaseField> = (0..FIELDS).map(|_| zero()).collect::<std::result::Result<_, _>>()?;
        let mut traces: Vec<WallTrace> = (0..6).map(|_| zero_trace()).collect::<std::result::Result<_, _>>()?;
        let e2 = self.eps * self.eps;
        for (c, chunk) in times.chunks(CHUNK).enumerate() {
            let taus: Vec<f64> = chunk.iter().map(|t| t / e2).collect();
            let l1 = self.ui1.layer(&taus)?;
            let l1dx = self.ui1_dx.layer(&taus)?;
            for (i, &t) in chunk.iter().enumerate() {
                let n = c * CHUNK + i;
                let vals = self.point_values(t, &l1[i], &l1dx[i])?;
                for (f, v) in fields.iter_mut().zip(&vals) {
                    let slice = f.slice_mut(n);
                    for cell in 0..nc {
                        for k in 0..nv {
                            slice[cell * nv + k] =
                                (0..3).map(|g| CELL_GAUSS[g].1 * v[(3 * cell + g) * nv + k]).sum::<f64>();
                        }
                    }
                }
                for (tr, v) in traces.iter_mut().zip(&vals) {
                    for side in Side::BOTH {
                        let p = 3 * nc + side.index();
                        tr.side_mut(n, side).copy_from_slice(&v[p * nv..(p + 1) * nv]);
                    }
                }
            }
        }
        let eps = self.eps;
        let coef = [1.0, eps, e2, 1.0, eps, boundary_scale(self.kind, eps)];
        let mut ua = zero()?;
        let mut ua_trace = zero_trace()?;
        for (i, a) in coef.iter().enumerate() {
            ua.axpy(*a, &fields[i])?;
            ua_trace.axpy(*a, &traces[i])?;
        }
        let mut f = fields.into_iter();
        let mut nx = || f.next().expect("field count");
        let parts = Constituents { u0: nx(), u1: nx(), u2: nx(), ui0: nx(), ui1: nx(), ub: nx() };
        let sources = Sources { interior: nx(), initial: nx(), boundary: nx(), boundary_dt: nx() };
        let mut t = traces.into_iter();
        let mut tx = || t.next().expect("trace count");
        let part_traces = Constituents { u0: tx(), u1: tx(), u2: tx(), ui0: tx(), ui1: tx(), ub: tx() };
        Ok(Assembly { eps, kind: self.kind, ua, ua_trace, parts, part_traces, sources })
    }
}
