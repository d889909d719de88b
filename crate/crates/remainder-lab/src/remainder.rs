use diffusion_hierarchy::{Assembly, Sources};
use phase_core::{PhaseField, Side, WallTrace};
use transport_solver::{BoundaryCondition, BoundaryKind, Trajectory};

use crate::{LabError, Result};

/// `R = u^ε − u_a` in the cells and on the walls.
#[derive(Debug, Clone)]
pub struct Remainder {
    pub kind: BoundaryKind,
    pub field: PhaseField,
    pub trace: WallTrace,
    /// Mean subtracted by [`renormalize`], one value per record.
    pub shift: Option<Vec<f64>>,
}

impl Remainder {
    pub fn eps(&self) -> f64 {
        self.field.eps()
    }
}

fn same_trace_shape(a: &WallTrace, b: &WallTrace) -> bool {
    a.quadrature().len() == b.quadrature().len() && a.times()[..] == b.times()[..]
}

/// Pointwise difference of a solution and an approximation on common grids.
pub fn compute_remainder(
    kind: BoundaryKind,
    u: &PhaseField,
    u_trace: &WallTrace,
    ua: &PhaseField,
    ua_trace: &WallTrace,
) -> Result<Remainder> {
    if !u.same_shape(ua) {
        return Err(LabError::Shape("solution and approximation live on different grids".into()));
    }
    if !same_trace_shape(u_trace, ua_trace) || u_trace.times()[..] != u.times()[..] {
        return Err(LabError::Shape("wall traces do not match the fields".into()));
    }
    Ok(Remainder { kind, field: u.sub(ua)?, trace: u_trace.sub(ua_trace)?, shift: None })
}

/// [`compute_remainder`] for a transport run and an assembly at its record times.
pub fn remainder_of(traj: &Trajectory, asm: &Assembly) -> Result<Remainder> {
    compute_remainder(asm.kind, &traj.field, &traj.traces, &asm.ua, &asm.ua_trace)
}

/// Data of the remainder problem
/// `ε∂_t R + μ∂_x R + ε⁻¹(R − R̄) = S`, `R(0) = I`,
/// `R = B[R] + boundary` on incoming directions, where `B` is zero for
/// in-flow walls (`boundary = G`), the half-range average for diffuse walls
/// (`boundary = H`) and the mirror for specular walls (`boundary` is the
/// mismatch left by `u_a`, zero up to round-off).
#[derive(Debug, Clone)]
pub struct RemainderData {
    pub kind: BoundaryKind,
    pub eps: f64,
    /// `I` per (cell, direction).
    pub initial: Vec<f64>,
    /// Incoming entries only; outgoing entries are zero.
    pub boundary: WallTrace,
    pub sources: Sources<PhaseField>,
}

impl RemainderData {
    pub fn source(&self) -> PhaseField {
        self.sources.total()
    }
}

/// Assembles `I`, the wall data and the tagged sources from an assembly and
/// the discrete initial state (cell averages of `u_o`).
pub fn remainder_data(asm: &Assembly, initial_state: &[f64], bc: &BoundaryCondition) -> Result<RemainderData> {
    let ua = &asm.ua;
    if ua.times()[0] != 0.0 {
        return Err(LabError::InvalidArgument("the assembly must start at t = 0".into()));
    }
    if initial_state.len() != ua.stride() {
        return Err(LabError::Shape(format!("initial state has {} values, expected {}", initial_state.len(), ua.stride())));
    }
    if bc.kind() != asm.kind {
        return Err(LabError::InvalidArgument("boundary condition does not match the assembly".into()));
    }
    let eps = asm.eps;
    let initial: Vec<f64> = initial_state.iter().zip(ua.slice(0)).map(|(u, a)| u - a).collect();
    let tr = &asm.ua_trace;
    let q = tr.quadrature().clone();
    let times = tr.times().clone();
    let mut boundary = WallTrace::zeros(q.clone(), times.clone())?;
    let g = bc.datum();
    for (n, &t) in times.iter().enumerate() {
        for side in Side::BOTH {
            let a = tr.side(n, side).to_vec();
            let avg = match bc.kind() {
                BoundaryKind::Diffuse => q.half_range_average(&a, side)?,
                _ => 0.0,
            };
            let out = boundary.side_mut(n, side);
            for k in q.incoming(side) {
                let mu = q.node(k);
                out[k] = match bc.kind() {
                    BoundaryKind::InFlow => g(t, side, mu) - a[k],
                    BoundaryKind::Diffuse => eps * g(t, side, mu) + avg - a[k],
                    BoundaryKind::Specular => eps * g(t, side, mu) + a[q.reflect(k)] - a[k],
                };
            }
        }
    }
    Ok(RemainderData { kind: asm.kind, eps, initial, boundary, sources: asm.sources.clone() })
}

/// Mean of `R̄` over the slab at each record.
pub fn mean_average(field: &PhaseField) -> Vec<f64> {
    let s = field.velocity_average();
    let len = field.grid().length();
    (0..field.times().len()).map(|n| s.integral(n) / len).collect()
}

/// Specular renormalization `R̃ = R − m(t)` with `m = L⁻¹∫R̄ dx`, applied to
/// the field and traces. The source of `R̃` gains `−ε m′(t)`, which is added
/// to the interior part of `data` when given.
pub fn renormalize(rem: &mut Remainder, data: Option<&mut RemainderData>) -> Result<Vec<f64>> {
    let m = mean_average(&rem.field);
    let nt = m.len();
    for (n, &mn) in m.iter().enumerate() {
        rem.field.slice_mut(n).iter_mut().for_each(|v| *v -= mn);
        for side in Side::BOTH {
            rem.trace.side_mut(n, side).iter_mut().for_each(|v| *v -= mn);
        }
    }
    if let Some(d) = data {
        let eps = rem.field.eps();
        let dm = time_derivative(rem.field.times(), &m);
        for n in 0..nt {
            d.sources.interior.slice_mut(n).iter_mut().for_each(|v| *v -= eps * dm[n]);
        }
        d.initial.iter_mut().for_each(|v| *v -= m[0]);
    }
    rem.shift = Some(m.clone());
    Ok(m)
}

/// Centred differences on a non-uniform grid, one-sided at the ends.
pub fn time_derivative(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) / (t[1] - t[0])
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                let (a, b) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                (-b / (a * (a + b))) * v[i - 1] + ((b - a) / (a * b)) * v[i] + (a / (b * (a + b))) * v[i + 1]
            }
        })
        .collect()
}
