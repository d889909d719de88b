use initial_layer::{x_derivative, InitialDatum};
use phase_core::{Quadrature, Side, SlabGeometry};
use transport_solver::{BoundaryCondition, BoundaryKind};

use crate::{HierarchyError, Result};

const TOL: f64 = 1e-9;
/// Times at which time-dependent conditions are sampled.
const PROBES: usize = 41;

/// One corner condition with its worst violation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub side: Side,
    pub violation: f64,
}

/// Outcome of [`check_compatibility`]. `corner_mismatch` is reported, never
/// enforced: it measures how far `Θ_{1,∞}` and `ū_o` are from satisfying
/// the interior wall conditions at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub kind: BoundaryKind,
    pub checks: Vec<ConditionCheck>,
    pub corner_mismatch: [f64; 2],
}

impl CompatibilityReport {
    pub fn is_compatible(&self) -> bool {
        self.checks.iter().all(|c| c.violation <= TOL)
    }

    /// First violated condition as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.checks.iter().find(|c| c.violation > TOL) {
            Some(c) => Err(HierarchyError::Incompatible {
                condition: c.name,
                side: c.side.name(),
                detail: format!("violation {:.3e}", c.violation),
            }),
            None => Ok(self),
        }
    }
}

fn scale(v: f64) -> f64 {
    v.abs().max(1.0)
}

/// Checks the corner conditions between initial and wall data for `bc`.
///
/// Every kind needs `u_o` isotropic at the walls. In-flow walls need
/// `g(0) = u_o`. Diffuse and specular walls need `h(0) = 0` and zero incoming
/// flux of `h` at all times; specular walls also need `∂_x u_o = 0` and
/// `h = 0` at grazing incidence.
pub fn check_compatibility(
    u_o: &InitialDatum,
    bc: &BoundaryCondition,
    quad: &Quadrature,
    geometry: SlabGeometry,
    t_final: f64,
    theta1_wall: [f64; 2],
    theta1_slope_wall: [f64; 2],
) -> CompatibilityReport {
    let kind = bc.kind();
    let g = bc.datum();
    let len = geometry.length();
    let mut checks = Vec::new();
    for side in Side::BOTH {
        let xw = geometry.wall_position(side);
        let vals: Vec<f64> = quad.nodes().iter().map(|&m| u_o(xw, m)).collect();
        let mean = quad.average(&vals);
        let spread = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / scale(mean);
        checks.push(ConditionCheck { name: "isotropic initial datum at the wall", side, violation: spread });
        match kind {
            BoundaryKind::InFlow => {
                let v = quad
                    .incoming(side)
                    .map(|k| (g(0.0, side, quad.node(k)) - vals[k]).abs() / scale(vals[k]))
                    .fold(0.0, f64::max);
                checks.push(ConditionCheck { name: "in-flow datum matches the initial datum", side, violation: v });
            }
            BoundaryKind::Diffuse | BoundaryKind::Specular => {
                let v = quad.incoming(side).map(|k| g(0.0, side, quad.node(k)).abs()).fold(0.0, f64::max);
                checks.push(ConditionCheck { name: "wall source vanishes initially", side, violation: v });
                let mut worst = 0.0f64;
                for i in 0..PROBES {
                    let t = t_final * i as f64 / (PROBES - 1) as f64;
                    let (mut flux, mut sc) = (0.0, 0.0);
                    for k in quad.incoming(side) {
                        let w = quad.weight(k) * quad.node(k) * g(t, side, quad.node(k));
                        flux += w;
                        sc += w.abs();
                    }
                    worst = worst.max(flux.abs() / sc.max(1.0));
                }
                checks.push(ConditionCheck { name: "wall source carries no incoming flux", side, violation: worst });
                if kind == BoundaryKind::Specular {
                    let slope = quad
                        .nodes()
                        .iter()
                        .map(|&m| x_derivative(&|y| u_o(y, m), xw, len).abs())
                        .fold(0.0, f64::max);
                    // FD truncation of a 4th-order stencil at h = 1e-3
                    checks.push(ConditionCheck {
                        name: "initial datum has zero slope at a specular wall",
                        side,
                        violation: if slope < 1e-8 { 0.0 } else { slope },
                    });
                    let graze = (0..PROBES)
                        .map(|i| g(t_final * i as f64 / (PROBES - 1) as f64, side, 0.0).abs())
                        .fold(0.0, f64::max);
                    checks.push(ConditionCheck { name: "wall source vanishes at grazing incidence", side, violation: graze });
                }
            }
        }
    }
    let corner_mismatch = match kind {
        BoundaryKind::InFlow => theta1_wall.map(f64::abs),
        _ => theta1_slope_wall.map(f64::abs),
    };
    CompatibilityReport { kind, checks, corner_mismatch }
}
