use std::f64::consts::PI;
use std::sync::Arc;

use diffusion_hierarchy::{check_compatibility, CompatibilityReport};
use initial_layer::InitialDatum;
use milne_layer::{MilneBasis, MilneGrid};
use phase_core::{Quadrature, Side, SlabGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transport_solver::{BoundaryCondition, BoundaryFn, BoundaryKind};

use crate::config::{CheckName, DataSpec, InlineData};
use crate::expr::Expr;
use crate::{HarnessError, Result};

/// Catalog entry.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub kind: BoundaryKind,
    pub summary: &'static str,
    pub default_checks: &'static [CheckName],
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "inflow-sine",
        kind: BoundaryKind::InFlow,
        summary: "u_o = sin(πx)(1 + μx(1−x)/2), g = 0",
        default_checks: &[CheckName::RateFloor],
    },
    Preset {
        name: "inflow-layer",
        kind: BoundaryKind::InFlow,
        summary: "u_o = 0.2 sin(πx)(1 + μx(1−x)/2), g = ramp(t)(|μ| − Φ∞[|μ|])",
        default_checks: &[CheckName::RateWindow, CheckName::ScaledRemainder, CheckName::Resolution],
    },
    Preset {
        name: "diffuse-cosine",
        kind: BoundaryKind::Diffuse,
        summary: "u_o = 1 + cos(πx), h = (1 − e^{−t}) sign(μ) |μ|(1 − c|μ|)",
        default_checks: &[CheckName::RateFloor, CheckName::NullFlux, CheckName::Resolution],
    },
    Preset {
        name: "specular-quiet",
        kind: BoundaryKind::Specular,
        summary: "u_o = 1 + cos(2πx), h = (1 − e^{−t}) |μ|(1 − c|μ|)",
        default_checks: &[CheckName::RateFloor, CheckName::NullFlux, CheckName::Resolution],
    },
    Preset {
        name: "constant",
        kind: BoundaryKind::InFlow,
        summary: "u_o = g = 1",
        default_checks: &[
            CheckName::RateWindow,
            CheckName::ScaledRemainder,
            CheckName::EnergyEstimate,
            CheckName::KernelEstimate,
        ],
    },
    Preset {
        name: "incompatible",
        kind: BoundaryKind::InFlow,
        summary: "u_o = cos(πx), g = 0 (refused: the in-flow datum misses u_o at the walls)",
        default_checks: &[CheckName::RateWindow],
    },
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Initial and wall data of one experiment.
#[derive(Clone)]
pub struct ProblemData {
    pub label: String,
    pub u_o: InitialDatum,
    pub bc: BoundaryCondition,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData").field("label", &self.label).field("bc", &self.bc).finish()
    }
}

/// `1 − e^{−kt} Σ_{j<4} (kt)^j / j!` with `k = 20`: vanishes to third order at `t = 0`.
pub fn ramp(t: f64) -> f64 {
    let kt = 20.0 * t;
    1.0 - (-kt).exp() * (1.0 + kt + kt * kt / 2.0 + kt * kt * kt / 6.0)
}

/// `|μ|(1 − c|μ|)` with `c` chosen so the incoming flux vanishes on `q`.
pub fn zero_flux_profile(q: &Quadrature) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let (mut a, mut b) = (0.0, 0.0);
    for k in q.incoming(Side::Left) {
        let m = q.node(k);
        a += q.weight(k) * m * m;
        b += q.weight(k) * m * m * m;
    }
    let c = a / b;
    move |mu: f64| mu.abs() * (1.0 - c * mu.abs())
}

/// Milne limit of the datum `|μ|` on the rule `q`.
pub fn milne_limit_of_abs(q: &Arc<Quadrature>) -> Result<f64> {
    let b = MilneBasis::new(q.clone(), MilneGrid::default())?;
    let rho: Vec<f64> = (0..b.incoming()).map(|k| b.incoming_node(k).abs()).collect();
    Ok(b.limit(&rho))
}

fn sine_datum(amp: f64) -> InitialDatum {
    Arc::new(move |x: f64, mu: f64| amp * (PI * x).sin() * (1.0 + 0.5 * mu * x * (1.0 - x)))
}

fn preset_data(p: &Preset, q: &Arc<Quadrature>) -> Result<(InitialDatum, BoundaryCondition)> {
    let prof = zero_flux_profile(q);
    Ok(match p.name {
        "inflow-sine" => (sine_datum(1.0), BoundaryCondition::zero(BoundaryKind::InFlow)),
        "inflow-layer" => {
            let c = milne_limit_of_abs(q)?;
            let g: BoundaryFn = Arc::new(move |t, _s, mu: f64| ramp(t) * (mu.abs() - c));
            (sine_datum(0.2), BoundaryCondition::InFlow(g))
        }
        "diffuse-cosine" => {
            let h: BoundaryFn = Arc::new(move |t: f64, _s, mu| (1.0 - (-t).exp()) * mu.signum() * prof(mu));
            (Arc::new(|x: f64, _| 1.0 + (PI * x).cos()), BoundaryCondition::Diffuse(h))
        }
        "specular-quiet" => {
            let h: BoundaryFn = Arc::new(move |t: f64, _s, mu: f64| (1.0 - (-t).exp()) * prof(mu));
            (Arc::new(|x: f64, _| 1.0 + (2.0 * PI * x).cos()), BoundaryCondition::Specular(h))
        }
        "constant" => (Arc::new(|_, _| 1.0), BoundaryCondition::constant_inflow(1.0)),
        "incompatible" => (Arc::new(|x: f64, _| (PI * x).cos()), BoundaryCondition::zero(BoundaryKind::InFlow)),
        other => return Err(HarnessError::UnknownPreset(other.to_string())),
    })
}

fn inline_data(d: &InlineData) -> Result<(InitialDatum, BoundaryCondition)> {
    let init = Expr::parse(&d.initial)?;
    let wall = Expr::parse(&d.boundary)?;
    let u_o: InitialDatum = Arc::new(move |x, mu| init.eval(0.0, x, mu, 0.0));
    let g: BoundaryFn = Arc::new(move |t, side: Side, mu| {
        let x = if side == Side::Left { 0.0 } else { 1.0 };
        wall.eval(t, x, mu, side.normal())
    });
    let bc = match d.kind {
        BoundaryKind::InFlow => BoundaryCondition::InFlow(g),
        BoundaryKind::Diffuse => BoundaryCondition::Diffuse(g),
        BoundaryKind::Specular => BoundaryCondition::Specular(g),
    };
    Ok((u_o, bc))
}

/// Smooth isotropic perturbation `a Σ_{j≤3} c_j φ_j(x)` with `c_j` uniform in
/// `[−1, 1]` from `seed`; `φ_j = sin(jπx)` for in-flow walls and `cos(jπx)`
/// otherwise, so the corner conditions survive.
fn perturb(u_o: InitialDatum, kind: BoundaryKind, seed: u64, amp: f64) -> InitialDatum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: [f64; 3] = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
    Arc::new(move |x, mu| {
        let s: f64 = c
            .iter()
            .enumerate()
            .map(|(j, cj)| {
                let a = (j + 1) as f64 * PI * x;
                cj * if kind == BoundaryKind::InFlow { a.sin() } else { a.cos() }
            })
            .sum();
        u_o(x, mu) + amp * s
    })
}

/// Data for a preset or inline specification on the rule `q`.
pub fn build_problem(spec: &DataSpec, q: &Arc<Quadrature>, seed: u64, perturbation: f64) -> Result<ProblemData> {
    let (label, (u_o, bc)) = match spec {
        DataSpec::Preset(name) => {
            let p = find_preset(name).ok_or_else(|| HarnessError::UnknownPreset(name.clone()))?;
            (p.name.to_string(), preset_data(p, q)?)
        }
        DataSpec::Inline(d) => ("inline".to_string(), inline_data(d)?),
    };
    let u_o = if perturbation != 0.0 { perturb(u_o, bc.kind(), seed, perturbation) } else { u_o };
    Ok(ProblemData { label, u_o, bc })
}

/// Compatibility certificate of the data on `(0, L)` up to `t_final`.
pub fn certify(data: &ProblemData, q: &Quadrature, geometry: SlabGeometry, t_final: f64) -> CompatibilityReport {
    check_compatibility(&data.u_o, &data.bc, q, geometry, t_final, [0.0; 2], [0.0; 2])
}
