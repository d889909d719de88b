#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use diffusion_hierarchy::{Assembly, ExpansionSetup, Hierarchy};
use phase_core::{Quadrature, Side, SlabGeometry, SpatialGrid};
use remainder_lab::{remainder_data, remainder_of, Remainder, RemainderData};
use transport_solver::{solve, BoundaryCondition, BoundaryFn, InitialFn, SpatialScheme, Trajectory, TransportProblem};

pub struct Run {
    pub traj: Trajectory,
    pub asm: Assembly,
    pub rem: Remainder,
    pub data: RemainderData,
}

/// `|μ|(1 − c|μ|)` with zero incoming flux for `q`.
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

pub fn case(name: &str, q: &Arc<Quadrature>) -> (InitialFn, BoundaryCondition) {
    let prof = zero_flux_profile(q);
    match name {
        "sine" => (
            Arc::new(|x: f64, mu: f64| (PI * x).sin() * (1.0 + 0.5 * mu * x * (1.0 - x))),
            BoundaryCondition::zero(transport_solver::BoundaryKind::InFlow),
        ),
        "diffuse" => {
            let h: BoundaryFn = Arc::new(move |t: f64, _s, mu| (1.0 - (-t).exp()) * mu.signum() * prof(mu));
            (Arc::new(|x: f64, _| 1.0 + (PI * x).cos()), BoundaryCondition::Diffuse(h))
        }
        "specular" => {
            let h: BoundaryFn = Arc::new(move |t: f64, _s, mu: f64| (1.0 - (-t).exp()) * prof(mu));
            (Arc::new(|x: f64, _| 1.0 + (2.0 * PI * x).cos()), BoundaryCondition::Specular(h))
        }
        other => panic!("unknown case {other}"),
    }
}

pub fn run(name: &str, eps: f64, cells: usize, t_final: f64) -> Run {
    let q = Arc::new(Quadrature::gauss_legendre(8).unwrap());
    let geo = SlabGeometry::new(1.0).unwrap();
    let (u_o, bc) = case(name, &q);
    let grid = Arc::new(SpatialGrid::uniform(geo, cells).unwrap());
    let mut p = TransportProblem::new(grid.clone(), q.clone(), eps, t_final, u_o.clone(), bc.clone()).unwrap();
    p.scheme = SpatialScheme::Minmod;
    let traj = solve(&p).unwrap();
    let hier = Hierarchy::new(ExpansionSetup::new(u_o, bc.clone(), q.clone(), geo, t_final)).unwrap();
    let asm = hier.bundle(eps, grid, q).unwrap().assemble(traj.field.times()).unwrap();
    let rem = remainder_of(&traj, &asm).unwrap();
    let data = remainder_data(&asm, &p.initial_state(), &bc).unwrap();
    Run { traj, asm, rem, data }
}
