use std::f64::consts::PI;
use std::sync::Arc;

use diffusion_hierarchy::{cell_points, Assembly, ExpansionSetup, Hierarchy, HierarchyError, CELL_GAUSS};
use initial_layer::InitialDatum;
use milne_layer::{chi, CutoffLayer, LayerDatum};
use phase_core::norms::Measured;
use phase_core::{NormKind, Quadrature, Side, SlabGeometry, SpatialGrid};
use proptest::prelude::*;
use transport_solver::{BoundaryCondition, BoundaryFn};

fn quad() -> Arc<Quadrature> {
    Arc::new(Quadrature::gauss_legendre(16).unwrap())
}

fn geometry() -> SlabGeometry {
    SlabGeometry::new(1.0).unwrap()
}

fn ramp(t: f64) -> f64 {
    let kt = 20.0 * t;
    1.0 - (-kt).exp() * (1.0 + kt + kt * kt / 2.0 + kt * kt * kt / 6.0)
}

fn sine_datum() -> InitialDatum {
    Arc::new(|x: f64, mu: f64| (PI * x).sin() * (1.0 + 0.5 * mu * x * (1.0 - x)))
}

fn layer_inflow() -> BoundaryFn {
    Arc::new(|t, _side, mu: f64| ramp(t) * mu.abs())
}

/// `|μ|(1 − c|μ|)` with zero incoming flux on the rule.
fn zero_flux_profile(q: &Quadrature) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let (mut a, mut b) = (0.0, 0.0);
    for k in q.incoming(Side::Left) {
        let m = q.node(k);
        a += q.weight(k) * m * m;
        b += q.weight(k) * m * m * m;
    }
    let c = a / b;
    move |mu: f64| mu.abs() * (1.0 - c * mu.abs())
}

fn setup(u_o: InitialDatum, bc: BoundaryCondition, t_final: f64) -> ExpansionSetup {
    ExpansionSetup::new(u_o, bc, quad(), geometry(), t_final)
}

fn cell_average(grid: &SpatialGrid, q: &Quadrature, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let pts = cell_points(grid);
    let nv = q.len();
    let mut out = vec![0.0; grid.cells() * nv];
    for c in 0..grid.cells() {
        for k in 0..nv {
            out[c * nv + k] = (0..3).map(|g| CELL_GAUSS[g].1 * f(pts[3 * c + g], q.node(k))).sum();
        }
    }
    out
}

fn uniform(cells: usize) -> Arc<SpatialGrid> {
    Arc::new(SpatialGrid::uniform(geometry(), cells).unwrap())
}

fn times(t_final: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

#[test]
fn constant_inflow_gives_constant_interior() {
    let h = Hierarchy::new(setup(Arc::new(|_, _| 0.8), BoundaryCondition::constant_inflow(0.8), 0.2)).unwrap();
    let i = h.interior();
    for t in [0.0, 0.05, 0.2] {
        let d = i.u0().derivatives(t, 2).unwrap();
        assert!(d[0].iter().all(|v| (v - 0.8).abs() < 1e-12));
        assert!(i.u1().at(t).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
    assert!(i.theta1().iter().all(|v| v.abs() < 1e-12));
    let a = h.bundle(0.1, uniform(40), quad()).unwrap().assemble(&times(0.2, 4)).unwrap();
    assert!(a.parts.u1.max_abs() < 1e-10);
    assert!(a.parts.u2.max_abs() < 1e-10);
    assert!(a.ua.values().iter().all(|v| (v - 0.8).abs() < 1e-10));
}

#[test]
fn diffuse_cosine_interior_is_the_neumann_mode() {
    let q = quad();
    let prof = zero_flux_profile(&q);
    let hfn: BoundaryFn = Arc::new(move |t: f64, _s, mu| (1.0 - (-t).exp()) * mu.signum() * prof(mu));
    let h = Hierarchy::new(setup(Arc::new(|x, _| 1.0 + (PI * x).cos()), BoundaryCondition::Diffuse(hfn), 0.3)).unwrap();
    let i = h.interior();
    let d = i.diffusivity();
    assert!((d - 1.0 / 3.0).abs() < 1e-14);
    for t in [0.1, 0.3] {
        let u = i.u0().at(t).unwrap();
        let err = u
            .iter()
            .zip(i.u0().nodes())
            .map(|(v, x)| (v - 1.0 - (-PI * PI * d * t).exp() * (PI * x).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "t {t}: {err:e}");
    }
    assert!(h.report().is_compatible());
}

#[test]
fn inflow_dirichlet_trace_matches_milne_limit() {
    let t_final = 0.3;
    let h = Hierarchy::new(setup(sine_datum(), BoundaryCondition::InFlow(layer_inflow()), t_final)).unwrap();
    let basis = h.milne_basis().unwrap();
    let g = layer_inflow();
    let datum: LayerDatum = Arc::new(move |t, mu| g(t, Side::Left, mu));
    let layer = CutoffLayer::new(basis, datum, 0.05, Side::Left, geometry(), &[0.0], quad()).unwrap();
    let u0 = h.interior().u0();
    let mut worst = 0.0f64;
    for t in [0.0, 0.01, 0.0333, 0.05, 0.1, 0.2, 0.3] {
        let u = u0.at(t).unwrap();
        worst = worst.max((u[0] - layer.limit(t)).abs());
        worst = worst.max((u[u.len() - 1] - h.wall_limit(t, Side::Right).unwrap()).abs());
    }
    assert!(worst <= 1e-8, "{worst:e}");
    // the ramp datum g = a(t)|μ| has Φ_∞ = a(t) Φ_∞[|μ|]
    let phi = h.wall_limit(t_final, Side::Left).unwrap() / ramp(t_final);
    assert!((phi - 0.7096).abs() < 5e-4, "{phi}");
}

fn inflow_assembly(eps: f64, cells: usize, t: &[f64]) -> (Hierarchy, Assembly, Arc<SpatialGrid>) {
    let h = Hierarchy::new(setup(sine_datum(), BoundaryCondition::InFlow(layer_inflow()), 0.2)).unwrap();
    let grid = uniform(cells);
    let a = h.bundle(eps, grid.clone(), quad()).unwrap().assemble(t).unwrap();
    (h, a, grid)
}

#[test]
fn initial_value_misses_the_datum_by_second_order_term() {
    let eps = 0.05;
    let (h, a, grid) = inflow_assembly(eps, 50, &[0.0, 0.1]);
    let q = quad();
    let uo = cell_average(&grid, &q, &*sine_datum());
    // I = u_o − u_a(0) = −ε² U₂(0) with U₂(0) = −μ Θ′_{1,∞} + (μ² − D) ū_o″
    let u2 = a.parts.u2.slice(0);
    let ua = a.ua.slice(0);
    let mut worst = 0.0f64;
    for j in 0..uo.len() {
        worst = worst.max((uo[j] - ua[j] + eps * eps * u2[j]).abs());
    }
    assert!(worst <= 1e-9, "{worst:e}");
    // U₂(0) in closed form: Θ_{1,∞} = −q′/3 with q = ½x(1−x) sin πx
    let d = h.interior().diffusivity();
    let q2 = |x: f64| {
        let s = (PI * x).sin();
        let c = (PI * x).cos();
        0.5 * (-2.0 * s + 2.0 * (1.0 - 2.0 * x) * PI * c - x * (1.0 - x) * PI * PI * s)
    };
    let exact = |x: f64, m: f64| m * q2(x) / 3.0 - (m * m - d) * PI * PI * (PI * x).sin();
    let want = cell_average(&grid, &q, &exact);
    let err = u2.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-5, "{err:e}");
    // no boundary layer at t = 0: the datum is isotropic there
    assert!(a.parts.ub.slice(0).iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn wall_matching_of_interior_and_boundary_layer() {
    let eps = 0.05;
    let ts = [0.02, 0.07, 0.2];
    let (h, a, _) = inflow_assembly(eps, 50, &ts);
    let q = quad();
    let g = layer_inflow();
    let mut worst = 0.0f64;
    for (n, &t) in ts.iter().enumerate() {
        for side in Side::BOTH {
            let phi = h.wall_limit(t, side).unwrap();
            let u0 = a.part_traces.u0.side(n, side);
            let ub = a.part_traces.ub.side(n, side);
            for k in q.incoming(side) {
                let m = q.node(k);
                let lhs = g(t, side, m) - (u0[k] + ub[k]);
                let rhs = chi(m / eps) * (g(t, side, m) - phi);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    assert!(worst <= 1e-8, "{worst:e}");
}

#[test]
fn velocity_average_of_first_order_term() {
    let (h, a, grid) = inflow_assembly(0.05, 40, &[0.0, 0.05, 0.2]);
    let bar = a.parts.u1.velocity_average();
    let pts = cell_points(&grid);
    let s = h.interior().sampler(&pts).unwrap();
    for (n, &t) in a.parts.u1.times().iter().enumerate() {
        let u1 = s.sample(&h.interior().u1().at(t).unwrap());
        for c in 0..grid.cells() {
            let want: f64 = (0..3).map(|g| CELL_GAUSS[g].1 * u1[3 * c + g]).sum();
            assert!((bar.slice(n)[c] - want).abs() < 1e-13);
        }
    }
    let u2bar = h.interior().u2().level(0);
    assert!(u2bar.iter().all(|v| *v == 0.0));
}

fn l2(f: &phase_core::PhaseField) -> f64 {
    f.norm(NormKind::L2SpaceTime, None).unwrap()
}

#[test]
fn constituent_scalings() {
    let ts = times(0.2, 200);
    let epss = [0.1, 0.05, 0.025];
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    let mut nd = Vec::new();
    for &eps in &epss {
        let (_, a, _) = inflow_assembly(eps, 100, &ts);
        n1.push(l2(&a.parts.u1.scaled(eps)));
        n2.push(l2(&a.parts.u2.scaled(eps * eps)));
        nd.push(l2(&a.ua.sub(&a.parts.u0).unwrap()));
    }
    let slope = |v: &[f64]| {
        let xs: Vec<f64> = epss.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = v.iter().map(|e| e.ln()).collect();
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
    };
    assert!((slope(&n1) - 1.0).abs() <= 0.05, "{n1:?}");
    assert!((slope(&n2) - 2.0).abs() <= 0.1, "{n2:?}");
    assert!(slope(&nd) >= 0.45, "{nd:?} slope {}", slope(&nd));
}

#[test]
fn assembled_sum_matches_constituents() {
    let eps = 0.05;
    let (_, a, _) = inflow_assembly(eps, 30, &[0.0, 0.01, 0.1]);
    let p = &a.parts;
    let mut sum = p.u0.clone();
    for (c, f) in [(eps, &p.u1), (eps * eps, &p.u2), (1.0, &p.ui0), (eps, &p.ui1), (1.0, &p.ub)] {
        sum.axpy(c, f).unwrap();
    }
    assert!(sum.sub(&a.ua).unwrap().max_abs() < 1e-14);
    assert!(a.ua.values().iter().all(|v| v.is_finite()));
}

#[test]
fn specular_uses_the_extension_layer() {
    let q = quad();
    let prof = zero_flux_profile(&q);
    let hfn: BoundaryFn = Arc::new(move |t: f64, _s, mu| t * t * prof(mu));
    let u_o: InitialDatum = Arc::new(|x: f64, mu: f64| {
        let s = (PI * x).sin();
        1.0 + 0.5 * (PI * x).cos() + 0.25 * mu * mu * s * s
    });
    let h = Hierarchy::new(setup(u_o, BoundaryCondition::Specular(hfn.clone()), 0.2)).unwrap();
    assert!(h.report().is_compatible());
    let eps = 0.05;
    let a = h.bundle(eps, uniform(40), q.clone()).unwrap().assemble(&[0.0, 0.1, 0.2]).unwrap();
    assert_eq!(a.boundary_scale(), eps);
    // wall trace of U^B₁ is the datum on incoming directions
    for side in Side::BOTH {
        let ub = a.part_traces.ub.side(2, side);
        for k in 0..q.len() {
            let m = q.node(k);
            let want = if side.is_incoming(m) { hfn(0.2, side, m) } else { 0.0 };
            assert!((ub[k] - want).abs() < 1e-14);
        }
    }
    // the Neumann corner of U₁: Θ_{1,∞} = −∂ₓ avg(μ u_o) has zero slope here
    assert!(h.report().corner_mismatch.iter().all(|v| *v < 1e-6), "{:?}", h.report().corner_mismatch);
}

#[test]
fn incompatible_data_are_rejected() {
    // u_o(0) = 1 but g(0) = 0
    let r = Hierarchy::new(setup(Arc::new(|x: f64, _| (PI * x).cos()), BoundaryCondition::InFlow(layer_inflow()), 0.1));
    match r {
        Err(HierarchyError::Incompatible { condition, .. }) => assert!(condition.contains("in-flow")),
        other => panic!("expected incompatibility, got {other:?}"),
    }
    // h with incoming flux
    let bad: BoundaryFn = Arc::new(|t: f64, _s, mu: f64| t * mu.abs());
    let r = Hierarchy::new(setup(Arc::new(|_, _| 1.0), BoundaryCondition::Diffuse(bad), 0.1));
    assert!(matches!(r, Err(HierarchyError::Incompatible { condition, .. }) if condition.contains("flux")));
    // specular wall with a sloped datum
    let r = Hierarchy::new(setup(Arc::new(|x: f64, _| x), BoundaryCondition::zero(transport_solver::BoundaryKind::Specular), 0.1));
    assert!(matches!(r, Err(HierarchyError::Incompatible { condition, .. }) if condition.contains("slope")));
}

#[test]
fn inflow_corner_mismatch_is_reported() {
    let h = Hierarchy::new(setup(sine_datum(), BoundaryCondition::InFlow(layer_inflow()), 0.05)).unwrap();
    // Θ_{1,∞}(0) = −q′(0)/3 = 0, so the Dirichlet corner of U₁ matches in value
    let m = h.report().corner_mismatch;
    assert!(m.iter().all(|v| *v < 1e-8), "{m:?}");
    assert!(h.report().is_compatible());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn assembly_is_linear_in_the_constant_state(c in -2.0f64..2.0, eps in 0.02f64..0.3) {
        let h = Hierarchy::new(setup(Arc::new(move |_, _| c), BoundaryCondition::constant_inflow(c), 0.1)).unwrap();
        let a = h.bundle(eps, uniform(20), quad()).unwrap().assemble(&[0.0, 0.03, 0.1]).unwrap();
        prop_assert!(a.ua.values().iter().all(|v| (v - c).abs() < 1e-10));
        // fourth x-derivatives on the heat grid carry round-off of order 1e−16 h⁻⁴
        prop_assert!(a.sources.total().max_abs() < 1e-5);
    }
}
