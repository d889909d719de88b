mod common;

use std::sync::Arc;

use phase_core::norms::Measured;
use phase_core::{NormKind, PhaseField, Quadrature, SlabGeometry, SpatialGrid, WallTrace};
use remainder_lab::identities::{diffuse_boundary_identity, green_identity_smooth, orthogonality, potentials, poisson_bc_for, specular_pairings};
use remainder_lab::{
    compute_norms, compute_remainder, estimate_check, identity_residuals, mean_average, renormalize, EstimateKind,
    IdentityRules, LabError, refinement_orders, RemainderNorms, TimeRule,
};
use transport_solver::BoundaryKind;

fn double_integral(f: &PhaseField, n: usize) -> f64 {
    let q = f.quadrature();
    f.slice(n).chunks(q.len()).zip(f.grid().widths()).map(|(c, h)| h * q.integrate(c)).sum()
}

#[test]
fn zero_remainder_when_approximation_is_exact() {
    let r = common::run("sine", 0.1, 30, 0.05);
    let z = compute_remainder(BoundaryKind::InFlow, &r.traj.field, &r.traj.traces, &r.traj.field, &r.traj.traces).unwrap();
    assert_eq!(z.field.max_abs(), 0.0);
    assert!(z.trace.values().iter().all(|v| *v == 0.0));
}

#[test]
fn remainder_is_shift_invariant() {
    let r = common::run("sine", 0.1, 30, 0.05);
    let v = r.traj.field.weighted(|t, x, mu| (t + x) * mu);
    let tv = r.traj.traces.scaled(0.5);
    let mut u2 = r.traj.field.clone();
    u2.axpy(1.0, &v).unwrap();
    let mut a2 = r.asm.ua.clone();
    a2.axpy(1.0, &v).unwrap();
    let mut ut = r.traj.traces.clone();
    ut.axpy(1.0, &tv).unwrap();
    let mut at = r.asm.ua_trace.clone();
    at.axpy(1.0, &tv).unwrap();
    let shifted = compute_remainder(BoundaryKind::InFlow, &u2, &ut, &a2, &at).unwrap();
    let d = shifted.field.sub(&r.rem.field).unwrap();
    assert!(d.max_abs() < 1e-13);
    let dt = shifted.trace.sub(&r.rem.trace).unwrap();
    assert!(dt.values().iter().all(|v| v.abs() < 1e-13));
}

#[test]
fn mismatched_grids_are_rejected() {
    let r = common::run("sine", 0.1, 30, 0.05);
    let q = r.traj.field.quadrature().clone();
    let other = Arc::new(SpatialGrid::uniform(SlabGeometry::new(1.0).unwrap(), 31).unwrap());
    let f = PhaseField::zeros(other, q, r.traj.field.times().clone(), 0.1).unwrap();
    let e = compute_remainder(BoundaryKind::InFlow, &r.traj.field, &r.traj.traces, &f, &r.traj.traces);
    assert!(matches!(e, Err(LabError::Shape(_))));
}

#[test]
fn remainder_below_leading_order_error() {
    let r = common::run("sine", 0.05, 100, 0.2);
    let rn = r.rem.field.norm(NormKind::L2SpaceTime, None).unwrap();
    let d0 = r.traj.field.sub(&r.asm.parts.u0).unwrap().norm(NormKind::L2SpaceTime, None).unwrap();
    assert!(rn <= d0, "‖R‖ = {rn}, ‖u − U0‖ = {d0}");
}

#[test]
fn zero_remainder_has_zero_residuals() {
    let r = common::run("sine", 0.1, 30, 0.05);
    let mut rem = r.rem.clone();
    rem.field = rem.field.scaled(0.0);
    rem.trace = rem.trace.scaled(0.0);
    let mut data = r.data.clone();
    let z = data.sources.interior.scaled(0.0);
    data.sources = diffusion_hierarchy::Sources { interior: z.clone(), initial: z.clone(), boundary: z.clone(), boundary_dt: z };
    for rules in [IdentityRules::default(), IdentityRules { green: TimeRule::Trapezoid, kernels: TimeRule::Implicit }] {
        let ir = identity_residuals(&rem, &data, rules).unwrap();
        assert_eq!(ir.max_residual(), 0.0);
        assert_eq!(ir.orthogonality, 0.0);
    }
}

#[test]
fn smooth_green_identity() {
    let q = Quadrature::gauss_legendre(8).unwrap();
    let one = |_: f64, _: f64| 1.0;
    let zero = |_: f64, _: f64| 0.0;
    let b = green_identity_smooth(&q, 1.0, 4, one, zero, one, zero);
    assert!(b.lhs.abs() < 1e-15 && b.rhs.abs() < 1e-14);
    let b = green_identity_smooth(
        &q,
        2.0,
        16,
        |x, m| (x * m).sin() + x,
        |x, m| m * (x * m).cos() + 1.0,
        |x, m| (-x).exp() * (1.0 + m * m),
        |x, m| -(-x).exp() * (1.0 + m * m),
    );
    assert!(b.residual() < 1e-13, "{b:?}");
}

#[test]
fn identity_residuals_shrink_under_refinement() {
    let levels: Vec<_> = [40, 80, 160]
        .iter()
        .map(|&n| {
            let r = common::run("sine", 0.1, n, 0.05);
            let ir = identity_residuals(&r.rem, &r.data, IdentityRules::default()).unwrap();
            assert!(ir.orthogonality < 1e-13);
            [ir.green.residual(), ir.kernel_xi.residual(), ir.kernel_flux.residual(), ir.kernel_zeta.residual()]
        })
        .collect();
    for j in 0..4 {
        let e: Vec<f64> = levels.iter().map(|l| l[j]).collect();
        let lv: Vec<(f64, f64)> = [40.0, 80.0, 160.0].iter().zip(&e).map(|(n, v)| (1.0 / n, *v)).collect();
        for o in refinement_orders(&lv).unwrap() {
            assert!(o >= 1.0, "identity {j}: {e:?}");
        }
    }
}

#[test]
fn diffuse_data_invariants() {
    let r = common::run("diffuse", 0.1, 40, 0.1);
    let f0 = PhaseField::from_values(
        r.data.sources.interior.grid().clone(),
        r.data.sources.interior.quadrature().clone(),
        Arc::from(vec![0.0]),
        0.1,
        r.data.initial.clone(),
    )
    .unwrap();
    assert!(double_integral(&f0, 0).abs() <= 1e-10);
    let s = r.data.source();
    for n in 0..s.times().len() {
        assert!(double_integral(&s, n).abs() <= 1e-10, "∬S = {} at record {n}", double_integral(&s, n));
    }
    assert!(diffuse_boundary_identity(&r.rem, &r.data).unwrap() <= 1e-10);
    let pot = potentials(&r.rem.field.velocity_average(), poisson_bc_for(r.rem.kind)).unwrap();
    assert!(orthogonality(&r.rem, &pot) <= 1e-13);
    assert!(specular_pairings(&r.rem, &pot).is_err());
}

#[test]
fn specular_renormalization_and_wall_pairings() {
    let mut r = common::run("specular", 0.1, 40, 0.1);
    assert!(diffuse_boundary_identity(&r.rem, &r.data).is_err());
    let shift = renormalize(&mut r.rem, Some(&mut r.data)).unwrap();
    assert!(mean_average(&r.rem.field).iter().all(|m| m.abs() <= 1e-10));
    assert!(shift.iter().all(|m| m.abs() <= 0.1 * 0.1));
    let pot = potentials(&r.rem.field.velocity_average(), poisson_bc_for(r.rem.kind)).unwrap();
    assert!(pot.removed_mean.iter().all(|m| m.abs() <= 1e-10));
    assert!(specular_pairings(&r.rem, &pot).unwrap() <= 1e-12);
}

#[test]
fn norms_and_estimates_of_a_vanishing_remainder() {
    let zero = RemainderNorms { eps: 0.1, sup_t_l2: 0.0, rbar: 0.0, fluct: 0.0, trace: 0.0 };
    let norms: Vec<RemainderNorms> = [0.1, 0.05, 0.025].iter().map(|&e| RemainderNorms { eps: e, ..zero }).collect();
    for kind in [EstimateKind::Energy, EstimateKind::Kernel] {
        let c = estimate_check(&norms, kind).unwrap();
        assert!(c.passes());
        assert_eq!(c.margin, f64::INFINITY);
        assert_eq!(c.spread, 1.0);
    }
    assert!(estimate_check(&[], EstimateKind::Energy).is_err());
}

#[test]
fn computed_norms_are_nonnegative_and_consistent() {
    let r = common::run("diffuse", 0.1, 40, 0.1);
    let n = compute_norms(&r.rem).unwrap();
    assert!(n.sup_t_l2 >= 0.0 && n.rbar >= 0.0 && n.fluct >= 0.0 && n.trace >= 0.0);
    // R̄ and R − R̄ are orthogonal, so their squares add up to ‖R‖²
    let full = r.rem.field.norm(NormKind::L2SpaceTime, None).unwrap();
    assert!((n.rbar.powi(2) + n.fluct.powi(2) - full * full).abs() <= 1e-12 * full.max(1.0));
    let _: &WallTrace = &r.rem.trace;
}
