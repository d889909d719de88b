//! One PASS/FAIL line per acceptance criterion, plus supplementary
//! measurements that are reported but not gated. Run with `--nocapture` to
//! see the table.

use std::f64::consts::PI;
use std::sync::Arc;

use cli_harness::output::csv_string;
use cli_harness::{build_problem, run_experiment, CheckName, DataSpec, ExperimentConfig, ExperimentResult};
use diffusion_hierarchy::{ExpansionSetup, Hierarchy};
use initial_layer::{build_ui0, build_ui1, rk4_oracle, InitialDatum, InitialLayerProblem, LayerSource};
use milne_layer::{solve_milne, MilneBasis, MilneGrid, MilneProblem};
use phase_core::{Quadrature, Side, SlabGeometry, SpatialGrid};
use remainder_lab::identities::diffuse_boundary_identity;
use remainder_lab::{
    identity_residuals, poisson_solve, refinement_orders, remainder_data, remainder_of, IdentityRules, PoissonBc,
    Remainder, RemainderData,
};
use transport_solver::{solve, BoundaryCondition, BoundaryKind, SpatialScheme, Trajectory, TransportProblem};

struct Line {
    criterion: u8,
    passed: bool,
    text: String,
}

#[derive(Default)]
struct Table {
    lines: Vec<Line>,
    notes: Vec<String>,
}

impl Table {
    fn record(&mut self, criterion: u8, passed: bool, text: String) {
        self.lines.push(Line { criterion, passed, text });
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn print(&self) -> bool {
        let mut ok = true;
        for c in 1..=9u8 {
            let parts: Vec<&Line> = self.lines.iter().filter(|l| l.criterion == c).collect();
            let passed = !parts.is_empty() && parts.iter().all(|l| l.passed);
            ok &= passed;
            let text: Vec<&str> = parts.iter().map(|l| l.text.as_str()).collect();
            println!("criterion {c}: {} | {}", if passed { "PASS" } else { "FAIL" }, text.join("; "));
        }
        for n in &self.notes {
            println!("supplementary: {n}");
        }
        ok
    }
}

fn sweep(preset: &str, eps: &[f64], checks: &[CheckName]) -> ExperimentResult {
    let mut c = ExperimentConfig::for_preset(preset, eps.to_vec());
    c.checks = checks.to_vec();
    run_experiment(&c).unwrap()
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn criteria_1_3_4(t: &mut Table) {
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let start = std::time::Instant::now();
    let r = sweep("inflow-layer", &eps, &[CheckName::RateWindow, CheckName::ScaledRemainder]);
    let secs = start.elapsed().as_secs_f64();
    let s = r.rate("u_minus_u0").unwrap();
    t.record(
        1,
        (0.4..=0.6).contains(&s.slope),
        format!("in-flow slope of |u - U0| = {:.4} ± {:.4} in [0.4, 0.6]", s.slope, s.stderr),
    );
    t.record(1, secs < 300.0, format!("{secs:.0} s < 300 s"));

    for (series, target, tol, label) in [
        ("initial_data", 2.0, 0.1, "|I|"),
        ("wall_data", 1.0, 0.1, "|G| on the incoming boundary"),
        ("smooth_sources", 2.0, 0.15, "|S^IS| + |S^IL|"),
        ("weighted_layer", 0.5, 0.1, "|(1+eta) U^B0|"),
        ("weighted_layer_source", 0.5, 0.1, "L2L2L1 of (1+eta) S^BL3"),
    ] {
        let f = r.rate(series).unwrap();
        t.record(3, within(f.slope, target, tol), format!("{label} slope {:.4} (target {target} ± {tol})", f.slope));
    }

    let sc = &r.scaled;
    t.record(
        4,
        sc.rbar_spread <= 4.0 && sc.fluct_spread <= 4.0,
        format!(
            "max/min of eps^-1/2 |Rbar| = {:.3}, of eps^-1 |R - Rbar| = {:.3} (limit 4)",
            sc.rbar_spread, sc.fluct_spread
        ),
    );
    t.note(format!(
        "in-flow smallest energy constant spread x{:.3}, kernel constant spread x{:.3} (bounded-trend target x2)",
        r.energy.spread, r.kernel.spread
    ));
    for name in ["sup_t_l2", "rbar", "fluct", "trace"] {
        if let Some(f) = r.rate(name) {
            t.note(format!("in-flow remainder {name} slope {:.4} ± {:.4}", f.slope, f.stderr));
        }
    }
}

fn criteria_2_8_flux(t: &mut Table) {
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let start = std::time::Instant::now();
    let mut worst_flux: f64 = 0.0;
    for preset in ["diffuse-cosine", "specular-quiet"] {
        let r = sweep(preset, &eps, &[CheckName::RateFloor, CheckName::NullFlux]);
        let s = r.rate("u_minus_u0").unwrap();
        t.record(2, s.slope >= 0.4, format!("{preset} slope {:.4} ± {:.4} >= 0.4", s.slope, s.stderr));
        worst_flux = worst_flux.max(r.rows.iter().filter_map(|row| row.null_flux).fold(0.0, f64::max));
        t.note(format!(
            "{preset}: max/min of eps^-1/2 |Rbar| = {:.3}, of eps^-1 |R - Rbar| = {:.3}",
            r.scaled.rbar_spread, r.scaled.fluct_spread
        ));
        if let Some(sh) = r.rows.iter().filter_map(|row| row.shift.map(|s| s / (row.eps * row.eps))).reduce(f64::max) {
            t.note(format!("{preset}: largest renormalization shift / eps^2 = {sh:.4}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    t.record(2, secs < 600.0, format!("{secs:.0} s < 600 s"));
    t.record(8, worst_flux <= 1e-10, format!("diffuse/specular wall flux {worst_flux:.2e} <= 1e-10"));
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_5(t: &mut Table) {
    let q = Arc::new(Quadrature::gauss_legendre(16).unwrap());
    let u: InitialDatum = Arc::new(|x: f64, mu: f64| (PI * x).sin() * (1.0 + 0.5 * mu * x * (1.0 - x)));
    let pts = [0.0, 0.013, 0.2, 0.5, 0.77, 0.999, 1.0];
    let taus = [0.0, 0.3, 1.0, 4.0, 12.0, 29.0, 45.0];

    // zeroth order: θ_o = u_o, no source
    let ui0 = build_ui0(&u, &pts, q.clone(), 1.0).unwrap();
    let theta_o: Vec<f64> = pts.iter().flat_map(|&x| q.nodes().iter().map(move |&m| (x, m))).map(|(x, m)| u(x, m)).collect();
    let oracle = rk4_oracle(&InitialLayerProblem::new(q.clone(), theta_o, None), &taus, 1e-3);
    let ours = ui0.theta(&taus).unwrap();
    let e0 = (0..taus.len()).map(|n| sup_diff(&ours[n], &oracle[n])).fold(0.0, f64::max);

    // first order: θ_o = μ ∂_x ū_o, source e^{−τ} μ ∂_x(u_o − ū_o)
    let ubar = |x: f64| (PI * x).sin();
    let ui1 = build_ui1(&u, &ubar, &pts, q.clone(), 1.0).unwrap();
    let mut theta_o = Vec::new();
    let mut s = Vec::new();
    for &x in &pts {
        let dq = 0.5 * ((1.0 - 2.0 * x) * (PI * x).sin() + x * (1.0 - x) * PI * (PI * x).cos());
        for &m in q.nodes() {
            theta_o.push(m * PI * (PI * x).cos());
            s.push(-m * m * dq);
        }
    }
    let s = Arc::new(s);
    let src: LayerSource = Arc::new(move |tau: f64, out: &mut [f64]| {
        for (o, v) in out.iter_mut().zip(s.iter()) {
            *o = (-tau).exp() * v;
        }
    });
    let oracle = rk4_oracle(&InitialLayerProblem::new(q.clone(), theta_o, Some(src)), &taus, 1e-3);
    let ours = ui1.theta(&taus).unwrap();
    let e1 = (0..taus.len()).map(|n| sup_diff(&ours[n], &oracle[n])).fold(0.0, f64::max);
    t.record(5, e0 <= 1e-8 && e1 <= 1e-8, format!("sup error vs RK4: UI0 {e0:.2e}, UI1 {e1:.2e} (<= 1e-8)"));
    let (r0, r1) = (ui0.decay_rate().unwrap(), ui1.decay_rate().unwrap());
    t.record(
        5,
        (0.9..=1.1).contains(&r0) && (0.9..=1.1).contains(&r1),
        format!("decay fits {r0:.4}, {r1:.4} in [0.9, 1.1]"),
    );
}

fn criterion_6(t: &mut Table) {
    let q = Arc::new(Quadrature::gauss_legendre(16).unwrap());
    let c = solve_milne(&MilneProblem::from_fn(q.clone(), |_| 2.5)).unwrap();
    let dev = c.phi.iter().map(|v| (v - 2.5).abs()).fold((c.phi_inf - 2.5).abs(), f64::max);
    t.record(6, dev <= 1e-12, format!("constant datum reproduced to {dev:.1e}"));

    let sol = solve_milne(&MilneProblem::from_fn(q.clone(), |m| 1.0 + m - 0.5 * m.powi(3))).unwrap();
    let trunc = sol.truncation_sensitivity.unwrap();
    let slope = -sol.decay_rate.unwrap();
    t.record(6, sol.residual <= 1e-10, format!("residual {:.1e}", sol.residual));
    t.record(6, trunc <= 1e-8, format!("eta_max doubling moves Phi_inf by {trunc:.1e}"));
    t.record(6, slope <= -0.9, format!("decay slope {slope:.4} <= -0.9"));

    // ρ(μ) = μ: Richardson extrapolation over three nested Milne grids
    let rho: Vec<f64> = q.nodes()[q.len() / 2..].to_vec();
    let g0 = MilneGrid::default();
    let g1 = g0.refined();
    let g2 = g1.refined();
    let l: Vec<f64> = [g0, g1, g2].into_iter().map(|g| MilneBasis::new(q.clone(), g).unwrap().limit(&rho)).collect();
    let (d1, d2) = (l[1] - l[0], l[2] - l[1]);
    let richardson = if d2.abs() < 1e-15 {
        l[2]
    } else {
        let p = (d1 / d2).abs().log2().max(1.0);
        l[2] + d2 / (2f64.powf(p) - 1.0)
    };
    let ours = solve_milne(&MilneProblem::new(q, rho)).unwrap().phi_inf;
    let err = (ours - richardson).abs();
    t.record(6, err <= 1e-6, format!("rho = mu limit {ours:.10} vs Richardson {richardson:.10}, diff {err:.1e}"));
}

struct Pipeline {
    traj: Trajectory,
    rem: Remainder,
    data: RemainderData,
}

fn pipeline(
    u_o: InitialDatum,
    bc: BoundaryCondition,
    q: Arc<Quadrature>,
    hier: &Hierarchy,
    eps: f64,
    cells: usize,
    t_final: f64,
) -> Pipeline {
    let grid = Arc::new(SpatialGrid::uniform(SlabGeometry::new(1.0).unwrap(), cells).unwrap());
    let mut p = TransportProblem::new(grid.clone(), q.clone(), eps, t_final, u_o, bc.clone()).unwrap();
    p.scheme = SpatialScheme::Minmod;
    let traj = solve(&p).unwrap();
    let asm = hier.bundle(eps, grid, q).unwrap().assemble(traj.field.times()).unwrap();
    let rem = remainder_of(&traj, &asm).unwrap();
    let data = remainder_data(&asm, &p.initial_state(), &bc).unwrap();
    Pipeline { traj, rem, data }
}

fn criterion_7(t: &mut Table) {
    let (eps, t_final) = (0.05, 0.025);
    let q = Arc::new(Quadrature::composite(&[0.025, 0.1, 0.4], 4).unwrap());
    let d = build_problem(&DataSpec::Preset("inflow-layer".into()), &q, 0, 0.0).unwrap();
    let geo = SlabGeometry::new(1.0).unwrap();
    let hier = Hierarchy::new(ExpansionSetup::new(d.u_o.clone(), d.bc.clone(), q.clone(), geo, t_final)).unwrap();
    let cells = [100usize, 200, 400, 800];
    let res: Vec<[f64; 4]> = cells
        .iter()
        .map(|&n| {
            let p = pipeline(d.u_o.clone(), d.bc.clone(), q.clone(), &hier, eps, n, t_final);
            let ir = identity_residuals(&p.rem, &p.data, IdentityRules::default()).unwrap();
            [ir.green.residual(), ir.kernel_xi.residual(), ir.kernel_flux.residual(), ir.kernel_zeta.residual()]
        })
        .collect();
    for (j, name) in ["Green", "kernel test with xi", "kernel test with mu d_x xi", "kernel test with eps zeta"]
        .iter()
        .enumerate()
    {
        let levels: Vec<(f64, f64)> = cells.iter().zip(&res).map(|(&n, r)| (1.0 / n as f64, r[j])).collect();
        let orders = refinement_orders(&levels).unwrap();
        let shown: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
        t.record(
            7,
            orders.iter().all(|&o| o >= 1.0),
            format!("{name} orders [{}] >= 1 (finest residual {:.1e})", shown.join(", "), res[3][j]),
        );
    }
}

fn criterion_8(t: &mut Table) {
    let geo = SlabGeometry::new(1.0).unwrap();
    let q = Arc::new(Quadrature::composite(&[0.025, 0.1, 0.4], 2).unwrap());

    // specular walls with h ≡ 0 conserve mass
    let u_o: InitialDatum = Arc::new(|x: f64, mu: f64| 1.0 + (2.0 * PI * x).cos() + 0.3 * mu * (PI * x).sin());
    let grid = Arc::new(SpatialGrid::uniform(geo, 80).unwrap());
    let mut p =
        TransportProblem::new(grid, q.clone(), 0.1, 0.2, u_o, BoundaryCondition::zero(BoundaryKind::Specular)).unwrap();
    p.scheme = SpatialScheme::Minmod;
    let traj = solve(&p).unwrap();
    let m0 = traj.mass(0);
    let drift = (0..traj.field.times().len()).map(|n| (traj.mass(n) - m0).abs()).fold(0.0, f64::max);
    t.record(8, drift <= 1e-10, format!("specular mass drift {drift:.1e} <= 1e-10"));

    // diffuse boundary identity
    let d = build_problem(&DataSpec::Preset("diffuse-cosine".into()), &q, 0, 0.0).unwrap();
    let hier = Hierarchy::new(ExpansionSetup::new(d.u_o.clone(), d.bc.clone(), q.clone(), geo, 0.1)).unwrap();
    let run = pipeline(d.u_o.clone(), d.bc.clone(), q.clone(), &hier, 0.1, 40, 0.1);
    let id = diffuse_boundary_identity(&run.rem, &run.data).unwrap();
    t.record(8, id <= 1e-10, format!("diffuse boundary identity {id:.1e} <= 1e-10"));
    let _ = &run.traj;

    // quadrature identities
    let mut worst: f64 = 0.0;
    for rule in [Quadrature::gauss_legendre(16).unwrap(), (*q).clone()] {
        let moment = |p: i32| rule.integrate(&rule.nodes().iter().map(|m| m.powi(p)).collect::<Vec<_>>());
        worst = worst.max((moment(0) - 2.0).abs());
        worst = worst.max(moment(1).abs()).max(moment(3).abs());
        worst = worst.max((moment(2) - 2.0 / 3.0).abs());
        worst = worst.max((rule.second_moment() - 1.0 / 3.0).abs());
        for k in 0..rule.len() {
            let r = rule.reflect(k);
            worst = worst.max((rule.node(k) + rule.node(r)).abs()).max((rule.weight(k) - rule.weight(r)).abs());
        }
        for side in Side::BOTH {
            let ones = vec![1.0; rule.len()];
            worst = worst.max((rule.half_range_average(&ones, side).unwrap() - 1.0).abs());
            // diffuse reflection returns all outgoing flux
            let trace: Vec<f64> = rule.nodes().iter().map(|m| 1.0 + m * m + m.powi(3)).collect();
            let back = rule.half_range_average(&trace, side).unwrap();
            let mut refl = trace.clone();
            for k in rule.incoming(side) {
                refl[k] = back;
            }
            worst = worst.max(rule.outward_flux(&refl, side).abs());
        }
    }
    t.record(8, worst <= 1e-13, format!("quadrature identities {worst:.1e} <= 1e-13"));

    // Poisson analytic cases
    let orders = |bc: PoissonBc, f: &dyn Fn(f64, f64) -> f64, exact: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let levels: Vec<(f64, f64)> = [40usize, 80, 160, 320]
            .iter()
            .map(|&n| {
                let g = SpatialGrid::uniform(geo, n).unwrap();
                let rhs: Vec<f64> = g.edges().windows(2).map(|e| f(e[0], e[1])).collect();
                let s = poisson_solve(&g, &rhs, bc).unwrap();
                let err = g.centers().iter().zip(&s.xi).map(|(&x, v)| (v - exact(x)).abs()).fold(0.0, f64::max);
                (1.0 / n as f64, err)
            })
            .collect();
        refinement_orders(&levels).unwrap()
    };
    // cell averages of the sources
    let sine = orders(
        PoissonBc::Dirichlet,
        &|a, b| PI * ((PI * a).cos() - (PI * b).cos()) / (b - a),
        &|x| (PI * x).sin(),
    );
    let cosine = orders(
        PoissonBc::NeumannMeanZero,
        &|a, b| ((PI * b).sin() - (PI * a).sin()) / (PI * (b - a)),
        &|x| (PI * x).cos() / (PI * PI),
    );
    let lowest = sine.iter().chain(&cosine).copied().fold(f64::INFINITY, f64::min);
    t.record(8, lowest >= 1.9, format!("Poisson analytic orders >= {lowest:.3} (>= 1.9)"));
}

fn criterion_9(t: &mut Table) {
    let mut all = true;
    for preset in ["inflow-layer", "diffuse-cosine", "specular-quiet"] {
        let mut c = ExperimentConfig::for_preset(preset, vec![0.2, 0.1, 0.05]);
        c.t_final = 0.1;
        c.grid.cells = 40;
        c.grid.layer_cells = 6;
        c.checks.clear();
        let serial = csv_string(&run_experiment(&c).unwrap()).unwrap();
        c.jobs = 3;
        let parallel = csv_string(&run_experiment(&c).unwrap()).unwrap();
        all &= serial == parallel;
    }
    t.record(9, all, "CSV bytes identical for 1 and 3 jobs on three presets".into());
}

#[test]
fn acceptance() {
    let mut t = Table::default();
    criterion_5(&mut t);
    criterion_6(&mut t);
    criterion_8(&mut t);
    criterion_9(&mut t);
    criterion_7(&mut t);
    criteria_1_3_4(&mut t);
    criteria_2_8_flux(&mut t);
    assert!(t.print(), "some acceptance criteria failed");
}
