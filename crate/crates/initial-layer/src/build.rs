use std::sync::Arc;

use phase_core::Quadrature;

use crate::{solve_initial_layer, InitialLayerProblem, InitialLayerTerm, LayerError, LayerSource, Result};

/// Initial datum `u_o(x, μ)`.
pub type InitialDatum = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const FD_STEP: f64 = 1e-3;

/// `f′(x)` on `[0, length]`: fourth-order central differences, switching to
/// fourth-order one-sided stencils within two steps of a wall.
pub fn x_derivative(f: &dyn Fn(f64) -> f64, x: f64, length: f64) -> f64 {
    let h = FD_STEP * length;
    if x - 2.0 * h >= 0.0 && x + 2.0 * h <= length {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    } else {
        let s = if x - 2.0 * h < 0.0 { 1.0 } else { -1.0 };
        let v: Vec<f64> = (0..5).map(|i| f(x + s * i as f64 * h)).collect();
        s * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    }
}

fn check_points(points: &[f64], length: f64) -> Result<()> {
    if points.is_empty() || points.iter().any(|&x| !(0.0..=length).contains(&x)) {
        return Err(LayerError::InvalidArgument(format!("evaluation points must lie in [0, {length}]")));
    }
    Ok(())
}

/// Zeroth-order layer from `Θ_o = u_o` with no source, so that
/// `Θ − Θ_∞ = e^{−τ}(u_o − ū_o)`.
pub fn build_ui0(u_o: &InitialDatum, points: &[f64], quad: Arc<Quadrature>, length: f64) -> Result<InitialLayerTerm> {
    check_points(points, length)?;
    let theta_o: Vec<f64> = points.iter().flat_map(|&x| quad.nodes().iter().map(move |&m| u_o(x, m))).collect();
    solve_initial_layer(InitialLayerProblem::new(quad, theta_o, None))
}

/// First-order layer: `Θ_o = μ ∂_x U₀(0)`, source `S = −μ ∂_x U^I₀`.
///
/// `u0_at_0` is the interior term at `t = 0`; its average part equals `ū_o`.
pub fn build_ui1(
    u_o: &InitialDatum,
    u0_at_0: &(dyn Fn(f64) -> f64 + Send + Sync),
    points: &[f64],
    quad: Arc<Quadrature>,
    length: f64,
) -> Result<InitialLayerTerm> {
    ui1_problem(u_o, u0_at_0, points, quad, length, false)
}

/// `∂_x` of the first-order layer. The layer problem is linear and local in
/// `x`, so this is the same construction applied to `x`-differentiated data.
pub fn build_ui1_dx(
    u_o: &InitialDatum,
    u0_at_0: &(dyn Fn(f64) -> f64 + Send + Sync),
    points: &[f64],
    quad: Arc<Quadrature>,
    length: f64,
) -> Result<InitialLayerTerm> {
    ui1_problem(u_o, u0_at_0, points, quad, length, true)
}

fn ui1_problem(
    u_o: &InitialDatum,
    u0_at_0: &(dyn Fn(f64) -> f64 + Send + Sync),
    points: &[f64],
    quad: Arc<Quadrature>,
    length: f64,
    differentiate: bool,
) -> Result<InitialLayerTerm> {
    check_points(points, length)?;
    let nv = quad.len();
    let q = quad.clone();
    let u = u_o.clone();
    let mean = move |y: f64| {
        let vals: Vec<f64> = q.nodes().iter().map(|&m| u(y, m)).collect();
        q.average(&vals)
    };
    let d = |f: &dyn Fn(f64) -> f64, x: f64| -> f64 {
        if differentiate {
            x_derivative(&|y| x_derivative(f, y, length), x, length)
        } else {
            x_derivative(f, x, length)
        }
    };
    let mut theta_o = Vec::with_capacity(points.len() * nv);
    let mut s = Vec::with_capacity(points.len() * nv);
    for &x in points {
        let du0 = d(u0_at_0, x);
        let dbar = d(&mean, x);
        for &m in quad.nodes() {
            let du = d(&|y| u_o(y, m), x);
            theta_o.push(m * du0);
            s.push(-m * (du - dbar));
        }
    }
    let s = Arc::new(s);
    let source: LayerSource = Arc::new(move |tau: f64, out: &mut [f64]| {
        let e = (-tau).exp();
        for (o, v) in out.iter_mut().zip(s.iter()) {
            *o = e * v;
        }
    });
    solve_initial_layer(InitialLayerProblem::new(quad, theta_o, Some(source)))
}
