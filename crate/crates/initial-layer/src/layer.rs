use std::sync::Arc;

use phase_core::Quadrature;

use crate::{integrate_adaptive, LayerError, Result};

/// Source `S(τ)` written into a buffer laid out as `(point, direction)`.
pub type LayerSource = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct InitialLayerProblem {
    pub quadrature: Arc<Quadrature>,
    /// `Θ_o` laid out as `(point, direction)`.
    pub theta_o: Vec<f64>,
    pub source: Option<LayerSource>,
    pub tau_max: f64,
    pub tolerance: f64,
}

impl std::fmt::Debug for InitialLayerProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialLayerProblem")
            .field("points", &(self.theta_o.len() / self.quadrature.len()))
            .field("has_source", &self.source.is_some())
            .field("tau_max", &self.tau_max)
            .finish()
    }
}

impl InitialLayerProblem {
    pub fn new(quadrature: Arc<Quadrature>, theta_o: Vec<f64>, source: Option<LayerSource>) -> Self {
        Self { quadrature, theta_o, source, tau_max: 30.0, tolerance: 1e-10 }
    }

    fn validate(&self) -> Result<()> {
        let nv = self.quadrature.len();
        if self.theta_o.is_empty() || self.theta_o.len() % nv != 0 {
            return Err(LayerError::InvalidArgument(format!(
                "initial datum has {} values, not a multiple of {nv} directions",
                self.theta_o.len()
            )));
        }
        if self.theta_o.iter().any(|v| !v.is_finite()) {
            return Err(LayerError::InvalidArgument("initial datum must be finite".into()));
        }
        if !(self.tau_max >= 20.0) {
            return Err(LayerError::InvalidArgument(format!("tau_max must be >= 20, got {}", self.tau_max)));
        }
        if !(self.tolerance > 0.0) {
            return Err(LayerError::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

fn averages(q: &Quadrature, v: &[f64]) -> Vec<f64> {
    v.chunks(q.len()).map(|c| q.average(c)).collect()
}

/// A solved initial layer: `Θ` at any `τ ≥ 0`, its limit and decay rate.
#[derive(Clone)]
pub struct InitialLayerTerm {
    problem: InitialLayerProblem,
    limit: Vec<f64>,
    at_tau_max: Vec<f64>,
    decay_rate: Option<f64>,
}

impl std::fmt::Debug for InitialLayerTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialLayerTerm").field("problem", &self.problem).field("decay_rate", &self.decay_rate).finish()
    }
}

impl InitialLayerTerm {
    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.problem.quadrature
    }

    pub fn points(&self) -> usize {
        self.problem.theta_o.len() / self.problem.quadrature.len()
    }

    /// `Θ_∞` per point.
    pub fn limit(&self) -> &[f64] {
        &self.limit
    }

    /// Fitted `κ` in `sup|Θ(τ) − Θ_∞| ~ e^{−κτ}`; `None` when the layer vanishes.
    pub fn decay_rate(&self) -> Option<f64> {
        self.decay_rate
    }

    pub fn tau_max(&self) -> f64 {
        self.problem.tau_max
    }

    /// `Θ` at each of `taus` (any order), laid out as `(point, direction)`.
    pub fn theta(&self, taus: &[f64]) -> Result<Vec<Vec<f64>>> {
        if taus.iter().any(|t| !(*t >= 0.0)) {
            return Err(LayerError::InvalidArgument("tau must be non-negative".into()));
        }
        let mut order: Vec<usize> = (0..taus.len()).collect();
        order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
        let mut out = vec![Vec::new(); taus.len()];
        let mut state = self.problem.theta_o.clone();
        let mut at = 0.0;
        let tm = self.problem.tau_max;
        for i in order {
            let tau = taus[i];
            if tau <= tm {
                if tau > at {
                    state = self.advance(&state, at, tau)?;
                    at = tau;
                }
                out[i] = state.clone();
            } else {
                let f = (-(tau - tm)).exp();
                let nv = self.problem.quadrature.len();
                out[i] = self
                    .at_tau_max
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let l = self.limit[j / nv];
                        l + f * (v - l)
                    })
                    .collect();
            }
        }
        Ok(out)
    }

    /// `Θ − Θ_∞` at each of `taus`.
    pub fn layer(&self, taus: &[f64]) -> Result<Vec<Vec<f64>>> {
        let nv = self.problem.quadrature.len();
        let mut th = self.theta(taus)?;
        for v in th.iter_mut() {
            for (j, x) in v.iter_mut().enumerate() {
                *x -= self.limit[j / nv];
            }
        }
        Ok(th)
    }

    fn advance(&self, state: &[f64], from: f64, to: f64) -> Result<Vec<f64>> {
        advance(&self.problem, state, from, to)
    }
}

/// One segment of the integrating-factor formula.
fn advance(p: &InitialLayerProblem, state: &[f64], from: f64, to: f64) -> Result<Vec<f64>> {
    let q = &p.quadrature;
    let nv = q.len();
    let bar = averages(q, state);
    let decay = (-(to - from)).exp();
    let mut next: Vec<f64> = state.iter().enumerate().map(|(j, v)| bar[j / nv] + decay * (v - bar[j / nv])).collect();
    if let Some(src) = &p.source {
        let dim = state.len();
        let mut integrand = |tau: f64, out: &mut [f64]| {
            src(tau, out);
            let w = (tau - to).exp();
            for c in out.chunks_mut(nv) {
                let m = q.average(c);
                for v in c.iter_mut() {
                    *v = m + w * (*v - m);
                }
            }
        };
        let inc = integrate_adaptive(&mut integrand, from, to, dim, p.tolerance)?;
        for (n, d) in next.iter_mut().zip(inc) {
            *n += d;
        }
    }
    Ok(next)
}

/// Integrates the formula and the limit `Θ_∞ = Θ̄_o + ∫_0^∞ S̄`.
///
/// The part of `∫ S̄` beyond `τ_max` is extrapolated from the decay of `S̄`
/// over the last tenth of `[0, τ_max]`; a source that does not decay there is
/// rejected.
pub fn solve_initial_layer(problem: InitialLayerProblem) -> Result<InitialLayerTerm> {
    problem.validate()?;
    let q = problem.quadrature.clone();
    let nv = q.len();
    let tm = problem.tau_max;
    let theta_tm = advance(&problem, &problem.theta_o, 0.0, tm)?;
    let mut limit = averages(&q, &theta_tm);
    if let Some(src) = &problem.source {
        let mut a = vec![0.0; problem.theta_o.len()];
        let mut b = vec![0.0; problem.theta_o.len()];
        src(0.9 * tm, &mut a);
        src(tm, &mut b);
        let (sa, sb) = (averages(&q, &a), averages(&q, &b));
        let mut early = vec![0.0; problem.theta_o.len()];
        src(0.0, &mut early);
        let scale = early.iter().chain(&a).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for j in 0..limit.len() {
            if sb[j].abs() <= 1e-14 * scale {
                continue;
            }
            let ratio = sb[j] / sa[j];
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(LayerError::Divergence { ratio, tau_max: tm });
            }
            let kappa = -ratio.ln() / (0.1 * tm);
            limit[j] += sb[j] / kappa;
        }
        let fluct = b.chunks(nv).zip(&sb).flat_map(|(c, m)| c.iter().map(move |v| (v - m).abs())).fold(0.0, f64::max);
        if fluct > 1e-10 * scale {
            return Err(LayerError::Divergence { ratio: fluct / scale, tau_max: tm });
        }
    }
    let mut term = InitialLayerTerm { problem, limit, at_tau_max: theta_tm, decay_rate: None };
    term.decay_rate = fit_decay(&term)?;
    Ok(term)
}

/// Log-linear fit of `sup|Θ − Θ_∞|` over the middle third of `[0, τ_max]`.
fn fit_decay(term: &InitialLayerTerm) -> Result<Option<f64>> {
    let tm = term.problem.tau_max;
    let taus: Vec<f64> = (0..=20).map(|i| tm / 3.0 * (1.0 + i as f64 / 20.0)).collect();
    let lay = term.layer(&taus)?;
    let first = term.layer(&[0.0])?;
    let scale = first[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(&lay)
        .map(|(t, v)| (*t, v.iter().fold(0.0f64, |m, x| m.max(x.abs()))))
        .filter(|(_, s)| *s > 1e-13 * scale.max(1e-300))
        .map(|(t, s)| (t, s.ln()))
        .collect();
    if pts.len() < 3 {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(Some(-sxy / sxx))
}

/// Classical RK4 on `dΘ/dτ = S − Θ + Θ̄`, reporting `Θ` at each of `taus`
/// (ascending).
pub fn rk4_oracle(problem: &InitialLayerProblem, taus: &[f64], step: f64) -> Vec<Vec<f64>> {
    let q = &problem.quadrature;
    let nv = q.len();
    let dim = problem.theta_o.len();
    let mut buf = vec![0.0; dim];
    let mut rhs = |tau: f64, y: &[f64], out: &mut [f64]| {
        match &problem.source {
            Some(s) => s(tau, &mut buf),
            None => buf.iter_mut().for_each(|v| *v = 0.0),
        }
        for ((o, c), b) in out.chunks_mut(nv).zip(y.chunks(nv)).zip(buf.chunks(nv)) {
            let m = q.average(c);
            for k in 0..nv {
                o[k] = b[k] - c[k] + m;
            }
        }
    };
    let mut y = problem.theta_o.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for &target in taus {
        while t < target - 1e-15 {
            let h = step.min(target - t);
            rhs(t, &y, &mut k1);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(t + h, &tmp, &mut k4);
            for i in 0..dim {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        out.push(y.clone());
    }
    out
}
