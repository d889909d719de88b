use std::sync::Arc;

use phase_core::{Quadrature, Side, SlabGeometry};

use crate::{MilneBasis, MilneError, Result};

/// Incoming datum at one wall as a function of `(t, μ)`, physical `μ`.
pub type LayerDatum = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Smooth plateau: 1 on `|r| ≤ 1`, 0 on `|r| ≥ 2`, C² cubic blend between.
pub fn chi(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

pub fn chi_prime(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 || a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        -6.0 * s * (1.0 - s) * r.signum()
    }
}

pub fn chi_tilde(r: f64) -> f64 {
    1.0 - chi(r)
}

/// Step used to difference the datum in time.
const DT_PROBE: f64 = 1e-4;

pub(crate) fn time_derivative(f: &LayerDatum, t: f64, mu: f64) -> f64 {
    if t >= DT_PROBE {
        (f(t + DT_PROBE, mu) - f(t - DT_PROBE, mu)) / (2.0 * DT_PROBE)
    } else {
        (-3.0 * f(t, mu) + 4.0 * f(t + DT_PROBE, mu) - f(t + 2.0 * DT_PROBE, mu)) / (2.0 * DT_PROBE)
    }
}

/// `U^B₀ = χ(ε^{1/2}η) χ̃(μ/ε) Ψ₀` at one wall, evaluated at fixed physical
/// points for every direction of an evaluation rule.
///
/// `Ψ₀(t) = Φ(t) − Φ_∞(t)` comes from the Milne basis, so the profile at any
/// time is a linear combination of precomputed tables weighted by the datum.
pub struct CutoffLayer {
    side: Side,
    eps: f64,
    datum: LayerDatum,
    quad: Arc<Quadrature>,
    basis: MilneBasis,
    points: Vec<f64>,
    eta: Vec<f64>,
    /// indices of points inside the spatial cutoff support
    active: Vec<usize>,
    /// `values[k][a * nv + v]`: zero-inflow sweep of basis `k` at active point `a`
    values: Vec<Vec<f64>>,
    /// `averages[k][a]`: Milne-rule average of basis `k` (inflow included)
    averages: Vec<Vec<f64>>,
}

impl std::fmt::Debug for CutoffLayer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutoffLayer")
            .field("side", &self.side)
            .field("eps", &self.eps)
            .field("points", &self.points.len())
            .field("active", &self.active.len())
            .finish()
    }
}

impl CutoffLayer {
    /// `points` are physical positions; `quad` is the rule on which values are
    /// returned (it may differ from the Milne rule).
    pub fn new(
        basis: &MilneBasis,
        datum: LayerDatum,
        eps: f64,
        side: Side,
        geometry: SlabGeometry,
        points: &[f64],
        quad: Arc<Quadrature>,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(MilneError::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let se = eps.sqrt();
        let eta: Vec<f64> = points.iter().map(|&x| geometry.distance(x, side) / eps).collect();
        let active: Vec<usize> = (0..points.len()).filter(|&i| chi(se * eta[i]) > 0.0).collect();
        if let Some(&far) = active.iter().map(|&i| &eta[i]).max_by(|a, b| a.total_cmp(b)) {
            if far > basis.grid().eta_max() {
                return Err(MilneError::InvalidArgument(format!(
                    "layer support reaches eta = {far:.2} beyond the Milne domain {:.2}",
                    basis.grid().eta_max()
                )));
            }
        }
        let nv = quad.len();
        let mq = basis.quadrature();
        let nb = basis.incoming();
        let mut values = Vec::with_capacity(nb);
        let mut averages = Vec::with_capacity(nb);
        for k in 0..nb {
            let pb = basis.basis_phibar(k);
            let mut vals = vec![0.0; active.len() * nv];
            for v in 0..nv {
                let nu = side.inward(quad.node(v));
                let prof = basis.profile(pb, nu, 0.0);
                for (a, &i) in active.iter().enumerate() {
                    vals[a * nv + v] = basis.value_at(pb, &prof, nu, eta[i]);
                }
            }
            let mut avg = vec![0.0; active.len()];
            let own = basis.incoming_node(k);
            for m in 0..mq.len() {
                let nu = mq.node(m);
                let prof = basis.profile(pb, nu, 0.0);
                for (a, &i) in active.iter().enumerate() {
                    let mut val = basis.value_at(pb, &prof, nu, eta[i]);
                    if nu == own {
                        val += (-eta[i] / nu).exp();
                    }
                    avg[a] += 0.5 * mq.weight(m) * val;
                }
            }
            values.push(vals);
            averages.push(avg);
        }
        Ok(Self {
            side,
            eps,
            datum,
            quad,
            basis: basis.clone(),
            points: points.to_vec(),
            eta,
            active,
            values,
            averages,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Stretched distance `η` of every point.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    /// Physical `μ` of inward velocity `ν`.
    fn mu_of(&self, nu: f64) -> f64 {
        self.side.inward(nu)
    }

    /// Datum on the Milne rule at time `t`.
    fn rho(&self, t: f64, derivative: bool) -> Vec<f64> {
        (0..self.basis.incoming())
            .map(|k| {
                let nu = self.basis.incoming_node(k);
                let mu = self.mu_of(nu);
                if derivative {
                    time_derivative(&self.datum, t, mu)
                } else {
                    (self.datum)(t, mu)
                }
            })
            .collect()
    }

    /// `Φ_∞(t)`, the Dirichlet datum of the interior problem at this wall.
    pub fn limit(&self, t: f64) -> f64 {
        self.basis.limit(&self.rho(t, false))
    }

    /// `(Ψ₀, Ψ̄₀)` at active points; `derivative` gives their time derivatives.
    fn psi(&self, t: f64, derivative: bool) -> (Vec<f64>, Vec<f64>) {
        let rho = self.rho(t, derivative);
        let nv = self.quad.len();
        let c = self.basis.reference(&rho);
        let mut psi = vec![0.0; self.active.len() * nv];
        let mut bar = vec![0.0; self.active.len()];
        for (k, r) in rho.iter().enumerate() {
            let d = r - c;
            if d == 0.0 {
                continue;
            }
            let inf = self.basis.basis_limit(k);
            for (p, v) in psi.iter_mut().zip(&self.values[k]) {
                *p += d * (v - inf);
            }
            for (b, v) in bar.iter_mut().zip(&self.averages[k]) {
                *b += d * (v - inf);
            }
        }
        for v in 0..nv {
            let mu = self.quad.node(v);
            let nu = self.side.inward(mu);
            if nu <= 0.0 {
                continue;
            }
            let g = if derivative { time_derivative(&self.datum, t, mu) } else { (self.datum)(t, mu) } - c;
            for (a, &i) in self.active.iter().enumerate() {
                psi[a * nv + v] += g * (-self.eta[i] / nu).exp();
            }
        }
        (psi, bar)
    }

    fn scatter(&self, active_vals: &[f64]) -> Vec<f64> {
        let nv = self.quad.len();
        let mut out = vec![0.0; self.points.len() * nv];
        for (a, &i) in self.active.iter().enumerate() {
            out[i * nv..(i + 1) * nv].copy_from_slice(&active_vals[a * nv..(a + 1) * nv]);
        }
        out
    }

    fn apply_cutoffs(&self, psi: &[f64]) -> Vec<f64> {
        let nv = self.quad.len();
        let se = self.eps.sqrt();
        let mut out = psi.to_vec();
        for (a, &i) in self.active.iter().enumerate() {
            let cx = chi(se * self.eta[i]);
            for v in 0..nv {
                out[a * nv + v] *= cx * chi_tilde(self.quad.node(v) / self.eps);
            }
        }
        self.scatter(&out)
    }

    /// `Ψ₀` without cutoffs at every point (zero outside the spatial support).
    pub fn profile(&self, t: f64) -> Vec<f64> {
        self.scatter(&self.psi(t, false).0)
    }

    /// `U^B₀(t)` laid out as `(point, direction)`.
    pub fn ub0(&self, t: f64) -> Vec<f64> {
        self.apply_cutoffs(&self.psi(t, false).0)
    }

    /// `∂_t U^B₀(t)`.
    pub fn dt_ub0(&self, t: f64) -> Vec<f64> {
        self.apply_cutoffs(&self.psi(t, true).0)
    }

    /// Commutator source
    /// `−ε⁻¹{ε^{1/2} ν χ′ χ̃ Ψ₀ + χ[avg(χ(μ/ε)Ψ₀) − χ(μ/ε)Ψ̄₀]}`.
    pub fn s_bl3(&self, t: f64) -> Vec<f64> {
        let (psi, bar) = self.psi(t, false);
        let nv = self.quad.len();
        let se = self.eps.sqrt();
        let mut out = vec![0.0; psi.len()];
        for (a, &i) in self.active.iter().enumerate() {
            let r = se * self.eta[i];
            let (cx, dcx) = (chi(r), chi_prime(r));
            let row = &psi[a * nv..(a + 1) * nv];
            let avg: f64 =
                0.5 * (0..nv).map(|v| self.quad.weight(v) * chi(self.quad.node(v) / self.eps) * row[v]).sum::<f64>();
            for v in 0..nv {
                let mu = self.quad.node(v);
                let nu = self.side.inward(mu);
                let cm = chi(mu / self.eps);
                let term = se * nu * dcx * (1.0 - cm) * row[v] + cx * (avg - cm * bar[a]);
                out[a * nv + v] = -term / self.eps;
            }
        }
        self.scatter(&out)
    }

    /// `Ψ̄₀` at every point.
    pub fn profile_average(&self, t: f64) -> Vec<f64> {
        let bar = self.psi(t, false).1;
        let mut out = vec![0.0; self.points.len()];
        for (a, &i) in self.active.iter().enumerate() {
            out[i] = bar[a];
        }
        out
    }
}
