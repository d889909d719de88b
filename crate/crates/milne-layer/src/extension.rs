use std::sync::Arc;

use phase_core::{Quadrature, Side, SlabGeometry};

use crate::cutoff::time_derivative;
use crate::{chi, chi_prime, LayerDatum, MilneError, Result};

/// Specular extension layer `U^B₁ = χ(η)·1_{incoming}·h` at one wall.
pub struct SpecularExtension {
    side: Side,
    eps: f64,
    datum: LayerDatum,
    quad: Arc<Quadrature>,
    points: Vec<f64>,
    eta: Vec<f64>,
}

impl std::fmt::Debug for SpecularExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpecularExtension").field("side", &self.side).field("eps", &self.eps).finish()
    }
}

impl SpecularExtension {
    pub fn new(
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
        let eta = points.iter().map(|&x| geometry.distance(x, side) / eps).collect();
        Ok(Self { side, eps, datum, quad, points: points.to_vec(), eta })
    }

    /// Rejects data whose incoming flux is not zero at time `t`.
    pub fn check_flux(&self, t: f64) -> Result<()> {
        let (mut flux, mut scale) = (0.0, 0.0);
        for k in self.quad.incoming(self.side) {
            let mu = self.quad.node(k);
            let v = self.quad.weight(k) * mu * (self.datum)(t, mu);
            flux += v;
            scale += v.abs();
        }
        if flux.abs() > 1e-12 * scale.max(1.0) {
            return Err(MilneError::Incompatible { time: t, side: self.side.name(), flux });
        }
        Ok(())
    }

    fn incoming_datum(&self, t: f64, derivative: bool) -> Vec<f64> {
        self.quad
            .nodes()
            .iter()
            .map(|&mu| {
                if !self.side.is_incoming(mu) {
                    0.0
                } else if derivative {
                    time_derivative(&self.datum, t, mu)
                } else {
                    (self.datum)(t, mu)
                }
            })
            .collect()
    }

    fn layer(&self, t: f64, derivative: bool) -> Vec<f64> {
        let nv = self.quad.len();
        let h = self.incoming_datum(t, derivative);
        let mut out = vec![0.0; self.points.len() * nv];
        for (i, &e) in self.eta.iter().enumerate() {
            let c = chi(e);
            if c == 0.0 {
                continue;
            }
            for v in 0..nv {
                out[i * nv + v] = c * h[v];
            }
        }
        out
    }

    /// `U^B₁(t)` laid out as `(point, direction)`.
    pub fn ub1(&self, t: f64) -> Vec<f64> {
        self.layer(t, false)
    }

    pub fn dt_ub1(&self, t: f64) -> Vec<f64> {
        self.layer(t, true)
    }

    /// `−χ′(η) ν 1h − χ(η)(1h − avg(1h))`.
    pub fn s_bl_b(&self, t: f64) -> Vec<f64> {
        let nv = self.quad.len();
        let h = self.incoming_datum(t, false);
        let avg = self.quad.average(&h);
        let mut out = vec![0.0; self.points.len() * nv];
        for (i, &e) in self.eta.iter().enumerate() {
            let (c, dc) = (chi(e), chi_prime(e));
            if c == 0.0 && dc == 0.0 {
                continue;
            }
            for v in 0..nv {
                let nu = self.side.inward(self.quad.node(v));
                out[i * nv + v] = -dc * nu * h[v] - c * (h[v] - avg);
            }
        }
        out
    }

    /// `−ε² ∂_t U^B₁`, the part of the curvature-free source that survives in
    /// a slab.
    pub fn s_bl_dt(&self, t: f64) -> Vec<f64> {
        let e2 = self.eps * self.eps;
        self.dt_ub1(t).into_iter().map(|v| -e2 * v).collect()
    }
}
