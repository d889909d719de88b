//! Tensor-product norms: trapezoid in time, cell quadrature in space, the
//! angular rule in `μ`. A field with a single time sample is measured at
//! that instant (unit time measure).

use crate::{CoreError, PhaseField, Result, ScalarField, Side, WallTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfRange {
    Incoming,
    Outgoing,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `sup_t ‖f(t)‖_{L²_{x,μ}}`.
    SupTL2,
    /// `‖f‖_{L²_{t,x,μ}}`.
    L2SpaceTime,
    /// `‖f‖_{L²(Γ)}` with boundary measure `|μ| dμ dt` on the chosen half-range.
    L2BoundaryTrace(HalfRange),
    /// `L²_t L²_x L¹_μ`.
    L2L2L1,
}

/// Composite trapezoid rule on a possibly non-uniform time grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    if times.len() == 1 {
        return values[0];
    }
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

fn time_weight(beta: Option<f64>, t: f64) -> f64 {
    beta.map_or(1.0, |b| (b * t).exp())
}

fn combine(kind: NormKind, times: &[f64], per_time_sq: &[f64], beta: Option<f64>) -> f64 {
    match kind {
        NormKind::SupTL2 => times
            .iter()
            .zip(per_time_sq)
            .map(|(&t, &s)| time_weight(beta, t) * s.sqrt())
            .fold(0.0, f64::max),
        _ => {
            let w: Vec<f64> = times.iter().zip(per_time_sq).map(|(&t, &s)| time_weight(beta, t).powi(2) * s).collect();
            trapezoid(times, &w).max(0.0).sqrt()
        }
    }
}

pub trait Measured {
    /// Norm of `e^{βt} f` when `beta` is given.
    fn norm(&self, kind: NormKind, beta: Option<f64>) -> Result<f64>;
}

impl Measured for PhaseField {
    fn norm(&self, kind: NormKind, beta: Option<f64>) -> Result<f64> {
        let q = self.quadrature();
        let h = self.grid().widths();
        let nv = q.len();
        let per_time: Vec<f64> = match kind {
            NormKind::SupTL2 | NormKind::L2SpaceTime => (0..self.times().len())
                .map(|n| {
                    self.slice(n)
                        .chunks(nv)
                        .zip(h)
                        .map(|(c, hi)| hi * c.iter().zip(q.weights()).map(|(v, w)| w * v * v).sum::<f64>())
                        .sum()
                })
                .collect(),
            NormKind::L2L2L1 => (0..self.times().len())
                .map(|n| {
                    self.slice(n)
                        .chunks(nv)
                        .zip(h)
                        .map(|(c, hi)| hi * c.iter().zip(q.weights()).map(|(v, w)| w * v.abs()).sum::<f64>().powi(2))
                        .sum()
                })
                .collect(),
            NormKind::L2BoundaryTrace(_) => {
                return Err(CoreError::Shape("boundary trace norm needs a wall trace".into()));
            }
        };
        Ok(combine(kind, self.times(), &per_time, beta))
    }
}

impl Measured for ScalarField {
    /// The scalar is read as an angle-constant phase field (angular measure 2).
    fn norm(&self, kind: NormKind, beta: Option<f64>) -> Result<f64> {
        let h = self.grid().widths();
        let per_time: Vec<f64> = match kind {
            NormKind::SupTL2 | NormKind::L2SpaceTime => (0..self.times().len())
                .map(|n| 2.0 * self.slice(n).iter().zip(h).map(|(v, hi)| hi * v * v).sum::<f64>())
                .collect(),
            NormKind::L2L2L1 => (0..self.times().len())
                .map(|n| 4.0 * self.slice(n).iter().zip(h).map(|(v, hi)| hi * v * v).sum::<f64>())
                .collect(),
            NormKind::L2BoundaryTrace(_) => {
                return Err(CoreError::Shape("boundary trace norm needs a wall trace".into()));
            }
        };
        Ok(combine(kind, self.times(), &per_time, beta))
    }
}

impl Measured for WallTrace {
    fn norm(&self, kind: NormKind, beta: Option<f64>) -> Result<f64> {
        let range = match kind {
            NormKind::L2BoundaryTrace(r) => r,
            _ => return Err(CoreError::Shape("wall traces only support the boundary trace norm".into())),
        };
        let q = self.quadrature();
        let per_time: Vec<f64> = (0..self.times().len())
            .map(|n| {
                Side::BOTH
                    .iter()
                    .map(|&side| {
                        let tr = self.side(n, side);
                        (0..q.len())
                            .filter(|&k| match range {
                                HalfRange::Full => true,
                                HalfRange::Incoming => side.is_incoming(q.node(k)),
                                HalfRange::Outgoing => !side.is_incoming(q.node(k)),
                            })
                            .map(|k| q.weight(k) * q.node(k).abs() * tr[k] * tr[k])
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        Ok(combine(NormKind::L2SpaceTime, self.times(), &per_time, beta))
    }
}
