use phase_core::norms::{HalfRange, Measured, NormKind};
use phase_core::{Side, WallTrace};
use transport_solver::BoundaryKind;

use crate::remainder::Remainder;
use crate::{LabError, Result};

/// Weight in the energy inequality.
pub const DELTA: f64 = 0.1;

/// Norms of one remainder that enter the estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderNorms {
    pub eps: f64,
    /// `sup_t ‖R‖_{L²_{x,μ}}`.
    pub sup_t_l2: f64,
    /// `‖R̄‖_{L²_{t,x,μ}}`.
    pub rbar: f64,
    /// `‖R − R̄‖_{L²_{t,x,μ}}`.
    pub fluct: f64,
    /// Outgoing wall trace; for diffuse walls `‖(1 − P)R‖` on the outgoing half.
    pub trace: f64,
}

/// `‖(1 − P)f‖` on outgoing directions, `P` the diffuse average.
pub fn diffuse_defect_norm(tr: &WallTrace) -> Result<f64> {
    let q = tr.quadrature();
    let mut d = tr.clone();
    for n in 0..tr.times().len() {
        for side in Side::BOTH {
            let p = q.half_range_average(tr.side(n, side), side)?;
            d.side_mut(n, side).iter_mut().for_each(|v| *v -= p);
        }
    }
    Ok(d.norm(NormKind::L2BoundaryTrace(HalfRange::Outgoing), None)?)
}

pub fn compute_norms(rem: &Remainder) -> Result<RemainderNorms> {
    let f = &rem.field;
    let trace = match rem.kind {
        BoundaryKind::Diffuse => diffuse_defect_norm(&rem.trace)?,
        _ => rem.trace.norm(NormKind::L2BoundaryTrace(HalfRange::Outgoing), None)?,
    };
    Ok(RemainderNorms {
        eps: f.eps(),
        sup_t_l2: f.norm(NormKind::SupTL2, None)?,
        rbar: f.velocity_average().norm(NormKind::L2SpaceTime, None)?,
        fluct: f.fluctuation().norm(NormKind::L2SpaceTime, None)?,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// `sup‖R‖² + ε⁻¹ trace² + ε⁻²‖R − R̄‖² ≤ C (δ ε⁻¹ ‖R̄‖² + δ⁻¹)`.
    Energy,
    /// `‖R̄‖² ≤ C (ε sup‖R‖² + ‖R − R̄‖² + trace² + ε)`.
    Kernel,
}

/// Smallest admissible constant per `ε` and its spread over the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateCheck {
    pub kind: EstimateKind,
    pub delta: f64,
    pub constants: Vec<(f64, f64)>,
    /// `max C / min C`; 1 when every constant vanishes.
    pub spread: f64,
    /// Smallest ratio `(C·right side) / left side` for `C = 2 · min C`, ∞
    /// when every left side vanishes.
    pub margin: f64,
}

impl EstimateCheck {
    /// Bounded trend: the constants stay within a factor of two.
    pub fn passes(&self) -> bool {
        self.spread <= 2.0
    }
}

fn sides(kind: EstimateKind, n: &RemainderNorms) -> (f64, f64) {
    let e = n.eps;
    match kind {
        EstimateKind::Energy => (
            n.sup_t_l2.powi(2) + n.trace.powi(2) / e + n.fluct.powi(2) / (e * e),
            DELTA * n.rbar.powi(2) / e + 1.0 / DELTA,
        ),
        EstimateKind::Kernel => (n.rbar.powi(2), e * n.sup_t_l2.powi(2) + n.fluct.powi(2) + n.trace.powi(2) + e),
    }
}

/// Ratio of the largest to the smallest value; 1 for all-zero input.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn estimate_check(norms: &[RemainderNorms], kind: EstimateKind) -> Result<EstimateCheck> {
    if norms.is_empty() {
        return Err(LabError::InvalidArgument("no norms to check".into()));
    }
    let constants: Vec<(f64, f64)> = norms
        .iter()
        .map(|n| {
            let (l, r) = sides(kind, n);
            (n.eps, l / r)
        })
        .collect();
    let cs: Vec<f64> = constants.iter().map(|c| c.1).collect();
    let c = 2.0 * cs.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = norms
        .iter()
        .map(|n| {
            let (l, r) = sides(kind, n);
            if l == 0.0 {
                f64::INFINITY
            } else {
                c * r / l
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok(EstimateCheck { kind, delta: DELTA, constants, spread: spread(&cs), margin })
}

/// `ε^{−1/2}‖R̄‖` and `ε^{−1}‖R − R̄‖` across a sweep with their spreads.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRemainder {
    pub rbar: Vec<f64>,
    pub fluct: Vec<f64>,
    pub rbar_spread: f64,
    pub fluct_spread: f64,
}

pub fn scaled_remainder(norms: &[RemainderNorms]) -> ScaledRemainder {
    let rbar: Vec<f64> = norms.iter().map(|n| n.rbar / n.eps.sqrt()).collect();
    let fluct: Vec<f64> = norms.iter().map(|n| n.fluct / n.eps).collect();
    ScaledRemainder { rbar_spread: spread(&rbar), fluct_spread: spread(&fluct), rbar, fluct }
}
