use phase_core::SpatialGrid;

use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonBc {
    /// `ξ = 0` at both walls.
    Dirichlet,
    /// `ξ′ = 0` at both walls and `∫ξ = 0`.
    NeumannMeanZero,
}

/// Cell-centred solution of `−ξ″ = f`.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    /// `ξ` at cell centres.
    pub xi: Vec<f64>,
    /// `ξ′` at cell centres.
    pub dxi: Vec<f64>,
    /// `ξ″ = −f` at cell centres.
    pub d2xi: Vec<f64>,
    /// `ξ` at the left and right walls.
    pub wall: [f64; 2],
    /// `ξ′` at the left and right walls.
    pub wall_slope: [f64; 2],
}

/// Finite-volume solve of `−ξ″ = f` with cell averages `f`. Face gradients are
/// two-point differences; wall faces use the half cell for Dirichlet walls
/// and vanish for Neumann walls.
pub fn poisson_solve(grid: &SpatialGrid, f: &[f64], bc: PoissonBc) -> Result<PoissonSolution> {
    let n = grid.cells();
    if f.len() != n {
        return Err(LabError::Shape(format!("source has {} values, grid has {n} cells", f.len())));
    }
    if n < 3 {
        return Err(LabError::InvalidArgument("need at least three cells".into()));
    }
    let c = grid.centers();
    let h = grid.widths();
    let len = grid.length();
    // conductances of the interior faces
    let k: Vec<f64> = (0..n - 1).map(|i| 1.0 / (c[i + 1] - c[i])).collect();
    let (kl, kr) = match bc {
        PoissonBc::Dirichlet => (1.0 / c[0], 1.0 / (len - c[n - 1])),
        PoissonBc::NeumannMeanZero => (0.0, 0.0),
    };
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        diag[i] = if i > 0 { k[i - 1] } else { kl } + if i + 1 < n { k[i] } else { kr };
    }
    for i in 0..n - 1 {
        off[i] = -k[i];
    }
    let mut rhs: Vec<f64> = f.iter().zip(h).map(|(v, hi)| v * hi).collect();
    let xi = match bc {
        PoissonBc::Dirichlet => thomas(&off, &diag, &off, &rhs),
        PoissonBc::NeumannMeanZero => {
            let total: f64 = rhs.iter().sum();
            let scale: f64 = rhs.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if total.abs() > 1e-8 * scale {
                return Err(LabError::Solvability { integral: total });
            }
            // remove the round-off part of the mean, pin the last cell, then re-centre
            let shift = total / len;
            for (r, hi) in rhs.iter_mut().zip(h) {
                *r -= shift * hi;
            }
            let m = n - 1;
            let mut v = thomas(&off[..m - 1], &diag[..m], &off[..m - 1], &rhs[..m]);
            v.push(0.0);
            let mean = v.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / len;
            v.iter_mut().for_each(|x| *x -= mean);
            v
        }
    };
    // face gradients at the midpoints of neighbouring centres
    let mut pos = Vec::with_capacity(n + 1);
    let mut grad = Vec::with_capacity(n + 1);
    match bc {
        PoissonBc::Dirichlet => {
            pos.push(0.5 * c[0]);
            grad.push(xi[0] / c[0]);
        }
        PoissonBc::NeumannMeanZero => {
            pos.push(0.0);
            grad.push(0.0);
        }
    }
    for i in 0..n - 1 {
        pos.push(0.5 * (c[i] + c[i + 1]));
        grad.push((xi[i + 1] - xi[i]) * k[i]);
    }
    match bc {
        PoissonBc::Dirichlet => {
            pos.push(0.5 * (c[n - 1] + len));
            grad.push(-xi[n - 1] / (len - c[n - 1]));
        }
        PoissonBc::NeumannMeanZero => {
            pos.push(len);
            grad.push(0.0);
        }
    }
    let dxi: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (pos[i], pos[i + 1]);
            let w = (c[i] - a) / (b - a);
            (1.0 - w) * grad[i] + w * grad[i + 1]
        })
        .collect();
    let d2xi: Vec<f64> = f.iter().map(|v| -v).collect();
    let (wall, wall_slope) = match bc {
        PoissonBc::Dirichlet => {
            // the half-cell wall fluxes close the discrete balance of the wall cells
            ([0.0, 0.0], [grad[0], grad[n]])
        }
        PoissonBc::NeumannMeanZero => {
            let l = xi[0] + 0.5 * c[0] * c[0] * f[0];
            let d = len - c[n - 1];
            let r = xi[n - 1] + 0.5 * d * d * f[n - 1];
            ([l, r], [0.0, 0.0])
        }
    };
    Ok(PoissonSolution { xi, dxi, d2xi, wall, wall_slope })
}

/// Tridiagonal solve with sub-, main and super-diagonals.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { sup[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// `‖ξ‖_{H²}` from cell values of `ξ, ξ′, ξ″`.
pub fn h2_norm(grid: &SpatialGrid, s: &PoissonSolution) -> f64 {
    grid.widths()
        .iter()
        .enumerate()
        .map(|(i, h)| h * (s.xi[i].powi(2) + s.dxi[i].powi(2) + s.d2xi[i].powi(2)))
        .sum::<f64>()
        .sqrt()
}
