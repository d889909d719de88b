//! Discrete residuals of the energy identity and of the weak forms tested
//! with the Poisson potentials `ξ` and `ζ = ∂_t ξ`.
//!
//! Pairings are `⟨f, g⟩ = Σ_i h_i Σ_k w_k f g`; see [`TimeRule`] for the
//! time integrals.

use phase_core::norms::trapezoid;
use phase_core::quadrature::gauss_legendre_on;
use phase_core::{PhaseField, Quadrature, ScalarField, Side, SpatialGrid, WallTrace};
use transport_solver::BoundaryKind;

use crate::poisson::{poisson_solve, PoissonBc, PoissonSolution};
use crate::remainder::{time_derivative, Remainder, RemainderData};
use crate::{LabError, Result};

/// Both sides of one identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    pub lhs: f64,
    pub rhs: f64,
}

impl Balance {
    /// `|lhs − rhs| / max(|lhs|, |rhs|, 1)`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResiduals {
    pub green: Balance,
    pub kernel_xi: Balance,
    pub kernel_flux: Balance,
    pub kernel_zeta: Balance,
    /// `max_{t,x} |Σ_k w_k (R − R̄) ξ|`.
    pub orthogonality: f64,
}

impl IdentityResiduals {
    pub fn max_residual(&self) -> f64 {
        [self.green, self.kernel_xi, self.kernel_flux, self.kernel_zeta]
            .iter()
            .map(Balance::residual)
            .fold(0.0, f64::max)
    }
}

/// Poisson potentials of `R̄` at every record, with their time derivatives.
#[derive(Debug, Clone)]
pub struct Potentials {
    pub bc: PoissonBc,
    pub xi: Vec<PoissonSolution>,
    pub zeta: Vec<PoissonSolution>,
    /// Mean of `R̄` removed before each Neumann solve.
    pub removed_mean: Vec<f64>,
}

/// Dirichlet potentials for in-flow walls, mean-free Neumann ones otherwise.
pub fn poisson_bc_for(kind: BoundaryKind) -> PoissonBc {
    match kind {
        BoundaryKind::InFlow => PoissonBc::Dirichlet,
        _ => PoissonBc::NeumannMeanZero,
    }
}

/// Solves `−ξ″ = R̄(t)` at every record and differences in time for `ζ`.
/// For Neumann walls the slab mean of `R̄` is removed first; the identities
/// hold for any test function, so this only changes which `ξ` is used.
pub fn potentials(rbar: &ScalarField, bc: PoissonBc) -> Result<Potentials> {
    let grid = rbar.grid();
    let h = grid.widths();
    let len = grid.length();
    let nt = rbar.times().len();
    let mut xi = Vec::with_capacity(nt);
    let mut removed = Vec::with_capacity(nt);
    for n in 0..nt {
        let mut f = rbar.slice(n).to_vec();
        let m = match bc {
            PoissonBc::Dirichlet => 0.0,
            PoissonBc::NeumannMeanZero => f.iter().zip(h).map(|(v, hi)| v * hi).sum::<f64>() / len,
        };
        f.iter_mut().for_each(|v| *v -= m);
        removed.push(m);
        xi.push(poisson_solve(grid, &f, bc)?);
    }
    let t = rbar.times();
    let diff = |get: &dyn Fn(&PoissonSolution) -> Vec<f64>| -> Vec<Vec<f64>> {
        let series: Vec<Vec<f64>> = xi.iter().map(get).collect();
        let width = series[0].len();
        let mut out = vec![vec![0.0; width]; nt];
        for j in 0..width {
            let col: Vec<f64> = series.iter().map(|s| s[j]).collect();
            for (n, v) in time_derivative(t, &col).into_iter().enumerate() {
                out[n][j] = v;
            }
        }
        out
    };
    let z = diff(&|s| s.xi.clone());
    let dz = diff(&|s| s.dxi.clone());
    let d2z = diff(&|s| s.d2xi.clone());
    let wall = diff(&|s| s.wall.to_vec());
    let slope = diff(&|s| s.wall_slope.to_vec());
    let zeta = (0..nt)
        .map(|n| PoissonSolution {
            xi: z[n].clone(),
            dxi: dz[n].clone(),
            d2xi: d2z[n].clone(),
            wall: [wall[n][0], wall[n][1]],
            wall_slope: [slope[n][0], slope[n][1]],
        })
        .collect();
    Ok(Potentials { bc, xi, zeta, removed_mean: removed })
}

/// `⟨f, g⟩` for cell × angle slices.
fn pair(grid: &SpatialGrid, q: &Quadrature, f: &[f64], g: impl Fn(usize, usize) -> f64) -> f64 {
    let nv = q.len();
    f.chunks(nv)
        .zip(grid.widths())
        .enumerate()
        .map(|(i, (c, h))| h * c.iter().enumerate().map(|(k, v)| q.weight(k) * v * g(i, k)).sum::<f64>())
        .sum()
}

/// `Σ_walls Σ_k w_k μ_k n f_k φ(side, k)`.
fn wall_pair(q: &Quadrature, tr: &WallTrace, n: usize, phi: impl Fn(Side, usize) -> f64) -> f64 {
    Side::BOTH
        .iter()
        .map(|&side| {
            let v = tr.side(n, side);
            side.normal() * (0..q.len()).map(|k| q.weight(k) * q.node(k) * v[k] * phi(side, k)).sum::<f64>()
        })
        .sum()
}

/// Time discretisation of the integrals in the identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeRule {
    /// Trapezoid integrals; `∫⟨∂_t a, b⟩` pairs increments of `a` with the
    /// mean of `b` at both ends.
    #[default]
    Trapezoid,
    /// Right-endpoint integrals and pairings, the quadrature implied by a
    /// backward-Euler march recorded at every step.
    Implicit,
}

impl TimeRule {
    /// Weights of `b(t_{n+1})` and `b(t_n)` in a pairing.
    fn ends(self) -> (f64, f64) {
        match self {
            TimeRule::Trapezoid => (0.5, 0.5),
            TimeRule::Implicit => (1.0, 0.0),
        }
    }

    fn integrate(self, t: &[f64], v: &[f64]) -> f64 {
        match self {
            TimeRule::Trapezoid => trapezoid(t, v),
            TimeRule::Implicit if t.len() == 1 => v[0],
            TimeRule::Implicit => t.windows(2).zip(&v[1..]).map(|(p, x)| (p[1] - p[0]) * x).sum(),
        }
    }
}

/// `∫⟨∂_t a, b⟩ dt` as a sum over record intervals.
fn time_pairing(nt: usize, mut inc: impl FnMut(usize) -> f64) -> f64 {
    (0..nt.saturating_sub(1)).map(&mut inc).sum()
}

fn check_shapes(rem: &Remainder, data: &RemainderData) -> Result<PhaseField> {
    let s = data.source();
    if !s.same_shape(&rem.field) {
        return Err(LabError::Shape("source and remainder live on different grids".into()));
    }
    if rem.trace.times()[..] != rem.field.times()[..] {
        return Err(LabError::Shape("remainder trace and field have different records".into()));
    }
    Ok(s)
}

/// Energy identity of the remainder problem on `[0, T]`:
/// `ε/2 (‖R(T)‖² − ‖R(0)‖²) + ½∫∫_Γ R² μ n + ε⁻¹∫‖R − R̄‖² = ∫⟨S, R⟩`.
pub fn green_balance(rem: &Remainder, data: &RemainderData, rule: TimeRule) -> Result<Balance> {
    let s = check_shapes(rem, data)?;
    let f = &rem.field;
    let (grid, q, t) = (f.grid().clone(), f.quadrature().clone(), f.times().clone());
    let nt = t.len();
    let eps = f.eps();
    let fl = f.fluctuation();
    let sq = |n: usize| pair(&grid, &q, f.slice(n), |i, k| f.at(n, i, k));
    let wall: Vec<f64> = (0..nt).map(|n| 0.5 * wall_pair(&q, &rem.trace, n, |side, k| rem.trace.side(n, side)[k])).collect();
    let diss: Vec<f64> = (0..nt).map(|n| pair(&grid, &q, fl.slice(n), |i, k| fl.at(n, i, k)) / eps).collect();
    let src: Vec<f64> = (0..nt).map(|n| pair(&grid, &q, s.slice(n), |i, k| f.at(n, i, k))).collect();
    let time = match rule {
        TimeRule::Trapezoid => 0.5 * eps * (sq(nt - 1) - sq(0)),
        TimeRule::Implicit => {
            eps * time_pairing(nt, |n| {
                let d: Vec<f64> = f.slice(n + 1).iter().zip(f.slice(n)).map(|(a, b)| a - b).collect();
                pair(&grid, &q, &d, |i, k| f.at(n + 1, i, k))
            })
        }
    };
    let lhs = time + rule.integrate(&t, &wall) + rule.integrate(&t, &diss);
    Ok(Balance { lhs, rhs: rule.integrate(&t, &src) })
}

/// The three weak forms tested with `ξ`, `μ ξ′` and `ε ζ`.
pub fn kernel_balances(rem: &Remainder, data: &RemainderData, pot: &Potentials, rule: TimeRule) -> Result<[Balance; 3]> {
    let s = check_shapes(rem, data)?;
    let f = &rem.field;
    let (grid, q, t) = (f.grid().clone(), f.quadrature().clone(), f.times().clone());
    let nt = t.len();
    if pot.xi.len() != nt {
        return Err(LabError::Shape("one potential per record is required".into()));
    }
    let eps = f.eps();
    let rbar = f.velocity_average();
    let fl = f.fluctuation();
    let tr = &rem.trace;
    let mu = |k: usize| q.node(k);
    let (w1, w0) = rule.ends();

    // tested with ξ
    let dt_term = time_pairing(nt, |n| {
        let (a, b) = (rbar.slice(n + 1), rbar.slice(n));
        let (x1, x0) = (&pot.xi[n + 1].xi, &pot.xi[n].xi);
        2.0 * (0..a.len()).map(|i| grid.widths()[i] * (a[i] - b[i]) * (w1 * x1[i] + w0 * x0[i])).sum::<f64>()
    });
    let rest: Vec<f64> = (0..nt)
        .map(|n| {
            let p = &pot.xi[n];
            wall_pair(&q, tr, n, |side, _| p.wall[side.index()]) - pair(&grid, &q, fl.slice(n), |i, k| mu(k) * p.dxi[i])
        })
        .collect();
    let src: Vec<f64> = (0..nt).map(|n| pair(&grid, &q, s.slice(n), |i, _| pot.xi[n].xi[i])).collect();
    let k_xi = Balance { lhs: eps * dt_term + rule.integrate(&t, &rest), rhs: rule.integrate(&t, &src) };

    // tested with μ ξ′
    let dt_term = time_pairing(nt, |n| {
        let (a, b) = (f.slice(n + 1), f.slice(n));
        let (d1, d0) = (&pot.xi[n + 1].dxi, &pot.xi[n].dxi);
        let nv = q.len();
        (0..a.len())
            .map(|j| {
                let (i, k) = (j / nv, j % nv);
                grid.widths()[i] * q.weight(k) * (a[j] - b[j]) * mu(k) * (w1 * d1[i] + w0 * d0[i])
            })
            .sum::<f64>()
    });
    let rest: Vec<f64> = (0..nt)
        .map(|n| {
            let p = &pot.xi[n];
            wall_pair(&q, tr, n, |side, k| mu(k) * p.wall_slope[side.index()])
                - pair(&grid, &q, f.slice(n), |i, k| mu(k) * mu(k) * p.d2xi[i])
                + pair(&grid, &q, fl.slice(n), |i, k| mu(k) * p.dxi[i]) / eps
        })
        .collect();
    let src: Vec<f64> = (0..nt).map(|n| pair(&grid, &q, s.slice(n), |i, k| mu(k) * pot.xi[n].dxi[i])).collect();
    let k_flux = Balance { lhs: eps * dt_term + rule.integrate(&t, &rest), rhs: rule.integrate(&t, &src) };

    // tested with ε ζ
    let dt_term = time_pairing(nt, |n| {
        let (a, b) = (rbar.slice(n + 1), rbar.slice(n));
        let (z1, z0) = (&pot.zeta[n + 1].xi, &pot.zeta[n].xi);
        2.0 * (0..a.len()).map(|i| grid.widths()[i] * (a[i] - b[i]) * (w1 * z1[i] + w0 * z0[i])).sum::<f64>()
    });
    let rest: Vec<f64> = (0..nt)
        .map(|n| {
            let p = &pot.zeta[n];
            wall_pair(&q, tr, n, |side, _| p.wall[side.index()]) - pair(&grid, &q, fl.slice(n), |i, k| mu(k) * p.dxi[i])
        })
        .collect();
    let src: Vec<f64> = (0..nt).map(|n| pair(&grid, &q, s.slice(n), |i, _| pot.zeta[n].xi[i])).collect();
    let k_zeta = Balance { lhs: eps * eps * dt_term + eps * rule.integrate(&t, &rest), rhs: eps * rule.integrate(&t, &src) };

    Ok([k_xi, k_flux, k_zeta])
}

/// `max_{t,x} |Σ_k w_k (R − R̄) ξ|`.
pub fn orthogonality(rem: &Remainder, pot: &Potentials) -> f64 {
    let fl = rem.field.fluctuation();
    let q = rem.field.quadrature();
    let nv = q.len();
    (0..fl.times().len())
        .flat_map(|n| {
            let xi = &pot.xi[n].xi;
            fl.slice(n)
                .chunks(nv)
                .zip(xi)
                .map(|(c, x)| (q.integrate(c) * x).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Time rules for the energy identity and for the kernel identities.
///
/// The default pairs the energy identity with [`TimeRule::Implicit`], which
/// removes the backward-Euler dissipation `ε/2 Σ‖ΔR‖²` from the balance, and
/// the linear kernel identities with [`TimeRule::Trapezoid`], which is second
/// order on the smooth approximation `u_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityRules {
    pub green: TimeRule,
    pub kernels: TimeRule,
}

impl Default for IdentityRules {
    fn default() -> Self {
        Self { green: TimeRule::Implicit, kernels: TimeRule::Trapezoid }
    }
}

/// Green's identity and the three kernel identities for one run.
pub fn identity_residuals(rem: &Remainder, data: &RemainderData, rules: IdentityRules) -> Result<IdentityResiduals> {
    let pot = potentials(&rem.field.velocity_average(), poisson_bc_for(rem.kind))?;
    let [kernel_xi, kernel_flux, kernel_zeta] = kernel_balances(rem, data, &pot, rules.kernels)?;
    Ok(IdentityResiduals {
        green: green_balance(rem, data, rules.green)?,
        kernel_xi,
        kernel_flux,
        kernel_zeta,
        orthogonality: orthogonality(rem, &pot),
    })
}

/// Diffuse walls: `∫_Γ R² μ n` against `‖(1 − P)R‖²_{out} − ‖H‖²_{in}` at
/// every record; returns the largest discrepancy.
pub fn diffuse_boundary_identity(rem: &Remainder, data: &RemainderData) -> Result<f64> {
    if rem.kind != BoundaryKind::Diffuse {
        return Err(LabError::InvalidArgument("the boundary identity needs diffuse walls".into()));
    }
    let tr = &rem.trace;
    let q = tr.quadrature();
    let mut worst: f64 = 0.0;
    for n in 0..tr.times().len() {
        for side in Side::BOTH {
            let r = tr.side(n, side);
            let hb = data.boundary.side(n, side);
            let lhs = side.normal() * (0..q.len()).map(|k| q.weight(k) * q.node(k) * r[k] * r[k]).sum::<f64>();
            let p = q.half_range_average(r, side)?;
            let out: f64 = q.outgoing(side).map(|k| q.weight(k) * q.node(k).abs() * (r[k] - p).powi(2)).sum();
            let inc: f64 = q.incoming(side).map(|k| q.weight(k) * q.node(k).abs() * hb[k] * hb[k]).sum();
            worst = worst.max((lhs - (out - inc)).abs());
        }
    }
    Ok(worst)
}

/// Specular walls: the wall pairings `∫ R ξ μ n` and `∫ R μ ξ′ μ n`; returns
/// the largest magnitude over records.
pub fn specular_pairings(rem: &Remainder, pot: &Potentials) -> Result<f64> {
    if rem.kind != BoundaryKind::Specular {
        return Err(LabError::InvalidArgument("the wall pairings need specular walls".into()));
    }
    let tr = &rem.trace;
    let q = tr.quadrature();
    let mut worst: f64 = 0.0;
    for (n, p) in pot.xi.iter().enumerate() {
        let a = wall_pair(q, tr, n, |side, _| p.wall[side.index()]);
        let b = wall_pair(q, tr, n, |side, k| q.node(k) * p.wall_slope[side.index()]);
        worst = worst.max(a.abs()).max(b.abs());
    }
    Ok(worst)
}

/// Green's identity `∫∫ (μ ∂_x f) g + f (μ ∂_x g) = ∫_Γ f g μ n` for smooth
/// `f, g` on `(0, L)`, integrated with `panels` Gauss panels in `x`.
pub fn green_identity_smooth(
    q: &Quadrature,
    length: f64,
    panels: usize,
    f: impl Fn(f64, f64) -> f64,
    fx: impl Fn(f64, f64) -> f64,
    g: impl Fn(f64, f64) -> f64,
    gx: impl Fn(f64, f64) -> f64,
) -> Balance {
    let (gn, gw) = gauss_legendre_on(8, 0.0, length / panels as f64);
    let mut lhs = 0.0;
    for p in 0..panels {
        let x0 = p as f64 * length / panels as f64;
        for (&xn, &w) in gn.iter().zip(&gw) {
            let x = x0 + xn;
            for k in 0..q.len() {
                let m = q.node(k);
                lhs += w * q.weight(k) * m * (fx(x, m) * g(x, m) + f(x, m) * gx(x, m));
            }
        }
    }
    let rhs = Side::BOTH
        .iter()
        .map(|&side| {
            let x = if side == Side::Left { 0.0 } else { length };
            side.normal() * (0..q.len()).map(|k| q.weight(k) * q.node(k) * f(x, q.node(k)) * g(x, q.node(k))).sum::<f64>()
        })
        .sum();
    Balance { lhs, rhs }
}
