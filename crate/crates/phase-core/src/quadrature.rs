use crate::{CoreError, Result, Side};

/// Symmetric angular rule on `[−1, 1]`, nodes sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    /// Gauss–Legendre rule with `n` nodes (even, so that `μ = 0` is never a node).
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(CoreError::InvalidArgument(format!(
                "quadrature order must be even and >= 2, got {n}"
            )));
        }
        let (x, w) = gauss_legendre_on(n, -1.0, 1.0);
        Ok(Self { nodes: x, weights: w })
    }

    /// Composite Gauss–Legendre rule: `per_panel` nodes on each panel of the
    /// half range cut at `breaks` (strictly inside `(0, 1)`), mirrored to `μ < 0`.
    pub fn composite(breaks: &[f64], per_panel: usize) -> Result<Self> {
        if per_panel == 0 {
            return Err(CoreError::InvalidArgument("panels need at least one node".into()));
        }
        let mut cuts = vec![0.0];
        cuts.extend_from_slice(breaks);
        cuts.push(1.0);
        if cuts.windows(2).any(|p| p[1] <= p[0]) {
            return Err(CoreError::InvalidArgument("breaks must increase strictly inside (0, 1)".into()));
        }
        let (mut x, mut w) = (Vec::new(), Vec::new());
        for p in cuts.windows(2) {
            let (a, b) = gauss_legendre_on(per_panel, p[0], p[1]);
            x.extend(a);
            w.extend(b);
        }
        let nodes: Vec<f64> = x.iter().rev().map(|m| -m).chain(x.iter().copied()).collect();
        let weights: Vec<f64> = w.iter().rev().copied().chain(w.iter().copied()).collect();
        Self::from_parts(nodes, weights)
    }

    /// Build from explicit nodes and weights, checking the symmetry contract.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(CoreError::InvalidQuadrature("node/weight length mismatch".into()));
        }
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(CoreError::InvalidQuadrature("nodes must be strictly increasing".into()));
        }
        if nodes.iter().any(|&m| m == 0.0 || m.abs() > 1.0) || weights.iter().any(|&w| w <= 0.0) {
            return Err(CoreError::InvalidQuadrature(
                "nodes must lie in [-1,1] without 0 and weights must be positive".into(),
            ));
        }
        let n = nodes.len();
        for k in 0..n {
            if (nodes[k] + nodes[n - 1 - k]).abs() > 1e-14 || (weights[k] - weights[n - 1 - k]).abs() > 1e-14 {
                return Err(CoreError::InvalidQuadrature("rule is not symmetric about 0".into()));
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Index of the mirrored direction `−μ_k`.
    pub fn reflect(&self, k: usize) -> usize {
        self.nodes.len() - 1 - k
    }

    /// `Σ w_k f_k`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Velocity average `½ Σ w_k f_k`.
    pub fn average(&self, f: &[f64]) -> f64 {
        0.5 * self.integrate(f)
    }

    /// `½ Σ w_k μ_k²`, the diffusion coefficient of the limit heat equation.
    pub fn second_moment(&self) -> f64 {
        0.5 * self.nodes.iter().zip(&self.weights).map(|(m, w)| w * m * m).sum::<f64>()
    }

    /// Indices of directions entering through `side`.
    pub fn incoming(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| side.is_incoming(self.nodes[k]))
    }

    /// Indices of directions leaving through `side`.
    pub fn outgoing(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| !side.is_incoming(self.nodes[k]))
    }

    /// `Σ_{μ>0} w_k μ_k`; tends to ½ as the rule is refined.
    pub fn half_range_flux_weight(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).filter(|(m, _)| **m > 0.0).map(|(m, w)| w * m).sum()
    }

    /// Diffuse-reflection average of a full-range trace: `c Σ_{outgoing} w_k |μ_k| f_k`.
    ///
    /// The constant `c = 1 / Σ_{μ>0} w μ` is the discrete form of the slab value 2, so
    /// angle-constant traces are reproduced exactly and reflected flux balances outgoing flux.
    pub fn half_range_average(&self, trace: &[f64], side: Side) -> Result<f64> {
        if trace.len() != self.len() {
            return Err(CoreError::Shape(format!(
                "trace has {} entries, quadrature has {}",
                trace.len(),
                self.len()
            )));
        }
        let mut acc = 0.0;
        let mut count = 0;
        for k in self.outgoing(side) {
            acc += self.weights[k] * self.nodes[k].abs() * trace[k];
            count += 1;
        }
        if count == 0 {
            return Err(CoreError::InvalidQuadrature(format!("no outgoing directions at {} wall", side.name())));
        }
        Ok(acc / self.half_range_flux_weight())
    }

    /// Outward flux `Σ w_k μ_k n f_k` of a full-range trace.
    pub fn outward_flux(&self, trace: &[f64], side: Side) -> f64 {
        side.normal() * self.nodes.iter().zip(&self.weights).zip(trace).map(|((m, w), f)| w * m * f).sum::<f64>()
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`, ascending.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    for (xi, wi) in x.iter_mut().zip(w.iter_mut()) {
        *xi = c + r * *xi;
        *wi *= r;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
