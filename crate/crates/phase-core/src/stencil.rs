//! Finite-difference and interpolation weights on arbitrary node sets.

/// Fornberg weights: `w[d][j]` approximates the `d`-th derivative at `z`
/// from values at `xs[j]`, for `d = 0..=m`.
pub fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Start index of a window of `len` nodes around position `i` clamped to `[0, n)`.
fn window(i: usize, len: usize, n: usize) -> usize {
    let half = len / 2;
    i.saturating_sub(half).min(n.saturating_sub(len))
}

/// `d`-th derivative of nodal data, centred stencils in the interior and
/// one-sided stencils of the same width near the ends.
pub fn derivative(xs: &[f64], ys: &[f64], d: usize) -> Vec<f64> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    if d == 0 {
        return ys.to_vec();
    }
    let len = (2 * d.div_ceil(2) + 3).min(n);
    assert!(len > d, "not enough nodes for derivative order {d}");
    (0..n)
        .map(|i| {
            let s = window(i, len, n);
            let w = fornberg(xs[i], &xs[s..s + len], d);
            w[d].iter().zip(&ys[s..s + len]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Precomputed derivative operator for a fixed node set.
#[derive(Debug, Clone)]
pub struct DerivativeOperator {
    starts: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl DerivativeOperator {
    pub fn new(xs: &[f64], d: usize) -> Self {
        let n = xs.len();
        let len = (2 * d.div_ceil(2) + 3).min(n);
        let mut starts = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let s = window(i, len, n);
            starts.push(s);
            weights.push(fornberg(xs[i], &xs[s..s + len], d).swap_remove(d));
        }
        Self { starts, weights }
    }

    pub fn apply(&self, ys: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let s = self.starts[i];
            *o = self.weights[i].iter().zip(&ys[s..]).map(|(a, b)| a * b).sum();
        }
    }
}

/// Lagrange interpolation of order `order` (using `order + 1` nearest nodes).
#[derive(Debug, Clone)]
pub struct Interpolator {
    xs: Vec<f64>,
    order: usize,
}

impl Interpolator {
    pub fn new(xs: Vec<f64>, order: usize) -> Self {
        assert!(xs.len() > order, "interpolation order exceeds node count");
        Self { xs, order }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    /// Stencil start and weights for evaluation at `z`.
    pub fn weights(&self, z: f64) -> (usize, Vec<f64>) {
        let n = self.xs.len();
        let len = self.order + 1;
        let j = self.xs.partition_point(|&x| x < z);
        let s = window(j, len, n);
        let w = fornberg(z, &self.xs[s..s + len], 0).swap_remove(0);
        (s, w)
    }

    pub fn eval(&self, ys: &[f64], z: f64) -> f64 {
        let (s, w) = self.weights(z);
        w.iter().zip(&ys[s..]).map(|(a, b)| a * b).sum()
    }
}
