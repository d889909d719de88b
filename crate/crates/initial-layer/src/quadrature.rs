//! Adaptive Gauss–Kronrod (7/15) for vector-valued integrands.

use crate::{LayerError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: usize = 40;

fn kronrod(f: &mut dyn FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for i in 0..dim {
        k[i] += WGK[7] * buf[i];
        g[i] += WG[3] * buf[i];
    }
    for j in 0..7 {
        for s in [-1.0, 1.0] {
            f(c + s * h * XGK[j], buf);
            for i in 0..dim {
                k[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    g[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..dim {
        k[i] *= h;
        err = err.max((k[i] - h * g[i]).abs());
    }
    (k, err)
}

/// `∫_a^b f` componentwise; `f(τ, out)` fills `out` of length `dim`.
/// Bisects until the Kronrod–Gauss difference is below `tol·(1 + |I|_∞)`.
pub fn integrate_adaptive(f: &mut dyn FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (k, err) = kronrod(f, lo, hi, dim, &mut buf);
        let scale = 1.0 + k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // share the tolerance in proportion to the interval
        let allowed = tol * scale * ((hi - lo) / (b - a)).max(1e-3);
        if err <= allowed || hi - lo < 1e-12 * (b - a).abs() {
            for (t, v) in total.iter_mut().zip(&k) {
                *t += v;
            }
        } else if depth >= MAX_DEPTH {
            return Err(LayerError::Quadrature { a: lo, b: hi, estimate: err });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}
