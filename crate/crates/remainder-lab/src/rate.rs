use crate::{LabError, Result};

/// Least-squares line through `(log ε, log value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(LabError::InvalidArgument(format!("rate fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(e, v)) = points.iter().find(|&&(e, v)| !(e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite())) {
        return Err(LabError::InvalidArgument(format!("rate fit needs positive values, got ({e}, {v})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(LabError::InvalidArgument("rate fit needs distinct ε values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, intercept, stderr })
}

/// Observed orders `log(e_j / e_{j+1}) / log(h_j / h_{j+1})` between successive
/// levels of a refinement study given as `(h, |error|)`.
pub fn refinement_orders(levels: &[(f64, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(LabError::InvalidArgument("a refinement study needs at least two levels".into()));
    }
    if levels.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(LabError::InvalidArgument("refinement levels need positive spacings and errors".into()));
    }
    levels
        .windows(2)
        .map(|p| {
            let r = p[0].0 / p[1].0;
            if r <= 1.0 {
                return Err(LabError::InvalidArgument("spacings must decrease".into()));
            }
            Ok((p[0].1 / p[1].1).ln() / r.ln())
        })
        .collect()
}
