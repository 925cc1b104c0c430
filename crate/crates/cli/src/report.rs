//! Least-squares scaling-exponent fits for experiment reports.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub rows_used: usize,
}

/// Ordinary least squares of `ln(error)` against `ln(q)` over the rows with
/// strictly positive error. Needs at least five such rows spanning more than
/// one modulus.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<ExponentFit, String> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(q, err)| q > 0.0 && err > 0.0)
        .map(|&(q, err)| (q.ln(), err.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(format!(
            "exponent fit needs at least 5 positive-error rows, got {}",
            pts.len()
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err("exponent fit needs at least two distinct moduli".to_string());
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
        rows_used: pts.len(),
    })
}
