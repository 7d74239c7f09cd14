//! Empirical exponent estimation: least-squares fits of log value against
//! log predictor, used by sweep summaries to read growth rates off a grid.

use charlab::{Error, Result};

/// A fitted power law `value ≈ e^intercept · predictor^slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Least-squares fit of `ln value` against `ln predictor` over
/// `(predictor, value)` rows.
///
/// Requires at least three rows, strictly positive coordinates, and a
/// predictor that actually varies; each violation is a domain error rather
/// than a silently meaningless slope.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<ExponentFit> {
    if rows.len() < 3 {
        return Err(Error::Domain(format!(
            "exponent fit needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    for &(x, y) in rows {
        if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "exponent fit needs positive finite rows, got ({x}, {y})"
            )));
        }
    }
    // Catch the degenerate predictor by value, not by the centered sum of
    // squares: rounding in the mean leaves sxx a hair above zero when all
    // the x are equal, which would launder noise into a huge fake slope.
    if rows.iter().all(|&(x, _)| x == rows[0].0) {
        return Err(Error::Domain("degenerate predictor range: all values equal".into()));
    }
    let logs: Vec<(f64, f64)> = rows.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("degenerate predictor range: all values equal".into()));
    }
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss: f64 = logs
        .iter()
        .map(|&(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(ExponentFit { slope, intercept, residual: (ss / n).sqrt() })
}
