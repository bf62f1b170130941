//! Least-squares line fitting for log-log decay and counting-function
//! exponent estimation.

use crate::sum::CompensatedSum;

/// Result of an ordinary least-squares line fit y = slope*x + intercept.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1.0 for a degenerate flat fit with
    /// zero residual.
    pub r2: f64,
}

/// Fits a line through `points` by least squares, in input order.
///
/// Returns `None` with fewer than two points or when all abscissae
/// coincide.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mut sx = CompensatedSum::new();
    let mut sy = CompensatedSum::new();
    for &(x, y) in points {
        sx.add(x);
        sy.add(y);
    }
    let mx = sx.value() / nf;
    let my = sy.value() / nf;

    let mut sxx = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    for &(x, y) in points {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
    }
    let sxx = sxx.value();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy.value() / sxx;
    let intercept = my - slope * mx;

    let mut ss_res = CompensatedSum::new();
    let mut ss_tot = CompensatedSum::new();
    for &(x, y) in points {
        let r = y - (slope * x + intercept);
        ss_res.add(r * r);
        ss_tot.add((y - my) * (y - my));
    }
    let ss_res = ss_res.value();
    let ss_tot = ss_tot.value();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Least-squares fit of log(y) against log(x); points with a non-positive
/// coordinate are skipped.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let logged: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    linear_fit(&logged)
}
