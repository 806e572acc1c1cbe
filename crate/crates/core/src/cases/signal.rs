//! Oscillation period from a sampled signal.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::{Result, SimError};

/// Upward crossings of `values - (a + b t)`, linearly interpolated.
fn upward_crossings(times: &[f64], values: &[f64], offset: f64, slope: f64) -> Vec<f64> {
    let centred = |k: usize| values[k] - offset - slope * times[k];
    let mut crossings = Vec::new();
    for k in 1..times.len() {
        let (y0, y1) = (centred(k - 1), centred(k));
        if y0 < 0.0 && y1 >= 0.0 {
            let s = y0 / (y0 - y1);
            crossings.push(times[k - 1] + s * (times[k] - times[k - 1]));
        }
    }
    crossings
}

/// Least-squares fit of `a + b t + c sin(w t) + d cos(w t)`; returns the
/// trend `(a, b)` and the residual sum of squares.
fn fit_with_trend(times: &[f64], values: &[f64], omega: f64) -> Option<((f64, f64), f64)> {
    let t0 = times[0];
    let basis = |t: f64| {
        let s = t - t0;
        Vector4::new(1.0, s, (omega * s).sin(), (omega * s).cos())
    };
    let mut normal = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let phi = basis(t);
        normal += phi * phi.transpose();
        rhs += phi * y;
    }
    let coeffs = normal.cholesky()?.solve(&rhs);
    let residual = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (y - basis(t).dot(&coeffs)).powi(2))
        .sum();
    Some(((coeffs[0] - coeffs[1] * t0, coeffs[1]), residual))
}

fn mean_spacing(crossings: &[f64]) -> f64 {
    (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
}

/// Mean spacing of successive upward zero crossings of the signal minus its
/// trend.
///
/// A first estimate uses the plain mean. The trend line is then fitted
/// jointly with a sinusoid whose frequency is refined by golden-section
/// search near the estimate, so drift does not bias the crossings. Fails
/// with fewer than two crossings.
pub fn extract_period(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(SimError::Signal("time and value columns differ in length".into()));
    }
    if times.len() < 3 {
        return Err(SimError::Signal("too few samples".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let crossings = upward_crossings(times, values, mean, 0.0);
    if crossings.len() < 2 {
        return Err(SimError::Signal(format!(
            "need two same-direction zero crossings, found {}",
            crossings.len()
        )));
    }
    let omega0 = 2.0 * PI / mean_spacing(&crossings);
    let misfit = |omega: f64| fit_with_trend(times, values, omega).map_or(f64::INFINITY, |f| f.1);
    let (mut low, mut high) = (0.8 * omega0, 1.25 * omega0);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (high - ratio * (high - low), low + ratio * (high - low));
    let (mut fa, mut fb) = (misfit(a), misfit(b));
    for _ in 0..80 {
        if fa < fb {
            high = b;
            (b, fb) = (a, fa);
            a = high - ratio * (high - low);
            fa = misfit(a);
        } else {
            low = a;
            (a, fa) = (b, fb);
            b = low + ratio * (high - low);
            fb = misfit(b);
        }
    }
    let Some(((offset, slope), _)) = fit_with_trend(times, values, 0.5 * (low + high)) else {
        return Ok(mean_spacing(&crossings));
    };
    let detrended = upward_crossings(times, values, offset, slope);
    if detrended.len() < 2 {
        return Ok(mean_spacing(&crossings));
    }
    Ok(mean_spacing(&detrended))
}
