//! Source wavelets, receivers, seismograms, error norms and fitted orders.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridGeometry;

/// Ricker wavelet `(1 - 2 pi^2 f^2 tau^2) exp(-pi^2 f^2 tau^2)`, `tau = t - t0`.
#[inline]
pub fn ricker(t: f64, f_m: f64, t0: f64) -> f64 {
    let a = (PI * f_m * (t - t0)).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub x: f64,
    pub y: f64,
    /// Peak frequency (Hz).
    pub f_m: f64,
    /// Delay (s); `1 / f_m` when absent.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl SourceSpec {
    pub fn new(x: f64, y: f64, f_m: f64) -> Self {
        Self { x, y, f_m, t0: None, amplitude: 1.0 }
    }

    pub fn delay(&self) -> f64 {
        self.t0.unwrap_or(1.0 / self.f_m)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * ricker(t, self.f_m, self.delay())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_m > 0.0 && self.f_m.is_finite()) {
            return Err(Error::config("source.f_m", format!("must be positive, got {}", self.f_m)));
        }
        if !(self.x.is_finite() && self.y.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::config("source", "position and amplitude must be finite"));
        }
        Ok(())
    }
}

/// Receivers along a horizontal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverLine {
    pub y: f64,
    pub xs: Vec<f64>,
    /// Record every `every` steps.
    #[serde(default = "one_usize")]
    pub every: usize,
}

fn one_usize() -> usize {
    1
}

impl ReceiverLine {
    /// Receivers from `x_start` to at most `x_end` spaced `spacing` apart.
    pub fn spaced(y: f64, x_start: f64, x_end: f64, spacing: f64) -> Self {
        let n = ((x_end - x_start) / spacing + 1e-9).floor() as usize + 1;
        Self { y, xs: (0..n).map(|k| x_start + k as f64 * spacing).collect(), every: 1 }
    }

    /// Nearest cell of every receiver.
    pub fn cells(&self, geom: &GridGeometry) -> Result<Vec<(usize, usize)>> {
        self.xs
            .iter()
            .map(|&x| geom.locate(x, self.y).ok_or(Error::SourceOutside { x, y: self.y }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Seismogram {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    /// One trace per receiver, each `times.len()` long.
    pub traces: Vec<Vec<f64>>,
}

impl Seismogram {
    pub fn new(xs: Vec<f64>) -> Self {
        let traces = vec![Vec::new(); xs.len()];
        Self { xs, times: Vec::new(), traces }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        debug_assert_eq!(row.len(), self.traces.len());
        self.times.push(t);
        for (tr, v) in self.traces.iter_mut().zip(row) {
            tr.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_rectangular(&self) -> bool {
        self.traces.iter().all(|t| t.len() == self.times.len())
    }
}

/// Piecewise-linear resampling of `(times, values)` at `at`. Times outside
/// the sampled range are an error.
pub fn resample_linear(times: &[f64], values: &[f64], at: &[f64]) -> Result<Vec<f64>> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Length(format!("{} times for {} samples", times.len(), values.len())));
    }
    let tol = 1e-9 * (times[times.len() - 1] - times[0]).abs().max(1e-300);
    at.iter()
        .map(|&t| {
            if t < times[0] - tol || t > times[times.len() - 1] + tol {
                return Err(Error::Length(format!("time {t} outside the reference record")));
            }
            let k = times.partition_point(|&s| s <= t);
            if k == 0 {
                return Ok(values[0]);
            }
            if k == times.len() {
                return Ok(values[k - 1]);
            }
            let (t0, t1) = (times[k - 1], times[k]);
            if t == t0 {
                return Ok(values[k - 1]);
            }
            let w = (t - t0) / (t1 - t0);
            Ok(values[k - 1] + w * (values[k] - values[k - 1]))
        })
        .collect()
}

/// `(max |a - b|, sum |a - b| * h)`.
pub fn error_norms(a: &[f64], b: &[f64], h: f64) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::Length(format!("trace of {} samples against reference of {}", a.len(), b.len())));
    }
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        max = max.max(d);
        sum += d;
    }
    Ok((max, sum * h))
}

/// Norms of a trace sampled at `times` against a reference trace on its own clock.
pub fn trace_error(times: &[f64], trace: &[f64], ref_times: &[f64], reference: &[f64]) -> Result<(f64, f64)> {
    let r = resample_linear(ref_times, reference, times)?;
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    error_norms(trace, &r, dt)
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_order(errors: &[f64], hs: &[f64]) -> Result<f64> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::Length(format!("{} errors for {} grid sizes (need at least 2)", errors.len(), hs.len())));
    }
    if let Some((index, &value)) = errors.iter().enumerate().find(|(_, e)| !(**e > 0.0)) {
        return Err(Error::NonPositiveError { index, value });
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Length("grid sizes must not all be equal".into()));
    }
    Ok(sxy / sxx)
}
