use super::SweepSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    /// Half-width of the accepted slope band, as a fraction of the
    /// midband gain.
    pub lin_tol: f64,
    /// Column of the DC series holding the output.
    pub dc_signal: usize,
    /// Column of the AC series holding the magnitude.
    pub ac_signal: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            lin_tol: 0.05,
            dc_signal: 0,
            ac_signal: 0,
        }
    }
}

/// Figures of merit of one amplifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Transimpedance slope at zero input (Ω).
    pub midband_gain: f64,
    /// Input interval (A) over which the local slope stays in band.
    pub linear_range: (f64, f64),
    pub bandwidth_3db: Option<f64>,
    /// Output at zero input (V).
    pub output_offset: f64,
    pub static_power: Option<f64>,
    /// (input amplitude A, THD fraction).
    pub thd_curve: Option<Vec<(f64, f64)>>,
}

/// Linear interpolation of `y` at `x = at` from an ascending grid.
fn interpolate(xs: &[f64], ys: &[f64], at: f64) -> Option<f64> {
    let j = xs.windows(2).position(|w| w[0] <= at && at <= w[1])?;
    let t = (at - xs[j]) / (xs[j + 1] - xs[j]);
    Some(ys[j] + t * (ys[j + 1] - ys[j]))
}

/// First crossing of `mag < mag[0]/√2`, interpolated in log-log space.
pub fn bandwidth_3db(ac: &SweepSeries, signal: usize) -> Result<f64> {
    let f = ac.axis();
    let m = ac.column(signal);
    let Some(&dc) = m.first() else {
        return Err(Error::Analysis("empty AC sweep".into()));
    };
    let target = dc / std::f64::consts::SQRT_2;
    let k = m
        .iter()
        .position(|&v| v < target)
        .ok_or_else(|| Error::Analysis("AC sweep does not reach the -3 dB point".into()))?;
    if k == 0 {
        return Err(Error::Analysis("AC sweep starts below the -3 dB point".into()));
    }
    let (lf0, lf1) = (f[k - 1].ln(), f[k].ln());
    let (lm0, lm1) = (m[k - 1].ln(), m[k].ln());
    Ok((lf0 + (target.ln() - lm0) * (lf1 - lf0) / (lm1 - lm0)).exp())
}

/// Gain, linear range and offset from a DC transfer sweep, bandwidth from
/// an AC sweep.
pub fn extract_metrics(
    dc: &SweepSeries,
    ac: Option<&SweepSeries>,
    static_power: Option<f64>,
    thd_curve: Option<Vec<(f64, f64)>>,
    options: &MetricOptions,
) -> Result<Metrics> {
    let dc = dc.ascending();
    let x = dc.axis();
    let y = dc.column(options.dc_signal);
    let ok: Vec<bool> = dc.points().iter().map(|p| p.converged).collect();
    if x.len() < 3 || !(x[0] < 0.0 && *x.last().unwrap() > 0.0) {
        return Err(Error::Analysis("DC sweep must bracket zero input".into()));
    }
    let no_region = || Error::Analysis("no linear region".into());

    // Points either side of zero; `lo == hi` when zero is a grid point.
    let (lo, hi) = match x.iter().position(|&v| v == 0.0) {
        Some(i) => (i - 1, i + 1),
        None => {
            let j = x.windows(2).position(|w| w[0] < 0.0 && w[1] > 0.0).ok_or_else(no_region)?;
            (j, j + 1)
        }
    };
    if !ok[lo] || !ok[hi] || !ok[(lo + hi) / 2] {
        return Err(no_region());
    }
    let gain = (y[hi] - y[lo]) / (x[hi] - x[lo]);
    let offset = interpolate(&x, &y, 0.0).ok_or_else(no_region)?;
    let scale = y.iter().fold(0.0_f64, |a, v| if v.is_finite() { a.max(v.abs()) } else { a });
    if !gain.is_finite() || gain == 0.0 || gain.abs() * (x[hi] - x[lo]) <= 1e-12 * scale {
        return Err(no_region());
    }

    let in_band = |j: usize| {
        ok[j] && ok[j + 1] && {
            let s = (y[j + 1] - y[j]) / (x[j + 1] - x[j]) / gain;
            (1.0 - options.lin_tol..=1.0 + options.lin_tol).contains(&s)
        }
    };
    // Intervals touching zero must all be in band, then grow outwards.
    let (mut first, mut last) = if hi - lo == 2 { (lo, lo + 1) } else { (lo, lo) };
    if !(first..=last).all(in_band) {
        return Err(no_region());
    }
    while first > 0 && in_band(first - 1) {
        first -= 1;
    }
    while last + 2 < x.len() && in_band(last + 1) {
        last += 1;
    }
    let linear_range = (x[first], x[last + 1]);

    let bandwidth = match ac {
        Some(ac) => Some(bandwidth_3db(ac, options.ac_signal)?),
        None => None,
    };
    Ok(Metrics {
        midband_gain: gain,
        linear_range,
        bandwidth_3db: bandwidth,
        output_offset: offset,
        static_power,
        thd_curve,
    })
}
