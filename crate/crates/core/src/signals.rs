//! Uniformly sampled signals and the causal primitives built on them.
//!
//! Every averaging block here is causal and assumes the signal was at rest
//! (zero) before its first sample. Batch functions are thin drivers over the
//! streaming blocks ([`TrailingAverage`], [`BlockHold`]), so a closed-loop
//! simulation that feeds samples one at a time produces bit-identical
//! results to the batch form applied to the recorded history.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical unit carried by a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    MW,
    Hz,
    MWh,
    Dimensionless,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::MW => "MW",
            Unit::Hz => "Hz",
            Unit::MWh => "MWh",
            Unit::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// Converts a duration in seconds to a whole number of samples of length `dt`.
///
/// Fails if `seconds` is negative or not an integer multiple of `dt`
/// (relative tolerance 1e-9).
pub fn samples_for(seconds: f64, dt: f64, what: &str) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("sample interval must be positive, got {dt}")));
    }
    if !seconds.is_finite() || seconds < 0.0 {
        return Err(Error::Config(format!("{what} must be a finite nonnegative duration, got {seconds}")));
    }
    let ratio = seconds / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::Config(format!("{what} ({seconds} s) is not an integer multiple of dt ({dt} s)")));
    }
    Ok(rounded as usize)
}

/// A uniformly sampled, finite, real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    t0: f64,
    unit: Unit,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>, unit: Unit) -> Result<Self> {
        Self::with_start(dt, 0.0, values, unit)
    }

    pub fn with_start(dt: f64, t0: f64, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Input(format!("sample interval must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::Input("start time must be finite".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(TimeSeries { dt, t0, unit, values })
    }

    pub fn zeros(dt: f64, len: usize, unit: Unit) -> Result<Self> {
        Self::new(dt, vec![0.0; len], unit)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time stamp of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    /// Same sampling grid and unit, new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::Input(format!(
                "length mismatch: expected {}, got {}",
                self.len(),
                values.len()
            )));
        }
        Self::with_start(self.dt, self.t0, values, self.unit)
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(|v| factor * v)
    }

    /// Checks that `other` can be combined sample-by-sample with `self`.
    pub fn check_aligned(&self, other: &TimeSeries) -> Result<()> {
        if self.unit != other.unit {
            return Err(Error::Unit { expected: self.unit, found: other.unit });
        }
        if self.dt != other.dt || self.t0 != other.t0 || self.len() != other.len() {
            return Err(Error::Input(format!(
                "series not aligned: (dt={}, t0={}, len={}) vs (dt={}, t0={}, len={})",
                self.dt,
                self.t0,
                self.len(),
                other.dt,
                other.t0,
                other.len()
            )));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &TimeSeries, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_aligned(other)?;
        self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &TimeSeries) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TimeSeries) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Input("series is empty".into()))
        } else {
            Ok(())
        }
    }

    pub fn require_unit(&self, unit: Unit) -> Result<()> {
        if self.unit != unit {
            Err(Error::Unit { expected: unit, found: self.unit })
        } else {
            Ok(())
        }
    }
}

/// Window length `a` and output delay `d` of a trailing moving average, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingAverageConfig {
    pub window_seconds: f64,
    #[serde(default)]
    pub delay_seconds: f64,
}

impl MovingAverageConfig {
    pub fn new(window_seconds: f64) -> Self {
        MovingAverageConfig { window_seconds, delay_seconds: 0.0 }
    }

    pub fn with_delay(mut self, delay_seconds: f64) -> Self {
        self.delay_seconds = delay_seconds;
        self
    }

    /// Window and delay in samples for sample interval `dt`.
    pub fn samples(&self, dt: f64) -> Result<(usize, usize)> {
        if !(self.window_seconds >= dt) {
            return Err(Error::Config(format!(
                "moving-average window ({} s) must be at least dt ({dt} s)",
                self.window_seconds
            )));
        }
        let n = samples_for(self.window_seconds, dt, "moving-average window")?;
        let d = samples_for(self.delay_seconds, dt, "moving-average delay")?;
        Ok((n, d))
    }
}

/// Streaming causal moving average over the last `n` samples, zero-padded
/// before the first sample.
#[derive(Debug, Clone)]
pub struct TrailingAverage {
    window: VecDeque<f64>,
    len: usize,
    sum: f64,
}

impl TrailingAverage {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "window length must be positive");
        TrailingAverage { window: VecDeque::with_capacity(len), len, sum: 0.0 }
    }

    pub fn window_len(&self) -> usize {
        self.len
    }

    /// Pushes one sample and returns the average of the last `len` samples.
    pub fn push(&mut self, x: f64) -> f64 {
        if self.window.len() == self.len {
            let old = self.window.pop_front().unwrap_or(0.0);
            self.sum -= old;
        }
        self.window.push_back(x);
        self.sum += x;
        self.sum / self.len as f64
    }
}

/// Causal trailing moving average `y(k + d) = (1/n) Σ_{j=k-n+1..k} x(j)`.
///
/// Samples before the start are taken as zero, the first `d` output samples
/// are zero, and anything shifted past the end by the delay is dropped.
pub fn moving_average(x: &TimeSeries, cfg: &MovingAverageConfig) -> Result<TimeSeries> {
    x.require_nonempty()?;
    let (n, d) = cfg.samples(x.dt())?;
    let mut avg = TrailingAverage::new(n);
    let mut out = vec![0.0; x.len()];
    for (k, &v) in x.values().iter().enumerate() {
        let y = avg.push(v);
        if let Some(slot) = out.get_mut(k + d) {
            *slot = y;
        } else {
            break;
        }
    }
    x.with_values(out)
}

/// Negated moving average; `x + offset_signal(x)` is the band that remains
/// after the slow part has been handed over.
pub fn offset_signal(x: &TimeSeries, cfg: &MovingAverageConfig) -> Result<TimeSeries> {
    moving_average(x, cfg)?.map(|v| -v)
}

/// Streaming sample-and-hold on fixed blocks of `block` samples.
///
/// The value pushed at the first sample of block `m` is held for the whole
/// block; block 0 holds zero.
#[derive(Debug, Clone)]
pub struct BlockHold {
    block: usize,
    index: usize,
    held: f64,
}

impl BlockHold {
    pub fn new(block: usize) -> Self {
        assert!(block > 0, "block length must be positive");
        BlockHold { block, index: 0, held: 0.0 }
    }

    pub fn push(&mut self, x: f64) -> f64 {
        if self.index >= self.block && self.index.is_multiple_of(self.block) {
            self.held = x;
        }
        self.index += 1;
        self.held
    }
}

pub fn sample_and_hold(x: &TimeSeries, block_seconds: f64) -> Result<TimeSeries> {
    if !(block_seconds > 0.0) {
        return Err(Error::Config(format!("block length must be positive, got {block_seconds}")));
    }
    let block = samples_for(block_seconds, x.dt(), "hold block")?;
    if block == 0 {
        return Err(Error::Config("hold block is shorter than one sample".into()));
    }
    let mut hold = BlockHold::new(block);
    x.with_values(x.values().iter().map(|&v| hold.push(v)).collect())
}

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// State-of-charge change in MWh relative to the first sample.
///
/// Positive power is an injection into the grid and therefore discharges
/// the unit: `e(k) = -Σ_{j≤k} p(j)·dt/3600`.
pub fn cumulative_energy(p: &TimeSeries) -> Result<TimeSeries> {
    p.require_unit(Unit::MW)?;
    let step = p.dt() / SECONDS_PER_HOUR;
    let mut acc = 0.0;
    let values = p
        .values()
        .iter()
        .map(|&v| {
            acc -= v * step;
            acc
        })
        .collect();
    Ok(p.with_values(values)?.with_unit(Unit::MWh))
}
