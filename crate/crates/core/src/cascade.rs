//! Band splitting of regulation commands.
//!
//! A distributed cascade hands each stage the part of the command that the
//! stage's trailing average removes, and passes the average on to the next
//! (slower) stage:
//!
//! ```text
//! R_0 = command
//! P_i = R_{i-1} - MA_{a_i}(R_{i-1})
//! R_i = MA_{a_i}(R_{i-1})
//! ```
//!
//! Every `P_i` sums to zero over a compactly supported input, so an
//! energy-constrained unit following it ends where it started. The residual
//! `R_N` is left to the next control layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{samples_for, BlockHold, MovingAverageConfig, TimeSeries, TrailingAverage, Unit};

fn default_share() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeStage {
    pub name: String,
    pub window_seconds: f64,
    #[serde(default = "default_share")]
    pub share: f64,
    #[serde(default)]
    pub p_min: Option<f64>,
    #[serde(default)]
    pub p_max: Option<f64>,
}

impl CascadeStage {
    pub fn new(name: impl Into<String>, window_seconds: f64) -> Self {
        CascadeStage { name: name.into(), window_seconds, share: 1.0, p_min: None, p_max: None }
    }

    pub fn with_bounds(mut self, p_min: f64, p_max: f64) -> Self {
        self.p_min = Some(p_min);
        self.p_max = Some(p_max);
        self
    }

    fn clamp(&self, p: f64) -> f64 {
        let p = self.p_max.map_or(p, |hi| p.min(hi));
        self.p_min.map_or(p, |lo| p.max(lo))
    }

    fn validate(&self) -> Result<()> {
        if !(self.share > 0.0 && self.share <= 1.0) {
            return Err(Error::Config(format!(
                "stage {}: share must lie in (0, 1], got {}",
                self.name, self.share
            )));
        }
        if self.p_min.is_some_and(|lo| !(lo <= 0.0)) || self.p_max.is_some_and(|hi| !(hi >= 0.0)) {
            return Err(Error::Config(format!(
                "stage {}: power bounds must satisfy p_min <= 0 <= p_max",
                self.name
            )));
        }
        Ok(())
    }
}

/// Validates an ordered stage list and converts the windows to samples.
pub fn validate_stages(stages: &[CascadeStage], dt: f64) -> Result<Vec<usize>> {
    if stages.is_empty() {
        return Err(Error::Config("cascade needs at least one stage".into()));
    }
    let mut lens = Vec::with_capacity(stages.len());
    for (i, stage) in stages.iter().enumerate() {
        stage.validate()?;
        if stage.share != 1.0 {
            return Err(Error::Config(format!(
                "stage {}: distributed stages take the full band (share = 1)",
                stage.name
            )));
        }
        if i > 0 && !(stage.window_seconds > stages[i - 1].window_seconds) {
            return Err(Error::Config("stage windows must be increasing".into()));
        }
        let (n, _) = MovingAverageConfig::new(stage.window_seconds)
            .samples(dt)
            .map_err(|e| Error::Config(format!("stage {}: {e}", stage.name)))?;
        lens.push(n);
    }
    Ok(lens)
}

/// Streaming form of [`split_distributed`].
#[derive(Debug, Clone)]
pub struct DistributedCascade {
    stages: Vec<CascadeStage>,
    averages: Vec<TrailingAverage>,
}

impl DistributedCascade {
    pub fn new(stages: &[CascadeStage], dt: f64) -> Result<Self> {
        let lens = validate_stages(stages, dt)?;
        Ok(DistributedCascade {
            stages: stages.to_vec(),
            averages: lens.into_iter().map(TrailingAverage::new).collect(),
        })
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Splits one command sample; writes the stage powers into `out` and
    /// returns the residual.
    pub fn step(&mut self, command: f64, out: &mut [f64]) -> f64 {
        let mut rest = command;
        for ((stage, avg), slot) in self.stages.iter().zip(&mut self.averages).zip(out.iter_mut()) {
            let slow = avg.push(rest);
            *slot = stage.clamp(rest - slow);
            rest = slow;
        }
        rest
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutput {
    pub stages: Vec<(String, TimeSeries)>,
    pub residual: TimeSeries,
}

impl CascadeOutput {
    pub fn stage(&self, name: &str) -> Option<&TimeSeries> {
        self.stages.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

pub fn split_distributed(command: &TimeSeries, stages: &[CascadeStage]) -> Result<CascadeOutput> {
    command.require_unit(Unit::MW)?;
    if command.is_empty() {
        return Err(Error::Input("command series is empty".into()));
    }
    let mut cascade = DistributedCascade::new(stages, command.dt())?;
    let mut columns = vec![Vec::with_capacity(command.len()); stages.len()];
    let mut residual = Vec::with_capacity(command.len());
    let mut buf = vec![0.0; stages.len()];
    for &p in command.values() {
        residual.push(cascade.step(p, &mut buf));
        for (col, &v) in columns.iter_mut().zip(&buf) {
            col.push(v);
        }
    }
    let stages = stages
        .iter()
        .zip(columns)
        .map(|(s, col)| Ok((s.name.clone(), command.with_values(col)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CascadeOutput { stages, residual: command.with_values(residual)? })
}

/// Centralized split of the AGC command between a shared fast band
/// (demand response) and a slower integrating unit (thermal plant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralizedConfig {
    pub dr_share: f64,
    pub a_dr: f64,
    pub a_therm: f64,
}

impl CentralizedConfig {
    pub fn validate(&self, dt: f64) -> Result<(usize, usize)> {
        if !(self.dr_share > 0.0 && self.dr_share < 1.0) {
            return Err(Error::Config(format!("dr_share must lie in (0, 1), got {}", self.dr_share)));
        }
        if !(self.a_dr < self.a_therm) {
            return Err(Error::Config("a_dr must be shorter than a_therm".into()));
        }
        let (n_dr, _) = MovingAverageConfig::new(self.a_dr).samples(dt)?;
        let (n_therm, _) = MovingAverageConfig::new(self.a_therm).samples(dt)?;
        Ok((n_dr, n_therm))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CentralizedStep {
    pub dr: f64,
    pub thermal: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct CentralizedSplit {
    share: f64,
    dr_avg: TrailingAverage,
    therm_avg: TrailingAverage,
}

impl CentralizedSplit {
    pub fn new(cfg: &CentralizedConfig, dt: f64) -> Result<Self> {
        let (n_dr, n_therm) = cfg.validate(dt)?;
        Ok(CentralizedSplit {
            share: cfg.dr_share,
            dr_avg: TrailingAverage::new(n_dr),
            therm_avg: TrailingAverage::new(n_therm),
        })
    }

    pub fn step(&mut self, agc: f64) -> CentralizedStep {
        let dr = self.share * (agc - self.dr_avg.push(agc));
        let rest = agc - dr;
        let residual = self.therm_avg.push(rest);
        CentralizedStep { dr, thermal: rest - residual, residual }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedOutput {
    pub dr: TimeSeries,
    pub thermal: TimeSeries,
    pub residual: TimeSeries,
}

pub fn split_centralized(agc: &TimeSeries, cfg: &CentralizedConfig) -> Result<CentralizedOutput> {
    agc.require_unit(Unit::MW)?;
    let mut split = CentralizedSplit::new(cfg, agc.dt())?;
    let steps: Vec<_> = agc.values().iter().map(|&p| split.step(p)).collect();
    Ok(CentralizedOutput {
        dr: agc.with_values(steps.iter().map(|s| s.dr).collect())?,
        thermal: agc.with_values(steps.iter().map(|s| s.thermal).collect())?,
        residual: agc.with_values(steps.iter().map(|s| s.residual).collect())?,
    })
}

/// Which signal the intra-day purchase is averaged from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntradaySource {
    /// The full AGC command.
    #[default]
    Agc,
    /// The AGC command with the demand-response band removed.
    AgcWithoutDr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntradayConfig {
    pub horizon: f64,
    pub block: f64,
    #[serde(default)]
    pub source: IntradaySource,
}

impl Default for IntradayConfig {
    fn default() -> Self {
        IntradayConfig { horizon: 3600.0, block: 900.0, source: IntradaySource::Agc }
    }
}

/// Quarter-hourly (or any block) purchase of the trailing average AGC activation.
#[derive(Debug, Clone)]
pub struct IntradayRelief {
    avg: TrailingAverage,
    hold: BlockHold,
}

impl IntradayRelief {
    pub fn new(horizon_seconds: f64, block_seconds: f64, dt: f64) -> Result<Self> {
        if !(block_seconds > 0.0 && block_seconds <= horizon_seconds) {
            return Err(Error::Config(format!(
                "intra-day block ({block_seconds} s) must be positive and not exceed the horizon ({horizon_seconds} s)"
            )));
        }
        let (n, _) = MovingAverageConfig::new(horizon_seconds).samples(dt)?;
        let block = samples_for(block_seconds, dt, "intra-day block")?;
        Ok(IntradayRelief { avg: TrailingAverage::new(n), hold: BlockHold::new(block) })
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let avg = self.avg.push(x);
        self.hold.push(avg)
    }
}

pub fn intraday_relief(agc: &TimeSeries, horizon_seconds: f64, block_seconds: f64) -> Result<TimeSeries> {
    agc.require_unit(Unit::MW)?;
    let mut relief = IntradayRelief::new(horizon_seconds, block_seconds, agc.dt())?;
    agc.with_values(agc.values().iter().map(|&p| relief.step(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mw(dt: f64, v: &[f64]) -> TimeSeries {
        TimeSeries::new(dt, v.to_vec(), Unit::MW).unwrap()
    }

    fn assert_slice_eq(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_stage_pulse() {
        let mut v = vec![0.0; 10];
        v[0] = 6.0;
        v[1] = 6.0;
        let out =
            split_distributed(&mw(1.0, &v), &[CascadeStage::new("a", 2.0), CascadeStage::new("b", 4.0)])
                .unwrap();
        assert_slice_eq(out.stages[0].1.values(), &[3.0, 0.0, -3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_slice_eq(out.stages[1].1.values(), &[2.25, 3.75, 0.0, -3.0, -2.25, -0.75, 0.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(out.residual.sum(), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn zeros_stay_zero() {
        let out = split_distributed(&mw(0.1, &[0.0; 100]), &[CascadeStage::new("sc", 5.0)]).unwrap();
        assert!(out.stages[0].1.values().iter().all(|&v| v == 0.0));
        assert!(out.residual.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_stage_lists() {
        let x = mw(1.0, &[1.0; 10]);
        let err =
            split_distributed(&x, &[CascadeStage::new("a", 4.0), CascadeStage::new("b", 2.0)]).unwrap_err();
        assert_eq!(err, Error::Config("stage windows must be increasing".into()));
        assert!(split_distributed(&x, &[]).is_err());
        assert!(split_distributed(&x, &[CascadeStage::new("a", 2.5)]).is_err());
        let mut partial = CascadeStage::new("a", 2.0);
        partial.share = 0.5;
        assert!(split_distributed(&x, &[partial]).is_err());
        let bad_bounds = CascadeStage::new("a", 2.0).with_bounds(1.0, 2.0);
        assert!(split_distributed(&x, &[bad_bounds]).is_err());
    }

    #[test]
    fn bounds_clip_stage_output() {
        let x = mw(1.0, &[10.0, 0.0, 0.0, 0.0]);
        let out = split_distributed(&x, &[CascadeStage::new("a", 2.0).with_bounds(-1.0, 2.0)]).unwrap();
        assert_slice_eq(out.stages[0].1.values(), &[2.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn centralized_constant_is_absorbed() {
        let cfg = CentralizedConfig { dr_share: 0.7, a_dr: 10.0, a_therm: 20.0 };
        let out = split_centralized(&mw(1.0, &[5.0; 60]), &cfg).unwrap();
        let last = 59;
        assert_abs_diff_eq!(out.dr.values()[last], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.thermal.values()[last], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.residual.values()[last], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn centralized_validation() {
        let x = mw(1.0, &[1.0; 10]);
        for cfg in [
            CentralizedConfig { dr_share: 1.0, a_dr: 2.0, a_therm: 4.0 },
            CentralizedConfig { dr_share: 0.0, a_dr: 2.0, a_therm: 4.0 },
            CentralizedConfig { dr_share: 0.5, a_dr: 4.0, a_therm: 4.0 },
        ] {
            assert!(matches!(split_centralized(&x, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn intraday_zero_and_constant() {
        let z = intraday_relief(&mw(60.0, &[0.0; 200]), 3600.0, 900.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        // 60 s samples: 60-sample average, 15-sample hold blocks.
        let c = intraday_relief(&mw(60.0, &[7.0; 200]), 3600.0, 900.0).unwrap();
        let v = c.values();
        assert!(v[..15].iter().all(|&x| x == 0.0));
        assert_abs_diff_eq!(v[15], 7.0 * 16.0 / 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[60], 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[199], 7.0, epsilon = 1e-12);
        assert!(intraday_relief(&mw(60.0, &[0.0; 10]), 900.0, 3600.0).is_err());
        assert!(intraday_relief(&mw(60.0, &[0.0; 10]), 3600.0, 90.0).is_err());
    }
}
