//! One-area closed-loop frequency simulation.
//!
//! Swing dynamics with inertia and linear load damping, a saturating droop
//! primary controller whose command is split across a distributed cascade
//! of storage units, and a rate-limited PI AGC whose output is split between
//! demand response, a thermal plant and quarter-hourly intra-day purchases.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{
    CascadeStage, CentralizedConfig, CentralizedSplit, CentralizedStep, DistributedCascade, IntradayConfig,
    IntradayRelief, IntradaySource,
};
use crate::error::{Error, Result};
use crate::signals::{cumulative_energy, samples_for, TimeSeries, Unit};

/// Physical and controller constants of the one-area system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Inertia constant H, s.
    pub inertia_h: f64,
    /// Base power S_B, MW.
    pub base_power: f64,
    /// Nominal frequency f0, Hz.
    pub nominal_frequency: f64,
    /// Droop gain 1/S, MW/Hz.
    pub droop: f64,
    /// Load-frequency damping D_l, Hz/MW.
    pub load_damping: f64,
    /// AGC proportional factor C_p.
    pub agc_cp: f64,
    /// AGC integral time T_N, s.
    pub agc_tn: f64,
    /// Primary reserve limit, MW.
    pub primary_reserve: f64,
    /// Secondary reserve limit, MW.
    pub secondary_reserve: f64,
    /// Time for the AGC to ramp from zero to full secondary reserve, s.
    pub agc_full_activation: f64,
    /// Reheater time constant, s (frequency-response analysis only).
    pub t_reheat: f64,
    /// Steam-chest time constant, s (frequency-response analysis only).
    pub t_chest: f64,
}

impl GridParams {
    /// Continental-European-like system used for the band-split case study.
    pub fn reference() -> Self {
        GridParams {
            inertia_h: 6.0,
            base_power: 280_000.0,
            nominal_frequency: 50.0,
            droop: 15_000.0,
            load_damping: 1.0 / 4200.0,
            agc_cp: 0.17,
            agc_tn: 200.0,
            primary_reserve: 3000.0,
            secondary_reserve: 15_000.0,
            agc_full_activation: 300.0,
            t_reheat: 10.0,
            t_chest: 0.3,
        }
    }

    /// Swiss-sized system used for the frequency-response comparison of
    /// inertia, primary and secondary control.
    pub fn swiss() -> Self {
        GridParams {
            inertia_h: 6.0,
            base_power: 8000.0,
            nominal_frequency: 50.0,
            droop: 400.0,
            agc_tn: 120.0,
            ..Self::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("inertia_h", self.inertia_h),
            ("base_power", self.base_power),
            ("nominal_frequency", self.nominal_frequency),
            ("droop", self.droop),
            ("load_damping", self.load_damping),
            ("agc_cp", self.agc_cp),
            ("agc_tn", self.agc_tn),
            ("primary_reserve", self.primary_reserve),
            ("secondary_reserve", self.secondary_reserve),
            ("agc_full_activation", self.agc_full_activation),
            ("t_reheat", self.t_reheat),
            ("t_chest", self.t_chest),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("grid.{name} must be positive and finite, got {v}")));
            }
        }
        if self.agc_cp >= 1.0 {
            return Err(Error::Config(format!("grid.agc_cp must be below 1, got {}", self.agc_cp)));
        }
        Ok(())
    }

    /// AGC ramp limit in MW/s.
    pub fn agc_ramp_limit(&self) -> f64 {
        self.secondary_reserve / self.agc_full_activation
    }

    /// Frequency change per unit of power imbalance and time, Hz/(MW·s).
    pub fn swing_gain(&self) -> f64 {
        self.nominal_frequency / (2.0 * self.inertia_h * self.base_power)
    }
}

/// Saturating droop response in MW to a frequency deviation in Hz.
pub fn primary_droop(delta_f: f64, params: &GridParams) -> f64 {
    (-params.droop * delta_f).clamp(-params.primary_reserve, params.primary_reserve)
}

/// Forward-Euler update of the frequency deviation.
///
/// `net_injection` and `disturbance` are in MW with positive meaning more
/// generation; load damping contributes `-delta_f / D_l`.
pub fn swing_step(delta_f: f64, net_injection: f64, disturbance: f64, params: &GridParams, dt: f64) -> f64 {
    let imbalance = net_injection + disturbance - delta_f / params.load_damping;
    delta_f + dt * params.swing_gain() * imbalance
}

/// Where the AGC ramp limit is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgcRateLimit {
    /// Proportional and integral paths are limited together.
    #[default]
    Combined,
    /// Only the integral path is limited; the proportional path acts at once.
    IntegralOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AgcState {
    /// Integral of the frequency deviation, Hz·s.
    pub integral: f64,
    pub prev_output: f64,
    /// Rate-limited integral path (only used with [`AgcRateLimit::IntegralOnly`]).
    pub prev_integral_output: f64,
}

fn ramp_towards(prev: f64, target: f64, max_step: f64) -> f64 {
    target.clamp(prev - max_step, prev + max_step)
}

/// One PI step of the AGC. Returns the output in MW and the updated state.
///
/// The integral is frozen while the output sits on its ±limit and the
/// deviation would drive it further into saturation.
pub fn agc_step(
    delta_f: f64,
    state: AgcState,
    params: &GridParams,
    dt: f64,
    limit: AgcRateLimit,
) -> (f64, AgcState) {
    let candidate = state.integral + delta_f * dt;
    let max_step = params.agc_ramp_limit() * dt;
    let cap = params.secondary_reserve;
    let proportional = -params.droop * params.agc_cp * delta_f;
    let integral_path = |integral: f64| -params.droop * integral / params.agc_tn;

    let (limited, integral_out) = match limit {
        AgcRateLimit::Combined => {
            let raw = proportional + integral_path(candidate);
            (ramp_towards(state.prev_output, raw, max_step), 0.0)
        }
        AgcRateLimit::IntegralOnly => {
            let slow = ramp_towards(state.prev_integral_output, integral_path(candidate), max_step);
            (proportional + slow, slow)
        }
    };
    let output = limited.clamp(-cap, cap);
    // Output is -droop·(...), so a negative deviation pushes it upwards.
    let deepening = (output >= cap && delta_f < 0.0) || (output <= -cap && delta_f > 0.0);
    let integral = if deepening { state.integral } else { candidate };
    let prev_integral_output = match limit {
        AgcRateLimit::Combined => 0.0,
        AgcRateLimit::IntegralOnly => {
            if deepening {
                state.prev_integral_output
            } else {
                integral_out
            }
        }
    };
    (output, AgcState { integral, prev_output: output, prev_integral_output })
}

/// How intra-day purchases enter the AGC loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgcDispatch {
    /// Demand response and thermal plant split the full AGC output; the
    /// intra-day purchase is injected in addition.
    #[default]
    Full,
    /// The intra-day purchase is taken off the AGC output before it is
    /// split, so the AGC units only carry what has not been bought yet.
    NetOfIntraday,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceEvent {
    pub t_start: f64,
    /// Power step in MW; negative is a loss of generation.
    pub delta_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub grid: GridParams,
    pub stages: Vec<CascadeStage>,
    pub centralized: CentralizedConfig,
    pub intraday: IntradayConfig,
    pub disturbances: Vec<DisturbanceEvent>,
    pub agc_enabled: bool,
    pub agc_rate_limit: AgcRateLimit,
    pub agc_dispatch: AgcDispatch,
}

pub const SUPER_CAP: &str = "Super-cap";
pub const FLYWHEEL: &str = "Flywheel";
pub const BATTERY: &str = "Battery";
pub const DEMAND_RESPONSE: &str = "DR";
pub const THERMAL: &str = "Thermal";
pub const INTRADAY: &str = "Intra-day";

impl SimConfig {
    /// The case study: loss of a 1.5 GW plant at t = 100 s, three storage
    /// technologies on the droop signal, demand response and a thermal plant
    /// on the AGC, hourly averages bought every quarter hour.
    pub fn reference() -> Self {
        SimConfig {
            dt: 0.1,
            duration: 10_800.0,
            grid: GridParams::reference(),
            stages: vec![
                CascadeStage::new(SUPER_CAP, 5.0),
                CascadeStage::new(FLYWHEEL, 30.0),
                CascadeStage::new(BATTERY, 900.0),
            ],
            centralized: CentralizedConfig { dr_share: 0.7, a_dr: 1800.0, a_therm: 3600.0 },
            intraday: IntradayConfig::default(),
            disturbances: vec![DisturbanceEvent { t_start: 100.0, delta_p: -1500.0 }],
            agc_enabled: true,
            agc_rate_limit: AgcRateLimit::Combined,
            agc_dispatch: AgcDispatch::Full,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("sim.dt must be positive, got {}", self.dt)));
        }
        self.grid.validate()?;
        let steps = samples_for(self.duration, self.dt, "sim.duration")?;
        crate::cascade::validate_stages(&self.stages, self.dt)?;
        self.centralized.validate(self.dt)?;
        // Construction checks horizon/block against dt.
        IntradayRelief::new(self.intraday.horizon, self.intraday.block, self.dt)?;
        let longest = self
            .stages
            .iter()
            .map(|s| s.window_seconds)
            .chain([self.centralized.a_dr, self.centralized.a_therm, self.intraday.horizon])
            .fold(0.0, f64::max);
        if self.duration < longest {
            return Err(Error::Config(format!(
                "sim.duration ({} s) is shorter than the longest window ({longest} s)",
                self.duration
            )));
        }
        if steps == 0 {
            return Err(Error::Config("simulation has no steps".into()));
        }
        for ev in &self.disturbances {
            if !(ev.t_start >= 0.0) || !ev.delta_p.is_finite() {
                return Err(Error::Config(format!("invalid disturbance {ev:?}")));
            }
            samples_for(ev.t_start, self.dt, "disturbance t_start")?;
        }
        if self.agc_dispatch == AgcDispatch::NetOfIntraday && self.intraday.source != IntradaySource::Agc {
            return Err(Error::Config(
                "intraday.source must be \"agc\" when the AGC dispatch is net of intra-day".into(),
            ));
        }
        let mut names: Vec<&str> = self.stages.iter().map(|s| s.name.as_str()).collect();
        names.extend([DEMAND_RESPONSE, THERMAL, INTRADAY]);
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("unit names must be unique".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub freq_deviation: TimeSeries,
    pub p_prim_cmd: TimeSeries,
    pub p_agc: TimeSeries,
    /// Unit names in dispatch order: distributed stages, DR, thermal, intra-day.
    pub unit_order: Vec<String>,
    pub unit_power: BTreeMap<String, TimeSeries>,
    /// State of charge of every unit except intra-day, MWh relative to start.
    pub unit_soc: BTreeMap<String, TimeSeries>,
}

impl SimulationResult {
    pub fn power(&self, name: &str) -> Option<&TimeSeries> {
        self.unit_power.get(name)
    }

    pub fn soc(&self, name: &str) -> Option<&TimeSeries> {
        self.unit_soc.get(name)
    }

    pub fn nadir(&self) -> f64 {
        self.freq_deviation.min().unwrap_or(0.0)
    }

    /// Units that carry a state of charge, in dispatch order.
    pub fn storage_units(&self) -> impl Iterator<Item = &str> {
        self.unit_order.iter().map(String::as_str).filter(|n| self.unit_soc.contains_key(*n))
    }
}

/// Runs the closed loop. Each step:
///
/// 1. droop command from the current deviation, split over the distributed cascade;
/// 2. AGC step, split between DR and thermal, intra-day purchase updated;
/// 3. swing update with the sum of all delivered unit powers.
///
/// With the AGC disabled the distributed residual is delivered as plain
/// droop response, since there is no slower layer to hand it to.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationResult> {
    config.validate()?;
    let dt = config.dt;
    let n = config.steps();
    let params = &config.grid;

    let mut cascade = DistributedCascade::new(&config.stages, dt)?;
    let mut central = CentralizedSplit::new(&config.centralized, dt)?;
    let mut relief = IntradayRelief::new(config.intraday.horizon, config.intraday.block, dt)?;

    let mut events: Vec<(usize, f64)> = config
        .disturbances
        .iter()
        .map(|e| Ok((samples_for(e.t_start, dt, "disturbance t_start")?, e.delta_p)))
        .collect::<Result<_>>()?;
    events.sort_by_key(|&(k, _)| k);

    let stage_count = cascade.stage_count();
    let mut stage_buf = vec![0.0; stage_count];
    let mut stage_cols = vec![Vec::with_capacity(n); stage_count];
    let mut freq = Vec::with_capacity(n);
    let mut prim_col = Vec::with_capacity(n);
    let mut agc_col = Vec::with_capacity(n);
    let mut dr_col = Vec::with_capacity(n);
    let mut therm_col = Vec::with_capacity(n);
    let mut intraday_col = Vec::with_capacity(n);

    let mut delta_f = 0.0;
    let mut agc = AgcState::default();
    let mut intraday = 0.0;
    let mut disturbance = 0.0;
    let mut next_event = 0;

    for k in 0..n {
        while next_event < events.len() && events[next_event].0 <= k {
            disturbance += events[next_event].1;
            next_event += 1;
        }
        freq.push(delta_f);

        let prim = primary_droop(delta_f, params);
        let dist_residual = cascade.step(prim, &mut stage_buf);

        let mut split = CentralizedStep::default();
        let mut agc_out = 0.0;
        if config.agc_enabled {
            let (out, state) = agc_step(delta_f, agc, params, dt, config.agc_rate_limit);
            agc = state;
            agc_out = out;
            match config.agc_dispatch {
                AgcDispatch::Full => {
                    split = central.step(out);
                    intraday = relief.step(match config.intraday.source {
                        IntradaySource::Agc => out,
                        IntradaySource::AgcWithoutDr => out - split.dr,
                    });
                }
                AgcDispatch::NetOfIntraday => {
                    intraday = relief.step(out);
                    split = central.step(out - intraday);
                }
            }
        }

        let mut net = split.dr + split.thermal + intraday;
        net += stage_buf.iter().sum::<f64>();
        if !config.agc_enabled {
            net += dist_residual;
        }

        prim_col.push(prim);
        agc_col.push(agc_out);
        for (col, &v) in stage_cols.iter_mut().zip(&stage_buf) {
            col.push(v);
        }
        dr_col.push(split.dr);
        therm_col.push(split.thermal);
        intraday_col.push(intraday);

        delta_f = swing_step(delta_f, net, disturbance, params, dt);
    }

    let mw = |v: Vec<f64>| TimeSeries::new(dt, v, Unit::MW);
    let mut unit_order = Vec::with_capacity(stage_count + 3);
    let mut unit_power = BTreeMap::new();
    let mut unit_soc = BTreeMap::new();
    let columns = config
        .stages
        .iter()
        .map(|s| s.name.clone())
        .zip(stage_cols)
        .chain([(DEMAND_RESPONSE.to_string(), dr_col), (THERMAL.to_string(), therm_col)]);
    for (name, col) in columns {
        let p = mw(col)?;
        unit_soc.insert(name.clone(), cumulative_energy(&p)?);
        unit_power.insert(name.clone(), p);
        unit_order.push(name);
    }
    unit_power.insert(INTRADAY.to_string(), mw(intraday_col)?);
    unit_order.push(INTRADAY.to_string());

    Ok(SimulationResult {
        freq_deviation: TimeSeries::new(dt, freq, Unit::Hz)?,
        p_prim_cmd: mw(prim_col)?,
        p_agc: mw(agc_col)?,
        unit_order,
        unit_power,
        unit_soc,
    })
}
