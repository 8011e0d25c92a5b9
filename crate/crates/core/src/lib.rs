//! Frequency control reserves split by frequency band.
//!
//! Regulation signals are divided with cascades of trailing moving averages
//! so that each energy-constrained unit (super-caps, flywheels, batteries,
//! demand response) follows a zero-mean band of the spectrum, while the
//! slowest remainder goes to the next control layer. The crate provides the
//! signal primitives, the cascades, a one-area closed-loop grid simulation,
//! per-unit energy accounting and frequency-domain analysis tools.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod error;
pub mod grid;
pub mod io;
pub mod signals;
pub mod spectrum;
pub mod units;

pub use cascade::{
    intraday_relief, split_centralized, split_distributed, CascadeOutput, CascadeStage, CentralizedConfig,
    CentralizedOutput, IntradayConfig, IntradaySource,
};
pub use error::{Error, Result};
pub use grid::{
    agc_step, primary_droop, run_simulation, swing_step, AgcDispatch, AgcRateLimit, AgcState,
    DisturbanceEvent, GridParams, SimConfig, SimulationResult,
};
pub use signals::{
    cumulative_energy, moving_average, offset_signal, sample_and_hold, MovingAverageConfig, TimeSeries, Unit,
};
pub use spectrum::{
    amplitude_spectrum, band_energy_report, bode_magnitude, crossover_frequencies, find_peaks, sawtooth,
    AmplitudeSpectrum, BandReport, BodeCurve, Crossovers, Service, Window,
};
pub use units::{simulation_report, unit_report, ReportRow, UnitReport};
