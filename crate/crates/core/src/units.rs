//! Per-unit summaries of a simulation run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SimulationResult;
use crate::signals::{cumulative_energy, TimeSeries, Unit};

/// Power and state-of-charge extrema of one unit. SoC is in MWh relative
/// to the start of the run; `e_cycled` is the SoC range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitReport {
    pub name: String,
    pub p_min: f64,
    pub p_max: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub e_cycled: f64,
}

pub fn unit_report(name: &str, power: &TimeSeries) -> Result<UnitReport> {
    power.require_unit(Unit::MW)?;
    if power.is_empty() {
        return Err(Error::Input(format!("power series of {name} is empty")));
    }
    let soc = cumulative_energy(power)?;
    let (p_min, p_max) = extrema(power.values());
    let (soc_min, soc_max) = extrema(soc.values());
    Ok(UnitReport { name: name.to_string(), p_min, p_max, soc_min, soc_max, e_cycled: soc_max - soc_min })
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// One row of the run summary. Units without an energy budget (intra-day
/// purchases) only report power extrema.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportRow {
    Storage(UnitReport),
    PowerOnly { name: String, p_min: f64, p_max: f64 },
}

impl ReportRow {
    pub fn name(&self) -> &str {
        match self {
            ReportRow::Storage(r) => &r.name,
            ReportRow::PowerOnly { name, .. } => name,
        }
    }

    pub fn power_range(&self) -> (f64, f64) {
        match self {
            ReportRow::Storage(r) => (r.p_min, r.p_max),
            ReportRow::PowerOnly { p_min, p_max, .. } => (*p_min, *p_max),
        }
    }

    pub fn storage(&self) -> Option<&UnitReport> {
        match self {
            ReportRow::Storage(r) => Some(r),
            ReportRow::PowerOnly { .. } => None,
        }
    }
}

/// Rows for every unit of a run, in dispatch order.
pub fn simulation_report(result: &SimulationResult) -> Result<Vec<ReportRow>> {
    result
        .unit_order
        .iter()
        .map(|name| {
            let power =
                result.power(name).ok_or_else(|| Error::Input(format!("no power series for unit {name}")))?;
            if result.soc(name).is_some() {
                Ok(ReportRow::Storage(unit_report(name, power)?))
            } else {
                let (p_min, p_max) = extrema(power.values());
                Ok(ReportRow::PowerOnly { name: name.clone(), p_min, p_max })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mw(dt: f64, v: &[f64]) -> TimeSeries {
        TimeSeries::new(dt, v.to_vec(), Unit::MW).unwrap()
    }

    #[test]
    fn zero_power_report() {
        let r = unit_report("x", &mw(1.0, &[0.0; 5])).unwrap();
        assert_eq!((r.p_min, r.p_max, r.soc_min, r.soc_max, r.e_cycled), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn two_step_cycle() {
        let r = unit_report("x", &mw(1.0, &[3600.0, -3600.0])).unwrap();
        assert_eq!(r.p_min, -3600.0);
        assert_eq!(r.p_max, 3600.0);
        assert_abs_diff_eq!(r.soc_min, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.soc_max, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.e_cycled, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(unit_report("x", &mw(1.0, &[])), Err(Error::Input(_))));
        let hz = TimeSeries::new(1.0, vec![1.0], Unit::Hz).unwrap();
        assert!(matches!(unit_report("x", &hz), Err(Error::Unit { .. })));
    }

    #[test]
    fn zero_padding_is_neutral() {
        let p = [5.0, -2.0, 7.0, -10.0];
        let a = unit_report("x", &mw(2.0, &p)).unwrap();
        let mut padded = p.to_vec();
        padded.extend([0.0; 20]);
        let b = unit_report("x", &mw(2.0, &padded)).unwrap();
        assert_eq!(a, b);
    }
}
