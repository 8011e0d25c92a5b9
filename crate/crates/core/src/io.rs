//! CSV ingestion and emission.
//!
//! Time-series files carry a header row, time in seconds in the first
//! column and one or more value columns. All numbers are written in the
//! shortest form that round-trips, except the run report which mirrors a
//! two-decimal table.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::SimulationResult;
use crate::signals::{TimeSeries, Unit};
use crate::spectrum::{AmplitudeSpectrum, BandReport, BodeCurve};
use crate::units::ReportRow;

/// Relative tolerance on sample spacing when reading time series.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// Which value column of a time-series file to read.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ColumnSelector {
    /// The first column after time.
    #[default]
    First,
    Named(String),
}

pub fn read_series_csv<R: Read>(reader: R, column: &ColumnSelector, unit: Unit) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Input(
            "expected a header with a time column and at least one value column".into(),
        ));
    }
    let col = match column {
        ColumnSelector::First => 1,
        ColumnSelector::Named(name) => headers
            .iter()
            .position(|h| h == name)
            .filter(|&i| i > 0)
            .ok_or_else(|| Error::Input(format!("no value column named {name:?}")))?,
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |i: usize, what: &str| -> Result<f64> {
            let field = record.get(i).ok_or_else(|| Error::Input(format!("row {row}: missing {what}")))?;
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Input(format!("row {row}: cannot parse {what} {field:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Input(format!("row {row}: {what} is not finite")))
            }
        };
        times.push(parse(0, "time")?);
        values.push(parse(col, "value")?);
    }
    if values.is_empty() {
        return Err(Error::Input("time series file has no data rows".into()));
    }
    if values.len() == 1 {
        return Err(Error::Input("need at least two rows to infer the sample interval".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::Input("non-uniform sampling at row 1: time does not increase".into()));
    }
    for i in 1..times.len() {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > SPACING_TOLERANCE * dt {
            return Err(Error::Input(format!(
                "non-uniform sampling at row {i}: step {step} s differs from {dt} s"
            )));
        }
    }
    TimeSeries::with_start(dt, times[0], values, unit)
}

fn write_rows<W: Write>(writer: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Writes aligned series as columns after a shared time column `t`.
pub fn write_series_table<W: Write>(writer: W, columns: &[(&str, &TimeSeries)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Input("no columns to write".into()));
    };
    for (_, s) in columns {
        if s.len() != first.len() || s.dt() != first.dt() || s.t0() != first.t0() {
            return Err(Error::Input("columns are not aligned".into()));
        }
    }
    let mut header = vec!["t"];
    header.extend(columns.iter().map(|(n, _)| *n));
    let rows = (0..first.len()).map(|k| {
        let mut row = Vec::with_capacity(columns.len() + 1);
        row.push(first.time(k).to_string());
        row.extend(columns.iter().map(|(_, s)| s.values()[k].to_string()));
        row
    });
    write_rows(writer, &header, rows)
}

/// Frequency, deviation, commands, one power column per unit.
pub fn write_timeseries_csv<W: Write>(writer: W, result: &SimulationResult) -> Result<()> {
    let mut cols: Vec<(&str, &TimeSeries)> = vec![
        ("delta_f_hz", &result.freq_deviation),
        ("p_prim_cmd", &result.p_prim_cmd),
        ("p_agc", &result.p_agc),
    ];
    for name in &result.unit_order {
        if let Some(s) = result.power(name) {
            cols.push((name.as_str(), s));
        }
    }
    write_series_table(writer, &cols)
}

pub fn write_soc_csv<W: Write>(writer: W, result: &SimulationResult) -> Result<()> {
    let cols: Vec<(&str, &TimeSeries)> =
        result.storage_units().filter_map(|n| result.soc(n).map(|s| (n, s))).collect();
    write_series_table(writer, &cols)
}

/// Two decimals, without a sign on values that round to zero.
pub fn fixed2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn write_report_csv<W: Write>(writer: W, rows: &[ReportRow]) -> Result<()> {
    let header = ["name", "p_min", "p_max", "soc_min", "soc_max", "e_cycled"];
    write_rows(
        writer,
        &header,
        rows.iter().map(|r| match r {
            ReportRow::Storage(u) => vec![
                u.name.clone(),
                fixed2(u.p_min),
                fixed2(u.p_max),
                fixed2(u.soc_min),
                fixed2(u.soc_max),
                fixed2(u.e_cycled),
            ],
            ReportRow::PowerOnly { name, p_min, p_max } => {
                vec![
                    name.clone(),
                    fixed2(*p_min),
                    fixed2(*p_max),
                    String::new(),
                    String::new(),
                    String::new(),
                ]
            }
        }),
    )
}

pub fn write_spectrum_csv<W: Write>(writer: W, spectrum: &AmplitudeSpectrum) -> Result<()> {
    write_rows(
        writer,
        &["frequency_hz", "magnitude"],
        spectrum
            .frequencies
            .iter()
            .zip(&spectrum.amplitudes)
            .map(|(f, a)| vec![f.to_string(), a.to_string()]),
    )
}

/// One row per frequency, one magnitude column per curve (named after the service).
pub fn write_bode_csv<W: Write>(writer: W, curves: &[(&str, &BodeCurve)]) -> Result<()> {
    let Some((_, first)) = curves.first() else {
        return Err(Error::Input("no curves to write".into()));
    };
    if curves.iter().any(|(_, c)| c.frequencies != first.frequencies) {
        return Err(Error::Input("curves use different frequency grids".into()));
    }
    let mut header = vec!["frequency_hz"];
    header.extend(curves.iter().map(|(n, _)| *n));
    let rows = first.frequencies.iter().enumerate().map(|(i, f)| {
        let mut row = vec![f.to_string()];
        row.extend(curves.iter().map(|(_, c)| c.magnitudes[i].to_string()));
        row
    });
    write_rows(writer, &header, rows)
}

pub fn write_bands_csv<W: Write>(writer: W, report: &BandReport, nyquist: f64) -> Result<()> {
    let rows = report.totals.iter().zip(&report.shares).enumerate().map(|(i, (t, s))| {
        let (lo, hi) = report.band_limits(i, nyquist);
        vec![lo.to_string(), hi.to_string(), t.to_string(), s.to_string()]
    });
    write_rows(writer, &["f_low_hz", "f_high_hz", "energy", "share"], rows)
}
