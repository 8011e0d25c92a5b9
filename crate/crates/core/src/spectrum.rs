//! Frequency-domain tools: amplitude spectra of sampled signals, magnitude
//! responses of the three classical control services, their crossover
//! frequencies, per-band energy attribution and synthetic sawtooth signals.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridParams;
use crate::signals::{TimeSeries, Unit};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

/// One-sided amplitude spectrum.
///
/// `amplitudes[0]` is the magnitude of the signal mean, which is removed
/// before the transform; `mean` keeps its sign. Every other bin holds the
/// amplitude of the sinusoid at that frequency, in the input's unit.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub mean: f64,
    pub n_samples: usize,
    pub dt: f64,
    pub unit: Unit,
}

impl AmplitudeSpectrum {
    pub fn resolution(&self) -> f64 {
        1.0 / (self.n_samples as f64 * self.dt)
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    /// Index of the bin closest to `f`.
    pub fn bin(&self, f: f64) -> usize {
        ((f / self.resolution()).round() as usize).min(self.frequencies.len() - 1)
    }
}

pub const MIN_SPECTRUM_SAMPLES: usize = 8;

pub fn amplitude_spectrum(x: &TimeSeries, window: Window) -> Result<AmplitudeSpectrum> {
    let n = x.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::Input(format!("spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {n}")));
    }
    let mean = x.sum() / n as f64;
    let weights: Vec<f64> = match window {
        Window::None => vec![1.0; n],
        // Periodic Hann, normalised below by its coherent gain.
        Window::Hann => (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect(),
    };
    let gain = weights.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> =
        x.values().iter().zip(&weights).map(|(&v, &w)| Complex::new((v - mean) * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = 1.0 / (n as f64 * gain);
    let amplitudes = (0..=half)
        .map(|k| {
            if k == 0 {
                mean.abs()
            } else if 2 * k == n {
                buf[k].norm() * scale
            } else {
                2.0 * buf[k].norm() * scale
            }
        })
        .collect();
    let df = 1.0 / (n as f64 * x.dt());
    Ok(AmplitudeSpectrum {
        frequencies: (0..=half).map(|k| k as f64 * df).collect(),
        amplitudes,
        mean,
        n_samples: n,
        dt: x.dt(),
        unit: x.unit(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

impl Peak {
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakConfig {
    /// A bin is a peak if it exceeds this multiple of the median amplitude.
    pub prominence: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig { prominence: 3.0 }
    }
}

/// Local maxima (DC excluded) that stand out from the median amplitude,
/// strongest first.
pub fn find_peaks(spectrum: &AmplitudeSpectrum, cfg: &PeakConfig) -> Vec<Peak> {
    let a = &spectrum.amplitudes;
    if a.len() < 3 {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = a[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = cfg.prominence * median;
    let mut peaks: Vec<Peak> = (1..a.len())
        .filter(|&k| {
            let left = a[k - 1];
            let right = a.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
            a[k] > threshold && a[k] > left && a[k] >= right
        })
        .map(|k| Peak { frequency: spectrum.frequencies[k], amplitude: a[k] })
        .collect();
    peaks.sort_by(|p, q| q.amplitude.total_cmp(&p.amplitude));
    peaks
}

/// Control service whose magnitude response is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Service {
    /// Rotating inertia: a differentiating response `s·2H·S_B/f0`.
    Inertia,
    /// Droop: flat `1/S`.
    Primary,
    /// Droop behind reheater and steam-chest lags.
    PrimaryWithDynamics,
    /// PI AGC: `B·(C_p + 1/(T_N s))` with `B = 1/S`.
    Secondary,
}

impl Service {
    pub const ALL: [Service; 4] =
        [Service::Inertia, Service::Primary, Service::Secondary, Service::PrimaryWithDynamics];

    pub fn magnitude(self, params: &GridParams, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        match self {
            Service::Inertia => w * 2.0 * params.inertia_h * params.base_power / params.nominal_frequency,
            Service::Primary => params.droop,
            Service::PrimaryWithDynamics => {
                let rh = (1.0 + (w * params.t_reheat).powi(2)).sqrt();
                let ch = (1.0 + (w * params.t_chest).powi(2)).sqrt();
                params.droop / (rh * ch)
            }
            Service::Secondary => {
                params.droop * (params.agc_cp.powi(2) + (w * params.agc_tn).powi(-2)).sqrt()
            }
        }
    }
}

/// Magnitude response in MW/Hz of a control service.
#[derive(Debug, Clone, PartialEq)]
pub struct BodeCurve {
    pub service: Service,
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

pub fn bode_magnitude(service: Service, params: &GridParams, frequencies: &[f64]) -> Result<BodeCurve> {
    if let Some(f) = frequencies.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
        return Err(Error::Input(format!("frequencies must be positive, got {f}")));
    }
    if frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("frequencies must be strictly ascending".into()));
    }
    Ok(BodeCurve {
        service,
        frequencies: frequencies.to_vec(),
        magnitudes: frequencies.iter().map(|&f| service.magnitude(params, f)).collect(),
    })
}

/// `points` log-spaced frequencies from `fmin` to `fmax` inclusive.
pub fn log_grid(fmin: f64, fmax: f64, points: usize) -> Result<Vec<f64>> {
    if !(fmin > 0.0 && fmin < fmax && fmax.is_finite()) {
        return Err(Error::Input(format!("need 0 < fmin < fmax, got fmin={fmin}, fmax={fmax}")));
    }
    if points < 2 {
        return Err(Error::Input(format!("need at least 2 points, got {points}")));
    }
    let (lo, hi) = (fmin.log10(), fmax.log10());
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| 10f64.powf(lo + step * i as f64)).collect();
    grid[0] = fmin;
    grid[points - 1] = fmax;
    Ok(grid)
}

/// Frequencies where the dominant control service changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossovers {
    /// Below this, secondary control responds more strongly than primary.
    pub secondary_primary: f64,
    /// Above this, inertia responds more strongly than primary.
    pub inertia_primary: f64,
}

pub fn crossover_frequencies(params: &GridParams) -> Result<Crossovers> {
    let cp = params.agc_cp;
    if !(0.0..1.0).contains(&cp) {
        return Err(Error::Domain(format!("secondary and primary responses do not cross for C_p = {cp}")));
    }
    Ok(Crossovers {
        secondary_primary: 1.0 / (2.0 * PI * params.agc_tn * (1.0 - cp * cp).sqrt()),
        inertia_primary: params.nominal_frequency * params.droop
            / (2.0 * PI * 2.0 * params.inertia_h * params.base_power),
    })
}

/// Crossover of two services located by bisection in log-frequency on the
/// sign change of their magnitude difference within `[lo, hi]`.
pub fn crossover_by_bisection(params: &GridParams, a: Service, b: Service, lo: f64, hi: f64) -> Result<f64> {
    let diff = |f: f64| a.magnitude(params, f) - b.magnitude(params, f);
    let (mut l, mut h) = (lo.ln(), hi.ln());
    let dl = diff(lo);
    if dl.signum() == diff(hi).signum() {
        return Err(Error::Domain(format!("{a:?} and {b:?} do not cross in [{lo}, {hi}] Hz")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (l + h);
        if diff(mid.exp()).signum() == dl.signum() {
            l = mid;
        } else {
            h = mid;
        }
        if h - l < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (l + h)).exp())
}

/// Share of the spectral energy (squared amplitudes, DC excluded) falling
/// in each band `[0, e1), [e1, e2), …, [eK, Nyquist]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub edges: Vec<f64>,
    pub totals: Vec<f64>,
    pub shares: Vec<f64>,
    pub mean: f64,
    /// Set when the signal had no energy outside DC and shares default to uniform.
    pub degenerate: bool,
}

impl BandReport {
    /// `(lower, upper)` limits of band `i`; the last band ends at Nyquist.
    pub fn band_limits(&self, i: usize, nyquist: f64) -> (f64, f64) {
        let lower = if i == 0 { 0.0 } else { self.edges[i - 1] };
        let upper = self.edges.get(i).copied().unwrap_or(nyquist);
        (lower, upper)
    }
}

pub fn band_energy_report(x: &TimeSeries, edges: &[f64]) -> Result<BandReport> {
    let spectrum = amplitude_spectrum(x, Window::None)?;
    band_energy_from_spectrum(&spectrum, edges)
}

pub fn band_energy_from_spectrum(spectrum: &AmplitudeSpectrum, edges: &[f64]) -> Result<BandReport> {
    let nyquist = spectrum.nyquist();
    if edges.iter().any(|&e| !(e > 0.0 && e < nyquist)) {
        return Err(Error::Input(format!("band edges must lie in (0, {nyquist}) Hz")));
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("band edges must be strictly ascending".into()));
    }
    let mut totals = vec![0.0; edges.len() + 1];
    for (&f, &a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes).skip(1) {
        let band = edges.partition_point(|&e| e <= f);
        totals[band] += a * a;
    }
    let sum: f64 = totals.iter().sum();
    let degenerate = !(sum > 0.0);
    let shares = if degenerate {
        vec![1.0 / totals.len() as f64; totals.len()]
    } else {
        totals.iter().map(|t| t / sum).collect()
    };
    Ok(BandReport { edges: edges.to_vec(), totals, shares, mean: spectrum.mean, degenerate })
}

/// Zero-mean rising sawtooth of the given period and peak amplitude.
///
/// The ramp spans `[-amplitude, amplitude)` and is shifted so that every
/// full period of samples sums to zero when `period/dt` is an integer.
pub fn sawtooth(period: f64, amplitude: f64, dt: f64, duration: f64) -> Result<TimeSeries> {
    if !(dt > 0.0 && period > 0.0 && duration >= 0.0) {
        return Err(Error::Input("sawtooth needs positive period, dt and duration".into()));
    }
    if !(dt < period / 4.0) {
        return Err(Error::Input(format!("dt ({dt} s) must be below a quarter period ({period} s)")));
    }
    let n = (duration / dt).round() as usize;
    let offset = amplitude * dt / period;
    let values = (0..n)
        .map(|k| {
            let phase = (k as f64 * dt / period).fract();
            amplitude * (2.0 * phase - 1.0) + offset
        })
        .collect();
    TimeSeries::new(dt, values, Unit::Dimensionless)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn sine(amp: f64, f: f64, dt: f64, n: usize) -> TimeSeries {
        let v = (0..n).map(|k| amp * (2.0 * PI * f * k as f64 * dt).sin()).collect();
        TimeSeries::new(dt, v, Unit::Dimensionless).unwrap()
    }

    #[test]
    fn sine_on_bin() {
        let n = 1000;
        let dt = 10.0;
        let f = 25.0 / (n as f64 * dt);
        let s = amplitude_spectrum(&sine(3.0, f, dt, n), Window::None).unwrap();
        let k = s.bin(f);
        assert_eq!(k, 25);
        assert_relative_eq!(s.amplitudes[k], 3.0, max_relative = 1e-9);
        let hann = amplitude_spectrum(&sine(3.0, f, dt, n), Window::Hann).unwrap();
        assert_relative_eq!(hann.amplitudes[k], 3.0, max_relative = 1e-9);
    }

    #[test]
    fn constant_has_only_dc() {
        let x = TimeSeries::new(1.0, vec![4.2; 64], Unit::MW).unwrap();
        let s = amplitude_spectrum(&x, Window::None).unwrap();
        assert_abs_diff_eq!(s.mean, 4.2, epsilon = 1e-12);
        assert!(s.amplitudes[1..].iter().all(|&a| a < 1e-12));
        assert_eq!(*s.frequencies.last().unwrap(), 0.5);
    }

    #[test]
    fn too_short() {
        let x = TimeSeries::new(1.0, vec![1.0; 7], Unit::MW).unwrap();
        assert!(matches!(amplitude_spectrum(&x, Window::None), Err(Error::Input(_))));
    }

    #[test]
    fn odd_length_spectrum() {
        let s = amplitude_spectrum(&sine(1.0, 0.1, 1.0, 101), Window::None).unwrap();
        assert_eq!(s.frequencies.len(), 51);
    }

    #[test]
    fn bode_reference_values() {
        let p = GridParams::swiss();
        assert_eq!(Service::Primary.magnitude(&p, 0.123), 400.0);
        assert_relative_eq!(Service::Inertia.magnitude(&p, 0.0332), 400.0, max_relative = 2e-3);
        assert_relative_eq!(Service::Secondary.magnitude(&p, 1e6), 68.0, max_relative = 1e-9);
        assert!(Service::PrimaryWithDynamics.magnitude(&p, 1.0) < 400.0);
        assert!(bode_magnitude(Service::Primary, &p, &[0.0, 1.0]).is_err());
        assert!(bode_magnitude(Service::Primary, &p, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn crossovers_closed_form() {
        let p = GridParams::swiss();
        let c = crossover_frequencies(&p).unwrap();
        assert_relative_eq!(c.secondary_primary, 1.346e-3, max_relative = 1e-3);
        assert_relative_eq!(c.inertia_primary, 0.0332, max_relative = 2e-3);
        let zero_cp = GridParams { agc_cp: 0.0, ..p };
        let c0 = crossover_frequencies(&zero_cp).unwrap();
        assert_relative_eq!(c0.secondary_primary, 1.0 / (2.0 * PI * 120.0), max_relative = 1e-15);
        let big_cp = GridParams { agc_cp: 1.0, ..p };
        assert!(matches!(crossover_frequencies(&big_cp), Err(Error::Domain(_))));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[4], 1.0);
        assert_relative_eq!(g[2], 1e-2, max_relative = 1e-12);
        assert!(log_grid(1.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
        assert_eq!(log_grid(1.0, 2.0, 2).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn zero_signal_bands_are_uniform() {
        let x = TimeSeries::new(10.0, vec![0.0; 256], Unit::Hz).unwrap();
        let r = band_energy_report(&x, &[1.33e-3, 0.033]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.totals, vec![0.0; 3]);
        for s in &r.shares {
            assert_abs_diff_eq!(*s, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn band_edge_validation() {
        let x = sine(1.0, 0.01, 1.0, 100);
        assert!(band_energy_report(&x, &[0.2, 0.1]).is_err());
        assert!(band_energy_report(&x, &[0.6]).is_err());
        assert!(band_energy_report(&x, &[0.0]).is_err());
    }

    #[test]
    fn sawtooth_shape() {
        let s = sawtooth(900.0, 1.0, 10.0, 900.0).unwrap();
        assert_eq!(s.len(), 90);
        assert_abs_diff_eq!(s.sum(), 0.0, epsilon = 1e-9);
        assert!(s.values().windows(2).all(|w| w[1] > w[0]));
        assert!(sawtooth(40.0, 1.0, 10.0, 100.0).is_err());
    }
}
