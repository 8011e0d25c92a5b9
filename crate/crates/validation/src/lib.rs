//! Reference figures and reporting helpers for the acceptance suite.

/// One row of the published case-study results: P range in MW, SoC range
/// and cycled energy in MWh. The intra-day purchase has no SoC columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub name: &'static str,
    pub p_min: f64,
    pub p_max: f64,
    pub soc: Option<(f64, f64, f64)>,
}

pub const PUBLISHED: [PublishedRow; 6] = [
    PublishedRow { name: "Super-cap", p_min: -10.67, p_max: 480.67, soc: Some((-0.94, 0.04, 0.97)) },
    PublishedRow { name: "Flywheel", p_min: -50.41, p_max: 756.30, soc: Some((-3.98, 0.28, 4.26)) },
    PublishedRow { name: "Battery", p_min: -257.03, p_max: 907.28, soc: Some((-43.27, 5.87, 49.14)) },
    PublishedRow { name: "DR", p_min: -460.40, p_max: 872.53, soc: Some((-240.56, 1.66, 242.22)) },
    PublishedRow { name: "Thermal", p_min: -793.47, p_max: 1120.63, soc: Some((-550.47, 0.08, 550.55)) },
    PublishedRow { name: "Intra-day", p_min: 0.00, p_max: 2327.08, soc: None },
];

/// Printed two-decimal figure as an integer count of hundredths.
pub fn cents(x: f64) -> i64 {
    (x * 100.0).round() as i64
}

/// Sign of a two-decimal figure; values that print as zero have sign 0.
pub fn printed_sign(x: f64) -> i64 {
    cents(x).signum()
}

/// Whether `got` is within `rel` of `want`. A zero reference only accepts
/// values that print as zero.
pub fn within(got: f64, want: f64, rel: f64) -> bool {
    if want == 0.0 {
        cents(got) == 0
    } else {
        (got - want).abs() <= rel * want.abs()
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {} [{tag}] {}: {}", self.id, self.title, self.detail)
    }
}
