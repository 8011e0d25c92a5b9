use std::sync::OnceLock;

use approx::assert_relative_eq;
use fcr_core::grid::{BATTERY, DEMAND_RESPONSE, FLYWHEEL, INTRADAY, SUPER_CAP, THERMAL};
use fcr_core::{
    run_simulation, simulation_report, split_distributed, unit_report, SimConfig, SimulationResult,
};

fn reference() -> &'static SimulationResult {
    static RUN: OnceLock<SimulationResult> = OnceLock::new();
    RUN.get_or_init(|| run_simulation(&SimConfig::reference()).unwrap())
}

#[test]
fn agc_respects_ramp_and_saturation() {
    let r = reference();
    let p = SimConfig::reference().grid;
    let dt = r.p_agc.dt();
    let slope = p.agc_ramp_limit();
    for w in r.p_agc.values().windows(2) {
        assert!((w[1] - w[0]).abs() <= slope * dt * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
    }
    assert!(r.p_agc.values().iter().all(|v| v.abs() <= p.secondary_reserve));
    assert!(r.p_prim_cmd.values().iter().all(|v| v.abs() <= p.primary_reserve));
}

#[test]
fn storage_stages_return_to_initial_charge() {
    let r = reference();
    for name in [SUPER_CAP, FLYWHEEL, BATTERY] {
        let soc = r.soc(name).unwrap();
        let p2p = soc.max().unwrap() - soc.min().unwrap();
        let last = *soc.values().last().unwrap();
        assert!(p2p > 0.0);
        assert!(last.abs() <= 0.01 * p2p, "{name}: final {last}, p2p {p2p}");
    }
    let last = r.freq_deviation.values().last().unwrap();
    assert!(last.abs() <= 1e-3, "final deviation {last}");
}

#[test]
fn frequency_falls_then_recovers() {
    let r = reference();
    let nadir = r.nadir();
    assert!(nadir < -0.01 && nadir > -0.2, "nadir {nadir}");
    // Before the disturbance nothing moves.
    let before = (100.0 / r.freq_deviation.dt()) as usize;
    assert!(r.freq_deviation.values()[..=before].iter().all(|&v| v == 0.0));
    for name in &r.unit_order {
        assert!(r.power(name).unwrap().values()[..=before].iter().all(|&v| v == 0.0), "{name}");
    }
}

#[test]
fn intraday_is_held_per_quarter_hour() {
    let r = reference();
    let p = r.power(INTRADAY).unwrap();
    let block = (900.0 / p.dt()).round() as usize;
    for (k, w) in p.values().windows(2).enumerate() {
        if (k + 1) % block != 0 {
            assert_eq!(w[0], w[1], "changed inside block at sample {}", k + 1);
        }
    }
    assert!(p.values()[..block].iter().all(|&v| v == 0.0));
    assert!(p.min().unwrap() >= 0.0);
}

#[test]
fn simulated_stages_equal_batch_split_of_droop_command() {
    let r = reference();
    let cfg = SimConfig::reference();
    let batch = split_distributed(&r.p_prim_cmd, &cfg.stages).unwrap();
    for (name, s) in &batch.stages {
        assert_eq!(s.values(), r.power(name).unwrap().values(), "{name}");
    }
}

#[test]
fn report_energy_is_soc_span() {
    let r = reference();
    for row in simulation_report(r).unwrap() {
        if let Some(u) = row.storage() {
            assert_eq!(u.e_cycled, u.soc_max - u.soc_min);
            let again = unit_report(&u.name, r.power(&u.name).unwrap()).unwrap();
            assert_eq!(&again, u);
        } else {
            assert_eq!(row.name(), INTRADAY);
        }
    }
    let names: Vec<&str> = r.storage_units().collect();
    assert_eq!(names, [SUPER_CAP, FLYWHEEL, BATTERY, DEMAND_RESPONSE, THERMAL]);
}

#[test]
fn quasi_steady_state_without_agc() {
    let mut cfg = SimConfig::reference();
    cfg.agc_enabled = false;
    cfg.duration = 3600.0;
    let r = run_simulation(&cfg).unwrap();
    let p = cfg.grid;
    // Swing fixed point: ΔP - droop·Δf - Δf/D_l = 0.
    let oracle = -1500.0 / (p.droop + 1.0 / p.load_damping);
    assert_relative_eq!(oracle, -0.078125, max_relative = 1e-12);
    let last = *r.freq_deviation.values().last().unwrap();
    assert_relative_eq!(last, oracle, max_relative = 0.02);
    assert!(r.p_agc.values().iter().all(|&v| v == 0.0));
}

#[test]
fn runs_are_deterministic() {
    let a = run_simulation(&SimConfig::reference()).unwrap();
    assert_eq!(&a, reference());
}

#[test]
fn halving_dt_barely_moves_the_nadir() {
    let mut cfg = SimConfig::reference();
    cfg.dt = 0.05;
    let fine = run_simulation(&cfg).unwrap();
    let coarse = reference().nadir();
    let rel = (fine.nadir() - coarse).abs() / coarse.abs();
    assert!(rel < 0.01, "nadir {coarse} vs {}: {rel}", fine.nadir());
}

#[test]
fn quiet_grid_stays_quiet() {
    let mut cfg = SimConfig::reference();
    cfg.disturbances.clear();
    cfg.duration = 3600.0;
    let r = run_simulation(&cfg).unwrap();
    assert!(r.freq_deviation.values().iter().all(|&v| v == 0.0));
    for s in r.unit_soc.values() {
        assert!(s.values().iter().all(|&v| v == 0.0));
    }
}
