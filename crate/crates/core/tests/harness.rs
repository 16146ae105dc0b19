use std::f64::consts::PI;

use nse_core::analysis::{ConstantsOverrides, Monitor};
use nse_core::field::SpectralField;
use nse_core::forcing::ForcingSpec;
use nse_core::harness::{
    run, sweep, GridSection, OutputSection, RunConfig, RunSection, Termination, CSV_NAME, REPORT_NAME,
};
use nse_core::initial::InitialData;
use nse_core::stepper::{Scheme, SchemeConfig};
use nse_core::Error;

fn config(scheme: Scheme, initial: InitialData, k: f64, n_steps: u64, monitor: Monitor) -> RunConfig {
    RunConfig {
        grid: GridSection { n: 16 },
        scheme: SchemeConfig::new(scheme, k, 1.0),
        initial,
        forcing: ForcingSpec::Zero,
        constants: ConstantsOverrides::default(),
        run: RunSection { n_steps: Some(n_steps), monitor, ..Default::default() },
        output: OutputSection::default(),
    }
}

fn small_random(amplitude: f64) -> InitialData {
    InitialData::Random { seed: Some(11), slope: 1.0, amplitude, kmax: 3 }
}

#[test]
fn shear_run_matches_closed_form() {
    for scheme in [Scheme::SemiImplicit, Scheme::FullyImplicit] {
        let r = run(&config(scheme, InitialData::Shear { amplitude: 1.0 }, 0.01, 100, Monitor::None)).unwrap();
        assert_eq!(r.termination, Termination::Completed);
        assert_eq!(r.rows.len(), 101);
        let expect = 4.0 * PI.powi(3) / 1.01f64.powi(200);
        let got = r.last().norms.l2_sq;
        assert!((got - expect).abs() <= 1e-10 * expect, "{scheme:?}: {got} vs {expect}");
    }
}

#[test]
fn zero_data_passes_every_monitor() {
    for (scheme, monitor) in [
        (Scheme::SemiImplicit, Monitor::SemiSmall),
        (Scheme::SemiImplicit, Monitor::SemiShort),
        (Scheme::FullyImplicit, Monitor::FullSmall),
        (Scheme::FullyImplicit, Monitor::FullShort),
        (Scheme::FullyImplicit, Monitor::None),
    ] {
        let r = run(&config(scheme, InitialData::Zero, 0.1, 5, monitor)).unwrap();
        assert_eq!(r.termination, Termination::Completed, "{monitor:?}");
        for row in &r.rows[1..] {
            let v = row.verdict.as_ref().unwrap();
            assert!(!v.violation());
            assert!(v.l2_recurrence.ok && v.h1_recurrence.ok && v.smallness.ok);
        }
    }
}

#[test]
fn full_small_refuses_large_data_before_stepping() {
    let c = config(Scheme::FullyImplicit, small_random(1.0), 0.01, 10, Monitor::FullSmall);
    match run(&c) {
        Err(Error::InfeasibleConfig(msg)) => assert!(msg.contains("hypf"), "{msg}"),
        other => panic!("expected InfeasibleConfig, got {other:?}"),
    }
}

#[test]
fn oversized_timestep_names_the_binding_constraint() {
    let c = config(Scheme::FullyImplicit, InitialData::Zero, 2.0, 1, Monitor::FullSmall);
    match run(&c) {
        Err(Error::InfeasibleConfig(msg)) => assert!(msg.contains("dtf0"), "{msg}"),
        other => panic!("expected InfeasibleConfig, got {other:?}"),
    }
}

#[test]
fn unforced_energy_is_nonincreasing() {
    for scheme in [Scheme::SemiImplicit, Scheme::FullyImplicit] {
        let r = run(&config(scheme, small_random(2.0), 0.05, 40, Monitor::None)).unwrap();
        for w in r.rows.windows(2) {
            assert!(w[1].norms.l2_sq < w[0].norms.l2_sq);
        }
    }
}

#[test]
fn short_time_monitor_stops_at_the_horizon() {
    let mut c = config(Scheme::SemiImplicit, small_random(1.0), 0.01, 100_000, Monitor::SemiShort);
    let r = run(&c).unwrap();
    let t_star = r.horizons.t_star_semi;
    assert_eq!(r.termination, Termination::HorizonReached { t_star });
    let last = r.last();
    assert!(last.t <= t_star && last.t + 0.01 > t_star);

    c.run.allow_over_horizon = true;
    c.run.n_steps = Some(last.n + 3);
    let r = run(&c).unwrap();
    assert_eq!(r.termination, Termination::Completed);
    assert!(r.last().verdict.as_ref().unwrap().bound.is_none());
}

#[test]
fn stop_rule_is_exclusive() {
    let mut c = config(Scheme::SemiImplicit, InitialData::Zero, 0.1, 5, Monitor::None);
    c.run.t_end = Some(1.0);
    assert!(matches!(run(&c), Err(Error::InvalidParameter(_))));
    c.run.n_steps = None;
    assert_eq!(c.n_steps().unwrap(), 10);
    c.run.t_end = None;
    assert!(run(&c).is_err());
}

#[test]
fn outputs_are_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Scheme::FullyImplicit, small_random(0.3), 0.02, 6, Monitor::FullSmall);
    c.scheme.deterministic = true;
    c.run.snapshot_every = 3;
    let mut files = Vec::new();
    for sub in ["a", "b"] {
        c.output.dir = Some(dir.path().join(sub));
        let r = run(&c).unwrap();
        let d = dir.path().join(sub);
        let csv = std::fs::read_to_string(d.join(CSV_NAME)).unwrap();
        let json = std::fs::read_to_string(d.join(REPORT_NAME)).unwrap();
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.starts_with("n,t,l2_sq,h1_sq,h2_sq,l3,fp_iters,energy_residual,verdict_l2,"));
        assert!(!json.contains("wall_time"));
        let snaps: Vec<_> = [0, 3, 6].iter().map(|n| d.join(format!("snap_{n:08}.fld"))).collect();
        let last = SpectralField::load(&snaps[2]).unwrap();
        assert_eq!(last, r.final_field);
        files.push((csv, json, std::fs::read(&snaps[2]).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn csv_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Scheme::SemiImplicit, small_random(0.5), 0.05, 3, Monitor::SemiSmall);
    c.output.dir = Some(dir.path().to_path_buf());
    let r = run(&c).unwrap();
    let csv = std::fs::read_to_string(dir.path().join(CSV_NAME)).unwrap();
    let line = csv.lines().nth(3).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields.len(), 17);
    assert_eq!(fields[3].parse::<f64>().unwrap(), r.rows[2].norms.h1_sq);
    let first = csv.lines().nth(1).unwrap();
    assert!(first.ends_with("na,na,na,na,na,na,na,na,na"), "{first}");
}

#[test]
fn sweep_records_errors_per_run() {
    let good = config(Scheme::FullyImplicit, small_random(0.3), 0.02, 4, Monitor::FullSmall);
    let bad = config(Scheme::FullyImplicit, small_random(1.0), 0.02, 4, Monitor::FullSmall);
    let entries = sweep(&[good.clone(), bad.clone(), good.clone(), bad]);
    let infeasible: Vec<bool> = entries.iter().map(|e| matches!(e.outcome, Err(Error::InfeasibleConfig(_)))).collect();
    assert_eq!(infeasible, [false, true, false, true]);
    let a = entries[0].outcome.as_ref().unwrap();
    let b = entries[2].outcome.as_ref().unwrap();
    assert_eq!(a.final_field, b.final_field);
    // parallel runs differ only in wall time
    let strip = |r: &nse_core::harness::RunReport| {
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time");
        v
    };
    assert_eq!(strip(a), strip(b));
    let table = nse_core::harness::SweepSummary(&entries).to_string();
    assert_eq!(table.lines().count(), 5);
    assert!(table.contains("infeasible"));
}
