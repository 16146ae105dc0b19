use std::fmt;

use rayon::prelude::*;

use super::config::RunConfig;
use super::run::{run, RunReport};
use crate::analysis::Monitor;
use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::stepper::Scheme;

/// Outcome of one configuration of a sweep.
#[derive(Debug)]
pub struct SweepEntry {
    pub k: f64,
    pub scheme: Scheme,
    pub monitor: Monitor,
    pub outcome: Result<RunReport>,
}

/// Runs every configuration independently. Errors are recorded per run.
/// Runs execute in parallel unless any configuration asks for
/// deterministic mode.
pub fn sweep(configs: &[RunConfig]) -> Vec<SweepEntry> {
    let one =
        |c: &RunConfig| SweepEntry { k: c.scheme.k, scheme: c.scheme.scheme, monitor: c.run.monitor, outcome: run(c) };
    if configs.iter().any(|c| c.scheme.deterministic) {
        configs.iter().map(one).collect()
    } else {
        configs.par_iter().map(one).collect()
    }
}

/// Table of `(k, scheme, monitor)` against termination and first
/// violation step.
pub struct SweepSummary<'a>(pub &'a [SweepEntry]);

impl fmt::Display for SweepSummary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<4} {:<14} {:<15} {:<11} {:<16} first_violation", "run", "k", "scheme", "monitor", "outcome")?;
        for (i, e) in self.0.iter().enumerate() {
            let scheme = match e.scheme {
                Scheme::SemiImplicit => "semi_implicit",
                Scheme::FullyImplicit => "fully_implicit",
            };
            let monitor = e.monitor.variant().map_or("none", |v| v.name());
            let (outcome, first) = match &e.outcome {
                Ok(r) => {
                    (r.termination.name().to_string(), r.first_violation().map_or("none".into(), |n| n.to_string()))
                }
                Err(err) => (format!("error: {err}"), "-".into()),
            };
            writeln!(f, "{i:<4} {:<14} {scheme:<15} {monitor:<11} {outcome:<16} {first}", format!("{:?}", e.k))?;
        }
        Ok(())
    }
}

fn l2_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(crate::error::Error::GridMismatch { left: a.grid().n(), right: b.grid().n() });
    }
    Ok((a - b).l2_sq().sqrt())
}

fn log2_ratio(coarse: f64, fine: f64) -> Result<f64> {
    if !(coarse > 0.0 && fine > 0.0) {
        return Err(invalid(format!("order undefined for errors {coarse} and {fine}")));
    }
    Ok((coarse / fine).log2())
}

/// Observed orders `log2(e(k_i)/e(k_{i+1}))` for solutions at successively
/// halved timesteps, with errors measured in L² against `reference`.
pub fn richardson_order(solutions: &[SpectralField], reference: &SpectralField) -> Result<Vec<f64>> {
    let errs = solutions.iter().map(|s| l2_distance(s, reference)).collect::<Result<Vec<_>>>()?;
    errs.windows(2).map(|w| log2_ratio(w[0], w[1])).collect()
}

/// Order from three solutions at `k`, `k/2`, `k/4` without a reference:
/// `log2(|u_k − u_{k/2}| / |u_{k/2} − u_{k/4}|)`.
pub fn self_convergence_order(k: &SpectralField, k2: &SpectralField, k4: &SpectralField) -> Result<f64> {
    log2_ratio(l2_distance(k, k2)?, l2_distance(k2, k4)?)
}
