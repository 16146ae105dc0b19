use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use super::output::{float, write_atomic, write_csv};
use crate::analysis::{
    compute_bounds, dt_restrictions, smallness_check, step_verdict, Admissible, BoundsReport, Check, ConstantsSet,
    HorizonReport, Monitor, SmallnessVariant, StepContext, StepVerdict, Variant,
};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::{Forcing, ForcingNorms};
use crate::initial::make_field;
use crate::spectral::{norms, NormBundle};
use crate::stepper::step;

pub const CSV_NAME: &str = "series.csv";
pub const REPORT_NAME: &str = "report.json";

/// One time level. Row 0 holds the initial data and carries no verdict.
#[derive(Clone, Debug)]
pub struct Row {
    pub n: u64,
    pub t: f64,
    pub norms: NormBundle,
    pub fp_iters: usize,
    pub energy_residual: f64,
    pub verdict: Option<StepVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The next step would pass the short-time horizon `t_star`.
    HorizonReached {
        #[serde(with = "float")]
        t_star: f64,
    },
    /// Step `step` failed to converge; rows stop at `step − 1`.
    Nonconvergence {
        step: u64,
        iterations: usize,
        residual: f64,
    },
    /// A conclusion failed at step `step`, which is the last row.
    BoundViolated {
        step: u64,
    },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::HorizonReached { .. } => "horizon_reached",
            Termination::Nonconvergence { .. } => "nonconvergence",
            Termination::BoundViolated { .. } => "bound_violated",
        }
    }
}

/// Largest timestep of one variant, or the tag of a constraint no
/// timestep can satisfy.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AdmissibleEntry {
    Feasible(Admissible),
    Infeasible { variant: Variant, infeasible: &'static str },
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub config: RunConfig,
    pub bounds: BoundsReport,
    pub horizons: HorizonReport,
    pub smallness: BTreeMap<&'static str, Check>,
    pub admissible: Vec<AdmissibleEntry>,
    pub termination: Termination,
    pub rows: Vec<Row>,
    pub final_field: SpectralField,
    /// Seconds; `None` for deterministic runs.
    pub wall_time: Option<f64>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    config: RunConfig,
    bounds: &'a BoundsReport,
    horizons: &'a HorizonReport,
    smallness: &'a BTreeMap<&'static str, Check>,
    admissible: &'a [AdmissibleEntry],
    termination: &'a Termination,
    steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
}

impl RunReport {
    /// Index of the first step whose verdict records a violation.
    pub fn first_violation(&self) -> Option<u64> {
        self.rows.iter().find(|r| r.verdict.as_ref().is_some_and(|v| v.violation())).map(|r| r.n)
    }

    pub fn last(&self) -> &Row {
        self.rows.last().expect("a report always holds the initial row")
    }

    /// The JSON report. The output directory is left out of the config echo
    /// so that identical runs written to different places compare equal.
    pub fn to_json(&self) -> Result<String> {
        let mut config = self.config.clone();
        config.output.dir = None;
        let doc = ReportJson {
            config,
            bounds: &self.bounds,
            horizons: &self.horizons,
            smallness: &self.smallness,
            admissible: &self.admissible,
            termination: &self.termination,
            steps: self.last().n,
            wall_time: self.wall_time,
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `series.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join(CSV_NAME), |w| write_csv(w, &self.rows))?;
        let json = self.to_json()?;
        write_atomic(&dir.join(REPORT_NAME), |w| Ok(w.write_all(json.as_bytes())?))
    }
}

fn smallness_table(bounds: &BoundsReport, consts: &ConstantsSet) -> BTreeMap<&'static str, Check> {
    [
        ("continuous_k0k1", SmallnessVariant::ContinuousK0K1),
        ("continuous_k1", SmallnessVariant::ContinuousK1),
        ("semi", SmallnessVariant::Semi),
        ("full", SmallnessVariant::Full),
    ]
    .into_iter()
    .map(|(name, v)| (name, smallness_check(bounds, consts, v)))
    .collect()
}

/// Refuses a monitored run whose timestep no admissible-`k` table allows.
fn check_feasible(monitor: Monitor, k: f64, table: &[AdmissibleEntry]) -> Result<()> {
    let Some(variant) = monitor.variant() else { return Ok(()) };
    let entry = table.iter().find(|e| match e {
        AdmissibleEntry::Feasible(a) => a.variant == variant,
        AdmissibleEntry::Infeasible { variant: v, .. } => *v == variant,
    });
    match entry {
        Some(AdmissibleEntry::Infeasible { infeasible, .. }) => Err(Error::InfeasibleConfig(format!(
            "{} requires {infeasible}, which fails for every k > 0",
            variant.name()
        ))),
        Some(AdmissibleEntry::Feasible(a)) if k > a.k_max => Err(Error::InfeasibleConfig(format!(
            "k = {k} exceeds k_max = {} for {}, bound by {}",
            a.k_max,
            variant.name(),
            a.binding.unwrap_or("none")
        ))),
        _ => Ok(()),
    }
}

fn bounds_for(
    config: &RunConfig,
    u0: &SpectralField,
    forcing: &Forcing,
    consts: &ConstantsSet,
) -> Result<BoundsReport> {
    let k = config.scheme.k;
    let n_steps = config.n_steps()?;
    let times: Vec<f64> = if n_steps == 0 { vec![0.0] } else { (1..=n_steps).map(|n| n as f64 * k).collect() };
    compute_bounds(u0, forcing, &times, config.scheme.nu, consts, k)
}

/// Constants and a-priori bounds of `config`, as a run would compute them,
/// without stepping.
pub fn a_priori(config: &RunConfig) -> Result<(ConstantsSet, BoundsReport, HorizonReport)> {
    config.validate()?;
    let grid = config.grid()?;
    let consts = config.constants()?;
    let u0 = make_field(grid, &config.initial, config.run.seed)?;
    let forcing = Forcing::build(&config.forcing, grid, config.run.seed.wrapping_add(1))?;
    let bounds = bounds_for(config, &u0, &forcing, &consts)?;
    Ok((consts, bounds, HorizonReport::new(&bounds, &consts)))
}

/// Runs `config` to completion, the horizon, a bound violation or a
/// failed inner solve, and writes outputs if an output directory is set.
///
/// Monitors only observe: they never change the trajectory.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    config.validate()?;
    let grid = config.grid()?;
    let consts = config.constants()?;
    let cfg = &config.scheme;
    let (k, nu) = (cfg.k, cfg.nu);
    let seed = config.run.seed;
    let monitor = config.run.monitor;
    let n_steps = config.n_steps()?;

    let u0 = make_field(grid, &config.initial, seed)?;
    let forcing = Forcing::build(&config.forcing, grid, seed.wrapping_add(1))?;
    let bounds = bounds_for(config, &u0, &forcing, &consts)?;
    let horizons = HorizonReport::new(&bounds, &consts);
    let smallness = smallness_table(&bounds, &consts);
    let admissible: Vec<AdmissibleEntry> = Variant::ALL
        .iter()
        .map(|&v| match dt_restrictions(&bounds, &consts, v) {
            Ok(a) => Ok(AdmissibleEntry::Feasible(a)),
            Err(Error::Infeasible { tag, .. }) => Ok(AdmissibleEntry::Infeasible { variant: v, infeasible: tag }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    check_feasible(monitor, k, &admissible)?;

    let out_dir = config.output.dir.as_deref();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let snapshot = |n: u64, u: &SpectralField| -> Result<()> {
        match out_dir {
            Some(dir) if config.run.snapshot_every > 0 && n.is_multiple_of(config.run.snapshot_every) => {
                u.save(&dir.join(format!("snap_{n:08}.fld")))
            }
            _ => Ok(()),
        }
    };

    let horizon = if config.run.allow_over_horizon { None } else { monitor.horizon(&horizons) };
    let mut u = u0;
    let mut prev = norms(&u);
    let mut rows = vec![Row { n: 0, t: 0.0, norms: prev, fp_iters: 0, energy_residual: 0.0, verdict: None }];
    snapshot(0, &u)?;
    let mut termination = Termination::Completed;
    for n in 1..=n_steps {
        let t = n as f64 * k;
        if let Some(t_star) = horizon.filter(|&h| t > h) {
            termination = Termination::HorizonReached { t_star };
            break;
        }
        let f_n = forcing.at(t);
        let res = match step(&u, &f_n, cfg) {
            Ok(r) => r,
            Err(Error::NonConvergence { iterations, residual }) => {
                termination = Termination::Nonconvergence { step: n, iterations, residual };
                break;
            }
            Err(e) => return Err(e),
        };
        let new = norms(&res.u_new);
        let f_norms = ForcingNorms { hm1_sq: f_n.hm1_sq(), l2_sq: f_n.l2_sq() };
        let ctx = StepContext {
            scheme: cfg.scheme,
            monitor,
            k,
            nu,
            consts: &consts,
            bounds: &bounds,
            horizons: &horizons,
            t,
        };
        let verdict = step_verdict(&prev, &new, &f_norms, &ctx)?;
        let violated = verdict.violation();
        rows.push(Row {
            n,
            t,
            norms: new,
            fp_iters: res.fp_iters,
            energy_residual: res.energy_identity_residual,
            verdict: Some(verdict),
        });
        u = res.u_new;
        prev = new;
        snapshot(n, &u)?;
        if violated {
            termination = Termination::BoundViolated { step: n };
            break;
        }
    }

    let wall_time = (!cfg.deterministic).then(|| start.elapsed().as_secs_f64());
    let report = RunReport {
        config: config.clone(),
        bounds,
        horizons,
        smallness,
        admissible,
        termination,
        rows,
        final_field: u,
        wall_time,
    };
    if let Some(dir) = out_dir {
        report.write(dir)?;
    }
    Ok(report)
}
