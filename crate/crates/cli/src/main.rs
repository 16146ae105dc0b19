//! `nse3d`: runs, sweeps, admissible timesteps, and the scalar utilities of
//! the stability analysis.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nse_core::analysis::{
    comparison_flow, comparison_ode, comparison_sequence, cubic_from_x, dt_restrictions, gronwall_envelope,
    CubicAnalysis, Variant,
};
use nse_core::harness::output::fmt_float;
use nse_core::harness::{a_priori, run, sweep, RunConfig, SweepSummary, Termination};
use nse_core::Error;

mod overrides;

const EXIT_CONFIG: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "nse3d", version, about = "Implicit-Euler Navier-Stokes runs and stability-bound utilities")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `scheme.k=0.01`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Omit wall times and run sweeps sequentially.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration and write series.csv and report.json.
    Run,
    /// Run the configuration for every combination of `--vary` values.
    Sweep(SweepArgs),
    /// Largest admissible timestep per constraint and overall.
    AdmissibleDt(AdmissibleArgs),
    /// Roots and extrema of G(y; x) = (c4 k/nu^3) y^3 - (1 + nu k/(2 c0)) y + x.
    Cubic(CubicArgs),
    /// Discrete Gronwall envelope (1+b)^-n x0 + ((1+b)/b) r_max.
    Gronwall(GronwallArgs),
    /// Comparison ODE value, or the comparison sequence against its flow.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `KEY=V1,V2,...`; the sweep is the product over all `--vary` flags.
    #[arg(long, value_name = "KEY=VALUES", required = true)]
    vary: Vec<String>,
}

#[derive(Args, Debug)]
struct AdmissibleArgs {
    /// semi_small, semi_short, full_small, full_short or all. Defaults to
    /// the configured monitor, or all when none is set.
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Args, Debug)]
struct CubicArgs {
    #[arg(long)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 1.0)]
    c4: f64,
}

#[derive(Args, Debug)]
struct GronwallArgs {
    #[arg(long)]
    b: f64,
    #[arg(long)]
    x0: f64,
    #[arg(long, default_value_t = 0.0)]
    r_max: f64,
    #[arg(long)]
    n: u64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    z0: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    c4: f64,
    /// Print z(t)^2 at this time.
    #[arg(long, conflicts_with = "k")]
    t: Option<f64>,
    /// Tabulate the comparison sequence with this timestep.
    #[arg(long)]
    k: Option<f64>,
    /// Number of sequence steps; default runs to `--fraction` of the blow-up time.
    #[arg(long, requires = "k")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.9, requires = "k")]
    fraction: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } | Error::InfeasibleConfig(_) => EXIT_INFEASIBLE,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Run => cmd_run(&load(cli, &[])?),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::AdmissibleDt(a) => cmd_admissible(&load(cli, &[])?, a),
        Command::Cubic(a) => cmd_cubic(a),
        Command::Gronwall(a) => {
            println!("envelope = {}", fmt_float(gronwall_envelope(a.b, a.x0, a.r_max, a.n)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Reads `--config` and applies `--set`, then `extra`, then
/// `--deterministic` and `--out`.
fn load(cli: &Cli, extra: &[(String, String)]) -> Result<RunConfig, Error> {
    let path = cli.config.as_deref().ok_or_else(|| Error::InvalidParameter("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let mut sets = cli.set.iter().map(|s| overrides::split(s)).collect::<Result<Vec<_>, _>>()?;
    sets.extend_from_slice(extra);
    let mut config =
        overrides::parse(&text, &sets).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    if cli.deterministic {
        config.scheme.deterministic = true;
    }
    if let Some(out) = &cli.out {
        config.output.dir = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn termination_code(t: &Termination) -> ExitCode {
    match t {
        Termination::Completed | Termination::HorizonReached { .. } => ExitCode::SUCCESS,
        Termination::BoundViolated { .. } => ExitCode::from(EXIT_VIOLATED),
        Termination::Nonconvergence { .. } => ExitCode::from(EXIT_NONCONVERGENCE),
    }
}

fn cmd_run(config: &RunConfig) -> Result<ExitCode, Error> {
    let r = run(config)?;
    let last = r.last();
    let first = r.first_violation().map_or("none".to_string(), |n| n.to_string());
    let out = config.output.dir.as_deref().map_or("not written".to_string(), |d| d.display().to_string());
    println!(
        "{}: {} steps, t = {}, |u|^2 = {}, |grad u|^2 = {}, first violation {first}, outputs {out}",
        r.termination.name(),
        last.n,
        fmt_float(last.t),
        fmt_float(last.norms.l2_sq),
        fmt_float(last.norms.h1_sq),
    );
    Ok(termination_code(&r.termination))
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<ExitCode, Error> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for v in &args.vary {
        let (key, values) = overrides::split(v)?;
        combos = combos
            .into_iter()
            .flat_map(|c| {
                let key = key.clone();
                values.split(',').map(move |val| {
                    let mut c = c.clone();
                    c.push((key.clone(), val.trim().to_string()));
                    c
                })
            })
            .collect();
    }
    let mut configs = Vec::new();
    for (i, combo) in combos.iter().enumerate() {
        let mut c = load(cli, combo)?;
        if let Some(dir) = c.output.dir.take() {
            c.output.dir = Some(dir.join(format!("run_{i:03}")));
        }
        configs.push(c);
    }
    let entries = sweep(&configs);
    print!("{}", SweepSummary(&entries));
    let worst = entries
        .iter()
        .map(|e| match &e.outcome {
            Ok(r) => match r.termination {
                Termination::BoundViolated { .. } => EXIT_VIOLATED,
                Termination::Nonconvergence { .. } => EXIT_NONCONVERGENCE,
                _ => 0,
            },
            Err(e) => exit_code(e),
        })
        .max()
        .unwrap_or(0);
    Ok(ExitCode::from(worst))
}

fn cmd_admissible(config: &RunConfig, args: &AdmissibleArgs) -> Result<ExitCode, Error> {
    let variants: Vec<Variant> = match args.variant.as_deref() {
        Some("all") => Variant::ALL.to_vec(),
        Some(v) => vec![v.parse().map_err(Error::InvalidParameter)?],
        None => config.run.monitor.variant().map_or(Variant::ALL.to_vec(), |v| vec![v]),
    };
    let (consts, bounds, _) = a_priori(config)?;
    let mut infeasible = false;
    for v in variants {
        println!("{}", v.name());
        match dt_restrictions(&bounds, &consts, v) {
            Ok(a) => {
                for c in &a.constraints {
                    println!("  {:<6} k_max = {}", c.tag, fmt_float(c.k_max));
                }
                match a.binding {
                    Some(tag) => println!("  k_max = {} bound by {tag}", fmt_float(a.k_max)),
                    None => println!("  k_max = inf (unconstrained)"),
                }
                if config.scheme.k > a.k_max {
                    println!("  configured k = {} exceeds k_max", fmt_float(config.scheme.k));
                }
            }
            Err(Error::Infeasible { tag, slack }) => {
                infeasible = true;
                println!("  infeasible: {tag} fails for every k > 0 (slack {})", fmt_float(slack));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(if infeasible { ExitCode::from(EXIT_INFEASIBLE) } else { ExitCode::SUCCESS })
}

fn print_cubic(c: &CubicAnalysis) {
    let opt = |v: Option<f64>| v.map_or("none".to_string(), fmt_float);
    let ok = |b: bool| if b { "holds" } else { "violated" };
    println!("x = {}", fmt_float(c.x));
    println!("cubic_coeff = {}", fmt_float(c.cubic_coeff));
    println!("linear_coeff = {}", fmt_float(c.linear_coeff));
    println!("y_plus = {}", fmt_float(c.y_plus));
    println!("y_minus = {}", fmt_float(c.y_minus));
    println!("G(y_plus) = {}", fmt_float(c.g_at_y_plus));
    println!("y0 = {}", fmt_float(c.y0));
    println!("y1 = {}", opt(c.y1));
    println!("y2 = {}", opt(c.y2));
    println!("a = {}", fmt_float(c.a));
    println!("y_star = {}", fmt_float(c.y_star));
    println!("positive roots: {}", if c.has_positive_roots { "yes" } else { "no" });
    println!("dtf1: {}", ok(c.dtf1_ok));
    println!("dtf3: {}", ok(c.dtf3_ok));
    if c.degenerate {
        println!("degenerate cubic (x = 0): roots 0 and +-sqrt(linear_coeff/cubic_coeff)");
    } else if !c.has_positive_roots {
        println!("no positive roots; dtf1 violated");
    }
}

fn cmd_cubic(a: &CubicArgs) -> Result<ExitCode, Error> {
    print_cubic(&cubic_from_x(a.x, a.nu, a.k, a.c0, a.c4)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(a: &CompareArgs) -> Result<ExitCode, Error> {
    if let Some(t) = a.t {
        println!("z(t)^2 = {}", fmt_float(comparison_ode(a.z0, a.nu, a.c4, t)?));
        println!("blow-up time = {}", fmt_float(a.nu.powi(3) / (2.0 * a.c4 * a.z0 * a.z0)));
        return Ok(ExitCode::SUCCESS);
    }
    let Some(k) = a.k else {
        return Err(Error::InvalidParameter("compare needs --t or --k".into()));
    };
    // the flow of the sequence's own rate blows up at nu^3/(4 c4 z0^2)
    let blowup = a.nu.powi(3) / (4.0 * a.c4 * a.z0 * a.z0);
    let n = match a.n {
        Some(n) => n,
        None => (a.fraction * blowup / k).floor() as usize,
    };
    let seq = comparison_sequence(a.z0, a.nu, a.c4, k, n)?;
    println!("{:<6} {:<22} {:<24} {:<24} ok", "n", "t", "zeta_n", "zeta(t_n)");
    let mut all = true;
    for (i, zeta) in seq.iter().enumerate() {
        let t = i as f64 * k;
        let flow = comparison_flow(a.z0, a.nu, a.c4, t)?;
        let ok = *zeta <= flow;
        all &= ok;
        println!("{i:<6} {:<22} {:<24} {:<24} {ok}", fmt_float(t), fmt_float(*zeta), fmt_float(flow));
    }
    println!("{}", if all { "zeta_n <= zeta(t_n) on every row" } else { "comparison FAILED" });
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VIOLATED) })
}
