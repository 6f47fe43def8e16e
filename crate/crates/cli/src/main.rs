use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use catsim::feasibility::{self, FeasibilityReport};
use catsim::output;
use catsim::params::config;
use catsim::protocol::{self, InitialState};
use catsim::verify::{self, VerifyOptions};
use catsim::{Error, C64};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "catsim", version, about = "Atom-assisted nanoparticle cat-state interferometry: feasibility, protocol and oracle checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in configuration: discussion, figure_transient
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// KEY=VALUE on a dotted config path, value parsed as JSON
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for sweeps and thermal sampling
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the design inequalities of a scenario
    Feasibility,
    /// Run the interferometric protocol
    Protocol(ProtocolArgs),
    /// Harmonic vs free-fall phase difference over one period
    Transient {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Compare closed forms with the Fock-space and ODE oracles
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, hide = true)]
        flip_boost_sign: bool,
    },
    /// Feasibility over a range of one configuration value
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Thermal input with this mean occupation, sampled from its P-function
    #[arg(long, value_name = "NBAR")]
    thermal: Option<f64>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Coherent input amplitude as RE,IM
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Beam displacement amplitude in stiff-trap units
    #[arg(long)]
    beta: Option<f64>,
    /// Undo the beam with the actual branch separation (default)
    #[arg(long, conflicts_with = "approximate")]
    exact_phase: bool,
    /// Undo the beam with −β
    #[arg(long)]
    approximate: bool,
    /// Add the cubic phase correction on the displaced branch
    #[arg(long)]
    cubic: bool,
    /// Run even when a constraint fails
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Dotted config path, e.g. trap.paul_soft_rad_per_s
    #[arg(long)]
    parameter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    log: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CATSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let common = &cli.common;
    if let Some(n) = common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("worker pool: {e}");
        }
    }
    match run(&cli.command, common) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Constraints(_)) {
                eprintln!("rerun with --force to continue anyway");
            }
            ExitCode::from(2)
        }
    }
}

impl Common {
    fn load(&self, default_preset: &str) -> catsim::Result<Value> {
        let text = match (&self.config, &self.preset) {
            (Some(p), _) => fs::read_to_string(p)?,
            (None, name) => {
                let name = name.as_deref().unwrap_or(default_preset);
                config::preset(name).ok_or_else(|| Error::Config(vec![format!("unknown preset `{name}`")]))?.to_string()
            }
        };
        let mut root: Value = serde_json::from_str(&text)?;
        for o in &self.overrides {
            config::apply_override(&mut root, o)?;
        }
        Ok(root)
    }

    fn create(&self, name: &str) -> catsim::Result<Option<BufWriter<File>>> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Ok(Some(BufWriter::new(File::create(dir.join(name))?)))
            }
            None => Ok(None),
        }
    }
}

fn run(cmd: &Command, common: &Common) -> catsim::Result<u8> {
    match cmd {
        Command::Feasibility => cmd_feasibility(common),
        Command::Protocol(a) => cmd_protocol(common, a),
        Command::Transient { points } => cmd_transient(common, *points),
        Command::Verify { quick, flip_boost_sign } => cmd_verify(common, *quick, *flip_boost_sign),
        Command::Sweep(a) => cmd_sweep(common, a),
    }
}

fn exit_code(report: &FeasibilityReport) -> u8 {
    report.exit_code() as u8
}

fn cmd_feasibility(common: &Common) -> catsim::Result<u8> {
    let scenario = config::parse_scenario(&common.load("discussion")?)?;
    let report = feasibility::constraint_check(&scenario)?;
    let table = output::feasibility_table(&report);
    print!("{table}");
    if let Some(mut w) = common.create("feasibility.csv")? {
        output::write_feasibility_csv(&mut w, &report)?;
        w.flush()?;
    }
    if let Some(mut w) = common.create("feasibility.txt")? {
        w.write_all(table.as_bytes())?;
        w.flush()?;
    }
    Ok(exit_code(&report))
}

fn parse_alpha(s: &str) -> catsim::Result<C64> {
    let bad = || Error::Config(vec![format!("--alpha `{s}`: expected RE,IM")]);
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

fn cmd_protocol(common: &Common, a: &ProtocolArgs) -> catsim::Result<u8> {
    let root = common.load("discussion")?;
    let scenario = config::parse_scenario(&root)?;
    let mut opts = config::parse_protocol(&root)?;
    if let Some(seed) = a.seed {
        opts.seed = seed;
        if let InitialState::Thermal { seed: s, .. } = &mut opts.initial {
            *s = seed;
        }
    }
    if let Some(alpha) = &a.alpha {
        opts.initial = InitialState::Coherent(parse_alpha(alpha)?);
    }
    if let Some(n) = a.thermal {
        opts.initial = InitialState::Thermal { mean_occupation: n, seed: opts.seed, count: a.samples };
    }
    if a.beta.is_some() {
        opts.beta_override = a.beta;
    }
    if a.exact_phase {
        opts.exact_phase = true;
    }
    if a.approximate {
        opts.exact_phase = false;
    }
    opts.cubic_correction |= a.cubic;
    opts.force |= a.force;

    let report = protocol::run_protocol(&scenario, &opts)?;
    if let Some(mut w) = common.create("protocol_steps.jsonl")? {
        for (i, r) in report.runs.iter().enumerate() {
            output::write_steps_jsonl(&mut w, i, r)?;
        }
        w.flush()?;
    }
    if let Some(mut w) = common.create("protocol_summary.csv")? {
        output::write_protocol_summary_csv(&mut w, &report.runs)?;
        w.flush()?;
    }
    let first = &report.runs[0];
    let summary = json!({
        "runs": report.runs.len(),
        "beta": report.setup.beta,
        "delta_x_m": report.setup.delta_x,
        "phi_grav": first.phi_grav,
        "phi_grav_predicted": first.phi_grav_predicted,
        "phi3": first.phi3,
        "p_down": first.p_down,
        "p_down_mean": report.p_down_mean,
        "p_down_std": report.p_down_std,
        "phi_spread": report.phi_spread,
        "visibility": first.visibility,
        "residual": first.residual,
        "squeeze_modulus": first.squeeze_modulus,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

fn cmd_transient(common: &Common, points: Option<usize>) -> catsim::Result<u8> {
    let root = common.load("figure_transient")?;
    let mut cfg = config::parse_transient(&root)?;
    if let Some(n) = points {
        cfg.points = n;
    }
    let curve = catsim::classical::transient_curve(&cfg, catsim::params::PhysicalConstants::SI.hbar)?;
    match common.create("transient.csv")? {
        Some(mut w) => {
            output::write_transient_csv(&mut w, &curve)?;
            w.flush()?;
            let dphi: Vec<f64> = curve.iter().map(|s| s.dphi_harmonic).collect();
            eprintln!(
                "t_f = {:.6e} s, {} oscillations of the harmonic phase difference",
                catsim::classical::period(cfg.omega),
                catsim::classical::count_oscillations(&dphi)
            );
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            output::write_transient_csv(&mut w, &curve)?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn cmd_verify(common: &Common, quick: bool, flip_boost_sign: bool) -> catsim::Result<u8> {
    let report = verify::run_verify(&VerifyOptions { quick, flip_boost_sign, ..Default::default() });
    let mut file = common.create("verify.jsonl")?;
    for c in &report.checks {
        println!("{} {:<36} {:.3e} < {:.0e}  ({:.2} s)", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.tolerance, c.seconds);
        if let Some(w) = file.as_mut() {
            let line = json!({ "check": c.name, "measured": c.measured, "tolerance": c.tolerance, "passed": c.passed });
            writeln!(w, "{}", serde_json::to_string(&line)?)?;
        }
    }
    if let Some(mut w) = file {
        w.flush()?;
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn cmd_sweep(common: &Common, a: &SweepArgs) -> catsim::Result<u8> {
    let mut root = common.load("discussion")?;
    let cli_values = [
        ("parameter", a.parameter.clone().map(Value::from)),
        ("from", a.from.map(Value::from)),
        ("to", a.to.map(Value::from)),
        ("steps", a.steps.map(Value::from)),
        ("log", a.log.then_some(Value::Bool(true))),
    ];
    for (key, v) in cli_values {
        if let Some(v) = v {
            config::set_path(&mut root, &format!("sweep.{key}"), v)?;
        }
    }
    if a.from.is_some() || a.to.is_some() || a.steps.is_some() {
        if let Some(obj) = root.get_mut("sweep").and_then(Value::as_object_mut) {
            obj.remove("values");
        }
    }
    let sweep = config::parse_sweep(&root)?;
    let rows = sweep
        .values
        .par_iter()
        .map(|&v| {
            let mut r = root.clone();
            config::set_path(&mut r, &sweep.parameter, Value::from(v))?;
            let scenario = config::parse_scenario(&r)?;
            Ok((v, feasibility::constraint_check(&scenario)?))
        })
        .collect::<catsim::Result<Vec<_>>>()?;
    match common.create("sweep.csv")? {
        Some(mut w) => {
            output::write_sweep_csv(&mut w, &sweep.parameter, &rows)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            output::write_sweep_csv(&mut w, &sweep.parameter, &rows)?;
            w.flush()?;
        }
    }
    let worst = rows.iter().map(|(_, r)| exit_code(r)).max().unwrap_or(0);
    Ok(worst)
}
