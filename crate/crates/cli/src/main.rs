use clap::{Args, Parser, Subcommand, ValueEnum};
use mwelim_cli::error::CliError;
use mwelim_cli::output::{num, CsvOut, S_TABLE};
use mwelim_cli::run::{run, validity_only, RunOptions};
use mwelim_cli::scenario::{parse_area, Scenario};
use mwelim_cli::{bundled, BUNDLED};
use mwelim::elimination::s_integral::{s_integral_closed, s_integral_quadrature, s_integral_rwa};
use mwelim::pulses::PulseShape;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "mwelim", version, about = "Adiabatic elimination scenarios for driven multilevel atoms")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the momentum families (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file; the bundled default of the subcommand when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `output.samples`.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct PulseArgs {
    #[command(flatten)]
    common: Common,
    /// Pulse area: `pi`, `pi/2`, `3pi/4` or radians.
    #[arg(long)]
    area: Option<String>,
    /// Override `momentum.families`.
    #[arg(long)]
    families: Option<usize>,
    /// Also propagate the full system.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Five-level benchmark: full numerics vs four elimination methods.
    FiveLevelCompare(Common),
    /// ⁸⁷Rb Raman pulse over a row of Doppler families.
    RamanPulse(PulseArgs),
    /// Bragg pulse between ground-state momenta p and p - 2ħk.
    BraggPulse(PulseArgs),
    /// Double Raman pulse splitting into both ±ħk_eff orders.
    DoubleRamanPulse(PulseArgs),
    /// Double Bragg pulse splitting into both ±2ħk orders.
    DoubleBraggPulse(PulseArgs),
    /// Validity report only.
    Validity(Common),
    /// Ŝ for one pulse over a sweep of detunings, closed form vs quadrature.
    SIntegral(SArgs),
    /// List the bundled scenarios.
    Scenarios,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Shape {
    Box,
    SineSquared,
    Blackman,
}

#[derive(Args, Debug, Clone)]
struct SArgs {
    #[arg(long, value_enum, default_value = "box")]
    shape: Shape,
    /// Amplitude of both envelopes (rad/s).
    #[arg(long, default_value_t = 1.0)]
    a0: f64,
    #[arg(long, default_value_t = 1.0)]
    duration_s: f64,
    /// Evaluation time; the middle of the window by default.
    #[arg(long)]
    t_s: Option<f64>,
    /// Detunings (rad/s), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [100.0])]
    gamma: Vec<f64>,
    /// Draw this many extra detunings uniformly from `[gamma_min, gamma_max]`.
    #[arg(long, default_value_t = 0)]
    random: usize,
    #[arg(long, default_value_t = 10.0)]
    gamma_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    gamma_max: f64,
    /// Report the RWA value `-Ω_n Ω_j / γ` instead of the closed form.
    #[arg(long)]
    rwa: bool,
}

fn load(common: &Common, default: &str) -> Result<(Scenario, String), CliError> {
    let (mut s, source) = match &common.config {
        Some(p) => (Scenario::from_file(p)?, p.display().to_string()),
        None => (bundled(default)?, format!("bundled:{default}")),
    };
    if let Some(n) = common.samples {
        s.output.samples = n;
    }
    Ok((s, source))
}

fn load_pulse(a: &PulseArgs, default: &str) -> Result<(Scenario, String), CliError> {
    let (mut s, source) = load(&a.common, default)?;
    if let Some(area) = &a.area {
        let v = parse_area(area).map_err(|m| CliError::Config { field: "--area".into(), message: m })?;
        let p = s.pulse.as_mut().ok_or_else(|| CliError::Config { field: "pulse".into(), message: "missing".into() })?;
        p.area_rad = Some(v);
        p.amplitude_rad_s = None;
    }
    if let Some(n) = a.families {
        s.momentum.families = n;
        s.momentum.base_momenta = None;
    }
    s.propagate_full |= a.full;
    Ok((s, source))
}

fn s_table(a: &SArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let shape = match a.shape {
        Shape::Box => PulseShape::boxcar(a.a0, 0.0, a.duration_s)?,
        Shape::SineSquared => PulseShape::sine_squared(a.a0, 0.0, a.duration_s)?,
        Shape::Blackman => PulseShape::blackman(0.42 * a.a0, 0.5 * a.a0, 0.08 * a.a0, 0.0, a.duration_s)?,
    };
    let t = a.t_s.unwrap_or(0.5 * a.duration_s);
    let mut gammas = a.gamma.clone();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..a.random {
        gammas.push(rng.random_range(a.gamma_min..=a.gamma_max));
    }
    std::fs::create_dir_all(out)?;
    let mut csv = CsvOut::create(&out.join("s_integral.csv"), &S_TABLE)?;
    println!("{:>14} {:>7} {:>24} {:>24} {:>10}", "gamma_rad_s", "mode", "value", "quadrature", "|diff|");
    for g in gammas {
        let value = if a.rwa {
            s_integral_rwa(&shape, &shape, g, t)?
        } else {
            s_integral_closed(&shape, &shape, g, 0.0, t)?
        };
        let quad = s_integral_quadrature(&shape, &shape, g, 0.0, t, 1e-12)?;
        let diff = (value - quad).norm();
        let mode = if a.rwa { "rwa" } else { "closed" };
        println!("{g:>14.6e} {mode:>7} {:>24} {:>24} {diff:>10.3e}", fmt_c(value), fmt_c(quad));
        csv.row([num(g), mode.into(), num(value.re), num(value.im), num(quad.re), num(quad.im), num(diff), num(t)])?;
    }
    csv.finish()?;
    Ok(())
}

fn fmt_c(z: mwelim::C64) -> String {
    format!("{:+.6e}{:+.6e}i", z.re, z.im)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        // Fails only if the pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let opts = |source: String| RunOptions { out: cli.out.clone(), threads: cli.threads, seed: cli.seed, source };
    let (scenario, source) = match &cli.command {
        Command::Run { config } => (Scenario::from_file(config)?, config.display().to_string()),
        Command::FiveLevelCompare(c) => load(c, "five_level_compare")?,
        Command::RamanPulse(a) => load_pulse(a, "raman_pi")?,
        Command::BraggPulse(a) => load_pulse(a, "bragg_pi")?,
        Command::DoubleRamanPulse(a) => load_pulse(a, "double_raman_pi")?,
        Command::DoubleBraggPulse(a) => load_pulse(a, "double_bragg_pi")?,
        Command::Validity(c) => {
            let (s, source) = load(c, "five_level_compare")?;
            let (report, _) = validity_only(&s, &opts(source))?;
            println!(
                "gamma_star {} | coupling ratio {:.4} | verdict {:?}",
                report.gamma_star, report.coupling_ratio, report.verdict
            );
            return Ok(());
        }
        Command::SIntegral(a) => return s_table(a, cli.seed, &cli.out),
        Command::Scenarios => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
            return Ok(());
        }
    };
    let art = run(&scenario, &opts(source))?;
    for f in &art.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
