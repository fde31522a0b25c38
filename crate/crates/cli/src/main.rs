mod commands;
mod config;
mod error;
mod output;
mod svg;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{BlochRange, Command, Format, Initial, Overrides, RunConfig, SweepVariable};
use error::CliError;

/// Extended SSH chain with waveguide-mediated hopping: topology, edge states, disorder
/// and dissipative dynamics.
#[derive(Parser, Debug)]
#[command(name = "wgqed-ssh", version, about)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Re-run the computation recorded in a previous CSV or JSON output.
    #[arg(long, conflicts_with = "config")]
    replay: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write an SVG next to the output file.
    #[arg(long, global = true)]
    plot: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grids and ensembles.
    #[arg(long, global = true, env = "WGQED_WORKERS")]
    workers: Option<usize>,
    /// Report failures as JSON on stderr.
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Winding number over an (a/λ, b/a) grid.
    PhaseDiagram(PhaseArgs),
    /// Open-chain spectrum along a sweep of b/a or a/λ.
    Spectrum(SpectrumArgs),
    /// Mid-gap pair populations and localization length.
    Edge(ModelArgs),
    /// Edge-state fidelity and mass gap under positional disorder.
    Disorder(DisorderArgs),
    /// Survival probability of a single excitation.
    Dynamics(DynamicsArgs),
    /// Collective decay rates and modes.
    Decay(ModelArgs),
    /// Render the SVG for a saved output.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Number of atoms (even).
    #[arg(short = 'M', long = "sites", visible_alias = "M")]
    sites: Option<usize>,
    #[arg(long, visible_alias = "a")]
    a_over_lambda: Option<f64>,
    #[arg(long, conflicts_with = "b_over_lambda")]
    b_over_a: Option<f64>,
    #[arg(long)]
    b_over_lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Keep only odd-distance hops.
    #[arg(long, conflicts_with = "non_chiral")]
    chiral: bool,
    #[arg(long)]
    non_chiral: bool,
}

impl ModelArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            sites: self.sites,
            a_over_lambda: self.a_over_lambda,
            b_over_a: self.b_over_a,
            b_over_lambda: self.b_over_lambda,
            gamma: self.gamma,
            chiral: match (self.chiral, self.non_chiral) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            },
            ..Overrides::default()
        }
    }
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    a_max: Option<f64>,
    #[arg(long)]
    a_count: Option<usize>,
    #[arg(long)]
    b_max: Option<f64>,
    #[arg(long)]
    b_count: Option<usize>,
    /// k-points of the initial winding sample.
    #[arg(long)]
    n_k: Option<usize>,
    /// Compare with the closed-form winding and write the disagreements.
    #[arg(long)]
    check_analytic: bool,
    #[arg(long, value_enum)]
    bloch_range: Option<BlochRange>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    sweep: Option<SweepVariable>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct DisorderLevels {
    #[arg(long)]
    realizations: Option<usize>,
    /// Disorder strengths in units of λ.
    #[arg(long, value_delimiter = ',', conflicts_with = "delta_j")]
    sigma: Option<Vec<f64>>,
    /// Coupling-disorder targets in units of γ; σ is calibrated for each.
    #[arg(long, value_delimiter = ',')]
    delta_j: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct DisorderArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    levels: DisorderLevels,
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    levels: DisorderLevels,
    #[arg(long)]
    t_max: Option<f64>,
    /// Output intervals on [0, t_max].
    #[arg(long)]
    samples: Option<usize>,
    /// Largest integration step.
    #[arg(long)]
    dt: Option<f64>,
    /// edge-pair, single-atom or sites:i,j,...
    #[arg(long)]
    initial: Option<Initial>,
    /// Chiral-projected V with the physical Γ.
    #[arg(long)]
    hybrid: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// CSV or JSON output of a previous run.
    input: PathBuf,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Sub {
    fn command_and_overrides(&self) -> Option<(Command, Overrides)> {
        let (command, o) = match self {
            Sub::PhaseDiagram(a) => (
                Command::PhaseDiagram,
                Overrides {
                    a_max: a.a_max,
                    a_count: a.a_count,
                    b_max: a.b_max,
                    b_count: a.b_count,
                    n_k: a.n_k,
                    check_analytic: flag(a.check_analytic),
                    bloch_range: a.bloch_range,
                    ..a.model.overrides()
                },
            ),
            Sub::Spectrum(a) => (
                Command::Spectrum,
                Overrides {
                    sweep: a.sweep,
                    from: a.from,
                    to: a.to,
                    count: a.count,
                    ..a.model.overrides()
                },
            ),
            Sub::Edge(m) => (Command::Edge, m.overrides()),
            Sub::Disorder(a) => (
                Command::Disorder,
                Overrides {
                    realizations: a.levels.realizations,
                    sigma: a.levels.sigma.clone(),
                    delta_j: a.levels.delta_j.clone(),
                    ..a.model.overrides()
                },
            ),
            Sub::Dynamics(a) => (
                Command::Dynamics,
                Overrides {
                    realizations: a.levels.realizations,
                    sigma: a.levels.sigma.clone(),
                    delta_j: a.levels.delta_j.clone(),
                    t_max: a.t_max,
                    samples: a.samples,
                    dt: a.dt,
                    initial: a.initial.clone(),
                    hybrid: flag(a.hybrid),
                    ..a.model.overrides()
                },
            ),
            Sub::Decay(m) => (Command::Decay, m.overrides()),
            Sub::Plot(_) => return None,
        };
        Some((command, o))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let error_json = cli.error_json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if error_json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let flags = Overrides {
        output: cli.output.clone(),
        format: cli.format,
        plot: flag(cli.plot),
        seed: cli.seed,
        workers: cli.workers,
        ..Overrides::default()
    };
    let file = match &cli.config {
        Some(p) => Overrides::load(p)?,
        None => Overrides::default(),
    };
    if let Some(n) = flags.workers.or(file.workers) {
        if n == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let cfg = match (&cli.replay, &cli.command) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--replay does not take a subcommand".into()));
        }
        (Some(path), None) => {
            let mut cfg = output::load(path)?.config;
            cfg.output = cli.output.clone();
            cfg.format = cli.format.unwrap_or(cfg.format);
            cfg.plot = cli.plot;
            if cli.seed.is_some() {
                return Err(CliError::Usage("--replay reuses the recorded seed".into()));
            }
            if cfg.plot && cfg.output.is_none() {
                return Err(CliError::Usage("--plot needs --output to name the SVG file".into()));
            }
            cfg
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a subcommand or --replay is required (see --help)".into(),
            ));
        }
        (None, Some(Sub::Plot(p))) => return plot(&p.input, cli.output.as_deref()),
        (None, Some(sub)) => {
            let (command, sub_flags) = sub.command_and_overrides().expect("not plot");
            let flags = Overrides {
                output: flags.output,
                format: flags.format,
                plot: flags.plot,
                seed: flags.seed,
                ..sub_flags
            };
            RunConfig::resolve(command, flags.over(file))?
        }
    };

    let report = commands::run(&cfg)?;
    let written = output::emit(&cfg, &report)?;
    if cfg.plot {
        let out = cfg.output.as_ref().expect("validated");
        let svg_path = out.with_extension("svg");
        let svg = commands::render(cfg.command, &report.primary)?;
        std::fs::write(&svg_path, svg).map_err(|e| CliError::io(e, &svg_path))?;
        eprintln!("wrote {}", svg_path.display());
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn plot(input: &std::path::Path, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let loaded = output::load(input)?;
    let svg = commands::render(loaded.config.command, &loaded.primary)?;
    let path = out.map(PathBuf::from).unwrap_or_else(|| input.with_extension("svg"));
    std::fs::write(&path, svg).map_err(|e| CliError::io(e, &path))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
