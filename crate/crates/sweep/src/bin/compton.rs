use clap::{Args, Parser, Subcommand, ValueEnum};
use compton_core::observables::{doc_series, DistanceSearch};
use compton_core::oracle::{compare_spectra, integrate_with_convergence, GridSpec};
use compton_core::Numerics;
use compton_sweep::config::linspace;
use compton_sweep::dataset::write_text;
use compton_sweep::{evaluate, run_recipe, sweep, ExperimentConfig, NumericsOverride, Observables, PointSpec, RecipeOptions, Reference, Result, Solver, SweepError, RECIPES};
use std::path::PathBuf;
use std::process::ExitCode;

/// Free-space stimulated Compton modulation: recipes, sweeps and single-point tools.
///
/// Exit codes: 0 success, 2 configuration error, 3 solver non-convergence, 4 I/O failure.
#[derive(Parser)]
#[command(name = "compton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named figure recipe (`--list` shows them).
    Recipe {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
    },
    /// Run the grid of a TOML experiment config.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
    },
    /// Compare the lattice solver against the split-step wave-equation oracle at one point.
    OracleCheck {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        /// FFT points of the coarse oracle grid (power of two).
        #[arg(long, default_value_t = 256)]
        grid_points: usize,
        /// Oracle time step in units of z0/v.
        #[arg(long, default_value_t = 1e-3)]
        time_step: f64,
        /// Largest accepted phase-minimized L² distance.
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
    },
    /// DOC_m versus d/z_T for one point.
    DocScan {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<i64>,
        /// Samples over d/z_T in [0, 1).
        #[arg(long, default_value_t = 256)]
        distances: usize,
        #[arg(long, value_enum, default_value_t = SolverArg::Lattice)]
        solver: SolverArg,
        #[arg(long, value_enum, default_value_t = ReferenceArg::Exit)]
        reference: ReferenceArg,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Final sideband spectrum for one point as `l,re,im,prob`.
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long, value_enum, default_value_t = SolverArg::Lattice)]
        solver: SolverArg,
        #[arg(long, value_enum, default_value_t = ReferenceArg::Exit)]
        reference: ReferenceArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (overrides the config).
    #[arg(short = 'j', long)]
    workers: Option<usize>,
    /// Significant digits in datasets.
    #[arg(long)]
    precision: Option<usize>,
}

#[derive(Args)]
struct NumericsArgs {
    /// Interaction span L/z0.
    #[arg(long)]
    span: Option<f64>,
    #[arg(long)]
    slices: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    /// Keep lattice states with |l1 + l2| <= CUTOFF.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Keep every lattice state.
    #[arg(long, conflicts_with = "cutoff")]
    full_lattice: bool,
}

impl NumericsArgs {
    fn merge(&self, mut o: NumericsOverride) -> NumericsOverride {
        o.span = self.span.or(o.span);
        o.slices = self.slices.or(o.slices);
        o.l_max = self.l_max.or(o.l_max);
        if self.full_lattice {
            o.full_lattice = true;
            o.net_exchange_cutoff = None;
        } else if self.cutoff.is_some() {
            o.full_lattice = false;
            o.net_exchange_cutoff = self.cutoff;
        }
        o
    }
}

#[derive(Args)]
struct PointArgs {
    /// Electron kinetic energy [keV] (instead of --velocity).
    #[arg(long, conflicts_with = "velocity")]
    energy_kev: Option<f64>,
    /// v/c; defaults to 1/3.
    #[arg(long)]
    velocity: Option<f64>,
    /// Nonrecoil |β| (instead of --power); defaults to 1.
    #[arg(long, conflicts_with = "power")]
    beta: Option<f64>,
    /// P/ħω1 in kW/eV.
    #[arg(long)]
    power: Option<f64>,
    /// ħω1 [eV].
    #[arg(long, default_value_t = 2.0)]
    photon_energy: f64,
    #[arg(long, default_value_t = 0.2)]
    na: f64,
    /// ω2/ω1; phase matched when omitted.
    #[arg(long)]
    frequency_ratio: Option<f64>,
    /// z_T/z0 override.
    #[arg(long)]
    talbot: Option<f64>,
    #[arg(long)]
    no_recoil: bool,
}

impl PointArgs {
    fn spec(&self) -> PointSpec {
        let d = PointSpec::default();
        let by_energy = self.energy_kev.is_some();
        let by_power = self.power.is_some();
        PointSpec {
            kinetic_energy_kev: self.energy_kev,
            velocity_ratio: if by_energy { None } else { self.velocity.or(d.velocity_ratio) },
            beta: if by_power { None } else { self.beta.or(d.beta) },
            power_per_photon_energy: self.power,
            photon_energy_ev: self.photon_energy,
            na1: self.na,
            frequency_ratio: self.frequency_ratio,
            talbot_ratio: self.talbot,
            recoil: !self.no_recoil,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lattice,
    Analytic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    Exit,
    Focus,
}

fn observables(solver: SolverArg, reference: ReferenceArg, orders: Vec<i64>) -> Observables {
    Observables {
        doc_orders: orders,
        solver: match solver {
            SolverArg::Lattice => Solver::Lattice,
            SolverArg::Analytic => Solver::Analytic,
        },
        reference: match reference {
            ReferenceArg::Exit => Reference::Exit,
            ReferenceArg::Focus => Reference::Focus,
        },
        ..Observables::default()
    }
}

fn load_config(run: &RunArgs, required: bool) -> Result<ExperimentConfig> {
    let mut c = match &run.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if required => return Err(SweepError::Config("--config is required".into())),
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &run.output_dir {
        c.output_dir = d.clone();
    }
    if run.workers.is_some() {
        c.workers = run.workers;
    }
    if let Some(p) = run.precision {
        c.precision = p;
    }
    c.validate()?;
    Ok(c)
}

fn resolve(point: &PointArgs, numerics: &NumericsArgs) -> Result<compton_sweep::ResolvedPoint> {
    let n = numerics.merge(NumericsOverride::default()).apply(Numerics::default())?;
    point.spec().resolve(&n).map_err(|e| SweepError::from_core(0, e))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Recipe { name, list, run, numerics } => {
            if list || name.is_none() {
                for (n, d) in RECIPES {
                    println!("{n:8} {d}");
                }
                return Ok(());
            }
            let name = name.unwrap_or_default();
            let config = load_config(&run, false)?;
            let opts = RecipeOptions { numerics: numerics.merge(config.numerics.clone()), search: config.observables.search, workers: config.workers };
            let out = run_recipe(&name, &opts)?;
            for p in out.write(&config.output_dir, config.precision)? {
                println!("{}", p.display());
            }
        }
        Command::Sweep { run, numerics } => {
            let mut config = load_config(&run, true)?;
            if let Some(name) = config.recipe.clone() {
                let opts = RecipeOptions { numerics: numerics.merge(config.numerics.clone()), search: config.observables.search, workers: config.workers };
                let out = run_recipe(&name, &opts)?;
                for p in out.write(&config.output_dir, config.precision)? {
                    println!("{}", p.display());
                }
                return Ok(());
            }
            config.numerics = numerics.merge(config.numerics.clone());
            let out = sweep(&config)?;
            for p in out.write(&config.output_dir, config.precision)? {
                println!("{}", p.display());
            }
        }
        Command::OracleCheck { point, numerics, grid_points, time_step, tolerance } => {
            let pt = resolve(&point, &numerics)?;
            let lattice = evaluate(&pt.problem, &observables(SolverArg::Lattice, ReferenceArg::Exit, Vec::new())).map_err(|e| SweepError::from_core(0, e))?;
            let grid = GridSpec { points: grid_points, time_step };
            let (run, report) = integrate_with_convergence(&pt.problem, &grid).map_err(|e| SweepError::from_core(0, e))?;
            let cmp = compare_spectra(&lattice.spectrum, &run.spectrum);
            let json = serde_json::json!({
                "problem": pt.problem,
                "l2": cmp.l2,
                "total_variation": cmp.total_variation,
                "worst": cmp.worst,
                "worst_index": cmp.worst_index,
                "refinement_l2": report.refinement_l2,
                "oracle_norm_drift": report.norm_drift,
                "lattice_resonant_weight": lattice.resonant_weight,
                "oracle_resonant_weight": run.resonant_weight,
                "pass": cmp.l2 < tolerance,
            });
            println!("{}", serde_json::to_string_pretty(&json).map_err(|e| SweepError::Serialize(e.to_string()))?);
            if !(cmp.l2 < tolerance) {
                return Err(SweepError::Solver {
                    index: 0,
                    source: compton_core::Error::Precondition(format!("lattice and oracle differ by L2 = {:.3e} > {tolerance:.1e}", cmp.l2)),
                });
            }
        }
        Command::DocScan { point, numerics, orders, distances, solver, reference, output } => {
            let pt = resolve(&point, &numerics)?;
            let obs = observables(solver, reference, orders.clone());
            let out = evaluate(&pt.problem, &obs).map_err(|e| SweepError::from_core(0, e))?;
            let n = distances.max(2);
            let ds: Vec<f64> = linspace(0.0, 1.0, n + 1).into_iter().take(n).collect();
            let series = doc_series(&out.spectrum, &orders, &ds, &DistanceSearch::default()).map_err(|e| SweepError::from_core(0, e))?;
            for (m, (d, v)) in orders.iter().zip(&series.maxima) {
                eprintln!("max DOC{m} = {v:.6} at d/z_T = {d:.6}");
            }
            emit(&output, &series.to_columns())?;
        }
        Command::Spectrum { point, numerics, solver, reference, output } => {
            let pt = resolve(&point, &numerics)?;
            let obs = observables(solver, reference, Vec::new());
            let out = evaluate(&pt.problem, &obs).map_err(|e| SweepError::from_core(0, e))?;
            eprintln!("|beta| = {:.6}, sigma = {:.6}, resonant weight = {:.9}", pt.beta_abs(), out.sigma, out.resonant_weight);
            emit(&output, &out.spectrum.to_columns())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
