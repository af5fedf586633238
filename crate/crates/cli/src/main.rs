mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sedrad::lamb::Regularization;
use sedrad::sedsim::Damping;
use sedrad::units::{PhysicalConstants, HARTREE_EV};

use config::{parse_band, Command, CustomPotential, Emit, Energy, FieldKind, RouteKind, RunConfig, SystemKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<sedrad::error::Error> for CliError {
    fn from(e: sedrad::error::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RegArg {
    Pv,
    Lorentzian,
}

/// Radiative rates, energy balance, Lamb shifts and zero-point-field
/// trajectories in atomic units.
#[derive(Debug, Parser)]
#[command(name = "sedrad", disable_version_flag = true, allow_negative_numbers = true)]
struct Args {
    #[arg(value_enum)]
    command: Option<Command>,

    /// Print the version and the constants in use.
    #[arg(short = 'V', long)]
    version: bool,

    /// JSON run configuration; flags override its values.
    #[arg(long, value_name = "FILE", conflicts_with = "from_provenance")]
    config: Option<PathBuf>,
    /// Re-run the configuration echoed in an earlier JSON output.
    #[arg(long, value_name = "FILE")]
    from_provenance: Option<PathBuf>,

    #[arg(long, value_enum)]
    system: Option<SystemKind>,
    /// Oscillator angular frequency, atomic units.
    #[arg(long)]
    omega0: Option<f64>,
    /// Particle mass in electron masses.
    #[arg(long)]
    mass: Option<f64>,
    /// Nuclear charge.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    l_max: Option<u32>,
    /// Radial box size, bohr.
    #[arg(long)]
    box_radius: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Highest level kept (harmonic) or highest state with full partner
    /// couplings (custom).
    #[arg(long)]
    n_max: Option<usize>,
    /// CSV with columns x,v (bohr, Hartree) on an equally spaced grid.
    #[arg(long, value_name = "FILE")]
    potential_csv: Option<PathBuf>,

    /// Fine-structure constant.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, conflicts_with = "cutoff_au")]
    cutoff_ev: Option<f64>,
    /// Cutoff energy in Hartree.
    #[arg(long)]
    cutoff_au: Option<f64>,

    #[arg(long, value_enum)]
    field: Option<FieldKind>,
    /// Blackbody temperature; implies `--field thermal` unless given.
    #[arg(long)]
    temperature_k: Option<f64>,
    /// Frequency-independent excitation γ_a on top of the field.
    #[arg(long)]
    gamma_a: Option<f64>,
    /// CSV with columns omega_au,gamma_a on a uniform grid.
    #[arg(long, value_name = "FILE")]
    gamma_csv: Option<PathBuf>,
    /// Cavity band lo:hi:g in atomic-unit frequencies (repeatable).
    #[arg(long = "band", value_name = "LO:HI:G", value_parser = parse_band)]
    bands: Vec<sedrad::field::Band>,

    /// State label (repeatable), e.g. 2p or 1.
    #[arg(long = "state")]
    states: Vec<String>,

    #[arg(long, value_enum)]
    route: Option<RouteKind>,
    /// Logarithm supplied to the Laplacian route.
    #[arg(long)]
    log_factor: Option<f64>,
    #[arg(long, value_enum)]
    regularization: Option<RegArg>,
    /// Repeat hydrogen shifts on a doubled grid.
    #[arg(long)]
    check_doubling: bool,

    /// Leave absorption channels out of the total rates.
    #[arg(long)]
    emission_only: bool,
    /// Report the zero-point and radiation-reaction halves of A.
    #[arg(long)]
    split_spontaneous: bool,

    #[arg(long, conflicts_with = "delta_e_au")]
    delta_e_ev: Option<f64>,
    /// Level spacing in Hartree.
    #[arg(long)]
    delta_e_au: Option<f64>,
    /// Wien form: drop stimulated emission.
    #[arg(long)]
    no_stimulated: bool,

    #[arg(long)]
    n_modes: Option<usize>,
    /// Sampled field band lo:hi, atomic units.
    #[arg(long, value_name = "LO:HI")]
    sim_band: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_total: Option<f64>,
    #[arg(long)]
    trajectories: Option<usize>,
    /// Switch off radiation reaction.
    #[arg(long)]
    no_damping: bool,
    /// Radiation-reaction time; α is rescaled to match.
    #[arg(long)]
    tau: Option<f64>,
    /// Initial energy in units of ħω₀.
    #[arg(long)]
    initial_energy: Option<f64>,
    /// Write the first trajectory as CSV (t, x, p).
    #[arg(long, value_name = "FILE")]
    dump: Option<PathBuf>,
    /// Keep every N-th step in the dump.
    #[arg(long)]
    every: Option<usize>,

    #[arg(long, value_enum)]
    emit: Option<Emit>,
    /// Write the result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn read_potential_csv(path: &PathBuf) -> Result<CustomPotential, CliError> {
    let bad = |m: String| CliError::Validation(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        let (x, v) = rec.map_err(|e| bad(e.to_string()))?;
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 3 {
        return Err(bad("need at least three rows".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(bad("x must be equally spaced".into()));
    }
    Ok(CustomPotential {
        x_min: xs[0],
        x_max: xs[xs.len() - 1],
        values: vs,
    })
}

fn parse_sim_band(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Validation(format!("--sim-band expects lo:hi, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

/// Defaults, then the config file or provenance, then flags.
fn build_config(a: Args) -> Result<RunConfig, CliError> {
    let mut cfg = if let Some(p) = &a.config {
        RunConfig::from_json(&read(p)?)?
    } else if let Some(p) = &a.from_provenance {
        RunConfig::from_provenance(&read(p)?)?
    } else {
        let cmd = a.command.ok_or_else(|| CliError::Validation("missing subcommand".into()))?;
        RunConfig::new(cmd)
    };
    if let Some(c) = a.command {
        cfg.command = c;
    }

    let sys = &mut cfg.system;
    if let Some(k) = a.system {
        sys.kind = k;
    }
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = Some(v);
            }
        };
    }
    set!(sys.omega0, a.omega0);
    set!(sys.mass, a.mass);
    set!(sys.z, a.z);
    set!(sys.l_max, a.l_max);
    set!(sys.box_radius, a.box_radius);
    set!(sys.grid_points, a.grid_points);
    set!(sys.n_max, a.n_max);
    if let Some(p) = &a.potential_csv {
        sys.potential = Some(read_potential_csv(p)?);
        if a.system.is_none() {
            sys.kind = SystemKind::Custom;
        }
    }

    if a.alpha.is_some() {
        cfg.constants.alpha = a.alpha;
        // a cutoff resolved from the old α would no longer be mc²
        if a.cutoff_ev.is_none() && a.cutoff_au.is_none() && a.from_provenance.is_some() {
            cfg.constants.cutoff_energy = None;
        }
    }
    set!(cfg.constants.cutoff_energy, a.cutoff_ev.map(Energy::Ev));
    set!(cfg.constants.cutoff_energy, a.cutoff_au.map(Energy::Hartree));

    if let Some(k) = a.field {
        cfg.field.kind = k;
    } else if a.temperature_k.is_some() && cfg.command != Command::Equilibrium {
        cfg.field.kind = FieldKind::Thermal;
    }
    set!(cfg.field.temperature_k, a.temperature_k);
    set!(cfg.field.uniform_gamma_a, a.gamma_a);
    set!(cfg.field.gamma_csv, a.gamma_csv);
    if !a.bands.is_empty() {
        cfg.field.cavity.bands = a.bands;
    }

    if !a.states.is_empty() {
        cfg.states = a.states;
    }

    if let Some(r) = a.route {
        cfg.lamb.route = r;
    }
    set!(cfg.lamb.log_factor, a.log_factor);
    if let Some(r) = a.regularization {
        cfg.lamb.regularization = match r {
            RegArg::Pv => Regularization::PrincipalValue,
            RegArg::Lorentzian => Regularization::Lorentzian,
        };
    }
    cfg.lamb.check_doubling |= a.check_doubling;

    cfg.rates.emission_only |= a.emission_only;
    cfg.rates.split_spontaneous |= a.split_spontaneous;

    set!(cfg.equilibrium.delta_e, a.delta_e_ev.map(Energy::Ev));
    set!(cfg.equilibrium.delta_e, a.delta_e_au.map(Energy::Hartree));
    if a.no_stimulated {
        cfg.equilibrium.stimulated = false;
    }

    let sim = &mut cfg.simulate;
    set!(sim.n_modes, a.n_modes);
    if let Some(b) = &a.sim_band {
        sim.band = Some(parse_sim_band(b)?);
    }
    set!(sim.dt, a.dt);
    set!(sim.t_total, a.t_total);
    set!(sim.n_trajectories, a.trajectories);
    if a.no_damping {
        sim.damping = Some(Damping::None);
    }
    set!(sim.tau, a.tau);
    set!(sim.initial_energy, a.initial_energy);
    set!(sim.dump, a.dump);
    set!(sim.every, a.every);

    if let Some(e) = a.emit {
        cfg.output.emit = e;
    }
    set!(cfg.output.path, a.output);
    set!(cfg.seed, a.seed);
    set!(cfg.threads, a.threads);

    cfg.resolve()?;
    Ok(cfg)
}

fn print_version() {
    let c = PhysicalConstants::default();
    println!("sedrad {}", env!("CARGO_PKG_VERSION"));
    println!("alpha = {:e}", c.alpha());
    println!("default cutoff = mc^2 = {:e} Hartree = {:e} eV", c.rest_energy(), c.rest_energy() * HARTREE_EV);
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if args.version {
        print_version();
        return ExitCode::SUCCESS;
    }
    let result = build_config(args).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        let report = run::run(&cfg)?;
        output::emit(&cfg, &report)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sedrad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
