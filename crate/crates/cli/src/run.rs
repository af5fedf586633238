//! Turns a resolved configuration into results: a JSON value and a table
//! whose cells are shared by the CSV and plain-text renderings.

use serde::Serialize;
use serde_json::{json, Value};

use sedrad::balance::energy_flow;
use sedrad::field::{cavity_mask, equilibrium_gamma_a, Excitation, FieldSpectrum, ModeDensity, TabulatedSpectrum};
use sedrad::lamb::{free_particle_shift, hydrogen_shift_with_doubling, lamb_proper, thermal_lamb_delta, CutoffPolicy, Route};
use sedrad::sedsim::{constants_for_tau, integrate_trajectory, mix, run_ensemble, sample_field, InitialCondition, SimConfig};
use sedrad::spectra::{solve_custom_1d, solve_harmonic, solve_hydrogen_radial_with, HydrogenOptions, PotentialModel, SpectralData, StateId};
use sedrad::transitions::{DecayOptions, RateTable};
use sedrad::units::{PhysicalConstants, HARTREE_EV, HARTREE_MHZ};

use crate::config::{Command, Energy, FieldKind, RouteKind, RunConfig, SystemKind};
use crate::CliError;

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub result: Value,
    pub table: Table,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Rates => rates(cfg),
        Command::Balance => balance(cfg),
        Command::Lamb => lamb(cfg),
        Command::Equilibrium => equilibrium(cfg),
        Command::Simulate => simulate(cfg),
    }
}

fn field_spectrum(cfg: &RunConfig, consts: PhysicalConstants) -> Result<FieldSpectrum, CliError> {
    let f = &cfg.field;
    let mode_density = if f.cavity.bands.is_empty() {
        ModeDensity::Free
    } else {
        ModeDensity::Bands(cavity_mask(&f.cavity.bands)?)
    };
    let mut parts = Vec::new();
    if f.kind == FieldKind::Thermal {
        let temperature_k = f.temperature_k.expect("resolved");
        parts.push(Excitation::Thermal { temperature_k });
    }
    if let Some(gamma_a) = f.uniform_gamma_a {
        parts.push(Excitation::Uniform { gamma_a });
    }
    if let Some(p) = &f.gamma_csv {
        parts.push(Excitation::Tabulated(TabulatedSpectrum::from_csv_path(p)?));
    }
    let excitation = match parts.len() {
        0 => Excitation::None,
        1 => parts.pop().expect("one part"),
        _ => Excitation::Sum { parts },
    };
    Ok(FieldSpectrum::new(mode_density, excitation, consts)?)
}

fn hydrogen_options(cfg: &RunConfig) -> HydrogenOptions {
    let s = &cfg.system;
    HydrogenOptions {
        z: s.z.expect("resolved"),
        mass: s.mass.expect("resolved"),
        l_max: s.l_max.expect("resolved"),
        box_radius: s.box_radius.expect("resolved"),
        grid_points: s.grid_points.expect("resolved"),
        ..Default::default()
    }
}

fn potential(cfg: &RunConfig) -> Result<PotentialModel, CliError> {
    let s = &cfg.system;
    let mass = s.mass.expect("resolved");
    Ok(match s.kind {
        SystemKind::Harmonic => PotentialModel::harmonic(s.omega0.expect("resolved"), mass)?,
        SystemKind::Hydrogen => PotentialModel::coulomb(s.z.expect("resolved"), mass)?,
        SystemKind::Custom => {
            let p = s.potential.clone().expect("resolved");
            PotentialModel::custom_1d(p.x_min, p.x_max, p.values, mass)?
        }
    })
}

fn spectral_data(cfg: &RunConfig) -> Result<SpectralData, CliError> {
    let s = &cfg.system;
    Ok(match s.kind {
        SystemKind::Harmonic => solve_harmonic(s.omega0.expect("resolved"), s.mass.expect("resolved"), s.n_max.expect("resolved"))?,
        SystemKind::Hydrogen => solve_hydrogen_radial_with(&hydrogen_options(cfg))?,
        SystemKind::Custom => solve_custom_1d(&potential(cfg)?, s.n_max.expect("resolved") + 1)?,
    })
}

fn state_ids(cfg: &RunConfig, s: &SpectralData) -> Result<Vec<StateId>, CliError> {
    cfg.states.iter().map(|l| Ok(s.find(l)?)).collect()
}

fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = spectral_data(cfg)?;
    let rows = s
        .states()
        .iter()
        .enumerate()
        .map(|(i, st)| {
            vec![
                i.to_string(),
                st.label.clone(),
                num(st.energy),
                num(st.energy * HARTREE_EV),
                st.angular_momentum.map_or_else(|| "-".to_string(), |l| l.to_string()),
                st.pseudostate.to_string(),
            ]
        })
        .collect();
    Ok(Report {
        result: to_value(&s.to_json())?,
        table: Table {
            header: vec!["index", "label", "energy_au", "energy_ev", "l", "pseudostate"],
            rows,
        },
    })
}

fn rates(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = spectral_data(cfg)?;
    let field = field_spectrum(cfg, cfg.physical_constants()?)?;
    let states = state_ids(cfg, &s)?;
    let opts = DecayOptions {
        emission_only: cfg.rates.emission_only,
    };
    let table = RateTable::build(&s, &states, &field, opts)?;
    let split = cfg.rates.split_spontaneous;
    let mut header = vec!["n", "k", "omega_au", "A_per_s", "B_au", "induced_per_s"];
    if split {
        header.extend(["A_zpf_half_per_s", "A_larmor_half_per_s"]);
    }
    let rows = table
        .entries
        .iter()
        .map(|e| {
            let mut r = vec![
                e.n_label.clone(),
                e.k_label.clone(),
                num(e.omega_au),
                num(e.a_per_second()),
                num(e.b),
                num(e.induced_per_second()),
            ];
            if split {
                r.push(num(0.5 * e.a_per_second()));
                r.push(num(0.5 * e.a_per_second()));
            }
            r
        })
        .collect();
    Ok(Report {
        result: to_value(&table)?,
        table: Table { header, rows },
    })
}

fn balance(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = spectral_data(cfg)?;
    let field = field_spectrum(cfg, cfg.physical_constants()?)?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for n in state_ids(cfg, &s)? {
        let r = energy_flow(&s, n, &field)?;
        for row in &r.rows {
            rows.push(vec![
                r.label.clone(),
                row.label.clone(),
                num(row.omega_nk),
                num(row.larmor),
                num(row.diffusion),
                num(row.net),
            ]);
        }
        reports.push(r);
    }
    Ok(Report {
        result: to_value(&reports)?,
        table: Table {
            header: vec!["state", "partner", "omega_nk_au", "larmor_au", "diffusion_au", "net_au"],
            rows,
        },
    })
}

fn lamb(cfg: &RunConfig) -> Result<Report, CliError> {
    let consts = cfg.physical_constants()?;
    let cutoff = CutoffPolicy::new(cfg.cutoff_hartree() / consts.hbar(), cfg.lamb.regularization, consts)?;
    let route = match cfg.lamb.route {
        RouteKind::Direct => Route::Direct,
        RouteKind::Bethe => Route::BetheLog,
        RouteKind::Polarizability => Route::Polarizability,
        RouteKind::Laplacian => Route::LaplacianV {
            log_factor: cfg.lamb.log_factor.expect("resolved"),
        },
    };
    let s = spectral_data(cfg)?;
    let thermal = (cfg.field.kind == FieldKind::Thermal).then(|| cfg.field.temperature_k.expect("resolved"));
    let doubling = cfg.lamb.check_doubling && cfg.system.kind == SystemKind::Hydrogen;

    let mut shifts = Vec::new();
    let mut thermal_shifts = Vec::new();
    let mut rows = Vec::new();
    for n in state_ids(cfg, &s)? {
        let r = if doubling {
            hydrogen_shift_with_doubling(&hydrogen_options(cfg), s.label(n), &cutoff, route)?
        } else {
            lamb_proper(&s, n, &cutoff, route)?
        };
        let mut row = vec![
            r.label.clone(),
            route.name().to_string(),
            num(r.total),
            num(r.free_particle),
            num(r.proper),
            num(r.proper * HARTREE_MHZ),
        ];
        if let Some(t) = thermal {
            let d = thermal_lamb_delta(&s, n, t, &cutoff)?;
            row.push(num(d.total));
            row.push(num(d.proper));
            thermal_shifts.push(d);
        }
        rows.push(row);
        shifts.push(r);
    }
    let mut header = vec!["state", "route", "total_au", "free_particle_au", "proper_au", "proper_mhz"];
    if thermal.is_some() {
        header.extend(["thermal_total_au", "thermal_proper_au"]);
    }
    let field = field_spectrum(cfg, consts)?;
    let free_charge = free_particle_shift(&cutoff, &field)?;
    Ok(Report {
        result: json!({
            "shifts": to_value(&shifts)?,
            "thermal": to_value(&thermal_shifts)?,
            "free_charge": to_value(&free_charge)?,
        }),
        table: Table { header, rows },
    })
}

fn equilibrium(cfg: &RunConfig) -> Result<Report, CliError> {
    let consts = cfg.physical_constants()?;
    let delta_e = cfg.equilibrium.delta_e.map(Energy::hartree).expect("resolved");
    let t = cfg.field.temperature_k.expect("resolved");
    let stimulated = cfg.equilibrium.stimulated;
    let gamma_a = equilibrium_gamma_a(delta_e, t, stimulated, &consts)?;
    let x = delta_e / consts.thermal_energy(t);
    Ok(Report {
        result: json!({
            "delta_e_hartree": delta_e,
            "temperature_k": t,
            "stimulated": stimulated,
            "x": x,
            "gamma_a": gamma_a,
        }),
        table: Table {
            header: vec!["delta_e_au", "temperature_k", "stimulated", "x", "gamma_a"],
            rows: vec![vec![num(delta_e), num(t), stimulated.to_string(), num(x), num(gamma_a)]],
        },
    })
}

pub fn sim_config(cfg: &RunConfig) -> Result<SimConfig, CliError> {
    let s = &cfg.simulate;
    let consts = constants_for_tau(s.tau.expect("resolved"))?;
    let e0 = s.initial_energy.expect("resolved");
    Ok(SimConfig {
        potential: potential(cfg)?,
        field: field_spectrum(cfg, consts)?,
        n_modes: s.n_modes.expect("resolved"),
        band: s.band.expect("resolved"),
        dt: s.dt.expect("resolved"),
        t_total: s.t_total.expect("resolved"),
        n_trajectories: s.n_trajectories.expect("resolved"),
        seed: cfg.seed.expect("resolved"),
        damping: s.damping.expect("resolved"),
        initial: if e0 == 0.0 { InitialCondition::Rest } else { InitialCondition::Energy(e0) },
        series_points: 200,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = sim_config(cfg)?;
    let r = run_ensemble(&sc)?;
    if let Some(path) = &cfg.simulate.dump {
        let field = sample_field(&sc.field, sc.band, sc.n_modes, mix(sc.seed, 0))?;
        let every = cfg.simulate.every.expect("resolved");
        let traj = integrate_trajectory(&sc, &field, 0, every)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Validation(e.to_string());
        w.write_record(["t", "x", "p"]).map_err(io)?;
        for smp in &traj.samples {
            w.write_record([num(smp.t), num(smp.x), num(smp.p)]).map_err(io)?;
        }
        w.flush()?;
    }
    let est = [
        ("mean_x2", r.mean_x2),
        ("mean_p2", r.mean_p2),
        ("mean_h", r.mean_h),
        ("energy_ratio", r.energy_ratio),
        ("larmor_power", r.larmor_power),
        ("absorbed_power", r.absorbed_power),
    ];
    let mut rows: Vec<Vec<String>> = est
        .iter()
        .map(|(name, e)| vec![name.to_string(), num(e.mean), num(e.std_error)])
        .collect();
    rows.push(vec!["balance_residual".into(), num(r.balance_residual), num(r.balance_sigma)]);
    Ok(Report {
        result: to_value(&r)?,
        table: Table {
            header: vec!["quantity", "mean", "std_error"],
            rows,
        },
    })
}
