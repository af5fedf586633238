//! Run configuration: strict JSON schema, flag overrides, resolution of
//! defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use sedrad::field::Band;
use sedrad::lamb::Regularization;
use sedrad::sedsim::Damping;
use sedrad::units::{PhysicalConstants, HARTREE_EV};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Rates,
    Balance,
    Lamb,
    Equilibrium,
    Simulate,
}

/// An energy with its unit spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Energy {
    Hartree(f64),
    Ev(f64),
}

impl Energy {
    pub fn hartree(self) -> f64 {
        match self {
            Energy::Hartree(v) => v,
            Energy::Ev(v) => v / HARTREE_EV,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Harmonic,
    Hydrogen,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPotential {
    pub x_min: f64,
    pub x_max: f64,
    /// V on an equally spaced grid from x_min to x_max, Hartree.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    #[serde(default)]
    pub omega0: Option<f64>,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub z: Option<f64>,
    #[serde(default)]
    pub l_max: Option<u32>,
    #[serde(default)]
    pub box_radius: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub potential: Option<CustomPotential>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            kind: SystemKind::Harmonic,
            omega0: None,
            mass: None,
            z: None,
            l_max: None,
            box_radius: None,
            grid_points: None,
            n_max: None,
            potential: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub cutoff_energy: Option<Energy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    #[default]
    Zpf,
    Thermal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    #[serde(default)]
    pub bands: Vec<Band>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub kind: FieldKind,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    /// Frequency-independent γ_a added to the excitation.
    #[serde(default)]
    pub uniform_gamma_a: Option<f64>,
    #[serde(default)]
    pub gamma_csv: Option<PathBuf>,
    #[serde(default)]
    pub cavity: CavityConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    Direct,
    Bethe,
    Laplacian,
    Polarizability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambConfig {
    pub route: RouteKind,
    #[serde(default)]
    pub log_factor: Option<f64>,
    #[serde(default)]
    pub regularization: Regularization,
    /// Repeat the hydrogen calculation on a doubled grid.
    #[serde(default)]
    pub check_doubling: bool,
}

impl Default for LambConfig {
    fn default() -> Self {
        LambConfig {
            route: RouteKind::Direct,
            log_factor: None,
            regularization: Regularization::PrincipalValue,
            check_doubling: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default)]
    pub emission_only: bool,
    /// Add the ZPF and radiation-reaction halves of A as extra columns.
    #[serde(default)]
    pub split_spontaneous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumConfig {
    #[serde(default)]
    pub delta_e: Option<Energy>,
    #[serde(default = "yes")]
    pub stimulated: bool,
}

fn yes() -> bool {
    true
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        EquilibriumConfig {
            delta_e: None,
            stimulated: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub n_modes: Option<usize>,
    #[serde(default)]
    pub band: Option<(f64, f64)>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_total: Option<f64>,
    #[serde(default)]
    pub n_trajectories: Option<usize>,
    #[serde(default)]
    pub damping: Option<Damping>,
    /// Radiation-reaction time used for the run; α is rescaled so that τ
    /// and ρ₀ stay consistent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Initial energy in units of ħω₀.
    #[serde(default)]
    pub initial_energy: Option<f64>,
    #[serde(default)]
    pub dump: Option<PathBuf>,
    #[serde(default)]
    pub every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub emit: Emit,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub lamb: LambConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub equilibrium: EquilibriumConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            system: SystemConfig::default(),
            constants: ConstantsConfig::default(),
            field: FieldConfig::default(),
            states: Vec::new(),
            lamb: LambConfig::default(),
            rates: RatesConfig::default(),
            equilibrium: EquilibriumConfig::default(),
            simulate: SimulateConfig::default(),
            output: OutputConfig::default(),
            seed: None,
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// The `provenance` object of an earlier JSON output.
    pub fn from_provenance(text: &str) -> Result<Self, CliError> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("provenance file: {e}")))?;
        let prov = value
            .get_mut("provenance")
            .map(serde_json::Value::take)
            .ok_or_else(|| CliError::Validation("provenance file has no `provenance` key".into()))?;
        serde_json::from_value(prov).map_err(|e| CliError::Validation(format!("provenance: {e}")))
    }

    pub fn physical_constants(&self) -> Result<PhysicalConstants, CliError> {
        match self.constants.alpha {
            Some(a) => Ok(PhysicalConstants::with_alpha(a)?),
            None => Ok(PhysicalConstants::default()),
        }
    }

    /// Fills every optional field the chosen command reads with its default,
    /// so that the echoed configuration is complete.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        let consts = self.physical_constants()?;
        self.constants.alpha = Some(consts.alpha());
        if self.constants.cutoff_energy.is_none() {
            self.constants.cutoff_energy = Some(Energy::Hartree(consts.rest_energy()));
        }
        if self.command == Command::Equilibrium {
            if self.equilibrium.delta_e.is_none() {
                return Err(CliError::Validation("equilibrium needs --delta-e-ev or --delta-e-au".into()));
            }
            if self.field.temperature_k.is_none() {
                return Err(CliError::Validation("equilibrium needs --temperature-k".into()));
            }
            return self.validate();
        }
        let sys = &mut self.system;
        sys.mass.get_or_insert(1.0);
        match sys.kind {
            SystemKind::Harmonic => {
                sys.omega0.get_or_insert(1.0);
                sys.n_max.get_or_insert(10);
            }
            SystemKind::Hydrogen => {
                sys.z.get_or_insert(1.0);
                sys.l_max.get_or_insert(1);
                sys.box_radius.get_or_insert(200.0);
                sys.grid_points.get_or_insert(600);
            }
            SystemKind::Custom => {
                sys.n_max.get_or_insert(4);
                if sys.potential.is_none() {
                    return Err(CliError::Validation("--system custom needs --potential-csv or system.potential".into()));
                }
            }
        }
        if self.states.is_empty() && self.command != Command::Spectrum {
            let first = match self.system.kind {
                SystemKind::Hydrogen => "2p",
                _ => "1",
            };
            self.states.push(first.to_string());
        }
        if self.field.kind == FieldKind::Thermal && self.field.temperature_k.is_none() {
            return Err(CliError::Validation("--field thermal needs --temperature-k".into()));
        }
        if self.command == Command::Simulate {
            if self.system.kind == SystemKind::Hydrogen {
                return Err(CliError::Validation("simulate supports harmonic and custom systems".into()));
            }
            let w0 = self.system.omega0.unwrap_or(1.0);
            let s = &mut self.simulate;
            s.n_modes.get_or_insert(401);
            let band = *s.band.get_or_insert((0.5 * w0, 1.5 * w0));
            s.dt.get_or_insert(2.0 * std::f64::consts::PI / (100.0 * band.1));
            let tau = *s.tau.get_or_insert(consts.tau());
            s.t_total.get_or_insert(50.0 / (tau * w0 * w0));
            s.n_trajectories.get_or_insert(200);
            s.damping.get_or_insert(Damping::OrderReduced);
            s.initial_energy.get_or_insert(0.0);
            if s.dump.is_some() {
                s.every.get_or_insert(100);
            }
            self.seed.get_or_insert(0);
        }
        if self.command == Command::Lamb && self.lamb.route == RouteKind::Laplacian && self.lamb.log_factor.is_none() {
            return Err(CliError::Validation("--route laplacian needs --log-factor".into()));
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Validation(format!("{name} must be positive and finite, got {x}"))),
            _ => Ok(()),
        };
        positive("omega0", self.system.omega0)?;
        positive("mass", self.system.mass)?;
        positive("z", self.system.z)?;
        positive("box_radius", self.system.box_radius)?;
        if let Some(e) = self.constants.cutoff_energy {
            let v = e.hartree();
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!("cutoff energy must be positive, got {v} Hartree")));
            }
        }
        if let Some(t) = self.field.temperature_k {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("temperature must be ≥ 0 K, got {t}")));
            }
        }
        if let Some(g) = self.field.uniform_gamma_a {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Validation(format!("γ_a must be ≥ 0, got {g}")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Validation("--threads must be ≥ 1".into()));
        }
        if self.simulate.every == Some(0) {
            return Err(CliError::Validation("--every must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn cutoff_hartree(&self) -> f64 {
        self.constants.cutoff_energy.map(Energy::hartree).unwrap_or(f64::NAN)
    }
}

/// Parses `lo:hi:g` (atomic-unit frequencies).
pub fn parse_band(text: &str) -> Result<Band, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:g, got `{text}`"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok(Band {
        lo: num(parts[0])?,
        hi: num(parts[1])?,
        g: num(parts[2])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"command":"lamb","bogus":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command":"lamb","constants":{"alpha":0.01,"beta":2}}"#).is_err());
        let c = RunConfig::from_json(r#"{"command":"lamb","constants":{"cutoff_energy":{"ev":1000.0}},"field":{"cavity":{"bands":[{"lo":0.1,"hi":0.2,"g":0.0}]}}}"#).unwrap();
        assert_eq!(c.field.cavity.bands.len(), 1);
        assert!((c.cutoff_hartree() * HARTREE_EV - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn resolution_materializes_defaults() {
        let mut c = RunConfig::new(Command::Lamb);
        c.resolve().unwrap();
        assert_eq!(c.system.omega0, Some(1.0));
        assert_eq!(c.constants.alpha, Some(PhysicalConstants::default().alpha()));
        let again = serde_json::to_string(&c).unwrap();
        let mut back = RunConfig::from_json(&again).unwrap();
        back.resolve().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn band_parsing() {
        let b = parse_band("0.1:0.2:0.5").unwrap();
        assert_eq!((b.lo, b.hi, b.g), (0.1, 0.2, 0.5));
        assert!(parse_band("0.1:0.2").is_err());
        assert!(parse_band("a:0.2:1").is_err());
    }
}
