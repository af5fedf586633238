//! Background radiation spectra ρ(ω) = g(ω)·ρ₀(ω)·(1 + γ_a(ω)).
//!
//! The mode-density factor g and the additive excitation γ_a are kept as
//! independent pieces so a thermal field inside a cavity composes without
//! special cases. Inside a cavity g multiplies the excitation as well as the
//! zero-point part.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::PhysicalConstants;

/// Zero-point spectral energy density ħω³/2π²c³.
pub fn zpf_density(omega: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("spectral density needs ω ≥ 0, got {omega}")));
    }
    let c = consts.c();
    Ok(consts.hbar() * omega.powi(3) / (2.0 * PI * PI * c * c * c))
}

/// Planck excitation 2/(e^{ħω/k_BT} − 1) above the zero-point level.
pub fn thermal_gamma_a(omega: f64, temperature_k: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(temperature_k >= 0.0) || !temperature_k.is_finite() {
        return Err(Error::Domain(format!("temperature must be ≥ 0 K, got {temperature_k}")));
    }
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("thermal excitation needs ω ≥ 0, got {omega}")));
    }
    if temperature_k == 0.0 {
        return Ok(0.0);
    }
    if omega == 0.0 {
        return Err(Error::Divergence(format!(
            "thermal excitation diverges at ω = 0 for T = {temperature_k} K"
        )));
    }
    let x = consts.hbar() * omega / consts.thermal_energy(temperature_k);
    Ok(2.0 / x.exp_m1())
}

/// Excitation that keeps a two-level pair with level spacing `delta_e` in
/// equilibrium with Boltzmann populations at `temperature_k`.
///
/// Balances N_n(2 + γ_a) = N_k·γ_a for the upper level n, or N_n·2 = N_k·γ_a
/// when stimulated emission is switched off (Wien form).
pub fn equilibrium_gamma_a(
    delta_e: f64,
    temperature_k: f64,
    include_stimulated_emission: bool,
    consts: &PhysicalConstants,
) -> Result<f64> {
    if !(delta_e > 0.0 && delta_e.is_finite()) {
        return Err(Error::Domain(format!("level spacing must be positive, got {delta_e}")));
    }
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature_k}")));
    }
    let x = delta_e / consts.thermal_energy(temperature_k);
    // q = N_n/N_k
    let q = (-x).exp();
    if include_stimulated_emission {
        Ok(2.0 * q / -(-x).exp_m1())
    } else {
        Ok(2.0 * q)
    }
}

/// One cavity band [lo, hi) with mode-density factor `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub g: f64,
}

/// Piecewise-constant mode density, 1 outside the bands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Band>", into = "Vec<Band>")]
pub struct CavityMask {
    bands: Vec<Band>,
}

impl TryFrom<Vec<Band>> for CavityMask {
    type Error = Error;
    fn try_from(bands: Vec<Band>) -> Result<Self> {
        cavity_mask(&bands)
    }
}

impl From<CavityMask> for Vec<Band> {
    fn from(m: CavityMask) -> Self {
        m.bands
    }
}

pub fn cavity_mask(bands: &[Band]) -> Result<CavityMask> {
    let mut sorted = bands.to_vec();
    for b in &sorted {
        if !(b.lo.is_finite() && b.hi.is_finite() && b.lo >= 0.0 && b.hi > b.lo) {
            return Err(Error::InvalidInput(format!("band [{}, {}) is empty or invalid", b.lo, b.hi)));
        }
        if !(b.g >= 0.0 && b.g.is_finite()) {
            return Err(Error::InvalidInput(format!("band g must be ≥ 0, got {}", b.g)));
        }
    }
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for w in sorted.windows(2) {
        if w[1].lo < w[0].hi {
            return Err(Error::InvalidInput(format!(
                "bands [{}, {}) and [{}, {}) overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    Ok(CavityMask { bands: sorted })
}

impl CavityMask {
    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn g(&self, omega: f64) -> f64 {
        self.bands
            .iter()
            .find(|b| omega >= b.lo && omega < b.hi)
            .map_or(1.0, |b| b.g)
    }
}

/// Multiplicative mode-density factor g(ω).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ModeDensity {
    #[default]
    Free,
    Uniform(f64),
    Bands(CavityMask),
}

impl ModeDensity {
    pub fn g(&self, omega: f64) -> f64 {
        match self {
            ModeDensity::Free => 1.0,
            ModeDensity::Uniform(g) => *g,
            ModeDensity::Bands(mask) => mask.g(omega),
        }
    }
}

/// γ_a tabulated on a uniform grid; linear in between, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSpectrum {
    pub omega_start: f64,
    pub omega_step: f64,
    pub gamma_a: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    omega_atomic_units: f64,
    gamma_a: f64,
}

impl TabulatedSpectrum {
    pub fn new(omega_start: f64, omega_step: f64, gamma_a: Vec<f64>) -> Result<Self> {
        if gamma_a.len() < 2 {
            return Err(Error::InvalidInput("tabulated spectrum needs at least two samples".into()));
        }
        if !(omega_start >= 0.0 && omega_step > 0.0 && omega_step.is_finite()) {
            return Err(Error::InvalidInput("tabulated grid must start at ω ≥ 0 with positive step".into()));
        }
        if let Some(v) = gamma_a.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("tabulated γ_a must be finite and ≥ 0, got {v}")));
        }
        Ok(TabulatedSpectrum {
            omega_start,
            omega_step,
            gamma_a,
        })
    }

    /// Reads a two-column CSV with header `omega_atomic_units,gamma_a`.
    /// The ω column must be uniformly spaced.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() != 2 || &header[0] != "omega_atomic_units" || &header[1] != "gamma_a" {
            return Err(Error::InvalidInput(format!(
                "expected header 'omega_atomic_units,gamma_a', got '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows: Vec<CsvRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.len() < 2 {
            return Err(Error::InvalidInput("tabulated spectrum needs at least two samples".into()));
        }
        let start = rows[0].omega_atomic_units;
        let step = rows[1].omega_atomic_units - start;
        for (j, r) in rows.iter().enumerate() {
            let expected = start + j as f64 * step;
            if (r.omega_atomic_units - expected).abs() > 1e-9 * expected.abs().max(step) {
                return Err(Error::InvalidInput(format!(
                    "ω column is not uniformly spaced at row {}",
                    j + 2
                )));
            }
        }
        Self::new(start, step, rows.into_iter().map(|r| r.gamma_a).collect())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let s = (omega - self.omega_start) / self.omega_step;
        let last = (self.gamma_a.len() - 1) as f64;
        if !(0.0..=last).contains(&s) {
            return 0.0;
        }
        let j = (s.floor() as usize).min(self.gamma_a.len() - 2);
        let t = s - j as f64;
        (1.0 - t) * self.gamma_a[j] + t * self.gamma_a[j + 1]
    }
}

/// Additive excitation γ_a(ω) above the zero-point field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Excitation {
    #[default]
    None,
    Thermal {
        temperature_k: f64,
    },
    Uniform {
        gamma_a: f64,
    },
    Tabulated(TabulatedSpectrum),
    Sum {
        parts: Vec<Excitation>,
    },
}

impl Excitation {
    fn validate(&self) -> Result<()> {
        match self {
            Excitation::Thermal { temperature_k } if !(*temperature_k >= 0.0 && temperature_k.is_finite()) => {
                Err(Error::InvalidInput(format!("temperature must be ≥ 0 K, got {temperature_k}")))
            }
            Excitation::Uniform { gamma_a } if !(*gamma_a >= 0.0 && gamma_a.is_finite()) => {
                Err(Error::InvalidInput(format!("γ_a must be finite and ≥ 0, got {gamma_a}")))
            }
            Excitation::Sum { parts } => parts.iter().try_for_each(Excitation::validate),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, omega: f64, consts: &PhysicalConstants) -> Result<f64> {
        match self {
            Excitation::None => Ok(0.0),
            Excitation::Thermal { temperature_k } => thermal_gamma_a(omega, *temperature_k, consts),
            Excitation::Uniform { gamma_a } => Ok(*gamma_a),
            Excitation::Tabulated(t) => Ok(t.eval(omega)),
            Excitation::Sum { parts } => {
                let mut total = 0.0;
                for p in parts {
                    total += p.eval(omega, consts)?;
                }
                Ok(total)
            }
        }
    }

    /// Temperature of the thermal component, if it is purely thermal.
    pub fn temperature(&self) -> Option<f64> {
        match self {
            Excitation::Thermal { temperature_k } => Some(*temperature_k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpectrum {
    #[serde(default)]
    pub mode_density: ModeDensity,
    #[serde(default)]
    pub excitation: Excitation,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl FieldSpectrum {
    pub fn new(mode_density: ModeDensity, excitation: Excitation, constants: PhysicalConstants) -> Result<Self> {
        if let ModeDensity::Uniform(g) = mode_density {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidInput(format!("mode density factor must be ≥ 0, got {g}")));
            }
        }
        excitation.validate()?;
        Ok(FieldSpectrum {
            mode_density,
            excitation,
            constants,
        })
    }

    /// Pure zero-point field in free space.
    pub fn zpf() -> Self {
        FieldSpectrum::default()
    }

    pub fn thermal(temperature_k: f64) -> Result<Self> {
        Self::new(
            ModeDensity::Free,
            Excitation::Thermal { temperature_k },
            PhysicalConstants::default(),
        )
    }

    pub fn uniform_excitation(gamma_a: f64) -> Result<Self> {
        Self::new(ModeDensity::Free, Excitation::Uniform { gamma_a }, PhysicalConstants::default())
    }

    pub fn with_mode_density(mut self, mode_density: ModeDensity) -> Result<Self> {
        self.mode_density = mode_density;
        Self::new(self.mode_density, self.excitation, self.constants)
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn g(&self, omega: f64) -> f64 {
        self.mode_density.g(omega)
    }

    pub fn gamma_a(&self, omega: f64) -> Result<f64> {
        self.excitation.eval(omega, &self.constants)
    }

    /// Total spectral weight relative to free-space ZPF, g·(1 + γ_a).
    pub fn gamma(&self, omega: f64) -> Result<f64> {
        Ok(self.g(omega) * (1.0 + self.gamma_a(omega)?))
    }

    pub fn rho0(&self, omega: f64) -> Result<f64> {
        zpf_density(omega, &self.constants)
    }

    pub fn rho(&self, omega: f64) -> Result<f64> {
        Ok(self.rho0(omega)? * self.gamma(omega)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn zpf_values() {
        let c = consts();
        assert_eq!(zpf_density(0.0, &c).unwrap(), 0.0);
        let a = c.alpha();
        let expect = a * a * a / (2.0 * PI * PI);
        assert!((zpf_density(1.0, &c).unwrap() / expect - 1.0).abs() < 1e-14);
        assert!((expect - 1.9686e-8).abs() < 1e-12);
        assert!(matches!(zpf_density(-1.0, &c), Err(Error::Domain(_))));
        let r = zpf_density(2.6, &c).unwrap() / zpf_density(1.3, &c).unwrap();
        assert!((r - 8.0).abs() < 1e-13);
    }

    #[test]
    fn thermal_values() {
        let c = consts();
        let t = 300.0;
        let kt = c.thermal_energy(t);
        let v = thermal_gamma_a(kt, t, &c).unwrap();
        assert!((v - 2.0 / (std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert!((v - 1.16395).abs() < 1e-5);
        assert_eq!(thermal_gamma_a(0.3, 0.0, &c).unwrap(), 0.0);
        // series: 2e^{-x}(1 + e^{-x} + ...)
        let v = thermal_gamma_a(40.0 * kt, t, &c).unwrap();
        let q = (-40.0f64).exp();
        assert!((v - 2.0 * q * (1.0 + q)).abs() < 1e-22);
        assert!(matches!(thermal_gamma_a(0.0, t, &c), Err(Error::Divergence(_))));
        assert!(matches!(thermal_gamma_a(-1.0, t, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn equilibrium_planck_and_wien() {
        let c = consts();
        let t = 1234.0;
        let kt = c.thermal_energy(t);
        let on = equilibrium_gamma_a(kt, t, true, &c).unwrap();
        assert!((on - 1.16395).abs() < 1e-5);
        let off = equilibrium_gamma_a(kt, t, false, &c).unwrap();
        assert!((off - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((off - 0.73576).abs() < 1e-5);
        let mut prev = 0.0;
        for x in [1.0, 5.0, 20.0, 60.0] {
            let ratio = equilibrium_gamma_a(x * kt, t, false, &c).unwrap() / equilibrium_gamma_a(x * kt, t, true, &c).unwrap();
            assert!(ratio > prev && ratio <= 1.0);
            prev = ratio;
        }
        assert!((1.0 - prev) < 1e-20);
        assert!(equilibrium_gamma_a(0.0, t, true, &c).is_err());
        assert!(equilibrium_gamma_a(1.0, 0.0, true, &c).is_err());
    }

    #[test]
    fn cavity_masks() {
        let m = cavity_mask(&[]).unwrap();
        assert_eq!(m.g(0.1), 1.0);
        let m = cavity_mask(&[Band { lo: 0.9, hi: 1.1, g: 0.0 }]).unwrap();
        assert_eq!(m.g(1.0), 0.0);
        assert_eq!(m.g(2.0), 1.0);
        let m = cavity_mask(&[Band { lo: 0.5, hi: 1.5, g: 0.25 }]).unwrap();
        assert_eq!(m.g(1.0), 0.25);
        let overlap = cavity_mask(&[Band { lo: 0.5, hi: 1.5, g: 0.2 }, Band { lo: 1.0, hi: 2.0, g: 0.1 }]);
        assert!(matches!(overlap, Err(Error::InvalidInput(_))));
        assert!(cavity_mask(&[Band { lo: 0.5, hi: 1.5, g: -1.0 }]).is_err());
        // touching bands are fine
        assert!(cavity_mask(&[Band { lo: 1.0, hi: 2.0, g: 0.1 }, Band { lo: 0.5, hi: 1.0, g: 0.2 }]).is_ok());
    }

    #[test]
    fn csv_tabulation() {
        let text = "omega_atomic_units,gamma_a\n0.0,0.0\n0.5,1.0\n1.0,3.0\n";
        let t = TabulatedSpectrum::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(t.eval(0.25), 0.5);
        assert_eq!(t.eval(0.75), 2.0);
        assert_eq!(t.eval(1.0), 3.0);
        assert_eq!(t.eval(1.5), 0.0);
        let bad = "omega,gamma\n0,0\n1,1\n";
        assert!(TabulatedSpectrum::from_csv_reader(bad.as_bytes()).is_err());
        let uneven = "omega_atomic_units,gamma_a\n0,0\n1,1\n3,1\n";
        assert!(TabulatedSpectrum::from_csv_reader(uneven.as_bytes()).is_err());
        let negative = "omega_atomic_units,gamma_a\n0,0\n1,-1\n";
        assert!(TabulatedSpectrum::from_csv_reader(negative.as_bytes()).is_err());
    }

    #[test]
    fn spectrum_serde_round_trip() {
        let f = FieldSpectrum::new(
            ModeDensity::Bands(cavity_mask(&[Band { lo: 0.1, hi: 0.2, g: 0.3 }]).unwrap()),
            Excitation::Sum {
                parts: vec![Excitation::Thermal { temperature_k: 300.0 }, Excitation::Uniform { gamma_a: 0.5 }],
            },
            consts(),
        )
        .unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: FieldSpectrum = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let overlapping = r#"{"mode_density":{"kind":"bands","value":[{"lo":0,"hi":2,"g":0},{"lo":1,"hi":3,"g":0}]}}"#;
        assert!(serde_json::from_str::<FieldSpectrum>(overlapping).is_err());
    }

    proptest! {
        #[test]
        fn identity_composition_reproduces_zpf(omega in 0.0f64..1e5) {
            let f = FieldSpectrum::zpf();
            prop_assert_eq!(f.rho(omega).unwrap(), zpf_density(omega, &consts()).unwrap());
        }

        #[test]
        fn thermal_monotone(w in 1e-4f64..1.0, dw in 1e-4f64..1.0, t in 10.0f64..1e5, dt in 1.0f64..1e4) {
            let c = consts();
            let base = thermal_gamma_a(w, t, &c).unwrap();
            prop_assume!(base > 1e-300);
            prop_assert!(thermal_gamma_a(w + dw, t, &c).unwrap() < base);
            prop_assert!(thermal_gamma_a(w, t + dt, &c).unwrap() > base);
        }

        #[test]
        fn equilibrium_matches_planck(x in 1e-3f64..600.0, t in 1.0f64..1e5) {
            let c = consts();
            let de = x * c.thermal_energy(t);
            let a = equilibrium_gamma_a(de, t, true, &c).unwrap();
            let b = thermal_gamma_a(de, t, &c).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs());
        }

        #[test]
        fn g_and_gamma_nonnegative(w in 0.0f64..10.0, g in 0.0f64..3.0, t in 0.0f64..1e6) {
            let f = FieldSpectrum::new(ModeDensity::Uniform(g), Excitation::Thermal { temperature_k: t }, consts()).unwrap();
            if w > 0.0 || t == 0.0 {
                prop_assert!(f.g(w) >= 0.0);
                prop_assert!(f.gamma_a(w).unwrap() >= 0.0);
            }
        }
    }
}
