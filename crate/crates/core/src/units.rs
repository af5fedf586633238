//! Physical constants and unit conversions.
//!
//! Everything inside the engine is expressed in Hartree atomic units
//! (ħ = m_e = e = 1, c = 1/α). Angular frequencies and energies are therefore
//! interchangeable, and the radiation-reaction time is τ = (2/3)α³.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 fine-structure constant.
pub const ALPHA_CODATA: f64 = 7.297_352_569_3e-3;

/// 1 Hartree in eV.
pub const HARTREE_EV: f64 = 27.211_386_245_988;
/// 1 Hartree expressed as a frequency E/h in MHz.
pub const HARTREE_MHZ: f64 = 6.579_683_920_502e9;
/// 1 Hartree expressed as a temperature E/k_B in Kelvin.
pub const HARTREE_KELVIN: f64 = 315_775.024_804_07;
/// Atomic unit of time ħ/E_h in seconds.
pub const AU_TIME_S: f64 = 2.418_884_326_585_7e-17;
/// Bohr radius in meters.
pub const BOHR_M: f64 = 5.291_772_109_03e-11;

/// Fundamental constants in internal (Hartree atomic) units.
///
/// Only α is free; everything else follows from it. Fields are private so the
/// value is immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstantsRepr", into = "ConstantsRepr")]
pub struct PhysicalConstants {
    alpha: f64,
    c: f64,
    tau: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsRepr {
    alpha: f64,
}

impl TryFrom<ConstantsRepr> for PhysicalConstants {
    type Error = Error;
    fn try_from(r: ConstantsRepr) -> Result<Self> {
        PhysicalConstants::with_alpha(r.alpha)
    }
}

impl From<PhysicalConstants> for ConstantsRepr {
    fn from(c: PhysicalConstants) -> Self {
        ConstantsRepr { alpha: c.alpha }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::with_alpha(ALPHA_CODATA).expect("CODATA alpha is valid")
    }
}

impl PhysicalConstants {
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fine-structure constant must be positive and finite, got {alpha}"
            )));
        }
        let c = 1.0 / alpha;
        let tau = 2.0 * Self::E * Self::E / (3.0 * Self::M * c * c * c);
        let consts = PhysicalConstants { alpha, c, tau };
        // c·α = 1 and τ = (2/3)α³ in these units
        debug_assert!((consts.c * alpha - 1.0).abs() <= 1e-15);
        debug_assert!((tau / (2.0 / 3.0 * alpha.powi(3)) - 1.0).abs() <= 1e-14);
        Ok(consts)
    }

    pub const HBAR: f64 = 1.0;
    pub const M: f64 = 1.0;
    pub const E: f64 = 1.0;

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hbar(&self) -> f64 {
        Self::HBAR
    }

    pub fn electron_mass(&self) -> f64 {
        Self::M
    }

    pub fn elementary_charge(&self) -> f64 {
        Self::E
    }

    /// Speed of light, 1/α.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Radiation-reaction time 2e²/3mc³.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Boltzmann constant in Hartree per Kelvin.
    pub fn boltzmann(&self) -> f64 {
        1.0 / HARTREE_KELVIN
    }

    /// Thermal energy k_B·T in Hartree.
    pub fn thermal_energy(&self, temperature_k: f64) -> f64 {
        temperature_k * self.boltzmann()
    }

    /// Rest energy mc² in Hartree (also the default cutoff frequency).
    pub fn rest_energy(&self) -> f64 {
        Self::M * self.c * self.c
    }
}

/// Physical dimension of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
    Rate,
    Length,
}

/// Units understood by [`convert`].
///
/// Energies and angular frequencies share the Hartree internal unit; MHz and
/// Kelvin are the spectroscopic energy equivalents E/h and E/k_B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Hartree,
    Ev,
    Mhz,
    Kelvin,
    AtomicTime,
    Second,
    Nanosecond,
    PerAtomicTime,
    PerSecond,
    Bohr,
    Meter,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | Ev | Mhz | Kelvin => Dimension::Energy,
            AtomicTime | Second | Nanosecond => Dimension::Time,
            PerAtomicTime | PerSecond => Dimension::Rate,
            Bohr | Meter => Dimension::Length,
        }
    }

    /// Number of internal units in one of `self`.
    fn to_internal(self) -> f64 {
        use Unit::*;
        match self {
            Hartree | AtomicTime | PerAtomicTime | Bohr => 1.0,
            Ev => 1.0 / HARTREE_EV,
            Mhz => 1.0 / HARTREE_MHZ,
            Kelvin => 1.0 / HARTREE_KELVIN,
            Second => 1.0 / AU_TIME_S,
            Nanosecond => 1e-9 / AU_TIME_S,
            PerSecond => AU_TIME_S,
            Meter => 1.0 / BOHR_M,
        }
    }

    pub fn name(self) -> &'static str {
        use Unit::*;
        match self {
            Hartree => "hartree",
            Ev => "eV",
            Mhz => "MHz",
            Kelvin => "K",
            AtomicTime => "atomic-time",
            Second => "s",
            Nanosecond => "ns",
            PerAtomicTime => "1/atomic-time",
            PerSecond => "1/s",
            Bohr => "bohr",
            Meter => "m",
        }
    }
}

/// Converts `value` between two units of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::IncompatibleUnits {
            from: from.name().to_string(),
            to: to.name().to_string(),
        });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.to_internal() / to.to_internal())
}

/// Atomic-unit rate to s⁻¹.
pub fn rate_per_second(rate_au: f64) -> f64 {
    rate_au / AU_TIME_S
}

/// Atomic-unit time to seconds.
pub fn seconds(time_au: f64) -> f64 {
    time_au * AU_TIME_S
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hartree_to_ev() {
        let v = convert(1.0, Unit::Hartree, Unit::Ev).unwrap();
        assert!((v - 27.211386245988).abs() < 1e-12);
    }

    #[test]
    fn zero_and_identity() {
        assert_eq!(convert(0.0, Unit::Hartree, Unit::Mhz).unwrap(), 0.0);
        assert_eq!(convert(1.0, Unit::Hartree, Unit::Hartree).unwrap(), 1.0);
    }

    #[test]
    fn incompatible_dimensions_name_both_units() {
        let err = convert(1.0, Unit::Hartree, Unit::Second).unwrap_err();
        match err {
            Error::IncompatibleUnits { from, to } => {
                assert_eq!(from, "hartree");
                assert_eq!(to, "s");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn independent_constants_cross_check() {
        // E_h = α² m_e c², with m_e c² = 0.51099895000 MeV
        let hartree_ev = ALPHA_CODATA * ALPHA_CODATA * 0.510_998_950_00e6;
        assert!((hartree_ev / HARTREE_EV - 1.0).abs() < 1e-9);
        // ħ/E_h with ħ = 6.582119569e-16 eV·s
        assert!((6.582_119_569e-16 / HARTREE_EV / AU_TIME_S - 1.0).abs() < 1e-9);
        // E_h/k_B with k_B = 8.617333262e-5 eV/K
        assert!((HARTREE_EV / 8.617_333_262e-5 / HARTREE_KELVIN - 1.0).abs() < 1e-9);
        // E_h/h with h = 4.135667696e-15 eV·s
        assert!((HARTREE_EV / 4.135_667_696e-15 / 1e6 / HARTREE_MHZ - 1.0).abs() < 1e-9);
    }

    #[test]
    fn round_trips_through_si() {
        let pairs = [
            (Unit::Hartree, Unit::Ev),
            (Unit::Hartree, Unit::Mhz),
            (Unit::Hartree, Unit::Kelvin),
            (Unit::AtomicTime, Unit::Second),
            (Unit::PerAtomicTime, Unit::PerSecond),
            (Unit::Bohr, Unit::Meter),
        ];
        for (a, b) in pairs {
            for v in [1e-9, 0.37, 1.0, 42.0, 1e12] {
                let back = convert(convert(v, a, b).unwrap(), b, a).unwrap();
                assert!((back / v - 1.0).abs() < 1e-12, "{a:?}<->{b:?} {v}");
            }
        }
    }

    #[test]
    fn conversion_chains_are_associative() {
        let v = 3.5;
        let direct = convert(v, Unit::Ev, Unit::Kelvin).unwrap();
        let via = convert(
            convert(convert(v, Unit::Ev, Unit::Mhz).unwrap(), Unit::Mhz, Unit::Hartree).unwrap(),
            Unit::Hartree,
            Unit::Kelvin,
        )
        .unwrap();
        assert!((direct / via - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tau_follows_cubic_law() {
        let c = PhysicalConstants::default();
        assert!((c.c() * c.alpha() - 1.0).abs() <= 1e-15);
        assert!((c.tau() / (2.0 / 3.0 * c.alpha().powi(3)) - 1.0).abs() < 1e-14);
        let c2 = PhysicalConstants::with_alpha(2.0 * c.alpha()).unwrap();
        assert!((c2.tau() / c.tau() - 8.0).abs() < 1e-12);
        let mut prev = 0.0;
        for a in [1e-3, 5e-3, 1e-2, 0.1] {
            let t = PhysicalConstants::with_alpha(a).unwrap().tau();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(PhysicalConstants::with_alpha(0.0).is_err());
        assert!(PhysicalConstants::with_alpha(f64::NAN).is_err());
    }
}
