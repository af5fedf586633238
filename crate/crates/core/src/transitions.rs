//! Einstein coefficients, induced rates and lifetimes.
//!
//! A_nk = (4e²ω_nk³/3ħc³)|x_nk|² for emission, B_nk = 4π²e²|x_nk|²/3ħ², and
//! the induced rate in a field is g·ρ₀·γ_a·B at |ω_nk|. For central
//! potentials A and B use the sublevel average of the upper state, which
//! keeps B symmetric; the induced rate out of a given state uses the average
//! over that state's sublevels, so it is the per-atom depletion rate.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{zpf_density, FieldSpectrum};
use crate::numerics::compensated_sum;
use crate::spectra::{SpectralData, StateId};
use crate::units::{rate_per_second, seconds, PhysicalConstants};

fn degenerate(s: &SpectralData, n: StateId, k: StateId) -> Error {
    Error::Degenerate {
        n: s.label(n).to_string(),
        k: s.label(k).to_string(),
    }
}

fn upper_average(s: &SpectralData, n: StateId, k: StateId) -> f64 {
    if s.energy(n) >= s.energy(k) {
        s.dipole_sq(n, k)
    } else {
        s.dipole_sq(k, n)
    }
}

/// Spontaneous emission coefficient for n → k, atomic units (1/time).
pub fn einstein_a(s: &SpectralData, n: StateId, k: StateId, consts: &PhysicalConstants) -> Result<f64> {
    s.check(n)?;
    s.check(k)?;
    let w = s.omega(n, k);
    if s.is_degenerate(n, k) {
        return Err(degenerate(s, n, k));
    }
    if w < 0.0 {
        return Err(Error::Ordering(format!(
            "A is defined for emission only; {} lies below {}",
            s.label(n),
            s.label(k)
        )));
    }
    let c = consts.c();
    let e2 = consts.elementary_charge().powi(2);
    Ok(4.0 * e2 * w.powi(3) / (3.0 * consts.hbar() * c * c * c) * s.dipole_sq(n, k))
}

/// Stimulated transition coefficient, rate per unit spectral energy density.
pub fn einstein_b(s: &SpectralData, n: StateId, k: StateId, consts: &PhysicalConstants) -> Result<f64> {
    s.check(n)?;
    s.check(k)?;
    if s.is_degenerate(n, k) {
        return Err(degenerate(s, n, k));
    }
    let e2 = consts.elementary_charge().powi(2);
    Ok(4.0 * PI * PI * e2 * upper_average(s, n, k) / (3.0 * consts.hbar().powi(2)))
}

/// Field-induced rate out of n via k, the same expression for absorption
/// and stimulated emission.
pub fn induced_rate(s: &SpectralData, n: StateId, k: StateId, field: &FieldSpectrum) -> Result<f64> {
    s.check(n)?;
    s.check(k)?;
    if s.is_degenerate(n, k) {
        return Err(degenerate(s, n, k));
    }
    let w = s.omega(n, k).abs();
    let consts = &field.constants;
    let gamma_a = field.gamma_a(w)?;
    if gamma_a == 0.0 {
        return Ok(0.0);
    }
    let b = 4.0 * PI * PI * consts.elementary_charge().powi(2) * s.dipole_sq(n, k) / (3.0 * consts.hbar().powi(2));
    Ok(field.g(w) * zpf_density(w, consts)? * gamma_a * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Lifetime {
    /// Atomic units of time.
    Finite(f64),
    Infinite,
}

impl Lifetime {
    pub fn from_rate(gamma: f64) -> Self {
        if gamma > 0.0 {
            Lifetime::Finite(1.0 / gamma)
        } else {
            Lifetime::Infinite
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Lifetime::Infinite)
    }

    pub fn seconds(&self) -> f64 {
        match *self {
            Lifetime::Finite(t) => seconds(t),
            Lifetime::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
}

/// One decay channel of a state. Rates in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub partner: StateId,
    pub label: String,
    pub omega_nk: f64,
    pub direction: Direction,
    /// g·A for downward channels, 0 upward.
    pub spontaneous: f64,
    pub induced: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySummary {
    pub state: StateId,
    pub label: String,
    pub total_rate: f64,
    pub lifetime: Lifetime,
    pub channels: Vec<Channel>,
    pub excluded: Vec<StateId>,
    pub emission_only: bool,
}

impl DecaySummary {
    /// Net energy flow Σ_up ħ|ω|·rate − Σ_down ħ|ω|·rate implied by the
    /// channel rates.
    pub fn energy_flow(&self) -> f64 {
        compensated_sum(self.channels.iter().map(|c| match c.direction {
            Direction::Up => c.omega_nk.abs() * c.total,
            Direction::Down => -c.omega_nk.abs() * c.total,
        }))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DecayOptions {
    /// Drop upward (absorption) channels from the total.
    pub emission_only: bool,
}

/// Total depletion rate Γ_n = Σ_down (g·A + induced) + Σ_up induced.
pub fn decay_summary(s: &SpectralData, n: StateId, field: &FieldSpectrum, opts: DecayOptions) -> Result<DecaySummary> {
    s.check(n)?;
    let (partners, excluded) = s.split_partners(n);
    let mut channels = Vec::with_capacity(partners.len());
    for k in partners {
        let w = s.omega(n, k);
        let direction = if w > 0.0 { Direction::Down } else { Direction::Up };
        if opts.emission_only && direction == Direction::Up {
            continue;
        }
        let spontaneous = match direction {
            Direction::Down => field.g(w) * einstein_a(s, n, k, &field.constants)?,
            Direction::Up => 0.0,
        };
        let induced = induced_rate(s, n, k, field)?;
        channels.push(Channel {
            partner: k,
            label: s.label(k).to_string(),
            omega_nk: w,
            direction,
            spontaneous,
            induced,
            total: spontaneous + induced,
        });
    }
    let total_rate = compensated_sum(channels.iter().map(|c| c.total));
    Ok(DecaySummary {
        state: n,
        label: s.label(n).to_string(),
        total_rate,
        lifetime: Lifetime::from_rate(total_rate),
        channels,
        excluded,
        emission_only: opts.emission_only,
    })
}

/// Stationary N_lower/N_upper of an isolated pair under the field: the
/// upward induced flux balances spontaneous plus stimulated emission.
pub fn stationary_population_ratio(s: &SpectralData, upper: StateId, lower: StateId, field: &FieldSpectrum) -> Result<f64> {
    let down = field.g(s.omega(upper, lower)) * einstein_a(s, upper, lower, &field.constants)?
        + induced_rate(s, upper, lower, field)?;
    let up = induced_rate(s, lower, upper, field)?;
    if up == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(down / up)
}

/// One ordered pair (n, k) of a rate table. Rates in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEntry {
    pub n: StateId,
    pub k: StateId,
    pub n_label: String,
    pub k_label: String,
    pub omega_au: f64,
    /// Zero for upward pairs.
    pub a: f64,
    pub b: f64,
    pub induced: f64,
}

impl RateEntry {
    pub fn a_per_second(&self) -> f64 {
        rate_per_second(self.a)
    }

    pub fn induced_per_second(&self) -> f64 {
        rate_per_second(self.induced)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
    pub summaries: Vec<DecaySummary>,
}

impl RateTable {
    /// Rates for every non-degenerate partner of each listed state.
    pub fn build(s: &SpectralData, states: &[StateId], field: &FieldSpectrum, opts: DecayOptions) -> Result<Self> {
        let consts = &field.constants;
        let mut entries = Vec::new();
        let mut summaries = Vec::new();
        for &n in states {
            let (partners, _) = s.split_partners(n);
            for k in partners {
                let w = s.omega(n, k);
                let a = if w > 0.0 { einstein_a(s, n, k, consts)? } else { 0.0 };
                entries.push(RateEntry {
                    n,
                    k,
                    n_label: s.label(n).to_string(),
                    k_label: s.label(k).to_string(),
                    omega_au: w,
                    a,
                    b: einstein_b(s, n, k, consts)?,
                    induced: induced_rate(s, n, k, field)?,
                });
            }
            summaries.push(decay_summary(s, n, field, opts)?);
        }
        Ok(RateTable { entries, summaries })
    }

    /// CSV with columns n, k, omega_au, A_per_s, B_au, induced_per_s; with
    /// `split` two more columns give the zero-point and radiation-reaction
    /// halves of the spontaneous rate.
    pub fn write_csv<W: Write>(&self, w: W, split: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["n", "k", "omega_au", "A_per_s", "B_au", "induced_per_s"];
        if split {
            header.extend(["A_zpf_half_per_s", "A_larmor_half_per_s"]);
        }
        wtr.write_record(&header)?;
        for e in &self.entries {
            let mut rec = vec![
                e.n_label.clone(),
                e.k_label.clone(),
                format!("{:e}", e.omega_au),
                format!("{:e}", e.a_per_second()),
                format!("{:e}", e.b),
                format!("{:e}", e.induced_per_second()),
            ];
            if split {
                let half = format!("{:e}", 0.5 * e.a_per_second());
                rec.push(half.clone());
                rec.push(half);
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::energy_flow;
    use crate::field::{Excitation, ModeDensity};
    use crate::spectra::{solve_harmonic, SystemTag};
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn oscillator_a_is_tau_omega_squared() {
        let c = consts();
        let w0 = 0.37;
        let s = solve_harmonic(w0, 1.0, 3).unwrap();
        let a = einstein_a(&s, StateId(1), StateId(0), &c).unwrap();
        assert!((a / (c.tau() * w0 * w0) - 1.0).abs() < 1e-14);
        assert!(matches!(einstein_a(&s, StateId(0), StateId(1), &c), Err(Error::Ordering(_))));
        assert_eq!(einstein_a(&s, StateId(2), StateId(0), &c).unwrap(), 0.0);
        assert_eq!(einstein_b(&s, StateId(2), StateId(0), &c).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_pair_is_an_error() {
        let s = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into(), "b".into()], vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(einstein_b(&s, StateId(0), StateId(1), &consts()), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn ground_state_is_stable_in_zpf() {
        let s = solve_harmonic(1.0, 1.0, 4).unwrap();
        let d = decay_summary(&s, StateId(0), &FieldSpectrum::zpf(), DecayOptions::default()).unwrap();
        assert_eq!(d.total_rate, 0.0);
        assert!(d.lifetime.is_infinite());
        let d = decay_summary(&s, StateId(0), &FieldSpectrum::thermal(1e5).unwrap(), DecayOptions::default()).unwrap();
        assert!(d.total_rate > 0.0);
        let d = decay_summary(&s, StateId(0), &FieldSpectrum::thermal(1e5).unwrap(), DecayOptions { emission_only: true }).unwrap();
        assert!(d.lifetime.is_infinite());
    }

    #[test]
    fn cavity_inhibits_decay() {
        let s = solve_harmonic(1.0, 1.0, 3).unwrap();
        let f = FieldSpectrum::zpf().with_mode_density(ModeDensity::Uniform(0.0)).unwrap();
        let d = decay_summary(&s, StateId(1), &f, DecayOptions::default()).unwrap();
        assert_eq!(d.total_rate, 0.0);
        assert!(d.lifetime.is_infinite());
    }

    #[test]
    fn thermal_tail_matches_boltzmann_factor() {
        let c = consts();
        let s = solve_harmonic(0.01, 1.0, 3).unwrap();
        let t = 0.01 * 315775.02480407 / 30.0; // ħω = 30 k_BT
        let f = FieldSpectrum::thermal(t).unwrap();
        let a = einstein_a(&s, StateId(1), StateId(0), &c).unwrap();
        let r = induced_rate(&s, StateId(1), StateId(0), &f).unwrap();
        let x = 30.0f64;
        assert!((r / (a * (-x).exp()) - 1.0).abs() < 3.0 * (-x).exp());
        assert_eq!(induced_rate(&s, StateId(1), StateId(0), &FieldSpectrum::zpf()).unwrap(), 0.0);
    }

    #[test]
    fn rate_table_csv_has_expected_header() {
        let s = solve_harmonic(1.0, 1.0, 3).unwrap();
        let t = RateTable::build(&s, &[StateId(1)], &FieldSpectrum::zpf(), DecayOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,k,omega_au,A_per_s,B_au,induced_per_s\n"));
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn a_over_b_and_symmetry(w0 in 0.01f64..10.0, n in 1usize..6) {
            let c = consts();
            let s = solve_harmonic(w0, 1.0, 7).unwrap();
            let (n, k) = (StateId(n), StateId(n - 1));
            let a = einstein_a(&s, n, k, &c).unwrap();
            let b = einstein_b(&s, n, k, &c).unwrap();
            let rho0 = zpf_density(w0, &c).unwrap();
            prop_assert!((a / b / (2.0 * rho0) - 1.0).abs() < 1e-12);
            prop_assert_eq!(b, einstein_b(&s, k, n, &c).unwrap());
        }

        #[test]
        fn bookkeeping_matches_balance(n in 0usize..6, t in 0.0f64..2e5, g in 0.0f64..2.0) {
            let s = solve_harmonic(0.5, 1.0, 7).unwrap();
            let f = FieldSpectrum::new(ModeDensity::Uniform(g), Excitation::Thermal { temperature_k: t }, consts()).unwrap();
            let d = decay_summary(&s, StateId(n), &f, DecayOptions::default()).unwrap();
            let b = energy_flow(&s, StateId(n), &f).unwrap();
            let scale = b.rows.iter().map(|r| r.net.abs() + r.larmor.abs()).sum::<f64>();
            prop_assert!((d.energy_flow() - b.total_dh_dt).abs() <= 1e-12 * scale);
        }

        #[test]
        fn two_level_populations_are_boltzmann(x in 0.05f64..30.0) {
            let c = consts();
            let w0 = 0.02;
            let t = w0 / (x * c.boltzmann());
            let s = solve_harmonic(w0, 1.0, 1).unwrap();
            let f = FieldSpectrum::thermal(t).unwrap();
            let ratio = stationary_population_ratio(&s, StateId(1), StateId(0), &f).unwrap();
            prop_assert!((ratio / x.exp() - 1.0).abs() < 1e-12);
        }
    }
}
