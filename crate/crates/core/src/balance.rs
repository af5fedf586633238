//! Energy gain and loss of a bound charge in a background field.
//!
//! For state n and each dipole partner k the radiated (Larmor) power is
//! −mτω_nk⁴|x_nk|²·g and the power exchanged with the field is
//! −mτω_nk⁴|x_nk|²·g(1 + γ_a)·sign(ω_kn), both evaluated at |ω_nk|. Their
//! difference is the net power of the channel. The field is sampled only at
//! the transition frequencies; there is no time integration.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::field::FieldSpectrum;
use crate::numerics::compensated_sum;
use crate::spectra::{SpectralData, StateId};
use crate::units::PhysicalConstants;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRow {
    pub partner: StateId,
    pub label: String,
    /// ω_nk = (E_n − E_k)/ħ.
    pub omega_nk: f64,
    pub larmor: f64,
    pub diffusion: f64,
    pub net: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub state: StateId,
    pub label: String,
    pub rows: Vec<BalanceRow>,
    pub total_dh_dt: f64,
    /// Partners with |ω_nk| within the degeneracy tolerance; left out of
    /// every sum.
    pub excluded: Vec<StateId>,
    pub basis_size: usize,
    /// False when `state` is not among the rows with complete partner lists.
    pub complete: bool,
}

impl BalanceReport {
    pub fn larmor_total(&self) -> f64 {
        compensated_sum(self.rows.iter().map(|r| r.larmor))
    }

    pub fn diffusion_total(&self) -> f64 {
        compensated_sum(self.rows.iter().map(|r| r.diffusion))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["partner", "label", "omega_nk_au", "larmor_au", "diffusion_au", "net_au"])?;
        for r in &self.rows {
            wtr.write_record([
                r.partner.0.to_string(),
                r.label.clone(),
                format!("{:e}", r.omega_nk),
                format!("{:e}", r.larmor),
                format!("{:e}", r.diffusion),
                format!("{:e}", r.net),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn radiated(s: &SpectralData, n: StateId, k: StateId, tau: f64) -> (f64, f64) {
    let w = s.omega(n, k);
    (w, s.mass() * tau * w.powi(4) * s.dipole_sq(n, k))
}

/// Larmor dissipation −mτΣ_k ω_nk⁴|x_nk|² over the stored basis (free space).
pub fn larmor_rate(s: &SpectralData, n: StateId, consts: &PhysicalConstants) -> Result<f64> {
    s.check(n)?;
    let (partners, _) = s.split_partners(n);
    Ok(-compensated_sum(partners.into_iter().map(|k| radiated(s, n, k, consts.tau()).1)))
}

/// Power drawn from or given to the field, −mτΣ_k ω_nk⁴|x_nk|²·g(1+γ_a)·sign(ω_kn).
pub fn diffusion_rate(s: &SpectralData, n: StateId, field: &FieldSpectrum) -> Result<f64> {
    Ok(energy_flow(s, n, field)?.diffusion_total())
}

pub fn energy_flow(s: &SpectralData, n: StateId, field: &FieldSpectrum) -> Result<BalanceReport> {
    s.check(n)?;
    let tau = field.constants.tau();
    let (partners, excluded) = s.split_partners(n);
    let mut rows = Vec::with_capacity(partners.len());
    for k in partners {
        let (w, base) = radiated(s, n, k, tau);
        let g = field.g(w.abs());
        let gamma_a = field.gamma_a(w.abs())?;
        let larmor = -base * g;
        let diffusion = -base * g * (1.0 + gamma_a) * (-w).signum();
        rows.push(BalanceRow {
            partner: k,
            label: s.label(k).to_string(),
            omega_nk: w,
            larmor,
            diffusion,
            net: larmor - diffusion,
        });
    }
    let total_dh_dt = compensated_sum(rows.iter().map(|r| r.net));
    Ok(BalanceReport {
        state: n,
        label: s.label(n).to_string(),
        rows,
        total_dh_dt,
        excluded,
        basis_size: s.basis_size(),
        complete: s.rows().contains(&n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Excitation, ModeDensity};
    use crate::spectra::{solve_harmonic, SystemTag};
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn oscillator_larmor_ladder() {
        let c = consts();
        let w0 = 1.7;
        let s = solve_harmonic(w0, 1.0, 5).unwrap();
        let unit = 0.5 * c.tau() * w0.powi(3);
        assert!((larmor_rate(&s, StateId(0), &c).unwrap() + unit).abs() < 1e-14 * unit);
        assert!((larmor_rate(&s, StateId(2), &c).unwrap() + 5.0 * unit).abs() < 1e-14 * unit);
    }

    #[test]
    fn uncoupled_basis_radiates_nothing() {
        let s = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into(), "b".into()], vec![0.0, 1.0], &[]).unwrap();
        assert_eq!(larmor_rate(&s, StateId(1), &consts()).unwrap(), 0.0);
        let r = energy_flow(&s, StateId(1), &FieldSpectrum::zpf()).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.total_dh_dt, 0.0);
    }

    #[test]
    fn oscillator_diffusion_and_balance() {
        let c = consts();
        let s = solve_harmonic(1.0, 1.0, 6).unwrap();
        let unit = 0.5 * c.tau();
        let zpf = FieldSpectrum::zpf();
        assert!((diffusion_rate(&s, StateId(0), &zpf).unwrap() + unit).abs() < 1e-14 * unit);
        let excited = FieldSpectrum::uniform_excitation(4.0).unwrap();
        assert!((diffusion_rate(&s, StateId(2), &excited).unwrap() + 5.0 * unit).abs() < 1e-13 * unit);
        let r = energy_flow(&s, StateId(0), &zpf).unwrap();
        assert!(r.rows.iter().all(|row| row.net == 0.0));
        let r = energy_flow(&s, StateId(1), &zpf).unwrap();
        assert!((r.total_dh_dt + 2.0 * unit).abs() < 1e-14 * unit);
        let dark = zpf.with_mode_density(ModeDensity::Uniform(0.0)).unwrap();
        assert_eq!(diffusion_rate(&s, StateId(3), &dark).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_partners_are_excluded() {
        let s = SpectralData::from_parts(
            SystemTag::Custom1d { mass: 1.0 },
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 1.0, 1.0],
            &[(0, 1, 0.3), (1, 2, 0.2)],
        )
        .unwrap();
        let r = energy_flow(&s, StateId(1), &FieldSpectrum::zpf()).unwrap();
        assert_eq!(r.excluded, vec![StateId(2)]);
        assert_eq!(r.rows.len(), 1);
    }

    proptest! {
        #[test]
        fn bookkeeping_identity(n in 0usize..6, ga in 0.0f64..10.0, g in 0.0f64..2.0) {
            let s = solve_harmonic(0.8, 1.3, 7).unwrap();
            let f = FieldSpectrum::new(ModeDensity::Uniform(g), Excitation::Uniform { gamma_a: ga }, consts()).unwrap();
            let r = energy_flow(&s, StateId(n), &f).unwrap();
            let sum: f64 = r.rows.iter().map(|x| x.net).sum();
            prop_assert!((r.total_dh_dt - sum).abs() <= 1e-14 * r.rows.iter().map(|x| x.net.abs()).sum::<f64>());
        }

        #[test]
        fn diffusion_is_additive_in_excitation(n in 0usize..6, a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let s = solve_harmonic(1.1, 0.9, 7).unwrap();
            let d = |x: f64| diffusion_rate(&s, StateId(n), &FieldSpectrum::uniform_excitation(x).unwrap()).unwrap();
            let d0 = d(0.0);
            let lhs = d(a + b) - d0;
            let rhs = (d(a) - d0) + (d(b) - d0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (d0.abs() * (1.0 + a + b)));
        }
    }
}
