use std::collections::BTreeMap;

use super::{SpectralData, State, StateId, SystemTag};
use crate::error::{Error, Result};

/// Closed-form oscillator levels 0..=n_max with E_n = ω₀(n + ½) and
/// |x_{n,n+1}|² = (n + 1)/(2mω₀).
///
/// The top level lacks its upward partner, so only 0..n_max are rows.
pub fn solve_harmonic(omega0: f64, mass: f64, n_max: usize) -> Result<SpectralData> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::InvalidInput(format!("omega0 must be positive, got {omega0}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let states = (0..=n_max)
        .map(|n| State {
            label: n.to_string(),
            energy: omega0 * (n as f64 + 0.5),
            angular_momentum: None,
            pseudostate: false,
            density_at_origin: None,
        })
        .collect();
    let a = 1.0 / (2.0 * mass * omega0);
    let strengths: BTreeMap<_, _> = (0..n_max).map(|n| ((n, n + 1), a * (n + 1) as f64)).collect();
    let rows = (0..n_max).map(StateId).collect();
    SpectralData::new(SystemTag::Harmonic { omega0, mass }, states, strengths, rows, 0.0, None)
}
