use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{PotentialKind, PotentialModel, SpectralData, State, StateId, SystemTag, Wavefunctions};
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, tridiag};

/// Finite-difference spectrum of a sampled 1D potential with hard walls at
/// the ends of the grid.
///
/// All interior-grid eigenstates are kept as partners; the lowest `n_states`
/// are rows. Matrix elements use the trapezoidal rule on the grid, which for
/// functions vanishing at the walls is a plain weighted sum.
pub fn solve_custom_1d(potential: &PotentialModel, n_states: usize) -> Result<SpectralData> {
    potential.validate()?;
    let values = match &potential.kind {
        PotentialKind::Custom1d { values, .. } => values,
        _ => return Err(Error::InvalidInput("solve_custom_1d needs a custom_1d potential".into())),
    };
    let (h, x) = potential.grid().expect("custom grid");
    let interior = values.len() - 2;
    if n_states == 0 || n_states > interior {
        return Err(Error::InvalidInput(format!(
            "n_states must be in 1..={interior} for this grid, got {n_states}"
        )));
    }
    let m = potential.mass;
    let kin = 1.0 / (2.0 * m * h * h);
    let diag: Vec<f64> = values[1..values.len() - 1].iter().map(|v| 2.0 * kin + v).collect();
    let off = vec![-kin; interior - 1];
    let eig = tridiag::eigensystem(&diag, &off, 0)?;
    let xs = &x[1..x.len() - 1];

    let states = eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &energy)| State {
            label: i.to_string(),
            energy,
            angular_momentum: None,
            pseudostate: false,
            density_at_origin: None,
        })
        .collect();

    let rows: Vec<(usize, Vec<(usize, f64)>)> = (0..n_states)
        .into_par_iter()
        .map(|i| {
            let xi: Vec<f64> = eig.vectors[i].iter().zip(xs).map(|(v, x)| v * x).collect();
            let couplings = (0..interior)
                .filter(|&k| k != i)
                .map(|k| {
                    let d = compensated_sum(xi.iter().zip(&eig.vectors[k]).map(|(a, b)| a * b));
                    (k, d * d)
                })
                .collect();
            (i, couplings)
        })
        .collect();
    let mut strengths = BTreeMap::new();
    for (i, couplings) in rows {
        for (k, v) in couplings {
            strengths.insert((i.min(k), i.max(k)), v);
        }
    }

    let norm = 1.0 / h.sqrt();
    let wavefunctions = Wavefunctions {
        nodes: xs.to_vec(),
        weights: vec![h; interior],
        amplitudes: (0..n_states)
            .map(|i| (StateId(i), eig.vectors[i].iter().map(|v| v * norm).collect()))
            .collect(),
    };
    SpectralData::new(
        SystemTag::Custom1d { mass: m },
        states,
        strengths,
        (0..n_states).map(StateId).collect(),
        0.0,
        Some(wavefunctions),
    )
}
