use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{orbital_letter, SpectralData, State, StateId, SystemTag, Wavefunctions};
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, tridiag};

/// Discretization settings for the hydrogenic radial solver.
///
/// The grid is r_j = β(e^{jδ} − 1), j = 1..=grid_points, with the hard wall
/// at r = box_radius one step beyond the last node. Channels 0..=l_max hold
/// row states; channel l_max + 1 is solved as well so that every row has its
/// complete set of dipole partners.
#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenOptions {
    pub z: f64,
    pub mass: f64,
    pub l_max: u32,
    pub box_radius: f64,
    pub grid_points: usize,
    /// Grid scale β; defaults to 0.5/Z.
    pub grid_scale: Option<f64>,
    /// Lowest states per channel that get full partner lists.
    pub rows_per_channel: usize,
}

impl Default for HydrogenOptions {
    fn default() -> Self {
        HydrogenOptions {
            z: 1.0,
            mass: 1.0,
            l_max: 1,
            box_radius: 200.0,
            grid_points: 600,
            grid_scale: None,
            rows_per_channel: 4,
        }
    }
}

pub fn solve_hydrogen_radial(z: f64, l_max: u32, box_radius: f64, grid_points: usize) -> Result<SpectralData> {
    solve_hydrogen_radial_with(&HydrogenOptions {
        z,
        l_max,
        box_radius,
        grid_points,
        ..Default::default()
    })
}

struct Channel {
    l: u32,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

pub fn solve_hydrogen_radial_with(opts: &HydrogenOptions) -> Result<SpectralData> {
    let HydrogenOptions {
        z,
        mass,
        l_max,
        box_radius,
        grid_points,
        rows_per_channel,
        ..
    } = *opts;
    if grid_points < 200 {
        return Err(Error::InvalidInput(format!("grid_points must be at least 200, got {grid_points}")));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidInput(format!("nuclear charge must be positive, got {z}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let beta = opts.grid_scale.unwrap_or(0.5 / z);
    if !(beta > 0.0 && box_radius > beta && box_radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "box radius {box_radius} must exceed the grid scale {beta}"
        )));
    }
    if rows_per_channel == 0 || rows_per_channel > grid_points {
        return Err(Error::InvalidInput("rows_per_channel out of range".into()));
    }
    let delta = (1.0 + box_radius / beta).ln() / (grid_points + 1) as f64;
    let t: Vec<f64> = (1..=grid_points).map(|j| j as f64 * delta).collect();
    let r: Vec<f64> = t.iter().map(|t| beta * t.exp_m1()).collect();
    let rp: Vec<f64> = t.iter().map(|t| beta * t.exp()).collect();

    // symmetric form of −(1/2m)d²/dr² after u(r) = √r′·φ(t)
    let kin_diag: Vec<f64> = rp.iter().map(|p| (1.0 / (delta * delta) + 0.125) / (mass * p * p)).collect();
    let off: Vec<f64> = rp.windows(2).map(|w| -1.0 / (2.0 * mass * delta * delta * w[0] * w[1])).collect();

    let channels: Vec<Channel> = (0..=l_max + 1)
        .into_par_iter()
        .map(|l| {
            let cent = (l * (l + 1)) as f64 / (2.0 * mass);
            let diag: Vec<f64> = kin_diag
                .iter()
                .zip(&r)
                .map(|(k, &r)| k - z / r + cent / (r * r))
                .collect();
            let eig = tridiag::eigensystem(&diag, &off, l as usize)?;
            Ok(Channel {
                l,
                values: eig.values,
                vectors: eig.vectors,
            })
        })
        .collect::<Result<_>>()?;

    let e1s = channels[0].values[0];
    let exact = -z * z * mass / 2.0;
    if ((e1s - exact) / exact).abs() > 1e-3 {
        return Err(Error::Discretization(format!(
            "ground-state energy {e1s:.6} deviates from {exact} by more than 1e-3 relative; \
             increase grid_points or adjust box_radius"
        )));
    }

    // global index of (channel, i)
    let offsets: Vec<usize> = (0..channels.len()).map(|c| c * grid_points).collect();
    let mut states = Vec::with_capacity(channels.len() * grid_points);
    let norm_u: Vec<f64> = rp.iter().map(|p| 1.0 / (p * delta).sqrt()).collect();
    for ch in &channels {
        let letter = orbital_letter(ch.l);
        for (i, &energy) in ch.values.iter().enumerate() {
            let pseudostate = energy > 0.0;
            let label = if pseudostate {
                format!("{letter}*{i}")
            } else {
                format!("{}{letter}", i as u32 + ch.l + 1)
            };
            let density_at_origin = (ch.l == 0).then(|| {
                let u0 = ch.vectors[i][0] * norm_u[0];
                let u1 = ch.vectors[i][1] * norm_u[1];
                let (a, b) = (u0 / r[0], u1 / r[1]);
                let r0 = a - (b - a) / (r[1] - r[0]) * r[0];
                r0 * r0 / (4.0 * std::f64::consts::PI)
            });
            states.push(State {
                label,
                energy,
                angular_momentum: Some(ch.l),
                pseudostate,
                density_at_origin,
            });
        }
    }

    let mut row_list = Vec::new();
    for ch in channels.iter().take(l_max as usize + 1) {
        for i in 0..rows_per_channel {
            if ch.values[i] >= 0.0 {
                return Err(Error::Discretization(format!(
                    "state {i} of channel l={} is unbound in a box of radius {box_radius}; reduce rows_per_channel",
                    ch.l
                )));
            }
            let v = &ch.vectors[i];
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let tail_start = grid_points - grid_points / 20;
            let tail = v[tail_start..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if tail > 1e-4 * peak {
                return Err(Error::Discretization(format!(
                    "state {i} of channel l={} has not decayed at the wall (r = {box_radius}); enlarge box_radius",
                    ch.l
                )));
            }
            row_list.push((ch.l as usize, i));
        }
    }

    let couplings: Vec<Vec<((usize, usize), f64)>> = row_list
        .par_iter()
        .map(|&(c, i)| {
            let row = &channels[c];
            let ri: Vec<f64> = row.vectors[i].iter().zip(&r).map(|(y, r)| y * r).collect();
            let mut out = Vec::new();
            for pc in [c.wrapping_sub(1), c + 1] {
                let Some(partner) = channels.get(pc) else { continue };
                let factor = row.l.max(partner.l) as f64;
                for (k, yk) in partner.vectors.iter().enumerate() {
                    let radial = compensated_sum(ri.iter().zip(yk).map(|(a, b)| a * b));
                    let a = offsets[c] + i;
                    let b = offsets[pc] + k;
                    out.push(((a.min(b), a.max(b)), factor * radial * radial));
                }
            }
            out
        })
        .collect();
    let strengths: BTreeMap<_, _> = couplings.into_iter().flatten().collect();

    let weights: Vec<f64> = rp.iter().map(|p| p * delta).collect();
    let amplitudes = row_list
        .iter()
        .map(|&(c, i)| {
            let u = channels[c].vectors[i].iter().zip(&norm_u).map(|(y, n)| y * n).collect();
            (StateId(offsets[c] + i), u)
        })
        .collect();
    let wavefunctions = Wavefunctions {
        nodes: r,
        weights,
        amplitudes,
    };
    let rows = row_list.iter().map(|&(c, i)| StateId(offsets[c] + i)).collect();
    SpectralData::new(
        SystemTag::Coulomb { z, mass },
        states,
        strengths,
        rows,
        1e-4 * z * z * mass,
        Some(wavefunctions),
    )
}
