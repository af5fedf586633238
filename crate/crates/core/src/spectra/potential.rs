use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the binding potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialKind {
    Harmonic { omega0: f64 },
    Coulomb { z: f64 },
    /// V sampled on a uniform grid spanning `[x_min, x_max]`.
    Custom1d { x_min: f64, x_max: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialModel {
    pub kind: PotentialKind,
    pub mass: f64,
}

impl PotentialModel {
    pub fn harmonic(omega0: f64, mass: f64) -> Result<Self> {
        Self::checked(PotentialKind::Harmonic { omega0 }, mass)
    }

    pub fn coulomb(z: f64, mass: f64) -> Result<Self> {
        Self::checked(PotentialKind::Coulomb { z }, mass)
    }

    pub fn custom_1d(x_min: f64, x_max: f64, values: Vec<f64>, mass: f64) -> Result<Self> {
        Self::checked(PotentialKind::Custom1d { x_min, x_max, values }, mass)
    }

    /// Samples `v` at `points` uniform nodes on `[x_min, x_max]`.
    pub fn sampled<F: Fn(f64) -> f64>(v: F, x_min: f64, x_max: f64, points: usize, mass: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidInput("custom potential needs at least 3 grid points".into()));
        }
        let h = (x_max - x_min) / (points - 1) as f64;
        let values = (0..points).map(|j| v(x_min + j as f64 * h)).collect();
        Self::custom_1d(x_min, x_max, values, mass)
    }

    fn checked(kind: PotentialKind, mass: f64) -> Result<Self> {
        let p = PotentialModel { kind, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {}", self.mass)));
        }
        match &self.kind {
            PotentialKind::Harmonic { omega0 } if !(*omega0 > 0.0 && omega0.is_finite()) => {
                Err(Error::InvalidInput(format!("omega0 must be positive, got {omega0}")))
            }
            PotentialKind::Coulomb { z } if !(*z > 0.0 && z.is_finite()) => {
                Err(Error::InvalidInput(format!("nuclear charge must be positive, got {z}")))
            }
            PotentialKind::Custom1d { x_min, x_max, values } => {
                if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
                    return Err(Error::InvalidInput(format!("custom grid must be increasing, got [{x_min}, {x_max}]")));
                }
                if values.len() < 3 {
                    return Err(Error::InvalidInput(format!(
                        "custom potential needs at least 3 grid points, got {}",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("custom potential contains non-finite samples".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Grid spacing and node positions of a custom potential.
    pub(crate) fn grid(&self) -> Option<(f64, Vec<f64>)> {
        match &self.kind {
            PotentialKind::Custom1d { x_min, x_max, values } => {
                let h = (x_max - x_min) / (values.len() - 1) as f64;
                Some((h, (0..values.len()).map(|j| x_min + j as f64 * h).collect()))
            }
            _ => None,
        }
    }

    /// Potential energy at `x` (radial distance for Coulomb). Custom
    /// potentials are interpolated linearly.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { omega0 } => 0.5 * self.mass * omega0 * omega0 * x * x,
            PotentialKind::Coulomb { z } => -z / x.abs(),
            PotentialKind::Custom1d { x_min, x_max, values } => {
                interpolate(*x_min, *x_max, values, x)
            }
        }
    }

    /// f = −dV/dx. Custom potentials use central differences at the nodes
    /// (one-sided at the ends), interpolated linearly in between.
    pub fn force(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { omega0 } => -self.mass * omega0 * omega0 * x,
            PotentialKind::Coulomb { z } => -z * x.signum() / (x * x),
            PotentialKind::Custom1d { x_min, x_max, values } => {
                let n = values.len();
                let h = (x_max - x_min) / (n - 1) as f64;
                let slope = |j: usize| -> f64 {
                    if j == 0 {
                        (values[1] - values[0]) / h
                    } else if j == n - 1 {
                        (values[n - 1] - values[n - 2]) / h
                    } else {
                        (values[j + 1] - values[j - 1]) / (2.0 * h)
                    }
                };
                let s = ((x - x_min) / h).clamp(0.0, (n - 1) as f64);
                let j = (s.floor() as usize).min(n - 2);
                let t = s - j as f64;
                -((1.0 - t) * slope(j) + t * slope(j + 1))
            }
        }
    }
}

fn interpolate(x_min: f64, x_max: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let h = (x_max - x_min) / (n - 1) as f64;
    let s = ((x - x_min) / h).clamp(0.0, (n - 1) as f64);
    let j = (s.floor() as usize).min(n - 2);
    let t = s - j as f64;
    (1.0 - t) * values[j] + t * values[j + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PotentialModel::harmonic(0.0, 1.0).is_err());
        assert!(PotentialModel::coulomb(-1.0, 1.0).is_err());
        assert!(PotentialModel::harmonic(1.0, 0.0).is_err());
        assert!(PotentialModel::custom_1d(0.0, 1.0, vec![0.0, 1.0], 1.0).is_err());
        assert!(PotentialModel::custom_1d(1.0, 0.0, vec![0.0; 4], 1.0).is_err());
        assert!(PotentialModel::custom_1d(0.0, 1.0, vec![0.0; 4], 1.0).is_ok());
    }

    #[test]
    fn sampled_force_matches_analytic() {
        let p = PotentialModel::sampled(|x| 0.25 * x.powi(4), -3.0, 3.0, 601, 1.0).unwrap();
        for x in [-2.0, -0.5, 0.3, 1.7] {
            assert!((p.force(x) + x * x * x).abs() < 1e-3, "{x}");
            assert!((p.value(x) - 0.25 * x.powi(4)).abs() < 1e-3);
        }
    }
}
