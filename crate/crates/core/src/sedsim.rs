//! Monte Carlo trajectories of a charge driven by a sampled random field.
//!
//! The particle obeys ẋ = p/m, ṗ = f(x) + τf′(x)ẋ + eE(t), the
//! order-reduced form of the radiation-reaction equation (for the oscillator
//! the reaction term is the damping −mτω₀²ẋ). E(t) is a finite sum of modes
//!
//! E(t) = Σ_j E_j cos(ω_j t + φ_j), E_j² = (8π/3)ρ(ω_j)Δω_j,
//!
//! on an equally spaced band with half-weight end modes, so that the phase
//! average of E(t)E(t′) reproduces (4π/3)∫ρ(ω)cos ω(t − t′)dω restricted to
//! the band.
//!
//! Seeds: trajectory i draws its phases from ChaCha8 seeded with
//! `mix(seed, i)`, the SplitMix64 finalizer applied to
//! `seed + (i + 1)·0x9E3779B97F4A7C15`. Trajectories are independent of
//! thread count and reduced in index order with compensated sums.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpectrum;
use crate::numerics::NeumaierSum;
use crate::spectra::{PotentialKind, PotentialModel};
use crate::units::PhysicalConstants;

/// Constants whose fine-structure constant gives radiation-reaction time
/// `tau`. With the physical α the oscillator relaxes over ~10⁷ periods; the
/// stationary state depends on e²ρ₀/mτ, which is independent of α, so a
/// larger coupling reaches the same equilibrium in far fewer steps.
pub fn constants_for_tau(tau: f64) -> Result<PhysicalConstants> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("τ must be positive, got {tau}")));
    }
    PhysicalConstants::with_alpha((1.5 * tau).cbrt())
}

/// SplitMix64 stream splitting: the sub-seed of trajectory `i`.
pub fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub omegas: Vec<f64>,
    /// E_j², kept squared so that scaling ρ scales these exactly.
    pub power: Vec<f64>,
    pub phases: Vec<f64>,
    pub seed: u64,
}

impl FieldRealization {
    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    pub fn spacing(&self) -> f64 {
        self.omegas[1] - self.omegas[0]
    }

    /// E(t) by direct summation over the modes.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = NeumaierSum::default();
        for ((w, p), phi) in self.omegas.iter().zip(&self.power).zip(&self.phases) {
            s.add(p.sqrt() * (w * t + phi).cos());
        }
        s.value()
    }

    /// Long-time average of E(t)², Σ E_j²/2.
    pub fn mean_square(&self) -> f64 {
        0.5 * crate::numerics::compensated_sum(self.power.iter().copied())
    }

    /// E on the grid t_m = m·dt′ over one period 2π/Δω of the mode sum,
    /// returned as the slowly varying envelope z_m with
    /// E(t_m) = Re(e^{iω_lo t_m} z_m). `samples` must be ≥ the mode count.
    fn envelope(&self, samples: usize) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); samples];
        for (j, (p, phi)) in self.power.iter().zip(&self.phases).enumerate() {
            buf[j] = Complex::from_polar(p.sqrt(), *phi);
        }
        let fft = FftPlanner::new().plan_fft_inverse(samples);
        fft.process(&mut buf);
        buf
    }
}

/// Samples one realization of the field restricted to `band` with
/// `n_modes` equally spaced modes.
pub fn sample_field(spec: &FieldSpectrum, band: (f64, f64), n_modes: usize, seed: u64) -> Result<FieldRealization> {
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("band must satisfy 0 < ω_lo < ω_hi, got [{lo}, {hi}]")));
    }
    if n_modes < 2 {
        return Err(Error::InvalidInput("at least two field modes are needed".into()));
    }
    let step = (hi - lo) / (n_modes - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omegas = Vec::with_capacity(n_modes);
    let mut power = Vec::with_capacity(n_modes);
    let mut phases = Vec::with_capacity(n_modes);
    for j in 0..n_modes {
        let w = if j + 1 == n_modes { hi } else { lo + j as f64 * step };
        let weight = if j == 0 || j + 1 == n_modes { 0.5 * step } else { step };
        omegas.push(w);
        power.push(8.0 * PI / 3.0 * spec.rho(w)? * weight);
        phases.push(rng.gen::<f64>() * 2.0 * PI);
    }
    Ok(FieldRealization {
        omegas,
        power,
        phases,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    #[default]
    OrderReduced,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialCondition {
    #[default]
    Rest,
    /// Start at x = 0 (harmonic: at the turning point) with this energy in
    /// units of ħω_ref.
    Energy(f64),
    Phase { x: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub potential: PotentialModel,
    pub field: FieldSpectrum,
    pub n_modes: usize,
    pub band: (f64, f64),
    pub dt: f64,
    pub t_total: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    #[serde(default)]
    pub damping: Damping,
    #[serde(default)]
    pub initial: InitialCondition,
    /// Number of points in the ensemble-averaged energy series.
    #[serde(default = "default_series_points")]
    pub series_points: usize,
}

fn default_series_points() -> usize {
    200
}

impl SimConfig {
    /// Narrow band [ω₀/2, 3ω₀/2] with 401 modes, dt = 2π/(100ω_hi),
    /// t_total = 50/(τω₀²) and 200 trajectories. τ and ρ₀ both come from
    /// `field.constants`.
    pub fn harmonic(omega0: f64, field: FieldSpectrum, seed: u64) -> Result<Self> {
        let potential = PotentialModel::harmonic(omega0, 1.0)?;
        let band = (0.5 * omega0, 1.5 * omega0);
        let tau_eff = field.constants.tau();
        Ok(SimConfig {
            potential,
            n_modes: 401,
            band,
            dt: 2.0 * PI / (100.0 * band.1),
            t_total: 50.0 / (tau_eff * omega0 * omega0),
            n_trajectories: 200,
            seed,
            damping: Damping::OrderReduced,
            initial: InitialCondition::Rest,
            series_points: default_series_points(),
            field,
        })
    }

    pub fn tau(&self) -> f64 {
        self.field.constants.tau()
    }

    /// ω₀ for the oscillator, the band centre otherwise.
    pub fn omega_ref(&self) -> f64 {
        match self.potential.kind {
            PotentialKind::Harmonic { omega0 } => omega0,
            _ => 0.5 * (self.band.0 + self.band.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if matches!(self.potential.kind, PotentialKind::Coulomb { .. }) {
            return Err(Error::Unsupported("trajectories in the Coulomb potential are not simulated".into()));
        }
        let (lo, hi) = self.band;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("band must satisfy 0 < ω_lo < ω_hi, got [{lo}, {hi}]")));
        }
        if let PotentialKind::Harmonic { omega0 } = self.potential.kind {
            if !(lo <= omega0 && omega0 <= hi) {
                return Err(Error::InvalidInput(format!("band [{lo}, {hi}] must contain ω₀ = {omega0}")));
            }
        }
        if self.n_modes < 2 {
            return Err(Error::InvalidInput("at least two field modes are needed".into()));
        }
        if !(self.dt > 0.0 && self.dt * hi < 0.1) {
            return Err(Error::InvalidInput(format!("dt·ω_hi must lie in (0, 0.1), got {}", self.dt * hi)));
        }
        if !(self.t_total > 0.0 && self.t_total.is_finite()) {
            return Err(Error::InvalidInput("t_total must be positive".into()));
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidInput("at least one trajectory is needed".into()));
        }
        if !(self.tau() >= 0.0 && self.tau().is_finite()) {
            return Err(Error::InvalidInput("τ must be finite and ≥ 0".into()));
        }
        if self.series_points == 0 {
            return Err(Error::InvalidInput("series_points must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Envelope grid size L and the step actually taken, 2·(2π/ΔωL) ≤ dt,
    /// so that every RK4 stage lands on a grid point of the synthesized field.
    fn grid(&self) -> (usize, f64) {
        let delta = (self.band.1 - self.band.0) / (self.n_modes - 1) as f64;
        let l = ((4.0 * PI / (delta * self.dt)).ceil() as usize).max(self.n_modes);
        (l, 4.0 * PI / (delta * l as f64))
    }

    pub fn effective_dt(&self) -> f64 {
        self.grid().1
    }

    pub fn steps(&self) -> usize {
        (self.t_total / self.effective_dt()).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub p: f64,
}

/// Per-trajectory output: time averages over the second half and decimated
/// samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub mean_x2: f64,
    pub mean_p2: f64,
    pub mean_h: f64,
    pub larmor_power: f64,
    pub absorbed_power: f64,
    /// H at the series points.
    pub energy_series: Vec<f64>,
}

struct Dynamics<'a> {
    pot: &'a PotentialModel,
    tau: f64,
    damping: Damping,
    charge: f64,
}

impl Dynamics<'_> {
    fn force_derivative(&self, x: f64) -> f64 {
        match self.pot.kind {
            PotentialKind::Harmonic { omega0 } => -self.pot.mass * omega0 * omega0,
            _ => {
                let h = 1e-5 * (1.0 + x.abs());
                (self.pot.force(x + h) - self.pot.force(x - h)) / (2.0 * h)
            }
        }
    }

    /// Radiation-reaction force τf′(x)ẋ.
    fn reaction(&self, x: f64, p: f64) -> f64 {
        match self.damping {
            Damping::OrderReduced => self.tau * self.force_derivative(x) * p / self.pot.mass,
            Damping::None => 0.0,
        }
    }

    fn rhs(&self, x: f64, p: f64, e: f64) -> (f64, f64) {
        (p / self.pot.mass, self.pot.force(x) + self.reaction(x, p) + self.charge * e)
    }

    fn energy(&self, x: f64, p: f64) -> f64 {
        p * p / (2.0 * self.pot.mass) + self.pot.value(x)
    }
}

/// Integrates one trajectory with fixed-step RK4, keeping every `every`-th
/// step in `samples` (0 keeps none).
pub fn integrate_trajectory(cfg: &SimConfig, field: &FieldRealization, index: usize, every: usize) -> Result<Trajectory> {
    cfg.validate()?;
    if field.n_modes() != cfg.n_modes {
        return Err(Error::InvalidInput("field realization does not match the configured mode count".into()));
    }
    let (l, dt) = cfg.grid();
    let envelope = field.envelope(l);
    let half = 0.5 * dt;
    let w_lo = field.omegas[0];
    let e_at = |m: usize| {
        let z = envelope[m % l];
        let phase = w_lo * m as f64 * half;
        z.re * phase.cos() - z.im * phase.sin()
    };
    let dynamics = Dynamics {
        pot: &cfg.potential,
        tau: cfg.tau(),
        damping: cfg.damping,
        charge: cfg.field.constants.elementary_charge(),
    };
    let m = cfg.potential.mass;
    let w_ref = cfg.omega_ref();
    let hbar = cfg.field.constants.hbar();
    let (mut x, mut p) = match cfg.initial {
        InitialCondition::Rest => (0.0, 0.0),
        InitialCondition::Phase { x, p } => (x, p),
        InitialCondition::Energy(e) => {
            let energy = e * hbar * w_ref;
            match cfg.potential.kind {
                PotentialKind::Harmonic { omega0 } => ((2.0 * energy / m).sqrt() / omega0, 0.0),
                _ => {
                    let kinetic = energy - cfg.potential.value(0.0);
                    if kinetic < 0.0 {
                        return Err(Error::InvalidInput("initial energy lies below V(0)".into()));
                    }
                    (0.0, (2.0 * m * kinetic).sqrt())
                }
            }
        }
    };
    let steps = cfg.steps();
    let bound = 1e6 * hbar * w_ref;
    let start_avg = steps / 2;
    let series_every = (steps / cfg.series_points).max(1);
    let mut sx2 = NeumaierSum::default();
    let mut sp2 = NeumaierSum::default();
    let mut sh = NeumaierSum::default();
    let mut slarmor = NeumaierSum::default();
    let mut sabs = NeumaierSum::default();
    let mut count = 0usize;
    let mut samples = Vec::new();
    let mut series = Vec::with_capacity(cfg.series_points);
    if every > 0 {
        samples.push(Sample { t: 0.0, x, p });
    }
    for step in 0..steps {
        let e0 = e_at(2 * step);
        let e1 = e_at(2 * step + 1);
        let e2 = e_at(2 * step + 2);
        if step >= start_avg {
            let v = p / m;
            let h = dynamics.energy(x, p);
            sx2.add(x * x);
            sp2.add(p * p);
            sh.add(h);
            slarmor.add(dynamics.reaction(x, p) * v);
            sabs.add(dynamics.charge * e0 * v);
            count += 1;
        }
        let (k1x, k1p) = dynamics.rhs(x, p, e0);
        let (k2x, k2p) = dynamics.rhs(x + half * k1x, p + half * k1p, e1);
        let (k3x, k3p) = dynamics.rhs(x + half * k2x, p + half * k2p, e1);
        let (k4x, k4p) = dynamics.rhs(x + dt * k3x, p + dt * k3p, e2);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let h = dynamics.energy(x, p);
        if !(h.abs() <= bound) {
            return Err(Error::Runaway {
                trajectory: index,
                energy: h,
                bound,
            });
        }
        if (step + 1) % series_every == 0 && series.len() < cfg.series_points {
            series.push(h);
        }
        if every > 0 && (step + 1) % every == 0 {
            samples.push(Sample {
                t: (step + 1) as f64 * dt,
                x,
                p,
            });
        }
    }
    let n = count.max(1) as f64;
    Ok(Trajectory {
        samples,
        mean_x2: sx2.value() / n,
        mean_p2: sp2.value() / n,
        mean_h: sh.value() / n,
        larmor_power: slarmor.value() / n,
        absorbed_power: sabs.value() / n,
        energy_series: series,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(xs: impl Iterator<Item = f64> + Clone) -> Self {
        let n = xs.clone().count();
        let mean = crate::numerics::compensated_sum(xs.clone()) / n as f64;
        let std_error = if n > 1 {
            let var = crate::numerics::compensated_sum(xs.map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate { mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub effective_dt: f64,
    pub steps: usize,
    pub mean_x2: Estimate,
    pub mean_p2: Estimate,
    pub mean_h: Estimate,
    /// ⟨H⟩/(ħω_ref/2).
    pub energy_ratio: Estimate,
    /// (t, ensemble mean of H).
    pub energy_series: Vec<(f64, f64)>,
    /// ⟨τf′(x)ẋ·ẋ⟩, ≤ 0.
    pub larmor_power: Estimate,
    /// ⟨eE(t)ẋ⟩.
    pub absorbed_power: Estimate,
    /// (larmor + absorbed)/max(|larmor|, |absorbed|).
    pub balance_residual: f64,
    /// Standard error of larmor + absorbed on the same scale.
    pub balance_sigma: f64,
}

pub fn run_ensemble(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let trajectories: Vec<Trajectory> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|i| {
            let field = sample_field(&cfg.field, cfg.band, cfg.n_modes, mix(cfg.seed, i as u64))?;
            integrate_trajectory(cfg, &field, i, 0)
        })
        .collect::<Result<_>>()?;
    let est = |f: fn(&Trajectory) -> f64| Estimate::from_samples(trajectories.iter().map(f));
    let mean_h = est(|t| t.mean_h);
    let unit = 0.5 * cfg.field.constants.hbar() * cfg.omega_ref();
    let larmor = est(|t| t.larmor_power);
    let absorbed = est(|t| t.absorbed_power);
    let net = est(|t| t.larmor_power + t.absorbed_power);
    let scale = larmor.mean.abs().max(absorbed.mean.abs());
    let dt = cfg.effective_dt();
    let steps = cfg.steps();
    let series_every = (steps / cfg.series_points).max(1);
    let len = trajectories.iter().map(|t| t.energy_series.len()).min().unwrap_or(0);
    let energy_series = (0..len)
        .map(|j| {
            let t = ((j + 1) * series_every) as f64 * dt;
            let h = crate::numerics::compensated_sum(trajectories.iter().map(|tr| tr.energy_series[j])) / trajectories.len() as f64;
            (t, h)
        })
        .collect();
    Ok(SimResult {
        config: cfg.clone(),
        effective_dt: dt,
        steps,
        mean_x2: est(|t| t.mean_x2),
        mean_p2: est(|t| t.mean_p2),
        energy_ratio: Estimate {
            mean: mean_h.mean / unit,
            std_error: mean_h.std_error / unit,
        },
        mean_h,
        energy_series,
        larmor_power: larmor,
        absorbed_power: absorbed,
        balance_residual: if scale > 0.0 { net.mean / scale } else { 0.0 },
        balance_sigma: if scale > 0.0 { net.std_error / scale } else { 0.0 },
    })
}
