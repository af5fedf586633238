//! Radiative energy shifts of bound states.
//!
//! The total shift of state n is
//!
//! δE_n = −(2e²/3πc³) Σ_k |x_nk|² ω_kn ∫₀^{ω_c} ω³/(ω_kn² − ω²) dω,
//!
//! and splitting the kernel as ω³/(a² − ω²) = −ω + a²·ω/(a² − ω²) separates
//! the state-independent free-particle part from the Lamb shift proper. The
//! principal value of the second piece has a closed form; numeric PV
//! integrals (thermal weights, the refractive-index route) use symmetric
//! excision around each pole.
//!
//! Partners above the cutoff are kept: their kernel has no pole inside
//! [0, ω_c] and the closed form covers them unchanged.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{thermal_gamma_a, Excitation, FieldSpectrum, ModeDensity};
use crate::numerics::compensated_sum;
use crate::numerics::quad::{gauss_legendre, Adaptive};
use crate::spectra::{solve_hydrogen_radial_with, HydrogenOptions, SpectralData, StateId, SystemTag};
use crate::units::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    #[default]
    PrincipalValue,
    /// 1/(a² − ω²) → (a² − ω²)/((a² − ω²)² + τ²ω⁶), the radiation-reaction
    /// width kept in the resonance denominator.
    Lorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffPolicy {
    pub omega_c: f64,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self::rest_energy(PhysicalConstants::default())
    }
}

impl CutoffPolicy {
    pub fn new(omega_c: f64, regularization: Regularization, constants: PhysicalConstants) -> Result<Self> {
        if !(omega_c >= 0.0 && omega_c.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be finite and ≥ 0, got {omega_c}")));
        }
        Ok(CutoffPolicy {
            omega_c,
            regularization,
            constants,
        })
    }

    /// ω_c = mc²/ħ.
    pub fn rest_energy(constants: PhysicalConstants) -> Self {
        CutoffPolicy {
            omega_c: constants.rest_energy() / constants.hbar(),
            regularization: Regularization::PrincipalValue,
            constants,
        }
    }

    pub fn at(omega_c: f64) -> Result<Self> {
        Self::new(omega_c, Regularization::PrincipalValue, PhysicalConstants::default())
    }

    /// 2e²/3πc³, the prefactor shared by every shift formula.
    fn coupling(&self) -> f64 {
        let c = self.constants.c();
        2.0 * self.constants.elementary_charge().powi(2) / (3.0 * PI * c * c * c)
    }

    fn require_positive(&self) -> Result<()> {
        if self.omega_c > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput("energy shifts need a positive cutoff".into()))
        }
    }
}

/// Closed-form PV ∫₀^{ω_c} ω/(a² − ω²) dω = −½ ln(|ω_c² − a²|/a²).
pub fn pv_closed_form(omega_kn: f64, omega_c: f64) -> Result<f64> {
    let a = omega_kn.abs();
    if a == 0.0 || !(omega_c > 0.0) {
        return Err(Error::Domain(format!(
            "PV integral needs ω_kn ≠ 0 and ω_c > 0, got ω_kn = {omega_kn}, ω_c = {omega_c}"
        )));
    }
    let gap = (omega_c - a) * (omega_c + a);
    if gap == 0.0 {
        return Err(Error::Domain(format!("pole at ω_kn = {omega_kn} coincides with the cutoff")));
    }
    Ok(-0.5 * (gap.abs() / (a * a)).ln())
}

/// PV ∫₀^{ω_c} w(ω)·ω/(a² − ω²) dω with a = |ω_kn|. Without a weight the
/// closed form is used; with one, the integral is computed numerically by
/// symmetric pole excision.
pub fn pv_integral(omega_kn: f64, omega_c: f64, weight: Option<&dyn Fn(f64) -> f64>) -> Result<f64> {
    match weight {
        None => pv_closed_form(omega_kn, omega_c),
        Some(w) => pv_numeric(omega_kn.abs(), omega_c, &|x| w(x) * x, &[]),
    }
}

/// PV ∫₀^{upper} f(ω)/(a² − ω²) dω for smooth f, by excising (a − h, a + h)
/// at four radii h₀/2^j and Richardson-extrapolating the odd powers h, h³,
/// h⁵ away. `hints` are extra breakpoints where f changes scale.
pub fn pv_numeric(a: f64, upper: f64, f: &dyn Fn(f64) -> f64, hints: &[f64]) -> Result<f64> {
    if !(a > 0.0 && upper > 0.0) {
        return Err(Error::Domain(format!("PV integral needs a > 0 and upper > 0, got {a}, {upper}")));
    }
    // 1e-13 sits on the roundoff floor of the excised integrals
    let quad = Adaptive {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_segments: 20_000,
    };
    let kernel = |x: f64| f(x) / ((a - x) * (a + x));
    let base_breaks = |extra: &[f64]| -> Vec<f64> {
        let mut b: Vec<f64> = std::iter::once(0.0)
            .chain(hints.iter().copied().filter(|&h| h > 0.0 && h < upper))
            .chain(extra.iter().copied())
            .chain(std::iter::once(upper))
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    };
    let dist = (upper - a).abs();
    if dist <= 1e-12 * a {
        return Err(Error::Domain(format!("pole at {a} coincides with the integration limit")));
    }
    if a > upper {
        return Ok(quad.integrate_with_breaks(kernel, &base_breaks(&[]))?.value);
    }
    let h0 = 0.25 * a.min(upper - a);
    let mut levels = [0.0; 4];
    for (j, level) in levels.iter_mut().enumerate() {
        let h = h0 / (1u32 << j) as f64;
        let (lo, hi) = (a - h, a + h);
        let masked = |x: f64| if x > lo && x < hi { 0.0 } else { kernel(x) };
        let breaks = base_breaks(&[lo, hi, a - 2.0 * h, a + 2.0 * h]);
        let breaks: Vec<f64> = breaks.into_iter().filter(|&b| (0.0..=upper).contains(&b)).collect();
        // the two sides of the pole cancel, so the floor follows ∫|kernel|
        let scale = Adaptive::with_tolerances(0.0, 1e-6).integrate_with_breaks(|x| masked(x).abs(), &breaks)?.value;
        let quad = Adaptive {
            abs_tol: 1e-14 * scale,
            ..quad
        };
        *level = quad.integrate_with_breaks(masked, &breaks)?.value;
    }
    // O(h) = PV + c₁h + c₃h³ + c₅h⁵ + …
    let mut t = levels.to_vec();
    for p in [1, 3, 5] {
        let factor = (1u64 << p) as f64;
        t = t.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
    }
    Ok(t[0])
}

/// ∫₀^{ω_c} ω(a² − ω²)/((a² − ω²)² + τ²ω⁶) dω, the radiation-reaction
/// regularized counterpart of [`pv_closed_form`].
pub fn lorentzian_integral(omega_kn: f64, omega_c: f64, tau: f64) -> Result<f64> {
    let a = omega_kn.abs();
    if a == 0.0 || !(omega_c > 0.0) {
        return Err(Error::Domain("Lorentzian integral needs ω_kn ≠ 0 and ω_c > 0".into()));
    }
    let kernel = |x: f64| {
        let d = (a - x) * (a + x);
        x * d / (d * d + tau * tau * x.powi(6))
    };
    // resonance half-width in ω
    let width = (0.5 * tau * a * a).max(1e-300);
    let mut breaks = vec![0.0, omega_c];
    let mut s = width;
    while s < a {
        for b in [a - s, a + s] {
            if b > 0.0 && b < omega_c {
                breaks.push(b);
            }
        }
        s *= 8.0;
    }
    if a < omega_c {
        breaks.push(a);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // the resonance peak leaves a roundoff floor near 1e-12 relative
    let quad = Adaptive {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_segments: 20_000,
    };
    Ok(quad.integrate_with_breaks(kernel, &breaks)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Route {
    /// Per-partner PV integral (or its Lorentzian counterpart).
    Direct,
    /// ln|ω_c/ω_kn| per partner.
    BetheLog,
    /// Numeric integral of ρ₀(ω)[α_n(ω) − α_free(ω)] over the spectrum.
    Polarizability,
    /// (4/3)α³·Z·L·|ψ_n(0)|² with a caller-supplied logarithm L (Coulomb only).
    LaplacianV { log_factor: f64 },
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::BetheLog => "bethe_log",
            Route::Polarizability => "polarizability",
            Route::LaplacianV { .. } => "laplacian_v",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartnerShift {
    pub partner: StateId,
    pub label: String,
    pub omega_kn: f64,
    pub free_particle: f64,
    pub proper: f64,
}

/// Proper shift of the same state at two basis sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisConvergence {
    pub basis_size: usize,
    pub proper: f64,
    pub doubled_basis_size: usize,
    pub doubled_proper: f64,
}

impl BasisConvergence {
    pub fn relative_change(&self) -> f64 {
        ((self.doubled_proper - self.proper) / self.doubled_proper).abs()
    }
}

/// Energies in Hartree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftResult {
    pub state: StateId,
    pub label: String,
    pub route: Route,
    pub cutoff: CutoffPolicy,
    pub total: f64,
    pub free_particle: f64,
    pub proper: f64,
    pub partners: Vec<PartnerShift>,
    pub excluded: Vec<StateId>,
    pub convergence: Option<BasisConvergence>,
}

impl ShiftResult {
    fn empty(s: &SpectralData, n: StateId, route: Route, cutoff: &CutoffPolicy) -> Self {
        ShiftResult {
            state: n,
            label: s.label(n).to_string(),
            route,
            cutoff: *cutoff,
            total: 0.0,
            free_particle: 0.0,
            proper: 0.0,
            partners: Vec::new(),
            excluded: Vec::new(),
            convergence: None,
        }
    }

    fn finish(mut self) -> Self {
        if !self.partners.is_empty() {
            self.free_particle = compensated_sum(self.partners.iter().map(|p| p.free_particle));
            self.proper = compensated_sum(self.partners.iter().map(|p| p.proper));
        }
        self.total = self.free_particle + self.proper;
        self
    }
}

fn free_particle_term(s: &SpectralData, n: StateId, k: StateId, cutoff: &CutoffPolicy) -> f64 {
    let w = s.omega(k, n);
    cutoff.coupling() * s.dipole_sq(n, k) * w * 0.5 * cutoff.omega_c * cutoff.omega_c
}

/// δE_n with the ω³ kernel split into free-particle and proper parts, the
/// latter by the direct PV (or Lorentzian) route.
pub fn total_shift(s: &SpectralData, n: StateId, cutoff: &CutoffPolicy) -> Result<ShiftResult> {
    lamb_proper(s, n, cutoff, Route::Direct)
}

pub fn lamb_proper(s: &SpectralData, n: StateId, cutoff: &CutoffPolicy, route: Route) -> Result<ShiftResult> {
    s.check(n)?;
    cutoff.require_positive()?;
    let mut out = ShiftResult::empty(s, n, route, cutoff);
    let (partners, excluded) = s.split_partners(n);
    out.excluded = excluded;
    let pref = cutoff.coupling();
    match route {
        Route::Direct | Route::BetheLog => {
            for k in partners {
                let w = s.omega(k, n);
                let x2 = s.dipole_sq(n, k);
                let integral = match (route, cutoff.regularization) {
                    (Route::BetheLog, _) => -(cutoff.omega_c / w.abs()).ln(),
                    (_, Regularization::PrincipalValue) => pv_closed_form(w, cutoff.omega_c)?,
                    (_, Regularization::Lorentzian) => lorentzian_integral(w, cutoff.omega_c, cutoff.constants.tau())?,
                };
                out.partners.push(PartnerShift {
                    partner: k,
                    label: s.label(k).to_string(),
                    omega_kn: w,
                    free_particle: free_particle_term(s, n, k, cutoff),
                    proper: -pref * x2 * w.powi(3) * integral,
                });
            }
            Ok(out.finish())
        }
        Route::Polarizability => {
            out.free_particle = compensated_sum(partners.iter().map(|&k| free_particle_term(s, n, k, cutoff)));
            out.proper = power_route_proper(s, n, cutoff)?;
            Ok(out.finish())
        }
        Route::LaplacianV { log_factor } => {
            let z = match s.system() {
                SystemTag::Coulomb { z, .. } => *z,
                _ => return Err(Error::Unsupported("the ∇²V route needs a Coulomb potential".into())),
            };
            let st = s.state(n);
            let density = match (st.angular_momentum, st.density_at_origin) {
                (Some(0), Some(d)) => d,
                _ => 0.0,
            };
            let c = cutoff.constants;
            let m = s.mass();
            // (αħ²L/3πc²m²)·4πZe²|ψ(0)|²
            out.free_particle = compensated_sum(partners.iter().map(|&k| free_particle_term(s, n, k, cutoff)));
            out.proper = c.alpha() * c.hbar().powi(2) * log_factor / (3.0 * PI * c.c().powi(2) * m * m)
                * 4.0
                * PI
                * z
                * c.elementary_charge().powi(2)
                * density;
            Ok(out.finish())
        }
    }
}

/// Isotropic dynamic polarizability (2/3ħ)Σ_m |d_mn|²ω_mn/(ω_mn² − ω²).
///
/// For 1D data this is the orientation average of the single tensor
/// component. Degenerate partners are left out.
pub fn polarizability(s: &SpectralData, n: StateId, omega: f64, regularization: Regularization, consts: &PhysicalConstants) -> Result<f64> {
    s.check(n)?;
    let (partners, _) = s.split_partners(n);
    let e2 = consts.elementary_charge().powi(2);
    let tau = consts.tau();
    let mut sum = crate::numerics::NeumaierSum::default();
    for k in partners {
        let w = s.omega(k, n);
        let d = (w - omega) * (w + omega);
        let term = match regularization {
            Regularization::PrincipalValue => {
                if d.abs() <= 1e-12 * w * w {
                    return Err(Error::Resonance {
                        partner: s.label(k).to_string(),
                        omega,
                    });
                }
                w / d
            }
            Regularization::Lorentzian => w * d / (d * d + tau * tau * omega.powi(6)),
        };
        sum.add(s.dipole_sq(n, k) * term);
    }
    Ok(2.0 * e2 * sum.value() / (3.0 * consts.hbar()))
}

/// n(ω) = 1 + 2πα_n(ω), per unit number density of atoms.
pub fn refractive_index(s: &SpectralData, n: StateId, omega: f64, regularization: Regularization, consts: &PhysicalConstants) -> Result<f64> {
    Ok(1.0 + 2.0 * PI * polarizability(s, n, omega, regularization, consts)?)
}

/// Proper shift from −2π PV∫₀^{ω_c} ρ₀(ω)[α_n(ω) − α_free(ω)] dω, where
/// α_free = −(2/3)S₁/ω² removes the free-particle part (S₁ the basis TRK
/// sum). Every pole inside the range gets a symmetric window integrated with
/// mirrored Gauss–Legendre nodes, so the odd singular part cancels exactly.
fn power_route_proper(s: &SpectralData, n: StateId, cutoff: &CutoffPolicy) -> Result<f64> {
    let consts = cutoff.constants;
    let wc = cutoff.omega_c;
    let (partners, _) = s.split_partners(n);
    let terms: Vec<(f64, f64)> = partners.iter().map(|&k| (s.omega(k, n), s.dipole_sq(n, k))).collect();
    if terms.is_empty() {
        return Ok(0.0);
    }
    let c = consts.c();
    let hbar = consts.hbar();
    let e2 = consts.elementary_charge().powi(2);
    // 2π·ρ₀(ω)·[α_n(ω) − α_free(ω)], with the bracket combined analytically
    // per partner: ω_k/(ω_k² − ω²) + 1/ω² stays finite as ω → 0
    let integrand = |x: f64| {
        let rho0 = hbar * x.powi(3) / (2.0 * PI * PI * c * c * c);
        let mut acc = crate::numerics::NeumaierSum::default();
        for &(w, x2) in &terms {
            acc.add(x2 * w.powi(3) / ((w - x) * (w + x)));
        }
        let bracket = 2.0 * e2 * acc.value() / (3.0 * hbar * x * x);
        2.0 * PI * rho0 * bracket
    };

    let mut poles: Vec<f64> = terms.iter().map(|(w, _)| w.abs()).filter(|&p| p < wc).collect();
    poles.sort_by(f64::total_cmp);
    poles.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    let mut windows = Vec::with_capacity(poles.len());
    for (i, &p) in poles.iter().enumerate() {
        let left = if i == 0 { p } else { p - poles[i - 1] };
        let right = if i + 1 == poles.len() { wc - p } else { poles[i + 1] - p };
        let h = 0.5 * left.min(right);
        if h <= 0.0 {
            return Err(Error::Quadrature(format!("pole at {p} is not separated from its neighbours")));
        }
        windows.push((p, h));
    }
    let (gx, gw) = gauss_legendre(64);
    let window_integral = |p: f64, h: f64| -> f64 {
        // ∫₀^h [F(p+u) + F(p−u)] du on 8 geometric sub-panels toward u = 0
        let mut edges = vec![0.0];
        let mut e = h / 4f64.powi(7);
        while e < h {
            edges.push(e);
            e *= 4.0;
        }
        edges.push(h);
        let mut acc = crate::numerics::NeumaierSum::default();
        for seg in edges.windows(2) {
            let (u0, u1) = (seg[0], seg[1]);
            let half = 0.5 * (u1 - u0);
            let mid = 0.5 * (u1 + u0);
            for (x, w) in gx.iter().zip(&gw) {
                let u = mid + half * x;
                acc.add(half * w * (integrand(p + u) + integrand(p - u)));
            }
        }
        acc.value()
    };
    let quad = Adaptive {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_segments: 50_000,
    };
    let mut total = crate::numerics::NeumaierSum::default();
    let mut cursor = 0.0;
    for &(p, h) in &windows {
        if p - h > cursor {
            total.add(quad.integrate(integrand, cursor, p - h)?.value);
        }
        total.add(window_integral(p, h));
        cursor = p + h;
    }
    if wc > cursor {
        // the tail decays like 1/ω; a geometric set of breaks helps the
        // adaptive rule across many decades
        let mut breaks = vec![cursor];
        let mut b = cursor.max(1e-3) * 2.0;
        while b < wc {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(wc);
        total.add(quad.integrate_with_breaks(integrand, &breaks)?.value);
    }
    Ok(-total.value())
}

/// Free-particle shift split into the zero-point part and the addition from
/// the field's excitation. Energies in Hartree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeParticleShift {
    pub zero_point: f64,
    pub excitation: f64,
    pub total: f64,
}

/// (e²ħ/πmc³)∫₀^{ω_c} g(ω)(1 + γ_a(ω))ω dω for a three-dimensional free
/// charge; (α/2π)mc² for the bare ZPF at ω_c = mc²/ħ.
pub fn free_particle_shift(cutoff: &CutoffPolicy, field: &FieldSpectrum) -> Result<FreeParticleShift> {
    let consts = &cutoff.constants;
    let c = consts.c();
    let pref = consts.elementary_charge().powi(2) * consts.hbar() / (PI * consts.electron_mass() * c * c * c);
    let wc = cutoff.omega_c;
    let zero_point_integral = match &field.mode_density {
        ModeDensity::Free => 0.5 * wc * wc,
        ModeDensity::Uniform(g) => g * 0.5 * wc * wc,
        ModeDensity::Bands(mask) => {
            let mut v = 0.5 * wc * wc;
            for b in mask.bands() {
                let hi = b.hi.min(wc);
                if hi > b.lo {
                    v += (b.g - 1.0) * 0.5 * (hi * hi - b.lo * b.lo);
                }
            }
            v
        }
    };
    let excitation_integral = excitation_moment(cutoff, field, 1)?;
    let zero_point = pref * zero_point_integral;
    let excitation = pref * excitation_integral;
    Ok(FreeParticleShift {
        zero_point,
        excitation,
        total: zero_point + excitation,
    })
}

/// ∫₀^{ω_c} g·γ_a·ω^p dω.
fn excitation_moment(cutoff: &CutoffPolicy, field: &FieldSpectrum, p: i32) -> Result<f64> {
    let consts = &field.constants;
    let wc = cutoff.omega_c;
    let quad = Adaptive::with_tolerances(0.0, 1e-12);
    let value = match (&field.mode_density, &field.excitation) {
        (_, Excitation::None) => 0.0,
        (ModeDensity::Free, Excitation::Thermal { temperature_k }) => {
            if *temperature_k == 0.0 || wc == 0.0 {
                0.0
            } else {
                let kt = consts.thermal_energy(*temperature_k) / consts.hbar();
                let y_max = (wc / kt).min(750.0);
                let bose = |y: f64| 2.0 * y.powi(p) / y.exp_m1();
                kt.powi(p + 1) * quad.integrate_with_breaks(bose, &bose_breaks(y_max))?.value
            }
        }
        _ => {
            let mut breaks = vec![0.0, wc];
            if let ModeDensity::Bands(mask) = &field.mode_density {
                for b in mask.bands() {
                    breaks.extend([b.lo, b.hi]);
                }
            }
            collect_excitation_breaks(&field.excitation, consts, &mut breaks);
            breaks.retain(|&b| (0.0..=wc).contains(&b));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let f = |x: f64| field.g(x) * field.gamma_a(x).unwrap_or(f64::NAN) * x.powi(p);
            quad.integrate_with_breaks(f, &breaks)?.value
        }
    };
    if !value.is_finite() {
        return Err(Error::Divergence("weighted free-particle integral does not converge".into()));
    }
    Ok(value)
}

fn bose_breaks(y_max: f64) -> Vec<f64> {
    let mut b: Vec<f64> = [0.0, 1.0, 5.0, 20.0, 60.0, 200.0]
        .into_iter()
        .filter(|&y| y < y_max)
        .collect();
    b.push(y_max);
    b
}

fn collect_excitation_breaks(e: &Excitation, consts: &PhysicalConstants, out: &mut Vec<f64>) {
    match e {
        Excitation::Thermal { temperature_k } if *temperature_k > 0.0 => {
            let kt = consts.thermal_energy(*temperature_k) / consts.hbar();
            out.extend([kt, 5.0 * kt, 20.0 * kt, 60.0 * kt, 200.0 * kt]);
        }
        Excitation::Tabulated(t) => {
            out.push(t.omega_start);
            out.push(t.omega_start + t.omega_step * (t.gamma_a.len() - 1) as f64);
        }
        Excitation::Sum { parts } => parts.iter().for_each(|p| collect_excitation_breaks(p, consts, out)),
        _ => {}
    }
}

/// ∫₀^∞ y/(e^y − 1) dy by quadrature (π²/6).
pub fn bose_integral() -> Result<f64> {
    let q = Adaptive::with_tolerances(0.0, 1e-13);
    Ok(q.integrate_with_breaks(|y: f64| y / y.exp_m1(), &bose_breaks(750.0))?.value)
}

/// Closed-form thermal increment of the free-particle shift,
/// (πα/3mc²)(k_BT)².
pub fn thermal_free_particle_closed_form(temperature_k: f64, consts: &PhysicalConstants) -> f64 {
    let kt = consts.thermal_energy(temperature_k);
    PI * consts.alpha() / (3.0 * consts.rest_energy()) * kt * kt
}

/// Classical electromagnetic mass (4e²/3πc³)ω_c. Reported for comparison;
/// the equation of motion already has it subtracted.
pub fn mass_renormalization_constant(cutoff: &CutoffPolicy) -> f64 {
    let c = cutoff.constants.c();
    4.0 * cutoff.constants.elementary_charge().powi(2) / (3.0 * PI * c * c * c) * cutoff.omega_c
}

/// Change of the radiative shifts when a blackbody field at `temperature_k`
/// is added to the ZPF. Energies in Hartree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalShift {
    pub state: StateId,
    pub label: String,
    pub temperature_k: f64,
    /// Δ(δE_L) integrated to ω_c.
    pub proper: f64,
    /// Δ(δE_L) integrated to min(ω_c, 50·k_BT/ħ).
    pub proper_truncated: f64,
    /// Δ(δE_fp) from the basis sum, consistent with `proper`.
    pub free_particle: f64,
    /// Δ(δE_n) from the undivided ω³ kernel.
    pub total: f64,
    pub excluded: Vec<StateId>,
}

pub fn thermal_lamb_delta(s: &SpectralData, n: StateId, temperature_k: f64, cutoff: &CutoffPolicy) -> Result<ThermalShift> {
    s.check(n)?;
    cutoff.require_positive()?;
    if !(temperature_k >= 0.0 && temperature_k.is_finite()) {
        return Err(Error::Domain(format!("temperature must be ≥ 0 K, got {temperature_k}")));
    }
    let (partners, excluded) = s.split_partners(n);
    let mut out = ThermalShift {
        state: n,
        label: s.label(n).to_string(),
        temperature_k,
        proper: 0.0,
        proper_truncated: 0.0,
        free_particle: 0.0,
        total: 0.0,
        excluded,
    };
    if temperature_k == 0.0 {
        return Ok(out);
    }
    let consts = cutoff.constants;
    let kt = consts.thermal_energy(temperature_k) / consts.hbar();
    let gamma = |x: f64| thermal_gamma_a(x, temperature_k, &consts).unwrap_or(0.0);
    let hints = [kt, 5.0 * kt, 20.0 * kt, 50.0 * kt, 200.0 * kt];
    let wc = cutoff.omega_c;
    let short = wc.min(50.0 * kt);
    let long = wc.min(750.0 * kt);
    let pref = cutoff.coupling();
    let q = Adaptive::with_tolerances(0.0, 1e-13);
    let moment1 = kt * kt * q.integrate_with_breaks(|y: f64| 2.0 * y / y.exp_m1(), &bose_breaks(long / kt))?.value;

    let mut proper = crate::numerics::NeumaierSum::default();
    let mut proper_short = crate::numerics::NeumaierSum::default();
    let mut fp = crate::numerics::NeumaierSum::default();
    let mut total = crate::numerics::NeumaierSum::default();
    for k in partners {
        let w = s.omega(k, n);
        let a = w.abs();
        let x2 = s.dipole_sq(n, k);
        let f1 = |x: f64| gamma(x) * x;
        let f3 = |x: f64| gamma(x) * x.powi(3);
        let i1 = pv_numeric(a, long, &f1, &hints)?;
        let i1s = pv_numeric(a, short, &f1, &hints)?;
        let i3 = pv_numeric(a, long, &f3, &hints)?;
        proper.add(-pref * x2 * w.powi(3) * i1);
        proper_short.add(-pref * x2 * w.powi(3) * i1s);
        total.add(-pref * x2 * w * i3);
        fp.add(pref * x2 * w * moment1);
    }
    out.proper = proper.value();
    out.proper_truncated = proper_short.value();
    out.free_particle = fp.value();
    out.total = total.value();
    Ok(out)
}

/// Solves the hydrogenic problem at `opts.grid_points` and at twice that,
/// and returns the doubled-basis shift of `label` with both proper values
/// recorded.
pub fn hydrogen_shift_with_doubling(opts: &HydrogenOptions, label: &str, cutoff: &CutoffPolicy, route: Route) -> Result<ShiftResult> {
    let coarse = solve_hydrogen_radial_with(opts)?;
    let fine_opts = HydrogenOptions {
        grid_points: 2 * opts.grid_points,
        ..opts.clone()
    };
    let fine = solve_hydrogen_radial_with(&fine_opts)?;
    let a = lamb_proper(&coarse, coarse.find(label)?, cutoff, route)?;
    let mut b = lamb_proper(&fine, fine.find(label)?, cutoff, route)?;
    b.convergence = Some(BasisConvergence {
        basis_size: coarse.basis_size(),
        proper: a.proper,
        doubled_basis_size: fine.basis_size(),
        doubled_proper: b.proper,
    });
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::solve_harmonic;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let v = pv_closed_form(1.0, 10.0).unwrap();
        assert!((v + 0.5 * 99f64.ln()).abs() < 1e-15);
        assert!((v + 2.29756).abs() < 1e-5);
        assert!(pv_closed_form(1.0, 2f64.sqrt()).unwrap().abs() < 1e-15);
        assert!(matches!(pv_closed_form(1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(pv_closed_form(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn numeric_pv_unit_weight() {
        let one = |_: f64| 1.0;
        let v = pv_integral(1.0, 10.0, Some(&one)).unwrap();
        assert!((v + 0.5 * 99f64.ln()).abs() < 1e-8 * 2.3, "{v}");
    }

    #[test]
    fn lorentzian_tends_to_pv() {
        let pv = pv_closed_form(0.3, 50.0).unwrap();
        for tau in [1e-4, 1e-6, 1e-8] {
            let l = lorentzian_integral(0.3, 50.0, tau).unwrap();
            assert!((l - pv).abs() < 50.0 * tau + 1e-9, "{tau}: {l} vs {pv}");
        }
    }

    #[test]
    fn mass_renormalization() {
        let c = PhysicalConstants::default();
        let cut = CutoffPolicy::default();
        let dm = mass_renormalization_constant(&cut);
        assert!((dm - 4.0 * c.alpha() / (3.0 * PI)).abs() < 1e-15);
        assert!((dm - 3.097e-3).abs() < 1e-6);
        assert_eq!(mass_renormalization_constant(&CutoffPolicy::at(0.0).unwrap()), 0.0);
        let d2 = mass_renormalization_constant(&CutoffPolicy::at(2.0 * cut.omega_c).unwrap());
        assert!((d2 / dm - 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_particle_zpf() {
        let c = PhysicalConstants::default();
        let fp = free_particle_shift(&CutoffPolicy::default(), &FieldSpectrum::zpf()).unwrap();
        let expect = c.alpha() / (2.0 * PI) * c.rest_energy();
        assert!((fp.total / expect - 1.0).abs() < 1e-14);
        assert_eq!(fp.excitation, 0.0);
        let ev = fp.total * crate::units::HARTREE_EV;
        assert!((ev - 593.4).abs() < 0.1, "{ev}");
        let t0 = free_particle_shift(&CutoffPolicy::default(), &FieldSpectrum::thermal(0.0).unwrap()).unwrap();
        assert_eq!(t0.excitation, 0.0);
    }

    #[test]
    fn thermal_free_particle_quadrature_matches_closed_form() {
        let c = PhysicalConstants::default();
        let fp = free_particle_shift(&CutoffPolicy::default(), &FieldSpectrum::thermal(300.0).unwrap()).unwrap();
        let closed = thermal_free_particle_closed_form(300.0, &c);
        assert!((fp.excitation / closed - 1.0).abs() < 1e-10);
        let ev = closed * crate::units::HARTREE_EV;
        assert!((ev - 1.00e-11).abs() < 0.01e-11, "{ev}");
        assert!((bose_integral().unwrap() - PI * PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn generic_excitation_path_agrees_with_thermal_path() {
        let cut = CutoffPolicy::at(2.0).unwrap();
        let t = 3000.0;
        let thermal = free_particle_shift(&cut, &FieldSpectrum::thermal(t).unwrap()).unwrap();
        let summed = FieldSpectrum::new(
            ModeDensity::Free,
            Excitation::Sum {
                parts: vec![Excitation::Thermal { temperature_k: t }],
            },
            PhysicalConstants::default(),
        )
        .unwrap();
        let generic = free_particle_shift(&cut, &summed).unwrap();
        assert!((generic.excitation / thermal.excitation - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillator_proper_shift_has_log_form() {
        let c = PhysicalConstants::default();
        let w0 = 1.0;
        let s = solve_harmonic(w0, 1.0, 2).unwrap();
        let cut = CutoffPolicy::at(100.0 * w0).unwrap();
        let r = total_shift(&s, StateId(0), &cut).unwrap();
        let oracle = c.tau() * w0 * w0 / (2.0 * PI) * (100.0f64).ln();
        assert!((r.proper / oracle - 1.0).abs() < 1e-4, "{} vs {oracle}", r.proper);
        assert!((r.total - (r.free_particle + r.proper)).abs() <= 1e-12 * r.total.abs());
    }

    #[test]
    fn empty_and_uncoupled() {
        let s = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into(), "b".into()], vec![0.0, 1.0], &[]).unwrap();
        let r = total_shift(&s, StateId(0), &CutoffPolicy::default()).unwrap();
        assert_eq!((r.total, r.free_particle, r.proper), (0.0, 0.0, 0.0));
        assert_eq!(polarizability(&s, StateId(0), 0.3, Regularization::PrincipalValue, &PhysicalConstants::default()).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_route_needs_coulomb() {
        let s = solve_harmonic(1.0, 1.0, 2).unwrap();
        let r = lamb_proper(&s, StateId(0), &CutoffPolicy::default(), Route::LaplacianV { log_factor: 1.0 });
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn resonance_is_reported() {
        let c = PhysicalConstants::default();
        let s = solve_harmonic(1.0, 1.0, 2).unwrap();
        let r = polarizability(&s, StateId(0), 1.0, Regularization::PrincipalValue, &c);
        assert!(matches!(r, Err(Error::Resonance { .. })));
        assert!(polarizability(&s, StateId(0), 1.0, Regularization::Lorentzian, &c).unwrap().is_finite());
        // a 1D oscillator: orientation-averaged e²/3m(ω₀² − ω²)
        let a = polarizability(&s, StateId(0), 0.5, Regularization::PrincipalValue, &c).unwrap();
        assert!((a - 1.0 / (3.0 * 0.75)).abs() < 1e-14);
    }

    #[test]
    fn power_route_matches_direct_for_oscillator() {
        let s = solve_harmonic(1.0, 1.0, 4).unwrap();
        let cut = CutoffPolicy::at(1000.0).unwrap();
        for n in 0..3 {
            let d = lamb_proper(&s, StateId(n), &cut, Route::Direct).unwrap();
            let p = lamb_proper(&s, StateId(n), &cut, Route::Polarizability).unwrap();
            assert!((p.proper / d.proper - 1.0).abs() < 1e-6, "n={n}: {} vs {}", p.proper, d.proper);
        }
    }

    #[test]
    fn thermal_zero_temperature_vanishes() {
        let s = solve_harmonic(0.01, 1.0, 3).unwrap();
        let t = thermal_lamb_delta(&s, StateId(1), 0.0, &CutoffPolicy::default()).unwrap();
        assert_eq!((t.proper, t.total, t.free_particle), (0.0, 0.0, 0.0));
    }

    #[test]
    fn thermal_split_is_consistent() {
        let s = solve_harmonic(0.01, 1.0, 3).unwrap();
        let t = thermal_lamb_delta(&s, StateId(1), 2000.0, &CutoffPolicy::default()).unwrap();
        assert!(((t.free_particle + t.proper) / t.total - 1.0).abs() < 1e-7, "{t:?}");
        assert!((t.proper_truncated / t.proper - 1.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn numeric_pv_reproduces_closed_form(a in 0.05f64..5.0, ratio in 1.5f64..200.0) {
            let wc = a * ratio;
            let one = |_: f64| 1.0;
            let num = pv_integral(a, wc, Some(&one)).unwrap();
            let exact = pv_closed_form(a, wc).unwrap();
            prop_assert!((num - exact).abs() <= 1e-8 * exact.abs().max(1e-3), "{num} vs {exact}");
        }

        #[test]
        fn direct_and_bethe_agree_for_large_cutoff(w0 in 0.01f64..2.0, mult in 100.0f64..1e4) {
            let s = solve_harmonic(w0, 1.0, 4).unwrap();
            let cut = CutoffPolicy::at(w0 * 2.0 * mult).unwrap();
            for n in 0..3 {
                let d = lamb_proper(&s, StateId(n), &cut, Route::Direct).unwrap().proper;
                let b = lamb_proper(&s, StateId(n), &cut, Route::BetheLog).unwrap().proper;
                let bound = (2.0 * w0 / cut.omega_c).powi(2);
                prop_assert!(((d - b) / b).abs() < bound);
            }
        }
    }
}
