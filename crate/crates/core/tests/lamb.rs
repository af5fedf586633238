use std::f64::consts::PI;

use sedrad::field::FieldSpectrum;
use sedrad::lamb::{
    free_particle_shift, lamb_proper, polarizability, pv_numeric, refractive_index, thermal_lamb_delta, total_shift, CutoffPolicy,
    Regularization, Route,
};
use sedrad::spectra::{solve_harmonic, solve_hydrogen_radial, SpectralData, StateId, SystemTag};
use sedrad::units::{PhysicalConstants, HARTREE_MHZ};

fn hydrogen() -> SpectralData {
    solve_hydrogen_radial(1.0, 1, 200.0, 600).unwrap()
}

#[test]
fn undivided_kernel_reproduces_the_split() {
    // −(2α³/3π)Σ|x|²ω ∫ω³/(a² − ω²) computed numerically against fp + proper
    let cut = CutoffPolicy::at(50.0).unwrap();
    let s = solve_harmonic(1.0, 1.0, 4).unwrap();
    let pref = 2.0 * cut.constants.alpha().powi(3) / (3.0 * PI);
    for n in 0..3 {
        let r = total_shift(&s, StateId(n), &cut).unwrap();
        let mut direct = 0.0;
        for (k, _) in s.states().iter().enumerate() {
            let x2 = s.dipole_sq(StateId(n), StateId(k));
            if x2 == 0.0 {
                continue;
            }
            let w = s.omega(StateId(k), StateId(n));
            direct += -pref * x2 * w * pv_numeric(w.abs(), cut.omega_c, &|x: f64| x.powi(3), &[]).unwrap();
        }
        assert!((r.total / direct - 1.0).abs() < 1e-9, "n={n}: {} vs {direct}", r.total);
        assert!((r.total - r.free_particle - r.proper).abs() <= 1e-12 * r.total.abs());
    }
}

#[test]
fn basis_free_particle_part_matches_analytic_value() {
    let cut = CutoffPolicy::default();
    let h = hydrogen();
    let analytic = free_particle_shift(&cut, &FieldSpectrum::zpf()).unwrap().total;
    for label in ["1s", "2s", "2p"] {
        let r = total_shift(&h, h.find(label).unwrap(), &cut).unwrap();
        assert!((r.free_particle / analytic - 1.0).abs() < 1e-3, "{label}");
        assert!((r.total / (r.free_particle + r.proper) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn free_particle_limit() {
    // one partner with TRK weight fixed at ħ/2m while ω → 0
    let cut = CutoffPolicy::default();
    let mut last = f64::INFINITY;
    for w in [1e-1, 1e-2, 1e-3, 1e-4] {
        let s = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into(), "b".into()], vec![0.0, w], &[(0, 1, 0.5 / w)]).unwrap();
        let r = total_shift(&s, StateId(0), &cut).unwrap();
        let frac = (r.proper / r.total).abs();
        assert!(frac < last);
        last = frac;
    }
    assert!(last < 1e-12);
}

#[test]
fn oscillator_log_form() {
    let c = PhysicalConstants::default();
    let w0 = 0.02;
    let s = solve_harmonic(w0, 1.0, 3).unwrap();
    let wc = 100.0 * w0;
    let r = lamb_proper(&s, StateId(0), &CutoffPolicy::at(wc).unwrap(), Route::Direct).unwrap();
    let oracle = c.hbar() * c.tau() * w0 * w0 / (2.0 * PI) * (wc / w0).ln();
    assert!((r.proper / oracle - 1.0).abs() < 1e-4);
}

#[test]
fn hydrogen_shifts() {
    let cut = CutoffPolicy::default();
    let h = hydrogen();
    let s2 = lamb_proper(&h, h.find("2s").unwrap(), &cut, Route::Direct).unwrap().proper;
    let p2 = lamb_proper(&h, h.find("2p").unwrap(), &cut, Route::Direct).unwrap().proper;
    assert!(s2 > 0.0);
    assert!(p2.abs() < 0.03 * s2.abs());
    // the 2p Bethe logarithm is negative, so its shift is small and positive
    assert!((p2 * HARTREE_MHZ - 4.07).abs() < 0.1, "{}", p2 * HARTREE_MHZ);
    assert!(((s2 - p2) * HARTREE_MHZ / 1040.0 - 1.0).abs() < 0.1);
}

#[test]
fn laplacian_route_with_basis_logarithm_matches_bethe() {
    let cut = CutoffPolicy::default();
    let h = hydrogen();
    for label in ["1s", "2s"] {
        let n = h.find(label).unwrap();
        let (partners, _) = h.split_partners(n);
        let weight = |k: StateId| h.dipole_sq(n, k) * h.omega(k, n).powi(3);
        let total: f64 = partners.iter().map(|&k| weight(k)).sum();
        let mean_log: f64 = partners.iter().map(|&k| weight(k) * h.omega(k, n).abs().ln()).sum::<f64>() / total;
        let log_factor = cut.omega_c.ln() - mean_log;
        let bethe = lamb_proper(&h, n, &cut, Route::BetheLog).unwrap().proper;
        let lap = lamb_proper(&h, n, &cut, Route::LaplacianV { log_factor }).unwrap().proper;
        // exact up to the basis estimate of Σ|x|²ω³ = 2πZ|ψ(0)|²
        assert!((lap / bethe - 1.0).abs() < 0.02, "{label}: {lap} vs {bethe}");
    }
    let p = h.find("2p").unwrap();
    assert_eq!(lamb_proper(&h, p, &cut, Route::LaplacianV { log_factor: 3.0 }).unwrap().proper, 0.0);
}

#[test]
fn polarizability_limits() {
    let c = PhysicalConstants::default();
    let h = hydrogen();
    let s1 = h.find("1s").unwrap();
    let a0 = polarizability(&h, s1, 0.0, Regularization::PrincipalValue, &c).unwrap();
    assert!((a0 / 4.5 - 1.0).abs() < 0.01, "{a0}");
    // far above every basis frequency: α → −e²/mω²
    let top = h.states().iter().map(|s| s.energy).fold(f64::MIN, f64::max);
    let w = 1e4 * top.abs().max(1.0);
    let high = polarizability(&h, s1, w, Regularization::PrincipalValue, &c).unwrap();
    assert!((high * w * w + 1.0).abs() < 1e-3, "{}", high * w * w);
    assert!((refractive_index(&h, s1, 0.0, Regularization::PrincipalValue, &c).unwrap() - 1.0 - 2.0 * PI * a0).abs() < 1e-12);

    let lone = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into()], vec![0.0], &[]).unwrap();
    assert_eq!(polarizability(&lone, StateId(0), 0.2, Regularization::PrincipalValue, &c).unwrap(), 0.0);
}

#[test]
fn lorentzian_regularization_agrees_with_principal_value() {
    let h = hydrogen();
    let pv = CutoffPolicy::default();
    let lor = CutoffPolicy { regularization: Regularization::Lorentzian, ..pv };
    // the width term changes the kernel by (τω)² relative, largest at ω_c
    let bound = 2.0 * (pv.constants.tau() * pv.omega_c).powi(2);
    for label in ["1s", "2s"] {
        let n = h.find(label).unwrap();
        let a = lamb_proper(&h, n, &pv, Route::Direct).unwrap().proper;
        let b = lamb_proper(&h, n, &lor, Route::Direct).unwrap().proper;
        assert!((a / b - 1.0).abs() < bound, "{label}: {a} vs {b}");
    }
    let low = CutoffPolicy::at(50.0).unwrap();
    let low_lor = CutoffPolicy { regularization: Regularization::Lorentzian, ..low };
    let n = h.find("2s").unwrap();
    let a = lamb_proper(&h, n, &low, Route::Direct).unwrap().proper;
    let b = lamb_proper(&h, n, &low_lor, Route::Direct).unwrap().proper;
    // below ω_c the poles sit inside the range; the width shifts each pole
    // integral at first order, ~τa² relative, bounded by τω_c
    assert!((a / b - 1.0).abs() < low.constants.tau() * low.omega_c, "{a} vs {b}");
    assert!((a / b - 1.0).abs() > 0.0);
}

#[test]
fn thermal_shift_of_the_ground_state() {
    let c = PhysicalConstants::default();
    let h = hydrogen();
    let s1 = h.find("1s").unwrap();
    let t = 300.0;
    let d = thermal_lamb_delta(&h, s1, t, &CutoffPolicy::default()).unwrap();
    // the proper part cancels the free-particle part up to the blackbody
    // Stark shift −½α(0)⟨E²⟩ with ⟨E²⟩ = (4π³/15)(k_BT)⁴/ħ³c³
    assert!(d.proper < 0.0 && d.free_particle > 0.0);
    assert!(d.proper.abs() > d.free_particle);
    let kt = c.thermal_energy(t);
    let e2 = 4.0 * PI.powi(3) / 15.0 * kt.powi(4) * c.alpha().powi(3);
    let a0 = polarizability(&h, s1, 0.0, Regularization::PrincipalValue, &c).unwrap();
    let stark = -0.5 * a0 * e2;
    assert!((d.total / stark - 1.0).abs() < 1e-3, "{} vs {stark}", d.total);
    assert!(((d.free_particle + d.proper) / d.total - 1.0).abs() < 1e-3);
    assert!((d.proper_truncated / d.proper - 1.0).abs() < 1e-9);

    let zero = thermal_lamb_delta(&h, s1, 0.0, &CutoffPolicy::default()).unwrap();
    assert_eq!((zero.proper, zero.total), (0.0, 0.0));
}

#[test]
fn convergence_metadata_is_filled() {
    use sedrad::lamb::hydrogen_shift_with_doubling;
    use sedrad::spectra::HydrogenOptions;
    let r = hydrogen_shift_with_doubling(&HydrogenOptions::default(), "2s", &CutoffPolicy::default(), Route::BetheLog).unwrap();
    let c = r.convergence.unwrap();
    assert_eq!(c.doubled_basis_size, 2 * c.basis_size);
    assert!(c.relative_change() < 0.03);
    assert_eq!(c.doubled_proper, r.proper);
}
