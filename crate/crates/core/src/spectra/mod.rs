//! Eigenenergies and dipole couplings of bound systems.
//!
//! Three backends produce a [`SpectralData`]: the closed-form harmonic
//! oscillator, a hydrogenic radial solver whose box-discretized positive
//! energy states stand in for the continuum, and a finite-difference solver
//! for arbitrary sampled 1D potentials.
//!
//! All quantities are in Hartree atomic units.

mod custom;
mod harmonic;
mod hydrogen;
mod potential;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::compensated_sum;

pub use custom::solve_custom_1d;
pub use harmonic::solve_harmonic;
pub use hydrogen::{solve_hydrogen_radial, solve_hydrogen_radial_with, HydrogenOptions};
pub use potential::{PotentialKind, PotentialModel};

/// Index of a state inside a [`SpectralData`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

impl std::fmt::Display for StateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Which backend produced the data, with the parameters the downstream
/// formulas need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemTag {
    Harmonic { omega0: f64, mass: f64 },
    Coulomb { z: f64, mass: f64 },
    Custom1d { mass: f64 },
}

impl SystemTag {
    pub fn mass(&self) -> f64 {
        match *self {
            SystemTag::Harmonic { mass, .. } | SystemTag::Coulomb { mass, .. } | SystemTag::Custom1d { mass } => mass,
        }
    }

    /// Spatial dimension of the dipole convention (1 or 3).
    pub fn dimension(&self) -> u32 {
        match self {
            SystemTag::Coulomb { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub label: String,
    pub energy: f64,
    pub angular_momentum: Option<u32>,
    /// Positive-energy box state standing in for the continuum.
    pub pseudostate: bool,
    /// |ψ(0)|² for s states of central potentials.
    pub density_at_origin: Option<f64>,
}

/// Sampled wavefunctions of the row states, for expectation values by
/// quadrature: ⟨f⟩_n = Σ_j weights[j]·f(nodes[j])·amplitude_n[j]².
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Wavefunctions {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub amplitudes: BTreeMap<StateId, Vec<f64>>,
}

impl Wavefunctions {
    pub fn expectation<F: Fn(f64) -> f64>(&self, n: StateId, f: F) -> Option<f64> {
        let amp = self.amplitudes.get(&n)?;
        Some(compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .zip(amp)
                .map(|((&x, &w), &a)| w * f(x) * a * a),
        ))
    }
}

/// Energies and dipole couplings of a bound system.
///
/// Couplings are stored once per unordered pair as a symmetric strength.
/// For 1D backends that strength is |x_ik|² itself; for central potentials it
/// is the radial line strength max(l, l')·R², and [`SpectralData::dipole_sq`]
/// returns the average over the magnetic sublevels of the first argument.
///
/// `rows` lists the states whose partner lists are complete within the stored
/// basis; sums over partners are meaningful for those.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    system: SystemTag,
    states: Vec<State>,
    strengths: BTreeMap<(usize, usize), f64>,
    rows: Vec<StateId>,
    degeneracy_tol: f64,
    wavefunctions: Option<Wavefunctions>,
    adjacency: Vec<Vec<usize>>,
}

impl SpectralData {
    pub(crate) fn new(
        system: SystemTag,
        states: Vec<State>,
        strengths: BTreeMap<(usize, usize), f64>,
        rows: Vec<StateId>,
        degeneracy_tol: f64,
        wavefunctions: Option<Wavefunctions>,
    ) -> Result<Self> {
        let n = states.len();
        for (&(i, k), &v) in &strengths {
            if i >= k || k >= n {
                return Err(Error::InvalidInput(format!("bad coupling key ({i}, {k})")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("coupling ({i}, {k}) = {v} must be finite and ≥ 0")));
            }
        }
        if rows.iter().any(|r| r.0 >= n) {
            return Err(Error::InvalidInput("row index out of range".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(i, k), &v) in &strengths {
            if v > 0.0 {
                adjacency[i].push(k);
                adjacency[k].push(i);
            }
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(SpectralData {
            system,
            states,
            strengths,
            rows,
            degeneracy_tol,
            wavefunctions,
            adjacency,
        })
    }

    /// Builds data from explicit energies and symmetric 1D couplings.
    /// Handy for synthetic bases and tests; every state is a row.
    pub fn from_parts(
        system: SystemTag,
        labels: Vec<String>,
        energies: Vec<f64>,
        couplings: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if labels.len() != energies.len() {
            return Err(Error::InvalidInput("labels and energies differ in length".into()));
        }
        let states = labels
            .into_iter()
            .zip(energies)
            .map(|(label, energy)| State {
                label,
                energy,
                angular_momentum: None,
                pseudostate: false,
                density_at_origin: None,
            })
            .collect::<Vec<_>>();
        let mut strengths = BTreeMap::new();
        for &(i, k, v) in couplings {
            if i == k {
                return Err(Error::InvalidInput(format!("self-coupling on state {i}")));
            }
            strengths.insert((i.min(k), i.max(k)), v);
        }
        let rows = (0..states.len()).map(StateId).collect();
        SpectralData::new(system, states, strengths, rows, 0.0, None)
    }

    pub fn system(&self) -> &SystemTag {
        &self.system
    }

    pub fn mass(&self) -> f64 {
        self.system.mass()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, n: StateId) -> &State {
        &self.states[n.0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn basis_size(&self) -> usize {
        self.states.len()
    }

    pub fn rows(&self) -> &[StateId] {
        &self.rows
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn wavefunctions(&self) -> Option<&Wavefunctions> {
        self.wavefunctions.as_ref()
    }

    pub fn energy(&self, n: StateId) -> f64 {
        self.states[n.0].energy
    }

    pub fn label(&self, n: StateId) -> &str {
        &self.states[n.0].label
    }

    pub fn find(&self, label: &str) -> Result<StateId> {
        self.states
            .iter()
            .position(|s| s.label == label)
            .map(StateId)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    pub fn check(&self, n: StateId) -> Result<()> {
        if n.0 < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(n.to_string()))
        }
    }

    /// ω_ik = (E_i − E_k)/ħ.
    pub fn omega(&self, i: StateId, k: StateId) -> f64 {
        self.states[i.0].energy - self.states[k.0].energy
    }

    /// True when the pair is treated as degenerate (|ω| within tolerance) and
    /// excluded from rate and shift sums.
    pub fn is_degenerate(&self, i: StateId, k: StateId) -> bool {
        self.omega(i, k).abs() <= self.degeneracy_tol
    }

    /// Symmetric coupling strength of the pair.
    pub fn line_strength(&self, i: StateId, k: StateId) -> f64 {
        if i == k {
            return 0.0;
        }
        self.strengths.get(&(i.0.min(k.0), i.0.max(k.0))).copied().unwrap_or(0.0)
    }

    /// |x_ik|² seen from state `i` (3D: summed over the sublevels of `k`,
    /// averaged over those of `i`).
    pub fn dipole_sq(&self, i: StateId, k: StateId) -> f64 {
        let s = self.line_strength(i, k);
        match (self.system.dimension(), self.states[i.0].angular_momentum) {
            (3, Some(l)) => s / (2 * l + 1) as f64,
            _ => s,
        }
    }

    /// Partners of `n` with nonzero coupling, in index order.
    pub fn partners(&self, n: StateId) -> Vec<StateId> {
        self.adjacency.get(n.0).map(|a| a.iter().map(|&k| StateId(k)).collect()).unwrap_or_default()
    }

    /// Non-degenerate partners of `n` and the degenerate ones that were
    /// excluded.
    pub fn split_partners(&self, n: StateId) -> (Vec<StateId>, Vec<StateId>) {
        self.partners(n).into_iter().partition(|&k| !self.is_degenerate(n, k))
    }

    pub fn transition_frequencies(&self) -> TransitionFrequencyTable {
        let omega = self
            .strengths
            .keys()
            .map(|&(i, k)| ((i, k), self.states[i].energy - self.states[k].energy))
            .collect();
        TransitionFrequencyTable { omega }
    }

    /// Σ_k ω_kn |x_nk|² over the stored basis.
    pub fn trk_sum(&self, n: StateId) -> f64 {
        if self.states.is_empty() {
            return 0.0;
        }
        compensated_sum(self.partners(n).into_iter().map(|k| self.omega(k, n) * self.dipole_sq(n, k)))
    }

    /// ħ/2m per dimension times the dimension: the TRK target for this data.
    pub fn trk_target(&self) -> f64 {
        self.system.dimension() as f64 / (2.0 * self.mass())
    }

    pub fn to_json(&self) -> SpectralJson {
        SpectralJson {
            system: self.system.clone(),
            labels: self.states.iter().map(|s| s.label.clone()).collect(),
            energies_hartree: self.states.iter().map(|s| s.energy).collect(),
            dipole_sq: self.strengths.iter().map(|(&(i, k), &v)| (i, k, v)).collect(),
            flags: SpectralFlags {
                pseudostate: self.states.iter().map(|s| s.pseudostate).collect(),
                angular_momentum: self.states.iter().map(|s| s.angular_momentum).collect(),
                density_at_origin: self.states.iter().map(|s| s.density_at_origin).collect(),
                rows: self.rows.iter().map(|r| r.0).collect(),
                degeneracy_tol: self.degeneracy_tol,
            },
        }
    }

    pub fn from_json(json: SpectralJson) -> Result<Self> {
        let n = json.labels.len();
        let f = &json.flags;
        if json.energies_hartree.len() != n || f.pseudostate.len() != n || f.angular_momentum.len() != n || f.density_at_origin.len() != n {
            return Err(Error::InvalidInput("spectral JSON arrays differ in length".into()));
        }
        let states = (0..n)
            .map(|i| State {
                label: json.labels[i].clone(),
                energy: json.energies_hartree[i],
                angular_momentum: f.angular_momentum[i],
                pseudostate: f.pseudostate[i],
                density_at_origin: f.density_at_origin[i],
            })
            .collect();
        let strengths = json.dipole_sq.iter().map(|&(i, k, v)| ((i.min(k), i.max(k)), v)).collect();
        let rows = f.rows.iter().map(|&r| StateId(r)).collect();
        SpectralData::new(json.system, states, strengths, rows, f.degeneracy_tol, None)
    }
}

/// Serialized form of [`SpectralData`]. `dipole_sq` holds the symmetric
/// strengths as sparse (i, k, value) triplets with i < k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralJson {
    pub system: SystemTag,
    pub labels: Vec<String>,
    pub energies_hartree: Vec<f64>,
    pub dipole_sq: Vec<(usize, usize, f64)>,
    pub flags: SpectralFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralFlags {
    pub pseudostate: Vec<bool>,
    pub angular_momentum: Vec<Option<u32>>,
    pub density_at_origin: Vec<Option<f64>>,
    pub rows: Vec<usize>,
    pub degeneracy_tol: f64,
}

/// ω_ik = (E_i − E_k)/ħ for every coupled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionFrequencyTable {
    omega: BTreeMap<(usize, usize), f64>,
}

impl TransitionFrequencyTable {
    pub fn get(&self, i: StateId, k: StateId) -> Option<f64> {
        if i.0 < k.0 {
            self.omega.get(&(i.0, k.0)).copied()
        } else {
            self.omega.get(&(k.0, i.0)).map(|w| -w)
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Virial residual ⟨p²⟩_n/m + ⟨x·f⟩_n, with ⟨p²⟩ from the truncated
/// spectral sum m²Σ_k ω_kn²|x_nk|² and ⟨x·f⟩ from quadrature (closed form
/// for the oscillator).
pub fn virial_check(s: &SpectralData, potential: &PotentialModel, n: StateId) -> Result<VirialResult> {
    s.check(n)?;
    if s.state(n).pseudostate {
        return Err(Error::InvalidInput(format!("state {} is not bound", s.label(n))));
    }
    let m = s.mass();
    let p2_over_m = m * compensated_sum(s.partners(n).into_iter().map(|k| s.omega(k, n).powi(2) * s.dipole_sq(n, k)));
    let x_dot_f = match (&potential.kind, s.system()) {
        (PotentialKind::Harmonic { omega0 }, SystemTag::Harmonic { .. }) => {
            // closure: ⟨x²⟩ = Σ_k |x_nk|², diagonal elements vanish by parity
            let x2 = compensated_sum(s.partners(n).into_iter().map(|k| s.dipole_sq(n, k)));
            -potential.mass * omega0 * omega0 * x2
        }
        (PotentialKind::Coulomb { z }, SystemTag::Coulomb { .. }) => {
            let wf = s.wavefunctions().ok_or_else(|| Error::Unsupported("no wavefunctions stored for virial quadrature".into()))?;
            wf.expectation(n, |r| -z / r)
                .ok_or_else(|| Error::Unsupported(format!("no wavefunction stored for {}", s.label(n))))?
        }
        (PotentialKind::Custom1d { .. }, SystemTag::Custom1d { .. }) => {
            let wf = s.wavefunctions().ok_or_else(|| Error::Unsupported("no wavefunctions stored for virial quadrature".into()))?;
            wf.expectation(n, |x| x * potential.force(x))
                .ok_or_else(|| Error::Unsupported(format!("no wavefunction stored for {}", s.label(n))))?
        }
        _ => return Err(Error::InvalidInput("potential does not match the spectral data backend".into())),
    };
    Ok(VirialResult {
        kinetic_twice: p2_over_m,
        x_dot_force: x_dot_f,
        residual: p2_over_m + x_dot_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirialResult {
    /// ⟨p²⟩/m = 2⟨T⟩.
    pub kinetic_twice: f64,
    pub x_dot_force: f64,
    pub residual: f64,
}

/// Orbital letter for angular momentum `l`.
pub fn orbital_letter(l: u32) -> char {
    const LETTERS: &[u8] = b"spdfghiklmnoqrtuv";
    LETTERS.get(l as usize).map(|&c| c as char).unwrap_or('x')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_level() -> SpectralData {
        SpectralData::from_parts(
            SystemTag::Custom1d { mass: 1.0 },
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 1.0, 3.0],
            &[(0, 1, 0.25), (2, 0, 0.1), (1, 2, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn couplings_are_symmetric_and_partners_complete() {
        let s = three_level();
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(s.dipole_sq(StateId(i), StateId(k)), s.dipole_sq(StateId(k), StateId(i)));
            }
        }
        assert_eq!(s.partners(StateId(1)), vec![StateId(0), StateId(2)]);
        assert_eq!(s.partners(StateId(2)), vec![StateId(0), StateId(1)]);
        assert_eq!(s.find("c").unwrap(), StateId(2));
        assert!(matches!(s.find("z"), Err(Error::UnknownState(_))));
    }

    #[test]
    fn frequencies_are_antisymmetric() {
        let s = three_level();
        let t = s.transition_frequencies();
        assert_eq!(t.len(), 3);
        for (i, k) in [(0, 1), (1, 2), (0, 2)] {
            let a = t.get(StateId(i), StateId(k)).unwrap();
            let b = t.get(StateId(k), StateId(i)).unwrap();
            assert_eq!(a, -b);
            assert_eq!(a, s.omega(StateId(i), StateId(k)));
        }
    }

    #[test]
    fn trk_of_empty_basis_is_zero() {
        let s = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec![], vec![], &[]).unwrap();
        assert_eq!(s.trk_sum(StateId(0)), 0.0);
    }

    #[test]
    fn json_round_trip_preserves_couplings() {
        let s = three_level();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = SpectralData::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn negative_coupling_is_rejected() {
        let r = SpectralData::from_parts(SystemTag::Custom1d { mass: 1.0 }, vec!["a".into(), "b".into()], vec![0.0, 1.0], &[(0, 1, -1.0)]);
        assert!(r.is_err());
    }
}
