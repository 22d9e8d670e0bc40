//! Evolve-measure-repeat: repeated purification rounds with fixed
//! measurement settings and post-selected outcome strings.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::codes::HeisenbergSpec;
use crate::error::{Error, Result};
use crate::format_f64;
use crate::hamiltonian::AuxiliarySpec;
use crate::measurement::{MeasurementSetting, Outcome, UNATTAINABLE};
use crate::pauli::{pauli_operator, Pauli, PauliString};
use crate::tensor::{basis_state, embed, kron_vecs, Evolver, OperatorMatrix, StateVector, C64};

/// What happens to the auxiliary qubits between rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AqResetPolicy {
    /// Auxiliary qubits start the next round in their post-measurement state.
    #[default]
    Keep,
    /// Auxiliary qubits are re-initialized to `|0>` every round.
    Reset,
}

/// Settings of a single round, plus an optional per-round outcome schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub duration: f64,
    /// One setting per auxiliary qubit; its outcome is used in every round
    /// not covered by `schedule`.
    pub settings: Vec<MeasurementSetting>,
    /// Outcome strings for the first rounds, one outcome per auxiliary qubit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<Vec<Outcome>>,
}

impl RoundSpec {
    pub fn new(duration: f64, settings: Vec<MeasurementSetting>) -> Result<Self> {
        let s = Self { duration, settings, schedule: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidParameter(format!("round duration must be non-negative, got {}", self.duration)));
        }
        if self.settings.is_empty() {
            return Err(Error::InvalidParameter("a round needs at least one measurement setting".into()));
        }
        for s in &self.settings {
            s.validate()?;
        }
        if let Some(bad) = self.schedule.iter().find(|o| o.len() != self.settings.len()) {
            return Err(Error::DimensionMismatch { expected: self.settings.len(), found: bad.len() });
        }
        Ok(())
    }

    fn outcomes(&self, round: usize) -> Vec<Outcome> {
        match self.schedule.get(round) {
            Some(o) => o.clone(),
            None => self.settings.iter().map(|s| s.outcome).collect(),
        }
    }

    /// Product of the post-selected auxiliary states for the given outcomes.
    fn measured_state(&self, outcomes: &[Outcome]) -> StateVector {
        let factors: Vec<StateVector> =
            self.settings.iter().zip(outcomes).map(|(s, &k)| s.with_outcome(k).state()).collect();
        kron_vecs(&factors)
    }
}

/// A system register followed by auxiliary qubits, with the total
/// Hamiltonian already diagonalized.
#[derive(Clone, Debug)]
pub struct EmrSystem {
    pub evolver: Evolver,
    pub system_state: OperatorMatrix,
    pub n_aux: usize,
    pub target: StateVector,
}

impl EmrSystem {
    /// `rho_s` is the initial system state; auxiliary qubits start in `|0...0>`.
    pub fn new(h_tot: &OperatorMatrix, rho_s: OperatorMatrix, n_aux: usize, target: StateVector) -> Result<Self> {
        let ds = rho_s.dim();
        if h_tot.dim() != ds << n_aux {
            return Err(Error::DimensionMismatch { expected: ds << n_aux, found: h_tot.dim() });
        }
        if target.len() != ds {
            return Err(Error::DimensionMismatch { expected: ds, found: target.len() });
        }
        Self::with_evolver(Evolver::new(h_tot)?, rho_s, n_aux, target)
    }

    /// Reuses an already diagonalized total Hamiltonian.
    pub fn with_evolver(evolver: Evolver, rho_s: OperatorMatrix, n_aux: usize, target: StateVector) -> Result<Self> {
        let ds = rho_s.dim();
        if evolver.dim() != ds << n_aux {
            return Err(Error::DimensionMismatch { expected: ds << n_aux, found: evolver.dim() });
        }
        if target.len() != ds {
            return Err(Error::DimensionMismatch { expected: ds, found: target.len() });
        }
        Ok(Self { evolver, system_state: rho_s, n_aux, target })
    }

    pub fn system_dim(&self) -> usize {
        self.system_state.dim()
    }

    pub fn aux_dim(&self) -> usize {
        1 << self.n_aux
    }

    /// System operator `(I (x) <out|) U (I (x) |in>)`, assembled from the
    /// spectrum as `A e^{-i lambda t} B^dagger` without forming `U`.
    fn kraus(&self, phases: &[C64], input: &StateVector, output: &StateVector) -> DMatrix<C64> {
        let (ds, da) = (self.system_dim(), self.aux_dim());
        let v = &self.evolver.spectrum().eigenvectors;
        let n = v.ncols();
        let contract = |aux: &StateVector, scale: bool| {
            DMatrix::from_fn(ds, n, |i, k| {
                let z: C64 = (0..da).map(|x| aux[x].conj() * v[(i * da + x, k)]).sum();
                if scale { z * phases[k] } else { z }
            })
        };
        contract(output, true) * contract(input, false).adjoint()
    }
}

impl crate::thermal::JointModel {
    /// Repeated-round view of the engineered single-qubit protocol.
    pub fn emr_system(&self) -> Result<EmrSystem> {
        let rho_s = crate::thermal::system_thermal_state(&self.codes, self.thermal.beta)?;
        EmrSystem::with_evolver(self.evolver.clone(), rho_s, 1, self.target.clone())
    }
}

/// Per-round record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmrRound {
    pub round: usize,
    pub fidelity: f64,
    pub p_round: f64,
    pub p_cumulative: f64,
}

#[derive(Clone, Debug)]
pub struct EmrTrajectory {
    pub rounds: Vec<EmrRound>,
    /// Post-round system states, when recording was requested.
    pub states: Option<Vec<OperatorMatrix>>,
    /// System state after the last completed round.
    pub final_state: OperatorMatrix,
    /// Why the run stopped early, if it did.
    pub truncated: Option<String>,
}

impl EmrTrajectory {
    pub fn max_fidelity(&self) -> Option<f64> {
        self.rounds.iter().map(|r| r.fidelity).fold(None, |m, f| Some(m.map_or(f, |m: f64| m.max(f))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,f,p_round,p_cumulative\n");
        for r in &self.rounds {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.round,
                format_f64(r.fidelity),
                format_f64(r.p_round),
                format_f64(r.p_cumulative)
            ));
        }
        out
    }
}

/// Runs up to `max_rounds` rounds. Each round evolves the joint state,
/// projects the auxiliary qubits on the chosen outcomes, renormalizes and
/// records the fidelity with the target.
pub fn run_emr(
    system: &EmrSystem,
    rounds: &RoundSpec,
    max_rounds: usize,
    policy: AqResetPolicy,
    record_states: bool,
) -> Result<EmrTrajectory> {
    if max_rounds == 0 {
        return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
    }
    rounds.validate()?;
    if rounds.settings.len() != system.n_aux {
        return Err(Error::DimensionMismatch { expected: system.n_aux, found: rounds.settings.len() });
    }
    let phases: Vec<C64> = system
        .evolver
        .spectrum()
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, -l * rounds.duration))
        .collect();
    let ground = basis_state(system.aux_dim(), 0);
    let mut cache: HashMap<(Option<Vec<Outcome>>, Vec<Outcome>), DMatrix<C64>> = HashMap::new();

    // rho = W W^dagger; one product K W per round.
    let mut w = factor(&system.system_state)?;
    let mut previous: Option<Vec<Outcome>> = None;
    let mut cumulative = 1.0;
    let mut records = Vec::with_capacity(max_rounds);
    let mut states = record_states.then(Vec::new);
    let mut truncated = None;

    for r in 0..max_rounds {
        let outcomes = rounds.outcomes(r);
        let input_key = match policy {
            AqResetPolicy::Keep => previous.clone(),
            AqResetPolicy::Reset => None,
        };
        let key = (input_key.clone(), outcomes.clone());
        let k = cache.entry(key).or_insert_with(|| {
            let input = input_key.as_ref().map_or_else(|| ground.clone(), |o| rounds.measured_state(o));
            system.kraus(&phases, &input, &rounds.measured_state(&outcomes))
        });
        let next = &*k * &w;
        let p = next.norm_squared();
        if p < UNATTAINABLE {
            truncated = Some(format!("round {} outcome probability {p:.3e} below {UNATTAINABLE:e}", r + 1));
            break;
        }
        w = next / C64::new(p.sqrt(), 0.0);
        cumulative *= p;
        let overlap = system.target.adjoint() * &w;
        let fidelity = crate::tensor::clip_unit(overlap.norm_squared());
        records.push(EmrRound { round: r + 1, fidelity, p_round: p, p_cumulative: cumulative });
        if let Some(s) = states.as_mut() {
            s.push(OperatorMatrix::from_raw(&w * w.adjoint()));
        }
        previous = Some(outcomes);
    }
    let final_state = OperatorMatrix::from_raw(&w * w.adjoint());
    Ok(EmrTrajectory { rounds: records, states, final_state, truncated })
}

/// `W` with `rho = W W^dagger`, dropping null directions.
fn factor(rho: &OperatorMatrix) -> Result<DMatrix<C64>> {
    let spec = crate::tensor::hermitian_eig(rho)?;
    let scale = spec.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cols: Vec<_> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > scale * 1e-15)
        .map(|(j, &l)| spec.eigenvectors.column(j) * C64::new(l.sqrt(), 0.0))
        .collect();
    if cols.is_empty() {
        return Err(Error::NotNormalized(0.0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// First round reaching the target fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinRounds {
    pub rounds: usize,
    pub p_cumulative: f64,
    pub fidelity: f64,
}

/// Round-off slack when comparing a fidelity with its target.
pub const FIDELITY_SLACK: f64 = 1e-12;

/// Smallest `r` with `f_r >= f_target`, or `None` if never reached.
pub fn find_m_min(trajectory: &EmrTrajectory, f_target: f64) -> Option<MinRounds> {
    trajectory.rounds.iter().find(|r| r.fidelity >= f_target - FIDELITY_SLACK).map(|r| MinRounds {
        rounds: r.round,
        p_cumulative: r.p_cumulative,
        fidelity: r.fidelity,
    })
}

/// Heisenberg ring with `N_A` auxiliary qubits XY-coupled to consecutive
/// nearest-neighbour pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XYSetup {
    pub n_system: usize,
    /// Pair `(s - 1, s)` per auxiliary qubit, zero-based sites.
    pub attachments: Vec<(usize, usize)>,
    /// Coupling to site `s`.
    pub j1: f64,
    /// Coupling to site `s - 1`.
    pub j2: f64,
    pub gamma: f64,
    pub aux_energy: f64,
    /// Overall factor multiplying every XY term.
    #[serde(default = "default_prefactor")]
    pub coupling_prefactor: f64,
}

fn default_prefactor() -> f64 {
    0.25
}

impl XYSetup {
    /// Auxiliary qubits on pairs `(0,1), (1,2), ...`: one for two sites, two otherwise.
    pub fn standard(n_system: usize, j2: f64, gamma: f64, aux_energy: f64) -> Self {
        let n_aux = if n_system == 2 { 1 } else { 2 };
        Self {
            n_system,
            attachments: (0..n_aux).map(|j| (j, j + 1)).collect(),
            j1: 1.0,
            j2,
            gamma,
            aux_energy,
            coupling_prefactor: default_prefactor(),
        }
    }

    pub fn n_aux(&self) -> usize {
        self.attachments.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_system;
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidChainLength(n));
        }
        if self.attachments.is_empty() {
            return Err(Error::InvalidParameter("at least one auxiliary qubit must be attached".into()));
        }
        if !(-1.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("anisotropy {} outside [-1, 1]", self.gamma)));
        }
        AuxiliarySpec::new(self.n_aux(), self.aux_energy)?;
        for &(a, b) in &self.attachments {
            if a >= n || b >= n || (a + 1) % n != b || (n == 2 && (a, b) != (0, 1)) {
                return Err(Error::InvalidParameter(format!("({a}, {b}) is not a nearest-neighbour pair")));
            }
        }
        for w in self.attachments.windows(2) {
            if w[1].0 != w[0].1 {
                return Err(Error::InvalidParameter(format!(
                    "attached pairs {:?} and {:?} are not consecutive",
                    w[0], w[1]
                )));
            }
        }
        let mut pairs = self.attachments.clone();
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.len() != self.attachments.len() {
            return Err(Error::InvalidParameter("a pair carries more than one auxiliary qubit".into()));
        }
        Ok(())
    }
}

/// `H_S (x) I + sum_j (E_A/2) sigma^z_j + sum_j H_(s_j, j)` with
/// `H_(s,j) = c [J1 (g+ X_j X_s + g- Y_j Y_s) + J2 (g+ X_j X_{s-1} + g- Y_j Y_{s-1})]`.
pub fn build_xy_setup(setup: &XYSetup, heisenberg: &HeisenbergSpec) -> Result<OperatorMatrix> {
    setup.validate()?;
    if heisenberg.n_qubits != setup.n_system {
        return Err(Error::DimensionMismatch { expected: setup.n_system, found: heisenberg.n_qubits });
    }
    let code = crate::codes::build_heisenberg_code(heisenberg)?;
    Ok(xy_total(setup, code.hamiltonian()))
}

pub(crate) fn xy_total(setup: &XYSetup, h_s: &OperatorMatrix) -> OperatorMatrix {
    let n = setup.n_system;
    let na = setup.n_aux();
    let total = n + na;
    let aux = AuxiliarySpec { count: na, energy: setup.aux_energy };
    let mut h = &embed(h_s, 1, 1 << na) + &embed(&aux.hamiltonian(), 1 << n, 1);
    let gp = (1.0 + setup.gamma) / 2.0;
    let gm = (1.0 - setup.gamma) / 2.0;
    let pair = |p: Pauli, x: usize, y: usize| {
        let mut letters = vec![Pauli::I; total];
        letters[x] = p;
        letters[y] = p;
        pauli_operator(&PauliString::new(letters)).expect("non-empty")
    };
    for (j, &(sm1, s)) in setup.attachments.iter().enumerate() {
        let a = n + j;
        for (site, strength) in [(s, setup.j1), (sm1, setup.j2)] {
            let w = setup.coupling_prefactor * strength;
            if w == 0.0 {
                continue;
            }
            if gp != 0.0 {
                h = &h + &(&pair(Pauli::X, a, site) * (w * gp));
            }
            if gm != 0.0 {
                h = &h + &(&pair(Pauli::Y, a, site) * (w * gm));
            }
        }
    }
    h
}

/// Thermal Heisenberg chain plus XY-coupled auxiliary qubits, ready to run.
pub fn xy_emr_system(setup: &XYSetup, heisenberg: &HeisenbergSpec, beta: f64, target: StateVector) -> Result<EmrSystem> {
    setup.validate()?;
    let code = crate::codes::build_heisenberg_code(heisenberg)?;
    let h = xy_total(setup, code.hamiltonian());
    EmrSystem::new(&h, code.gibbs(beta)?, setup.n_aux(), target)
}

/// Convenience: `sigma^z`-like setting `(a, b)` with outcome `k`.
pub fn setting(a: f64, b: f64, k: Outcome) -> MeasurementSetting {
    MeasurementSetting { a: a.clamp(0.0, PI), b, outcome: k }
}
