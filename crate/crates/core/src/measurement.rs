//! Projective measurements on auxiliary qubits and post-selection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::codes::CodeModel;
use crate::error::{Error, Result};
use crate::hamiltonian::{AuxiliarySpec, InteractionSpec};
use crate::tensor::{c, embed, fidelity_pure, partial_trace, OperatorMatrix, StateVector, C64};
use crate::thermal::{JointModel, ThermalSpec};

/// Outcome probabilities below this are treated as impossible.
pub const UNATTAINABLE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(format!("measurement outcome must be +1 or -1, got {other}")),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

/// Rank-one projective measurement along the Bloch direction `(a, b)`,
/// post-selected on outcome `k`:
/// `|psi+> = cos(a/2)|0> + e^{ib} sin(a/2)|1>`,
/// `|psi-> = sin(a/2)|0> - e^{ib} cos(a/2)|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "k")]
    pub outcome: Outcome,
}

impl MeasurementSetting {
    pub fn new(a: f64, b: f64, outcome: Outcome) -> Result<Self> {
        let s = Self { a, b, outcome };
        s.validate()?;
        Ok(s)
    }

    /// `sigma^z` measurement with `k = +1` selecting `|1>`.
    pub fn sigma_z(outcome: Outcome) -> Self {
        Self { a: PI, b: 0.0, outcome }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PI).contains(&self.a) {
            return Err(Error::InvalidParameter(format!("measurement angle a = {} outside [0, pi]", self.a)));
        }
        if !(0.0..=2.0 * PI).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("measurement angle b = {} outside [0, 2pi]", self.b)));
        }
        Ok(())
    }

    pub fn with_outcome(self, outcome: Outcome) -> Self {
        Self { outcome, ..self }
    }

    pub fn state(&self) -> StateVector {
        let (ch, sh) = ((self.a / 2.0).cos(), (self.a / 2.0).sin());
        let phase = C64::from_polar(1.0, self.b);
        match self.outcome {
            Outcome::Plus => StateVector::from_vec(vec![c(ch, 0.0), phase * sh]),
            Outcome::Minus => StateVector::from_vec(vec![c(sh, 0.0), -phase * ch]),
        }
    }
}

pub fn projector(setting: &MeasurementSetting) -> OperatorMatrix {
    OperatorMatrix::projector(&setting.state())
}

/// Result of post-selecting one outcome string.
#[derive(Clone, Debug)]
pub struct PurificationRecord {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    /// `None` when the outcome is unattainable or no target was given.
    pub fidelity: Option<f64>,
    pub post_system_state: Option<OperatorMatrix>,
    pub post_joint_state: Option<OperatorMatrix>,
}

impl PurificationRecord {
    pub fn is_attainable(&self) -> bool {
        self.post_joint_state.is_some()
    }
}

/// Projects the listed qubits of `rho` with the given settings (one per
/// qubit), renormalizes and traces the measured qubits out. Fidelity is taken
/// against `target` on the unmeasured qubits when supplied.
pub fn measure_aq(
    rho: &OperatorMatrix,
    aq_indices: &[usize],
    settings: &[MeasurementSetting],
    target: Option<&StateVector>,
) -> Result<PurificationRecord> {
    let n = rho.n_qubits();
    if aq_indices.len() != settings.len() || aq_indices.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} measured qubits but {} settings",
            aq_indices.len(),
            settings.len()
        )));
    }
    let mut sorted = aq_indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != aq_indices.len() || sorted.iter().any(|&q| q >= n) {
        return Err(Error::InvalidSubsystems(format!("invalid auxiliary qubit set {aq_indices:?}")));
    }
    for s in settings {
        s.validate()?;
    }
    let mut full = OperatorMatrix::identity(rho.dim());
    for (&q, s) in aq_indices.iter().zip(settings) {
        let p = embed(&projector(s), 1 << q, 1 << (n - 1 - q));
        full = &full * &p;
    }
    let projected = &(&full * rho) * &full;
    let probability = projected.trace().re;
    let outcomes: Vec<Outcome> = settings.iter().map(|s| s.outcome).collect();
    if probability < UNATTAINABLE {
        return Ok(PurificationRecord {
            outcomes,
            probability: probability.max(0.0),
            fidelity: None,
            post_system_state: None,
            post_joint_state: None,
        });
    }
    let joint = &projected * (1.0 / probability);
    let keep: Vec<usize> = (0..n).filter(|q| !aq_indices.contains(q)).collect();
    let system = partial_trace(&joint, &vec![2; n], &keep)?;
    let fidelity = target.map(|psi| fidelity_pure(&system, psi)).transpose()?;
    Ok(PurificationRecord {
        outcomes,
        probability,
        fidelity,
        post_system_state: Some(system),
        post_joint_state: Some(joint),
    })
}

/// Every outcome string for fixed measurement directions, in the order
/// `(+,+,...)`, `(+,...,-)`, ... with the last qubit varying fastest.
pub fn measure_all_outcomes(
    rho: &OperatorMatrix,
    aq_indices: &[usize],
    settings: &[MeasurementSetting],
    target: Option<&StateVector>,
) -> Result<Vec<PurificationRecord>> {
    let m = settings.len();
    (0..1usize << m)
        .map(|mask| {
            let s: Vec<MeasurementSetting> = settings
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let minus = mask >> (m - 1 - j) & 1 == 1;
                    s.with_outcome(if minus { Outcome::Minus } else { Outcome::Plus })
                })
                .collect();
            measure_aq(rho, aq_indices, &s, target)
        })
        .collect()
}

impl JointModel {
    /// Evolve for `t`, measure the auxiliary qubit and post-select.
    pub fn purify(&self, t: f64, setting: &MeasurementSetting) -> Result<PurificationRecord> {
        let rho = self.evolved(t)?;
        let aq = rho.n_qubits() - 1;
        measure_aq(&rho, &[aq], &[*setting], Some(&self.target))
    }
}

/// One round of evolve, measure, post-select for the engineered coupling.
pub fn purify_once(
    codes: &[CodeModel],
    spec: &InteractionSpec,
    aux: &AuxiliarySpec,
    thermal: &ThermalSpec,
    t: f64,
    setting: &MeasurementSetting,
) -> Result<PurificationRecord> {
    JointModel::new(codes, spec, aux, thermal)?.purify(t, setting)
}
