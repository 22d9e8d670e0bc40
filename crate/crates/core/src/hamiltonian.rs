//! Engineered code-auxiliary interactions and the total Hamiltonian.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codes::{logical_state, CodeModel, LogicalTarget};
use crate::error::{Error, Result};
use crate::pauli::{pauli_decompose, pauli_operator, Pauli, PauliString};
use crate::tensor::{basis_state, c, embed, kron, kron_vecs, OperatorMatrix, StateVector, C64};
use crate::format_f64;

/// Which engineered coupling to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionVariant {
    /// `g |Psi><Phi| (x) |1><0| + h.c.`
    #[default]
    RankOne,
    /// `g (x)_i (sum_mu |Psi_i><mu_i|) (x) |1><0| + h.c.`
    Targeted,
    /// Rank-one coupling from the excited manifold to a unique ground state.
    GroundPrep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionSpec {
    pub coupling: f64,
    /// One target per code; ignored by the ground-prep variant.
    pub targets: Vec<LogicalTarget>,
    /// Excited-manifold amplitudes per code; `None` means uniform.
    pub es_amplitudes: Option<Vec<Vec<C64>>>,
    pub variant: InteractionVariant,
}

impl InteractionSpec {
    pub fn rank_one(coupling: f64, targets: Vec<LogicalTarget>) -> Self {
        Self { coupling, targets, es_amplitudes: None, variant: InteractionVariant::RankOne }
    }

    pub fn with_variant(mut self, variant: InteractionVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_amplitudes(mut self, amplitudes: Vec<Vec<C64>>) -> Self {
        self.es_amplitudes = Some(amplitudes);
        self
    }
}

/// `N_A` auxiliary qubits, each with `H = (E_A / 2) sigma^z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySpec {
    pub count: usize,
    pub energy: f64,
}

impl AuxiliarySpec {
    pub fn new(count: usize, energy: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("at least one auxiliary qubit is required".into()));
        }
        if !(energy.is_finite() && energy >= 0.0) {
            return Err(Error::InvalidParameter(format!("auxiliary energy must be >= 0, got {energy}")));
        }
        Ok(Self { count, energy })
    }

    pub fn single(energy: f64) -> Result<Self> {
        Self::new(1, energy)
    }

    pub fn dim(&self) -> usize {
        1 << self.count
    }

    pub fn hamiltonian(&self) -> OperatorMatrix {
        (0..self.count)
            .map(|j| {
                let z = pauli_operator(&PauliString::single(self.count, j, Pauli::Z)).expect("non-empty");
                &z * (self.energy / 2.0)
            })
            .sum()
    }
}

/// Sum of the code gaps; the resonance value of `E_A`.
pub fn resonant_energy(codes: &[CodeModel]) -> f64 {
    codes.iter().map(CodeModel::gap).sum()
}

pub fn system_dim(codes: &[CodeModel]) -> usize {
    codes.iter().map(CodeModel::dimension).product()
}

/// `(x)_i d_i^{-1/2} sum_mu |mu_i>` over each first excited manifold.
pub fn es_uniform_state(codes: &[CodeModel]) -> StateVector {
    es_state(codes, None).expect("uniform amplitudes are normalized")
}

/// Excited-manifold product state with optional per-code amplitudes,
/// each list normalized as `sum |alpha|^2 = 1`.
pub fn es_state(codes: &[CodeModel], amplitudes: Option<&[Vec<C64>]>) -> Result<StateVector> {
    if let Some(amps) = amplitudes {
        if amps.len() != codes.len() {
            return Err(Error::DimensionMismatch { expected: codes.len(), found: amps.len() });
        }
    }
    let factors = codes
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let basis = code.es_basis();
            let alphas: Vec<C64> = match amplitudes {
                Some(a) => a[i].clone(),
                None => vec![c(1.0 / (basis.len() as f64).sqrt(), 0.0); basis.len()],
            };
            if alphas.len() != basis.len() {
                return Err(Error::DimensionMismatch { expected: basis.len(), found: alphas.len() });
            }
            let norm2: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
            if (norm2 - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized(norm2.sqrt()));
            }
            Ok(basis
                .iter()
                .zip(&alphas)
                .fold(StateVector::zeros(code.dimension()), |acc, (v, a)| acc + v * *a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kron_vecs(&factors))
}

/// `(x)_i |Psi_i>` (or the ground states for codes with a unique ground state).
pub fn target_state(codes: &[CodeModel], targets: &[LogicalTarget]) -> Result<StateVector> {
    if targets.len() != codes.len() {
        return Err(Error::DimensionMismatch { expected: codes.len(), found: targets.len() });
    }
    let factors: Vec<StateVector> = codes.iter().zip(targets).map(|(c, t)| logical_state(c, t)).collect();
    Ok(kron_vecs(&factors))
}

/// `g |ket><bra| (x) |1_A><0_A| + h.c.` on system (x) one auxiliary qubit.
pub fn flip_coupling(g: f64, ket: &StateVector, bra: &StateVector) -> OperatorMatrix {
    let raise = OperatorMatrix::outer(&basis_state(2, 1), &basis_state(2, 0));
    let half = kron(&OperatorMatrix::outer(ket, bra), &raise);
    &(&half * g) + &(&half.adjoint() * g)
}

/// Engineered interaction on the system (x) one auxiliary qubit.
pub fn build_interaction(codes: &[CodeModel], spec: &InteractionSpec) -> Result<OperatorMatrix> {
    if codes.is_empty() {
        return Err(Error::InvalidParameter("no codes given".into()));
    }
    if !spec.coupling.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling must be finite, got {}", spec.coupling)));
    }
    match spec.variant {
        InteractionVariant::GroundPrep => {
            if let Some(code) = codes.iter().find(|c| c.ground_degeneracy() != 1) {
                return Err(Error::GroundDegeneracy {
                    found: code.ground_degeneracy(),
                    expected: "1 (ground-state preparation needs a unique ground state)",
                });
            }
        }
        _ => {
            if let Some(code) = codes.iter().find(|c| c.ground_degeneracy() != 2) {
                return Err(Error::GroundDegeneracy {
                    found: code.ground_degeneracy(),
                    expected: "2 (one logical qubit)",
                });
            }
        }
    }
    let targets = match spec.variant {
        InteractionVariant::GroundPrep => vec![LogicalTarget::zero(); codes.len()],
        _ => spec.targets.clone(),
    };
    let psi = target_state(codes, &targets)?;
    let phi = match spec.variant {
        // sum_mu <mu| over each manifold, i.e. sqrt(prod d_i) <Phi_uniform|.
        InteractionVariant::Targeted => {
            let weight: f64 = codes.iter().map(|c| c.es_degeneracy() as f64).product::<f64>().sqrt();
            es_uniform_state(codes) * c(weight, 0.0)
        }
        _ => es_state(codes, spec.es_amplitudes.as_deref())?,
    };
    Ok(flip_coupling(spec.coupling, &psi, &phi))
}

/// `sum_i H_i` on the joint code register.
pub fn system_hamiltonian(codes: &[CodeModel]) -> OperatorMatrix {
    let dims: Vec<usize> = codes.iter().map(CodeModel::dimension).collect();
    let total: usize = dims.iter().product();
    let mut left = 1;
    let mut h = OperatorMatrix::zeros(total);
    for (code, d) in codes.iter().zip(&dims) {
        let right = total / (left * d);
        h = &h + &embed(code.hamiltonian(), left, right);
        left *= d;
    }
    h
}

/// `H_S (x) I + I (x) H_A + H_SA`.
pub fn build_total(codes: &[CodeModel], interaction: &OperatorMatrix, aux: &AuxiliarySpec) -> Result<OperatorMatrix> {
    let ds = system_dim(codes);
    let expected = ds * aux.dim();
    if interaction.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: interaction.dim() });
    }
    let h_s = embed(&system_hamiltonian(codes), 1, aux.dim());
    let h_a = embed(&aux.hamiltonian(), ds, 1);
    Ok(&(&h_s + &h_a) + interaction)
}

/// `pauli_string,real_coeff,imag_coeff` rows with full double precision.
pub fn decomposition_csv(terms: &[PauliString]) -> String {
    let mut out = String::from("pauli_string,real_coeff,imag_coeff\n");
    for t in terms {
        out.push_str(&format!(
            "{},{},{}\n",
            t.label(),
            format_f64(t.coefficient.re),
            format_f64(t.coefficient.im)
        ));
    }
    out
}

/// Term-by-term comparison of a computed decomposition with a reference.
#[derive(Clone, Debug, Serialize)]
pub struct TermComparison {
    pub pauli: String,
    pub computed_re: f64,
    pub computed_im: f64,
    pub printed_re: f64,
    pub printed_im: f64,
    pub abs_delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalFormReport {
    /// Relative Frobenius error of rebuilding the operator from its terms.
    pub reconstruction_error: f64,
    pub terms: Vec<TermComparison>,
    pub max_abs_delta: f64,
    pub mismatched_terms: usize,
    /// Frobenius distance between the operator and the printed expression.
    pub operator_distance: f64,
}

/// The printed Pauli expansion of the rank-one interaction for the three-qubit
/// repetition code (qubits 0..3 data, qubit 3 auxiliary), transcribed with
/// the crate's `sigma^z` convention.
pub fn printed_repetition_interaction(g: f64, target: &LogicalTarget) -> Vec<PauliString> {
    let (th, ph) = (target.theta, target.phi);
    let zp = (th / 2.0).cos() + ph.cos() * (th / 2.0).sin();
    let zm = (th / 2.0).cos() - ph.cos() * (th / 2.0).sin();
    let sp = (th / 2.0).sin() * ph.sin();
    let pre = g / (8.0 * 6f64.sqrt());
    let a = 3;
    use Pauli::{I, X, Y, Z};

    let mut acc: BTreeMap<String, C64> = BTreeMap::new();
    let mut add = |coeff: f64, ops: &[(usize, Pauli)]| {
        let mut letters = vec![I; 4];
        for &(q, p) in ops {
            letters[q] = p;
        }
        let label: String = letters.iter().map(|p| p.letter()).collect();
        *acc.entry(label).or_insert(c(0.0, 0.0)) += c(pre * coeff, 0.0);
    };

    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        // (zp X_A - zm Z_j X_A)(X X - Y Y)
        for (s, pair) in [(1.0, [X, X]), (-1.0, [Y, Y])] {
            add(s * zp, &[(a, X), (j1, pair[0]), (j2, pair[1])]);
            add(-s * zm, &[(j, Z), (a, X), (j1, pair[0]), (j2, pair[1])]);
        }
        // (zm Y_A - zp Z_j Y_A)(X Y + Y X)
        for pair in [[X, Y], [Y, X]] {
            add(zm, &[(a, Y), (j1, pair[0]), (j2, pair[1])]);
            add(-zp, &[(j, Z), (a, Y), (j1, pair[0]), (j2, pair[1])]);
        }
        add(zp, &[(j, X), (a, X)]);
        add(-zp, &[(j, Y), (j1, Z), (a, Y)]);
        add(-zp, &[(j, Y), (j2, Z), (a, Y)]);
        add(zp, &[(j, X), (j1, Z), (j2, Z), (a, X)]);
        add(zm, &[(j, Y), (a, Y)]);
        add(-zm, &[(j, X), (j1, Z), (a, X)]);
        add(-zm, &[(j, X), (j2, Z), (a, X)]);
        add(zm, &[(j, Y), (j1, Z), (j2, Z), (a, Y)]);
        // -sp { (I + Z_j)(XXY + XYX + YXX - YYY) + (X_j Y_A + Y_j X_A)(I + Z + Z + ZZ) }
        for (s, trio) in [(1.0, [X, X, Y]), (1.0, [X, Y, X]), (1.0, [Y, X, X]), (-1.0, [Y, Y, Y])] {
            let base = [(j1, trio[0]), (j2, trio[1]), (a, trio[2])];
            add(-sp * s, &base);
            add(-sp * s, &[base[0], base[1], base[2], (j, Z)]);
        }
        for pair in [[X, Y], [Y, X]] {
            let base = [(j, pair[0]), (a, pair[1])];
            add(-sp, &base);
            add(-sp, &[base[0], base[1], (j1, Z)]);
            add(-sp, &[base[0], base[1], (j2, Z)]);
            add(-sp, &[base[0], base[1], (j1, Z), (j2, Z)]);
        }
    }
    acc.into_iter()
        .filter(|(_, v)| v.norm() > 1e-15)
        .map(|(label, v)| {
            let mut ps: PauliString = label.parse().expect("generated label");
            ps.coefficient = v;
            ps
        })
        .collect()
}

/// Decomposes `h` and compares it term by term with `printed`. Agreement is
/// reported, never forced.
pub fn compare_with_printed(h: &OperatorMatrix, printed: &[PauliString], tol: f64) -> Result<CanonicalFormReport> {
    let computed = pauli_decompose(h, 1e-12);
    let rebuilt = crate::pauli::pauli_reconstruct(&computed, h.n_qubits())?;
    let reconstruction_error = (&rebuilt - h).frobenius_norm() / h.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut table: BTreeMap<String, (C64, C64)> = BTreeMap::new();
    for t in &computed {
        table.entry(t.label()).or_insert((c(0.0, 0.0), c(0.0, 0.0))).0 = t.coefficient;
    }
    for t in printed {
        table.entry(t.label()).or_insert((c(0.0, 0.0), c(0.0, 0.0))).1 += t.coefficient;
    }
    let terms: Vec<TermComparison> = table
        .into_iter()
        .map(|(pauli, (a, b))| TermComparison {
            pauli,
            computed_re: a.re,
            computed_im: a.im,
            printed_re: b.re,
            printed_im: b.im,
            abs_delta: (a - b).norm(),
        })
        .collect();
    let max_abs_delta = terms.iter().map(|t| t.abs_delta).fold(0.0, f64::max);
    let mismatched_terms = terms.iter().filter(|t| t.abs_delta > tol).count();
    let printed_op = crate::pauli::pauli_reconstruct(printed, h.n_qubits())?;
    let operator_distance = (&printed_op - h).frobenius_norm();
    Ok(CanonicalFormReport { reconstruction_error, terms, max_abs_delta, mismatched_terms, operator_distance })
}
