//! Logical-qubit hosts: stabilizer codes and Heisenberg chains.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{pauli_operator, Pauli, PauliString};
use crate::tensor::{
    basis_state, c, fix_phase, gibbs_from_spectrum, hermitian_eig, OperatorMatrix,
    SpectralDecomposition, StateVector, C64,
};

/// Default relative tolerance for clustering eigenvalues into manifolds.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Eigenvalue clusters of a Hamiltonian with the ground energy shifted to zero.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub ground_basis: Vec<StateVector>,
    pub excited_basis: Vec<StateVector>,
    pub ground_energy: f64,
    pub gap: f64,
    /// Size of every cluster, lowest energy first.
    pub degeneracies: Vec<usize>,
    /// Shifted spectrum, ground energy at zero.
    pub spectrum: SpectralDecomposition,
}

/// Groups eigenvalues closer than `tol * max|lambda|` and returns canonical
/// bases for the two lowest manifolds.
pub fn spectral_split(h: &OperatorMatrix, tol: f64) -> Result<SpectralSplit> {
    let mut spectrum = hermitian_eig(h)?;
    let ev = &spectrum.eigenvalues;
    let scale = ev.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let abs_tol = tol * scale;

    let mut bounds = vec![0usize];
    for i in 1..ev.len() {
        if ev[i] - ev[i - 1] > abs_tol {
            bounds.push(i);
        }
    }
    bounds.push(ev.len());
    let degeneracies: Vec<usize> = bounds.windows(2).map(|w| w[1] - w[0]).collect();

    let ground_energy = mean(&ev[..bounds[1]]);
    if degeneracies.len() < 2 {
        return Err(Error::UnresolvedGap { gap: 0.0, threshold: 10.0 * abs_tol });
    }
    let gap = mean(&ev[bounds[1]..bounds[2]]) - ground_energy;
    if gap < 10.0 * abs_tol {
        return Err(Error::UnresolvedGap { gap, threshold: 10.0 * abs_tol });
    }

    let ground_basis = canonical_basis(&spectrum.eigenvectors, 0..bounds[1]);
    let excited_basis = canonical_basis(&spectrum.eigenvectors, bounds[1]..bounds[2]);
    spectrum.eigenvalues.iter_mut().for_each(|e| *e -= ground_energy);
    // Snap clustered levels so degenerate states carry identical energies.
    for w in bounds.windows(2) {
        let level = mean(&spectrum.eigenvalues[w[0]..w[1]]);
        spectrum.eigenvalues[w[0]..w[1]].iter_mut().for_each(|e| *e = level);
    }
    spectrum.eigenvalues[..bounds[1]].iter_mut().for_each(|e| *e = 0.0);

    Ok(SpectralSplit { ground_basis, excited_basis, ground_energy, gap, degeneracies, spectrum })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Basis-independent orthonormal basis of a degenerate manifold: computational
/// basis vectors are projected onto the manifold in index order and
/// Gram-Schmidt orthogonalized, keeping those with significant weight.
pub(crate) fn canonical_basis(vectors: &DMatrix<C64>, cols: std::ops::Range<usize>) -> Vec<StateVector> {
    let want = cols.len();
    let block = vectors.columns(cols.start, want).into_owned();
    let dim = vectors.nrows();
    let mut basis: Vec<StateVector> = Vec::with_capacity(want);
    // Largest residuals first would be basis-independent too, but index order
    // keeps the result readable (|000>, |111> for the repetition code).
    for k in 0..dim {
        if basis.len() == want {
            break;
        }
        // Projection of e_k onto the manifold: block * (row k of block)^dagger.
        let coeffs = block.row(k).adjoint();
        let mut v: StateVector = &block * coeffs;
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= c(norm, 0.0);
            fix_phase(v.as_mut_slice());
            basis.push(v);
        }
    }
    debug_assert_eq!(basis.len(), want);
    basis
}

/// How many ground states a code model is expected to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundKind {
    /// Doubly degenerate: one logical qubit.
    Logical,
    /// Non-degenerate: used by the ground-state-preparation variant.
    Unique,
}

impl GroundKind {
    fn expected(self) -> usize {
        match self {
            GroundKind::Logical => 2,
            GroundKind::Unique => 1,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            GroundKind::Logical => "2 (one logical qubit)",
            GroundKind::Unique => "1 (unique ground state)",
        }
    }
}

/// A code Hamiltonian with its ground (logical) and first-excited (error)
/// manifolds. The ground energy is shifted to zero.
#[derive(Clone, Debug)]
pub struct CodeModel {
    pub name: String,
    n_qubits: usize,
    hamiltonian: OperatorMatrix,
    ls_basis: Vec<StateVector>,
    es_basis: Vec<StateVector>,
    gap: f64,
    spectrum: SpectralDecomposition,
}

impl CodeModel {
    /// Builds a model from an arbitrary Hamiltonian; the ground energy is
    /// subtracted and the ground degeneracy checked against `kind`.
    pub fn from_hamiltonian(name: impl Into<String>, h: &OperatorMatrix, kind: GroundKind) -> Result<Self> {
        let split = spectral_split(h, CLUSTER_TOL)?;
        if split.degeneracies[0] != kind.expected() {
            return Err(Error::GroundDegeneracy { found: split.degeneracies[0], expected: kind.describe() });
        }
        let shifted = h - &(&OperatorMatrix::identity(h.dim()) * split.ground_energy);
        Ok(Self {
            name: name.into(),
            n_qubits: h.n_qubits(),
            hamiltonian: shifted,
            ls_basis: split.ground_basis,
            es_basis: split.excited_basis,
            gap: split.gap,
            spectrum: split.spectrum,
        })
    }

    /// Replaces the canonical ground basis with an explicit logical basis.
    /// Both vectors must lie in the ground manifold.
    fn with_logical_basis(mut self, zero: StateVector, one: StateVector) -> Result<Self> {
        for v in [&zero, &one] {
            let resid = self.hamiltonian.apply(v).norm();
            if resid > 1e-9 * self.gap.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "logical basis vector is not a ground state (residual {resid:.3e})"
                )));
            }
        }
        self.ls_basis = vec![zero, one];
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension `D = 2^N`.
    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn ls_basis(&self) -> &[StateVector] {
        &self.ls_basis
    }

    pub fn es_basis(&self) -> &[StateVector] {
        &self.es_basis
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn es_degeneracy(&self) -> usize {
        self.es_basis.len()
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.ls_basis.len()
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// `Z = Tr exp(-beta H)` with the ground energy at zero.
    pub fn partition_function(&self, beta: f64) -> f64 {
        self.spectrum.eigenvalues.iter().map(|&e| (-beta * e).exp()).sum()
    }

    pub fn gibbs(&self, beta: f64) -> Result<OperatorMatrix> {
        if beta < 0.0 || beta.is_nan() {
            return Err(Error::NegativeBeta(beta));
        }
        Ok(gibbs_from_spectrum(&self.spectrum, beta).0)
    }

    /// Projector onto the ground manifold.
    pub fn ls_projector(&self) -> OperatorMatrix {
        projector_onto(&self.ls_basis, self.dimension())
    }

    /// Projector onto the first excited manifold.
    pub fn es_projector(&self) -> OperatorMatrix {
        projector_onto(&self.es_basis, self.dimension())
    }
}

pub(crate) fn projector_onto(basis: &[StateVector], dim: usize) -> OperatorMatrix {
    basis
        .iter()
        .map(OperatorMatrix::projector)
        .fold(OperatorMatrix::zeros(dim), |acc, p| &acc + &p)
}

fn check_strength(j: f64) -> Result<()> {
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::InvalidParameter(format!("coupling strength must be positive, got {j}")));
    }
    Ok(())
}

/// `H = -J sum_i S_i + |S| J I` for commuting involutive stabilizers.
pub fn build_stabilizer_code(stabilizers: &[PauliString], strength: f64) -> Result<CodeModel> {
    check_strength(strength)?;
    let first = stabilizers
        .first()
        .ok_or_else(|| Error::InvalidParameter("stabilizer list is empty".into()))?;
    let n = first.n_qubits();
    for (i, s) in stabilizers.iter().enumerate() {
        if s.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.n_qubits() });
        }
        if (s.coefficient * s.coefficient - c(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::NotAnInvolution(i));
        }
    }
    for i in 0..stabilizers.len() {
        for j in i + 1..stabilizers.len() {
            if !stabilizers[i].commutes_with(&stabilizers[j]) {
                return Err(Error::NonCommutingStabilizers(i, j));
            }
        }
    }
    let dim = 1 << n;
    let mut h = &OperatorMatrix::identity(dim) * (stabilizers.len() as f64 * strength);
    for s in stabilizers {
        h = &h - &(&pauli_operator(s)? * strength);
    }
    let label: Vec<String> = stabilizers.iter().map(|s| s.to_string()).collect();
    CodeModel::from_hamiltonian(format!("stabilizer[{}]", label.join(",")), &h, GroundKind::Logical)
}

/// Three-qubit repetition code with stabilizers `Z1Z2, Z2Z3, Z3Z1`.
pub fn build_repetition_code(strength: f64) -> Result<CodeModel> {
    let stabs = ["ZZI", "IZZ", "ZIZ"].map(|s| s.parse::<PauliString>().expect("valid literal"));
    let mut code = build_stabilizer_code(&stabs, strength)?;
    code.name = "repetition3".into();
    code.with_logical_basis(basis_state(8, 0), basis_state(8, 7))
}

/// Even-length isotropic Heisenberg ring in a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergSpec {
    pub n_qubits: usize,
    pub exchange: f64,
    pub field: f64,
}

impl HeisenbergSpec {
    /// Field `h = 2J` for rings, `h = J` for the two-site chain; at these
    /// values the polarized state and the `k = pi` magnon are degenerate.
    pub fn new(n_qubits: usize, exchange: f64) -> Result<Self> {
        if n_qubits < 2 || n_qubits % 2 != 0 {
            return Err(Error::InvalidChainLength(n_qubits));
        }
        check_strength(exchange)?;
        let field = if n_qubits == 2 { exchange } else { 2.0 * exchange };
        Ok(Self { n_qubits, exchange, field })
    }

    /// Nearest-neighbour bonds: a single bond for two sites, periodic otherwise.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        if self.n_qubits == 2 {
            vec![(0, 1)]
        } else {
            (0..self.n_qubits).map(|s| (s, (s + 1) % self.n_qubits)).collect()
        }
    }

    /// Exchange plus field, before the ground-energy shift.
    pub fn raw_hamiltonian(&self) -> Result<OperatorMatrix> {
        let n = self.n_qubits;
        let mut h = OperatorMatrix::zeros(1 << n);
        for (a, b) in self.bonds() {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut letters = vec![Pauli::I; n];
                letters[a] = p;
                letters[b] = p;
                h = &h + &(&pauli_operator(&PauliString::new(letters))? * (self.exchange / 4.0));
            }
        }
        for s in 0..n {
            h = &h + &(&pauli_operator(&PauliString::single(n, s, Pauli::Z))? * (self.field / 2.0));
        }
        Ok(h)
    }
}

/// `|0_S> = |0...0>`, `|1_S> = N^{-1/2} sum_s (-1)^s X_s |0...0>` with sites
/// counted from one.
pub fn heisenberg_logical_basis(n: usize) -> (StateVector, StateVector) {
    let dim = 1 << n;
    let zero = basis_state(dim, 0);
    let mut one = StateVector::zeros(dim);
    let amp = 1.0 / (n as f64).sqrt();
    for s in 0..n {
        // Site s (0-based) is bit n-1-s; its 1-based label is s+1.
        let sign = if (s + 1) % 2 == 0 { 1.0 } else { -1.0 };
        one[1 << (n - 1 - s)] = c(sign * amp, 0.0);
    }
    (zero, one)
}

pub fn build_heisenberg_code(spec: &HeisenbergSpec) -> Result<CodeModel> {
    let checked = HeisenbergSpec::new(spec.n_qubits, spec.exchange)?;
    if (checked.field - spec.field).abs() > 1e-12 * spec.field.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "field {} breaks the degeneracy rule (expected {})",
            spec.field, checked.field
        )));
    }
    let h = spec.raw_hamiltonian()?;
    let code = CodeModel::from_hamiltonian(format!("heisenberg{}", spec.n_qubits), &h, GroundKind::Logical)?;
    let (zero, one) = heisenberg_logical_basis(spec.n_qubits);
    code.with_logical_basis(zero, one)
}

/// Point on the logical Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalTarget {
    pub theta: f64,
    pub phi: f64,
}

impl LogicalTarget {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phi = {phi} outside [0, 2pi]")));
        }
        Ok(Self { theta, phi })
    }

    pub fn zero() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn one() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    /// `(cos(theta/2), e^{i phi} sin(theta/2))`
    pub fn amplitudes(&self) -> (C64, C64) {
        (
            c((self.theta / 2.0).cos(), 0.0),
            C64::from_polar((self.theta / 2.0).sin(), self.phi),
        )
    }
}

/// `cos(theta/2)|0_S> + e^{i phi} sin(theta/2)|1_S>`. On a code with a unique
/// ground state the target is ignored and the ground state is returned.
pub fn logical_state(code: &CodeModel, target: &LogicalTarget) -> StateVector {
    let basis = code.ls_basis();
    if basis.len() == 1 {
        return basis[0].clone();
    }
    let (a0, a1) = target.amplitudes();
    &basis[0] * a0 + &basis[1] * a1
}

/// Logical Pauli operators supported on the ground manifold.
#[derive(Clone, Debug)]
pub struct LogicalOperators {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

/// `X = |0><1| + |1><0|`, `Y = i|0><1| - i|1><0|`, `Z = |1><1| - |0><0|`.
pub fn logical_operators(code: &CodeModel) -> Result<LogicalOperators> {
    let basis = code.ls_basis();
    if basis.len() != 2 {
        return Err(Error::GroundDegeneracy { found: basis.len(), expected: GroundKind::Logical.describe() });
    }
    let (zero, one) = (&basis[0], &basis[1]);
    let o01 = OperatorMatrix::outer(zero, one);
    let o10 = OperatorMatrix::outer(one, zero);
    let x = &o01 + &o10;
    let y = &o01.scale(c(0.0, 1.0)) - &o10.scale(c(0.0, 1.0));
    let z = &OperatorMatrix::projector(one) - &OperatorMatrix::projector(zero);
    Ok(LogicalOperators { x, y, z })
}

/// Serializable code description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CodeDefinition {
    Stabilizer {
        stabilizers: Vec<String>,
        #[serde(rename = "J", default = "unit")]
        j: f64,
    },
    Heisenberg {
        n: usize,
        #[serde(rename = "J", default = "unit")]
        j: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl CodeDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<CodeModel> {
        match self {
            CodeDefinition::Stabilizer { stabilizers, j } => {
                let parsed = stabilizers.iter().map(|s| s.parse()).collect::<Result<Vec<PauliString>>>()?;
                if is_repetition_code(&parsed) {
                    build_repetition_code(*j)
                } else {
                    build_stabilizer_code(&parsed, *j)
                }
            }
            CodeDefinition::Heisenberg { n, j } => build_heisenberg_code(&HeisenbergSpec::new(*n, *j)?),
        }
    }

    pub fn repetition() -> Self {
        CodeDefinition::Stabilizer {
            stabilizers: vec!["ZZI".into(), "IZZ".into(), "ZIZ".into()],
            j: 1.0,
        }
    }
}

fn is_repetition_code(stabs: &[PauliString]) -> bool {
    let mut labels: Vec<String> = stabs.iter().map(|s| s.to_string()).collect();
    labels.sort();
    labels == ["IZZ", "ZIZ", "ZZI"]
}
