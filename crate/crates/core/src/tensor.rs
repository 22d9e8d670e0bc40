//! Dense complex operators on qubit registers.
//!
//! Register convention: qubit 0 is the leftmost tensor factor (most
//! significant bit of the basis index) and `|0>` is the `sigma^z = -1`
//! eigenstate, so `Z = diag(-1, +1)`.

use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::diag::Diag;
use faer::{Mat, Par};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type StateVector = DVector<C64>;

/// Input-validation tolerance for Hermiticity, relative to `max |H|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-10;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A square complex matrix acting on a `2^n`-dimensional register.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    m: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::NotQubitRegister(m.nrows()));
        }
        Ok(Self { m })
    }

    /// Wraps a matrix whose shape is already known to be a valid register.
    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows().is_power_of_two());
        Self { m }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "register dimension must be a power of two");
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "register dimension must be a power of two");
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// `|psi><psi|`
    pub fn projector(psi: &StateVector) -> Self {
        Self::outer(psi, psi)
    }

    /// `|ket><bra|`
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        assert_eq!(ket.len(), bra.len());
        Self::from_raw(ket * bra.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_raw(self.m.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Largest entrywise deviation `max |H - H^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `tol` relative to the largest entry.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::from_raw(&self.m * z)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.m * v
    }

    /// `<psi|A|psi>`
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        psi.dotc(&(&self.m * psi))
    }

    /// `<bra|A|ket>`
    pub fn element(&self, bra: &StateVector, ket: &StateVector) -> C64 {
        bra.dotc(&(&self.m * ket))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.m - &other.m).iter().all(|z| z.norm() <= tol)
    }

    /// Minimum eigenvalue of the Hermitian part, used for positivity checks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(self)?.eigenvalues[0])
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix::from_raw(&self.m + &rhs.m)
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix::from_raw(&self.m - &rhs.m)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix::from_raw(&self.m * &rhs.m)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        OperatorMatrix::from_raw(&self.m * c(rhs, 0.0))
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix::from_raw(-&self.m)
    }
}

impl std::iter::Sum for OperatorMatrix {
    fn sum<I: Iterator<Item = OperatorMatrix>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty operator list");
        iter.fold(first, |acc, x| &acc + &x)
    }
}

/// Computational basis vector `|index>` in a register of dimension `dim`.
pub fn basis_state(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = c(1.0, 0.0);
    v
}

/// `|0...0>` on `n` qubits.
pub fn ground_register(n_qubits: usize) -> StateVector {
    basis_state(1 << n_qubits, 0)
}

pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::from_raw(a.m.kronecker(&b.m))
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a OperatorMatrix>) -> OperatorMatrix {
    let mut iter = factors.into_iter();
    let first = iter.next().expect("kron of an empty factor list").clone();
    iter.fold(first, |acc, f| kron(&acc, f))
}

pub fn kron_vec(a: &StateVector, b: &StateVector) -> StateVector {
    a.kronecker(b)
}

pub fn kron_vecs<'a>(factors: impl IntoIterator<Item = &'a StateVector>) -> StateVector {
    factors
        .into_iter()
        .fold(StateVector::from_element(1, c(1.0, 0.0)), |acc, v| acc.kronecker(v))
}

/// `I_left (x) op (x) I_right`
pub fn embed(op: &OperatorMatrix, left_dim: usize, right_dim: usize) -> OperatorMatrix {
    let mut out = op.m.clone();
    if left_dim > 1 {
        out = DMatrix::<C64>::identity(left_dim, left_dim).kronecker(&out);
    }
    if right_dim > 1 {
        out = out.kronecker(&DMatrix::<C64>::identity(right_dim, right_dim));
    }
    OperatorMatrix::from_raw(out)
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> StateVector {
        self.eigenvectors.column(i).into_owned()
    }

    /// `V f(Lambda) V^dagger`
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        OperatorMatrix::from_raw(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> OperatorMatrix {
        self.apply_fn(|l| c(l, 0.0))
    }

    /// `exp(-i H t)`
    pub fn unitary(&self, t: f64) -> OperatorMatrix {
        self.apply_fn(|l| C64::from_polar(1.0, -l * t))
    }
}

/// Hermitian eigendecomposition.
///
/// Input is validated for Hermiticity first. Each eigenvector's phase is fixed
/// so that its first largest-magnitude component is real and positive, which
/// makes the output reproducible independent of solver phase conventions.
pub fn hermitian_eig(h: &OperatorMatrix) -> Result<SpectralDecomposition> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs() {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.dim();
    // Solver reads the lower triangle only; symmetrize it from the upper half
    // so both halves contribute equally to the decomposition.
    let a = Mat::<C64>::from_fn(n, n, |i, j| {
        if i >= j {
            0.5 * (h.m[(i, j)] + h.m[(j, i)].conj())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut s = Diag::<C64>::zeros(n);
    let mut u = Mat::<C64>::zeros(n, n);
    let par = Par::Seq;
    let mut mem = faer::dyn_stack::MemBuffer::new(self_adjoint_evd_scratch::<C64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        faer::dyn_stack::MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|_| Error::EigenSolver)?;

    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vecs = DMatrix::<C64>::from_fn(n, n, |i, j| u[(i, j)]);
    for mut col in vecs.column_iter_mut() {
        fix_phase(col.as_mut_slice());
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vecs })
}

/// Rotates `v` so that its first (near-)largest component is real positive.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
    let phase = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|z| *z *= phase);
}

/// Reusable propagator for a fixed Hamiltonian; the spectrum is computed once.
#[derive(Clone, Debug)]
pub struct Evolver {
    spectrum: SpectralDecomposition,
}

impl Evolver {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        Ok(Self { spectrum: hermitian_eig(h)? })
    }

    pub fn from_spectrum(spectrum: SpectralDecomposition) -> Self {
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn unitary(&self, t: f64) -> OperatorMatrix {
        self.spectrum.unitary(t)
    }

    /// `U rho U^dagger` with `U = exp(-i H t)`.
    pub fn evolve(&self, t: f64, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let u = self.unitary(t);
        Ok(OperatorMatrix::from_raw(&u.m * &rho.m * u.m.adjoint()))
    }

    pub fn evolve_state(&self, t: f64, psi: &StateVector) -> StateVector {
        self.unitary(t).apply(psi)
    }
}

pub fn evolve(h: &OperatorMatrix, t: f64, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    Evolver::new(h)?.evolve(t, rho)
}

/// Reduced operator on the subsystems listed in `keep`.
///
/// `dims` lists the subsystem dimensions left to right; their product must be
/// the operator dimension. Kept subsystems appear in ascending index order.
/// An empty `keep` returns the 1x1 operator holding the trace.
pub fn partial_trace(rho: &OperatorMatrix, dims: &[usize], keep: &[usize]) -> Result<OperatorMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != rho.dim() {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem dimensions {dims:?} do not multiply to {}",
            rho.dim()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!(
            "keep set {keep:?} is not a set of indices below {}",
            dims.len()
        )));
    }

    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offsets = |subsystems: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &s in subsystems {
            offs = offs
                .iter()
                .flat_map(|&o| { let st = strides[s]; (0..dims[s]).map(move |x| o + x * st) })
                .collect();
        }
        offs
    };
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let keep_off = offsets(&keep_sorted);
    let trace_off = offsets(&traced);

    let n = keep_off.len();
    let out = DMatrix::from_fn(n, n, |i, j| {
        trace_off
            .iter()
            .map(|&t| rho.m[(keep_off[i] + t, keep_off[j] + t)])
            .sum::<C64>()
    });
    Ok(OperatorMatrix::from_raw(out))
}

/// Thermal state `exp(-beta H)/Z` together with `Z = Tr exp(-beta H)`.
pub fn gibbs(h: &OperatorMatrix, beta: f64) -> Result<(OperatorMatrix, f64)> {
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::NegativeBeta(beta));
    }
    let spec = hermitian_eig(h)?;
    Ok(gibbs_from_spectrum(&spec, beta))
}

pub(crate) fn gibbs_from_spectrum(spec: &SpectralDecomposition, beta: f64) -> (OperatorMatrix, f64) {
    let e0 = spec.eigenvalues[0];
    // Boltzmann weights relative to the ground level keep the exponentials bounded.
    let weights: Vec<f64> = spec.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let shifted_z: f64 = weights.iter().sum();
    let z = shifted_z * (-beta * e0).exp();
    let mut scaled = spec.eigenvectors.clone();
    for (j, w) in weights.iter().enumerate() {
        let wj = c(w / shifted_z, 0.0);
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= wj);
    }
    (OperatorMatrix::from_raw(scaled * spec.eigenvectors.adjoint()), z)
}

/// `<psi|rho|psi>` for a normalized pure target.
pub fn fidelity_pure(rho: &OperatorMatrix, psi: &StateVector) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: psi.len() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(clip_unit(rho.expectation(psi).re))
}

/// Clamps values within `NORM_TOL` of the unit interval onto it.
pub(crate) fn clip_unit(x: f64) -> f64 {
    if (-NORM_TOL..0.0).contains(&x) {
        0.0
    } else if x > 1.0 && x <= 1.0 + NORM_TOL {
        1.0
    } else {
        x
    }
}

/// Validates that `rho` is a density operator within the given tolerances.
pub fn check_density(rho: &OperatorMatrix, trace_tol: f64, eig_tol: f64) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
        return Err(Error::InvalidParameter(format!("density operator has trace {tr}")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -eig_tol {
        return Err(Error::InvalidParameter(format!(
            "density operator has negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{pauli_operator, PauliString};
    use std::f64::consts::PI;

    fn op(s: &str) -> OperatorMatrix {
        pauli_operator(&s.parse::<PauliString>().unwrap()).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> OperatorMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        OperatorMatrix::new(&a + a.adjoint()).unwrap()
    }

    fn random_density(n: usize, seed: u64) -> OperatorMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let p = &a * a.adjoint();
        let tr = p.trace();
        OperatorMatrix::new(p / tr).unwrap()
    }

    #[test]
    fn kron_identity_and_zz_action() {
        let i2 = OperatorMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), OperatorMatrix::identity(4));

        let zz = kron(&op("Z"), &op("Z"));
        let v00 = basis_state(4, 0);
        let v01 = basis_state(4, 1);
        assert!((zz.apply(&v00) - &v00).norm() < 1e-15);
        assert!((zz.apply(&v01) + &v01).norm() < 1e-15);
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = op("X");
        let b = op("Y");
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k.get(i * 2 + p, j * 2 + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn kron_mixed_product() {
        let (a, b, cc, d) = (op("X"), op("Y"), op("Z"), random_hermitian(2, 3));
        let lhs = &kron(&a, &b) * &kron(&cc, &d);
        let rhs = kron(&(&a * &cc), &(&b * &d));
        assert!(lhs.approx_eq(&rhs, 1e-14));
    }

    #[test]
    fn eig_identity_and_repetition_code() {
        let spec = hermitian_eig(&OperatorMatrix::identity(8)).unwrap();
        assert!(spec.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));

        let h = &(&(&op("III") * 3.0) - &op("ZZI")) - &(&op("IZZ") + &op("ZIZ"));
        let spec = hermitian_eig(&h).unwrap();
        let expected = [0.0, 0.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0];
        for (l, e) in spec.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12, "{:?}", spec.eigenvalues);
        }
    }

    #[test]
    fn eig_reconstruction_random_16() {
        let h = random_hermitian(16, 11);
        let spec = hermitian_eig(&h).unwrap();
        let err = (&spec.reconstruct() - &h).frobenius_norm() / h.frobenius_norm();
        assert!(err <= 1e-10, "{err}");
        let v = &spec.eigenvectors;
        let gram = v.adjoint() * v;
        let id = DMatrix::<C64>::identity(16, 16);
        assert!((gram - id).norm() <= 1e-10);
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let again = hermitian_eig(&h).unwrap();
        assert_eq!(spec.eigenvectors, again.eigenvectors);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = OperatorMatrix::new(DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]))
            .unwrap();
        match hermitian_eig(&m) {
            Err(Error::NotHermitian { defect }) => assert!((defect - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evolve_identity_cases_and_rabi_flip() {
        let h = random_hermitian(4, 5);
        let rho = random_density(4, 6);
        assert!(evolve(&h, 0.0, &rho).unwrap().approx_eq(&rho, 1e-12));

        let (thermal, _) = gibbs(&h, 0.7).unwrap();
        assert!(evolve(&h, 2.3, &thermal).unwrap().approx_eq(&thermal, 1e-12));

        // H = g sigma^x rotates |0> into |1> after g t = pi/2.
        let g = 1.7;
        let hx = &op("X") * g;
        let rho0 = OperatorMatrix::projector(&basis_state(2, 0));
        let out = evolve(&hx, PI / (2.0 * g), &rho0).unwrap();
        assert!(out.approx_eq(&OperatorMatrix::projector(&basis_state(2, 1)), 1e-10));
    }

    #[test]
    fn evolve_dimension_mismatch() {
        let r = evolve(&OperatorMatrix::identity(4), 1.0, &OperatorMatrix::identity(2));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn partial_trace_product_bell_and_sequential() {
        let ra = random_density(2, 1);
        let rb = random_density(4, 2);
        let prod = kron(&ra, &rb);
        assert!(partial_trace(&prod, &[2, 4], &[0]).unwrap().approx_eq(&ra, 1e-14));
        assert!(partial_trace(&prod, &[2, 4], &[1]).unwrap().approx_eq(&rb, 1e-14));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_vec(vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]);
        let red = partial_trace(&OperatorMatrix::projector(&bell), &[2, 2], &[1]).unwrap();
        assert!(red.approx_eq(&(&OperatorMatrix::identity(2) * 0.5), 1e-15));

        // Tracing {2} then {1} equals tracing {1,2} at once.
        let rho = random_density(16, 9);
        let dims = [2, 4, 2];
        let step = partial_trace(&rho, &dims, &[0, 1]).unwrap();
        let step = partial_trace(&step, &[2, 4], &[0]).unwrap();
        let once = partial_trace(&rho, &dims, &[0]).unwrap();
        assert!(step.approx_eq(&once, 1e-14));

        let scalar = partial_trace(&rho, &dims, &[]).unwrap();
        assert_eq!(scalar.dim(), 1);
        assert!((scalar.get(0, 0) - rho.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = OperatorMatrix::identity(4);
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[0, 0]).is_err());
        assert!(partial_trace(&rho, &[2, 4], &[0]).is_err());
    }

    #[test]
    fn gibbs_limits_and_boltzmann_sum() {
        let h = &(&(&op("III") * 3.0) - &op("ZZI")) - &(&op("IZZ") + &op("ZIZ"));
        let (rho, z) = gibbs(&h, 0.0).unwrap();
        assert!((z - 8.0).abs() < 1e-12);
        assert!(rho.approx_eq(&(&OperatorMatrix::identity(8) * 0.125), 1e-12));

        let (rho, _) = gibbs(&h, 1e3).unwrap();
        let mut expected = OperatorMatrix::zeros(8);
        expected = &expected + &(&OperatorMatrix::projector(&basis_state(8, 0)) * 0.5);
        expected = &expected + &(&OperatorMatrix::projector(&basis_state(8, 7)) * 0.5);
        assert!(rho.approx_eq(&expected, 1e-6));

        // Z = 2 + 6 e^{-0.4} at beta = 0.1.
        let (rho, z) = gibbs(&h, 0.1).unwrap();
        let z_exact = 2.0 + 6.0 * (-0.4f64).exp();
        assert!((z - z_exact).abs() < 1e-12);
        assert!((z - 6.0219).abs() < 1e-4);
        assert!((rho.get(0, 0).re - 1.0 / z_exact).abs() < 1e-12);
        assert!((rho.get(0, 0).re - 0.16606).abs() < 1e-5);

        assert!(matches!(gibbs(&h, -1.0), Err(Error::NegativeBeta(_))));
    }

    #[test]
    fn gibbs_commutes_with_hamiltonian() {
        let h = random_hermitian(8, 21);
        let (rho, _) = gibbs(&h, 0.9).unwrap();
        assert!(h.commutator(&rho).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn fidelity_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_vec(vec![c(s, 0.), c(s, 0.)]);
        assert!((fidelity_pure(&OperatorMatrix::projector(&plus), &plus).unwrap() - 1.0).abs() < 1e-15);
        let mixed = &OperatorMatrix::identity(4) * 0.25;
        assert!((fidelity_pure(&mixed, &basis_state(4, 2)).unwrap() - 0.25).abs() < 1e-15);

        let rho = &(&OperatorMatrix::projector(&basis_state(2, 0)) * 0.3)
            + &(&OperatorMatrix::projector(&basis_state(2, 1)) * 0.7);
        assert!((fidelity_pure(&rho, &plus).unwrap() - 0.5).abs() < 1e-15);

        let unnormalized = StateVector::from_vec(vec![c(1.0, 0.), c(1.0, 0.)]);
        assert!(matches!(fidelity_pure(&rho, &unnormalized), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn rejects_non_register_dimensions() {
        assert!(matches!(OperatorMatrix::new(DMatrix::zeros(3, 3)), Err(Error::NotQubitRegister(3))));
        assert!(matches!(OperatorMatrix::new(DMatrix::zeros(2, 4)), Err(Error::NotSquare { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn evolution_preserves_trace_and_composes(seed in 0u64..1000, t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
                let h = random_hermitian(8, seed);
                let rho = random_density(8, seed + 1);
                let ev = Evolver::new(&h).unwrap();
                let a = ev.evolve(t1, &rho).unwrap();
                prop_assert!((a.trace().re - 1.0).abs() <= 1e-10);
                prop_assert!(a.hermiticity_defect() <= 1e-12);
                let two_step = ev.evolve(t2, &a).unwrap();
                let one_step = ev.evolve(t1 + t2, &rho).unwrap();
                prop_assert!(two_step.approx_eq(&one_step, 1e-9));
            }

            #[test]
            fn uncoupled_marginals_stay_thermal(seed in 0u64..1000, t in 0.0f64..10.0, beta in 0.0f64..2.0) {
                let ha = random_hermitian(2, seed);
                let hb = random_hermitian(4, seed + 7);
                let (ra, _) = gibbs(&ha, beta).unwrap();
                let (rb, _) = gibbs(&hb, beta).unwrap();
                let h = &embed(&ha, 1, 4) + &embed(&hb, 2, 1);
                let out = evolve(&h, t, &kron(&ra, &rb)).unwrap();
                prop_assert!(partial_trace(&out, &[2, 4], &[0]).unwrap().approx_eq(&ra, 1e-10));
                prop_assert!(partial_trace(&out, &[2, 4], &[1]).unwrap().approx_eq(&rb, 1e-10));
            }
        }
    }
}
