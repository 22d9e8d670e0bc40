//! Thermal initial states, exact joint evolution and the closed-form
//! two-level solution used as an oracle.

use crate::codes::CodeModel;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_interaction, build_total, es_state, resonant_energy, system_dim, target_state, AuxiliarySpec,
    InteractionSpec,
};
use crate::tensor::{basis_state, c, kron_all, Evolver, OperatorMatrix, StateVector, C64};

/// Common bath temperature and the per-code partition functions.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalSpec {
    pub beta: f64,
    pub partition_functions: Vec<f64>,
    /// `Z_L = prod_i Z_i`
    pub z_total: f64,
    /// `p_beta = prod_i exp(-beta dE_i) / Z_i`
    pub p_beta: f64,
}

impl ThermalSpec {
    pub fn new(codes: &[CodeModel], beta: f64) -> Result<Self> {
        if beta < 0.0 || beta.is_nan() {
            return Err(Error::NegativeBeta(beta));
        }
        let partition_functions: Vec<f64> = codes.iter().map(|c| c.partition_function(beta)).collect();
        let z_total = partition_functions.iter().product();
        let p_beta = codes
            .iter()
            .zip(&partition_functions)
            .map(|(c, z)| (-beta * c.gap()).exp() / z)
            .product();
        Ok(Self { beta, partition_functions, z_total, p_beta })
    }
}

/// Detuning-dependent constants of the two-level solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceContext {
    pub delta_sum: f64,
    pub e_a: f64,
    pub g: f64,
    pub f: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
}

impl ResonanceContext {
    pub fn new(delta_sum: f64, e_a: f64, g: f64) -> Self {
        let det = delta_sum - e_a;
        let f = (det * det + 4.0 * g * g).sqrt();
        let e_plus = det + f;
        let e_minus = det - f;
        Self {
            delta_sum,
            e_a,
            g,
            f,
            e_plus,
            e_minus,
            g_plus: e_plus * e_plus + 4.0 * g * g,
            g_minus: e_minus * e_minus + 4.0 * g * g,
        }
    }

    pub fn for_codes(codes: &[CodeModel], e_a: f64, g: f64) -> Self {
        Self::new(resonant_energy(codes), e_a, g)
    }

    pub fn is_resonant(&self) -> bool {
        (self.delta_sum - self.e_a).abs() <= 1e-12 * self.delta_sum.abs().max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct TwoLevelEigenpair {
    /// Eigenvalue with the auxiliary levels at `{0, E_A}`.
    pub value: f64,
    pub vector: StateVector,
}

/// The two eigenpairs of the total Hamiltonian inside
/// `span{|Psi, 1_A>, |Phi, 0_A>}`.
///
/// Eigenvalues are quoted with the auxiliary qubit levels at `{0, E_A}`; with
/// `H_A = (E_A/2) sigma^z` the physical eigenvalues are lower by `E_A / 2`.
pub fn two_level_eigenpairs(
    ctx: &ResonanceContext,
    psi_s: &StateVector,
    phi_s: &StateVector,
) -> Result<(TwoLevelEigenpair, TwoLevelEigenpair)> {
    if ctx.g == 0.0 {
        return Err(Error::InvalidParameter("eigenpair formulas degenerate at g = 0".into()));
    }
    let psi1 = psi_s.kronecker(&basis_state(2, 1));
    let phi0 = phi_s.kronecker(&basis_state(2, 0));
    let g = ctx.g;
    let make = |e: f64, big_g: f64, lambda: f64| TwoLevelEigenpair {
        value: lambda,
        vector: (&psi1 * c(e / (2.0 * g), 0.0) - &phi0) * c(-2.0 * g / big_g.sqrt(), 0.0),
    };
    let base = ctx.e_a + ctx.delta_sum;
    Ok((
        make(ctx.e_plus, ctx.g_plus, 0.5 * (base - ctx.f)),
        make(ctx.e_minus, ctx.g_minus, 0.5 * (base + ctx.f)),
    ))
}

/// Block coefficients of the evolved joint state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockCoefficients {
    /// Weight left on `|Phi, 0_A>`.
    pub p0: f64,
    /// Weight on `|Psi, 1_A>`.
    pub p1: f64,
    /// Coefficient of `|Psi><Phi| (x) |1_A><0_A|`.
    pub p10: C64,
}

pub fn coefficients_p(ctx: &ResonanceContext, thermal: &ThermalSpec, t: f64) -> Result<BlockCoefficients> {
    let g = ctx.g;
    if g == 0.0 {
        return Err(Error::InvalidParameter("coefficient formulas degenerate at g = 0".into()));
    }
    let pb = thermal.p_beta;
    let (ep, em, gp, gm) = (ctx.e_plus, ctx.e_minus, ctx.g_plus, ctx.g_minus);
    let cos = (ctx.f * t).cos();
    let p1 = 4.0 * g * g * pb * (ep * ep / (gp * gp) + em * em / (gm * gm) + 2.0 * ep * em * cos / (gp * gm));
    let p0 = 16.0 * g.powi(4) * pb * (1.0 / (gp * gp) + 1.0 / (gm * gm) + 2.0 * cos / (gp * gm));
    let osc = (C64::from_polar(ep, ctx.f * t) + C64::from_polar(em, -ctx.f * t)) / (gp * gm);
    let p10 = (c(ep / (gp * gp) + em / (gm * gm), 0.0) + osc) * (-8.0 * g.powi(3) * pb);
    Ok(BlockCoefficients { p0, p1, p10 })
}

/// `(x)_i rho_i (x) |0...0><0...0|` on the auxiliary register.
pub fn initial_state(codes: &[CodeModel], thermal: &ThermalSpec, aq_count: usize) -> Result<OperatorMatrix> {
    let mut factors = codes.iter().map(|c| c.gibbs(thermal.beta)).collect::<Result<Vec<_>>>()?;
    factors.push(OperatorMatrix::projector(&basis_state(1 << aq_count, 0)));
    Ok(kron_all(&factors))
}

/// `<r|rho|c>` on the auxiliary register, as an operator on the system.
pub fn aux_block(rho: &OperatorMatrix, aux_dim: usize, row: usize, col: usize) -> OperatorMatrix {
    let ds = rho.dim() / aux_dim;
    OperatorMatrix::from_raw(nalgebra::DMatrix::from_fn(ds, ds, |i, j| {
        rho.get(i * aux_dim + row, j * aux_dim + col)
    }))
}

/// Codes, engineered coupling and thermal data with the total Hamiltonian
/// diagonalized once, for evaluating many times.
#[derive(Clone, Debug)]
pub struct JointModel {
    pub codes: Vec<CodeModel>,
    pub spec: InteractionSpec,
    pub aux: AuxiliarySpec,
    pub thermal: ThermalSpec,
    pub hamiltonian: OperatorMatrix,
    pub evolver: Evolver,
    pub initial: OperatorMatrix,
    /// Product target `(x)_i |Psi_i>`.
    pub target: StateVector,
    /// Excited-manifold state the coupling draws from.
    pub phi: StateVector,
}

impl JointModel {
    pub fn new(codes: &[CodeModel], spec: &InteractionSpec, aux: &AuxiliarySpec, thermal: &ThermalSpec) -> Result<Self> {
        if aux.count != 1 {
            return Err(Error::InvalidParameter("the engineered coupling uses exactly one auxiliary qubit".into()));
        }
        let hi = build_interaction(codes, spec)?;
        let hamiltonian = build_total(codes, &hi, aux)?;
        let evolver = Evolver::new(&hamiltonian)?;
        let initial = initial_state(codes, thermal, aux.count)?;
        let targets = match spec.variant {
            crate::hamiltonian::InteractionVariant::GroundPrep => {
                vec![crate::codes::LogicalTarget::zero(); codes.len()]
            }
            _ => spec.targets.clone(),
        };
        let target = target_state(codes, &targets)?;
        let phi = es_state(codes, spec.es_amplitudes.as_deref())?;
        Ok(Self {
            codes: codes.to_vec(),
            spec: spec.clone(),
            aux: *aux,
            thermal: thermal.clone(),
            hamiltonian,
            evolver,
            initial,
            target,
            phi,
        })
    }

    pub fn system_dim(&self) -> usize {
        system_dim(&self.codes)
    }

    pub fn context(&self) -> ResonanceContext {
        ResonanceContext::for_codes(&self.codes, self.aux.energy, self.spec.coupling)
    }

    pub fn evolved(&self, t: f64) -> Result<OperatorMatrix> {
        self.evolver.evolve(t, &self.initial)
    }
}

/// Exact `rho_SA(t)` for the engineered coupling.
pub fn evolved_joint_state(
    codes: &[CodeModel],
    spec: &InteractionSpec,
    aux: &AuxiliarySpec,
    thermal: &ThermalSpec,
    t: f64,
) -> Result<OperatorMatrix> {
    JointModel::new(codes, spec, aux, thermal)?.evolved(t)
}

/// Product of system Gibbs states (no auxiliary factor).
pub fn system_thermal_state(codes: &[CodeModel], beta: f64) -> Result<OperatorMatrix> {
    let factors = codes.iter().map(|c| c.gibbs(beta)).collect::<Result<Vec<_>>>()?;
    Ok(kron_all(&factors))
}

/// The `|0_A><0_A|` block predicted by the two-level solution:
/// `rho_S + (p0 - p_beta) |Phi><Phi|`.
pub fn predicted_zero_block(rho_s: &OperatorMatrix, phi: &StateVector, p0: f64, p_beta: f64) -> OperatorMatrix {
    rho_s + &(&OperatorMatrix::projector(phi) * (p0 - p_beta))
}
