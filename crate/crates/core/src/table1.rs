//! Purification of Heisenberg logical qubits with XY-coupled auxiliary
//! qubits: the printed rows, the calibration that reproduces them, and the
//! comparison report.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::codes::{heisenberg_logical_basis, HeisenbergSpec};
use crate::emr::{find_m_min, run_emr, xy_emr_system, AqResetPolicy, MinRounds, RoundSpec, XYSetup};
use crate::error::{Error, Result};
use crate::measurement::{MeasurementSetting, Outcome};
use crate::tensor::{c, StateVector};

/// Fidelity thresholds reported per row.
pub const THRESHOLDS: [f64; 2] = [0.66, 0.9];
/// Allowed absolute deviation of a cumulative probability for a match.
pub const PROBABILITY_TOLERANCE: f64 = 0.005;

/// Cardinal logical states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cardinal {
    ZPlus,
    ZMinus,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
}

/// How cardinal labels map onto `|0_S>, |1_S>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelConvention {
    /// `z+ = |0_S>`, `x+- = (|0_S> -+ |1_S>)/sqrt2`, `y+- = (|0_S> -+ i|1_S>)/sqrt2`.
    /// Reproduces the printed numbers.
    #[default]
    Calibrated,
    /// `z+ = |1_S>`, `x+- = (|0_S> +- |1_S>)/sqrt2`, `y+- = (|0_S> +- i|1_S>)/sqrt2`.
    Literal,
}

impl Cardinal {
    pub fn label(self) -> &'static str {
        match self {
            Cardinal::ZPlus => "z+",
            Cardinal::ZMinus => "z-",
            Cardinal::XPlus => "x+",
            Cardinal::XMinus => "x-",
            Cardinal::YPlus => "y+",
            Cardinal::YMinus => "y-",
        }
    }

    /// Amplitudes on `(|0_S>, |1_S>)`.
    pub fn amplitudes(self, convention: LabelConvention) -> [crate::C64; 2] {
        let h = FRAC_1_SQRT_2;
        let flip = match convention {
            LabelConvention::Calibrated => -1.0,
            LabelConvention::Literal => 1.0,
        };
        let (zero, one) = match convention {
            LabelConvention::Calibrated => (Cardinal::ZPlus, Cardinal::ZMinus),
            LabelConvention::Literal => (Cardinal::ZMinus, Cardinal::ZPlus),
        };
        match self {
            s if s == zero => [c(1.0, 0.0), c(0.0, 0.0)],
            s if s == one => [c(0.0, 0.0), c(1.0, 0.0)],
            Cardinal::XPlus => [c(h, 0.0), c(flip * h, 0.0)],
            Cardinal::XMinus => [c(h, 0.0), c(-flip * h, 0.0)],
            Cardinal::YPlus => [c(h, 0.0), c(0.0, flip * h)],
            Cardinal::YMinus => [c(h, 0.0), c(0.0, -flip * h)],
            _ => unreachable!(),
        }
    }

    pub fn state(self, n_system: usize, convention: LabelConvention) -> StateVector {
        let (zero, one) = heisenberg_logical_basis(n_system);
        let [a0, a1] = self.amplitudes(convention);
        zero * a0 + one * a1
    }
}

/// Printed outcome of one row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedResult {
    pub m_min: [usize; 2],
    pub probability: [f64; 2],
    pub max_fidelity: f64,
}

/// One printed row: system size, target, couplings and per-AQ settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub index: usize,
    pub n_system: usize,
    pub target: Cardinal,
    pub j2: f64,
    pub gamma: f64,
    pub settings: Vec<MeasurementSetting>,
    pub printed: PrintedResult,
}

impl Table1Row {
    /// Settings with `a` in `{0, pi}` select `sigma^z` eigenstates, so the
    /// auxiliary reset policy cannot matter.
    pub fn policy_independent(&self) -> bool {
        self.settings.iter().all(|s| s.a == 0.0 || s.a == PI)
    }
}

fn row(
    index: usize,
    n_system: usize,
    target: Cardinal,
    j2: f64,
    gamma: f64,
    ab: (f64, f64),
    k: Outcome,
    printed: ([usize; 2], [f64; 2], f64),
) -> Table1Row {
    let n_aux = if n_system == 2 { 1 } else { 2 };
    Table1Row {
        index,
        n_system,
        target,
        j2,
        gamma,
        settings: vec![MeasurementSetting { a: ab.0, b: ab.1, outcome: k }; n_aux],
        printed: PrintedResult { m_min: printed.0, probability: printed.1, max_fidelity: printed.2 },
    }
}

/// All twelve printed rows, numbered from 1.
pub fn printed_rows() -> Vec<Table1Row> {
    use Cardinal::*;
    use Outcome::{Minus, Plus};
    vec![
        row(1, 2, ZPlus, 0.0, 0.0, (0.0, 0.0), Plus, ([4, 6], [0.36, 0.287], 1.0)),
        row(2, 2, ZMinus, 1.0, 1.0, (0.0, 0.0), Plus, ([2, 4], [0.36, 0.287], 1.0)),
        row(3, 2, XPlus, 0.0, 0.85, (0.907 * PI, 0.78 * PI), Minus, ([6, 12], [0.022, 0.001], 0.996)),
        row(4, 2, XMinus, 0.0, 0.85, (0.093 * PI, 0.78 * PI), Plus, ([6, 12], [0.022, 0.001], 0.996)),
        row(5, 2, YPlus, 0.0, -0.85, (0.093 * PI, 0.22 * PI), Plus, ([7, 13], [0.011, 1e-4], 0.995)),
        row(6, 2, YMinus, 0.0, -0.85, (0.0907 * PI, 0.22 * PI), Minus, ([7, 13], [0.011, 1e-4], 0.995)),
        row(7, 4, ZPlus, 0.0, 0.0, (0.0, 0.0), Plus, ([6, 10], [0.111, 0.091], 1.0)),
        row(8, 4, ZMinus, 1.0, 0.17, (0.0, 0.0), Plus, ([12, 35], [0.091, 0.036], 0.993)),
        row(9, 6, ZPlus, 0.0, 0.0, (0.0, 0.0), Plus, ([15, 24], [0.034, 0.026], 1.0)),
        row(10, 6, ZMinus, 1.0, 0.19, (0.0, 0.0), Plus, ([24, 47], [0.008, 0.001], 0.985)),
        row(11, 8, ZPlus, 0.0, 0.0, (0.0, 0.0), Plus, ([31, 50], [0.010, 0.007], 1.0)),
        row(12, 8, ZMinus, 1.0, 0.2, (0.0, 0.0), Plus, ([80, 223], [1e-6, 1e-11], 0.965)),
    ]
}

/// Parameters the printed table leaves open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Calibration {
    pub beta: f64,
    pub round_time: f64,
    pub j_system: f64,
    pub j1: f64,
    pub coupling_prefactor: f64,
    /// Auxiliary energy for the two-site chain.
    pub aux_energy_two_site: f64,
    /// Auxiliary energy for longer chains.
    pub aux_energy_multi: f64,
    pub max_rounds: usize,
}

impl Default for Table1Calibration {
    fn default() -> Self {
        Self {
            beta: 0.1,
            round_time: 1.0,
            j_system: 1.0,
            j1: 1.0,
            coupling_prefactor: 1.0,
            aux_energy_two_site: 0.95,
            aux_energy_multi: 1.0,
            max_rounds: 500,
        }
    }
}

impl Table1Calibration {
    pub fn aux_energy(&self, n_system: usize) -> f64 {
        if n_system == 2 {
            self.aux_energy_two_site
        } else {
            self.aux_energy_multi
        }
    }
}

/// One concrete configuration tried for a row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowVariant {
    pub name: String,
    pub j2: f64,
    pub gamma: f64,
    pub settings: Vec<MeasurementSetting>,
    pub convention: LabelConvention,
    pub policy: AqResetPolicy,
}

/// Computed numbers for one variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowRun {
    pub variant: RowVariant,
    pub aux_energy: f64,
    pub m_min: [Option<MinRounds>; 2],
    pub max_fidelity: f64,
    pub rounds_run: usize,
    pub truncated: Option<String>,
    /// Integer rounds equal and probabilities within tolerance at both thresholds.
    pub matches_printed: bool,
    /// Sum of round offsets plus scaled probability offsets; 0 for a perfect match.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReport {
    pub row: Table1Row,
    pub policy_independent: bool,
    pub runs: Vec<RowRun>,
    /// Index into `runs` of the closest variant.
    pub best: usize,
}

impl RowReport {
    pub fn best_run(&self) -> &RowRun {
        &self.runs[self.best]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Report {
    pub calibration: Table1Calibration,
    pub rows: Vec<RowReport>,
}

fn compare(printed: &PrintedResult, m_min: &[Option<MinRounds>; 2]) -> (bool, f64) {
    let mut ok = true;
    let mut dev = 0.0;
    for i in 0..2 {
        match m_min[i] {
            Some(m) => {
                let dm = (m.rounds as f64 - printed.m_min[i] as f64).abs();
                let dp = (m.p_cumulative - printed.probability[i]).abs();
                ok &= dm == 0.0 && dp <= PROBABILITY_TOLERANCE;
                dev += dm + dp / PROBABILITY_TOLERANCE;
            }
            None => {
                ok = false;
                dev += 1e6;
            }
        }
    }
    (ok, dev)
}

/// Variants tried for a row: the printed configuration under each relevant
/// reset policy, plus alternatives where the printed row is ambiguous.
pub fn row_variants(row: &Table1Row) -> Vec<RowVariant> {
    let policies: &[AqResetPolicy] = if row.policy_independent() {
        &[AqResetPolicy::Keep]
    } else {
        &[AqResetPolicy::Keep, AqResetPolicy::Reset]
    };
    let base = |name: &str, policy| RowVariant {
        name: name.to_string(),
        j2: row.j2,
        gamma: row.gamma,
        settings: row.settings.clone(),
        convention: LabelConvention::Calibrated,
        policy,
    };
    let mut out = Vec::new();
    for &policy in policies {
        out.push(base("printed", policy));
        if row.target == Cardinal::YMinus {
            let mut v = base("a=0.907pi", policy);
            v.settings.iter_mut().for_each(|s| s.a = 0.907 * PI);
            out.push(v);
        }
        if row.n_system == 2 {
            let mut v = base("literal-labels", policy);
            v.convention = LabelConvention::Literal;
            out.push(v);
        }
    }
    if row.n_system == 2 && row.target == Cardinal::ZMinus {
        let mut v = base("J2=0,gamma=0", AqResetPolicy::Keep);
        v.j2 = 0.0;
        v.gamma = 0.0;
        out.push(v);
    }
    out
}

pub fn run_variant(row: &Table1Row, variant: &RowVariant, cal: &Table1Calibration, aux_energy: f64) -> Result<RowRun> {
    let heis = HeisenbergSpec::new(row.n_system, cal.j_system)?;
    let setup = XYSetup {
        j1: cal.j1,
        coupling_prefactor: cal.coupling_prefactor,
        ..XYSetup::standard(row.n_system, variant.j2, variant.gamma, aux_energy)
    };
    let target = row.target.state(row.n_system, variant.convention);
    let system = xy_emr_system(&setup, &heis, cal.beta, target)?;
    let spec = RoundSpec::new(cal.round_time, variant.settings.clone())?;
    let traj = run_emr(&system, &spec, cal.max_rounds, variant.policy, false)?;
    let m_min = THRESHOLDS.map(|f| find_m_min(&traj, f));
    let (matches_printed, deviation) = compare(&row.printed, &m_min);
    Ok(RowRun {
        variant: variant.clone(),
        aux_energy,
        m_min,
        max_fidelity: traj.max_fidelity().unwrap_or(0.0),
        rounds_run: traj.rounds.len(),
        truncated: traj.truncated,
        matches_printed,
        deviation,
    })
}

pub fn reproduce_row(row: &Table1Row, cal: &Table1Calibration) -> Result<RowReport> {
    let e_a = cal.aux_energy(row.n_system);
    let runs = row_variants(row)
        .iter()
        .map(|v| run_variant(row, v, cal, e_a))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.deviation.total_cmp(&b.1.deviation))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(RowReport { policy_independent: row.policy_independent(), row: row.clone(), runs, best })
}

/// Rows by 1-based index; an empty selector means all rows.
pub fn select_rows(indices: &[usize]) -> Result<Vec<Table1Row>> {
    let all = printed_rows();
    if indices.is_empty() {
        return Ok(all);
    }
    indices
        .iter()
        .map(|&i| {
            all.iter()
                .find(|r| r.index == i)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("no row {i}; rows are 1..={}", all.len())))
        })
        .collect()
}

pub fn reproduce_table1(indices: &[usize], cal: &Table1Calibration) -> Result<Table1Report> {
    let rows = select_rows(indices)?
        .iter()
        .map(|r| reproduce_row(r, cal))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1Report { calibration: cal.clone(), rows })
}

/// Point of an auxiliary-energy scan for the printed configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyScanPoint {
    pub aux_energy: f64,
    pub m_min: [Option<MinRounds>; 2],
    pub matches_printed: bool,
}

/// Printed configuration of `row` (keep policy) at each auxiliary energy.
pub fn scan_aux_energy(row: &Table1Row, cal: &Table1Calibration, energies: &[f64]) -> Result<Vec<EnergyScanPoint>> {
    let variant = row_variants(row).remove(0);
    energies
        .iter()
        .map(|&e| {
            let r = run_variant(row, &variant, cal, e)?;
            Ok(EnergyScanPoint { aux_energy: e, m_min: r.m_min, matches_printed: r.matches_printed })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_heisenberg_code, logical_operators};

    #[test]
    fn rows_are_complete() {
        let rows = printed_rows();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().enumerate().all(|(i, r)| r.index == i + 1));
        for r in &rows {
            assert_eq!(r.settings.len(), if r.n_system == 2 { 1 } else { 2 });
            r.settings.iter().for_each(|s| s.validate().unwrap());
        }
        let independent: Vec<usize> = rows.iter().filter(|r| r.policy_independent()).map(|r| r.index).collect();
        assert_eq!(independent, vec![1, 2, 7, 8, 9, 10, 11, 12]);
        assert!(select_rows(&[13]).is_err());
        assert_eq!(select_rows(&[7, 1]).unwrap().iter().map(|r| r.index).collect::<Vec<_>>(), vec![7, 1]);
    }

    #[test]
    fn cardinal_states_are_logical_eigenstates() {
        for n in [2, 4] {
            let code = build_heisenberg_code(&HeisenbergSpec::new(n, 1.0).unwrap()).unwrap();
            let ops = logical_operators(&code).unwrap();
            for conv in [LabelConvention::Calibrated, LabelConvention::Literal] {
                // The literal labels are the calibrated ones with every sign flipped.
                let sign = if conv == LabelConvention::Literal { -1.0 } else { 1.0 };
                for (card, op, s) in [
                    (Cardinal::ZPlus, &ops.z, -sign),
                    (Cardinal::ZMinus, &ops.z, sign),
                    (Cardinal::XPlus, &ops.x, -sign),
                    (Cardinal::XMinus, &ops.x, sign),
                    (Cardinal::YPlus, &ops.y, sign),
                    (Cardinal::YMinus, &ops.y, -sign),
                ] {
                    let v = card.state(n, conv);
                    assert!((v.norm() - 1.0).abs() < 1e-14);
                    let d = op.apply(&v) - &v * c(s, 0.0);
                    assert!(d.norm() < 1e-12, "{n} {conv:?} {}", card.label());
                }
            }
        }
    }

    #[test]
    fn ambiguous_rows_get_alternatives() {
        let rows = printed_rows();
        let names = |i: usize| row_variants(&rows[i - 1]).iter().map(|v| v.name.clone()).collect::<Vec<_>>();
        assert!(names(2).contains(&"J2=0,gamma=0".to_string()));
        assert!(names(6).contains(&"a=0.907pi".to_string()));
        assert_eq!(row_variants(&rows[2]).iter().filter(|v| v.policy == AqResetPolicy::Reset).count(), 2);
        assert_eq!(row_variants(&rows[6]).len(), 1);
    }

    #[test]
    fn two_site_rows_reproduce() {
        let cal = Table1Calibration::default();
        for i in [1, 2] {
            let rep = reproduce_row(&printed_rows()[i - 1], &cal).unwrap();
            let best = rep.best_run();
            assert!(best.matches_printed, "row {i}: {:?}", best.m_min);
            assert_eq!(best.variant.name, "printed");
            assert!(best.max_fidelity > 1.0 - 1e-9);
        }
    }
}
