use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use logipure::analytic::{f_plus_detuned, f_plus_resonant_with, p_plus_detuned, p_plus_resonant};
use logipure::codes::{heisenberg_logical_basis, CodeDefinition, CodeModel, HeisenbergSpec};
use logipure::emr::{find_m_min, run_emr, xy_emr_system, EmrSystem, RoundSpec};
use logipure::format_f64;
use logipure::hamiltonian::{
    build_interaction, compare_with_printed, decomposition_csv, printed_repetition_interaction, resonant_energy,
    AuxiliarySpec, InteractionSpec,
};
use logipure::measurement::{MeasurementSetting, Outcome, UNATTAINABLE};
use logipure::table1::{reproduce_row, scan_aux_energy, select_rows, EnergyScanPoint, RowReport, PROBABILITY_TOLERANCE};
use logipure::thermal::{JointModel, ThermalSpec};
use logipure::pauli_decompose;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};

/// A file to be written.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

/// Marks "target never reached" in integer and probability columns.
pub const NOT_REACHED: i64 = -1;

/// Largest register (codes plus auxiliary qubit) the CLI will build.
const MAX_QUBITS: usize = 10;

pub fn run(experiment: Experiment, cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Artifact>> {
    cfg.check_experiment(experiment)?;
    let single = |contents| Ok(vec![Artifact { path: out.to_path_buf(), contents }]);
    match experiment {
        Experiment::Fig2 => single(fig2(cfg)?),
        Experiment::Fig3 => single(fig3(cfg)?),
        Experiment::Fig4 => single(fig4(cfg)?),
        Experiment::Table1 => single(table1(cfg)?),
        Experiment::Purify => single(purify(cfg)?),
        Experiment::Decompose => decompose(cfg, out),
    }
}

fn header(cfg: &ExperimentConfig, summary: &Value) -> String {
    format!("# config: {}\n# summary: {}\n", cfg.echo(), summary)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn build_codes(def: &CodeDefinition, copies: usize) -> anyhow::Result<Vec<CodeModel>> {
    let code = def.build().context("building code")?;
    ensure!(
        code.n_qubits() * copies < MAX_QUBITS,
        "{copies} copies of a {}-qubit code exceed the {MAX_QUBITS}-qubit limit",
        code.n_qubits()
    );
    Ok(vec![code; copies])
}

fn with_strength(def: &CodeDefinition, strength: f64) -> CodeDefinition {
    match def {
        CodeDefinition::Stabilizer { stabilizers, .. } => {
            CodeDefinition::Stabilizer { stabilizers: stabilizers.clone(), j: strength }
        }
        CodeDefinition::Heisenberg { n, .. } => CodeDefinition::Heisenberg { n: *n, j: strength },
    }
}

/// Engineered single-qubit coupling for the configured codes and target.
pub fn joint_model(cfg: &ExperimentConfig) -> anyhow::Result<JointModel> {
    let p = &cfg.protocol;
    let codes = build_codes(&cfg.code, p.codes)?;
    let e_a = p.e_a.unwrap_or_else(|| resonant_energy(&codes));
    let thermal = ThermalSpec::new(&codes, p.beta)?;
    let spec = InteractionSpec::rank_one(p.g, vec![p.target()?; codes.len()]);
    Ok(JointModel::new(&codes, &spec, &AuxiliarySpec::single(e_a)?, &thermal)?)
}

fn grid_cells(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let ts = cfg.grid.t.values();
    cfg.grid.a.values().into_iter().flat_map(|a| ts.iter().map(move |&t| (a, t))).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct Fig2Cell {
    pub a: f64,
    pub t: f64,
    pub f_analytic: Option<f64>,
    pub p_analytic: f64,
    pub f_numeric: Option<f64>,
    pub p_numeric: f64,
}

pub fn fig2_cells(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Fig2Cell>> {
    let model = joint_model(cfg)?;
    let ctx = model.context();
    let p = &cfg.protocol;
    grid_cells(cfg)
        .par_iter()
        .map(|&(a, t)| {
            // The minus projector is the plus projector at pi - a (up to a phase in b).
            let a_eff = if p.k == Outcome::Plus { a } else { PI - a };
            let (p_analytic, f_analytic) = if ctx.is_resonant() {
                let pa = p_plus_resonant(a_eff, t, p.g, model.thermal.p_beta);
                (pa, f_plus_resonant_with(a_eff, t, p.g, &model.thermal).ok())
            } else {
                let pa = p_plus_detuned(a_eff, &ctx, &model.thermal, t)?;
                (pa, f_plus_detuned(a_eff, &ctx, &model.thermal, t).ok())
            };
            let rec = model.purify(t, &MeasurementSetting { a, b: p.b, outcome: p.k })?;
            let f_analytic = f_analytic.filter(|_| p_analytic >= UNATTAINABLE);
            Ok(Fig2Cell { a, t, f_analytic, p_analytic, f_numeric: rec.fidelity, p_numeric: rec.probability })
        })
        .collect()
}

pub fn fig2(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let cells = fig2_cells(cfg)?;
    let regions: Vec<Value> = cfg
        .protocol
        .f_targets
        .iter()
        .map(|&ft| {
            let hits: Vec<&Fig2Cell> = cells
                .iter()
                .filter(|c| c.p_numeric >= UNATTAINABLE && c.f_numeric.is_some_and(|f| f >= ft))
                .collect();
            let best = hits.iter().map(|c| c.p_numeric).fold(0.0, f64::max);
            json!({"f_target": ft, "points": hits.len(), "max_probability": best})
        })
        .collect();
    let max_delta = cells
        .iter()
        .flat_map(|c| {
            let df = match (c.f_analytic, c.f_numeric) {
                (Some(x), Some(y)) => (x - y).abs(),
                _ => 0.0,
            };
            [df, (c.p_analytic - c.p_numeric).abs()]
        })
        .fold(0.0, f64::max);
    let summary = json!({"cells": cells.len(), "regions": regions, "max_analytic_numeric_delta": max_delta});
    let mut out = header(cfg, &summary);
    out.push_str("a,t,f_analytic,p_analytic,f_numeric,p_numeric\n");
    for c in &cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_f64(c.a),
            format_f64(c.t),
            opt(c.f_analytic),
            format_f64(c.p_analytic),
            opt(c.f_numeric),
            format_f64(c.p_numeric)
        ));
    }
    Ok(out)
}

pub fn fig3(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let betas = cfg.grid.beta.values();
    let copies = cfg.protocol.codes;
    let rows: Vec<Vec<(f64, f64, f64)>> = cfg
        .grid
        .j_s
        .values()
        .par_iter()
        .map(|&j| {
            let codes = build_codes(&with_strength(&cfg.code, j), copies)?;
            betas
                .iter()
                .map(|&b| Ok((j, b, ThermalSpec::new(&codes, b)?.p_beta)))
                .collect::<anyhow::Result<Vec<_>>>()
        })
        .collect::<anyhow::Result<_>>()?;
    let flat: Vec<(f64, f64, f64)> = rows.into_iter().flatten().collect();
    let (lo, hi) = flat.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.2), hi.max(r.2)));
    let summary = json!({"cells": flat.len(), "min_p_beta": lo, "max_p_beta": hi});
    let mut out = header(cfg, &summary);
    out.push_str("j_s,beta,p_beta\n");
    for (j, b, p) in flat {
        out.push_str(&format!("{},{},{}\n", format_f64(j), format_f64(b), format_f64(p)));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Fig4Cell {
    pub a: f64,
    pub t: f64,
    /// Per threshold: rounds and cumulative probability, if reached.
    pub reached: Vec<Option<(usize, f64)>>,
}

/// Repeated-round system for the configured engineered coupling.
pub fn emr_system(cfg: &ExperimentConfig) -> anyhow::Result<EmrSystem> {
    Ok(joint_model(cfg)?.emr_system()?)
}

pub fn fig4_cells(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Fig4Cell>> {
    let system = emr_system(cfg)?;
    let p = &cfg.protocol;
    grid_cells(cfg)
        .par_iter()
        .map(|&(a, t)| {
            let spec = RoundSpec::new(t, vec![MeasurementSetting::new(a, p.b, p.k)?])?;
            let traj = run_emr(&system, &spec, p.max_rounds, p.aq_reset, false)?;
            let reached =
                p.f_targets.iter().map(|&f| find_m_min(&traj, f).map(|m| (m.rounds, m.p_cumulative))).collect();
            Ok(Fig4Cell { a, t, reached })
        })
        .collect()
}

pub fn fig4(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let cells = fig4_cells(cfg)?;
    let targets = &cfg.protocol.f_targets;
    let per_target: Vec<Value> = targets
        .iter()
        .enumerate()
        .map(|(i, &ft)| {
            let missed = cells.iter().filter(|c| c.reached[i].is_none()).count();
            json!({
                "f_target": ft,
                "not_reached": missed,
                "fraction_not_reached": missed as f64 / cells.len() as f64,
            })
        })
        .collect();
    let summary = json!({"cells": cells.len(), "max_rounds": cfg.protocol.max_rounds, "sentinel": NOT_REACHED, "targets": per_target});
    let mut out = header(cfg, &summary);
    out.push_str("a,t");
    for ft in targets {
        out.push_str(&format!(",m_min_{ft},p_{ft}"));
    }
    out.push('\n');
    for c in &cells {
        out.push_str(&format!("{},{}", format_f64(c.a), format_f64(c.t)));
        for r in &c.reached {
            match r {
                Some((m, p)) => out.push_str(&format!(",{m},{}", format_f64(*p))),
                None => out.push_str(&format!(",{NOT_REACHED},{NOT_REACHED}")),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Best run of a row next to the printed values.
#[derive(Clone, Debug, Serialize)]
pub struct RowSummary {
    pub index: usize,
    pub n_system: usize,
    pub target: &'static str,
    pub variant: String,
    pub policy: logipure::emr::AqResetPolicy,
    pub aux_energy: f64,
    pub m_min: [Option<usize>; 2],
    pub probability: [Option<f64>; 2],
    pub max_fidelity: f64,
    pub printed_m_min: [usize; 2],
    pub printed_probability: [f64; 2],
    pub printed_max_fidelity: f64,
    pub delta_m_min: [Option<i64>; 2],
    pub delta_probability: [Option<f64>; 2],
    pub delta_max_fidelity: f64,
    pub matches_printed: bool,
}

pub fn summarize_row(report: &RowReport) -> RowSummary {
    let best = report.best_run();
    let printed = &report.row.printed;
    let m_min = best.m_min.map(|m| m.map(|m| m.rounds));
    let probability = best.m_min.map(|m| m.map(|m| m.p_cumulative));
    RowSummary {
        index: report.row.index,
        n_system: report.row.n_system,
        target: report.row.target.label(),
        variant: best.variant.name.clone(),
        policy: best.variant.policy,
        aux_energy: best.aux_energy,
        m_min,
        probability,
        max_fidelity: best.max_fidelity,
        printed_m_min: printed.m_min,
        printed_probability: printed.probability,
        printed_max_fidelity: printed.max_fidelity,
        delta_m_min: [0, 1].map(|i| m_min[i].map(|m| m as i64 - printed.m_min[i] as i64)),
        delta_probability: [0, 1].map(|i| probability[i].map(|p| (p - printed.probability[i]).abs())),
        delta_max_fidelity: (best.max_fidelity - printed.max_fidelity).abs(),
        matches_printed: best.matches_printed,
    }
}

#[derive(Clone, Debug, Serialize)]
struct Table1Output<'a> {
    rows: Vec<RowSummary>,
    probability_tolerance: f64,
    runs: &'a [RowReport],
    energy_scans: Vec<(usize, Vec<EnergyScanPoint>)>,
}

pub fn table1_reports(cfg: &ExperimentConfig) -> anyhow::Result<Vec<RowReport>> {
    let cal = &cfg.table1.calibration;
    select_rows(&cfg.table1.rows)?
        .par_iter()
        .map(|r| Ok(reproduce_row(r, cal)?))
        .collect()
}

pub fn table1(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let reports = table1_reports(cfg)?;
    let cal = &cfg.table1.calibration;
    let energy_scans = if cfg.table1.scan_energies.is_empty() {
        Vec::new()
    } else {
        reports
            .par_iter()
            .map(|r| Ok((r.row.index, scan_aux_energy(&r.row, cal, &cfg.table1.scan_energies)?)))
            .collect::<anyhow::Result<Vec<_>>>()?
    };
    let body = Table1Output {
        rows: reports.iter().map(summarize_row).collect(),
        probability_tolerance: PROBABILITY_TOLERANCE,
        runs: &reports,
        energy_scans,
    };
    let full = serde_json::to_value(&body)?;
    let doc = json!({
        "config": serde_json::to_value(cfg)?,
        "calibration": serde_json::to_value(cal)?,
        "report": round_json(&full, 6),
        "full_precision": full,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Rounds every float in `v` to `digits` significant digits.
pub fn round_json(v: &Value, digits: i32) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            if x == 0.0 || !x.is_finite() {
                return v.clone();
            }
            let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
            json!((x * scale).round() / scale)
        }
        Value::Array(a) => Value::Array(a.iter().map(|x| round_json(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), round_json(x, digits))).collect()),
        _ => v.clone(),
    }
}

pub fn purify_system(cfg: &ExperimentConfig) -> anyhow::Result<(EmrSystem, RoundSpec)> {
    let p = &cfg.protocol;
    match &cfg.xy {
        Some(xy) => {
            let heis = HeisenbergSpec::new(xy.setup.n_system, xy.j_s)?;
            let (zero, one) = heisenberg_logical_basis(xy.setup.n_system);
            let (c0, c1) = p.target()?.amplitudes();
            let target = zero * c0 + one * c1;
            let system = xy_emr_system(&xy.setup, &heis, p.beta, target)?;
            Ok((system, RoundSpec::new(p.t, xy.settings.clone())?))
        }
        None => Ok((emr_system(cfg)?, RoundSpec::new(p.t, vec![p.setting()?])?)),
    }
}

pub fn purify(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let (system, spec) = purify_system(cfg)?;
    let p = &cfg.protocol;
    let traj = run_emr(&system, &spec, p.max_rounds, p.aq_reset, false)?;
    let reached: Vec<Value> = p
        .f_targets
        .iter()
        .map(|&f| {
            let m = find_m_min(&traj, f);
            json!({"f_target": f, "m_min": m.map(|m| m.rounds), "p_cumulative": m.map(|m| m.p_cumulative)})
        })
        .collect();
    let summary = json!({
        "rounds": traj.rounds.len(),
        "max_fidelity": traj.max_fidelity(),
        "truncated": traj.truncated,
        "targets": reached,
    });
    Ok(header(cfg, &summary) + &traj.to_csv())
}

pub fn decompose(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Artifact>> {
    let p = &cfg.protocol;
    let codes = build_codes(&cfg.code, p.codes)?;
    let target = p.target()?;
    let h = build_interaction(&codes, &InteractionSpec::rank_one(p.g, vec![target; codes.len()]))?;
    let terms = pauli_decompose(&h, 1e-12);
    let rebuilt = logipure::pauli::pauli_reconstruct(&terms, h.n_qubits())?;
    let summary = json!({
        "terms": terms.len(),
        "n_qubits": h.n_qubits(),
        "reconstruction_error": (&rebuilt - &h).frobenius_norm(),
    });
    let mut artifacts =
        vec![Artifact { path: out.to_path_buf(), contents: header(cfg, &summary) + &decomposition_csv(&terms) }];

    let is_repetition = codes.len() == 1 && cfg.code == with_strength(&CodeDefinition::repetition(), strength(&cfg.code));
    if is_repetition {
        let printed = printed_repetition_interaction(p.g, &target);
        let report = compare_with_printed(&h, &printed, 1e-10)?;
        let full = serde_json::to_value(&report)?;
        let doc = json!({
            "config": serde_json::to_value(cfg)?,
            "report": round_json(&full, 6),
            "full_precision": full,
        });
        let mut path = out.as_os_str().to_owned();
        path.push(".comparison.json");
        artifacts.push(Artifact { path: PathBuf::from(path), contents: serde_json::to_string_pretty(&doc)? + "\n" });
    }
    Ok(artifacts)
}

fn strength(def: &CodeDefinition) -> f64 {
    match def {
        CodeDefinition::Stabilizer { j, .. } | CodeDefinition::Heisenberg { j, .. } => *j,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_significant_digits() {
        let v = json!({"a": 0.123456789, "b": [1.0e-11, 12345.6789], "c": 3, "d": "x"});
        let r = round_json(&v, 6);
        assert_eq!(r["a"], json!(0.123457));
        assert_eq!(r["b"][0], json!(1.0e-11));
        assert_eq!(r["b"][1], json!(12345.7));
        assert_eq!(r["c"], json!(3));
        assert_eq!(r["d"], json!("x"));
    }

    #[test]
    fn strength_substitution() {
        let d = with_strength(&CodeDefinition::repetition(), 2.5);
        assert_eq!(strength(&d), 2.5);
        let code = build_codes(&d, 1).unwrap();
        assert!((code[0].gap() - 10.0).abs() < 1e-12);
        assert!(build_codes(&CodeDefinition::repetition(), 4).is_err());
    }
}
