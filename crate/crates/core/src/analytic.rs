//! Closed-form probabilities and fidelities of single-round purification.

use serde::Serialize;

use crate::codes::CodeModel;
use crate::error::{Error, Result};
use crate::measurement::UNATTAINABLE;
use crate::thermal::{coefficients_p, ResonanceContext, ThermalSpec};

/// `prod_i exp(-beta dE_i) / Z_i`
pub fn p_beta(codes: &[CodeModel], beta: f64) -> Result<f64> {
    Ok(ThermalSpec::new(codes, beta)?.p_beta)
}

/// `sigma^z` success probability `p_1(t)` for arbitrary detuning.
pub fn p_plus_general(ctx: &ResonanceContext, thermal: &ThermalSpec, t: f64) -> Result<f64> {
    Ok(coefficients_p(ctx, thermal, t)?.p1)
}

/// Success probability of the `(a, b, +1)` measurement for arbitrary detuning.
/// Cross terms vanish because the target and excited states are orthogonal,
/// so `b` drops out.
pub fn p_plus_detuned(a: f64, ctx: &ResonanceContext, thermal: &ThermalSpec, t: f64) -> Result<f64> {
    let k = coefficients_p(ctx, thermal, t)?;
    let (s2, c2) = half_angle(a);
    Ok(k.p1 * s2 + (k.p0 + 1.0 - thermal.p_beta) * c2)
}

/// Post-selected fidelity of the `(a, b, +1)` measurement for arbitrary detuning.
pub fn f_plus_detuned(a: f64, ctx: &ResonanceContext, thermal: &ThermalSpec, t: f64) -> Result<f64> {
    let p = p_plus_detuned(a, ctx, thermal, t)?;
    if p < UNATTAINABLE {
        return Err(Error::InvalidParameter(format!("zero-probability point (p = {p:.3e})")));
    }
    let k = coefficients_p(ctx, thermal, t)?;
    let (s2, c2) = half_angle(a);
    Ok((k.p1 * s2 + c2 / thermal.z_total) / p)
}

fn half_angle(a: f64) -> (f64, f64) {
    let s = (a / 2.0).sin();
    let c = (a / 2.0).cos();
    (s * s, c * c)
}

/// Resonant success probability
/// `p_beta [sin^2(gt) sin^2(a/2) + cos^2(gt) cos^2(a/2)] + (1 - p_beta) cos^2(a/2)`.
pub fn p_plus_resonant(a: f64, t: f64, g: f64, p_beta: f64) -> f64 {
    let (s2, c2) = half_angle(a);
    let st = (g * t).sin().powi(2);
    let ct = (g * t).cos().powi(2);
    p_beta * (st * s2 + ct * c2) + (1.0 - p_beta) * c2
}

/// Resonant post-selected fidelity
/// `[Z_L^{-1} cos^2(a/2) + p_beta sin^2(gt) sin^2(a/2)] / p`.
pub fn f_plus_resonant(a: f64, t: f64, g: f64, beta: f64, codes: &[CodeModel]) -> Result<f64> {
    let th = ThermalSpec::new(codes, beta)?;
    f_plus_resonant_with(a, t, g, &th)
}

pub fn f_plus_resonant_with(a: f64, t: f64, g: f64, thermal: &ThermalSpec) -> Result<f64> {
    let p = p_plus_resonant(a, t, g, thermal.p_beta);
    if p < UNATTAINABLE {
        return Err(Error::InvalidParameter(format!("zero-probability point (p = {p:.3e})")));
    }
    let (s2, c2) = half_angle(a);
    Ok((c2 / thermal.z_total + thermal.p_beta * (g * t).sin().powi(2) * s2) / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InversionResult {
    /// Measurement angle reaching the requested fidelity, if one exists.
    pub a: Option<f64>,
    /// Positivity discriminant `B`.
    pub b: f64,
    /// Argument of the arc cosine, `sqrt((1 - f)(1 - cos 2gt) / B)` when `B > 0`.
    pub arccos_argument: Option<f64>,
}

/// Measurement angle `a` giving resonant fidelity `f_target`:
/// `a = 2 arccos[sqrt((1 - f)(1 - cos 2gt) / B)]` with
/// `B = 2 e^{beta sum dE} Z_L f - 2 [e^{beta sum dE} - (1 - 2f) sin^2 gt]`.
///
/// Holds for any codes whose ground energy is zero; identical repetition
/// codes are just the common case.
pub fn a_for_fidelity(f_target: f64, g: f64, t: f64, beta: f64, codes: &[CodeModel]) -> Result<InversionResult> {
    if !(f_target > 0.0 && f_target <= 1.0) {
        return Err(Error::InvalidParameter(format!("target fidelity {f_target} outside (0, 1]")));
    }
    let th = ThermalSpec::new(codes, beta)?;
    let delta: f64 = codes.iter().map(CodeModel::gap).sum();
    let boltz = (beta * delta).exp();
    let s = (g * t).sin().powi(2);
    let b = 2.0 * boltz * th.z_total * f_target - 2.0 * (boltz - (1.0 - 2.0 * f_target) * s);
    let one_minus_cos = 1.0 - (2.0 * g * t).cos();
    if b <= 0.0 || one_minus_cos < 1e-12 {
        return Ok(InversionResult { a: None, b, arccos_argument: None });
    }
    let arg = ((1.0 - f_target) * one_minus_cos / b).sqrt();
    if arg > 1.0 {
        return Ok(InversionResult { a: None, b, arccos_argument: Some(arg) });
    }
    Ok(InversionResult { a: Some(2.0 * arg.acos()), b, arccos_argument: Some(arg) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_heisenberg_code, build_repetition_code, HeisenbergSpec};
    use std::f64::consts::PI;

    fn rep() -> CodeModel {
        build_repetition_code(1.0).unwrap()
    }

    #[test]
    fn p_beta_values() {
        assert!((p_beta(&[rep()], 0.0).unwrap() - 0.125).abs() < 1e-15);
        let z = 2.0 + 6.0 * (-0.4f64).exp();
        let single = p_beta(&[rep()], 0.1).unwrap();
        assert!((single - (-0.4f64).exp() / z).abs() < 1e-15);
        assert!((single - 0.1113).abs() < 5e-5);
        assert!((p_beta(&[rep(), rep()], 0.1).unwrap() - single * single).abs() < 1e-15);
        assert!((p_beta(&[rep(), rep()], 0.0).unwrap() - 1.0 / 64.0).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..40 {
            let p = p_beta(&[rep()], i as f64 * 0.1).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn resonant_special_cases() {
        let th = ThermalSpec::new(&[rep()], 0.1).unwrap();
        let ctx = ResonanceContext::new(4.0, 4.0, 1.0);
        for i in 0..30 {
            let t = 0.05 + i as f64 * 0.3;
            let pa = p_plus_resonant(PI, t, 1.0, th.p_beta);
            assert!((pa - th.p_beta * t.sin().powi(2)).abs() < 1e-15);
            assert!((pa - p_plus_general(&ctx, &th, t).unwrap()).abs() < 1e-12);
            assert!((f_plus_resonant_with(PI, t, 1.0, &th).unwrap() - 1.0).abs() < 1e-14);
            for a in [0.3, 1.4, 2.9] {
                let p = p_plus_resonant(a, t, 1.0, th.p_beta);
                assert!((p - p_plus_detuned(a, &ctx, &th, t).unwrap()).abs() < 1e-12);
                let f = f_plus_resonant_with(a, t, 1.0, &th).unwrap();
                assert!((f - f_plus_detuned(a, &ctx, &th, t).unwrap()).abs() < 1e-12);
            }
        }
        assert!((p_plus_resonant(0.0, 0.0, 1.0, th.p_beta) - 1.0).abs() < 1e-15);
        assert!(p_plus_general(&ctx, &th, 0.0).unwrap().abs() < 1e-15);
        assert!(f_plus_resonant_with(PI, 0.0, 1.0, &th).is_err());
    }

    #[test]
    fn cold_limit_of_a_zero_fidelity() {
        let f = f_plus_resonant(0.0, 0.8, 1.0, 100.0, &[rep()]).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_peaks_at_quarter_periods() {
        let th = ThermalSpec::new(&[rep()], 0.1).unwrap();
        let a = 1.5;
        let at_peak = f_plus_resonant_with(a, PI / 2.0, 1.0, &th).unwrap();
        for i in 1..100 {
            let t = i as f64 * PI / 100.0;
            assert!(f_plus_resonant_with(a, t, 1.0, &th).unwrap() <= at_peak + 1e-15);
        }
    }

    #[test]
    fn fig2_region_exists() {
        let th = ThermalSpec::new(&[rep()], 0.1).unwrap();
        let mut best = 0.0f64;
        for i in 0..=50 {
            for j in 0..=50 {
                let a = PI * i as f64 / 50.0;
                let t = 10.0 * j as f64 / 50.0;
                if p_plus_resonant(a, t, 1.0, th.p_beta) > 0.0 {
                    if let Ok(f) = f_plus_resonant_with(a, t, 1.0, &th) {
                        if a < PI {
                            best = best.max(f);
                        }
                    }
                }
            }
        }
        assert!(best >= 0.9);
    }

    #[test]
    fn inversion_round_trip_and_boundaries() {
        let codes = [rep()];
        let r = a_for_fidelity(0.9, 1.0, PI / 4.0, 0.1, &codes).unwrap();
        let a = r.a.expect("solution exists");
        assert!(r.b > 0.0);
        assert!((f_plus_resonant(a, PI / 4.0, 1.0, 0.1, &codes).unwrap() - 0.9).abs() <= 1e-8);

        for t in [0.3, 1.0, 2.2] {
            let r = a_for_fidelity(1.0, 1.0, t, 0.1, &codes).unwrap();
            assert!((r.a.unwrap() - PI).abs() < 1e-12);
        }
        let r = a_for_fidelity(0.8, 1.0, PI, 0.1, &codes).unwrap();
        assert!(r.a.is_none());
        assert!(a_for_fidelity(0.0, 1.0, 1.0, 0.1, &codes).is_err());

        // Targets below the a = 0 fidelity have B <= 0 at high temperature.
        let r = a_for_fidelity(0.01, 1.0, 1.0, 0.0, &codes).unwrap();
        assert!(r.b <= 0.0 && r.a.is_none());
    }

    #[test]
    fn inversion_general_codes() {
        let codes = [build_heisenberg_code(&HeisenbergSpec::new(4, 1.0).unwrap()).unwrap()];
        let th = ThermalSpec::new(&codes, 0.5).unwrap();
        for (f, t) in [(0.7, 0.5), (0.95, 1.2)] {
            let r = a_for_fidelity(f, 1.0, t, 0.5, &codes).unwrap();
            let a = r.a.unwrap();
            assert!((f_plus_resonant_with(a, t, 1.0, &th).unwrap() - f).abs() <= 1e-8);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn inversion_round_trip(f in 0.2f64..1.0, t in 0.05f64..3.0, beta in 0.0f64..1.5) {
                let codes = [rep()];
                let r = a_for_fidelity(f, 1.0, t, beta, &codes).unwrap();
                if let Some(a) = r.a {
                    prop_assert!(r.b > 0.0);
                    let back = f_plus_resonant(a, t, 1.0, beta, &codes).unwrap();
                    prop_assert!((back - f).abs() <= 1e-8);
                }
            }

            #[test]
            fn resonant_values_in_unit_interval(a in 0.0f64..PI, t in 0.0f64..10.0, beta in 0.0f64..3.0) {
                let th = ThermalSpec::new(&[rep()], beta).unwrap();
                let p = p_plus_resonant(a, t, 1.0, th.p_beta);
                prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
                if let Ok(f) = f_plus_resonant_with(a, t, 1.0, &th) {
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
                }
            }
        }
    }
}
