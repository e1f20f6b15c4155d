use std::f64::consts::PI;

use approx::assert_relative_eq;
use otto_core::oracle::{
    w_avg_schemes_perfect, w_avg_tpm_perfect, w_avg_um_perfect, w_var_schemes_perfect,
    PerfectCoolingParams,
};
use otto_core::stats::scheme_cumulants;
use otto_core::strokes::{effective_transition_params, Direction, Protocol};
use otto_core::{
    BathSpec, ColdStroke, CycleBlocks, CycleSpec, OccupationConvention, PointerWidth,
    SchemeRegistry, StrokeHamiltonian,
};

const OMEGA1: f64 = 1.0;
const OMEGA2: f64 = 3.2;
const BETA_C: f64 = 3.0;
const BETA_H: f64 = 0.2;
const GAMMA: f64 = 0.05;

fn protocol_r() -> f64 {
    let p = Protocol::new(OMEGA1, OMEGA2, 3.5);
    let (h1, h2) = p.endpoints().unwrap();
    effective_transition_params(&p.unitary(Direction::Compression).unwrap(), &h1, &h2)
        .unwrap()
        .r
}

fn blocks(r: f64, phi: f64, tau_b: f64, convention: OccupationConvention) -> CycleBlocks {
    let cycle = CycleSpec::parametric(
        StrokeHamiltonian::two_level(OMEGA1).unwrap(),
        StrokeHamiltonian::two_level(OMEGA2).unwrap(),
        r,
        phi,
        BathSpec::new(BETA_H, GAMMA, tau_b).with_convention(convention),
        ColdStroke::PerfectReset { beta: BETA_C },
    )
    .unwrap();
    CycleBlocks::new(&cycle).unwrap()
}

fn oracle(r: f64, phi: f64, tau_b: f64, sigma: PointerWidth, convention: OccupationConvention) -> PerfectCoolingParams {
    PerfectCoolingParams::from_bare_rate(OMEGA1, OMEGA2, BETA_C, BETA_H, GAMMA, tau_b, r, phi, sigma, convention)
}

fn pipeline_w(b: &CycleBlocks, name: &str, sigma: PointerWidth) -> (f64, f64) {
    let reg = SchemeRegistry::with_builtin();
    let config = reg.uniform(name, sigma).unwrap();
    let ss = b.steady_state(&config).unwrap();
    let c = scheme_cumulants(b, &config, &ss).unwrap();
    (c.w, c.w2c)
}

#[test]
fn averages_match_closed_forms_at_zero_phase() {
    let r = protocol_r();
    for convention in [OccupationConvention::GibbsConsistent, OccupationConvention::AsPrinted] {
        for tau_b in [0.0, 3.7, 12.0, 31.5] {
            let b = blocks(r, 0.0, tau_b, convention);
            for sigma in [PointerWidth::Projective, PointerWidth::Finite(0.5), PointerWidth::Finite(5.0), PointerWidth::Infinite] {
                let p = oracle(r, 0.0, tau_b, sigma, convention);
                let (s1, s2, s3) = w_avg_schemes_perfect(&p);
                assert_relative_eq!(pipeline_w(&b, "TPM", sigma).0, w_avg_tpm_perfect(&p), max_relative = 1e-8);
                assert_relative_eq!(pipeline_w(&b, "UM", sigma).0, w_avg_um_perfect(&p), max_relative = 1e-8);
                assert_relative_eq!(pipeline_w(&b, "S1", sigma).0, s1, max_relative = 1e-8);
                assert_relative_eq!(pipeline_w(&b, "S2", sigma).0, s2, max_relative = 1e-8);
                assert_relative_eq!(pipeline_w(&b, "S3", sigma).0, s3, max_relative = 1e-8);
            }
        }
    }
}

#[test]
fn variances_match_closed_forms_at_zero_phase() {
    let r = protocol_r();
    for tau_b in [0.0, 3.7, 12.0, 31.5] {
        let b = blocks(r, 0.0, tau_b, OccupationConvention::GibbsConsistent);
        for sigma in [PointerWidth::Projective, PointerWidth::Finite(0.5), PointerWidth::Finite(5.0)] {
            let v = w_var_schemes_perfect(&oracle(r, 0.0, tau_b, sigma, OccupationConvention::GibbsConsistent));
            assert_relative_eq!(pipeline_w(&b, "TPM", sigma).1, v.tpm, max_relative = 1e-8);
            assert_relative_eq!(pipeline_w(&b, "S1", sigma).1, v.s1, max_relative = 1e-8);
            assert_relative_eq!(pipeline_w(&b, "S2", sigma).1, v.s2, max_relative = 1e-8);
            assert_relative_eq!(pipeline_w(&b, "S3", sigma).1, v.s3, max_relative = 1e-8);
        }
    }
}

/// With `U_2 = U_1^dag` the coherence term does not depend on the stroke
/// phase, so the pipeline at any phase agrees with the closed form at zero phase.
#[test]
fn unmonitored_work_is_phase_independent() {
    let r = 0.37;
    for tau_b in [1.0, 6.5, 20.0] {
        let b = blocks(r, PI / 5.0, tau_b, OccupationConvention::GibbsConsistent);
        let p = oracle(r, 0.0, tau_b, PointerWidth::Infinite, OccupationConvention::GibbsConsistent);
        assert_relative_eq!(pipeline_w(&b, "UM", PointerWidth::Infinite).0, w_avg_um_perfect(&p), max_relative = 1e-8);
    }
}

#[test]
fn s3_mean_is_width_independent() {
    let b = blocks(0.3, 0.0, 9.0, OccupationConvention::GibbsConsistent);
    let reference = pipeline_w(&b, "S3", PointerWidth::Infinite).0;
    for sigma in [PointerWidth::Projective, PointerWidth::Finite(0.1), PointerWidth::Finite(2.0)] {
        assert_relative_eq!(pipeline_w(&b, "S3", sigma).0, reference, max_relative = 1e-12);
    }
}
