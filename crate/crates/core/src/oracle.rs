//! Closed-form work statistics of the two-level cycle whose cold isochore
//! resets the working substance to its Gibbs state.
//!
//! Levels are `e = -+omega/2`, work strokes have the two-parameter form
//! with transition probability `r` and phase `phi`, and all pointers share
//! one width `sigma`.

use crate::pointer::PointerWidth;
use crate::strokes::{BathSpec, OccupationConvention};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectCoolingParams {
    pub omega1: f64,
    pub omega2: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    /// Population relaxation rate of the hot isochore, `gamma (2 n + 1)`
    /// in terms of the bare master-equation rate.
    pub gamma_h: f64,
    pub tau_b: f64,
    pub r: f64,
    pub phi: f64,
    pub sigma: PointerWidth,
    pub convention: OccupationConvention,
}

impl PerfectCoolingParams {
    /// Parameters with the hot relaxation rate derived from the bare
    /// coupling `gamma` of the master equation.
    #[allow(clippy::too_many_arguments)]
    pub fn from_bare_rate(
        omega1: f64,
        omega2: f64,
        beta_c: f64,
        beta_h: f64,
        gamma: f64,
        tau_b: f64,
        r: f64,
        phi: f64,
        sigma: PointerWidth,
        convention: OccupationConvention,
    ) -> Self {
        let bath = BathSpec::new(beta_h, gamma, tau_b).with_convention(convention);
        Self {
            omega1,
            omega2,
            beta_c,
            beta_h,
            gamma_h: bath.effective_rate(omega2),
            tau_b,
            r,
            phi,
            sigma,
            convention,
        }
    }

    /// Excited population after the cold reset.
    pub fn n_c(&self) -> f64 {
        1.0 / ((self.beta_c * self.omega1).exp() + 1.0)
    }

    /// Excited population the hot bath relaxes towards.
    pub fn n_h(&self) -> f64 {
        BathSpec::new(self.beta_h, 1.0, self.tau_b)
            .with_convention(self.convention)
            .stationary_excited_population(self.omega2)
    }

    fn decay(&self) -> f64 {
        (-self.gamma_h * self.tau_b).exp()
    }

    fn tanh_c(&self) -> f64 {
        (self.beta_c * self.omega1 / 2.0).tanh()
    }

    fn phase(&self) -> f64 {
        (2.0 * self.phi + self.omega2 * self.tau_b).cos()
    }

    /// `exp(-omega2^2 / (4 sigma^2))`, with the exact limits.
    fn coherence_weight(&self, power: f64) -> f64 {
        match self.sigma {
            PointerWidth::Projective => 0.0,
            PointerWidth::Finite(s) => (-power * self.omega2 * self.omega2 / (4.0 * s * s)).exp(),
            PointerWidth::Infinite => 1.0,
        }
    }
}

pub fn w_avg_tpm_perfect(p: &PerfectCoolingParams) -> f64 {
    let (w1, w2, r) = (p.omega1, p.omega2, p.r);
    let (nc, nh, e) = (p.n_c(), p.n_h(), p.decay());
    (1.0 - e) * ((1.0 - 2.0 * r) * w1 - w2) * nh + (w2 * (1.0 - 2.0 * r) - w1) * nc + r * (w2 + w1)
        - e * (r + (1.0 - 2.0 * r) * nc) * (w2 - (1.0 - 2.0 * r) * w1)
}

pub fn w_avg_um_perfect(p: &PerfectCoolingParams) -> f64 {
    let coherence = 2.0 * (-0.5 * p.gamma_h * p.tau_b).exp() * p.r * (1.0 - p.r) * p.omega1 * p.phase() * p.tanh_c();
    w_avg_tpm_perfect(p) - coherence
}

/// `(<w>_S1, <w>_S2, <w>_S3)`.
pub fn w_avg_schemes_perfect(p: &PerfectCoolingParams) -> (f64, f64, f64) {
    let um = w_avg_um_perfect(p);
    let tpm = w_avg_tpm_perfect(p);
    let k = p.coherence_weight(1.0);
    let s12 = k * um + (1.0 - k) * tpm;
    (s12, s12, um)
}

/// Second cumulants of work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkVariances {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub tpm: f64,
}

/// Probability and work of each of the 16 projectively measured paths.
pub fn tpm_paths(p: &PerfectCoolingParams) -> Vec<(f64, f64)> {
    let e1 = [-p.omega1 / 2.0, p.omega1 / 2.0];
    let e2 = [-p.omega2 / 2.0, p.omega2 / 2.0];
    let start = [1.0 - p.n_c(), p.n_c()];
    let stroke = |a: usize, b: usize| if a == b { 1.0 - p.r } else { p.r };
    let (nh, decay) = (p.n_h(), p.decay());
    let heat = |from: usize, to: usize| {
        let excited = nh + (if from == 1 { 1.0 } else { 0.0 } - nh) * decay;
        if to == 1 { excited } else { 1.0 - excited }
    };
    let mut paths = Vec::with_capacity(16);
    for m1 in 0..2 {
        for m2 in 0..2 {
            for m3 in 0..2 {
                for m4 in 0..2 {
                    let prob = start[m1] * stroke(m1, m2) * heat(m2, m3) * stroke(m3, m4);
                    let work = (e2[m2] - e1[m1]) + (e1[m4] - e2[m3]);
                    paths.push((prob, work));
                }
            }
        }
    }
    paths
}

pub fn w_var_schemes_perfect(p: &PerfectCoolingParams) -> WorkVariances {
    let paths = tpm_paths(p);
    let mean: f64 = paths.iter().map(|(q, w)| q * w).sum();
    let second: f64 = paths.iter().map(|(q, w)| q * w * w).sum();
    let tpm = second - mean * mean;

    let s2 = p.sigma.variance();
    let w_tpm = w_avg_tpm_perfect(p);
    let rr = p.r * (1.0 - p.r);
    let bracket = p.omega1 * p.omega1 - 2.0 * p.omega1 * w_tpm * p.tanh_c();
    let linear = 2.0 * (-0.5 * p.gamma_h * p.tau_b).exp() * bracket * rr * p.phase();
    let quadratic = 4.0
        * (-p.gamma_h * p.tau_b).exp()
        * p.tanh_c().powi(2)
        * p.omega1.powi(2)
        * rr.powi(2)
        * p.phase().powi(2);
    let (k1, k2) = (p.coherence_weight(1.0), p.coherence_weight(2.0));
    WorkVariances {
        s1: tpm + 4.0 * s2 - k1 * linear - k2 * quadratic,
        s2: tpm + 2.0 * s2 - k1 * linear - k2 * quadratic,
        s3: tpm + s2 - linear - quadratic,
        tpm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn params(r: f64, tau_b: f64, sigma: PointerWidth) -> PerfectCoolingParams {
        PerfectCoolingParams::from_bare_rate(
            1.0,
            3.2,
            3.0,
            0.2,
            0.05,
            tau_b,
            r,
            PI / 5.0,
            sigma,
            OccupationConvention::GibbsConsistent,
        )
    }

    #[test]
    fn quasistatic_long_isochore_limit() {
        let p = params(0.0, 1e4, PointerWidth::Infinite);
        let expected = (3.2 - 1.0) * (p.n_c() - p.n_h());
        assert_abs_diff_eq!(w_avg_tpm_perfect(&p), expected, epsilon = 1e-12);
    }

    #[test]
    fn quasistatic_without_heating_does_no_work() {
        let p = params(0.0, 0.0, PointerWidth::Infinite);
        assert_abs_diff_eq!(w_avg_tpm_perfect(&p), 0.0, epsilon = 1e-15);
        assert_eq!(w_avg_um_perfect(&p), w_avg_tpm_perfect(&p));
    }

    #[test]
    fn path_enumeration_reproduces_tpm_mean() {
        for (r, tau) in [(0.0, 3.0), (0.3, 0.0), (0.3, 7.5), (0.8, 40.0)] {
            let p = params(r, tau, PointerWidth::Projective);
            let paths = tpm_paths(&p);
            assert_abs_diff_eq!(paths.iter().map(|x| x.0).sum::<f64>(), 1.0, epsilon = 1e-15);
            let mean: f64 = paths.iter().map(|(q, w)| q * w).sum();
            assert_abs_diff_eq!(mean, w_avg_tpm_perfect(&p), epsilon = 1e-13);
        }
    }

    #[test]
    fn oscillation_period() {
        let p = params(0.3, 4.0, PointerWidth::Infinite);
        let q = PerfectCoolingParams {
            tau_b: 4.0 + 2.0 * PI / 3.2,
            gamma_h: 0.0,
            ..p
        };
        let p = PerfectCoolingParams { gamma_h: 0.0, ..p };
        let d = |x: &PerfectCoolingParams| w_avg_um_perfect(x) - w_avg_tpm_perfect(x);
        assert_abs_diff_eq!(d(&p), d(&q), epsilon = 1e-12);
    }

    #[test]
    fn scheme_limits() {
        let wide = params(0.3, 5.0, PointerWidth::Infinite);
        let (s1, s2, s3) = w_avg_schemes_perfect(&wide);
        let um = w_avg_um_perfect(&wide);
        assert_eq!((s1, s2, s3), (um, um, um));
        let sharp = params(0.3, 5.0, PointerWidth::Projective);
        let (s1, s2, s3) = w_avg_schemes_perfect(&sharp);
        assert_eq!(s1, w_avg_tpm_perfect(&sharp));
        assert_eq!(s2, s1);
        assert_eq!(s3, um);
    }

    #[test]
    fn mixing_weight_at_sigma_equal_omega2() {
        let p = params(0.3, 5.0, PointerWidth::Finite(3.2));
        let (s1, _, _) = w_avg_schemes_perfect(&p);
        let k = (-0.25f64).exp();
        assert_abs_diff_eq!(k, 0.778_800_783_071_404_9, epsilon = 1e-15);
        let expected = k * w_avg_um_perfect(&p) + (1.0 - k) * w_avg_tpm_perfect(&p);
        assert_abs_diff_eq!(s1, expected, epsilon = 1e-15);
    }

    #[test]
    fn quasistatic_variances_differ_by_pointer_noise() {
        let p = params(0.0, 5.0, PointerWidth::Finite(0.7));
        let v = w_var_schemes_perfect(&p);
        assert_abs_diff_eq!(v.s1 - v.tpm, 4.0 * 0.49, epsilon = 1e-14);
        assert_abs_diff_eq!(v.s2 - v.tpm, 2.0 * 0.49, epsilon = 1e-14);
        assert_abs_diff_eq!(v.s3 - v.tpm, 0.49, epsilon = 1e-14);
    }

    #[test]
    fn large_width_ordering() {
        let v = w_var_schemes_perfect(&params(0.4, 5.0, PointerWidth::Finite(16.0)));
        assert!(v.s1 > v.s2 && v.s2 > v.s3);
    }

    #[test]
    fn projective_variances() {
        let v = w_var_schemes_perfect(&params(0.4, 5.0, PointerWidth::Projective));
        assert_eq!(v.s1, v.tpm);
        assert_eq!(v.s2, v.tpm);
        assert!((v.s3 - v.tpm).abs() > 1e-6);
    }

    #[test]
    fn coherence_term_within_envelope() {
        for i in 0..200 {
            let p = params(0.35, i as f64 * 0.2, PointerWidth::Infinite);
            let bound = 2.0 * (-p.gamma_h * p.tau_b / 2.0).exp() * 0.35 * 0.65 * (1.5f64).tanh();
            assert!((w_avg_um_perfect(&p) - w_avg_tpm_perfect(&p)).abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn printed_occupation_shifts_hot_population() {
        let mut p = params(0.3, 5.0, PointerWidth::Infinite);
        let fermi = p.n_h();
        assert_abs_diff_eq!(fermi, 1.0 / ((0.2f64 * 3.2).exp() + 1.0), epsilon = 1e-15);
        p.convention = OccupationConvention::AsPrinted;
        assert_abs_diff_eq!(p.n_h(), 1.0 / ((0.2f64 * 3.2).exp() + 3.0), epsilon = 1e-15);
    }
}
