//! Joint work and hot-heat statistics of a monitored cycle, as exact
//! Gaussian mixtures, plus state diagnostics.
//!
//! Sign convention: `w` is the work done on the working substance over one
//! cycle and `q_h` the heat it absorbs from the hot bath.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{OttoError, Result};
use crate::linops::{hermitian_eigen, ComplexMatrix, DensityMatrix, C64};
use crate::pointer::Mixture1D;
use crate::schemes::{CycleBlocks, CycleSpec, Covariance, IndexPair, SchemeConfig};
use crate::strokes::StrokeHamiltonian;

const WEIGHT_SUM_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-12;
const KL_CLAMP: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-15;

/// Work and heat carried by one block `S^{m,m'}`, with the per-stroke
/// values of path `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkHeatValues {
    /// `sum_k (-1)^k (e_{m_k} + e_{m_k'})`.
    pub w: f64,
    /// `(e_{m3} + e_{m3'}) - (e_{m2} + e_{m2'})`.
    pub q_h: f64,
    pub w1: f64,
    pub q1: f64,
    pub w3: f64,
}

impl WorkHeatValues {
    pub fn new(cycle: &CycleSpec, pair: &IndexPair) -> Self {
        let a = cycle.path_energies(&pair.m);
        let b = cycle.path_energies(&pair.mp);
        let sign = [-1.0, 1.0, -1.0, 1.0];
        let w = (0..4).map(|k| sign[k] * (a[k] + b[k])).sum();
        Self {
            w,
            q_h: (a[2] + b[2]) - (a[1] + b[1]),
            w1: a[1] - a[0],
            q1: a[2] - a[1],
            w3: a[3] - a[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    /// `(w, q_h)`.
    pub mean: [f64; 2],
}

/// Mixture of normal components sharing one covariance. A zero covariance
/// gives a discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture2D {
    pub components: Vec<Component>,
    pub cov: Covariance,
}

impl GaussianMixture2D {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn is_discrete(&self) -> bool {
        self.cov == [[0.0; 2]; 2]
    }

    /// Joint density at `(w, q)`; requires a nonsingular covariance.
    pub fn density(&self, w: f64, q: f64) -> Result<f64> {
        let [[a, c], [_, b]] = self.cov;
        let det = a * b - c * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(OttoError::ImproperDistribution);
        }
        let norm = 1.0 / (2.0 * PI * det.sqrt());
        Ok(self
            .components
            .iter()
            .map(|comp| {
                let (x, y) = (w - comp.mean[0], q - comp.mean[1]);
                let quad = (b * x * x - 2.0 * c * x * y + a * y * y) / det;
                comp.weight * norm * (-0.5 * quad).exp()
            })
            .sum())
    }

    /// Merges components with equal means (to `tol`), sorted by mean.
    pub fn support(&self, tol: f64) -> Vec<Component> {
        let mut sorted = self.components.clone();
        sorted.sort_by(|x, y| x.mean[0].total_cmp(&y.mean[0]).then(x.mean[1].total_cmp(&y.mean[1])));
        let mut out: Vec<Component> = Vec::new();
        for c in sorted {
            match out.iter_mut().find(|o| {
                (o.mean[0] - c.mean[0]).abs() <= tol && (o.mean[1] - c.mean[1]).abs() <= tol
            }) {
                Some(o) => o.weight += c.weight,
                None => out.push(c),
            }
        }
        out
    }
}

fn merged_weights(
    blocks: &CycleBlocks,
    config: &SchemeConfig,
    rho: &DensityMatrix,
) -> Result<Vec<(IndexPair, f64)>> {
    let raw: BTreeMap<IndexPair, C64> = blocks.weighted_traces(config, rho)?.into_iter().collect();
    let mut out = Vec::with_capacity(raw.len());
    for (pair, weight) in &raw {
        if pair.is_diagonal() {
            if weight.im.abs() > IMAG_TOL {
                return Err(OttoError::ComplexWeight { imag: weight.im });
            }
            out.push((*pair, weight.re));
        } else if pair.m < pair.mp {
            let partner = raw.get(&pair.swapped()).copied().unwrap_or_default();
            let merged = weight + partner;
            if merged.im.abs() > IMAG_TOL {
                return Err(OttoError::ComplexWeight { imag: merged.im });
            }
            out.push((*pair, merged.re));
        }
    }
    let sum: f64 = out.iter().map(|(_, w)| w).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(OttoError::WeightSum { sum });
    }
    Ok(out)
}

fn no_record(config: &SchemeConfig) -> OttoError {
    OttoError::NoMeasurementRecord(config.name().to_string())
}

/// Joint distribution of `(w, q_h)` under `config`, given the steady state.
pub fn joint_distribution(
    blocks: &CycleBlocks,
    config: &SchemeConfig,
    rho_ss: &DensityMatrix,
) -> Result<GaussianMixture2D> {
    let cov = config.noise_covariance().ok_or_else(|| no_record(config))?;
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(OttoError::ImproperDistribution);
    }
    let components = merged_weights(blocks, config, rho_ss)?
        .into_iter()
        .map(|(pair, weight)| {
            let v = WorkHeatValues::new(blocks.cycle(), &pair);
            Component {
                weight,
                mean: [v.w / 2.0, v.q_h / 2.0],
            }
        })
        .collect();
    Ok(GaussianMixture2D { components, cov })
}

/// `sum_i p_i exp(i k . mu_i - k C k / 2)`.
pub fn characteristic_function(dist: &GaussianMixture2D, k1: f64, k2: f64) -> C64 {
    let [[a, c], [_, b]] = dist.cov;
    let damping = (-0.5 * (a * k1 * k1 + 2.0 * c * k1 * k2 + b * k2 * k2)).exp();
    dist.components
        .iter()
        .map(|comp| C64::from_polar(comp.weight * damping, k1 * comp.mean[0] + k2 * comp.mean[1]))
        .sum()
}

/// `E[X^i Y^j]` for a zero-mean normal pair with covariance `cov`.
fn central_moment(i: u32, j: u32, cov: &Covariance) -> f64 {
    let [[a, c], [_, b]] = *cov;
    match (i, j) {
        (0, 0) => 1.0,
        (0, _) if j % 2 == 1 => 0.0,
        (0, _) => (j - 1) as f64 * b * central_moment(0, j - 2, cov),
        _ => {
            let mut acc = 0.0;
            if i >= 2 {
                acc += (i - 1) as f64 * a * central_moment(i - 2, j, cov);
            }
            if j >= 1 {
                acc += j as f64 * c * central_moment(i - 1, j - 1, cov);
            }
            acc
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Raw moment `<w^n q_h^m>` for `n + m <= 4`.
pub fn moments(dist: &GaussianMixture2D, n: u32, m: u32) -> Result<f64> {
    if n + m > 4 {
        return Err(OttoError::UnsupportedMomentOrder { n: n as usize, m: m as usize });
    }
    let mut total = 0.0;
    for comp in &dist.components {
        let [mu, nu] = comp.mean;
        let mut value = 0.0;
        for i in 0..=n {
            for j in 0..=m {
                let central = central_moment(i, j, &dist.cov);
                if central != 0.0 {
                    value += binomial(n, i)
                        * binomial(m, j)
                        * mu.powi((n - i) as i32)
                        * nu.powi((m - j) as i32)
                        * central;
                }
            }
        }
        total += comp.weight * value;
    }
    Ok(total)
}

/// `<w>`, `<w^2>_c` and `<q_h>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulants {
    pub w: f64,
    pub w2c: f64,
    pub q_h: f64,
}

pub fn cumulants(dist: &GaussianMixture2D) -> Cumulants {
    let w = moments(dist, 1, 0).expect("order 1");
    let w2 = moments(dist, 2, 0).expect("order 2");
    Cumulants {
        w,
        w2c: w2 - w * w,
        q_h: moments(dist, 0, 1).expect("order 1"),
    }
}

/// Integrates out `q_h`.
pub fn marginal_work(dist: &GaussianMixture2D) -> Mixture1D {
    Mixture1D {
        weights: dist.components.iter().map(|c| c.weight).collect(),
        means: dist.components.iter().map(|c| c.mean[0]).collect(),
        sigma: dist.cov[0][0].sqrt(),
    }
}

/// Unmonitored `<w>` and `<q_h>` from the energy changes across each stroke.
pub fn unmonitored_averages(blocks: &CycleBlocks, rho: &DensityMatrix) -> Result<(f64, f64)> {
    let cycle = blocks.cycle();
    let (u1, u2) = blocks.unitaries();
    let rho1 = rho.matrix();
    let rho2: ComplexMatrix = u1 * rho1 * u1.adjoint();
    let rho3 = blocks.hot_channel().apply_matrix(&rho2)?;
    let rho4: ComplexMatrix = u2 * &rho3 * u2.adjoint();
    let energy = |h: &StrokeHamiltonian, r: &ComplexMatrix| (h.matrix() * r).trace().re;
    let (h1, h2) = (&cycle.h1, &cycle.h2);
    let w = energy(h2, &rho2) - energy(h1, rho1) + energy(h1, &rho4) - energy(h2, &rho3);
    let q = energy(h2, &rho3) - energy(h2, &rho2);
    Ok((w, q))
}

/// Cumulants of any scheme, including the unmonitored cycle (no variance)
/// and infinitely wide pointers (infinite variance).
pub fn scheme_cumulants(
    blocks: &CycleBlocks,
    config: &SchemeConfig,
    rho_ss: &DensityMatrix,
) -> Result<Cumulants> {
    let Some(cov) = config.noise_covariance() else {
        let (w, q_h) = unmonitored_averages(blocks, rho_ss)?;
        return Ok(Cumulants {
            w,
            w2c: f64::NAN,
            q_h,
        });
    };
    if cov.iter().flatten().all(|v| v.is_finite()) {
        return Ok(cumulants(&joint_distribution(blocks, config, rho_ss)?));
    }
    let (mut w, mut w2, mut q) = (0.0, 0.0, 0.0);
    for (pair, weight) in merged_weights(blocks, config, rho_ss)? {
        let v = WorkHeatValues::new(blocks.cycle(), &pair);
        w += weight * v.w / 2.0;
        w2 += weight * (v.w / 2.0).powi(2);
        q += weight * v.q_h / 2.0;
    }
    Ok(Cumulants {
        w,
        w2c: w2 - w * w + cov[0][0],
        q_h: q,
    })
}

/// Quantum relative entropy `Tr[rho (ln rho - ln reference)]`.
pub fn kl_divergence(rho: &DensityMatrix, reference: &DensityMatrix) -> Result<f64> {
    if rho.dim() != reference.dim() {
        return Err(OttoError::DimensionMismatch {
            expected: reference.dim(),
            got: rho.dim(),
        });
    }
    let (p, _) = hermitian_eigen(rho.matrix());
    let (q, vectors) = hermitian_eigen(reference.matrix());
    if q[0] <= SINGULAR_TOL {
        return Err(OttoError::SingularReference { min_eigenvalue: q[0] });
    }
    let entropy_term: f64 = p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
    let rotated = vectors.adjoint() * rho.matrix() * &vectors;
    let cross: f64 = q.iter().enumerate().map(|(i, qi)| rotated[(i, i)].re * qi.ln()).sum();
    let kl = entropy_term - cross;
    Ok(if (-KL_CLAMP..0.0).contains(&kl) { 0.0 } else { kl })
}

/// `sum_{m != m'} |<m|rho|m'>|` in the eigenbasis of `h`.
pub fn l1_coherence(rho: &DensityMatrix, h: &StrokeHamiltonian) -> f64 {
    let m = h.in_eigenbasis(rho.matrix());
    let mut total = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::c64;
    use crate::pointer::PointerWidth;
    use crate::schemes::SchemeRegistry;
    use crate::strokes::{gibbs_state, BathSpec, ColdStroke};
    use approx::assert_abs_diff_eq;

    fn cycle() -> CycleSpec {
        CycleSpec::parametric(
            StrokeHamiltonian::pauli(1.0, 0.5).unwrap(),
            StrokeHamiltonian::pauli(3.2, 0.5).unwrap(),
            0.35,
            0.9,
            BathSpec::new(0.2, 0.05, 7.0),
            ColdStroke::Bath(BathSpec::new(3.0, 0.05, 7.0)),
        )
        .unwrap()
    }

    fn single(mean: [f64; 2], cov: Covariance) -> GaussianMixture2D {
        GaussianMixture2D {
            components: vec![Component { weight: 1.0, mean }],
            cov,
        }
    }

    #[test]
    fn diagonal_pairs_reproduce_trajectory_work() {
        let c = cycle();
        for pair in IndexPair::all(2).filter(IndexPair::is_diagonal) {
            let v = WorkHeatValues::new(&c, &pair);
            assert_abs_diff_eq!(v.w / 2.0, v.w1 + v.w3, epsilon = 1e-14);
            assert_abs_diff_eq!(v.q_h / 2.0, v.q1, epsilon = 1e-14);
        }
    }

    #[test]
    fn dirac_component_moments() {
        let d = single([1.5, -0.5], [[0.0; 2]; 2]);
        assert_eq!(moments(&d, 1, 0).unwrap(), 1.5);
        assert_eq!(moments(&d, 2, 2).unwrap(), 1.5 * 1.5 * 0.25);
        let chi = characteristic_function(&d, 0.3, 0.7);
        assert_abs_diff_eq!((chi - C64::from_polar(1.0, 0.3 * 1.5 - 0.7 * 0.5)).norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(moments(&d, 3, 2), Err(OttoError::UnsupportedMomentOrder { .. })));
    }

    #[test]
    fn gaussian_moments_follow_isserlis() {
        let (a, b, c) = (0.7, 0.4, -0.2);
        let d = single([0.0, 0.0], [[a, c], [c, b]]);
        assert_abs_diff_eq!(moments(&d, 4, 0).unwrap(), 3.0 * a * a, epsilon = 1e-15);
        assert_abs_diff_eq!(moments(&d, 2, 2).unwrap(), a * b + 2.0 * c * c, epsilon = 1e-15);
        assert_abs_diff_eq!(moments(&d, 3, 1).unwrap(), 3.0 * a * c, epsilon = 1e-15);
        assert_abs_diff_eq!(moments(&d, 1, 1).unwrap(), c, epsilon = 1e-15);
        assert_eq!(moments(&d, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn um_has_no_distribution() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let reg = SchemeRegistry::with_builtin();
        let um = reg.uniform("UM", PointerWidth::Infinite).unwrap();
        let ss = blocks.steady_state(&um).unwrap();
        assert!(matches!(
            joint_distribution(&blocks, &um, &ss),
            Err(OttoError::NoMeasurementRecord(_))
        ));
        let s1 = reg.uniform("S1", PointerWidth::Infinite).unwrap();
        assert!(matches!(joint_distribution(&blocks, &s1, &ss), Err(OttoError::ImproperDistribution)));
    }

    #[test]
    fn distributions_are_normalized_with_real_weights() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let reg = SchemeRegistry::with_builtin();
        for name in ["TPM", "S1", "S2", "S3"] {
            let config = reg.uniform(name, PointerWidth::Finite(0.8)).unwrap();
            let ss = blocks.steady_state(&config).unwrap();
            let dist = joint_distribution(&blocks, &config, &ss).unwrap();
            assert_abs_diff_eq!(dist.total_weight(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(characteristic_function(&dist, 0.0, 0.0).re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn tpm_support_is_classical_paths() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let config = SchemeRegistry::with_builtin().uniform("TPM", PointerWidth::Projective).unwrap();
        let ss = blocks.steady_state(&config).unwrap();
        let dist = joint_distribution(&blocks, &config, &ss).unwrap();
        assert!(dist.is_discrete());
        assert_eq!(dist.components.len(), 16);
        assert!(dist.components.iter().all(|c| c.weight >= -1e-15));
    }

    #[test]
    fn s1_covariance_sign() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let widths: Vec<_> = [0.3, 0.5, 0.7, 0.9].map(PointerWidth::Finite).to_vec();
        let config = SchemeRegistry::with_builtin().config("S1", widths).unwrap();
        let ss = blocks.steady_state(&config).unwrap();
        let dist = joint_distribution(&blocks, &config, &ss).unwrap();
        assert_abs_diff_eq!(dist.cov[0][1], -(0.25 + 0.49), epsilon = 1e-15);
    }

    #[test]
    fn marginal_preserves_weights_and_mean() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let config = SchemeRegistry::with_builtin().uniform("S2", PointerWidth::Finite(0.4)).unwrap();
        let ss = blocks.steady_state(&config).unwrap();
        let dist = joint_distribution(&blocks, &config, &ss).unwrap();
        let marginal = marginal_work(&dist);
        assert_abs_diff_eq!(marginal.total_weight(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(marginal.mean(), moments(&dist, 1, 0).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(marginal.sigma, (2.0 * 0.16f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn wide_pointer_mean_equals_unmonitored_bookkeeping() {
        let c = cycle();
        let blocks = CycleBlocks::new(&c).unwrap();
        let reg = SchemeRegistry::with_builtin();
        let um = reg.uniform("UM", PointerWidth::Infinite).unwrap();
        let ss = blocks.steady_state(&um).unwrap();
        let (w_um, q_um) = unmonitored_averages(&blocks, &ss).unwrap();
        let s1 = scheme_cumulants(&blocks, &reg.uniform("S1", PointerWidth::Infinite).unwrap(), &ss).unwrap();
        assert_abs_diff_eq!(s1.w, w_um, epsilon = 1e-12);
        assert_abs_diff_eq!(s1.q_h, q_um, epsilon = 1e-12);
        assert!(s1.w2c.is_infinite());
        let um_c = scheme_cumulants(&blocks, &um, &ss).unwrap();
        assert!(um_c.w2c.is_nan());
    }

    #[test]
    fn kl_basics() {
        let h = StrokeHamiltonian::two_level(1.0).unwrap();
        let g = gibbs_state(&h, 3.0).unwrap();
        assert_eq!(kl_divergence(&g, &g).unwrap(), 0.0);
        let pure = DensityMatrix::new(h.projector(0)).unwrap();
        assert!(matches!(kl_divergence(&g, &pure), Err(OttoError::SingularReference { .. })));
        // Classical case: populations only.
        let m = DensityMatrix::maximally_mixed(2);
        let p = 1.0 / (1.0 + 3f64.exp());
        let expected = -(2f64).ln() - 0.5 * (p.ln() + (1.0 - p).ln());
        assert_abs_diff_eq!(kl_divergence(&m, &g).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn l1_basics() {
        let h = StrokeHamiltonian::two_level(1.0).unwrap();
        assert_eq!(l1_coherence(&DensityMatrix::maximally_mixed(2), &h), 0.0);
        let plus = ComplexMatrix::from_element(2, 2, c64(0.5));
        assert_abs_diff_eq!(l1_coherence(&DensityMatrix::new(plus).unwrap(), &h), 1.0, epsilon = 1e-15);
    }
}
