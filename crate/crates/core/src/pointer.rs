//! Gaussian pointer measurements of the system energy.
//!
//! A pointer prepared in a zero-mean Gaussian of width `sigma` is shifted by
//! the measured energy. Tracing it out leaves the populations in the energy
//! eigenbasis intact and damps each coherence by `exp(-gap^2 / (8 sigma^2))`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{OttoError, Result};
use crate::linops::{c64, sandwich, Channel, ComplexMatrix, DensityMatrix};
use crate::strokes::StrokeHamiltonian;

/// Energies closer than this are treated as one level by the projective branch.
const LEVEL_TOL: f64 = 1e-12;

/// Pointer width, with the projective and no-measurement limits kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PointerWidth {
    /// `sigma = 0`: projective energy measurement.
    Projective,
    Finite(f64),
    /// `sigma = inf`: the pointer carries no information.
    #[default]
    Infinite,
}

impl PointerWidth {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma == 0.0 {
            Ok(PointerWidth::Projective)
        } else if sigma == f64::INFINITY {
            Ok(PointerWidth::Infinite)
        } else if sigma > 0.0 && sigma.is_finite() {
            Ok(PointerWidth::Finite(sigma))
        } else {
            Err(OttoError::InvalidParameter(format!(
                "pointer width must be >= 0 or inf, got {sigma}"
            )))
        }
    }

    pub fn sigma(self) -> f64 {
        match self {
            PointerWidth::Projective => 0.0,
            PointerWidth::Finite(s) => s,
            PointerWidth::Infinite => f64::INFINITY,
        }
    }

    pub fn variance(self) -> f64 {
        let s = self.sigma();
        s * s
    }
}

impl fmt::Display for PointerWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointerWidth::Projective => write!(f, "0"),
            PointerWidth::Finite(s) => write!(f, "{s}"),
            PointerWidth::Infinite => write!(f, "inf"),
        }
    }
}

/// Coherence damping `exp(-gap^2 / (8 sigma^2))` left by one pointer.
pub fn suppression_factor(gap: f64, width: PointerWidth) -> f64 {
    if gap == 0.0 {
        return 1.0;
    }
    match width {
        PointerWidth::Projective => 0.0,
        PointerWidth::Finite(s) => (-gap * gap / (8.0 * s * s)).exp(),
        PointerWidth::Infinite => 1.0,
    }
}

/// Normal density with standard deviation `sigma`.
pub fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Normal cumulative distribution with standard deviation `sigma`.
pub fn gaussian_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-x / (sigma * std::f64::consts::SQRT_2))
}

fn check_dim(rho: &DensityMatrix, h: &StrokeHamiltonian) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(OttoError::DimensionMismatch {
            expected: h.dim(),
            got: rho.dim(),
        });
    }
    Ok(())
}

/// Unnormalized post-measurement state for pointer reading `x`. Its trace
/// is the outcome density at `x`.
///
/// In the projective branch `x` is snapped to the nearest energy level and
/// the state is pinned to that eigenspace.
pub fn conditional_state(
    rho: &DensityMatrix,
    h: &StrokeHamiltonian,
    width: PointerWidth,
    x: f64,
) -> Result<ComplexMatrix> {
    check_dim(rho, h)?;
    let e = h.energies();
    let projectors = h.projectors();
    match width {
        PointerWidth::Infinite => Err(OttoError::InvalidParameter(
            "an infinitely wide pointer has no outcome to condition on".into(),
        )),
        PointerWidth::Projective => {
            let level = e
                .iter()
                .copied()
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
                .expect("non-empty spectrum");
            let p: ComplexMatrix = projectors
                .iter()
                .zip(e)
                .filter(|(_, &em)| (em - level).abs() <= LEVEL_TOL)
                .map(|(p, _)| p.clone())
                .sum();
            Ok(&p * rho.matrix() * &p)
        }
        PointerWidth::Finite(s) => {
            let d = h.dim();
            let mut out = ComplexMatrix::zeros(d, d);
            for m in 0..d {
                for mp in 0..d {
                    let weight = suppression_factor(e[m] - e[mp], width)
                        * gaussian(x - (e[m] + e[mp]) / 2.0, s);
                    out += &projectors[m] * rho.matrix() * &projectors[mp] * c64(weight);
                }
            }
            Ok(out)
        }
    }
}

/// The outcome-averaged (non-selective) measurement map
/// `rho -> sum_{m,m'} Lambda(e_m - e_m') Pi_m rho Pi_m'`.
pub fn measurement_channel(h: &StrokeHamiltonian, width: PointerWidth) -> Result<Channel> {
    let d = h.dim();
    let e = h.energies();
    let projectors = h.projectors();
    let mut liouville = ComplexMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for mp in 0..d {
            let lambda = suppression_factor(e[m] - e[mp], width);
            if lambda != 0.0 {
                liouville += sandwich(&projectors[m], &projectors[mp]) * c64(lambda);
            }
        }
    }
    Channel::from_liouville(d, liouville)
}

/// State after the measurement with the outcome discarded.
pub fn post_measurement_state(
    rho: &DensityMatrix,
    h: &StrokeHamiltonian,
    width: PointerWidth,
) -> Result<DensityMatrix> {
    check_dim(rho, h)?;
    measurement_channel(h, width)?.apply(rho)
}

/// Mixture of equal-width normal components. A zero width denotes a
/// discrete distribution on the component means.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture1D {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sigma: f64,
}

impl Mixture1D {
    pub fn is_discrete(&self) -> bool {
        self.sigma == 0.0
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Density at `x`; zero everywhere for a discrete mixture.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_discrete() {
            return 0.0;
        }
        self.weights
            .iter()
            .zip(&self.means)
            .map(|(w, mu)| w * gaussian(x - mu, self.sigma))
            .sum()
    }

    /// `P(X <= x)`; atoms at `x` are included.
    pub fn cdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.means)
            .map(|(w, mu)| {
                if self.is_discrete() {
                    if *mu <= x { *w } else { 0.0 }
                } else {
                    w * gaussian_cdf(x - mu, self.sigma)
                }
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, mu)| w * mu).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self.weights.iter().zip(&self.means).map(|(w, mu)| w * mu * mu).sum();
        second - mean * mean + self.sigma * self.sigma
    }
}

/// Distribution of the pointer reading, `p(x) = sum_m <m|rho|m> G(x - e_m)`.
pub fn outcome_density(
    rho: &DensityMatrix,
    h: &StrokeHamiltonian,
    width: PointerWidth,
) -> Result<Mixture1D> {
    check_dim(rho, h)?;
    if width == PointerWidth::Infinite {
        return Err(OttoError::ImproperDistribution);
    }
    let weights = (0..h.dim()).map(|m| rho.expect(&h.projector(m))).collect();
    Ok(Mixture1D {
        weights,
        means: h.energies().to_vec(),
        sigma: width.sigma(),
    })
}
