//! The four Otto strokes: stroke Hamiltonians, compression and expansion
//! unitaries, and the GKSL thermalization maps of the two isochores.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{OttoError, Result};
use crate::linops::{
    c64, hermitian_eigen, identity, left_mul, right_mul, sandwich, unitarity_deviation, Channel,
    ComplexMatrix, DensityMatrix, C64,
};

const EIGENBASIS_TOL: f64 = 1e-12;
const UNITARITY_TOL: f64 = 1e-10;
/// Residual below which a unitary is accepted as the two-parameter form.
const TWO_PARAMETER_TOL: f64 = 1e-8;
/// Default number of midpoint steps for a driven work stroke.
pub const DEFAULT_PROTOCOL_STEPS: usize = 10_000;

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0.0), c64(1.0), c64(1.0), c64(0.0)])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(1.0), c64(0.0), c64(0.0), c64(-1.0)])
}

/// A Hamiltonian at one point of the cycle, together with its spectral
/// decomposition `H = sum_m e_m |e_m><e_m|`.
///
/// Energies are sorted ascending, so index 0 is the ground state. Each
/// eigenvector is phase-fixed so that its largest component is real and
/// positive, which makes the eigenbasis deterministic for real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeHamiltonian {
    matrix: ComplexMatrix,
    energies: Vec<f64>,
    basis: ComplexMatrix,
}

impl StrokeHamiltonian {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(OttoError::InvalidParameter(
                "Hamiltonian must be square with dimension >= 2".into(),
            ));
        }
        if (&matrix - matrix.adjoint()).camax() > EIGENBASIS_TOL {
            return Err(OttoError::InvalidParameter("Hamiltonian is not Hermitian".into()));
        }
        let (energies, mut basis) = hermitian_eigen(&matrix);
        for mut col in basis.column_iter_mut() {
            let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = col
                .iter()
                .position(|z| z.norm() > max - 1e-12)
                .expect("non-empty column");
            let phase = col[pivot].conj() / col[pivot].norm();
            col *= phase;
        }
        let h = Self {
            matrix,
            energies,
            basis,
        };
        let overlap = (h.basis.adjoint() * &h.basis - identity(h.dim())).camax();
        debug_assert!(overlap < EIGENBASIS_TOL, "eigenbasis not orthonormal: {overlap}");
        Ok(h)
    }

    /// Two-level Hamiltonian `(omega / 2) sigma_z` in the computational basis,
    /// with `e_1 = -omega / 2` on `|1>` and `e_2 = omega / 2` on `|0>`.
    pub fn two_level(omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "level splitting must be positive, got {omega}"
            )));
        }
        Self::from_matrix(sigma_z() * c64(omega / 2.0))
    }

    /// `(z / 2) sigma_z + (x / 2) sigma_x`.
    pub fn pauli(z: f64, x: f64) -> Result<Self> {
        Self::from_matrix(sigma_z() * c64(z / 2.0) + sigma_x() * c64(x / 2.0))
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, m: usize) -> f64 {
        self.energies[m]
    }

    /// Columns are the eigenvectors, in the order of [`Self::energies`].
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn eigenvector(&self, m: usize) -> DVector<C64> {
        self.basis.column(m).into_owned()
    }

    pub fn projector(&self, m: usize) -> ComplexMatrix {
        let v = self.eigenvector(m);
        &v * v.adjoint()
    }

    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        (0..self.dim()).map(|m| self.projector(m)).collect()
    }

    /// `|e_j><e_i|` between two eigenvectors of this Hamiltonian.
    pub fn transition(&self, to: usize, from: usize) -> ComplexMatrix {
        self.eigenvector(to) * self.eigenvector(from).adjoint()
    }

    /// Matrix of `op` in this eigenbasis.
    pub fn in_eigenbasis(&self, op: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * op * &self.basis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Compression,
    Expansion,
}

/// Time-resolved work-stroke protocol with `H_1 = (omega1/2) sigma_x` and
/// `H_2 = (omega2/2) sigma_z`; the expansion stroke runs the compression
/// schedule backwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub omega1: f64,
    pub omega2: f64,
    pub tau_u: f64,
    pub steps: usize,
}

impl Protocol {
    pub fn new(omega1: f64, omega2: f64, tau_u: f64) -> Self {
        Self {
            omega1,
            omega2,
            tau_u,
            steps: DEFAULT_PROTOCOL_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_u > 0.0) || !self.tau_u.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "stroke duration must be positive, got {}",
                self.tau_u
            )));
        }
        if self.steps == 0 {
            return Err(OttoError::InvalidParameter("integrator needs at least one step".into()));
        }
        if !(self.omega1 > 0.0 && self.omega2 > 0.0) {
            return Err(OttoError::InvalidParameter("frequencies must be positive".into()));
        }
        Ok(())
    }

    /// Hamiltonians at the start and end of compression.
    pub fn endpoints(&self) -> Result<(StrokeHamiltonian, StrokeHamiltonian)> {
        Ok((
            StrokeHamiltonian::pauli(0.0, self.omega1)?,
            StrokeHamiltonian::pauli(self.omega2, 0.0)?,
        ))
    }

    fn lambda(&self, t: f64) -> f64 {
        self.omega1 * (1.0 - t / self.tau_u) + self.omega2 * t / self.tau_u
    }

    /// `H(t)` for `t` in `[0, tau_u]`.
    pub fn hamiltonian(&self, direction: Direction, t: f64) -> ComplexMatrix {
        let angle = PI * t / (2.0 * self.tau_u);
        let (z, x, lam) = match direction {
            Direction::Compression => (angle.sin(), angle.cos(), self.lambda(t)),
            Direction::Expansion => (angle.cos(), angle.sin(), self.lambda(self.tau_u - t)),
        };
        (sigma_z() * c64(z) + sigma_x() * c64(x)) * c64(lam / 2.0)
    }

    fn propagate(&self, direction: Direction, steps: usize) -> ComplexMatrix {
        let dt = self.tau_u / steps as f64;
        let mut u = identity(2);
        for j in 0..steps {
            let mid = (j as f64 + 0.5) * dt;
            u = evolve_hermitian(&self.hamiltonian(direction, mid), dt) * u;
        }
        u
    }

    /// Time-ordered product of midpoint exponentials `exp(-i H(t_j) dt)`.
    pub fn unitary(&self, direction: Direction) -> Result<ComplexMatrix> {
        self.validate()?;
        let u = self.propagate(direction, self.steps);
        let deviation = unitarity_deviation(&u);
        if deviation > UNITARITY_TOL {
            return Err(OttoError::NonUnitary { deviation });
        }
        Ok(u)
    }

    /// Operator-norm change of the propagator when the step is halved.
    pub fn step_halving_error(&self, direction: Direction) -> Result<f64> {
        self.validate()?;
        let coarse = self.propagate(direction, self.steps);
        let fine = self.propagate(direction, 2 * self.steps);
        Ok((coarse - fine).singular_values().max())
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn evolve_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|e| C64::from_polar(1.0, -e * t)),
    );
    &vectors * ComplexMatrix::from_diagonal(&phases) * vectors.adjoint()
}

/// `Theta U^dag Theta^dag` with `Theta` complex conjugation in the
/// computational basis, i.e. `U^T`.
pub fn motion_reversed(u: &ComplexMatrix) -> ComplexMatrix {
    u.transpose()
}

/// How a work stroke is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkStrokeSpec {
    /// Two-level transition probability `r` and amplitude phase `phi`.
    Parametric { r: f64, phi: f64 },
    Protocol(Protocol),
}

impl WorkStrokeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            WorkStrokeSpec::Parametric { r, phi } => {
                if !(0.0..=1.0).contains(r) {
                    return Err(OttoError::InvalidParameter(format!(
                        "transition probability must lie in [0, 1], got {r}"
                    )));
                }
                if !phi.is_finite() {
                    return Err(OttoError::InvalidParameter("phase must be finite".into()));
                }
                Ok(())
            }
            WorkStrokeSpec::Protocol(p) => p.validate(),
        }
    }
}

/// Two-parameter compression (`U_1`) or expansion (`U_2`) unitary between
/// the eigenbases of `h1` (points 1 and 4) and `h2` (points 2 and 3):
///
/// ```text
/// U_1 = sqrt(1-r) (|e2'><e2| + |e1'><e1|) - sqrt(r) (e^{i phi} |e2'><e1| - e^{-i phi} |e1'><e2|)
/// U_2 = sqrt(1-r) (|e2><e2'| + |e1><e1'|) + sqrt(r) (e^{i phi} |e2><e1'| - e^{-i phi} |e1><e2'|)
/// ```
///
/// where unprimed kets belong to `h1` and primed kets to `h2`.
pub fn parametric_unitary(
    r: f64,
    phi: f64,
    h1: &StrokeHamiltonian,
    h2: &StrokeHamiltonian,
    direction: Direction,
) -> Result<ComplexMatrix> {
    if h1.dim() != 2 || h2.dim() != 2 {
        return Err(OttoError::DimensionMismatch {
            expected: 2,
            got: h1.dim().max(h2.dim()),
        });
    }
    WorkStrokeSpec::Parametric { r, phi }.validate()?;
    let (from, to, sign) = match direction {
        Direction::Compression => (h1, h2, -1.0),
        Direction::Expansion => (h2, h1, 1.0),
    };
    let ket = |h: &StrokeHamiltonian, m: usize| h.eigenvector(m);
    let op = |a: DVector<C64>, b: DVector<C64>| a * b.adjoint();
    let diag = op(ket(to, 1), ket(from, 1)) + op(ket(to, 0), ket(from, 0));
    let flip = op(ket(to, 1), ket(from, 0)) * C64::from_polar(1.0, phi)
        - op(ket(to, 0), ket(from, 1)) * C64::from_polar(1.0, -phi);
    Ok(diag * c64((1.0 - r).sqrt()) + flip * c64(sign * r.sqrt()))
}

/// Result of fitting a two-level unitary to the two-parameter form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub r: f64,
    /// In `[0, 2 pi)`; reported as 0 when `r` vanishes.
    pub phi: f64,
    pub phase_defined: bool,
    /// Largest entry of `U - e^{i alpha} U_1(r, phi)` over the best global phase.
    pub residual: f64,
    /// `true` when the residual is within `1e-8`.
    pub two_parameter_form: bool,
}

/// Inverts [`parametric_unitary`] (compression direction) up to a global
/// phase.
pub fn effective_transition_params(
    u: &ComplexMatrix,
    h1: &StrokeHamiltonian,
    h2: &StrokeHamiltonian,
) -> Result<TransitionParams> {
    if u.nrows() != 2 || h1.dim() != 2 || h2.dim() != 2 {
        return Err(OttoError::DimensionMismatch {
            expected: 2,
            got: u.nrows(),
        });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARITY_TOL {
        return Err(OttoError::NonUnitary { deviation });
    }
    // m[(i, j)] = <e_i^(2)| U |e_j^(1)>
    let m = h2.basis().adjoint() * u * h1.basis();
    let r = m[(1, 0)].norm_sqr().clamp(0.0, 1.0);
    let phase_defined = r.sqrt() > 1e-12;

    let twice_alpha = if 1.0 - r >= r {
        (m[(0, 0)] * m[(1, 1)]).arg()
    } else {
        (-m[(1, 0)] * m[(0, 1)]).arg()
    };
    let mut best: Option<(f64, f64)> = None;
    for alpha in [twice_alpha / 2.0, twice_alpha / 2.0 + PI] {
        let phi = if phase_defined {
            (-m[(1, 0)] * C64::from_polar(1.0, -alpha)).arg().rem_euclid(2.0 * PI)
        } else {
            0.0
        };
        let model = parametric_unitary(r, phi, h1, h2, Direction::Compression)?;
        let residual = (u - model * C64::from_polar(1.0, alpha)).camax();
        if best.is_none_or(|(res, _)| residual < res) {
            best = Some((residual, phi));
        }
    }
    let (residual, phi) = best.expect("two candidates");
    Ok(TransitionParams {
        r,
        phi,
        phase_defined,
        residual,
        two_parameter_form: residual < TWO_PARAMETER_TOL,
    })
}

/// `exp(-beta H) / Z`, evaluated in the eigenbasis with the ground energy
/// shifted to zero. `beta = inf` gives the (uniform) ground-space projector.
pub fn gibbs_state(h: &StrokeHamiltonian, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) {
        return Err(OttoError::InvalidParameter(format!(
            "inverse temperature must be non-negative, got {beta}"
        )));
    }
    let e0 = h.energies()[0];
    let weights: Vec<f64> = h
        .energies()
        .iter()
        .map(|&e| {
            let shifted = e - e0;
            if beta.is_infinite() {
                if shifted <= EIGENBASIS_TOL { 1.0 } else { 0.0 }
            } else {
                (-beta * shifted).exp()
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let diag = DVector::from_iterator(weights.len(), weights.iter().map(|w| c64(w / z)));
    let rho = h.basis() * ComplexMatrix::from_diagonal(&diag) * h.basis().adjoint();
    DensityMatrix::normalized(rho)
}

/// Thermal occupation used in the GKSL rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OccupationConvention {
    /// Bose-Einstein `1 / (e^{beta omega} - 1)`; the Gibbs state is stationary.
    #[default]
    GibbsConsistent,
    /// `1 / (e^{beta omega} + 1)` inserted directly into the GKSL rates.
    AsPrinted,
}

impl OccupationConvention {
    pub fn occupation(self, beta: f64, gap: f64) -> f64 {
        let x = beta * gap;
        match self {
            OccupationConvention::GibbsConsistent => 1.0 / x.exp_m1(),
            OccupationConvention::AsPrinted => 1.0 / (x.exp() + 1.0),
        }
    }
}

/// A heat bath coupled for a time `tau_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub beta: f64,
    pub gamma: f64,
    pub tau_b: f64,
    pub convention: OccupationConvention,
}

impl BathSpec {
    pub fn new(beta: f64, gamma: f64, tau_b: f64) -> Self {
        Self {
            beta,
            gamma,
            tau_b,
            convention: OccupationConvention::GibbsConsistent,
        }
    }

    pub fn with_convention(mut self, convention: OccupationConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(OttoError::InvalidParameter(format!(
                "bath inverse temperature must be positive, got {}",
                self.beta
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "coupling rate must be non-negative, got {}",
                self.gamma
            )));
        }
        if !(self.tau_b >= 0.0) || !self.tau_b.is_finite() {
            return Err(OttoError::InvalidParameter(format!(
                "isochore duration must be non-negative, got {}",
                self.tau_b
            )));
        }
        Ok(())
    }

    pub fn occupation(&self, gap: f64) -> f64 {
        self.convention.occupation(self.beta, gap)
    }

    /// Population relaxation rate `gamma (2 n + 1)`.
    pub fn effective_rate(&self, gap: f64) -> f64 {
        self.gamma * (2.0 * self.occupation(gap) + 1.0)
    }

    /// Excited-state population the bath relaxes towards, `n / (2 n + 1)`.
    pub fn stationary_excited_population(&self, gap: f64) -> f64 {
        let n = self.occupation(gap);
        if n.is_infinite() {
            0.5
        } else {
            n / (2.0 * n + 1.0)
        }
    }
}

fn dissipator(a: &ComplexMatrix) -> ComplexMatrix {
    let ada = a.adjoint() * a;
    sandwich(a, a) - (left_mul(&ada) + right_mul(&ada)) * c64(0.5)
}

/// Liouvillian of the two-level master equation
/// `-i[H, rho] + gamma (n+1) D[sigma_-] + gamma n D[sigma_+]`, with
/// `sigma_+ = |e_2><e_1|` in the eigenbasis of `h`.
pub fn lindblad_generator(h: &StrokeHamiltonian, bath: &BathSpec) -> Result<ComplexMatrix> {
    if h.dim() != 2 {
        return Err(OttoError::DimensionMismatch {
            expected: 2,
            got: h.dim(),
        });
    }
    bath.validate()?;
    let gap = h.energy(1) - h.energy(0);
    if !(gap > 0.0) {
        return Err(OttoError::InvalidParameter("thermalization needs a non-degenerate gap".into()));
    }
    let n = bath.occupation(gap);
    let lower = h.transition(0, 1);
    let raise = h.transition(1, 0);
    let i = C64::new(0.0, 1.0);
    let unitary = (left_mul(h.matrix()) - right_mul(h.matrix())) * (-i);
    Ok(unitary
        + dissipator(&lower) * c64(bath.gamma * (n + 1.0))
        + dissipator(&raise) * c64(bath.gamma * n))
}

/// `exp(L tau_b)` for the isochore generator of [`lindblad_generator`].
pub fn thermal_channel(h: &StrokeHamiltonian, bath: &BathSpec) -> Result<Channel> {
    let generator = lindblad_generator(h, bath)?;
    if bath.tau_b == 0.0 {
        return Ok(Channel::identity(2));
    }
    Channel::from_liouville(2, (generator * c64(bath.tau_b)).exp())
}

/// The cold isochore: either a finite GKSL stroke or an exact reset to the
/// Gibbs state of `H_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColdStroke {
    Bath(BathSpec),
    PerfectReset { beta: f64 },
}

impl ColdStroke {
    pub fn beta(&self) -> f64 {
        match self {
            ColdStroke::Bath(b) => b.beta,
            ColdStroke::PerfectReset { beta } => *beta,
        }
    }

    pub fn channel(&self, h1: &StrokeHamiltonian) -> Result<Channel> {
        match self {
            ColdStroke::Bath(bath) => thermal_channel(h1, bath),
            ColdStroke::PerfectReset { beta } => {
                if !(*beta > 0.0) {
                    return Err(OttoError::InvalidParameter(format!(
                        "reset inverse temperature must be positive, got {beta}"
                    )));
                }
                Ok(Channel::replacement(&gibbs_state(h1, *beta)?))
            }
        }
    }
}
