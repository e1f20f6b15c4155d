//! Dense complex linear algebra for small quantum channels.
//!
//! Density matrices are vectorised by **column stacking**: the entry
//! `rho[(i, j)]` sits at index `i + j * d` of `vec(rho)`. With this
//! convention `vec(A X B) = (B^T (x) A) vec(X)`, so the map `X -> K X K^dag`
//! has the Liouville matrix `conj(K) (x) K`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{OttoError, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_SLACK: f64 = 1e-10;
const CHOI_SLACK: f64 = 1e-8;
const TRACE_PRESERVING_TOL: f64 = 1e-10;

/// `|lambda - 1|` below which an eigenvalue of a channel counts as a
/// fixed-point eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Residual `||Phi(rho) - rho||_F` accepted for a steady state.
pub const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-10;

pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}

/// Column-stack a square matrix into a vector.
pub fn stack(m: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`stack`].
pub fn unstack(v: &DVector<C64>, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v.as_slice())
}

/// Liouville matrix of `X -> A X B^dag`.
pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.map(|z| z.conj()), a)
}

/// Liouville matrix of `X -> A X`.
pub fn left_mul(a: &ComplexMatrix) -> ComplexMatrix {
    kron(&identity(a.nrows()), a)
}

/// Liouville matrix of `X -> X B`.
pub fn right_mul(b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), &identity(b.nrows()))
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c64(0.5)
}

/// Largest entrywise deviation of `U^dag U` from the identity.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let d = u.nrows();
    (u.adjoint() * u - identity(d)).camax()
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// A unit-trace, Hermitian, positive semidefinite `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(OttoError::InvalidState("matrix is not square".into()));
        }
        if matrix.nrows() < 2 {
            return Err(OttoError::InvalidState("dimension must be at least 2".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OttoError::InvalidState("non-finite entry".into()));
        }
        let asym = (&matrix - matrix.adjoint()).camax();
        if asym > HERMITIAN_TOL {
            return Err(OttoError::InvalidState(format!(
                "not Hermitian (deviation {asym:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - c64(1.0)).norm() > TRACE_TOL {
            return Err(OttoError::InvalidState(format!(
                "trace {:.15} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if values[0] < -PSD_SLACK {
            return Err(OttoError::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                values[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and renormalises the trace before validating. Used where a
    /// state is recovered from an eigenvector or an accumulated sum.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let h = hermitize(&matrix);
        let tr = h.trace().re;
        if !(tr.abs() > f64::MIN_POSITIVE) {
            return Err(OttoError::InvalidState("zero trace".into()));
        }
        Self::new(h * c64(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: identity(d) * c64(1.0 / d as f64),
        }
    }

    /// `|psi><psi|` for a normalised ket.
    pub fn pure(ket: &DVector<C64>) -> Result<Self> {
        let n = ket.norm();
        let ket = ket / c64(n);
        Self::new(&ket * ket.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Expectation value `Tr[rho A]` (real part).
    pub fn expect(&self, op: &ComplexMatrix) -> f64 {
        (&self.matrix * op).trace().re
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// How [`Channel::from_kraus`] treats the completeness relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausMode {
    /// Require `sum K^dag K = I`.
    Normalized,
    /// Skip the check (conditional, trace-decreasing maps).
    Subnormalized,
}

/// Knobs for the power-iteration cross-check of [`Channel::fixed_point`].
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    /// Maximum number of map squarings; `k` squarings apply `Phi^(2^k)`.
    pub max_doublings: usize,
    pub tolerance: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            max_doublings: 64,
            tolerance: 1e-14,
        }
    }
}

/// A linear map on `d x d` matrices stored as its `d^2 x d^2` Liouville
/// matrix (column-stacking convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    liouville: ComplexMatrix,
}

impl Channel {
    pub fn from_liouville(dim: usize, liouville: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if liouville.nrows() != n || liouville.ncols() != n {
            return Err(OttoError::DimensionMismatch {
                expected: n,
                got: liouville.nrows(),
            });
        }
        Ok(Self { dim, liouville })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            liouville: identity(dim * dim),
        }
    }

    /// `rho -> sum_k K_k rho K_k^dag`.
    pub fn from_kraus(kraus: &[ComplexMatrix], mode: KrausMode) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| OttoError::InvalidParameter("empty Kraus set".into()))?;
        let d = first.nrows();
        let mut liouville = ComplexMatrix::zeros(d * d, d * d);
        let mut completeness = ComplexMatrix::zeros(d, d);
        for k in kraus {
            if !k.is_square() || k.nrows() != d {
                return Err(OttoError::DimensionMismatch {
                    expected: d,
                    got: k.nrows(),
                });
            }
            liouville += sandwich(k, k);
            completeness += k.adjoint() * k;
        }
        if mode == KrausMode::Normalized {
            let deviation = (completeness - identity(d)).camax();
            if deviation > 1e-10 {
                return Err(OttoError::CompletenessViolation { deviation });
            }
        }
        Ok(Self { dim: d, liouville })
    }

    /// The constant channel `rho -> Tr[rho] sigma`.
    pub fn replacement(state: &DensityMatrix) -> Self {
        let d = state.dim();
        let target = stack(state.matrix());
        let tr_row = stack(&identity(d)).adjoint();
        Self {
            dim: d,
            liouville: target * tr_row,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn liouville(&self) -> &ComplexMatrix {
        &self.liouville
    }

    /// `outer . inner`: first `inner`, then `outer`.
    pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
        if outer.dim != inner.dim {
            return Err(OttoError::DimensionMismatch {
                expected: outer.dim,
                got: inner.dim,
            });
        }
        Ok(Channel {
            dim: outer.dim,
            liouville: &outer.liouville * &inner.liouville,
        })
    }

    /// Applies the map to an arbitrary matrix, without any state checks.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(OttoError::DimensionMismatch {
                expected: self.dim,
                got: x.nrows(),
            });
        }
        Ok(unstack(&(&self.liouville * stack(x)), self.dim))
    }

    /// Applies a CPTP map to a state; the output is validated, so a
    /// non-physical result surfaces as an error.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_matrix(rho.matrix())?)
    }

    /// Choi matrix `sum_ij |i><j| (x) Phi(|i><j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            self.liouville[(a + b * d, i + j * d)]
        })
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.choi()).0[0]
    }

    /// Largest deviation of `Tr[Phi(E_ij)]` from `delta_ij` over the matrix
    /// units `E_ij`.
    pub fn trace_deviation(&self) -> f64 {
        let d = self.dim;
        let tr_row = stack(&identity(d)).adjoint();
        (tr_row.clone() * &self.liouville - tr_row).camax()
    }

    pub fn check_cptp(&self) -> Result<()> {
        let deviation = self.trace_deviation();
        if deviation > TRACE_PRESERVING_TOL {
            return Err(OttoError::NotTracePreserving { deviation });
        }
        let min_eigenvalue = self.min_choi_eigenvalue();
        if min_eigenvalue < -CHOI_SLACK {
            return Err(OttoError::NotCompletelyPositive { min_eigenvalue });
        }
        Ok(())
    }

    /// Eigenvalues of the Liouville matrix.
    pub fn spectrum(&self) -> Vec<C64> {
        Schur::new(self.liouville.clone())
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Unique steady state from a dense eigen-decomposition.
    ///
    /// Fails with [`OttoError::NonUniqueSteadyState`] when more than one
    /// eigenvalue lies within [`DEGENERACY_TOL`] of 1.
    pub fn fixed_point(&self) -> Result<DensityMatrix> {
        let one = c64(1.0);
        let spectrum = self.spectrum();
        let near: Vec<C64> = spectrum
            .iter()
            .copied()
            .filter(|l| (*l - one).norm() < DEGENERACY_TOL)
            .collect();
        if near.len() != 1 {
            return Err(OttoError::NonUniqueSteadyState {
                count: near.len(),
                tolerance: DEGENERACY_TOL,
            });
        }
        let n = self.dim * self.dim;
        let shifted = &self.liouville - identity(n) * near[0];
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        let null = v_t.row(idx).adjoint();
        let rho = DensityMatrix::normalized(unstack(&null, self.dim))?;
        self.check_fixed_point(rho)
    }

    /// Power iteration from the maximally mixed state, squaring the map after
    /// every step so that step `k` compares `Phi^(2^k)` with `Phi^(2^(k+1))`.
    pub fn fixed_point_power(&self, opts: PowerIteration) -> Result<DensityMatrix> {
        let mut map = self.liouville.clone();
        let mut v = stack(DensityMatrix::maximally_mixed(self.dim).matrix());
        let mut change = f64::INFINITY;
        for _ in 0..opts.max_doublings {
            let mut next = &map * &v;
            let tr = trace(&unstack(&next, self.dim));
            next /= tr;
            change = (&next - &v).norm();
            v = next;
            if change <= opts.tolerance {
                let rho = DensityMatrix::normalized(unstack(&v, self.dim))?;
                return self.check_fixed_point(rho);
            }
            map = &map * &map;
            // Squaring amplifies any drift off trace preservation.
            let id = stack(&identity(self.dim));
            let drift = id.adjoint() - id.adjoint() * &map;
            map += &id * drift * c64(1.0 / self.dim as f64);
        }
        Err(OttoError::PowerIterationDiverged {
            iterations: opts.max_doublings,
            change,
        })
    }

    /// `||Phi(rho) - rho||_F`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        let out = unstack(&(&self.liouville * stack(rho.matrix())), self.dim);
        (out - rho.matrix()).norm()
    }

    fn check_fixed_point(&self, rho: DensityMatrix) -> Result<DensityMatrix> {
        let residual = self.residual(&rho);
        if residual > FIXED_POINT_RESIDUAL_TOL {
            return Err(OttoError::FixedPointResidual { residual });
        }
        Ok(rho)
    }

    /// Frobenius distance between Liouville matrices.
    pub fn distance(&self, other: &Channel) -> f64 {
        (&self.liouville - &other.liouville).norm()
    }
}
