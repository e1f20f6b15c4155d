use crate::error::{OttoError, Result};
use crate::linops::{c64, sandwich, stack, unstack, Channel, ComplexMatrix, DensityMatrix, C64};
use crate::strokes::{
    parametric_unitary, thermal_channel, BathSpec, ColdStroke, Direction, Protocol,
    StrokeHamiltonian, WorkStrokeSpec,
};

use super::{PathEnergies, SchemeConfig};

/// Energies closer than this count as equal in the degeneracy report.
const GAP_TOL: f64 = 1e-12;

/// The four strokes of one Otto cycle.
///
/// Points 1 and 4 share `h1`, points 2 and 3 share `h2`. The hot isochore
/// runs at `h2` and the cold isochore at `h1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec {
    pub h1: StrokeHamiltonian,
    pub h2: StrokeHamiltonian,
    pub work: WorkStrokeSpec,
    pub hot: BathSpec,
    pub cold: ColdStroke,
}

impl CycleSpec {
    pub fn new(
        h1: StrokeHamiltonian,
        h2: StrokeHamiltonian,
        work: WorkStrokeSpec,
        hot: BathSpec,
        cold: ColdStroke,
    ) -> Result<Self> {
        if h1.dim() != h2.dim() {
            return Err(OttoError::DimensionMismatch {
                expected: h1.dim(),
                got: h2.dim(),
            });
        }
        work.validate()?;
        hot.validate()?;
        if let ColdStroke::Bath(bath) = &cold {
            bath.validate()?;
        }
        if !(cold.beta() > hot.beta) {
            return Err(OttoError::InvalidParameter(format!(
                "cold bath must be colder than hot bath (beta_c = {}, beta_h = {})",
                cold.beta(),
                hot.beta
            )));
        }
        if let WorkStrokeSpec::Protocol(p) = &work {
            let (e1, e2) = p.endpoints()?;
            let mismatch = (e1.matrix() - h1.matrix()).camax().max((e2.matrix() - h2.matrix()).camax());
            if mismatch > GAP_TOL {
                return Err(OttoError::InvalidParameter(
                    "stroke Hamiltonians differ from the protocol endpoints".into(),
                ));
            }
        }
        Ok(Self {
            h1,
            h2,
            work,
            hot,
            cold,
        })
    }

    pub fn parametric(
        h1: StrokeHamiltonian,
        h2: StrokeHamiltonian,
        r: f64,
        phi: f64,
        hot: BathSpec,
        cold: ColdStroke,
    ) -> Result<Self> {
        Self::new(h1, h2, WorkStrokeSpec::Parametric { r, phi }, hot, cold)
    }

    /// Cycle driven by a time-resolved protocol between its own endpoints.
    pub fn protocol(protocol: Protocol, hot: BathSpec, cold: ColdStroke) -> Result<Self> {
        let (h1, h2) = protocol.endpoints()?;
        Self::new(h1, h2, WorkStrokeSpec::Protocol(protocol), hot, cold)
    }

    pub fn dim(&self) -> usize {
        self.h1.dim()
    }

    /// Compression and expansion unitaries `(U_1, U_2)`.
    pub fn unitaries(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        match self.work {
            WorkStrokeSpec::Parametric { r, phi } => Ok((
                parametric_unitary(r, phi, &self.h1, &self.h2, Direction::Compression)?,
                parametric_unitary(r, phi, &self.h1, &self.h2, Direction::Expansion)?,
            )),
            WorkStrokeSpec::Protocol(p) => {
                Ok((p.unitary(Direction::Compression)?, p.unitary(Direction::Expansion)?))
            }
        }
    }

    /// Energies `(e_{m1}^(1), e_{m2}^(2), e_{m3}^(2), e_{m4}^(1))`.
    pub fn path_energies(&self, m: &[usize; 4]) -> PathEnergies {
        [
            self.h1.energy(m[0]),
            self.h2.energy(m[1]),
            self.h2.energy(m[2]),
            self.h1.energy(m[3]),
        ]
    }
}

/// Energy-eigenstate labels `(m1, m2, m3, m4)` and `(m1', m2', m3', m4')`
/// on the two sides of the density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    pub m: [usize; 4],
    pub mp: [usize; 4],
}

impl IndexPair {
    pub fn new(m: [usize; 4], mp: [usize; 4]) -> Self {
        Self { m, mp }
    }

    pub fn is_diagonal(&self) -> bool {
        self.m == self.mp
    }

    pub fn swapped(&self) -> Self {
        Self {
            m: self.mp,
            mp: self.m,
        }
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        match self.m.iter().chain(&self.mp).find(|&&i| i >= dim) {
            Some(&index) => Err(OttoError::IndexOutOfRange { index, dim }),
            None => Ok(()),
        }
    }

    /// All `d^8` pairs in lexicographic order.
    pub fn all(dim: usize) -> impl Iterator<Item = IndexPair> {
        let paths = dim.pow(4);
        (0..paths * paths).map(move |k| IndexPair {
            m: path_from_index(k / paths, dim),
            mp: path_from_index(k % paths, dim),
        })
    }
}

fn path_index(m: &[usize; 4], dim: usize) -> usize {
    m.iter().rev().fold(0, |acc, &i| acc * dim + i)
}

fn path_from_index(mut k: usize, dim: usize) -> [usize; 4] {
    let mut m = [0; 4];
    for slot in &mut m {
        *slot = k % dim;
        k /= dim;
    }
    m
}

/// Every conditional block superoperator of one cycle,
///
/// ```text
/// S^{m,m'}(rho) = Phi_c[ Pi_m4 U2 Pi_m3 Phi_h( Pi_m2 U1 Pi_m1 rho Pi_m1' U1^dag Pi_m2' ) Pi_m3' U2^dag Pi_m4' ]
/// ```
///
/// precomputed as `d^2 x d^2` Liouville matrices. Scheme channels are
/// weighted sums of these blocks.
#[derive(Debug, Clone)]
pub struct CycleBlocks {
    cycle: CycleSpec,
    blocks: Vec<ComplexMatrix>,
    hot: Channel,
    cold: Channel,
    unitaries: (ComplexMatrix, ComplexMatrix),
}

impl CycleBlocks {
    pub fn new(cycle: &CycleSpec) -> Result<Self> {
        let d = cycle.dim();
        let (u1, u2) = cycle.unitaries()?;
        let hot = thermal_channel(&cycle.h2, &cycle.hot)?;
        let cold = cycle.cold.channel(&cycle.h1)?;
        let p1 = cycle.h1.projectors();
        let p2 = cycle.h2.projectors();

        // Kraus-like pieces of each work stroke, indexed by (in, out).
        let d2 = d * d;
        let mut a1 = Vec::with_capacity(d2);
        let mut a2 = Vec::with_capacity(d2);
        for out in 0..d {
            for inp in 0..d {
                a1.push(&p2[out] * &u1 * &p1[inp]);
                a2.push(&p1[out] * &u2 * &p2[inp]);
            }
        }
        let piece = |m_in: usize, m_out: usize| m_in + d * m_out;

        // first[(m1, m2), (m1', m2')] = Phi_h o sandwich(A1, A1')
        let mut first = Vec::with_capacity(d2 * d2);
        let mut second = Vec::with_capacity(d2 * d2);
        for left in 0..d2 {
            for right in 0..d2 {
                first.push(hot.liouville() * sandwich(&a1[left], &a1[right]));
                second.push(cold.liouville() * sandwich(&a2[left], &a2[right]));
            }
        }

        let blocks = IndexPair::all(d)
            .map(|pair| {
                let (m, mp) = (pair.m, pair.mp);
                let f = piece(m[0], m[1]) * d2 + piece(mp[0], mp[1]);
                let s = piece(m[2], m[3]) * d2 + piece(mp[2], mp[3]);
                &second[s] * &first[f]
            })
            .collect();

        Ok(Self {
            cycle: cycle.clone(),
            blocks,
            hot,
            cold,
            unitaries: (u1, u2),
        })
    }

    pub fn cycle(&self) -> &CycleSpec {
        &self.cycle
    }

    pub fn dim(&self) -> usize {
        self.cycle.dim()
    }

    pub fn hot_channel(&self) -> &Channel {
        &self.hot
    }

    pub fn cold_channel(&self) -> &Channel {
        &self.cold
    }

    pub fn unitaries(&self) -> (&ComplexMatrix, &ComplexMatrix) {
        (&self.unitaries.0, &self.unitaries.1)
    }

    fn slot(&self, pair: &IndexPair) -> usize {
        let d = self.dim();
        path_index(&pair.m, d) * d.pow(4) + path_index(&pair.mp, d)
    }

    /// Liouville matrix of `S^{m,m'}`; not trace preserving.
    pub fn conditional_block(&self, pair: &IndexPair) -> Result<&ComplexMatrix> {
        pair.check(self.dim())?;
        Ok(&self.blocks[self.slot(pair)])
    }

    pub fn apply_block(&self, pair: &IndexPair, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let block = self.conditional_block(pair)?;
        if rho.nrows() != self.dim() || !rho.is_square() {
            return Err(OttoError::DimensionMismatch {
                expected: self.dim(),
                got: rho.nrows(),
            });
        }
        Ok(unstack(&(block * stack(rho)), self.dim()))
    }

    /// `sum_{m,m'} Lambda^{m,m'} S^{m,m'}`, checked to be CPTP.
    pub fn channel(&self, config: &SchemeConfig) -> Result<Channel> {
        let d = self.dim();
        let mut liouville = ComplexMatrix::zeros(d * d, d * d);
        for (pair, block) in IndexPair::all(d).zip(&self.blocks) {
            let lambda = self.suppression(config, &pair);
            if lambda != 0.0 {
                liouville += block * c64(lambda);
            }
        }
        let channel = Channel::from_liouville(d, liouville)?;
        channel.check_cptp()?;
        Ok(channel)
    }

    pub fn steady_state(&self, config: &SchemeConfig) -> Result<DensityMatrix> {
        self.channel(config)?.fixed_point()
    }

    pub fn suppression(&self, config: &SchemeConfig, pair: &IndexPair) -> f64 {
        config.suppression(
            pair,
            &self.cycle.path_energies(&pair.m),
            &self.cycle.path_energies(&pair.mp),
        )
    }

    /// `(pair, Lambda^{m,m'} Tr[S^{m,m'}(rho)])` for every pair with a
    /// nonzero suppression factor.
    pub fn weighted_traces(
        &self,
        config: &SchemeConfig,
        rho: &DensityMatrix,
    ) -> Result<Vec<(IndexPair, C64)>> {
        let d = self.dim();
        if rho.dim() != d {
            return Err(OttoError::DimensionMismatch {
                expected: d,
                got: rho.dim(),
            });
        }
        let v = stack(rho.matrix());
        let mut out = Vec::new();
        for (pair, block) in IndexPair::all(d).zip(&self.blocks) {
            let lambda = self.suppression(config, &pair);
            if lambda == 0.0 {
                continue;
            }
            let image = block * &v;
            let trace: C64 = (0..d).map(|a| image[a + a * d]).sum();
            out.push((pair, trace * lambda));
        }
        Ok(out)
    }
}

/// One-cycle map of `config` for `cycle`.
pub fn cycle_channel(cycle: &CycleSpec, config: &SchemeConfig) -> Result<Channel> {
    CycleBlocks::new(cycle)?.channel(config)
}

pub fn steady_state_for_scheme(cycle: &CycleSpec, config: &SchemeConfig) -> Result<DensityMatrix> {
    CycleBlocks::new(cycle)?.steady_state(config)
}

/// Off-diagonal path pairs that projective pointers cannot separate.
#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    /// `m != m'` with equal compression work, hot heat and expansion work.
    pub stroke_collisions: Vec<IndexPair>,
    /// `m != m'` with equal total work.
    pub total_work_collisions: Vec<IndexPair>,
    /// `m != m'` with equal total work and equal hot heat.
    pub work_heat_collisions: Vec<IndexPair>,
}

impl NondegeneracyReport {
    /// Whether stroke-resolved pointers reach the projective limit.
    pub fn stroke_resolved_tpm_limit(&self) -> bool {
        self.stroke_collisions.is_empty()
    }

    /// Whether total-work pointers reach the projective limit.
    pub fn total_work_tpm_limit(&self) -> bool {
        self.work_heat_collisions.is_empty()
    }
}

pub fn nondegeneracy_check(cycle: &CycleSpec) -> NondegeneracyReport {
    let d = cycle.dim();
    let strokes = |e: &PathEnergies| [e[1] - e[0], e[2] - e[1], e[3] - e[2]];
    let mut report = NondegeneracyReport {
        stroke_collisions: Vec::new(),
        total_work_collisions: Vec::new(),
        work_heat_collisions: Vec::new(),
    };
    for pair in IndexPair::all(d).filter(|p| !p.is_diagonal()) {
        let a = strokes(&cycle.path_energies(&pair.m));
        let b = strokes(&cycle.path_energies(&pair.mp));
        let same = |x: f64, y: f64| (x - y).abs() <= GAP_TOL;
        if (0..3).all(|k| same(a[k], b[k])) {
            report.stroke_collisions.push(pair);
        }
        let (wa, wb) = (a[0] + a[2], b[0] + b[2]);
        if same(wa, wb) {
            report.total_work_collisions.push(pair);
            if same(a[1], b[1]) {
                report.work_heat_collisions.push(pair);
            }
        }
    }
    report
}
