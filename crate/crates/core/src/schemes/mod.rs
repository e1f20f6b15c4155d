//! Monitoring schemes and the one-cycle maps they induce.
//!
//! Each scheme is a [`MeasurementScheme`] strategy: it decides how strongly
//! the cross term between two energy paths survives the pointer couplings
//! and how much Gaussian noise its pointers add to the reconstructed work
//! and heat. Schemes are looked up by name in a [`SchemeRegistry`].

mod cycle;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use cycle::{
    cycle_channel, nondegeneracy_check, steady_state_for_scheme, CycleBlocks, CycleSpec,
    IndexPair, NondegeneracyReport,
};

use crate::error::{OttoError, Result};
use crate::pointer::{suppression_factor, PointerWidth};

/// Energies `(e_{m1}^(1), e_{m2}^(2), e_{m3}^(2), e_{m4}^(1))` along one path.
pub type PathEnergies = [f64; 4];

/// Covariance of the pointer noise on `(w, q_h)`.
pub type Covariance = [[f64; 2]; 2];

pub trait MeasurementScheme: Send + Sync {
    fn name(&self) -> &str;

    fn pointer_count(&self) -> usize;

    /// Weight `Lambda^{m,m'}` of the block pairing paths `m` and `m'`.
    fn suppression(
        &self,
        pair: &IndexPair,
        path: &PathEnergies,
        path_prime: &PathEnergies,
        widths: &[PointerWidth],
    ) -> f64;

    /// Pointer noise on `(w, q_h)`, or `None` when the scheme keeps no
    /// measurement record.
    fn noise_covariance(&self, widths: &[PointerWidth]) -> Option<Covariance>;
}

impl fmt::Debug for dyn MeasurementScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeasurementScheme({})", self.name())
    }
}

/// The unmonitored cycle: every block enters with weight one.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unmonitored;

impl MeasurementScheme for Unmonitored {
    fn name(&self) -> &str {
        "UM"
    }

    fn pointer_count(&self) -> usize {
        0
    }

    fn suppression(&self, _: &IndexPair, _: &PathEnergies, _: &PathEnergies, _: &[PointerWidth]) -> f64 {
        1.0
    }

    fn noise_covariance(&self, _: &[PointerWidth]) -> Option<Covariance> {
        None
    }
}

/// Projective energy measurements at all four points: only diagonal blocks survive.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoPointMeasurement;

impl MeasurementScheme for TwoPointMeasurement {
    fn name(&self) -> &str {
        "TPM"
    }

    fn pointer_count(&self) -> usize {
        0
    }

    fn suppression(&self, pair: &IndexPair, _: &PathEnergies, _: &PathEnergies, _: &[PointerWidth]) -> f64 {
        if pair.is_diagonal() { 1.0 } else { 0.0 }
    }

    fn noise_covariance(&self, _: &[PointerWidth]) -> Option<Covariance> {
        Some([[0.0; 2]; 2])
    }
}

/// A scheme whose pointers each record a linear combination of the four
/// path energies, and whose work and heat estimates are linear
/// combinations of the pointer readings.
#[derive(Debug, Clone)]
pub struct LinearPointerScheme {
    name: String,
    /// One row per pointer: the energy combination it records.
    readouts: Vec<[f64; 4]>,
    /// `(w, q_h)` as combinations of the pointer readings.
    reconstruction: [Vec<f64>; 2],
}

impl LinearPointerScheme {
    pub fn new(name: &str, readouts: Vec<[f64; 4]>, reconstruction: [Vec<f64>; 2]) -> Result<Self> {
        let n = readouts.len();
        if n == 0 || reconstruction.iter().any(|row| row.len() != n) {
            return Err(OttoError::InvalidParameter(format!(
                "scheme {name}: reconstruction must have one coefficient per pointer"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            readouts,
            reconstruction,
        })
    }

    /// Energy measurements at all four points.
    pub fn s1() -> Self {
        Self::new(
            "S1",
            vec![
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ],
            [vec![-1.0, 1.0, -1.0, 1.0], vec![0.0, -1.0, 1.0, 0.0]],
        )
        .expect("valid builtin")
    }

    /// Pointers on compression work, hot heat and expansion work.
    pub fn s2() -> Self {
        Self::new(
            "S2",
            vec![
                [-1.0, 1.0, 0.0, 0.0],
                [0.0, -1.0, 1.0, 0.0],
                [0.0, 0.0, -1.0, 1.0],
            ],
            [vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
        )
        .expect("valid builtin")
    }

    /// Pointers on total work and hot heat.
    pub fn s3() -> Self {
        Self::new(
            "S3",
            vec![[-1.0, 1.0, -1.0, 1.0], [0.0, -1.0, 1.0, 0.0]],
            [vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .expect("valid builtin")
    }

    /// Value recorded by pointer `k` along a path.
    pub fn readout(&self, k: usize, path: &PathEnergies) -> f64 {
        self.readouts[k].iter().zip(path).map(|(c, e)| c * e).sum()
    }
}

impl MeasurementScheme for LinearPointerScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn pointer_count(&self) -> usize {
        self.readouts.len()
    }

    fn suppression(
        &self,
        _: &IndexPair,
        path: &PathEnergies,
        path_prime: &PathEnergies,
        widths: &[PointerWidth],
    ) -> f64 {
        (0..self.pointer_count())
            .map(|k| suppression_factor(self.readout(k, path) - self.readout(k, path_prime), widths[k]))
            .product()
    }

    fn noise_covariance(&self, widths: &[PointerWidth]) -> Option<Covariance> {
        let mut cov = [[0.0; 2]; 2];
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                for (k, width) in widths.iter().enumerate() {
                    let c = self.reconstruction[i][k] * self.reconstruction[j][k];
                    if c != 0.0 {
                        *entry += c * width.variance();
                    }
                }
            }
        }
        Some(cov)
    }
}

/// Name-indexed collection of schemes.
#[derive(Clone, Default)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, Arc<dyn MeasurementScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// UM, TPM, S1, S2 and S3.
    pub fn with_builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(Unmonitored));
        registry.register(Arc::new(TwoPointMeasurement));
        registry.register(Arc::new(LinearPointerScheme::s1()));
        registry.register(Arc::new(LinearPointerScheme::s2()));
        registry.register(Arc::new(LinearPointerScheme::s3()));
        registry
    }

    /// Adds a scheme, replacing any scheme of the same name.
    pub fn register(&mut self, scheme: Arc<dyn MeasurementScheme>) {
        self.schemes.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn MeasurementScheme>> {
        self.schemes
            .get(name)
            .cloned()
            .ok_or_else(|| OttoError::UnknownScheme(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.schemes.keys().map(String::as_str).collect()
    }

    /// Looks up `name` and attaches pointer widths.
    pub fn config(&self, name: &str, widths: Vec<PointerWidth>) -> Result<SchemeConfig> {
        SchemeConfig::new(self.get(name)?, widths)
    }

    /// Looks up `name` and gives every pointer the same width.
    pub fn uniform(&self, name: &str, width: PointerWidth) -> Result<SchemeConfig> {
        Ok(SchemeConfig::uniform(self.get(name)?, width))
    }
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.schemes.keys()).finish()
    }
}

/// A scheme together with its pointer widths.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    scheme: Arc<dyn MeasurementScheme>,
    widths: Vec<PointerWidth>,
}

impl SchemeConfig {
    pub fn new(scheme: Arc<dyn MeasurementScheme>, widths: Vec<PointerWidth>) -> Result<Self> {
        if widths.len() != scheme.pointer_count() {
            return Err(OttoError::WidthCount {
                scheme: scheme.name().to_string(),
                expected: scheme.pointer_count(),
                got: widths.len(),
            });
        }
        Ok(Self { scheme, widths })
    }

    pub fn uniform(scheme: Arc<dyn MeasurementScheme>, width: PointerWidth) -> Self {
        let widths = vec![width; scheme.pointer_count()];
        Self { scheme, widths }
    }

    pub fn name(&self) -> &str {
        self.scheme.name()
    }

    pub fn scheme(&self) -> &dyn MeasurementScheme {
        self.scheme.as_ref()
    }

    pub fn widths(&self) -> &[PointerWidth] {
        &self.widths
    }

    pub fn is_uniform(&self) -> bool {
        self.widths.windows(2).all(|w| w[0] == w[1])
    }

    pub fn suppression(&self, pair: &IndexPair, path: &PathEnergies, path_prime: &PathEnergies) -> f64 {
        self.scheme.suppression(pair, path, path_prime, &self.widths)
    }

    pub fn noise_covariance(&self) -> Option<Covariance> {
        self.scheme.noise_covariance(&self.widths)
    }
}
