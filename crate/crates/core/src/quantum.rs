//! States, POVMs and outcome distributions.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, ComplexMatrix, HermitianOperator, POSITIVITY_FLOOR};
use crate::{seeds, Error, Result};

/// Amplitudes at or below this magnitude count as zero when fixing the gauge.
pub const ZERO_AMPLITUDE: f64 = 1e-12;
/// Allowed deviation of `⟨ψ|ψ⟩` from 1 for states flagged as normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Frobenius tolerance on `Σ E^c - I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// A pure state vector `Σ c_j |j⟩`, possibly unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl PureState {
    /// Wraps raw amplitudes. The `normalized` flag is set iff the norm is
    /// already within [`NORM_TOL`] of 1.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParams(
                "state dimension must be positive".into(),
            ));
        }
        let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        Ok(Self {
            normalized: (n2 - 1.0).abs() <= NORM_TOL,
            amplitudes,
        })
    }

    /// Scales the amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(amplitudes)?.normalize()
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `⟨ψ|ψ⟩`
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= ZERO_AMPLITUDE {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
            normalized: true,
        })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let amplitudes: Vec<Complex64> = self.amplitudes.iter().map(|z| z * s).collect();
        let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        Self {
            normalized: (n2 - 1.0).abs() <= NORM_TOL,
            amplitudes,
        }
    }

    /// Index of the first amplitude with magnitude above [`ZERO_AMPLITUDE`].
    pub fn first_nonzero(&self) -> Option<usize> {
        self.amplitudes
            .iter()
            .position(|z| z.norm() > ZERO_AMPLITUDE)
    }

    /// Removes the global phase: the first nonzero amplitude becomes real and
    /// strictly positive.
    pub fn gauge_fix(&self) -> Result<Self> {
        let k = self.first_nonzero().ok_or(Error::ZeroVector)?;
        let z = self.amplitudes[k];
        let phase = (z / z.norm()).conj();
        let mut amplitudes: Vec<Complex64> = self.amplitudes.iter().map(|a| a * phase).collect();
        amplitudes[k] = Complex64::new(z.norm(), 0.0);
        Ok(Self {
            amplitudes,
            normalized: self.normalized,
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨ψ|E|ψ⟩`
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        linalg::expectation(op, &self.amplitudes)
    }

    /// Permutes basis labels: amplitude `k` moves to position `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.dim(), perm.len())?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (k, &to) in perm.iter().enumerate() {
            amps[to] = self.amplitudes[k];
        }
        Ok(Self {
            amplitudes: amps,
            normalized: self.normalized,
        })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.amplitudes)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`; invariant under global phase and scale.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na.sqrt() <= ZERO_AMPLITUDE || nb.sqrt() <= ZERO_AMPLITUDE {
        return Err(Error::ZeroVector);
    }
    Ok(a.inner(b)?.norm_sqr() / (na * nb))
}

/// Haar-random normalized, gauge-fixed state from i.i.d. complex Gaussians.
pub fn random_pure_state(dim: usize, seed: u64) -> PureState {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = seeds::rng(seed);
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        if let Ok(state) = PureState::normalized(amps).and_then(|s| s.gauge_fix()) {
            return state;
        }
    }
}

/// Ordered, labeled POVM elements summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl Povm {
    /// Validates positivity (min eigenvalue ≥ -1e-10) and completeness.
    pub fn new(labels: Vec<String>, elements: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let dim = first.dim();
        if labels.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        for (label, e) in labels.iter().zip(&elements) {
            check_dim(dim, e.dim())?;
            let min = e.min_eigenvalue();
            if min < -POSITIVITY_FLOOR {
                return Err(Error::InvalidPovm(format!(
                    "element {label} has negative eigenvalue {min:.3e}"
                )));
            }
        }
        let residual = completeness_residual(dim, &elements);
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {residual:.3e}"
            )));
        }
        Ok(Self {
            dim,
            elements,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element(&self, label: &str) -> Option<&HermitianOperator> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.elements[i])
    }

    /// `‖Σ E^c - I‖_F`
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(self.dim, &self.elements)
    }

    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.min_eigenvalue()).collect()
    }

    /// Outcome probabilities `⟨ψ|E^c|ψ⟩`.
    pub fn probabilities(&self, state: &PureState) -> Result<OutcomeDistribution> {
        probabilities(self, state)
    }

    /// Same POVM expressed after relabeling the basis by `perm`
    /// (basis vector `k` becomes basis vector `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.dim, perm.len())?;
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let mut m = ComplexMatrix::zeros(self.dim);
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m[(perm[i], perm[j])] = e.matrix()[(i, j)];
                    }
                }
                HermitianOperator::symmetrized(m)
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            elements,
            labels: self.labels.clone(),
        })
    }
}

fn completeness_residual(dim: usize, elements: &[HermitianOperator]) -> f64 {
    let sum = HermitianOperator::sum(dim, elements);
    (sum.matrix() - &ComplexMatrix::identity(dim)).frobenius_norm()
}

/// Real outcome probabilities, index-aligned with a [`Povm`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    values: Vec<f64>,
    normalized_state: bool,
}

impl OutcomeDistribution {
    /// Rejects entries below `-1e-12`, and sums off 1 by more than `1e-9`
    /// when `normalized_state` is set.
    pub fn new(values: Vec<f64>, normalized_state: bool) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "entry {v} is negative or not finite"
            )));
        }
        let total: f64 = values.iter().sum();
        if normalized_state && (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "values sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            values,
            normalized_state,
        })
    }

    /// No validation: noisy estimates and hand-built test inputs.
    pub fn raw(values: Vec<f64>, normalized_state: bool) -> Self {
        Self {
            values,
            normalized_state,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn normalized_state(&self) -> bool {
        self.normalized_state
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn probabilities(povm: &Povm, state: &PureState) -> Result<OutcomeDistribution> {
    check_dim(povm.dim(), state.dim())?;
    let values = povm
        .elements()
        .iter()
        .map(|e| state.expectation(e))
        .collect::<Result<Vec<f64>>>()?;
    Ok(OutcomeDistribution::raw(values, state.is_normalized()))
}

/// Qubit Bloch vector `m` with `|m⟩⟨m| = (I + m·σ)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn length(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }

    /// `n·σ`
    pub fn sigma(&self) -> HermitianOperator {
        let [x, y, z] = self.0;
        let m = ComplexMatrix::from_row_major(
            2,
            vec![
                Complex64::new(z, 0.0),
                Complex64::new(x, -y),
                Complex64::new(x, y),
                Complex64::new(-z, 0.0),
            ],
        )
        .expect("2x2");
        HermitianOperator::symmetrized(m)
    }
}

/// Bloch vector of a (possibly unnormalized) qubit state.
pub fn bloch_of_state(state: &PureState) -> Result<BlochVector> {
    check_dim(2, state.dim())?;
    let n = state.norm_sqr();
    if n.sqrt() <= ZERO_AMPLITUDE {
        return Err(Error::ZeroVector);
    }
    let a = state.amplitudes()[0];
    let b = state.amplitudes()[1];
    let cross = a.conj() * b;
    Ok(BlochVector::new(
        2.0 * cross.re / n,
        2.0 * cross.im / n,
        (a.norm_sqr() - b.norm_sqr()) / n,
    ))
}

/// Gauge-fixed normalized state `cos(ϑ/2)|0⟩ + e^{iφ} sin(ϑ/2)|1⟩` for a unit vector.
pub fn state_of_bloch(v: &BlochVector) -> Result<PureState> {
    let length = v.length();
    if (length - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitBloch { length });
    }
    let [x, y, z] = v.0;
    let z = (z / length).clamp(-1.0, 1.0);
    let c = ((1.0 + z) / 2.0).sqrt();
    let s = ((1.0 - z) / 2.0).sqrt();
    let rho = (x * x + y * y).sqrt();
    let phase = if rho > 0.0 {
        Complex64::new(x / rho, y / rho)
    } else {
        Complex64::new(1.0, 0.0)
    };
    PureState::new(vec![Complex64::new(c, 0.0), phase * s])?.gauge_fix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &PureState, b: &PureState, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn gauge_fix_removes_phase() {
        let s = PureState::new(vec![c(0., 1.), c(0., 0.)]).unwrap();
        assert!(close(
            &s.gauge_fix().unwrap(),
            &PureState::basis(2, 0).unwrap(),
            1e-15
        ));

        let base = PureState::new(vec![c(0.6, 0.), c(0., 0.8)]).unwrap();
        let rotated = base.scaled(Complex64::from_polar(1.0, PI / 3.0));
        assert!(close(&rotated.gauge_fix().unwrap(), &base, 1e-15));
    }

    #[test]
    fn gauge_fix_uses_first_nonzero() {
        let s = PureState::new(vec![c(0., 0.), c(-1., 0.), c(0.5, 0.)]).unwrap();
        let g = s.gauge_fix().unwrap();
        assert_eq!(g.amplitudes()[1], c(1., 0.));
        assert_eq!(g.amplitudes()[2], c(-0.5, 0.));
        assert_eq!(
            PureState::new(vec![c(0., 0.); 3]).unwrap().gauge_fix(),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn fidelity_examples() {
        let psi = random_pure_state(3, 5);
        let phased = psi.scaled(Complex64::from_polar(1.0, 1.234));
        assert!((fidelity(&psi, &phased).unwrap() - 1.0).abs() < 1e-14);
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        assert_eq!(fidelity(&z0, &z1).unwrap(), 0.0);
        let plus = PureState::normalized(vec![c(1., 0.), c(1., 0.)]).unwrap();
        assert!((fidelity(&z0, &plus).unwrap() - 0.5).abs() < 1e-15);
        let zero = PureState::new(vec![c(0., 0.), c(0., 0.)]).unwrap();
        assert_eq!(fidelity(&z0, &zero), Err(Error::ZeroVector));
        assert!(matches!(
            fidelity(&z0, &PureState::basis(3, 0).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_state_contract() {
        let one = random_pure_state(1, 99);
        assert!((one.amplitudes()[0] - c(1., 0.)).norm() < 1e-15);
        assert_eq!(random_pure_state(5, 42), random_pure_state(5, 42));
        assert_ne!(random_pure_state(5, 42), random_pure_state(5, 43));
        let s = random_pure_state(7, 3);
        assert!(s.is_normalized());
        assert!(s.amplitudes()[0].im == 0.0 && s.amplitudes()[0].re > 0.0);
    }

    #[test]
    fn haar_second_moments() {
        // E|c_j|^2 = 1/D; Var|c_j|^2 = (D-1)/(D^2 (D+1)) for Haar states.
        let dim = 4;
        let n = 10_000;
        let mut sums = [0.0; 4];
        for seed in 0..n {
            let s = random_pure_state(dim, seed as u64);
            for (j, z) in s.amplitudes().iter().enumerate() {
                sums[j] += z.norm_sqr();
            }
        }
        let d = dim as f64;
        let sigma = ((d - 1.0) / (d * d * (d + 1.0)) / n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64 - 0.25).abs() < 3.0 * sigma, "{s}");
        }
    }

    #[test]
    fn bloch_examples() {
        let z0 = PureState::basis(2, 0).unwrap();
        assert_eq!(bloch_of_state(&z0).unwrap(), BlochVector::new(0., 0., 1.));
        let plus = PureState::normalized(vec![c(1., 0.), c(1., 0.)]).unwrap();
        let b = bloch_of_state(&plus).unwrap();
        assert!((b.0[0] - 1.0).abs() < 1e-15 && b.0[1].abs() < 1e-15 && b.0[2].abs() < 1e-15);
        let south = state_of_bloch(&BlochVector::new(0., 0., -1.)).unwrap();
        assert!(close(&south, &PureState::basis(2, 1).unwrap(), 1e-15));
        assert!(matches!(
            state_of_bloch(&BlochVector::new(0.5, 0., 0.)),
            Err(Error::NonUnitBloch { .. })
        ));
        assert!(matches!(
            bloch_of_state(&PureState::basis(3, 0).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bloch_projector_matches_sigma_form() {
        let s = random_pure_state(2, 17);
        let m = bloch_of_state(&s).unwrap();
        let want = HermitianOperator::identity(2).add(&m.sigma()).scale(0.5);
        assert!((s.projector().matrix() - want.matrix()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn povm_rejects_invalid_sets() {
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!(Povm::new(
            vec!["a".into(), "b".into()],
            vec![half.clone(), half.clone()]
        )
        .is_ok());
        // completeness failure
        assert!(matches!(
            Povm::new(vec!["a".into()], vec![half.clone()]),
            Err(Error::InvalidPovm(_))
        ));
        // positivity failure, still complete
        let z = HermitianOperator::diagonal(&[1.0, -1.0]);
        let e1 = half.add(&z);
        let e2 = half.sub(&z);
        assert!(matches!(
            Povm::new(vec!["a".into(), "b".into()], vec![e1, e2]),
            Err(Error::InvalidPovm(_))
        ));
        assert!(matches!(
            Povm::new(vec!["a".into()], vec![half.clone(), half]),
            Err(Error::InvalidPovm(_))
        ));
    }

    #[test]
    fn permuted_povm_matches_permuted_state() {
        let e0 = HermitianOperator::diagonal(&[0.2, 0.0, 0.0]);
        let rest = HermitianOperator::identity(3).sub(&e0);
        let povm = Povm::new(vec!["a".into(), "b".into()], vec![e0, rest]).unwrap();
        let s = random_pure_state(3, 8);
        let perm = [2, 1, 0];
        let p1 = povm.probabilities(&s).unwrap();
        let p2 = povm
            .permuted(&perm)
            .unwrap()
            .probabilities(&s.permuted(&perm).unwrap())
            .unwrap();
        assert!(p1.max_abs_diff(&p2) < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn gauge_fix_idempotent(seed in any::<u64>(), dim in 1usize..8, phase in 0.0f64..std::f64::consts::TAU) {
                let s = random_pure_state(dim, seed).scaled(Complex64::from_polar(1.0, phase));
                let g = s.gauge_fix().unwrap();
                prop_assert_eq!(g.gauge_fix().unwrap(), g.clone());
                prop_assert!((fidelity(&s, &g).unwrap() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn bloch_round_trip(seed in any::<u64>()) {
                let s = random_pure_state(2, seed);
                let back = state_of_bloch(&bloch_of_state(&s).unwrap()).unwrap();
                prop_assert!(close(&back, &s, 1e-12));
            }
        }
    }
}
