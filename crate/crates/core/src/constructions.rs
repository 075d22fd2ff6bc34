//! POVM families.
//!
//! Index conventions: basis vectors are `|0⟩ … |D-1⟩`. The complementary
//! bases use the 1-based labels `e_1 … e_D`, `f_1 … f_D` with
//! `f_k = D^{-1/2} Σ_j e^{2πi jk/D} e_j`, stored as `|e_j⟩ = |j-1⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{inv_sqrt, ComplexMatrix, HermitianOperator, POSITIVITY_FLOOR};
use crate::quantum::{BlochVector, Povm, PureState};
use crate::{Error, Result};

/// Relative eigenvalue cutoff used when counting element ranks.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
}

fn check_pair(dim: usize, j: usize, k: usize) -> Result<()> {
    for idx in [j, k] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    if j == k {
        return Err(Error::IndicesEqual(j));
    }
    Ok(())
}

/// Pauli operator restricted to the span of `|j⟩, |k⟩`.
pub fn subspace_pauli(
    dim: usize,
    j: usize,
    k: usize,
    which: PauliKind,
) -> Result<HermitianOperator> {
    check_pair(dim, j, k)?;
    let mut m = ComplexMatrix::zeros(dim);
    match which {
        PauliKind::X => {
            m[(j, k)] = Complex64::new(1.0, 0.0);
            m[(k, j)] = Complex64::new(1.0, 0.0);
        }
        PauliKind::Y => {
            m[(j, k)] = Complex64::new(0.0, -1.0);
            m[(k, j)] = Complex64::new(0.0, 1.0);
        }
        PauliKind::Z => {
            m[(j, j)] = Complex64::new(1.0, 0.0);
            m[(k, k)] = Complex64::new(-1.0, 0.0);
        }
    }
    HermitianOperator::new(m)
}

/// `P_jk = |j⟩⟨j| + |k⟩⟨k|`
pub fn subspace_projector(dim: usize, j: usize, k: usize) -> Result<HermitianOperator> {
    check_pair(dim, j, k)?;
    let mut diag = vec![0.0; dim];
    diag[j] = 1.0;
    diag[k] = 1.0;
    Ok(HermitianOperator::diagonal(&diag))
}

fn basis_projector(dim: usize, k: usize) -> HermitianOperator {
    let mut diag = vec![0.0; dim];
    diag[k] = 1.0;
    HermitianOperator::diagonal(&diag)
}

/// Weights for the 2D-element construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoDConstructionParams {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
}

impl TwoDConstructionParams {
    pub fn new(dim: usize, a: f64, b: f64) -> Result<Self> {
        let p = Self { dim, a, b };
        p.validate()?;
        Ok(p)
    }

    /// `a = b = 1/(4D)`, which keeps the throw-away element positive for every D.
    pub fn default_for(dim: usize) -> Result<Self> {
        let w = 1.0 / (4.0 * dim as f64);
        Self::new(dim, w, w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParams(format!("dimension {} < 2", self.dim)));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "weights must be positive (a = {}, b = {})",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Outcome labels in POVM order: `E0, x,1..x,D-1, y,1..y,D-1, T`.
    pub fn labels(&self) -> Vec<String> {
        let d = self.dim;
        let mut labels = vec!["E0".to_string()];
        labels.extend((1..d).map(|j| format!("x,{j}")));
        labels.extend((1..d).map(|j| format!("y,{j}")));
        labels.push("T".into());
        labels
    }
}

/// `a|0⟩⟨0|`, `b(I + X_0j)`, `b(I + Y_0j)` and the throw-away `T`.
pub fn build_psic_2d(params: &TwoDConstructionParams) -> Result<Povm> {
    params.validate()?;
    let d = params.dim;
    let id = HermitianOperator::identity(d);
    let mut elements = vec![basis_projector(d, 0).scale(params.a)];
    for kind in [PauliKind::X, PauliKind::Y] {
        for j in 1..d {
            elements.push(id.add(&subspace_pauli(d, 0, j, kind)?).scale(params.b));
        }
    }
    let throwaway = id.sub(&HermitianOperator::sum(d, &elements));
    let min_eigenvalue = throwaway.min_eigenvalue();
    if min_eigenvalue < -POSITIVITY_FLOOR {
        return Err(Error::ThrowawayNotPositive { min_eigenvalue });
    }
    elements.push(throwaway);
    Povm::new(params.labels(), elements)
}

/// Angle and weights for the rank-one 3D-2 construction.
///
/// [`RankOneConstructionParams::new`] uses `b = 1/3`, `a = sin²(θ/2)`, for
/// which the frame operator is `I - cos²(θ/2)|D-1⟩⟨D-1|` and only the last
/// pair of elements is dressed. Other weights are allowed; the dressing then
/// acts on every element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOneConstructionParams {
    pub dim: usize,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
}

impl RankOneConstructionParams {
    pub fn new(dim: usize, theta: f64) -> Result<Self> {
        let half = (theta / 2.0).sin();
        Self::with_weights(dim, theta, half * half, 1.0 / 3.0)
    }

    pub fn with_weights(dim: usize, theta: f64, a: f64, b: f64) -> Result<Self> {
        let p = Self { dim, theta, a, b };
        p.validate()?;
        Ok(p)
    }

    /// `cos θ = -1/3`.
    pub fn tetrahedral_angle() -> f64 {
        (-1.0f64 / 3.0).acos()
    }

    /// Qubit, tetrahedral angle, `a = b = 1/2`: the frame operator is the
    /// identity and the POVM is exactly the tetrahedral measurement.
    pub fn tetrahedral_qubit() -> Self {
        Self::with_weights(2, Self::tetrahedral_angle(), 0.5, 0.5).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParams(format!("dimension {} < 2", self.dim)));
        }
        if !(self.theta > 0.0 && self.theta < PI) {
            return Err(Error::InvalidParams(format!(
                "theta = {} outside (0, pi)",
                self.theta
            )));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "weights must be positive (a = {}, b = {})",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn cos_half(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    pub fn sin_half(&self) -> f64 {
        (self.theta / 2.0).sin()
    }

    /// Labels: `E0`, then `{j-1},{j};{α}` for each consecutive pair.
    pub fn labels(&self) -> Vec<String> {
        let mut labels = vec!["E0".to_string()];
        for j in 1..self.dim {
            for alpha in 1..=3 {
                labels.push(format!("{},{};{}", j - 1, j, alpha));
            }
        }
        labels
    }

    /// Closed-form diagonal of the frame operator `G = Σ F^c` of the undressed elements.
    pub fn frame_diagonal(&self) -> Vec<f64> {
        let d = self.dim;
        let (c2, s2) = (self.cos_half().powi(2), self.sin_half().powi(2));
        let mut diag = vec![3.0 * self.b; d];
        diag[0] = self.a + 3.0 * self.b * c2;
        diag[d - 1] = 3.0 * self.b * s2;
        diag
    }
}

/// The four states `|ψ_{jk;0..3}⟩` in the span of `|j⟩, |k⟩`.
pub fn build_rank_one_states(
    params: &RankOneConstructionParams,
    j: usize,
    k: usize,
) -> Result<[PureState; 4]> {
    params.validate()?;
    check_pair(params.dim, j, k)?;
    let d = params.dim;
    let (c, s) = (params.cos_half(), params.sin_half());
    let state = |alpha: Option<u32>| -> Result<PureState> {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        match alpha {
            None => amps[j] = Complex64::new(1.0, 0.0),
            Some(a) => {
                amps[j] = Complex64::new(c, 0.0);
                amps[k] = Complex64::from_polar(s, 2.0 * PI * (a as f64 - 1.0) / 3.0);
            }
        }
        PureState::new(amps)
    };
    Ok([
        state(None)?,
        state(Some(1))?,
        state(Some(2))?,
        state(Some(3))?,
    ])
}

/// Undressed elements `a|0⟩⟨0|`, `b|ψ_{j-1,j;α}⟩⟨ψ_{j-1,j;α}|`.
pub fn rank_one_raw_elements(params: &RankOneConstructionParams) -> Result<Vec<HermitianOperator>> {
    params.validate()?;
    let d = params.dim;
    let mut elements = vec![basis_projector(d, 0).scale(params.a)];
    for j in 1..d {
        let states = build_rank_one_states(params, j - 1, j)?;
        for s in &states[1..] {
            elements.push(s.projector().scale(params.b));
        }
    }
    Ok(elements)
}

/// Rank-one POVM together with its frame operator `G`.
#[derive(Clone, Debug)]
pub struct RankOneConstruction {
    pub povm: Povm,
    pub frame: HermitianOperator,
}

/// Builds the 3D-2 element rank-one POVM and checks the summed frame
/// operator against its closed form to 1e-12.
pub fn build_rank_one_3dm2_with_frame(
    params: &RankOneConstructionParams,
) -> Result<RankOneConstruction> {
    let raw = rank_one_raw_elements(params)?;
    let (povm, frame) = normalize_labeled(params.labels(), &raw)?;
    let closed = HermitianOperator::diagonal(&params.frame_diagonal());
    let gap = (frame.matrix() - closed.matrix()).max_abs_entry();
    if gap > 1e-12 {
        return Err(Error::Consistency(format!(
            "frame operator differs from closed form by {gap:.3e}"
        )));
    }
    for (label, e) in povm.labels().iter().zip(povm.elements()) {
        if e.rank(RANK_TOL) != 1 {
            return Err(Error::Consistency(format!(
                "element {label} is not rank one"
            )));
        }
    }
    Ok(RankOneConstruction { povm, frame })
}

pub fn build_rank_one_3dm2(params: &RankOneConstructionParams) -> Result<Povm> {
    Ok(build_rank_one_3dm2_with_frame(params)?.povm)
}

/// Qubit POVM `E^c = w I + w n^c·σ`.
fn qubit_povm(vectors: &[BlochVector], weight: f64, labels: Vec<String>) -> Result<Povm> {
    let id = HermitianOperator::identity(2);
    let elements = vectors
        .iter()
        .map(|n| id.add(&n.sigma()).scale(weight))
        .collect();
    Povm::new(labels, elements)
}

/// Tetrahedron vertices with apex at the north pole.
pub fn tetrahedral_vectors() -> [BlochVector; 4] {
    let r2 = 2f64.sqrt();
    [
        BlochVector::new(0.0, 0.0, 1.0),
        BlochVector::new(2.0 * r2 / 3.0, 0.0, -1.0 / 3.0),
        BlochVector::new(-r2 / 3.0, (2.0f64 / 3.0).sqrt(), -1.0 / 3.0),
        BlochVector::new(-r2 / 3.0, -(2.0f64 / 3.0).sqrt(), -1.0 / 3.0),
    ]
}

/// Equilateral triangle in the equatorial plane.
pub fn trine_vectors() -> [BlochVector; 3] {
    let h = 3f64.sqrt() / 2.0;
    [
        BlochVector::new(1.0, 0.0, 0.0),
        BlochVector::new(-0.5, h, 0.0),
        BlochVector::new(-0.5, -h, 0.0),
    ]
}

pub fn build_tetrahedral() -> Povm {
    let labels = (1..=4).map(|c| format!("n{c}")).collect();
    qubit_povm(&tetrahedral_vectors(), 0.25, labels).expect("tetrahedral POVM is valid")
}

pub fn build_trine() -> Povm {
    let labels = (1..=3).map(|c| format!("n{c}")).collect();
    qubit_povm(&trine_vectors(), 1.0 / 3.0, labels).expect("trine POVM is valid")
}

/// `|f_k⟩` for `k = 1..D`, amplitudes indexed by `j - 1`.
pub fn fourier_vector(dim: usize, k: usize) -> Vec<Complex64> {
    let norm = 1.0 / (dim as f64).sqrt();
    (1..=dim)
        .map(|j| Complex64::from_polar(norm, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64))
        .collect()
}

/// `(1/2)|e_c⟩⟨e_c|` then `(1/2)|f_c⟩⟨f_c|`, labels `e1..eD, f1..fD`.
pub fn build_complementary_bases(dim: usize) -> Result<Povm> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("dimension {dim} < 2")));
    }
    let mut labels = Vec::with_capacity(2 * dim);
    let mut elements = Vec::with_capacity(2 * dim);
    for c in 1..=dim {
        labels.push(format!("e{c}"));
        elements.push(basis_projector(dim, c - 1).scale(0.5));
    }
    for c in 1..=dim {
        labels.push(format!("f{c}"));
        elements.push(HermitianOperator::projector(&fourier_vector(dim, c)).scale(0.5));
    }
    Povm::new(labels, elements)
}

/// Merges `e_D` and `f_D` of a complementary-bases POVM into one element,
/// placed last: `e1..e{D-1}, f1..f{D-1}, eD+fD`.
pub fn amalgamate_last_pair(povm: &Povm) -> Result<Povm> {
    let d = povm.dim();
    let expected: Vec<String> = (1..=d)
        .map(|c| format!("e{c}"))
        .chain((1..=d).map(|c| format!("f{c}")))
        .collect();
    if povm.labels() != expected.as_slice() {
        return Err(Error::InvalidPovm(
            "amalgamation expects a complementary-bases POVM".into(),
        ));
    }
    let els = povm.elements();
    let mut labels = Vec::with_capacity(2 * d - 1);
    let mut elements = Vec::with_capacity(2 * d - 1);
    for c in 0..d - 1 {
        labels.push(expected[c].clone());
        elements.push(els[c].clone());
    }
    for c in d..2 * d - 1 {
        labels.push(expected[c].clone());
        elements.push(els[c].clone());
    }
    labels.push(format!("e{d}+f{d}"));
    elements.push(els[d - 1].add(&els[2 * d - 1]));
    Povm::new(labels, elements)
}

/// `E^c = G^{-1/2} F^c G^{-1/2}` with `G = Σ F^c`; labels `E0, E1, …`.
pub fn normalize_elements(elements: &[HermitianOperator]) -> Result<(Povm, HermitianOperator)> {
    let labels = (0..elements.len()).map(|c| format!("E{c}")).collect();
    normalize_labeled(labels, elements)
}

/// As [`normalize_elements`], with caller-provided labels.
pub fn normalize_labeled(
    labels: Vec<String>,
    elements: &[HermitianOperator],
) -> Result<(Povm, HermitianOperator)> {
    let Some(first) = elements.first() else {
        return Err(Error::InvalidPovm("no elements".into()));
    };
    let d = first.dim();
    let frame = HermitianOperator::sum(d, elements);
    let dressing = inv_sqrt(&frame, POSITIVITY_FLOOR).map_err(|e| match e {
        Error::SingularOperator { eigenvalue, .. } => Error::SingularFrame {
            min_eigenvalue: eigenvalue,
        },
        other => other,
    })?;
    let dressed: Vec<HermitianOperator> =
        elements.iter().map(|f| f.congruence(&dressing)).collect();
    for (f, e) in elements.iter().zip(&dressed) {
        if f.rank(RANK_TOL) != e.rank(RANK_TOL) {
            return Err(Error::Consistency(
                "dressing changed an element rank".into(),
            ));
        }
    }
    Ok((Povm::new(labels, dressed)?, frame))
}
