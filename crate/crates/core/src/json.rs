//! JSON wire formats. Complex numbers are `[re, im]` pairs; matrices are
//! row-major arrays of rows. Every document carries a `meta` header.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{AmbiguityWitness, CertificationStats, FrameReport};
use crate::quantum::{OutcomeDistribution, Povm, PureState};
use crate::reconstruction::ReconstructionReport;
use crate::{Complex64, ComplexMatrix, Error, HermitianOperator, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub type WireComplex = [f64; 2];

fn to_wire(z: &Complex64) -> WireComplex {
    [z.re, z.im]
}

fn from_wire(z: &WireComplex) -> Complex64 {
    Complex64::new(z[0], z[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub params: Value,
}

impl Meta {
    pub fn new(seed: Option<u64>, params: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            params,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub amplitudes: Vec<WireComplex>,
}

impl StateJson {
    pub fn from_state(state: &PureState) -> Self {
        Self {
            dim: state.dim(),
            amplitudes: state.amplitudes().iter().map(to_wire).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        if self.amplitudes.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.amplitudes.len(),
            });
        }
        PureState::new(self.amplitudes.iter().map(from_wire).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub label: String,
    pub matrix: Vec<Vec<WireComplex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationJson {
    pub min_eigenvalues: Vec<f64>,
    pub completeness_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub dim: usize,
    pub elements: Vec<ElementJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationJson>,
}

impl PovmJson {
    pub fn from_povm(povm: &Povm, meta: Option<Meta>) -> Self {
        let elements = povm
            .labels()
            .iter()
            .zip(povm.elements())
            .map(|(label, e)| {
                let m = e.matrix();
                ElementJson {
                    label: label.clone(),
                    matrix: (0..m.dim())
                        .map(|i| m.row(i).iter().map(to_wire).collect())
                        .collect(),
                }
            })
            .collect();
        Self {
            meta,
            dim: povm.dim(),
            elements,
            validation: Some(ValidationJson {
                min_eigenvalues: povm.min_eigenvalues(),
                completeness_residual: povm.completeness_residual(),
            }),
        }
    }

    /// Rebuilds and revalidates the POVM; the stored validation block is ignored.
    pub fn to_povm(&self) -> Result<Povm> {
        let mut labels = Vec::with_capacity(self.elements.len());
        let mut ops = Vec::with_capacity(self.elements.len());
        for el in &self.elements {
            if el.matrix.len() != self.dim || el.matrix.iter().any(|r| r.len() != self.dim) {
                return Err(Error::InvalidPovm(format!(
                    "element {} is not {}x{}",
                    el.label, self.dim, self.dim
                )));
            }
            let entries = el.matrix.iter().flatten().map(from_wire).collect();
            ops.push(HermitianOperator::new(ComplexMatrix::from_row_major(
                self.dim, entries,
            )?)?);
            labels.push(el.label.clone());
        }
        Povm::new(labels, ops)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub normalized_state: bool,
    /// The state the values were computed from, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateJson>,
}

impl DistributionJson {
    pub fn new(
        labels: &[String],
        dist: &OutcomeDistribution,
        state: Option<&PureState>,
        meta: Option<Meta>,
    ) -> Self {
        Self {
            meta,
            labels: labels.to_vec(),
            values: dist.values().to_vec(),
            normalized_state: dist.normalized_state(),
            state: state.map(StateJson::from_state),
        }
    }

    pub fn to_distribution(&self) -> Result<OutcomeDistribution> {
        if self.labels.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                got: self.values.len(),
            });
        }
        OutcomeDistribution::new(self.values.clone(), self.normalized_state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub success: bool,
    pub dim: usize,
    /// Absent on failure.
    pub amplitudes: Option<Vec<WireComplex>>,
    /// `null` on failure (the residual is infinite).
    pub residual: Option<f64>,
    pub failure: Option<String>,
    pub chain_norms: Vec<f64>,
    /// Against the reference state embedded in the input, when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

impl ReportJson {
    pub fn new(
        report: &ReconstructionReport,
        dim: usize,
        fidelity: Option<f64>,
        meta: Option<Meta>,
    ) -> Self {
        Self {
            meta,
            success: report.is_success(),
            dim,
            amplitudes: report
                .state
                .as_ref()
                .map(|s| s.amplitudes().iter().map(to_wire).collect()),
            residual: report.residual.is_finite().then_some(report.residual),
            failure: report.failure.map(|f| f.to_string()),
            chain_norms: report.chain_norms.clone(),
            fidelity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub frame_rank: usize,
    pub dim_hermitian: usize,
    pub is_ic: bool,
    pub singular_values: Vec<f64>,
    /// Present for families with a closed-form inversion.
    pub certification: Option<CertificationJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationJson {
    pub trials: usize,
    pub successes: usize,
    pub declared_failures: usize,
    pub silent_failures: usize,
    pub worst_residual: Option<f64>,
    pub min_fidelity: f64,
    pub passed: bool,
}

impl CheckJson {
    pub fn new(frame: &FrameReport, cert: Option<&CertificationStats>, meta: Option<Meta>) -> Self {
        Self {
            meta,
            frame_rank: frame.frame_rank,
            dim_hermitian: frame.dim_hermitian,
            is_ic: frame.is_ic,
            singular_values: frame.singular_values.clone(),
            certification: cert.map(|c| CertificationJson {
                trials: c.trials,
                successes: c.successes,
                declared_failures: c.declared_failures,
                silent_failures: c.silent_failures,
                worst_residual: c.worst_residual.is_finite().then_some(c.worst_residual),
                min_fidelity: c.min_fidelity,
                passed: c.passed,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub found: bool,
    pub state_a: Option<StateJson>,
    pub state_b: Option<StateJson>,
    pub prob_gap: Option<f64>,
    pub infidelity: Option<f64>,
    pub restart: Option<usize>,
}

impl WitnessJson {
    pub fn new(witness: Option<&AmbiguityWitness>, meta: Option<Meta>) -> Self {
        Self {
            meta,
            found: witness.is_some(),
            state_a: witness.map(|w| StateJson::from_state(&w.state_a)),
            state_b: witness.map(|w| StateJson::from_state(&w.state_b)),
            prob_gap: witness.map(|w| w.prob_gap),
            infidelity: witness.map(|w| w.infidelity),
            restart: witness.map(|w| w.restart),
        }
    }
}

/// Accepts either a bare state object or one wrapped as `{"state": {...}}`.
pub fn parse_state(text: &str) -> Result<PureState> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        Bare(StateJson),
        Wrapped { state: StateJson },
    }
    let parsed: Input =
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("state JSON: {e}")))?;
    match parsed {
        Input::Bare(s) | Input::Wrapped { state: s } => s.to_state(),
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("{what} JSON: {e}")))
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire types serialize")
}
