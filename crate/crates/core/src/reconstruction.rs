//! Closed-form inversion of outcome probabilities for the two PS-I-complete
//! families.
//!
//! Both inversions anchor on the amplitude of `|0⟩` and propagate from it.
//! Inputs in the measure-zero failure sets (vanishing anchor, broken chain)
//! produce a report with a [`ReconstructionFailure`] and no state.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::constructions::{
    build_psic_2d, build_rank_one_3dm2, RankOneConstructionParams, TwoDConstructionParams,
};
use crate::quantum::{OutcomeDistribution, Povm, PureState};
use crate::{Error, Result};

/// Cutoff on the squared anchor amplitude `|c_0|²`.
pub const ANCHOR_TOL: f64 = 1e-12;
/// Cutoff on squared intermediate amplitudes `|φ_{j-1}|²` in the rank-one chain.
pub const CHAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconstructionFailure {
    /// `|c_0|²` below [`ANCHOR_TOL`].
    ZeroAnchorAmplitude,
    /// `|φ_{j-1}|²` below [`CHAIN_TOL`] while solving for amplitude `j`.
    ChainBroken(usize),
    /// The anchor probability is negative beyond tolerance.
    NegativeRadicand,
}

impl fmt::Display for ReconstructionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroAnchorAmplitude => write!(f, "ZeroAnchorAmplitude"),
            Self::ChainBroken(j) => write!(f, "ChainBroken({j})"),
            Self::NegativeRadicand => write!(f, "NegativeRadicand"),
        }
    }
}

/// `φ` and chain norms, or the failure with whatever chain norms were recovered.
type AuxResult = std::result::Result<(Vec<Complex64>, Vec<f64>), (ReconstructionFailure, Vec<f64>)>;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    /// Gauge-fixed recovered state at its natural scale; `None` on failure.
    pub state: Option<PureState>,
    /// Max `|p_predicted - p_input|` over all outcomes, re-predicted from
    /// `state`; infinite on failure.
    pub residual: f64,
    pub failure: Option<ReconstructionFailure>,
    /// Rank-one inversion only: `|φ_j|²` recovered from the α-sums, `j = 0..D-1`
    /// (entry 0 is the anchor). Empty for the 2D inversion.
    pub chain_norms: Vec<f64>,
}

impl ReconstructionReport {
    fn failed(failure: ReconstructionFailure, chain_norms: Vec<f64>) -> Self {
        Self {
            state: None,
            residual: f64::INFINITY,
            failure: Some(failure),
            chain_norms,
        }
    }

    fn success(
        povm: &Povm,
        probs: &OutcomeDistribution,
        state: PureState,
        chain_norms: Vec<f64>,
    ) -> Result<Self> {
        let state = state.gauge_fix()?;
        let predicted = povm.probabilities(&state)?;
        Ok(Self {
            residual: predicted.max_abs_diff(probs),
            state: Some(state),
            failure: None,
            chain_norms,
        })
    }

    pub fn is_success(&self) -> bool {
        self.failure.is_none() && self.state.is_some()
    }
}

/// A POVM paired with a matching inversion.
pub trait Inverter: Sync {
    fn povm(&self) -> &Povm;
    fn invert(&self, probs: &OutcomeDistribution) -> Result<ReconstructionReport>;
    fn id(&self) -> String;
}

fn check_len(probs: &OutcomeDistribution, expected: usize) -> Result<()> {
    if probs.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: probs.len(),
        });
    }
    Ok(())
}

/// Squared anchor amplitude `p⁰/a`, or the failure it signals.
fn anchor(p0: f64, a: f64) -> std::result::Result<f64, ReconstructionFailure> {
    let r2 = p0 / a;
    if r2 < -ANCHOR_TOL {
        return Err(ReconstructionFailure::NegativeRadicand);
    }
    if r2 < ANCHOR_TOL {
        return Err(ReconstructionFailure::ZeroAnchorAmplitude);
    }
    Ok(r2)
}

/// Inverter for the 2D-element construction.
#[derive(Clone, Debug)]
pub struct TwoDInverter {
    params: TwoDConstructionParams,
    povm: Povm,
}

impl TwoDInverter {
    pub fn new(params: TwoDConstructionParams) -> Result<Self> {
        Ok(Self {
            povm: build_psic_2d(&params)?,
            params,
        })
    }

    pub fn params(&self) -> &TwoDConstructionParams {
        &self.params
    }
}

impl Inverter for TwoDInverter {
    fn povm(&self) -> &Povm {
        &self.povm
    }

    /// `r_0 = √(p⁰/a)`, `x_j = (p^{x,j} - b)/(2b r_0)`, `y_j = (p^{y,j} - b)/(2b r_0)`.
    /// Assumes the probabilities come from a normalized state.
    fn invert(&self, probs: &OutcomeDistribution) -> Result<ReconstructionReport> {
        let TwoDConstructionParams { dim, a, b } = self.params;
        check_len(probs, 2 * dim)?;
        let p = probs.values();
        let r0 = match anchor(p[0], a) {
            Ok(r2) => r2.sqrt(),
            Err(f) => return Ok(ReconstructionReport::failed(f, Vec::new())),
        };
        let mut amps = Vec::with_capacity(dim);
        amps.push(Complex64::new(r0, 0.0));
        for j in 1..dim {
            let x = (p[j] - b) / (2.0 * b * r0);
            let y = (p[dim - 1 + j] - b) / (2.0 * b * r0);
            amps.push(Complex64::new(x, y));
        }
        ReconstructionReport::success(&self.povm, probs, PureState::new(amps)?, Vec::new())
    }

    fn id(&self) -> String {
        format!(
            "psic2d(D={}, a={}, b={})",
            self.params.dim, self.params.a, self.params.b
        )
    }
}

pub fn invert_psic_2d(
    probs: &OutcomeDistribution,
    params: &TwoDConstructionParams,
) -> Result<ReconstructionReport> {
    TwoDInverter::new(*params)?.invert(probs)
}

/// Inverter for the rank-one 3D-2 construction.
#[derive(Clone, Debug)]
pub struct RankOneInverter {
    params: RankOneConstructionParams,
    povm: Povm,
    sqrt_frame: Vec<f64>,
}

impl RankOneInverter {
    pub fn new(params: RankOneConstructionParams) -> Result<Self> {
        Ok(Self {
            povm: build_rank_one_3dm2(&params)?,
            sqrt_frame: params.frame_diagonal().iter().map(|g| g.sqrt()).collect(),
            params,
        })
    }

    pub fn params(&self) -> &RankOneConstructionParams {
        &self.params
    }

    /// Recovers the auxiliary vector `φ = G^{-1/2}ψ` from the dressed
    /// probabilities, which equal the undressed ones evaluated on `φ`.
    fn solve_aux(&self, p: &[f64]) -> AuxResult {
        let params = &self.params;
        let d = params.dim;
        let (c, s) = (params.cos_half(), params.sin_half());
        let sin_theta = params.theta.sin();
        let phi0_sq = anchor(p[0], params.a).map_err(|f| (f, Vec::new()))?;
        let mut phi = vec![Complex64::new(phi0_sq.sqrt(), 0.0)];
        let mut norms = vec![phi0_sq];
        for j in 1..d {
            let prev = phi[j - 1];
            let prev_sq = prev.norm_sqr();
            if prev_sq < CHAIN_TOL {
                return Err((ReconstructionFailure::ChainBroken(j), norms));
            }
            let q: Vec<f64> = (0..3).map(|k| p[1 + 3 * (j - 1) + k] / params.b).collect();
            // q_α = c²|φ_{j-1}|² + s²|φ_j|² + sinθ Re(e^{-iω_α} φ̄_{j-1}φ_j),  ω_α = 2π(α-1)/3
            let mut cross = Complex64::new(0.0, 0.0);
            for (k, qa) in q.iter().enumerate() {
                let omega = 2.0 * PI * k as f64 / 3.0;
                cross += Complex64::new(qa * omega.cos(), qa * omega.sin());
            }
            let cross = cross * (2.0 / (3.0 * sin_theta));
            norms.push((q.iter().sum::<f64>() / 3.0 - c * c * prev_sq) / (s * s));
            phi.push(cross * prev / prev_sq);
        }
        Ok((phi, norms))
    }
}

impl Inverter for RankOneInverter {
    fn povm(&self) -> &Povm {
        &self.povm
    }

    fn invert(&self, probs: &OutcomeDistribution) -> Result<ReconstructionReport> {
        check_len(probs, 3 * self.params.dim - 2)?;
        match self.solve_aux(probs.values()) {
            Err((failure, norms)) => Ok(ReconstructionReport::failed(failure, norms)),
            Ok((phi, norms)) => {
                let psi: Vec<Complex64> = phi
                    .iter()
                    .zip(&self.sqrt_frame)
                    .map(|(z, g)| z * g)
                    .collect();
                ReconstructionReport::success(&self.povm, probs, PureState::new(psi)?, norms)
            }
        }
    }

    fn id(&self) -> String {
        let p = &self.params;
        format!(
            "rank1-3dm2(D={}, theta={}, a={}, b={})",
            p.dim, p.theta, p.a, p.b
        )
    }
}

pub fn invert_rank_one_3dm2(
    probs: &OutcomeDistribution,
    params: &RankOneConstructionParams,
) -> Result<ReconstructionReport> {
    RankOneInverter::new(*params)?.invert(probs)
}

/// Index of the most frequent computational-basis outcome (ties go to the
/// lowest index). That basis vector then plays the role of `|0⟩`.
pub fn premeasure_basis_choice(freqs: &OutcomeDistribution) -> usize {
    let mut best = 0;
    for (k, &v) in freqs.values().iter().enumerate() {
        if v > freqs.values()[best] {
            best = k;
        }
    }
    best
}

/// Basis relabeling that swaps `|0⟩` and `|anchor⟩`; it is its own inverse.
pub fn anchor_permutation(dim: usize, anchor: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.swap(0, anchor);
    perm
}
