//! Certificates for informational completeness.
//!
//! * [`frame_rank`]: dimension of the span of the POVM elements inside the
//!   D²-dimensional real space of Hermitian operators.
//! * [`certify_psic`]: Monte Carlo round trips over Haar-random states.
//! * [`find_ambiguity`]: multi-start search for a second normalized state with
//!   the same outcome probabilities as a target.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constructions::{subspace_pauli, subspace_projector, PauliKind};
use crate::linalg::{singular_values, ComplexMatrix, HermitianOperator};
use crate::quantum::{
    bloch_of_state, fidelity, random_pure_state, state_of_bloch, BlochVector, OutcomeDistribution,
    Povm, PureState,
};
use crate::reconstruction::{Inverter, ReconstructionReport};
use crate::{seeds, Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Round trips at or above this fidelity count as successes.
pub const SUCCESS_FIDELITY: f64 = 1.0 - 1e-9;
/// Witness acceptance thresholds.
pub const WITNESS_MAX_PROB_GAP: f64 = 1e-8;
pub const WITNESS_MIN_INFIDELITY: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub frame_rank: usize,
    pub dim_hermitian: usize,
    pub is_ic: bool,
    /// Descending.
    pub singular_values: Vec<f64>,
}

/// Orthonormal (Hilbert-Schmidt) Hermitian basis: `I/√D`, the off-diagonal
/// generalized Gell-Mann matrices, and the diagonal ones, all scaled to unit norm.
pub fn hermitian_basis(dim: usize) -> Vec<HermitianOperator> {
    let mut basis = vec![HermitianOperator::identity(dim).scale(1.0 / (dim as f64).sqrt())];
    let r = 0.5f64.sqrt();
    for j in 0..dim {
        for k in (j + 1)..dim {
            basis.push(
                subspace_pauli(dim, j, k, PauliKind::X)
                    .expect("j < k")
                    .scale(r),
            );
            basis.push(
                subspace_pauli(dim, j, k, PauliKind::Y)
                    .expect("j < k")
                    .scale(r),
            );
        }
    }
    for l in 1..dim {
        let mut diag = vec![0.0; dim];
        diag[..l].iter_mut().for_each(|d| *d = 1.0);
        diag[l] = -(l as f64);
        let norm = ((l * (l + 1)) as f64).sqrt();
        diag.iter_mut().for_each(|d| *d /= norm);
        basis.push(HermitianOperator::diagonal(&diag));
    }
    basis
}

/// Real coefficients of `op` in [`hermitian_basis`].
pub fn hermitian_coefficients(op: &HermitianOperator, basis: &[HermitianOperator]) -> Vec<f64> {
    basis.iter().map(|b| b.trace_product(op)).collect()
}

/// Rank counts singular values above `tol` times the largest.
pub fn frame_rank(povm: &Povm, tol: f64) -> FrameReport {
    let d = povm.dim();
    let basis = hermitian_basis(d);
    let rows: Vec<Vec<f64>> = povm
        .elements()
        .iter()
        .map(|e| hermitian_coefficients(e, &basis))
        .collect();
    let singular_values = singular_values(&rows);
    let top = singular_values.first().copied().unwrap_or(0.0);
    let frame_rank = singular_values.iter().filter(|&&s| s > tol * top).count();
    FrameReport {
        frame_rank,
        dim_hermitian: d * d,
        is_ic: frame_rank == d * d,
        singular_values,
    }
}

/// Inverter that ignores its input and always answers `|0⟩`; a negative
/// control for [`certify_psic`].
#[derive(Clone, Debug)]
pub struct NullInverter {
    povm: Povm,
}

impl NullInverter {
    pub fn new(povm: Povm) -> Self {
        Self { povm }
    }
}

impl Inverter for NullInverter {
    fn povm(&self) -> &Povm {
        &self.povm
    }

    fn invert(&self, probs: &OutcomeDistribution) -> Result<ReconstructionReport> {
        let state = PureState::basis(self.povm.dim(), 0)?;
        let predicted = self.povm.probabilities(&state)?;
        Ok(ReconstructionReport {
            residual: predicted.max_abs_diff(probs),
            state: Some(state),
            failure: None,
            chain_norms: Vec::new(),
        })
    }

    fn id(&self) -> String {
        "null".into()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationStats {
    pub trials: usize,
    pub successes: usize,
    pub declared_failures: usize,
    pub silent_failures: usize,
    pub worst_residual: f64,
    pub min_fidelity: f64,
    pub passed: bool,
}

enum TrialOutcome {
    Success { residual: f64, fidelity: f64 },
    Declared,
    Silent { fidelity: f64 },
}

/// Forward-then-invert on `trials` Haar states (trial `i` uses seed
/// `derive(seed, i)`). Passes when every trial either succeeds or lands in a
/// declared failure set, and declared failures are at most 1% of trials.
pub fn certify_psic(inverter: &dyn Inverter, trials: usize, seed: u64) -> CertificationStats {
    let dim = inverter.povm().dim();
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let psi = random_pure_state(dim, seeds::derive(seed, i as u64));
            let report = inverter
                .povm()
                .probabilities(&psi)
                .and_then(|p| inverter.invert(&p));
            match report {
                Ok(rep) if rep.failure.is_some() => TrialOutcome::Declared,
                Ok(ReconstructionReport {
                    state: Some(s),
                    residual,
                    ..
                }) => {
                    let f = fidelity(&s, &psi).unwrap_or(0.0);
                    if f >= SUCCESS_FIDELITY {
                        TrialOutcome::Success {
                            residual,
                            fidelity: f,
                        }
                    } else {
                        TrialOutcome::Silent { fidelity: f }
                    }
                }
                _ => TrialOutcome::Silent { fidelity: 0.0 },
            }
        })
        .collect();

    let mut stats = CertificationStats {
        trials,
        successes: 0,
        declared_failures: 0,
        silent_failures: 0,
        worst_residual: 0.0,
        min_fidelity: 1.0,
        passed: false,
    };
    for o in outcomes {
        match o {
            TrialOutcome::Success { residual, fidelity } => {
                stats.successes += 1;
                stats.worst_residual = stats.worst_residual.max(residual);
                stats.min_fidelity = stats.min_fidelity.min(fidelity);
            }
            TrialOutcome::Declared => stats.declared_failures += 1,
            TrialOutcome::Silent { fidelity } => {
                stats.silent_failures += 1;
                stats.min_fidelity = stats.min_fidelity.min(fidelity);
            }
        }
    }
    stats.passed = stats.silent_failures == 0
        && stats.successes + stats.declared_failures == trials
        && stats.declared_failures * 100 <= trials;
    stats
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguityWitness {
    pub state_a: PureState,
    pub state_b: PureState,
    /// Max outcome-probability difference.
    pub prob_gap: f64,
    /// `1 - fidelity(state_a, state_b)`.
    pub infidelity: f64,
    /// Index of the restart that produced the witness.
    pub restart: usize,
}

/// Tuning for [`find_ambiguity`].
#[derive(Clone, Copy, Debug)]
pub struct AmbiguitySearch {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    /// Penalty weight ρ on `max(0, F - repulsion_fidelity)²`.
    pub repulsion: f64,
    pub repulsion_fidelity: f64,
}

impl AmbiguitySearch {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            max_iterations: 2000,
            gradient_tol: 1e-10,
            repulsion: 10.0,
            repulsion_fidelity: 0.99,
        }
    }
}

/// Searches for `ψ'` with `p(ψ') = p(target)` and `fidelity(ψ', target) < 0.999`.
/// `Ok(None)` means no witness was found, not that the target is unique.
pub fn find_ambiguity(
    povm: &Povm,
    target: &PureState,
    restarts: usize,
    seed: u64,
) -> Result<Option<AmbiguityWitness>> {
    search_ambiguity(povm, target, &AmbiguitySearch::new(restarts, seed))
}

pub fn search_ambiguity(
    povm: &Povm,
    target: &PureState,
    cfg: &AmbiguitySearch,
) -> Result<Option<AmbiguityWitness>> {
    if povm.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: target.dim(),
        });
    }
    let target = target.normalize()?.gauge_fix()?;
    let goal = povm.probabilities(&target)?;
    let problem = Objective {
        povm,
        goal: goal.values(),
        target: target.amplitudes(),
        sqrt_rho: cfg.repulsion.sqrt(),
        threshold: cfg.repulsion_fidelity,
    };
    let found = (0..cfg.restarts).into_par_iter().find_map_first(|r| {
        let start = random_pure_state(povm.dim(), seeds::derive(cfg.seed, r as u64));
        let end = problem.minimize(start.amplitudes(), cfg);
        let candidate = PureState::normalized(end).ok()?.gauge_fix().ok()?;
        let p = povm.probabilities(&candidate).ok()?;
        let prob_gap = p.max_abs_diff(&goal);
        let infidelity = 1.0 - fidelity(&candidate, &target).ok()?;
        (prob_gap <= WITNESS_MAX_PROB_GAP && infidelity >= WITNESS_MIN_INFIDELITY).then(|| {
            AmbiguityWitness {
                state_a: target.clone(),
                state_b: candidate,
                prob_gap,
                infidelity,
                restart: r,
            }
        })
    });
    Ok(found)
}

/// Least-squares objective over the real coordinates `ξ = (Re ψ, Im ψ)`.
struct Objective<'a> {
    povm: &'a Povm,
    goal: &'a [f64],
    target: &'a [Complex64],
    sqrt_rho: f64,
    threshold: f64,
}

impl Objective<'_> {
    /// Residuals and their Jacobian (rows = residuals, cols = 2D coordinates).
    fn residuals(&self, psi: &[Complex64], with_jacobian: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = psi.len();
        let mut res = Vec::with_capacity(self.goal.len() + 1);
        let mut jac = Vec::new();
        for (e, &g) in self.povm.elements().iter().zip(self.goal) {
            let e_psi = e.matrix().mul_vec(psi);
            let p: f64 = psi.iter().zip(&e_psi).map(|(a, b)| (a.conj() * b).re).sum();
            res.push(p - g);
            if with_jacobian {
                let mut row = vec![0.0; 2 * d];
                for k in 0..d {
                    row[k] = 2.0 * e_psi[k].re;
                    row[d + k] = 2.0 * e_psi[k].im;
                }
                jac.push(row);
            }
        }
        let overlap: Complex64 = self.target.iter().zip(psi).map(|(t, z)| t.conj() * z).sum();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let fid = overlap.norm_sqr() / norm;
        let excess = fid - self.threshold;
        res.push(self.sqrt_rho * excess.max(0.0));
        if with_jacobian {
            let mut row = vec![0.0; 2 * d];
            if excess > 0.0 {
                for k in 0..d {
                    let dt = overlap.conj() * self.target[k].conj();
                    let ds_re = 2.0 * dt.re;
                    let ds_im = 2.0 * (dt * Complex64::i()).re;
                    row[k] = self.sqrt_rho * (ds_re - fid * 2.0 * psi[k].re) / norm;
                    row[d + k] = self.sqrt_rho * (ds_im - fid * 2.0 * psi[k].im) / norm;
                }
            }
            jac.push(row);
        }
        (res, jac)
    }

    fn value(&self, psi: &[Complex64]) -> f64 {
        self.residuals(psi, false).0.iter().map(|r| r * r).sum()
    }

    /// Damped Gauss-Newton directions with Armijo backtracking; the iterate is
    /// projected back to the unit sphere after every step.
    fn minimize(&self, start: &[Complex64], cfg: &AmbiguitySearch) -> Vec<Complex64> {
        let d = start.len();
        let n = 2 * d;
        let mut psi = start.to_vec();
        let mut mu = 1e-3;
        for _ in 0..cfg.max_iterations {
            let (res, jac) = self.residuals(&psi, true);
            let f: f64 = res.iter().map(|r| r * r).sum();
            if f < 1e-32 {
                break;
            }
            // g = Jᵀr (half-gradient), A = JᵀJ
            let mut g = vec![0.0; n];
            let mut a = vec![vec![0.0; n]; n];
            for (row, r) in jac.iter().zip(&res) {
                for i in 0..n {
                    g[i] += row[i] * r;
                    for j in 0..n {
                        a[i][j] += row[i] * row[j];
                    }
                }
            }
            let grad_norm = 2.0 * g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if grad_norm < cfg.gradient_tol * f.sqrt() {
                break;
            }
            let scale = (0..n).map(|i| a[i][i]).fold(0.0, f64::max).max(1e-300);
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += mu * scale;
            }
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let step = match cholesky_solve(&a, &neg_g) {
                Some(s) => s,
                None => neg_g.clone(),
            };
            let slope: f64 = 2.0 * g.iter().zip(&step).map(|(x, y)| x * y).sum::<f64>();
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial = project(&psi, &step, alpha);
                if self.value(&trial) <= f + 1e-4 * alpha * slope {
                    psi = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                mu *= 10.0;
                if mu > 1e12 {
                    break;
                }
                continue;
            }
            mu = if alpha == 1.0 {
                (mu / 3.0).max(1e-12)
            } else {
                mu * 2.0
            };
        }
        psi
    }
}

fn project(psi: &[Complex64], step: &[f64], alpha: f64) -> Vec<Complex64> {
    let d = psi.len();
    let moved: Vec<Complex64> = (0..d)
        .map(|k| psi[k] + Complex64::new(alpha * step[k], alpha * step[d + k]))
        .collect();
    let norm = moved.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    moved.iter().map(|z| z / norm).collect()
}

/// Solves `A x = b` for symmetric positive definite `A`.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if v <= 0.0 || !v.is_finite() {
                    return None;
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - ((i + 1)..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

/// Qubit state with Bloch vector `(m_x, m_y, -m_z)`; indistinguishable from
/// the input under the trine measurement.
pub fn trine_reflection(state: &PureState) -> Result<PureState> {
    let [x, y, z] = bloch_of_state(state)?.0;
    let len = (x * x + y * y + z * z).sqrt();
    state_of_bloch(&BlochVector::new(x / len, y / len, -z / len))
}

/// The rank-one modification of the 2D construction that fails: `a|0⟩⟨0|`,
/// `b(P_0j + X_0j)`, `b(P_0j + Y_0j)`, without a throw-away element.
pub fn rank_one_variant_elements(
    dim: usize,
    a: f64,
    b: f64,
) -> Result<(Vec<String>, Vec<HermitianOperator>)> {
    let mut labels = vec!["E0".to_string()];
    let mut diag = vec![0.0; dim];
    diag[0] = a;
    let mut elements = vec![HermitianOperator::diagonal(&diag)];
    for (tag, kind) in [("x", PauliKind::X), ("y", PauliKind::Y)] {
        for j in 1..dim {
            let p = subspace_projector(dim, 0, j)?;
            labels.push(format!("{tag},{j}"));
            elements.push(p.add(&subspace_pauli(dim, 0, j, kind)?).scale(b));
        }
    }
    Ok((labels, elements))
}

#[derive(Clone, Debug)]
pub struct VariantPair {
    pub state_a: PureState,
    pub state_b: PureState,
    pub prob_gap: f64,
    pub fidelity: f64,
}

/// Two distinct states with identical probabilities under
/// [`rank_one_variant_elements`]. With `c_0 = r_0` and `c_1 = x + iy`,
/// `p^{x,1} ∝ r_0² + x² + y² + 2r_0x` and `p^{y,1} ∝ r_0² + x² + y² + 2r_0y`
/// are both preserved by `(x, y) → (-y - r_0, -x - r_0)`.
/// The partner differs in norm, so it is compared as an unnormalized state.
pub fn rank_one_variant_pair(dim: usize, a: f64, b: f64, seed: u64) -> Result<VariantPair> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("dimension {dim} < 2")));
    }
    let (_, elements) = rank_one_variant_elements(dim, a, b)?;
    for attempt in 0..1000u64 {
        let psi = random_pure_state(dim, seeds::derive(seed, attempt));
        let r0 = psi.amplitudes()[0].re;
        let c1 = psi.amplitudes()[1];
        let mut amps = psi.amplitudes().to_vec();
        amps[1] = Complex64::new(-c1.im - r0, -c1.re - r0);
        let partner = PureState::new(amps)?;
        let fid = fidelity(&psi, &partner)?;
        if fid >= 0.99 {
            continue;
        }
        let mut gap = 0.0f64;
        for e in &elements {
            gap = gap.max((psi.expectation(e)? - partner.expectation(e)?).abs());
        }
        return Ok(VariantPair {
            state_a: psi,
            state_b: partner,
            prob_gap: gap,
            fidelity: fid,
        });
    }
    Err(Error::Consistency(
        "no well-separated variant pair found".into(),
    ))
}

/// Hermitian operator assembled from coefficients in [`hermitian_basis`].
pub fn from_coefficients(coeffs: &[f64], basis: &[HermitianOperator]) -> HermitianOperator {
    let d = basis[0].dim();
    let mut m = ComplexMatrix::zeros(d);
    for (c, b) in coeffs.iter().zip(basis) {
        m = &m + &b.matrix().scale(*c);
    }
    HermitianOperator::new(m).expect("real combination of Hermitian matrices")
}
