//! Finite-shot tomography: multinomial sampling, exact inversion of the
//! observed frequencies, and infidelity statistics over seeds.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{RankOneConstructionParams, TwoDConstructionParams};
use crate::quantum::{fidelity, random_pure_state, OutcomeDistribution, Povm, PureState};
use crate::reconstruction::{
    anchor_permutation, premeasure_basis_choice, Inverter, RankOneInverter, ReconstructionReport,
    TwoDInverter,
};
use crate::{seeds, Error, Result};

/// A POVM family with a matched inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    Psic2d(TwoDConstructionParams),
    RankOne(RankOneConstructionParams),
}

impl Scheme {
    pub fn dim(&self) -> usize {
        match self {
            Self::Psic2d(p) => p.dim,
            Self::RankOne(p) => p.dim,
        }
    }

    pub fn inverter(&self) -> Result<Box<dyn Inverter + Send>> {
        Ok(match self {
            Self::Psic2d(p) => Box::new(TwoDInverter::new(*p)?),
            Self::RankOne(p) => Box::new(RankOneInverter::new(*p)?),
        })
    }
}

/// Multinomial draw by inverse CDF on a ChaCha8 stream. Negative
/// probabilities (rounding) are clamped to zero.
pub fn sample_counts(povm: &Povm, state: &PureState, shots: u64, seed: u64) -> Result<Vec<u64>> {
    let probs = povm.probabilities(state)?;
    Ok(sample_multinomial(probs.values(), shots, seed))
}

pub fn sample_multinomial(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; probs.len()];
    if probs.is_empty() || total <= 0.0 {
        return counts;
    }
    let last = probs.len() - 1;
    let mut rng = seeds::rng(seed);
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}

pub fn frequencies(counts: &[u64]) -> OutcomeDistribution {
    let shots: u64 = counts.iter().sum();
    let n = shots.max(1) as f64;
    OutcomeDistribution::raw(counts.iter().map(|&c| c as f64 / n).collect(), true)
}

#[derive(Clone, Debug)]
pub struct TomographyRun {
    pub povm_id: String,
    pub true_state: PureState,
    /// 0 for exact-probability runs.
    pub shots: u64,
    pub counts: Vec<u64>,
    /// Estimate expressed in the original basis.
    pub estimate: ReconstructionReport,
    /// `1 - fidelity`, or 1 when the inversion reported a failure.
    pub infidelity: f64,
    pub seed: u64,
    /// Basis vector chosen as `|0⟩` by the premeasurement (0 when skipped).
    pub anchor: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographyConfig {
    pub shots: u64,
    /// Copies spent on the computational-basis premeasurement; 0 disables it.
    pub premeasure_shots: u64,
}

impl TomographyConfig {
    pub fn new(shots: u64) -> Self {
        Self {
            shots,
            premeasure_shots: 0,
        }
    }

    pub fn with_premeasurement(mut self, shots: u64) -> Self {
        self.premeasure_shots = shots;
        self
    }
}

fn finish(
    state: &PureState,
    perm: &[usize],
    estimate: Result<ReconstructionReport>,
) -> Result<(ReconstructionReport, f64)> {
    let mut estimate = estimate.unwrap_or_else(|_| ReconstructionReport {
        state: None,
        residual: f64::INFINITY,
        failure: None,
        chain_norms: Vec::new(),
    });
    if let Some(s) = estimate.state.take() {
        estimate.state = Some(s.permuted(perm)?);
    }
    let infidelity = match (&estimate.state, estimate.failure) {
        (Some(s), None) => (1.0 - fidelity(s, state)?).clamp(0.0, 1.0),
        _ => 1.0,
    };
    Ok((estimate, infidelity))
}

/// Samples `config.shots` outcomes, feeds the frequencies to the exact
/// inverter and records the infidelity. Inversion failures are data.
pub fn run_tomography(
    inverter: &dyn Inverter,
    state: &PureState,
    config: TomographyConfig,
    seed: u64,
) -> Result<TomographyRun> {
    let dim = inverter.povm().dim();
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state.dim(),
        });
    }
    let state = state.normalize()?;
    let anchor = if config.premeasure_shots > 0 {
        let basis_probs: Vec<f64> = state.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        let counts = sample_multinomial(
            &basis_probs,
            config.premeasure_shots,
            seeds::derive(seed, 0),
        );
        premeasure_basis_choice(&frequencies(&counts))
    } else {
        0
    };
    let perm = anchor_permutation(dim, anchor);
    let measured = state.permuted(&perm)?;
    let counts = sample_counts(
        inverter.povm(),
        &measured,
        config.shots,
        seeds::derive(seed, 1),
    )?;
    let estimate = inverter.invert(&frequencies(&counts));
    let (estimate, infidelity) = finish(&state, &perm, estimate)?;
    Ok(TomographyRun {
        povm_id: inverter.id(),
        true_state: state,
        shots: config.shots,
        counts,
        estimate,
        infidelity,
        seed,
        anchor,
    })
}

/// Exact probabilities in place of frequencies.
pub fn run_exact(inverter: &dyn Inverter, state: &PureState) -> Result<TomographyRun> {
    let dim = inverter.povm().dim();
    let perm = anchor_permutation(dim, 0);
    let probs = inverter.povm().probabilities(state)?;
    let estimate = inverter.invert(&probs);
    let (estimate, infidelity) = finish(state, &perm, estimate)?;
    Ok(TomographyRun {
        povm_id: inverter.id(),
        true_state: state.clone(),
        shots: 0,
        counts: Vec::new(),
        estimate,
        infidelity,
        seed: 0,
        anchor: 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub shots: u64,
    pub median_infidelity: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
    pub failures: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// For every shot count and every seed `s`: true state
/// `random_pure_state(D, s)`, run seed `derive2(s, shots, 0)`.
pub fn efficiency_sweep(
    inverter: &dyn Inverter,
    shot_grid: &[u64],
    seeds_list: &[u64],
    premeasure_shots: u64,
) -> Result<Vec<SweepRow>> {
    if shot_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "shot grid must be strictly ascending".into(),
        ));
    }
    if seeds_list.is_empty() {
        return Ok(Vec::new());
    }
    let dim = inverter.povm().dim();
    let cells: Vec<(usize, u64)> = shot_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| seeds_list.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<Result<(usize, f64, bool)>> = cells
        .par_iter()
        .map(|&(i, s)| {
            let shots = shot_grid[i];
            let state = random_pure_state(dim, s);
            let config = TomographyConfig::new(shots).with_premeasurement(premeasure_shots);
            let run = run_tomography(inverter, &state, config, seeds::derive2(s, shots, 0))?;
            Ok((
                i,
                run.infidelity,
                run.estimate.failure.is_some() || run.estimate.state.is_none(),
            ))
        })
        .collect();
    let mut per_shot: Vec<Vec<f64>> = vec![Vec::new(); shot_grid.len()];
    let mut failures = vec![0usize; shot_grid.len()];
    for r in results {
        let (i, inf, failed) = r?;
        per_shot[i].push(inf);
        failures[i] += usize::from(failed);
    }
    Ok(shot_grid
        .iter()
        .zip(per_shot.iter_mut())
        .zip(failures)
        .map(|((&shots, vals), failures)| {
            vals.sort_by(f64::total_cmp);
            SweepRow {
                shots,
                median_infidelity: quantile(vals, 0.5),
                iqr_low: quantile(vals, 0.25),
                iqr_high: quantile(vals, 0.75),
                failures,
            }
        })
        .collect())
}

/// CSV with `# key=value` metadata lines ahead of the header row.
pub fn write_sweep_csv<W: Write>(
    mut out: W,
    rows: &[SweepRow],
    meta: &[(String, String)],
) -> std::io::Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record([
        "shots",
        "median_infidelity",
        "iqr_low",
        "iqr_high",
        "failures",
    ])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::build_tetrahedral;

    #[test]
    fn degenerate_distribution() {
        assert_eq!(
            sample_multinomial(&[1.0, 0.0, 0.0], 500, 3),
            vec![500, 0, 0]
        );
        assert_eq!(sample_multinomial(&[0.0, 0.0, 1.0], 10, 3), vec![0, 0, 10]);
        assert_eq!(sample_multinomial(&[], 10, 3), Vec::<u64>::new());
    }

    #[test]
    fn sampling_is_reproducible() {
        let povm = build_tetrahedral();
        let s = random_pure_state(2, 4);
        assert_eq!(
            sample_counts(&povm, &s, 1000, 9).unwrap(),
            sample_counts(&povm, &s, 1000, 9).unwrap()
        );
        assert_ne!(
            sample_counts(&povm, &s, 1000, 9).unwrap(),
            sample_counts(&povm, &s, 1000, 10).unwrap()
        );
    }

    #[test]
    fn large_sample_concentrates() {
        let povm = build_tetrahedral();
        let s = random_pure_state(2, 12);
        let p = povm.probabilities(&s).unwrap();
        let counts = sample_counts(&povm, &s, 1_000_000, 1).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 1_000_000);
        for (c, p) in counts.iter().zip(p.values()) {
            assert!((*c as f64 / 1e6 - p).abs() < 5e-3);
        }
    }

    #[test]
    fn exact_run_matches_round_trip() {
        let scheme = Scheme::RankOne(RankOneConstructionParams::new(4, 1.0).unwrap());
        let inv = scheme.inverter().unwrap();
        let s = random_pure_state(4, 21);
        let run = run_exact(inv.as_ref(), &s).unwrap();
        let direct = inv.invert(&inv.povm().probabilities(&s).unwrap()).unwrap();
        assert_eq!(run.estimate, direct);
        assert!(run.infidelity < 1e-9);
    }

    #[test]
    fn small_shot_runs_complete() {
        for scheme in [
            Scheme::Psic2d(TwoDConstructionParams::default_for(3).unwrap()),
            Scheme::RankOne(RankOneConstructionParams::new(3, 1.9).unwrap()),
        ] {
            let inv = scheme.inverter().unwrap();
            for seed in 0..20 {
                let s = random_pure_state(3, seed);
                let run = run_tomography(
                    inv.as_ref(),
                    &s,
                    TomographyConfig::new(100).with_premeasurement(1),
                    seed,
                )
                .unwrap();
                assert!((0.0..=1.0).contains(&run.infidelity));
                assert_eq!(run.counts.iter().sum::<u64>(), 100);
            }
        }
    }

    #[test]
    fn premeasurement_rescues_orthogonal_anchor() {
        let inv = TwoDInverter::new(TwoDConstructionParams::default_for(3).unwrap()).unwrap();
        let s = PureState::basis(3, 2).unwrap();
        let plain = run_tomography(&inv, &s, TomographyConfig::new(1000), 5).unwrap();
        assert_eq!(plain.infidelity, 1.0);
        let pre = run_tomography(
            &inv,
            &s,
            TomographyConfig::new(1000).with_premeasurement(1),
            5,
        )
        .unwrap();
        assert_eq!(pre.anchor, 2);
        assert!(pre.infidelity < 0.05, "{}", pre.infidelity);
    }

    #[test]
    fn sweep_edge_cases() {
        let inv = TwoDInverter::new(TwoDConstructionParams::default_for(2).unwrap()).unwrap();
        assert!(efficiency_sweep(&inv, &[100, 1000], &[], 0)
            .unwrap()
            .is_empty());
        assert!(efficiency_sweep(&inv, &[1000, 100], &[1], 0).is_err());
        let a = efficiency_sweep(&inv, &[100, 1000], &[1, 2, 3], 1).unwrap();
        let b = efficiency_sweep(&inv, &[100, 1000], &[1, 2, 3], 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a[0].iqr_low <= a[0].median_infidelity && a[0].median_infidelity <= a[0].iqr_high);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SweepRow {
            shots: 10,
            median_infidelity: 0.5,
            iqr_low: 0.25,
            iqr_high: 0.75,
            failures: 1,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows, &[("seed".into(), "3".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# seed=3\nshots,median_infidelity,iqr_low,iqr_high,failures\n10,0.5,0.25,0.75,1\n"
        );
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }
}
