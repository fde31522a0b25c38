//! Gaussian positional disorder: sampling, the hopping-fluctuation statistic δJ and
//! ensemble statistics of the mass gap and edge-state fidelity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{couplings, AtomPositions, CouplingSet, ModelParams};
use crate::numerics::{mean_std, Matrix, RngStream};
use crate::openchain::{self, localization_point, mass_gap, spectrum};

/// Attempts per realization before giving up on an ordered configuration.
pub const RESAMPLE_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    /// Standard deviation of the displacement, units of λ.
    pub sigma: f64,
    pub realizations: usize,
    pub base_seed: u64,
}

impl DisorderConfig {
    pub fn new(sigma: f64, realizations: usize, base_seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!("σ must be ≥ 0, got {sigma}")));
        }
        if realizations == 0 {
            return Err(Error::InvalidParameter("need at least one realization".into()));
        }
        Ok(Self {
            sigma,
            realizations,
            base_seed,
        })
    }

    fn stream(&self, realization: usize) -> RngStream {
        RngStream::new(self.base_seed, realization as u64)
    }
}

/// `z_i → z_i + σR_i`. Draws are repeated until the atoms stay ordered; returns the
/// positions and the number of rejected draws.
pub fn sample_positions(
    clean: &AtomPositions,
    sigma: f64,
    stream: &mut RngStream,
    realization: usize,
) -> Result<(AtomPositions, usize)> {
    let z0 = clean.as_slice();
    for attempt in 0..RESAMPLE_CAP {
        let z: Vec<f64> = z0.iter().map(|&z| z + sigma * stream.normal()).collect();
        if z.windows(2).all(|w| w[1] > w[0]) {
            return Ok((AtomPositions::new(z)?, attempt));
        }
    }
    Err(Error::ResampleLimit {
        realization,
        attempts: RESAMPLE_CAP,
    })
}

/// Mean over pairs `i < j` of `|V_ij − V⁰_ij|`.
pub fn delta_j(clean: &CouplingSet, disordered: &CouplingSet) -> Result<f64> {
    let n = clean.order();
    if disordered.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: disordered.order(),
        });
    }
    let pairs = n * (n - 1) / 2;
    if pairs == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (disordered.coherent.get(i, j) - clean.coherent.get(i, j)).abs();
        }
    }
    Ok(total / pairs as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub delta_j: f64,
    pub mass_gap: f64,
    pub fidelity: f64,
    pub resamples: usize,
}

/// What the disordered mid-gap pair is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    /// The analytic edge state `|Ψ+⟩` of an exactly localized point.
    AnalyticEdgeState,
    /// The clean mid-gap pair, compared projector to projector.
    CleanPair,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisorderStats {
    pub sigma: f64,
    pub realizations: usize,
    pub reference: Reference,
    pub clean_mass_gap: f64,
    pub clean_fidelity: f64,
    pub delta_j_mean: f64,
    pub delta_j_std: f64,
    pub mass_gap_mean: f64,
    pub mass_gap_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub fidelity_min: f64,
    pub resamples: usize,
    pub records: Vec<RealizationRecord>,
}

enum RefState {
    Vector(Vec<f64>),
    Projector(Matrix),
}

impl RefState {
    fn fidelity(&self, p_mid: &Matrix) -> f64 {
        match self {
            RefState::Vector(v) => {
                let n = v.len();
                let mut f = 0.0;
                for i in 0..n {
                    f += v[i] * p_mid.row(i).iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
                }
                f
            }
            RefState::Projector(p) => {
                // tr(P_ref P_mid)/2, both symmetric
                let n = p.rows();
                let mut t = 0.0;
                for i in 0..n {
                    t += p.row(i).iter().zip(p_mid.row(i)).map(|(a, b)| a * b).sum::<f64>();
                }
                0.5 * t
            }
        }
    }
}

fn reference_state(params: &ModelParams, clean_pair: &Matrix) -> (Reference, RefState) {
    if params.chiral() {
        if let Ok((m, _)) = localization_point(params) {
            let sites = params.sites();
            let s = if m % 2 == 0 { 0.5 } else { -0.5 };
            let mut v = vec![0.0; sites];
            v[0] = 0.5;
            v[1] = 0.5;
            v[sites - 2] = s;
            v[sites - 1] = s;
            return (Reference::AnalyticEdgeState, RefState::Vector(v));
        }
    }
    (Reference::CleanPair, RefState::Projector(clean_pair.clone()))
}

/// Per realization: displace the atoms, rebuild the couplings (re-zeroing even hops
/// when the model is chiral), diagonalize, and record the mass gap and the weight of
/// the reference state in the disordered mid-gap pair.
pub fn disorder_ensemble(params: &ModelParams, cfg: &DisorderConfig) -> Result<DisorderStats> {
    params.require_sites(4, "disorder ensemble")?;
    let clean_pos = AtomPositions::clean(params);
    let clean = couplings(&clean_pos, params)?;
    let clean_spec = spectrum(&clean.coherent)?;
    let clean_pair = clean_spec.midgap_projector();
    let (reference, ref_state) = reference_state(params, &clean_pair);
    let clean_fidelity = ref_state.fidelity(&clean_pair);

    let records: Vec<RealizationRecord> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let mut stream = cfg.stream(r);
            let (pos, resamples) = sample_positions(&clean_pos, cfg.sigma, &mut stream, r)?;
            let dis = couplings(&pos, params)?;
            let spec = spectrum(&dis.coherent)?;
            Ok(RealizationRecord {
                delta_j: delta_j(&clean, &dis)?,
                mass_gap: mass_gap(&spec)?,
                fidelity: ref_state.fidelity(&spec.midgap_projector()),
                resamples,
            })
        })
        .collect::<Result<_>>()?;

    let column = |f: fn(&RealizationRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let (delta_j_mean, delta_j_std) = mean_std(&column(|r| r.delta_j));
    let (mass_gap_mean, mass_gap_std) = mean_std(&column(|r| r.mass_gap));
    let fid = column(|r| r.fidelity);
    let (fidelity_mean, fidelity_std) = mean_std(&fid);
    Ok(DisorderStats {
        sigma: cfg.sigma,
        realizations: cfg.realizations,
        reference,
        clean_mass_gap: openchain::mass_gap(&clean_spec)?,
        clean_fidelity,
        delta_j_mean,
        delta_j_std,
        mass_gap_mean,
        mass_gap_std,
        fidelity_mean,
        fidelity_std,
        fidelity_min: fid.iter().copied().fold(f64::INFINITY, f64::min),
        resamples: records.iter().map(|r| r.resamples).sum(),
        records,
    })
}

/// Ensemble mean and standard deviation of δJ alone; no diagonalization.
pub fn delta_j_ensemble(params: &ModelParams, cfg: &DisorderConfig) -> Result<(f64, f64)> {
    let clean_pos = AtomPositions::clean(params);
    let clean = couplings(&clean_pos, params)?;
    let values: Vec<f64> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let mut stream = cfg.stream(r);
            let (pos, _) = sample_positions(&clean_pos, cfg.sigma, &mut stream, r)?;
            delta_j(&clean, &couplings(&pos, params)?)
        })
        .collect::<Result<_>>()?;
    Ok(mean_std(&values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub sigma: f64,
    pub delta_j_mean: f64,
    pub delta_j_std: f64,
}

/// σ at which the ensemble-mean δJ equals `target`. Bisection over σ with the same
/// random streams at every trial, so the objective is a deterministic function of σ.
pub fn calibrate_sigma(
    params: &ModelParams,
    target: f64,
    realizations: usize,
    base_seed: u64,
) -> Result<CalibrationPoint> {
    if !(target > 0.0) || target >= 0.5 * params.gamma() {
        return Err(Error::InvalidParameter(format!(
            "target δJ must lie in (0, γ/2), got {target}"
        )));
    }
    let eval = |sigma: f64| -> Result<(f64, f64)> {
        delta_j_ensemble(params, &DisorderConfig::new(sigma, realizations, base_seed)?)
    };
    let mut lo = 0.0;
    let mut hi = target / params.gamma();
    let mut hi_val = eval(hi)?;
    let mut expansions = 0;
    while hi_val.0 < target {
        lo = hi;
        hi *= 2.0;
        hi_val = eval(hi)?;
        expansions += 1;
        if expansions > 20 {
            return Err(Error::NotConverged {
                defect: target - hi_val.0,
                tolerance: 0.0,
            });
        }
    }
    let mut best = (hi, hi_val);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let v = eval(mid)?;
        best = (mid, v);
        if (v.0 - target).abs() <= 1e-6 * target {
            break;
        }
        if v.0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CalibrationPoint {
        sigma: best.0,
        delta_j_mean: best.1 .0,
        delta_j_std: best.1 .1,
    })
}

pub fn calibration_curve(
    params: &ModelParams,
    sigmas: &[f64],
    realizations: usize,
    base_seed: u64,
) -> Result<Vec<CalibrationPoint>> {
    sigmas
        .iter()
        .map(|&sigma| {
            let (m, s) = delta_j_ensemble(params, &DisorderConfig::new(sigma, realizations, base_seed)?)?;
            Ok(CalibrationPoint {
                sigma,
                delta_j_mean: m,
                delta_j_std: s,
            })
        })
        .collect()
}
