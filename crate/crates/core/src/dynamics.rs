//! Single-excitation dissipative dynamics: collective decay spectrum and the
//! non-Hermitian amplitude evolution `dc/dt = (−iV − Γ/2)c`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{sample_positions, DisorderConfig};
use crate::error::{Error, Result};
use crate::model::{chiral_projection, couplings, AtomPositions, CouplingSet, ModelParams};
use crate::numerics::{eigh, mean_std, propagate_checked, propagate_linear, CMatrix, RngStream};

/// Rates below this fraction of γ belong to the dark manifold.
pub const SUBRADIANT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayClass {
    Superradiant,
    Intermediate,
    Subradiant,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySpectrum {
    /// Descending, units of γ.
    pub rates: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub classes: Vec<DecayClass>,
}

impl DecaySpectrum {
    /// `Σ_n |⟨mode_n|c⟩|²` over the superradiant modes.
    pub fn superradiant_weight(&self, c: &[Complex64]) -> f64 {
        self.modes
            .iter()
            .zip(&self.classes)
            .filter(|(_, &cls)| cls == DecayClass::Superradiant)
            .map(|(m, _)| {
                m.iter()
                    .zip(c)
                    .map(|(x, z)| z * *x)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    }
}

/// Eigen-decomposition of `Γ`; `γ` is read from its diagonal.
pub fn decay_spectrum(c: &CouplingSet) -> Result<DecaySpectrum> {
    let gamma = c.dissipative.get(0, 0);
    let e = eigh(&c.dissipative)?;
    let rates: Vec<f64> = e.values.into_iter().rev().collect();
    let modes: Vec<Vec<f64>> = e.vectors.into_iter().rev().collect();
    let classes = rates
        .iter()
        .map(|&r| {
            if r > gamma {
                DecayClass::Superradiant
            } else if r < SUBRADIANT * gamma {
                DecayClass::Subradiant
            } else {
                DecayClass::Intermediate
            }
        })
        .collect();
    Ok(DecaySpectrum {
        rates,
        modes,
        classes,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingMode {
    /// `V` and `Γ` both from the positions.
    #[default]
    Physical,
    /// Chiral-projected `V` with the physical `Γ`. Not a physical model.
    ChiralHybrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOptions {
    /// Largest RK4 step, units of `1/γ`.
    pub dt: f64,
    pub coupling_mode: CouplingMode,
    /// Run at `dt` and `dt/2` and halve further while `P(t)` moves by more than `tolerance`.
    pub check_convergence: bool,
    pub tolerance: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            coupling_mode: CouplingMode::Physical,
            check_convergence: true,
            tolerance: 1e-8,
        }
    }
}

const MAX_HALVINGS: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsResult {
    pub t_grid: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `P(t) = Σ_i |c_i(t)|²`.
    pub survival: Vec<f64>,
    /// Step actually used.
    pub dt: f64,
    /// Half-step change of `P(t)`, when checked.
    pub defect: Option<f64>,
}

impl DynamicsResult {
    pub fn final_populations(&self) -> Vec<f64> {
        self.amplitudes
            .last()
            .map(|c| c.iter().map(|z| z.norm_sqr()).collect())
            .unwrap_or_default()
    }
}

/// Couplings of the clean chain for the requested mode.
pub fn dynamics_couplings(params: &ModelParams, mode: CouplingMode) -> Result<CouplingSet> {
    let physical = params.with_chiral(false);
    let mut c = couplings(&AtomPositions::clean(&physical), &physical)?;
    if mode == CouplingMode::ChiralHybrid {
        c.coherent = chiral_projection(&c.coherent);
    }
    Ok(c)
}

pub fn evolve(
    params: &ModelParams,
    c0: &[Complex64],
    t_max: f64,
    samples: usize,
    opts: &DynamicsOptions,
) -> Result<DynamicsResult> {
    let c = dynamics_couplings(params, opts.coupling_mode)?;
    evolve_couplings(&c, c0, t_max, samples, opts)
}

/// `samples` intervals on `[0, t_max]`, so `samples + 1` output points.
pub fn time_grid(t_max: f64, samples: usize) -> Vec<f64> {
    (0..=samples).map(|i| t_max * i as f64 / samples as f64).collect()
}

pub fn evolve_couplings(
    c: &CouplingSet,
    c0: &[Complex64],
    t_max: f64,
    samples: usize,
    opts: &DynamicsOptions,
) -> Result<DynamicsResult> {
    let n = c.order();
    if c0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c0.len(),
        });
    }
    let norm: f64 = c0.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized, ‖c0‖² = {norm}"
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() || samples == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t_max > 0 and samples ≥ 1, got {t_max}, {samples}"
        )));
    }
    let g = CMatrix::from_fn(n, |i, j| {
        Complex64::new(-0.5 * c.dissipative.get(i, j), -c.coherent.get(i, j))
    });
    let t_grid = time_grid(t_max, samples);

    let (amplitudes, dt, defect) = if opts.check_convergence {
        let mut dt = opts.dt;
        let mut last_defect = f64::NAN;
        let mut found = None;
        for _ in 0..=MAX_HALVINGS {
            let run = propagate_checked(&g, c0, &t_grid, dt)?;
            last_defect = run.defect;
            if run.defect <= opts.tolerance {
                found = Some((run.states, run.dt, Some(run.defect)));
                break;
            }
            dt *= 0.5;
        }
        found.ok_or(Error::NotConverged {
            defect: last_defect,
            tolerance: opts.tolerance,
        })?
    } else {
        (propagate_linear(&g, c0, &t_grid, opts.dt)?, opts.dt, None)
    };
    let survival = amplitudes
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    Ok(DynamicsResult {
        t_grid,
        amplitudes,
        survival,
        dt,
        defect,
    })
}

/// `(e_i + e_j)/√2`.
pub fn symmetric_pair(sites: usize, i: usize, j: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); sites];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c[i] = Complex64::new(s, 0.0);
    c[j] += Complex64::new(s, 0.0);
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleDynamics {
    pub t_grid: Vec<f64>,
    pub survival_mean: Vec<f64>,
    pub survival_std: Vec<f64>,
    /// Ensemble-mean site populations at `t_max`.
    pub final_populations: Vec<f64>,
    /// Share of the final population on cells 1 and `M/2`.
    pub final_edge_weight: f64,
    pub realizations: usize,
    pub clean: DynamicsResult,
}

/// Evolves every disorder realization and aggregates `P(t)`.
pub fn evolve_disordered(
    params: &ModelParams,
    cfg: &DisorderConfig,
    c0: &[Complex64],
    t_max: f64,
    samples: usize,
    opts: &DynamicsOptions,
) -> Result<EnsembleDynamics> {
    let clean = evolve(params, c0, t_max, samples, opts)?;
    let clean_pos = AtomPositions::clean(params);
    let physical = params.with_chiral(false);
    let runs: Vec<DynamicsResult> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let mut stream = RngStream::new(cfg.base_seed, r as u64);
            let (pos, _) = sample_positions(&clean_pos, cfg.sigma, &mut stream, r)?;
            let mut c = couplings(&pos, &physical)?;
            if opts.coupling_mode == CouplingMode::ChiralHybrid {
                c.coherent = chiral_projection(&c.coherent);
            }
            evolve_couplings(&c, c0, t_max, samples, opts)
        })
        .collect::<Result<_>>()?;

    let points = samples + 1;
    let mut survival_mean = Vec::with_capacity(points);
    let mut survival_std = Vec::with_capacity(points);
    for k in 0..points {
        let column: Vec<f64> = runs.iter().map(|r| r.survival[k]).collect();
        let (m, s) = mean_std(&column);
        survival_mean.push(m);
        survival_std.push(s);
    }
    let sites = params.sites();
    let final_populations: Vec<f64> = (0..sites)
        .map(|i| {
            let column: Vec<f64> = runs
                .iter()
                .map(|r| r.amplitudes[samples][i].norm_sqr())
                .collect();
            mean_std(&column).0
        })
        .collect();
    let total: f64 = final_populations.iter().sum();
    let edge = final_populations[0]
        + final_populations[1]
        + final_populations[sites - 2]
        + final_populations[sites - 1];
    Ok(EnsembleDynamics {
        t_grid: clean.t_grid.clone(),
        survival_mean,
        survival_std,
        final_populations,
        final_edge_weight: if total > 0.0 { edge / total } else { f64::NAN },
        realizations: cfg.realizations,
        clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn decay_rates_at_localized_point() {
        let p = ModelParams::new(1.25, 0.4, 10).unwrap();
        let d = decay_spectrum(&dynamics_couplings(&p, CouplingMode::Physical).unwrap()).unwrap();
        assert!((d.rates[0] - 6.0).abs() < 1e-10);
        assert!((d.rates[1] - 4.0).abs() < 1e-10);
        assert!(d.rates[2..].iter().all(|r| r.abs() < 1e-10));
        assert_eq!(d.classes[0], DecayClass::Superradiant);
        assert_eq!(d.classes[9], DecayClass::Subradiant);
    }

    #[test]
    fn half_wavelength_pair_rates() {
        let z = AtomPositions::new(vec![0.0, 0.5]).unwrap();
        let d = decay_spectrum(&CouplingSet::from_positions(&z, 1.0, false).unwrap()).unwrap();
        assert!((d.rates[0] - 2.0).abs() < 1e-15);
        assert!(d.rates[1].abs() < 1e-15);
    }

    #[test]
    fn single_atom_decay() {
        let r = evolve_couplings(
            &CouplingSet::single_atom(1.0),
            &[c(1.0)],
            10.0,
            1000,
            &DynamicsOptions::default(),
        )
        .unwrap();
        assert_eq!(r.t_grid.len(), 1001);
        for (t, p) in r.t_grid.iter().zip(&r.survival) {
            assert!((p - (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn dark_edge_state_survives() {
        let p = ModelParams::new(1.25, 0.4, 10).unwrap();
        let r = evolve(&p, &symmetric_pair(10, 0, 1), 10.0, 1000, &DynamicsOptions::default()).unwrap();
        assert!(r.survival.iter().all(|x| (x - 1.0).abs() < 1e-8));
        assert!(r.defect.unwrap() < 1e-8);
    }

    #[test]
    fn expm_reference_values() {
        // dense matrix-exponential oracle at b/a = 0.44
        let p = ModelParams::new(1.25, 0.44, 10).unwrap();
        let r = evolve(&p, &symmetric_pair(10, 0, 1), 100.0, 100, &DynamicsOptions::default()).unwrap();
        let expect = [
            (1, 0.9795169297955566),
            (5, 0.907949657508132),
            (10, 0.8038461618738753),
            (100, 0.3244352516693777),
        ];
        for (k, v) in expect {
            assert!((r.survival[k] - v).abs() < 1e-8, "t = {k}: {}", r.survival[k]);
        }
    }

    #[test]
    fn norm_decay_equals_dissipation() {
        let p = ModelParams::new(0.83, 0.37, 8).unwrap();
        let cs = dynamics_couplings(&p, CouplingMode::Physical).unwrap();
        let mut rng = RngStream::new(17, 0);
        let mut c0: Vec<Complex64> = (0..8).map(|_| Complex64::new(rng.normal(), rng.normal())).collect();
        let n = c0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        c0.iter_mut().for_each(|z| *z /= n);
        let h = 1e-3;
        let r = evolve_couplings(&cs, &c0, 2.0, 2000, &DynamicsOptions::default()).unwrap();
        for k in (2..r.survival.len() - 2).step_by(50) {
            let s = &r.survival;
            let deriv = (-s[k + 2] + 8.0 * s[k + 1] - 8.0 * s[k - 1] + s[k - 2]) / (12.0 * h);
            let ck = &r.amplitudes[k];
            let mut rate = 0.0;
            for i in 0..8 {
                for j in 0..8 {
                    rate += (ck[i].conj() * ck[j]).re * cs.dissipative.get(i, j);
                }
            }
            assert!((deriv + rate).abs() <= 1e-6 * rate.abs().max(1e-3), "k = {k}");
        }
    }

    #[test]
    fn survival_is_monotone() {
        let p = ModelParams::new(0.41, 0.63, 12).unwrap();
        let mut c0 = vec![Complex64::new(0.0, 0.0); 12];
        c0[5] = c(1.0);
        let r = evolve(&p, &c0, 10.0, 500, &DynamicsOptions::default()).unwrap();
        for w in r.survival.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        assert!(r.survival.iter().all(|&x| (0.0..=1.0 + 1e-9).contains(&x)));
    }

    #[test]
    fn hybrid_mode_projects_coherent_part() {
        let p = ModelParams::new(0.83, 0.37, 8).unwrap();
        let h = dynamics_couplings(&p, CouplingMode::ChiralHybrid).unwrap();
        let ph = dynamics_couplings(&p, CouplingMode::Physical).unwrap();
        assert_eq!(h.dissipative, ph.dissipative);
        assert_eq!(h.coherent.get(0, 2), 0.0);
    }

    #[test]
    fn zero_sigma_ensemble_is_clean() {
        let p = ModelParams::new(1.25, 0.44, 10).unwrap();
        let cfg = DisorderConfig::new(0.0, 4, 1).unwrap();
        let e = evolve_disordered(&p, &cfg, &symmetric_pair(10, 0, 1), 5.0, 50, &DynamicsOptions::default()).unwrap();
        assert_eq!(e.survival_mean, e.clean.survival);
        assert!(e.survival_std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn rejects_unnormalized_state() {
        let p = ModelParams::new(1.25, 0.4, 4).unwrap();
        let c0 = vec![c(1.0), c(1.0), c(0.0), c(0.0)];
        assert!(evolve(&p, &c0, 1.0, 10, &DynamicsOptions::default()).is_err());
    }
}
