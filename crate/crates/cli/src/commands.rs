use num_complex::Complex64;
use wgqed_core::bulk::{phase_diagram_with, winding_analytic_geometry, PhaseGrid, SumRange};
use wgqed_core::disorder::{calibrate_sigma, disorder_ensemble, DisorderConfig, Reference};
use wgqed_core::dynamics::{
    decay_spectrum, dynamics_couplings, evolve, evolve_couplings, evolve_disordered,
    symmetric_pair, CouplingMode, DecayClass, DynamicsOptions,
};
use wgqed_core::openchain::{edge_report, hamiltonian, mass_gap, spectrum, ZERO_ENERGY};
use wgqed_core::{CouplingSet, ModelParams};

use crate::config::{BlochRange, Command, Initial, RunConfig, SweepVariable};
use crate::error::CliError;
use crate::output::Report;
use crate::svg::{self, Heatmap, Series, Style};
use crate::table::{Cell, Table};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cfg: &RunConfig) -> Result<Report> {
    // Reject bad model settings before any work, even where a sweep replaces them.
    if cfg.command != Command::PhaseDiagram {
        base_model(cfg)?;
    }
    match cfg.command {
        Command::PhaseDiagram => phase(cfg),
        Command::Spectrum => spectrum_sweep(cfg),
        Command::Edge => edge(cfg),
        Command::Disorder => disorder(cfg),
        Command::Dynamics => dynamics(cfg),
        Command::Decay => decay(cfg),
    }
}

fn model(cfg: &RunConfig, a: f64, b_over_a: Option<f64>, b_over_lambda: Option<f64>) -> Result<ModelParams> {
    let p = match (b_over_a, b_over_lambda) {
        (_, Some(b)) => ModelParams::from_lengths(a, b, cfg.sites)?,
        (Some(r), None) => ModelParams::new(a, r, cfg.sites)?,
        (None, None) => unreachable!("config resolution always sets b"),
    };
    Ok(p.with_gamma(cfg.gamma)?.with_chiral(cfg.chiral))
}

fn base_model(cfg: &RunConfig) -> Result<ModelParams> {
    model(cfg, cfg.a_over_lambda, cfg.b_over_a, cfg.b_over_lambda)
}

fn phase(cfg: &RunConfig) -> Result<Report> {
    let grid = PhaseGrid::uniform(cfg.a_max, cfg.a_count, cfg.b_max, cfg.b_count)?;
    let range = match cfg.bloch_range {
        BlochRange::Quarter => SumRange::QuarterChain,
        BlochRange::Half => SumRange::HalfChain,
    };
    let diagram = phase_diagram_with(&grid, cfg.sites, cfg.chiral, cfg.n_k, range)?;
    let mut t = Table::new(
        "phase",
        ["a_over_lambda", "b_over_a", "nu", "defined", "delta_phi", "min_abs_n"],
    );
    for p in &diagram.points {
        t.push(vec![
            p.a_over_lambda.into(),
            p.b_over_a.into(),
            p.numeric.nu.into(),
            p.numeric.defined.into(),
            p.numeric.delta_phi.into(),
            p.numeric.min_abs_n.into(),
        ]);
    }
    let defined = diagram.points.iter().filter(|p| p.numeric.defined).count();
    let mut report = Report::new(t);
    report.notes.push(format!(
        "Bloch sums over p = 1..{} (M = {}, {} range); bulk results need even M ≥ 8",
        range.terms(cfg.sites),
        cfg.sites,
        match cfg.bloch_range {
            BlochRange::Quarter => "⌊M/4⌋",
            BlochRange::Half => "M/2",
        }
    ));
    report.notes.push(format!(
        "{defined} of {} points have a defined winding (min|n| above the gap threshold)",
        diagram.points.len()
    ));
    if cfg.check_analytic {
        let mut bad = Table::new(
            "inconsistencies",
            ["a_over_lambda", "b_over_a", "nu_numeric", "nu_analytic"],
        );
        for &i in &diagram.inconsistencies {
            let p = &diagram.points[i];
            bad.push(vec![
                p.a_over_lambda.into(),
                p.b_over_a.into(),
                p.numeric.nu.into(),
                p.analytic.value().map(|v| v as f64).into(),
            ]);
        }
        report.notes.push(format!(
            "analytic check: {} inconsistent points; {} of {} ν flips lie on an analytic boundary",
            diagram.inconsistencies.len(),
            diagram.flip_edges - diagram.unmatched_flip_edges,
            diagram.flip_edges
        ));
        report.extras.push(bad);
    }
    Ok(report)
}

fn sweep_values(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.count;
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            cfg.from * (1.0 - s) + cfg.to * s
        })
        .collect()
}

fn spectrum_sweep(cfg: &RunConfig) -> Result<Report> {
    let m = cfg.sites;
    let mut columns = vec!["value".to_string()];
    columns.extend((1..=m).map(|n| format!("e_{n}")));
    columns.extend(["mass_gap", "symmetry_defect", "kernel_dim"].map(String::from));
    let mut t = Table::new("spectrum", columns);
    let points: Vec<(f64, ModelParams)> = sweep_values(cfg)
        .into_iter()
        .map(|v| {
            let p = match cfg.sweep {
                SweepVariable::BOverA => model(cfg, cfg.a_over_lambda, Some(v), None)?,
                SweepVariable::AOverLambda => model(cfg, v, cfg.b_over_a, cfg.b_over_lambda)?,
            };
            Ok((v, p))
        })
        .collect::<Result<_>>()?;
    for (v, p) in points {
        let spec = spectrum(&hamiltonian(&p)?)?;
        let gap = if m >= 4 { mass_gap(&spec)? } else { f64::NAN };
        let mut row: Vec<Cell> = vec![v.into()];
        row.extend(spec.energies.iter().map(|&e| Cell::from(e)));
        row.push(gap.into());
        row.push(spec.symmetry_defect().into());
        row.push(spec.kernel_indices(ZERO_ENERGY * cfg.gamma).len().into());
        t.push(row);
    }
    let mut report = Report::new(t);
    report.notes.push(format!(
        "sweep of {} at fixed {}; energies ascending; kernel_dim counts |ε| < {:e}γ",
        match cfg.sweep {
            SweepVariable::BOverA => "b/a",
            SweepVariable::AOverLambda => "a/λ",
        },
        match cfg.sweep {
            SweepVariable::BOverA => "a/λ",
            SweepVariable::AOverLambda => "b",
        },
        ZERO_ENERGY
    ));
    Ok(report)
}

fn edge(cfg: &RunConfig) -> Result<Report> {
    let p = base_model(cfg)?;
    let r = edge_report(&p)?;
    let mut t = Table::new(
        "edge",
        [
            "site", "cell", "sublattice", "population", "xi_fit", "xi_approx", "hopping_ratio",
            "mass_gap",
        ],
    );
    for (i, &pop) in r.populations.iter().enumerate() {
        t.push(vec![
            (i + 1).into(),
            (i / 2 + 1).into(),
            if i % 2 == 0 { "A" } else { "B" }.into(),
            pop.into(),
            r.xi_fit.into(),
            r.xi_approx.into(),
            r.hopping_ratio.into(),
            r.mass_gap.into(),
        ]);
    }
    let mut report = Report::new(t);
    report.notes.push(format!(
        "population is the mid-gap pair average; edge weight on the outer cells {:.6}; ξ in units of a, NaN when no exponential fit (residual {:.3e})",
        r.edge_weight, r.fit_residual
    ));
    Ok(report)
}

/// The σ for each requested level: explicit σ values, or δJ targets calibrated on the
/// clean geometry of `params`.
fn sigma_levels(cfg: &RunConfig, params: &ModelParams, defaults: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !cfg.sigma.is_empty() {
        return Ok(cfg.sigma.iter().map(|&s| (f64::NAN, s)).collect());
    }
    let targets = if cfg.delta_j.is_empty() { defaults } else { &cfg.delta_j };
    targets
        .iter()
        .map(|&target| {
            let c = calibrate_sigma(params, target, cfg.realizations, cfg.seed)?;
            Ok((target, c.sigma))
        })
        .collect()
}

fn disorder(cfg: &RunConfig) -> Result<Report> {
    let p = base_model(cfg)?;
    let levels = sigma_levels(cfg, &p, &[0.01, 0.02, 0.03, 0.04, 0.05])?;
    let mut t = Table::new(
        "disorder",
        [
            "target_delta_j",
            "sigma",
            "delta_j_mean",
            "delta_j_std",
            "mass_gap_mean",
            "mass_gap_std",
            "fidelity_mean",
            "fidelity_std",
            "fidelity_min",
            "resamples",
        ],
    );
    let mut reference = None;
    let mut clean = (f64::NAN, f64::NAN);
    for (target, sigma) in levels {
        let s = disorder_ensemble(&p, &DisorderConfig::new(sigma, cfg.realizations, cfg.seed)?)?;
        reference = Some(s.reference);
        clean = (s.clean_mass_gap, s.clean_fidelity);
        t.push(vec![
            target.into(),
            sigma.into(),
            s.delta_j_mean.into(),
            s.delta_j_std.into(),
            s.mass_gap_mean.into(),
            s.mass_gap_std.into(),
            s.fidelity_mean.into(),
            s.fidelity_std.into(),
            s.fidelity_min.into(),
            s.resamples.into(),
        ]);
    }
    let mut report = Report::new(t);
    report.notes.push(format!(
        "{} realizations per level; z_i → z_i + σR_i with R_i ~ N(0,1); δJ is the mean |V_ij − V⁰_ij| over all pairs i < j, averaged over the ensemble",
        cfg.realizations
    ));
    if let Some(r) = reference {
        report.notes.push(format!(
            "fidelity reference: {}; clean mass gap {:.6e}, clean fidelity {:.6e}",
            match r {
                Reference::AnalyticEdgeState => "analytic edge state",
                Reference::CleanPair => "clean mid-gap pair (projector overlap)",
            },
            clean.0,
            clean.1
        ));
    }
    Ok(report)
}

fn initial_state(cfg: &RunConfig) -> Vec<Complex64> {
    let m = cfg.sites;
    match &cfg.initial {
        Initial::SingleAtom => vec![Complex64::new(1.0, 0.0)],
        Initial::EdgePair => symmetric_pair(m, 0, 1),
        Initial::Sites(sites) => {
            let mut c = vec![Complex64::new(0.0, 0.0); m];
            let amp = 1.0 / (sites.len() as f64).sqrt();
            for &s in sites {
                c[s - 1] += Complex64::new(amp, 0.0);
            }
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            c.iter_mut().for_each(|z| *z /= norm);
            c
        }
    }
}

fn dynamics(cfg: &RunConfig) -> Result<Report> {
    let opts = DynamicsOptions {
        dt: cfg.dt,
        coupling_mode: if cfg.hybrid {
            CouplingMode::ChiralHybrid
        } else {
            CouplingMode::Physical
        },
        ..DynamicsOptions::default()
    };
    let c0 = initial_state(cfg);
    let mut t = Table::new("dynamics", ["t", "p_mean", "p_std", "p_clean"]);
    let mut fin = Table::new("final", ["site", "population"]);
    let mut report;

    if cfg.initial == Initial::SingleAtom {
        if !cfg.sigma.is_empty() || !cfg.delta_j.is_empty() {
            return Err(CliError::Usage("a single atom has no positional disorder".into()));
        }
        let r = evolve_couplings(&CouplingSet::single_atom(cfg.gamma), &c0, cfg.t_max, cfg.samples, &opts)?;
        for (k, &time) in r.t_grid.iter().enumerate() {
            t.push(vec![time.into(), r.survival[k].into(), 0.0.into(), r.survival[k].into()]);
        }
        fin.push(vec![1usize.into(), r.final_populations()[0].into()]);
        report = Report::new(t);
        report.notes.push(format!("single atom; step {:e}", r.dt));
    } else {
        let p = base_model(cfg)?.with_chiral(false);
        if cfg.sigma.len() + cfg.delta_j.len() > 1 {
            return Err(CliError::Usage("dynamics takes a single σ or δJ level".into()));
        }
        if cfg.sigma.is_empty() && cfg.delta_j.is_empty() {
            let r = evolve(&p, &c0, cfg.t_max, cfg.samples, &opts)?;
            for (k, &time) in r.t_grid.iter().enumerate() {
                t.push(vec![time.into(), r.survival[k].into(), 0.0.into(), r.survival[k].into()]);
            }
            for (i, pop) in r.final_populations().into_iter().enumerate() {
                fin.push(vec![(i + 1).into(), pop.into()]);
            }
            report = Report::new(t);
            report.notes.push(format!(
                "clean chain; step {:e}; convergence defect {:.3e}",
                r.dt,
                r.defect.unwrap_or(f64::NAN)
            ));
        } else {
            let (target, sigma) = sigma_levels(cfg, &p, &[])?[0];
            let dcfg = DisorderConfig::new(sigma, cfg.realizations, cfg.seed)?;
            let e = evolve_disordered(&p, &dcfg, &c0, cfg.t_max, cfg.samples, &opts)?;
            for k in 0..e.t_grid.len() {
                t.push(vec![
                    e.t_grid[k].into(),
                    e.survival_mean[k].into(),
                    e.survival_std[k].into(),
                    e.clean.survival[k].into(),
                ]);
            }
            for (i, &pop) in e.final_populations.iter().enumerate() {
                fin.push(vec![(i + 1).into(), pop.into()]);
            }
            report = Report::new(t);
            report.notes.push(format!(
                "{} realizations at σ = {sigma:.6e} (δJ target {target:.3e}); final edge weight {:.6}",
                e.realizations, e.final_edge_weight
            ));
        }
        if cfg.hybrid {
            report
                .notes
                .push("chiral-projected V with physical Γ: a numerical control, not a physical chain".into());
        }
    }
    report
        .notes
        .push(format!("times are γt; the final time is γt = {}", cfg.t_max));
    report.extras.push(fin);
    Ok(report)
}

fn decay(cfg: &RunConfig) -> Result<Report> {
    let p = base_model(cfg)?;
    let c = dynamics_couplings(&p, CouplingMode::Physical)?;
    let d = decay_spectrum(&c)?;
    let m = c.order();
    let mut columns = vec!["n".to_string(), "rate".into(), "class".into()];
    columns.extend((1..=m).map(|i| format!("c_{i}")));
    let mut t = Table::new("decay", columns);
    for (n, rate) in d.rates.iter().enumerate() {
        let class = match d.classes[n] {
            DecayClass::Superradiant => "superradiant",
            DecayClass::Intermediate => "intermediate",
            DecayClass::Subradiant => "subradiant",
        };
        let mut row: Vec<Cell> = vec![(n + 1).into(), (*rate).into(), class.into()];
        row.extend(d.modes[n].iter().map(|&x| Cell::from(x)));
        t.push(row);
    }
    let mut report = Report::new(t);
    report
        .notes
        .push("eigen-decomposition of Γ; rates descending, modes real and normalized".into());
    Ok(report)
}

/// Renders the SVG for a primary table. Works from the table alone so that `plot` can
/// re-render a saved output.
pub fn render(command: Command, t: &Table) -> Result<String> {
    let col = |name: &str| {
        t.column(name)
            .ok_or_else(|| CliError::Usage(format!("table '{}' has no column '{name}'", t.name)))
    };
    let svg = match command {
        Command::PhaseDiagram => {
            let a = col("a_over_lambda")?;
            let b = col("b_over_a")?;
            let nu = col("nu")?;
            let defined = col("defined")?;
            let b_count = a.iter().take_while(|&&x| x == a[0]).count().max(1);
            if a.len() % b_count != 0 {
                return Err(CliError::Usage("phase table is not a full grid".into()));
            }
            let xs: Vec<f64> = a.iter().step_by(b_count).copied().collect();
            let ys: Vec<f64> = b[..b_count].to_vec();
            let values: Vec<Option<i64>> = nu
                .iter()
                .zip(&defined)
                .map(|(&v, &d)| (d != 0.0).then_some(v as i64))
                .collect();
            let edges = analytic_edges(&xs, &ys);
            svg::heatmap(&Heatmap {
                title: "winding number",
                xlabel: "a/λ",
                ylabel: "b/a",
                x: &xs,
                y: &ys,
                values: &values,
                edges: &edges,
            })
        }
        Command::Spectrum => {
            let x = col("value")?;
            let series: Vec<Series> = t
                .columns
                .iter()
                .filter(|c| c.starts_with("e_"))
                .map(|c| Ok(Series::new("", &x, &col(c)?, Style::Line)))
                .collect::<Result<_>>()?;
            svg::xy_plot("open-chain spectrum", "sweep value", "ε/γ", &series)
        }
        Command::Edge => {
            let s = col("site")?;
            let p = col("population")?;
            svg::xy_plot(
                "mid-gap pair population",
                "site",
                "population",
                &[Series::new("", &s, &p, Style::LineMarkers)],
            )
        }
        Command::Disorder => {
            let dj = col("delta_j_mean")?;
            let f = col("fidelity_mean")?;
            let fmin = col("fidelity_min")?;
            svg::xy_plot(
                "edge-state fidelity under disorder",
                "δJ/γ",
                "F",
                &[
                    Series::new("mean", &dj, &f, Style::LineMarkers),
                    Series::new("min", &dj, &fmin, Style::LineMarkers),
                ],
            )
        }
        Command::Dynamics => {
            let time = col("t")?;
            svg::xy_plot(
                "survival probability",
                "γt",
                "P(t)",
                &[
                    Series::new("mean", &time, &col("p_mean")?, Style::Line),
                    Series::new("clean", &time, &col("p_clean")?, Style::Line),
                ],
            )
        }
        Command::Decay => {
            let n = col("n")?;
            let r = col("rate")?;
            svg::xy_plot(
                "collective decay rates",
                "n",
                "Γ_n/γ",
                &[Series::new("", &n, &r, Style::Markers)],
            )
        }
    };
    Ok(svg)
}

/// Segments between neighbouring grid cells whose closed-form winding differs.
fn analytic_edges(xs: &[f64], ys: &[f64]) -> Vec<((f64, f64), (f64, f64))> {
    let value = |a: f64, r: f64| winding_analytic_geometry(a, r * a).value();
    let half = |v: &[f64]| if v.len() > 1 { 0.5 * (v[1] - v[0]) } else { 0.5 };
    let (hx, hy) = (half(xs), half(ys));
    let mut edges = Vec::new();
    for (i, &a) in xs.iter().enumerate() {
        for (j, &r) in ys.iter().enumerate() {
            let here = value(a, r);
            if here.is_none() {
                continue;
            }
            if let Some(&a2) = xs.get(i + 1) {
                let there = value(a2, r);
                if there.is_some() && there != here {
                    edges.push(((a + hx, r - hy), (a + hx, r + hy)));
                }
            }
            if let Some(&r2) = ys.get(j + 1) {
                let there = value(a, r2);
                if there.is_some() && there != here {
                    edges.push(((a - hx, r + hy), (a + hx, r + hy)));
                }
            }
        }
    }
    edges
}
