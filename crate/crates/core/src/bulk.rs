//! Bloch functions, bands and the winding number of the periodic chain.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{cos_turns, sin_turns};

/// Below this `|n(k)|` (in units of γ) the bands touch and ν is not defined.
pub const GAP_CLOSED: f64 = 1e-9;

const MIN_SAMPLES: usize = 256;
const MAX_SAMPLES: usize = 1 << 18;

/// How many hopping orders enter the Bloch sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumRange {
    /// `p = 1 … ⌊M/4⌋`, the truncation used for the bulk of a chain of `M` atoms.
    #[default]
    QuarterChain,
    /// `p = 1 … M/2`, every hop of an `M/2`-cell ring.
    HalfChain,
}

impl SumRange {
    pub fn terms(self, sites: usize) -> usize {
        match self {
            SumRange::QuarterChain => sites / 4,
            SumRange::HalfChain => sites / 2,
        }
    }
}

/// `n₀(k)` and `n(k)` for a fixed geometry, as functions of `θ = ka ∈ [0, 2π]`.
#[derive(Clone, Debug)]
pub struct BlochFunction {
    j_even: Vec<f64>,
    j_odd: Vec<f64>,
    j_odd_prime: Vec<f64>,
}

impl BlochFunction {
    /// Raw geometry, no ordering checks: `b = a` is allowed so phase-diagram grids
    /// can include `b/a = 1`.
    pub fn from_geometry(a: f64, b: f64, gamma: f64, chiral: bool, terms: usize) -> Self {
        let h = 0.5 * gamma;
        Self {
            j_even: (1..=terms)
                .map(|p| if chiral { 0.0 } else { h * sin_turns(p as f64 * a) })
                .collect(),
            j_odd: (1..=terms).map(|p| h * sin_turns(p as f64 * a - b)).collect(),
            j_odd_prime: (1..=terms)
                .map(|p| h * sin_turns((p as f64 - 1.0) * a + b))
                .collect(),
        }
    }

    pub fn new(params: &ModelParams, range: SumRange) -> Self {
        Self::from_geometry(
            params.a_over_lambda(),
            params.b_over_lambda(),
            params.gamma(),
            params.chiral(),
            range.terms(params.sites()),
        )
    }

    pub fn terms(&self) -> usize {
        self.j_odd.len()
    }

    /// Evaluates at `θ = 2π·s`; `s ∈ [0, 1]` covers the Brillouin zone.
    pub fn eval_turns(&self, s: f64) -> (f64, Complex64) {
        let base = Complex64::new(cos_turns(s), sin_turns(s));
        let mut fwd = Complex64::new(1.0, 0.0);
        let mut n = Complex64::new(0.0, 0.0);
        let mut n0 = 0.0;
        for p in 0..self.terms() {
            // fwd = e^{ipθ} before the update, e^{i(p+1)θ} after
            n += fwd.conj() * self.j_odd_prime[p];
            fwd *= base;
            n += fwd * self.j_odd[p];
            n0 += 2.0 * self.j_even[p] * fwd.re;
        }
        (n0, n)
    }

    pub fn n_turns(&self, s: f64) -> Complex64 {
        self.eval_turns(s).1
    }
}

/// One point of the Bloch data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochData {
    /// Crystal momentum in units of `1/λ`.
    pub k: f64,
    pub n0: f64,
    pub n: Complex64,
    pub e_plus: f64,
    pub e_minus: f64,
}

pub fn bloch(params: &ModelParams, k: f64) -> Result<BlochData> {
    bloch_with(params, k, SumRange::QuarterChain)
}

/// `k` in units of `1/λ`, on `[0, 2π/a]`.
pub fn bloch_with(params: &ModelParams, k: f64, range: SumRange) -> Result<BlochData> {
    check_bulk_size(params, range)?;
    let a = params.a_over_lambda();
    let k_max = 2.0 * std::f64::consts::PI / a;
    if !k.is_finite() || k < -1e-12 * k_max || k > k_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside the Brillouin zone [0, {k_max}]"
        )));
    }
    let s = (k / k_max).clamp(0.0, 1.0);
    let (n0, n) = BlochFunction::new(params, range).eval_turns(s);
    Ok(BlochData {
        k,
        n0,
        n,
        e_plus: n0 + n.norm(),
        e_minus: n0 - n.norm(),
    })
}

fn check_bulk_size(params: &ModelParams, range: SumRange) -> Result<()> {
    match range {
        SumRange::QuarterChain => params.require_sites(8, "the bulk Bloch sum"),
        SumRange::HalfChain => params.require_sites(4, "the bulk Bloch sum"),
    }
}

/// Winding of `n(k)` around the origin over the Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub nu: i64,
    /// Accumulated phase of `n(k)`, radians.
    pub delta_phi: f64,
    pub min_abs_n: f64,
    pub defined: bool,
    /// Samples used by the final refinement level.
    pub samples: usize,
}

pub fn winding_numeric(params: &ModelParams, n_k: usize) -> Result<WindingResult> {
    winding_numeric_with(params, n_k, SumRange::QuarterChain)
}

pub fn winding_numeric_with(
    params: &ModelParams,
    n_k: usize,
    range: SumRange,
) -> Result<WindingResult> {
    check_bulk_size(params, range)?;
    if n_k < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} k samples, got {n_k}"
        )));
    }
    Ok(winding_of(&BlochFunction::new(params, range), n_k, params.gamma()))
}

/// Samples `n` on a uniform grid, doubling until the accumulated phase is stable and
/// every step is well below π. Local minima of `|n|` are refined by golden-section
/// search so gap closings between samples are not missed.
pub fn winding_of(f: &BlochFunction, n_k: usize, gamma: f64) -> WindingResult {
    let threshold = GAP_CLOSED * gamma;
    let mut samples = n_k.max(2);
    let mut previous: Option<f64> = None;
    loop {
        let values: Vec<Complex64> = (0..=samples)
            .map(|j| f.n_turns(j as f64 / samples as f64))
            .collect();
        let min_abs_n = refined_minimum(f, &values, samples);
        if min_abs_n < threshold {
            return WindingResult {
                nu: 0,
                delta_phi: f64::NAN,
                min_abs_n,
                defined: false,
                samples,
            };
        }
        let (delta_phi, max_step) = phase_sum(&values);
        let stable = previous.is_some_and(|p| (p - delta_phi).abs() < 1e-9);
        if stable && max_step < 0.5 * std::f64::consts::PI {
            let nu = (delta_phi / std::f64::consts::TAU).round();
            return WindingResult {
                nu: nu as i64,
                delta_phi,
                min_abs_n,
                defined: (delta_phi / std::f64::consts::TAU - nu).abs() < 1e-6,
                samples,
            };
        }
        if samples >= MAX_SAMPLES {
            return WindingResult {
                nu: 0,
                delta_phi,
                min_abs_n,
                defined: false,
                samples,
            };
        }
        previous = Some(delta_phi);
        samples *= 2;
    }
}

/// `min_θ |n(θ)|` from `samples` uniform points plus golden-section refinement.
pub fn min_abs_n(f: &BlochFunction, samples: usize) -> f64 {
    let samples = samples.max(2);
    let values: Vec<Complex64> = (0..=samples)
        .map(|j| f.n_turns(j as f64 / samples as f64))
        .collect();
    refined_minimum(f, &values, samples)
}

fn phase_sum(values: &[Complex64]) -> (f64, f64) {
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for w in values.windows(2) {
        let step = (w[1] * w[0].conj()).arg();
        total += step;
        max_step = max_step.max(step.abs());
    }
    (total, max_step)
}

fn refined_minimum(f: &BlochFunction, values: &[Complex64], samples: usize) -> f64 {
    let abs: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let mut best = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut minima: Vec<usize> = (0..abs.len())
        .filter(|&j| {
            let left = if j == 0 { abs[abs.len() - 2] } else { abs[j - 1] };
            let right = if j + 1 == abs.len() { abs[1] } else { abs[j + 1] };
            abs[j] <= left && abs[j] <= right
        })
        .collect();
    minima.sort_by(|&x, &y| abs[x].total_cmp(&abs[y]));
    let h = 1.0 / samples as f64;
    for &j in minima.iter().take(4) {
        let centre = j as f64 * h;
        let m = golden_section(|s| f.n_turns(s).norm(), centre - h, centre + h);
        best = best.min(m);
    }
    best
}

fn golden_section(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        }
    }
    f1.min(f2)
}

/// Phase accumulated by `n(k)` over the first `fraction` of the zone, at a fixed
/// sample count.
pub fn accumulated_phase(f: &BlochFunction, fraction: f64, samples: usize) -> f64 {
    let values: Vec<Complex64> = (0..=samples)
        .map(|j| f.n_turns(fraction * j as f64 / samples as f64))
        .collect();
    phase_sum(&values).0
}

/// Closed-form winding from the sign of `n_x(π/a)/n_x(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalyticWinding {
    Winding(u8),
    /// On a line where one of the tangents vanishes or diverges.
    Boundary,
}

impl AnalyticWinding {
    pub fn value(self) -> Option<i64> {
        match self {
            AnalyticWinding::Winding(v) => Some(v as i64),
            AnalyticWinding::Boundary => None,
        }
    }
}

pub fn winding_analytic(params: &ModelParams) -> AnalyticWinding {
    winding_analytic_geometry(params.a_over_lambda(), params.b_over_lambda())
}

/// The ratio `n_x(π/a)/n_x(0)` has the sign of `tan(π(2b − a))·tan(πa)`; ν = 1 when
/// it is negative. Boundaries are `a/λ = m/2` and `b/λ = a/(2λ) + n/4`.
pub fn winding_analytic_geometry(a: f64, b: f64) -> AnalyticWinding {
    let u1 = 2.0 * b - a;
    let u2 = a;
    if on_tan_line(u1) || on_tan_line(u2) {
        return AnalyticWinding::Boundary;
    }
    let product = tan_turns_half(u1) * tan_turns_half(u2);
    if product.abs() < 1e-12 {
        return AnalyticWinding::Boundary;
    }
    AnalyticWinding::Winding(if product < 0.0 { 1 } else { 0 })
}

/// `tan(πu)` is zero or infinite when `2u` is an integer.
fn on_tan_line(u: f64) -> bool {
    let x = 2.0 * u;
    (x - x.round()).abs() < 1e-12
}

fn tan_turns_half(u: f64) -> f64 {
    sin_turns(0.5 * u) / cos_turns(0.5 * u)
}

/// Index of the half-integer band that `2u` lies in; used to detect boundary crossings.
fn tan_cell(u: f64) -> f64 {
    (2.0 * u).floor()
}

/// Rectangular grid over `(a/λ, b/a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub a_values: Vec<f64>,
    pub b_over_a_values: Vec<f64>,
}

impl PhaseGrid {
    /// `a_count` points on `(0, a_max]` and `b_count` on `(0, b_max]`, both open at zero.
    pub fn uniform(a_max: f64, a_count: usize, b_max: f64, b_count: usize) -> Result<Self> {
        if !(a_max > 0.0) || !(b_max > 0.0) || b_max > 1.0 || a_count == 0 || b_count == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid needs a_max > 0, 0 < b_max ≤ 1 and nonzero counts, got ({a_max}, {a_count}, {b_max}, {b_count})"
            )));
        }
        Ok(Self {
            a_values: (1..=a_count).map(|i| a_max * i as f64 / a_count as f64).collect(),
            b_over_a_values: (1..=b_count).map(|i| b_max * i as f64 / b_count as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.a_values.len() * self.b_over_a_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub a_over_lambda: f64,
    pub b_over_a: f64,
    pub numeric: WindingResult,
    pub analytic: AnalyticWinding,
}

impl PhasePoint {
    /// Defined numerically, off the analytic boundaries, and the two disagree.
    pub fn inconsistent(&self) -> bool {
        match (self.numeric.defined, self.analytic) {
            (true, AnalyticWinding::Winding(v)) => self.numeric.nu != v as i64,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiagram {
    pub sites: usize,
    pub range: SumRange,
    pub chiral: bool,
    pub a_count: usize,
    pub b_count: usize,
    /// Row-major: index `ia * b_count + ib`.
    pub points: Vec<PhasePoint>,
    /// Indices into `points` where numeric and analytic ν disagree.
    pub inconsistencies: Vec<usize>,
    /// Neighbouring defined points with different ν.
    pub flip_edges: usize,
    /// Flip edges not crossed by an analytic boundary line.
    pub unmatched_flip_edges: usize,
}

impl PhaseDiagram {
    pub fn get(&self, ia: usize, ib: usize) -> &PhasePoint {
        &self.points[ia * self.b_count + ib]
    }
}

pub fn phase_diagram(grid: &PhaseGrid, sites: usize, chiral: bool, n_k: usize) -> Result<PhaseDiagram> {
    phase_diagram_with(grid, sites, chiral, n_k, SumRange::QuarterChain)
}

pub fn phase_diagram_with(
    grid: &PhaseGrid,
    sites: usize,
    chiral: bool,
    n_k: usize,
    range: SumRange,
) -> Result<PhaseDiagram> {
    if sites < 8 || sites % 2 != 0 {
        return Err(Error::Precondition(format!(
            "phase diagram needs even M ≥ 8, got {sites}"
        )));
    }
    if n_k < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} k samples, got {n_k}"
        )));
    }
    let terms = range.terms(sites);
    let nb = grid.b_over_a_values.len();
    let points: Vec<PhasePoint> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let a = grid.a_values[idx / nb];
            let r = grid.b_over_a_values[idx % nb];
            let b = r * a;
            let f = BlochFunction::from_geometry(a, b, 1.0, chiral, terms);
            PhasePoint {
                a_over_lambda: a,
                b_over_a: r,
                numeric: winding_of(&f, n_k, 1.0),
                analytic: winding_analytic_geometry(a, b),
            }
        })
        .collect();
    let inconsistencies = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.inconsistent())
        .map(|(i, _)| i)
        .collect();

    let na = grid.a_values.len();
    let mut flip_edges = 0;
    let mut unmatched = 0;
    let mut check = |p: &PhasePoint, q: &PhasePoint| {
        if !(p.numeric.defined && q.numeric.defined) || p.numeric.nu == q.numeric.nu {
            return;
        }
        flip_edges += 1;
        if !boundary_between(p, q) {
            unmatched += 1;
        }
    };
    for ia in 0..na {
        for ib in 0..nb {
            let p = &points[ia * nb + ib];
            if ia + 1 < na {
                check(p, &points[(ia + 1) * nb + ib]);
            }
            if ib + 1 < nb {
                check(p, &points[ia * nb + ib + 1]);
            }
        }
    }
    Ok(PhaseDiagram {
        sites,
        range,
        chiral,
        a_count: na,
        b_count: nb,
        points,
        inconsistencies,
        flip_edges,
        unmatched_flip_edges: unmatched,
    })
}

/// True when a line `a/λ = m/2` or `b/λ = a/(2λ) + n/4` passes between the two
/// points, or touches either of them.
fn boundary_between(p: &PhasePoint, q: &PhasePoint) -> bool {
    let u = |pt: &PhasePoint| {
        let a = pt.a_over_lambda;
        (2.0 * pt.b_over_a * a - a, a)
    };
    let (p1, p2) = u(p);
    let (q1, q2) = u(q);
    p.analytic == AnalyticWinding::Boundary
        || q.analytic == AnalyticWinding::Boundary
        || tan_cell(p1) != tan_cell(q1)
        || tan_cell(p2) != tan_cell(q2)
}
