//! Open-boundary spectra: mass gap, edge states, localization, flat states,
//! strong-zero-mode algebra and the non-chiral zero-energy manifold.

use serde::Serialize;

use crate::bulk::{self, BlochFunction, SumRange};
use crate::error::{Error, Result};
use crate::model::{couplings, j_even, j_odd, j_odd_prime, AtomPositions, ModelParams};
use crate::numerics::{eigh, linfit, Matrix, SymMatrix};

/// Eigenvalues below this (units of γ) count as zero modes.
pub const ZERO_ENERGY: f64 = 1e-10;

/// Populations below this are left out of the localization fit.
const FIT_FLOOR: f64 = 1e-14;

/// Tolerance for recognising the exact-localization lattice.
const CONDITION_TOL: f64 = 1e-9;

/// Single-excitation Hamiltonian of the clean chain, `H = V`.
pub fn hamiltonian(params: &ModelParams) -> Result<SymMatrix> {
    Ok(couplings(&AtomPositions::clean(params), params)?.coherent)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub energies: Vec<f64>,
    /// `states[n][i]`: component of eigenvector `n` on site `i`.
    pub states: Vec<Vec<f64>>,
}

impl SpectrumResult {
    pub fn sites(&self) -> usize {
        self.energies.len()
    }

    /// `A_p` of state `n`, `p = 1 … M/2`.
    pub fn a_component(&self, n: usize, p: usize) -> f64 {
        self.states[n][2 * p - 2]
    }

    /// `B_p` of state `n`, `p = 1 … M/2`.
    pub fn b_component(&self, n: usize, p: usize) -> f64 {
        self.states[n][2 * p - 1]
    }

    /// `max_n |ε_n + ε_{M+1−n}|`; zero for a chiral spectrum.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.energies.len();
        (0..m)
            .map(|n| (self.energies[n] + self.energies[m - 1 - n]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest gap between partners `ε_{2k−1}, ε_{2k}`; zero for a doubly degenerate spectrum.
    pub fn pairing_defect(&self) -> f64 {
        self.energies
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| (c[1] - c[0]).abs())
            .fold(0.0, f64::max)
    }

    /// Zero-based indices of `ε_{M/2}` and `ε_{M/2+1}`.
    pub fn midgap_indices(&self) -> [usize; 2] {
        let half = self.energies.len() / 2;
        [half - 1, half]
    }

    pub fn projector(&self, indices: &[usize]) -> Matrix {
        Matrix::projector(self.sites(), indices.iter().map(|&n| self.states[n].as_slice()))
    }

    pub fn midgap_projector(&self) -> Matrix {
        self.projector(&self.midgap_indices())
    }

    /// Indices with `|ε| < tol`.
    pub fn kernel_indices(&self, tol: f64) -> Vec<usize> {
        (0..self.sites()).filter(|&n| self.energies[n].abs() < tol).collect()
    }
}

pub fn spectrum(h: &SymMatrix) -> Result<SpectrumResult> {
    let e = eigh(h)?;
    Ok(SpectrumResult {
        energies: e.values,
        states: e.vectors,
    })
}

/// `ε = |ε_{M/2+1} − ε_{M/2}| / 2`.
pub fn mass_gap(spec: &SpectrumResult) -> Result<f64> {
    if spec.sites() < 4 {
        return Err(Error::Precondition(format!(
            "mass gap needs M ≥ 4, got M = {}",
            spec.sites()
        )));
    }
    let [lo, hi] = spec.midgap_indices();
    Ok(0.5 * (spec.energies[hi] - spec.energies[lo]).abs())
}

/// Population on cells 1 and `M/2`, read from the diagonal of a projector of rank `rank`.
fn edge_weight_of(p: &Matrix, rank: f64) -> f64 {
    let m = p.rows();
    (p.get(0, 0) + p.get(1, 1) + p.get(m - 2, m - 2) + p.get(m - 1, m - 1)) / rank
}

fn state_edge_weight(v: &[f64]) -> f64 {
    let m = v.len();
    v[0] * v[0] + v[1] * v[1] + v[m - 2] * v[m - 2] + v[m - 1] * v[m - 1]
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeStateReport {
    pub mass_gap: f64,
    /// Zero-based indices of the mid-gap pair.
    pub midgap_pair: [usize; 2],
    pub pair_energies: [f64; 2],
    /// Site populations averaged over the pair; sums to 1.
    pub populations: Vec<f64>,
    /// Localization length in units of `a`, for the amplitude decay `e^{−p/ξ}`.
    pub xi_fit: Option<f64>,
    /// `−1/ln|J'_1/J'_3|`, units of `a`.
    pub xi_approx: Option<f64>,
    /// RMS residual of the fit in units of `ln(population)`; NaN without a fit.
    pub fit_residual: f64,
    /// Pair population on cells 1 and `M/2`.
    pub edge_weight: f64,
    /// `|J'_1/J_1|`.
    pub hopping_ratio: f64,
}

/// Fits the mid-gap pair to an exponential profile. The B series is read from the left
/// edge (`B_p`, `p = 2 … M/2−1`), the A series from the right (`A_{M/2−p+1}`), and the
/// two decay rates are averaged.
pub fn edge_report(params: &ModelParams) -> Result<EdgeStateReport> {
    require_chiral(params, "edge-state report")?;
    params.require_sites(4, "edge-state report")?;
    let spec = spectrum(&hamiltonian(params)?)?;
    let gap = mass_gap(&spec)?;
    let pair = spec.midgap_indices();
    let proj = spec.midgap_projector();
    let m = params.sites();
    let cells = params.cells();
    let populations: Vec<f64> = (0..m).map(|i| 0.5 * proj.get(i, i)).collect();

    let left: Vec<(f64, f64)> = (2..cells).map(|p| (p as f64, populations[2 * p - 1])).collect();
    let right: Vec<(f64, f64)> = (2..cells)
        .map(|p| (p as f64, populations[2 * (cells - p + 1) - 2]))
        .collect();
    let fits: Vec<_> = [left, right]
        .into_iter()
        .filter_map(|series| {
            let (x, y): (Vec<f64>, Vec<f64>) = series
                .into_iter()
                .filter(|&(_, pop)| pop >= FIT_FLOOR)
                .map(|(p, pop)| (p, pop.ln()))
                .unzip();
            if x.len() < 3 {
                return None;
            }
            linfit(&x, &y).ok()
        })
        .collect();

    let (xi_fit, fit_residual) = if fits.is_empty() {
        (None, f64::NAN)
    } else {
        let slope = fits.iter().map(|f| f.slope).sum::<f64>() / fits.len() as f64;
        let residual = fits.iter().map(|f| f.residual).fold(0.0, f64::max);
        // ln|amplitude|² falls by 2/ξ per cell
        let xi = (slope < 0.0 && residual < 0.5).then(|| -2.0 / slope);
        (xi, residual)
    };

    let ratio13 = (j_odd_prime(params, 1) / j_odd_prime(params, 2)).abs();
    let xi_approx = (ratio13 > 0.0 && ratio13 < 1.0).then(|| -1.0 / ratio13.ln());

    Ok(EdgeStateReport {
        mass_gap: gap,
        midgap_pair: pair,
        pair_energies: [spec.energies[pair[0]], spec.energies[pair[1]]],
        populations,
        xi_fit,
        xi_approx,
        fit_residual,
        edge_weight: edge_weight_of(&proj, 2.0),
        hopping_ratio: (j_odd_prime(params, 1) / j_odd(params, 1)).abs(),
    })
}

fn require_chiral(params: &ModelParams, what: &str) -> Result<()> {
    if !params.chiral() {
        return Err(Error::Precondition(format!("{what} needs the chiral model")));
    }
    Ok(())
}

/// Integers `(m, m')` with `a/λ = m/(M−2)` and `b/λ = m'/2`, if the geometry sits on
/// that lattice.
pub fn localization_point(params: &ModelParams) -> std::result::Result<(i64, i64), Error> {
    let m = params.sites();
    if m < 4 {
        return Err(Error::Precondition("exact localization needs M ≥ 4".into()));
    }
    let scale = (m - 2) as f64;
    let x = params.a_over_lambda() * scale;
    let y = 2.0 * params.b_over_lambda();
    let (mx, my) = (x.round(), y.round());
    if (x - mx).abs() < CONDITION_TOL && (y - my).abs() < CONDITION_TOL {
        return Ok((mx as i64, my as i64));
    }
    let a_near = mx.max(1.0) / scale;
    let mut b_near = my.max(1.0) / 2.0;
    if b_near >= a_near {
        b_near = ((2.0 * a_near).ceil() - 1.0).max(1.0) / 2.0;
    }
    Err(Error::OffCondition {
        reason: format!(
            "a/λ·(M−2) = {x} and 2b/λ = {y} must both be integers"
        ),
        a_over_lambda: a_near,
        b_over_lambda: b_near,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizedCheck {
    pub m: i64,
    pub m_prime: i64,
    /// `‖P_numeric − P_analytic‖∞` for the rank-2 mid-gap projectors.
    pub projector_mismatch: f64,
    pub mass_gap: f64,
    /// Largest splitting within the pairs `(ε_{2k−1}, ε_{2k})`.
    pub degeneracy_defect: f64,
    pub edge_weight: f64,
    /// Relative sign between the two edges of `|Ψ±⟩`, `(−1)^m`.
    pub edge_sign: i8,
    /// Whether `(−1)^{⌊M/4⌋}` gives the same sign.
    pub quarter_sign_agrees: bool,
}

/// Compares the numerical mid-gap pair with `|Ψ±⟩ = ½[a₁ ± b₁ + s(a_{M/2} ± b_{M/2})]`.
pub fn fully_localized_check(params: &ModelParams) -> Result<LocalizedCheck> {
    require_chiral(params, "fully localized check")?;
    let (m, m_prime) = localization_point(params)?;
    let spec = spectrum(&hamiltonian(params)?)?;
    let sign: i8 = if m % 2 == 0 { 1 } else { -1 };
    let quarter: i8 = if (params.sites() / 4) % 2 == 0 { 1 } else { -1 };
    let (plus, minus) = edge_pair_vectors(params.sites(), sign as f64);
    let analytic = Matrix::projector(params.sites(), [plus.as_slice(), minus.as_slice()]);
    let numeric = spec.midgap_projector();
    Ok(LocalizedCheck {
        m,
        m_prime,
        projector_mismatch: numeric.sub(&analytic).norm_inf(),
        mass_gap: mass_gap(&spec)?,
        degeneracy_defect: spec.pairing_defect(),
        edge_weight: edge_weight_of(&numeric, 2.0),
        edge_sign: sign,
        quarter_sign_agrees: sign == quarter,
    })
}

/// `½[a₁ ± b₁ + s(a_L ± b_L)]`.
fn edge_pair_vectors(sites: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut plus = vec![0.0; sites];
    let mut minus = vec![0.0; sites];
    plus[0] = 0.5;
    plus[1] = 0.5;
    plus[sites - 2] = 0.5 * s;
    plus[sites - 1] = 0.5 * s;
    minus[0] = 0.5;
    minus[1] = -0.5;
    minus[sites - 2] = 0.5 * s;
    minus[sites - 1] = -0.5 * s;
    (plus, minus)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatStateCheck {
    /// `round(a/λ·M)`.
    pub m: i64,
    /// Distance of `a/λ·M` from `m`.
    pub lattice_offset: f64,
    /// Sign picked up when cell `M/2` wraps to cell 1.
    pub twist: i8,
    /// `‖[H, T]‖∞`.
    pub commutator: f64,
    /// `min_k |n(k)|` of the `M/2`-cell ring.
    pub min_abs_n: f64,
    /// Largest deviation of a cell population from `dim/(M/2)` over all eigenspaces.
    pub flatness_defect: f64,
}

/// Cyclic one-cell translation with wrap sign `twist`.
pub fn translation_operator(sites: usize, twist: f64) -> Matrix {
    let mut t = Matrix::zeros(sites, sites);
    for i in 0..sites {
        let j = i + 2;
        if j < sites {
            t.set(j, i, 1.0);
        } else {
            t.set(j - sites, i, twist);
        }
    }
    t
}

/// At `a/λ = m/M` the open chain is an `M/2`-cell ring threaded by the sign
/// `(−1)^{m+1}`, so the twisted translation commutes with `H`.
pub fn flat_state_check(params: &ModelParams) -> Result<FlatStateCheck> {
    require_chiral(params, "flat-state check")?;
    params.require_sites(4, "flat-state check")?;
    let sites = params.sites();
    let x = params.a_over_lambda() * sites as f64;
    let m = x.round();
    let twist: i8 = if (m as i64) % 2 == 0 { -1 } else { 1 };
    let h = hamiltonian(params)?;
    let t = translation_operator(sites, twist as f64);
    let commutator = h.to_matrix().commutator(&t).norm_inf();

    let ring = BlochFunction::new(params, SumRange::HalfChain);
    let min_abs_n = bulk::min_abs_n(&ring, 4096);

    let spec = spectrum(&h)?;
    let cells = params.cells();
    let mut flatness_defect: f64 = 0.0;
    for block in eigenspaces(&spec.energies, 1e-9 * params.gamma()) {
        let p = spec.projector(&block);
        let expected = block.len() as f64 / cells as f64;
        for q in 0..cells {
            let pop = p.get(2 * q, 2 * q) + p.get(2 * q + 1, 2 * q + 1);
            flatness_defect = flatness_defect.max((pop - expected).abs());
        }
    }
    Ok(FlatStateCheck {
        m: m as i64,
        lattice_offset: (x - m).abs(),
        twist,
        commutator,
        min_abs_n,
        flatness_defect,
    })
}

/// Groups ascending energies into clusters separated by more than `tol`.
fn eigenspaces(energies: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (n, &e) in energies.iter().enumerate() {
        match blocks.last_mut() {
            Some(b) if e - energies[*b.last().unwrap()] <= tol => b.push(n),
            _ => blocks.push(vec![n]),
        }
    }
    blocks
}

/// `K = −iΨ` and `D` in the single-excitation basis. `Ψ` itself is `iK`.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub k: Matrix,
    pub d: Matrix,
}

impl OperatorPair {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 || sites % 2 != 0 {
            return Err(Error::InvalidParameter(format!("M must be even, got {sites}")));
        }
        let mut k = Matrix::zeros(sites, sites);
        let mut d = Matrix::zeros(sites, sites);
        for cell in 0..sites / 2 {
            // cell index p = cell + 1
            let sign = if cell % 2 == 0 { -1.0 } else { 1.0 };
            let (a, b) = (2 * cell, 2 * cell + 1);
            k.set(a, b, sign);
            k.set(b, a, -sign);
            d.set(a, b, 1.0);
            d.set(b, a, 1.0);
        }
        Ok(Self { k, d })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroModeCheck {
    /// `‖[H, Ψ]‖∞`.
    pub h_psi: f64,
    /// `‖ΨD + DΨ‖∞`.
    pub psi_d: f64,
    /// `‖[H, D]‖∞`; reported only.
    pub h_d: f64,
}

pub fn strong_zero_mode_check(params: &ModelParams) -> Result<ZeroModeCheck> {
    require_chiral(params, "strong-zero-mode check")?;
    localization_point(params)?;
    let ops = OperatorPair::new(params.sites())?;
    let h = hamiltonian(params)?.to_matrix();
    Ok(ZeroModeCheck {
        h_psi: h.commutator(&ops.k).norm_inf(),
        psi_d: ops.k.anticommutator(&ops.d).norm_inf(),
        h_d: h.commutator(&ops.d).norm_inf(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeState {
    pub index: usize,
    pub energy: f64,
    pub edge_weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonChiralReport {
    pub kernel_dim: usize,
    /// `⟨S+|P₀|S+⟩`, `⟨S−|P₀|S−⟩`, `⟨A|P₀|A⟩` with `P₀` the zero-energy projector.
    pub overlap_s_plus: f64,
    pub overlap_s_minus: f64,
    pub overlap_a: f64,
    pub symmetry_defect: f64,
    /// `J_{2p}`, `p = 1 … M/2 − 1`.
    pub even_couplings: Vec<f64>,
    /// The two most edge-localized states among the `M/2 + 1` closest to zero energy.
    pub edge_pair: [EdgeState; 2],
    /// Edge weight of the rank-2 projector onto `edge_pair`.
    pub pair_edge_weight: f64,
}

pub fn nonchiral_analysis(params: &ModelParams) -> Result<NonChiralReport> {
    if params.chiral() {
        return Err(Error::Precondition("non-chiral analysis needs chiral = false".into()));
    }
    let m = params.sites();
    if m % 4 != 2 || m < 6 {
        return Err(Error::Precondition(format!(
            "non-chiral analysis needs M ≡ 2 (mod 4), M ≥ 6, got M = {m}"
        )));
    }
    let spec = spectrum(&hamiltonian(params)?)?;
    let tol = ZERO_ENERGY * params.gamma();
    let kernel = spec.kernel_indices(tol);
    let p0 = spec.projector(&kernel);

    let mut s_plus = vec![0.0; m];
    let mut s_minus = vec![0.0; m];
    for v in [&mut s_plus, &mut s_minus] {
        v[0] = 0.5;
        v[1] = 0.5;
    }
    s_plus[m - 2] = 0.5;
    s_plus[m - 1] = 0.5;
    s_minus[m - 2] = -0.5;
    s_minus[m - 1] = -0.5;
    let n_sign = if (m / 4) % 2 == 0 { 1.0 } else { -1.0 };
    let mut a_state = vec![0.0; m];
    a_state[0] = 0.5;
    a_state[1] = -0.5;
    a_state[m - 2] = 0.5 * n_sign;
    a_state[m - 1] = -0.5 * n_sign;
    let overlap = |v: &[f64]| {
        let pv: Vec<f64> = (0..m).map(|i| p0.row(i).iter().zip(v).map(|(x, y)| x * y).sum()).collect();
        pv.iter().zip(v).map(|(x, y)| x * y).sum::<f64>()
    };

    let mut by_energy: Vec<usize> = (0..m).collect();
    by_energy.sort_by(|&x, &y| spec.energies[x].abs().total_cmp(&spec.energies[y].abs()));
    let mut candidates: Vec<EdgeState> = by_energy
        .into_iter()
        .take(m / 2 + 1)
        .map(|n| EdgeState {
            index: n,
            energy: spec.energies[n],
            edge_weight: state_edge_weight(&spec.states[n]),
        })
        .collect();
    candidates.sort_by(|x, y| y.edge_weight.total_cmp(&x.edge_weight).then(x.index.cmp(&y.index)));
    let mut pair = [candidates[0].clone(), candidates[1].clone()];
    pair.sort_by_key(|s| s.index);
    let pair_proj = spec.projector(&[pair[0].index, pair[1].index]);

    Ok(NonChiralReport {
        kernel_dim: kernel.len(),
        overlap_s_plus: overlap(&s_plus),
        overlap_s_minus: overlap(&s_minus),
        overlap_a: overlap(&a_state),
        symmetry_defect: spec.symmetry_defect(),
        even_couplings: (1..params.cells()).map(|p| j_even(params, p)).collect(),
        pair_edge_weight: edge_weight_of(&pair_proj, 2.0),
        edge_pair: pair,
    })
}
