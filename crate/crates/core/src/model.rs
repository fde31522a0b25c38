//! Geometry, hopping coefficients and guided-mode coupling matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cos_turns, sin_turns, SymMatrix};

/// Lattice geometry and rate scale. Lengths are in units of the guided wavelength λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a_over_lambda: f64,
    b_over_lambda: f64,
    sites: usize,
    gamma: f64,
    chiral: bool,
}

impl ModelParams {
    /// `b` given as a fraction of `a`, the natural axis of the phase diagram.
    pub fn new(a_over_lambda: f64, b_over_a: f64, sites: usize) -> Result<Self> {
        if !a_over_lambda.is_finite() || !b_over_a.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        if !(b_over_a > 0.0 && b_over_a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "b/a must lie in (0, 1), got {b_over_a}"
            )));
        }
        Self::from_lengths(a_over_lambda, b_over_a * a_over_lambda, sites)
    }

    /// `b` given directly in units of λ. Preferred when `b/λ` must be exact, e.g. `b = λ/2`.
    pub fn from_lengths(a_over_lambda: f64, b_over_lambda: f64, sites: usize) -> Result<Self> {
        if !a_over_lambda.is_finite() || !b_over_lambda.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        if !(a_over_lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "a/λ must be positive, got {a_over_lambda}"
            )));
        }
        if !(b_over_lambda > 0.0 && b_over_lambda < a_over_lambda) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < b < a, got a/λ = {a_over_lambda}, b/λ = {b_over_lambda}"
            )));
        }
        check_sites(sites)?;
        Ok(Self {
            a_over_lambda,
            b_over_lambda,
            sites,
            gamma: 1.0,
            chiral: false,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("γ must be positive, got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_chiral(mut self, chiral: bool) -> Self {
        self.chiral = chiral;
        self
    }

    pub fn with_sites(mut self, sites: usize) -> Result<Self> {
        check_sites(sites)?;
        self.sites = sites;
        Ok(self)
    }

    pub fn a_over_lambda(&self) -> f64 {
        self.a_over_lambda
    }

    pub fn b_over_lambda(&self) -> f64 {
        self.b_over_lambda
    }

    pub fn b_over_a(&self) -> f64 {
        self.b_over_lambda / self.a_over_lambda
    }

    /// Number of atoms `M`.
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Number of unit cells `M/2`.
    pub fn cells(&self) -> usize {
        self.sites / 2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn chiral(&self) -> bool {
        self.chiral
    }

    pub(crate) fn require_sites(&self, min: usize, what: &str) -> Result<()> {
        if self.sites < min {
            return Err(Error::Precondition(format!(
                "{what} needs M ≥ {min}, got M = {}",
                self.sites
            )));
        }
        Ok(())
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 2 || sites % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "M must be even and at least 2, got {sites}"
        )));
    }
    Ok(())
}

/// Atom coordinates along the waveguide, in units of λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomPositions {
    z: Vec<f64>,
}

impl AtomPositions {
    /// Rejects non-finite, empty or non-increasing input.
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidParameter("no atoms".into()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("atom positions"));
        }
        if let Some(i) = z.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!(
                "positions must be strictly increasing (z[{}] = {}, z[{}] = {})",
                i,
                z[i],
                i + 1,
                z[i + 1]
            )));
        }
        Ok(Self { z })
    }

    /// `z_{2q−1} = (q−1)a`, `z_{2q} = (q−1)a + b`.
    pub fn clean(params: &ModelParams) -> Self {
        let a = params.a_over_lambda;
        let b = params.b_over_lambda;
        let z = (0..params.sites)
            .map(|i| {
                let cell = (i / 2) as f64 * a;
                if i % 2 == 0 {
                    cell
                } else {
                    cell + b
                }
            })
            .collect();
        Self { z }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// `J_{2p} = (γ/2) sin(2πpa)`. Zero when the chiral projection is on.
pub fn j_even(params: &ModelParams, p: usize) -> f64 {
    if params.chiral {
        return 0.0;
    }
    0.5 * params.gamma * sin_turns(p as f64 * params.a_over_lambda)
}

/// `J'_{2p−1} = (γ/2) sin(2π((p−1)a + b))`, the hop from `a_q` forward to `b_{q+p−1}`.
pub fn j_odd_prime(params: &ModelParams, p: usize) -> f64 {
    let x = (p as f64 - 1.0) * params.a_over_lambda + params.b_over_lambda;
    0.5 * params.gamma * sin_turns(x)
}

/// `J_{2p−1} = (γ/2) sin(2π(pa − b))`, the hop from `b_q` forward to `a_{q+p}`.
pub fn j_odd(params: &ModelParams, p: usize) -> f64 {
    let x = p as f64 * params.a_over_lambda - params.b_over_lambda;
    0.5 * params.gamma * sin_turns(x)
}

/// The three hopping families of the clean chain. Index `k` holds `p = k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingSet {
    /// `J_{2p}`, `p = 1 … M/2 − 1`.
    pub j_even: Vec<f64>,
    /// `J'_{2p−1}`, `p = 1 … M/2`.
    pub j_odd_prime: Vec<f64>,
    /// `J_{2p−1}`, `p = 1 … M/2 − 1`.
    pub j_odd: Vec<f64>,
}

impl HoppingSet {
    pub fn new(params: &ModelParams) -> Self {
        let cells = params.cells();
        Self {
            j_even: (1..cells).map(|p| j_even(params, p)).collect(),
            j_odd_prime: (1..=cells).map(|p| j_odd_prime(params, p)).collect(),
            j_odd: (1..cells).map(|p| j_odd(params, p)).collect(),
        }
    }

    /// Places the coefficients at `|i − j|` with the parity rules of the chain:
    /// even distance `2p` carries `J_{2p}`; odd distance from an A site carries
    /// `J'`, from a B site `J`.
    pub fn assemble(&self, sites: usize) -> Result<SymMatrix> {
        let cells = sites / 2;
        if sites % 2 != 0 || self.j_odd_prime.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: self.j_odd_prime.len() * 2,
                found: sites,
            });
        }
        Ok(SymMatrix::from_upper(sites, |i, j| {
            if i == j {
                return 0.0;
            }
            let d = j - i;
            if d % 2 == 0 {
                self.j_even[d / 2 - 1]
            } else {
                let p = (d + 1) / 2;
                if i % 2 == 0 {
                    self.j_odd_prime[p - 1]
                } else {
                    self.j_odd[p - 1]
                }
            }
        }))
    }
}

/// Coherent (`V`) and dissipative (`Γ`) guided-mode couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    pub coherent: SymMatrix,
    pub dissipative: SymMatrix,
}

impl CouplingSet {
    /// `V_ij = (γ/2) sin(2π|z_i − z_j|)`, `Γ_ij = γ cos(2π(z_i − z_j))`; with `chiral`,
    /// `V_ij` is zeroed for even `|i − j|`.
    pub fn from_positions(positions: &AtomPositions, gamma: f64, chiral: bool) -> Result<Self> {
        let z = positions.as_slice();
        let n = z.len();
        for i in 0..n {
            for j in i + 1..n {
                if z[i] == z[j] {
                    return Err(Error::InvalidParameter(format!(
                        "atoms {i} and {j} coincide at z = {}",
                        z[i]
                    )));
                }
            }
        }
        let coherent = SymMatrix::from_upper(n, |i, j| {
            if i == j || (chiral && (j - i) % 2 == 0) {
                0.0
            } else {
                0.5 * gamma * sin_turns((z[j] - z[i]).abs())
            }
        });
        let dissipative = SymMatrix::from_upper(n, |i, j| {
            if i == j {
                gamma
            } else {
                gamma * cos_turns(z[i] - z[j])
            }
        });
        Ok(Self {
            coherent,
            dissipative,
        })
    }

    /// The `M = 1` baseline: a lone atom, `V = 0`, `Γ = γ`.
    pub fn single_atom(gamma: f64) -> Self {
        let mut dissipative = SymMatrix::zeros(1);
        dissipative.set(0, 0, gamma);
        Self {
            coherent: SymMatrix::zeros(1),
            dissipative,
        }
    }

    pub fn order(&self) -> usize {
        self.coherent.order()
    }
}

pub fn couplings(positions: &AtomPositions, params: &ModelParams) -> Result<CouplingSet> {
    if positions.len() != params.sites {
        return Err(Error::DimensionMismatch {
            expected: params.sites,
            found: positions.len(),
        });
    }
    CouplingSet::from_positions(positions, params.gamma, params.chiral)
}

/// Zeroes every even-distance entry of `v`.
pub fn chiral_projection(v: &SymMatrix) -> SymMatrix {
    let n = v.order();
    SymMatrix::from_upper(n, |i, j| if (j - i) % 2 == 0 { 0.0 } else { v.get(i, j) })
}
