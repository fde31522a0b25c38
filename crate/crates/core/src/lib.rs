//! Extended Su-Schrieffer-Heeger chain with waveguide-mediated all-to-all hopping.
//!
//! Two interleaved atomic arrays sit next to a one-dimensional waveguide. The guided
//! modes produce coherent couplings `V_ij = (γ/2) sin(β|z_i - z_j|)` and collective
//! dissipation `Γ_ij = γ cos(β(z_i - z_j))` that do not decay with distance. This
//! crate computes
//!
//! * bulk topology: Bloch functions, bands and the winding number ([`bulk`]),
//! * open-chain spectra, mass gaps, edge-state localization and the
//!   strong-zero-mode algebra ([`openchain`]),
//! * positional-disorder ensembles ([`disorder`]),
//! * single-excitation dissipative dynamics ([`dynamics`]).
//!
//! Units: lengths in the guided wavelength `λ = 2π/β`, rates and energies in the
//! single-atom decay rate `γ` (default 1), `ħ = 1`.

pub mod bulk;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod openchain;

pub use error::{Error, Result};
pub use model::{AtomPositions, CouplingSet, HoppingSet, ModelParams};
