//! Simulation library for a double-resonant polariton optomechanical system:
//! a patterned cavity hosting visible lattice-resonance modes strongly coupled
//! to excitons and a mid-IR Fabry-Perot mode strongly coupled to molecular
//! vibrations. A coherently driven upper exciton-polariton scatters into pairs
//! of lower exciton-polaritons and phonon-polaritons, producing entangled
//! visible/mid-IR light.
//!
//! The library covers the full pipeline:
//!
//! * [`params`] — physical constants and scenario configuration,
//! * [`dispersion`] — bare cavity dispersions, exciton-polariton and
//!   phonon-polariton bases (Hopfield coefficients, decay rates),
//! * [`coupling`] — single-polariton and drive-enhanced optomechanical
//!   couplings,
//! * [`langevin`] — the linearized 6-dimensional Langevin system, stability
//!   analysis, steady-state and two-time covariances,
//! * [`entanglement`] — quadrature covariances and logarithmic negativity,
//! * [`correlations`] — photon statistics (cross- and heralded g²,
//!   Cauchy-Schwarz witness), quantum efficiency, emission rates and the
//!   energy-momentum matching locus,
//! * [`lindblad`] — a truncated-Fock master-equation solver for pulsed
//!   excitation, doubling as the brute-force oracle for the Gaussian methods.
//!
//! Conventions: energies and rates are stored in eV (hbar absorbed), wave
//! vectors in 1/um, times in fs. Conversion to angular rates uses
//! [`HBAR_EV_FS`].

pub mod coupling;
pub mod dispersion;
pub mod entanglement;
pub mod error;
pub mod langevin;
pub mod linalg;
pub mod lindblad;
pub mod correlations;
pub mod params;

pub use error::Error;
pub use params::SystemParams;

/// hbar * c in eV·um.
pub const HBAR_C_EV_UM: f64 = 0.1973269804;

/// hbar in eV·fs; divides energies to produce angular rates in 1/fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// hbar in eV·s; used for photons-per-second conversions.
pub const HBAR_EV_S: f64 = 6.582119569e-16;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
