//! Single-polariton optomechanical coupling constants between a driven upper
//! exciton-polariton at `k_i` and a lower exciton-polariton at `k_f`, plus
//! the drive-enhanced collective coupling.

use crate::dispersion::{
    exciton_polariton_basis, phonon_polariton_basis, ExcitonPolaritonBasis,
    PhononPolaritonBasis, COL_LOWER, COL_UPPER, ROW_EXC, ROW_VIS_L, ROW_VIS_R,
};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::C64;

/// Optomechanical couplings for one (k_i, k_f) pair, eV.
///
/// `g_vib` / `g_ir` couple the polariton pair to the bright vibration and the
/// IR cavity photon; `g_upper` / `g_lower` are their rotation into the
/// phonon-polariton basis at q = k_i - k_f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    pub k_i: f64,
    pub k_f: f64,
    pub g_vib: C64,
    pub g_ir: C64,
    pub g_upper: C64,
    pub g_lower: C64,
}

/// Couplings computed from explicit bases; the bases must correspond to
/// k_i (pump), k_f (emission) and q = k_i - k_f.
///
/// Accepts Hopfield matrices in any column gauge: a column phase multiplies
/// the couplings by a global phase and leaves all observables unchanged.
pub fn coupling_set_from_bases(
    pump: &ExcitonPolaritonBasis,
    emission: &ExcitonPolaritonBasis,
    phonon: &PhononPolaritonBasis,
    p: &SystemParams,
) -> CouplingSet {
    let xu = pump.hopfield.column(COL_UPPER);
    let xl = emission.hopfield.column(COL_LOWER);
    let xu_vis = xu[ROW_VIS_R] + xu[ROW_VIS_L];
    let xl_vis = xl[ROW_VIS_R] + xl[ROW_VIS_L];

    let scale_vib = p.lambda_hr * p.rabi_vis / p.n_exc.sqrt();
    let scale_ir = p.lambda_hr * p.rabi_ir / p.n_exc.sqrt();
    let g_vib = scale_vib * (xu_vis.conj() * xl[ROW_EXC] - xu[ROW_EXC].conj() * xl_vis);
    let g_ir = -scale_ir * xu[ROW_EXC].conj() * xl[ROW_EXC];

    let (sin_phi, cos_phi) = phonon.phi.sin_cos();
    CouplingSet {
        k_i: pump.k,
        k_f: emission.k,
        g_vib,
        g_ir,
        g_upper: g_ir * sin_phi + g_vib * cos_phi,
        g_lower: g_ir * cos_phi - g_vib * sin_phi,
    }
}

/// Couplings for the pair (k_i, k_f) with the bases built from `p`.
pub fn coupling_set(k_i: f64, k_f: f64, p: &SystemParams) -> Result<CouplingSet> {
    let pump = exciton_polariton_basis(k_i, p)?;
    let emission = exciton_polariton_basis(k_f, p)?;
    let phonon = phonon_polariton_basis(k_i - k_f, p);
    Ok(coupling_set_from_bases(&pump, &emission, &phonon, p))
}

/// Drive-enhanced collective coupling g sqrt(n_pump), eV.
pub fn collective_coupling(g: C64, n_pump: f64) -> Result<C64> {
    if !(n_pump >= 0.0) {
        return Err(Error::Domain(format!(
            "pump occupation must be nonnegative, got {n_pump}"
        )));
    }
    Ok(g * n_pump.sqrt())
}
