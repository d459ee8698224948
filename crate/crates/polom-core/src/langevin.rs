//! The linearized 6-dimensional quantum Langevin system for one (k_i, k_f)
//! pair: drift and diffusion matrices, stability analysis, steady-state and
//! two-time covariances.
//!
//! Basis order is fixed as (s_L, s_L^dag, v_U, v_U^dag, v_L, v_L^dag) in the
//! rotating frame of the drive: the s_L rows carry exp(+-i omega_{s_U|k_i} t)
//! so the drift matrix is time independent. All stored correlators are frame
//! correlators; de-framing happens in the correlations module.

use crate::coupling::{collective_coupling, coupling_set, CouplingSet};
use crate::dispersion::{
    exciton_polariton_basis, phonon_polariton_basis, thermal_occupation,
};
use crate::error::{Error, Result};
use crate::linalg::{expm, lyapunov_solve, spectral_abscissa};
use crate::params::SystemParams;
use crate::{C64, HBAR_EV_FS};
use nalgebra::DMatrix;

/// Mode data of one (k_i, k_f) working point: eigenfrequencies and decay
/// rates (eV), the IR mixing angle, thermal occupations at each mode's
/// eigenfrequency, and the optomechanical couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSet {
    pub k_i: f64,
    pub k_f: f64,
    pub q: f64,
    /// Driven upper exciton-polariton at k_i.
    pub omega_s_u: f64,
    pub gamma_s_u: f64,
    /// Lower exciton-polariton at k_f.
    pub omega_s_l: f64,
    pub gamma_s_l: f64,
    /// Phonon-polaritons at q = k_i - k_f.
    pub omega_v_u: f64,
    pub gamma_v_u: f64,
    pub omega_v_l: f64,
    pub gamma_v_l: f64,
    /// IR mixing angle phi_q.
    pub phi: f64,
    /// Bare IR cavity linewidth, eV (photon leakage channel of the IR output).
    pub gamma_ir_cavity: f64,
    pub nth_s_l: f64,
    pub nth_v_u: f64,
    pub nth_v_l: f64,
    pub couplings: CouplingSet,
}

/// Builds the mode data shared by the Langevin and Lindblad engines.
pub fn mode_set(k_i: f64, k_f: f64, p: &SystemParams) -> Result<ModeSet> {
    let pump = exciton_polariton_basis(k_i, p)?;
    let emission = exciton_polariton_basis(k_f, p)?;
    let q = k_i - k_f;
    let phonon = phonon_polariton_basis(q, p);
    let couplings = coupling_set(k_i, k_f, p)?;
    Ok(ModeSet {
        k_i,
        k_f,
        q,
        omega_s_u: pump.omega_u,
        gamma_s_u: pump.gamma_u,
        omega_s_l: emission.omega_l,
        gamma_s_l: emission.gamma_l,
        omega_v_u: phonon.omega_u,
        gamma_v_u: phonon.gamma_u,
        omega_v_l: phonon.omega_l,
        gamma_v_l: phonon.gamma_l,
        phi: phonon.phi,
        gamma_ir_cavity: p.gamma_ir,
        nth_s_l: thermal_occupation(emission.omega_l, p.kt),
        nth_v_u: thermal_occupation(phonon.omega_u, p.kt),
        nth_v_l: thermal_occupation(phonon.omega_l, p.kt),
        couplings,
    })
}

/// The linearized Langevin system: 6x6 complex drift and diffusion matrices
/// in angular-rate units (1/fs), plus the mode data they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinSystem {
    pub drift: DMatrix<C64>,
    pub diffusion: DMatrix<C64>,
    pub n_pump: f64,
    pub modes: ModeSet,
}

/// Assembles drift and diffusion for a pump occupation `n_pump` of the upper
/// exciton-polariton at k_i.
pub fn build_system(k_i: f64, k_f: f64, n_pump: f64, p: &SystemParams) -> Result<LangevinSystem> {
    let modes = mode_set(k_i, k_f, p)?;
    build_system_from_modes(&modes, n_pump)
}

/// Same as [`build_system`] but reusing precomputed mode data.
pub fn build_system_from_modes(modes: &ModeSet, n_pump: f64) -> Result<LangevinSystem> {
    let g_u = collective_coupling(modes.couplings.g_upper, n_pump)? / HBAR_EV_FS;
    let g_l = collective_coupling(modes.couplings.g_lower, n_pump)? / HBAR_EV_FS;

    // Frame detuning of s_L relative to the drive.
    let det = (modes.omega_s_l - modes.omega_s_u) / HBAR_EV_FS;
    let w_u = modes.omega_v_u / HBAR_EV_FS;
    let w_l = modes.omega_v_l / HBAR_EV_FS;
    let gs = modes.gamma_s_l / HBAR_EV_FS;
    let gu = modes.gamma_v_u / HBAR_EV_FS;
    let gl = modes.gamma_v_l / HBAR_EV_FS;

    let i = C64::i();
    let mut m = DMatrix::<C64>::zeros(6, 6);
    m[(0, 0)] = -i * det - 0.5 * gs;
    m[(1, 1)] = i * det - 0.5 * gs;
    m[(2, 2)] = -i * w_u - 0.5 * gu;
    m[(3, 3)] = i * w_u - 0.5 * gu;
    m[(4, 4)] = -i * w_l - 0.5 * gl;
    m[(5, 5)] = i * w_l - 0.5 * gl;
    // Creation-creation coupling blocks (two-mode squeezing); the same 2x2
    // anti-diagonal block sits at (s_L, v) and (v, s_L).
    for (row, g) in [(2usize, g_u), (4usize, g_l)] {
        m[(0, row + 1)] = -i * g;
        m[(1, row)] = i * g.conj();
        m[(row, 1)] = -i * g;
        m[(row + 1, 0)] = i * g.conj();
    }

    let mut d = DMatrix::<C64>::zeros(6, 6);
    for (idx, gamma, nth) in [
        (0usize, gs, modes.nth_s_l),
        (2, gu, modes.nth_v_u),
        (4, gl, modes.nth_v_l),
    ] {
        d[(idx, idx + 1)] = C64::new(gamma * (1.0 + nth), 0.0);
        d[(idx + 1, idx)] = C64::new(gamma * nth, 0.0);
    }

    Ok(LangevinSystem {
        drift: m,
        diffusion: d,
        n_pump,
        modes: *modes,
    })
}

/// Largest real part over the drift spectrum, 1/fs. Negative means stable.
pub fn stability_margin(sys: &LangevinSystem) -> Result<f64> {
    spectral_abscissa(&sys.drift)
}

const THRESHOLD_PUMP_CAP: f64 = 1e12;

fn threshold_for_target(
    modes: &ModeSet,
    target: f64,
    label: &str,
) -> Result<f64> {
    let margin_at = |n: f64| -> Result<f64> {
        Ok(stability_margin(&build_system_from_modes(modes, n)?)? - target)
    };
    if margin_at(0.0)? >= 0.0 {
        return Err(Error::InvalidState(format!(
            "{label}: system not stable at zero pump"
        )));
    }
    if margin_at(THRESHOLD_PUMP_CAP)? < 0.0 {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0f64, THRESHOLD_PUMP_CAP);
    let mut mid = hi;
    for _ in 0..300 {
        mid = 0.5 * (lo + hi);
        let m = margin_at(mid)?;
        if m.abs() < 1e-12 {
            return Ok(mid);
        }
        if m < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// Pump occupation n* at which the drift matrix acquires an eigenvalue with
/// zero real part. Returns +infinity when stable up to the 1e12 cap.
pub fn instability_threshold(k_i: f64, k_f: f64, p: &SystemParams) -> Result<f64> {
    let modes = mode_set(k_i, k_f, p)?;
    threshold_for_target(&modes, 0.0, "instability threshold")
}

/// Initial pump occupation n0* at which the largest eigenvalue real part
/// reaches the pump-state decay rate gamma_{s_U|k_i}; the linearized pulsed
/// model is applicable below this bound.
pub fn pulsed_applicability_threshold(k_i: f64, k_f: f64, p: &SystemParams) -> Result<f64> {
    let modes = mode_set(k_i, k_f, p)?;
    let target = modes.gamma_s_u / HBAR_EV_FS;
    threshold_for_target(&modes, target, "pulsed applicability threshold")
}

/// Steady-state second moments <a a^T> in the fixed basis order, together
/// with the system they solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet {
    pub second_moments: DMatrix<C64>,
    pub system: LangevinSystem,
}

/// Solves the continuous Lyapunov equation M C + C M^T + D = 0 for the
/// steady-state covariance. Fails with [`Error::Instability`] when the drift
/// spectrum touches the closed right half plane.
pub fn steady_covariance(sys: &LangevinSystem) -> Result<CovarianceSet> {
    let margin = stability_margin(sys)?;
    if margin >= 0.0 {
        return Err(Error::Instability { margin });
    }
    let c = lyapunov_solve(&sys.drift, &sys.diffusion)?;
    Ok(CovarianceSet {
        second_moments: c,
        system: sys.clone(),
    })
}

impl CovarianceSet {
    /// Steady occupation of the lower exciton-polariton, <s^dag s>.
    pub fn n_s(&self) -> f64 {
        self.second_moments[(1, 0)].re
    }

    /// Steady occupation of the upper phonon-polariton.
    pub fn n_v_u(&self) -> f64 {
        self.second_moments[(3, 2)].re
    }

    /// Steady occupation of the lower phonon-polariton.
    pub fn n_v_l(&self) -> f64 {
        self.second_moments[(5, 4)].re
    }

    /// Steady coherence <v_U^dag v_L>.
    pub fn coherence_vu_vl(&self) -> C64 {
        self.second_moments[(3, 4)]
    }

    /// IR cavity occupation via a_IR = v_L cos(phi) + v_U sin(phi).
    pub fn n_ir(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        s * s * self.n_v_u()
            + c * c * self.n_v_l()
            + s * c * (self.second_moments[(3, 4)] + self.second_moments[(5, 2)]).re
    }
}

/// Two-time covariance <A(t+tau) A^T(t)> = exp(M tau) C_ss for tau >= 0.
pub fn two_time_covariance(cov: &CovarianceSet, tau: f64) -> Result<DMatrix<C64>> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!(
            "tau must be nonnegative (use symmetry externally), got {tau}"
        )));
    }
    let propagator = expm(&(&cov.system.drift * C64::new(tau, 0.0)));
    Ok(&propagator * &cov.second_moments)
}
