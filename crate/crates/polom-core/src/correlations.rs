//! Photon statistics and efficiency observables: cross- and heralded
//! second-order correlations, the Cauchy-Schwarz witness, quantum efficiency,
//! emission rates and the energy-momentum matching locus.

use crate::dispersion::{exciton_polariton_basis, phonon_polariton_basis, PhononBranch};
use crate::error::{Error, Result};
use crate::langevin::{two_time_covariance, CovarianceSet};
use crate::params::SystemParams;
use crate::{HBAR_EV_FS, HBAR_EV_S};

/// Which IR pathway feeds the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrFilter {
    /// Only the upper phonon-polariton component sin(phi) v_U.
    Upper,
    /// Only the lower phonon-polariton component cos(phi) v_L.
    Lower,
    /// The full IR cavity output of both pathways.
    Both,
}

/// Cross-correlation g2_Vis-IR(tau) between the visible emission detected at
/// t and the IR emission detected at t + tau, tau >= 0.
///
/// The numerator is the anomalous two-time correlator built from the frame
/// covariance; the frame phase exp(-i omega_{s_U} t) is unit modulus and
/// cancels in the squared magnitude. Backgrounds enter the denominators only
/// (uncorrelated admixture).
pub fn g2_cross(
    cov: &CovarianceSet,
    phi: f64,
    tau: f64,
    n_bg_vis: f64,
    n_bg_ir: f64,
    filter: IrFilter,
) -> Result<f64> {
    if !(n_bg_vis >= 0.0) || !(n_bg_ir >= 0.0) {
        return Err(Error::Domain(format!(
            "background occupations must be nonnegative, got ({n_bg_vis}, {n_bg_ir})"
        )));
    }
    let s = two_time_covariance(cov, tau)?;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let c = &cov.second_moments;

    let n_s = c[(1, 0)].re + n_bg_vis;
    let (numerator, n_ir) = match filter {
        IrFilter::Both => {
            let anom = sin_phi * s[(2, 0)] + cos_phi * s[(4, 0)];
            (anom.norm_sqr(), cov.n_ir(phi) + n_bg_ir)
        }
        IrFilter::Upper => {
            let anom = sin_phi * s[(2, 0)];
            (
                anom.norm_sqr(),
                sin_phi * sin_phi * c[(3, 2)].re + n_bg_ir,
            )
        }
        IrFilter::Lower => {
            let anom = cos_phi * s[(4, 0)];
            (
                anom.norm_sqr(),
                cos_phi * cos_phi * c[(5, 4)].re + n_bg_ir,
            )
        }
    };
    Ok(1.0 + numerator / (n_s * n_ir))
}

/// Time series of g2_Vis-IR over a tau grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub tau_grid: Vec<f64>,
    pub g2_cross: Vec<f64>,
    pub source_filter: IrFilter,
}

/// Evaluates [`g2_cross`] over a tau grid.
pub fn g2_trace(
    cov: &CovarianceSet,
    taus: &[f64],
    phi: f64,
    n_bg_vis: f64,
    n_bg_ir: f64,
    filter: IrFilter,
) -> Result<CorrelationTrace> {
    let mut g2 = Vec::with_capacity(taus.len());
    for &tau in taus {
        g2.push(g2_cross(cov, phi, tau, n_bg_vis, n_bg_ir, filter)?);
    }
    Ok(CorrelationTrace {
        tau_grid: taus.to_vec(),
        g2_cross: g2,
        source_filter: filter,
    })
}

/// Autocorrelation of heralded IR light, g2_IR(her)(0) = 4/x - 2/x^2 with
/// x = g2_Vis-IR(0).
pub fn g2_heralded(g2c: f64) -> Result<f64> {
    if !(g2c >= 1.0) {
        return Err(Error::Domain(format!(
            "cross-correlation must be >= 1 for Gaussian states, got {g2c}"
        )));
    }
    Ok(4.0 / g2c - 2.0 / (g2c * g2c))
}

/// Cauchy-Schwarz violation witness: below threshold both autocorrelations
/// equal 2, so violation is equivalent to g2_Vis-IR(0) > 2.
pub fn cauchy_schwarz_violated(g2c: f64) -> bool {
    g2c > 2.0
}

/// Quantum efficiency of the drive-to-pair transition,
/// gamma_{s_L} n_{s_L} / (gamma_{s_U} n_{s_U}).
pub fn quantum_efficiency(cov: &CovarianceSet) -> Result<f64> {
    let n_pump = cov.system.n_pump;
    if n_pump <= 0.0 {
        return Err(Error::InvalidState(
            "quantum efficiency undefined at zero pump".into(),
        ));
    }
    let m = &cov.system.modes;
    Ok(m.gamma_s_l * cov.n_s() / (m.gamma_s_u * n_pump))
}

/// Photon emission rates in photons per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRates {
    pub vis_rate: f64,
    pub ir_rate: f64,
    /// IR rate above the thermal (zero-pump) baseline.
    pub excess_ir_rate: f64,
}

/// Visible and IR emission rates; the IR output composes both
/// phonon-polariton branches through the mixing angle, leaking through the
/// bare IR cavity linewidth. The thermal baseline is the zero-pump value
/// sin^2(phi) n_th(v_U) + cos^2(phi) n_th(v_L).
pub fn emission_rates(cov: &CovarianceSet) -> EmissionRates {
    let m = &cov.system.modes;
    let vis_rate = m.gamma_s_l / HBAR_EV_S * cov.n_s();
    let n_ir = cov.n_ir(m.phi);
    let n_ir_thermal = {
        let (s, c) = m.phi.sin_cos();
        s * s * m.nth_v_u + c * c * m.nth_v_l
    };
    let ir_rate = m.gamma_ir_cavity / HBAR_EV_S * n_ir;
    let excess_ir_rate = m.gamma_ir_cavity / HBAR_EV_S * (n_ir - n_ir_thermal);
    EmissionRates {
        vis_rate,
        ir_rate,
        excess_ir_rate,
    }
}

/// Solves the energy-momentum matching condition
/// omega_{s_U}(k_i) = omega_{s_L}(k_f) + omega_{v,branch}(k_i - k_f)
/// for k_f by a scan over [-3, 3] 1/um with step 1e-3 and bisection
/// refinement to 1e-6. Returns roots in ascending order; empty when no
/// crossing exists in range.
pub fn matching_locus(k_i: f64, branch: PhononBranch, p: &SystemParams) -> Result<Vec<f64>> {
    let pump = exciton_polariton_basis(k_i, p)?;
    let w_pump = pump.omega_u;
    let mismatch = |k_f: f64| -> Result<f64> {
        let emission = exciton_polariton_basis(k_f, p)?;
        let phonon = phonon_polariton_basis(k_i - k_f, p);
        Ok(w_pump - emission.omega_l - phonon.omega(branch))
    };
    const SCAN_STEP: f64 = 1e-3;
    const REFINE: f64 = 1e-6;
    let mut roots = Vec::new();
    let n = (6.0 / SCAN_STEP).round() as usize;
    let mut prev_k = -3.0;
    let mut prev_v = mismatch(prev_k)?;
    for i in 1..=n {
        let k = -3.0 + 6.0 * (i as f64) / (n as f64);
        let v = mismatch(k)?;
        if prev_v == 0.0 {
            roots.push(prev_k);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi, mut f_lo) = (prev_k, k, prev_v);
            while hi - lo > REFINE {
                let mid = 0.5 * (lo + hi);
                let f_mid = mismatch(mid)?;
                if f_lo * f_mid <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_k = k;
        prev_v = v;
    }
    Ok(roots)
}

/// Residual of the matching condition at a candidate root, eV.
pub fn matching_residual(k_i: f64, k_f: f64, branch: PhononBranch, p: &SystemParams) -> Result<f64> {
    let pump = exciton_polariton_basis(k_i, p)?;
    let emission = exciton_polariton_basis(k_f, p)?;
    let phonon = phonon_polariton_basis(k_i - k_f, p);
    Ok(pump.omega_u - emission.omega_l - phonon.omega(branch))
}

/// Beat angular frequency between the two IR pathways,
/// (omega_{v_U} - omega_{v_L}) / hbar in 1/fs.
pub fn beat_frequency(cov: &CovarianceSet) -> f64 {
    (cov.system.modes.omega_v_u - cov.system.modes.omega_v_l) / HBAR_EV_FS
}
