//! Physical constants and scenario configuration. Single source of truth for
//! units and defaults: energies in eV, lengths in um, dimensionless counts.

use crate::error::{Error, Result};
use std::path::Path;

/// All physical constants of the double-resonant system.
///
/// Immutable after construction; cheap to copy and safe to share across
/// parallel workers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Effective refractive index of the visible lattice-resonance modes.
    pub n_eff: f64,
    /// Lattice period of the patterned layer, um.
    pub lattice_a: f64,
    /// IR cavity fundamental energy at q = 0, eV.
    pub omega_ir0: f64,
    /// IR dispersion curvature, eV·um².
    pub alpha_ir: f64,
    /// Vibrational quantum, eV.
    pub omega_vib: f64,
    /// Polaron-shifted exciton energy (omega_exc - Lambda^2 omega_vib), eV.
    pub omega_exc_shifted: f64,
    /// Square root of the Huang-Rhys factor, dimensionless.
    pub lambda_hr: f64,
    /// Number of excitonic emitters in the illuminated region.
    pub n_exc: f64,
    /// Collective Rabi energy of the visible cavity, eV.
    pub rabi_vis: f64,
    /// Collective Rabi energy of the IR cavity, eV.
    pub rabi_ir: f64,
    /// Linewidth of the left-propagating visible mode, eV.
    pub gamma_vis_l: f64,
    /// Linewidth of the right-propagating visible mode, eV.
    pub gamma_vis_r: f64,
    /// IR cavity linewidth, eV.
    pub gamma_ir: f64,
    /// Exciton dissipation rate, eV.
    pub gamma_exc: f64,
    /// Vibrational quality factor; gamma_vib = omega_vib / q_vib.
    pub q_vib: f64,
    /// Thermal energy k_B T, eV.
    pub kt: f64,
    /// Uncorrelated background occupation of the visible output mode.
    pub n_bg_vis: f64,
    /// Uncorrelated background occupation of the IR output mode.
    pub n_bg_ir: f64,
    /// Exciton pure-dephasing rate, eV. Stored for forward compatibility;
    /// the linearized model does not use it.
    pub dephasing_exc: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        default_params()
    }
}

/// The reference parameter set (room temperature, molecular polariton cavity).
pub fn default_params() -> SystemParams {
    SystemParams {
        n_eff: 1.42,
        lattice_a: 0.35,
        omega_ir0: 0.14,
        alpha_ir: 0.04,
        omega_vib: 0.2,
        omega_exc_shifted: 2.72,
        lambda_hr: 1.0,
        n_exc: 1e8,
        rabi_vis: 0.05,
        rabi_ir: 0.016,
        gamma_vis_l: 3e-3,
        gamma_vis_r: 3e-3,
        gamma_ir: 4e-3,
        gamma_exc: 1e-5,
        q_vib: 100.0,
        kt: 0.025,
        n_bg_vis: 1e-6,
        n_bg_ir: 1e-3,
        dephasing_exc: 0.05,
    }
}

impl SystemParams {
    /// Vibrational linewidth omega_vib / Q, eV. The only definition of
    /// gamma_vib in the crate.
    pub fn gamma_vib(&self) -> f64 {
        self.omega_vib / self.q_vib
    }

    /// Checks every physical invariant; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_eff", self.n_eff),
            ("lattice_a_um", self.lattice_a),
            ("omega_ir0_ev", self.omega_ir0),
            ("alpha_ir_ev_um2", self.alpha_ir),
            ("omega_vib_ev", self.omega_vib),
            ("omega_exc_shifted_ev", self.omega_exc_shifted),
            ("rabi_vis_ev", self.rabi_vis),
            ("rabi_ir_ev", self.rabi_ir),
            ("gamma_vis_ev", self.gamma_vis_l),
            ("gamma_vis_ev", self.gamma_vis_r),
            ("gamma_ir_ev", self.gamma_ir),
            ("gamma_exc_ev", self.gamma_exc),
            ("q_vib", self.q_vib),
            ("kt_ev", self.kt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if !(self.n_exc >= 1.0) || !self.n_exc.is_finite() {
            return Err(Error::Validation(format!(
                "n_exc must be >= 1, got {}",
                self.n_exc
            )));
        }
        for (name, v) in [
            ("lambda_hr", self.lambda_hr),
            ("n_bg_vis", self.n_bg_vis),
            ("n_bg_ir", self.n_bg_ir),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Serializes to the flat key-value config format. `load_config` on the
    /// output reproduces this parameter set bit-exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        s.push_str("# polariton-optomech parameters (flat key = value, energies in eV)\n");
        for (k, v) in [
            ("n_eff", self.n_eff),
            ("lattice_a_um", self.lattice_a),
            ("omega_ir0_ev", self.omega_ir0),
            ("alpha_ir_ev_um2", self.alpha_ir),
            ("omega_vib_ev", self.omega_vib),
            ("omega_exc_shifted_ev", self.omega_exc_shifted),
            ("lambda_hr", self.lambda_hr),
            ("n_exc", self.n_exc),
            ("rabi_vis_ev", self.rabi_vis),
            ("rabi_ir_ev", self.rabi_ir),
            ("gamma_vis_ev", self.gamma_vis_l),
            ("gamma_ir_ev", self.gamma_ir),
            ("gamma_exc_ev", self.gamma_exc),
            ("q_vib", self.q_vib),
            ("kt_ev", self.kt),
            ("n_bg_vis", self.n_bg_vis),
            ("n_bg_ir", self.n_bg_ir),
        ] {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

/// Parses the flat key-value config format: one `key = value` per line,
/// `#` starts a comment, unknown keys are rejected. Missing keys fall back
/// to [`default_params`].
pub fn parse_config(text: &str) -> Result<SystemParams> {
    let mut p = default_params();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value: f64 = value.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad number for `{key}`: {e}"),
        })?;
        match key {
            "n_eff" => p.n_eff = value,
            "lattice_a_um" => p.lattice_a = value,
            "omega_ir0_ev" => p.omega_ir0 = value,
            "alpha_ir_ev_um2" => p.alpha_ir = value,
            "omega_vib_ev" => p.omega_vib = value,
            "omega_exc_shifted_ev" => p.omega_exc_shifted = value,
            "lambda_hr" => p.lambda_hr = value,
            "n_exc" => p.n_exc = value,
            "rabi_vis_ev" => p.rabi_vis = value,
            "rabi_ir_ev" => p.rabi_ir = value,
            "gamma_vis_ev" => {
                p.gamma_vis_l = value;
                p.gamma_vis_r = value;
            }
            "gamma_ir_ev" => p.gamma_ir = value,
            "gamma_exc_ev" => p.gamma_exc = value,
            "q_vib" => p.q_vib = value,
            "kt_ev" => p.kt = value,
            "n_bg_vis" => p.n_bg_vis = value,
            "n_bg_ir" => p.n_bg_ir = value,
            // Accepted for forward compatibility; no implemented equation
            // consumes the exciton dephasing rate.
            "dephasing_exc_ev" => {
                log::warn!(
                    "dephasing_exc_ev = {value} accepted but unused by the linearized model"
                );
                p.dephasing_exc = value;
            }
            _ => {
                return Err(Error::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                })
            }
        }
    }
    p.validate()?;
    Ok(p)
}

/// Reads and parses a config file; defaults overridden by present keys.
pub fn load_config(path: &Path) -> Result<SystemParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
