//! Bare cavity dispersions and the hybrid-mode bases: the 3x3
//! exciton-polariton diagonalization of the visible sector and the 2x2
//! phonon-polariton rotation of the IR sector.
//!
//! Geometry is collinear: wave vectors are signed scalars in 1/um.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::{C64, HBAR_C_EV_UM};
use nalgebra::Matrix3;
use std::f64::consts::PI;

/// Counter-propagating first-order lattice-resonance branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrBranch {
    Left,
    Right,
}

/// Phonon-polariton branch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhononBranch {
    Upper,
    Lower,
}

/// Linear dispersion of the visible lattice-resonance modes, eV.
///
/// Left branch: -(hbar c / n_eff)(k - 2 pi / a); right branch mirrored.
pub fn lr_freq(k: f64, branch: LrBranch, p: &SystemParams) -> f64 {
    let slope = HBAR_C_EV_UM / p.n_eff;
    let g = 2.0 * PI / p.lattice_a;
    match branch {
        LrBranch::Left => -slope * (k - g),
        LrBranch::Right => slope * (k + g),
    }
}

/// Quadratic dispersion of the IR Fabry-Perot mode, eV.
pub fn ir_freq(q: f64, p: &SystemParams) -> f64 {
    p.omega_ir0 + p.alpha_ir * q * q
}

/// Bose-Einstein occupation 1 / (exp(omega/kT) - 1).
pub fn thermal_occupation(omega: f64, kt: f64) -> f64 {
    1.0 / (omega / kt).exp_m1()
}

/// Row indices of the Hopfield matrix (bare basis).
pub const ROW_EXC: usize = 0;
pub const ROW_VIS_R: usize = 1;
pub const ROW_VIS_L: usize = 2;

/// Column indices of the Hopfield matrix (polariton branches, ascending
/// eigenfrequency).
pub const COL_LOWER: usize = 0;
pub const COL_UPPER: usize = 1;
pub const COL_HIGHER: usize = 2;

/// Eigenbasis of the visible sector at one wave vector: eigenfrequencies,
/// Hopfield matrix and branch decay rates.
///
/// `hopfield` has rows (Exc, VisR, VisL) and columns (lower, upper, higher),
/// ordered by ascending eigenfrequency. Columns are gauge-fixed so the
/// largest-magnitude entry of each is real positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonPolaritonBasis {
    pub k: f64,
    pub omega_l: f64,
    pub omega_u: f64,
    pub omega_h: f64,
    pub hopfield: Matrix3<C64>,
    pub gamma_l: f64,
    pub gamma_u: f64,
    pub gamma_h: f64,
}

/// Diagonalizes the 3x3 visible-sector matrix at wave vector `k`.
///
/// Rejects `k` outside the first crossing region where a lattice-resonance
/// branch would have negative energy (|k| > 2 pi / a).
pub fn exciton_polariton_basis(k: f64, p: &SystemParams) -> Result<ExcitonPolaritonBasis> {
    let w_r = lr_freq(k, LrBranch::Right, p);
    let w_l = lr_freq(k, LrBranch::Left, p);
    if w_r < 0.0 || w_l < 0.0 {
        return Err(Error::Domain(format!(
            "k = {k} 1/um lies outside the model's validity range (|k| <= 2 pi / a)"
        )));
    }
    let m = Matrix3::new(
        p.omega_exc_shifted,
        p.rabi_vis,
        p.rabi_vis,
        p.rabi_vis,
        w_r,
        0.0,
        p.rabi_vis,
        0.0,
        w_l,
    );
    let eig = nalgebra::SymmetricEigen::new(m);

    // Ascending eigenvalue order; stable sort keeps solver order on exact ties.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut hopfield = Matrix3::<C64>::zeros();
    let mut omegas = [0.0; 3];
    let mut gammas = [0.0; 3];
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        // Gauge: largest-magnitude entry real positive.
        let mut imax = 0;
        for i in 1..3 {
            if v[i].abs() > v[imax].abs() {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            v = -v;
        }
        for row in 0..3 {
            hopfield[(row, col)] = C64::new(v[row], 0.0);
        }
        omegas[col] = eig.eigenvalues[src];
        gammas[col] = v[ROW_VIS_R].powi(2) * p.gamma_vis_r
            + v[ROW_VIS_L].powi(2) * p.gamma_vis_l
            + v[ROW_EXC].powi(2) * p.gamma_exc;
    }

    Ok(ExcitonPolaritonBasis {
        k,
        omega_l: omegas[0],
        omega_u: omegas[1],
        omega_h: omegas[2],
        hopfield,
        gamma_l: gammas[0],
        gamma_u: gammas[1],
        gamma_h: gammas[2],
    })
}

impl ExcitonPolaritonBasis {
    /// Eigenfrequency of one column, eV.
    pub fn omega(&self, col: usize) -> f64 {
        [self.omega_l, self.omega_u, self.omega_h][col]
    }

    /// Decay rate of one column, eV.
    pub fn gamma(&self, col: usize) -> f64 {
        [self.gamma_l, self.gamma_u, self.gamma_h][col]
    }
}

/// Phonon-polariton basis at one wave vector: mixing angle, eigenfrequencies
/// and decay rates of the upper/lower branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononPolaritonBasis {
    pub q: f64,
    /// Mixing angle phi_q in [0, pi/2]; a_IR = v_L cos(phi) + v_U sin(phi).
    pub phi: f64,
    pub omega_u: f64,
    pub omega_l: f64,
    pub gamma_u: f64,
    pub gamma_l: f64,
}

/// Rotates the (vibration, IR photon) pair into phonon-polaritons at `q`.
pub fn phonon_polariton_basis(q: f64, p: &SystemParams) -> PhononPolaritonBasis {
    let w_ir = ir_freq(q, p);
    let delta = p.omega_vib - w_ir;
    let rabi = p.rabi_ir;
    let arg = ((delta * delta + 4.0 * rabi * rabi) / (4.0 * rabi * rabi)).sqrt()
        - delta / (2.0 * rabi);
    let phi = arg.atan();
    let mean = 0.5 * (p.omega_vib + w_ir);
    let split = (0.25 * delta * delta + rabi * rabi).sqrt();
    let (sin2, cos2) = (phi.sin().powi(2), phi.cos().powi(2));
    let gamma_vib = p.gamma_vib();
    PhononPolaritonBasis {
        q,
        phi,
        omega_u: mean + split,
        omega_l: mean - split,
        gamma_u: p.gamma_ir * sin2 + gamma_vib * cos2,
        gamma_l: p.gamma_ir * cos2 + gamma_vib * sin2,
    }
}

impl PhononPolaritonBasis {
    /// Eigenfrequency of the selected branch, eV.
    pub fn omega(&self, branch: PhononBranch) -> f64 {
        match branch {
            PhononBranch::Upper => self.omega_u,
            PhononBranch::Lower => self.omega_l,
        }
    }

    /// Decay rate of the selected branch, eV.
    pub fn gamma(&self, branch: PhononBranch) -> f64 {
        match branch {
            PhononBranch::Upper => self.gamma_u,
            PhononBranch::Lower => self.gamma_l,
        }
    }
}
