//! Truncated-Fock master-equation solver for the three dynamical modes
//! (s_L, v_U, v_L) under pulsed or CW excitation. This is the brute-force
//! engine: it makes no Gaussianity assumption and serves as the oracle for
//! the covariance methods.
//!
//! The density matrix evolves in a rotating frame chosen so that every
//! interaction phase is static: s_L rotates at the drive frequency and both
//! phonon-polaritons at its negative, leaving only the two-photon detunings
//! Delta_u/l = omega_v + omega_{s_L} - omega_{s_U} on the diagonal. All
//! recorded observables (occupations, the v_U/v_L coherence, equal-time g2)
//! are invariant under this frame.
//!
//! Time stepping is a fixed-step integrating-factor RK4: the number-conserving
//! part of the Liouvillian (Hamiltonian diagonal plus all dissipator
//! anticommutators) acts elementwise on rho and is propagated exactly through
//! precomputed per-state exponential factors; the classical RK4 stages handle
//! only the slow remainder (interaction and quantum-jump terms), so the step
//! is limited by the coupling and decay rates rather than the mode
//! frequencies.

use crate::error::{Error, Result};
use crate::langevin::{mode_set, ModeSet};
use crate::params::SystemParams;
use crate::{C64, HBAR_EV_FS, HBAR_EV_S};
use rayon::prelude::*;

/// Per-mode Fock truncation and integrator controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub cutoff_s: usize,
    pub cutoff_vu: usize,
    pub cutoff_vl: usize,
    /// Integrator step, fs.
    pub dt: f64,
    /// Integration window end, fs.
    pub t_end: f64,
}

/// Desk-scale guard on the total Hilbert-space dimension.
pub const MAX_DIM: usize = 4096;

/// Population allowed in the top Fock level of any mode before the run is
/// declared truncated.
pub const TOP_LEVEL_TOLERANCE: f64 = 1e-3;

impl FockConfig {
    pub fn new(cutoff_s: usize, cutoff_vu: usize, cutoff_vl: usize, dt: f64, t_end: f64) -> Self {
        FockConfig {
            cutoff_s,
            cutoff_vu,
            cutoff_vl,
            dt,
            t_end,
        }
    }

    /// Step and window chosen from the working point: dt resolves the peak
    /// collective coupling and the fastest decay, t_end covers twenty pump
    /// lifetimes.
    pub fn auto(
        cutoffs: (usize, usize, usize),
        k_i: f64,
        k_f: f64,
        n_drive: f64,
        p: &SystemParams,
    ) -> Result<Self> {
        let m = mode_set(k_i, k_f, p)?;
        let g_peak = m.couplings.g_upper.norm().max(m.couplings.g_lower.norm())
            * n_drive.max(1.0).sqrt()
            / HBAR_EV_FS;
        let gamma_max = m.gamma_s_l.max(m.gamma_v_u).max(m.gamma_v_l).max(m.gamma_s_u)
            / HBAR_EV_FS;
        let dt = 0.02 / g_peak.max(gamma_max);
        let t_end = 20.0 * HBAR_EV_FS / m.gamma_s_u;
        Ok(FockConfig::new(cutoffs.0, cutoffs.1, cutoffs.2, dt, t_end))
    }

    pub fn dims(&self) -> usize {
        self.cutoff_s * self.cutoff_vu * self.cutoff_vl
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff_s < 2 || self.cutoff_vu < 2 || self.cutoff_vl < 2 {
            return Err(Error::Validation(format!(
                "Fock cutoffs must be >= 2, got ({}, {}, {})",
                self.cutoff_s, self.cutoff_vu, self.cutoff_vl
            )));
        }
        if self.dims() > MAX_DIM {
            return Err(Error::Validation(format!(
                "Hilbert dimension {} exceeds the desk-scale guard {MAX_DIM}",
                self.dims()
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(Error::Validation(format!(
                "t_end must cover at least one step, got {} with dt {}",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }
}

/// One of the three dynamical modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockMode {
    SLower,
    VUpper,
    VLower,
}

/// Dense density matrix over the three-mode Fock space, row-major with the
/// flat index ((i_s * d_u) + i_u) * d_l + i_l.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    dims: [usize; 3],
    rho: Vec<C64>,
}

impl FockState {
    /// Wraps an externally constructed density matrix.
    pub fn from_density(dims: [usize; 3], rho: Vec<C64>) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if rho.len() != n * n {
            return Err(Error::Validation(format!(
                "density matrix length {} does not match dimension {n}^2",
                rho.len()
            )));
        }
        Ok(FockState { dims, rho })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn density(&self) -> &[C64] {
        &self.rho
    }

    pub fn n_states(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    fn digit(&self, state: usize, mode: FockMode) -> usize {
        let [_, du, dl] = self.dims;
        match mode {
            FockMode::SLower => state / (du * dl),
            FockMode::VUpper => (state / dl) % du,
            FockMode::VLower => state % dl,
        }
    }

    pub fn trace(&self) -> C64 {
        let n = self.n_states();
        (0..n).map(|i| self.rho[i * n + i]).sum()
    }

    /// Mean occupation of one mode.
    pub fn occupation(&self, mode: FockMode) -> f64 {
        let n = self.n_states();
        (0..n)
            .map(|i| self.digit(i, mode) as f64 * self.rho[i * n + i].re)
            .sum()
    }

    /// Total population in the top Fock level of one mode.
    pub fn top_population(&self, mode: FockMode) -> f64 {
        let n = self.n_states();
        let top = match mode {
            FockMode::SLower => self.dims[0] - 1,
            FockMode::VUpper => self.dims[1] - 1,
            FockMode::VLower => self.dims[2] - 1,
        };
        (0..n)
            .filter(|&i| self.digit(i, mode) == top)
            .map(|i| self.rho[i * n + i].re)
            .sum()
    }

    /// Interbranch coherence <v_U^dag v_L>.
    pub fn coherence_vu_vl(&self) -> C64 {
        let [_, du, dl] = self.dims;
        let n = self.n_states();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let nu = (i / dl) % du;
            let nl = i % dl;
            if nl >= 1 && nu + 1 < du {
                let j = i + dl - 1; // raise v_U, lower v_L
                acc += ((nl as f64) * (nu as f64 + 1.0)).sqrt() * self.rho[i * n + j];
            }
        }
        acc
    }

    /// IR cavity occupation through the mixing angle phi.
    pub fn n_ir(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        s * s * self.occupation(FockMode::VUpper)
            + c * c * self.occupation(FockMode::VLower)
            + 2.0 * s * c * self.coherence_vu_vl().re
    }
}

/// Equal-time cross-correlation g2_Vis-IR(t, 0) evaluated directly from the
/// density matrix (no Gaussian factorization): <s^dag a_IR^dag a_IR s> /
/// (<s^dag s><a_IR^dag a_IR>) with a_IR = v_L cos(phi) + v_U sin(phi).
pub fn g2_cross_equal_time(state: &FockState, phi: f64) -> Result<f64> {
    let n = state.n_states();
    let [ds, du, dl] = state.dims;
    let st_s = du * dl;
    let n_s = state.occupation(FockMode::SLower);
    let n_ir = state.n_ir(phi);
    if n_s < 1e-12 || n_ir < 1e-12 {
        return Err(Error::InvalidState(format!(
            "g2 undefined at occupations ({n_s:.3e}, {n_ir:.3e})"
        )));
    }
    // sigma = S rho S^dag, kept implicit: sigma[m, k] =
    // sqrt((ns_m + 1)(ns_k + 1)) rho[m + st_s, k + st_s].
    let sig = |m: usize, k: usize| -> C64 {
        let ns_m = m / st_s;
        let ns_k = k / st_s;
        if ns_m + 1 < ds && ns_k + 1 < ds {
            ((ns_m as f64 + 1.0) * (ns_k as f64 + 1.0)).sqrt()
                * state.rho[(m + st_s) * n + (k + st_s)]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let (sphi, cphi) = phi.sin_cos();
    let mut tr_nu = 0.0;
    let mut tr_nl = 0.0;
    let mut tr_coh = C64::new(0.0, 0.0);
    for m in 0..n {
        let nu = (m / dl) % du;
        let nl = m % dl;
        tr_nu += nu as f64 * sig(m, m).re;
        tr_nl += nl as f64 * sig(m, m).re;
        if nl >= 1 && nu + 1 < du {
            let j = m + dl - 1;
            tr_coh += ((nl as f64) * (nu as f64 + 1.0)).sqrt() * sig(m, j);
        }
    }
    let numerator = sphi * sphi * tr_nu + cphi * cphi * tr_nl + 2.0 * sphi * cphi * tr_coh.re;
    Ok(numerator / (n_s * n_ir))
}

/// Time series of occupations, pair counts and equal-time g2 from one
/// master-equation run.
#[derive(Debug, Clone)]
pub struct PulseTrajectory {
    pub t: Vec<f64>,
    pub n_s: Vec<f64>,
    pub n_vu: Vec<f64>,
    pub n_vl: Vec<f64>,
    pub n_ir: Vec<f64>,
    /// Equal-time g2_Vis-IR(t, 0); NaN where either occupation is below the
    /// defined threshold.
    pub g2_cross_t: Vec<f64>,
    /// Interbranch coherence <v_U^dag v_L> at the sample times.
    pub coh_vu_vl: Vec<C64>,
    /// Emitted visible photons: integral of gamma_{s_L} <n_s> over the window.
    pub photons_per_pulse_vis: f64,
    /// Emitted IR photons: integral of gamma_IR <n_IR> over the window.
    pub photons_per_pulse_ir: f64,
    /// Integration window (start, end), fs.
    pub integration_window: (f64, f64),
    pub final_state: FockState,
}

/// Pulsed excitation: the pump occupation decays as n0 exp(-gamma_{s_U} t).
pub fn evolve_pulse(
    k_i: f64,
    k_f: f64,
    n0: f64,
    p: &SystemParams,
    fc: &FockConfig,
) -> Result<PulseTrajectory> {
    if !(n0 >= 0.0) {
        return Err(Error::Domain(format!("n0 must be nonnegative, got {n0}")));
    }
    let modes = mode_set(k_i, k_f, p)?;
    let gamma_su_rate = modes.gamma_s_u / HBAR_EV_FS;
    evolve_driven(&modes, fc, move |t| n0 * (-gamma_su_rate * t).exp())
}

/// CW-analog excitation at a constant pump occupation; the brute-force
/// cross-check of the Gaussian steady state.
pub fn evolve_cw(
    k_i: f64,
    k_f: f64,
    n_pump: f64,
    p: &SystemParams,
    fc: &FockConfig,
) -> Result<PulseTrajectory> {
    if !(n_pump >= 0.0) {
        return Err(Error::Domain(format!(
            "n_pump must be nonnegative, got {n_pump}"
        )));
    }
    let modes = mode_set(k_i, k_f, p)?;
    evolve_driven(&modes, fc, move |_| n_pump)
}

/// General driver: `pump_occupation(t)` supplies n_{s_U|k_i}(t).
pub fn evolve_driven(
    modes: &ModeSet,
    fc: &FockConfig,
    pump_occupation: impl Fn(f64) -> f64,
) -> Result<PulseTrajectory> {
    fc.validate()?;
    let engine = Engine::new(modes, fc);
    engine.run(fc, pump_occupation)
}

// --- engine internals --------------------------------------------------

/// Buffers switch to rayon row-parallel kernels above this state count.
const PAR_MIN_STATES: usize = 1000;
const TILE: usize = 64;

/// One quantum-jump channel w A rho A^dag with A a single-mode ladder
/// operator: a constant source offset plus per-state amplitudes.
struct JumpChannel {
    weight: f64,
    /// Source flat-index offset (state +- mode stride).
    offset: isize,
    /// Ladder amplitude per state; zero marks rows outside the domain.
    fac: Vec<f64>,
    /// Compact list of valid column indices with sources and factors.
    cols: Vec<u32>,
    col_srcs: Vec<u32>,
    col_facs: Vec<f64>,
}

impl JumpChannel {
    fn build(weight: f64, dims: [usize; 3], mode: FockMode, lowering: bool) -> Self {
        let [ds, du, dl] = dims;
        let n = ds * du * dl;
        let (dim, stride) = match mode {
            FockMode::SLower => (ds, du * dl),
            FockMode::VUpper => (du, dl),
            FockMode::VLower => (dl, 1),
        };
        let digit = |i: usize| match mode {
            FockMode::SLower => i / (du * dl),
            FockMode::VUpper => (i / dl) % du,
            FockMode::VLower => i % dl,
        };
        let offset = if lowering {
            stride as isize
        } else {
            -(stride as isize)
        };
        let mut fac = vec![0.0f64; n];
        let mut cols = Vec::new();
        let mut col_srcs = Vec::new();
        let mut col_facs = Vec::new();
        for (i, f) in fac.iter_mut().enumerate() {
            let d = digit(i);
            // (A rho A^dag)[i, j] = sqrt((d_i+1)(d_j+1)) rho[i+st, j+st];
            // the raising channel mirrors it with sqrt(d).
            *f = if lowering {
                if d + 1 < dim {
                    (d as f64 + 1.0).sqrt()
                } else {
                    0.0
                }
            } else if d >= 1 {
                (d as f64).sqrt()
            } else {
                0.0
            };
            if *f != 0.0 {
                cols.push(i as u32);
                col_srcs.push((i as isize + offset) as u32);
                col_facs.push(*f);
            }
        }
        JumpChannel {
            weight,
            offset,
            fac,
            cols,
            col_srcs,
            col_facs,
        }
    }
}

struct Engine {
    n: usize,
    dims: [usize; 3],
    phi: f64,
    /// gamma_{s_L} and bare gamma_IR in 1/fs for the emission integrals.
    gamma_s_rate: f64,
    gamma_ir_rate: f64,
    /// Exponential factors of the number-conserving part over dt/2 and dt,
    /// with reciprocals.
    u_half: Vec<C64>,
    u_full: Vec<C64>,
    r_half: Vec<C64>,
    r_full: Vec<C64>,
    /// Interaction V = g_u T_u + g_l T_l + h.c. (1/fs) as CSR.
    v_row_ptr: Vec<u32>,
    v_cols: Vec<u32>,
    v_vals: Vec<C64>,
    jumps: Vec<JumpChannel>,
    /// Thermal occupations of the dynamical modes for the initial state.
    init_nth: [f64; 3],
}

impl Engine {
    fn new(modes: &ModeSet, fc: &FockConfig) -> Self {
        let dims = [fc.cutoff_s, fc.cutoff_vu, fc.cutoff_vl];
        let [ds, du, dl] = dims;
        let n = ds * du * dl;
        let st_s = du * dl;
        let st_u = dl;

        // Frame detunings (1/fs): s_L at zero, the phonon-polaritons at the
        // two-photon mismatch.
        let delta_u = (modes.omega_v_u + modes.omega_s_l - modes.omega_s_u) / HBAR_EV_FS;
        let delta_l = (modes.omega_v_l + modes.omega_s_l - modes.omega_s_u) / HBAR_EV_FS;

        let gs = modes.gamma_s_l / HBAR_EV_FS;
        let gu = modes.gamma_v_u / HBAR_EV_FS;
        let gl = modes.gamma_v_l / HBAR_EV_FS;
        let (ns_th, nu_th, nl_th) = (modes.nth_s_l, modes.nth_v_u, modes.nth_v_l);

        let digit = |i: usize| -> (f64, f64, f64) {
            (
                (i / st_s) as f64,
                ((i / st_u) % du) as f64,
                (i % dl) as f64,
            )
        };
        // Elementwise exponent mu = -i d - w/2: H0 diagonal plus every
        // dissipator anticommutator.
        let mut mu = vec![C64::new(0.0, 0.0); n];
        for (i, m) in mu.iter_mut().enumerate() {
            let (a, b, c) = digit(i);
            let d = delta_u * b + delta_l * c;
            let w = gs * ((1.0 + ns_th) * a + ns_th * (a + 1.0))
                + gu * ((1.0 + nu_th) * b + nu_th * (b + 1.0))
                + gl * ((1.0 + nl_th) * c + nl_th * (c + 1.0));
            *m = C64::new(-0.5 * w, -d);
        }
        let dt = fc.dt;
        let u_half: Vec<C64> = mu.iter().map(|m| (m * 0.5 * dt).exp()).collect();
        let u_full: Vec<C64> = mu.iter().map(|m| (m * dt).exp()).collect();
        let r_half: Vec<C64> = mu.iter().map(|m| (-m * 0.5 * dt).exp()).collect();
        let r_full: Vec<C64> = mu.iter().map(|m| (-m * dt).exp()).collect();

        // Interaction V (Hermitian, drive envelope applied at call time).
        let g_u = modes.couplings.g_upper / HBAR_EV_FS;
        let g_l = modes.couplings.g_lower / HBAR_EV_FS;
        let mut entries: Vec<Vec<(u32, C64)>> = vec![Vec::new(); n];
        for i in 0..n {
            let (a, b, c) = digit(i);
            if (a as usize) + 1 < ds && (b as usize) + 1 < du {
                let j = i + st_s + st_u;
                let amp = ((a + 1.0) * (b + 1.0)).sqrt();
                entries[j].push((i as u32, g_u * amp));
                entries[i].push((j as u32, g_u.conj() * amp));
            }
            if (a as usize) + 1 < ds && (c as usize) + 1 < dl {
                let j = i + st_s + 1;
                let amp = ((a + 1.0) * (c + 1.0)).sqrt();
                entries[j].push((i as u32, g_l * amp));
                entries[i].push((j as u32, g_l.conj() * amp));
            }
        }
        let mut v_row_ptr = Vec::with_capacity(n + 1);
        let mut v_cols = Vec::new();
        let mut v_vals = Vec::new();
        v_row_ptr.push(0u32);
        for row in &entries {
            for &(c, v) in row {
                v_cols.push(c);
                v_vals.push(v);
            }
            v_row_ptr.push(v_cols.len() as u32);
        }

        // Decay and thermal-pump jumps per mode; numerically zero channels
        // are dropped.
        let mut jumps = Vec::new();
        for (mode, gamma, nth) in [
            (FockMode::SLower, gs, ns_th),
            (FockMode::VUpper, gu, nu_th),
            (FockMode::VLower, gl, nl_th),
        ] {
            for (w, lowering) in [(gamma * (1.0 + nth), true), (gamma * nth, false)] {
                if w > 1e-30 {
                    jumps.push(JumpChannel::build(w, dims, mode, lowering));
                }
            }
        }

        Engine {
            n,
            dims,
            phi: modes.phi,
            gamma_s_rate: gs,
            gamma_ir_rate: modes.gamma_ir_cavity / HBAR_EV_FS,
            u_half,
            u_full,
            r_half,
            r_full,
            v_row_ptr,
            v_cols,
            v_vals,
            jumps,
            init_nth: [ns_th, nu_th, nl_th],
        }
    }

    fn parallel(&self) -> bool {
        self.n >= PAR_MIN_STATES
    }

    /// Thermal product initial state: geometric distributions truncated at
    /// the cutoffs and renormalized (vacuum where n_th is zero).
    fn initial_state(&self) -> Vec<C64> {
        let [ds, du, dl] = self.dims;
        let probs = |dim: usize, nbar: f64| -> Vec<f64> {
            if nbar <= 0.0 {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                return v;
            }
            let x = nbar / (1.0 + nbar);
            let mut v: Vec<f64> = (0..dim).map(|k| x.powi(k as i32)).collect();
            let z: f64 = v.iter().sum();
            v.iter_mut().for_each(|p| *p /= z);
            v
        };
        let ps = probs(ds, self.init_nth[0]);
        let pu = probs(du, self.init_nth[1]);
        let pl = probs(dl, self.init_nth[2]);
        let n = self.n;
        let mut rho = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..ds {
            for b in 0..du {
                for c in 0..dl {
                    let i = (a * du + b) * dl + c;
                    rho[i * n + i] = C64::new(ps[a] * pu[b] * pl[c], 0.0);
                }
            }
        }
        rho
    }

    /// k = (scale V) rho, row-parallel CSR times dense.
    fn apply_interaction(&self, scale: C64, rho: &[C64], k: &mut [C64]) {
        let n = self.n;
        let body = |row: usize, out: &mut [C64]| {
            out.fill(C64::new(0.0, 0.0));
            let lo = self.v_row_ptr[row] as usize;
            let hi = self.v_row_ptr[row + 1] as usize;
            for e in lo..hi {
                let c = self.v_cols[e] as usize;
                let v = scale * self.v_vals[e];
                let src = &rho[c * n..(c + 1) * n];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        };
        if self.parallel() {
            k.par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, out)| body(row, out));
        } else {
            for (row, out) in k.chunks_mut(n).enumerate() {
                body(row, out);
            }
        }
    }

    /// In-place k <- k + k^dagger over unordered tile pairs.
    fn symmetrize_adjoint(&self, k: &mut [C64]) {
        let n = self.n;
        let nt = n.div_ceil(TILE);
        let mut pairs = Vec::with_capacity(nt * (nt + 1) / 2);
        for a in 0..nt {
            for b in a..nt {
                pairs.push((a, b));
            }
        }
        let ptr = SendPtr(k.as_mut_ptr());
        let work = move |&(a, b): &(usize, usize)| {
            let p = ptr;
            let (r0, r1) = (a * TILE, ((a + 1) * TILE).min(n));
            let (c0, c1) = (b * TILE, ((b + 1) * TILE).min(n));
            // Tiles (a,b) and (b,a) are owned exclusively by this pair.
            unsafe {
                if a == b {
                    for r in r0..r1 {
                        for c in r..c1 {
                            let x = *p.0.add(r * n + c);
                            let y = *p.0.add(c * n + r);
                            *p.0.add(r * n + c) = x + y.conj();
                            if c != r {
                                *p.0.add(c * n + r) = y + x.conj();
                            }
                        }
                    }
                } else {
                    for r in r0..r1 {
                        for c in c0..c1 {
                            let x = *p.0.add(r * n + c);
                            let y = *p.0.add(c * n + r);
                            *p.0.add(r * n + c) = x + y.conj();
                            *p.0.add(c * n + r) = y + x.conj();
                        }
                    }
                }
            }
        };
        if self.parallel() {
            pairs.par_iter().for_each(work);
        } else {
            pairs.iter().for_each(work);
        }
    }

    /// k += sum over jump channels of w A rho A^dag, row parallel.
    fn apply_jumps(&self, rho: &[C64], k: &mut [C64]) {
        let n = self.n;
        let body = |row: usize, out: &mut [C64]| {
            for ch in &self.jumps {
                let f_row = ch.fac[row];
                if f_row == 0.0 {
                    continue;
                }
                let src_row = (row as isize + ch.offset) as usize;
                let src = &rho[src_row * n..(src_row + 1) * n];
                let coeff = ch.weight * f_row;
                for ((&c, &cs), &cf) in ch.cols.iter().zip(&ch.col_srcs).zip(&ch.col_facs) {
                    out[c as usize] += coeff * cf * src[cs as usize];
                }
            }
        };
        if self.parallel() {
            k.par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, out)| body(row, out));
        } else {
            for (row, out) in k.chunks_mut(n).enumerate() {
                body(row, out);
            }
        }
    }

    /// Slow remainder R(t, rho) into k: -iE [V, rho] + jump terms, with the
    /// commutator written as Z + Z^dag for Z = (-iE V) rho.
    fn rhs(&self, envelope_sqrt: f64, rho: &[C64], k: &mut [C64]) {
        let scale = C64::new(0.0, -envelope_sqrt);
        self.apply_interaction(scale, rho, k);
        self.symmetrize_adjoint(k);
        self.apply_jumps(rho, k);
    }

    /// y = u (.) (rho + c k) with the elementwise outer-product factors.
    fn stage_input(&self, y: &mut [C64], rho: &[C64], k: &[C64], c: f64, u: &[C64]) {
        let n = self.n;
        let body = |row: usize, out: &mut [C64]| {
            let ur = u[row];
            let base = row * n;
            for j in 0..n {
                out[j] = ur * u[j].conj() * (rho[base + j] + c * k[base + j]);
            }
        };
        if self.parallel() {
            y.par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, out)| body(row, out));
        } else {
            for (row, out) in y.chunks_mut(n).enumerate() {
                body(row, out);
            }
        }
    }

    /// k <- r (.) k and acc += c k, fused in one pass.
    fn fold_stage(&self, k: &mut [C64], acc: &mut [C64], c: f64, r: &[C64]) {
        let n = self.n;
        let ptr = SendPtr(acc.as_mut_ptr());
        let body = move |row: usize, kk: &mut [C64], r: &[C64]| {
            let p = ptr;
            let rr = r[row];
            let base = row * n;
            for j in 0..n {
                let v = rr * r[j].conj() * kk[j];
                kk[j] = v;
                // Disjoint row segments of acc per rayon chunk.
                unsafe {
                    *p.0.add(base + j) += c * v;
                }
            }
        };
        if self.parallel() {
            k.par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, kk)| body(row, kk, r));
        } else {
            for (row, kk) in k.chunks_mut(n).enumerate() {
                body(row, kk, r);
            }
        }
    }

    /// acc += c k (first stage needs no transform).
    fn accumulate(&self, acc: &mut [C64], k: &[C64], c: f64) {
        let n = self.n;
        if self.parallel() {
            acc.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
                let base = row * n;
                for (j, o) in out.iter_mut().enumerate() {
                    *o += c * k[base + j];
                }
            });
        } else {
            for (o, &v) in acc.iter_mut().zip(k) {
                *o += c * v;
            }
        }
    }

    /// rho = u (.) acc.
    fn fold_final(&self, rho: &mut [C64], acc: &[C64], u: &[C64]) {
        let n = self.n;
        let body = |row: usize, out: &mut [C64]| {
            let ur = u[row];
            let base = row * n;
            for (j, o) in out.iter_mut().enumerate() {
                *o = ur * u[j].conj() * acc[base + j];
            }
        };
        if self.parallel() {
            rho.par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, out)| body(row, out));
        } else {
            for (row, out) in rho.chunks_mut(n).enumerate() {
                body(row, out);
            }
        }
    }

    fn observables(&self, rho: &[C64]) -> (f64, f64, f64, C64) {
        let n = self.n;
        let [_, du, dl] = self.dims;
        let mut n_s = 0.0;
        let mut n_u = 0.0;
        let mut n_l = 0.0;
        let mut coh = C64::new(0.0, 0.0);
        for i in 0..n {
            let d = rho[i * n + i].re;
            n_s += (i / (du * dl)) as f64 * d;
            let nu = (i / dl) % du;
            let nl = i % dl;
            n_u += nu as f64 * d;
            n_l += nl as f64 * d;
            if nl >= 1 && nu + 1 < du {
                coh += ((nl as f64) * (nu as f64 + 1.0)).sqrt() * rho[i * n + (i + dl - 1)];
            }
        }
        (n_s, n_u, n_l, coh)
    }

    fn top_populations(&self, rho: &[C64]) -> [f64; 3] {
        let n = self.n;
        let [ds, du, dl] = self.dims;
        let mut tops = [0.0; 3];
        for i in 0..n {
            let d = rho[i * n + i].re;
            if i / (du * dl) == ds - 1 {
                tops[0] += d;
            }
            if (i / dl) % du == du - 1 {
                tops[1] += d;
            }
            if i % dl == dl - 1 {
                tops[2] += d;
            }
        }
        tops
    }

    fn run(&self, fc: &FockConfig, pump_occupation: impl Fn(f64) -> f64) -> Result<PulseTrajectory> {
        let n = self.n;
        let nn = n * n;
        let dt = fc.dt;
        let steps = (fc.t_end / dt).ceil() as usize;
        let sample_every = (steps / 1200).max(1);

        let mut rho = self.initial_state();
        let mut acc = vec![C64::new(0.0, 0.0); nn];
        let mut y = vec![C64::new(0.0, 0.0); nn];
        let mut k = vec![C64::new(0.0, 0.0); nn];

        let mut traj = PulseTrajectory {
            t: Vec::new(),
            n_s: Vec::new(),
            n_vu: Vec::new(),
            n_vl: Vec::new(),
            n_ir: Vec::new(),
            g2_cross_t: Vec::new(),
            coh_vu_vl: Vec::new(),
            photons_per_pulse_vis: 0.0,
            photons_per_pulse_ir: 0.0,
            integration_window: (0.0, steps as f64 * dt),
            final_state: FockState {
                dims: self.dims,
                rho: Vec::new(),
            },
        };

        let (sphi, cphi) = self.phi.sin_cos();
        let compose_ir =
            |nu: f64, nl: f64, coh: C64| sphi * sphi * nu + cphi * cphi * nl + 2.0 * sphi * cphi * coh.re;

        let record = |t: f64, rho: &[C64], traj: &mut PulseTrajectory| {
            let (n_s, n_u, n_l, coh) = self.observables(rho);
            traj.t.push(t);
            traj.n_s.push(n_s);
            traj.n_vu.push(n_u);
            traj.n_vl.push(n_l);
            traj.n_ir.push(compose_ir(n_u, n_l, coh));
            traj.coh_vu_vl.push(coh);
            let state = FockState {
                dims: self.dims,
                rho: rho.to_vec(),
            };
            traj.g2_cross_t
                .push(g2_cross_equal_time(&state, self.phi).unwrap_or(f64::NAN));
        };

        let mut t = 0.0;
        let (mut prev_ns, mut prev_nu, mut prev_nl, mut prev_coh) = self.observables(&rho);
        record(0.0, &rho, &mut traj);

        for step in 0..steps {
            let e1 = pump_occupation(t).max(0.0).sqrt();
            let e2 = pump_occupation(t + 0.5 * dt).max(0.0).sqrt();
            let e4 = pump_occupation(t + dt).max(0.0).sqrt();

            acc.copy_from_slice(&rho);
            // k1
            self.rhs(e1, &rho, &mut k);
            self.accumulate(&mut acc, &k, dt / 6.0);
            // k2
            self.stage_input(&mut y, &rho, &k, 0.5 * dt, &self.u_half);
            let y_in = std::mem::take(&mut y);
            self.rhs(e2, &y_in, &mut k);
            y = y_in;
            self.fold_stage(&mut k, &mut acc, dt / 3.0, &self.r_half);
            // k3
            self.stage_input(&mut y, &rho, &k, 0.5 * dt, &self.u_half);
            let y_in = std::mem::take(&mut y);
            self.rhs(e2, &y_in, &mut k);
            y = y_in;
            self.fold_stage(&mut k, &mut acc, dt / 3.0, &self.r_half);
            // k4
            self.stage_input(&mut y, &rho, &k, dt, &self.u_full);
            let y_in = std::mem::take(&mut y);
            self.rhs(e4, &y_in, &mut k);
            y = y_in;
            self.fold_stage(&mut k, &mut acc, dt / 6.0, &self.r_full);

            self.fold_final(&mut rho, &acc, &self.u_full);
            t = (step + 1) as f64 * dt;

            // Emission integrals, trapezoid at full step resolution.
            let (n_s, n_u, n_l, coh) = self.observables(&rho);
            let n_ir = compose_ir(n_u, n_l, coh);
            let prev_ir = compose_ir(prev_nu, prev_nl, prev_coh);
            traj.photons_per_pulse_vis += 0.5 * dt * self.gamma_s_rate * (prev_ns + n_s);
            traj.photons_per_pulse_ir += 0.5 * dt * self.gamma_ir_rate * (prev_ir + n_ir);
            (prev_ns, prev_nu, prev_nl, prev_coh) = (n_s, n_u, n_l, coh);

            let tops = self.top_populations(&rho);
            let worst = tops.iter().copied().fold(0.0, f64::max);
            if worst > TOP_LEVEL_TOLERANCE {
                return Err(Error::Truncation { population: worst });
            }

            if (step + 1) % sample_every == 0 || step + 1 == steps {
                record(t, &rho, &mut traj);
            }
        }

        traj.final_state = FockState {
            dims: self.dims,
            rho,
        };
        Ok(traj)
    }
}

/// Raw pointer wrapper for provably disjoint parallel writes.
#[derive(Clone, Copy)]
struct SendPtr(*mut C64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// Photon flux conversion: rate (eV) times occupation over hbar, photons/s.
pub fn photon_rate_per_second(gamma_ev: f64, occupation: f64) -> f64 {
    gamma_ev / HBAR_EV_S * occupation
}
