//! Randomized property suites over the physics pipeline: basis unitarity and
//! sum rules, coupling gauge invariance, covariance physicality, and the
//! entanglement/correlation witnesses.

use nalgebra::{DMatrix, Matrix3, Matrix4};
use polom_core::coupling::{collective_coupling, coupling_set, coupling_set_from_bases};
use polom_core::dispersion::{
    exciton_polariton_basis, ir_freq, phonon_polariton_basis, thermal_occupation, PhononBranch,
};
use polom_core::entanglement::{
    log_negativity, quadrature_reduce, vis_ir_reduce, PolaritonPair, QuadratureCovariance,
};
use polom_core::langevin::{build_system, stability_margin, steady_covariance};
use polom_core::correlations::{cauchy_schwarz_violated, g2_cross, g2_heralded, IrFilter};
use polom_core::params::default_params;
use polom_core::C64;
use proptest::prelude::*;

const CASES: u32 = 256;

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn hopfield_unitary_and_weights(k in -2.8f64..2.8) {
        let p = default_params();
        let b = exciton_polariton_basis(k, &p).unwrap();
        let w = b.hopfield;
        let gram = w.adjoint() * w - Matrix3::<C64>::identity();
        prop_assert!(gram.iter().all(|z| z.norm() <= 1e-12));
        for col in 0..3 {
            let s: f64 = (0..3).map(|r| w[(r, col)].norm_sqr()).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_preservation(k in -3.0f64..3.0) {
        let p = default_params();
        let b = exciton_polariton_basis(k, &p).unwrap();
        let m_trace = p.omega_exc_shifted
            + polom_core::dispersion::lr_freq(k, polom_core::dispersion::LrBranch::Right, &p)
            + polom_core::dispersion::lr_freq(k, polom_core::dispersion::LrBranch::Left, &p);
        let got = b.omega_l + b.omega_u + b.omega_h;
        prop_assert!(((got - m_trace) / m_trace).abs() <= 1e-12);
    }

    #[test]
    fn decay_rate_convexity(k in -2.8f64..2.8) {
        let p = default_params();
        let b = exciton_polariton_basis(k, &p).unwrap();
        let lo = p.gamma_exc.min(p.gamma_vis_l).min(p.gamma_vis_r);
        let hi = p.gamma_exc.max(p.gamma_vis_l).max(p.gamma_vis_r);
        for g in [b.gamma_l, b.gamma_u, b.gamma_h] {
            prop_assert!(g >= lo - 1e-15 && g <= hi + 1e-15);
        }
    }

    #[test]
    fn phonon_sum_rules(q in -3.0f64..3.0) {
        let p = default_params();
        let b = phonon_polariton_basis(q, &p);
        prop_assert!((b.omega_u + b.omega_l - (p.omega_vib + ir_freq(q, &p))).abs() <= 1e-12 * p.omega_vib);
        prop_assert!((b.gamma_u + b.gamma_l - (p.gamma_ir + p.gamma_vib())).abs() <= 1e-15);
        prop_assert!(b.omega_u >= b.omega_l);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&b.phi));
    }

    #[test]
    fn mixing_angle_monotone_in_detuning(q1 in -3.0f64..3.0, q2 in -3.0f64..3.0) {
        // phi decreases as delta = omega_vib - omega_IR grows.
        let p = default_params();
        let (b1, b2) = (phonon_polariton_basis(q1, &p), phonon_polariton_basis(q2, &p));
        let d1 = p.omega_vib - ir_freq(q1, &p);
        let d2 = p.omega_vib - ir_freq(q2, &p);
        if d1 < d2 {
            prop_assert!(b1.phi >= b2.phi - 1e-12);
        } else {
            prop_assert!(b2.phi >= b1.phi - 1e-12);
        }
    }

    #[test]
    fn coupling_gauge_invariance(
        k_i in -2.5f64..2.5,
        k_f in -2.5f64..2.5,
        th1 in 0.0f64..std::f64::consts::TAU,
        th2 in 0.0f64..std::f64::consts::TAU,
        th3 in 0.0f64..std::f64::consts::TAU,
    ) {
        // Column phases of the Hopfield matrices change the couplings by a
        // global phase only; magnitudes are gauge invariant.
        let p = default_params();
        let pump = exciton_polariton_basis(k_i, &p).unwrap();
        let emission = exciton_polariton_basis(k_f, &p).unwrap();
        let phonon = phonon_polariton_basis(k_i - k_f, &p);
        let base = coupling_set_from_bases(&pump, &emission, &phonon, &p);

        let mut pump2 = pump.clone();
        let mut emission2 = emission.clone();
        for (col, th) in [(0usize, th1), (1, th2), (2, th3)] {
            let ph = C64::from_polar(1.0, th);
            for row in 0..3 {
                pump2.hopfield[(row, col)] *= ph;
                emission2.hopfield[(row, col)] *= ph * C64::from_polar(1.0, 0.5 * th);
            }
        }
        let flipped = coupling_set_from_bases(&pump2, &emission2, &phonon, &p);
        prop_assert!((flipped.g_vib.norm() - base.g_vib.norm()).abs() <= 1e-18 + 1e-9 * base.g_vib.norm());
        prop_assert!((flipped.g_ir.norm() - base.g_ir.norm()).abs() <= 1e-18 + 1e-9 * base.g_ir.norm());
        prop_assert!((flipped.g_upper.norm() - base.g_upper.norm()).abs() <= 1e-18 + 1e-9 * base.g_upper.norm());
        prop_assert!((flipped.g_lower.norm() - base.g_lower.norm()).abs() <= 1e-18 + 1e-9 * base.g_lower.norm());
    }

    #[test]
    fn coupling_bounds_and_rotation_norm(k_i in -2.5f64..2.5, k_f in -2.5f64..2.5) {
        let p = default_params();
        let c = coupling_set(k_i, k_f, &p).unwrap();
        let scale_vis = p.lambda_hr * p.rabi_vis / p.n_exc.sqrt();
        let scale_ir = p.lambda_hr * p.rabi_ir / p.n_exc.sqrt();
        // |X_VisR + X_VisL| <= sqrt(2) bounds the bright-vibration channel.
        prop_assert!(c.g_vib.norm() <= 2f64.sqrt() * scale_vis * (1.0 + 1e-12));
        prop_assert!(c.g_ir.norm() <= scale_ir * (1.0 + 1e-12));
        let lhs = c.g_upper.norm_sqr() + c.g_lower.norm_sqr();
        let rhs = c.g_ir.norm_sqr() + c.g_vib.norm_sqr();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-30));
    }

    #[test]
    fn collective_coupling_scales(n in 0.0f64..1e9) {
        let g = C64::new(1.3e-6, -0.4e-6);
        let gc = collective_coupling(g, n).unwrap();
        prop_assert!((gc.norm() - g.norm() * n.sqrt()).abs() <= 1e-15 * (1.0 + gc.norm()));
    }

    #[test]
    fn covariance_physicality(
        k_i in 0.4f64..1.4,
        k_f in 0.0f64..1.4,
        pump_exp in 0.0f64..5.5,
    ) {
        let p = default_params();
        let n_pump = 10f64.powf(pump_exp);
        let sys = build_system(k_i, k_f, n_pump, &p).unwrap();
        prop_assume!(stability_margin(&sys).unwrap() < -1e-6);
        let cov = steady_covariance(&sys).unwrap();
        let c = &cov.second_moments;

        // Lyapunov residual against the defining equation.
        let resid = &sys.drift * c + c * sys.drift.transpose() + &sys.diffusion;
        let dmax = sys
            .diffusion
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let rmax = resid.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        prop_assert!(rmax <= 1e-10 * dmax, "residual {rmax:.2e} vs D {dmax:.2e}");

        // Occupations real and nonnegative; commutators preserved.
        for m in 0..3 {
            let n_m = c[(2 * m + 1, 2 * m)];
            prop_assert!(n_m.im.abs() <= 1e-10);
            prop_assert!(n_m.re >= -1e-12);
            let comm = c[(2 * m, 2 * m + 1)] - c[(2 * m + 1, 2 * m)];
            prop_assert!((comm.re - 1.0).abs() <= 1e-8 && comm.im.abs() <= 1e-8);
        }

        // Hermiticity pattern <a_i a_j^dag> = conj(<a_j a_i^dag>).
        for i in 0..3 {
            for j in 0..3 {
                let lhs = c[(2 * i, 2 * j + 1)];
                let rhs = c[(2 * j, 2 * i + 1)].conj();
                prop_assert!((lhs - rhs).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn quadrature_blocks_physical(
        k_i in 0.4f64..1.4,
        k_f in 0.0f64..1.4,
        pump_exp in 0.0f64..5.0,
    ) {
        let p = default_params();
        let sys = build_system(k_i, k_f, 10f64.powf(pump_exp), &p).unwrap();
        prop_assume!(stability_margin(&sys).unwrap() < -1e-6);
        let cov = steady_covariance(&sys).unwrap();
        for q in [
            quadrature_reduce(&cov, PolaritonPair::SLowerVUpper),
            quadrature_reduce(&cov, PolaritonPair::SLowerVLower),
            vis_ir_reduce(&cov, cov.system.modes.phi, p.n_bg_vis, p.n_bg_ir).unwrap(),
        ] {
            // Symmetric, vacuum floor on the diagonal, and R + i Omega / 2 >= 0.
            prop_assert!((q.r - q.r.transpose()).norm() <= 1e-12);
            for i in 0..4 {
                prop_assert!(q.r[(i, i)] >= 0.5 - 1e-10);
            }
            let mut h = DMatrix::<C64>::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    h[(i, j)] = C64::new(q.r[(i, j)], 0.0);
                }
            }
            // Symplectic form for (x1, p1, x2, p2).
            for (a, b) in [(0usize, 1usize), (2, 3)] {
                h[(a, b)] += C64::new(0.0, 0.5);
                h[(b, a)] += C64::new(0.0, -0.5);
            }
            let eig = nalgebra::SymmetricEigen::new(h);
            prop_assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-9));
        }
    }

    #[test]
    fn log_negativity_symplectic_invariance(
        r_sq1 in -0.8f64..0.8,
        r_sq2 in -0.8f64..0.8,
        th1 in 0.0f64..std::f64::consts::TAU,
        th2 in 0.0f64..std::f64::consts::TAU,
        th3 in 0.0f64..std::f64::consts::TAU,
        th4 in 0.0f64..std::f64::consts::TAU,
        r_state in 0.01f64..0.8,
        n_th in 0.0f64..0.5,
    ) {
        // Local rotations and squeezers leave E_N unchanged.
        let rot = |t: f64| {
            nalgebra::Matrix2::new(t.cos(), t.sin(), -t.sin(), t.cos())
        };
        let sq = |r: f64| nalgebra::Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp());
        let s1 = rot(th1) * sq(r_sq1) * rot(th2);
        let s2 = rot(th3) * sq(r_sq2) * rot(th4);
        let mut s = Matrix4::<f64>::zeros();
        s.view_mut((0, 0), (2, 2)).copy_from(&s1);
        s.view_mut((2, 2), (2, 2)).copy_from(&s2);

        // Noisy two-mode squeezed covariance.
        let ch = (2.0 * r_state).cosh();
        let sh = (2.0 * r_state).sinh();
        let mut m = Matrix4::<f64>::identity() * (ch / 2.0 + n_th);
        m[(0, 2)] = sh / 2.0;
        m[(2, 0)] = sh / 2.0;
        m[(1, 3)] = -sh / 2.0;
        m[(3, 1)] = -sh / 2.0;
        let base = QuadratureCovariance { r: m, pair: polom_core::entanglement::PairLabel::VisIr };
        let transformed = QuadratureCovariance {
            r: s * m * s.transpose(),
            pair: polom_core::entanglement::PairLabel::VisIr,
        };
        let e0 = log_negativity(&base).unwrap();
        let e1 = log_negativity(&transformed).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-9 * (1.0 + e0), "E_N {e0} vs {e1}");
    }

    #[test]
    fn heralded_identity_relation(g2c in 1.0f64..1e3) {
        // x^2 g2her(x) = 4x - 2 exactly.
        let h = g2_heralded(g2c).unwrap();
        prop_assert!((h * g2c * g2c - (4.0 * g2c - 2.0)).abs() <= 1e-9 * (4.0 * g2c));
        prop_assert!(h >= 0.0 && h <= 2.0);
    }

    #[test]
    fn thermal_occupation_monotone(w1 in 0.01f64..0.5, w2 in 0.01f64..0.5) {
        let kt = 0.025;
        let (n1, n2) = (thermal_occupation(w1, kt), thermal_occupation(w2, kt));
        if w1 < w2 {
            prop_assert!(n1 >= n2);
        } else {
            prop_assert!(n2 >= n1);
        }
    }
}

/// Separability at zero pump: every pair reduction of the thermal state has
/// exactly zero logarithmic negativity and unit cross-correlation.
#[test]
fn zero_pump_is_separable_everywhere() {
    let p = default_params();
    for k_i in [0.4, 0.7, 1.0, 1.3] {
        for k_f in [0.0, 0.5, 1.0, 1.4] {
            let sys = build_system(k_i, k_f, 0.0, &p).unwrap();
            let cov = steady_covariance(&sys).unwrap();
            let phi = sys.modes.phi;
            assert_eq!(
                log_negativity(&quadrature_reduce(&cov, PolaritonPair::SLowerVUpper)).unwrap(),
                0.0
            );
            assert_eq!(
                log_negativity(&quadrature_reduce(&cov, PolaritonPair::SLowerVLower)).unwrap(),
                0.0
            );
            assert_eq!(
                log_negativity(&vis_ir_reduce(&cov, phi, 0.0, 0.0).unwrap()).unwrap(),
                0.0
            );
        }
    }
}

/// Entanglement witness equivalence on a deterministic sample of 100 stable
/// points: with zero background, E_N > 0 if and only if g2(0) > 2; with the
/// reference backgrounds the forward implication survives.
#[test]
fn negativity_equivalent_to_cauchy_schwarz() {
    let p = default_params();
    let mut checked = 0;
    let mut entangled = 0;
    'outer: for i in 0..10 {
        for j in 0..10 {
            let k_i = 0.4 + 1.0 * (i as f64 + 0.5) / 10.0;
            let k_f = 0.0 + 1.4 * (j as f64 + 0.5) / 10.0;
            let sys = build_system(k_i, k_f, 1630.0, &p).unwrap();
            if stability_margin(&sys).unwrap() >= 0.0 {
                continue;
            }
            let cov = steady_covariance(&sys).unwrap();
            let phi = sys.modes.phi;
            let en = log_negativity(&vis_ir_reduce(&cov, phi, 0.0, 0.0).unwrap()).unwrap();
            let g2 = g2_cross(&cov, phi, 0.0, 0.0, 0.0, IrFilter::Both).unwrap();
            if en > 1e-12 {
                entangled += 1;
                assert!(g2 > 2.0 - 1e-9, "E_N = {en} but g2 = {g2} at ({k_i}, {k_f})");
            }
            if g2 > 2.0 + 1e-9 {
                assert!(en > 0.0, "g2 = {g2} but E_N = {en} at ({k_i}, {k_f})");
            }
            // With background noise only the forward implication is claimed.
            let en_bg =
                log_negativity(&vis_ir_reduce(&cov, phi, p.n_bg_vis, p.n_bg_ir).unwrap()).unwrap();
            let g2_bg = g2_cross(&cov, phi, 0.0, p.n_bg_vis, p.n_bg_ir, IrFilter::Both).unwrap();
            if en_bg > 1e-12 {
                assert!(
                    cauchy_schwarz_violated(g2_bg),
                    "bg: E_N = {en_bg} but g2 = {g2_bg} at ({k_i}, {k_f})"
                );
            }
            checked += 1;
            if checked >= 100 {
                break 'outer;
            }
        }
    }
    assert!(checked >= 100, "only {checked} stable points sampled");
    assert!(entangled >= 10, "sample too trivial: {entangled} entangled");
}

/// The stability margin grows monotonically with pump below threshold.
#[test]
fn margin_monotone_in_pump() {
    let p = default_params();
    for (k_i, k_f) in [(1.0, 0.4), (0.8, 0.3), (1.2, 0.5), (0.5, 1.1)] {
        let mut last = f64::NEG_INFINITY;
        for step in 0..12 {
            let n = 1e6 * step as f64 / 11.0;
            let sys = build_system(k_i, k_f, n, &p).unwrap();
            let m = stability_margin(&sys).unwrap();
            assert!(m >= last - 1e-12, "margin dipped at ({k_i}, {k_f}), n = {n}");
            last = m;
        }
    }
}

/// Two-time correlators decay asymptotically at least as fast as the
/// stability margin.
#[test]
fn two_time_asymptotic_decay() {
    let p = default_params();
    let sys = build_system(1.0, 0.4, 1630.0, &p).unwrap();
    let margin = stability_margin(&sys).unwrap();
    let cov = steady_covariance(&sys).unwrap();
    let t1 = 4000.0;
    let t2 = 8000.0;
    let s1 = polom_core::langevin::two_time_covariance(&cov, t1).unwrap();
    let s2 = polom_core::langevin::two_time_covariance(&cov, t2).unwrap();
    let ratio = s2.norm() / s1.norm();
    let bound = (margin * (t2 - t1)).exp() * 3.0;
    assert!(ratio <= bound, "ratio {ratio:.3e} vs bound {bound:.3e}");
}

/// Background noise can only reduce the Vis-IR negativity.
#[test]
fn noise_monotonicity_on_sample() {
    let p = default_params();
    for (k_i, k_f) in [(1.0, 0.2), (1.2, 0.4), (0.9, 0.55), (1.35, 0.1)] {
        let sys = build_system(k_i, k_f, 1630.0, &p).unwrap();
        if stability_margin(&sys).unwrap() >= 0.0 {
            continue;
        }
        let cov = steady_covariance(&sys).unwrap();
        let phi = sys.modes.phi;
        let mut last = f64::INFINITY;
        for scale in [0.0, 0.3, 1.0, 3.0, 10.0] {
            let en = log_negativity(
                &vis_ir_reduce(&cov, phi, scale * p.n_bg_vis, scale * p.n_bg_ir).unwrap(),
            )
            .unwrap();
            assert!(en <= last + 1e-12);
            last = en;
        }
    }
}
