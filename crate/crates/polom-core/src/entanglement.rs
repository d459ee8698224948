//! Quadrature covariance matrices for mode pairs and the logarithmic
//! negativity. Vacuum convention: x = (a + a^dag)/sqrt(2), so the vacuum
//! quadrature variance is 1/2 and E_N = max(0, -ln 2|xi|) with xi the
//! smallest symplectic eigenvalue of the partially transposed covariance.

use crate::error::{Error, Result};
use crate::langevin::CovarianceSet;
use crate::C64;
use nalgebra::{DMatrix, Matrix2, Matrix4};

/// Which two-mode reduction a quadrature covariance describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    /// Lower exciton-polariton with the upper phonon-polariton.
    SLowerVUpper,
    /// Lower exciton-polariton with the lower phonon-polariton.
    SLowerVLower,
    /// Emitted visible light with the composite IR cavity mode.
    VisIr,
}

/// Polariton pair selector for [`quadrature_reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolaritonPair {
    SLowerVUpper,
    SLowerVLower,
}

/// 4x4 real symmetric covariance of one mode pair in basis (x1, p1, x2, p2).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureCovariance {
    pub r: Matrix4<f64>,
    pub pair: PairLabel,
}

/// a -> x transformation for two modes: rows (x1, p1, x2, p2) against
/// columns (a1, a1^dag, a2, a2^dag), each block (1, 1; -i, i)/sqrt(2).
fn quad_transform() -> Matrix4<C64> {
    let s = 1.0 / 2f64.sqrt();
    let one = C64::new(s, 0.0);
    let mi = C64::new(0.0, -s);
    let pi = C64::new(0.0, s);
    let zero = C64::new(0.0, 0.0);
    Matrix4::new(
        one, one, zero, zero, //
        mi, pi, zero, zero, //
        zero, zero, one, one, //
        zero, zero, mi, pi,
    )
}

fn symmetrized_real(x: &Matrix4<C64>) -> Matrix4<f64> {
    let mut r = Matrix4::<f64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            r[(i, j)] = 0.5 * (x[(i, j)] + x[(j, i)]).re;
        }
    }
    r
}

fn quad_from_mode_block(block: &Matrix4<C64>, pair: PairLabel) -> QuadratureCovariance {
    let u = quad_transform();
    let x = u * block * u.transpose();
    QuadratureCovariance {
        r: symmetrized_real(&x),
        pair,
    }
}

/// Reduces the 6x6 second-moment matrix to one polariton pair and transforms
/// to quadratures.
pub fn quadrature_reduce(cov: &CovarianceSet, pair: PolaritonPair) -> QuadratureCovariance {
    let (idx, label): ([usize; 4], PairLabel) = match pair {
        PolaritonPair::SLowerVUpper => ([0, 1, 2, 3], PairLabel::SLowerVUpper),
        PolaritonPair::SLowerVLower => ([0, 1, 4, 5], PairLabel::SLowerVLower),
    };
    let c = &cov.second_moments;
    let mut block = Matrix4::<C64>::zeros();
    for (r, &ir) in idx.iter().enumerate() {
        for (s, &is) in idx.iter().enumerate() {
            block[(r, s)] = c[(ir, is)];
        }
    }
    quad_from_mode_block(&block, label)
}

/// Reduces to the (visible, IR output) pair: the IR mode is
/// a_IR = v_L cos(phi) + v_U sin(phi), and uncorrelated background
/// occupations are added to the normal-ordered entries of both modes before
/// the quadrature transform.
pub fn vis_ir_reduce(
    cov: &CovarianceSet,
    phi: f64,
    n_bg_vis: f64,
    n_bg_ir: f64,
) -> Result<QuadratureCovariance> {
    if !(n_bg_vis >= 0.0) || !(n_bg_ir >= 0.0) {
        return Err(Error::Domain(format!(
            "background occupations must be nonnegative, got ({n_bg_vis}, {n_bg_ir})"
        )));
    }
    let (s, co) = phi.sin_cos();
    // Rows (s_L, s_L^dag, a_IR, a_IR^dag) against the 6-mode basis.
    let mut u = DMatrix::<C64>::zeros(4, 6);
    u[(0, 0)] = C64::new(1.0, 0.0);
    u[(1, 1)] = C64::new(1.0, 0.0);
    u[(2, 2)] = C64::new(s, 0.0);
    u[(2, 4)] = C64::new(co, 0.0);
    u[(3, 3)] = C64::new(s, 0.0);
    u[(3, 5)] = C64::new(co, 0.0);
    let reduced = &u * &cov.second_moments * u.transpose();
    let mut block = Matrix4::<C64>::zeros();
    for r in 0..4 {
        for c in 0..4 {
            block[(r, c)] = reduced[(r, c)];
        }
    }
    block[(0, 1)] += n_bg_vis;
    block[(1, 0)] += n_bg_vis;
    block[(2, 3)] += n_bg_ir;
    block[(3, 2)] += n_bg_ir;
    Ok(quad_from_mode_block(&block, PairLabel::VisIr))
}

/// Logarithmic negativity of a two-mode quadrature covariance.
///
/// xi^2 is the smaller nonnegative root of the biquadratic
/// xi^4 - (det C11 + det C22 - 2 det C12) xi^2 + det R = 0; tiny negative
/// roots from roundoff (>= -1e-12) are clamped to zero.
pub fn log_negativity(q: &QuadratureCovariance) -> Result<f64> {
    let r = &q.r;
    let c11 = Matrix2::new(r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]);
    let c22 = Matrix2::new(r[(2, 2)], r[(2, 3)], r[(3, 2)], r[(3, 3)]);
    let c12 = Matrix2::new(r[(0, 2)], r[(0, 3)], r[(1, 2)], r[(1, 3)]);
    let delta = c11.determinant() + c22.determinant() - 2.0 * c12.determinant();
    let det_r = r.determinant();
    let disc = delta * delta - 4.0 * det_r;
    if disc < -1e-12 {
        return Err(Error::InvalidState(format!(
            "covariance is unphysical: complex symplectic spectrum (disc = {disc:.3e})"
        )));
    }
    let sqrt_disc = disc.max(0.0).sqrt();
    let roots = [0.5 * (delta - sqrt_disc), 0.5 * (delta + sqrt_disc)];
    let xi2 = roots
        .iter()
        .copied()
        .filter(|x| *x >= -1e-12)
        .map(|x| x.max(0.0))
        .fold(f64::INFINITY, f64::min);
    if !xi2.is_finite() {
        return Err(Error::InvalidState(
            "covariance is unphysical: negative xi^2 for both roots".into(),
        ));
    }
    let xi = xi2.sqrt();
    let en = (-(2.0 * xi).ln()).max(0.0);
    // Positives below solver roundoff are numerically separable states.
    Ok(if en < 1e-12 { 0.0 } else { en })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::{build_system, steady_covariance};
    use crate::params::default_params;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn vacuum_quad() -> QuadratureCovariance {
        QuadratureCovariance {
            r: Matrix4::identity() * 0.5,
            pair: PairLabel::SLowerVUpper,
        }
    }

    /// Analytic two-mode squeezed covariance with squeeze parameter r.
    fn tms_quad(r: f64) -> QuadratureCovariance {
        let c = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        let mut m = Matrix4::<f64>::identity() * c;
        m[(0, 2)] = s;
        m[(2, 0)] = s;
        m[(1, 3)] = -s;
        m[(3, 1)] = -s;
        QuadratureCovariance {
            r: m,
            pair: PairLabel::SLowerVUpper,
        }
    }

    #[test]
    fn vacuum_has_zero_negativity() {
        assert_eq!(log_negativity(&vacuum_quad()).unwrap(), 0.0);
    }

    #[test]
    fn two_mode_squeezed_negativity_is_2r() {
        for r in [0.05, 0.3, 1.0, 2.0] {
            assert_relative_eq!(log_negativity(&tms_quad(r)).unwrap(), 2.0 * r, max_relative = 1e-10);
        }
    }

    #[test]
    fn thermal_product_is_separable() {
        for (n1, n2) in [(0.0, 0.7), (2.0, 0.1), (5.0, 5.0)] {
            let mut m = Matrix4::<f64>::zeros();
            m[(0, 0)] = n1 + 0.5;
            m[(1, 1)] = n1 + 0.5;
            m[(2, 2)] = n2 + 0.5;
            m[(3, 3)] = n2 + 0.5;
            let q = QuadratureCovariance {
                r: m,
                pair: PairLabel::SLowerVLower,
            };
            assert_eq!(log_negativity(&q).unwrap(), 0.0);
        }
    }

    #[test]
    fn vacuum_covariance_reduces_to_half_identity() {
        let p = default_params();
        let sys = build_system(1.0, 0.4, 0.0, &p).unwrap();
        let mut cov = steady_covariance(&sys).unwrap();
        // Overwrite with an exact vacuum <a a^T>: only <a a^dag> = 1.
        let mut c = DMatrix::<C64>::zeros(6, 6);
        for m in 0..3 {
            c[(2 * m, 2 * m + 1)] = C64::new(1.0, 0.0);
        }
        cov.second_moments = c;
        for pair in [PolaritonPair::SLowerVUpper, PolaritonPair::SLowerVLower] {
            let q = quadrature_reduce(&cov, pair);
            assert!((q.r - Matrix4::<f64>::identity() * 0.5).norm() < 1e-14);
        }
    }

    #[test]
    fn thermal_covariance_reduces_to_thermal_quadratures() {
        let p = default_params();
        let sys = build_system(1.0, 0.4, 0.0, &p).unwrap();
        let cov = steady_covariance(&sys).unwrap();
        let q = quadrature_reduce(&cov, PolaritonPair::SLowerVUpper);
        let n = sys.modes.nth_v_u;
        assert_abs_diff_eq!(q.r[(2, 2)], n + 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(q.r[(3, 3)], n + 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(q.r[(0, 0)], 0.5, epsilon = 1e-9);
        assert_eq!(log_negativity(&q).unwrap(), 0.0);
    }

    #[test]
    fn vis_ir_limits_match_pair_reductions() {
        let p = default_params();
        let sys = build_system(1.0, 0.4, 1630.0, &p).unwrap();
        let cov = steady_covariance(&sys).unwrap();
        // phi = 0 selects v_L; phi = pi/2 selects v_U.
        let q0 = vis_ir_reduce(&cov, 0.0, 0.0, 0.0).unwrap();
        let ql = quadrature_reduce(&cov, PolaritonPair::SLowerVLower);
        assert!((q0.r - ql.r).norm() < 1e-13);
        let q1 = vis_ir_reduce(&cov, std::f64::consts::FRAC_PI_2, 0.0, 0.0).unwrap();
        let qu = quadrature_reduce(&cov, PolaritonPair::SLowerVUpper);
        assert!((q1.r - qu.r).norm() < 1e-13);
        assert!(vis_ir_reduce(&cov, 0.3, -1e-9, 0.0).is_err());
    }

    #[test]
    fn reference_negativities() {
        // Frozen pipeline values at (1, 0.4), n_pump = 1630, cross-checked
        // against an independent implementation.
        let p = default_params();
        let sys = build_system(1.0, 0.4, 1630.0, &p).unwrap();
        let cov = steady_covariance(&sys).unwrap();
        let phi = sys.modes.phi;
        let en = log_negativity(&vis_ir_reduce(&cov, phi, 0.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(en, 1.018642722e-3, max_relative = 1e-6);
        let en_bg =
            log_negativity(&vis_ir_reduce(&cov, phi, p.n_bg_vis, p.n_bg_ir).unwrap()).unwrap();
        assert_relative_eq!(en_bg, 7.729781746e-4, max_relative = 1e-6);
        let en_u = log_negativity(&quadrature_reduce(&cov, PolaritonPair::SLowerVUpper)).unwrap();
        assert_relative_eq!(en_u, 4.0098289237e-3, max_relative = 1e-6);
        let en_l = log_negativity(&quadrature_reduce(&cov, PolaritonPair::SLowerVLower)).unwrap();
        assert_relative_eq!(en_l, 2.5605666744e-4, max_relative = 1e-6);
    }

    #[test]
    fn background_noise_degrades_negativity() {
        let p = default_params();
        let sys = build_system(1.0, 0.4, 1630.0, &p).unwrap();
        let cov = steady_covariance(&sys).unwrap();
        let phi = sys.modes.phi;
        let mut last = f64::INFINITY;
        for scale in [0.0, 1.0, 10.0, 100.0] {
            let q = vis_ir_reduce(&cov, phi, scale * p.n_bg_vis, scale * p.n_bg_ir).unwrap();
            let en = log_negativity(&q).unwrap();
            assert!(en <= last + 1e-12);
            last = en;
        }
    }
}
