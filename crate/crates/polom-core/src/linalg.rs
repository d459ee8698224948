//! Dense complex linear algebra support: matrix exponential by scaling and
//! squaring with Padé approximants, a direct Lyapunov solver, and eigenvalues
//! of small non-normal complex matrices.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;

/// Padé coefficient sets from Higham's 2005 scaling-and-squaring analysis,
/// with the matching 1-norm thresholds.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

fn one_norm(a: &DMatrix<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

fn pade_uv(a: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let c = |x: f64| C64::new(x, 0.0);
    let a2 = a * a;
    match b.len() {
        4 => {
            let u = a * (&a2 * c(b[3]) + &id * c(b[1]));
            let v = &a2 * c(b[2]) + &id * c(b[0]);
            (u, v)
        }
        6 => {
            let a4 = &a2 * &a2;
            let u = a * (&a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]));
            let v = &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
            (u, v)
        }
        8 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let u = a * (&a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]));
            let v = &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
            (u, v)
        }
        10 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let a8 = &a6 * &a2;
            let u = a
                * (&a8 * c(b[9]) + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]));
            let v =
                &a8 * c(b[8]) + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
            (u, v)
        }
        14 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let w1 = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
            let w2 = &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]);
            let u = a * (&a6 * &w1 + w2);
            let z1 = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
            let z2 = &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
            let v = &a6 * &z1 + z2;
            (u, v)
        }
        _ => unreachable!("unsupported Padé order"),
    }
}

/// exp(A) for a square complex matrix. Relative accuracy ~1e-13 for
/// well-scaled inputs; intended for small dense systems.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
    const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
    const B7: [f64; 8] = [
        17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
    ];
    const B9: [f64; 10] = [
        17643225600.0,
        8821612800.0,
        2075673600.0,
        302702400.0,
        30270240.0,
        2162160.0,
        110880.0,
        3960.0,
        90.0,
        1.0,
    ];
    const B13: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let norm = one_norm(a);
    let (work, squarings): (DMatrix<C64>, u32) = if norm <= THETA_13 {
        (a.clone(), 0)
    } else {
        let s = ((norm / THETA_13).log2().ceil() as u32).max(1);
        (a * C64::new(1.0 / (2f64.powi(s as i32)), 0.0), s)
    };

    let norm_w = one_norm(&work);
    let (u, v) = if norm_w <= THETA_3 {
        pade_uv(&work, &B3)
    } else if norm_w <= THETA_5 {
        pade_uv(&work, &B5)
    } else if norm_w <= THETA_7 {
        pade_uv(&work, &B7)
    } else if norm_w <= THETA_9 {
        pade_uv(&work, &B9)
    } else {
        pade_uv(&work, &B13)
    };

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is singular; input matrix is not finite");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Solves the continuous Lyapunov equation M C + C M^T + D = 0 for C by
/// direct vectorization: (I (x) M + M (x) I) vec(C) = -vec(D) in
/// column-major layout. Note the plain (not conjugate) transpose.
pub fn lyapunov_solve(m: &DMatrix<C64>, d: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    assert_eq!(m.ncols(), n);
    assert_eq!(d.nrows(), n);
    assert_eq!(d.ncols(), n);
    let nn = n * n;
    let mut big = DMatrix::<C64>::zeros(nn, nn);
    // I (x) M: block-diagonal copies of M. M (x) I: scalar m[b,a] on the
    // diagonal of block (b, a).
    for a in 0..n {
        for b in 0..n {
            let mba = m[(b, a)];
            for r in 0..n {
                big[(a * n + r, a * n + b)] += m[(r, b)];
                big[(b * n + r, a * n + r)] += mba;
            }
        }
    }
    let rhs =
        DMatrix::<C64>::from_iterator(nn, 1, d.iter().map(|z| -z));
    let sol = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NonConvergence("singular Lyapunov operator".into()))?;
    Ok(DMatrix::<C64>::from_iterator(n, n, sol.iter().copied()))
}

/// Eigenvalues of a general complex matrix via complex Schur iteration.
/// Order is unspecified.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur = m
        .clone()
        .try_schur(1e-14, 200_000)
        .ok_or_else(|| Error::NonConvergence("complex Schur iteration did not converge".into()))?;
    let e = schur
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence("Schur form is not triangular".into()))?;
    Ok(e.iter().copied().collect())
}

/// Largest real part over the spectrum of `m`.
///
/// Falls back to a real 2n x 2n embedding when the complex Schur iteration
/// stalls; the embedding carries the spectrum of M together with its
/// conjugate, which shares the same spectral abscissa.
pub fn spectral_abscissa(m: &DMatrix<C64>) -> Result<f64> {
    if let Ok(e) = eigenvalues(m) {
        return Ok(e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max));
    }
    let n = m.nrows();
    let mut re = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            re[(i, j)] = m[(i, j)].re;
            re[(i, j + n)] = -m[(i, j)].im;
            re[(i + n, j)] = m[(i, j)].im;
            re[(i + n, j + n)] = m[(i, j)].re;
        }
    }
    let schur = re
        .try_schur(1e-14, 200_000)
        .ok_or_else(|| Error::NonConvergence("Schur iteration did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}
