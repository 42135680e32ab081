//! Cyclic complex Jacobi eigensolver for Hermitian matrices.
//!
//! Jacobi is slower than tridiagonal QR but delivers small eigenvalues of
//! positive definite matrices to high relative accuracy, which matters for
//! fractional and negative powers of ill-conditioned operators.

use num_complex::Complex64;

use super::CMatrix;

const MAX_SWEEPS: usize = 100;

/// Returns `(eigenvalues, eigenvectors)` unsorted. `a` must be exactly Hermitian.
pub(crate) fn jacobi_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = CMatrix::identity(n, n);
    if n == 1 {
        return (vec![a[(0, 0)].re], v);
    }
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let floor = frob * f64::MIN_POSITIVE.sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                let r = z.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if r <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() || r <= floor {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;

                let zeta = (aqq - app) / (2.0 * r);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let phase = z / r;
                let phase_conj = phase.conj();

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * phase_conj * s;
                    a[(k, q)] = akp * s + akq * phase_conj * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * phase_conj * s;
                    v[(k, q)] = vkp * s + vkq * phase_conj * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let eigenvalues = (0..n).map(|i| a[(i, i)].re).collect();
    (eigenvalues, v)
}
