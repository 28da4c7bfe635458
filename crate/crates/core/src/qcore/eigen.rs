use super::matrix::ComplexMatrix;
use crate::{Error, Result};

pub const MAX_EIGEN_DIM: usize = 256;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// `H = A + iB` is embedded as the real symmetric matrix `[[A, -B], [B, A]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled. Cyclic Jacobi
/// sweeps run until the off-diagonal Frobenius norm drops below `1e-12`
/// (scaled by the matrix norm when it exceeds one).
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            actual: h.cols(),
        });
    }
    let n = h.rows();
    if n > MAX_EIGEN_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: MAX_EIGEN_DIM,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = h.frobenius_norm().max(1.0);
    let deviation = h.hermitian_deviation();
    if deviation > 1e-12 * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for r in 0..n {
        for c in 0..n {
            // Symmetrize away rounding noise before embedding.
            let z = (h.get(r, c) + h.get(c, r).conj()) * 0.5;
            s[r * m + c] = z.re;
            s[(r + n) * m + c + n] = z.re;
            s[r * m + c + n] = -z.im;
            s[(r + n) * m + c] = z.im;
        }
    }

    jacobi_symmetric(&mut s, m, OFF_DIAGONAL_TOL * scale);

    let mut eig: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

fn off_diagonal_norm(s: &[f64], m: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..m {
        for c in 0..m {
            if r != c {
                acc += s[r * m + c] * s[r * m + c];
            }
        }
    }
    acc.sqrt()
}

/// In-place cyclic Jacobi diagonalization of a dense symmetric matrix.
fn jacobi_symmetric(s: &mut [f64], m: usize, tol: f64) {
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(s, m) < tol {
            return;
        }
        for p in 0..m - 1 {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                // S <- Jᵀ S J with J the (p, q) plane rotation.
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
                s[p * m + q] = 0.0;
                s[q * m + p] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::C64;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn pauli_z() {
        let z = ComplexMatrix::diag(&[1.0, -1.0]);
        assert_close(&hermitian_eigenvalues(&z).unwrap(), &[1.0, -1.0], 1e-12);
    }

    #[test]
    fn identity_four() {
        let eig = hermitian_eigenvalues(&ComplexMatrix::identity(4)).unwrap();
        assert_close(&eig, &[1.0; 4], 1e-12);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_close(&hermitian_eigenvalues(&x).unwrap(), &[1.0, -1.0], 1e-12);
    }

    #[test]
    fn pauli_y_complex_entries() {
        let i = C64::new(0.0, 1.0);
        let zero = C64::new(0.0, 0.0);
        let y = ComplexMatrix::from_vec(2, 2, vec![zero, -i, i, zero]).unwrap();
        assert_close(&hermitian_eigenvalues(&y).unwrap(), &[1.0, -1.0], 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_oversized() {
        let m = ComplexMatrix::identity(MAX_EIGEN_DIM + 1);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
