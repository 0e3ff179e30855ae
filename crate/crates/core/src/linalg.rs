//! Small dense helpers: symmetric eigenvalues of tiny blocks and Cholesky.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest eigenvalue of a small symmetric matrix by cyclic Jacobi rotations.
pub fn sym_max_eigenvalue<F: Scalar>(a: &Array2<F>) -> F {
    let k = a.nrows();
    debug_assert_eq!(k, a.ncols());
    match k {
        0 => F::zero(),
        1 => a[[0, 0]],
        _ => {
            let mut a = a.clone();
            for _ in 0..64 {
                let mut off = F::zero();
                for p in 0..k {
                    for q in p + 1..k {
                        off = off + a[[p, q]] * a[[p, q]];
                    }
                }
                if off <= F::epsilon() * F::epsilon() * frob_sq(&a) {
                    break;
                }
                for p in 0..k {
                    for q in p + 1..k {
                        rotate(&mut a, p, q);
                    }
                }
            }
            (0..k).map(|i| a[[i, i]]).fold(F::neg_infinity(), F::max)
        }
    }
}

fn frob_sq<F: Scalar>(a: &Array2<F>) -> F {
    a.iter().map(|&v| v * v).sum()
}

fn rotate<F: Scalar>(a: &mut Array2<F>, p: usize, q: usize) {
    let apq = a[[p, q]];
    if apq == F::zero() {
        return;
    }
    let two = F::lit(2.0);
    let theta = (a[[q, q]] - a[[p, p]]) / (two * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
    let c = F::one() / (t * t + F::one()).sqrt();
    let s = t * c;
    let k = a.nrows();
    for r in 0..k {
        let arp = a[[r, p]];
        let arq = a[[r, q]];
        a[[r, p]] = c * arp - s * arq;
        a[[r, q]] = s * arp + c * arq;
    }
    for r in 0..k {
        let apr = a[[p, r]];
        let aqr = a[[q, r]];
        a[[p, r]] = c * apr - s * aqr;
        a[[q, r]] = s * apr + c * aqr;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<F: Scalar>(a: &Array2<F>) -> Result<Array2<F>> {
    let k = a.nrows();
    if a.ncols() != k {
        return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
    }
    let mut l = Array2::<F>::zeros((k, k));
    for j in 0..k {
        let mut diag = a[[j, j]];
        for p in 0..j {
            diag = diag - l[[j, p]] * l[[j, p]];
        }
        if !(diag > F::zero()) {
            return Err(Error::DegenerateData(format!(
                "matrix not positive definite at pivot {j}"
            )));
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..k {
            let mut v = a[[i, j]];
            for p in 0..j {
                v = v - l[[i, p]] * l[[j, p]];
            }
            l[[i, j]] = v / ljj;
        }
    }
    Ok(l)
}
