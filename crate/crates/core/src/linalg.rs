//! Dense decompositions on `ndarray` storage, computed with `faer`.

use faer::{Mat, MatRef, Side};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::C64;

fn to_faer(m: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn to_ndarray(m: MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Dense product `a b`.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    to_ndarray((to_faer(a) * to_faer(b)).as_ref())
}

/// `m = U diag(s) V*` with `s` descending; singular vectors as columns.
pub fn svd(m: &Array2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let d = to_faer(m).svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = d.S().column_vector().iter().map(|z| z.re).collect();
    Ok((to_ndarray(d.U()), s, to_ndarray(d.V())))
}

/// Singular values, descending.
pub fn singular_values(m: &Array2<C64>) -> Result<Vec<f64>> {
    to_faer(m).singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Eigenvalues ascending and orthonormal eigenvectors of a Hermitian
/// matrix; only the lower triangle is read.
pub fn eigh(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let d = to_faer(m).self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let w = d.S().column_vector().iter().map(|z| z.re).collect();
    Ok((w, to_ndarray(d.U())))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Result<Vec<f64>> {
    to_faer(m).self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Eigenvalues of a general square matrix, unordered.
pub fn eigvals(m: &Array2<C64>) -> Result<Vec<C64>> {
    to_faer(m).eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Array2<C64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            let t = (i * 7 + j * 13) as f64;
            C64::new(t.sin(), (0.3 * t).cos() - 0.2)
        })
    }

    fn max_abs(m: &Array2<C64>) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn svd_reconstructs_at_scale() {
        let m = sample(420);
        let (u, s, v) = svd(&m).unwrap();
        assert!(s.windows(2).into_iter().all(|w| w[0] >= w[1]));
        let sd = Array2::from_diag(&s.mapv(|x| C64::new(x, 0.0)));
        let back = u.dot(&sd).dot(&v.t().mapv(|z| z.conj()));
        assert!(max_abs(&(back - &m)) < 1e-11);
        let id = Array2::<C64>::eye(420);
        assert!(max_abs(&(u.t().mapv(|z| z.conj()).dot(&u) - &id)) < 1e-12);
        assert!(max_abs(&(v.t().mapv(|z| z.conj()).dot(&v) - &id)) < 1e-12);
        let sv = singular_values(&m).unwrap();
        assert!(sv.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn hermitian_eigen() {
        let a = sample(60);
        let h = &a + &a.t().mapv(|z| z.conj());
        let (w, q) = eigh(&h).unwrap();
        assert!(w.windows(2).into_iter().all(|p| p[0] <= p[1]));
        let wd = Array2::from_diag(&w.mapv(|x| C64::new(x, 0.0)));
        assert!(max_abs(&(q.dot(&wd).dot(&q.t().mapv(|z| z.conj())) - &h)) < 1e-11);
        let only = eigvalsh(&h).unwrap();
        assert!(only.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-11));
    }

    #[test]
    fn product_matches_ndarray() {
        let (a, b) = (sample(37), sample(37).t().to_owned());
        assert!(max_abs(&(matmul(&a, &b) - a.dot(&b))) < 1e-12);
    }

    #[test]
    fn general_eigenvalues() {
        let m = ndarray::array![[C64::new(2.0, 0.0), C64::new(1.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 3.0)]];
        let mut e = eigvals(&m).unwrap();
        e.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((e[0] - C64::new(0.0, 3.0)).norm() < 1e-14);
        assert!((e[1] - C64::new(2.0, 0.0)).norm() < 1e-14);
    }
}
