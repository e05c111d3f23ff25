//! Dense complex and real matrix primitives.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{dim, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

/// Above this 1-norm condition number an inversion is refused.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn scaled(self, k: f64) -> Self {
        Tolerance { abs: self.abs * k, rel: self.rel * k }
    }

    /// `|a-b| <= abs + rel*max(|a|,|b|)`
    pub fn close(&self, a: C64, b: C64) -> bool {
        (a - b).norm() <= self.abs + self.rel * a.norm().max(b.norm())
    }

    pub fn close_mat(&self, a: &CMatrix, b: &CMatrix) -> bool {
        a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| self.close(*x, *y))
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

/// Scalar `z` as a 1x1 matrix.
pub fn scalar(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| c(x, 0.0))
}

pub fn re(a: &CMatrix) -> RMatrix {
    a.map(|z| z.re)
}

pub fn im(a: &CMatrix) -> RMatrix {
    a.map(|z| z.im)
}

pub fn from_re_im(x: &RMatrix, y: &RMatrix) -> CMatrix {
    x.zip_map(y, c)
}

/// `(A + A^t)/2`
pub fn sym(a: &CMatrix) -> CMatrix {
    (a + a.transpose()) * c(0.5, 0.0)
}

pub fn sym_r(a: &RMatrix) -> RMatrix {
    (a + a.transpose()) * 0.5
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_r(a: &RMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.abs()))
}

/// Infinity norm (max row sum).
pub fn norm_inf(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn norm_1(a: &CMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

fn require_square(a: &CMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(dim(format!("{what}: expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(a.nrows())
}

pub fn is_symmetric(a: &CMatrix, tol: Tolerance) -> Result<bool> {
    let n = require_square(a, "is_symmetric")?;
    for i in 0..n {
        for j in i + 1..n {
            if !tol.close(a[(i, j)], a[(j, i)]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn is_hermitian(a: &CMatrix, tol: Tolerance) -> Result<bool> {
    let n = require_square(a, "is_hermitian")?;
    for i in 0..n {
        for j in i..n {
            if !tol.close(a[(i, j)], a[(j, i)].conj()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Columns of the returned unitary are the eigenvectors.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = require_square(a, "eigh")?;
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let se = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

pub fn eigh_r(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let (v, u) = eigh(&to_complex(a))?;
    Ok((v, re(&u)))
}

pub fn is_positive_definite(s: &CMatrix, tol: Tolerance) -> Result<bool> {
    if !is_hermitian(s, tol)? {
        return Err(Error::Domain("positivity test needs a Hermitian matrix".into()));
    }
    let (vals, _) = eigh(s)?;
    Ok(vals[0] > tol.abs)
}

pub fn is_positive_definite_r(s: &RMatrix, tol: Tolerance) -> Result<bool> {
    is_positive_definite(&to_complex(s), tol)
}

/// Lower Cholesky factor `L` with `L L^H = S`.
pub fn cholesky(s: &CMatrix) -> Result<CMatrix> {
    require_square(s, "cholesky")?;
    nalgebra::Cholesky::new(s.clone()).map(|ch| ch.l()).ok_or_else(|| Error::Domain("matrix is not positive definite".into()))
}

/// `U f(D) U^H` for Hermitian `S = U D U^H`.
pub fn hermitian_fn(s: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, u) = eigh(s)?;
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x), 0.0))));
    Ok(&u * d * u.adjoint())
}

/// Square root of a real symmetric positive definite matrix.
pub fn sqrt_pd(y: &RMatrix) -> Result<RMatrix> {
    let yc = to_complex(y);
    if !is_positive_definite(&yc, Tolerance::new(0.0, 1e-10))? {
        return Err(Error::Domain("sqrt_pd: matrix not positive definite".into()));
    }
    Ok(re(&hermitian_fn(&yc, f64::sqrt)?))
}

/// For `S` Hermitian with spectrum in `[0,1)` returns `(sqrt S, L)` where
/// `L = log((1+sqrt S)(1-sqrt S)^{-1})`, both through one eigendecomposition.
/// Eigenvalues in `[-1e-12, 0)` are treated as rounding noise and clamped.
pub fn principal_sqrt_log(s: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (vals, u) = eigh(s)?;
    for &r in &vals {
        if !(-1e-12..1.0).contains(&r) {
            return Err(Error::Domain(format!("eigenvalue {r} outside [0,1)")));
        }
    }
    let diag = |f: &dyn Fn(f64) -> f64| {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&r| c(f(r.max(0.0)), 0.0))))
    };
    let sq = &u * diag(&|r: f64| r.sqrt()) * u.adjoint();
    let lg = &u * diag(&|r: f64| ((1.0 + r.sqrt()) / (1.0 - r.sqrt())).ln()) * u.adjoint();
    Ok((sq, lg))
}

/// Inverse through partial-pivot LU. Refuses near-singular input.
pub fn inv(a: &CMatrix) -> Result<CMatrix> {
    require_square(a, "inv")?;
    let lu = a.clone().lu();
    let ai = lu.try_inverse().ok_or_else(|| Error::Numeric("singular matrix".into()))?;
    let cond = norm_1(a) * norm_1(&ai);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::Numeric(format!("condition estimate {cond:.3e} exceeds {COND_LIMIT:e}")));
    }
    Ok(ai)
}

pub fn inv_r(a: &RMatrix) -> Result<RMatrix> {
    Ok(re(&inv(&to_complex(a))?))
}

/// `X` with `X A = B`, i.e. `B A^{-1}`.
pub fn right_div(b: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if b.ncols() != a.nrows() {
        return Err(dim("right_div: shape mismatch"));
    }
    Ok(b * inv(a)?)
}

pub fn det(a: &CMatrix) -> Result<C64> {
    require_square(a, "det")?;
    Ok(a.clone().lu().determinant())
}

pub fn det_r(a: &RMatrix) -> f64 {
    a.clone().lu().determinant()
}

pub fn same_shape(a: &CMatrix, b: &CMatrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(dim(format!("{what}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{rand_cmat, rand_real_sym, rng};

    #[test]
    fn symmetry_checks() {
        let t = Tolerance::default();
        assert!(is_symmetric(&eye(2), t).unwrap());
        let a = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]);
        assert!(!is_symmetric(&a, t).unwrap());
        let mut r = rng(3);
        let s = rand_cmat(&mut r, 3, 3, 1.0);
        assert!(is_symmetric(&(&s + s.transpose()), t).unwrap());
        assert!(is_symmetric(&zeros(2, 3), t).is_err());
    }

    #[test]
    fn positivity() {
        let t = Tolerance::default();
        assert!(is_positive_definite(&eye(2), t).unwrap());
        let d = |a: f64, b: f64| CMatrix::from_row_slice(2, 2, &[c(a, 0.), c(0., 0.), c(0., 0.), c(b, 0.)]);
        assert!(!is_positive_definite(&d(1.0, -1.0), t).unwrap());
        assert!(!is_positive_definite(&d(1.0, 1e-14), t).unwrap());
        let nh = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., 1.), c(1., 0.)]);
        assert!(matches!(is_positive_definite(&nh, t), Err(Error::Domain(_))));
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut r = rng(11);
        for _ in 0..20 {
            let a = rand_cmat(&mut r, 3, 3, 1.0);
            let s = &a * a.adjoint() + eye(3) * c(0.1, 0.0);
            let l = cholesky(&s).unwrap();
            let err = norm_inf(&(&l * l.adjoint() - &s));
            assert!(err <= 1e-12 * norm_inf(&s));
        }
    }

    #[test]
    fn sqrt_log() {
        let (s, l) = principal_sqrt_log(&zeros(2, 2)).unwrap();
        assert!(max_abs(&s) < 1e-15 && max_abs(&l) < 1e-15);
        let (s, _) = principal_sqrt_log(&scalar(c(0.25, 0.0))).unwrap();
        assert!((s[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(principal_sqrt_log(&scalar(c(1.0, 0.0))).is_err());

        let mut r = rng(5);
        let q = rand_real_sym(&mut r, 3, 1.0);
        let (_, u) = eigh_r(&q).unwrap();
        let dvals = [0.1, 0.45, 0.93];
        let d = RMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&dvals));
        let sm = to_complex(&(&u * d * u.transpose()));
        let (sq, _) = principal_sqrt_log(&sm).unwrap();
        let dsq = RMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, dvals.iter().map(|x| x.sqrt())));
        let want = to_complex(&(&u * dsq * u.transpose()));
        assert!(max_abs(&(&sq - want)) < 1e-12);
        assert!(norm_inf(&(&sq * &sq - &sm)) <= 1e-10);
    }

    #[test]
    fn eigen_ascending() {
        let mut r = rng(2);
        let a = rand_cmat(&mut r, 4, 4, 1.0);
        let h = &a + a.adjoint();
        let (v, u) = eigh(&h).unwrap();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let back = &u * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, v.iter().map(|&x| c(x, 0.)))) * u.adjoint();
        assert!(max_abs(&(back - h)) < 1e-12);
    }

    #[test]
    fn inverse_refuses_singular() {
        let s = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)]);
        assert!(matches!(inv(&s), Err(Error::Numeric(_))));
        let a = CMatrix::from_row_slice(2, 2, &[c(2., 1.), c(0., 1.), c(1., 0.), c(3., 0.)]);
        let ai = inv(&a).unwrap();
        assert!(max_abs(&(&a * ai - eye(2))) < 1e-14);
    }
}
