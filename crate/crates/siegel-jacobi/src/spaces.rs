//! Validated points of `H_n`, `H_{n,m}`, `D_n`, `D_{n,m}` and tangent vectors.

use crate::error::{dim, Error, Result};
use crate::linalg::{
    c, from_re_im, im, is_positive_definite, is_symmetric, max_abs, re, sym, to_complex, zeros, CMatrix, RMatrix, Tolerance, C64,
};

fn symmetrized(a: CMatrix, tol: Tolerance, what: &str) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(dim(format!("{what}: expected square, got {}x{}", a.nrows(), a.ncols())));
    }
    if !is_symmetric(&a, tol)? {
        return Err(Error::Domain(format!("{what} is not symmetric")));
    }
    Ok(sym(&a))
}

fn im_pd(omega: &CMatrix, tol: Tolerance) -> Result<bool> {
    is_positive_definite(&to_complex(&im(omega)), tol)
}

fn disk_pd(w: &CMatrix, tol: Tolerance) -> Result<bool> {
    let n = w.nrows();
    let q = CMatrix::identity(n, n) - w.conjugate() * w;
    let q = (&q + q.adjoint()) * c(0.5, 0.0);
    is_positive_definite(&q, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    omega: CMatrix,
}

impl SiegelPoint {
    pub fn new(omega: CMatrix) -> Result<Self> {
        Self::with_tol(omega, Tolerance::default())
    }

    pub fn with_tol(omega: CMatrix, tol: Tolerance) -> Result<Self> {
        let omega = symmetrized(omega, tol, "omega")?;
        if !im_pd(&omega, tol)? {
            return Err(Error::Domain("Im(omega) is not positive definite".into()));
        }
        Ok(SiegelPoint { omega })
    }

    pub fn from_xy(x: &RMatrix, y: &RMatrix) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(dim("from_xy: X and Y differ in shape"));
        }
        Self::new(from_re_im(x, y))
    }

    /// `i I_n`
    pub fn base(n: usize) -> Self {
        SiegelPoint { omega: CMatrix::identity(n, n) * c(0.0, 1.0) }
    }

    pub(crate) fn raw(omega: CMatrix) -> Self {
        SiegelPoint { omega }
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }
    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }
    pub fn x(&self) -> RMatrix {
        re(&self.omega)
    }
    pub fn y(&self) -> RMatrix {
        im(&self.omega)
    }

    pub fn validate(&self, tol: Tolerance) -> Result<bool> {
        if self.omega.nrows() != self.omega.ncols() {
            return Err(dim("omega not square"));
        }
        Ok(is_symmetric(&self.omega, tol)? && im_pd(&self.omega, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPoint {
    omega: CMatrix,
    z: CMatrix,
}

impl JacobiPoint {
    pub fn new(omega: CMatrix, z: CMatrix) -> Result<Self> {
        Self::with_tol(omega, z, Tolerance::default())
    }

    pub fn with_tol(omega: CMatrix, z: CMatrix, tol: Tolerance) -> Result<Self> {
        let s = SiegelPoint::with_tol(omega, tol)?;
        if z.ncols() != s.n() {
            return Err(dim(format!("z must have {} columns, has {}", s.n(), z.ncols())));
        }
        Ok(JacobiPoint { omega: s.omega, z })
    }

    pub fn base(n: usize, m: usize) -> Self {
        JacobiPoint { omega: SiegelPoint::base(n).omega, z: zeros(m, n) }
    }

    pub(crate) fn raw(omega: CMatrix, z: CMatrix) -> Self {
        JacobiPoint { omega, z }
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }
    pub fn m(&self) -> usize {
        self.z.nrows()
    }
    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }
    pub fn z(&self) -> &CMatrix {
        &self.z
    }
    pub fn siegel(&self) -> SiegelPoint {
        SiegelPoint { omega: self.omega.clone() }
    }
    pub fn y(&self) -> RMatrix {
        im(&self.omega)
    }
    /// `V = Im Z`
    pub fn v(&self) -> RMatrix {
        im(&self.z)
    }

    pub fn validate(&self, tol: Tolerance) -> Result<bool> {
        if self.z.ncols() != self.omega.nrows() {
            return Err(dim("z/omega degree mismatch"));
        }
        self.siegel().validate(tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskPoint {
    w: CMatrix,
}

impl DiskPoint {
    pub fn new(w: CMatrix) -> Result<Self> {
        Self::with_tol(w, Tolerance::default())
    }

    pub fn with_tol(w: CMatrix, tol: Tolerance) -> Result<Self> {
        let w = symmetrized(w, tol, "w")?;
        if !disk_pd(&w, tol)? {
            return Err(Error::Domain("I - conj(W) W is not positive definite".into()));
        }
        Ok(DiskPoint { w })
    }

    pub fn origin(n: usize) -> Self {
        DiskPoint { w: zeros(n, n) }
    }

    pub(crate) fn raw(w: CMatrix) -> Self {
        DiskPoint { w }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }
    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn validate(&self, tol: Tolerance) -> Result<bool> {
        if self.w.nrows() != self.w.ncols() {
            return Err(dim("w not square"));
        }
        Ok(is_symmetric(&self.w, tol)? && disk_pd(&self.w, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiDiskPoint {
    w: CMatrix,
    eta: CMatrix,
}

impl JacobiDiskPoint {
    pub fn new(w: CMatrix, eta: CMatrix) -> Result<Self> {
        Self::with_tol(w, eta, Tolerance::default())
    }

    pub fn with_tol(w: CMatrix, eta: CMatrix, tol: Tolerance) -> Result<Self> {
        let d = DiskPoint::with_tol(w, tol)?;
        if eta.ncols() != d.n() {
            return Err(dim(format!("eta must have {} columns, has {}", d.n(), eta.ncols())));
        }
        Ok(JacobiDiskPoint { w: d.w, eta })
    }

    pub fn origin(n: usize, m: usize) -> Self {
        JacobiDiskPoint { w: zeros(n, n), eta: zeros(m, n) }
    }

    pub(crate) fn raw(w: CMatrix, eta: CMatrix) -> Self {
        JacobiDiskPoint { w, eta }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }
    pub fn m(&self) -> usize {
        self.eta.nrows()
    }
    pub fn w(&self) -> &CMatrix {
        &self.w
    }
    pub fn eta(&self) -> &CMatrix {
        &self.eta
    }
    pub fn disk(&self) -> DiskPoint {
        DiskPoint { w: self.w.clone() }
    }

    pub fn validate(&self, tol: Tolerance) -> Result<bool> {
        if self.eta.ncols() != self.w.nrows() {
            return Err(dim("eta/w degree mismatch"));
        }
        self.disk().validate(tol)
    }
}

/// Tangent vector `(dOmega, dZ)`. On `H_n` and `D_n` the `dZ` part has zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub d_omega: CMatrix,
    pub d_z: CMatrix,
}

impl TangentVector {
    pub fn new(d_omega: CMatrix, d_z: CMatrix) -> Result<Self> {
        if d_omega.nrows() != d_omega.ncols() {
            return Err(dim("dOmega must be square"));
        }
        if d_z.ncols() != d_omega.nrows() {
            return Err(dim("dZ column count must equal the degree n"));
        }
        Ok(TangentVector { d_omega: sym(&d_omega), d_z })
    }

    pub fn siegel(d_omega: CMatrix) -> Result<Self> {
        let n = d_omega.ncols();
        Self::new(d_omega, zeros(0, n))
    }

    pub fn n(&self) -> usize {
        self.d_omega.nrows()
    }
    pub fn m(&self) -> usize {
        self.d_z.nrows()
    }

    pub fn scale(&self, s: C64) -> Self {
        TangentVector { d_omega: &self.d_omega * s, d_z: &self.d_z * s }
    }

    pub fn add(&self, o: &TangentVector) -> Self {
        TangentVector { d_omega: &self.d_omega + &o.d_omega, d_z: &self.d_z + &o.d_z }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.d_omega).max(max_abs(&self.d_z))
    }

    /// Coordinate vector: upper triangle of `dOmega` then `dZ` row-major.
    pub fn to_coords(&self) -> Vec<C64> {
        let mut v = sym_coords(&self.d_omega);
        v.extend(rect_coords(&self.d_z));
        v
    }

    pub fn from_coords(n: usize, m: usize, v: &[C64]) -> Self {
        let k = n * (n + 1) / 2;
        TangentVector { d_omega: sym_from_coords(n, &v[..k]), d_z: rect_from_coords(m, n, &v[k..]) }
    }
}

pub(crate) fn sym_coords(a: &CMatrix) -> Vec<C64> {
    let n = a.nrows();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            v.push(a[(i, j)]);
        }
    }
    v
}

pub(crate) fn sym_from_coords(n: usize, v: &[C64]) -> CMatrix {
    let mut a = zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            a[(i, j)] = v[k];
            a[(j, i)] = v[k];
            k += 1;
        }
    }
    a
}

pub(crate) fn rect_coords(a: &CMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            v.push(a[(i, j)]);
        }
    }
    v
}

pub(crate) fn rect_from_coords(r: usize, cc: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(r, cc, &v[..r * cc])
}

/// Index of the complex coordinate of symmetric entry `(i,j)` in `sym_coords` order.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Complex coordinate chart used by the finite-difference engine.
/// `with_coords` does not validate; perturbations are assumed small.
pub trait Coordinates: Clone + Send + Sync {
    fn coords(&self) -> Vec<C64>;
    fn with_coords(&self, v: &[C64]) -> Self;
    /// Degree pair `(n, m)`; `m = 0` on `H_n` and `D_n`.
    fn degrees(&self) -> (usize, usize);
}

impl Coordinates for SiegelPoint {
    fn coords(&self) -> Vec<C64> {
        sym_coords(&self.omega)
    }
    fn with_coords(&self, v: &[C64]) -> Self {
        SiegelPoint::raw(sym_from_coords(self.n(), v))
    }
    fn degrees(&self) -> (usize, usize) {
        (self.n(), 0)
    }
}

impl Coordinates for JacobiPoint {
    fn coords(&self) -> Vec<C64> {
        let mut v = sym_coords(&self.omega);
        v.extend(rect_coords(&self.z));
        v
    }
    fn with_coords(&self, v: &[C64]) -> Self {
        let (n, m) = (self.n(), self.m());
        let k = n * (n + 1) / 2;
        JacobiPoint::raw(sym_from_coords(n, &v[..k]), rect_from_coords(m, n, &v[k..]))
    }
    fn degrees(&self) -> (usize, usize) {
        (self.n(), self.m())
    }
}

impl Coordinates for DiskPoint {
    fn coords(&self) -> Vec<C64> {
        sym_coords(&self.w)
    }
    fn with_coords(&self, v: &[C64]) -> Self {
        DiskPoint::raw(sym_from_coords(self.n(), v))
    }
    fn degrees(&self) -> (usize, usize) {
        (self.n(), 0)
    }
}

impl Coordinates for JacobiDiskPoint {
    fn coords(&self) -> Vec<C64> {
        let mut v = sym_coords(&self.w);
        v.extend(rect_coords(&self.eta));
        v
    }
    fn with_coords(&self, v: &[C64]) -> Self {
        let (n, m) = (self.n(), self.m());
        let k = n * (n + 1) / 2;
        JacobiDiskPoint::raw(sym_from_coords(n, &v[..k]), rect_from_coords(m, n, &v[k..]))
    }
    fn degrees(&self) -> (usize, usize) {
        (self.n(), self.m())
    }
}
