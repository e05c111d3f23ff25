//! Scalar-weight Jacobi forms: the canonical automorphic factor `J_{k,M}`,
//! the slash action, finite Fourier series, the singularity gate, the
//! operator `M_{n,m,M}`, the Siegel-Jacobi operator and pluriharmonic
//! polynomials.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::diffops::{real_partial, FDConfig, ScalarField};
use crate::error::{Error, Result};
use crate::groups::{act_jacobi, JacobiGroupElement};
use crate::linalg::{c, det, det_r, eigh_r, inv, inv_r, to_complex, CMatrix, RMatrix, C64};
use crate::spaces::{sym_index, JacobiPoint};

const GATE_TOL: f64 = 1e-9;
const INT_TOL: f64 = 1e-12;

fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() <= INT_TOL
}

/// `2A` integral with even diagonal.
pub fn is_half_integral(a: &RMatrix) -> bool {
    let n = a.nrows();
    a.ncols() == n
        && (0..n).all(|i| (0..n).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= INT_TOL && is_integral(2.0 * a[(i, j)])))
        && (0..n).all(|i| is_integral(a[(i, i)]))
}

fn is_psd(a: &RMatrix) -> Result<bool> {
    if a.nrows() == 0 {
        return Ok(true);
    }
    Ok(eigh_r(a)?.0.first().is_none_or(|&l| l >= -GATE_TOL))
}

/// Index `M` (half-integral, positive semidefinite) and integer weight `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiFormIndex {
    mat: RMatrix,
    pub k: i32,
}

impl JacobiFormIndex {
    pub fn new(mat: RMatrix, k: i32) -> Result<Self> {
        if !is_half_integral(&mat) {
            return Err(Error::Domain("index must be symmetric half-integral".into()));
        }
        if !is_psd(&mat)? {
            return Err(Error::Domain("index must be positive semidefinite".into()));
        }
        Ok(JacobiFormIndex { mat, k })
    }

    pub fn mat(&self) -> &RMatrix {
        &self.mat
    }

    pub fn m(&self) -> usize {
        self.mat.nrows()
    }
}

/// `J_{k,M}((g,(lambda,mu;kappa)),(Omega,Z))`
pub fn automorphic_factor(idx: &JacobiFormIndex, g: &JacobiGroupElement, p: &JacobiPoint) -> Result<C64> {
    if g.n() != p.n() || g.m() != p.m() || idx.m() != p.m() {
        return Err(crate::error::dim("automorphic_factor: degree mismatch"));
    }
    let o = p.omega();
    let z = p.z();
    let mm = to_complex(idx.mat());
    let (lam, mu, kap) = (to_complex(&g.h.lambda), to_complex(&g.h.mu), to_complex(&g.h.kappa));
    let cc = to_complex(&g.sp.c());
    let k = g.sp.denominator(o);
    let ki = inv(&k)?;
    let w = z + &lam * o + &mu;
    let two_pi_i = c(0.0, 2.0 * PI);
    let e1 = (&mm * &w * &ki * &cc * w.transpose()).trace() * two_pi_i;
    let e2 = -(&mm * (&lam * o * lam.transpose() + &lam * z.transpose() * c(2.0, 0.0) + &kap + &mu * lam.transpose())).trace()
        * two_pi_i;
    Ok((e1 + e2).exp() * det(&k)?.powi(idx.k))
}

/// `(f|_{k,M}[g])(p) = J(g,p)^{-1} f(g . p)`
pub fn slash(f: &ScalarField<JacobiPoint>, idx: &JacobiFormIndex, g: &JacobiGroupElement) -> ScalarField<JacobiPoint> {
    let (f, idx, g) = (f.clone(), idx.clone(), g.clone());
    ScalarField::new(move |p: &JacobiPoint| {
        let run = || -> Result<C64> { Ok(f.eval(&act_jacobi(&g, p)?)? / automorphic_factor(&idx, &g, p)?) };
        run().unwrap_or(C64::new(f64::NAN, f64::NAN))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierTerm {
    /// `n x n` symmetric half-integral, positive semidefinite.
    pub t: RMatrix,
    /// `n x m` integral.
    pub r: RMatrix,
    pub c: C64,
}

/// `sum c(T,R) e^{(2 pi i / lambda) sigma(T Omega)} e^{2 pi i sigma(R Z)}`
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    lambda: i64,
    index: JacobiFormIndex,
    n: usize,
    terms: Vec<FourierTerm>,
}

fn term_key(t: &FourierTerm) -> Vec<i64> {
    t.t.iter().map(|x| (2.0 * x).round() as i64).chain(t.r.iter().map(|x| x.round() as i64)).collect()
}

/// `[[T/lambda, R/2], [^tR/2, M]]`
fn gate_block(t: &RMatrix, r: &RMatrix, mm: &RMatrix, lambda: i64) -> RMatrix {
    let (n, m) = (t.nrows(), mm.nrows());
    let mut b = RMatrix::zeros(n + m, n + m);
    b.view_mut((0, 0), (n, n)).copy_from(&(t / lambda as f64));
    b.view_mut((0, n), (n, m)).copy_from(&(r * 0.5));
    b.view_mut((n, 0), (m, n)).copy_from(&(r.transpose() * 0.5));
    b.view_mut((n, n), (m, m)).copy_from(mm);
    b
}

impl FourierSeries {
    /// Validates every term and merges repeated `(T, R)` keys.
    pub fn new(lambda: i64, index: JacobiFormIndex, n: usize, terms: Vec<FourierTerm>) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::Parameter("lambda_Gamma must be a nonzero integer".into()));
        }
        let m = index.m();
        let mut merged: BTreeMap<Vec<i64>, FourierTerm> = BTreeMap::new();
        for t in terms {
            if t.t.shape() != (n, n) || t.r.shape() != (n, m) {
                return Err(crate::error::dim(format!("term shapes must be T: {n}x{n}, R: {n}x{m}")));
            }
            if !is_half_integral(&t.t) || !is_psd(&t.t)? {
                return Err(Error::Domain("T must be symmetric half-integral and positive semidefinite".into()));
            }
            if !t.r.iter().all(|&x| is_integral(x)) {
                return Err(Error::Domain("R must be integral".into()));
            }
            if t.c != c(0.0, 0.0) && !is_psd(&gate_block(&t.t, &t.r, index.mat(), lambda))? {
                return Err(Error::Domain("coefficient outside the semidefinite gate".into()));
            }
            merged.entry(term_key(&t)).and_modify(|e| e.c += t.c).or_insert(t);
        }
        Ok(FourierSeries { lambda, index, n, terms: merged.into_values().collect() })
    }

    pub fn empty(lambda: i64, index: JacobiFormIndex, n: usize) -> Result<Self> {
        Self::new(lambda, index, n, vec![])
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn index(&self) -> &JacobiFormIndex {
        &self.index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn to_json(&self) -> Value {
        use crate::io::{complex_to_value, rmatrix_to_value};
        json!({
            "lambda": self.lambda,
            "M": rmatrix_to_value(self.index.mat()),
            "k": self.index.k,
            "n": self.n,
            "terms": self.terms.iter().map(|t| json!({
                "T": rmatrix_to_value(&t.t), "R": rmatrix_to_value(&t.r), "c": complex_to_value(t.c)
            })).collect::<Vec<_>>(),
        })
    }

    /// Header object `{"lambda", "M", "k"}` with a `"terms"` array, or a
    /// two-element array `[header, terms]`.
    pub fn from_json(v: &Value) -> Result<Self> {
        use crate::io::{complex_from_value, rmatrix_from_value};
        let perr = |m: &str| Error::Parse(m.into());
        let (header, terms) = match v {
            Value::Array(a) if a.len() == 2 => (&a[0], &a[1]),
            Value::Object(o) => (v, o.get("terms").ok_or_else(|| perr("series needs \"terms\""))?),
            _ => return Err(perr("series must be an object or [header, terms]")),
        };
        let lambda = header.get("lambda").and_then(Value::as_i64).ok_or_else(|| perr("series needs integer \"lambda\""))?;
        let mm = rmatrix_from_value(header.get("M").ok_or_else(|| perr("series needs \"M\""))?)?;
        let k = header.get("k").and_then(Value::as_i64).ok_or_else(|| perr("series needs integer \"k\""))? as i32;
        let terms = terms.as_array().ok_or_else(|| perr("\"terms\" must be an array"))?;
        let parsed: Vec<FourierTerm> = terms
            .iter()
            .map(|t| {
                Ok(FourierTerm {
                    t: rmatrix_from_value(t.get("T").ok_or_else(|| perr("term needs \"T\""))?)?,
                    r: rmatrix_from_value(t.get("R").ok_or_else(|| perr("term needs \"R\""))?)?,
                    c: complex_from_value(t.get("c").ok_or_else(|| perr("term needs \"c\""))?)?,
                })
            })
            .collect::<Result<_>>()?;
        let n = match header.get("n").and_then(Value::as_u64) {
            Some(n) => n as usize,
            None => parsed.first().map(|t| t.t.nrows()).ok_or_else(|| perr("empty series needs \"n\""))?,
        };
        Self::new(lambda, JacobiFormIndex::new(mm, k)?, n, parsed)
    }
}

/// One term `c e(sigma(T Omega)/lambda + sigma(R Z))` of a series at `p`.
pub fn term_value(s: &FourierSeries, t: &FourierTerm, p: &JacobiPoint) -> C64 {
    let a = (to_complex(&t.t) * p.omega()).trace() * c(0.0, 2.0 * PI / s.lambda as f64);
    let b = (to_complex(&t.r) * p.z()).trace() * c(0.0, 2.0 * PI);
    t.c * (a + b).exp()
}

pub fn fourier_eval(s: &FourierSeries, p: &JacobiPoint) -> Result<C64> {
    if p.n() != s.n || p.m() != s.index.m() {
        return Err(crate::error::dim("fourier_eval: degree mismatch"));
    }
    Ok(s.terms.iter().map(|t| term_value(s, t, p)).sum())
}

pub fn series_field(s: &FourierSeries) -> ScalarField<JacobiPoint> {
    let s = s.clone();
    ScalarField::new(move |p: &JacobiPoint| fourier_eval(&s, p).unwrap_or(C64::new(f64::NAN, f64::NAN)))
}

/// Every nonzero coefficient sits on `det [[T/lambda, R/2],[^tR/2, M]] = 0`.
pub fn is_singular(s: &FourierSeries) -> bool {
    s.terms
        .iter()
        .filter(|t| t.c != c(0.0, 0.0))
        .all(|t| det_r(&gate_block(&t.t, &t.r, s.index.mat(), s.lambda)).abs() <= GATE_TOL)
}

/// `det(T/lambda - R M^{-1} ^tR / 4)`, the symbol of `det(d/dY + (1/8pi) ^t(d/dV) M^{-1} d/dV)`
/// on one Fourier term, up to the factor `(-2pi)^n`.
pub fn m_symbol(t: &FourierTerm, mi: &RMatrix, lambda: i64) -> f64 {
    det_r(&(&t.t / lambda as f64 - &t.r * mi * t.r.transpose() * 0.25))
}

/// `M_{n,m,M} f` on a Fourier series, termwise:
/// `det(Y) (-2pi)^n det(T/lambda - R M^{-1} ^tR / 4) e(T,R)`.
pub fn apply_m_operator(s: &FourierSeries, p: &JacobiPoint) -> Result<C64> {
    if p.n() != s.n || p.m() != s.index.m() {
        return Err(crate::error::dim("apply_m_operator: degree mismatch"));
    }
    let mi = inv_r(s.index.mat()).map_err(|_| Error::Domain("M operator needs an invertible index".into()))?;
    let dy = det_r(&p.y());
    let pref = dy * (-2.0 * PI).powi(s.n as i32);
    Ok(s.terms.iter().map(|t| term_value(s, t, p) * (pref * m_symbol(t, &mi, s.lambda))).sum())
}

/// `M_{n,m,M} f` by finite differences in the real coordinates `(Y, V)`,
/// expanding the determinant of the operator matrix over permutations.
pub fn m_operator_fd(f: &ScalarField<JacobiPoint>, mm: &RMatrix, p: &JacobiPoint, cfg: FDConfig) -> Result<C64> {
    let (n, m) = (p.n(), p.m());
    if mm.shape() != (m, m) {
        return Err(crate::error::dim("m_operator_fd: index shape"));
    }
    let mi = inv_r(mm).map_err(|_| Error::Domain("M operator needs an invertible index".into()))?;
    let nsym = n * (n + 1) / 2;
    let y_axis = |i: usize, j: usize| 2 * sym_index(n, i, j) + 1;
    let v_axis = |k: usize, l: usize| 2 * (nsym + k * n + l) + 1;
    // entry (mu, nu) as a list of (coefficient, real axes)
    let entry = |mu: usize, nu: usize| -> Vec<(f64, Vec<usize>)> {
        let mut out = vec![(if mu == nu { 1.0 } else { 0.5 }, vec![y_axis(mu, nu)])];
        for k in 0..m {
            for l in 0..m {
                if mi[(k, l)] != 0.0 {
                    out.push((mi[(k, l)] / (8.0 * PI), vec![v_axis(k, mu), v_axis(l, nu)]));
                }
            }
        }
        out
    };
    let mut total = c(0.0, 0.0);
    for perm in permutations(n) {
        let sign = perm_sign(&perm);
        let mut prods: Vec<(f64, Vec<usize>)> = vec![(sign, vec![])];
        for (i, &pi) in perm.iter().enumerate() {
            let e = entry(i, pi);
            prods = prods
                .iter()
                .flat_map(|(a, ax)| {
                    e.iter().map(move |(b, bx)| {
                        let mut v = ax.clone();
                        v.extend(bx);
                        (a * b, v)
                    })
                })
                .collect();
        }
        for (coef, axes) in prods {
            total += real_partial(f, p, &axes, cfg)? * coef;
        }
    }
    Ok(total * det_r(&p.y()))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// Result of the Siegel-Jacobi operator with the terms that had to be dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelJacobiImage {
    pub series: FourierSeries,
    /// Terms with a zero lower-right block but a nonzero off-diagonal block.
    pub warnings: Vec<String>,
}

/// `(Psi_{n,r} f)(Omega, Z) = lim_{t -> inf} f(diag(Omega, i t I_{n-r}), (Z, 0))`
pub fn siegel_jacobi_operator(s: &FourierSeries, r: usize) -> Result<FourierSeries> {
    Ok(siegel_jacobi_operator_report(s, r)?.series)
}

pub fn siegel_jacobi_operator_report(s: &FourierSeries, r: usize) -> Result<SiegelJacobiImage> {
    let n = s.n;
    if r == 0 || r >= n {
        return Err(Error::Parameter(format!("target degree r must satisfy 1 <= r < n = {n}")));
    }
    let m = s.index.m();
    let mut kept = vec![];
    let mut warnings = vec![];
    for t in &s.terms {
        let low = t.t.view((r, r), (n - r, n - r));
        if low.iter().any(|&x| x != 0.0) {
            continue;
        }
        if t.t.view((0, r), (r, n - r)).iter().any(|&x| x != 0.0) {
            warnings.push(format!("dropped term with T = {:?}: zero corner but nonzero off-diagonal block", t.t.as_slice()));
            continue;
        }
        kept.push(FourierTerm { t: t.t.view((0, 0), (r, r)).into_owned(), r: t.r.view((0, 0), (r, m)).into_owned(), c: t.c });
    }
    Ok(SiegelJacobiImage { series: FourierSeries::new(s.lambda, s.index.clone(), r, kept)?, warnings })
}

/// `(diag(Omega, i t I_{n-r}), (Z, 0))`
pub fn embed_for_limit(p: &JacobiPoint, n: usize, t: f64) -> Result<JacobiPoint> {
    let (r, m) = (p.n(), p.m());
    let mut o = CMatrix::zeros(n, n);
    o.view_mut((0, 0), (r, r)).copy_from(p.omega());
    for i in r..n {
        o[(i, i)] = c(0.0, t);
    }
    let mut z = CMatrix::zeros(m, n);
    z.view_mut((0, 0), (m, r)).copy_from(p.z());
    JacobiPoint::new(o, z)
}

/// Synthetic series with `n = 1`, `m = 2`, `M = I_2`, `lambda = 1`, `k = 1`:
/// terms `R = (2a, 2b)`, `T = a^2 + b^2` (on the singular locus) or
/// `T = a^2 + b^2 + 1` (off it), with coefficients `1/(1 + |a| + |b|)`.
pub fn synthetic_series(singular: bool, count: usize) -> Result<FourierSeries> {
    let idx = JacobiFormIndex::new(RMatrix::identity(2, 2), 1)?;
    let mut terms = vec![];
    'outer: for rad in 0i64.. {
        for a in -rad..=rad {
            for b in -rad..=rad {
                if a.abs().max(b.abs()) != rad {
                    continue;
                }
                if terms.len() == count {
                    break 'outer;
                }
                let tv = (a * a + b * b) as f64 + if singular { 0.0 } else { 1.0 };
                terms.push(FourierTerm {
                    t: RMatrix::from_element(1, 1, tv),
                    r: RMatrix::from_row_slice(1, 2, &[2.0 * a as f64, 2.0 * b as f64]),
                    c: c(1.0 / (1.0 + (a.abs() + b.abs()) as f64), 0.0),
                });
            }
        }
    }
    FourierSeries::new(1, idx, 1, terms)
}

/// Polynomial in the entries `z_{pi}` of an `m x n` matrix (variable `p*n + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    m: usize,
    n: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl Polynomial {
    pub fn zero(m: usize, n: usize) -> Self {
        Polynomial { m, n, terms: BTreeMap::new() }
    }

    pub fn constant(m: usize, n: usize, a: C64) -> Self {
        let mut p = Self::zero(m, n);
        p.add_term(vec![0; m * n], a);
        p
    }

    /// The coordinate `z_{pi}` (zero-based).
    pub fn var(m: usize, n: usize, p: usize, i: usize) -> Self {
        let mut e = vec![0; m * n];
        e[p * n + i] = 1;
        let mut q = Self::zero(m, n);
        q.add_term(e, c(1.0, 0.0));
        q
    }

    pub fn from_terms(m: usize, n: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self> {
        let mut p = Self::zero(m, n);
        for (e, a) in terms {
            if e.len() != m * n {
                return Err(crate::error::dim("exponent vector length must be m*n"));
            }
            p.add_term(e, a);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, a: C64) {
        let v = self.terms.entry(e).or_insert(c(0.0, 0.0));
        *v += a;
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C64> {
        &self.terms
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let mut r = self.clone();
        for (e, a) in &o.terms {
            r.add_term(e.clone(), *a);
        }
        r
    }

    pub fn scale(&self, a: C64) -> Polynomial {
        Polynomial { m: self.m, n: self.n, terms: self.terms.iter().map(|(e, b)| (e.clone(), a * b)).collect() }
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let mut r = Self::zero(self.m, self.n);
        for (e1, a1) in &self.terms {
            for (e2, a2) in &o.terms {
                r.add_term(e1.iter().zip(e2).map(|(x, y)| x + y).collect(), a1 * a2);
            }
        }
        r
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut r = Self::zero(self.m, self.n);
        for (e, a) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                r.add_term(f, a * e[var] as f64);
            }
        }
        r
    }

    pub fn eval(&self, z: &CMatrix) -> C64 {
        self.terms
            .iter()
            .map(|(e, a)| e.iter().enumerate().fold(*a, |acc, (k, &p)| acc * z[(k / self.n, k % self.n)].powu(p)))
            .sum()
    }

    pub fn max_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |a, b| a.max(b.norm()))
    }

    /// `P(^tB Z A)`
    pub fn substitute(&self, a: &CMatrix, b: &CMatrix) -> Result<Polynomial> {
        let (m, n) = (self.m, self.n);
        if a.shape() != (n, n) || b.shape() != (m, m) {
            return Err(crate::error::dim("substitute: A must be n x n and B m x m"));
        }
        // z'_{pi} = sum_{q,j} B_{qp} z_{qj} A_{ji}
        let lin: Vec<Polynomial> = (0..m * n)
            .map(|k| {
                let (p, i) = (k / n, k % n);
                let mut s = Self::zero(m, n);
                for q in 0..m {
                    for j in 0..n {
                        s = s.add(&Self::var(m, n, q, j).scale(b[(q, p)] * a[(j, i)]));
                    }
                }
                s
            })
            .collect();
        let mut out = Self::zero(m, n);
        for (e, coef) in &self.terms {
            let mut t = Self::constant(m, n, *coef);
            for (k, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    t = t.mul(&lin[k]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }
}

/// `Delta_{ij} P = sum_{p,q} t_pq d^2 P / dz_{pi} dz_{qj}` with `T = S^{-1}`.
pub fn delta_ij(poly: &Polynomial, t: &RMatrix, i: usize, j: usize) -> Polynomial {
    let (m, n) = (poly.m, poly.n);
    let mut out = Polynomial::zero(m, n);
    for p in 0..m {
        for q in 0..m {
            if t[(p, q)] != 0.0 {
                out = out.add(&poly.derivative(q * n + j).derivative(p * n + i).scale(c(t[(p, q)], 0.0)));
            }
        }
    }
    out
}

/// All `Delta_{ij} P` vanish (coefficients below `1e-12` relative to `P`).
pub fn is_pluriharmonic(poly: &Polynomial, s: &RMatrix) -> Result<bool> {
    let m = poly.m;
    if s.shape() != (m, m) {
        return Err(crate::error::dim("S must be m x m"));
    }
    if !crate::linalg::is_positive_definite_r(s, crate::linalg::Tolerance::new(0.0, 0.0))? {
        return Err(Error::Domain("S must be positive definite".into()));
    }
    let t = inv_r(s)?;
    let tol = 1e-12 * poly.max_coef().max(1.0) * crate::linalg::max_abs_r(&t).max(1.0);
    Ok((0..poly.n).all(|i| (0..poly.n).all(|j| delta_ij(poly, &t, i, j).max_coef() <= tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{jacobi_multiply, random_jacobi, HeisenbergElement};
    use crate::linalg::scalar;
    use crate::random::{rand_cmat, rand_jacobi, rand_orthogonal, rng, uniform};

    fn idx1(k: i32) -> JacobiFormIndex {
        JacobiFormIndex::new(RMatrix::identity(1, 1), k).unwrap()
    }

    fn term(t: f64, r: f64, cc: f64) -> FourierTerm {
        FourierTerm { t: RMatrix::from_element(1, 1, t), r: RMatrix::from_element(1, 1, r), c: c(cc, 0.0) }
    }

    #[test]
    fn index_validation() {
        assert!(JacobiFormIndex::new(RMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]), 2).is_ok());
        assert!(JacobiFormIndex::new(RMatrix::from_element(1, 1, 0.5), 2).is_err());
        assert!(JacobiFormIndex::new(RMatrix::from_element(1, 1, -1.0), 2).is_err());
    }

    #[test]
    fn factor_examples() {
        let p = JacobiPoint::new(scalar(c(0.0, 1.0)), scalar(c(0.0, 0.0))).unwrap();
        let g = JacobiGroupElement::identity(1, 1);
        assert!((automorphic_factor(&idx1(3), &g, &p).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let h = HeisenbergElement::new(scalar(c(1.0, 0.0)).map(|z| z.re), RMatrix::zeros(1, 1), RMatrix::zeros(1, 1)).unwrap();
        let g = JacobiGroupElement::from_h(h);
        let v = automorphic_factor(&idx1(3), &g, &p).unwrap();
        assert!((v - c((2.0 * PI).exp(), 0.0)).norm() < 1e-12 * (2.0 * PI).exp());
    }

    #[test]
    fn cocycle_and_slash() {
        let mut r = rng(11);
        let idx = JacobiFormIndex::new(RMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]), 3).unwrap();
        let s = FourierSeries::new(
            1,
            idx.clone(),
            2,
            vec![FourierTerm {
                t: RMatrix::identity(2, 2),
                r: RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
                c: c(1.0, 0.5),
            }],
        )
        .unwrap();
        let f = series_field(&s);
        for _ in 0..10 {
            let (g1, g2) = (random_jacobi(&mut r, 2, 2), random_jacobi(&mut r, 2, 2));
            let p = rand_jacobi(&mut r, 2, 2);
            let g12 = jacobi_multiply(&g1, &g2).unwrap();
            let lhs = automorphic_factor(&idx, &g12, &p).unwrap();
            let rhs = automorphic_factor(&idx, &g1, &act_jacobi(&g2, &p).unwrap()).unwrap()
                * automorphic_factor(&idx, &g2, &p).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm());
            let a = slash(&slash(&f, &idx, &g1), &idx, &g2).eval(&p).unwrap();
            let b = slash(&f, &idx, &g12).eval(&p).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm().max(1e-300), "{a} {b}");
        }
        let p = rand_jacobi(&mut r, 2, 2);
        let id = JacobiGroupElement::identity(2, 2);
        assert_eq!(slash(&f, &idx, &id).eval(&p).unwrap(), f.eval(&p).unwrap());
    }

    #[test]
    fn translation_periodicity() {
        let s = synthetic_series(false, 12).unwrap();
        let f = series_field(&s);
        let mut r = rng(12);
        for _ in 0..5 {
            let p = rand_jacobi(&mut r, 1, 2);
            let l = RMatrix::zeros(2, 1);
            let mu = RMatrix::from_row_slice(2, 1, &[3.0, 1.0]);
            let kappa = RMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 3.0]);
            let g = JacobiGroupElement::from_h(HeisenbergElement::new(l, mu, kappa).unwrap());
            let a = slash(&f, s.index(), &g).eval(&p).unwrap();
            let b = f.eval(&p).unwrap();
            assert!((a - b).norm() <= 1e-8 * b.norm(), "{a} {b}");
        }
    }

    #[test]
    fn fourier_examples() {
        let e = FourierSeries::empty(1, idx1(2), 1).unwrap();
        let p = JacobiPoint::new(scalar(c(0.0, 1.0)), scalar(c(0.0, 0.0))).unwrap();
        assert_eq!(fourier_eval(&e, &p).unwrap(), c(0.0, 0.0));
        let s = FourierSeries::new(2, idx1(2), 1, vec![term(3.0, 1.0, 0.7)]).unwrap();
        let want = 0.7 * (-(2.0 * PI / 2.0) * 3.0).exp();
        assert!((fourier_eval(&s, &p).unwrap() - c(want, 0.0)).norm() < 1e-15);
        // gate violation: T/lambda - R^2/4 < 0
        assert!(FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 3.0, 1.0)]).is_err());
    }

    #[test]
    fn singular_gate() {
        assert!(is_singular(&FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 2.0, 1.0)]).unwrap()));
        assert!(!is_singular(&FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 0.0, 1.0)]).unwrap()));
        assert!(!is_singular(&FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 2.0, 1.0), term(1.0, 0.0, 1.0)]).unwrap()));
    }

    #[test]
    fn m_operator_closed_form_vs_fd() {
        let p = JacobiPoint::new(scalar(c(0.2, 0.9)), scalar(c(0.1, 0.3))).unwrap();
        let cfg = FDConfig::central4(1e-3);
        let sing = FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 2.0, 1.0)]).unwrap();
        let v = apply_m_operator(&sing, &p).unwrap();
        assert!(v.norm() < 1e-15);
        let fd = m_operator_fd(&series_field(&sing), sing.index().mat(), &p, cfg).unwrap();
        assert!(fd.norm() < 1e-4 * fourier_eval(&sing, &p).unwrap().norm() * 2.0 * PI);
        let reg = FourierSeries::new(1, idx1(2), 1, vec![term(1.0, 0.0, 1.0)]).unwrap();
        let v = apply_m_operator(&reg, &p).unwrap();
        let want = fourier_eval(&reg, &p).unwrap() * (0.9 * -2.0 * PI);
        assert!((v - want).norm() < 1e-12 * want.norm());
        let fd = m_operator_fd(&series_field(&reg), reg.index().mat(), &p, cfg).unwrap();
        assert!((fd - v).norm() < 1e-4 * v.norm());
        // n = 2: fourth-order operator
        let idx = JacobiFormIndex::new(RMatrix::identity(1, 1), 2).unwrap();
        let s = FourierSeries::new(
            1,
            idx,
            2,
            vec![FourierTerm {
                t: RMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
                r: RMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
                c: c(1.0, 0.0),
            }],
        )
        .unwrap();
        let p = JacobiPoint::new(
            CMatrix::from_row_slice(2, 2, &[c(0.1, 0.6), c(0.05, 0.1), c(0.05, 0.1), c(-0.2, 0.5)]),
            CMatrix::from_row_slice(1, 2, &[c(0.1, 0.1), c(0.0, -0.1)]),
        )
        .unwrap();
        let v = apply_m_operator(&s, &p).unwrap();
        let fd = m_operator_fd(&series_field(&s), s.index().mat(), &p, FDConfig::central4(2e-2)).unwrap();
        assert!((fd - v).norm() < 1e-4 * v.norm(), "{fd} {v}");
        assert_eq!(apply_m_operator(&FourierSeries::empty(1, idx1(2), 1).unwrap(), &p).err().map(|_| ()), Some(()));
    }

    #[test]
    fn equivalence_on_synthetic_series() {
        let mut r = rng(13);
        for singular in [true, false] {
            let s = synthetic_series(singular, 20).unwrap();
            assert_eq!(s.terms().len(), 20);
            assert_eq!(is_singular(&s), singular);
            let mut all_zero = true;
            for _ in 0..10 {
                let p = JacobiPoint::new(
                    scalar(c(uniform(&mut r, -0.5, 0.5), uniform(&mut r, 0.2, 0.6))),
                    CMatrix::from_row_slice(
                        2,
                        1,
                        &[
                            c(uniform(&mut r, -0.5, 0.5), uniform(&mut r, -0.2, 0.2)),
                            c(uniform(&mut r, -0.5, 0.5), uniform(&mut r, -0.2, 0.2)),
                        ],
                    ),
                )
                .unwrap();
                let v = apply_m_operator(&s, &p).unwrap();
                let scale: f64 = s.terms().iter().map(|t| term_value(&s, t, &p).norm()).sum::<f64>() * det_r(&p.y()) * 2.0 * PI;
                all_zero &= v.norm() <= 1e-8 * scale;
            }
            assert_eq!(all_zero, singular);
        }
    }

    #[test]
    fn siegel_jacobi_limit() {
        let idx = idx1(2);
        let diag = |a: f64, b: f64| RMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]);
        let s = FourierSeries::new(
            1,
            idx,
            2,
            vec![
                FourierTerm { t: diag(2.0, 0.0), r: RMatrix::from_row_slice(2, 1, &[1.0, 0.0]), c: c(1.0, 0.0) },
                FourierTerm { t: diag(1.0, 1.0), r: RMatrix::from_row_slice(2, 1, &[0.0, 1.0]), c: c(2.0, 0.0) },
            ],
        )
        .unwrap();
        let img = siegel_jacobi_operator(&s, 1).unwrap();
        assert_eq!(img.terms().len(), 1);
        assert_eq!(img.terms()[0].t[(0, 0)], 2.0);
        let mut r = rng(14);
        for _ in 0..5 {
            let p = rand_jacobi(&mut r, 1, 1);
            let lim = fourier_eval(&s, &embed_for_limit(&p, 2, 50.0).unwrap()).unwrap();
            assert!((lim - fourier_eval(&img, &p).unwrap()).norm() <= 1e-8);
        }
        let pd =
            FourierSeries::new(1, idx1(2), 2, vec![FourierTerm { t: diag(1.0, 1.0), r: RMatrix::zeros(2, 1), c: c(1.0, 0.0) }])
                .unwrap();
        assert!(siegel_jacobi_operator(&pd, 1).unwrap().terms().is_empty());
        let p = rand_jacobi(&mut r, 1, 1);
        assert!(fourier_eval(&pd, &embed_for_limit(&p, 2, 50.0).unwrap()).unwrap().norm() < 1e-10);
    }

    #[test]
    fn series_json_round_trip() {
        let s = synthetic_series(true, 5).unwrap();
        let back = FourierSeries::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let v = crate::io::parse_json(r#"[{"lambda":1,"M":[[1]],"k":2},[{"T":[[1]],"R":[[2]],"c":[1,0]}]]"#).unwrap();
        assert!(is_singular(&FourierSeries::from_json(&v).unwrap()));
    }

    fn z2(m: usize, n: usize, exps: &[(usize, usize, u32)], a: f64) -> Polynomial {
        let mut e = vec![0u32; m * n];
        for &(p, i, k) in exps {
            e[p * n + i] = k;
        }
        Polynomial::from_terms(m, n, [(e, c(a, 0.0))]).unwrap()
    }

    #[test]
    fn pluriharmonic_examples() {
        let s1 = RMatrix::identity(1, 1);
        assert!(is_pluriharmonic(&z2(1, 1, &[(0, 0, 1)], 3.0), &s1).unwrap());
        assert!(!is_pluriharmonic(&z2(1, 1, &[(0, 0, 2)], 1.0), &s1).unwrap());
        let p = z2(2, 1, &[(0, 0, 2)], 1.0).add(&z2(2, 1, &[(1, 0, 2)], -1.0));
        assert!(is_pluriharmonic(&p, &RMatrix::identity(2, 2)).unwrap());
        let q = Polynomial::var(2, 1, 0, 0).mul(&Polynomial::var(2, 1, 1, 0));
        assert!(is_pluriharmonic(&q, &RMatrix::identity(2, 2)).unwrap());
    }

    /// `B = S^{1/2} O S^{-1/2}` with `O` orthogonal.
    fn orth_for(r: &mut crate::random::SjRng, s: &RMatrix) -> RMatrix {
        let h = crate::linalg::sqrt_pd(s).unwrap();
        &h * rand_orthogonal(r, s.nrows()) * inv_r(&h).unwrap()
    }

    #[test]
    fn pluriharmonic_invariance() {
        let mut r = rng(15);
        let (m, n) = (2, 2);
        let s = RMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        // det Z = z11 z22 - z12 z21 is pluriharmonic for any S
        let p = Polynomial::var(m, n, 0, 0)
            .mul(&Polynomial::var(m, n, 1, 1))
            .add(&Polynomial::var(m, n, 0, 1).mul(&Polynomial::var(m, n, 1, 0)).scale(c(-1.0, 0.0)));
        assert!(is_pluriharmonic(&p, &s).unwrap());
        for _ in 0..5 {
            let a = rand_cmat(&mut r, n, n, 1.0) + CMatrix::identity(n, n);
            let b = orth_for(&mut r, &s);
            let q = p.substitute(&a, &to_complex(&b)).unwrap();
            assert!(is_pluriharmonic(&q, &s).unwrap());
            let z = rand_cmat(&mut r, m, n, 1.0);
            let direct = p.eval(&(to_complex(&b).transpose() * &z * &a));
            assert!((q.eval(&z) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
        // a degree-2 pluriharmonic polynomial for n = 1: sum_pq u_p u_q z_p z_q with u T u = 0
        let t = inv_r(&s).unwrap();
        let u0 = [c(1.0, 0.0), c_root(&t)];
        let mut q = Polynomial::zero(m, 1);
        for pp in 0..2 {
            for qq in 0..2 {
                q = q.add(&Polynomial::var(m, 1, pp, 0).mul(&Polynomial::var(m, 1, qq, 0)).scale(u0[pp] * u0[qq]));
            }
        }
        assert!(is_pluriharmonic(&q, &s).unwrap());
        for _ in 0..5 {
            let b = orth_for(&mut r, &s);
            let a = CMatrix::from_element(1, 1, c(uniform(&mut r, 0.5, 2.0), uniform(&mut r, -1.0, 1.0)));
            assert!(is_pluriharmonic(&q.substitute(&a, &to_complex(&b)).unwrap(), &s).unwrap());
        }
    }

    /// Root `x` of `t00 + 2 t01 x + t11 x^2 = 0` (complex, since `T > 0`).
    fn c_root(t: &RMatrix) -> C64 {
        let (a, b, cc) = (t[(1, 1)], 2.0 * t[(0, 1)], t[(0, 0)]);
        (c(-b, 0.0) + c(b * b - 4.0 * a * cc, 0.0).sqrt()) / (2.0 * a)
    }

    #[test]
    fn literal_orthogonal_group_breaks_invariance() {
        // B with ^tB S B = S does not preserve pluriharmonicity for non-scalar S
        let mut r = rng(16);
        let s = RMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let t = inv_r(&s).unwrap();
        let u0 = [c(1.0, 0.0), c_root(&t)];
        let mut q = Polynomial::zero(2, 1);
        for pp in 0..2 {
            for qq in 0..2 {
                q = q.add(&Polynomial::var(2, 1, pp, 0).mul(&Polynomial::var(2, 1, qq, 0)).scale(u0[pp] * u0[qq]));
            }
        }
        assert!(is_pluriharmonic(&q, &s).unwrap());
        let h = crate::linalg::sqrt_pd(&s).unwrap();
        let b = inv_r(&h).unwrap() * rand_orthogonal(&mut r, 2) * &h;
        assert!(crate::linalg::max_abs_r(&(b.transpose() * &s * &b - &s)) < 1e-12);
        let moved = q.substitute(&CMatrix::identity(1, 1), &to_complex(&b)).unwrap();
        assert!(!is_pluriharmonic(&moved, &s).unwrap());
    }
}
