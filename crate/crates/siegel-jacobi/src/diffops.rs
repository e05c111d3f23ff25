//! Finite-difference Wirtinger calculus and the invariant differential
//! operators on `H_n`, `H_{n,m}` and `D_{n,m}`.
//!
//! Matrix-shaped derivative symbols follow the usual weighting:
//! `(d/dOmega)_{ij} = (1+delta_ij)/2 * d/d omega_ij` and `(d/dZ)_{ik} = d/dz_{ki}`
//! (so `d/dZ` is `n x m` when `Z` is `m x n`). All operators keep their
//! coefficients to the left of the derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, det, inv, inv_r, to_complex, CMatrix, C64};
use crate::spaces::{sym_index, Coordinates, JacobiDiskPoint, JacobiPoint, SiegelPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Central2,
    Central4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    pub step: f64,
    pub scheme: Scheme,
}

impl Default for FDConfig {
    fn default() -> Self {
        FDConfig { step: 1e-3, scheme: Scheme::Central2 }
    }
}

impl FDConfig {
    pub fn central4(step: f64) -> Self {
        FDConfig { step, scheme: Scheme::Central4 }
    }

    /// Step for a coordinate of modulus `x`, scaled by magnitude.
    fn h(&self, x: f64) -> f64 {
        self.step * x.max(1.0)
    }

    fn check(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Parameter(format!("finite-difference step must be positive, got {}", self.step)));
        }
        Ok(())
    }
}

/// A complex-valued field on a point type with a declared smoothness radius:
/// every FD stencil must stay within `radius` of the base point.
#[derive(Clone)]
pub struct ScalarField<P> {
    f: Arc<dyn Fn(&P) -> C64 + Send + Sync>,
    pub radius: f64,
}

impl<P> ScalarField<P> {
    pub fn new(f: impl Fn(&P) -> C64 + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f), radius: f64::INFINITY }
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = r;
        self
    }

    pub fn eval(&self, p: &P) -> Result<C64> {
        let v = (self.f)(p);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Evaluation("field returned a non-finite value".into()));
        }
        Ok(v)
    }

    /// `x -> f(map(x))`
    pub fn compose<Q: 'static>(&self, map: impl Fn(&Q) -> Result<P> + Send + Sync + 'static) -> ScalarField<Q>
    where
        P: 'static,
    {
        let f = self.f.clone();
        ScalarField {
            f: Arc::new(move |q: &Q| match map(q) {
                Ok(p) => f(&p),
                Err(_) => C64::new(f64::NAN, f64::NAN),
            }),
            radius: f64::INFINITY,
        }
    }
}

/// Evaluate `f` at the point with real coordinate vector `x`.
fn eval_real<P: Coordinates>(f: &ScalarField<P>, p: &P, x: &[f64]) -> Result<C64> {
    let cs: Vec<C64> = x.chunks(2).map(|w| c(w[0], w[1])).collect();
    f.eval(&p.with_coords(&cs))
}

fn stencil(scheme: Scheme) -> (&'static [f64], &'static [f64], f64) {
    // offsets (in units of h), weights, denominator multiplier for first derivative
    match scheme {
        Scheme::Central2 => (&[-1.0, 1.0], &[-1.0, 1.0], 2.0),
        Scheme::Central4 => (&[-2.0, -1.0, 1.0, 2.0], &[1.0, -8.0, 8.0, -1.0], 12.0),
    }
}

/// Mixed real partial derivative `d^k f / dx_{a_1} ... dx_{a_k}` by nested
/// central differences along the listed real coordinates.
pub fn real_partial<P: Coordinates>(f: &ScalarField<P>, p: &P, axes: &[usize], cfg: FDConfig) -> Result<C64> {
    cfg.check()?;
    let x0: Vec<f64> = p.coords().iter().flat_map(|z| [z.re, z.im]).collect();
    let hs: Vec<f64> = x0.iter().map(|v| cfg.h(v.abs())).collect();
    let reach: f64 = axes.iter().map(|&a| hs[a] * if cfg.scheme == Scheme::Central4 { 2.0 } else { 1.0 }).sum();
    if reach > f.radius {
        return Err(Error::Parameter(format!("stencil reach {reach:e} exceeds field radius {}", f.radius)));
    }
    fn rec<P: Coordinates>(
        f: &ScalarField<P>,
        p: &P,
        x: &mut Vec<f64>,
        axes: &[usize],
        hs: &[f64],
        scheme: Scheme,
    ) -> Result<C64> {
        let Some((&a, rest)) = axes.split_first() else {
            return eval_real(f, p, x);
        };
        let (offs, ws, den) = stencil(scheme);
        let h = hs[a];
        let base = x[a];
        let mut acc = C64::new(0.0, 0.0);
        for (o, w) in offs.iter().zip(ws) {
            x[a] = base + o * h;
            acc += rec(f, p, x, rest, hs, scheme)? * *w;
        }
        x[a] = base;
        Ok(acc / (den * h))
    }
    let mut x = x0;
    rec(f, p, &mut x, axes, &hs, cfg.scheme)
}

/// One Wirtinger direction: `d/dc_k` (`conj = false`) or `d/d conj(c_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wdir {
    pub k: usize,
    pub conj: bool,
}

/// Higher Wirtinger derivative along a list of directions, expanded into
/// real partials via `d/dc = (d/da - i d/db)/2`, `d/dc~ = (d/da + i d/db)/2`.
pub fn wirtinger<P: Coordinates>(f: &ScalarField<P>, p: &P, dirs: &[Wdir], cfg: FDConfig) -> Result<C64> {
    let k = dirs.len();
    let mut total = C64::new(0.0, 0.0);
    for mask in 0..(1usize << k) {
        let mut coef = c(1.0, 0.0);
        let mut axes = Vec::with_capacity(k);
        for (bit, d) in dirs.iter().enumerate() {
            if mask >> bit & 1 == 0 {
                axes.push(2 * d.k);
            } else {
                axes.push(2 * d.k + 1);
                coef *= if d.conj { c(0.0, 1.0) } else { c(0.0, -1.0) };
            }
        }
        total += coef * real_partial(f, p, &axes, cfg)?;
    }
    Ok(total / 2f64.powi(k as i32))
}

/// Value, first and second Wirtinger derivatives of a field in every chart coordinate.
#[derive(Debug, Clone)]
pub struct DerivTable {
    pub n: usize,
    pub m: usize,
    pub value: C64,
    /// `d f / d c_k`
    pub d: Vec<C64>,
    /// `d f / d conj(c_k)`
    pub db: Vec<C64>,
    /// `d^2 f / d c_j d c_k`
    pub dd: CMatrix,
    /// `d^2 f / d c_j d conj(c_k)`
    pub ddb: CMatrix,
    /// `d^2 f / d conj(c_j) d conj(c_k)`
    pub dbdb: CMatrix,
}

/// Build the full first/second derivative table from one real Hessian.
pub fn wirtinger_derivs<P: Coordinates>(f: &ScalarField<P>, p: &P, cfg: FDConfig) -> Result<DerivTable> {
    cfg.check()?;
    let (n, m) = p.degrees();
    let x0: Vec<f64> = p.coords().iter().flat_map(|z| [z.re, z.im]).collect();
    let dimr = x0.len();
    let hs: Vec<f64> = x0.iter().map(|v| cfg.h(v.abs())).collect();
    let reach = hs.iter().fold(0.0f64, |a, &b| a.max(b)) * 4.0;
    if reach > f.radius {
        return Err(Error::Parameter(format!("stencil reach {reach:e} exceeds field radius {}", f.radius)));
    }
    let mut x = x0.clone();
    let f0 = eval_real(f, p, &x)?;
    let ev = |x: &mut Vec<f64>, shifts: &[(usize, f64)]| -> Result<C64> {
        for &(a, s) in shifts {
            x[a] += s;
        }
        let v = eval_real(f, p, x);
        for &(a, s) in shifts {
            x[a] -= s;
        }
        v
    };
    let (offs, ws, den) = stencil(cfg.scheme);
    let mut grad = vec![C64::new(0.0, 0.0); dimr];
    let mut hess = vec![vec![C64::new(0.0, 0.0); dimr]; dimr];
    for a in 0..dimr {
        let ha = hs[a];
        let mut g = C64::new(0.0, 0.0);
        for (o, w) in offs.iter().zip(ws) {
            g += ev(&mut x, &[(a, o * ha)])? * *w;
        }
        grad[a] = g / (den * ha);
        hess[a][a] = match cfg.scheme {
            Scheme::Central2 => (ev(&mut x, &[(a, ha)])? - f0 * 2.0 + ev(&mut x, &[(a, -ha)])?) / (ha * ha),
            Scheme::Central4 => {
                (-ev(&mut x, &[(a, 2.0 * ha)])? + ev(&mut x, &[(a, ha)])? * 16.0 - f0 * 30.0 + ev(&mut x, &[(a, -ha)])? * 16.0
                    - ev(&mut x, &[(a, -2.0 * ha)])?)
                    / (12.0 * ha * ha)
            }
        };
        for b in a + 1..dimr {
            let hb = hs[b];
            let mut s = C64::new(0.0, 0.0);
            for (oa, wa) in offs.iter().zip(ws) {
                for (ob, wb) in offs.iter().zip(ws) {
                    s += ev(&mut x, &[(a, oa * ha), (b, ob * hb)])? * (wa * wb);
                }
            }
            let v = s / (den * den * ha * hb);
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    let k = dimr / 2;
    let i = c(0.0, 1.0);
    let mut t = DerivTable {
        n,
        m,
        value: f0,
        d: vec![C64::new(0.0, 0.0); k],
        db: vec![C64::new(0.0, 0.0); k],
        dd: CMatrix::zeros(k, k),
        ddb: CMatrix::zeros(k, k),
        dbdb: CMatrix::zeros(k, k),
    };
    for j in 0..k {
        let (aj, bj) = (2 * j, 2 * j + 1);
        t.d[j] = (grad[aj] - i * grad[bj]) * 0.5;
        t.db[j] = (grad[aj] + i * grad[bj]) * 0.5;
        for l in 0..k {
            let (al, bl) = (2 * l, 2 * l + 1);
            let (h_aa, h_bb, h_ab, h_ba) = (hess[aj][al], hess[bj][bl], hess[aj][bl], hess[bj][al]);
            t.ddb[(j, l)] = (h_aa + h_bb + i * (h_ab - h_ba)) * 0.25;
            t.dd[(j, l)] = (h_aa - h_bb - i * (h_ab + h_ba)) * 0.25;
            t.dbdb[(j, l)] = (h_aa - h_bb + i * (h_ab + h_ba)) * 0.25;
        }
    }
    Ok(t)
}

/// Weighted coordinate handle for an entry of a matrix derivative symbol.
#[derive(Debug, Clone, Copy)]
struct Op {
    k: usize,
    w: f64,
}

impl DerivTable {
    fn nsym(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// `(d/dOmega)_{ij}`
    fn o(&self, i: usize, j: usize) -> Op {
        Op { k: sym_index(self.n, i, j), w: if i == j { 1.0 } else { 0.5 } }
    }

    /// `(d/dZ)_{ik} = d/dz_{ki}`
    fn z(&self, i: usize, k: usize) -> Op {
        Op { k: self.nsym() + k * self.n + i, w: 1.0 }
    }

    /// `hol . anti f`
    fn mix(&self, hol: Op, anti: Op) -> C64 {
        self.ddb[(hol.k, anti.k)] * (hol.w * anti.w)
    }

    /// Matrix `(d/dOmega)_{ij} f`.
    pub fn d_omega(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| {
            let o = self.o(i, j);
            self.d[o.k] * o.w
        })
    }

    pub fn d_omega_bar(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| {
            let o = self.o(i, j);
            self.db[o.k] * o.w
        })
    }

    /// Matrix `(d/dZ)_{ik} f`, `n x m`.
    pub fn d_z(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.m, |i, k| self.d[self.z(i, k).k])
    }

    pub fn d_z_bar(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.m, |i, k| self.db[self.z(i, k).k])
    }
}

fn range(k: usize) -> std::ops::Range<usize> {
    0..k
}

/// `sigma(P ^t(Q d/dOmega~) d/dOmega) = sum P_ia Q_bc d~_ca d_bi`
fn omega_omega(t: &DerivTable, p: &CMatrix, q: &CMatrix) -> C64 {
    let n = t.n;
    let mut s = C64::new(0.0, 0.0);
    for i in range(n) {
        for a in range(n) {
            for b in range(n) {
                for cc in range(n) {
                    s += p[(i, a)] * q[(b, cc)] * t.mix(t.o(b, i), t.o(cc, a));
                }
            }
        }
    }
    s
}

/// `Delta_{n;A} f = (4/A) sigma(Y ^t(Y d/dOmega~) d/dOmega) f`
pub fn laplacian_siegel(f: &ScalarField<SiegelPoint>, p: &SiegelPoint, a: f64, cfg: FDConfig) -> Result<C64> {
    let t = wirtinger_derivs(f, p, cfg)?;
    let y = to_complex(&p.y());
    Ok(omega_omega(&t, &y, &y) * (4.0 / a))
}

/// The two pieces `M1 f`, `M2 f` of the `H_{n,m}` Laplacian.
pub fn m1_m2(t: &DerivTable, p: &JacobiPoint) -> Result<(C64, C64)> {
    m1_m2_impl(t, p, false)
}

/// `M1` with the `Z`-`Z` term in its unsymmetrized printed form
/// `sigma(V Y^-1 V^t ^t(Y dZ~) dZ)`. It agrees with [`m1`] when `n = 1` and is
/// kept for comparison only: for `n >= 2` it is not invariant.
pub fn m1_literal(f: &ScalarField<JacobiPoint>, p: &JacobiPoint, cfg: FDConfig) -> Result<C64> {
    Ok(m1_m2_impl(&wirtinger_derivs(f, p, cfg)?, p, true)?.0)
}

fn m1_m2_impl(t: &DerivTable, p: &JacobiPoint, literal: bool) -> Result<(C64, C64)> {
    let (n, m) = (p.n(), p.m());
    let y = to_complex(&p.y());
    let v = to_complex(&p.v());
    let yi = to_complex(&inv_r(&p.y())?);
    let g = &v * &yi * v.transpose();
    let mut m1 = omega_omega(t, &y, &y);
    if literal {
        // sigma(V Y^-1 V^t ^t(Y dZ~) dZ)
        for pp in range(m) {
            for q in range(m) {
                for a in range(n) {
                    for cc in range(n) {
                        m1 += g[(pp, q)] * y[(a, cc)] * t.mix(t.z(a, pp), t.z(cc, q));
                    }
                }
            }
        }
    } else {
        // sigma(Y ^t(Y E~) E) with E the symmetric part of dZ V Y^-1
        let k = &v * &yi;
        for i in range(n) {
            for a in range(n) {
                for b in range(n) {
                    for cc in range(n) {
                        let w = y[(i, a)] * y[(b, cc)] * 0.25;
                        for pp in range(m) {
                            for q in range(m) {
                                let hol = [(k[(pp, i)], t.z(b, pp)), (k[(pp, b)], t.z(i, pp))];
                                let anti = [(k[(q, a)], t.z(cc, q)), (k[(q, cc)], t.z(a, q))];
                                for (kh, oh) in hol {
                                    for (ka, oa) in anti {
                                        m1 += w * kh * ka * t.mix(oh, oa);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // sigma(V ^t(Y dOmega~) dZ)
    for pp in range(m) {
        for a in range(n) {
            for b in range(n) {
                for cc in range(n) {
                    m1 += v[(pp, a)] * y[(b, cc)] * t.mix(t.z(b, pp), t.o(cc, a));
                }
            }
        }
    }
    // sigma(V^t ^t(Y dZ~) dOmega)
    for i in range(n) {
        for pp in range(m) {
            for a in range(n) {
                for cc in range(n) {
                    m1 += v[(pp, i)] * y[(a, cc)] * t.mix(t.o(a, i), t.z(cc, pp));
                }
            }
        }
    }
    // M2 = sigma(Y dZ ^t(dZ~))
    let mut m2 = C64::new(0.0, 0.0);
    for i in range(n) {
        for a in range(n) {
            for pp in range(m) {
                m2 += y[(i, a)] * t.mix(t.z(a, pp), t.z(i, pp));
            }
        }
    }
    Ok((m1, m2))
}

pub fn m1(f: &ScalarField<JacobiPoint>, p: &JacobiPoint, cfg: FDConfig) -> Result<C64> {
    Ok(m1_m2(&wirtinger_derivs(f, p, cfg)?, p)?.0)
}

pub fn m2(f: &ScalarField<JacobiPoint>, p: &JacobiPoint, cfg: FDConfig) -> Result<C64> {
    Ok(m1_m2(&wirtinger_derivs(f, p, cfg)?, p)?.1)
}

/// `Delta_{n,m;A,B} = (4/A) M1 + (4/B) M2`
pub fn laplacian_jacobi(
    f: &ScalarField<JacobiPoint>,
    p: &JacobiPoint,
    params: crate::metrics::MetricParams,
    cfg: FDConfig,
) -> Result<C64> {
    let params = crate::metrics::MetricParams::new(params.a, params.b)?;
    let (a, b) = m1_m2(&wirtinger_derivs(f, p, cfg)?, p)?;
    Ok(a * (4.0 / params.a) + b * (4.0 / params.b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskOperator {
    S1,
    S2,
    S3,
    /// `J_{kl}`, zero-based `(k, l)`
    J(usize, usize),
}

struct DiskCoeffs {
    pm: CMatrix,
    qm: CMatrix,
}

fn disk_coeffs(p: &JacobiDiskPoint) -> DiskCoeffs {
    let n = p.n();
    let w = p.w();
    let id = CMatrix::identity(n, n);
    DiskCoeffs { pm: &id - w * w.conjugate(), qm: &id - w.conjugate() * w }
}

/// `S1 = sigma((I - W~W) d/deta ^t(d/deta~))`
fn s1_from(t: &DerivTable, k: &DiskCoeffs) -> C64 {
    let (n, m) = (t.n, t.m);
    let mut s = C64::new(0.0, 0.0);
    for i in range(n) {
        for j in range(n) {
            for pp in range(m) {
                s += k.qm[(i, j)] * t.mix(t.z(j, pp), t.z(i, pp));
            }
        }
    }
    s
}

/// Sum over `G_pq (^t(d/deta~) (I - W~W) d/deta)_qp`
fn eta_eta(t: &DerivTable, g: &CMatrix, qm: &CMatrix) -> C64 {
    let (n, m) = (t.n, t.m);
    let mut s = C64::new(0.0, 0.0);
    for pp in range(m) {
        for q in range(m) {
            let mut kqp = C64::new(0.0, 0.0);
            for j in range(n) {
                for kk in range(n) {
                    kqp += qm[(j, kk)] * t.mix(t.z(kk, pp), t.z(j, q));
                }
            }
            s += g[(pp, q)] * kqp;
        }
    }
    s
}

fn s2_from(t: &DerivTable, p: &JacobiDiskPoint, k: &DiskCoeffs, literal: bool) -> Result<C64> {
    let (n, m) = (t.n, t.m);
    let w = p.w();
    let wb = w.conjugate();
    let e = p.eta();
    let eb = e.conjugate();
    let pmi = inv(&k.pm)?;
    let qmi = inv(&k.qm)?;
    let mut s = omega_omega(t, &k.pm, &k.pm);
    // sigma(^t(eta - eta~ W) ^t(d/deta~) (I - W~W) d/dW)
    let a = e - &eb * w;
    for i in range(n) {
        for pp in range(m) {
            for j in range(n) {
                for kk in range(n) {
                    s += a[(pp, i)] * k.qm[(j, kk)] * t.mix(t.o(kk, i), t.z(j, pp));
                }
            }
        }
    }
    // sigma((eta~ - eta W~) ^t((I - WW~) d/dW~) d/deta)
    let b = &eb - e * &wb;
    for pp in range(m) {
        for aa in range(n) {
            for cc in range(n) {
                for d in range(n) {
                    s += b[(pp, aa)] * k.pm[(cc, d)] * t.mix(t.z(cc, pp), t.o(d, aa));
                }
            }
        }
    }
    if literal {
        let g = -(e * &wb * &pmi * e.transpose()) - &eb * w * &qmi * eb.transpose()
            + &eb * &pmi * e.transpose()
            + e * &wb * w * &qmi * eb.transpose();
        s += eta_eta(t, &g, &k.qm);
    } else {
        // sigma(P ^t(P E~) E), E the symmetric part of d/deta (eta~ - eta W~) P^-1
        let l = &b * &pmi;
        for i in range(n) {
            for aa in range(n) {
                for bb in range(n) {
                    for cc in range(n) {
                        let wgt = k.pm[(i, aa)] * k.pm[(bb, cc)] * 0.25;
                        for pp in range(m) {
                            for q in range(m) {
                                let hol = [(l[(pp, i)], t.z(bb, pp)), (l[(pp, bb)], t.z(i, pp))];
                                let anti = [(l[(q, aa)].conj(), t.z(cc, q)), (l[(q, cc)].conj(), t.z(aa, q))];
                                for (kh, oh) in hol {
                                    for (ka, oa) in anti {
                                        s += wgt * kh * ka * t.mix(oh, oa);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(s)
}

/// `J_{kl} = sum_ij (delta_ij - sum_r w~_ir w_jr) d^2/(d eta~_ki d eta_lj)`
fn jkl_from(t: &DerivTable, kc: &DiskCoeffs, k: usize, l: usize) -> C64 {
    let n = t.n;
    let mut s = C64::new(0.0, 0.0);
    for i in range(n) {
        for j in range(n) {
            s += kc.qm[(i, j)] * t.mix(t.z(j, l), t.z(i, k));
        }
    }
    s
}

/// `S3 = det(I - W~W) det(d/deta ^t(d/deta~))`, an operator of order `2n`,
/// expanded over permutations and evaluated with nested differences.
fn s3(f: &ScalarField<JacobiDiskPoint>, p: &JacobiDiskPoint, cfg: FDConfig) -> Result<C64> {
    let (n, m) = (p.n(), p.m());
    let nsym = n * (n + 1) / 2;
    let zk = |row: usize, col: usize| nsym + row * n + col; // eta_{row,col}
    let mut total = C64::new(0.0, 0.0);
    for perm in permutations(n) {
        let sign = perm_sign(&perm);
        // prod_i E_{i,perm(i)},  E_ij = sum_p d/deta_{p i} d/deta~_{p j}
        let mut idx = vec![0usize; n];
        loop {
            let mut dirs = Vec::with_capacity(2 * n);
            for i in range(n) {
                dirs.push(Wdir { k: zk(idx[i], i), conj: false });
                dirs.push(Wdir { k: zk(idx[i], perm[i]), conj: true });
            }
            total += wirtinger(f, p, &dirs, cfg)? * sign;
            // advance the multi-index over p in 0..m for each factor
            let mut carry = 0;
            while carry < n {
                idx[carry] += 1;
                if idx[carry] < m {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == n {
                break;
            }
        }
    }
    Ok(total * det(&disk_coeffs(p).qm)?)
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

pub fn disk_operator(f: &ScalarField<JacobiDiskPoint>, p: &JacobiDiskPoint, which: DiskOperator, cfg: FDConfig) -> Result<C64> {
    let kc = disk_coeffs(p);
    match which {
        DiskOperator::S3 => s3(f, p, cfg),
        DiskOperator::J(k, l) => {
            if k >= p.m() || l >= p.m() {
                return Err(Error::Parameter(format!("J({k},{l}) out of range for m = {}", p.m())));
            }
            Ok(jkl_from(&wirtinger_derivs(f, p, cfg)?, &kc, k, l))
        }
        DiskOperator::S1 => Ok(s1_from(&wirtinger_derivs(f, p, cfg)?, &kc)),
        DiskOperator::S2 => s2_from(&wirtinger_derivs(f, p, cfg)?, p, &kc, false),
    }
}

/// `S2` with its `eta`-`eta` part in the unsymmetrized printed form (the
/// four terms with coefficients `eta W~ (I - W W~)^-1 ^t eta` and so on).
/// Agrees with the `S2` of [`disk_operator`] when `n = 1`; for comparison only.
pub fn s2_literal(f: &ScalarField<JacobiDiskPoint>, p: &JacobiDiskPoint, cfg: FDConfig) -> Result<C64> {
    s2_from(&wirtinger_derivs(f, p, cfg)?, p, &disk_coeffs(p), true)
}

/// `Delta_{D;A,B} = (1/A) S2 + (1/B) S1`
pub fn laplacian_disk(
    f: &ScalarField<JacobiDiskPoint>,
    p: &JacobiDiskPoint,
    params: crate::metrics::MetricParams,
    cfg: FDConfig,
) -> Result<C64> {
    let params = crate::metrics::MetricParams::new(params.a, params.b)?;
    let t = wirtinger_derivs(f, p, cfg)?;
    let kc = disk_coeffs(p);
    Ok(s2_from(&t, p, &kc, false)? / params.a + s1_from(&t, &kc) / params.b)
}

/// `|lhs - rhs| / (1 + |rhs|)`
pub fn rel_residual(lhs: C64, rhs: C64) -> f64 {
    (lhs - rhs).norm() / (1.0 + rhs.norm())
}

/// Random smooth test field `exp(L1/4) + L2 L3` built from complex linear
/// forms in the chart coordinates and their conjugates.
pub fn random_test_field<P: Coordinates + 'static>(r: &mut crate::random::SjRng, dim: usize) -> ScalarField<P> {
    use crate::random::uniform;
    let mut form = || -> Vec<(C64, C64)> {
        (0..dim)
            .map(|_| (c(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0)), c(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0))))
            .collect()
    };
    let (l1, l2, l3) = (form(), form(), form());
    ScalarField::new(move |p: &P| {
        let x = p.coords();
        let ev = |l: &[(C64, C64)]| l.iter().zip(&x).map(|((a, b), z)| a * z + b * z.conj()).sum::<C64>();
        (ev(&l1) * 0.25).exp() + ev(&l2) * ev(&l3)
    })
}

/// Random test field on `D_{n,m}`: a polynomial of degree at most 4 in the
/// entries of `eta` and their conjugates, with coefficients smooth in `W`.
pub fn random_eta_poly_field(r: &mut crate::random::SjRng, n: usize, m: usize) -> ScalarField<JacobiDiskPoint> {
    use crate::random::uniform;
    let nsym = n * (n + 1) / 2;
    let ne = n * m;
    let mut form = |k: usize| -> Vec<(C64, C64)> {
        (0..k)
            .map(|_| (c(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0)), c(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0))))
            .collect()
    };
    let (a, b, c1, d, wf) = (form(ne), form(ne), form(ne), form(ne), form(nsym));
    ScalarField::new(move |p: &JacobiDiskPoint| {
        let x = p.coords();
        let ev = |l: &[(C64, C64)], xs: &[C64]| l.iter().zip(xs).map(|((a, b), z)| a * z + b * z.conj()).sum::<C64>();
        let (ws, es) = x.split_at(nsym);
        let w = (ev(&wf, ws) * 0.5).exp();
        w * ev(&a, es) * ev(&b, es) * ev(&c1, es) * ev(&d, es) + ev(&a, es) * ev(&c1, es) + w
    })
}

/// Generators of the `U(n)`-invariant polynomials on `T = Sym_n(C) x C^{(m,n)}`.
/// Matrix indices `a`, `b` are one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantPoly {
    /// `q_j = tr((w w~)^j)`, `1 <= j <= n`
    Q(usize),
    /// `phi^{(2k)} = tr((w w~)^k)`, `1 <= k <= n`
    Phi(usize),
    /// `psi^{(e,2k,e')}_{ba}`, `0 <= k <= n`, `e, e' in {0,1}`
    Psi { e: u8, k: usize, e2: u8, b: usize, a: usize },
}

pub fn invariant_poly(name: InvariantPoly, w: &CMatrix, z: &CMatrix) -> Result<C64> {
    let n = w.nrows();
    let m = z.nrows();
    if w.ncols() != n || z.ncols() != n {
        return Err(crate::error::dim("invariant_poly: w must be n x n and z m x n"));
    }
    let wwb = w * w.conjugate();
    let pow = |k: usize| -> CMatrix {
        let mut r = CMatrix::identity(n, n);
        for _ in 0..k {
            r = &r * &wwb;
        }
        r
    };
    match name {
        InvariantPoly::Q(j) | InvariantPoly::Phi(j) => {
            if j < 1 || j > n {
                return Err(Error::Parameter(format!("generator index {j} outside 1..={n}")));
            }
            Ok(pow(j).trace())
        }
        InvariantPoly::Psi { e, k, e2, b, a } => {
            if k > n || e > 1 || e2 > 1 || a < 1 || b < 1 || a > m || b > m {
                return Err(Error::Parameter(format!("psi index out of range: ({e},{k},{e2}) at ({b},{a})")));
            }
            let left = if e == 0 { z.conjugate() } else { z * w.conjugate() };
            let right = if e2 == 0 { z.transpose() } else { w * z.conjugate().transpose() };
            let mtx = left * pow(k) * right;
            Ok(mtx[(b - 1, a - 1)])
        }
    }
}

/// `K_nu(z) = int_0^inf exp(-z cosh u) cosh(nu u) du` for real `z > 0` by
/// the trapezoid rule (the integrand decays doubly exponentially).
pub fn bessel_k(nu: C64, z: f64) -> Result<C64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("bessel_k needs z > 0, got {z}")));
    }
    let h = 0.01;
    let mut s = C64::new(0.0, 0.0);
    let mut u = 0.0f64;
    let mut first = true;
    loop {
        let e = (-z * u.cosh()).exp();
        let term = (nu * u).cosh() * e;
        s += if first { term * 0.5 } else { term };
        first = false;
        u += h;
        if -z * u.cosh() + nu.re.abs() * u < -745.0 || (e < 1e-300) {
            break;
        }
    }
    Ok(s * h)
}

/// Builtin fields on `H_{1,1}` with known eigenvalues of `Delta_{1,1;1,1}`.
/// Ids: `ys`, `ys_x`, `ys_u` (eigenvalue `s(s-1)`), `ys_v`, `ys_uv`, `ys_xv`
/// (`s(s+1)`), `x`, `y`, `u`, `v`, `xv`, `uv` (0), and `bessel` (needs `a != 0`,
/// eigenvalue `s(s-1)`).
pub fn builtin_field(id: &str, s: C64, a: f64) -> Result<(ScalarField<JacobiPoint>, C64)> {
    let ev_b = s * (s - 1.0);
    let ev_c = s * (s + 1.0);
    let zero = C64::new(0.0, 0.0);
    fn coords(p: &JacobiPoint) -> (f64, f64, f64, f64) {
        let o = p.omega()[(0, 0)];
        let z = p.z()[(0, 0)];
        (o.re, o.im, z.re, z.im)
    }
    let ys = move |y: f64| (s * y.ln()).exp();
    let f: ScalarField<JacobiPoint> = match id {
        "ys" => ScalarField::new(move |p| ys(coords(p).1)),
        "ys_x" => ScalarField::new(move |p| {
            let (x, y, _, _) = coords(p);
            ys(y) * x
        }),
        "ys_u" => ScalarField::new(move |p| {
            let (_, y, u, _) = coords(p);
            ys(y) * u
        }),
        "ys_v" => ScalarField::new(move |p| {
            let (_, y, _, v) = coords(p);
            ys(y) * v
        }),
        "ys_uv" => ScalarField::new(move |p| {
            let (_, y, u, v) = coords(p);
            ys(y) * u * v
        }),
        "ys_xv" => ScalarField::new(move |p| {
            let (x, y, _, v) = coords(p);
            ys(y) * x * v
        }),
        "x" => ScalarField::new(move |p| c(coords(p).0, 0.0)),
        "y" => ScalarField::new(move |p| c(coords(p).1, 0.0)),
        "u" => ScalarField::new(move |p| c(coords(p).2, 0.0)),
        "v" => ScalarField::new(move |p| c(coords(p).3, 0.0)),
        "xv" => ScalarField::new(move |p| {
            let (x, _, _, v) = coords(p);
            c(x * v, 0.0)
        }),
        "uv" => ScalarField::new(move |p| {
            let (_, _, u, v) = coords(p);
            c(u * v, 0.0)
        }),
        "bessel" => {
            if a == 0.0 {
                return Err(Error::Parameter("bessel field needs a != 0".into()));
            }
            ScalarField::new(move |p| {
                let (x, y, _, _) = coords(p);
                let k = bessel_k(s - 0.5, 2.0 * std::f64::consts::PI * a.abs() * y).unwrap_or(C64::new(f64::NAN, 0.0));
                k * y.sqrt() * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * a * x)
            })
        }
        other => return Err(Error::Parameter(format!("unknown builtin field {other:?}"))),
    };
    let ev = match id {
        "ys" | "ys_x" | "ys_u" | "bessel" => ev_b,
        "ys_v" | "ys_uv" | "ys_xv" => ev_c,
        _ => zero,
    };
    Ok((f, ev))
}

pub const BUILTIN_FIELDS: [&str; 13] = ["ys", "ys_x", "ys_u", "ys_v", "ys_uv", "ys_xv", "x", "y", "u", "v", "xv", "uv", "bessel"];
