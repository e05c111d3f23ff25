//! Invariant Kähler metrics on `H_n`, `H_{n,m}`, `D_n`, `D_{n,m}` as Hermitian
//! forms on tangent vectors, the invariant volume density on `H_n`, and
//! pushforwards of tangent vectors along the actions.
//!
//! A line element `ds^2` is turned into a sesquilinear form `s(t1, t2)` by
//! substituting `dOmega -> t1`, `conj(dOmega) -> conj(t2)` (same for `dZ`),
//! and then symmetrized: `h(t1,t2) = (s(t1,t2) + conj(s(t2,t1)))/2`.

use crate::error::{dim, Error, Result};
use crate::groups::{Action, SymplecticElement};
use crate::linalg::{c, det_r, inv, inv_r, to_complex, CMatrix, RMatrix, C64};
use crate::spaces::{Coordinates, DiskPoint, JacobiDiskPoint, JacobiPoint, SiegelPoint, TangentVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub a: f64,
    pub b: f64,
}

impl MetricParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Parameter(format!("metric parameters must be positive, got A={a}, B={b}")));
        }
        Ok(MetricParams { a, b })
    }
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { a: 1.0, b: 1.0 }
    }
}

fn tr(m: &CMatrix) -> C64 {
    m.trace()
}

fn hermitize(s: impl Fn(&TangentVector, &TangentVector) -> Result<C64>, t1: &TangentVector, t2: &TangentVector) -> Result<C64> {
    Ok((s(t1, t2)? + s(t2, t1)?.conj()) * 0.5)
}

fn check_tangent(t: &TangentVector, n: usize, m: usize) -> Result<()> {
    if t.n() != n || t.m() != m {
        return Err(dim(format!("tangent of degree ({},{}) at a point of degree ({n},{m})", t.n(), t.m())));
    }
    Ok(())
}

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("A must be positive, got {a}")));
    }
    Ok(())
}

/// `A tr(Y^{-1} dOmega Y^{-1} conj(dOmega))`
pub fn siegel_metric(p: &SiegelPoint, t1: &TangentVector, t2: &TangentVector, a: f64) -> Result<C64> {
    check_a(a)?;
    check_tangent(t1, p.n(), 0)?;
    check_tangent(t2, p.n(), 0)?;
    let yi = to_complex(&inv_r(&p.y())?);
    hermitize(|u, v| Ok(tr(&(&yi * &u.d_omega * &yi * v.d_omega.conjugate())) * a), t1, t2)
}

/// The `G^J`-invariant metric on `H_{n,m}` with `V = Im Z`:
///
/// ```text
/// A tr(Y^-1 dO Y^-1 dO~)
///  + B { tr(Y^-1 V^t V Y^-1 dO Y^-1 dO~) + tr(Y^-1 dZ^t dZ~)
///        - tr(V Y^-1 dO Y^-1 dZ~^t) - tr(V Y^-1 dO~ Y^-1 dZ^t) }
/// ```
/// where `~` is complex conjugation.
pub fn jacobi_metric(p: &JacobiPoint, t1: &TangentVector, t2: &TangentVector, params: MetricParams) -> Result<C64> {
    let params = MetricParams::new(params.a, params.b)?;
    let (n, m) = (p.n(), p.m());
    check_tangent(t1, n, m)?;
    check_tangent(t2, n, m)?;
    let yi = to_complex(&inv_r(&p.y())?);
    let v = to_complex(&p.v());
    let vyi = &v * &yi;
    let yvvy = vyi.transpose() * &vyi;
    hermitize(
        |u, w| {
            let d_o = &u.d_omega;
            let d_ob = w.d_omega.conjugate();
            let d_z = &u.d_z;
            let d_zb = w.d_z.conjugate();
            let sa = tr(&(&yi * d_o * &yi * &d_ob));
            let sb = tr(&(&yvvy * d_o * &yi * &d_ob)) + tr(&(&yi * d_z.transpose() * &d_zb))
                - tr(&(&vyi * d_o * &yi * d_zb.transpose()))
                - tr(&(&vyi * &d_ob * &yi * d_z.transpose()));
            Ok(sa * params.a + sb * params.b)
        },
        t1,
        t2,
    )
}

/// `4A tr((I - W conj W)^{-1} dW (I - conj(W) W)^{-1} conj(dW))`
pub fn disk_metric(p: &DiskPoint, t1: &TangentVector, t2: &TangentVector, a: f64) -> Result<C64> {
    check_a(a)?;
    check_tangent(t1, p.n(), 0)?;
    check_tangent(t2, p.n(), 0)?;
    let n = p.n();
    let w = p.w();
    let pi = inv(&(CMatrix::identity(n, n) - w * w.conjugate()))?;
    let qi = inv(&(CMatrix::identity(n, n) - w.conjugate() * w))?;
    hermitize(|u, v| Ok(tr(&(&pi * &u.d_omega * &qi * v.d_omega.conjugate())) * (4.0 * a)), t1, t2)
}

/// The `G^J_*`-invariant metric on `D_{n,m}` (eleven trace terms).
pub fn jacobi_disk_metric(p: &JacobiDiskPoint, t1: &TangentVector, t2: &TangentVector, params: MetricParams) -> Result<C64> {
    let params = MetricParams::new(params.a, params.b)?;
    let (n, m) = (p.n(), p.m());
    check_tangent(t1, n, m)?;
    check_tangent(t2, n, m)?;
    let id = CMatrix::identity(n, n);
    let w = p.w();
    let wb = w.conjugate();
    let e = p.eta();
    let eb = e.conjugate();
    let pi = inv(&(&id - w * &wb))?;
    let qi = inv(&(&id - &wb * w))?;
    let imwb_i = inv(&(&id - &wb))?;
    let imw_i = inv(&(&id - w))?;
    let imw = &id - w;
    let imwb = &id - &wb;

    // coefficient matrices K_j in tr(K_j dW (I - W~W)^-1 dW~)
    let k1 = -(&pi * e.transpose() * e * &qi * &wb);
    let k2 = -(w * &qi * eb.transpose() * &eb * &pi);
    let k3 = &pi * e.transpose() * &eb * &pi;
    let k4 = &imwb_i * eb.transpose() * e * &wb * &pi;
    let k5 = &imwb_i * &imw * &qi * eb.transpose() * e * &qi * &imwb * &imw_i;
    let k6 = -(&pi * &imw * &imwb_i * eb.transpose() * e * &imw_i);
    let kw = k1 + k2 + k3 + k4 + k5 + k6;
    let ewb = e * &wb - &eb;
    let ebw = &eb * w - e;

    hermitize(
        |u, v| {
            let dw = &u.d_omega;
            let dwb = v.d_omega.conjugate();
            let de = &u.d_z;
            let deb = v.d_z.conjugate();
            let sa = tr(&(&pi * dw * &qi * &dwb)) * 4.0;
            let sb = tr(&(&pi * de.transpose() * &deb))
                + tr(&(&ewb * &pi * dw * &qi * deb.transpose()))
                + tr(&(&ebw * &qi * &dwb * &pi * de.transpose()))
                + tr(&(&kw * dw * &qi * &dwb));
            Ok(sa * params.a + sb * (4.0 * params.b))
        },
        t1,
        t2,
    )
}

/// `(det Im Omega)^{-(n+1)}`
pub fn volume_density(p: &SiegelPoint) -> f64 {
    det_r(&p.y()).powi(-(p.n() as i32 + 1))
}

/// Real Gram matrix `G_ab = Re h(e_a, e_b)` over the real coordinate basis
/// `(Re c_0, Im c_0, Re c_1, ...)` of the point's chart.
pub fn gram_matrix<P: Coordinates>(p: &P, h: impl Fn(&TangentVector, &TangentVector) -> Result<C64>) -> Result<RMatrix> {
    let (n, m) = p.degrees();
    let k = p.coords().len();
    let basis: Vec<TangentVector> = (0..2 * k)
        .map(|a| {
            let mut v = vec![C64::new(0.0, 0.0); k];
            v[a / 2] = if a % 2 == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) };
            TangentVector::from_coords(n, m, &v)
        })
        .collect();
    let mut g = RMatrix::zeros(2 * k, 2 * k);
    for a in 0..2 * k {
        for b in 0..2 * k {
            g[(a, b)] = h(&basis[a], &basis[b])?.re;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushMode {
    Exact,
    Fd,
}

/// Central-difference step for a point: `1e-4 (1 + |p|_inf)`.
pub fn default_step<P: Coordinates>(p: &P) -> f64 {
    let s = p.coords().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    1e-4 * (1.0 + s)
}

/// Real Jacobian of `f` in the chart coordinates, columns ordered
/// `(Re c_0, Im c_0, Re c_1, ...)`, by central differences with step `h`.
pub fn real_jacobian<P: Coordinates, Q: Coordinates>(f: impl Fn(&P) -> Result<Q>, p: &P, h: f64) -> Result<RMatrix> {
    if !(h.is_finite() && h > 1e-12) {
        return Err(Error::Parameter(format!("finite-difference step {h:e} underflows")));
    }
    let x = p.coords();
    let k = x.len();
    let ko = f(p)?.coords().len();
    let mut j = RMatrix::zeros(2 * ko, 2 * k);
    for a in 0..2 * k {
        let dir = if a % 2 == 0 { c(h, 0.0) } else { c(0.0, h) };
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[a / 2] += dir;
        xm[a / 2] -= dir;
        let fp = f(&p.with_coords(&xp))?.coords();
        let fm = f(&p.with_coords(&xm))?.coords();
        for b in 0..ko {
            let d = (fp[b] - fm[b]) / (2.0 * h);
            j[(2 * b, a)] = d.re;
            j[(2 * b + 1, a)] = d.im;
        }
    }
    Ok(j)
}

fn tangent_real(t: &TangentVector) -> Vec<f64> {
    t.to_coords().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Image of `t` under a real Jacobian; `(n, m)` are the target degrees.
pub fn apply_jacobian(j: &RMatrix, t: &TangentVector, n: usize, m: usize) -> TangentVector {
    let v = nalgebra::DVector::from_vec(tangent_real(t));
    let w = j * v;
    let cs: Vec<C64> = (0..w.len() / 2).map(|b| c(w[2 * b], w[2 * b + 1])).collect();
    TangentVector::from_coords(n, m, &cs)
}

/// Pushforward of `t` at `p` along `x -> g.x` by central differences.
pub fn pushforward_fd<P: Coordinates, G: Action<P>>(g: &G, p: &P, t: &TangentVector, h: f64) -> Result<TangentVector> {
    let j = real_jacobian(|x| g.act(x), p, h)?;
    let (n, m) = p.degrees();
    Ok(apply_jacobian(&j, t, n, m))
}

/// Exact differential of `Omega -> M.Omega`: `(C Omega + D)^{-t} dOmega (C Omega + D)^{-1}`.
pub fn pushforward_siegel_exact(mm: &SymplecticElement, p: &SiegelPoint, t: &TangentVector) -> Result<TangentVector> {
    check_tangent(t, p.n(), 0)?;
    let k = inv(&mm.denominator(p.omega()))?;
    TangentVector::siegel(k.transpose() * &t.d_omega * k)
}

/// `pushforward(g, p, t, mode)`; exact mode exists for the action on `H_n` only.
pub trait Pushforward<P> {
    fn pushforward(&self, p: &P, t: &TangentVector, mode: PushMode) -> Result<TangentVector>;
}

impl Pushforward<SiegelPoint> for SymplecticElement {
    fn pushforward(&self, p: &SiegelPoint, t: &TangentVector, mode: PushMode) -> Result<TangentVector> {
        match mode {
            PushMode::Exact => pushforward_siegel_exact(self, p, t),
            PushMode::Fd => pushforward_fd(self, p, t, default_step(p)),
        }
    }
}

macro_rules! fd_only {
    ($g:ty, $p:ty) => {
        impl Pushforward<$p> for $g {
            fn pushforward(&self, p: &$p, t: &TangentVector, mode: PushMode) -> Result<TangentVector> {
                match mode {
                    PushMode::Exact => Err(Error::Unsupported("exact pushforward exists only on H_n".into())),
                    PushMode::Fd => pushforward_fd(self, p, t, default_step(p)),
                }
            }
        }
    };
}

fd_only!(crate::groups::JacobiGroupElement, JacobiPoint);
fd_only!(crate::groups::StarGroupElement, DiskPoint);
fd_only!(crate::groups::StarGroupElement, JacobiDiskPoint);
