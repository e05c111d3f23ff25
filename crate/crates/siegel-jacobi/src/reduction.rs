//! Minkowski reduction of positive forms, Siegel reduction of points of
//! `H_n` (highest-point iteration), and reduction of the toroidal coordinate
//! of `H_{n,m}` into the parallelogram `P_Omega`.
//!
//! Conditions that quantify over infinite sets are certified over finite
//! candidate sets only: (M.1) over integral vectors with `|a|_inf <= 3`,
//! (S.1) over short words in the generators plus partial inversions.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{act_jacobi, act_siegel, jacobi_multiply, HeisenbergElement, JacobiGroupElement, SymplecticElement};
use crate::linalg::{det, is_positive_definite_r, to_complex, CMatrix, RMatrix, Tolerance};
use crate::spaces::{JacobiPoint, SiegelPoint};

pub type IMatrix = DMatrix<i64>;

/// Enumeration bound for the (M.1) certificate.
pub const MINKOWSKI_BOUND: i64 = 3;
/// Largest degree with the guaranteed reduction mode.
pub const MAX_GUARANTEED_DEGREE: usize = 3;
pub const DEFAULT_ITERATION_CAP: usize = 200;
const FLOOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinkowskiMode {
    /// `n <= 3`, enumeration with `|a|_inf <= 3`.
    #[default]
    Guaranteed,
    /// Any `n`, enumeration with `|a|_inf <= 1`; no guarantee.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCertificate {
    /// Symplectic part of the element used.
    pub gamma: SymplecticElement,
    /// Integral Heisenberg part (toroidal reduction only).
    pub heisenberg: Option<HeisenbergElement>,
    pub iterations: usize,
    /// `det Im` after each highest-point step, starting with the input.
    pub det_history: Vec<f64>,
    pub m1: bool,
    pub m2: bool,
    pub s1: bool,
    pub s3: bool,
    /// Reduced toroidal coordinates lie in `[0,1)` (toroidal reduction only).
    pub torus: Option<bool>,
    pub minkowski_bound: i64,
    pub candidates: usize,
    pub heuristic: bool,
}

impl ReductionCertificate {
    pub fn all_checks_pass(&self) -> bool {
        self.m1 && self.m2 && self.s1 && self.s3 && self.torus.unwrap_or(true)
    }

    pub fn element(&self) -> JacobiGroupElement {
        let sp = self.gamma.clone();
        match &self.heisenberg {
            None => JacobiGroupElement::from_sp(sp, 0),
            Some(h) => {
                let m = h.m();
                jacobi_multiply(&JacobiGroupElement::from_h(h.clone()), &JacobiGroupElement::from_sp(sp, m))
                    .expect("degrees agree")
            }
        }
    }

    /// Re-apply `gamma` to `input` and compare with `output`, relative tolerance `tol`.
    pub fn verify_siegel(&self, input: &SiegelPoint, output: &SiegelPoint, tol: f64) -> Result<bool> {
        let got = act_siegel(&self.gamma, input)?;
        let scale = 1.0 + crate::linalg::max_abs(output.omega());
        Ok(crate::linalg::max_abs(&(got.omega() - output.omega())) <= tol * scale)
    }

    pub fn verify_jacobi(&self, input: &JacobiPoint, output: &JacobiPoint, tol: f64) -> Result<bool> {
        let got = act_jacobi(&self.element(), input)?;
        let scale = 1.0 + crate::linalg::max_abs(output.omega()).max(crate::linalg::max_abs(output.z()));
        let d = crate::linalg::max_abs(&(got.omega() - output.omega())).max(crate::linalg::max_abs(&(got.z() - output.z())));
        Ok(d <= tol * scale)
    }

    pub fn to_json(&self) -> Value {
        let rows = |m: &RMatrix| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect() };
        json!({
            "gamma": rows(self.gamma.mat()),
            "heisenberg": self.heisenberg.as_ref().map(|h| json!({
                "lambda": rows(&h.lambda), "mu": rows(&h.mu), "kappa": rows(&h.kappa)
            })),
            "iterations": self.iterations,
            "det_history": self.det_history,
            "checks": {
                "M1": self.m1, "M2": self.m2, "S1": self.s1, "S3": self.s3, "torus": self.torus
            },
            "minkowski_bound": self.minkowski_bound,
            "candidates": self.candidates,
            "heuristic": self.heuristic,
        })
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&x| x != 0));
    out
}

fn idet(m: &[Vec<i64>]) -> i64 {
    let k = m.len();
    match k {
        0 => 1,
        1 => m[0][0],
        _ => (0..k)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * idet(&minor)
            })
            .sum(),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Rows extend to a basis of `Z^n` iff the gcd of the maximal minors is 1.
fn extendable(rows: &[Vec<i64>], n: usize) -> bool {
    let k = rows.len();
    let mut g = 0;
    for cols in combinations(n, k) {
        let sub: Vec<Vec<i64>> = rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
        g = gcd(g, idet(&sub));
        if g == 1 {
            return true;
        }
    }
    g == 1
}

fn quad(y: &RMatrix, a: &[i64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] as f64 * y[(i, j)] * a[j] as f64;
        }
    }
    s
}

fn apply_unimodular(u: &IMatrix, y: &RMatrix) -> RMatrix {
    let uf = u.map(|x| x as f64);
    let r = &uf * y * uf.transpose();
    (&r + r.transpose()) * 0.5
}

/// One greedy pass: successive minima among basis-extendable vectors.
fn greedy(y: &RMatrix, bound: i64) -> IMatrix {
    let n = y.nrows();
    let cand = vectors(n, bound);
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n);
    for k in 0..n {
        // the current basis vector wins ties, so reduced input is a fixed point
        let mut e = vec![0i64; n];
        e[k] = 1;
        let mut trial = rows.clone();
        trial.push(e.clone());
        let mut best: Option<(f64, &Vec<i64>)> = None;
        if extendable(&trial, n) {
            let i = cand.iter().position(|v| *v == e).expect("unit vector enumerated");
            best = Some((y[(k, k)], &cand[i]));
        }
        for v in &cand {
            let q = quad(y, v);
            if best.is_some_and(|(b, _)| q >= b - 1e-14 * b.abs()) {
                continue;
            }
            let mut trial = rows.clone();
            trial.push(v.clone());
            if extendable(&trial, n) {
                best = Some((q, v));
            }
        }
        rows.push(best.expect("unit vectors are always extendable").1.clone());
    }
    IMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Sign changes of basis vectors so that `y_{k,k+1} >= 0`.
fn fix_signs(u: &mut IMatrix, y: &mut RMatrix) {
    let n = y.nrows();
    for k in 0..n.saturating_sub(1) {
        if y[(k, k + 1)] < 0.0 {
            for j in 0..n {
                u[(k + 1, j)] = -u[(k + 1, j)];
                y[(k + 1, j)] = -y[(k + 1, j)];
                y[(j, k + 1)] = -y[(j, k + 1)];
            }
        }
    }
}

/// Minkowski reduction `Y_red = U Y ^tU` with `U` unimodular.
pub fn minkowski_reduce(y: &RMatrix) -> Result<(RMatrix, IMatrix)> {
    minkowski_reduce_with(y, MinkowskiMode::Guaranteed)
}

pub fn minkowski_reduce_with(y: &RMatrix, mode: MinkowskiMode) -> Result<(RMatrix, IMatrix)> {
    let n = y.nrows();
    if y.ncols() != n || n == 0 {
        return Err(crate::error::dim("minkowski_reduce needs a square matrix"));
    }
    if !is_positive_definite_r(y, Tolerance::new(0.0, 0.0))? {
        return Err(Error::Domain("minkowski_reduce needs a positive definite matrix".into()));
    }
    let bound = match mode {
        MinkowskiMode::Guaranteed if n > MAX_GUARANTEED_DEGREE => {
            return Err(Error::Unsupported(format!("guaranteed Minkowski reduction needs n <= 3, got {n}")));
        }
        MinkowskiMode::Guaranteed => MINKOWSKI_BOUND,
        MinkowskiMode::Heuristic => 1,
    };
    let mut u = IMatrix::identity(n, n);
    let mut cur = apply_unimodular(&u, y);
    for it in 0..100 {
        let step = greedy(&cur, bound);
        if step == IMatrix::identity(n, n) {
            break;
        }
        u = &step * &u;
        cur = apply_unimodular(&u, y);
        if it == 99 {
            return Err(Error::Convergence { iterations: 100, msg: "Minkowski reduction did not settle".into() });
        }
    }
    fix_signs(&mut u, &mut cur);
    Ok((cur, u))
}

/// (M.1) over `|a|_inf <= bound`: `a Y ^ta >= y_kk` whenever `a_k..a_n` are coprime.
pub fn check_m1(y: &RMatrix, bound: i64) -> bool {
    let n = y.nrows();
    vectors(n, bound).iter().all(|a| {
        (0..n).all(|k| {
            let g = a[k..].iter().fold(0, |g, &x| gcd(g, x));
            g != 1 || quad(y, a) >= y[(k, k)] * (1.0 - 1e-12)
        })
    })
}

/// (M.2): `y_{k,k+1} >= 0`.
pub fn check_m2(y: &RMatrix) -> bool {
    (0..y.nrows().saturating_sub(1)).all(|k| y[(k, k + 1)] >= 0.0)
}

/// (S.3): `|x_ij| <= 1/2`.
pub fn check_s3(x: &RMatrix) -> bool {
    x.iter().all(|v| v.abs() <= 0.5)
}

fn unit_sym(n: usize, i: usize, j: usize, s: f64) -> RMatrix {
    let mut b = RMatrix::zeros(n, n);
    b[(i, j)] = s;
    b[(j, i)] = s;
    b
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

/// Partial inversion on the index set `s`: `A = D = I - E_s`, `B = -E_s`, `C = E_s`.
pub fn partial_inversion(n: usize, s: &[usize]) -> SymplecticElement {
    let mut e = RMatrix::zeros(n, n);
    for &i in s {
        e[(i, i)] = 1.0;
    }
    let id = RMatrix::identity(n, n);
    SymplecticElement::from_blocks(&(&id - &e), &(-&e), &e, &(&id - &e)).expect("partial inversion is symplectic")
}

/// Candidate set for (S.1): words of length at most 3 in unit translations,
/// permutations and `sigma_n`, plus partial inversions alone and after a
/// unit translation. Deduplicated on the bottom row `(C, D)`, which alone
/// determines `det Im(gamma . Omega)`.
pub fn candidate_set(n: usize) -> Vec<SymplecticElement> {
    let mut gens = vec![SymplecticElement::sigma(n)];
    let mut units = vec![];
    for i in 0..n {
        for j in i..n {
            for s in [1.0, -1.0] {
                let t = SymplecticElement::t(&unit_sym(n, i, j, s)).expect("symmetric");
                units.push(t.clone());
                gens.push(t);
            }
        }
    }
    for p in permutations(n).into_iter().skip(1) {
        let a = RMatrix::from_fn(n, n, |i, j| if p[i] == j { 1.0 } else { 0.0 });
        gens.push(SymplecticElement::g(&a).expect("permutation"));
    }
    let mut words: Vec<SymplecticElement> = gens.clone();
    let mut frontier = gens.clone();
    for _ in 1..3 {
        let mut next = vec![];
        for w in &frontier {
            for g in &gens {
                next.push(g.mul(w).expect("same degree"));
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let subsets: Vec<Vec<usize>> = (1..(1usize << n)).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect()).collect();
    for s in &subsets {
        let inv = partial_inversion(n, s);
        words.push(inv.clone());
        for t in &units {
            words.push(inv.mul(t).expect("same degree"));
        }
    }
    let mut seen = HashSet::new();
    let mut out = vec![];
    for w in words {
        let key: Vec<i64> = w.c().iter().chain(w.d().iter()).map(|x| x.round() as i64).collect();
        let trivial = w.c().iter().all(|&x| x == 0.0);
        if !trivial && seen.insert(key) {
            out.push(w);
        }
    }
    out
}

/// `|det(C Omega + D)|` for every candidate, returning the index of the
/// smallest value when it is below 1.
fn worst_candidate(cands: &[SymplecticElement], omega: &CMatrix) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in cands.iter().enumerate() {
        let d = det(&(to_complex(&g.c()) * omega + to_complex(&g.d())))?.norm();
        if d < 1.0 && best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    Ok(best)
}

/// Siegel reduction by the highest-point iteration with the default cap.
pub fn siegel_reduce(p: &SiegelPoint) -> Result<(SiegelPoint, ReductionCertificate)> {
    siegel_reduce_with(p, DEFAULT_ITERATION_CAP, MinkowskiMode::Guaranteed)
}

pub fn siegel_reduce_with(p: &SiegelPoint, cap: usize, mode: MinkowskiMode) -> Result<(SiegelPoint, ReductionCertificate)> {
    let n = p.n();
    if n > MAX_GUARANTEED_DEGREE && mode == MinkowskiMode::Guaranteed {
        return Err(Error::Unsupported(format!("Siegel reduction is supported for n <= 3, got {n}")));
    }
    let cands = candidate_set(n);
    let mut gamma = SymplecticElement::identity(n);
    let mut cur = p.clone();
    let mut hist = vec![crate::linalg::det_r(&p.y())];
    let mut iterations = 0;
    loop {
        // (S.2): Minkowski-reduce Y with Omega -> U Omega ^tU
        let (yr, u) = minkowski_reduce_with(&cur.y(), mode)?;
        let uf = u.map(|x| x as f64);
        let xr = apply_unimodular(&u, &cur.x());
        gamma = SymplecticElement::g(&uf.transpose())?.mul(&gamma)?;
        // (S.3): integral translation
        let b = xr.map(|v| v.round());
        let xt = &xr - &b;
        gamma = SymplecticElement::t(&(-&b))?.mul(&gamma)?;
        cur = SiegelPoint::from_xy(&xt, &yr)?;
        let worst = worst_candidate(&cands, cur.omega())?;
        let Some((idx, _)) = worst else {
            let cert = ReductionCertificate {
                gamma,
                heisenberg: None,
                iterations,
                det_history: hist,
                m1: check_m1(&cur.y(), MINKOWSKI_BOUND),
                m2: check_m2(&cur.y()),
                s1: true,
                s3: check_s3(&cur.x()),
                torus: None,
                minkowski_bound: MINKOWSKI_BOUND,
                candidates: cands.len(),
                heuristic: mode == MinkowskiMode::Heuristic,
            };
            return Ok((cur, cert));
        };
        iterations += 1;
        let g = &cands[idx];
        cur = act_siegel(g, &cur)?;
        gamma = g.mul(&gamma)?;
        hist.push(crate::linalg::det_r(&cur.y()));
        if iterations >= cap {
            let cert = ReductionCertificate {
                gamma,
                heisenberg: None,
                iterations,
                det_history: hist,
                m1: false,
                m2: false,
                s1: false,
                s3: false,
                torus: None,
                minkowski_bound: MINKOWSKI_BOUND,
                candidates: cands.len(),
                heuristic: mode == MinkowskiMode::Heuristic,
            };
            return Err(Error::ReductionCap { iterations, certificate: Box::new(cert) });
        }
    }
}

/// `(lambda, mu)` with `Z = lambda + mu Omega`: `mu = Im Z (Im Omega)^-1`, `lambda = Re Z - mu Re Omega`.
pub fn torus_coordinates(p: &JacobiPoint) -> Result<(RMatrix, RMatrix)> {
    let mu = p.v() * crate::linalg::inv_r(&p.y())?;
    let lambda = crate::linalg::re(p.z()) - &mu * crate::linalg::re(p.omega());
    Ok((lambda, mu))
}

fn guarded_floor(x: f64) -> f64 {
    let f = x.floor();
    if x - f > 1.0 - FLOOR_GUARD {
        f + 1.0
    } else {
        f
    }
}

/// Siegel-reduce `Omega`, then translate `Z` into `P_Omega` by an integral
/// Heisenberg element.
pub fn jacobi_reduce(p: &JacobiPoint) -> Result<(JacobiPoint, ReductionCertificate)> {
    let (_, mut cert) = siegel_reduce(&p.siegel())?;
    let m = p.m();
    let mid = act_jacobi(&JacobiGroupElement::from_sp(cert.gamma.clone(), m), p)?;
    let (lambda, mu) = torus_coordinates(&mid)?;
    let l0 = -mu.map(guarded_floor);
    let m0 = -lambda.map(guarded_floor);
    let kappa = -(&m0 * l0.transpose());
    let h = HeisenbergElement::new(l0, m0, kappa)?;
    let out = act_jacobi(&JacobiGroupElement::from_h(h.clone()), &mid)?;
    let (lr, mr) = torus_coordinates(&out)?;
    let inside = |v: &f64| (-FLOOR_GUARD..1.0).contains(v);
    cert.torus = Some(lr.iter().all(inside) && mr.iter().all(inside));
    cert.heisenberg = Some(h);
    Ok((out, cert))
}

/// Random element of `Sp(n,Z)`: a word of `len` generators drawn from integral
/// translations (entries in `[-2,2]`), signed permutations and `sigma_n`.
pub fn random_modular_word(r: &mut crate::random::SjRng, n: usize, len: usize) -> SymplecticElement {
    use rand::Rng;
    let mut g = SymplecticElement::identity(n);
    for _ in 0..len {
        let step = match r.random_range(0..3) {
            0 => {
                let mut b = RMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = r.random_range(-2..=2) as f64;
                        b[(i, j)] = v;
                        b[(j, i)] = v;
                    }
                }
                SymplecticElement::t(&b).expect("symmetric")
            }
            1 => {
                let perms = permutations(n);
                let p = &perms[r.random_range(0..perms.len())];
                let signs: Vec<f64> = (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
                let a = RMatrix::from_fn(n, n, |i, j| if p[i] == j { signs[i] } else { 0.0 });
                SymplecticElement::g(&a).expect("signed permutation")
            }
            _ => SymplecticElement::sigma(n),
        };
        g = step.mul(&g).expect("same degree");
    }
    g
}
