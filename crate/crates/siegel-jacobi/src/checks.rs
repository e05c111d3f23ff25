//! Invariant batteries behind `sj check --suite <name>`.
//!
//! Every case produces one [`CheckRow`]. A case whose computation fails is
//! kept as a failing row carrying the error text, so a battery always reports
//! every case it attempted. Rows come out in a fixed order for a given seed.
//!
//! Residual conventions: scalar identities use `|lhs - rhs| / (1 + |rhs|)`,
//! matrix identities use `max|lhs - rhs| / (1 + max|rhs|)` and report the
//! largest entry modulus of each side in the `lhs`/`rhs` columns. Exact
//! checks (domain membership, gate agreement) use residual 0 or 1 against
//! tolerance 0.

use std::f64::consts::PI;
use std::io::Write;

use crate::cayley::{cayley, cayley_inverse, partial_cayley, partial_cayley_inverse};
use crate::diffops::{
    builtin_field, disk_operator, laplacian_jacobi, laplacian_siegel, m1, m2, random_eta_poly_field, random_test_field,
    rel_residual, DiskOperator, FDConfig, ScalarField,
};
use crate::error::{Error, Result};
use crate::geodesics::{distance_squared_series, siegel_distance, special_geodesic};
use crate::groups::{
    act_disk, act_jacobi, act_jacobi_disk, act_siegel, embed_star, jacobi_multiply, random_jacobi, random_symplectic,
    star_multiply, HeisenbergElement,
};
use crate::jacobiforms::{
    apply_m_operator, automorphic_factor, embed_for_limit, fourier_eval, is_singular, m_operator_fd, series_field,
    siegel_jacobi_operator, slash, synthetic_series, term_value, FourierSeries, FourierTerm, JacobiFormIndex,
};
use crate::linalg::{c, det, max_abs, scalar, to_complex, CMatrix, RMatrix, C64};
use crate::metrics::{gram_matrix, jacobi_disk_metric, jacobi_metric, siegel_metric, MetricParams, PushMode, Pushforward};
use crate::random::{rand_cmat, rand_csym, rand_disk, rand_jacobi, rand_jacobi_disk, rand_siegel, rng, uniform, SjRng};
use crate::reduction::{candidate_set, check_m1, check_m2, check_s3, jacobi_reduce, siegel_reduce};
use crate::spaces::{JacobiDiskPoint, JacobiPoint, SiegelPoint, TangentVector};
use crate::theta::{
    cocycle, gamma2_check, iwasawa, iwasawa_compose, jacobi1_check, jacobi2_check, jacobi3_check, stone_von_neumann_check,
    theta_sum, weil_sl2_matrix_action, CVector, Gamma2Generator, GridFunction, Quadrature, QuadratureRule, SL2Coord, Sl2,
    ThetaContext, WeilGenerator, S_MATRIX,
};

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 8] = ["actions", "cayley", "metrics", "laplacians", "distance", "reduction", "jacobiforms", "theta"];

/// One case of a battery, as written to the CSV `case,lhs,rhs,residual,tol,pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub case: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

struct Outcome {
    lhs: String,
    rhs: String,
    residual: f64,
}

fn fmt_c(z: C64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

fn fmt_r(x: f64) -> String {
    format!("{x:.12e}")
}

impl Outcome {
    fn scalar(lhs: C64, rhs: C64) -> Self {
        Outcome { lhs: fmt_c(lhs), rhs: fmt_c(rhs), residual: rel_residual(lhs, rhs) }
    }

    fn real(lhs: f64, rhs: f64, residual: f64) -> Self {
        Outcome { lhs: fmt_r(lhs), rhs: fmt_r(rhs), residual }
    }

    fn matrices(pairs: &[(&CMatrix, &CMatrix)]) -> Self {
        let mut residual = 0.0f64;
        let (mut la, mut ra) = (0.0f64, 0.0f64);
        for (a, b) in pairs {
            residual = residual.max(max_abs(&(*a - *b)) / (1.0 + max_abs(b)));
            la = la.max(max_abs(a));
            ra = ra.max(max_abs(b));
        }
        Outcome::real(la, ra, residual)
    }

    fn flag(lhs: impl ToString, rhs: impl ToString, ok: bool) -> Self {
        Outcome { lhs: lhs.to_string(), rhs: rhs.to_string(), residual: if ok { 0.0 } else { 1.0 } }
    }
}

struct Battery {
    rows: Vec<CheckRow>,
    scale: f64,
}

impl Battery {
    fn new(tol_scale: f64) -> Self {
        Battery { rows: vec![], scale: tol_scale.max(1.0) }
    }

    fn record(&mut self, case: impl Into<String>, tol: f64, out: Result<Outcome>) {
        let tol = tol * self.scale;
        let case = case.into();
        let row = match out {
            Ok(o) => CheckRow { pass: o.residual <= tol, case, lhs: o.lhs, rhs: o.rhs, residual: o.residual, tol },
            Err(e) => {
                CheckRow { case, lhs: format!("error: {e}"), rhs: String::new(), residual: f64::INFINITY, tol, pass: false }
            }
        };
        self.rows.push(row);
    }
}

/// Run the named battery. `tol_scale` multiplies every tolerance and is
/// floored at 1, so it can only loosen a check.
pub fn run_suite(name: &str, seed: u64, tol_scale: f64) -> Result<Vec<CheckRow>> {
    let mut b = Battery::new(tol_scale);
    match name {
        "actions" => actions(&mut b, seed),
        "cayley" => cayley_suite(&mut b, seed),
        "metrics" => metrics(&mut b, seed),
        "laplacians" => laplacians(&mut b, seed),
        "distance" => distance(&mut b, seed),
        "reduction" => reduction(&mut b, seed),
        "jacobiforms" => jacobiforms(&mut b, seed),
        "theta" => theta(&mut b, seed),
        other => return Err(Error::Parameter(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    }
    Ok(b.rows)
}

/// Write rows as CSV with the fixed header `case,lhs,rhs,residual,tol,pass`.
pub fn write_csv(rows: &[CheckRow], out: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "lhs", "rhs", "residual", "tol", "pass"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.case.as_str(),
            r.lhs.as_str(),
            r.rhs.as_str(),
            &format!("{:.6e}", r.residual),
            &format!("{:.1e}", r.tol),
            if r.pass { "true" } else { "false" },
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

const DEGREES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];

fn degree(k: usize) -> (usize, usize) {
    DEGREES[k % DEGREES.len()]
}

fn siegel_pair(a: &SiegelPoint, b: &SiegelPoint) -> Outcome {
    Outcome::matrices(&[(a.omega(), b.omega())])
}

fn jacobi_pair(a: &JacobiPoint, b: &JacobiPoint) -> Outcome {
    Outcome::matrices(&[(a.omega(), b.omega()), (a.z(), b.z())])
}

fn jacobi_disk_pair(a: &JacobiDiskPoint, b: &JacobiDiskPoint) -> Outcome {
    Outcome::matrices(&[(a.w(), b.w()), (a.eta(), b.eta())])
}

fn actions(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    let tol = 1e-10;
    for k in 0..100 {
        let (n, _) = degree(k);
        let (g1, g2) = (random_symplectic(&mut r, n), random_symplectic(&mut r, n));
        let p = rand_siegel(&mut r, n);
        b.record(
            format!("siegel-{k:03}-n{n}"),
            tol,
            (|| {
                let lhs = act_siegel(&g1.mul(&g2)?, &p)?;
                let rhs = act_siegel(&g1, &act_siegel(&g2, &p)?)?;
                Ok(siegel_pair(&lhs, &rhs))
            })(),
        );
    }
    for k in 0..100 {
        let (n, m) = degree(k);
        let (g1, g2) = (random_jacobi(&mut r, n, m), random_jacobi(&mut r, n, m));
        let p = rand_jacobi(&mut r, n, m);
        b.record(
            format!("jacobi-{k:03}-n{n}m{m}"),
            tol,
            (|| {
                let lhs = act_jacobi(&jacobi_multiply(&g1, &g2)?, &p)?;
                let rhs = act_jacobi(&g1, &act_jacobi(&g2, &p)?)?;
                Ok(jacobi_pair(&lhs, &rhs))
            })(),
        );
    }
    for k in 0..100 {
        let (n, m) = degree(k);
        let (s1, s2) = (embed_star(&random_jacobi(&mut r, n, m)), embed_star(&random_jacobi(&mut r, n, m)));
        let w = rand_disk(&mut r, n, 0.8);
        b.record(
            format!("disk-{k:03}-n{n}"),
            tol,
            (|| {
                let lhs = act_disk(&star_multiply(&s1, &s2)?, &w)?;
                let rhs = act_disk(&s1, &act_disk(&s2, &w)?)?;
                Ok(Outcome::matrices(&[(lhs.w(), rhs.w())]))
            })(),
        );
    }
    for k in 0..100 {
        let (n, m) = degree(k);
        let (s1, s2) = (embed_star(&random_jacobi(&mut r, n, m)), embed_star(&random_jacobi(&mut r, n, m)));
        let d = rand_jacobi_disk(&mut r, n, m, 0.8);
        b.record(
            format!("jacobi-disk-{k:03}-n{n}m{m}"),
            tol,
            (|| {
                let lhs = act_jacobi_disk(&star_multiply(&s1, &s2)?, &d)?;
                let rhs = act_jacobi_disk(&s1, &act_jacobi_disk(&s2, &d)?)?;
                Ok(jacobi_disk_pair(&lhs, &rhs))
            })(),
        );
    }
}

fn cayley_suite(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    for k in 0..50 {
        let (n, m) = degree(k);
        let g = random_jacobi(&mut r, n, m);
        let gs = embed_star(&g);
        let w = rand_disk(&mut r, n, 0.8);
        b.record(
            format!("siegel-intertwining-{k:02}-n{n}"),
            1e-9,
            (|| {
                let lhs = act_siegel(&g.sp, &cayley(&w)?)?;
                let rhs = cayley(&act_disk(&gs, &w)?)?;
                Ok(siegel_pair(&lhs, &rhs))
            })(),
        );
        let d = rand_jacobi_disk(&mut r, n, m, 0.8);
        b.record(
            format!("jacobi-intertwining-{k:02}-n{n}m{m}"),
            1e-9,
            (|| {
                let lhs = act_jacobi(&g, &partial_cayley(&d)?)?;
                let rhs = partial_cayley(&act_jacobi_disk(&gs, &d)?)?;
                Ok(jacobi_pair(&lhs, &rhs))
            })(),
        );
    }
    for k in 0..50 {
        let (n, m) = degree(k);
        let p = rand_jacobi(&mut r, n, m);
        b.record(
            format!("psi-round-trip-{k:02}-n{n}m{m}"),
            1e-12,
            (|| Ok(jacobi_pair(&partial_cayley(&partial_cayley_inverse(&p)?)?, &p)))(),
        );
        let s = rand_siegel(&mut r, n);
        b.record(format!("phi-round-trip-{k:02}-n{n}"), 1e-12, (|| Ok(siegel_pair(&cayley(&cayley_inverse(&s)?)?, &s)))());
    }
}

fn tangent(r: &mut SjRng, n: usize, m: usize) -> TangentVector {
    TangentVector::new(rand_csym(r, n, 1.0), rand_cmat(r, m, n, 1.0)).expect("shapes agree")
}

/// Closed form of the `n = m = 1` metric Gram matrix in the real chart
/// `(x, y, u, v)`, with `A = B = 1`.
pub fn one_one_gram(y: f64, v: f64) -> RMatrix {
    let a = (y + v * v) / y.powi(3);
    let b = -v / (y * y);
    let d = 1.0 / y;
    #[rustfmt::skip]
    let g = RMatrix::from_row_slice(4, 4, &[
        a, 0.0, b, 0.0,
        0.0, a, 0.0, b,
        b, 0.0, d, 0.0,
        0.0, b, 0.0, d,
    ]);
    g
}

fn metrics(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    for k in 0..50 {
        let (n, m) = degree(k);
        let params = MetricParams::new(uniform(&mut r, 0.5, 2.0), uniform(&mut r, 0.5, 2.0)).expect("positive");
        let g = random_jacobi(&mut r, n, m);
        let p = rand_jacobi(&mut r, n, m);
        let (t1, t2) = (tangent(&mut r, n, m), tangent(&mut r, n, m));
        b.record(
            format!("jacobi-invariance-fd-{k:02}-n{n}m{m}"),
            1e-5,
            (|| {
                let q = act_jacobi(&g, &p)?;
                let lhs =
                    jacobi_metric(&q, &g.pushforward(&p, &t1, PushMode::Fd)?, &g.pushforward(&p, &t2, PushMode::Fd)?, params)?;
                Ok(Outcome::scalar(lhs, jacobi_metric(&p, &t1, &t2, params)?))
            })(),
        );
        let gs = embed_star(&g);
        let d = rand_jacobi_disk(&mut r, n, m, 0.7);
        b.record(
            format!("jacobi-disk-invariance-fd-{k:02}-n{n}m{m}"),
            1e-5,
            (|| {
                let q = act_jacobi_disk(&gs, &d)?;
                let lhs = jacobi_disk_metric(
                    &q,
                    &gs.pushforward(&d, &t1, PushMode::Fd)?,
                    &gs.pushforward(&d, &t2, PushMode::Fd)?,
                    params,
                )?;
                Ok(Outcome::scalar(lhs, jacobi_disk_metric(&d, &t1, &t2, params)?))
            })(),
        );
        let sp = random_symplectic(&mut r, n);
        let s = rand_siegel(&mut r, n);
        let (d1, d2) = (rand_csym(&mut r, n, 1.0), rand_csym(&mut r, n, 1.0));
        b.record(
            format!("siegel-invariance-exact-{k:02}-n{n}"),
            1e-9,
            (|| {
                let (u1, u2) = (TangentVector::siegel(d1.clone())?, TangentVector::siegel(d2.clone())?);
                let q = act_siegel(&sp, &s)?;
                let a = params.a;
                let lhs =
                    siegel_metric(&q, &sp.pushforward(&s, &u1, PushMode::Exact)?, &sp.pushforward(&s, &u2, PushMode::Exact)?, a)?;
                Ok(Outcome::scalar(lhs, siegel_metric(&s, &u1, &u2, a)?))
            })(),
        );
    }
    for k in 0..20 {
        let p = rand_jacobi(&mut r, 1, 1);
        b.record(
            format!("one-one-closed-form-{k:02}"),
            1e-12,
            (|| {
                let (y, v) = (p.omega()[(0, 0)].im, p.z()[(0, 0)].im);
                let g = gram_matrix(&p, |a, t| jacobi_metric(&p, a, t, MetricParams::default()))?;
                let want = one_one_gram(y, v);
                let res = (&g - &want).abs().max();
                Ok(Outcome::real(g.abs().max(), want.abs().max(), res))
            })(),
        );
    }
}

/// Eigen-equation residual `|Delta f - lambda f| / |lambda f|`, or
/// `|Delta f| / max(1, |f|)` when `lambda = 0`.
pub fn eigen_residual(lap: C64, lambda: C64, f: C64) -> f64 {
    if lambda.norm() == 0.0 {
        lap.norm() / f.norm().max(1.0)
    } else {
        (lap - lambda * f).norm() / (lambda * f).norm()
    }
}

fn one_one_point(r: &mut SjRng) -> JacobiPoint {
    let o = c(uniform(r, -1.0, 1.0), uniform(r, 0.5, 2.0));
    let z = c(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0));
    JacobiPoint::new(scalar(o), scalar(z)).expect("valid point")
}

fn laplacians(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    let cfg = FDConfig::central4(1e-2);
    let params = MetricParams::default();
    let eigen = |b: &mut Battery, r: &mut SjRng, id: &str, s: C64, tol: f64, label: &str| {
        for k in 0..20 {
            let p = one_one_point(r);
            b.record(
                format!("eigen-{label}-{id}-{k:02}"),
                tol,
                (|| {
                    let (f, ev) = builtin_field(id, s, 0.8)?;
                    let fv = f.eval(&p)?;
                    let lap = laplacian_jacobi(&f, &p, params, cfg)?;
                    Ok(Outcome { lhs: fmt_c(lap), rhs: fmt_c(ev * fv), residual: eigen_residual(lap, ev, fv) })
                })(),
            );
        }
    };
    for (label, s) in [("s0.5", c(0.5, 0.0)), ("s1.7", c(1.7, 0.0)), ("s2+0i", c(2.0, 0.0))] {
        for id in ["ys", "ys_x", "ys_u", "ys_v", "ys_uv", "ys_xv"] {
            eigen(b, &mut r, id, s, 1e-4, label);
        }
        eigen(b, &mut r, "bessel", s, 1e-3, label);
    }
    for id in ["x", "y", "u", "v", "xv", "uv"] {
        eigen(b, &mut r, id, c(1.0, 0.0), 1e-4, "harmonic");
    }
    operator_invariance(b, &mut r);
}

fn jacobi_dim(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + n * m
}

fn operator_invariance(b: &mut Battery, r: &mut SjRng) {
    let cfg = FDConfig::central4(1e-2);
    let tol = 1e-4;
    for k in 0..20 {
        let n = 1 + k % 2;
        let a = uniform(r, 0.5, 2.0);
        let p = rand_siegel(r, n);
        let g = random_symplectic(r, n);
        let f = random_test_field::<SiegelPoint>(r, n * (n + 1) / 2);
        b.record(
            format!("invariance-siegel-laplacian-{k:02}-n{n}"),
            tol,
            (|| {
                let g2 = g.clone();
                let fg = f.compose(move |q: &SiegelPoint| act_siegel(&g2, q));
                Ok(Outcome::scalar(laplacian_siegel(&fg, &p, a, cfg)?, laplacian_siegel(&f, &act_siegel(&g, &p)?, a, cfg)?))
            })(),
        );
    }
    type JOp = fn(&ScalarField<JacobiPoint>, &JacobiPoint, FDConfig) -> Result<C64>;
    let jacobi_ops: [(&str, Option<JOp>); 3] = [("jacobi-laplacian", None), ("m1", Some(m1)), ("m2", Some(m2))];
    for (name, op) in jacobi_ops {
        for k in 0..20 {
            let (n, m) = degree(k);
            let params = MetricParams::new(uniform(r, 0.5, 2.0), uniform(r, 0.5, 2.0)).expect("positive");
            let p = rand_jacobi(r, n, m);
            let g = random_jacobi(r, n, m);
            let f = random_test_field::<JacobiPoint>(r, jacobi_dim(n, m));
            b.record(
                format!("invariance-{name}-{k:02}-n{n}m{m}"),
                tol,
                (|| {
                    let g2 = g.clone();
                    let fg = f.compose(move |q: &JacobiPoint| act_jacobi(&g2, q));
                    let gp = act_jacobi(&g, &p)?;
                    let (lhs, rhs) = match op {
                        None => (laplacian_jacobi(&fg, &p, params, cfg)?, laplacian_jacobi(&f, &gp, params, cfg)?),
                        Some(op) => (op(&fg, &p, cfg)?, op(&f, &gp, cfg)?),
                    };
                    Ok(Outcome::scalar(lhs, rhs))
                })(),
            );
        }
    }
    let mut disk_ops = vec![("s1", DiskOperator::S1), ("s2", DiskOperator::S2), ("s3", DiskOperator::S3)];
    disk_ops.push(("j", DiskOperator::J(0, 0)));
    for (name, op) in disk_ops {
        for k in 0..20 {
            let (n, m) = degree(k);
            let op = match op {
                DiskOperator::J(..) => DiskOperator::J(k % m, (k / 2) % m),
                o => o,
            };
            let p = rand_jacobi_disk(r, n, m, 0.5);
            let g = embed_star(&random_jacobi(r, n, m));
            let f = random_eta_poly_field(r, n, m);
            let cfg = if op == DiskOperator::S3 { FDConfig::central4(5e-2) } else { cfg };
            let label = match op {
                DiskOperator::J(a, c) => format!("j{}{}", a + 1, c + 1),
                _ => name.to_string(),
            };
            b.record(
                format!("invariance-{label}-{k:02}-n{n}m{m}"),
                tol,
                (|| {
                    let g2 = g.clone();
                    let fg = f.compose(move |q: &JacobiDiskPoint| act_jacobi_disk(&g2, q));
                    let gp = act_jacobi_disk(&g, &p)?;
                    Ok(Outcome::scalar(disk_operator(&fg, &p, op, cfg)?, disk_operator(&f, &gp, op, cfg)?))
                })(),
            );
        }
    }
}

fn distance(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    let base = SiegelPoint::base(1);
    for a in [2.0f64, 5.0, 10.0] {
        b.record(
            format!("rho-i-ia-{a}"),
            1e-10,
            (|| {
                let p = SiegelPoint::new(scalar(c(0.0, a)))?;
                let d = siegel_distance(&base, &p)?;
                Ok(Outcome::real(d, a.ln(), (d - a.ln().abs()).abs()))
            })(),
        );
    }
    for k in 0..30 {
        let n = 1 + k % 3;
        let (p0, p1) = (rand_siegel(&mut r, n), rand_siegel(&mut r, n));
        let g = random_symplectic(&mut r, n);
        b.record(
            format!("invariance-{k:02}-n{n}"),
            1e-8,
            (|| {
                let d = siegel_distance(&p0, &p1)?;
                let e = siegel_distance(&act_siegel(&g, &p0)?, &act_siegel(&g, &p1)?)?;
                Ok(Outcome::real(e, d, (e - d).abs() / (1.0 + d)))
            })(),
        );
        b.record(
            format!("series-{k:02}-n{n}"),
            1e-12,
            (|| {
                let d = siegel_distance(&p0, &p1)?;
                let s = distance_squared_series(&p0, &p1)?;
                Ok(Outcome::real(s, d * d, (s - d * d).abs() / (1.0 + d * d)))
            })(),
        );
    }
    let speeds: [&[f64]; 3] = [&[1.0], &[0.6, -0.8], &[0.48, -0.6, 0.64]];
    for (j, logs) in speeds.iter().enumerate() {
        let a: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
        for k in 0..5 {
            let (s, t) = (uniform(&mut r, -2.0, 2.0), uniform(&mut r, -2.0, 2.0));
            b.record(
                format!("unit-speed-{j}-{k}"),
                1e-8,
                (|| {
                    let d = siegel_distance(&special_geodesic(&a, s)?, &special_geodesic(&a, t)?)?;
                    Ok(Outcome::real(d, (s - t).abs(), (d - (s - t).abs()).abs()))
                })(),
            );
        }
    }
}

/// Classical reduction of `z` into the standard `SL(2,Z)` fundamental domain.
pub fn sl2z_reduce(mut z: C64) -> C64 {
    loop {
        z -= z.re.round();
        if z.norm_sqr() < 1.0 {
            z = -z.inv();
        } else {
            return z;
        }
    }
}

/// Distance between two points of the `SL(2,Z)` fundamental domain, treating
/// the identified boundary points `x = +-1/2` as equal.
fn domain_distance(a: C64, b: C64) -> f64 {
    let d = (a - b).norm();
    if (a.re.abs() - 0.5).abs() < 1e-9 && (b.re.abs() - 0.5).abs() < 1e-9 {
        return d.min((a.im - b.im).abs());
    }
    d
}

fn reduction(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    for k in 0..200 {
        let z = c(uniform(&mut r, -3.0, 3.0), uniform(&mut r, 0.01, 2.0));
        b.record(
            format!("degree-one-{k:03}"),
            1e-9,
            (|| {
                let p = SiegelPoint::new(scalar(z))?;
                let (q, cert) = siegel_reduce(&p)?;
                let w = q.omega()[(0, 0)];
                let o = sl2z_reduce(z);
                let inside = w.re.abs() <= 0.5 && w.norm_sqr() >= 1.0;
                let verified = cert.verify_siegel(&p, &q, 1e-9)?;
                let res = if inside && verified { domain_distance(w, o) } else { f64::INFINITY };
                Ok(Outcome { lhs: fmt_c(w), rhs: fmt_c(o), residual: res })
            })(),
        );
    }
    let cands = candidate_set(2);
    for k in 0..30 {
        let p = rand_siegel(&mut r, 2);
        b.record(
            format!("degree-two-{k:02}"),
            0.0,
            (|| {
                let (q, cert) = siegel_reduce(&p)?;
                let (x, y) = (q.x(), q.y());
                let mut violations = 0usize;
                for g in &cands {
                    if det(&(to_complex(&g.c()) * q.omega() + to_complex(&g.d())))?.norm() < 1.0 {
                        violations += 1;
                    }
                }
                let ok = check_m1(&y, 3) && check_m2(&y) && check_s3(&x) && violations == 0;
                Ok(Outcome::flag(format!("violations={violations}"), "violations=0", ok && cert.all_checks_pass()))
            })(),
        );
        b.record(
            format!("degree-two-certificate-{k:02}"),
            1e-9,
            (|| {
                let (q, cert) = siegel_reduce(&p)?;
                Ok(siegel_pair(&act_siegel(&cert.gamma, &p)?, &q))
            })(),
        );
    }
    for k in 0..12 {
        let (n, m) = degree(k);
        let p = rand_jacobi(&mut r, n, m);
        b.record(
            format!("jacobi-{k:02}-n{n}m{m}"),
            1e-9,
            (|| {
                let (q, cert) = jacobi_reduce(&p)?;
                let mut o = jacobi_pair(&act_jacobi(&cert.element(), &p)?, &q);
                if !cert.all_checks_pass() {
                    o.residual = f64::INFINITY;
                }
                Ok(o)
            })(),
        );
    }
}

/// A one-term series of degree `(n, m)` with `T = I_n`, `R = e_11`,
/// `M = I_m + (offdiag 1/2)`, weight 3.
fn probe_series(n: usize, m: usize) -> Result<FourierSeries> {
    let mm = RMatrix::from_fn(m, m, |i, j| if i == j { 1.0 + i as f64 } else { 0.5 });
    let idx = JacobiFormIndex::new(mm, 3)?;
    let mut rr = RMatrix::zeros(n, m);
    rr[(0, 0)] = 1.0;
    FourierSeries::new(1, idx, n, vec![FourierTerm { t: RMatrix::identity(n, n), r: rr, c: c(1.0, 0.5) }])
}

fn relative(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn synthetic_point(r: &mut SjRng) -> JacobiPoint {
    JacobiPoint::new(
        scalar(c(uniform(r, -0.5, 0.5), uniform(r, 0.2, 0.6))),
        CMatrix::from_row_slice(
            2,
            1,
            &[c(uniform(r, -0.5, 0.5), uniform(r, -0.2, 0.2)), c(uniform(r, -0.5, 0.5), uniform(r, -0.2, 0.2))],
        ),
    )
    .expect("valid point")
}

fn jacobiforms(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    for k in 0..100 {
        let (n, m) = degree(k);
        let (g1, g2) = (random_jacobi(&mut r, n, m), random_jacobi(&mut r, n, m));
        let p = rand_jacobi(&mut r, n, m);
        b.record(
            format!("cocycle-{k:03}-n{n}m{m}"),
            1e-8,
            (|| {
                let idx = probe_series(n, m)?.index().clone();
                let lhs = automorphic_factor(&idx, &jacobi_multiply(&g1, &g2)?, &p)?;
                let rhs = automorphic_factor(&idx, &g1, &act_jacobi(&g2, &p)?)? * automorphic_factor(&idx, &g2, &p)?;
                Ok(Outcome { lhs: fmt_c(lhs), rhs: fmt_c(rhs), residual: relative(lhs, rhs) })
            })(),
        );
        b.record(
            format!("slash-composition-{k:03}-n{n}m{m}"),
            1e-8,
            (|| {
                let s = probe_series(n, m)?;
                let f = series_field(&s);
                let lhs = slash(&slash(&f, s.index(), &g1), s.index(), &g2).eval(&p)?;
                let rhs = slash(&f, s.index(), &jacobi_multiply(&g1, &g2)?).eval(&p)?;
                Ok(Outcome { lhs: fmt_c(lhs), rhs: fmt_c(rhs), residual: relative(lhs, rhs) })
            })(),
        );
    }
    for singular in [true, false] {
        let label = if singular { "singular" } else { "regular" };
        let pts: Vec<JacobiPoint> = (0..10).map(|_| synthetic_point(&mut r)).collect();
        b.record(
            format!("gate-vs-annihilation-{label}"),
            0.0,
            (|| {
                let s = synthetic_series(singular, 20)?;
                let mut annihilated = true;
                for p in &pts {
                    let scale: f64 = s.terms().iter().map(|t| term_value(&s, t, p).norm()).sum::<f64>() * 2.0 * PI;
                    annihilated &= apply_m_operator(&s, p)?.norm() <= 1e-8 * scale;
                }
                Ok(Outcome::flag(
                    format!("gate={}", is_singular(&s)),
                    format!("annihilated={annihilated}"),
                    is_singular(&s) == annihilated && annihilated == singular,
                ))
            })(),
        );
        for (k, p) in pts.iter().enumerate().take(4) {
            b.record(
                format!("m-operator-fd-{label}-{k}"),
                1e-4,
                (|| {
                    let s = synthetic_series(singular, 20)?;
                    let exact = apply_m_operator(&s, p)?;
                    let fd = m_operator_fd(&series_field(&s), s.index().mat(), p, FDConfig::central4(1e-3))?;
                    let scale: f64 = s
                        .terms()
                        .iter()
                        .map(|t| {
                            term_value(&s, t, p).norm() * 2.0 * PI * (1.0 + t.t.abs().max() + 2.0 * PI * t.r.abs().max().powi(2))
                        })
                        .sum();
                    Ok(Outcome { lhs: fmt_c(fd), rhs: fmt_c(exact), residual: (fd - exact).norm() / scale })
                })(),
            );
        }
    }
    let diag = |a: f64, d: f64| RMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, d]);
    let limit_series = (|| {
        let idx = JacobiFormIndex::new(RMatrix::identity(1, 1), 2)?;
        FourierSeries::new(
            1,
            idx,
            2,
            vec![
                FourierTerm { t: diag(2.0, 0.0), r: RMatrix::from_row_slice(2, 1, &[1.0, 0.0]), c: c(1.0, 0.0) },
                FourierTerm { t: diag(1.0, 1.0), r: RMatrix::from_row_slice(2, 1, &[0.0, 1.0]), c: c(2.0, 0.0) },
                FourierTerm { t: diag(3.0, 0.0), r: RMatrix::from_row_slice(2, 1, &[2.0, 0.0]), c: c(0.0, -1.0) },
            ],
        )
    })();
    for k in 0..10 {
        let p = rand_jacobi(&mut r, 1, 1);
        b.record(
            format!("siegel-jacobi-limit-{k:02}"),
            1e-8,
            (|| {
                let s = limit_series.clone()?;
                let img = siegel_jacobi_operator(&s, 1)?;
                let lim = fourier_eval(&s, &embed_for_limit(&p, 2, 50.0)?)?;
                Ok(Outcome::scalar(lim, fourier_eval(&img, &p)?))
            })(),
        );
    }
}

fn h1(l: f64, m: f64, k: f64) -> HeisenbergElement {
    HeisenbergElement {
        lambda: RMatrix::from_element(1, 1, l),
        mu: RMatrix::from_element(1, 1, m),
        kappa: RMatrix::from_element(1, 1, k),
    }
}

fn r1(x: f64) -> RMatrix {
    RMatrix::from_element(1, 1, x)
}

fn ctx1(mv: f64) -> Result<ThetaContext> {
    ThetaContext::new(r1(mv), 40)
}

/// Gaussian `0.8-0.3i` times `e(x^2 (0.3+1.2i)/2 + (0.2+0.1i) x)` used as
/// the test function of the theta checks.
pub fn test_gaussian() -> GridFunction {
    GridFunction::gaussian(1, 1, CMatrix::from_element(1, 1, c(0.3, 1.2)), CVector::from_element(1, c(0.2, 0.1)), c(0.8, -0.3))
        .expect("Im Q > 0")
}

fn rand_coord(r: &mut SjRng) -> SL2Coord {
    SL2Coord::new(c(uniform(r, -1.0, 1.0), uniform(r, 0.5, 2.0)), uniform(r, 0.1, 2.0 * PI - 0.1)).expect("Im tau > 0")
}

fn rand_h(r: &mut SjRng) -> HeisenbergElement {
    h1(uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0))
}

fn int(r: &mut SjRng) -> f64 {
    uniform(r, -3.0, 3.0).round()
}

/// `R(M1 M2) f / (R(M1) R(M2) f)` read off at `x = 0.37`.
pub fn weil_ratio(m1: &Sl2, m2: &Sl2, ctx: &ThetaContext, f: &GridFunction) -> Result<C64> {
    let lhs = weil_sl2_matrix_action(&(m1 * m2), f, ctx)?;
    let rhs = weil_sl2_matrix_action(m1, &weil_sl2_matrix_action(m2, f, ctx)?, ctx)?;
    Ok(lhs.eval(&[0.37])? / rhs.eval(&[0.37])?)
}

/// Generator table for the cocycle check: `S^{+-1}`, unit upper and lower
/// unipotents, `-I` and a diagonal dilation.
pub fn cocycle_generators() -> [Sl2; 8] {
    [
        S_MATRIX,
        Sl2::new(0.0, 1.0, -1.0, 0.0),
        Sl2::new(1.0, 1.0, 0.0, 1.0),
        Sl2::new(1.0, -1.0, 0.0, 1.0),
        Sl2::new(1.0, 0.0, 1.0, 1.0),
        Sl2::new(1.0, 0.0, -1.0, 1.0),
        Sl2::new(-1.0, 0.0, 0.0, -1.0),
        Sl2::new(2.0, 0.0, 0.0, 0.5),
    ]
}

fn theta(b: &mut Battery, seed: u64) {
    let mut r = rng(seed);
    let f = test_gaussian();
    for mv in [1.0, 2.0] {
        for k in 0..20 {
            let x = rand_coord(&mut r);
            let h = rand_h(&mut r);
            let s = r1(int(&mut r));
            let h0 = h1(int(&mut r), int(&mut r), int(&mut r));
            b.record(
                format!("jacobi2-M{mv}-{k:02}"),
                1e-8,
                (|| {
                    let chk = jacobi2_check(&f, &ctx1(mv)?, &x, &h, &s)?;
                    Ok(Outcome::scalar(chk.lhs, chk.rhs))
                })(),
            );
            b.record(
                format!("jacobi3-M{mv}-{k:02}"),
                1e-8,
                (|| {
                    let chk = jacobi3_check(&f, &ctx1(mv)?, &x, &h, &h0)?;
                    Ok(Outcome::scalar(chk.lhs, chk.rhs))
                })(),
            );
        }
    }
    for k in 0..10 {
        let x = rand_coord(&mut r);
        let h = rand_h(&mut r);
        b.record(
            format!("jacobi1-closed-form-{k:02}"),
            1e-8,
            (|| {
                let chk = jacobi1_check(&f, &ctx1(1.0)?, &x, &h)?;
                Ok(Outcome::scalar(chk.lhs, chk.rhs))
            })(),
        );
    }
    for k in 0..3 {
        let x = rand_coord(&mut r);
        let h = rand_h(&mut r);
        b.record(
            format!("jacobi1-quadrature-{k:02}"),
            1e-3,
            (|| {
                let ctx = ctx1(1.0)?.with_quadrature(Quadrature { rule: QuadratureRule::Trapezoid, points: 128 });
                let chk = jacobi1_check(&f, &ctx, &x, &h)?;
                Ok(Outcome::scalar(chk.lhs, chk.rhs))
            })(),
        );
    }
    let g = GridFunction::standard_gaussian(&r1(1.0), 1);
    for k in 0..5 {
        let x = rand_coord(&mut r);
        let (l, m) = (r1(uniform(&mut r, -1.0, 1.0)), r1(uniform(&mut r, -1.0, 1.0)));
        let gens = [
            ("s", Gamma2Generator::S),
            ("tstar", Gamma2Generator::TStar { s: r1(int(&mut r)) }),
            ("translation", Gamma2Generator::Translation { lambda0: r1(int(&mut r)), mu0: r1(int(&mut r)) }),
        ];
        for (name, gen) in gens {
            b.record(
                format!("product-invariance-{name}-{k}"),
                1e-8,
                (|| {
                    let chk = gamma2_check(&f, &g, &ctx1(1.0)?, &gen, &x, &l, &m)?;
                    Ok(Outcome::scalar(chk.lhs, chk.rhs))
                })(),
            );
        }
    }
    b.record(
        "theta-base-value",
        1e-10,
        (|| {
            let v = theta_sum(&g, &ctx1(1.0)?, &SL2Coord::new(c(0.0, 1.0), 0.0)?, &h1(0.0, 0.0, 0.0))?;
            let direct: f64 = (-12..=12i32).map(|w| (-PI * (w * w) as f64).exp()).sum();
            Ok(Outcome::scalar(v, c(direct, 0.0)))
        })(),
    );
    weil_kernels(b, &mut r);
}

fn weil_kernels(b: &mut Battery, r: &mut SjRng) {
    let f = test_gaussian();
    for mv in [1.0, 3.0] {
        let gens = [
            ("h", WeilGenerator::H { h: h1(0.3, 0.2, 0.1), t: c(1.0, 0.0) }),
            ("t", WeilGenerator::T { b: r1(0.7), t: c(0.0, 1.0) }),
            ("g", WeilGenerator::G { alpha: r1(-1.5), t: c(1.0, 0.0) }),
            ("sigma", WeilGenerator::Sigma { t: c(1.0, 0.0) }),
        ];
        for (name, gen) in &gens {
            for k in 0..3 {
                let h = rand_h(r);
                b.record(
                    format!("stone-von-neumann-{name}-M{mv}-{k}"),
                    1e-6,
                    (|| {
                        let res = stone_von_neumann_check(gen, &h, &f, &ctx1(mv)?)?;
                        Ok(Outcome::real(res, 0.0, res))
                    })(),
                );
            }
        }
    }
    for k in 0..50 {
        let g1 = rand_coord(r).matrix();
        let g2 = rand_coord(r).matrix();
        b.record(
            format!("iwasawa-composition-{k:02}"),
            1e-10,
            (|| {
                let c3 = iwasawa_compose(&iwasawa(&g1)?, &iwasawa(&g2)?)?;
                let direct = g1 * g2;
                let res = (c3.matrix() - direct).abs().max();
                Ok(Outcome::real(c3.matrix().abs().max(), direct.abs().max(), res))
            })(),
        );
    }
    let gens = cocycle_generators();
    for (i, m1) in gens.iter().enumerate() {
        for (j, m2) in gens.iter().enumerate() {
            b.record(
                format!("cocycle-{i}{j}"),
                1e-10,
                (|| {
                    let ctx = ctx1(1.0)?;
                    Ok(Outcome::scalar(cocycle(m1, m2, 1, 1)?, weil_ratio(m1, m2, &ctx, &f)?))
                })(),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", 1, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![CheckRow { case: "a".into(), lhs: "1".into(), rhs: "2".into(), residual: 0.5, tol: 1e-3, pass: false }];
        let mut buf = vec![];
        write_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "case,lhs,rhs,residual,tol,pass\na,1,2,5.000000e-1,1.0e-3,false\n");
    }

    #[test]
    fn tol_scale_floors_at_one() {
        let mut b = Battery::new(0.1);
        b.record("x", 1e-3, Ok(Outcome::real(0.0, 0.0, 5e-4)));
        assert!(b.rows[0].pass && b.rows[0].tol == 1e-3);
        b.record("y", 1e-3, Err(Error::Numeric("boom".into())));
        assert!(!b.rows[1].pass);
    }

    #[test]
    fn domain_oracle_examples() {
        assert!((sl2z_reduce(c(0.0, 0.5)) - c(0.0, 2.0)).norm() < 1e-15);
        assert!(domain_distance(c(0.5, 1.2), c(-0.5, 1.2)) < 1e-15);
    }
}
