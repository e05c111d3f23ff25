//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every criterion combines the library
//! battery rows for that capability with an oracle computed here from first
//! principles.

use num_complex::Complex64 as C64;
use siegel_jacobi::cayley::{cayley, cayley_inverse};
use siegel_jacobi::checks::{cocycle_generators, run_suite, test_gaussian, weil_ratio, CheckRow};
use siegel_jacobi::geodesics::siegel_distance;
use siegel_jacobi::groups::HeisenbergElement;
use siegel_jacobi::linalg::{c, scalar, RMatrix};
use siegel_jacobi::metrics::{gram_matrix, jacobi_metric, MetricParams};
use siegel_jacobi::random::{rng, uniform};
use siegel_jacobi::reduction::siegel_reduce;
use siegel_jacobi::spaces::{DiskPoint, JacobiPoint, SiegelPoint};
use siegel_jacobi::theta::{cocycle, theta_sum, SL2Coord, ThetaContext};

const SEED: u64 = 20261017;

struct Verdict {
    cases: usize,
    failures: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict { cases: 0, failures: Vec::new() }
    }

    fn rows(&mut self, rows: &[CheckRow], keep: impl Fn(&str) -> bool) {
        for row in rows.iter().filter(|r| keep(&r.case)) {
            self.check(row.pass, || format!("{} residual {:e} tol {:e}", row.case, row.residual, row.tol));
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, case: &str, lhs: f64, rhs: f64, tol: f64) {
        let res = (lhs - rhs).abs() / (1.0 + rhs.abs());
        self.check(res <= tol, || format!("{case}: {lhs} vs {rhs} residual {res:e} tol {tol:e}"));
    }
}

fn suite(name: &str) -> Vec<CheckRow> {
    run_suite(name, SEED, 1.0).expect("suite runs")
}

/// Standard reduction of `z` into the `SL(2,Z)` fundamental domain, tracking
/// the integer matrix and applying it to the starting point at the end.
fn modular_oracle(z0: C64) -> C64 {
    let (mut a, mut b, mut cc, mut d) = (1i64, 0i64, 0i64, 1i64);
    let act = |a: i64, b: i64, cc: i64, d: i64| (z0 * a as f64 + b as f64) / (z0 * cc as f64 + d as f64);
    for _ in 0..1000 {
        let z = act(a, b, cc, d);
        let k = z.re.round() as i64;
        if k != 0 {
            a -= k * cc;
            b -= k * d;
            continue;
        }
        if z.norm_sqr() < 1.0 - 1e-14 {
            (a, b, cc, d) = (-cc, -d, a, b);
            continue;
        }
        break;
    }
    act(a, b, cc, d)
}

fn same_orbit_point(a: C64, b: C64) -> bool {
    if (a - b).norm() < 1e-9 {
        return true;
    }
    let on_edge = |z: C64| (z.re.abs() - 0.5).abs() < 1e-9 || (z.norm() - 1.0).abs() < 1e-9;
    on_edge(a) && on_edge(b) && ((a.im - b.im).abs() < 1e-9)
}

fn hyperbolic_distance(a: C64, b: C64) -> f64 {
    2.0 * ((a - b) / (a - b.conj())).norm().atanh()
}

/// Gram matrix of `ds^2` on `H_{1,1}` with `A = B = 1`, obtained by
/// substituting `dZ = du + i dv`, `dOmega = dx + i dy` into the line element.
fn gram_oracle(y: f64, v: f64) -> [[f64; 4]; 4] {
    let line = |dx: f64, dy: f64, du: f64, dv: f64| {
        let dom = C64::new(dx, dy);
        let dz = C64::new(du, dv);
        let w = dz - dom * (v / y);
        dom.norm_sqr() / (y * y) + w.norm_sqr() / y
    };
    let q = |t: [f64; 4]| line(t[0], t[1], t[2], t[3]);
    let e = |k: usize| std::array::from_fn::<f64, 4, _>(|i| f64::from(u8::from(i == k)));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let s = std::array::from_fn(|k| e(i)[k] + e(j)[k]);
            (q(s) - q(e(i)) - q(e(j))) / 2.0
        })
    })
}

fn report(id: usize, name: &str, v: &Verdict) -> bool {
    let ok = v.failures.is_empty();
    println!("{} criterion {id:2} {name}: {} cases, {} failures", if ok { "PASS" } else { "FAIL" }, v.cases, v.failures.len());
    for f in v.failures.iter().take(5) {
        println!("    {f}");
    }
    ok
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("actions"), |_| true);
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("cayley"), |_| true);
    let mut r = rng(SEED);
    for k in 0..50 {
        let w = C64::from_polar(uniform(&mut r, 0.0, 0.95), uniform(&mut r, 0.0, std::f64::consts::TAU));
        let direct = C64::i() * (1.0 + w) / (1.0 - w);
        let got = cayley(&DiskPoint::new(scalar(w)).unwrap()).unwrap().omega()[(0, 0)];
        v.close(&format!("scalar-cayley-{k}"), (got - direct).norm(), 0.0, 1e-12);
        let back = cayley_inverse(&SiegelPoint::new(scalar(direct)).unwrap()).unwrap().w()[(0, 0)];
        v.close(&format!("scalar-round-trip-{k}"), (back - w).norm(), 0.0, 1e-12);
    }
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("metrics"), |_| true);
    let mut r = rng(SEED + 3);
    for k in 0..20 {
        let (x, y, u, vv) =
            (uniform(&mut r, -1.0, 1.0), uniform(&mut r, 0.3, 3.0), uniform(&mut r, -1.0, 1.0), uniform(&mut r, -2.0, 2.0));
        let p = JacobiPoint::new(scalar(c(x, y)), scalar(c(u, vv))).unwrap();
        let g = gram_matrix(&p, |a, b| jacobi_metric(&p, a, b, MetricParams::default())).unwrap();
        let want = gram_oracle(y, vv);
        for i in 0..4 {
            for j in 0..4 {
                v.check((g[(i, j)] - want[i][j]).abs() <= 1e-12 * (1.0 + want[i][j].abs()), || {
                    format!("gram-{k}[{i},{j}]: {} vs {}", g[(i, j)], want[i][j])
                });
            }
        }
    }
    v
}

fn criterion_4(lap: &[CheckRow]) -> Verdict {
    let mut v = Verdict::new();
    v.rows(lap, |c| c.starts_with("eigen-"));
    for s in ["s0.5", "s1.7", "s2+0i"] {
        for f in ["ys", "ys_x", "ys_u", "ys_v", "ys_uv", "ys_xv", "bessel"] {
            let n = lap.iter().filter(|r| r.case.starts_with(&format!("eigen-{s}-{f}-"))).count();
            v.check(n == 20, || format!("eigen-{s}-{f}: {n} points instead of 20"));
        }
    }
    v
}

fn criterion_5(lap: &[CheckRow]) -> Verdict {
    let mut v = Verdict::new();
    v.rows(lap, |c| c.starts_with("invariance-"));
    for op in ["siegel-laplacian", "jacobi-laplacian", "m1", "m2", "s1", "s2", "s3"] {
        let n = lap.iter().filter(|r| r.case.starts_with(&format!("invariance-{op}-"))).count();
        v.check(n == 20, || format!("invariance-{op}: {n} cases instead of 20"));
    }
    let n = lap.iter().filter(|r| r.case.starts_with("invariance-j") && !r.case.starts_with("invariance-jacobi")).count();
    v.check(n == 20, || format!("invariance-j_kl: {n} cases instead of 20"));
    v
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("distance"), |_| true);
    let mut r = rng(SEED + 6);
    for k in 0..30 {
        let a = c(uniform(&mut r, -2.0, 2.0), uniform(&mut r, 0.2, 3.0));
        let b = c(uniform(&mut r, -2.0, 2.0), uniform(&mut r, 0.2, 3.0));
        let got = siegel_distance(&SiegelPoint::new(scalar(a)).unwrap(), &SiegelPoint::new(scalar(b)).unwrap()).unwrap();
        v.close(&format!("upper-half-plane-{k}"), got, hyperbolic_distance(a, b), 1e-10);
    }
    v
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("reduction"), |_| true);
    let mut r = rng(SEED + 7);
    for k in 0..200 {
        let z = c(uniform(&mut r, -5.0, 5.0), uniform(&mut r, 0.01, 2.0));
        let (q, _) = siegel_reduce(&SiegelPoint::new(scalar(z)).unwrap()).unwrap();
        let got = q.omega()[(0, 0)];
        let want = modular_oracle(z);
        v.check(got.re.abs() <= 0.5 + 1e-12 && got.norm() >= 1.0 - 1e-12, || format!("domain-{k}: {got}"));
        v.check(same_orbit_point(got, want), || format!("oracle-{k}: {got} vs {want}"));
    }
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new();
    v.rows(&suite("jacobiforms"), |_| true);
    v
}

fn criterion_9(theta: &[CheckRow]) -> Verdict {
    let mut v = Verdict::new();
    let law = |c: &str| ["jacobi", "product-invariance", "theta-base"].iter().any(|p| c.starts_with(p));
    v.rows(theta, law);
    let ctx = ThetaContext::new(RMatrix::from_element(1, 1, 1.0), 40).unwrap();
    let f = siegel_jacobi::theta::GridFunction::standard_gaussian(ctx.mmat(), 1);
    let got = theta_sum(&f, &ctx, &SL2Coord::new(c(0.0, 1.0), 0.0).unwrap(), &HeisenbergElement::identity(1, 1)).unwrap();
    let lattice: f64 = (-30i32..=30).map(|w| (-std::f64::consts::PI * (w * w) as f64).exp()).sum();
    v.close("base-value-lattice-sum", (got - lattice).norm(), 0.0, 1e-10);
    v
}

fn criterion_10(theta: &[CheckRow]) -> Verdict {
    let mut v = Verdict::new();
    let weil = |c: &str| ["stone-von-neumann", "iwasawa", "cocycle"].iter().any(|p| c.starts_with(p));
    v.rows(theta, weil);
    let gens = cocycle_generators();
    let ctx = ThetaContext::new(RMatrix::from_element(1, 1, 1.0), 40).unwrap();
    let f = test_gaussian();
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate() {
            let z = cocycle(a, b, 1, 1).unwrap();
            v.check((z.powu(8) - 1.0).norm() < 1e-10, || format!("cocycle-root-{i}-{j}: {z}"));
            let w = weil_ratio(a, b, &ctx, &f).unwrap();
            v.check((z - w).norm() < 1e-10, || format!("cocycle-ratio-{i}-{j}: {z} vs {w}"));
        }
    }
    v
}

fn main() {
    let lap = suite("laplacians");
    let theta = suite("theta");
    let results = [
        report(1, "group action axioms", &criterion_1()),
        report(2, "Cayley intertwining and round trip", &criterion_2()),
        report(3, "metric invariance and closed form", &criterion_3()),
        report(4, "Laplacian eigentable", &criterion_4(&lap)),
        report(5, "invariant operators commute with the action", &criterion_5(&lap)),
        report(6, "symplectic distance", &criterion_6()),
        report(7, "fundamental domain reduction", &criterion_7()),
        report(8, "Jacobi form operators", &criterion_8()),
        report(9, "theta transformation laws", &criterion_9(&theta)),
        report(10, "Weil representation kernels", &criterion_10(&theta)),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
