//! `sj`: command-line front end to the `siegel_jacobi` library.
//!
//! Results go to standard output (JSON, or CSV for check rows), diagnostics
//! to standard error. Exit codes: 0 success, 1 numerical failure or
//! tolerance breach, 2 usage or input error.

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use siegel_jacobi::cayley::{cayley, cayley_inverse, partial_cayley, partial_cayley_inverse};
use siegel_jacobi::checks::{run_suite, write_csv, CheckRow, SUITES};
use siegel_jacobi::diffops::{builtin_field, laplacian_jacobi, FDConfig};
use siegel_jacobi::geodesics::distance_report;
use siegel_jacobi::groups::HeisenbergElement;
use siegel_jacobi::io::{
    complex_to_value, disk_point_from_value, disk_point_to_value, jacobi_disk_point_from_value, jacobi_disk_point_to_value,
    jacobi_point_from_value, jacobi_point_to_value, parse_complex, parse_json, rmatrix_from_value, siegel_point_from_value,
    siegel_point_to_value, tangent_from_value,
};
use siegel_jacobi::metrics::{disk_metric, jacobi_disk_metric, jacobi_metric, siegel_metric, MetricParams};
use siegel_jacobi::reduction::{jacobi_reduce, siegel_reduce};
use siegel_jacobi::theta::{
    gamma2_check, jacobi1_check, jacobi2_check, jacobi3_check, theta_sum, Gamma2Generator, GridFunction, LawCheck, Quadrature,
    QuadratureRule, SL2Coord, ThetaContext,
};
use siegel_jacobi::{Error, RMatrix, C64};

#[derive(Parser)]
#[command(name = "sj", version, about = "Geometry and arithmetic of the Siegel-Jacobi space")]
struct Cli {
    /// Seed for every randomized computation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multiplies all default tolerances (values below 1 are raised to 1).
    #[arg(long = "tol-scale", global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Fwd,
    Inv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricSpace {
    Hn,
    Hnm,
    Dn,
    Dnm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceSpace {
    Hn,
    Hnm,
}

#[derive(Clone, Copy, ValueEnum)]
enum LaplacianSpace {
    Hnm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThetaLaw {
    Jacobi1,
    Jacobi2,
    Jacobi3,
    Gamma2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gamma2Gen {
    S,
    Tstar,
    Translation,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an invariant battery and write one CSV row per case.
    Check {
        #[arg(long)]
        suite: String,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Cayley transform `D_n -> H_n` (`{"w"}` points) or partial Cayley
    /// transform `D_{n,m} -> H_{n,m}` (`{"w","eta"}` points), or the inverse.
    Cayley {
        #[arg(long, value_enum)]
        dir: Dir,
        #[arg(long)]
        point: String,
    },
    /// Invariant Hermitian metric `h(t1, t2)` at a point.
    Metric {
        #[arg(long, value_enum)]
        space: MetricSpace,
        #[arg(long = "A", default_value_t = 1.0)]
        a: f64,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long)]
        point: String,
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
    },
    /// Laplacian of a builtin field on `H_{1,1}` with its eigenvalue.
    Laplacian {
        #[arg(long, value_enum)]
        space: LaplacianSpace,
        #[arg(long = "A", default_value_t = 1.0)]
        a: f64,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long)]
        field: String,
        #[arg(long)]
        point: String,
        /// Spectral parameter `s` of the field, as `re,im` or a literal.
        #[arg(long, default_value = "1.5")]
        s: String,
        /// Frequency of the `bessel` field.
        #[arg(long = "freq", default_value_t = 1.0)]
        freq: f64,
    },
    /// Geodesic distance on `H_n`.
    Distance {
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        /// Print the cross-ratio eigenvalues as CSV instead of the distance
        /// (the distance then goes to standard error).
        #[arg(long = "emit-eigs")]
        emit_eigs: bool,
    },
    /// Reduce a point into the fundamental domain.
    Reduce {
        #[arg(long, value_enum)]
        space: ReduceSpace,
        #[arg(long)]
        point: String,
        /// Also write the certificate JSON to this file.
        #[arg(long)]
        cert: Option<String>,
    },
    /// Theta sum of the standard Gaussian, optionally with a transformation-law check.
    Theta {
        #[arg(long = "M")]
        mm: String,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, allow_hyphen_values = true)]
        lam: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, allow_hyphen_values = true)]
        kappa: String,
        #[arg(long, value_enum)]
        check: Option<ThetaLaw>,
        /// Integral shift `s` of the second law (default: all ones).
        #[arg(long = "shift", allow_hyphen_values = true)]
        shift: Option<String>,
        /// Integral translation `lambda0;mu0;kappa0` of the third law (default: `1;0;0`).
        #[arg(long = "h0", allow_hyphen_values = true)]
        h0: Option<String>,
        /// Generator for the product-invariance check.
        #[arg(long = "gen", value_enum, default_value = "s")]
        gen: Gamma2Gen,
        /// Use trapezoid quadrature with this many nodes per axis instead of
        /// the closed-form Gaussian kernel.
        #[arg(long = "quad-points")]
        quad_points: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_)
            | Error::Evaluation(_)
            | Error::Accuracy(_)
            | Error::Convergence { .. }
            | Error::ReductionCap { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Run = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numeric(msg)) => {
            eprintln!("sj: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("sj: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(v: &Value) -> std::result::Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{v}").map_err(|e| Failure::Usage(e.to_string()))
}

fn finite(z: C64, what: &str) -> std::result::Result<C64, Failure> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Failure::Numeric(format!("non-finite {what}")))
    }
}

fn json_arg(text: &str) -> std::result::Result<Value, Failure> {
    Ok(parse_json(text)?)
}

fn rmat_arg(text: &str) -> std::result::Result<RMatrix, Failure> {
    Ok(rmatrix_from_value(&json_arg(text)?)?)
}

fn run(cli: &Cli) -> Run {
    match &cli.cmd {
        Cmd::Check { suite, out } => check(suite, out.as_deref(), cli.seed, cli.tol_scale),
        Cmd::Cayley { dir, point } => cayley_cmd(*dir, point),
        Cmd::Metric { space, a, b, point, t1, t2 } => metric(*space, *a, *b, point, t1, t2),
        Cmd::Laplacian { space: LaplacianSpace::Hnm, a, b, field, point, s, freq } => laplacian(*a, *b, field, point, s, *freq),
        Cmd::Distance { p0, p1, emit_eigs } => distance(p0, p1, *emit_eigs),
        Cmd::Reduce { space, point, cert } => reduce(*space, point, cert.as_deref()),
        Cmd::Theta { mm, tau, phi, lam, mu, kappa, check, shift, h0, gen, quad_points } => {
            let args = ThetaArgs {
                mm,
                tau,
                phi: *phi,
                lam,
                mu,
                kappa,
                shift: shift.as_deref(),
                h0: h0.as_deref(),
                gen: *gen,
                quad_points: *quad_points,
            };
            theta(&args, *check, cli.tol_scale)
        }
    }
}

fn check(suite: &str, out: Option<&str>, seed: u64, tol_scale: f64) -> Run {
    if !SUITES.contains(&suite) {
        return Err(Failure::Usage(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))));
    }
    let rows = run_suite(suite, seed, tol_scale)?;
    match out {
        Some(path) => write_csv(&rows, File::create(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    eprintln!("suite {suite}: {passed}/{} cases passed", rows.len());
    for r in rows.iter().filter(|r| !r.pass) {
        eprintln!("  FAIL {} residual {:.3e} > tol {:.1e} {}", r.case, r.residual, r.tol, r.lhs);
    }
    Ok(passed == rows.len())
}

fn cayley_cmd(dir: Dir, point: &str) -> Run {
    let v = json_arg(point)?;
    let jacobi = v.get("eta").is_some() || v.get("z").is_some() || v.get("Z").is_some();
    let out = match (dir, jacobi) {
        (Dir::Fwd, false) => siegel_point_to_value(&cayley(&disk_point_from_value(&v)?)?),
        (Dir::Fwd, true) => jacobi_point_to_value(&partial_cayley(&jacobi_disk_point_from_value(&v)?)?),
        (Dir::Inv, false) => disk_point_to_value(&cayley_inverse(&siegel_point_from_value(&v)?)?),
        (Dir::Inv, true) => jacobi_disk_point_to_value(&partial_cayley_inverse(&jacobi_point_from_value(&v)?)?),
    };
    emit(&out)?;
    Ok(true)
}

fn metric(space: MetricSpace, a: f64, b: f64, point: &str, t1: &str, t2: &str) -> Run {
    let v = json_arg(point)?;
    let (t1, t2) = (json_arg(t1)?, json_arg(t2)?);
    let value = match space {
        MetricSpace::Hn => {
            let p = siegel_point_from_value(&v)?;
            siegel_metric(&p, &tangent_from_value(&t1, p.n(), 0)?, &tangent_from_value(&t2, p.n(), 0)?, a)?
        }
        MetricSpace::Dn => {
            let p = disk_point_from_value(&v)?;
            disk_metric(&p, &tangent_from_value(&t1, p.n(), 0)?, &tangent_from_value(&t2, p.n(), 0)?, a)?
        }
        MetricSpace::Hnm => {
            let p = jacobi_point_from_value(&v)?;
            let (n, m) = (p.n(), p.m());
            jacobi_metric(&p, &tangent_from_value(&t1, n, m)?, &tangent_from_value(&t2, n, m)?, MetricParams::new(a, b)?)?
        }
        MetricSpace::Dnm => {
            let p = jacobi_disk_point_from_value(&v)?;
            let (n, m) = (p.n(), p.m());
            jacobi_disk_metric(&p, &tangent_from_value(&t1, n, m)?, &tangent_from_value(&t2, n, m)?, MetricParams::new(a, b)?)?
        }
    };
    emit(&json!({ "value": complex_to_value(finite(value, "metric value")?) }))?;
    Ok(true)
}

fn laplacian(a: f64, b: f64, field: &str, point: &str, s: &str, freq: f64) -> Run {
    let p = jacobi_point_from_value(&json_arg(point)?)?;
    if p.n() != 1 || p.m() != 1 {
        return Err(Failure::Usage("builtin fields live on H_{1,1}".into()));
    }
    let (f, ev) = builtin_field(field, parse_complex(s)?, freq)?;
    let fv = finite(f.eval(&p)?, "field value")?;
    let lap = finite(laplacian_jacobi(&f, &p, MetricParams::new(a, b)?, FDConfig::central4(1e-2))?, "Laplacian value")?;
    let mut out = json!({ "value": complex_to_value(lap), "field": complex_to_value(fv) });
    if a == 1.0 && b == 1.0 {
        out["eigenvalue"] = complex_to_value(ev);
        out["residual"] = json!(siegel_jacobi::checks::eigen_residual(lap, ev, fv));
    }
    emit(&out)?;
    Ok(true)
}

fn distance(p0: &str, p1: &str, emit_eigs: bool) -> Run {
    let (p0, p1) = (siegel_point_from_value(&json_arg(p0)?)?, siegel_point_from_value(&json_arg(p1)?)?);
    let rep = distance_report(&p0, &p1)?;
    finite(C64::new(rep.rho, 0.0), "distance")?;
    if emit_eigs {
        eprintln!("rho = {}", rep.rho);
        let mut w = csv::Writer::from_writer(io::stdout().lock());
        let io = |e: csv::Error| Failure::Usage(e.to_string());
        w.write_record(["k", "r_k"]).map_err(io)?;
        for (k, r) in rep.eigenvalues.iter().enumerate() {
            w.write_record([k.to_string(), format!("{r:e}")]).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    } else {
        emit(&json!(rep.rho))?;
    }
    Ok(true)
}

fn reduce(space: ReduceSpace, point: &str, cert_path: Option<&str>) -> Run {
    let v = json_arg(point)?;
    let result = match space {
        ReduceSpace::Hn => siegel_reduce(&siegel_point_from_value(&v)?).map(|(q, c)| (siegel_point_to_value(&q), c)),
        ReduceSpace::Hnm => jacobi_reduce(&jacobi_point_from_value(&v)?).map(|(q, c)| (jacobi_point_to_value(&q), c)),
    };
    let write_cert = |cert: &Value| -> std::result::Result<(), Failure> {
        if let Some(path) = cert_path {
            std::fs::write(path, format!("{cert}\n")).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        }
        Ok(())
    };
    match result {
        Ok((q, cert)) => {
            let cj = cert.to_json();
            write_cert(&cj)?;
            emit(&json!({ "point": q, "certificate": cj }))?;
            Ok(cert.all_checks_pass())
        }
        Err(Error::ReductionCap { iterations, certificate }) => {
            write_cert(&certificate.to_json())?;
            Err(Failure::Numeric(format!("reduction stopped at the iteration cap ({iterations})")))
        }
        Err(e) => Err(e.into()),
    }
}

struct ThetaArgs<'a> {
    mm: &'a str,
    tau: &'a str,
    phi: f64,
    lam: &'a str,
    mu: &'a str,
    kappa: &'a str,
    shift: Option<&'a str>,
    h0: Option<&'a str>,
    gen: Gamma2Gen,
    quad_points: Option<usize>,
}

fn theta(a: &ThetaArgs, law: Option<ThetaLaw>, tol_scale: f64) -> Run {
    let mm = rmat_arg(a.mm)?;
    let mut ctx = ThetaContext::new(mm.clone(), 40)?;
    if let Some(points) = a.quad_points {
        ctx = ctx.with_quadrature(Quadrature { rule: QuadratureRule::Trapezoid, points });
    }
    let x = SL2Coord::new(parse_complex(a.tau)?, a.phi)?;
    let h = HeisenbergElement::new(rmat_arg(a.lam)?, rmat_arg(a.mu)?, rmat_arg(a.kappa)?)?;
    let (m, n) = (h.m(), h.n());
    let f = GridFunction::standard_gaussian(&mm, n);
    let Some(law) = law else {
        let v = theta_sum(&f, &ctx, &x, &h)?;
        emit(&json!({ "value": complex_to_value(v) }))?;
        return Ok(true);
    };
    let (name, chk, tol): (&str, LawCheck, f64) = match law {
        ThetaLaw::Jacobi1 => {
            let tol = if a.quad_points.is_some() { 1e-3 } else { 1e-8 };
            ("jacobi1", jacobi1_check(&f, &ctx, &x, &h)?, tol)
        }
        ThetaLaw::Jacobi2 => {
            let s = match a.shift {
                Some(t) => rmat_arg(t)?,
                None => RMatrix::from_element(m, n, 1.0),
            };
            ("jacobi2", jacobi2_check(&f, &ctx, &x, &h, &s)?, 1e-8)
        }
        ThetaLaw::Jacobi3 => {
            let h0 = match a.h0 {
                Some(t) => parse_h0(t)?,
                None => {
                    let mut l0 = RMatrix::zeros(m, n);
                    l0[(0, 0)] = 1.0;
                    HeisenbergElement::new(l0, RMatrix::zeros(m, n), RMatrix::zeros(m, m))?
                }
            };
            ("jacobi3", jacobi3_check(&f, &ctx, &x, &h, &h0)?, 1e-8)
        }
        ThetaLaw::Gamma2 => {
            let gen = match a.gen {
                Gamma2Gen::S => Gamma2Generator::S,
                Gamma2Gen::Tstar => Gamma2Generator::TStar { s: RMatrix::from_element(m, n, 1.0) },
                Gamma2Gen::Translation => Gamma2Generator::Translation {
                    lambda0: RMatrix::from_element(m, n, 1.0),
                    mu0: RMatrix::from_element(m, n, -1.0),
                },
            };
            ("gamma2", gamma2_check(&f, &f, &ctx, &gen, &x, &h.lambda, &h.mu)?, 1e-8)
        }
    };
    let tol = tol * tol_scale.max(1.0);
    let row = CheckRow {
        case: name.to_string(),
        lhs: format!("{:.12e}{:+.12e}i", chk.lhs.re, chk.lhs.im),
        rhs: format!("{:.12e}{:+.12e}i", chk.rhs.re, chk.rhs.im),
        residual: chk.residual,
        tol,
        pass: chk.residual <= tol,
    };
    write_csv(std::slice::from_ref(&row), io::stdout().lock())?;
    Ok(row.pass)
}

/// `lambda0;mu0;kappa0`, each a JSON matrix.
fn parse_h0(text: &str) -> std::result::Result<HeisenbergElement, Failure> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!("--h0 expects lambda0;mu0;kappa0, got {text:?}")));
    }
    let mats: Vec<RMatrix> = parts.iter().map(|p| rmat_arg(p)).collect::<std::result::Result<_, _>>()?;
    Ok(HeisenbergElement::new(mats[0].clone(), mats[1].clone(), mats[2].clone())?)
}
