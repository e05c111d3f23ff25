//! Symplectic geodesic distance on `H_n` via cross-ratio eigenvalues, and
//! the special unit-speed geodesics through `iI_n`.

use crate::cayley::cayley_inverse;
use crate::error::{Error, Result};
use crate::groups::{act_siegel, SymplecticElement};
use crate::linalg::{c, eigh, inv, sqrt_pd, CMatrix, RMatrix};
use crate::spaces::SiegelPoint;

/// Slack allowed on the spectrum of `R` outside `[0, 1)`.
const SPECTRUM_TOL: f64 = 1e-9;

/// `R(Omega0, Omega1) = (O0 - O1)(O0 - O1~)^-1 (O0~ - O1~)(O0~ - O1)^-1`
pub fn cross_ratio(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<CMatrix> {
    same_degree(p0, p1)?;
    let (a, b) = (p0.omega(), p1.omega());
    let (ab, bb) = (a.conjugate(), b.conjugate());
    if (a - b).iter().all(|z| z.norm() == 0.0) {
        return Ok(CMatrix::zeros(p0.n(), p0.n()));
    }
    Ok((a - b) * inv(&(a - &bb))? * (&ab - &bb) * inv(&(&ab - b))?)
}

fn same_degree(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<()> {
    if p0.n() != p1.n() {
        return Err(crate::error::dim(format!("points of degree {} and {}", p0.n(), p1.n())));
    }
    Ok(())
}

/// Symplectic map sending `p1` to `iI_n`: `Omega -> Y1^{-1/2} (Omega - X1) Y1^{-1/2}`.
pub fn to_base(p1: &SiegelPoint) -> Result<SymplecticElement> {
    let s = sqrt_pd(&p1.y())?;
    let si = crate::linalg::inv_r(&s)?;
    SymplecticElement::g(&si)?.mul(&SymplecticElement::t(&(-p1.x()))?)
}

/// Eigenvalues `r_k` of `R(Omega0, Omega1)`, ascending, computed on the
/// Hermitian matrix `W W^H` (`W` the disk image of `Omega0` after moving
/// `Omega1` to `iI_n`), to which `R` is similar.
pub fn cross_ratio_eigenvalues(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<Vec<f64>> {
    same_degree(p0, p1)?;
    let m = to_base(p1)?;
    let w = cayley_inverse(&act_siegel(&m, p0)?)?;
    let h = w.w() * w.w().adjoint();
    let (vals, _) = eigh(&h)?;
    let mut out = Vec::with_capacity(vals.len());
    for r in vals {
        if !(-SPECTRUM_TOL..1.0).contains(&r) || r > 1.0 - 1e-15 {
            return Err(Error::Numeric(format!("cross-ratio eigenvalue {r} outside [0, 1)")));
        }
        out.push(r.max(0.0));
    }
    Ok(out)
}

/// `log((1 + sqrt r)/(1 - sqrt r)) = 2 artanh(sqrt r)`
fn radial(r: f64) -> f64 {
    2.0 * r.sqrt().atanh()
}

/// Geodesic distance for the `A = 1` metric: `rho^2 = sum_k (log((1+sqrt r_k)/(1-sqrt r_k)))^2`.
pub fn siegel_distance(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<f64> {
    Ok(cross_ratio_eigenvalues(p0, p1)?.iter().map(|&r| radial(r).powi(2)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub rho: f64,
    pub eigenvalues: Vec<f64>,
}

pub fn distance_report(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<DistanceReport> {
    let eigenvalues = cross_ratio_eigenvalues(p0, p1)?;
    let rho = eigenvalues.iter().map(|&r| radial(r).powi(2)).sum::<f64>().sqrt();
    Ok(DistanceReport { rho, eigenvalues })
}

/// `rho^2 = sigma(4 R (sum_k R^k/(2k+1))^2)` with the matrix `R` itself,
/// truncated once the tail bound drops below `1e-14`.
pub fn distance_squared_series(p0: &SiegelPoint, p1: &SiegelPoint) -> Result<f64> {
    let r = cross_ratio(p0, p1)?;
    let rmax = cross_ratio_eigenvalues(p0, p1)?.last().copied().unwrap_or(0.0);
    let n = r.nrows();
    let mut sum = CMatrix::identity(n, n);
    let mut pow = CMatrix::identity(n, n);
    let cap = 2_000_000usize;
    let mut k = 0usize;
    loop {
        k += 1;
        if k > cap {
            return Err(Error::Convergence { iterations: cap, msg: "distance series did not converge".into() });
        }
        pow = &pow * &r;
        sum += &pow / c((2 * k + 1) as f64, 0.0);
        let tail = rmax.powi(k as i32 + 1) / ((2 * k + 3) as f64 * (1.0 - rmax));
        if tail < 1e-14 || rmax == 0.0 {
            break;
        }
    }
    Ok((&r * &sum * &sum).trace().re * 4.0)
}

/// `alpha(t) = i diag(a_1^t, ..., a_n^t)` with `sum (log a_k)^2 = 1`.
pub fn special_geodesic(a: &[f64], t: f64) -> Result<SiegelPoint> {
    if a.is_empty() || a.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Parameter("geodesic parameters must be positive".into()));
    }
    let norm: f64 = a.iter().map(|x| x.ln().powi(2)).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Parameter(format!("sum (log a_k)^2 = {norm}, expected 1")));
    }
    let y = RMatrix::from_diagonal(&nalgebra::DVector::from_iterator(a.len(), a.iter().map(|x| x.powf(t))));
    SiegelPoint::from_xy(&RMatrix::zeros(a.len(), a.len()), &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::random_symplectic;
    use crate::linalg::scalar;
    use crate::random::{rand_siegel, rng, uniform};

    fn s1(z: crate::linalg::C64) -> SiegelPoint {
        SiegelPoint::new(scalar(z)).unwrap()
    }

    #[test]
    fn scalar_cases() {
        let i = s1(c(0.0, 1.0));
        assert_eq!(siegel_distance(&i, &i).unwrap(), 0.0);
        assert!(crate::linalg::max_abs(&cross_ratio(&i, &i).unwrap()) == 0.0);
        for a in [2.0, 5.0, 10.0, 0.3] {
            let p = s1(c(0.0, a));
            let r = cross_ratio(&i, &p).unwrap()[(0, 0)];
            let want = ((1.0 - a) / (1.0 + a)).powi(2);
            assert!((r - c(want, 0.0)).norm() < 1e-15);
            assert!((siegel_distance(&i, &p).unwrap() - a.ln().abs()).abs() < 1e-12);
        }
        // one-dimensional oracle 2 artanh |(w0 - w1)/(w0 - conj w1)|
        let mut r = rng(1);
        for _ in 0..20 {
            let a = c(uniform(&mut r, -2.0, 2.0), uniform(&mut r, 0.1, 3.0));
            let b = c(uniform(&mut r, -2.0, 2.0), uniform(&mut r, 0.1, 3.0));
            let want = 2.0 * ((a - b) / (a - b.conj())).norm().atanh();
            assert!((siegel_distance(&s1(a), &s1(b)).unwrap() - want).abs() < 1e-10 * (1.0 + want));
        }
    }

    #[test]
    fn hermitian_route_matches_direct_spectrum() {
        let mut r = rng(2);
        for n in 1..=3 {
            let (p0, p1) = (rand_siegel(&mut r, n), rand_siegel(&mut r, n));
            let rm = cross_ratio(&p0, &p1).unwrap();
            let direct = rm.clone().schur().eigenvalues().unwrap();
            let mut d: Vec<f64> = direct
                .iter()
                .map(|z| {
                    assert!(z.im.abs() < 1e-9);
                    z.re
                })
                .collect();
            d.sort_by(f64::total_cmp);
            let e = cross_ratio_eigenvalues(&p0, &p1).unwrap();
            for (x, y) in d.iter().zip(&e) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invariance_symmetry_series() {
        let mut r = rng(3);
        for n in 1..=3 {
            for _ in 0..5 {
                let (p0, p1) = (rand_siegel(&mut r, n), rand_siegel(&mut r, n));
                let m = random_symplectic(&mut r, n);
                let d = siegel_distance(&p0, &p1).unwrap();
                let e0 = cross_ratio_eigenvalues(&p0, &p1).unwrap();
                let (q0, q1) = (act_siegel(&m, &p0).unwrap(), act_siegel(&m, &p1).unwrap());
                let e1 = cross_ratio_eigenvalues(&q0, &q1).unwrap();
                for (x, y) in e0.iter().zip(&e1) {
                    assert!((x - y).abs() < 1e-9);
                }
                assert!((siegel_distance(&q0, &q1).unwrap() - d).abs() < 1e-8);
                assert!((siegel_distance(&p1, &p0).unwrap() - d).abs() < 1e-10);
                let s = distance_squared_series(&p0, &p1).unwrap();
                assert!((s - d * d).abs() < 1e-12 * (1.0 + d * d), "{s} {}", d * d);
            }
        }
    }

    #[test]
    fn geodesic_is_unit_speed() {
        let a = [1.0f64.exp()];
        let p = special_geodesic(&a, 0.7).unwrap();
        assert!((p.omega()[(0, 0)] - c(0.0, 0.7f64.exp())).norm() < 1e-14);
        let l = [0.6f64, -0.8];
        let a: Vec<f64> = l.iter().map(|x| x.exp()).collect();
        let o = special_geodesic(&a, 0.0).unwrap();
        assert!(crate::linalg::max_abs(&(o.omega() - CMatrix::identity(2, 2) * c(0.0, 1.0))) < 1e-15);
        for (s, t) in [(0.0, 1.0), (-0.4, 1.3), (2.0, -1.5)] {
            let d = siegel_distance(&special_geodesic(&a, s).unwrap(), &special_geodesic(&a, t).unwrap()).unwrap();
            assert!((d - (s - t).abs()).abs() < 1e-8);
        }
        assert!(special_geodesic(&[2.0, 2.0], 0.0).is_err());
        assert!(special_geodesic(&[-1.0], 0.0).is_err());
    }
}
