//! Cayley transform `Phi : D_n -> H_n` and partial Cayley transform
//! `Psi : D_{n,m} -> H_{n,m}` with inverses.

use crate::error::Result;
use crate::linalg::{c, inv, sym, CMatrix};
use crate::spaces::{DiskPoint, JacobiDiskPoint, JacobiPoint, SiegelPoint};

fn i_n(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `Phi(W) = i (I + W)(I - W)^{-1}`
pub fn cayley(w: &DiskPoint) -> Result<SiegelPoint> {
    let n = w.n();
    let r = (i_n(n) + w.w()) * inv(&(i_n(n) - w.w()))? * c(0.0, 1.0);
    Ok(SiegelPoint::raw(sym(&r)))
}

/// `Phi^{-1}(Omega) = (Omega - iI)(Omega + iI)^{-1}`
pub fn cayley_inverse(p: &SiegelPoint) -> Result<DiskPoint> {
    let n = p.n();
    let ii = i_n(n) * c(0.0, 1.0);
    let r = (p.omega() - &ii) * inv(&(p.omega() + &ii))?;
    Ok(DiskPoint::raw(sym(&r)))
}

/// `Psi(W, eta) = (Phi(W), 2i eta (I - W)^{-1})`
pub fn partial_cayley(p: &JacobiDiskPoint) -> Result<JacobiPoint> {
    let n = p.n();
    let k = inv(&(i_n(n) - p.w()))?;
    let omega = (i_n(n) + p.w()) * &k * c(0.0, 1.0);
    let z = p.eta() * k * c(0.0, 2.0);
    Ok(JacobiPoint::raw(sym(&omega), z))
}

/// `Psi^{-1}(Omega, Z) = ((Omega - iI)(Omega + iI)^{-1}, Z (Omega + iI)^{-1})`
pub fn partial_cayley_inverse(p: &JacobiPoint) -> Result<JacobiDiskPoint> {
    let n = p.n();
    let ii = i_n(n) * c(0.0, 1.0);
    let k = inv(&(p.omega() + &ii))?;
    let w = (p.omega() - &ii) * &k;
    Ok(JacobiDiskPoint::raw(sym(&w), p.z() * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{act_disk, act_jacobi, act_jacobi_disk, act_siegel, embed_star, random_jacobi};
    use crate::linalg::{max_abs, scalar, zeros, Tolerance};
    use crate::random::{rand_disk, rand_jacobi, rand_jacobi_disk, rand_siegel, rng};

    #[test]
    fn scalar_examples() {
        let w0 = DiskPoint::origin(2);
        assert!(max_abs(&(cayley(&w0).unwrap().omega() - i_n(2) * c(0., 1.))) < 1e-15);
        let r = 0.3;
        let o = cayley(&DiskPoint::new(scalar(c(r, 0.))).unwrap()).unwrap();
        assert!((o.omega()[(0, 0)] - c(0., (1. + r) / (1. - r))).norm() < 1e-15);
        let p = partial_cayley(&JacobiDiskPoint::new(zeros(1, 1), scalar(c(0.5, -1.0))).unwrap()).unwrap();
        assert!((p.z()[(0, 0)] - c(0., 2.) * c(0.5, -1.0)).norm() < 1e-15);
        let q = partial_cayley_inverse(&JacobiPoint::new(scalar(c(0., 2.)), scalar(c(1., 0.))).unwrap()).unwrap();
        assert!((q.w()[(0, 0)] - c(1. / 3., 0.)).norm() < 1e-15);
        assert!((q.eta()[(0, 0)] - c(0., -1. / 3.)).norm() < 1e-15);
        let o = partial_cayley_inverse(&JacobiPoint::base(2, 2)).unwrap();
        assert!(max_abs(o.w()) < 1e-15 && max_abs(o.eta()) < 1e-15);
    }

    #[test]
    fn round_trips_and_validity() {
        let mut r = rng(8);
        let t = Tolerance::default();
        for n in 1..=3 {
            for m in 1..=2 {
                let p = rand_jacobi(&mut r, n, m);
                let back = partial_cayley(&partial_cayley_inverse(&p).unwrap()).unwrap();
                assert!(max_abs(&(back.omega() - p.omega())) < 1e-12);
                assert!(max_abs(&(back.z() - p.z())) < 1e-12);
                let d = rand_jacobi_disk(&mut r, n, m, 0.9);
                assert!(partial_cayley(&d).unwrap().validate(t).unwrap());
                let s = rand_siegel(&mut r, n);
                let back = cayley(&cayley_inverse(&s).unwrap()).unwrap();
                assert!(max_abs(&(back.omega() - s.omega())) < 1e-12);
            }
        }
    }

    #[test]
    fn compatibility_with_actions() {
        let mut r = rng(9);
        for _ in 0..10 {
            let g = random_jacobi(&mut r, 2, 2);
            let gs = embed_star(&g);
            let d = rand_jacobi_disk(&mut r, 2, 2, 0.8);
            let lhs = act_jacobi(&g, &partial_cayley(&d).unwrap()).unwrap();
            let rhs = partial_cayley(&act_jacobi_disk(&gs, &d).unwrap()).unwrap();
            assert!(max_abs(&(lhs.z() - rhs.z())) < 1e-9 * (1.0 + max_abs(lhs.z())));
            let w = rand_disk(&mut r, 2, 0.8);
            let lhs = act_siegel(&g.sp, &cayley(&w).unwrap()).unwrap();
            let rhs = cayley(&act_disk(&gs, &w).unwrap()).unwrap();
            assert!(max_abs(&(lhs.omega() - rhs.omega())) < 1e-9 * (1.0 + max_abs(lhs.omega())));
        }
    }
}
