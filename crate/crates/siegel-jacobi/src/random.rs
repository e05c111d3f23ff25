//! Seeded samplers for matrices and points. All draws go through
//! `ChaCha8Rng` so a seed pins the output on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, eye, CMatrix, RMatrix};
use crate::spaces::{DiskPoint, JacobiDiskPoint, JacobiPoint, SiegelPoint};

pub type SjRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SjRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut SjRng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

/// Entries uniform in `[-s, s]`.
pub fn rand_rmat(r: &mut SjRng, rows: usize, cols: usize, s: f64) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| r.random_range(-s..=s))
}

pub fn rand_cmat(r: &mut SjRng, rows: usize, cols: usize, s: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(r.random_range(-s..=s), r.random_range(-s..=s)))
}

pub fn rand_real_sym(r: &mut SjRng, n: usize, s: f64) -> RMatrix {
    let a = rand_rmat(r, n, n, s);
    (&a + a.transpose()) * 0.5
}

pub fn rand_csym(r: &mut SjRng, n: usize, s: f64) -> CMatrix {
    let a = rand_cmat(r, n, n, s);
    (&a + a.transpose()) * c(0.5, 0.0)
}

/// Real symmetric positive definite with spectrum roughly in `[lo, lo + n s^2]`.
pub fn rand_pd(r: &mut SjRng, n: usize, s: f64, lo: f64) -> RMatrix {
    let a = rand_rmat(r, n, n, s);
    &a * a.transpose() + RMatrix::identity(n, n) * lo
}

pub fn rand_siegel(r: &mut SjRng, n: usize) -> SiegelPoint {
    let x = rand_real_sym(r, n, 1.0);
    let y = rand_pd(r, n, 0.6, 0.5);
    SiegelPoint::from_xy(&x, &y).expect("sampled point is valid")
}

pub fn rand_jacobi(r: &mut SjRng, n: usize, m: usize) -> JacobiPoint {
    let o = rand_siegel(r, n);
    let z = rand_cmat(r, m, n, 1.0);
    JacobiPoint::new(o.omega().clone(), z).expect("sampled point is valid")
}

/// A disk point with operator norm at most `radius < 1`.
pub fn rand_disk(r: &mut SjRng, n: usize, radius: f64) -> DiskPoint {
    let w = rand_csym(r, n, 1.0);
    let s = w.clone().svd(false, false).singular_values.max().max(1e-12);
    let t = r.random_range(0.05..radius);
    DiskPoint::new(w * c(t / s, 0.0)).expect("sampled point is valid")
}

pub fn rand_jacobi_disk(r: &mut SjRng, n: usize, m: usize, radius: f64) -> JacobiDiskPoint {
    let w = rand_disk(r, n, radius);
    let eta = rand_cmat(r, m, n, 1.0);
    JacobiDiskPoint::new(w.w().clone(), eta).expect("sampled point is valid")
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn rand_unitary(r: &mut SjRng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let a: f64 = r.sample(StandardNormal);
        let b: f64 = r.sample(StandardNormal);
        c(a, b)
    });
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut ph = eye(n);
    for i in 0..n {
        let d = rr[(i, i)];
        ph[(i, i)] = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
    }
    q * ph
}

/// Real orthogonal matrix (same construction over R).
pub fn rand_orthogonal(r: &mut SjRng, n: usize) -> RMatrix {
    let g = RMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut s = RMatrix::identity(n, n);
    for i in 0..n {
        s[(i, i)] = if rr[(i, i)] < 0.0 { -1.0 } else { 1.0 };
    }
    q * s
}
