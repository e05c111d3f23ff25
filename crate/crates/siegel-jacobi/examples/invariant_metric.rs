//! Evaluate the invariant metric on H_{n,m}, print its real Gram matrix at a
//! point of H_{1,1}, and compare it before and after a group action.

use siegel_jacobi::groups::random_jacobi;
use siegel_jacobi::linalg::{c, scalar};
use siegel_jacobi::metrics::{gram_matrix, jacobi_metric, MetricParams, PushMode, Pushforward};
use siegel_jacobi::random::{rand_cmat, rand_csym, rand_jacobi, rng};
use siegel_jacobi::spaces::{JacobiPoint, TangentVector};

fn main() -> siegel_jacobi::Result<()> {
    let params = MetricParams::new(1.0, 1.0)?;
    let p = JacobiPoint::new(scalar(c(0.2, 1.3)), scalar(c(0.1, 0.4)))?;
    let g = gram_matrix(&p, |a, b| jacobi_metric(&p, a, b, params))?;
    println!("Gram matrix in (x, y, u, v):{g:.5}");

    let mut r = rng(4);
    let params = MetricParams::new(1.5, 0.5)?;
    let p = rand_jacobi(&mut r, 2, 1);
    let t = TangentVector::new(rand_csym(&mut r, 2, 1.0), rand_cmat(&mut r, 1, 2, 1.0))?;
    let g = random_jacobi(&mut r, 2, 1);
    let q = siegel_jacobi::groups::act_jacobi(&g, &p)?;
    let gt = g.pushforward(&p, &t, PushMode::Fd)?;
    println!("h_p(t, t)         = {:.10}", jacobi_metric(&p, &t, &t, params)?);
    println!("h_gp(g_* t, g_* t) = {:.10}", jacobi_metric(&q, &gt, &gt, params)?);
    Ok(())
}
