//! Apply the invariant Laplacian of H_{1,1} to the builtin eigenfunctions and
//! compare with their eigenvalues.

use siegel_jacobi::diffops::{builtin_field, laplacian_jacobi, FDConfig, BUILTIN_FIELDS};
use siegel_jacobi::linalg::{c, scalar};
use siegel_jacobi::metrics::MetricParams;
use siegel_jacobi::spaces::JacobiPoint;

fn main() -> siegel_jacobi::Result<()> {
    let p = JacobiPoint::new(scalar(c(0.3, 1.4)), scalar(c(0.2, -0.7)))?;
    let s = c(1.7, 0.0);
    println!("{:>7} {:>26} {:>26}", "field", "Delta f", "lambda f");
    for id in BUILTIN_FIELDS {
        let (f, ev) = builtin_field(id, s, 0.8)?;
        let lap = laplacian_jacobi(&f, &p, MetricParams::default(), FDConfig::central4(1e-2))?;
        let want = ev * f.eval(&p)?;
        println!("{id:>7} {:>12.8} {:>+12.8}i {:>12.8} {:>+12.8}i", lap.re, lap.im, want.re, want.im);
    }
    Ok(())
}
