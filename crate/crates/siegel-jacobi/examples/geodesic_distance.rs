//! Symplectic distance on H_n from cross-ratio eigenvalues, checked against
//! the series form and along a unit-speed geodesic.

use siegel_jacobi::geodesics::{distance_report, distance_squared_series, siegel_distance, special_geodesic};
use siegel_jacobi::linalg::{c, scalar};
use siegel_jacobi::random::{rand_siegel, rng};
use siegel_jacobi::spaces::SiegelPoint;

fn main() -> siegel_jacobi::Result<()> {
    let i = SiegelPoint::new(scalar(c(0.0, 1.0)))?;
    let two_i = SiegelPoint::new(scalar(c(0.0, 2.0)))?;
    println!("rho(i, 2i) = {:.12} (log 2 = {:.12})", siegel_distance(&i, &two_i)?, 2f64.ln());

    let mut r = rng(6);
    let (p0, p1) = (rand_siegel(&mut r, 3), rand_siegel(&mut r, 3));
    let rep = distance_report(&p0, &p1)?;
    println!("cross-ratio eigenvalues {:?}", rep.eigenvalues);
    println!("rho^2 = {:.12}, series = {:.12}", rep.rho * rep.rho, distance_squared_series(&p0, &p1)?);

    let a: Vec<f64> = [0.6f64, -0.8].iter().map(|x| x.exp()).collect();
    let d = siegel_distance(&special_geodesic(&a, -0.5)?, &special_geodesic(&a, 1.25)?)?;
    println!("rho(alpha(-0.5), alpha(1.25)) = {d:.12}");
    Ok(())
}
