//! Move points between the bounded disk model and the Siegel-Jacobi space
//! with the partial Cayley transform, and check that it intertwines the two
//! group actions.

use siegel_jacobi::cayley::{partial_cayley, partial_cayley_inverse};
use siegel_jacobi::groups::{act_jacobi, act_jacobi_disk, embed_star, random_jacobi};
use siegel_jacobi::linalg::max_abs;
use siegel_jacobi::random::{rand_jacobi_disk, rng};

fn main() -> siegel_jacobi::Result<()> {
    let mut r = rng(3);
    let d = rand_jacobi_disk(&mut r, 2, 2, 0.8);
    let p = partial_cayley(&d)?;
    println!("W     = {:.4}", d.w());
    println!("Omega = {:.4}", p.omega());
    let back = partial_cayley_inverse(&p)?;
    println!("round trip error = {:.2e}", max_abs(&(back.eta() - d.eta())));

    let g = random_jacobi(&mut r, 2, 2);
    let lhs = act_jacobi(&g, &p)?;
    let rhs = partial_cayley(&act_jacobi_disk(&embed_star(&g), &d)?)?;
    println!("intertwining error = {:.2e}", max_abs(&(lhs.z() - rhs.z())));
    Ok(())
}
