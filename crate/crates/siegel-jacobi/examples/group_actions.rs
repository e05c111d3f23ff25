//! Act on the Siegel-Jacobi space with a Jacobi group element built from a
//! generator word, and check that composing elements composes the actions.

use siegel_jacobi::groups::{act_jacobi, jacobi_multiply, parse_word, random_jacobi, Action};
use siegel_jacobi::linalg::max_abs;
use siegel_jacobi::random::{rand_jacobi, rng};

fn main() -> siegel_jacobi::Result<()> {
    let g = parse_word("t([[1,0.5],[0.5,2]]);g([[1,1],[0,1]]);s;h([[0.5,-1]],[[2,0]],[[0]])", 2, 1)?;
    let p = rand_jacobi(&mut rng(1), 2, 1);
    let q = g.act(&p)?;
    println!("Omega  = {:.4}", p.omega());
    println!("g.Omega = {:.4}", q.omega());
    println!("g.Z     = {:.4}", q.z());

    let mut r = rng(2);
    let (g1, g2) = (random_jacobi(&mut r, 2, 1), random_jacobi(&mut r, 2, 1));
    let lhs = act_jacobi(&jacobi_multiply(&g1, &g2)?, &p)?;
    let rhs = act_jacobi(&g1, &act_jacobi(&g2, &p)?)?;
    println!("|(g1 g2).p - g1.(g2.p)| = {:.2e}", max_abs(&(lhs.z() - rhs.z())).max(max_abs(&(lhs.omega() - rhs.omega()))));
    Ok(())
}
