//! Theta sums of a Gaussian and their transformation laws under the
//! modular generators.

use siegel_jacobi::groups::HeisenbergElement;
use siegel_jacobi::linalg::{c, RMatrix};
use siegel_jacobi::theta::{jacobi1_check, jacobi2_check, jacobi3_check, theta_sum, GridFunction, SL2Coord, ThetaContext};

fn r1(x: f64) -> RMatrix {
    RMatrix::from_element(1, 1, x)
}

fn main() -> siegel_jacobi::Result<()> {
    let ctx = ThetaContext::new(r1(1.0), 40)?;
    let f = GridFunction::standard_gaussian(ctx.mmat(), 1);
    let base = theta_sum(&f, &ctx, &SL2Coord::new(c(0.0, 1.0), 0.0)?, &HeisenbergElement::identity(1, 1))?;
    println!("Theta(i, 0; 0, 0, 0) = {:.15}", base.re);

    let x = SL2Coord::new(c(0.3, 1.1), 1.0)?;
    let h = HeisenbergElement::new(r1(0.2), r1(-0.4), r1(0.1))?;
    let j1 = jacobi1_check(&f, &ctx, &x, &h)?;
    let j2 = jacobi2_check(&f, &ctx, &x, &h, &r1(1.0))?;
    let h0 = HeisenbergElement::new(r1(1.0), r1(-2.0), r1(3.0))?;
    let j3 = jacobi3_check(&f, &ctx, &x, &h, &h0)?;
    for (name, chk) in [("first", j1), ("second", j2), ("third", j3)] {
        println!("{name:>6} law: {:.12} vs {:.12}, residual {:.1e}", chk.lhs, chk.rhs, chk.residual);
    }
    Ok(())
}
