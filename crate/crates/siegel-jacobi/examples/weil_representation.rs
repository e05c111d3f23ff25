//! The Schrodinger-Weil representation on Gaussians: generator actions, the
//! intertwining relation with Heisenberg translations, the Iwasawa
//! coordinates and the metaplectic cocycle.

use siegel_jacobi::checks::{cocycle_generators, test_gaussian, weil_ratio};
use siegel_jacobi::groups::HeisenbergElement;
use siegel_jacobi::linalg::{c, RMatrix};
use siegel_jacobi::theta::{cocycle, iwasawa, iwasawa_compose, stone_von_neumann_check, SL2Coord, ThetaContext, WeilGenerator};

fn main() -> siegel_jacobi::Result<()> {
    let ctx = ThetaContext::new(RMatrix::from_element(1, 1, 1.0), 40)?;
    let f = test_gaussian();
    let h = HeisenbergElement::new(
        RMatrix::from_element(1, 1, 0.4),
        RMatrix::from_element(1, 1, -0.3),
        RMatrix::from_element(1, 1, 0.2),
    )?;
    for (name, gen) in [
        ("translation", WeilGenerator::T { b: RMatrix::from_element(1, 1, 0.7), t: c(1.0, 0.0) }),
        ("dilation", WeilGenerator::G { alpha: RMatrix::from_element(1, 1, -1.5), t: c(1.0, 0.0) }),
        ("inversion", WeilGenerator::Sigma { t: c(1.0, 0.0) }),
    ] {
        println!("intertwining residual for {name}: {:.1e}", stone_von_neumann_check(&gen, &h, &f, &ctx)?);
    }

    let g1 = SL2Coord::new(c(0.3, 0.7), 1.1)?;
    let g2 = SL2Coord::new(c(-0.4, 1.9), 2.3)?;
    let composed = iwasawa_compose(&g1, &g2)?;
    let direct = iwasawa(&(g1.matrix() * g2.matrix()))?;
    println!(
        "composition: tau {:.12} vs {:.12}, phi {:.12} vs {:.12}",
        composed.tau(),
        direct.tau(),
        composed.phi(),
        direct.phi()
    );

    let gens = cocycle_generators();
    println!("cocycle c(S, lower unipotent) = {:.6}", cocycle(&gens[0], &gens[4], 1, 1)?);
    println!("measured Weil ratio           = {:.6}", weil_ratio(&gens[0], &gens[4], &ctx, &f)?);
    Ok(())
}
