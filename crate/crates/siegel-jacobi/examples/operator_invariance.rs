//! Check that the Laplacian on H_{n,m} and the disk operators commute with
//! the group action on a random smooth field.

use siegel_jacobi::diffops::{
    disk_operator, laplacian_jacobi, random_eta_poly_field, random_test_field, rel_residual, DiskOperator, FDConfig,
};
use siegel_jacobi::groups::{act_jacobi, act_jacobi_disk, embed_star, random_jacobi};
use siegel_jacobi::metrics::MetricParams;
use siegel_jacobi::random::{rand_jacobi, rand_jacobi_disk, rng};
use siegel_jacobi::spaces::{JacobiDiskPoint, JacobiPoint};

fn main() -> siegel_jacobi::Result<()> {
    let mut r = rng(5);
    let cfg = FDConfig::central4(1e-2);
    let p = rand_jacobi(&mut r, 2, 1);
    let g = random_jacobi(&mut r, 2, 1);
    let f = random_test_field::<JacobiPoint>(&mut r, 5);
    let g2 = g.clone();
    let fg = f.compose(move |q: &JacobiPoint| act_jacobi(&g2, q));
    let params = MetricParams::new(1.3, 0.7)?;
    let lhs = laplacian_jacobi(&fg, &p, params, cfg)?;
    let rhs = laplacian_jacobi(&f, &act_jacobi(&g, &p)?, params, cfg)?;
    println!("Laplacian: {lhs:.8} vs {rhs:.8} (residual {:.1e})", rel_residual(lhs, rhs));

    let d = rand_jacobi_disk(&mut r, 1, 2, 0.5);
    let s = embed_star(&random_jacobi(&mut r, 1, 2));
    let f = random_eta_poly_field(&mut r, 1, 2);
    let s2 = s.clone();
    let fs = f.compose(move |q: &JacobiDiskPoint| act_jacobi_disk(&s2, q));
    let sd = act_jacobi_disk(&s, &d)?;
    for op in [DiskOperator::S1, DiskOperator::S2, DiskOperator::J(0, 1)] {
        let (a, b) = (disk_operator(&fs, &d, op, cfg)?, disk_operator(&f, &sd, op, cfg)?);
        println!("{op:?}: residual {:.1e}", rel_residual(a, b));
    }
    Ok(())
}
