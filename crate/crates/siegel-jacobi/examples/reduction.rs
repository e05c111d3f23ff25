//! Reduce points of H_2 and H_{1,1} into their fundamental domains and print
//! the certificates.

use siegel_jacobi::groups::act_siegel;
use siegel_jacobi::linalg::{c, scalar};
use siegel_jacobi::random::{rand_siegel, rng};
use siegel_jacobi::reduction::{jacobi_reduce, random_modular_word, siegel_reduce};
use siegel_jacobi::spaces::JacobiPoint;

fn main() -> siegel_jacobi::Result<()> {
    let mut r = rng(7);
    let p = rand_siegel(&mut r, 2);
    let moved = act_siegel(&random_modular_word(&mut r, 2, 5), &p)?;
    let (q, cert) = siegel_reduce(&moved)?;
    println!("input   {:.4}", moved.omega());
    println!("reduced {:.4}", q.omega());
    println!("certificate {}", serde_json::to_string_pretty(&cert.to_json()).unwrap_or_default());
    println!("re-verified: {}", cert.verify_siegel(&moved, &q, 1e-9)?);

    let jp = JacobiPoint::new(scalar(c(0.7, 0.3)), scalar(c(1.5, 2.5)))?;
    let (jq, jc) = jacobi_reduce(&jp)?;
    println!(
        "Jacobi reduction: Omega = {:.6}, Z = {:.6}, checks pass: {}",
        jq.omega()[(0, 0)],
        jq.z()[(0, 0)],
        jc.all_checks_pass()
    );
    Ok(())
}
