//! Fourier series of Jacobi forms: the block-determinant gate, the
//! M-operator, the slash action and the degree-lowering limit operator.

use siegel_jacobi::groups::random_jacobi;
use siegel_jacobi::jacobiforms::{
    apply_m_operator, embed_for_limit, fourier_eval, is_singular, series_field, siegel_jacobi_operator, slash, synthetic_series,
    FourierSeries, FourierTerm, JacobiFormIndex,
};
use siegel_jacobi::linalg::{c, scalar, RMatrix};
use siegel_jacobi::random::{rand_jacobi, rng};
use siegel_jacobi::spaces::JacobiPoint;

fn main() -> siegel_jacobi::Result<()> {
    let p = JacobiPoint::new(scalar(c(0.1, 0.4)), siegel_jacobi::CMatrix::from_row_slice(2, 1, &[c(0.2, 0.1), c(-0.3, 0.05)]))?;
    for singular in [true, false] {
        let s = synthetic_series(singular, 20)?;
        println!("singular gate = {:5}, M f(p) = {:.3e}", is_singular(&s), apply_m_operator(&s, &p)?);
    }
    println!("series JSON: {}", synthetic_series(true, 2)?.to_json());

    let s = synthetic_series(false, 8)?;
    let f = series_field(&s);
    let g = random_jacobi(&mut rng(8), 1, 2);
    let q = rand_jacobi(&mut rng(9), 1, 2);
    println!("(f|g)(q) = {:.6}", slash(&f, s.index(), &g).eval(&q)?);

    let diag = |a: f64, b: f64| RMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]);
    let two = FourierSeries::new(
        1,
        JacobiFormIndex::new(RMatrix::identity(1, 1), 2)?,
        2,
        vec![
            FourierTerm { t: diag(2.0, 0.0), r: RMatrix::from_row_slice(2, 1, &[1.0, 0.0]), c: c(1.0, 0.0) },
            FourierTerm { t: diag(1.0, 1.0), r: RMatrix::from_row_slice(2, 1, &[0.0, 1.0]), c: c(2.0, 0.0) },
        ],
    )?;
    let img = siegel_jacobi_operator(&two, 1)?;
    let x = rand_jacobi(&mut rng(10), 1, 1);
    println!("limit t=50: {:.10}, image: {:.10}", fourier_eval(&two, &embed_for_limit(&x, 2, 50.0)?)?, fourier_eval(&img, &x)?);
    Ok(())
}
