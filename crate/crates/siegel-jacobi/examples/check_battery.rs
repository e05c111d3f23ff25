//! Run one of the invariant batteries in-process and print its CSV report.

fn main() -> siegel_jacobi::Result<()> {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "distance".to_string());
    let rows = siegel_jacobi::checks::run_suite(&suite, 7, 1.0)?;
    siegel_jacobi::checks::write_csv(&rows, std::io::stdout().lock())?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{suite}: {} cases, {failed} failed", rows.len());
    Ok(())
}
