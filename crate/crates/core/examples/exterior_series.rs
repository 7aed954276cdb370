//! Laurent coefficients P_E T^n h of a restriction matrix and reciprocal
//! eigenvalue witnesses for L.

use nalgebra::DVector;
use num_complex::Complex64;
use shiftlab::resolvent::exterior_series;
use shiftlab::spectra::reciprocal_spectrum_check;
use shiftlab::subspaces::{build_subspace, BuildMode};
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let model = make_space(WeightKind::Hardy, 1, 256, 1e-10)?;
    let sub = build_subspace(&model, &[model.szego(0.5)?, model.szego(0.25)?], BuildMode::ExactSpan)?;
    let t = sub.restriction();
    let h = DVector::from_element(t.nrows(), Complex64::new(1.0, 0.0));
    let series = exterior_series(t, &h, 1, 24)?;
    for (n, c) in series.coeffs.iter().enumerate().take(6) {
        println!("n = {:>2}: {:.6e}", n + 1, c[0].norm());
    }
    println!("decay ratio ~ {:.6} (largest eigenvalue modulus 0.5)", series.decay_estimate().unwrap_or(f64::NAN));

    let samples = [2.0, 1.5, 10.0].map(|r| Complex64::new(r, 0.0));
    for e in reciprocal_spectrum_check(&model, &samples)? {
        println!(
            "lambda = {:>5}: residual {:.1e} (tail {:.1e}) indicators {:?} passed {}",
            e.lambda.re, e.witness_residual, e.tail_bound, e.indicators, e.passed
        );
    }
    Ok(())
}
