//! Continuation of k_{1/2} beyond the disc through an invariant subspace.

use num_complex::Complex64;
use shiftlab::resolvent::{continue_f, decompose};
use shiftlab::subspaces::{build_subspace, BuildMode};
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let model = make_space(WeightKind::Hardy, 1, 256, 1e-10)?;
    let f = model.szego(0.5)?;

    // Inside the disc the continuation is the function itself.
    for lambda in [Complex64::new(0.25, 0.0), Complex64::new(-0.3, 0.6)] {
        let r = continue_f(&model, &f, lambda, None)?;
        println!("lambda = {lambda:.2}: continued {:.12}, f(lambda) = {:.12}", r.value[0], 1.0 / (1.0 - lambda * 0.5));
    }

    let d = decompose(&model, &f, Complex64::new(0.4, 0.0))?;
    println!("decomposition at 0.4: h = {:.6}, residual {:.1e}", d.h.coeff(0)[0], d.residual);

    // Outside, the subspace spanned by k_{1/2} carries it to the pole at 2.
    let sub = build_subspace(&model, std::slice::from_ref(&f), BuildMode::ExactSpan)?;
    for lambda in [1.6, 3.0, -4.0] {
        let lambda = Complex64::new(lambda, 0.0);
        let r = continue_f(&model, &f, lambda, Some(&sub))?;
        println!(
            "lambda = {:>5.2}: continued {:.10}  closed form {:.10}  residual {:.1e}",
            lambda.re,
            r.value[0].re,
            (1.0 / (1.0 - lambda * 0.5)).re,
            r.residual
        );
    }
    match continue_f(&model, &f, Complex64::new(2.0, 0.0), Some(&sub)) {
        Ok(r) => println!("lambda = 2 unexpectedly returned {:?}", r.value),
        Err(e) => println!("lambda = 2: {e}"),
    }
    Ok(())
}
