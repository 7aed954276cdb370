//! Finite invariant subspaces: restriction spectra, membership and the
//! point-spectrum predicate.

use num_complex::Complex64;
use shiftlab::subspaces::{
    arr_disc_check, build_subspace, membership_test, point_spectrum_restriction, restriction_spectrum, BuildMode,
};
use shiftlab::{make_space, CoeffFunction, WeightKind};

fn main() -> shiftlab::Result<()> {
    let model = make_space(WeightKind::Bergman, 1, 256, 1e-10)?;
    let gens = vec![model.szego(0.3)?, model.szego(-0.6)?];
    let sub = build_subspace(&model, &gens, BuildMode::ExactSpan)?;
    println!(
        "dim {}  closure residual {:.1e}  gram condition {:.2}",
        sub.dim(),
        sub.closure_residual(),
        sub.gram_condition()
    );
    println!("spectrum of the restriction: {:?}", restriction_spectrum(&sub));

    for a in [0.3, 0.5] {
        let m = membership_test(&model, &sub, &model.szego(a)?)?;
        println!("k_{a} in M: {} (residual {:.1e})", m.is_member, m.residual);
    }
    let one = vec![Complex64::new(1.0, 0.0)];
    for lambda in [1.0 / 0.3, 2.0, -1.0 / 0.6] {
        let v = point_spectrum_restriction(&model, &sub, Complex64::new(lambda, 0.0), std::slice::from_ref(&one))?;
        println!(
            "1/lambda = {:>6.3} eigenvalue: membership {} / matrix {} (agree {})",
            1.0 / lambda,
            v.by_membership,
            v.by_eigenvalue,
            v.agree()
        );
    }

    // The orbit closure of a polynomial is the polynomials of lower degree.
    let p = CoeffFunction::scalar(vec![Complex64::new(1.0, 0.0), Complex64::ZERO, Complex64::new(2.0, 0.0)]);
    let orbit = build_subspace(&model, &[p], BuildMode::OrbitClosure(6))?;
    println!("orbit closure of 1 + 2z^2: dim {}", orbit.dim());

    let samples: Vec<Complex64> = [0.0, 0.3, -0.6, 0.9].iter().map(|&a| Complex64::new(a, 0.0)).collect();
    for e in arr_disc_check(&model, &sub, &samples)? {
        println!("a = {:>5.2}: in spectrum {:<5} member {:<5} agree {}", e.a.re, e.in_spectrum, e.is_member, e.agree);
    }
    Ok(())
}
