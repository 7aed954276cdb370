//! Polynomial approximation of resolvent vectors and resolvent growth near
//! the boundary.

use num_complex::Complex64;
use shiftlab::checks::{boundary_blowup_diagnostic, dyadic_ray, approximant_rows};
use shiftlab::subspaces::{build_subspace, BuildMode};
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let model = make_space(WeightKind::Hardy, 1, 256, 1e-10)?;
    let lambda = Complex64::new(2.0, 0.0);
    let mz = model.weights().mz_norm();
    println!("  n   ||p_n - v||     bound |l|^-(n+1)||M_z||^(n+1)||v||");
    for row in approximant_rows(&model, &[Complex64::new(1.0, 0.0)], lambda, 12)? {
        let bound = (mz / lambda.norm()).powi(row.n as i32 + 1) * row.resolvent_norm;
        println!("{:>3}   {:.6e}    {:.6e}", row.n, row.measured, bound);
    }

    let k = model.szego(0.9)?;
    let sub = build_subspace(&model, std::slice::from_ref(&k), BuildMode::ExactSpan)?;
    let xi = Complex64::new(1.0 / 0.9, 0.0);
    let (fit, _) = boundary_blowup_diagnostic(&model, &sub, &k, xi, &dyadic_ray(xi, 4..=15))?;
    println!("pole at 1/0.9: growth exponent {:.4}", fit.growth_exponent);

    let k = model.szego(0.5)?;
    let sub = build_subspace(&model, std::slice::from_ref(&k), BuildMode::ExactSpan)?;
    let xi = Complex64::new(1.2, 0.0);
    let (fit, _) = boundary_blowup_diagnostic(&model, &sub, &k, xi, &dyadic_ray(xi, 4..=15))?;
    println!("regular point 1.2: growth exponent {:.4}", fit.growth_exponent);
    Ok(())
}
