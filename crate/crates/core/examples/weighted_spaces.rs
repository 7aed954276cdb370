//! Norms, point evaluation and the shift pair on the three preset spaces.

use num_complex::Complex64;
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let z = Complex64::new(0.3, 0.4);
    for kind in [WeightKind::Hardy, WeightKind::Bergman, WeightKind::Dirichlet] {
        let model = make_space(kind, 1, 256, 1e-10)?;
        let k = model.szego(0.5)?;
        let ev = model.evaluate(&k, z)?;
        let lm = model.apply_l(&model.apply_mz(&k)?)?;
        let defect = model.norm(&lm.sub(&k)?);
        println!(
            "{:<9} ||k_0.5|| = {:.6}  k_0.5(z) = {:.6} (err <= {:.1e})  ||L M_z k - k|| = {:.1e}  ||M_z|| = {:.4}",
            kind.name(),
            model.norm(&k),
            ev.value[0],
            ev.error_bound,
            defect,
            model.weights().mz_norm(),
        );
    }
    // exact value 1/(1 - z/2)
    println!("closed form             = {:.6}", 1.0 / (1.0 - z * 0.5));
    Ok(())
}
