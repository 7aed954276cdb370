//! Axioms, strong decay of M_z^n L^n and the Cowen-Douglas properties on C^2
//! valued spaces.

use shiftlab::checks::{cd_check, model_axioms_check, omega_samples, sot_decay_check, sot_probes, CheckReport, Sampling};
use shiftlab::{make_space, WeightKind};

fn show(r: &CheckReport) {
    println!("{} passed={}", r.name, r.passed);
    for s in &r.details {
        println!("  {:<60} {:.3e} {} {:.1e}", s.sub_check, s.measured, s.relation.symbol(), s.threshold);
    }
}

fn main() -> shiftlab::Result<()> {
    let sampling = Sampling::default();
    for kind in [WeightKind::Hardy, WeightKind::Bergman, WeightKind::Dirichlet] {
        let model = make_space(kind, 2, 256, 1e-10)?;
        println!("== {} d=2", kind.name());
        show(&model_axioms_check(&model, sampling));
        show(&sot_decay_check(&model, &sot_probes(&model, sampling), model.trunc_len())?);
        show(&cd_check(&model, &omega_samples(&model, 20, sampling.seed), 2)?);
    }
    Ok(())
}
