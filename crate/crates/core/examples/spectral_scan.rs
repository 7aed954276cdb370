//! Smallest-singular-value scans of M_z and L and spectral-radius estimates.

use num_complex::Complex64;
use shiftlab::spectra::{scan_grid, spectral_radius_estimate, GridSpec, Operator};
use shiftlab::{make_space, WeightKind};

fn main() -> shiftlab::Result<()> {
    let model = make_space(WeightKind::Hardy, 1, 128, 1e-10)?;
    let spec = GridSpec {
        center: Complex64::ZERO,
        radius: 2.0,
        resolution: 9,
    };
    for op in [Operator::Mz, Operator::L] {
        let scan = scan_grid(&model, op, spec)?;
        println!("{} indicator on a {}x{} grid:", op.tag().name(), spec.resolution, spec.resolution);
        for row in scan.indicator.chunks(spec.resolution) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:5.2}")).collect();
            println!("  {}", line.join(" "));
        }
        println!("  Lipschitz excess {:.1e}", scan.lipschitz_excess());
    }
    for kind in [WeightKind::Hardy, WeightKind::Dirichlet] {
        let model = make_space(kind, 1, 256, 1e-10)?;
        let est = spectral_radius_estimate(&model, Operator::L, 32, None)?;
        println!("{}: r(L) ~ {:.4} after {} powers", kind.name(), est.estimate, est.sequence.len());
    }
    Ok(())
}
