//! The energies `E^{p,q}(γ) = ∭ |(y−x)∧(z−x)|^q / (|y−z||y−x||z−x|)^p`
//! on closed polygons, their parameter regimes, and refinement studies.

mod eval;
mod experiments;
mod params;

pub use eval::{
    energy_decomposed, energy_decomposed_with, energy_full, energy_full_with, energy_weighted,
    DegeneratePolicy, EnergyReport, QuadratureSpec,
};
pub use experiments::{
    energy_convergence, loglog_slope, strand_pair_experiment, ConvergenceRow, ConvergenceTable,
};
pub use params::{classify, EnergyParams, RangeClass, RangeLabel};
