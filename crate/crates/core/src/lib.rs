//! Exact variational energies of harmonically trapped composite bosons.
//!
//! A composite boson here is a bound pair of two distinguishable fermion
//! species with a Gaussian pair factor; the trial state is a product of such
//! pairs, (anti)symmetrized over one species. All matrix elements reduce to
//! Gaussian integrals that factor over permutation cycles, so ground-state
//! energies come out exact to working precision for any pair count that fits
//! in memory — no sampling, no quadrature grids.
//!
//! Module map:
//! - [`perm`]: cycle types, conjugacy classes, multiplicities, signs.
//! - [`gauss`]: Gaussian integrals over symmetric quadratic forms.
//! - [`elements`]: per-cycle factors and the signed class sums.
//! - [`energy`]: Rayleigh energy, width optimization, references, μ, sweeps.
//! - [`oracle`]: brute-force n! path and closed forms for verification.
//! - [`scalar`]: mixed f64/multi-precision arithmetic behind everything.

pub mod elements;
pub mod energy;
pub mod error;
pub mod gauss;
pub mod oracle;
pub mod perm;
mod precision;
pub mod scalar;

pub use elements::{assemble_sums, class_element, cycle_factors, CycleFactors, ElementSums};
pub use energy::{
    boson_reference, energy_report_at, fermion_reference, internal_energy_per_boson, mixing_mu,
    optimize_width, rayleigh_energy, sweep, EnergyReport, ModelParams, SweepGrid, SweepPoint,
};
pub use error::{Error, Result};
pub use gauss::{
    build_pair_form, gauss_moment_1d, kinetic_bilinear, kinetic_coordinate, overlap_integral,
    quadratic_moment, second_moment_sum, PairForm, SymMatrix,
};
pub use oracle::{
    brute_force_sums, cross_check, n1_closed_form, CheckConfig, CheckRow, CheckSummary,
    OracleReport, ORACLE_N_MAX, ORACLE_TOL,
};
pub use perm::{
    class_weight, count_marked_partitions, cycle_type_of, enumerate_cycle_types,
    enumerate_permutations, marked_classes, perm_classes, CycleType, MarkedClass, PermClass,
    Statistics,
};
pub use scalar::Scalar;
