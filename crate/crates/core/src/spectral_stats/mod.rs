//! Monte Carlo statistics of the random operator: spectral-bottom tail
//! probabilities, finite-volume IDS curves, Lifshitz-exponent fits, E₀
//! identification, Rayleigh-quotient witnesses for the IDS lower bound, and
//! resolvent-decay diagnostics at the initial scale.
//!
//! Every campaign draws sample `i` from streams keyed by `(seed, i, site)`
//! and aggregates by sample index, so results do not depend on `jobs`.

mod ct;
mod decay;
mod fit;
mod ids;
mod sampling;
mod tail;
mod wilson;
mod witness;

pub use ct::{
    calibrate_ilse, cell_shells, centre_cell, ct_decay, ilse_probability, resolvent_block_norms, CtDecay, CtTarget,
    IlseCalibration, IlseConstants, IlseGeometry, IlseReport, DENSE_RESOLVENT_LIMIT,
};
pub use decay::{decay_tail_bound, shell_size, shell_tail_sum, summable_decay_margin, DecayMargin};
pub use fit::{fit_lifshitz_exponent, least_squares, LifshitzFit};
pub use ids::{ids_curve, sample_counts, CountingMode, IdsCurve, IdsPoint};
pub use sampling::{par_map, BoxSetup, Campaign};
pub use tail::{tail_probability, EnergyGrid, TailEstimate, DEFAULT_ENERGY_RATIO};
pub use wilson::{wilson_interval, Interval};
pub use witness::{
    cutoff_energy, e0_identification, lower_bound_witness, smooth_cutoff, CutoffEnergy, E0Report, E0Row,
    LowerBoundConfig, WitnessReport, WitnessRow, WitnessSample, DECOMPOSITION_SLACK,
};
