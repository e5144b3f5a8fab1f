//! Monte Carlo engine: single-site dynamics, parallel tempering and
//! thermodynamic integration of the free energy.

mod autocorr;
mod chain;
mod pt;
mod ti;

pub use autocorr::{integrated_autocorr_time, series_estimate, SeriesEstimate};
pub use chain::{heat_bath_sweep, metropolis_sweep, site_flip_probability, ChainState, Couplings, Dynamics};
pub use pt::{geometric_ladder, parallel_tempering, swap_acceptance, PtConfig, PtRun, RungSeries};
pub use ti::{gauss_legendre, thermo_integration_f, TiConfig, TiResult};
