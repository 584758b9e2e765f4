//! Shared numeric machinery: projected gradient ascent, Nelder-Mead,
//! golden-section search, adaptive quadrature and series summation.

mod nelder_mead;
mod optimize;
mod quadrature;
mod series;

pub use nelder_mead::{maximize_nelder_mead, NelderMeadConfig};
pub use optimize::{
    golden_section_max, maximize_projected, numerical_gradient, AscentConfig, OptimResult,
    Ordering,
};
pub use quadrature::{dilogarithm, integrate, DILOG_TOL};
pub use series::{sum_series, sum_series_with_tail, SeriesConfig, SeriesSum, TailEstimate};
