//! Thresholds used by the verification suite, in one place.

/// Grid spacing for the divergence table of the transform at the origin.
pub const DBAR_TABLE_H: f64 = 1.0 / 16.0;
/// Relative tolerance of the radial core against n^2 pi.
pub const DBAR_CORE_REL: f64 = 1e-3;
pub const DBAR_TABLE_SECONDS: f64 = 60.0;

pub const LIFT_SEEDS: u64 = 10;
pub const LIFT_INTENSITY: f64 = 0.5;
pub const LIFT_HALF_WIDTH: f64 = 16.0;
pub const LIFT_TOP_LEVEL: usize = 4;
pub const ZERO_POSITION_TOL: f64 = 1e-8;
pub const EQUIVARIANCE_SHIFT: (f64, f64) = (0.37, 1.2);
pub const EQUIVARIANCE_TOL: f64 = 1e-6;
pub const LIFT_SECONDS: f64 = 600.0;

pub const ML_COEFF_TOL: f64 = 1e-8;
pub const ML_CONTOUR_RADIUS: f64 = 0.25;
pub const ML_ORDER_CAP: usize = 6;

pub const CAUCHY_H: f64 = 1.0 / 64.0;
pub const CAUCHY_RESIDUAL: f64 = 1e-3;
pub const CAUCHY_HALVING_RATE: f64 = 1.8;
pub const CAUCHY_FAR_PROBES: usize = 20;

pub const GREEN_RADIUS: f64 = 40.0;
pub const GREEN_DOUBLING_RATE: f64 = 1.8;
pub const GREEN_NON_GENERATOR_FACTOR: f64 = 10.0;
pub const GREEN_REPRESENTATION_H: f64 = 1.0 / 32.0;
pub const GREEN_REPRESENTATION_RESIDUAL: f64 = 5e-3;
/// Residual ratio under h -> h/2 counted as quartering.
pub const GREEN_QUARTER_RATE: f64 = 3.0;
pub const GREEN_SECONDS: f64 = 300.0;

pub const RIESZ_PI_REL: f64 = 0.05;
pub const RIESZ_PARTIAL_MIN: f64 = 105.0;
pub const RIGIDITY_RESIDUAL: f64 = 1e-8;
pub const SUBMEAN_SLACK: f64 = -1e-9;
