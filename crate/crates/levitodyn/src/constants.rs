//! Physical constants (SI, 2018 CODATA exact values where defined).

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity [F/m].
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Reduced Planck constant [J s].
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Quadrature variance of the vacuum state under the scaling used by this
/// crate, x = (a + a†)/√2.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Mass of a mean air molecule [kg], the default residual-gas species.
pub const MEAN_AIR_MOLECULE_MASS: f64 = 4.81e-26;
