//! Physical constants and default tuning values.

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986004418e14;
/// Earth equatorial radius (WGS-84), m.
pub const EARTH_RADIUS: f64 = 6_378_137.0;
/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_855_3e-5;

pub const J2: f64 = 1.08263e-3;
pub const J3: f64 = -2.5327e-6;
pub const J4: f64 = -1.6196e-6;

/// Sun gravitational parameter, m³/s².
pub const MU_SUN: f64 = 1.327_124_400_18e20;
/// Moon gravitational parameter, m³/s².
pub const MU_MOON: f64 = 4.9028e12;

/// Astronomical unit, m.
pub const AU: f64 = 1.495_978_707e11;
/// Solar radiation pressure at 1 AU, N/m².
pub const SOLAR_PRESSURE_1AU: f64 = 4.56e-6;

/// Geostationary orbit radius used for NavIC-like slots, m.
pub const GEOSTATIONARY_RADIUS: f64 = 42_164_169.0;

/// Seconds per Julian century.
pub const SECONDS_PER_CENTURY: f64 = 36525.0 * 86400.0;
