//! Low-precision analytic Sun and Moon positions (truncated almanac series,
//! arcminute-level accuracy), rotated from the ecliptic into the ECI frame.

use nalgebra::Vector3;

use crate::constants::SECONDS_PER_CENTURY;

const OBLIQUITY_DEG: f64 = 23.439_291_11;
const ARCSEC: f64 = std::f64::consts::PI / (180.0 * 3600.0);

fn ecliptic_to_eci(lon: f64, lat: f64, dist: f64) -> Vector3<f64> {
    let (sl, cl) = lon.sin_cos();
    let (sb, cb) = lat.sin_cos();
    let ecl = Vector3::new(dist * cb * cl, dist * cb * sl, dist * sb);
    let (se, ce) = OBLIQUITY_DEG.to_radians().sin_cos();
    Vector3::new(ecl.x, ce * ecl.y - se * ecl.z, se * ecl.y + ce * ecl.z)
}

/// Geocentric Sun position (m) at `t` seconds past J2000.
pub fn sun_position(seconds_since_j2000: f64) -> Vector3<f64> {
    let t = seconds_since_j2000 / SECONDS_PER_CENTURY;
    let m = (357.5256 + 35_999.049 * t).to_radians();
    let lon = (282.94_f64).to_radians() + m + (6892.0 * m.sin() + 72.0 * (2.0 * m).sin()) * ARCSEC;
    let dist = (149.619 - 2.499 * m.cos() - 0.021 * (2.0 * m).cos()) * 1e9;
    ecliptic_to_eci(lon, 0.0, dist)
}

/// Geocentric Moon position (m) at `t` seconds past J2000.
pub fn moon_position(seconds_since_j2000: f64) -> Vector3<f64> {
    let t = seconds_since_j2000 / SECONDS_PER_CENTURY;
    let deg = |v: f64| v.to_radians();
    let l0 = deg(218.316_17 + 481_267.880_88 * t - 1.3972 * t);
    let l = deg(134.962_92 + 477_198.867_53 * t);
    let lp = deg(357.525_43 + 35_999.049_44 * t);
    let f = deg(93.272_83 + 483_202.018_73 * t);
    let d = deg(297.850_27 + 445_267.111_35 * t);

    let dlon = 22_640.0 * l.sin() + 769.0 * (2.0 * l).sin() - 4586.0 * (l - 2.0 * d).sin()
        + 2370.0 * (2.0 * d).sin()
        - 668.0 * lp.sin()
        - 412.0 * (2.0 * f).sin()
        - 212.0 * (2.0 * l - 2.0 * d).sin()
        - 206.0 * (l + lp - 2.0 * d).sin()
        + 192.0 * (l + 2.0 * d).sin()
        - 165.0 * (lp - 2.0 * d).sin()
        + 148.0 * (l - lp).sin()
        - 125.0 * d.sin()
        - 110.0 * (l + lp).sin()
        - 55.0 * (2.0 * f - 2.0 * d).sin();
    let lon = l0 + dlon * ARCSEC;

    let lat = 18_520.0 * (f + lon - l0 + (412.0 * (2.0 * f).sin() + 541.0 * lp.sin()) * ARCSEC).sin()
        - 526.0 * (f - 2.0 * d).sin()
        + 44.0 * (l + f - 2.0 * d).sin()
        - 31.0 * (-l + f - 2.0 * d).sin()
        - 25.0 * (-2.0 * l + f).sin()
        - 23.0 * (lp + f - 2.0 * d).sin()
        + 21.0 * (-l + f).sin()
        + 11.0 * (-lp + f - 2.0 * d).sin();
    let lat = lat * ARCSEC;

    let dist = (385_000.0
        - 20_905.0 * l.cos()
        - 3699.0 * (2.0 * d - l).cos()
        - 2956.0 * (2.0 * d).cos()
        - 570.0 * (2.0 * l).cos()
        + 246.0 * (2.0 * l - 2.0 * d).cos()
        - 205.0 * (lp - 2.0 * d).cos()
        - 171.0 * (l + 2.0 * d).cos()
        - 152.0 * (l + lp - 2.0 * d).cos())
        * 1e3;
    ecliptic_to_eci(lon, lat, dist)
}
