//! Coordinates and great-circle distances between sensor-network centers.

use alloc::format;
use alloc::string::{String, ToString};
use core::f64::consts::PI;
use core::fmt;

use thiserror::Error;

/// Mean Earth radius of the spherical model, in kilometres.
pub const EARTH_MEAN_RADIUS_KM: f64 = 6371.0;

/// Largest possible distance on the sphere (half a great circle).
pub const MAX_DISTANCE_KM: f64 = PI * EARTH_MEAN_RADIUS_KM;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("malformed DMS coordinate at `{token}`: {reason}")]
    Dms { token: String, reason: &'static str },
}

/// WGS84 latitude/longitude in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoCoordinate {
    latitude_deg: f64,
    longitude_deg: f64,
}

impl GeoCoordinate {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(GeoError::Latitude(latitude_deg));
        }
        if !(-180.0..=180.0).contains(&longitude_deg) {
            return Err(GeoError::Longitude(longitude_deg));
        }
        Ok(Self { latitude_deg, longitude_deg })
    }

    pub fn latitude_deg(&self) -> f64 {
        self.latitude_deg
    }

    pub fn longitude_deg(&self) -> f64 {
        self.longitude_deg
    }
}

/// The sphere used for distance computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel {
    pub mean_radius_km: f64,
}

impl EarthModel {
    pub const MEAN: EarthModel = EarthModel { mean_radius_km: EARTH_MEAN_RADIUS_KM };
}

/// Haversine great-circle distance in kilometres.
pub fn haversine_distance(a: GeoCoordinate, b: GeoCoordinate) -> f64 {
    let lat1 = a.latitude_deg.to_radians();
    let lat2 = b.latitude_deg.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.longitude_deg - a.longitude_deg).to_radians();

    let sin_dlat = libm::sin(dlat / 2.0);
    let sin_dlon = libm::sin(dlon / 2.0);
    let h = sin_dlat * sin_dlat + libm::cos(lat1) * libm::cos(lat2) * sin_dlon * sin_dlon;
    // rounding can push h a hair outside [0, 1]
    let h = h.clamp(0.0, 1.0);
    2.0 * EarthModel::MEAN.mean_radius_km * libm::asin(libm::sqrt(h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Latitude,
    Longitude,
}

fn dms_error(token: &str, reason: &'static str) -> GeoError {
    GeoError::Dms { token: token.to_string(), reason }
}

/// Reads one `<number><unit>` component, returning the value and the rest.
fn take_component<'a>(input: &'a str, units: &[char], reason: &'static str) -> Result<(f64, &'a str), GeoError> {
    let input = input.trim_start();
    let end = input.find(|c: char| units.contains(&c)).ok_or_else(|| dms_error(input, reason))?;
    let number = input[..end].trim();
    let value: f64 = number.parse().map_err(|_| dms_error(number, "not a number"))?;
    if !value.is_finite() || value < 0.0 || number.starts_with('-') || number.starts_with('+') {
        return Err(dms_error(number, "component must be a non-negative number"));
    }
    let unit_len = input[end..].chars().next().map_or(1, char::len_utf8);
    Ok((value, &input[end + unit_len..]))
}

fn parse_axis(text: &str) -> Result<(Axis, f64), GeoError> {
    let text = text.trim();
    let mut chars = text.chars();
    let tag = chars.next().ok_or_else(|| dms_error(text, "empty axis"))?;
    let (axis, sign) = match tag {
        'N' => (Axis::Latitude, 1.0),
        'S' => (Axis::Latitude, -1.0),
        'E' => (Axis::Longitude, 1.0),
        'W' => (Axis::Longitude, -1.0),
        _ => {
            let token = text.split_whitespace().next().unwrap_or(text);
            return Err(dms_error(token, "hemisphere must be one of N, S, E, W"));
        }
    };
    let rest = chars.as_str();
    if !rest.starts_with(char::is_whitespace) {
        return Err(dms_error(text, "expected whitespace after hemisphere"));
    }
    let (deg, rest) = take_component(rest, &['°'], "missing degree sign")?;
    let (min, rest) = take_component(rest, &['\'', '′'], "missing minute mark")?;
    let (sec, rest) = take_component(rest, &['"', '″'], "missing second mark")?;
    if !rest.trim().is_empty() {
        return Err(dms_error(rest.trim(), "trailing characters"));
    }
    if libm::trunc(deg) != deg {
        return Err(dms_error(text, "degrees must be whole"));
    }
    if libm::trunc(min) != min || min >= 60.0 {
        return Err(dms_error(text, "minutes must be a whole number below 60"));
    }
    if sec >= 60.0 {
        return Err(dms_error(text, "seconds must be below 60"));
    }
    Ok((axis, sign * (deg + min / 60.0 + sec / 3600.0)))
}

/// Parses a `N 49° 47' 39.4506", E 9° 55' 38.9778"` style coordinate pair.
/// The two axes may appear in either order; S and W are negative.
pub fn parse_dms(text: &str) -> Result<GeoCoordinate, GeoError> {
    let mut parts = text.split(',');
    let first = parts.next().unwrap_or("");
    let (axis_a, value_a) = parse_axis(first)?;
    let second = parts.next().ok_or_else(|| dms_error(text.trim(), "expected two comma-separated axes"))?;
    let (axis_b, value_b) = parse_axis(second)?;
    if let Some(extra) = parts.next() {
        return Err(dms_error(extra.trim(), "more than two axes"));
    }
    let (lat, lon) = match (axis_a, axis_b) {
        (Axis::Latitude, Axis::Longitude) => (value_a, value_b),
        (Axis::Longitude, Axis::Latitude) => (value_b, value_a),
        _ => return Err(dms_error(second.trim(), "axes must be one latitude and one longitude")),
    };
    GeoCoordinate::new(lat, lon)
}

fn format_axis(value: f64, positive: char, negative: char) -> String {
    let hemisphere = if value < 0.0 { negative } else { positive };
    // micro-arcseconds keep the decomposition exact and round-trip below 1e-9 degrees
    let total = libm::round(libm::fabs(value) * 3600.0 * 1e6) as u64;
    let deg = total / 3_600_000_000;
    let min = (total / 60_000_000) % 60;
    let micro_sec = total % 60_000_000;
    let whole = micro_sec / 1_000_000;
    let frac = micro_sec % 1_000_000;
    let sec = if frac == 0 {
        format!("{whole}")
    } else {
        let digits = format!("{frac:06}");
        format!("{whole}.{}", digits.trim_end_matches('0'))
    };
    format!("{hemisphere} {deg}° {min}' {sec}\"")
}

/// Renders a coordinate in the degrees-minutes-seconds form accepted by
/// [`parse_dms`].
pub fn format_dms(coord: GeoCoordinate) -> String {
    format!("{}, {}", format_axis(coord.latitude_deg, 'N', 'S'), format_axis(coord.longitude_deg, 'E', 'W'))
}

impl fmt::Display for GeoCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_dms(*self))
    }
}
