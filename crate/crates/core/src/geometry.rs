//! Periodic geometry on the circle of circumference `length`.

/// Wraps a coordinate into the fundamental domain `[0, length)`.
pub fn wrap_position(x: f64, length: f64) -> f64 {
    let w = x.rem_euclid(length);
    // rem_euclid can return `length` itself when x is a tiny negative number.
    if w >= length {
        w - length
    } else {
        w
    }
}

/// Distance on the periodic interval: the arc length of the shorter way round.
pub fn periodic_distance(x: f64, y: f64, length: f64) -> f64 {
    let d = (x - y).rem_euclid(length);
    d.min(length - d)
}
