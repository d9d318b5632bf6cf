//! Named wall relations used as canonical inputs.

use crate::error::{Error, Result};
use crate::flip::WallRelation;

/// Every fixture name, in a stable order.
pub const FIXTURE_NAMES: [&str; 5] = [
    "danilov_flop",
    "example_3_4_5d",
    "terminal_a_r",
    "flop_3_5",
    "smooth_5d_ordinary",
];

/// Coefficients of the named fixture; the rays are the standard basis
/// followed by the derived last ray.
pub fn fixture_coefficients(name: &str) -> Result<&'static [i64]> {
    Ok(match name {
        "danilov_flop" => &[-1, -1, 1, 1],
        "example_3_4_5d" => &[-3, -2, -1, 3, 2, 1],
        // Type A terminal flip with a = 1, r = 3.
        "terminal_a_r" => &[-1, -2, 3, 1],
        "flop_3_5" => &[-3, -5, 7, 1],
        "smooth_5d_ordinary" => &[-1, -1, -1, 1, 1, 1],
        other => return Err(Error::UnknownFixture(other.to_string())),
    })
}

/// The named wall relation.
pub fn fixture(name: &str) -> Result<WallRelation> {
    WallRelation::from_i64(fixture_coefficients(name)?)
}
