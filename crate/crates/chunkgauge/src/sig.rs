//! Fixed-precision float formatting for diff-stable outputs.
//!
//! Every float the crate writes (JSON reports, CSV tables) passes through
//! this module at 9 significant digits, so repeated runs emit byte-identical
//! files on every platform. Reading the values back is plain float parsing;
//! the fixed precision only governs how they are printed.

use serde::Serialize;

/// Significant digits carried by every serialized float.
pub const SIG_DIGITS: usize = 9;

/// Format `x` with [`SIG_DIGITS`] significant digits in plain decimal
/// notation. Trailing zeros are kept so column widths stay stable.
/// Panics on non-finite input; serialized quantities are finite by
/// construction.
pub fn format_sig(x: f64) -> String {
    assert!(x.is_finite(), "cannot serialize non-finite float");
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A JSON number that serializes exactly as [`format_sig`] prints it.
pub fn sig_number(x: f64) -> serde_json::Number {
    format_sig(x)
        .parse()
        .expect("format_sig emits a valid JSON number")
}

/// serde `serialize_with` adapter for f64 fields that must obey the fixed
/// output precision.
pub fn ser_sig<S: serde::Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    sig_number(*x).serialize(serializer)
}
