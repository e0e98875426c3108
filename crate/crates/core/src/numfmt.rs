/// Formats `v` rounded to `digits` significant digits, using the shortest
/// decimal text that parses back to the rounded value.
pub(crate) fn sig(v: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    let rounded: f64 = format!("{:.*e}", digits - 1, v)
        .parse()
        .expect("scientific notation always parses");
    // -0 prints as "-0"; keep files free of it
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

/// Rounds `v` to `digits` significant digits (the value `sig` prints).
pub(crate) fn round_sig(v: f64, digits: usize) -> f64 {
    sig(v, digits).parse().expect("sig output parses")
}
