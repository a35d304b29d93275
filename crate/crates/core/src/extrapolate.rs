//! Limit estimates for exhaustion sequences.

/// Differences below this are treated as solver noise.
pub const NOISE_FLOOR: f64 = 1e-7;

/// Aitken Δ² estimate of the limit of `a, b, c`.
///
/// Exact for sequences of the form `L + C·qᵏ`. When the second difference is
/// within the noise floor the sequence is taken as converged and `c` returned.
pub fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    let dd = d2 - d1;
    if d1.abs() <= NOISE_FLOOR || d2.abs() <= NOISE_FLOOR || dd.abs() <= NOISE_FLOOR * 1e-3 {
        return c;
    }
    c - d2 * d2 / dd
}

/// Ratio of successive differences `(c − b)/(b − a)`; zero when the sequence
/// has already converged to within the noise floor.
pub fn contraction(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    if d1.abs() <= NOISE_FLOOR || d2.abs() <= NOISE_FLOOR {
        0.0
    } else {
        d2 / d1
    }
}

/// Aitken estimate from the last three entries, if there are three.
pub fn tail_limit(values: &[f64]) -> Option<f64> {
    match values {
        [.., a, b, c] => Some(aitken(*a, *b, *c)),
        _ => None,
    }
}
