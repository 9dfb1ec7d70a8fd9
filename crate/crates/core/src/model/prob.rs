//! Small helpers for probability vectors.

/// Row-sum slack tolerated (and repaired) when validating input distributions.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Entries below this are treated as numerical noise and clamped to zero.
pub const PROB_FLOOR: f64 = 1e-15;

/// Resolution used when probabilities are turned into memo keys.
pub const KEY_QUANTUM: f64 = 1e-12;

pub fn is_simplex(v: &[f64], tol: f64) -> bool {
    !v.is_empty()
        && v.iter().all(|p| p.is_finite() && *p >= -PROB_FLOOR)
        && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Clamps sub-floor entries to zero and rescales to unit mass.
///
/// A vector with no mass left is returned unchanged.
pub fn clamp_normalize(v: &mut [f64]) {
    for p in v.iter_mut() {
        if *p < PROB_FLOOR {
            *p = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for p in v.iter_mut() {
            *p /= s;
        }
    }
}

pub fn quantize(v: &[f64]) -> impl Iterator<Item = i64> + '_ {
    v.iter().map(|p| (p / KEY_QUANTUM).round() as i64)
}

pub fn point_mass(n: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[at] = 1.0;
    v
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Inverse-CDF draw from `probs` using a uniform variate `u` in [0, 1).
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_removes_noise() {
        let mut v = vec![0.5, -1e-17, 0.5 + 1e-16];
        clamp_normalize(&mut v);
        assert_eq!(v[1], 0.0);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_skips_zero_mass() {
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], 0.0), 1);
        assert_eq!(sample_index(&[0.25, 0.75], 0.2), 0);
        assert_eq!(sample_index(&[0.25, 0.75], 0.9999999), 1);
        // rounding leaves u just above the accumulated mass
        assert_eq!(sample_index(&[0.3, 0.7, 0.0], 1.0), 1);
    }

    #[test]
    fn simplex_check() {
        assert!(is_simplex(&[0.2, 0.8], 1e-12));
        assert!(!is_simplex(&[0.2, 0.3], 1e-12));
        assert!(!is_simplex(&[], 1e-12));
        assert!(!is_simplex(&[1.5, -0.5], 1e-12));
    }
}
