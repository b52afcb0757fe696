use serde::{Deserialize, Serialize};

/// Floating-point slack for trajectory comparisons.
pub const PERF_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAnalysis {
    /// Every `Perf_i >= Perf_0`.
    pub monotone: bool,
    /// Every `Perf_i >= Perf_0 - epsilon`.
    pub quasi_monotone: bool,
    /// Every step gains at least `1/(4b)` until `1 - epsilon` is reached; `None` without `b`.
    pub strict_until_eps: Option<bool>,
    /// Fraction of generations at or after `accuracy_start` with `Perf >= 1 - epsilon`.
    pub perpetual_accuracy: Option<f64>,
    pub min_perf: f64,
    pub final_perf: f64,
}

/// `perfs[i]` is the exact performance at generation `i` against that generation's target.
pub fn analyze_trajectory(
    perfs: &[f64],
    epsilon: f64,
    benefit: Option<f64>,
    accuracy_start: usize,
) -> TrajectoryAnalysis {
    let p0 = perfs.first().copied().unwrap_or(f64::NAN);
    let monotone = perfs.iter().all(|&p| p >= p0 - PERF_SLACK);
    let quasi_monotone = perfs.iter().all(|&p| p >= p0 - epsilon - PERF_SLACK);
    let strict_until_eps = benefit.map(|b| {
        let step = 1.0 / (4.0 * b);
        perfs
            .windows(2)
            .all(|w| w[0] >= 1.0 - epsilon - PERF_SLACK || w[1] - w[0] >= step - PERF_SLACK)
    });
    let tail = perfs.get(accuracy_start..).unwrap_or(&[]);
    let perpetual_accuracy = if tail.is_empty() {
        None
    } else {
        let good = tail.iter().filter(|&&p| p >= 1.0 - epsilon - PERF_SLACK).count();
        Some(good as f64 / tail.len() as f64)
    };
    TrajectoryAnalysis {
        monotone,
        quasi_monotone,
        strict_until_eps,
        perpetual_accuracy,
        min_perf: perfs.iter().copied().fold(f64::INFINITY, f64::min),
        final_perf: perfs.last().copied().unwrap_or(f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_relative_to_start() {
        let a = analyze_trajectory(&[0.0, 0.5, 0.4], 0.05, None, 0);
        assert!(a.monotone);
        assert!(a.quasi_monotone);
        assert_eq!(a.strict_until_eps, None);
        let a = analyze_trajectory(&[0.5, 0.44, 0.9], 0.05, None, 0);
        assert!(!a.monotone);
        assert!(!a.quasi_monotone);
        let a = analyze_trajectory(&[0.5, 0.46, 0.9], 0.05, None, 0);
        assert!(a.quasi_monotone);
    }

    #[test]
    fn strict_and_accuracy() {
        // b = 1 so each step must gain 1/4 until Perf >= 0.9
        let a = analyze_trajectory(&[0.0, 0.25, 0.5, 0.75, 1.0, 0.95, 0.85], 0.1, Some(1.0), 4);
        assert_eq!(a.strict_until_eps, Some(true));
        assert_eq!(a.perpetual_accuracy, Some(2.0 / 3.0));
        let a = analyze_trajectory(&[0.0, 0.2], 0.1, Some(1.0), 5);
        assert_eq!(a.strict_until_eps, Some(false));
        assert_eq!(a.perpetual_accuracy, None);
    }
}
