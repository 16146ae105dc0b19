use serde::Serialize;

/// Outcome of one inequality `value ≤ threshold`.
///
/// `slack = threshold − value` in the inequality's own units; `fraction`
/// is the slack relative to `|threshold|` (or the bare slack when the
/// threshold is zero). `ok` is exactly `slack ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Check {
    pub ok: bool,
    #[serde(with = "crate::harness::output::float")]
    pub slack: f64,
    #[serde(with = "crate::harness::output::float")]
    pub fraction: f64,
}

impl Check {
    pub fn new(value: f64, threshold: f64) -> Self {
        if threshold == f64::INFINITY {
            return Self { ok: value.is_finite(), slack: f64::INFINITY, fraction: 1.0 };
        }
        let slack = threshold - value;
        let fraction = if threshold != 0.0 { slack / threshold.abs() } else { slack };
        Self { ok: slack >= 0.0, slack, fraction }
    }

    /// The tighter of two checks; fails if either fails.
    pub fn and(self, other: Check) -> Check {
        let tighter = if other.fraction < self.fraction { other } else { self };
        Check { ok: self.ok && other.ok, ..tighter }
    }
}
