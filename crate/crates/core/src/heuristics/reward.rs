use serde::{Deserialize, Serialize};

/// Decaying reward used to label non-counterexamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardState {
    alpha: f64,
    /// Search iterations since the last counterexample; `None` before the first.
    steps_since_last_counter: Option<u64>,
}

impl RewardState {
    pub fn new(alpha: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&alpha));
        RewardState { alpha, steps_since_last_counter: None }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn steps_since_last_counter(&self) -> Option<u64> {
        self.steps_since_last_counter
    }

    pub fn record_counter(&mut self) {
        self.steps_since_last_counter = Some(0);
    }

    /// Advances one search iteration.
    pub fn tick(&mut self) {
        if let Some(k) = self.steps_since_last_counter.as_mut() {
            *k += 1;
        }
    }

    /// `1` for a counterexample, otherwise `alpha^k` with `k` the distance to
    /// the last counterexample. A non-counterexample never receives 1: `k`
    /// is taken as at least 1, and the label is 0 before any counterexample
    /// has been seen or when `alpha = 0`.
    pub fn label(&self, is_counter: bool) -> f64 {
        if is_counter {
            return 1.0;
        }
        match self.steps_since_last_counter {
            None => 0.0,
            Some(_) if self.alpha == 0.0 => 0.0,
            Some(k) => self.alpha.powi(k.max(1).min(i32::MAX as u64) as i32),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counters_get_one() {
        let mut r = RewardState::new(0.3);
        assert_eq!(r.label(true), 1.0);
        r.record_counter();
        assert_eq!(r.label(true), 1.0);
    }

    #[test]
    fn zero_alpha_is_indicator() {
        let mut r = RewardState::new(0.0);
        assert_eq!(r.label(false), 0.0);
        r.record_counter();
        assert_eq!(r.label(false), 0.0);
        r.tick();
        assert_eq!(r.label(false), 0.0);
    }

    #[test]
    fn decays_with_distance() {
        let mut r = RewardState::new(0.5);
        assert_eq!(r.label(false), 0.0);
        r.record_counter();
        assert_eq!(r.steps_since_last_counter(), Some(0));
        assert_eq!(r.label(false), 0.5);
        r.tick();
        r.tick();
        assert_eq!(r.label(false), 0.25);
        r.record_counter();
        assert_eq!(r.steps_since_last_counter(), Some(0));
    }
}
