//! Core-anchored segment: the lumped gNB -> backhaul -> user-plane anchor ->
//! application -> gNB delay that local breakout removes. Sampled once per
//! packet; never split into sub-components.

use crate::engine::{Micros, RngStream, Sampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorePathModel {
    pub delay: Sampler,
}

impl Default for CorePathModel {
    fn default() -> Self {
        CorePathModel { delay: Sampler::uniform(5_000, 10_000) }
    }
}

/// One per-packet core traversal delay.
pub fn core_segment(model: &CorePathModel, rng: &mut RngStream) -> Micros {
    model.delay.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_sampler_returns_constant() {
        let mut rng = RngStream::derive(1, "core-delay");
        let model = CorePathModel { delay: Sampler::fixed(7_500) };
        assert_eq!(core_segment(&model, &mut rng), 7_500);
        // zero collapses the core-anchored path onto local-breakout timing
        let zero = CorePathModel { delay: Sampler::fixed(0) };
        assert_eq!(core_segment(&zero, &mut rng), 0);
    }

    #[test]
    fn uniform_draws_stay_in_bounds_with_expected_mean() {
        let mut rng = RngStream::derive(2, "core-delay");
        let model = CorePathModel::default();
        let n = 10_000;
        let mut sum = 0u64;
        for _ in 0..n {
            let d = core_segment(&model, &mut rng);
            assert!((5_000..=10_000).contains(&d));
            sum += d;
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 7_500.0).abs() < 7_500.0 * 0.03, "mean {mean}");
    }
}
