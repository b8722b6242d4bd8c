use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::model::SpikeEvent;

/// Seeded spike deletion. One splitmix64 draw per event, in event order;
/// an event survives iff `(draw >> 11) * 2^-53 >= p`. A single dropper can be
/// carried across many images so the whole stream shares one generator.
#[derive(Debug, Clone)]
pub struct SpikeDropper {
    rng: SplitMix64,
    p: f64,
}

impl SpikeDropper {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::contract(format!("drop probability {p} outside [0, 1]")));
        }
        Ok(SpikeDropper { rng: SplitMix64::seed_from_u64(seed), p })
    }

    pub fn keep(&mut self) -> bool {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u >= self.p
    }

    pub fn apply(&mut self, events: &[SpikeEvent]) -> Vec<SpikeEvent> {
        events.iter().copied().filter(|_| self.keep()).collect()
    }
}

/// Retains each event with probability `1 - p`; deterministic in
/// `(events, p, seed)`.
pub fn spike_drop(events: &[SpikeEvent], p: f64, seed: u64) -> Result<Vec<SpikeEvent>> {
    Ok(SpikeDropper::new(p, seed)?.apply(events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn events(n: u32) -> Vec<SpikeEvent> {
        (0..n).map(|i| SpikeEvent::new(i % 784, i / 784)).collect()
    }

    #[test]
    fn generator_is_reference_splitmix64() {
        // Reference implementation output for seed 1234567.
        let mut g = SplitMix64::seed_from_u64(1_234_567);
        let expect = [6457827717110365317u64, 3203168211198807973, 9817491932198370423];
        for e in expect {
            assert_eq!(g.next_u64(), e);
        }
    }

    #[test]
    fn extremes() {
        let ev = events(100);
        assert_eq!(spike_drop(&ev, 0.0, 7).unwrap(), ev);
        assert!(spike_drop(&ev, 1.0, 7).unwrap().is_empty());
        assert!(spike_drop(&ev, 1.5, 7).is_err());
    }

    #[test]
    fn half_drop_is_binomial() {
        let kept = spike_drop(&events(10_000), 0.5, 42).unwrap().len() as f64;
        // 3 sigma of Binomial(10000, 0.5) is 150.
        assert!((kept - 5_000.0).abs() <= 150.0, "{kept}");
    }

    #[test]
    fn deterministic_and_order_preserving() {
        let ev = events(500);
        let a = spike_drop(&ev, 0.3, 99).unwrap();
        assert_eq!(a, spike_drop(&ev, 0.3, 99).unwrap());
        assert_ne!(a, spike_drop(&ev, 0.3, 100).unwrap());
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }
}
