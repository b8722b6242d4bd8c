use super::EncoderConfig;
use crate::error::{Error, Result};

/// One logical spike: neuron `neuron` fires at step `time`. Ordering is by
/// `(time, neuron)`, the canonical event order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpikeEvent {
    pub time: u32,
    pub neuron: u32,
}

impl SpikeEvent {
    pub fn new(neuron: u32, time: u32) -> Self {
        SpikeEvent { time, neuron }
    }
}

/// Time-to-first-spike encoding: pixel `p > 0` spikes once at
/// `floor((max - p) * T / (max + 1))`, zero pixels stay silent. With the
/// default `max = 255` this is `floor((255 - p) * T / 256)`.
pub fn encode_ttfs(image: &[u8], enc: &EncoderConfig) -> Result<Vec<SpikeEvent>> {
    let max = enc.intensity_max as u64;
    let window = enc.time_window as u64;
    let mut events = Vec::with_capacity(image.len() / 4);
    for (neuron, &p) in image.iter().enumerate() {
        if p as u64 > max {
            return Err(Error::Encoding(format!("pixel {neuron} intensity {p} exceeds {max}")));
        }
        if p == 0 {
            continue;
        }
        let time = (max - p as u64) * window / (max + 1);
        events.push(SpikeEvent::new(neuron as u32, time as u32));
    }
    events.sort_unstable();
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_pixel(p: u8) -> Vec<SpikeEvent> {
        encode_ttfs(&[p], &EncoderConfig::default()).unwrap()
    }

    #[test]
    fn brightest_pixel_spikes_first() {
        assert_eq!(one_pixel(255), vec![SpikeEvent::new(0, 0)]);
    }

    #[test]
    fn zero_pixel_is_silent() {
        assert!(one_pixel(0).is_empty());
    }

    #[test]
    fn mid_grey_time() {
        // floor(127 * 64 / 256) = 31
        assert_eq!(one_pixel(128), vec![SpikeEvent::new(0, 31)]);
        // dimmest non-zero pixel lands in the last step
        assert_eq!(one_pixel(1), vec![SpikeEvent::new(0, 63)]);
    }

    #[test]
    fn out_of_range_intensity() {
        let enc = EncoderConfig { time_window: 8, intensity_max: 100 };
        assert!(matches!(encode_ttfs(&[101], &enc), Err(Error::Encoding(_))));
        assert_eq!(encode_ttfs(&[100], &enc).unwrap(), vec![SpikeEvent::new(0, 0)]);
    }

    #[test]
    fn events_sorted_by_time_then_neuron() {
        let ev = encode_ttfs(&[10, 255, 0, 255, 128], &EncoderConfig::default()).unwrap();
        let keys: Vec<(u32, u32)> = ev.iter().map(|e| (e.time, e.neuron)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 3), (31, 4), (61, 0)]);
    }

    proptest! {
        #[test]
        fn brighter_never_later(a in 1u8..=255, b in 1u8..=255, t in 2u32..512) {
            let enc = EncoderConfig::with_time_window(t);
            let ev = encode_ttfs(&[a, b], &enc).unwrap();
            let time_of = |n: u32| ev.iter().find(|e| e.neuron == n).unwrap().time;
            prop_assert!(time_of(0) < t && time_of(1) < t);
            if a > b {
                prop_assert!(time_of(0) <= time_of(1));
            }
        }
    }
}
