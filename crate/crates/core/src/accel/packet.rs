use crate::error::{Error, Result};
use crate::model::SpikeEvent;

pub const GROUP_BITS: u32 = 4;
pub const LANE_BITS: u32 = 7;
pub const TIME_BITS: u32 = 13;

const GROUP_SHIFT: u32 = 28;
const LANE_SHIFT: u32 = 21;
const TIME_SHIFT: u32 = 8;
const RESERVED_MASK: u32 = 0xFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

/// 32-bit wire form of a spike:
/// `[31:28] group | [27:21] lane | [20:8] time | [7:1] reserved 0 | [0] direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventPacket(u32);

impl EventPacket {
    pub fn new(group: u32, lane: u32, time: u32, dir: Direction) -> Result<Self> {
        if group >> GROUP_BITS != 0 || lane >> LANE_BITS != 0 || time >> TIME_BITS != 0 {
            return Err(Error::Packing(format!("group {group}, lane {lane}, time {time} do not fit the packet fields")));
        }
        let d = matches!(dir, Direction::Output) as u32;
        Ok(EventPacket(group << GROUP_SHIFT | lane << LANE_SHIFT | time << TIME_SHIFT | d))
    }

    /// Packs neuron id `neuron` (`group << 7 | lane`) firing at `time`.
    pub fn from_event(e: SpikeEvent, dir: Direction) -> Result<Self> {
        if e.neuron >> (GROUP_BITS + LANE_BITS) != 0 {
            return Err(Error::Packing(format!("neuron {} is outside the 2048-neuron address space", e.neuron)));
        }
        Self::new(e.neuron >> LANE_BITS, e.neuron & 0x7F, e.time, dir)
    }

    /// Checks the reserved bits of a raw word.
    pub fn from_word(word: u32) -> Result<Self> {
        if word & RESERVED_MASK != 0 {
            return Err(Error::Packing(format!("packet {word:#010x} has non-zero reserved bits")));
        }
        Ok(EventPacket(word))
    }

    pub fn word(self) -> u32 {
        self.0
    }

    pub fn group(self) -> u32 {
        self.0 >> GROUP_SHIFT
    }

    pub fn lane(self) -> u32 {
        (self.0 >> LANE_SHIFT) & 0x7F
    }

    pub fn time(self) -> u32 {
        (self.0 >> TIME_SHIFT) & 0x1FFF
    }

    pub fn direction(self) -> Direction {
        if self.0 & 1 == 1 {
            Direction::Output
        } else {
            Direction::Input
        }
    }

    pub fn neuron(self) -> u32 {
        self.group() << LANE_BITS | self.lane()
    }

    pub fn to_event(self) -> SpikeEvent {
        SpikeEvent::new(self.neuron(), self.time())
    }
}

/// Packs input events, preserving order.
pub fn pack_events(events: &[SpikeEvent]) -> Result<Vec<EventPacket>> {
    events.iter().map(|&e| EventPacket::from_event(e, Direction::Input)).collect()
}

pub fn unpack_events(packets: &[EventPacket]) -> Vec<SpikeEvent> {
    packets.iter().map(|p| p.to_event()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_fields_pack_to_zero() {
        assert_eq!(EventPacket::from_event(SpikeEvent::new(0, 0), Direction::Input).unwrap().word(), 0);
    }

    #[test]
    fn field_positions() {
        let p = EventPacket::new(3, 5, 7, Direction::Input).unwrap();
        assert_eq!(p.word(), (3 << 28) | (5 << 21) | (7 << 8));
        assert_eq!(p.word(), 0x30A0_0700);
        assert_eq!(p.neuron(), 3 * 128 + 5);
        let out = EventPacket::new(15, 127, 8191, Direction::Output).unwrap();
        assert_eq!(out.word(), 0xFFFF_FF01);
        assert_eq!(out.direction(), Direction::Output);
    }

    #[test]
    fn overflowing_fields() {
        assert!(matches!(pack_events(&[SpikeEvent::new(0, 8192)]), Err(Error::Packing(_))));
        assert!(matches!(pack_events(&[SpikeEvent::new(2048, 0)]), Err(Error::Packing(_))));
        assert!(EventPacket::new(16, 0, 0, Direction::Input).is_err());
        assert!(EventPacket::new(0, 128, 0, Direction::Input).is_err());
    }

    #[test]
    fn reserved_bits_rejected() {
        assert!(EventPacket::from_word(0x0000_0002).is_err());
        assert!(EventPacket::from_word(0x0000_0101).is_ok());
    }

    proptest! {
        #[test]
        fn unpack_inverts_pack(neuron in 0u32..2048, time in 0u32..8192, out in any::<bool>()) {
            let dir = if out { Direction::Output } else { Direction::Input };
            let p = EventPacket::from_event(SpikeEvent::new(neuron, time), dir).unwrap();
            prop_assert_eq!(p.to_event(), SpikeEvent::new(neuron, time));
            prop_assert_eq!(p.direction(), dir);
            prop_assert_eq!(EventPacket::from_word(p.word()).unwrap(), p);
        }

        #[test]
        fn valid_words_round_trip(word in any::<u32>()) {
            let word = word & !0xFE;
            let p = EventPacket::from_word(word).unwrap();
            let dir = p.direction();
            prop_assert_eq!(EventPacket::new(p.group(), p.lane(), p.time(), dir).unwrap().word(), word);
        }
    }
}
