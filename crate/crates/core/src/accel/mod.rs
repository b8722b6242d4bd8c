//! Event-driven model of the accelerator datapath: event router, 16×128
//! core-group fabric, connectivity-table lookup, grouped TTFS decoder and
//! cycle counters.

mod decoder;
mod packet;
mod sim;
mod timing;

pub use decoder::GroupedTtfsDecoder;
pub use packet::{pack_events, unpack_events, Direction, EventPacket};
pub use sim::{run_accelerator, stream_batch, Accelerator, BatchResult};
pub use timing::{cycles_to_latency, cycles_to_latency_exact, estimate_energy, throughput};

use crate::artifact::DEFAULT_CLOCK_HZ;
use crate::error::{Error, Result};

pub const NUM_GROUPS: u32 = 16;
pub const GROUP_SIZE: u32 = 128;
pub const PIPELINE_FILL_CYCLES: u64 = 12;
pub const SERVICE_INTERVAL_CYCLES: u64 = 11;
/// PL dynamic power that turns the 11-cycle service latency into 31.6 nJ.
pub const DYNAMIC_POWER_W: f64 = 0.2298;

/// How cycle counters are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleMode {
    /// Report the configured fill/service constants.
    #[default]
    Deployed,
    /// Count one cycle per group touched in each occupied time step, plus fill.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelConfig {
    pub num_groups: u32,
    pub group_size: u32,
    pub pipeline_fill_cycles: u64,
    pub service_interval_cycles: u64,
    pub clock_hz: u64,
    pub dynamic_power_w: f64,
    pub cycle_mode: CycleMode,
}

impl Default for AccelConfig {
    fn default() -> Self {
        AccelConfig {
            num_groups: NUM_GROUPS,
            group_size: GROUP_SIZE,
            pipeline_fill_cycles: PIPELINE_FILL_CYCLES,
            service_interval_cycles: SERVICE_INTERVAL_CYCLES,
            clock_hz: DEFAULT_CLOCK_HZ as u64,
            dynamic_power_w: DYNAMIC_POWER_W,
            cycle_mode: CycleMode::Deployed,
        }
    }
}

impl AccelConfig {
    pub fn with_mode(mode: CycleMode) -> Self {
        AccelConfig { cycle_mode: mode, ..Self::default() }
    }

    pub fn check(&self) -> Result<()> {
        if self.num_groups != NUM_GROUPS || self.group_size != GROUP_SIZE {
            return Err(Error::contract(format!(
                "fabric must be {NUM_GROUPS} groups of {GROUP_SIZE} lanes, got {}x{}",
                self.num_groups, self.group_size
            )));
        }
        if self.pipeline_fill_cycles == 0 || self.service_interval_cycles == 0 || self.clock_hz == 0 {
            return Err(Error::contract("fill, service and clock must all be positive"));
        }
        if !(self.dynamic_power_w.is_finite() && self.dynamic_power_w >= 0.0) {
            return Err(Error::contract(format!("dynamic power {} W is not a valid power", self.dynamic_power_w)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleCounters {
    /// Cycles from the first input until the first output spike; `None` when
    /// nothing fired.
    pub first_spike_cycles: Option<u64>,
    pub service_cycles: u64,
    pub total_cycles: u64,
    /// Input packets whose source has at least one synapse.
    pub events_routed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_the_deployed_fabric() {
        let c = AccelConfig::default();
        c.check().unwrap();
        assert_eq!(c.num_groups * c.group_size, 2048);
        assert_eq!((c.pipeline_fill_cycles, c.service_interval_cycles), (12, 11));
    }

    #[test]
    fn bad_configs() {
        let bad = [
            AccelConfig { num_groups: 8, ..Default::default() },
            AccelConfig { service_interval_cycles: 0, ..Default::default() },
            AccelConfig { clock_hz: 0, ..Default::default() },
            AccelConfig { dynamic_power_w: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.check().is_err(), "{c:?}");
        }
    }
}
