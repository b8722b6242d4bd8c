use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn nonzero_clock(clock_hz: u64) -> Result<()> {
    if clock_hz == 0 {
        return Err(Error::contract("clock_hz must be positive"));
    }
    Ok(())
}

/// Seconds taken by `cycles` at `clock_hz`, as an exact fraction.
pub fn cycles_to_latency_exact(cycles: u64, clock_hz: u64) -> Result<Ratio<u64>> {
    nonzero_clock(clock_hz)?;
    Ok(Ratio::new(cycles, clock_hz))
}

/// Seconds taken by `cycles` at `clock_hz`.
pub fn cycles_to_latency<T: Scalar>(cycles: u64, clock_hz: u64) -> Result<T> {
    nonzero_clock(clock_hz)?;
    Ok(T::of_u64(cycles) / T::of_u64(clock_hz))
}

/// Images per second at one image every `service_cycles`.
pub fn throughput<T: Scalar>(service_cycles: u64, clock_hz: u64) -> Result<T> {
    if service_cycles == 0 {
        return Err(Error::contract("service interval must be at least one cycle"));
    }
    Ok(T::of_u64(clock_hz) / T::of_u64(service_cycles))
}

/// Joules per image: `power * latency`. Both inputs are expected nonnegative.
pub fn estimate_energy<T: Scalar>(latency_s: T, dynamic_power_w: T) -> T {
    dynamic_power_w * latency_s
}
