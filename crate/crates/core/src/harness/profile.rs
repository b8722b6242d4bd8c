use std::time::{Duration, Instant};

use super::{Dataset, EvalConfig};
use crate::accel::{pack_events, Accelerator};
use crate::artifact::DeploymentArtifact;
use crate::error::{Error, Result};
use crate::model::encode_ttfs;
use crate::reference::TtfsReference;

/// Host wall-clock per image, split into the system-path phases. Values are
/// host dependent; only their bookkeeping relation is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScopeBreakdown {
    pub n: usize,
    pub reference_eval_ms: f64,
    pub spike_packing_ms: f64,
    pub accel_run_plus_orchestration_ms: f64,
    pub readback_ms: f64,
    pub end_to_end_ms: f64,
}

impl ScopeBreakdown {
    pub fn phase_sum_ms(&self) -> f64 {
        self.reference_eval_ms + self.spike_packing_ms + self.accel_run_plus_orchestration_ms + self.readback_ms
    }

    pub fn phases(&self) -> [(&'static str, f64); 5] {
        [
            ("reference_eval", self.reference_eval_ms),
            ("spike_packing", self.spike_packing_ms),
            ("accel_run_plus_orchestration", self.accel_run_plus_orchestration_ms),
            ("readback", self.readback_ms),
            ("end_to_end", self.end_to_end_ms),
        ]
    }
}

/// Single-threaded timing pass over `ds`.
pub fn scope_profile(artifact: &DeploymentArtifact, ds: &Dataset, cfg: &EvalConfig) -> Result<ScopeBreakdown> {
    if ds.is_empty() {
        return Err(Error::contract("dataset is empty"));
    }
    let reference = TtfsReference::new(artifact)?;
    let acc = Accelerator::new(artifact, cfg.accel)?;
    let enc = super::eval::encoder_for(artifact);
    let mut phase = [Duration::ZERO; 4];
    let mut labels = Vec::with_capacity(ds.len());

    let start = Instant::now();
    for i in 0..ds.len() {
        let t0 = Instant::now();
        let packets = pack_events(&encode_ttfs(ds.image(i), &enc)?)?;
        let t1 = Instant::now();
        let events: Vec<_> = packets.iter().map(|p| p.to_event()).collect();
        let r = reference.run(&events)?;
        let t2 = Instant::now();
        let x = acc.run(&packets)?;
        let t3 = Instant::now();
        labels.push((x.label, x.no_spike, r.label == x.label, x.counters));
        let t4 = Instant::now();
        phase[0] += t2 - t1;
        phase[1] += t1 - t0;
        phase[2] += t3 - t2;
        phase[3] += t4 - t3;
    }
    let total = start.elapsed();
    std::hint::black_box(&labels);

    let per = |d: Duration| d.as_secs_f64() * 1e3 / ds.len() as f64;
    Ok(ScopeBreakdown {
        n: ds.len(),
        reference_eval_ms: per(phase[0]),
        spike_packing_ms: per(phase[1]),
        accel_run_plus_orchestration_ms: per(phase[2]),
        readback_ms: per(phase[3]),
        end_to_end_ms: per(total),
    })
}
