use super::{par_map, Dataset, EvalConfig, SpikeDropper};
use crate::accel::{cycles_to_latency, estimate_energy, pack_events, throughput, Accelerator};
use crate::artifact::DeploymentArtifact;
use crate::error::{Error, Result};
use crate::model::{encode_ttfs, EncoderConfig, SpikeEvent};
use crate::reference::{DenseBaseline, DenseMode, InferenceResult, TtfsReference};

pub const DEFAULT_DROP_RATIOS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

pub(crate) fn encoder_for(artifact: &DeploymentArtifact) -> EncoderConfig {
    EncoderConfig::with_time_window(artifact.time_window())
}

fn non_empty(ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::contract("dataset is empty"));
    }
    Ok(())
}

fn encode_all(artifact: &DeploymentArtifact, ds: &Dataset, jobs: usize) -> Result<Vec<Vec<SpikeEvent>>> {
    let enc = encoder_for(artifact);
    par_map(jobs, ds.len(), |i| encode_ttfs(ds.image(i), &enc))
}

fn pct(correct: usize, n: usize) -> f64 {
    correct as f64 * 100.0 / n as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub index: usize,
    pub reference: (u32, bool),
    pub accel: (u32, bool),
}

/// Outcome of comparing the accelerator against the TTFS reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub n: usize,
    /// Images whose `(label, no_spike)` agree.
    pub matches: usize,
    pub mismatches: Vec<Mismatch>,
    /// Images whose per-class first-spike times differ, a strictly finer check.
    pub timing_mismatches: Vec<usize>,
    pub reference_correct: usize,
    pub accel_correct: usize,
}

impl Equivalence {
    pub fn all_match(&self) -> bool {
        self.matches == self.n && self.timing_mismatches.is_empty()
    }
}

/// Runs every image through both runtimes and lists each disagreement.
pub fn verify_equivalence(artifact: &DeploymentArtifact, ds: &Dataset, cfg: &EvalConfig) -> Result<Equivalence> {
    non_empty(ds)?;
    let reference = TtfsReference::new(artifact)?;
    let acc = Accelerator::new(artifact, cfg.accel)?;
    let enc = encoder_for(artifact);
    let pairs = par_map(cfg.jobs, ds.len(), |i| {
        let events = encode_ttfs(ds.image(i), &enc)?;
        let r = reference.run(&events)?;
        let x = acc.run(&pack_events(&events)?)?;
        Ok((r, x))
    })?;

    let mut out = Equivalence {
        n: ds.len(),
        matches: 0,
        mismatches: Vec::new(),
        timing_mismatches: Vec::new(),
        reference_correct: 0,
        accel_correct: 0,
    };
    for (i, (r, x)) in pairs.iter().enumerate() {
        let label = ds.label(i);
        out.reference_correct += (r.label == label) as usize;
        out.accel_correct += (x.label == label) as usize;
        if (r.label, r.no_spike) == (x.label, x.no_spike) {
            out.matches += 1;
        } else {
            out.mismatches.push(Mismatch { index: i, reference: (r.label, r.no_spike), accel: (x.label, x.no_spike) });
        }
        if r.class_first_spikes != x.class_first_spikes {
            out.timing_mismatches.push(i);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformRow {
    pub platform: String,
    pub accuracy_pct: f64,
    pub latency_us: Option<f64>,
    pub throughput_img_s: Option<f64>,
    pub energy_nj: Option<f64>,
}

/// Per-platform summary. Every field is a pure function of the artifact,
/// dataset and accelerator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n: usize,
    /// Accelerator-path accuracy.
    pub accuracy_pct: f64,
    pub reference_accuracy_pct: f64,
    pub matches: usize,
    pub no_spike: usize,
    pub mean_service_cycles: f64,
    pub latency_us: f64,
    pub throughput_img_s: f64,
    pub energy_nj: f64,
    pub rows: Vec<PlatformRow>,
}

pub fn dense_accuracy(artifact: &DeploymentArtifact, ds: &Dataset, mode: DenseMode, jobs: usize) -> Result<f64> {
    non_empty(ds)?;
    let dense = DenseBaseline::<f32>::new(artifact)?;
    let labels = par_map(jobs, ds.len(), |i| Ok(dense.run(ds.image(i), mode)?.label))?;
    Ok(pct(labels.iter().enumerate().filter(|(i, &l)| l == ds.label(*i)).count(), ds.len()))
}

pub fn evaluate(artifact: &DeploymentArtifact, ds: &Dataset, cfg: &EvalConfig) -> Result<EvalReport> {
    let eq = verify_equivalence(artifact, ds, cfg)?;
    let acc = Accelerator::new(artifact, cfg.accel)?;
    let results = run_accel_all(&acc, &encode_all(artifact, ds, cfg.jobs)?, cfg.jobs)?;
    let n = ds.len();
    let correct = results.iter().enumerate().filter(|(i, r)| r.label == ds.label(*i)).count();
    let no_spike = results.iter().filter(|r| r.no_spike).count();
    let service: u64 = results.iter().map(|r| r.counters.map_or(0, |c| c.service_cycles)).sum();

    let clock = cfg.accel.clock_hz;
    let latency_s: f64 = cycles_to_latency(service, clock * n as u64)?;
    let throughput_img_s = if service == 0 { 0.0 } else { throughput::<f64>(service, clock * n as u64)? };
    let energy_nj = estimate_energy(latency_s, cfg.accel.dynamic_power_w) * 1e9;
    let latency_us = latency_s * 1e6;

    let mut rows = vec![
        PlatformRow {
            platform: "accel-pl-only".into(),
            accuracy_pct: pct(correct, n),
            latency_us: Some(latency_us),
            throughput_img_s: Some(throughput_img_s),
            energy_nj: Some(energy_nj),
        },
        PlatformRow {
            platform: "ttfs-reference".into(),
            accuracy_pct: pct(eq.reference_correct, n),
            latency_us: None,
            throughput_img_s: None,
            energy_nj: None,
        },
    ];
    for (name, mode) in [("dense-fp32", DenseMode::Fp32), ("dense-int8", DenseMode::Int8)] {
        rows.push(PlatformRow {
            platform: name.into(),
            accuracy_pct: dense_accuracy(artifact, ds, mode, cfg.jobs)?,
            latency_us: None,
            throughput_img_s: None,
            energy_nj: None,
        });
    }

    Ok(EvalReport {
        n,
        accuracy_pct: pct(correct, n),
        reference_accuracy_pct: pct(eq.reference_correct, n),
        matches: eq.matches,
        no_spike,
        mean_service_cycles: service as f64 / n as f64,
        latency_us,
        throughput_img_s,
        energy_nj,
        rows,
    })
}

fn run_accel_all(acc: &Accelerator<'_>, events: &[Vec<SpikeEvent>], jobs: usize) -> Result<Vec<InferenceResult>> {
    par_map(jobs, events.len(), |i| acc.run(&pack_events(&events[i])?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub drop_ratios: Vec<f64>,
    pub accuracies: Vec<f64>,
    pub seed: u64,
}

impl RobustnessReport {
    /// Per-ratio median over several sweeps of the same ratios.
    pub fn median_of(reports: &[RobustnessReport]) -> Result<RobustnessReport> {
        let first = reports.first().ok_or_else(|| Error::contract("no sweeps to combine"))?;
        if reports.iter().any(|r| r.drop_ratios != first.drop_ratios) {
            return Err(Error::contract("sweeps use different drop ratios"));
        }
        let accuracies = (0..first.drop_ratios.len())
            .map(|j| {
                let mut v: Vec<f64> = reports.iter().map(|r| r.accuracies[j]).collect();
                v.sort_by(f64::total_cmp);
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    (v[m - 1] + v[m]) / 2.0
                }
            })
            .collect();
        Ok(RobustnessReport { drop_ratios: first.drop_ratios.clone(), accuracies, seed: first.seed })
    }
}

/// Accelerator accuracy under spike drop. Each ratio restarts one generator
/// from `seed` and walks every image's events in dataset order, so a larger
/// ratio deletes a superset of the spikes a smaller one deletes.
pub fn robustness_sweep(
    artifact: &DeploymentArtifact,
    ds: &Dataset,
    ratios: &[f64],
    seed: u64,
    cfg: &EvalConfig,
) -> Result<RobustnessReport> {
    non_empty(ds)?;
    let acc = Accelerator::new(artifact, cfg.accel)?;
    let events = encode_all(artifact, ds, cfg.jobs)?;
    let mut accuracies = Vec::with_capacity(ratios.len());
    for &p in ratios {
        let mut dropper = SpikeDropper::new(p, seed)?;
        let kept: Vec<Vec<SpikeEvent>> = events.iter().map(|e| dropper.apply(e)).collect();
        let results = run_accel_all(&acc, &kept, cfg.jobs)?;
        let correct = results.iter().enumerate().filter(|(i, r)| r.label == ds.label(*i)).count();
        accuracies.push(pct(correct, ds.len()));
    }
    Ok(RobustnessReport { drop_ratios: ratios.to_vec(), accuracies, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepeatReport {
    pub runs: usize,
    pub n: usize,
    /// Image-run pairs whose prediction differs from the reference.
    pub mismatches: usize,
}

/// Re-runs the accelerator `runs` times over the dataset and counts image-run
/// pairs that disagree with the reference.
pub fn repeatability(artifact: &DeploymentArtifact, ds: &Dataset, runs: usize, cfg: &EvalConfig) -> Result<RepeatReport> {
    non_empty(ds)?;
    let reference = TtfsReference::new(artifact)?;
    let events = encode_all(artifact, ds, cfg.jobs)?;
    let expected = par_map(cfg.jobs, ds.len(), |i| reference.run(&events[i]))?;
    let mut mismatches = 0;
    for _ in 0..runs {
        let acc = Accelerator::new(artifact, cfg.accel)?;
        let got = run_accel_all(&acc, &events, cfg.jobs)?;
        mismatches += got.iter().zip(&expected).filter(|(g, e)| g.prediction() != e.prediction()).count();
    }
    Ok(RepeatReport { runs, n: ds.len(), mismatches })
}
