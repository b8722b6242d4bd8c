use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::Dataset;
use crate::error::{Error, Result};
use crate::model::{build_sequential, encode_ttfs, EncoderConfig, LayerSpec, NetworkSpec, NeuronConfig, SpikeEvent};
use crate::scalar::Scalar;

const NEVER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub out_dim: usize,
    pub num_classes: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Wrong neurons must stay below `threshold * (1 - margin)` until the
    /// correct class has reached `threshold * (1 + margin)`.
    pub margin: f64,
    /// Step multiplier for pulling up a correct class that never fired.
    pub silent_gain: f64,
    pub init_scale: f64,
    /// Per-sample spike-drop probability is drawn uniformly from `[0, this]`.
    pub drop_augmentation: f64,
    /// Uniform firing threshold of every output neuron.
    pub threshold: f64,
    pub encoder: EncoderConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            out_dim: 150,
            num_classes: 10,
            epochs: 6,
            learning_rate: 1e-3,
            margin: 0.2,
            silent_gain: 3.0,
            init_scale: 5e-3,
            drop_augmentation: 0.5,
            threshold: 1.0,
            encoder: EncoderConfig::default(),
            seed: super::DEFAULT_SEED,
        }
    }
}

/// Averaged-perceptron weights kept source-major (`w[pixel * k + neuron]`)
/// so one input spike touches a contiguous row. `acc` accumulates
/// `(step - 1) * delta`, which gives the running average in closed form.
struct Averaged {
    k: usize,
    w: Vec<f64>,
    acc: Vec<f64>,
    step: f64,
}

impl Averaged {
    fn add(&mut self, pixel: usize, neuron: usize, delta: f64) {
        let j = pixel * self.k + neuron;
        self.w[j] += delta;
        self.acc[j] += (self.step - 1.0) * delta;
    }

    fn average(&self) -> Vec<f64> {
        self.w.iter().zip(&self.acc).map(|(w, a)| w - a / self.step).collect()
    }
}

/// First crossing of the low and high thresholds per neuron, plus final potential.
struct Pass {
    lo: Vec<u32>,
    hi: Vec<u32>,
    potential: Vec<f64>,
}

fn forward(w: &[f64], k: usize, events: &[SpikeEvent], th_lo: f64, th_hi: f64, pass: &mut Pass) {
    pass.lo.fill(NEVER);
    pass.hi.fill(NEVER);
    pass.potential.fill(0.0);
    let mut i = 0;
    while i < events.len() {
        let t = events[i].time;
        while i < events.len() && events[i].time == t {
            let row = &w[events[i].neuron as usize * k..][..k];
            for (p, &x) in pass.potential.iter_mut().zip(row) {
                *p += x;
            }
            i += 1;
        }
        for n in 0..k {
            let p = pass.potential[n];
            if pass.lo[n] == NEVER && p >= th_lo {
                pass.lo[n] = t;
            }
            if pass.hi[n] == NEVER && p >= th_hi {
                pass.hi[n] = t;
            }
        }
    }
}

/// Trains `out_dim` output neurons, `out_dim / num_classes` prototypes per
/// class, directly on first-spike timing.
///
/// Each class group starts from binarized training samples of that class.
/// For every sample (with a random fraction of its spikes deleted), any
/// wrong-class neuron that reaches the lowered threshold no later than the
/// correct class reaches the raised one is pushed down on the inputs that had
/// arrived by its crossing. If the correct class stays silent, its most
/// excited neuron is pushed up on all inputs. The returned weights are the
/// average over all steps.
pub fn train_linear_ttfs<T: Scalar>(train: &Dataset, cfg: &TrainConfig) -> Result<NetworkSpec<T>> {
    let (c, k, pixels) = (cfg.num_classes, cfg.out_dim, train.pixels);
    if train.is_empty() {
        return Err(Error::Training("training set is empty".into()));
    }
    if c == 0 || k == 0 || k % c != 0 {
        return Err(Error::Training(format!("{k} outputs cannot form {c} equal class groups")));
    }
    if let Some(i) = (0..train.len()).find(|&i| train.label(i) as usize >= c) {
        return Err(Error::Training(format!("label {} at {i} outside {c} classes", train.label(i))));
    }
    let by_class: Vec<Vec<usize>> =
        (0..c).map(|cls| (0..train.len()).filter(|&i| train.label(i) as usize == cls).collect()).collect();
    if let Some(cls) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::Training(format!("class {cls} has no training samples")));
    }
    if !(cfg.margin >= 0.0 && cfg.margin < 1.0 && cfg.threshold > 0.0 && cfg.learning_rate > 0.0) {
        return Err(Error::Training("margin must be in [0, 1), threshold and learning rate positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.drop_augmentation) {
        return Err(Error::Training(format!("drop augmentation {} outside [0, 1]", cfg.drop_augmentation)));
    }

    let g = k / c;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let events: Vec<Vec<SpikeEvent>> =
        (0..train.len()).map(|i| encode_ttfs(train.image(i), &cfg.encoder)).collect::<Result<_>>()?;
    let active = events.iter().map(Vec::len).sum::<usize>() as f64 / (train.len() * pixels) as f64;

    let mut model = Averaged { k, w: vec![0.0; pixels * k], acc: vec![0.0; pixels * k], step: 0.0 };
    for (cls, members) in by_class.iter().enumerate() {
        let picks: Vec<usize> = if members.len() >= g {
            sample(&mut rng, members.len(), g).into_iter().map(|i| members[i]).collect()
        } else {
            (0..g).map(|_| *members.choose(&mut rng).unwrap()).collect()
        };
        for (j, &pick) in picks.iter().enumerate() {
            let neuron = cls * g + j;
            for (pixel, &v) in train.image(pick).iter().enumerate() {
                let on = if v > 0 { 1.0 } else { 0.0 };
                model.w[pixel * k + neuron] = cfg.init_scale * (on - active);
            }
        }
    }

    let th_lo = cfg.threshold * (1.0 - cfg.margin);
    let th_hi = cfg.threshold * (1.0 + cfg.margin);
    let mut pass = Pass { lo: vec![NEVER; k], hi: vec![NEVER; k], potential: vec![0.0; k] };
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut kept: Vec<SpikeEvent> = Vec::with_capacity(pixels);
    let lr = cfg.learning_rate;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &n in &order {
            model.step += 1.0;
            let p_drop = cfg.drop_augmentation * rng.gen::<f64>();
            kept.clear();
            kept.extend(events[n].iter().copied().filter(|_| rng.gen::<f64>() >= p_drop));
            forward(&model.w, k, &kept, th_lo, th_hi, &mut pass);

            let y = train.label(n) as usize;
            let own = y * g..(y + 1) * g;
            let t_y = own.clone().map(|j| pass.hi[j]).min().unwrap_or(NEVER);

            for j in (0..k).filter(|j| !own.contains(j)) {
                let t = pass.lo[j];
                if t != NEVER && t <= t_y {
                    for e in kept.iter().take_while(|e| e.time <= t) {
                        model.add(e.neuron as usize, j, -lr);
                    }
                }
            }
            if t_y == NEVER {
                let best = own.clone().fold(own.start, |b, j| if pass.potential[j] > pass.potential[b] { j } else { b });
                for e in &kept {
                    model.add(e.neuron as usize, best, lr * cfg.silent_gain);
                }
            }
        }
    }

    let avg = model.average();
    let mut weights = vec![T::zero(); k * pixels];
    for neuron in 0..k {
        for pixel in 0..pixels {
            weights[neuron * pixels + pixel] = T::of(avg[pixel * k + neuron]);
        }
    }
    let net = build_sequential(
        vec![LayerSpec::linear(pixels, k, weights), LayerSpec::lif(k)],
        NeuronConfig::ttfs(vec![T::of(cfg.threshold); k]),
        cfg.encoder,
    )?;
    Ok(net.with_num_classes(c as u32))
}
